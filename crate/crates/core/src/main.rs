fn main() {
    std::process::exit(chemotaxis::cli_io::cli_main(std::env::args_os()));
}
