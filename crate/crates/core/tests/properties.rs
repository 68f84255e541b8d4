use proptest::prelude::*;

use chemotaxis::cli_io::{parse_config, RunConfig};
use chemotaxis::elliptic::{chemical_gradient, solve_chemical};
use chemotaxis::grid::{make_grid, Grid, GridKind, StateField};
use chemotaxis::model_params::{derive_bounds, CoefficientField, ModelParams};
use chemotaxis::stepper::{default_dt, step, Scheme, StepConfig, DEFAULT_CFL_SAFETY};

fn arb_params() -> impl Strategy<Value = ModelParams> {
    (
        0.0..2.0f64,
        0.0..2.0f64,
        0.3..4.0f64,
        0.3..4.0f64,
        0.0..2.0f64,
        0.0..2.0f64,
    )
        .prop_map(|(c1, c2, l1, l2, m1, m2)| ModelParams::new(c1, c2, l1, l2, m1, m2, 1.0).unwrap())
}

fn arb_density(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..3.0f64, n)
}

fn grid(kind: GridKind) -> Grid {
    make_grid(kind, 8.0, 40).unwrap()
}

fn evolve(
    g: &Grid,
    u0: Vec<f64>,
    coeffs: &CoefficientField,
    p: &ModelParams,
    cfg: &StepConfig,
    steps: usize,
) -> Vec<StateField> {
    let mut state = StateField::new(0.0, u0);
    let mut out = vec![state.clone()];
    for _ in 0..steps {
        state = step(g, &state, coeffs, p, cfg).unwrap();
        out.push(state.clone());
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transport_and_diffusion_conserve_mass(
        p in arb_params(),
        u0 in arb_density(41),
        whole in any::<bool>(),
        explicit in any::<bool>(),
    ) {
        let kind = if whole { GridKind::WholeLine } else { GridKind::HalfLine };
        let g = make_grid(kind, 8.0, 40).unwrap();
        let u0 = if whole { g.sample(|x| u0[(x.abs() * 5.0) as usize % 41]) } else { u0 };
        let scheme = if explicit { Scheme::Explicit } else { Scheme::Imex };
        let dt = default_dt(&g, &p, 10.0, scheme, DEFAULT_CFL_SAFETY);
        let cfg = StepConfig::new(dt, 0.0, 1.0).with_scheme(scheme);
        let states = evolve(&g, u0, &CoefficientField::constant(0.0, 0.0), &p, &cfg, 20);
        for w in states.windows(2) {
            let (m0, m1) = (g.integrate(&w[0].u), g.integrate(&w[1].u));
            prop_assert!((m1 - m0).abs() <= 1e-10 * m0.max(1.0));
        }
    }

    #[test]
    fn density_stays_nonnegative(p in arb_params(), u0 in arb_density(41)) {
        let g = grid(GridKind::HalfLine);
        let dt = default_dt(&g, &p, 10.0, Scheme::Imex, DEFAULT_CFL_SAFETY);
        let cfg = StepConfig { clip_negative: false, ..StepConfig::new(dt, 0.0, 1.0) };
        let coeffs = CoefficientField::constant(1.0, 1.0);
        for s in evolve(&g, u0, &coeffs, &p, &cfg, 20) {
            prop_assert!(s.u.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn ordered_data_stay_ordered_without_taxis(
        u0 in arb_density(41),
        bump in arb_density(41),
        a in 0.2..2.0f64,
        b in 0.2..2.0f64,
    ) {
        let g = grid(GridKind::HalfLine);
        let p = ModelParams::default();
        let w0: Vec<f64> = u0.iter().zip(&bump).map(|(u, d)| u + d).collect();
        let dt = default_dt(&g, &p, 10.0, Scheme::Imex, DEFAULT_CFL_SAFETY);
        let cfg = StepConfig::new(dt, 0.0, 1.0);
        let coeffs = CoefficientField::constant(a, b);
        let low = evolve(&g, u0, &coeffs, &p, &cfg, 25);
        let high = evolve(&g, w0, &coeffs, &p, &cfg, 25);
        for (l, h) in low.iter().zip(&high) {
            prop_assert!(l.u.iter().zip(&h.u).all(|(x, y)| x <= &(y + 1e-12)));
        }
    }

    #[test]
    fn chemical_gradient_bounded(u in arb_density(41), lambda in 0.5..4.0f64, mu in 0.1..3.0f64) {
        let g = make_grid(GridKind::HalfLine, 8.0, 40).unwrap();
        let v = solve_chemical(&g, &u, lambda, mu).unwrap();
        let vx = chemical_gradient(&g, &v).unwrap();
        let sup_u = u.iter().copied().fold(0.0, f64::max);
        let sup_vx = vx.iter().map(|d| d.abs()).fold(0.0, f64::max);
        prop_assert!(vx[0] == 0.0);
        prop_assert!(sup_vx <= mu / lambda.sqrt() * sup_u + 10.0 * g.dx * g.dx * mu * sup_u + 1e-12);
    }

    #[test]
    fn bounds_ordered_when_defined(p in arb_params(), a_inf in 0.1..2.0f64, spread in 0.0..1.0f64, b_inf in 0.1..6.0f64, u0 in 0.0..4.0f64) {
        let coeffs = CoefficientField::constant(1.0, 1.0).with_extrema(a_inf, a_inf + spread, b_inf, b_inf + spread);
        let bounds = derive_bounds(&p, &coeffs, u0);
        if let (Some(c), Some(l)) = (bounds.C_u0, bounds.limsup_bound) {
            prop_assert!(c >= u0 && c >= l);
        }
        if let (Some(m0), Some(big)) = (bounds.m0, bounds.M0) {
            prop_assert!(0.0 < m0 && m0 <= big);
        }
        if let Some(r) = bounds.rho {
            prop_assert!(r >= 0.0);
        }
    }

    #[test]
    fn config_round_trips(p in arb_params(), t_end in 0.5..20.0f64, n in 8usize..500) {
        let text = format!(
            "problem = \"half_line\"\n[params]\nchi1 = {}\nchi2 = {}\nlambda1 = {}\nlambda2 = {}\nmu1 = {}\nmu2 = {}\n[grid]\nn_cells = {n}\n[step]\nt_end = {t_end}\n",
            p.chi1, p.chi2, p.lambda1, p.lambda2, p.mu1, p.mu2
        );
        let cfg: RunConfig = parse_config(&text).unwrap();
        prop_assert_eq!(cfg.params, p);
        let again = parse_config(&cfg.to_toml()).unwrap();
        prop_assert_eq!(again.to_toml(), cfg.to_toml());
    }
}
