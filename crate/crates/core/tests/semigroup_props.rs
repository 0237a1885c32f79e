use fsi_core::fem::{build_space, MaterialParams};
use fsi_core::mesh::generate;
use fsi_core::semigroup::{energy_identity_check, evolve, evolve_with, h_norm, EvolutionConfig, Stepper};
use fsi_core::solver::{FsiState, ResolventData, ResolventSolver};
use proptest::prelude::*;

fn difference(a: &FsiState, b: &FsiState) -> FsiState {
    let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p - q).collect();
    FsiState {
        u: d(&a.u, &b.u),
        w: d(&a.w, &b.w),
        z: d(&a.z, &b.z),
        pi: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dissipativity_identity(seed in any::<u64>(), lam in 0.05f64..20.0, lame in 0.0f64..4.0, mu in 0.1f64..4.0) {
        let space = build_space(&generate(0).unwrap());
        let solver = ResolventSolver::new(&space, &MaterialParams::new(lame, mu, lam).unwrap()).unwrap();
        let data = ResolventData::random(&space, &solver.mats, seed);
        let id = energy_identity_check(&solver, &data).unwrap();
        prop_assert!(id.residual <= 1e-8 * id.strain.max(1.0), "{:?}", id);
        prop_assert!(id.a_yy <= 0.0);
    }

    #[test]
    fn backward_euler_contracts(seed in any::<u64>()) {
        let space = build_space(&generate(0).unwrap());
        let cfg = EvolutionConfig::new(0.3, 30, 10).unwrap();
        let (trace, _) = evolve(&space, &MaterialParams::default(), &FsiState::random(&space, seed), &cfg).unwrap();
        prop_assert!(trace.is_monotone(1e-12));
        prop_assert!(trace.balance_residual() <= 1e-6);
        prop_assert!(trace.energy_drop() >= trace.cumulative_dissipation() * (1.0 - 1e-9));
    }
}

#[test]
fn time_step_halving_is_first_order() {
    let space = build_space(&generate(0).unwrap());
    let params = MaterialParams::default();
    let init = {
        // smooth a random state with a few resolvent steps
        let s = Stepper::new(&space, &params, 0.05).unwrap();
        (0..5).fold(FsiState::random(&space, 21), |y, _| s.step(&y).unwrap().0)
    };
    let run = |n: usize| {
        let cfg = EvolutionConfig::new(0.05, n, n).unwrap();
        evolve(&space, &params, &init, &cfg).unwrap().1
    };
    let (a, b, c) = (run(50), run(100), run(200));
    let mats = &Stepper::new(&space, &params, 1.0).unwrap().solver.mats;
    let e1 = h_norm(mats, &difference(&a, &b));
    let e2 = h_norm(mats, &difference(&b, &c));
    let ratio = e1 / e2;
    assert!((1.6..=2.4).contains(&ratio), "ratio {ratio} ({e1:e}, {e2:e})");
}

#[test]
fn reused_stepper_matches_fresh_evolution() {
    let space = build_space(&generate(0).unwrap());
    let params = MaterialParams::default();
    let cfg = EvolutionConfig::new(0.1, 10, 5).unwrap();
    let stepper = Stepper::new(&space, &params, cfg.dt()).unwrap();
    let init = FsiState::random(&space, 3);
    let (t1, f1) = evolve_with(&stepper, &init, &cfg).unwrap();
    let (t2, f2) = evolve(&space, &params, &init, &cfg).unwrap();
    assert_eq!(t1.energies, t2.energies);
    assert_eq!(f1.u, f2.u);
    assert_eq!(t1.rows.len(), 3);
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(EvolutionConfig::new(0.0, 10, 1).is_err());
    assert!(EvolutionConfig::new(1.0, 0, 1).is_err());
    let space = build_space(&generate(0).unwrap());
    assert!(Stepper::new(&space, &MaterialParams::default(), -1.0).is_err());
}
