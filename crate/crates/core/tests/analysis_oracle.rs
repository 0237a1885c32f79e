use fsi_core::analysis::convergence::{compute_rates, parse_convergence_csv, rate};
use fsi_core::analysis::infsup::{constant_mode_beta, InfSupOperators};
use fsi_core::analysis::manufactured::{d2phi_printed, d3phi_printed, dphi_printed, phi_printed, ManufacturedCase};
use fsi_core::analysis::{
    convergence_study, convergence_study_with, error_norms, infsup_dense, infsup_study, manufactured_case,
    verify_data_identity, StudyMode,
};
use fsi_core::fem::{assemble, build_space, MaterialParams};
use fsi_core::mesh::generate;
use fsi_core::solver::FsiState;
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

type Poly = Vec<BigRational>; // ascending powers

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut r = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            r[i + j] += x * y;
        }
    }
    r
}

fn deriv(a: &Poly) -> Poly {
    a.iter().enumerate().skip(1).map(|(k, c)| c * q(k as i64, 1)).collect()
}

fn integrate(a: &Poly, lo: &BigRational, hi: &BigRational) -> BigRational {
    let anti = |x: &BigRational| {
        let mut s = BigRational::zero();
        let mut p = x.clone();
        for (k, c) in a.iter().enumerate() {
            s += c * &p / q(k as i64 + 1, 1);
            p *= x;
        }
        s
    };
    anti(hi) - anti(lo)
}

/// `x²(1 − x)²(x − 1/3)³(2/3 − x)³` built factor by factor.
fn phi() -> Poly {
    let mut p: Poly = vec![q(1, 1)];
    for f in [
        vec![q(0, 1), q(1, 1)],
        vec![q(0, 1), q(1, 1)],
        vec![q(1, 1), q(-1, 1)],
        vec![q(1, 1), q(-1, 1)],
    ] {
        p = mul(&p, &f);
    }
    for _ in 0..3 {
        p = mul(&p, &vec![q(-1, 3), q(1, 1)]);
        p = mul(&p, &vec![q(2, 3), q(-1, 1)]);
    }
    p
}

/// Exact `(‖u‖², ‖∇u‖², ‖ε(u)‖²)` over the square minus its middle third,
/// for `u = (φ(x)φ'(y), −φ'(x)φ(y))`.
fn exact_norms() -> (f64, f64, f64) {
    let p0 = phi();
    let p1 = deriv(&p0);
    let p2 = deriv(&p1);
    let (zero, one, a, b) = (q(0, 1), q(1, 1), q(1, 3), q(2, 3));
    // ∫∫ f(x) g(y) over Ω_f, f and g 1D products
    let sep = |f: &Poly, g: &Poly| {
        integrate(f, &zero, &one) * integrate(g, &zero, &one) - integrate(f, &a, &b) * integrate(g, &a, &b)
    };
    let (f00, f11, f22, f02) = (mul(&p0, &p0), mul(&p1, &p1), mul(&p2, &p2), mul(&p0, &p2));
    let l2 = sep(&f00, &f11) + sep(&f11, &f00);
    let h1 = q(2, 1) * sep(&f11, &f11) + sep(&f00, &f22) + sep(&f22, &f00);
    // |ε|² = 2φ'²φ'² + ½(φφ'' − φ''φ)²
    let eps = q(2, 1) * sep(&f11, &f11) + q(1, 2) * (sep(&f00, &f22) + sep(&f22, &f00)) - sep(&f02, &f02);
    (l2.to_f64().unwrap(), h1.to_f64().unwrap(), eps.to_f64().unwrap())
}

#[test]
fn zero_state_error_matches_closed_form() {
    let (l2, h1, eps) = exact_norms();
    let case = manufactured_case(1.0).unwrap();
    for level in 0..=1 {
        let space = build_space(&generate(level).unwrap());
        let mats = assemble(&space, &MaterialParams::default());
        let n = error_norms(
            &space,
            &FsiState::zeros(&space),
            &vec![0.0; space.n_pressure()],
            &case,
            &mats,
        )
        .unwrap();
        let want_h1 = (l2 + h1).sqrt();
        assert!((n.eu_h1 - want_h1).abs() / want_h1 <= 1e-10, "{} vs {want_h1}", n.eu_h1);
        assert!((n.eu_eps - eps.sqrt()).abs() / eps.sqrt() <= 1e-10);
        assert_eq!((n.epi_l2, n.ew_energy, n.ew_h1_full), (0.0, 0.0, 0.0));
    }
}

#[test]
fn error_norms_reject_mismatched_state() {
    let s0 = build_space(&generate(0).unwrap());
    let s1 = build_space(&generate(1).unwrap());
    let mats = assemble(&s0, &MaterialParams::default());
    let case = manufactured_case(1.0).unwrap();
    assert!(error_norms(&s0, &FsiState::zeros(&s1), &vec![0.0; s0.n_pressure()], &case, &mats).is_err());
}

#[test]
fn interpolant_study_has_zero_solid_and_pressure_errors() {
    let r = convergence_study_with(&[0, 1], &MaterialParams::default(), StudyMode::Interpolant).unwrap();
    assert!(r.all_succeeded());
    for row in &r.rows {
        let n = row.norms.unwrap();
        assert_eq!((n.epi_l2, n.ew_energy, n.ew_h1_full), (0.0, 0.0, 0.0));
        assert!(n.eu_h1 > 0.0);
    }
    let rr = &r.rates[0];
    assert!(rr.pressure_l2.is_none() && rr.solid_h1.is_none());
    assert!(rr.fluid_h1.unwrap() > 1.0);
}

#[test]
fn csv_round_trip_reproduces_rates() {
    let r = convergence_study(&[0, 1, 2], &MaterialParams::default()).unwrap();
    let parsed = parse_convergence_csv(&r.convergence_csv()).unwrap();
    assert_eq!(parsed.len(), 3);
    for (row, (level, norms)) in r.rows.iter().zip(&parsed) {
        assert_eq!(row.level, *level);
        assert_eq!(row.norms, *norms);
    }
    assert_eq!(compute_rates(&parsed), r.rates);
    let text = r.rates_csv();
    assert!(text.lines().nth(1).unwrap().starts_with("1/2,"));
    assert!(text.lines().nth(2).unwrap().starts_with("2/3,"));
}

#[test]
fn malformed_csv_names_the_line() {
    let bad = "level,elements,hypotenuse,eu_h1,epi_l2,ew_h1,eu_eps,ew_h1_full,status\n0,72,0.2,abc,1,1,1,1,ok\n";
    let err = parse_convergence_csv(bad).unwrap_err().to_string();
    assert!(err.contains('2'), "{err}");
}

#[test]
fn failed_level_is_recorded_and_others_still_run() {
    let r = convergence_study(&[0, 40], &MaterialParams::default()).unwrap();
    assert!(!r.all_succeeded());
    assert!(r.rows[0].norms.is_some());
    assert!(r.rows[1].norms.is_none());
    assert!(r.rows[1].failure.as_deref().unwrap().contains("40"));
    assert!(r.rates[0].fluid_h1.is_none());
    assert!(r.convergence_csv().contains("failed"));
    assert!(convergence_study(&[1, 0], &MaterialParams::default()).is_err());
}

#[test]
fn rates_use_level_distance_and_floor() {
    assert_eq!(rate(4.0, 1.0, 1), Some(2.0));
    assert_eq!(rate(16.0, 1.0, 2), Some(2.0));
    assert_eq!(rate(0.0, 1.0, 1), None);
    assert_eq!(rate(1.0, 1e-16, 1), None);
}

#[test]
fn infsup_matches_dense_oracle() {
    let space = build_space(&generate(0).unwrap());
    let study = infsup_study(&[0]).unwrap();
    let dense = infsup_dense(&space).unwrap();
    assert!((study.rows[0].beta - dense).abs() <= 1e-6);

    // independent dense Schur complement restricted to constants
    let ops = InfSupOperators::new(&space);
    let k = ops.gram.to_dense();
    let b = ops.divergence.to_dense();
    let ones = nalgebra::DVector::from_element(b.nrows(), 1.0);
    let bt1 = b.transpose() * &ones;
    let x = k.lu().solve(&bt1).unwrap();
    let m1 = ops.pressure_mass.to_dense() * &ones;
    let want = (bt1.dot(&x) / ones.dot(&m1)).sqrt();
    let got = constant_mode_beta(&space).unwrap();
    assert!((got - want).abs() <= 1e-10 * want);
    // the smallest mode is no larger than the constant mode
    assert!(dense <= got + 1e-12);
}

#[test]
fn data_identity_holds_for_other_shifts_and_detects_faults() {
    for lam in [0.5, 1.0, 2.0, 17.0] {
        let id = verify_data_identity(&manufactured_case(lam).unwrap());
        assert!(id.relative <= 1e-12, "λ={lam}: {id:?}");
    }
    let mut d3 = d3phi_printed();
    d3[0] += Rational64::new(1, 1000);
    assert!(ManufacturedCase::from_printed(1.0, &phi_printed(), &dphi_printed(), &d2phi_printed(), &d3).is_err());
    let faulty = ManufacturedCase::unchecked(1.0, &phi_printed(), &dphi_printed(), &d2phi_printed(), &d3).unwrap();
    assert!(verify_data_identity(&faulty).relative > 1e-6);
}

#[test]
fn printed_phi_matches_independent_expansion() {
    let p = phi();
    let printed = phi_printed();
    // printed lists run from the highest degree down
    assert_eq!(printed.len(), p.len());
    for (k, c) in printed.iter().rev().enumerate() {
        let c = q(*c.numer(), *c.denom());
        assert_eq!(c, p[k], "degree {k}");
    }
    let mut d = p.clone();
    for list in [dphi_printed(), d2phi_printed(), d3phi_printed()] {
        d = deriv(&d);
        for (k, c) in list.iter().rev().enumerate() {
            assert_eq!(q(*c.numer(), *c.denom()), d[k], "degree {k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn velocity_is_divergence_free(x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let case = manufactured_case(1.0).unwrap();
        let g = case.velocity_gradient(x, y);
        prop_assert!((g[0][0] + g[1][1]).abs() <= 1e-18);
    }

    #[test]
    fn rates_invert_power_laws(c in 1e-8f64..1.0, p in 0.5f64..4.0, k in 1u32..4) {
        let f = c / 2f64.powf(p * k as f64);
        prop_assume!(f > 1e-14);
        prop_assert!((rate(c, f, k).unwrap() - p).abs() <= 1e-10);
    }
}
