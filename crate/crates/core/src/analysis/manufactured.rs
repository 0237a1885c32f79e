//! Manufactured solution built from the stream function `ψ = φ(x) φ(y)`,
//! `φ(x) = x²(1 − x)²(x − 1/3)³(2/3 − x)³`.
//!
//! The exact fields are `u = (A B′, −A′ B)` with `A = B = φ`, `w = z = 0`
//! and `π = 0`. The data `u*` is assembled from printed coefficient lists of
//! `φ′, φ″, φ‴`, which are checked against formal derivatives on
//! construction.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{FsiError, Result};

/// Rational coefficients, highest degree first.
type Coeffs = Vec<Rational64>;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `φ` expanded, degree 10.
pub fn phi_printed() -> Coeffs {
    vec![
        r(-1, 1),
        r(5, 1),
        r(-32, 3),
        r(38, 3),
        r(-247, 27),
        r(37, 9),
        r(-818, 729),
        r(124, 729),
        r(-8, 729),
        r(0, 1),
        r(0, 1),
    ]
}

/// `φ′` as printed, degree 9.
pub fn dphi_printed() -> Coeffs {
    vec![
        r(-10, 1),
        r(45, 1),
        r(-256, 3),
        r(266, 3),
        r(-494, 9),
        r(185, 9),
        r(-3272, 729),
        r(124, 243),
        r(-16, 729),
        r(0, 1),
    ]
}

/// `φ″` as printed, degree 8.
pub fn d2phi_printed() -> Coeffs {
    vec![
        r(-90, 1),
        r(360, 1),
        r(-1792, 3),
        r(532, 1),
        r(-2470, 9),
        r(740, 9),
        r(-3272, 243),
        r(248, 243),
        r(-16, 729),
    ]
}

/// `φ‴` as printed, degree 7.
pub fn d3phi_printed() -> Coeffs {
    vec![
        r(-720, 1),
        r(2520, 1),
        r(-3584, 1),
        r(2660, 1),
        r(-9880, 9),
        r(740, 3),
        r(-6544, 243),
        r(248, 243),
    ]
}

/// Product of two polynomials, highest degree first.
pub fn poly_mul(a: &[Rational64], b: &[Rational64]) -> Coeffs {
    let mut out = vec![Rational64::from_integer(0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Formal derivative, highest degree first.
pub fn poly_derivative(a: &[Rational64]) -> Coeffs {
    let n = a.len() - 1;
    if n == 0 {
        return vec![Rational64::from_integer(0)];
    }
    a[..n]
        .iter()
        .enumerate()
        .map(|(i, c)| c * Rational64::from_integer((n - i) as i64))
        .collect()
}

/// `x²(1 − x)²(x − 1/3)³(2/3 − x)³` expanded in rational arithmetic.
pub fn phi_expanded() -> Coeffs {
    let x = vec![r(1, 1), r(0, 1)];
    let one_minus_x = vec![r(-1, 1), r(1, 1)];
    let x_minus_third = vec![r(1, 1), r(-1, 3)];
    let two_thirds_minus_x = vec![r(-1, 1), r(2, 3)];
    let mut p = vec![r(1, 1)];
    for (f, k) in [
        (&x, 2),
        (&one_minus_x, 2),
        (&x_minus_third, 3),
        (&two_thirds_minus_x, 3),
    ] {
        for _ in 0..k {
            p = poly_mul(&p, f);
        }
    }
    p
}

fn to_f64(c: &[Rational64]) -> Vec<f64> {
    c.iter().map(|q| *q.numer() as f64 / *q.denom() as f64).collect()
}

/// Horner evaluation, highest degree first.
pub fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().fold(0.0, |acc, &a| acc * x + a)
}

/// Exact Horner evaluation.
pub fn horner_rational(c: &[Rational64], x: Rational64) -> Rational64 {
    c.iter().fold(Rational64::from_integer(0), |acc, &a| acc * x + a)
}

fn compare(name: &'static str, printed: &[Rational64], expected: &[Rational64]) -> Result<()> {
    let deg = expected.len().max(printed.len()) - 1;
    // align by degree
    let get = |c: &[Rational64], d: usize| {
        if d < c.len() {
            c[c.len() - 1 - d]
        } else {
            Rational64::from_integer(0)
        }
    };
    for d in (0..=deg).rev() {
        let (p, e) = (get(printed, d), get(expected, d));
        if p != e {
            return Err(FsiError::CoefficientMismatch {
                polynomial: name,
                degree: d,
                printed: p.to_string(),
                expected: e.to_string(),
            });
        }
    }
    Ok(())
}

/// Closed-form fields and data of the benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct ManufacturedCase {
    pub lambda: f64,
    /// `φ, φ′, φ″, φ‴` as used for the data, highest degree first.
    pub phi: [Vec<f64>; 4],
    /// Derivatives `φ … φ⁗` computed formally from `phi[0]`; used for the
    /// exact fields.
    formal: [Vec<f64>; 5],
}

/// Validated case: the printed lists must match the formal derivatives.
pub fn manufactured_case(lambda: f64) -> Result<ManufacturedCase> {
    ManufacturedCase::from_printed(
        lambda,
        &phi_printed(),
        &dphi_printed(),
        &d2phi_printed(),
        &d3phi_printed(),
    )
}

impl ManufacturedCase {
    /// Checks the given lists in rational arithmetic and builds the case.
    pub fn from_printed(
        lambda: f64,
        phi: &[Rational64],
        d1: &[Rational64],
        d2: &[Rational64],
        d3: &[Rational64],
    ) -> Result<Self> {
        compare("phi", phi, &phi_expanded())?;
        compare("phi'", d1, &poly_derivative(phi))?;
        compare("phi''", d2, &poly_derivative(d1))?;
        compare("phi'''", d3, &poly_derivative(d2))?;
        Self::unchecked(lambda, phi, d1, d2, d3)
    }

    /// Builds the case without checking the derivative lists. The exact
    /// fields still come from formal derivatives of `phi`, so a faulty list
    /// shows up as a data-identity residual.
    pub fn unchecked(
        lambda: f64,
        phi: &[Rational64],
        d1: &[Rational64],
        d2: &[Rational64],
        d3: &[Rational64],
    ) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(FsiError::InvalidParams(format!("shift must be > 0, got {lambda}")));
        }
        let mut formal: Vec<Vec<f64>> = Vec::with_capacity(5);
        let mut cur = phi.to_vec();
        for _ in 0..5 {
            formal.push(to_f64(&cur));
            cur = poly_derivative(&cur);
        }
        Ok(ManufacturedCase {
            lambda,
            phi: [to_f64(phi), to_f64(d1), to_f64(d2), to_f64(d3)],
            formal: formal.try_into().expect("five derivatives"),
        })
    }

    /// `φ^{(k)}(x)` from the formal derivative chain, `k ≤ 4`.
    pub fn phi_derivative(&self, k: usize, x: f64) -> f64 {
        horner(&self.formal[k], x)
    }

    /// Exact velocity `(A B′, −A′ B)`.
    pub fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        let d = |k, t| self.phi_derivative(k, t);
        [d(0, x) * d(1, y), -d(1, x) * d(0, y)]
    }

    /// Exact velocity gradient `[[∂x u₁, ∂y u₁], [∂x u₂, ∂y u₂]]`.
    pub fn velocity_gradient(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let d = |k, t| self.phi_derivative(k, t);
        [
            [d(1, x) * d(1, y), d(0, x) * d(2, y)],
            [-d(2, x) * d(0, y), -d(1, x) * d(1, y)],
        ]
    }

    /// `Δu` from the formal derivatives.
    pub fn velocity_laplacian(&self, x: f64, y: f64) -> [f64; 2] {
        let d = |k, t| self.phi_derivative(k, t);
        [
            d(2, x) * d(1, y) + d(0, x) * d(3, y),
            -d(3, x) * d(0, y) - d(1, x) * d(2, y),
        ]
    }

    /// Data `u*` from the stored lists:
    /// `u₁* = λAB′ − ½(A″B′ + AB‴)`, `u₂* = −λA′B + ½(A‴B + A′B″)`.
    pub fn data(&self, x: f64, y: f64) -> [f64; 2] {
        let p = |k: usize, t: f64| horner(&self.phi[k], t);
        let lam = self.lambda;
        [
            lam * p(0, x) * p(1, y) - 0.5 * (p(2, x) * p(1, y) + p(0, x) * p(3, y)),
            -lam * p(1, x) * p(0, y) + 0.5 * (p(3, x) * p(0, y) + p(1, x) * p(2, y)),
        ]
    }
}

/// Points of the Halton sequence (bases 2 and 3) that fall in `Ω_f`.
pub fn halton_fluid_points(count: usize) -> Vec<[f64; 2]> {
    fn radical_inverse(mut i: u64, base: u64) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    let third = 1.0 / 3.0;
    let in_solid = |t: f64| t >= third && t <= 2.0 * third;
    let mut pts = Vec::with_capacity(count);
    let mut i = 1;
    while pts.len() < count {
        let p = [radical_inverse(i, 2), radical_inverse(i, 3)];
        if !(in_solid(p[0]) && in_solid(p[1])) {
            pts.push(p);
        }
        i += 1;
    }
    pts
}

/// Result of sampling `λu − ½Δu − u*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataIdentity {
    pub max_abs: f64,
    /// `max|u*|` over the samples.
    pub data_scale: f64,
    /// `max_abs / data_scale`.
    pub relative: f64,
}

/// Samples `λu − ½Δu − u*` at 1000 Halton points of `Ω_f`; `u` and `Δu` use
/// the formal derivatives, `u*` uses the stored lists.
pub fn verify_data_identity(case: &ManufacturedCase) -> DataIdentity {
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for [x, y] in halton_fluid_points(1000) {
        let u = case.velocity(x, y);
        let lap = case.velocity_laplacian(x, y);
        let f = case.data(x, y);
        for c in 0..2 {
            max_abs = max_abs.max((case.lambda * u[c] - 0.5 * lap[c] - f[c]).abs());
            scale = scale.max(f[c].abs());
        }
    }
    DataIdentity {
        max_abs,
        data_scale: scale,
        relative: if scale > 0.0 { max_abs / scale } else { max_abs },
    }
}
