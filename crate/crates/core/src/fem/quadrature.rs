//! Quadrature on the reference triangle `{(x, y) : x, y ≥ 0, x + y ≤ 1}`.
//!
//! Rules are collapsed (Duffy) tensor products of Gauss-Legendre rules, which
//! gives an exact rule of any requested polynomial degree.

/// Quadrature rule with points in barycentric coordinates `(1−x−y, x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    /// Positive weights, summing to the reference area `1/2`.
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Degree used for every system matrix (integrands reach degree 4).
pub const SYSTEM_DEGREE: usize = 6;
/// Degree used for manufactured-data load vectors: `u*` has degree 19 and
/// is tested against quadratics.
pub const LOAD_DEGREE: usize = 22;
/// Degree used for error norms: squared degree-19 fields.
pub const ERROR_DEGREE: usize = 38;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

impl QuadratureRule {
    /// Rule exact for all polynomials of total degree `≤ degree`.
    pub fn of_degree(degree: usize) -> Self {
        // x^a y^b maps to a polynomial of degree a+b+1 in the collapsed
        // direction; Gauss with n points is exact to 2n−1.
        let n = (degree + 2).div_ceil(2);
        let (xs, ws) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&s, &ws_) in xs.iter().zip(&ws) {
            for (&t, &wt) in xs.iter().zip(&ws) {
                let x = s;
                let y = t * (1.0 - s);
                points.push([1.0 - x - y, x, y]);
                weights.push(ws_ * wt * (1.0 - s));
            }
        }
        QuadratureRule {
            points,
            weights,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integrates `f(x, y)` over the reference triangle.
    pub fn integrate_reference(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[1], p[2]))
            .sum()
    }
}
