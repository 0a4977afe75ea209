//! Gauss-Legendre rules on the reference interval, square, triangle and
//! tetrahedron. Simplex rules are collapsed (Duffy) tensor products of
//! one-dimensional Gauss rules, so any polynomial degree can be reached.

use crate::mesh::{CellKind, Vec3};

/// Points and weights on a reference domain: `[0,1]`, `[0,1]^2`, the unit
/// right triangle or the unit right tetrahedron.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

/// `n`-point Gauss-Legendre nodes and weights on `[0,1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = (1.0 - x) / 2.0;
        nodes[n - 1 - i] = (1.0 + x) / 2.0;
        weights[i] = w / 2.0;
        weights[n - 1 - i] = w / 2.0;
    }
    (nodes, weights)
}

impl QuadratureRule {
    pub fn interval(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            points: x.iter().map(|&t| Vec3::new(t, 0.0, 0.0)).collect(),
            weights: w,
            degree: 2 * n - 1,
        }
    }

    pub fn square(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push(Vec3::new(x[i], x[j], 0.0));
                weights.push(w[i] * w[j]);
            }
        }
        // Tensor rules are exact per variable up to 2n-1.
        Self { points, weights, degree: 2 * n - 1 }
    }

    pub fn triangle(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let (u, v) = (x[i], x[j]);
                points.push(Vec3::new(u, v * (1.0 - u), 0.0));
                weights.push(w[i] * w[j] * (1.0 - u));
            }
        }
        Self { points, weights, degree: 2 * n - 2 }
    }

    pub fn tetrahedron(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n * n);
        let mut weights = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (u, v, s) = (x[i], x[j], x[k]);
                    points.push(Vec3::new(u, v * (1.0 - u), s * (1.0 - u) * (1.0 - v)));
                    weights.push(w[i] * w[j] * w[k] * (1.0 - u) * (1.0 - u) * (1.0 - v));
                }
            }
        }
        Self { points, weights, degree: 2 * n - 3 }
    }

    /// Smallest rule on the reference cell exact for total degree `degree`.
    pub fn for_cell(kind: CellKind, degree: usize) -> Self {
        match kind {
            CellKind::Square => Self::square(degree / 2 + 1),
            CellKind::Triangle => Self::triangle((degree + 2).div_ceil(2)),
            CellKind::Tetrahedron => Self::tetrahedron((degree + 3).div_ceil(2)),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
