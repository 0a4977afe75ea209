//! Preconditioned conjugate gradients and Lanczos estimates of the extreme
//! eigenvalues of `M^{-1} A`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{axpy, dot, CsrMatrix};

/// Symmetric positive definite approximation of `A^{-1}`.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

#[derive(Clone, Debug)]
pub struct IdentityPreconditioner(pub usize);

impl Preconditioner for IdentityPreconditioner {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

#[derive(Clone, Debug)]
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if let Some((row, &d)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
            return Err(Error::NotPositiveDefinite { row, pivot: d });
        }
        Ok(Self { inv_diag: diag.iter().map(|d| 1.0 / d).collect() })
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn dim(&self) -> usize {
        self.inv_diag.len()
    }

    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.iter().zip(&self.inv_diag).map(|(x, d)| x * d).collect()
    }
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAXIT: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    /// `||r||_{M^{-1}} / ||b||_{M^{-1}}` at exit.
    pub relative_residual: f64,
    /// Relative residual after each iteration, starting with 1 for `x = 0`.
    pub residual_history: Vec<f64>,
    /// PCG step lengths.
    pub alphas: Vec<f64>,
    /// PCG direction-update coefficients.
    pub betas: Vec<f64>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// PCG from `x = 0`, stopping when the preconditioned residual norm has
/// dropped by `tol`.
pub fn pcg(a: &CsrMatrix, b: &[f64], prec: &dyn Preconditioner, tol: f64, maxit: usize) -> Result<(Vec<f64>, SolveReport)> {
    pcg_monitored(a, b, prec, tol, maxit, |_, _| {})
}

/// As [`pcg`], calling `monitor(iteration, x)` after every update.
pub fn pcg_monitored(
    a: &CsrMatrix,
    b: &[f64],
    prec: &dyn Preconditioner,
    tol: f64,
    maxit: usize,
    mut monitor: impl FnMut(usize, &[f64]),
) -> Result<(Vec<f64>, SolveReport)> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: b.len() });
    }
    if prec.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: prec.dim() });
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = prec.apply(&r);
    let mut rz = dot(&r, &z);
    let mut report = SolveReport {
        status: SolveStatus::Converged,
        iterations: 0,
        relative_residual: 0.0,
        residual_history: vec![1.0],
        alphas: Vec::new(),
        betas: Vec::new(),
    };
    if rz == 0.0 {
        return Ok((x, report));
    }
    let rz0 = rz;
    report.relative_residual = 1.0;
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    for it in 1..=maxit {
        a.matvec(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::Indefinite { iteration: it, curvature });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        report.alphas.push(alpha);
        report.iterations = it;
        monitor(it, &x);
        z = prec.apply(&r);
        let rz_new = dot(&r, &z);
        let rel = (rz_new.max(0.0) / rz0).sqrt();
        report.relative_residual = rel;
        report.residual_history.push(rel);
        if rel <= tol {
            return Ok((x, report));
        }
        let beta = rz_new / rz;
        report.betas.push(beta);
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    report.status = SolveStatus::MaxIterations;
    Ok((x, report))
}

fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let m = diag.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = diag[i];
        if i + 1 < m {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    SymmetricEigen::new(t)
}

/// Extreme eigenvalues of the Lanczos tridiagonal implied by PCG
/// coefficients. `None` when no step was taken.
pub fn ritz_extremes(alphas: &[f64], betas: &[f64]) -> Option<(f64, f64)> {
    let m = alphas.len();
    if m == 0 {
        return None;
    }
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m);
    for j in 0..m {
        let prev = if j > 0 { betas[j - 1] / alphas[j - 1] } else { 0.0 };
        diag.push(1.0 / alphas[j] + prev);
        if j + 1 < m {
            off.push(betas[j].sqrt() / alphas[j]);
        }
    }
    let e = tridiagonal_eigen(&diag, &off);
    Some((e.eigenvalues.min(), e.eigenvalues.max()))
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Relative Ritz residual required of both extreme Ritz pairs.
    pub tol: f64,
    pub max_steps: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_steps: 1000, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
    pub converged: bool,
    /// The Krylov space became invariant before convergence was tested.
    pub breakdown: bool,
}

/// Lanczos on `A M^{-1}` in the `M^{-1}` inner product (same spectrum as
/// `M^{-1} A`) with full reorthogonalization and a seeded random start.
/// Stops once the residual bound `beta_{m+1} |s_{m,k}|` of both extreme Ritz
/// pairs is below `tol` times the Ritz value.
pub fn lanczos_extremes(a: &CsrMatrix, prec: &dyn Preconditioner, opts: &LanczosOptions) -> Result<EigenEstimate> {
    let n = a.nrows();
    if prec.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: prec.dim() });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut z = prec.apply(&u);
    let nrm = dot(&u, &z).sqrt();
    u.iter_mut().for_each(|x| *x /= nrm);
    z.iter_mut().for_each(|x| *x /= nrm);

    let mut us: Vec<Vec<f64>> = Vec::new();
    let mut zs: Vec<Vec<f64>> = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let max_steps = opts.max_steps.min(n);
    let mut est = EigenEstimate { lambda_min: 0.0, lambda_max: 0.0, steps: 0, converged: false, breakdown: false };
    for step in 1..=max_steps {
        a.matvec(&z, &mut w);
        let alpha = dot(&w, &z);
        diag.push(alpha);
        axpy(-alpha, &u, &mut w);
        if let (Some(up), Some(&b)) = (us.last(), off.last()) {
            axpy(-b, up, &mut w);
        }
        us.push(u);
        zs.push(z);
        for _ in 0..2 {
            for (ui, zi) in us.iter().zip(&zs) {
                let c = dot(&w, zi);
                axpy(-c, ui, &mut w);
            }
        }
        let zw = prec.apply(&w);
        let beta = dot(&w, &zw).max(0.0).sqrt();

        let e = tridiagonal_eigen(&diag, &off);
        let (kmin, kmax) = (e.eigenvalues.imin(), e.eigenvalues.imax());
        est.lambda_min = e.eigenvalues[kmin];
        est.lambda_max = e.eigenvalues[kmax];
        est.steps = step;
        let last = step - 1;
        let res = |k: usize| beta * e.eigenvectors[(last, k)].abs() / e.eigenvalues[k].abs();
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if beta <= 1e-13 * scale {
            est.breakdown = true;
            est.converged = true;
            break;
        }
        if step >= 2 && res(kmin) <= opts.tol && res(kmax) <= opts.tol {
            est.converged = true;
            break;
        }
        off.push(beta);
        u = w.iter().map(|x| x / beta).collect();
        z = zw.iter().map(|x| x / beta).collect();
    }
    if est.steps == n {
        est.converged = true;
    }
    Ok(est)
}

/// Extreme eigenvalues of `M^{-1} A` from the PCG coefficients of `report`,
/// optionally refined by a dedicated Lanczos run. Ritz values never leave
/// the spectrum, so the widest pair is kept.
pub fn estimate_extremes(
    a: &CsrMatrix,
    prec: &dyn Preconditioner,
    report: &SolveReport,
    refine: Option<&LanczosOptions>,
) -> Result<EigenEstimate> {
    let warm = ritz_extremes(&report.alphas, &report.betas);
    let mut est = match warm {
        Some((lo, hi)) => EigenEstimate {
            lambda_min: lo,
            lambda_max: hi,
            steps: report.iterations,
            converged: false,
            breakdown: false,
        },
        None => return Err(Error::InvalidArgument("no PCG steps to estimate from".into())),
    };
    if let Some(opts) = refine {
        let r = lanczos_extremes(a, prec, opts)?;
        est = EigenEstimate {
            lambda_min: est.lambda_min.min(r.lambda_min),
            lambda_max: est.lambda_max.max(r.lambda_max),
            ..r
        };
    }
    Ok(est)
}

/// `C_low = lambda_min (1 + H/delta)` and `C_high = lambda_max`.
pub fn condition_constants(lambda_min: f64, lambda_max: f64, h_coarse: f64, delta: f64) -> (f64, f64) {
    (lambda_min * (1.0 + h_coarse / delta), lambda_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> CsrMatrix {
        // 1D Laplacian plus a varying diagonal.
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + (i as f64 * 0.7).sin().abs()));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    struct ExactInverse(nalgebra::DMatrix<f64>);

    impl Preconditioner for ExactInverse {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, r: &[f64]) -> Vec<f64> {
            (&self.0 * nalgebra::DVector::from_column_slice(r)).as_slice().to_vec()
        }
    }

    #[test]
    fn identity_system_converges_in_one_step() {
        let a = CsrMatrix::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 0.0];
        let (x, rep) = pcg(&a, &b, &IdentityPreconditioner(5), 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged());
        assert_eq!(x, b.to_vec());
        let e = lanczos_extremes(&a, &IdentityPreconditioner(5), &LanczosOptions::default()).unwrap();
        assert!((e.lambda_min - 1.0).abs() < 1e-14 && (e.lambda_max - 1.0).abs() < 1e-14);
        assert!(e.breakdown);
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let a = spd(12);
        let inv = ExactInverse(a.to_dense().try_inverse().unwrap());
        let b: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let (_, rep) = pcg(&a, &b, &inv, 1e-10, 10).unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let a = spd(4);
        let (x, rep) = pcg(&a, &[0.0; 4], &IdentityPreconditioner(4), 1e-10, 10).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn dimension_and_definiteness_errors() {
        let a = spd(4);
        assert!(pcg(&a, &[1.0; 3], &IdentityPreconditioner(4), 1e-10, 10).is_err());
        let neg = CsrMatrix::from_triplets(2, 2, &[(0, 0, -1.0), (1, 1, 1.0)]);
        assert!(matches!(
            pcg(&neg, &[1.0, 0.0], &IdentityPreconditioner(2), 1e-10, 10),
            Err(Error::Indefinite { .. })
        ));
        assert!(JacobiPreconditioner::new(&neg).is_err());
    }

    #[test]
    fn a_norm_error_decreases() {
        let a = spd(60);
        let b: Vec<f64> = (0..60).map(|i| ((i * i) as f64).cos()).collect();
        let exact = a.to_dense().cholesky().unwrap().solve(&nalgebra::DVector::from_column_slice(&b));
        let mut errs = vec![dot(&b, exact.as_slice())];
        let jac = JacobiPreconditioner::new(&a).unwrap();
        pcg_monitored(&a, &b, &jac, 1e-12, 200, |_, x| {
            let e: Vec<f64> = x.iter().zip(exact.iter()).map(|(u, v)| u - v).collect();
            errs.push(dot(&e, &a.mul_vec(&e)));
        })
        .unwrap();
        assert!(errs.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn lanczos_matches_dense_eigensolve() {
        let a = spd(40);
        let jac = JacobiPreconditioner::new(&a).unwrap();
        let d = a.diagonal();
        let mut s = a.to_dense();
        for i in 0..40 {
            for j in 0..40 {
                s[(i, j)] /= (d[i] * d[j]).sqrt();
            }
        }
        let ev = s.symmetric_eigenvalues();
        let e = lanczos_extremes(&a, &jac, &LanczosOptions::default()).unwrap();
        assert!(e.converged);
        assert!((e.lambda_min - ev.min()).abs() <= 1e-6 * ev.min());
        assert!((e.lambda_max - ev.max()).abs() <= 1e-6 * ev.max());

        let b = vec![1.0; 40];
        let (_, rep) = pcg(&a, &b, &jac, 1e-14, 200).unwrap();
        let (lo, hi) = ritz_extremes(&rep.alphas, &rep.betas).unwrap();
        assert!(lo >= ev.min() * (1.0 - 1e-10) && hi <= ev.max() * (1.0 + 1e-10));
        let est = estimate_extremes(&a, &jac, &rep, Some(&LanczosOptions::default())).unwrap();
        assert!(est.lambda_min <= e.lambda_min && est.lambda_max >= e.lambda_max);
    }

    #[test]
    fn lanczos_is_seed_deterministic() {
        let a = spd(30);
        let jac = JacobiPreconditioner::new(&a).unwrap();
        let opts = LanczosOptions { seed: 7, ..Default::default() };
        assert_eq!(lanczos_extremes(&a, &jac, &opts).unwrap(), lanczos_extremes(&a, &jac, &opts).unwrap());
    }

    #[test]
    fn constants() {
        assert_eq!(condition_constants(1.0, 1.0, 0.0, 1.0), (1.0, 1.0));
        assert_eq!(condition_constants(0.5, 4.0, 0.5, 0.25), (1.5, 4.0));
    }
}
