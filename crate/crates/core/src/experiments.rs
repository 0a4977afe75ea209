//! Manufactured problems, error profiles, Schwarz bound studies and their
//! tabular output.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;

use crate::assembly::{
    assemble_interpolated_load, assemble_mass, assemble_stiffness, assemble_system, impose_boundary_values, LinearSystem,
    ReducedSystem,
};
use crate::decomp::{build_decomposition, Layout};
use crate::elements::{interpolate_vector, DofRule, Space};
use crate::error::{Error, Result};
use crate::krylov::{condition_constants, estimate_extremes, pcg, JacobiPreconditioner, LanczosOptions};
use crate::mesh::{build_mesh, DomainSpec, Mesh, Vec3};
use crate::schwarz::{CoarseSpace, SchwarzPreconditioner};
use crate::sparse::dot;

/// Tolerance of the PCG solves behind error profiles.
pub const ERROR_SOLVE_TOL: f64 = 1e-12;
pub const ERROR_SOLVE_MAXIT: usize = 50_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolutionId {
    /// `u = (y^5, x^4)` on 2D domains.
    S1,
    /// `u = (x^2 y^2, x^2 y)` on 2D domains.
    S2,
    /// `u = (x^2, x^2, y^2)` on 3D domains.
    S3,
}

impl SolutionId {
    pub fn name(self) -> &'static str {
        match self {
            SolutionId::S1 => "s1",
            SolutionId::S2 => "s2",
            SolutionId::S3 => "s3",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            SolutionId::S3 => 3,
            _ => 2,
        }
    }
}

impl FromStr for SolutionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "s1" => Ok(SolutionId::S1),
            "s2" => Ok(SolutionId::S2),
            "s3" => Ok(SolutionId::S3),
            _ => Err(Error::InvalidArgument(format!("unknown solution '{s}'"))),
        }
    }
}

type VectorFn = fn(&Vec3) -> Vec3;

/// Closed-form data of a manufactured problem with `eta = 1`. In 2D the
/// scalar curl is stored in the `z` component.
#[derive(Clone, Copy, Debug)]
pub struct Manufactured {
    pub id: SolutionId,
    pub u: VectorFn,
    pub curl: VectorFn,
    /// `curl curl u + u`.
    pub f_curl: VectorFn,
    pub div: fn(&Vec3) -> f64,
    /// `-grad div u + u`.
    pub f_div: VectorFn,
}

impl Manufactured {
    /// Right-hand side for the given space and `eta`.
    pub fn rhs(&self, space: Space, eta: f64) -> impl Fn(&Vec3) -> Vec3 + Sync + 'static {
        let (u, fc, fd) = (self.u, self.f_curl, self.f_div);
        move |p: &Vec3| {
            let f = if space == Space::Rt { fd(p) } else { fc(p) };
            eta * f + (1.0 - eta) * u(p)
        }
    }
}

pub fn manufactured_problem(id: SolutionId) -> Manufactured {
    match id {
        SolutionId::S1 => Manufactured {
            id,
            u: |p| Vec3::new(p.y.powi(5), p.x.powi(4), 0.0),
            curl: |p| Vec3::new(0.0, 0.0, 4.0 * p.x.powi(3) - 5.0 * p.y.powi(4)),
            f_curl: |p| Vec3::new(-20.0 * p.y.powi(3) + p.y.powi(5), -12.0 * p.x * p.x + p.x.powi(4), 0.0),
            div: |_| 0.0,
            f_div: |p| Vec3::new(p.y.powi(5), p.x.powi(4), 0.0),
        },
        SolutionId::S2 => Manufactured {
            id,
            u: |p| Vec3::new(p.x * p.x * p.y * p.y, p.x * p.x * p.y, 0.0),
            curl: |p| Vec3::new(0.0, 0.0, 2.0 * p.x * p.y - 2.0 * p.x * p.x * p.y),
            f_curl: |p| {
                let (x, y) = (p.x, p.y);
                Vec3::new(2.0 * x - 2.0 * x * x + x * x * y * y, 4.0 * x * y - 2.0 * y + x * x * y, 0.0)
            },
            div: |p| 2.0 * p.x * p.y * p.y + p.x * p.x,
            f_div: |p| {
                let (x, y) = (p.x, p.y);
                Vec3::new(-2.0 * y * y - 2.0 * x + x * x * y * y, -4.0 * x * y + x * x * y, 0.0)
            },
        },
        SolutionId::S3 => Manufactured {
            id,
            u: |p| Vec3::new(p.x * p.x, p.x * p.x, p.y * p.y),
            curl: |p| Vec3::new(2.0 * p.y, 0.0, 2.0 * p.x),
            f_curl: |p| Vec3::new(p.x * p.x, p.x * p.x - 2.0, p.y * p.y - 2.0),
            div: |p| 2.0 * p.x,
            f_div: |p| Vec3::new(p.x * p.x - 2.0, p.x * p.x, p.y * p.y),
        },
    }
}

/// Discretization of the data of a manufactured problem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Midpoint DOFs for the boundary data and the reference interpolant,
    /// load `M * Pi f`.
    #[default]
    Interpolated,
    /// Mean-value DOFs and the quadrature load `(f, phi_i)`.
    Consistent,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Interpolated => "interpolated",
            Scheme::Consistent => "consistent",
        }
    }

    pub fn dof_rule(self) -> DofRule {
        match self {
            Scheme::Interpolated => DofRule::Midpoint,
            Scheme::Consistent => DofRule::Average,
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "interpolated" => Ok(Scheme::Interpolated),
            "consistent" => Ok(Scheme::Consistent),
            _ => Err(Error::InvalidArgument(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub domain: DomainSpec,
    pub space: Space,
    pub solution: SolutionId,
    pub levels: RangeInclusive<u32>,
    pub layout: Layout,
    pub layers: usize,
    pub eta: f64,
    /// Two-level method when true, one-level contrast otherwise.
    pub coarse: bool,
    pub scheme: Scheme,
    pub seed: u64,
    pub tol: f64,
    pub maxit: usize,
}

impl ExperimentConfig {
    /// Defaults for a domain: matching solution, 2x2(x2) blocks, one layer,
    /// `eta = 1`, two-level method.
    pub fn new(domain: DomainSpec) -> Self {
        let dim = domain.dim();
        Self {
            domain,
            space: Space::Nd,
            solution: if dim == 3 { SolutionId::S3 } else { SolutionId::S1 },
            levels: 1..=4,
            layout: Layout::uniform(dim, 2),
            layers: 1,
            eta: 1.0,
            coarse: true,
            scheme: Scheme::default(),
            seed: 0,
            tol: crate::krylov::DEFAULT_TOL,
            maxit: crate::krylov::DEFAULT_MAXIT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.solution.dim() != self.domain.dim() {
            return Err(Error::InvalidArgument(format!(
                "solution {} is {}D but the domain is {}D",
                self.solution.name(),
                self.solution.dim(),
                self.domain.dim()
            )));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::NonPositiveEta(self.eta));
        }
        if *self.levels.start() < 1 || self.levels.is_empty() {
            return Err(Error::InvalidLevel(*self.levels.start()));
        }
        if self.layout.dim() != self.domain.dim() {
            return Err(Error::Layout(format!("{}D layout on a {}D domain", self.layout.dim(), self.domain.dim())));
        }
        self.space.check(self.domain.cell_kind())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub level: u32,
    pub error1: f64,
    pub order1: f64,
    pub error2: f64,
    pub order2: f64,
}

/// Discrete solution of the manufactured problem on one mesh.
#[derive(Clone, Debug)]
pub struct DiscreteSolution {
    pub coefficients: Vec<f64>,
    pub interpolant: Vec<f64>,
    pub iterations: usize,
}

/// Reduced system of the manufactured problem and the interpolant of `u`
/// under the scheme's DOF rule.
pub fn manufactured_system(
    mesh: &Mesh,
    space: Space,
    problem: &Manufactured,
    eta: f64,
    scheme: Scheme,
) -> Result<(ReducedSystem, Vec<f64>)> {
    let f = problem.rhs(space, eta);
    let interpolant = interpolate_vector(space, mesh, &problem.u, scheme.dof_rule())?;
    let sys = match scheme {
        Scheme::Consistent => LinearSystem::assemble(mesh, space, eta, &f)?,
        Scheme::Interpolated => {
            let matrix = assemble_system(mesh, space, eta)?;
            let rhs = assemble_interpolated_load(mesh, space, &f, DofRule::Midpoint)?;
            let dof_map = crate::assembly::DofMap::new(mesh, space)?;
            LinearSystem { matrix, rhs, dof_map, eta }
        }
    };
    Ok((impose_boundary_values(&sys, &interpolant)?, interpolant))
}

/// Assembles, lifts the boundary data, and solves with Jacobi PCG.
pub fn solve_manufactured(
    mesh: &Mesh,
    space: Space,
    problem: &Manufactured,
    eta: f64,
    scheme: Scheme,
) -> Result<DiscreteSolution> {
    let (red, interpolant) = manufactured_system(mesh, space, problem, eta, scheme)?;
    if red.dof_map.n_free() == 0 {
        return Ok(DiscreteSolution { coefficients: red.lifting, interpolant, iterations: 0 });
    }
    let jac = JacobiPreconditioner::new(&red.matrix)?;
    let (x, rep) = pcg(&red.matrix, &red.rhs, &jac, ERROR_SOLVE_TOL, ERROR_SOLVE_MAXIT)?;
    if !rep.converged() {
        return Err(Error::NotConverged { iterations: rep.iterations, residual: rep.relative_residual });
    }
    Ok(DiscreteSolution { coefficients: red.expand(&x), interpolant, iterations: rep.iterations })
}

/// `(||d||_0, ||D d||_0)` of the discrete field with coefficients `d`.
pub fn discrete_norms(mesh: &Mesh, space: Space, d: &[f64]) -> Result<(f64, f64)> {
    let m = assemble_mass(mesh, space)?;
    let k = assemble_stiffness(mesh, space)?;
    Ok((dot(d, &m.mul_vec(d)).max(0.0).sqrt(), dot(d, &k.mul_vec(d)).max(0.0).sqrt()))
}

fn order(prev: f64, cur: f64) -> f64 {
    (prev / cur).log2()
}

/// Error 1 and Error 2 of `Pi_h u - u_h` per level, with observed orders.
pub fn run_error_profile(config: &ExperimentConfig) -> Result<Vec<ErrorRow>> {
    config.validate()?;
    let problem = manufactured_problem(config.solution);
    let mut rows: Vec<ErrorRow> = Vec::new();
    for level in config.levels.clone() {
        let mesh = build_mesh(config.domain, level)?;
        let sol = solve_manufactured(&mesh, config.space, &problem, config.eta, config.scheme)?;
        let d: Vec<f64> = sol.interpolant.iter().zip(&sol.coefficients).map(|(a, b)| a - b).collect();
        let (error1, error2) = discrete_norms(&mesh, config.space, &d)?;
        let (order1, order2) = match rows.last() {
            Some(p) => (order(p.error1, error1), order(p.error2, error2)),
            None => (0.0, 0.0),
        };
        rows.push(ErrorRow { level, error1, order1, error2, order2 });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub level: u32,
    pub free_dofs: usize,
    pub subdomains: usize,
    pub n0: usize,
    /// `H / delta` with `H` the block side and `delta = layers * h`.
    pub h_over_delta: f64,
    pub iterations: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub c_low: f64,
    pub c_high: f64,
}

/// Extreme eigenvalues of the Schwarz-preconditioned operator and the
/// derived constants per level.
pub fn run_dd_bounds(config: &ExperimentConfig) -> Result<Vec<BoundsRow>> {
    config.validate()?;
    let problem = manufactured_problem(config.solution);
    let coarse_mesh = build_mesh(config.domain, 1)?;
    let mut rows = Vec::new();
    for level in config.levels.clone() {
        let mesh = build_mesh(config.domain, level)?;
        let (red, _) = manufactured_system(&mesh, config.space, &problem, config.eta, config.scheme)?;
        let decomp = build_decomposition(&coarse_mesh, &mesh, config.space, &config.layout, config.layers)?;
        let coarse = if config.coarse {
            CoarseSpace::Assembled { eta: config.eta }
        } else {
            CoarseSpace::None
        };
        let prec = SchwarzPreconditioner::build(&red.matrix, &decomp, coarse)?;
        let (_, rep) = pcg(&red.matrix, &red.rhs, &prec, config.tol, config.maxit)?;
        if !rep.converged() {
            return Err(Error::NotConverged { iterations: rep.iterations, residual: rep.relative_residual });
        }
        let opts = LanczosOptions { seed: config.seed, ..Default::default() };
        let est = estimate_extremes(&red.matrix, &prec, &rep, Some(&opts))?;
        let (c_low, c_high) = condition_constants(est.lambda_min, est.lambda_max, decomp.coarse_size(), decomp.delta());
        rows.push(BoundsRow {
            level,
            free_dofs: red.dof_map.n_free(),
            subdomains: decomp.len(),
            n0: decomp.color_count(),
            h_over_delta: decomp.coarse_size() / decomp.delta(),
            iterations: rep.iterations,
            lambda_min: est.lambda_min,
            lambda_max: est.lambda_max,
            c_low,
            c_high,
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "md" | "markdown" => Ok(TableFormat::Markdown),
            _ => Err(Error::InvalidArgument(format!("unknown format '{s}'"))),
        }
    }
}

fn emit(header: &[&str], rows: &[Vec<String>], format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str(&header.join(","));
            out.push('\n');
            for r in rows {
                out.push_str(&r.join(","));
                out.push('\n');
            }
        }
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for r in rows {
                let _ = writeln!(out, "| {} |", r.join(" | "));
            }
        }
    }
    out
}

pub const ERROR_HEADER: [&str; 5] = ["level", "error1", "order1", "error2", "order2"];

pub fn emit_error_table(rows: &[ErrorRow], format: TableFormat) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                format!("{:.2E}", r.error1),
                format!("{:.1}", r.order1),
                format!("{:.2E}", r.error2),
                format!("{:.1}", r.order2),
            ]
        })
        .collect();
    emit(&ERROR_HEADER, &body, format)
}

pub const BOUNDS_HEADER: [&str; 11] = [
    "level",
    "free_dofs",
    "subdomains",
    "n0",
    "h_over_delta",
    "iterations",
    "lambda_min",
    "lambda_max",
    "c_low",
    "c_high",
    "method",
];

/// First line of every bounds table.
pub const BOUNDS_CONVENTION: &str = "# H = block side length, delta = layers * h";

pub fn emit_bounds_table(rows: &[BoundsRow], coarse: bool, format: TableFormat) -> String {
    let method = if coarse { "two-level" } else { "one-level" };
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.level.to_string(),
                r.free_dofs.to_string(),
                r.subdomains.to_string(),
                r.n0.to_string(),
                format!("{:.6}", r.h_over_delta),
                r.iterations.to_string(),
                format!("{:.6}", r.lambda_min),
                format!("{:.6}", r.lambda_max),
                format!("{:.6}", r.c_low),
                format!("{:.6}", r.c_high),
                method.to_string(),
            ]
        })
        .collect();
    format!("{BOUNDS_CONVENTION}\n{}", emit(&BOUNDS_HEADER, &body, format))
}

/// Parses a CSV error table produced by [`emit_error_table`].
pub fn parse_error_csv(text: &str) -> Result<Vec<ErrorRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == ERROR_HEADER.join(",") => {}
        _ => return Err(Error::InvalidArgument("missing error table header".into())),
    }
    let bad = |l: &str| Error::InvalidArgument(format!("malformed row '{l}'"));
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(bad(l));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(l));
            Ok(ErrorRow {
                level: f[0].parse().map_err(|_| bad(l))?,
                error1: num(f[1])?,
                order1: num(f[2])?,
                error2: num(f[3])?,
                order2: num(f[4])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CellKind, Shape};
    use rand::{Rng, SeedableRng};

    const FD_STEP: f64 = 1e-4;

    fn fd_curl(u: &dyn Fn(&Vec3) -> Vec3, p: &Vec3, dim: usize) -> Vec3 {
        let d = |i: usize, k: usize| {
            let mut e = Vec3::zeros();
            e[k] = FD_STEP;
            (u(&(p + e))[i] - u(&(p - e))[i]) / (2.0 * FD_STEP)
        };
        if dim == 2 {
            Vec3::new(0.0, 0.0, d(1, 0) - d(0, 1))
        } else {
            Vec3::new(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1))
        }
    }

    // 2D: curl of the scalar c is (dc/dy, -dc/dx).
    fn fd_curl_curl(u: &dyn Fn(&Vec3) -> Vec3, p: &Vec3, dim: usize) -> Vec3 {
        let c = |q: &Vec3| fd_curl(u, q, dim);
        if dim == 2 {
            let dc = |k: usize| {
                let mut e = Vec3::zeros();
                e[k] = FD_STEP;
                (c(&(p + e)).z - c(&(p - e)).z) / (2.0 * FD_STEP)
            };
            Vec3::new(dc(1), -dc(0), 0.0)
        } else {
            fd_curl(&c, p, 3)
        }
    }

    fn fd_grad_div(u: &dyn Fn(&Vec3) -> Vec3, p: &Vec3, dim: usize) -> Vec3 {
        let div = |q: &Vec3| {
            (0..dim)
                .map(|k| {
                    let mut e = Vec3::zeros();
                    e[k] = FD_STEP;
                    (u(&(q + e))[k] - u(&(q - e))[k]) / (2.0 * FD_STEP)
                })
                .sum::<f64>()
        };
        let mut g = Vec3::zeros();
        for k in 0..dim {
            let mut e = Vec3::zeros();
            e[k] = FD_STEP;
            g[k] = (div(&(p + e)) - div(&(p - e))) / (2.0 * FD_STEP);
        }
        g
    }

    #[test]
    fn manufactured_data_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for id in [SolutionId::S1, SolutionId::S2, SolutionId::S3] {
            let m = manufactured_problem(id);
            let dim = id.dim();
            for _ in 0..10 {
                let mut p = Vec3::zeros();
                for k in 0..dim {
                    p[k] = rng.random_range(0.0..2.0);
                }
                let rel = |a: Vec3, b: Vec3| (a - b).norm() / b.norm().max(1.0);
                assert!(rel(fd_curl(&m.u, &p, dim), (m.curl)(&p)) < 1e-5, "{id:?} curl");
                assert!(rel(fd_curl_curl(&m.u, &p, dim) + (m.u)(&p), (m.f_curl)(&p)) < 1e-5, "{id:?} f");
                assert!(rel(-fd_grad_div(&m.u, &p, dim) + (m.u)(&p), (m.f_div)(&p)) < 1e-5, "{id:?} f_div");
            }
        }
    }

    #[test]
    fn zero_field_gives_zero_error() {
        // Exact interpolant of a field in the discrete space: the Galerkin
        // solution reproduces it, so both errors vanish.
        let mesh = build_mesh(DomainSpec::new(Shape::UnitSquare, CellKind::Square).unwrap(), 2).unwrap();
        let d = vec![0.0; mesh.n_edges()];
        assert_eq!(discrete_norms(&mesh, Space::Nd, &d).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn config_validation() {
        let sq = DomainSpec::new(Shape::UnitSquare, CellKind::Square).unwrap();
        let mut c = ExperimentConfig::new(sq);
        assert!(c.validate().is_ok());
        c.solution = SolutionId::S3;
        assert!(c.validate().is_err());
        c.solution = SolutionId::S1;
        c.eta = 0.0;
        assert!(matches!(c.validate(), Err(Error::NonPositiveEta(_))));
        c.eta = 1.0;
        c.space = Space::Rt;
        assert!(c.validate().is_err());
    }

    #[test]
    fn table_formats() {
        assert_eq!(emit_error_table(&[], TableFormat::Csv), "level,error1,order1,error2,order2\n");
        let rows = vec![
            ErrorRow { level: 1, error1: 8.9712e-2, order1: 0.0, error2: 0.311, order2: 0.0 },
            ErrorRow { level: 2, error1: 2.6712e-2, order1: 1.747, error2: 8.8e-2, order2: 1.82 },
        ];
        let csv = emit_error_table(&rows, TableFormat::Csv);
        assert_eq!(csv.lines().nth(1).unwrap(), "1,8.97E-2,0.0,3.11E-1,0.0");
        let back = parse_error_csv(&csv).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in back.iter().zip(&rows) {
            assert_eq!(a.level, b.level);
            assert!((a.error1 - b.error1).abs() <= 0.005 * b.error1);
            assert!((a.order2 - b.order2).abs() <= 0.05);
        }
        let md = emit_error_table(&rows, TableFormat::Markdown);
        assert_eq!(md.lines().count(), 4);
        assert!(md.starts_with("| level | error1 |"));
    }

    #[test]
    fn schemes_parse_and_differ() {
        assert_eq!("Consistent".parse::<Scheme>().unwrap(), Scheme::Consistent);
        assert!("midpoint".parse::<Scheme>().is_err());
        let mut c = ExperimentConfig::new(DomainSpec::new(Shape::UnitSquare, CellKind::Square).unwrap());
        c.levels = 1..=2;
        let a = run_error_profile(&c).unwrap();
        c.scheme = Scheme::Consistent;
        let b = run_error_profile(&c).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(y.error1 < x.error1 && y.error2 < x.error2);
        }
    }

    #[test]
    fn bounds_table_echoes_convention() {
        let row = BoundsRow {
            level: 2,
            free_dofs: 24,
            subdomains: 4,
            n0: 4,
            h_over_delta: 2.0,
            iterations: 10,
            lambda_min: 1.0077,
            lambda_max: 4.485408,
            c_low: 3.0231,
            c_high: 4.485408,
        };
        let csv = emit_bounds_table(&[row.clone()], false, TableFormat::Csv);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], BOUNDS_CONVENTION);
        assert_eq!(lines[1], BOUNDS_HEADER.join(","));
        assert_eq!(lines[2], "2,24,4,4,2.000000,10,1.007700,4.485408,3.023100,4.485408,one-level");
        assert_eq!(emit_bounds_table(&[row], true, TableFormat::Markdown).lines().count(), 4);
    }
}
