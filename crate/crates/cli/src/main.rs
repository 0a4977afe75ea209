use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use vecfem::assembly::assemble_system;
use vecfem::decomp::Layout;
use vecfem::elements::Space;
use vecfem::experiments::{
    emit_bounds_table, emit_error_table, manufactured_problem, manufactured_system, run_dd_bounds, run_error_profile,
    ExperimentConfig, Scheme, SolutionId, TableFormat,
};
use vecfem::mesh::{build_mesh, CellKind, DomainSpec, Shape};

const SEED_VAR: &str = "VECFEM_SEED";
const MAX_DEFAULT_3D_LEVEL: u32 = 4;

#[derive(Parser)]
#[command(name = "vecfem", version, about = "Edge/face element experiments with two-level Schwarz preconditioners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an error-profile or Schwarz-bounds experiment and emit a table.
    Run(RunArgs),
    /// Write a mesh as text (`v`, `e`, `c` lines).
    Mesh(MeshArgs),
    /// Write the reduced system of a manufactured problem in MatrixMarket form.
    System(SystemArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    Error,
    Bounds,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Square,
    Slit,
    /// Square with the slit (0,1/2] x {1/2}.
    Hslit,
    Cube,
    Crackcube,
}

impl DomainArg {
    fn shape(self) -> Shape {
        match self {
            DomainArg::Square => Shape::UnitSquare,
            DomainArg::Slit => Shape::SlitSquare,
            DomainArg::Hslit => Shape::TransposedSlitSquare,
            DomainArg::Cube => Shape::Cube2,
            DomainArg::Crackcube => Shape::CrackedCube2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CellsArg {
    Quad,
    Tri,
    Tet,
}

impl CellsArg {
    fn kind(self) -> CellKind {
        match self {
            CellsArg::Quad => CellKind::Square,
            CellsArg::Tri => CellKind::Triangle,
            CellsArg::Tet => CellKind::Tetrahedron,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SolutionArg {
    S1,
    S2,
    S3,
}

impl SolutionArg {
    fn id(self) -> SolutionId {
        match self {
            SolutionArg::S1 => SolutionId::S1,
            SolutionArg::S2 => SolutionId::S2,
            SolutionArg::S3 => SolutionId::S3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Nd,
    Rt,
}

impl SpaceArg {
    fn space(self) -> Space {
        match self {
            SpaceArg::Nd => Space::Nd,
            SpaceArg::Rt => Space::Rt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Interpolated,
    Consistent,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Md,
}

#[derive(Args)]
struct DomainOpts {
    #[arg(long, value_enum, default_value = "square")]
    domain: DomainArg,
    /// Cell kind; defaults to quad in 2D and tet in 3D.
    #[arg(long, value_enum)]
    cells: Option<CellsArg>,
}

impl DomainOpts {
    fn spec(&self) -> anyhow::Result<DomainSpec> {
        let shape = self.domain.shape();
        let cells = match (self.cells, shape) {
            (Some(c), _) => c.kind(),
            (None, Shape::Cube2 | Shape::CrackedCube2) => CellKind::Tetrahedron,
            (None, _) => CellKind::Square,
        };
        Ok(DomainSpec::new(shape, cells)?)
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "error")]
    experiment: Experiment,
    #[command(flatten)]
    domain: DomainOpts,
    /// Manufactured solution; defaults to s1 in 2D and s3 in 3D.
    #[arg(long, value_enum)]
    solution: Option<SolutionArg>,
    /// Level range `A..B` (inclusive) or a single level.
    #[arg(long, default_value = "1..4", value_parser = parse_levels)]
    levels: RangeInclusive<u32>,
    /// Subdomain blocks per axis, `NxM` or `NxMxK`; defaults to 2 per axis.
    #[arg(long)]
    blocks: Option<String>,
    /// Overlap layers added around each block.
    #[arg(long, default_value_t = 1)]
    layers: usize,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, value_enum, default_value = "nd")]
    space: SpaceArg,
    /// Drop the coarse space (one-level method).
    #[arg(long)]
    no_coarse: bool,
    #[arg(long, value_enum, default_value = "interpolated")]
    scheme: SchemeArg,
    /// PCG tolerance of the bounds runs.
    #[arg(long, default_value_t = vecfem::krylov::DEFAULT_TOL)]
    tol: f64,
    /// PCG iteration limit of the bounds runs.
    #[arg(long, default_value_t = vecfem::krylov::DEFAULT_MAXIT)]
    maxit: usize,
    /// Allow 3D levels above the default cap.
    #[arg(long)]
    allow_deep: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    domain: DomainOpts,
    #[arg(long, default_value_t = 1)]
    level: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SystemArgs {
    #[command(flatten)]
    domain: DomainOpts,
    #[arg(long, value_enum)]
    solution: Option<SolutionArg>,
    #[arg(long, default_value_t = 1)]
    level: u32,
    #[arg(long, value_enum, default_value = "nd")]
    space: SpaceArg,
    #[arg(long, default_value_t = 1.0)]
    eta: f64,
    #[arg(long, value_enum, default_value = "interpolated")]
    scheme: SchemeArg,
    /// Write the full matrix over all DOFs instead of the reduced one.
    #[arg(long)]
    full: bool,
    /// MatrixMarket output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Right-hand side output, one value per line.
    #[arg(long)]
    rhs: Option<PathBuf>,
}

fn parse_levels(s: &str) -> Result<RangeInclusive<u32>, String> {
    let bad = || format!("invalid level range '{s}', expected A..B");
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (s, s),
    };
    let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a < 1 || b < a {
        return Err(bad());
    }
    Ok(a..=b)
}

fn seed_from_env() -> anyhow::Result<u64> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().with_context(|| format!("{SEED_VAR} must be an unsigned integer, got '{v}'")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(e) => Err(e).context(SEED_VAR),
    }
}

fn default_solution(domain: DomainSpec) -> SolutionId {
    if domain.dim() == 3 {
        SolutionId::S3
    } else {
        SolutionId::S1
    }
}

fn scheme(s: SchemeArg) -> Scheme {
    match s {
        SchemeArg::Interpolated => Scheme::Interpolated,
        SchemeArg::Consistent => Scheme::Consistent,
    }
}

fn output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let domain = args.domain.spec()?;
    if domain.dim() == 3 && *args.levels.end() > MAX_DEFAULT_3D_LEVEL && !args.allow_deep {
        bail!("3D levels above {MAX_DEFAULT_3D_LEVEL} need --allow-deep");
    }
    let mut config = ExperimentConfig::new(domain);
    config.solution = args.solution.map_or_else(|| default_solution(domain), SolutionArg::id);
    config.levels = args.levels;
    if let Some(b) = &args.blocks {
        config.layout = b.parse::<Layout>()?;
    }
    config.layers = args.layers;
    config.eta = args.eta;
    config.space = args.space.space();
    config.coarse = !args.no_coarse;
    config.scheme = scheme(args.scheme);
    config.tol = args.tol;
    config.maxit = args.maxit;
    config.seed = seed_from_env()?;
    config.validate()?;
    let format = match args.format {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Md => TableFormat::Markdown,
    };
    let table = match args.experiment {
        Experiment::Error => emit_error_table(&run_error_profile(&config)?, format),
        Experiment::Bounds => emit_bounds_table(&run_dd_bounds(&config)?, config.coarse, format),
    };
    let mut w = output(&args.out)?;
    w.write_all(table.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn mesh(args: MeshArgs) -> anyhow::Result<()> {
    let m = build_mesh(args.domain.spec()?, args.level)?;
    m.write_dump(output(&args.out)?)?;
    Ok(())
}

fn system(args: SystemArgs) -> anyhow::Result<()> {
    let domain = args.domain.spec()?;
    let m = build_mesh(domain, args.level)?;
    let space = args.space.space();
    let problem = manufactured_problem(args.solution.map_or_else(|| default_solution(domain), SolutionArg::id));
    if problem.id.dim() != domain.dim() {
        bail!("solution {} does not match the {}D domain", problem.id.name(), domain.dim());
    }
    let (matrix, rhs) = if args.full {
        (assemble_system(&m, space, args.eta)?, None)
    } else {
        let (red, _) = manufactured_system(&m, space, &problem, args.eta, scheme(args.scheme))?;
        (red.matrix, Some(red.rhs))
    };
    matrix.write_matrix_market(output(&args.out)?)?;
    if let Some(path) = &args.rhs {
        let Some(rhs) = rhs else { bail!("--rhs needs the reduced system") };
        let mut w = output(&Some(path.clone()))?;
        for v in rhs {
            writeln!(w, "{v:.17e}")?;
        }
        w.flush()?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<vecfem::Error>() {
        Some(vecfem::Error::NotConverged { .. } | vecfem::Error::Indefinite { .. }) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Mesh(a) => mesh(a),
        Command::System(a) => system(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("2..5").unwrap(), 2..=5);
        assert_eq!(parse_levels("1..=3").unwrap(), 1..=3);
        assert_eq!(parse_levels("4").unwrap(), 4..=4);
        for bad in ["0..2", "3..1", "a..b", ""] {
            assert!(parse_levels(bad).is_err(), "{bad}");
        }
    }
}
