//! Python bindings: run the experiments and read the tables as lists of dicts.

#![allow(clippy::too_many_arguments)]

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use vecfem::decomp::Layout;
use vecfem::elements::Space;
use vecfem::experiments::{
    emit_bounds_table, emit_error_table, run_dd_bounds, run_error_profile, ExperimentConfig, Scheme, SolutionId,
    TableFormat,
};
use vecfem::mesh::{build_mesh, CellKind, DomainSpec, Shape};

fn to_py(e: vecfem::Error) -> PyErr {
    match e {
        vecfem::Error::NotConverged { .. } | vecfem::Error::Indefinite { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn domain(name: &str, cells: Option<&str>) -> PyResult<DomainSpec> {
    let shape: Shape = name.parse().map_err(to_py)?;
    let kind = match cells {
        Some(c) => c.parse().map_err(to_py)?,
        None if matches!(shape, Shape::Cube2 | Shape::CrackedCube2) => CellKind::Tetrahedron,
        None => CellKind::Square,
    };
    DomainSpec::new(shape, kind).map_err(to_py)
}

fn config(
    name: &str,
    cells: Option<&str>,
    solution: Option<&str>,
    levels: (u32, u32),
    space: &str,
    scheme: &str,
    eta: f64,
) -> PyResult<ExperimentConfig> {
    let dom = domain(name, cells)?;
    let mut c = ExperimentConfig::new(dom);
    if let Some(s) = solution {
        c.solution = s.parse::<SolutionId>().map_err(to_py)?;
    }
    c.levels = levels.0..=levels.1;
    c.space = space.parse::<Space>().map_err(to_py)?;
    c.scheme = scheme.parse::<Scheme>().map_err(to_py)?;
    c.eta = eta;
    c.validate().map_err(to_py)?;
    Ok(c)
}

fn table_format(format: &str) -> PyResult<TableFormat> {
    format.parse().map_err(to_py)
}

/// Error 1 / Error 2 per level with observed orders.
#[pyfunction]
#[pyo3(signature = (domain, cells=None, solution=None, levels=(1, 4), scheme="interpolated", eta=1.0, format=None))]
fn error_profile<'py>(
    py: Python<'py>,
    domain: &str,
    cells: Option<&str>,
    solution: Option<&str>,
    levels: (u32, u32),
    scheme: &str,
    eta: f64,
    format: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let c = config(domain, cells, solution, levels, "nd", scheme, eta)?;
    let rows = py.detach(|| run_error_profile(&c)).map_err(to_py)?;
    if let Some(f) = format {
        return Ok(emit_error_table(&rows, table_format(f)?).into_pyobject(py)?.into_any().unbind());
    }
    let out: Vec<Bound<'py, PyDict>> = rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("level", r.level)?;
            d.set_item("error1", r.error1)?;
            d.set_item("order1", r.order1)?;
            d.set_item("error2", r.error2)?;
            d.set_item("order2", r.order2)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    Ok(out.into_pyobject(py)?.into_any().unbind())
}

/// Extreme eigenvalues and constants of the Schwarz-preconditioned operator.
#[pyfunction]
#[pyo3(signature = (
    domain, cells=None, solution=None, levels=(2, 4), blocks=None, layers=1, eta=1.0,
    space="nd", coarse=true, seed=0, format=None
))]
fn dd_bounds<'py>(
    py: Python<'py>,
    domain: &str,
    cells: Option<&str>,
    solution: Option<&str>,
    levels: (u32, u32),
    blocks: Option<&str>,
    layers: usize,
    eta: f64,
    space: &str,
    coarse: bool,
    seed: u64,
    format: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let mut c = config(domain, cells, solution, levels, space, "interpolated", eta)?;
    if let Some(b) = blocks {
        c.layout = b.parse::<Layout>().map_err(to_py)?;
    }
    c.layers = layers;
    c.coarse = coarse;
    c.seed = seed;
    c.validate().map_err(to_py)?;
    let rows = py.detach(|| run_dd_bounds(&c)).map_err(to_py)?;
    if let Some(f) = format {
        return Ok(emit_bounds_table(&rows, coarse, table_format(f)?).into_pyobject(py)?.into_any().unbind());
    }
    let out: Vec<Bound<'py, PyDict>> = rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("level", r.level)?;
            d.set_item("free_dofs", r.free_dofs)?;
            d.set_item("subdomains", r.subdomains)?;
            d.set_item("n0", r.n0)?;
            d.set_item("h_over_delta", r.h_over_delta)?;
            d.set_item("iterations", r.iterations)?;
            d.set_item("lambda_min", r.lambda_min)?;
            d.set_item("lambda_max", r.lambda_max)?;
            d.set_item("c_low", r.c_low)?;
            d.set_item("c_high", r.c_high)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    Ok(out.into_pyobject(py)?.into_any().unbind())
}

/// Entity counts of a mesh.
#[pyfunction]
#[pyo3(signature = (domain, cells=None, level=1))]
fn mesh_counts<'py>(py: Python<'py>, domain: &str, cells: Option<&str>, level: u32) -> PyResult<Bound<'py, PyDict>> {
    let m = build_mesh(self::domain(domain, cells)?, level).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("vertices", m.n_vertices())?;
    d.set_item("edges", m.n_edges())?;
    d.set_item("faces", m.n_faces())?;
    d.set_item("cells", m.n_cells())?;
    d.set_item("h", m.h())?;
    Ok(d)
}

#[pymodule]
fn vecfem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(error_profile, m)?)?;
    m.add_function(wrap_pyfunction!(dd_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(mesh_counts, m)?)?;
    Ok(())
}
