//! Lowest-order Nédélec (edge), Raviart-Thomas (face) and vertex elements,
//! their degree-of-freedom functionals and the canonical interpolants.
//!
//! Basis functions are scaled so that the DOF functional of an edge is the
//! *average* tangential component and that of a face the *average* normal
//! component; `dof_i(phi_j) = delta_ij`.
//!
//! Derivatives share one representation: the curl for edge elements (in 2D
//! the scalar curl sits in the `z` component), the divergence in the `x`
//! component for face elements, and the gradient for vertex elements. Vertex
//! element values are stored in the `x` component.

use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh, Vec3};
use crate::quadrature::QuadratureRule;
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// Edge elements, H(curl)
    Nd,
    /// Face elements, H(div)
    Rt,
    /// Continuous vertex elements (P1 on simplices, Q1 on squares)
    P1,
}

impl std::str::FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nd" => Ok(Space::Nd),
            "rt" => Ok(Space::Rt),
            "p1" => Ok(Space::P1),
            _ => Err(Error::InvalidArgument(format!("unknown space '{s}'"))),
        }
    }
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Nd => "nd",
            Space::Rt => "rt",
            Space::P1 => "p1",
        }
    }

    pub fn local_dof_count(self, kind: CellKind) -> usize {
        match self {
            Space::Nd => kind.edge_count(),
            Space::Rt => kind.face_count(),
            Space::P1 => kind.vertex_count(),
        }
    }

    pub fn check(self, kind: CellKind) -> Result<()> {
        if self == Space::Rt && kind != CellKind::Tetrahedron {
            return Err(Error::UnsupportedSpace { space: "rt", cells: kind.name() });
        }
        Ok(())
    }

    /// Number of global DOFs (one per edge, face or vertex).
    pub fn global_dof_count(self, mesh: &Mesh) -> usize {
        match self {
            Space::Nd => mesh.n_edges(),
            Space::Rt => mesh.n_faces(),
            Space::P1 => mesh.n_vertices(),
        }
    }

    /// Global DOF indices and orientation signs of the local basis on cell `c`.
    pub fn cell_dofs(self, mesh: &Mesh, c: usize) -> (&[usize], Option<&[f64]>) {
        match self {
            Space::Nd => (mesh.cell_edges(c), Some(mesh.cell_edge_signs(c))),
            Space::Rt => (mesh.cell_faces(c), Some(mesh.cell_face_signs(c))),
            Space::P1 => (mesh.cell_vertices(c), None),
        }
    }
}

/// Affine (or axis-aligned bilinear) map from a reference cell to a mesh cell.
#[derive(Clone, Debug)]
pub struct CellMap {
    origin: Vec3,
    axes: [Vec3; 3],
    jacobian: f64,
}

impl CellMap {
    pub fn new(kind: CellKind, coords: &[Vec3]) -> Self {
        let p0 = coords[0];
        let axes = match kind {
            // Square vertices run counter-clockwise from the lower-left corner.
            CellKind::Square => [coords[1] - p0, coords[3] - p0, Vec3::zeros()],
            CellKind::Triangle => [coords[1] - p0, coords[2] - p0, Vec3::zeros()],
            CellKind::Tetrahedron => [coords[1] - p0, coords[2] - p0, coords[3] - p0],
        };
        let jacobian = match kind {
            CellKind::Tetrahedron => axes[0].cross(&axes[1]).dot(&axes[2]).abs(),
            _ => axes[0].cross(&axes[1]).norm(),
        };
        Self { origin: p0, axes, jacobian }
    }

    pub fn map(&self, xi: &Vec3) -> Vec3 {
        self.origin + self.axes[0] * xi.x + self.axes[1] * xi.y + self.axes[2] * xi.z
    }

    pub fn jacobian(&self) -> f64 {
        self.jacobian
    }

    /// Physical points and weights of `rule` on this cell.
    pub fn quadrature<'a>(&'a self, rule: &'a QuadratureRule) -> impl Iterator<Item = (Vec3, f64)> + 'a {
        rule.points
            .iter()
            .zip(&rule.weights)
            .map(move |(p, w)| (self.map(p), w * self.jacobian))
    }
}

/// Local basis of one space on one physical cell, in local orientation.
#[derive(Clone, Debug)]
pub struct LocalBasis {
    space: Space,
    kind: CellKind,
    coords: Vec<Vec3>,
    /// Barycentric: `lambda_i(x) = offsets[i] + grads[i] . x`.
    grads: Vec<Vec3>,
    offsets: Vec<f64>,
    /// Edge lengths / face areas of the local entities.
    measures: Vec<f64>,
}

impl LocalBasis {
    pub fn new(space: Space, kind: CellKind, coords: &[Vec3]) -> Result<Self> {
        space.check(kind)?;
        if coords.len() != kind.vertex_count() {
            return Err(Error::DimensionMismatch { expected: kind.vertex_count(), actual: coords.len() });
        }
        let coords = coords.to_vec();
        let (grads, offsets) = match kind {
            CellKind::Square => (Vec::new(), Vec::new()),
            CellKind::Triangle | CellKind::Tetrahedron => barycentric(kind, &coords),
        };
        let measures = match space {
            Space::Nd => kind
                .local_edges()
                .iter()
                .map(|[a, b]| (coords[*b] - coords[*a]).norm())
                .collect(),
            Space::Rt => kind
                .local_faces()
                .iter()
                .map(|[a, b, c]| 0.5 * (coords[*b] - coords[*a]).cross(&(coords[*c] - coords[*a])).norm())
                .collect(),
            Space::P1 => Vec::new(),
        };
        Ok(Self { space, kind, coords, grads, offsets, measures })
    }

    pub fn for_cell(space: Space, mesh: &Mesh, c: usize) -> Result<Self> {
        Self::new(space, mesh.cell_kind(), &mesh.cell_coords(c))
    }

    pub fn dof_count(&self) -> usize {
        self.space.local_dof_count(self.kind)
    }

    pub fn barycentric(&self, x: &Vec3) -> Vec<f64> {
        self.grads.iter().zip(&self.offsets).map(|(g, o)| o + g.dot(x)).collect()
    }

    /// Basis values at `x`.
    pub fn eval(&self, x: &Vec3, out: &mut [Vec3]) {
        match (self.space, self.kind) {
            (Space::Nd, CellKind::Square) => {
                let (x0, y0) = (self.coords[0].x, self.coords[0].y);
                let (hx, hy) = (self.coords[1].x - x0, self.coords[3].y - y0);
                let (s, t) = ((x.x - x0) / hx, (x.y - y0) / hy);
                out[0] = Vec3::new(1.0 - t, 0.0, 0.0);
                out[1] = Vec3::new(0.0, s, 0.0);
                out[2] = Vec3::new(t, 0.0, 0.0);
                out[3] = Vec3::new(0.0, 1.0 - s, 0.0);
            }
            (Space::Nd, _) => {
                let lam = self.barycentric(x);
                for (k, [a, b]) in self.kind.local_edges().iter().enumerate() {
                    out[k] = (self.grads[*b] * lam[*a] - self.grads[*a] * lam[*b]) * self.measures[k];
                }
            }
            (Space::Rt, _) => {
                let lam = self.barycentric(x);
                let g = &self.grads;
                for (k, [a, b, c]) in self.kind.local_faces().iter().enumerate() {
                    let v = g[*b].cross(&g[*c]) * lam[*a]
                        + g[*c].cross(&g[*a]) * lam[*b]
                        + g[*a].cross(&g[*b]) * lam[*c];
                    out[k] = v * (2.0 * self.measures[k]);
                }
            }
            (Space::P1, CellKind::Square) => {
                let (s, t, _, _) = self.bilinear_coords(x);
                let n = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
                for k in 0..4 {
                    out[k] = Vec3::new(n[k], 0.0, 0.0);
                }
            }
            (Space::P1, _) => {
                for (k, l) in self.barycentric(x).into_iter().enumerate() {
                    out[k] = Vec3::new(l, 0.0, 0.0);
                }
            }
        }
    }

    /// Curl (edge), divergence in `x` (face) or gradient (vertex) at `x`.
    pub fn eval_derivative(&self, x: &Vec3, out: &mut [Vec3]) {
        match (self.space, self.kind) {
            (Space::Nd, CellKind::Square) => {
                let hx = self.coords[1].x - self.coords[0].x;
                let hy = self.coords[3].y - self.coords[0].y;
                out[0] = Vec3::new(0.0, 0.0, 1.0 / hy);
                out[1] = Vec3::new(0.0, 0.0, 1.0 / hx);
                out[2] = Vec3::new(0.0, 0.0, -1.0 / hy);
                out[3] = Vec3::new(0.0, 0.0, -1.0 / hx);
            }
            (Space::Nd, _) => {
                for (k, [a, b]) in self.kind.local_edges().iter().enumerate() {
                    out[k] = self.grads[*a].cross(&self.grads[*b]) * (2.0 * self.measures[k]);
                }
            }
            (Space::Rt, _) => {
                let g = &self.grads;
                for (k, [a, b, c]) in self.kind.local_faces().iter().enumerate() {
                    let d = 6.0 * self.measures[k] * g[*a].dot(&g[*b].cross(&g[*c]));
                    out[k] = Vec3::new(d, 0.0, 0.0);
                }
            }
            (Space::P1, CellKind::Square) => {
                let (s, t, hx, hy) = self.bilinear_coords(x);
                out[0] = Vec3::new(-(1.0 - t) / hx, -(1.0 - s) / hy, 0.0);
                out[1] = Vec3::new((1.0 - t) / hx, -s / hy, 0.0);
                out[2] = Vec3::new(t / hx, s / hy, 0.0);
                out[3] = Vec3::new(-t / hx, (1.0 - s) / hy, 0.0);
            }
            (Space::P1, _) => out[..self.grads.len()].copy_from_slice(&self.grads),
        }
    }

    fn bilinear_coords(&self, x: &Vec3) -> (f64, f64, f64, f64) {
        let (x0, y0) = (self.coords[0].x, self.coords[0].y);
        let (hx, hy) = (self.coords[1].x - x0, self.coords[3].y - y0);
        ((x.x - x0) / hx, (x.y - y0) / hy, hx, hy)
    }

    /// Applies the local DOF functionals (in local orientation) to `field`.
    pub fn dofs_of(&self, field: &dyn Fn(&Vec3) -> Vec3) -> Vec<f64> {
        match self.space {
            Space::Nd => self
                .kind
                .local_edges()
                .iter()
                .map(|[a, b]| dof_functional_nd(&self.coords[*a], &self.coords[*b], field))
                .collect(),
            Space::Rt => self
                .kind
                .local_faces()
                .iter()
                .map(|[a, b, c]| dof_functional_rt(&self.coords[*a], &self.coords[*b], &self.coords[*c], field))
                .collect(),
            Space::P1 => self.coords.iter().map(|p| field(p).x).collect(),
        }
    }
}

fn barycentric(kind: CellKind, coords: &[Vec3]) -> (Vec<Vec3>, Vec<f64>) {
    let p0 = coords[0];
    let d = if kind == CellKind::Tetrahedron { 3 } else { 2 };
    let mut jac = nalgebra::DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for r in 0..d {
            jac[(r, i)] = coords[i + 1][r] - p0[r];
        }
    }
    let inv = jac.try_inverse().expect("degenerate cell");
    let mut grads = vec![Vec3::zeros(); d + 1];
    for i in 0..d {
        for r in 0..d {
            grads[i + 1][r] = inv[(i, r)];
        }
    }
    grads[0] = -grads[1..].iter().fold(Vec3::zeros(), |a, g| a + g);
    // lambda_i vanishes at p0 for i > 0, and lambda_0 = 1 - sum of the rest.
    let offsets = grads.iter().map(|g| -g.dot(&p0)).enumerate().map(|(i, o)| if i == 0 { 1.0 + o } else { o }).collect();
    (grads, offsets)
}

/// Rule used for edge functionals (exact through degree 5).
fn edge_rule() -> QuadratureRule {
    QuadratureRule::interval(3)
}

/// Rule used for face functionals (exact through degree 6).
fn face_rule() -> QuadratureRule {
    QuadratureRule::triangle(4)
}

/// Average tangential component of `field` along the segment `a -> b`.
pub fn dof_functional_nd(a: &Vec3, b: &Vec3, field: &dyn Fn(&Vec3) -> Vec3) -> f64 {
    let d = b - a;
    let t = d / d.norm();
    let rule = edge_rule();
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| w * field(&(a + d * p.x)).dot(&t))
        .sum()
}

/// Average normal component of `field` over the triangle `(a, b, c)` with
/// normal `(b - a) x (c - a)`.
pub fn dof_functional_rt(a: &Vec3, b: &Vec3, c: &Vec3, field: &dyn Fn(&Vec3) -> Vec3) -> f64 {
    let (e1, e2) = (b - a, c - a);
    let n = e1.cross(&e2);
    let n = n / n.norm();
    let rule = face_rule();
    // Reference triangle weights sum to 1/2; the average needs weight 2.
    rule.points
        .iter()
        .zip(&rule.weights)
        .map(|(p, w)| 2.0 * w * field(&(a + e1 * p.x + e2 * p.y)).dot(&n))
        .sum()
}

/// A field to interpolate: scalar for the vertex space, vector otherwise.
pub enum Field<'a> {
    Scalar(&'a dyn Fn(&Vec3) -> f64),
    Vector(&'a dyn Fn(&Vec3) -> Vec3),
}

pub fn interpolate_nd(mesh: &Mesh, field: &dyn Fn(&Vec3) -> Vec3) -> Vec<f64> {
    let v = mesh.vertices();
    mesh.edges().iter().map(|&[a, b]| dof_functional_nd(&v[a], &v[b], field)).collect()
}

pub fn interpolate_rt(mesh: &Mesh, field: &dyn Fn(&Vec3) -> Vec3) -> Result<Vec<f64>> {
    Space::Rt.check(mesh.cell_kind())?;
    let v = mesh.vertices();
    Ok(mesh
        .faces()
        .iter()
        .map(|&[a, b, c]| dof_functional_rt(&v[a], &v[b], &v[c], field))
        .collect())
}

pub fn interpolate_p1(mesh: &Mesh, f: &dyn Fn(&Vec3) -> f64) -> Vec<f64> {
    mesh.vertices().iter().map(f).collect()
}

/// How the DOF functional of an edge or face is evaluated on a field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DofRule {
    /// Mean tangential (normal) component over the edge (face).
    #[default]
    Average,
    /// Tangential (normal) component at the edge midpoint (face centroid).
    /// Agrees with `Average` on every field of the lowest-order spaces.
    Midpoint,
}

/// Interpolant of a vector field onto the edge or face space using `rule`.
pub fn interpolate_vector(space: Space, mesh: &Mesh, field: &dyn Fn(&Vec3) -> Vec3, rule: DofRule) -> Result<Vec<f64>> {
    space.check(mesh.cell_kind())?;
    let v = mesh.vertices();
    match (space, rule) {
        (Space::Nd, DofRule::Average) => Ok(interpolate_nd(mesh, field)),
        (Space::Rt, DofRule::Average) => interpolate_rt(mesh, field),
        (Space::Nd, DofRule::Midpoint) => Ok(mesh
            .edges()
            .iter()
            .map(|&[a, b]| {
                let d = v[b] - v[a];
                field(&((v[a] + v[b]) * 0.5)).dot(&d) / d.norm()
            })
            .collect()),
        (Space::Rt, DofRule::Midpoint) => Ok(mesh
            .faces()
            .iter()
            .map(|&[a, b, c]| {
                let n = (v[b] - v[a]).cross(&(v[c] - v[a]));
                field(&((v[a] + v[b] + v[c]) / 3.0)).dot(&n) / n.norm()
            })
            .collect()),
        (Space::P1, _) => Err(Error::InvalidArgument("vertex space takes scalar fields".into())),
    }
}

/// Canonical interpolant of `field` onto `space` over `mesh`, one coefficient
/// per global DOF.
pub fn interpolate(space: Space, mesh: &Mesh, field: Field<'_>) -> Result<Vec<f64>> {
    space.check(mesh.cell_kind())?;
    match (space, field) {
        (Space::Nd, Field::Vector(f)) => Ok(interpolate_nd(mesh, f)),
        (Space::Rt, Field::Vector(f)) => interpolate_rt(mesh, f),
        (Space::P1, Field::Scalar(f)) => Ok(interpolate_p1(mesh, f)),
        (s, _) => Err(Error::InvalidArgument(format!("field kind does not match space {}", s.name()))),
    }
}

/// Value and derivative of the discrete field `coeffs` at `x` inside cell `c`.
pub fn eval_discrete(space: Space, mesh: &Mesh, coeffs: &[f64], c: usize, x: &Vec3) -> Result<(Vec3, Vec3)> {
    let n = space.global_dof_count(mesh);
    if coeffs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: coeffs.len() });
    }
    let basis = LocalBasis::for_cell(space, mesh, c)?;
    let k = basis.dof_count();
    let mut vals = vec![Vec3::zeros(); k];
    let mut ders = vec![Vec3::zeros(); k];
    basis.eval(x, &mut vals);
    basis.eval_derivative(x, &mut ders);
    let (dofs, signs) = space.cell_dofs(mesh, c);
    let mut v = Vec3::zeros();
    let mut d = Vec3::zeros();
    for i in 0..k {
        let s = signs.map_or(1.0, |s| s[i]);
        v += vals[i] * (s * coeffs[dofs[i]]);
        d += ders[i] * (s * coeffs[dofs[i]]);
    }
    Ok((v, d))
}

/// Edge-by-vertex matrix of the gradient in DOF coordinates:
/// `(grad chi)_e = (chi(v_2) - chi(v_1)) / |e|`.
pub fn gradient_matrix(mesh: &Mesh) -> CsrMatrix {
    let v = mesh.vertices();
    let mut t = Vec::with_capacity(2 * mesh.n_edges());
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let len = (v[b] - v[a]).norm();
        t.push((e, a, -1.0 / len));
        t.push((e, b, 1.0 / len));
    }
    CsrMatrix::from_triplets(mesh.n_edges(), mesh.n_vertices(), &t)
}

/// Face-by-edge matrix of the curl in DOF coordinates (tetrahedral meshes):
/// the average normal curl over a face is its boundary circulation over its area.
pub fn curl_matrix(mesh: &Mesh) -> Result<CsrMatrix> {
    Space::Rt.check(mesh.cell_kind())?;
    let v = mesh.vertices();
    let edge_id: std::collections::HashMap<[usize; 2], usize> =
        mesh.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut t = Vec::with_capacity(3 * mesh.n_faces());
    for (f, &[a, b, c]) in mesh.faces().iter().enumerate() {
        let area = 0.5 * (v[b] - v[a]).cross(&(v[c] - v[a])).norm();
        // Boundary cycle a -> b -> c -> a with a < b < c.
        for (p, q, s) in [(a, b, 1.0), (b, c, 1.0), (a, c, -1.0)] {
            let e = edge_id[&[p, q]];
            t.push((f, e, s * (v[q] - v[p]).norm() / area));
        }
    }
    Ok(CsrMatrix::from_triplets(mesh.n_faces(), mesh.n_edges(), &t))
}
