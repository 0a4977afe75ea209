//! Global systems for `a(u, v) = eta (D u, D v) + (u, v)` where `D` is the
//! curl (edge elements) or the divergence (face elements), load vectors, and
//! elimination of essential boundary conditions by lifting.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::elements::{CellMap, LocalBasis, Space};
use crate::error::{Error, Result};
use crate::mesh::{CellKind, Mesh, Vec3};
use crate::quadrature::QuadratureRule;
use crate::sparse::CsrMatrix;

/// Degree integrated exactly by the cell rules used for assembly.
pub const CELL_QUADRATURE_DEGREE: usize = 6;

/// Global DOF numbering with the boundary classification.
#[derive(Clone, Debug)]
pub struct DofMap {
    space: Space,
    boundary: Vec<bool>,
    free: Vec<usize>,
    free_index: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, space: Space) -> Result<Self> {
        space.check(mesh.cell_kind())?;
        let flags = match space {
            Space::Nd => mesh.edge_flags(),
            Space::Rt => mesh.face_flags(),
            Space::P1 => mesh.vertex_flags(),
        };
        let boundary: Vec<bool> = flags.iter().map(|f| f.is_boundary()).collect();
        let mut free = Vec::new();
        let free_index = boundary
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                if b {
                    None
                } else {
                    free.push(i);
                    Some(free.len() - 1)
                }
            })
            .collect();
        Ok(Self { space, boundary, free, free_index })
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn n_dofs(&self) -> usize {
        self.boundary.len()
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Global indices of the free DOFs, increasing.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&i| full[i]).collect()
    }
}

/// Element matrix `mass_weight * M + stiffness_weight * K` in local
/// orientation.
pub fn element_matrix(space: Space, kind: CellKind, coords: &[Vec3], mass_weight: f64, stiffness_weight: f64) -> Result<DMatrix<f64>> {
    let basis = LocalBasis::new(space, kind, coords)?;
    let rule = QuadratureRule::for_cell(kind, CELL_QUADRATURE_DEGREE);
    Ok(element_matrix_with(&basis, &CellMap::new(kind, coords), &rule, mass_weight, stiffness_weight))
}

fn element_matrix_with(basis: &LocalBasis, map: &CellMap, rule: &QuadratureRule, mw: f64, kw: f64) -> DMatrix<f64> {
    let k = basis.dof_count();
    let mut m = DMatrix::zeros(k, k);
    let mut vals = vec![Vec3::zeros(); k];
    let mut ders = vec![Vec3::zeros(); k];
    for (x, w) in map.quadrature(rule) {
        basis.eval(&x, &mut vals);
        basis.eval_derivative(&x, &mut ders);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] += w * (mw * vals[i].dot(&vals[j]) + kw * ders[i].dot(&ders[j]));
            }
        }
    }
    m
}

/// `mass_weight * M + stiffness_weight * K` over all DOFs.
pub fn assemble_weighted(mesh: &Mesh, space: Space, mass_weight: f64, stiffness_weight: f64) -> Result<CsrMatrix> {
    space.check(mesh.cell_kind())?;
    let kind = mesh.cell_kind();
    let rule = QuadratureRule::for_cell(kind, CELL_QUADRATURE_DEGREE);
    let locals: Vec<DMatrix<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let coords = mesh.cell_coords(c);
            let basis = LocalBasis::new(space, kind, &coords).expect("space checked");
            element_matrix_with(&basis, &CellMap::new(kind, &coords), &rule, mass_weight, stiffness_weight)
        })
        .collect();
    // Scatter sequentially in cell order for reproducible sums.
    let k = space.local_dof_count(kind);
    let mut triplets = Vec::with_capacity(mesh.n_cells() * k * k);
    for (c, m) in locals.iter().enumerate() {
        let (dofs, signs) = space.cell_dofs(mesh, c);
        for i in 0..k {
            let si = signs.map_or(1.0, |s| s[i]);
            for j in 0..k {
                let sj = signs.map_or(1.0, |s| s[j]);
                triplets.push((dofs[i], dofs[j], si * sj * m[(i, j)]));
            }
        }
    }
    let n = space.global_dof_count(mesh);
    Ok(CsrMatrix::from_triplets(n, n, &triplets))
}

/// System matrix `eta (D u, D v) + (u, v)` over all DOFs, boundary included.
pub fn assemble_system(mesh: &Mesh, space: Space, eta: f64) -> Result<CsrMatrix> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::NonPositiveEta(eta));
    }
    assemble_weighted(mesh, space, 1.0, eta)
}

pub fn assemble_mass(mesh: &Mesh, space: Space) -> Result<CsrMatrix> {
    assemble_weighted(mesh, space, 1.0, 0.0)
}

/// `(D u, D v)` alone; its kernel contains the gradients (edge elements).
pub fn assemble_stiffness(mesh: &Mesh, space: Space) -> Result<CsrMatrix> {
    assemble_weighted(mesh, space, 0.0, 1.0)
}

/// Load vector `(f, phi_i)` over all DOFs.
pub fn assemble_load(mesh: &Mesh, space: Space, f: &(dyn Fn(&Vec3) -> Vec3 + Sync)) -> Result<Vec<f64>> {
    space.check(mesh.cell_kind())?;
    let kind = mesh.cell_kind();
    let rule = QuadratureRule::for_cell(kind, CELL_QUADRATURE_DEGREE);
    let k = space.local_dof_count(kind);
    let locals: Vec<Vec<f64>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|c| {
            let coords = mesh.cell_coords(c);
            let basis = LocalBasis::new(space, kind, &coords).expect("space checked");
            let map = CellMap::new(kind, &coords);
            let mut vals = vec![Vec3::zeros(); k];
            let mut out = vec![0.0; k];
            for (x, w) in map.quadrature(&rule) {
                basis.eval(&x, &mut vals);
                let fx = f(&x);
                for i in 0..k {
                    out[i] += w * fx.dot(&vals[i]);
                }
            }
            out
        })
        .collect();
    let mut b = vec![0.0; space.global_dof_count(mesh)];
    for (c, l) in locals.iter().enumerate() {
        let (dofs, signs) = space.cell_dofs(mesh, c);
        for i in 0..k {
            b[dofs[i]] += signs.map_or(1.0, |s| s[i]) * l[i];
        }
    }
    Ok(b)
}

/// Full (unconstrained) system over all DOFs.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub dof_map: DofMap,
    pub eta: f64,
}

impl LinearSystem {
    pub fn assemble(mesh: &Mesh, space: Space, eta: f64, f: &(dyn Fn(&Vec3) -> Vec3 + Sync)) -> Result<Self> {
        Ok(Self {
            matrix: assemble_system(mesh, space, eta)?,
            rhs: assemble_load(mesh, space, f)?,
            dof_map: DofMap::new(mesh, space)?,
            eta,
        })
    }
}

/// System restricted to the free DOFs after lifting the boundary data.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Full-length vector holding the boundary DOF values, zero elsewhere.
    pub lifting: Vec<f64>,
    pub dof_map: DofMap,
}

impl ReducedSystem {
    /// Full coefficient vector from a solution over the free DOFs.
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut full = self.lifting.clone();
        for (k, &i) in self.dof_map.free_dofs().iter().enumerate() {
            full[i] = free_values[k];
        }
        full
    }
}

/// Sets every boundary DOF to the DOF functional of `exact` and eliminates
/// it: `rhs_free -= A_free,boundary * g`.
pub fn impose_essential_bc(system: &LinearSystem, mesh: &Mesh, exact: &dyn Fn(&Vec3) -> Vec3) -> Result<ReducedSystem> {
    let values = match system.dof_map.space() {
        Space::P1 => mesh.vertices().iter().map(|p| exact(p).x).collect(),
        space => crate::elements::interpolate_vector(space, mesh, exact, crate::elements::DofRule::Average)?,
    };
    impose_boundary_values(system, &values)
}

/// Eliminates the boundary DOFs with values taken from the full-length
/// vector `values`; interior entries of `values` are ignored.
pub fn impose_boundary_values(system: &LinearSystem, values: &[f64]) -> Result<ReducedSystem> {
    let map = &system.dof_map;
    let n = map.n_dofs();
    if system.matrix.nrows() != n || system.rhs.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: system.rhs.len() });
    }
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: values.len() });
    }
    let lifting: Vec<f64> = (0..n).map(|i| if map.is_boundary(i) { values[i] } else { 0.0 }).collect();
    let al = system.matrix.mul_vec(&lifting);
    let free = map.free_dofs();
    let rhs = free.iter().map(|&i| system.rhs[i] - al[i]).collect();
    Ok(ReducedSystem {
        matrix: system.matrix.principal_submatrix(free),
        rhs,
        lifting,
        dof_map: map.clone(),
    })
}

/// Load vector `M * Pi f` of the interpolant of `f` under `rule`.
pub fn assemble_interpolated_load(
    mesh: &Mesh,
    space: Space,
    f: &dyn Fn(&Vec3) -> Vec3,
    rule: crate::elements::DofRule,
) -> Result<Vec<f64>> {
    let pf = crate::elements::interpolate_vector(space, mesh, f, rule)?;
    Ok(assemble_mass(mesh, space)?.mul_vec(&pf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{gradient_matrix, interpolate_nd, interpolate_p1, interpolate_rt};
    use crate::mesh::{build_mesh, DomainSpec, Shape};

    fn mesh(shape: Shape, kind: CellKind, level: u32) -> Mesh {
        build_mesh(DomainSpec::new(shape, kind).unwrap(), level).unwrap()
    }

    fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Vec<f64> {
        let chol = a.to_dense().cholesky().expect("SPD");
        chol.solve(&nalgebra::DVector::from_column_slice(b)).as_slice().to_vec()
    }

    #[test]
    fn rejects_nonpositive_eta() {
        let m = mesh(Shape::UnitSquare, CellKind::Square, 1);
        assert!(matches!(assemble_system(&m, Space::Nd, 0.0), Err(Error::NonPositiveEta(_))));
        assert!(assemble_system(&m, Space::Nd, -1.0).is_err());
        assert!(assemble_system(&m, Space::Rt, 1.0).is_err());
    }

    // Closed-form element matrix on the unit square: mass [1/3 1/6] blocks for
    // parallel edges, curl-curl is the outer product of (1, 1, -1, -1).
    #[test]
    fn unit_square_element_matrix() {
        let coords = [
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let m = element_matrix(Space::Nd, CellKind::Square, &coords, 1.0, 1.0).unwrap();
        let mass = [
            [1.0 / 3.0, 0.0, 1.0 / 6.0, 0.0],
            [0.0, 1.0 / 3.0, 0.0, 1.0 / 6.0],
            [1.0 / 6.0, 0.0, 1.0 / 3.0, 0.0],
            [0.0, 1.0 / 6.0, 0.0, 1.0 / 3.0],
        ];
        let c = [1.0, 1.0, -1.0, -1.0];
        for i in 0..4 {
            assert!(m[(i, i)] > 0.0);
            for j in 0..4 {
                assert!((m[(i, j)] - (mass[i][j] + c[i] * c[j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn shared_edge_sums_both_cells() {
        let m = mesh(Shape::UnitSquare, CellKind::Square, 1);
        let a = assemble_system(&m, Space::Nd, 1.0).unwrap();
        for e in 0..m.n_edges() {
            let cells = m.adjacency().edge_cells.get(e);
            let mut diag = 0.0;
            for &c in cells {
                let k = m.cell_edges(c).iter().position(|&x| x == e).unwrap();
                let em = element_matrix(Space::Nd, CellKind::Square, &m.cell_coords(c), 1.0, 1.0).unwrap();
                diag += em[(k, k)];
            }
            assert!((a.get(e, e) - diag).abs() < 1e-14);
        }
        // h = 1/2 squares: interior edge diagonal = 2 * (h^2/3 + 1).
        let interior = (0..m.n_edges()).find(|&e| !m.edge_flags()[e].is_boundary()).unwrap();
        assert!((a.get(interior, interior) - 2.0 * (0.25 / 3.0 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn stiffness_annihilates_gradients() {
        for (shape, kind, level) in [
            (Shape::SlitSquare, CellKind::Square, 2),
            (Shape::UnitSquare, CellKind::Triangle, 2),
            (Shape::CrackedCube2, CellKind::Tetrahedron, 1),
        ] {
            let m = mesh(shape, kind, level);
            let k = assemble_stiffness(&m, Space::Nd).unwrap();
            let chi = interpolate_p1(&m, &|p| (3.0 * p.x + p.y * p.y - p.x * p.z).sin());
            let g = gradient_matrix(&m).mul_vec(&chi);
            let r = k.mul_vec(&g);
            let scale = k.max_abs() * g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            assert!(r.iter().all(|x| x.abs() <= 1e-12 * scale), "{shape:?}");
        }
    }

    #[test]
    fn load_examples() {
        let m = mesh(Shape::UnitSquare, CellKind::Triangle, 1);
        let zero = assemble_load(&m, Space::Nd, &|_| Vec3::zeros()).unwrap();
        assert!(zero.iter().all(|&x| x == 0.0));
        // f = phi_e restricted to one cell gives that cell's mass column.
        let c = 3;
        let coords = m.cell_coords(c);
        let basis = LocalBasis::new(Space::Nd, CellKind::Triangle, &coords).unwrap();
        let em = element_matrix(Space::Nd, CellKind::Triangle, &coords, 1.0, 0.0).unwrap();
        let inside = |x: &Vec3| basis.barycentric(x).iter().all(|&l| l > 1e-12);
        let f = |x: &Vec3| {
            if inside(x) {
                let mut v = vec![Vec3::zeros(); 3];
                basis.eval(x, &mut v);
                v[1]
            } else {
                Vec3::zeros()
            }
        };
        let b = assemble_load(&m, Space::Nd, &f).unwrap();
        let (dofs, signs) = Space::Nd.cell_dofs(&m, c);
        for i in 0..3 {
            assert!((b[dofs[i]] * signs.unwrap()[i] * signs.unwrap()[1] - em[(i, 1)]).abs() < 1e-14);
        }
    }

    // Oracle: the same load with a much higher-order cell rule.
    #[test]
    fn load_matches_high_order_quadrature() {
        let f = |p: &Vec3| Vec3::new(-20.0 * p.y.powi(3) + p.y.powi(5), -12.0 * p.x * p.x + p.x.powi(4), 0.0);
        for kind in [CellKind::Square, CellKind::Triangle] {
            let m = mesh(Shape::UnitSquare, kind, 2);
            let b = assemble_load(&m, Space::Nd, &f).unwrap();
            let rule = QuadratureRule::for_cell(kind, 20);
            let mut oracle = vec![0.0; m.n_edges()];
            for c in 0..m.n_cells() {
                let coords = m.cell_coords(c);
                let basis = LocalBasis::new(Space::Nd, kind, &coords).unwrap();
                let map = CellMap::new(kind, &coords);
                let mut v = vec![Vec3::zeros(); basis.dof_count()];
                let (dofs, signs) = Space::Nd.cell_dofs(&m, c);
                for (x, w) in map.quadrature(&rule) {
                    basis.eval(&x, &mut v);
                    for i in 0..v.len() {
                        oracle[dofs[i]] += signs.unwrap()[i] * w * f(&x).dot(&v[i]);
                    }
                }
            }
            for (x, y) in b.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    fn patch_test(shape: Shape, kind: CellKind, level: u32, space: Space, u: &(dyn Fn(&Vec3) -> Vec3 + Sync)) {
        let m = mesh(shape, kind, level);
        // For fields in the discrete space with constant curl/div the
        // right-hand side of the strong form is u itself.
        let sys = LinearSystem::assemble(&m, space, 1.0, u).unwrap();
        let red = impose_essential_bc(&sys, &m, u).unwrap();
        let x = red.expand(&dense_solve(&red.matrix, &red.rhs));
        let exact = match space {
            Space::Nd => interpolate_nd(&m, u),
            _ => interpolate_rt(&m, u).unwrap(),
        };
        for (a, b) in x.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-11, "{shape:?} {kind:?}: {a} vs {b}");
        }
    }

    #[test]
    fn patch_tests() {
        let u2 = |p: &Vec3| Vec3::new(1.0 - p.y, p.x, 0.0);
        patch_test(Shape::UnitSquare, CellKind::Square, 2, Space::Nd, &u2);
        patch_test(Shape::SlitSquare, CellKind::Triangle, 2, Space::Nd, &u2);
        let alpha = Vec3::new(1.0, 2.0, -1.0);
        let beta = Vec3::new(0.5, -1.0, 2.0);
        let u3 = move |p: &Vec3| alpha + beta.cross(p);
        patch_test(Shape::CrackedCube2, CellKind::Tetrahedron, 1, Space::Nd, &u3);
        let p3 = move |p: &Vec3| alpha + p * 0.7;
        patch_test(Shape::Cube2, CellKind::Tetrahedron, 1, Space::Rt, &p3);
    }

    // Level-1 square grid with (y^5, x^4): four free DOFs, compared with a
    // dense LU solve of the full system with boundary rows replaced.
    #[test]
    fn level_one_reduction_matches_dense_oracle() {
        let m = mesh(Shape::UnitSquare, CellKind::Square, 1);
        let u = |p: &Vec3| Vec3::new(p.y.powi(5), p.x.powi(4), 0.0);
        let f = |p: &Vec3| Vec3::new(-20.0 * p.y.powi(3) + p.y.powi(5), -12.0 * p.x * p.x + p.x.powi(4), 0.0);
        let sys = LinearSystem::assemble(&m, Space::Nd, 1.0, &f).unwrap();
        let red = impose_essential_bc(&sys, &m, &u).unwrap();
        assert_eq!(red.dof_map.n_free(), 4);
        let x = red.expand(&dense_solve(&red.matrix, &red.rhs));

        let mut a = sys.matrix.to_dense();
        let mut b = nalgebra::DVector::from_column_slice(&sys.rhs);
        let g = interpolate_nd(&m, &u);
        for i in 0..m.n_edges() {
            if sys.dof_map.is_boundary(i) {
                a.row_mut(i).fill(0.0);
                a[(i, i)] = 1.0;
                b[i] = g[i];
            }
        }
        let oracle = a.lu().solve(&b).unwrap();
        for i in 0..m.n_edges() {
            assert!((x[i] - oracle[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_data_gives_zero_lifting() {
        let m = mesh(Shape::UnitSquare, CellKind::Triangle, 2);
        let f = |p: &Vec3| Vec3::new(p.x, p.y * p.y, 0.0);
        let sys = LinearSystem::assemble(&m, Space::Nd, 1.0, &f).unwrap();
        let red = impose_essential_bc(&sys, &m, &|_| Vec3::zeros()).unwrap();
        assert!(red.lifting.iter().all(|&x| x == 0.0));
        assert_eq!(red.rhs, sys.dof_map.restrict(&sys.rhs));
    }

    #[test]
    fn system_is_symmetric_and_spd_on_free_dofs() {
        for (shape, kind, level, space) in [
            (Shape::UnitSquare, CellKind::Square, 3, Space::Nd),
            (Shape::SlitSquare, CellKind::Triangle, 3, Space::Nd),
            (Shape::CrackedCube2, CellKind::Tetrahedron, 1, Space::Nd),
            (Shape::Cube2, CellKind::Tetrahedron, 1, Space::Rt),
        ] {
            let m = mesh(shape, kind, level);
            let a = assemble_system(&m, space, 1.0).unwrap();
            assert!(a.symmetry_defect() <= 1e-12 * a.max_abs());
            let map = DofMap::new(&m, space).unwrap();
            let red = a.principal_submatrix(map.free_dofs()).to_dense();
            let eig = red.symmetric_eigenvalues();
            assert!(eig.min() > 0.0, "{shape:?} {space:?}");
        }
    }

    // On the slit square only rows and columns of DOFs touching the cut differ
    // from the unit square (after matching edges by coordinates).
    #[test]
    fn slit_changes_only_cut_adjacent_entries() {
        let s = mesh(Shape::SlitSquare, CellKind::Square, 2);
        let u = mesh(Shape::UnitSquare, CellKind::Square, 2);
        let a_s = assemble_system(&s, Space::Nd, 1.0).unwrap();
        let a_u = assemble_system(&u, Space::Nd, 1.0).unwrap();
        let key = |m: &Mesh, e: usize| {
            let [a, b] = m.edges()[e];
            let c = (m.vertices()[a] + m.vertices()[b]) * 8.0;
            (c.x.round() as i64, c.y.round() as i64)
        };
        let unit_index: std::collections::HashMap<_, _> = (0..u.n_edges()).map(|e| (key(&u, e), e)).collect();
        let touches_cut = |e: usize| {
            s.edges()[e].iter().any(|&v| {
                let p = s.vertices()[v];
                (p.x - 0.5).abs() < 1e-14 && p.y < 0.5 + 1e-14
            })
        };
        for (i, j, v) in a_s.triplets() {
            if touches_cut(i) || touches_cut(j) {
                continue;
            }
            let (ui, uj) = (unit_index[&key(&s, i)], unit_index[&key(&s, j)]);
            assert!((v - a_u.get(ui, uj)).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolated_load_and_given_boundary_values() {
        let m = mesh(Shape::UnitSquare, CellKind::Triangle, 2);
        let u = |p: &Vec3| Vec3::new(1.0 - p.y, p.x, 0.0);
        // For a field in the discrete space both loads coincide.
        let q = assemble_load(&m, Space::Nd, &u).unwrap();
        let l = assemble_interpolated_load(&m, Space::Nd, &u, crate::elements::DofRule::Midpoint).unwrap();
        assert!(q.iter().zip(&l).all(|(a, b)| (a - b).abs() < 1e-13));
        let sys = LinearSystem::assemble(&m, Space::Nd, 1.0, &u).unwrap();
        let g = interpolate_nd(&m, &u);
        let a = impose_essential_bc(&sys, &m, &u).unwrap();
        let b = impose_boundary_values(&sys, &g).unwrap();
        assert_eq!(a.rhs, b.rhs);
        assert_eq!(a.lifting, b.lifting);
        assert!(b.lifting.iter().enumerate().all(|(i, &v)| sys.dof_map.is_boundary(i) || v == 0.0));
        assert!(impose_boundary_values(&sys, &g[1..]).is_err());
    }
}
