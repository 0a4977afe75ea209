//! Overlapping subdomains built from blocks of cells, their local DOF sets,
//! the coarse-to-fine prolongation and the coloring number.

use std::str::FromStr;

use crate::assembly::DofMap;
use crate::elements::{dof_functional_nd, dof_functional_rt, LocalBasis, Space};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Vec3};
use crate::sparse::CsrMatrix;

/// Number of blocks along each axis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    blocks: Vec<usize>,
}

impl Layout {
    pub fn new(blocks: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&blocks.len()) || blocks.contains(&0) {
            return Err(Error::Layout(format!("{blocks:?}")));
        }
        Ok(Self { blocks: blocks.to_vec() })
    }

    pub fn uniform(dim: usize, k: usize) -> Self {
        Self { blocks: vec![k; dim] }
    }

    pub fn dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().product()
    }
}

impl FromStr for Layout {
    type Err = Error;

    /// Parses `NxM` or `NxMxK`.
    fn from_str(s: &str) -> Result<Self> {
        let blocks: std::result::Result<Vec<usize>, _> = s.split(['x', 'X']).map(str::parse).collect();
        Layout::new(&blocks.map_err(|_| Error::Layout(s.to_string()))?)
    }
}

impl std::fmt::Display for Layout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: Vec<String> = self.blocks.iter().map(ToString::to_string).collect();
        write!(f, "{}", s.join("x"))
    }
}

#[derive(Clone, Debug)]
pub struct Subdomain {
    /// Cells of the nonoverlapping block, increasing.
    pub cells: Vec<usize>,
    /// Cells of the extended subdomain, increasing.
    pub overlap_cells: Vec<usize>,
    /// Free-DOF indices (reduced numbering) whose entities lie inside the
    /// extended subdomain, increasing.
    pub dofs: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    space: Space,
    layers: usize,
    h: f64,
    coarse_size: f64,
    subdomains: Vec<Subdomain>,
    n_free: usize,
    n0: usize,
    coarse_mesh: Mesh,
    coarse_free: Vec<usize>,
    prolongation: CsrMatrix,
}

impl Decomposition {
    pub fn space(&self) -> Space {
        self.space
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomains
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    /// Overlap width `layers * h`.
    pub fn delta(&self) -> f64 {
        self.layers as f64 * self.h
    }

    /// Block side length `H`.
    pub fn coarse_size(&self) -> f64 {
        self.coarse_size
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    /// Number of colors of a greedy coloring of the overlap graph.
    pub fn color_count(&self) -> usize {
        self.n0
    }

    pub fn coarse_mesh(&self) -> &Mesh {
        &self.coarse_mesh
    }

    /// Free coarse DOFs (global coarse numbering).
    pub fn coarse_free(&self) -> &[usize] {
        &self.coarse_free
    }

    /// Prolongation from free coarse DOFs to free fine DOFs.
    pub fn prolongation(&self) -> &CsrMatrix {
        &self.prolongation
    }

    /// True when every free DOF lies in at least one local set.
    pub fn covers_all(&self) -> bool {
        let mut seen = vec![false; self.n_free];
        for s in &self.subdomains {
            for &d in &s.dofs {
                seen[d] = true;
            }
        }
        seen.into_iter().all(|x| x)
    }
}

/// Cells sharing a vertex with `set`, added `layers` times.
fn grow(mesh: &Mesh, set: &[usize], layers: usize) -> Vec<usize> {
    let vc = &mesh.adjacency().vertex_cells;
    let mut inside = vec![false; mesh.n_cells()];
    let mut front: Vec<usize> = set.to_vec();
    for &c in set {
        inside[c] = true;
    }
    for _ in 0..layers {
        let mut next = Vec::new();
        for &c in &front {
            for &v in mesh.cell_vertices(c) {
                for &d in vc.get(v) {
                    if !inside[d] {
                        inside[d] = true;
                        next.push(d);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        front = next;
    }
    (0..mesh.n_cells()).filter(|&c| inside[c]).collect()
}

fn entity_cells(mesh: &Mesh, space: Space) -> &crate::mesh::Incidence {
    let adj = mesh.adjacency();
    match space {
        Space::Nd => &adj.edge_cells,
        Space::Rt => &adj.face_cells,
        Space::P1 => &adj.vertex_cells,
    }
}

/// Splits `fine` into `layout` blocks, extends each by `layers` vertex-adjacent
/// cell layers, and builds the prolongation from `coarse`.
pub fn build_decomposition(coarse: &Mesh, fine: &Mesh, space: Space, layout: &Layout, layers: usize) -> Result<Decomposition> {
    if layout.dim() != fine.dim() {
        return Err(Error::Layout(format!("{}D layout on a {}D mesh", layout.dim(), fine.dim())));
    }
    let n = fine.cells_per_side();
    if let Some(&b) = layout.blocks().iter().find(|&&b| !n.is_multiple_of(b)) {
        return Err(Error::Layout(format!("{b} blocks do not divide {n} cells per side")));
    }
    if layout.blocks().windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Layout(format!("non-uniform layout {layout} is not supported")));
    }
    let dofs = DofMap::new(fine, space)?;
    let side = fine.domain().side_length();
    let b = layout.blocks();

    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); layout.count()];
    for c in 0..fine.n_cells() {
        let g = fine.cell_grid_index(c);
        let mut id = 0;
        for k in (0..fine.dim()).rev() {
            id = id * b[k] + g[k] * b[k] / n;
        }
        blocks[id].push(c);
    }

    let incidence = entity_cells(fine, space);
    let mut subdomains = Vec::with_capacity(blocks.len());
    for cells in blocks {
        let overlap_cells = grow(fine, &cells, layers);
        let mut inside = vec![false; fine.n_cells()];
        for &c in &overlap_cells {
            inside[c] = true;
        }
        let local = dofs
            .free_dofs()
            .iter()
            .enumerate()
            .filter(|(_, &g)| incidence.get(g).iter().all(|&c| inside[c]))
            .map(|(k, _)| k)
            .collect();
        subdomains.push(Subdomain { cells, overlap_cells, dofs: local });
    }

    let n0 = greedy_colors(fine.n_cells(), &subdomains);
    let full = coarse_prolongation(coarse, fine, space)?;
    let coarse_map = DofMap::new(coarse, space)?;
    let prolongation = full.submatrix(dofs.free_dofs(), coarse_map.free_dofs());
    Ok(Decomposition {
        space,
        layers,
        h: fine.h(),
        coarse_size: side / b[0] as f64,
        subdomains,
        n_free: dofs.n_free(),
        n0,
        coarse_mesh: coarse.clone(),
        coarse_free: coarse_map.free_dofs().to_vec(),
        prolongation,
    })
}

/// Greedy coloring in subdomain order; two subdomains conflict when their
/// extended cell sets intersect.
fn greedy_colors(n_cells: usize, subs: &[Subdomain]) -> usize {
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
    for (i, s) in subs.iter().enumerate() {
        for &c in &s.overlap_cells {
            owners[c].push(i);
        }
    }
    let mut color = vec![usize::MAX; subs.len()];
    for i in 0..subs.len() {
        let mut used = vec![false; subs.len()];
        for &c in &subs[i].overlap_cells {
            for &j in &owners[c] {
                if color[j] != usize::MAX {
                    used[color[j]] = true;
                }
            }
        }
        color[i] = used.iter().position(|u| !u).unwrap_or(0);
    }
    color.iter().map(|c| c + 1).max().unwrap_or(0)
}

/// Coarse cell containing each fine cell, found through the structured grid
/// index and a barycentric test on the fine centroid.
fn parent_cells(coarse: &Mesh, fine: &Mesh) -> Result<Vec<usize>> {
    if coarse.domain() != fine.domain() {
        return Err(Error::NotNested("meshes cover different domains".into()));
    }
    if coarse.level() > fine.level() {
        return Err(Error::NotNested(format!("level {} is coarser than {}", fine.level(), coarse.level())));
    }
    let nc = coarse.cells_per_side();
    let ratio = fine.cells_per_side() / nc;
    let mut by_grid: Vec<Vec<usize>> = vec![Vec::new(); nc.pow(coarse.dim() as u32)];
    let flat = |g: [usize; 3]| g[0] + nc * (g[1] + nc * g[2]);
    for c in 0..coarse.n_cells() {
        by_grid[flat(coarse.cell_grid_index(c))].push(c);
    }
    let bases: Vec<LocalBasis> = (0..coarse.n_cells())
        .map(|c| LocalBasis::for_cell(Space::P1, coarse, c))
        .collect::<Result<_>>()?;
    (0..fine.n_cells())
        .map(|c| {
            let g = fine.cell_grid_index(c).map(|i| i / ratio);
            let x = fine.cell_centroid(c);
            by_grid[flat(g)]
                .iter()
                .copied()
                .find(|&p| bases[p].barycentric(&x).iter().all(|&l| l >= -1e-12))
                .ok_or_else(|| Error::NotNested(format!("no coarse cell contains fine cell {c}")))
        })
        .collect()
}

/// Matrix whose column `j` holds the fine DOFs of the `j`-th coarse basis
/// function (all DOFs, boundary included).
pub fn coarse_prolongation(coarse: &Mesh, fine: &Mesh, space: Space) -> Result<CsrMatrix> {
    space.check(fine.cell_kind())?;
    let parents = parent_cells(coarse, fine)?;
    let v = fine.vertices();
    let n_fine = space.global_dof_count(fine);
    let mut done = vec![false; n_fine];
    let mut triplets = Vec::new();
    for c in 0..fine.n_cells() {
        let p = parents[c];
        let basis = LocalBasis::for_cell(space, coarse, p)?;
        let (cdofs, csigns) = space.cell_dofs(coarse, p);
        let nb = basis.dof_count();
        for &fd in space.cell_dofs(fine, c).0 {
            if done[fd] {
                continue;
            }
            done[fd] = true;
            for k in 0..nb {
                let phi = |x: &Vec3| {
                    let mut out = vec![Vec3::zeros(); nb];
                    basis.eval(x, &mut out);
                    out[k]
                };
                let val = match space {
                    Space::Nd => {
                        let [a, b] = fine.edges()[fd];
                        dof_functional_nd(&v[a], &v[b], &phi)
                    }
                    Space::Rt => {
                        let [a, b, cc] = fine.faces()[fd];
                        dof_functional_rt(&v[a], &v[b], &v[cc], &phi)
                    }
                    Space::P1 => phi(&v[fd]).x,
                };
                let val = val * csigns.map_or(1.0, |s| s[k]);
                if val.abs() > 1e-14 {
                    triplets.push((fd, cdofs[k], val));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(n_fine, space.global_dof_count(coarse), &triplets))
}
