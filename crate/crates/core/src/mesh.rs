//! Structured meshes on the unit square, the slit square, the cube `(0,2)^3`
//! and the cracked cube.
//!
//! Every mesh is a uniform refinement of a level-1 mesh with `2^level` cells
//! per side. Simplicial cells come from a consistent Kuhn subdivision of each
//! grid square/cube, which keeps consecutive levels nested. Slits and cracks
//! are represented by duplicating the vertices strictly inside the cut
//! surface; cells on the `+x` side of the cut use the copies, so the cut
//! becomes ordinary boundary for everything downstream.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    /// `(0,1)^2`
    UnitSquare,
    /// `(0,1)^2` minus the segment `{1/2} x (0,1/2]`
    SlitSquare,
    /// `(0,1)^2` minus the segment `(0,1/2] x {1/2}`, the transpose of
    /// `SlitSquare`
    TransposedSlitSquare,
    /// `(0,2)^3`
    Cube2,
    /// `(0,2)^3` minus the square `{1} x [1,2)^2`
    CrackedCube2,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::UnitSquare => "square",
            Shape::SlitSquare => "slit",
            Shape::TransposedSlitSquare => "hslit",
            Shape::Cube2 => "cube",
            Shape::CrackedCube2 => "crackcube",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(Shape::UnitSquare),
            "slit" => Ok(Shape::SlitSquare),
            "hslit" => Ok(Shape::TransposedSlitSquare),
            "cube" => Ok(Shape::Cube2),
            "crackcube" => Ok(Shape::CrackedCube2),
            _ => Err(Error::InvalidDomain(format!("unknown domain '{s}'"))),
        }
    }
}

impl std::str::FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quad" | "square" => Ok(CellKind::Square),
            "tri" | "triangle" => Ok(CellKind::Triangle),
            "tet" | "tetrahedron" => Ok(CellKind::Tetrahedron),
            _ => Err(Error::InvalidDomain(format!("unknown cell kind '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellKind {
    Square,
    Triangle,
    Tetrahedron,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Square => "square",
            CellKind::Triangle => "triangle",
            CellKind::Tetrahedron => "tetrahedron",
        }
    }

    pub fn vertex_count(self) -> usize {
        match self {
            CellKind::Square => 4,
            CellKind::Triangle => 3,
            CellKind::Tetrahedron => 4,
        }
    }

    pub fn edge_count(self) -> usize {
        match self {
            CellKind::Square => 4,
            CellKind::Triangle => 3,
            CellKind::Tetrahedron => 6,
        }
    }

    pub fn face_count(self) -> usize {
        match self {
            CellKind::Tetrahedron => 4,
            _ => 0,
        }
    }

    /// Local edges as pairs of local vertex indices. The local tangent runs
    /// from the first to the second vertex.
    pub fn local_edges(self) -> &'static [[usize; 2]] {
        match self {
            CellKind::Square => &SQUARE_EDGES,
            CellKind::Triangle => &TRIANGLE_EDGES,
            CellKind::Tetrahedron => &TET_EDGES,
        }
    }

    /// Local faces of a tetrahedron; face `i` is opposite vertex `i`.
    pub fn local_faces(self) -> &'static [[usize; 3]] {
        match self {
            CellKind::Tetrahedron => &TET_FACES,
            _ => &[],
        }
    }
}

// Square vertices are ordered (x0,y0), (x1,y0), (x1,y1), (x0,y1).
const SQUARE_EDGES: [[usize; 2]; 4] = [[0, 1], [1, 2], [3, 2], [0, 3]];
const TRIANGLE_EDGES: [[usize; 2]; 3] = [[0, 1], [0, 2], [1, 2]];
const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
const TET_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DomainSpec {
    shape: Shape,
    cell_kind: CellKind,
}

impl DomainSpec {
    pub fn new(shape: Shape, cell_kind: CellKind) -> Result<Self> {
        let ok = match shape {
            Shape::UnitSquare | Shape::SlitSquare | Shape::TransposedSlitSquare => cell_kind != CellKind::Tetrahedron,
            Shape::Cube2 | Shape::CrackedCube2 => cell_kind == CellKind::Tetrahedron,
        };
        if !ok {
            return Err(Error::InvalidDomain(format!(
                "{shape:?} cannot be meshed with {} cells",
                cell_kind.name()
            )));
        }
        Ok(Self { shape, cell_kind })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn cell_kind(&self) -> CellKind {
        self.cell_kind
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::UnitSquare | Shape::SlitSquare | Shape::TransposedSlitSquare => 2,
            Shape::Cube2 | Shape::CrackedCube2 => 3,
        }
    }

    pub fn side_length(&self) -> f64 {
        match self.dim() {
            2 => 1.0,
            _ => 2.0,
        }
    }

    pub fn has_cut(&self) -> bool {
        matches!(self.shape, Shape::SlitSquare | Shape::TransposedSlitSquare | Shape::CrackedCube2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryFlag {
    Interior,
    OuterBoundary,
    CrackFace,
}

impl BoundaryFlag {
    pub fn is_boundary(self) -> bool {
        self != BoundaryFlag::Interior
    }

    fn code(self) -> u8 {
        match self {
            BoundaryFlag::Interior => 0,
            BoundaryFlag::OuterBoundary => 1,
            BoundaryFlag::CrackFace => 2,
        }
    }
}

/// Compressed one-to-many incidence table.
#[derive(Clone, Debug, Default)]
pub struct Incidence {
    offsets: Vec<usize>,
    items: Vec<usize>,
}

impl Incidence {
    fn from_lists(lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut items = Vec::new();
        for l in lists {
            items.extend(l);
            offsets.push(items.len());
        }
        Self { offsets, items }
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.items[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// Cell-to-entity and entity-to-cell tables of a mesh.
#[derive(Clone, Debug)]
pub struct Adjacency {
    /// `cell_edges[c * edges_per_cell + k]` is the global edge of local edge `k`.
    pub cell_edges: Vec<usize>,
    pub cell_edge_signs: Vec<f64>,
    /// Tetrahedra only; face `k` is opposite local vertex `k`.
    pub cell_faces: Vec<usize>,
    pub cell_face_signs: Vec<f64>,
    pub edge_cells: Incidence,
    pub face_cells: Incidence,
    pub vertex_cells: Incidence,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    domain: DomainSpec,
    level: u32,
    cells_per_side: usize,
    h: f64,
    vertices: Vec<Vec3>,
    vertex_flags: Vec<BoundaryFlag>,
    edges: Vec<[usize; 2]>,
    edge_flags: Vec<BoundaryFlag>,
    faces: Vec<[usize; 3]>,
    face_flags: Vec<BoundaryFlag>,
    cell_vertices: Vec<usize>,
    cell_grid: Vec<[usize; 3]>,
    adjacency: Adjacency,
}

/// Reflection applied to the Kuhn subdivision of each grid cell. With `x`
/// reflected, squares are cut along the NW-SE diagonal and cubes share the
/// diagonal from `(1,0,0)` to `(0,1,1)`.
const KUHN_FLIP: [bool; 3] = [true, false, false];

/// Builds the structured mesh of `domain` with `2^level` cells per side.
pub fn build_mesh(domain: DomainSpec, level: u32) -> Result<Mesh> {
    if level < 1 {
        return Err(Error::InvalidLevel(level));
    }
    if level > 12 {
        return Err(Error::InvalidArgument(format!("level {level} is too fine")));
    }
    let dim = domain.dim();
    let n = 1usize << level;
    let side = domain.side_length();
    let h = side / n as f64;
    let np = n + 1;

    let vid = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let nz = if dim == 3 { np } else { 1 };
    let mut vertices = Vec::with_capacity(np * np * nz);
    let mut grid_of_vertex = Vec::with_capacity(np * np * nz);
    for k in 0..nz {
        for j in 0..np {
            for i in 0..np {
                vertices.push(Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h));
                grid_of_vertex.push([i, j, k]);
            }
        }
    }

    let kind = domain.cell_kind();
    let mut cell_vertices = Vec::new();
    let mut cell_grid = Vec::new();
    let nzc = if dim == 3 { n } else { 1 };
    let simplices = kuhn_simplices(dim);
    for k in 0..nzc {
        for j in 0..n {
            for i in 0..n {
                match kind {
                    CellKind::Square => {
                        cell_vertices.extend_from_slice(&[
                            vid(i, j, 0),
                            vid(i + 1, j, 0),
                            vid(i + 1, j + 1, 0),
                            vid(i, j + 1, 0),
                        ]);
                        cell_grid.push([i, j, 0]);
                    }
                    _ => {
                        for s in &simplices {
                            for off in s {
                                cell_vertices.push(vid(i + off[0], j + off[1], k + off[2]));
                            }
                            cell_grid.push([i, j, k]);
                        }
                    }
                }
            }
        }
    }

    let nv_cell = kind.vertex_count();
    if domain.has_cut() {
        let half = n / 2;
        // Cut vertices lie on the plane `g[axis] == half`; cells on the upper
        // side of that plane use the copies.
        let axis = usize::from(domain.shape() == Shape::TransposedSlitSquare);
        let in_cut = |g: [usize; 3]| match domain.shape() {
            Shape::SlitSquare => g[0] == half && g[1] < half,
            Shape::TransposedSlitSquare => g[1] == half && g[0] < half,
            Shape::CrackedCube2 => g[0] == half && g[1] > half && g[2] > half,
            _ => false,
        };
        let mut copy_of = HashMap::new();
        for v in 0..grid_of_vertex.len() {
            if in_cut(grid_of_vertex[v]) {
                copy_of.insert(v, vertices.len());
                vertices.push(vertices[v]);
            }
        }
        for (c, g) in cell_grid.iter().enumerate() {
            if g[axis] >= half {
                for v in &mut cell_vertices[c * nv_cell..(c + 1) * nv_cell] {
                    if let Some(&copy) = copy_of.get(v) {
                        *v = copy;
                    }
                }
            }
        }
    }

    // Simplices keep their vertices in increasing global order so that local
    // and global entity orientations agree.
    if kind != CellKind::Square {
        for cv in cell_vertices.chunks_mut(nv_cell) {
            cv.sort_unstable();
        }
    }

    let n_cells = cell_grid.len();
    let ne_cell = kind.edge_count();
    let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut cell_edges = Vec::with_capacity(n_cells * ne_cell);
    let mut cell_edge_signs = Vec::with_capacity(n_cells * ne_cell);
    for c in 0..n_cells {
        let cv = &cell_vertices[c * nv_cell..(c + 1) * nv_cell];
        for le in kind.local_edges() {
            let (a, b) = (cv[le[0]], cv[le[1]]);
            let key = [a.min(b), a.max(b)];
            let next = edges.len();
            let id = *edge_index.entry(key).or_insert_with(|| {
                edges.push(key);
                next
            });
            cell_edges.push(id);
            cell_edge_signs.push(if a < b { 1.0 } else { -1.0 });
        }
    }

    let mut face_index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut faces = Vec::new();
    let mut cell_faces = Vec::new();
    let mut cell_face_signs = Vec::new();
    if kind == CellKind::Tetrahedron {
        for c in 0..n_cells {
            let cv = &cell_vertices[c * nv_cell..(c + 1) * nv_cell];
            for lf in kind.local_faces() {
                let local = [cv[lf[0]], cv[lf[1]], cv[lf[2]]];
                let mut key = local;
                key.sort_unstable();
                let next = faces.len();
                let id = *face_index.entry(key).or_insert_with(|| {
                    faces.push(key);
                    next
                });
                cell_faces.push(id);
                cell_face_signs.push(permutation_sign(&local));
            }
        }
    }

    let invert = |count: usize, table: &[usize], stride: usize| {
        let mut lists = vec![Vec::new(); count];
        for c in 0..n_cells {
            for &e in &table[c * stride..(c + 1) * stride] {
                lists[e].push(c);
            }
        }
        Incidence::from_lists(lists)
    };
    let edge_cells = invert(edges.len(), &cell_edges, ne_cell);
    let face_cells = if kind == CellKind::Tetrahedron {
        invert(faces.len(), &cell_faces, 4)
    } else {
        Incidence::from_lists(Vec::new())
    };
    let vertex_cells = invert(vertices.len(), &cell_vertices, nv_cell);

    let adjacency = Adjacency {
        cell_edges,
        cell_edge_signs,
        cell_faces,
        cell_face_signs,
        edge_cells,
        face_cells,
        vertex_cells,
    };

    let mut mesh = Mesh {
        domain,
        level,
        cells_per_side: n,
        h,
        vertices,
        vertex_flags: Vec::new(),
        edges,
        edge_flags: Vec::new(),
        faces,
        face_flags: Vec::new(),
        cell_vertices,
        cell_grid,
        adjacency,
    };
    mesh.classify_boundary();
    Ok(mesh)
}

/// Offsets of the simplices of the Kuhn subdivision of one grid cell.
fn kuhn_simplices(dim: usize) -> Vec<Vec<[usize; 3]>> {
    let perms: Vec<Vec<usize>> = if dim == 2 {
        vec![vec![0, 1], vec![1, 0]]
    } else {
        vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ]
    };
    perms
        .iter()
        .map(|p| {
            let mut cur = [0i64; 3];
            for a in 0..dim {
                cur[a] = i64::from(KUHN_FLIP[a]);
            }
            let mut verts = vec![[cur[0] as usize, cur[1] as usize, cur[2] as usize]];
            for &a in p {
                cur[a] += if KUHN_FLIP[a] { -1 } else { 1 };
                verts.push([cur[0] as usize, cur[1] as usize, cur[2] as usize]);
            }
            verts
        })
        .collect()
}

fn permutation_sign(v: &[usize]) -> f64 {
    let mut inversions = 0;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Mesh {
    fn classify_boundary(&mut self) {
        let dim = self.dim();
        let side = self.domain.side_length();
        let tol = 1e-12 * side;
        // Bitmask of the outer box faces a vertex lies on.
        let box_mask: Vec<u8> = self
            .vertices
            .iter()
            .map(|p| {
                let mut m = 0u8;
                for a in 0..dim {
                    if p[a].abs() < tol {
                        m |= 1 << (2 * a);
                    }
                    if (p[a] - side).abs() < tol {
                        m |= 1 << (2 * a + 1);
                    }
                }
                m
            })
            .collect();
        let classify = |verts: &[usize]| {
            let common = verts.iter().fold(0xffu8, |acc, &v| acc & box_mask[v]);
            if common != 0 {
                BoundaryFlag::OuterBoundary
            } else {
                BoundaryFlag::CrackFace
            }
        };

        let mut edge_on = vec![false; self.edges.len()];
        let mut face_flags = vec![BoundaryFlag::Interior; self.faces.len()];
        if dim == 2 {
            for (e, on) in edge_on.iter_mut().enumerate() {
                *on = self.adjacency.edge_cells.get(e).len() == 1;
            }
        } else {
            // Boundary faces have one cell; boundary edges are their edges.
            let ne = CellKind::Tetrahedron.edge_count();
            for (f, flag) in face_flags.iter_mut().enumerate() {
                let cells = self.adjacency.face_cells.get(f);
                if cells.len() != 1 {
                    continue;
                }
                *flag = classify(&self.faces[f]);
                let c = cells[0];
                let fv = self.faces[f];
                for k in 0..ne {
                    let e = self.adjacency.cell_edges[c * ne + k];
                    let [a, b] = self.edges[e];
                    if fv.contains(&a) && fv.contains(&b) {
                        edge_on[e] = true;
                    }
                }
            }
        }
        let mut vertex_on = vec![false; self.vertices.len()];
        let edge_flags = self
            .edges
            .iter()
            .zip(&edge_on)
            .map(|(ev, &on)| {
                if on {
                    vertex_on[ev[0]] = true;
                    vertex_on[ev[1]] = true;
                    classify(ev)
                } else {
                    BoundaryFlag::Interior
                }
            })
            .collect();
        let vertex_flags = (0..self.vertices.len())
            .map(|v| {
                if vertex_on[v] {
                    classify(&[v])
                } else {
                    BoundaryFlag::Interior
                }
            })
            .collect();
        self.edge_flags = edge_flags;
        self.face_flags = face_flags;
        self.vertex_flags = vertex_flags;
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn cell_kind(&self) -> CellKind {
        self.domain.cell_kind()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Grid size `side_length / 2^level`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_flags(&self) -> &[BoundaryFlag] {
        &self.vertex_flags
    }

    pub fn edge_flags(&self) -> &[BoundaryFlag] {
        &self.edge_flags
    }

    pub fn face_flags(&self) -> &[BoundaryFlag] {
        &self.face_flags
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cell_grid.len()
    }

    pub fn cell_vertices(&self, c: usize) -> &[usize] {
        let nv = self.cell_kind().vertex_count();
        &self.cell_vertices[c * nv..(c + 1) * nv]
    }

    pub fn cell_edges(&self, c: usize) -> &[usize] {
        let ne = self.cell_kind().edge_count();
        &self.adjacency.cell_edges[c * ne..(c + 1) * ne]
    }

    pub fn cell_edge_signs(&self, c: usize) -> &[f64] {
        let ne = self.cell_kind().edge_count();
        &self.adjacency.cell_edge_signs[c * ne..(c + 1) * ne]
    }

    pub fn cell_faces(&self, c: usize) -> &[usize] {
        let nf = self.cell_kind().face_count();
        &self.adjacency.cell_faces[c * nf..(c + 1) * nf]
    }

    pub fn cell_face_signs(&self, c: usize) -> &[f64] {
        let nf = self.cell_kind().face_count();
        &self.adjacency.cell_face_signs[c * nf..(c + 1) * nf]
    }

    /// Structured grid index `(i, j, k)` of the square/cube containing cell `c`.
    pub fn cell_grid_index(&self, c: usize) -> [usize; 3] {
        self.cell_grid[c]
    }

    pub fn cell_coords(&self, c: usize) -> Vec<Vec3> {
        self.cell_vertices(c).iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_centroid(&self, c: usize) -> Vec3 {
        let cv = self.cell_vertices(c);
        cv.iter().fold(Vec3::zeros(), |acc, &v| acc + self.vertices[v]) / cv.len() as f64
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    /// Writes the plain-text dump: `v x y [z]`, `e i j flag`, `c i j k [l]`.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "{self}")?;
        w.flush()
    }
}

impl fmt::Display for Mesh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self.dim();
        for p in &self.vertices {
            if dim == 2 {
                writeln!(f, "v {} {}", p.x, p.y)?;
            } else {
                writeln!(f, "v {} {} {}", p.x, p.y, p.z)?;
            }
        }
        for (e, flag) in self.edges.iter().zip(&self.edge_flags) {
            writeln!(f, "e {} {} {}", e[0], e[1], flag.code())?;
        }
        for c in 0..self.n_cells() {
            write!(f, "c")?;
            for v in self.cell_vertices(c) {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(shape: Shape, kind: CellKind, level: u32) -> Mesh {
        build_mesh(DomainSpec::new(shape, kind).unwrap(), level).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DomainSpec::new(Shape::SlitSquare, CellKind::Tetrahedron).is_err());
        assert!(DomainSpec::new(Shape::CrackedCube2, CellKind::Square).is_err());
        assert!(DomainSpec::new(Shape::Cube2, CellKind::Triangle).is_err());
        let d = DomainSpec::new(Shape::UnitSquare, CellKind::Square).unwrap();
        assert!(matches!(build_mesh(d, 0), Err(Error::InvalidLevel(0))));
    }

    #[test]
    fn names_round_trip() {
        for s in [Shape::UnitSquare, Shape::SlitSquare, Shape::TransposedSlitSquare, Shape::Cube2, Shape::CrackedCube2] {
            assert_eq!(s.name().parse::<Shape>().unwrap(), s);
        }
        assert_eq!("tri".parse::<CellKind>().unwrap(), CellKind::Triangle);
        assert_eq!("Tetrahedron".parse::<CellKind>().unwrap(), CellKind::Tetrahedron);
        assert!("hex".parse::<CellKind>().is_err());
        assert!("disk".parse::<Shape>().is_err());
    }

    #[test]
    fn level_one_square_counts() {
        let m = mesh(Shape::UnitSquare, CellKind::Square, 1);
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_cells()), (9, 12, 4));
        for c in 0..m.n_cells() {
            assert_eq!(m.cell_edges(c).len(), 4);
        }
        let interior = m.edge_flags().iter().filter(|f| !f.is_boundary()).count();
        assert_eq!(interior, 4);
    }

    #[test]
    fn unit_square_counts_closed_form() {
        for level in 1..=4 {
            let n = 1usize << level;
            let q = mesh(Shape::UnitSquare, CellKind::Square, level);
            assert_eq!(q.n_vertices(), (n + 1) * (n + 1));
            assert_eq!(q.n_edges(), 2 * n * (n + 1));
            let t = mesh(Shape::UnitSquare, CellKind::Triangle, level);
            assert_eq!(t.n_edges(), 3 * n * n + 2 * n);
            assert_eq!(t.n_cells(), 2 * n * n);
        }
        let t = mesh(Shape::UnitSquare, CellKind::Triangle, 2);
        assert_eq!((t.n_vertices(), t.n_edges(), t.n_cells()), (25, 56, 32));
    }

    #[test]
    fn triangle_diagonals_run_northwest_to_southeast() {
        let t = mesh(Shape::UnitSquare, CellKind::Triangle, 1);
        for &[a, b] in t.edges() {
            let d = t.vertices()[b] - t.vertices()[a];
            if d.x.abs() > 1e-14 && d.y.abs() > 1e-14 {
                assert!(d.x * d.y < 0.0, "diagonal {d:?}");
            }
        }
    }

    #[test]
    fn tetrahedra_have_six_edges_four_faces_and_positive_volume() {
        let m = mesh(Shape::Cube2, CellKind::Tetrahedron, 1);
        assert_eq!(m.n_cells(), 48);
        for c in 0..m.n_cells() {
            assert_eq!(m.cell_edges(c).len(), 6);
            assert_eq!(m.cell_faces(c).len(), 4);
            let p = m.cell_coords(c);
            let vol = (p[1] - p[0]).cross(&(p[2] - p[0])).dot(&(p[3] - p[0])).abs() / 6.0;
            assert!((vol - 1.0 / 6.0).abs() < 1e-14);
        }
        // V - E + F - C = 1 for a contractible complex.
        let chi = m.n_vertices() as i64 - m.n_edges() as i64 + m.n_faces() as i64
            - m.n_cells() as i64;
        assert_eq!(chi, 1);
    }

    #[test]
    fn edge_orientation_is_canonical() {
        for (shape, kind, level) in [
            (Shape::SlitSquare, CellKind::Square, 3),
            (Shape::CrackedCube2, CellKind::Tetrahedron, 2),
        ] {
            let m = mesh(shape, kind, level);
            assert!(m.edges().iter().all(|e| e[0] < e[1]));
            assert!(m.faces().iter().all(|f| f[0] < f[1] && f[1] < f[2]));
        }
    }

    #[test]
    fn transposed_slit_cuts_along_y() {
        let m = mesh(Shape::TransposedSlitSquare, CellKind::Triangle, 3);
        let s = mesh(Shape::SlitSquare, CellKind::Triangle, 3);
        assert_eq!(m.n_vertices(), s.n_vertices());
        let cut: Vec<usize> = (0..m.n_edges())
            .filter(|&e| m.edge_flags()[e] == BoundaryFlag::CrackFace)
            .collect();
        assert_eq!(cut.len(), 8);
        for e in cut {
            let [a, b] = m.edges()[e];
            let (p, q) = (m.vertices()[a], m.vertices()[b]);
            assert!((p.y - 0.5).abs() < 1e-14 && (q.y - 0.5).abs() < 1e-14 && p.x.max(q.x) <= 0.5 + 1e-14);
        }
    }

    #[test]
    fn slit_duplicates_cut_edges_but_not_the_tip() {
        let m = mesh(Shape::SlitSquare, CellKind::Square, 2);
        let u = mesh(Shape::UnitSquare, CellKind::Square, 2);
        assert_eq!(m.n_edges(), u.n_edges() + 2);
        // Vertices (1/2, 0) and (1/2, 1/4) are copied; the tip is not.
        assert_eq!(m.n_vertices(), u.n_vertices() + 2);
        let tip = Vec3::new(0.5, 0.5, 0.0);
        let tips = m.vertices().iter().filter(|p| (*p - tip).norm() < 1e-14).count();
        assert_eq!(tips, 1);
        let on_slit: Vec<usize> = (0..m.n_edges())
            .filter(|&e| {
                let [a, b] = m.edges()[e];
                let (p, q) = (m.vertices()[a], m.vertices()[b]);
                (p.x - 0.5).abs() < 1e-14
                    && (q.x - 0.5).abs() < 1e-14
                    && p.y.max(q.y) <= 0.5 + 1e-14
            })
            .collect();
        assert_eq!(on_slit.len(), 4);
        for e in on_slit {
            assert_eq!(m.adjacency().edge_cells.get(e).len(), 1);
            assert_eq!(m.edge_flags()[e], BoundaryFlag::CrackFace);
        }
    }

    #[test]
    fn refinement_is_nested() {
        for (shape, kind) in [
            (Shape::UnitSquare, CellKind::Square),
            (Shape::UnitSquare, CellKind::Triangle),
            (Shape::Cube2, CellKind::Tetrahedron),
        ] {
            for level in 1..3 {
                let coarse = mesh(shape, kind, level);
                let fine = mesh(shape, kind, level + 1);
                let key = |p: &Vec3| {
                    let s = 4.0 / fine.h();
                    [(p.x * s).round() as i64, (p.y * s).round() as i64, (p.z * s).round() as i64]
                };
                let fine_vertex: HashMap<_, usize> =
                    fine.vertices().iter().enumerate().map(|(i, p)| (key(p), i)).collect();
                let fine_edges: std::collections::HashSet<[usize; 2]> =
                    fine.edges().iter().copied().collect();
                for &[a, b] in coarse.edges() {
                    let (p, q) = (coarse.vertices()[a], coarse.vertices()[b]);
                    let m = (p + q) / 2.0;
                    let (fa, fb, fm) = (fine_vertex[&key(&p)], fine_vertex[&key(&q)], fine_vertex[&key(&m)]);
                    for (x, y) in [(fa, fm), (fm, fb)] {
                        assert!(fine_edges.contains(&[x.min(y), x.max(y)]));
                    }
                }
            }
        }
    }

    #[test]
    fn dump_has_one_line_per_entity() {
        let m = mesh(Shape::UnitSquare, CellKind::Triangle, 1);
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), m.n_vertices() + m.n_edges() + m.n_cells());
        assert!(text.lines().next().unwrap().starts_with("v 0 0"));
        assert!(text.lines().any(|l| l.starts_with("c ") && l.split(' ').count() == 4));
    }
}
