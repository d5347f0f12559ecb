//! Polyhedral meshes with oriented edges and faces.
//!
//! A [`Mesh`] is built once from a vertex/face/cell description (see
//! [`Polymesh`]) and is immutable afterwards. Construction derives the edge
//! set, all orientation signs and a geometry cache, and validates the
//! topological and geometric invariants the discrete complex relies on:
//!
//! * edges are deduplicated by sorted vertex pair, and `t_E` points from the
//!   lower to the higher vertex index;
//! * the face normal `n_F` is the Newell normal of the stored vertex loop;
//! * `n_FE = n_F x t_E`, so that `(t_E, n_FE, n_F)` is right-handed, and
//!   `omega_FE` makes `omega_FE n_FE` point out of the face;
//! * `omega_TF` makes `omega_TF n_F` point out of the cell.

use std::collections::HashMap;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = Vector3<f64>;

/// Relative planarity tolerance (scaled by the face diameter).
pub const PLANARITY_TOLERANCE: f64 = 1e-9;
/// Relative tolerance on the closed-surface identity of a cell.
const CLOSURE_TOLERANCE: f64 = 1e-10;
/// Relative measure below which an entity is considered collapsed.
const DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("polymesh parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("index {index} out of range in {context}")]
    IndexOutOfRange { context: String, index: usize },
    #[error("degenerate {0}")]
    Degenerate(EntityId),
    #[error("face {face} is not planar (deviation {deviation:.3e}, diameter {diameter:.3e})")]
    NonPlanar { face: usize, deviation: f64, diameter: f64 },
    #[error("face {face} is shared by {count} cells")]
    NonManifold { face: usize, count: usize },
    #[error("interior face {face} has the same orientation in both neighbouring cells")]
    InconsistentOrientation { face: usize },
    #[error("cell {cell} has an open boundary at edge {edge}")]
    OpenCell { cell: usize, edge: usize },
    #[error("cell {cell} violates the closed-surface identity (residual {residual:.3e})")]
    NotClosed { cell: usize, residual: f64 },
    #[error("{inner} is not incident to {outer}")]
    NotIncident { outer: EntityId, inner: EntityId },
    #[error("no orientation is defined between {outer} and {inner}")]
    NoOrientation { outer: EntityId, inner: EntityId },
    #[error("invalid mesh specification `{0}`")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Vertex,
    Edge,
    Face,
    Cell,
}

impl EntityKind {
    /// Intrinsic dimension of the entity.
    pub fn dimension(self) -> usize {
        match self {
            EntityKind::Vertex => 0,
            EntityKind::Edge => 1,
            EntityKind::Face => 2,
            EntityKind::Cell => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId {
    pub kind: EntityKind,
    pub index: usize,
}

impl EntityId {
    pub fn vertex(index: usize) -> Self {
        Self { kind: EntityKind::Vertex, index }
    }
    pub fn edge(index: usize) -> Self {
        Self { kind: EntityKind::Edge, index }
    }
    pub fn face(index: usize) -> Self {
        Self { kind: EntityKind::Face, index }
    }
    pub fn cell(index: usize) -> Self {
        Self { kind: EntityKind::Cell, index }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            EntityKind::Vertex => "vertex",
            EntityKind::Edge => "edge",
            EntityKind::Face => "face",
            EntityKind::Cell => "cell",
        };
        write!(f, "{name} {}", self.index)
    }
}

/// Serialized mesh description: vertex coordinates, face vertex loops and
/// cell face lists, all 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polymesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<Vec<usize>>,
    pub cells: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoints, lower global index first; `t_E` points from `vertices[0]`
    /// to `vertices[1]`.
    pub vertices: [usize; 2],
    pub length: f64,
    pub tangent: Point,
    pub midpoint: Point,
}

#[derive(Debug, Clone)]
pub struct Face {
    /// Vertex loop, oriented counter-clockwise around `normal`.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]`.
    pub edges: Vec<usize>,
    pub edge_orientations: Vec<f64>,
    /// In-plane unit normals `n_FE`, one per edge of the loop.
    pub edge_normals: Vec<Point>,
    pub normal: Point,
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
    /// Cells containing this face (one for boundary faces, two otherwise).
    pub cells: Vec<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub faces: Vec<usize>,
    pub face_orientations: Vec<f64>,
    /// Sorted global edge indices.
    pub edges: Vec<usize>,
    /// Sorted global vertex indices.
    pub vertices: Vec<usize>,
    pub volume: f64,
    pub centroid: Point,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    edges: Vec<Edge>,
    faces: Vec<Face>,
    cells: Vec<Cell>,
    h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityGeometry {
    pub id: EntityId,
    pub measure: f64,
    pub centroid: Point,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct GeometryReport {
    pub entities: Vec<EntityGeometry>,
    pub h: f64,
}

fn diameter_of(points: impl Iterator<Item = Point> + Clone) -> f64 {
    let pts: Vec<Point> = points.collect();
    let mut d: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

impl Mesh {
    /// Uniform `n x n x n` partition of the unit cube, with face normals
    /// along `+x`, `+y` and `+z`.
    pub fn cubic(n: usize) -> Mesh {
        Self::from_polymesh(&Polymesh::cubic(n)).expect("cubic mesh is valid")
    }

    pub fn load_polymesh<R: std::io::Read>(source: R) -> Result<Mesh, MeshError> {
        let pm: Polymesh = serde_json::from_reader(source)?;
        Self::from_polymesh(&pm)
    }

    /// Parses `cubic:N` or reads a polymesh file from `path`.
    pub fn from_spec(spec: &str) -> Result<Mesh, MeshError> {
        if let Some(n) = spec.strip_prefix("cubic:") {
            let n: usize = n.trim().parse().map_err(|_| MeshError::Spec(spec.to_string()))?;
            if n == 0 {
                return Err(MeshError::Spec(spec.to_string()));
            }
            return Ok(Self::cubic(n));
        }
        let file = std::fs::File::open(spec)?;
        Self::load_polymesh(std::io::BufReader::new(file))
    }

    pub fn to_polymesh(&self) -> Polymesh {
        Polymesh {
            vertices: self.vertices.iter().map(|p| [p.x, p.y, p.z]).collect(),
            faces: self.faces.iter().map(|f| f.vertices.clone()).collect(),
            cells: self.cells.iter().map(|c| c.faces.clone()).collect(),
        }
    }

    pub fn from_polymesh(pm: &Polymesh) -> Result<Mesh, MeshError> {
        let vertices: Vec<Point> = pm.vertices.iter().map(|v| Point::new(v[0], v[1], v[2])).collect();
        let nv = vertices.len();

        // Edges, in order of first appearance along the face loops.
        let mut edge_map: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edge_vertices: Vec<[usize; 2]> = Vec::new();
        let mut face_edges: Vec<Vec<usize>> = Vec::with_capacity(pm.faces.len());
        for (fi, loop_) in pm.faces.iter().enumerate() {
            if loop_.len() < 3 {
                return Err(MeshError::Degenerate(EntityId::face(fi)));
            }
            let mut fe = Vec::with_capacity(loop_.len());
            for (i, &a) in loop_.iter().enumerate() {
                let b = loop_[(i + 1) % loop_.len()];
                for &v in &[a, b] {
                    if v >= nv {
                        return Err(MeshError::IndexOutOfRange { context: format!("face {fi}"), index: v });
                    }
                }
                if a == b {
                    return Err(MeshError::Degenerate(EntityId::face(fi)));
                }
                let key = (a.min(b), a.max(b));
                let id = *edge_map.entry(key).or_insert_with(|| {
                    edge_vertices.push([key.0, key.1]);
                    edge_vertices.len() - 1
                });
                fe.push(id);
            }
            let mut sorted = loop_.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != loop_.len() {
                return Err(MeshError::Degenerate(EntityId::face(fi)));
            }
            face_edges.push(fe);
        }

        let mut edges = Vec::with_capacity(edge_vertices.len());
        for (ei, ev) in edge_vertices.iter().enumerate() {
            let d = vertices[ev[1]] - vertices[ev[0]];
            let length = d.norm();
            let scale = vertices[ev[0]].norm().max(vertices[ev[1]].norm()).max(1.0);
            if length <= DEGENERACY_TOLERANCE * scale {
                return Err(MeshError::Degenerate(EntityId::edge(ei)));
            }
            edges.push(Edge {
                vertices: *ev,
                length,
                tangent: d / length,
                midpoint: 0.5 * (vertices[ev[0]] + vertices[ev[1]]),
            });
        }

        let mut faces = Vec::with_capacity(pm.faces.len());
        for (fi, loop_) in pm.faces.iter().enumerate() {
            faces.push(build_face(fi, loop_, &face_edges[fi], &vertices, &edges)?);
        }

        let mut cells = Vec::with_capacity(pm.cells.len());
        for (ci, cf) in pm.cells.iter().enumerate() {
            for &f in cf {
                if f >= faces.len() {
                    return Err(MeshError::IndexOutOfRange { context: format!("cell {ci}"), index: f });
                }
            }
            cells.push(build_cell(ci, cf, &vertices, &faces)?);
        }

        for (ci, c) in cells.iter().enumerate() {
            for &f in &c.faces {
                faces[f].cells.push(ci);
            }
        }
        for (fi, f) in faces.iter().enumerate() {
            match f.cells.len() {
                1 => {}
                2 => {
                    let o = |c: usize| {
                        let cell = &cells[c];
                        let k = cell.faces.iter().position(|&g| g == fi).unwrap();
                        cell.face_orientations[k]
                    };
                    if o(f.cells[0]) == o(f.cells[1]) {
                        return Err(MeshError::InconsistentOrientation { face: fi });
                    }
                }
                count => return Err(MeshError::NonManifold { face: fi, count }),
            }
        }

        let h = cells.iter().map(|c| c.diameter).fold(0.0, f64::max);
        Ok(Mesh { vertices, edges, faces, cells, h })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// `(V, E, F, T)` entity counts.
    pub fn counts(&self) -> (usize, usize, usize, usize) {
        (self.num_vertices(), self.num_edges(), self.num_faces(), self.num_cells())
    }

    pub fn count(&self, kind: EntityKind) -> usize {
        match kind {
            EntityKind::Vertex => self.num_vertices(),
            EntityKind::Edge => self.num_edges(),
            EntityKind::Face => self.num_faces(),
            EntityKind::Cell => self.num_cells(),
        }
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }
    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn face(&self, i: usize) -> &Face {
        &self.faces[i]
    }
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    pub fn check(&self, id: EntityId) -> Result<(), MeshError> {
        if id.index < self.count(id.kind) {
            Ok(())
        } else {
            Err(MeshError::IndexOutOfRange { context: format!("{:?} id", id.kind), index: id.index })
        }
    }

    /// Relative orientation `omega_TF` (cell, face) or `omega_FE` (face, edge).
    pub fn orientation(&self, outer: EntityId, inner: EntityId) -> Result<f64, MeshError> {
        self.check(outer)?;
        self.check(inner)?;
        let (list, signs): (&[usize], &[f64]) = match (outer.kind, inner.kind) {
            (EntityKind::Cell, EntityKind::Face) => {
                let c = &self.cells[outer.index];
                (&c.faces, &c.face_orientations)
            }
            (EntityKind::Face, EntityKind::Edge) => {
                let f = &self.faces[outer.index];
                (&f.edges, &f.edge_orientations)
            }
            _ => return Err(MeshError::NoOrientation { outer, inner }),
        };
        list.iter()
            .position(|&i| i == inner.index)
            .map(|k| signs[k])
            .ok_or(MeshError::NotIncident { outer, inner })
    }

    pub fn measure(&self, id: EntityId) -> f64 {
        match id.kind {
            EntityKind::Vertex => 1.0,
            EntityKind::Edge => self.edges[id.index].length,
            EntityKind::Face => self.faces[id.index].area,
            EntityKind::Cell => self.cells[id.index].volume,
        }
    }

    pub fn centroid(&self, id: EntityId) -> Point {
        match id.kind {
            EntityKind::Vertex => self.vertices[id.index],
            EntityKind::Edge => self.edges[id.index].midpoint,
            EntityKind::Face => self.faces[id.index].centroid,
            EntityKind::Cell => self.cells[id.index].centroid,
        }
    }

    pub fn diameter(&self, id: EntityId) -> f64 {
        match id.kind {
            EntityKind::Vertex => 0.0,
            EntityKind::Edge => self.edges[id.index].length,
            EntityKind::Face => self.faces[id.index].diameter,
            EntityKind::Cell => self.cells[id.index].diameter,
        }
    }

    pub fn geometry_report(&self) -> GeometryReport {
        let mut entities = Vec::new();
        for kind in [EntityKind::Edge, EntityKind::Face, EntityKind::Cell] {
            for index in 0..self.count(kind) {
                let id = EntityId { kind, index };
                entities.push(EntityGeometry {
                    id,
                    measure: self.measure(id),
                    centroid: self.centroid(id),
                    diameter: self.diameter(id),
                });
            }
        }
        GeometryReport { entities, h: self.h }
    }

    /// Residual of the closed-surface identity `sum_F omega_TF |F| n_F` for a
    /// cell.
    pub fn closure_residual(&self, cell: usize) -> Point {
        let c = &self.cells[cell];
        c.faces
            .iter()
            .zip(&c.face_orientations)
            .map(|(&f, &o)| o * self.faces[f].area * self.faces[f].normal)
            .sum()
    }
}

fn build_face(
    fi: usize,
    loop_: &[usize],
    edge_ids: &[usize],
    vertices: &[Point],
    edges: &[Edge],
) -> Result<Face, MeshError> {
    let pts: Vec<Point> = loop_.iter().map(|&v| vertices[v]).collect();
    let m = pts.len();
    // Newell's area vector.
    let mut area_vec = Point::zeros();
    for i in 0..m {
        area_vec += pts[i].cross(&pts[(i + 1) % m]);
    }
    area_vec *= 0.5;
    let area = area_vec.norm();
    let diameter = diameter_of(pts.iter().copied());
    if area <= DEGENERACY_TOLERANCE * diameter * diameter {
        return Err(MeshError::Degenerate(EntityId::face(fi)));
    }
    let normal = area_vec / area;

    // Fan triangulation from the first vertex, signed along the normal.
    let mut centroid = Point::zeros();
    let mut total = 0.0;
    for i in 1..m - 1 {
        let a = 0.5 * (pts[i] - pts[0]).cross(&(pts[i + 1] - pts[0])).dot(&normal);
        centroid += a * (pts[0] + pts[i] + pts[i + 1]) / 3.0;
        total += a;
    }
    let centroid = centroid / total;

    let deviation = pts.iter().map(|p| (p - centroid).dot(&normal).abs()).fold(0.0, f64::max);
    if deviation > PLANARITY_TOLERANCE * diameter {
        return Err(MeshError::NonPlanar { face: fi, deviation, diameter });
    }

    let mut edge_orientations = Vec::with_capacity(m);
    let mut edge_normals = Vec::with_capacity(m);
    for i in 0..m {
        let e = &edges[edge_ids[i]];
        // Traversing the loop counter-clockwise along t_E means the outward
        // in-plane normal is -n_FE.
        let along = e.vertices[0] == loop_[i];
        edge_orientations.push(if along { -1.0 } else { 1.0 });
        edge_normals.push(normal.cross(&e.tangent));
    }

    Ok(Face {
        vertices: loop_.to_vec(),
        edges: edge_ids.to_vec(),
        edge_orientations,
        edge_normals,
        normal,
        area,
        centroid,
        diameter,
        cells: Vec::new(),
    })
}

fn build_cell(ci: usize, face_ids: &[usize], vertices: &[Point], faces: &[Face]) -> Result<Cell, MeshError> {
    if face_ids.len() < 4 {
        return Err(MeshError::Degenerate(EntityId::cell(ci)));
    }
    let mut vs: Vec<usize> = face_ids.iter().flat_map(|&f| faces[f].vertices.iter().copied()).collect();
    vs.sort_unstable();
    vs.dedup();
    let mut es_all: Vec<usize> = face_ids.iter().flat_map(|&f| faces[f].edges.iter().copied()).collect();
    es_all.sort_unstable();
    let mut es = es_all.clone();
    es.dedup();
    // Every edge of a closed cell boundary is shared by exactly two faces.
    for &e in &es {
        let count = es_all.iter().filter(|&&x| x == e).count();
        if count != 2 {
            return Err(MeshError::OpenCell { cell: ci, edge: e });
        }
    }

    let mean: Point = vs.iter().map(|&v| vertices[v]).sum::<Point>() / vs.len() as f64;
    let orient = |x_ref: &Point| -> Vec<f64> {
        face_ids
            .iter()
            .map(|&f| if faces[f].normal.dot(&(faces[f].centroid - x_ref)) > 0.0 { 1.0 } else { -1.0 })
            .collect()
    };
    let volume_centroid = |signs: &[f64]| -> (f64, Point) {
        let mut vol = 0.0;
        let mut c = Point::zeros();
        for (&f, &o) in face_ids.iter().zip(signs) {
            let face = &faces[f];
            let m = face.vertices.len();
            for i in 0..m {
                let a = vertices[face.vertices[i]];
                let b = vertices[face.vertices[(i + 1) % m]];
                let v = o * (a - face.centroid).cross(&(b - face.centroid)).dot(&(face.centroid - mean)) / 6.0;
                vol += v;
                c += v * (mean + face.centroid + a + b) / 4.0;
            }
        }
        (vol, c / vol)
    };

    let mut signs = orient(&mean);
    let (mut volume, mut centroid) = volume_centroid(&signs);
    let refined = orient(&centroid);
    if refined != signs {
        signs = refined;
        (volume, centroid) = volume_centroid(&signs);
    }
    let diameter = diameter_of(vs.iter().map(|&v| vertices[v]));
    if volume <= DEGENERACY_TOLERANCE * diameter.powi(3) {
        return Err(MeshError::Degenerate(EntityId::cell(ci)));
    }

    let closure: Point = face_ids.iter().zip(&signs).map(|(&f, &o)| o * faces[f].area * faces[f].normal).sum();
    let scale: f64 = face_ids.iter().map(|&f| faces[f].area).sum();
    if closure.norm() > CLOSURE_TOLERANCE * scale {
        return Err(MeshError::NotClosed { cell: ci, residual: closure.norm() });
    }

    Ok(Cell {
        faces: face_ids.to_vec(),
        face_orientations: signs,
        edges: es,
        vertices: vs,
        volume,
        centroid,
        diameter,
    })
}

impl Polymesh {
    /// Description of the uniform `n x n x n` cube partition of `(0,1)^3`.
    pub fn cubic(n: usize) -> Polymesh {
        assert!(n >= 1, "cubic mesh needs n >= 1");
        let np = n + 1;
        let vid = |i: usize, j: usize, k: usize| i + np * (j + np * k);
        let s = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity(np * np * np);
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    vertices.push([i as f64 * s, j as f64 * s, k as f64 * s]);
                }
            }
        }
        let mut faces = Vec::new();
        // Faces orthogonal to x at x = i, indexed (i, j, k) for j, k < n.
        let fx0 = faces.len();
        for k in 0..n {
            for j in 0..n {
                for i in 0..np {
                    faces.push(vec![vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)]);
                }
            }
        }
        let fx = |i: usize, j: usize, k: usize| fx0 + i + np * (j + n * k);
        let fy0 = faces.len();
        for k in 0..n {
            for j in 0..np {
                for i in 0..n {
                    faces.push(vec![vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)]);
                }
            }
        }
        let fy = |i: usize, j: usize, k: usize| fy0 + i + n * (j + np * k);
        let fz0 = faces.len();
        for k in 0..np {
            for j in 0..n {
                for i in 0..n {
                    faces.push(vec![vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)]);
                }
            }
        }
        let fz = |i: usize, j: usize, k: usize| fz0 + i + n * (j + n * k);
        let mut cells = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![fx(i, j, k), fx(i + 1, j, k), fy(i, j, k), fy(i, j + 1, k), fz(i, j, k), fz(i, j, k + 1)]);
                }
            }
        }
        Polymesh { vertices, faces, cells }
    }
}
