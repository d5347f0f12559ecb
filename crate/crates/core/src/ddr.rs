//! Scalar lowest-order DDR complex: spaces, interpolators, discrete
//! operators, potential reconstructions and stabilised inner products.
//!
//! Degrees of freedom are one value per vertex (`X_grad`), per edge
//! (`X_curl`) and per face (`X_div`). Local reconstructions are expressed as
//! dense matrices acting on the dofs of a face or cell in local numbering:
//! face-local dofs follow the face vertex loop (vertex `i`, then edge `i`
//! from vertex `i` to `i + 1`), cell-local dofs follow the sorted global
//! vertex and edge lists of the cell and the face order of the cell.

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use thiserror::Error;

use crate::mesh::{EntityId, Mesh, Point};
use crate::polyquad::{cell_rule, face_frame, face_rule, gauss_legendre, MonomialBasis, QuadratureRule};
use crate::solver::CsrMatrix;

pub type XGradVector = Vec<f64>;
pub type XCurlVector = Vec<f64>;
pub type XDivVector = Vec<f64>;

/// Quadrature degree used to interpolate non-polynomial fields.
pub const INTERPOLATION_DEGREE: usize = 8;

#[derive(Debug, Error)]
pub enum DdrError {
    #[error("singular local system for {0}")]
    SingularLocalSystem(EntityId),
    #[error("{space} vector has length {found}, expected {expected}")]
    Size { space: &'static str, expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Grad,
    Curl,
    Div,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Grad => "grad",
            Space::Curl => "curl",
            Space::Div => "div",
        }
    }
}

/// Face reconstructions in face-local numbering.
#[derive(Debug, Clone)]
pub struct FaceOperators {
    pub frame: [Point; 2],
    pub basis: MonomialBasis,
    /// `G_F`: 3 x (face vertices).
    pub gradient: DMatrix<f64>,
    /// `gamma_F`: coefficients in `{1, xi_1, xi_2}`, 3 x (face vertices).
    pub trace: DMatrix<f64>,
    /// `C_F`: one row over the face edges.
    pub curl: DVector<f64>,
    /// `gamma_t,F`: 3 x (face edges), tangent to the face.
    pub tangential_trace: DMatrix<f64>,
}

/// Element reconstructions, stabilisations and local Gram blocks of a cell.
#[derive(Debug, Clone)]
pub struct CellOperatorCache {
    pub cell: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub faces: Vec<usize>,
    pub basis: MonomialBasis,
    /// For each face of the cell, the cell-local index of each face vertex.
    pub face_vertex_map: Vec<Vec<usize>>,
    /// For each face of the cell, the cell-local index of each face edge.
    pub face_edge_map: Vec<Vec<usize>>,
    /// `G_T`: 3 x nv.
    pub gradient: DMatrix<f64>,
    /// `P_grad`: coefficients in `{1, psi_1, psi_2, psi_3}`, 4 x nv.
    pub potential_grad: DMatrix<f64>,
    /// Face traces `gamma_F` mapped to cell-local vertices, 3 x nv each.
    pub face_traces: Vec<DMatrix<f64>>,
    /// Tangential traces mapped to cell-local edges, 3 x ne each.
    pub face_tangential_traces: Vec<DMatrix<f64>>,
    /// `C_T`: 3 x ne.
    pub curl: DMatrix<f64>,
    /// `P_curl`: 3 x ne.
    pub potential_curl: DMatrix<f64>,
    /// `D_T`: one row over the cell faces.
    pub divergence: DVector<f64>,
    /// `P_div`: 3 x nf.
    pub potential_div: DMatrix<f64>,
    pub stabilisation_grad: DMatrix<f64>,
    pub stabilisation_curl: DMatrix<f64>,
    pub stabilisation_div: DMatrix<f64>,
    pub gram_grad: DMatrix<f64>,
    pub gram_curl: DMatrix<f64>,
    pub gram_div: DMatrix<f64>,
}

impl CellOperatorCache {
    pub fn local_vertex_dofs(&self, q: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.vertices.len(), self.vertices.iter().map(|&v| q[v]))
    }

    pub fn local_edge_dofs(&self, v: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.edges.len(), self.edges.iter().map(|&e| v[e]))
    }

    pub fn local_face_dofs(&self, w: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.faces.len(), self.faces.iter().map(|&f| w[f]))
    }

    /// Value of `P_grad q` at `x` for cell-local dofs `q`.
    pub fn eval_potential_grad(&self, q_local: &DVector<f64>, x: &Point) -> f64 {
        let coeffs = &self.potential_grad * q_local;
        self.basis.evaluate(x).iter().zip(coeffs.iter()).map(|(b, c)| b * c).sum()
    }
}

/// Edge Gauss rule with two points: `(parameter, weight)` pairs on `[0, 1]`
/// with weights summing to one, exact for cubics.
fn edge_points() -> Vec<(f64, f64)> {
    let (u, w) = gauss_legendre(2);
    u.into_iter().zip(w).collect()
}

fn solve_small(m: DMatrix<f64>, rhs: DMatrix<f64>, id: EntityId) -> Result<DMatrix<f64>, DdrError> {
    m.lu().solve(&rhs).ok_or(DdrError::SingularLocalSystem(id))
}

pub fn build_face_operators(mesh: &Mesh, f: usize) -> Result<FaceOperators, DdrError> {
    let face = mesh.face(f);
    let id = EntityId::face(f);
    let m = face.vertices.len();
    let area = face.area;
    let xf = face.centroid;
    let frame = face_frame(mesh, f);
    let basis = MonomialBasis::new(mesh, id, 1);
    let hf = basis.scale;
    let pts: Vec<Point> = face.vertices.iter().map(|&v| *mesh.vertex(v)).collect();
    let gp = edge_points();

    // G_F: 3 x m.
    let mut gradient = DMatrix::zeros(3, m);
    for i in 0..m {
        let j = (i + 1) % m;
        let len = mesh.edge(face.edges[i]).length;
        let w = face.edge_orientations[i] * len * 0.5 / area;
        for r in 0..3 {
            gradient[(r, i)] += w * face.edge_normals[i][r];
            gradient[(r, j)] += w * face.edge_normals[i][r];
        }
    }

    // Trace: tests v_r = (x - x_F) b_r with div_F v_r = {2, 3 xi_1, 3 xi_2}.
    let q = face_rule(mesh, f, 3);
    let div_factor = [2.0, 3.0, 3.0];
    let mut mat = DMatrix::zeros(3, 3);
    let mut int_v = [Point::zeros(); 3];
    for (x, w) in q.nodes.iter().zip(&q.weights) {
        let b = basis.evaluate(x);
        for r in 0..3 {
            for c in 0..3 {
                mat[(r, c)] += w * b[c] * div_factor[r] * b[r];
            }
            int_v[r] += *w * b[r] * (x - xf);
        }
    }
    let mut rhs = DMatrix::zeros(3, m);
    for r in 0..3 {
        let g = int_v[r].transpose() * &gradient;
        for c in 0..m {
            rhs[(r, c)] -= g[c];
        }
    }
    for i in 0..m {
        let j = (i + 1) % m;
        let len = mesh.edge(face.edges[i]).length;
        let o = face.edge_orientations[i];
        let n = face.edge_normals[i];
        for &(s, w) in &gp {
            let x = pts[i] + s * (pts[j] - pts[i]);
            let b = basis.evaluate(&x);
            for r in 0..3 {
                let val = o * w * len * b[r] * (x - xf).dot(&n);
                rhs[(r, i)] += val * (1.0 - s);
                rhs[(r, j)] += val * s;
            }
        }
    }
    let trace = solve_small(mat, rhs, id)?;

    // C_F.
    let curl = DVector::from_iterator(
        m,
        (0..m).map(|i| -face.edge_orientations[i] * mesh.edge(face.edges[i]).length / area),
    );

    // Tangential trace: tests r_a = xi_a - mean(xi_a), rot_F r_a = (grad r_a) x n_F.
    let mean: Vec<f64> = (0..2).map(|a| q.integrate(|x| basis.evaluate(x)[a + 1]) / area).collect();
    let rot: Vec<Point> = (0..2).map(|a| (frame[a] / hf).cross(&face.normal)).collect();
    let mut mat = DMatrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            mat[(a, b)] = frame[b].dot(&rot[a]);
        }
    }
    let int_r: Vec<f64> = (0..2).map(|a| q.integrate(|x| basis.evaluate(x)[a + 1] - mean[a])).collect();
    let mut rhs = DMatrix::zeros(2, m);
    for a in 0..2 {
        for i in 0..m {
            let j = (i + 1) % m;
            let len = mesh.edge(face.edges[i]).length;
            let int_e: f64 = gp
                .iter()
                .map(|&(s, w)| w * len * (basis.evaluate(&(pts[i] + s * (pts[j] - pts[i])))[a + 1] - mean[a]))
                .sum();
            rhs[(a, i)] = (curl[i] * int_r[a] + face.edge_orientations[i] * int_e) / area;
        }
    }
    let coeffs = solve_small(mat, rhs, id)?;
    let mut tangential_trace = DMatrix::zeros(3, m);
    for i in 0..m {
        let t = coeffs[(0, i)] * frame[0] + coeffs[(1, i)] * frame[1];
        tangential_trace.set_column(i, &t);
    }

    Ok(FaceOperators { frame, basis, gradient, trace, curl, tangential_trace })
}

fn add_row<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<f64, R, C>>(
    m: &mut DMatrix<f64>,
    r: usize,
    s: f64,
    row: &nalgebra::Matrix<f64, R, C, S>,
) {
    for (c, v) in row.iter().enumerate() {
        m[(r, c)] += s * v;
    }
}

fn local_index(list: &[usize], global: usize) -> usize {
    list.binary_search(&global).expect("entity belongs to the cell")
}

fn cross_matrix(n: &Point) -> Matrix3<f64> {
    Matrix3::new(0.0, -n.z, n.y, n.z, 0.0, -n.x, -n.y, n.x, 0.0)
}

pub fn build_cell_cache(mesh: &Mesh, t: usize, face_ops: &[FaceOperators]) -> Result<CellOperatorCache, DdrError> {
    let cell = mesh.cell(t);
    let id = EntityId::cell(t);
    let vol = cell.volume;
    let xt = cell.centroid;
    let basis = MonomialBasis::new(mesh, id, 1);
    let ht = basis.scale;
    let nv = cell.vertices.len();
    let ne = cell.edges.len();
    let nf = cell.faces.len();

    let face_vertex_map: Vec<Vec<usize>> = cell
        .faces
        .iter()
        .map(|&f| mesh.face(f).vertices.iter().map(|&v| local_index(&cell.vertices, v)).collect())
        .collect();
    let face_edge_map: Vec<Vec<usize>> = cell
        .faces
        .iter()
        .map(|&f| mesh.face(f).edges.iter().map(|&e| local_index(&cell.edges, e)).collect())
        .collect();

    let mut face_traces = Vec::with_capacity(nf);
    let mut face_tangential_traces = Vec::with_capacity(nf);
    for (k, &f) in cell.faces.iter().enumerate() {
        let ops = &face_ops[f];
        let mut tr = DMatrix::zeros(3, nv);
        for (i, &lv) in face_vertex_map[k].iter().enumerate() {
            for r in 0..3 {
                tr[(r, lv)] += ops.trace[(r, i)];
            }
        }
        face_traces.push(tr);
        let mut gt = DMatrix::zeros(3, ne);
        for (i, &le) in face_edge_map[k].iter().enumerate() {
            for r in 0..3 {
                gt[(r, le)] += ops.tangential_trace[(r, i)];
            }
        }
        face_tangential_traces.push(gt);
    }

    let face_rules: Vec<QuadratureRule> = cell.faces.iter().map(|&f| face_rule(mesh, f, 3)).collect();
    let cell_q = cell_rule(mesh, t, 2);

    // G_T.
    let mut gradient = DMatrix::zeros(3, nv);
    for (k, &f) in cell.faces.iter().enumerate() {
        let face = mesh.face(f);
        let o = cell.face_orientations[k];
        let ops = &face_ops[f];
        let int_b: Vec<f64> = (0..3).map(|c| face_rules[k].integrate(|x| ops.basis.evaluate(x)[c])).collect();
        let int_tr = DMatrix::from_row_slice(1, 3, &int_b) * &face_traces[k];
        gradient += (o / vol) * face.normal * int_tr;
    }

    // P_grad: tests v_r = (x - x_T) c_r with div v_r = {3, 4 psi_a}.
    let div_factor = [3.0, 4.0, 4.0, 4.0];
    let mut mat = DMatrix::zeros(4, 4);
    let mut int_v = [Point::zeros(); 4];
    for (x, w) in cell_q.nodes.iter().zip(&cell_q.weights) {
        let c = basis.evaluate(x);
        for r in 0..4 {
            for j in 0..4 {
                mat[(r, j)] += w * c[j] * div_factor[r] * c[r];
            }
            int_v[r] += *w * c[r] * (x - xt);
        }
    }
    let mut rhs = DMatrix::zeros(4, nv);
    for r in 0..4 {
        add_row(&mut rhs, r, -1.0, &(int_v[r].transpose() * &gradient));
    }
    for (k, &f) in cell.faces.iter().enumerate() {
        let face = mesh.face(f);
        let o = cell.face_orientations[k];
        let ops = &face_ops[f];
        for (x, w) in face_rules[k].nodes.iter().zip(&face_rules[k].weights) {
            let b = DMatrix::from_row_slice(1, 3, &ops.basis.evaluate(x));
            let tr_row = &b * &face_traces[k];
            let c = basis.evaluate(x);
            let vn = (x - xt).dot(&face.normal);
            for r in 0..4 {
                add_row(&mut rhs, r, o * w * c[r] * vn, &tr_row);
            }
        }
    }
    let potential_grad = solve_small(mat, rhs, id)?;

    // C_T = (1/|T|) sum_F omega_TF |F| n_F x gamma_t,F.
    let mut curl = DMatrix::zeros(3, ne);
    for (k, &f) in cell.faces.iter().enumerate() {
        let face = mesh.face(f);
        let o = cell.face_orientations[k];
        curl += (o * face.area / vol) * cross_matrix(&face.normal) * &face_tangential_traces[k];
    }

    // P_curl: tests w_b = (x - x_T)/h_T x e_b, curl w_b = -2 e_b / h_T.
    let unit = [Point::x(), Point::y(), Point::z()];
    let mut mat = DMatrix::zeros(3, 3);
    let mut rhs = DMatrix::zeros(3, ne);
    let q1 = cell_rule(mesh, t, 1);
    for b in 0..3 {
        let curl_w = -2.0 * unit[b] / ht;
        for a in 0..3 {
            mat[(b, a)] = curl_w[a];
        }
        let int_w = q1.integrate_vector(|x| ((x - xt) / ht).cross(&unit[b]));
        add_row(&mut rhs, b, 1.0 / vol, &(int_w.transpose() * &curl));
        for (k, &f) in cell.faces.iter().enumerate() {
            let face = mesh.face(f);
            let o = cell.face_orientations[k];
            let fq = face_rule(mesh, f, 1);
            let int_wn = fq.integrate_vector(|x| ((x - xt) / ht).cross(&unit[b]).cross(&face.normal));
            add_row(&mut rhs, b, -o / vol, &(int_wn.transpose() * &face_tangential_traces[k]));
        }
    }
    let potential_curl = solve_small(mat, rhs, id)?;

    // D_T and P_div: tests r_a = psi_a - mean(psi_a), grad r_a = e_a / h_T.
    let divergence = DVector::from_iterator(
        nf,
        cell.faces.iter().zip(&cell.face_orientations).map(|(&f, &o)| o * mesh.face(f).area / vol),
    );
    let mean: Vec<f64> = (0..3).map(|a| q1.integrate(|x| basis.evaluate(x)[a + 1]) / vol).collect();
    let mut mat = DMatrix::zeros(3, 3);
    let mut rhs = DMatrix::zeros(3, nf);
    for a in 0..3 {
        mat[(a, a)] = 1.0 / ht;
        let int_r = q1.integrate(|x| basis.evaluate(x)[a + 1] - mean[a]);
        for k in 0..nf {
            rhs[(a, k)] -= divergence[k] * int_r / vol;
            let fq = face_rule(mesh, cell.faces[k], 1);
            let int_f = fq.integrate(|x| basis.evaluate(x)[a + 1] - mean[a]);
            rhs[(a, k)] += cell.face_orientations[k] * int_f / vol;
        }
    }
    let potential_div = solve_small(mat, rhs, id)?;

    // Stabilisations.
    let mut stabilisation_grad = DMatrix::zeros(nv, nv);
    for (k, &f) in cell.faces.iter().enumerate() {
        let ops = &face_ops[f];
        let hf = mesh.face(f).diameter;
        for (x, w) in face_rules[k].nodes.iter().zip(&face_rules[k].weights) {
            let c = DMatrix::from_row_slice(1, 4, &basis.evaluate(x));
            let b = DMatrix::from_row_slice(1, 3, &ops.basis.evaluate(x));
            let row = &c * &potential_grad - &b * &face_traces[k];
            stabilisation_grad += (hf * w) * row.transpose() * &row;
        }
    }
    let gp = edge_points();
    for (le, &e) in cell.edges.iter().enumerate() {
        let edge = mesh.edge(e);
        let (a, b) = (edge.vertices[0], edge.vertices[1]);
        let (la, lb) = (local_index(&cell.vertices, a), local_index(&cell.vertices, b));
        let _ = le;
        for &(s, w) in &gp {
            let x = mesh.vertex(a) + s * (mesh.vertex(b) - mesh.vertex(a));
            let c = DMatrix::from_row_slice(1, 4, &basis.evaluate(&x));
            let mut row = &c * &potential_grad;
            row[(0, la)] -= 1.0 - s;
            row[(0, lb)] -= s;
            stabilisation_grad += (edge.length.powi(2) * w * edge.length) * row.transpose() * &row;
        }
    }

    let mut stabilisation_curl = DMatrix::zeros(ne, ne);
    for (k, &f) in cell.faces.iter().enumerate() {
        let face = mesh.face(f);
        let proj = Matrix3::identity() - face.normal * face.normal.transpose();
        let r = proj * &potential_curl - &face_tangential_traces[k];
        stabilisation_curl += (face.diameter * face.area) * r.transpose() * &r;
    }
    for (le, &e) in cell.edges.iter().enumerate() {
        let edge = mesh.edge(e);
        let mut row = edge.tangent.transpose() * &potential_curl;
        row[(0, le)] -= 1.0;
        stabilisation_curl += (edge.length.powi(3)) * row.transpose() * &row;
    }

    let mut stabilisation_div = DMatrix::zeros(nf, nf);
    for (k, &f) in cell.faces.iter().enumerate() {
        let face = mesh.face(f);
        let mut row = face.normal.transpose() * &potential_div;
        row[(0, k)] -= 1.0;
        stabilisation_div += (face.diameter * face.area) * row.transpose() * &row;
    }

    let mut mass = DMatrix::zeros(4, 4);
    for (x, w) in cell_q.nodes.iter().zip(&cell_q.weights) {
        let c = DVector::from_vec(basis.evaluate(x));
        mass += *w * &c * c.transpose();
    }
    let symmetrise = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
    let gram_grad = symmetrise(potential_grad.transpose() * mass * &potential_grad + &stabilisation_grad);
    let gram_curl = symmetrise(vol * potential_curl.transpose() * &potential_curl + &stabilisation_curl);
    let gram_div = symmetrise(vol * potential_div.transpose() * &potential_div + &stabilisation_div);

    Ok(CellOperatorCache {
        cell: t,
        vertices: cell.vertices.clone(),
        edges: cell.edges.clone(),
        faces: cell.faces.clone(),
        basis,
        face_vertex_map,
        face_edge_map,
        gradient,
        potential_grad,
        face_traces,
        face_tangential_traces,
        curl,
        potential_curl,
        divergence,
        potential_div,
        stabilisation_grad,
        stabilisation_curl,
        stabilisation_div,
        gram_grad,
        gram_curl,
        gram_div,
    })
}

/// The assembled complex on a mesh.
#[derive(Debug, Clone)]
pub struct DdrComplex {
    mesh: Mesh,
    face_ops: Vec<FaceOperators>,
    cells: Vec<CellOperatorCache>,
    gradient: CsrMatrix,
    curl: CsrMatrix,
    divergence: CsrMatrix,
    gram_grad: CsrMatrix,
    gram_curl: CsrMatrix,
    gram_div: CsrMatrix,
}

fn assemble(n: usize, blocks: impl Iterator<Item = (Vec<usize>, DMatrix<f64>)>) -> CsrMatrix {
    let mut t = Vec::new();
    for (dofs, m) in blocks {
        for (i, &gi) in dofs.iter().enumerate() {
            for (j, &gj) in dofs.iter().enumerate() {
                t.push((gi, gj, m[(i, j)]));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &t)
}

impl DdrComplex {
    pub fn new(mesh: Mesh) -> Result<Self, DdrError> {
        let face_ops: Vec<FaceOperators> =
            (0..mesh.num_faces()).into_par_iter().map(|f| build_face_operators(&mesh, f)).collect::<Result<_, _>>()?;
        let cells: Vec<CellOperatorCache> = (0..mesh.num_cells())
            .into_par_iter()
            .map(|t| build_cell_cache(&mesh, t, &face_ops))
            .collect::<Result<_, _>>()?;

        let mut t = Vec::new();
        for (i, e) in mesh.edges().iter().enumerate() {
            t.push((i, e.vertices[0], -1.0 / e.length));
            t.push((i, e.vertices[1], 1.0 / e.length));
        }
        let gradient = CsrMatrix::from_triplets(mesh.num_edges(), mesh.num_vertices(), &t);
        let mut t = Vec::new();
        for (f, ops) in face_ops.iter().enumerate() {
            for (k, &e) in mesh.face(f).edges.iter().enumerate() {
                t.push((f, e, ops.curl[k]));
            }
        }
        let curl = CsrMatrix::from_triplets(mesh.num_faces(), mesh.num_edges(), &t);
        let mut t = Vec::new();
        for c in &cells {
            for (k, &f) in c.faces.iter().enumerate() {
                t.push((c.cell, f, c.divergence[k]));
            }
        }
        let divergence = CsrMatrix::from_triplets(mesh.num_cells(), mesh.num_faces(), &t);

        let gram_grad = assemble(mesh.num_vertices(), cells.iter().map(|c| (c.vertices.clone(), c.gram_grad.clone())));
        let gram_curl = assemble(mesh.num_edges(), cells.iter().map(|c| (c.edges.clone(), c.gram_curl.clone())));
        let gram_div = assemble(mesh.num_faces(), cells.iter().map(|c| (c.faces.clone(), c.gram_div.clone())));

        Ok(DdrComplex { mesh, face_ops, cells, gradient, curl, divergence, gram_grad, gram_curl, gram_div })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn face_operators(&self, f: usize) -> &FaceOperators {
        &self.face_ops[f]
    }

    pub fn cell_cache(&self, t: usize) -> &CellOperatorCache {
        &self.cells[t]
    }

    pub fn cell_caches(&self) -> &[CellOperatorCache] {
        &self.cells
    }

    pub fn dimension(&self, space: Space) -> usize {
        match space {
            Space::Grad => self.mesh.num_vertices(),
            Space::Curl => self.mesh.num_edges(),
            Space::Div => self.mesh.num_faces(),
        }
    }

    fn check(&self, space: Space, v: &[f64]) -> Result<(), DdrError> {
        let expected = self.dimension(space);
        if v.len() == expected {
            Ok(())
        } else {
            Err(DdrError::Size { space: space.name(), expected, found: v.len() })
        }
    }

    /// Sparse matrix of the discrete gradient (edges x vertices).
    pub fn gradient_matrix(&self) -> &CsrMatrix {
        &self.gradient
    }

    /// Sparse matrix of the discrete curl (faces x edges).
    pub fn curl_matrix(&self) -> &CsrMatrix {
        &self.curl
    }

    /// Sparse matrix of the discrete divergence (cells x faces).
    pub fn divergence_matrix(&self) -> &CsrMatrix {
        &self.divergence
    }

    pub fn discrete_gradient(&self, q: &[f64]) -> Result<XCurlVector, DdrError> {
        self.check(Space::Grad, q)?;
        Ok(self.gradient.mul_vec(q))
    }

    pub fn discrete_curl(&self, v: &[f64]) -> Result<XDivVector, DdrError> {
        self.check(Space::Curl, v)?;
        Ok(self.curl.mul_vec(v))
    }

    pub fn discrete_divergence(&self, w: &[f64]) -> Result<Vec<f64>, DdrError> {
        self.check(Space::Div, w)?;
        Ok(self.divergence.mul_vec(w))
    }

    pub fn gram(&self, space: Space) -> &CsrMatrix {
        match space {
            Space::Grad => &self.gram_grad,
            Space::Curl => &self.gram_curl,
            Space::Div => &self.gram_div,
        }
    }

    /// `(mu, zeta)_{space,h}`.
    pub fn inner(&self, space: Space, mu: &[f64], zeta: &[f64]) -> Result<f64, DdrError> {
        self.check(space, mu)?;
        self.check(space, zeta)?;
        Ok(self.gram(space).mul_vec(zeta).iter().zip(mu).map(|(a, b)| a * b).sum())
    }

    pub fn interpolate_grad(&self, f: impl Fn(&Point) -> f64) -> XGradVector {
        interpolate_grad(&self.mesh, f)
    }

    pub fn interpolate_curl(&self, v: impl Fn(&Point) -> Point + Sync) -> XCurlVector {
        interpolate_curl(&self.mesh, v)
    }

    pub fn interpolate_div(&self, w: impl Fn(&Point) -> Point + Sync) -> XDivVector {
        interpolate_div(&self.mesh, w)
    }

    /// Sparse `(rows, cols)` maps used by the Lie-algebra layer:
    /// `Gamma_a[F, E] = tau_a . gamma_t,F` for `a = 1, 2`.
    pub fn tangential_trace_components(&self) -> [CsrMatrix; 2] {
        let mut t = [Vec::new(), Vec::new()];
        for (f, ops) in self.face_ops.iter().enumerate() {
            for (k, &e) in self.mesh.face(f).edges.iter().enumerate() {
                let g = Point::from_iterator(ops.tangential_trace.column(k).iter().copied());
                for a in 0..2 {
                    t[a].push((f, e, ops.frame[a].dot(&g)));
                }
            }
        }
        let (nf, ne) = (self.mesh.num_faces(), self.mesh.num_edges());
        [CsrMatrix::from_triplets(nf, ne, &t[0]), CsrMatrix::from_triplets(nf, ne, &t[1])]
    }

    /// Global `P_curl` as a sparse `(3 T) x E` matrix, row `3 t + mu`.
    pub fn potential_curl_matrix(&self) -> CsrMatrix {
        let mut t = Vec::new();
        for c in &self.cells {
            for mu in 0..3 {
                for (le, &e) in c.edges.iter().enumerate() {
                    t.push((3 * c.cell + mu, e, c.potential_curl[(mu, le)]));
                }
            }
        }
        CsrMatrix::from_triplets(3 * self.mesh.num_cells(), self.mesh.num_edges(), &t)
    }

    /// Cell means of `P_grad` as a sparse `T x V` matrix.
    pub fn potential_grad_mean_matrix(&self) -> CsrMatrix {
        let mut t = Vec::new();
        for c in &self.cells {
            // The scaled monomials psi_a have zero mean about the centroid.
            for (lv, &v) in c.vertices.iter().enumerate() {
                t.push((c.cell, v, c.potential_grad[(0, lv)]));
            }
        }
        CsrMatrix::from_triplets(self.mesh.num_cells(), self.mesh.num_vertices(), &t)
    }
}

pub fn interpolate_grad(mesh: &Mesh, f: impl Fn(&Point) -> f64) -> XGradVector {
    mesh.vertices().iter().map(f).collect()
}

pub fn interpolate_curl(mesh: &Mesh, v: impl Fn(&Point) -> Point + Sync) -> XCurlVector {
    let (u, w) = gauss_legendre(INTERPOLATION_DEGREE / 2 + 1);
    mesh.edges()
        .par_iter()
        .map(|e| {
            let a = mesh.vertex(e.vertices[0]);
            let b = mesh.vertex(e.vertices[1]);
            u.iter().zip(&w).map(|(&s, &wi)| wi * v(&(a + s * (b - a))).dot(&e.tangent)).sum()
        })
        .collect()
}

pub fn interpolate_div(mesh: &Mesh, w: impl Fn(&Point) -> Point + Sync) -> XDivVector {
    (0..mesh.num_faces())
        .into_par_iter()
        .map(|f| {
            let face = mesh.face(f);
            face_rule(mesh, f, INTERPOLATION_DEGREE).integrate(|x| w(x).dot(&face.normal)) / face.area
        })
        .collect()
}
