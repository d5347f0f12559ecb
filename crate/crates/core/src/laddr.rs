//! Lie-algebra-valued DDR spaces: tensorised dof vectors, lifted operators,
//! inner products and the two discrete brackets used by the Yang-Mills
//! schemes.
//!
//! Storage is entity-major: the coefficient of algebra basis vector `I` on
//! entity `i` sits at index `i * dim + I`. A scalar operator `A` acts as
//! `A (x) Id`, and inner products use `M (x) g` with `g` the algebra metric.

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::ddr::{DdrComplex, DdrError, Space, INTERPOLATION_DEGREE};
use crate::lie::LieAlgebra;
use crate::mesh::{Mesh, Point};
use crate::polyquad::{face_rule, gauss_legendre};
use crate::solver::CsrMatrix;

#[derive(Debug, Error)]
pub enum LaddrError {
    #[error("{space} vector has length {found}, expected {expected}")]
    Size { space: &'static str, expected: usize, found: usize },
    #[error("expected a {expected} vector, got a {found} vector")]
    SpaceMismatch { expected: &'static str, found: &'static str },
    #[error(transparent)]
    Ddr(#[from] DdrError),
}

/// A Lie-algebra-valued dof vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LaDofVector {
    pub space: Space,
    pub dim: usize,
    pub values: Vec<f64>,
}

impl LaDofVector {
    pub fn zeros(space: Space, entities: usize, dim: usize) -> Self {
        LaDofVector { space, dim, values: vec![0.0; entities * dim] }
    }

    pub fn new(space: Space, dim: usize, values: Vec<f64>) -> Self {
        LaDofVector { space, dim, values }
    }

    /// Builds `sum_I v^I (x) e_I` from scalar component vectors.
    pub fn from_components(space: Space, components: &[Vec<f64>]) -> Self {
        let dim = components.len();
        let n = components.first().map_or(0, Vec::len);
        let mut values = vec![0.0; n * dim];
        for (i, c) in components.iter().enumerate() {
            for (e, v) in c.iter().enumerate() {
                values[e * dim + i] = *v;
            }
        }
        LaDofVector { space, dim, values }
    }

    pub fn num_entities(&self) -> usize {
        self.values.len() / self.dim.max(1)
    }

    pub fn entity(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Scalar dof vector of algebra component `i`.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.iter().skip(i).step_by(self.dim).copied().collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `A (x) Id_dim` in entity-major ordering.
pub fn lift(op: &CsrMatrix, dim: usize) -> CsrMatrix {
    op.kron_identity(dim)
}

/// The lifted complex together with the global maps needed by the brackets.
#[derive(Debug, Clone)]
pub struct LaddrComplex {
    ddr: DdrComplex,
    algebra: LieAlgebra,
    gradient: CsrMatrix,
    curl: CsrMatrix,
    divergence: CsrMatrix,
    gram_grad: CsrMatrix,
    gram_curl: CsrMatrix,
    gram_div: CsrMatrix,
    /// Lifted tangential-trace components on faces.
    gamma: [CsrMatrix; 2],
    gamma_scalar: [CsrMatrix; 2],
    /// Lifted `P_curl`, rows `(3 t + mu) * dim + I`.
    potential_curl: CsrMatrix,
    /// Lifted cell means of `P_grad`.
    potential_grad_mean: CsrMatrix,
    volumes: Vec<f64>,
}

impl LaddrComplex {
    pub fn new(ddr: DdrComplex, algebra: LieAlgebra) -> Self {
        let d = algebra.dim();
        let g = algebra.metric().clone();
        let [g1, g2] = ddr.tangential_trace_components();
        LaddrComplex {
            gradient: lift(ddr.gradient_matrix(), d),
            curl: lift(ddr.curl_matrix(), d),
            divergence: lift(ddr.divergence_matrix(), d),
            gram_grad: ddr.gram(Space::Grad).kron(&g),
            gram_curl: ddr.gram(Space::Curl).kron(&g),
            gram_div: ddr.gram(Space::Div).kron(&g),
            gamma: [lift(&g1, d), lift(&g2, d)],
            gamma_scalar: [g1, g2],
            potential_curl: lift(&ddr.potential_curl_matrix(), d),
            potential_grad_mean: lift(&ddr.potential_grad_mean_matrix(), d),
            volumes: ddr.mesh().cells().iter().map(|c| c.volume).collect(),
            ddr,
            algebra,
        }
    }

    pub fn ddr(&self) -> &DdrComplex {
        &self.ddr
    }

    pub fn mesh(&self) -> &Mesh {
        self.ddr.mesh()
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Number of reals in a vector of the given space.
    pub fn len(&self, space: Space) -> usize {
        self.ddr.dimension(space) * self.dim()
    }

    pub fn zeros(&self, space: Space) -> LaDofVector {
        LaDofVector::zeros(space, self.ddr.dimension(space), self.dim())
    }

    pub fn check(&self, space: Space, v: &LaDofVector) -> Result<(), LaddrError> {
        if v.space != space {
            return Err(LaddrError::SpaceMismatch { expected: space.name(), found: v.space.name() });
        }
        let expected = self.len(space);
        if v.values.len() != expected || v.dim != self.dim() {
            return Err(LaddrError::Size { space: space.name(), expected, found: v.values.len() });
        }
        Ok(())
    }

    pub fn gradient_matrix(&self) -> &CsrMatrix {
        &self.gradient
    }

    pub fn curl_matrix(&self) -> &CsrMatrix {
        &self.curl
    }

    pub fn divergence_matrix(&self) -> &CsrMatrix {
        &self.divergence
    }

    /// `M_space (x) g`.
    pub fn gram(&self, space: Space) -> &CsrMatrix {
        match space {
            Space::Grad => &self.gram_grad,
            Space::Curl => &self.gram_curl,
            Space::Div => &self.gram_div,
        }
    }

    pub fn gradient(&self, q: &LaDofVector) -> Result<LaDofVector, LaddrError> {
        self.check(Space::Grad, q)?;
        Ok(LaDofVector::new(Space::Curl, self.dim(), self.gradient.mul_vec(&q.values)))
    }

    pub fn curl(&self, v: &LaDofVector) -> Result<LaDofVector, LaddrError> {
        self.check(Space::Curl, v)?;
        Ok(LaDofVector::new(Space::Div, self.dim(), self.curl.mul_vec(&v.values)))
    }

    /// Lifted divergence: one algebra element per cell, entity-major.
    pub fn divergence(&self, w: &LaDofVector) -> Result<Vec<f64>, LaddrError> {
        self.check(Space::Div, w)?;
        Ok(self.divergence.mul_vec(&w.values))
    }

    /// `(mu, zeta)_{space,g,h} = (mu^I, zeta^J)_{space,h} g_IJ`.
    pub fn la_inner(&self, space: Space, mu: &LaDofVector, zeta: &LaDofVector) -> Result<f64, LaddrError> {
        self.check(space, mu)?;
        self.check(space, zeta)?;
        Ok(dot(&mu.values, &self.gram(space).mul_vec(&zeta.values)))
    }

    pub fn norm(&self, space: Space, mu: &LaDofVector) -> Result<f64, LaddrError> {
        Ok(self.la_inner(space, mu, mu)?.max(0.0).sqrt())
    }

    /// Edge interpolate of a Lie-valued field given as one 3-vector per
    /// algebra component.
    pub fn interpolate_curl(&self, f: impl Fn(&Point) -> Vec<Point> + Sync) -> LaDofVector {
        let d = self.dim();
        let mesh = self.mesh();
        let (u, w) = gauss_legendre(INTERPOLATION_DEGREE / 2 + 1);
        let values: Vec<f64> = mesh
            .edges()
            .par_iter()
            .flat_map_iter(|e| {
                let a = mesh.vertex(e.vertices[0]);
                let b = mesh.vertex(e.vertices[1]);
                let mut out = vec![0.0; d];
                for (&s, &wi) in u.iter().zip(&w) {
                    let val = f(&(a + s * (b - a)));
                    for (o, c) in out.iter_mut().zip(&val) {
                        *o += wi * c.dot(&e.tangent);
                    }
                }
                out
            })
            .collect();
        LaDofVector::new(Space::Curl, d, values)
    }

    /// Dual vector `v -> sum_F int_F <f x n, gamma_t,F v>_g` over the
    /// boundary faces, `n` the outward unit normal. Non-homogeneous natural
    /// data enter the electric equation through this load.
    pub fn boundary_tangential_load(&self, f: impl Fn(&Point) -> Vec<Point> + Sync) -> Vec<f64> {
        let d = self.dim();
        let mesh = self.mesh();
        let metric = self.algebra.metric();
        let contributions: Vec<(usize, Vec<f64>)> = (0..mesh.num_faces())
            .into_par_iter()
            .filter(|&fi| mesh.face(fi).is_boundary())
            .flat_map_iter(|fi| {
                let face = mesh.face(fi);
                let o = mesh.orientation(crate::mesh::EntityId::cell(face.cells[0]), crate::mesh::EntityId::face(fi)).unwrap_or(1.0);
                let n = o * face.normal;
                let rule = face_rule(mesh, fi, INTERPOLATION_DEGREE);
                let mut s = vec![Point::zeros(); d];
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    for (sj, fj) in s.iter_mut().zip(f(x)) {
                        *sj += *w * fj.cross(&n);
                    }
                }
                let ops = self.ddr.face_operators(fi);
                face.edges
                    .iter()
                    .enumerate()
                    .map(|(k, &e)| {
                        let g = Point::from_iterator(ops.tangential_trace.column(k).iter().copied());
                        let sg: Vec<f64> = s.iter().map(|sj| sj.dot(&g)).collect();
                        (e, (0..d).map(|i| (0..d).map(|j| metric[(i, j)] * sg[j]).sum()).collect())
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut out = vec![0.0; self.len(Space::Curl)];
        for (e, v) in contributions {
            for (i, vi) in v.into_iter().enumerate() {
                out[e * d + i] += vi;
            }
        }
        out
    }

    /// Face-flux interpolate of a Lie-valued field.
    pub fn interpolate_div(&self, f: impl Fn(&Point) -> Vec<Point> + Sync) -> LaDofVector {
        let d = self.dim();
        let mesh = self.mesh();
        let values: Vec<f64> = (0..mesh.num_faces())
            .into_par_iter()
            .flat_map_iter(|fi| {
                let face = mesh.face(fi);
                let q = face_rule(mesh, fi, INTERPOLATION_DEGREE);
                let mut out = vec![0.0; d];
                for (x, w) in q.nodes.iter().zip(&q.weights) {
                    let val = f(x);
                    for (o, c) in out.iter_mut().zip(&val) {
                        *o += w * c.dot(&face.normal) / face.area;
                    }
                }
                out
            })
            .collect();
        LaDofVector::new(Space::Div, d, values)
    }

    /// Vertex interpolate of a Lie-valued scalar field.
    pub fn interpolate_grad(&self, f: impl Fn(&Point) -> Vec<f64>) -> LaDofVector {
        let values = self.mesh().vertices().iter().flat_map(&f).collect();
        LaDofVector::new(Space::Grad, self.dim(), values)
    }

    /// Per-face tangential components `(X_1, X_2)` of a curl vector.
    fn traces(&self, v: &[f64]) -> [Vec<f64>; 2] {
        [self.gamma[0].mul_vec(v), self.gamma[1].mul_vec(v)]
    }

    /// `[[v, w]]`: per face, `[X_1(v), X_2(w)] - [X_2(v), X_1(w)]`.
    pub fn bracket_curl_curl_raw(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let nf = self.mesh().num_faces();
        let mut out = vec![0.0; nf * d];
        if self.algebra.is_abelian() {
            return out;
        }
        let [v1, v2] = self.traces(v);
        let [w1, w2] = if std::ptr::eq(v, w) { [v1.clone(), v2.clone()] } else { self.traces(w) };
        out.par_chunks_mut(d).enumerate().for_each(|(f, o)| {
            let r = f * d..(f + 1) * d;
            self.algebra.bracket_add(&v1[r.clone()], &w2[r.clone()], o);
            let mut tmp = vec![0.0; d];
            self.algebra.bracket_add(&v2[r.clone()], &w1[r], &mut tmp);
            o.iter_mut().zip(&tmp).for_each(|(a, b)| *a -= b);
        });
        out
    }

    pub fn bracket_curl_curl(&self, v: &LaDofVector, w: &LaDofVector) -> Result<LaDofVector, LaddrError> {
        self.check(Space::Curl, v)?;
        self.check(Space::Curl, w)?;
        Ok(LaDofVector::new(Space::Div, self.dim(), self.bracket_curl_curl_raw(&v.values, &w.values)))
    }

    /// `J(x)^T y` with `J(x)` the matrix of `delta -> [[x, delta]]`.
    pub fn bracket_curl_curl_adjoint(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let ne = self.mesh().num_edges();
        if self.algebra.is_abelian() {
            return vec![0.0; ne * d];
        }
        let [x1, x2] = self.traces(x);
        let nf = self.mesh().num_faces();
        let mut u1 = vec![0.0; nf * d];
        let mut u2 = vec![0.0; nf * d];
        u1.par_chunks_mut(d).zip(u2.par_chunks_mut(d)).enumerate().for_each(|(f, (o1, o2))| {
            let r = f * d..(f + 1) * d;
            let yf = &y[r.clone()];
            let ad1 = self.algebra.ad(&x1[r.clone()]);
            let ad2 = self.algebra.ad(&x2[r]);
            for j in 0..d {
                o2[j] = (0..d).map(|k| ad1[(k, j)] * yf[k]).sum();
                o1[j] = -(0..d).map(|k| ad2[(k, j)] * yf[k]).sum::<f64>();
            }
        });
        let mut out = self.gamma[0].transpose_mul_vec(&u1);
        out.iter_mut().zip(self.gamma[1].transpose_mul_vec(&u2)).for_each(|(a, b)| *a += b);
        out
    }

    /// Matrix of `delta -> [[w, delta]]` (faces x edges, lifted).
    pub fn bracket_curl_curl_jacobian(&self, w: &[f64]) -> CsrMatrix {
        let d = self.dim();
        let (nf, ne) = (self.mesh().num_faces(), self.mesh().num_edges());
        if self.algebra.is_abelian() {
            return CsrMatrix::zeros(nf * d, ne * d);
        }
        let [w1, w2] = self.traces(w);
        let [g1, g2] = &self.gamma_scalar;
        let triplets: Vec<(usize, usize, f64)> = (0..nf)
            .into_par_iter()
            .flat_map_iter(|f| {
                let r = f * d..(f + 1) * d;
                let ad1 = self.algebra.ad(&w1[r.clone()]);
                let ad2 = self.algebra.ad(&w2[r]);
                let mut t = Vec::new();
                let mut cols: Vec<(usize, f64, f64)> = Vec::new();
                for (e, a) in g2.row(f) {
                    cols.push((e, 0.0, a));
                }
                for (e, a) in g1.row(f) {
                    match cols.iter_mut().find(|c| c.0 == e) {
                        Some(c) => c.1 = a,
                        None => cols.push((e, a, 0.0)),
                    }
                }
                for (e, a1, a2) in cols {
                    let block = &ad1 * a2 - &ad2 * a1;
                    for k in 0..d {
                        for j in 0..d {
                            if block[(k, j)] != 0.0 {
                                t.push((f * d + k, e * d + j, block[(k, j)]));
                            }
                        }
                    }
                }
                t
            })
            .collect();
        CsrMatrix::from_triplets(nf * d, ne * d, &triplets)
    }

    /// Symmetric matrix `H_y` of `(delta_1, delta_2) -> y . [[delta_1, delta_2]]`.
    pub fn bracket_curl_curl_hessian(&self, y: &[f64]) -> CsrMatrix {
        let d = self.dim();
        let (nf, ne) = (self.mesh().num_faces(), self.mesh().num_edges());
        if self.algebra.is_abelian() {
            return CsrMatrix::zeros(ne * d, ne * d);
        }
        let [g1, g2] = &self.gamma_scalar;
        let triplets: Vec<(usize, usize, f64)> = (0..nf)
            .into_par_iter()
            .flat_map_iter(|f| {
                let yf = &y[f * d..(f + 1) * d];
                // K[i][j] = sum_k y_k c^k_ij
                let kmat = DMatrix::from_fn(d, d, |i, j| {
                    (0..d).map(|k| yf[k] * self.algebra.structure_constant(i, j, k)).sum::<f64>()
                });
                let mut t = Vec::new();
                for (e1, a1) in g1.row(f) {
                    for (e2, a2) in g2.row(f) {
                        let s = a1 * a2;
                        for i in 0..d {
                            for j in 0..d {
                                let v = s * kmat[(i, j)];
                                if v != 0.0 {
                                    t.push((e1 * d + i, e2 * d + j, v));
                                    t.push((e2 * d + j, e1 * d + i, v));
                                }
                            }
                        }
                    }
                }
                t
            })
            .collect();
        CsrMatrix::from_triplets(ne * d, ne * d, &triplets)
    }

    fn cell_potentials(&self, v: &[f64]) -> Vec<f64> {
        self.potential_curl.mul_vec(v)
    }

    /// `sum_T int_T <P_curl v, [P_curl w, P_grad q]>`, evaluated as
    /// `sum_T |T| sum_mu <[V^mu, W^mu], Q_T>` with `Q_T` the cell mean of
    /// `P_grad q`.
    pub fn bracket_volume_integral_raw(&self, v: &[f64], w: &[f64], q: &[f64]) -> f64 {
        if self.algebra.is_abelian() {
            return 0.0;
        }
        let d = self.dim();
        let pv = self.cell_potentials(v);
        let pw = self.cell_potentials(w);
        let qbar = self.potential_grad_mean.mul_vec(q);
        self.volumes
            .par_iter()
            .enumerate()
            .map(|(t, vol)| {
                let mut br = vec![0.0; d];
                for mu in 0..3 {
                    let r = (3 * t + mu) * d..(3 * t + mu + 1) * d;
                    self.algebra.bracket_add(&pv[r.clone()], &pw[r], &mut br);
                }
                vol * self.algebra.inner_slices(&br, &qbar[t * d..(t + 1) * d])
            })
            .sum()
    }

    pub fn bracket_volume_integral(&self, v: &LaDofVector, w: &LaDofVector, q: &LaDofVector) -> Result<f64, LaddrError> {
        self.check(Space::Curl, v)?;
        self.check(Space::Curl, w)?;
        self.check(Space::Grad, q)?;
        Ok(self.bracket_volume_integral_raw(&v.values, &w.values, &q.values))
    }

    /// Gradient in `v` of the volume bracket: the curl-space vector
    /// `delta -> bvi(delta, w, q)`.
    pub fn bvi_grad_first(&self, w: &[f64], q: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let nt = self.volumes.len();
        if self.algebra.is_abelian() {
            return vec![0.0; self.len(Space::Curl)];
        }
        let pw = self.cell_potentials(w);
        let qbar = self.potential_grad_mean.mul_vec(q);
        let mut u = vec![0.0; 3 * nt * d];
        u.par_chunks_mut(d).enumerate().for_each(|(row, o)| {
            let t = row / 3;
            let wr = &pw[row * d..(row + 1) * d];
            let qr = &qbar[t * d..(t + 1) * d];
            for (i, oi) in o.iter_mut().enumerate() {
                let mut s = 0.0;
                for j in 0..d {
                    for k in 0..d {
                        s += wr[j] * qr[k] * self.algebra.phi(i, j, k);
                    }
                }
                *oi = self.volumes[t] * s;
            }
        });
        self.potential_curl.transpose_mul_vec(&u)
    }

    /// Gradient in `q` of the volume bracket: the grad-space vector
    /// `delta -> bvi(v, w, delta)`.
    pub fn bvi_grad_third(&self, v: &[f64], w: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let nt = self.volumes.len();
        if self.algebra.is_abelian() {
            return vec![0.0; self.len(Space::Grad)];
        }
        let pv = self.cell_potentials(v);
        let pw = self.cell_potentials(w);
        let mut z = vec![0.0; nt * d];
        let g = self.algebra.metric();
        z.par_chunks_mut(d).enumerate().for_each(|(t, o)| {
            let mut br = vec![0.0; d];
            for mu in 0..3 {
                let r = (3 * t + mu) * d..(3 * t + mu + 1) * d;
                self.algebra.bracket_add(&pv[r.clone()], &pw[r], &mut br);
            }
            for (k, ok) in o.iter_mut().enumerate() {
                *ok = self.volumes[t] * (0..d).map(|i| br[i] * g[(i, k)]).sum::<f64>();
            }
        });
        self.potential_grad_mean.transpose_mul_vec(&z)
    }

    /// Block-diagonal matrix over `(t, mu)` with blocks `block(t)`.
    fn cell_block_diagonal(&self, rows_per_cell: usize, cols: usize, block: impl Fn(usize, usize) -> DMatrix<f64> + Sync) -> CsrMatrix {
        let d = self.dim();
        let nt = self.volumes.len();
        let triplets: Vec<(usize, usize, f64)> = (0..nt * 3)
            .into_par_iter()
            .flat_map_iter(|row| {
                let t = row / 3;
                let mu = row % 3;
                let b = block(t, mu);
                let mut out = Vec::new();
                let r0 = if rows_per_cell == 3 { row * d } else { t * d };
                let c0 = if cols == 3 { row * d } else { t * d };
                for i in 0..b.nrows() {
                    for j in 0..b.ncols() {
                        if b[(i, j)] != 0.0 {
                            out.push((r0 + i, c0 + j, b[(i, j)]));
                        }
                    }
                }
                out
            })
            .collect();
        CsrMatrix::from_triplets(rows_per_cell * nt * d, cols * nt * d, &triplets)
    }

    /// Jacobian in `w` of [`Self::bvi_grad_first`] at fixed `q`.
    pub fn bvi_first_dw(&self, q: &[f64]) -> CsrMatrix {
        let d = self.dim();
        let n = self.len(Space::Curl);
        if self.algebra.is_abelian() {
            return CsrMatrix::zeros(n, n);
        }
        let qbar = self.potential_grad_mean.mul_vec(q);
        let diag = self.cell_block_diagonal(3, 3, |t, _| {
            let qr = &qbar[t * d..(t + 1) * d];
            DMatrix::from_fn(d, d, |i, j| self.volumes[t] * (0..d).map(|k| qr[k] * self.algebra.phi(i, j, k)).sum::<f64>())
        });
        self.potential_curl.transpose().matmul(&diag).matmul(&self.potential_curl)
    }

    /// Jacobian in `q` of [`Self::bvi_grad_first`] at fixed `w`.
    pub fn bvi_first_dq(&self, w: &[f64]) -> CsrMatrix {
        let d = self.dim();
        if self.algebra.is_abelian() {
            return CsrMatrix::zeros(self.len(Space::Curl), self.len(Space::Grad));
        }
        let pw = self.cell_potentials(w);
        let diag = self.cell_block_diagonal(3, 1, |t, mu| {
            let wr = &pw[(3 * t + mu) * d..(3 * t + mu + 1) * d];
            DMatrix::from_fn(d, d, |i, k| self.volumes[t] * (0..d).map(|j| wr[j] * self.algebra.phi(i, j, k)).sum::<f64>())
        });
        self.potential_curl.transpose().matmul(&diag).matmul(&self.potential_grad_mean)
    }

    /// Jacobian in `v` of [`Self::bvi_grad_third`] at fixed `w`; the matrix
    /// of the bilinear map `(v, q) -> bvi(v, w, q)` as grad x curl.
    pub fn bvi_third_dv(&self, w: &[f64]) -> CsrMatrix {
        self.bvi_first_dq(w).transpose()
    }

    /// Jacobian in `w` of [`Self::bvi_grad_third`] at fixed `v`.
    pub fn bvi_third_dw(&self, v: &[f64]) -> CsrMatrix {
        self.bvi_first_dq(v).transpose().scale(-1.0)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
