//! Sparse matrices, linear solvers and the Newton iteration.
//!
//! Sparse factorisations are delegated to `faer`. Least-squares solves use
//! LSQR, right-preconditioned by the LU factors of a slightly shifted copy
//! of the matrix, so that singular but consistent saddle systems are solved
//! to a small residual.

use faer::linalg::solvers::SolveCore;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat, Side};
use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("factorisation failed: {0}")]
    Factorisation(String),
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("linear solve reached relative residual {residual:.3e} (target {target:.1e})")]
    Residual { residual: f64, target: f64 },
    #[error("iteration budget exhausted after {iterations} iterations (residual {residual:.3e})")]
    Budget { iterations: usize, residual: f64 },
    #[error("Newton iteration did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
}

/// Row-compressed real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        CsrMatrix { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: d.to_vec() }
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are
    /// summed and explicit zeros kept.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row.clear();
            row.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if indices.len() > *indptr.last().unwrap() && *indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut t = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|&(c, _)| c == j).map(|(_, v)| v).sum()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mul_vec dimension");
        (0..self.nrows).into_par_iter().map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &t)
    }

    pub fn transpose_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "transpose_mul_vec dimension");
        let mut y = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                y[j] += v * x[i];
            }
        }
        y
    }

    pub fn scale(&self, s: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `a * self + b * other`.
    pub fn add_scaled(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "add dimension");
        let mut t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (i, j, a * v)).collect();
        t.extend(other.triplets().into_iter().map(|(i, j, v)| (i, j, b * v)));
        Self::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows, "matmul dimension");
        let rows: Vec<Vec<(usize, f64)>> = (0..self.nrows)
            .into_par_iter()
            .map(|i| {
                let mut acc: Vec<(usize, f64)> = Vec::new();
                for (k, a) in self.row(i) {
                    acc.extend(other.row(k).map(|(j, b)| (j, a * b)));
                }
                acc.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
                for (j, v) in acc {
                    match merged.last_mut() {
                        Some(last) if last.0 == j => last.1 += v,
                        _ => merged.push((j, v)),
                    }
                }
                merged
            })
            .collect();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for r in rows {
            for (j, v) in r {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: other.ncols, indptr, indices, values }
    }

    /// Kronecker product `self (x) small` with entity-major ordering: entry
    /// `(i*d + I, j*d + J) = self[i,j] * small[I,J]`.
    pub fn kron(&self, small: &DMatrix<f64>) -> CsrMatrix {
        let (dr, dc) = (small.nrows(), small.ncols());
        let mut t = Vec::with_capacity(self.nnz() * dr * dc);
        for (i, j, v) in self.triplets() {
            for a in 0..dr {
                for b in 0..dc {
                    let s = small[(a, b)];
                    if s != 0.0 {
                        t.push((i * dr + a, j * dc + b, v * s));
                    }
                }
            }
        }
        Self::from_triplets(self.nrows * dr, self.ncols * dc, &t)
    }

    pub fn kron_identity(&self, d: usize) -> CsrMatrix {
        self.kron(&DMatrix::identity(d, d))
    }

    /// Places blocks at the given block offsets.
    pub fn block(nrows: usize, ncols: usize, blocks: &[(usize, usize, &CsrMatrix)]) -> CsrMatrix {
        let mut t = Vec::new();
        for &(r0, c0, m) in blocks {
            t.extend(m.triplets().into_iter().map(|(i, j, v)| (r0 + i, c0 + j, v)));
        }
        Self::from_triplets(nrows, ncols, &t)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let d = self.add_scaled(1.0, &self.transpose(), -1.0);
        d.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// Euclidean norms of the rows.
    pub fn row_norms(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v * v).sum::<f64>().sqrt()).collect()
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>, SolverError> {
        let t: Vec<Triplet<usize, usize, f64>> =
            self.triplets().into_iter().map(|(row, col, val)| Triplet { row, col, val }).collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| SolverError::Factorisation(format!("{e:?}")))
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(m: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    m.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

fn relative(r: f64, b: f64) -> f64 {
    if b > 0.0 {
        r / b
    } else {
        r
    }
}

fn col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn uncol(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// Cholesky factors of a sparse symmetric positive definite matrix.
pub struct SpdFactor {
    matrix: CsrMatrix,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl SpdFactor {
    pub fn new(m: &CsrMatrix) -> Result<Self, SolverError> {
        if m.nrows != m.ncols {
            return Err(SolverError::Dimension(format!("{}x{} is not square", m.nrows, m.ncols)));
        }
        let llt = m.to_faer()?.sp_cholesky(Side::Lower).map_err(|_| SolverError::NotSpd)?;
        Ok(SpdFactor { matrix: m.clone(), llt })
    }

    fn apply(&self, b: &[f64]) -> Vec<f64> {
        let mut x = col(b);
        self.llt.solve_in_place_with_conj(Conj::No, x.as_mut());
        uncol(&x)
    }

    /// Solves to relative residual 1e-12, with iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        let mut x = self.apply(b);
        let bn = norm2(b);
        for _ in 0..5 {
            let r = residual(&self.matrix, &x, b);
            let rel = relative(norm2(&r), bn);
            if !rel.is_finite() {
                return Err(SolverError::NotSpd);
            }
            if rel <= 1e-12 {
                return Ok(x);
            }
            let dx = self.apply(&r);
            x.iter_mut().zip(dx).for_each(|(a, d)| *a += d);
        }
        let rel = relative(norm2(&residual(&self.matrix, &x, b)), bn);
        if rel <= 1e-12 {
            Ok(x)
        } else {
            Err(SolverError::Residual { residual: rel, target: 1e-12 })
        }
    }
}

pub fn solve_spd(m: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    if b.len() != m.nrows {
        return Err(SolverError::Dimension(format!("rhs length {} for {} rows", b.len(), m.nrows)));
    }
    SpdFactor::new(m)?.solve(b)
}

/// LU factors of a general sparse square matrix.
pub struct LuFactor {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl LuFactor {
    pub fn new(m: &CsrMatrix) -> Result<Self, SolverError> {
        if m.nrows != m.ncols {
            return Err(SolverError::Dimension(format!("{}x{} is not square", m.nrows, m.ncols)));
        }
        let lu = m.to_faer()?.sp_lu().map_err(|e| SolverError::Factorisation(format!("{e:?}")))?;
        Ok(LuFactor { lu, n: m.nrows })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = col(b);
        self.lu.solve_in_place_with_conj(Conj::No, x.as_mut());
        uncol(&x)
    }

    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut x = col(b);
        self.lu.solve_transpose_in_place_with_conj(Conj::No, x.as_mut());
        uncol(&x)
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolverMode {
    /// Sparse LU with iterative refinement; requires a nonsingular matrix.
    Direct,
    /// Least squares; tolerates singular consistent systems.
    #[default]
    LeastSquares,
}

#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    /// `||b - Mx|| / ||b||` (absolute when `b = 0`).
    pub relative_residual: f64,
    pub iterations: usize,
}

/// Relative residual target of [`solve_least_squares`].
pub const LEAST_SQUARES_TARGET: f64 = 1e-9;

/// Direct sparse LU solve with iterative refinement.
pub fn solve_direct(m: &CsrMatrix, b: &[f64]) -> Result<LinearSolution, SolverError> {
    let lu = LuFactor::new(m)?;
    let bn = norm2(b);
    let mut x = lu.solve(b);
    let mut rel = f64::INFINITY;
    for it in 0..4 {
        let r = residual(m, &x, b);
        rel = relative(norm2(&r), bn);
        if !rel.is_finite() {
            return Err(SolverError::Factorisation("non-finite solution".into()));
        }
        if rel <= 1e-14 || it == 3 {
            break;
        }
        let dx = lu.solve(&r);
        x.iter_mut().zip(dx).for_each(|(a, d)| *a += d);
    }
    Ok(LinearSolution { x, relative_residual: rel, iterations: 1 })
}

/// Least-squares solution of `Mx = b`.
///
/// A nonsingular system is solved directly. Otherwise LSQR runs on
/// `M P^{-1}` with `P` the LU factorisation of `M + diag(s)`, where `s` is a
/// shift of relative size `1e-10` per row. A singular pivot (zero diagonal)
/// receives the shift too, which keeps `P` invertible.
pub fn solve_least_squares(m: &CsrMatrix, b: &[f64]) -> Result<LinearSolution, SolverError> {
    if b.len() != m.nrows {
        return Err(SolverError::Dimension(format!("rhs length {} for {} rows", b.len(), m.nrows)));
    }
    if norm2(b) == 0.0 {
        return Ok(LinearSolution { x: vec![0.0; m.ncols], relative_residual: 0.0, iterations: 0 });
    }
    if m.nrows == m.ncols {
        if let Ok(sol) = solve_direct(m, b) {
            if sol.relative_residual <= 1e-12 {
                return Ok(sol);
            }
        }
        let norms = m.row_norms();
        let shift: Vec<f64> = norms.iter().map(|&r| 1e-10 * r.max(f64::MIN_POSITIVE)).collect();
        let shifted = m.add_scaled(1.0, &CsrMatrix::from_diagonal(&shift), 1.0);
        if let Ok(lu) = LuFactor::new(&shifted) {
            let probe = lu.solve(b);
            if probe.iter().all(|v| v.is_finite()) {
                return lsqr(m, b, Some(&lu), 2000, 1e-13);
            }
        }
    }
    lsqr(m, b, None, 20 * (m.nrows + m.ncols).max(100), 1e-13)
}

/// LSQR (Paige and Saunders) with an optional right preconditioner.
///
/// Stops when the relative residual falls below `tol`, or when the
/// normal-equation residual `||(MP^{-1})^T r||` is negligible (inconsistent
/// systems). Returns an error when neither happens within `max_iter`.
pub fn lsqr(
    m: &CsrMatrix,
    b: &[f64],
    precond: Option<&LuFactor>,
    max_iter: usize,
    tol: f64,
) -> Result<LinearSolution, SolverError> {
    let apply = |y: &[f64]| -> Vec<f64> {
        match precond {
            Some(lu) => m.mul_vec(&lu.solve(y)),
            None => m.mul_vec(y),
        }
    };
    let apply_t = |u: &[f64]| -> Vec<f64> {
        let v = m.transpose_mul_vec(u);
        match precond {
            Some(lu) => lu.solve_transpose(&v),
            None => v,
        }
    };
    let n = m.ncols;
    let bn = norm2(b);
    let mut u = b.to_vec();
    let mut beta = bn;
    u.iter_mut().for_each(|x| *x /= beta);
    let mut v = apply_t(&u);
    let mut alpha = norm2(&v);
    let mut y = vec![0.0; n];
    if alpha == 0.0 {
        return Ok(LinearSolution { x: y, relative_residual: 1.0, iterations: 0 });
    }
    v.iter_mut().for_each(|x| *x /= alpha);
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut anorm2 = 0.0;
    let unprecond = |y: &[f64]| match precond {
        Some(lu) => lu.solve(y),
        None => y.to_vec(),
    };
    let mut best: Option<LinearSolution> = None;
    for it in 1..=max_iter {
        let mut uu = apply(&v);
        uu.iter_mut().zip(&u).for_each(|(a, b)| *a -= alpha * b);
        beta = norm2(&uu);
        anorm2 += alpha * alpha + beta * beta;
        if beta > 0.0 {
            uu.iter_mut().for_each(|x| *x /= beta);
        }
        u = uu;
        let mut vv = apply_t(&u);
        vv.iter_mut().zip(&v).for_each(|(a, b)| *a -= beta * b);
        alpha = norm2(&vv);
        if alpha > 0.0 {
            vv.iter_mut().for_each(|x| *x /= alpha);
        }

        let rho = (rhobar * rhobar + beta * beta).sqrt();
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;
        for i in 0..n {
            y[i] += (phi / rho) * w[i];
            w[i] = vv[i] - (theta / rho) * w[i];
        }
        v = vv;

        // phibar estimates ||r||; alpha*|c|*phibar estimates ||A^T r||.
        let est = phibar / bn;
        let normal = alpha * c.abs() * phibar / (anorm2.sqrt() * phibar.max(f64::MIN_POSITIVE));
        if est <= tol || normal <= 1e-14 || it % 50 == 0 || it == max_iter || alpha == 0.0 || beta == 0.0 {
            let x = unprecond(&y);
            let rel = norm2(&residual(m, &x, b)) / bn;
            let sol = LinearSolution { x, relative_residual: rel, iterations: it };
            if rel <= tol.max(1e-13) || normal <= 1e-14 || alpha == 0.0 || beta == 0.0 {
                return Ok(sol);
            }
            if best.as_ref().is_none_or(|b| rel < b.relative_residual) {
                best = Some(sol);
            }
        }
    }
    let best = best.expect("at least one residual evaluation");
    if best.relative_residual <= LEAST_SQUARES_TARGET {
        Ok(best)
    } else {
        Err(SolverError::Budget { iterations: max_iter, residual: best.relative_residual })
    }
}

pub fn solve_linear(mode: LinearSolverMode, m: &CsrMatrix, b: &[f64]) -> Result<LinearSolution, SolverError> {
    match mode {
        LinearSolverMode::Direct => solve_direct(m, b),
        LinearSolverMode::LeastSquares => solve_least_squares(m, b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub linear_solver: LinearSolverMode,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tolerance: 1e-6, max_iterations: 50, linear_solver: LinearSolverMode::LeastSquares }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Final `||F(z) - b|| / ||b||` (absolute when `||b|| < 1e-300`).
    pub residual: f64,
    pub linear_residuals: Vec<f64>,
}

/// Threshold on `||b||` below which the Newton criterion is absolute.
pub const ZERO_RHS: f64 = 1e-300;

/// Newton iteration for `F(z) = b`: solves
/// `DF(z_n)(z_{n+1} - z_n) = b - F(z_n)` until
/// `||F(z_{n+1}) - b|| <= eps ||b||`.
pub fn newton_solve<F, J>(
    mut f: F,
    mut jacobian: J,
    z0: &[f64],
    cfg: &NewtonConfig,
    b: &[f64],
) -> Result<(Vec<f64>, NewtonReport), SolverError>
where
    F: FnMut(&[f64]) -> Vec<f64>,
    J: FnMut(&[f64]) -> CsrMatrix,
{
    let bn = norm2(b);
    let denom = if bn < ZERO_RHS { 1.0 } else { bn };
    let mut z = z0.to_vec();
    let mut report = NewtonReport::default();
    let mut r: Vec<f64> = f(&z).iter().zip(b).map(|(fz, bi)| bi - fz).collect();
    report.residual = norm2(&r) / denom;
    while report.residual > cfg.tolerance {
        if report.iterations >= cfg.max_iterations || !report.residual.is_finite() {
            return Err(SolverError::NewtonDiverged { iterations: report.iterations, residual: report.residual });
        }
        let jac = jacobian(&z);
        let sol = solve_linear(cfg.linear_solver, &jac, &r)?;
        report.linear_residuals.push(sol.relative_residual);
        z.iter_mut().zip(&sol.x).for_each(|(a, d)| *a += d);
        report.iterations += 1;
        r = f(&z).iter().zip(b).map(|(fz, bi)| bi - fz).collect();
        report.residual = norm2(&r) / denom;
    }
    Ok((z, report))
}

/// Largest relative discrepancy between `J(z) d` and the central difference
/// `(F(z + h d) - F(z - h d)) / 2h` over the given directions.
pub fn jacobian_fd_check<F, J>(mut f: F, mut jacobian: J, z: &[f64], h_fd: f64, directions: &[Vec<f64>]) -> f64
where
    F: FnMut(&[f64]) -> Vec<f64>,
    J: FnMut(&[f64]) -> CsrMatrix,
{
    let jac = jacobian(z);
    let mut worst = 0.0f64;
    for d in directions {
        let zp: Vec<f64> = z.iter().zip(d).map(|(a, b)| a + h_fd * b).collect();
        let zm: Vec<f64> = z.iter().zip(d).map(|(a, b)| a - h_fd * b).collect();
        let fp = f(&zp);
        let fm = f(&zm);
        let jd = jac.mul_vec(d);
        let fd: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h_fd)).collect();
        let diff = fd.iter().zip(&jd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = jd.iter().chain(&fd).fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    worst
}

/// Smallest singular value of a square matrix by inverse iteration on
/// `M^T M`. Returns `0` when the matrix is singular to working precision.
pub fn estimate_min_singular_value(m: &CsrMatrix) -> Result<f64, SolverError> {
    let lu = match LuFactor::new(m) {
        Ok(lu) => lu,
        Err(SolverError::Factorisation(_)) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let n = m.nrows;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
    let xn = norm2(&x);
    x.iter_mut().for_each(|v| *v /= xn);
    let mut prev = 0.0;
    for _ in 0..500 {
        let y = lu.solve_transpose(&lu.solve(&x));
        let nrm = norm2(&y);
        if !nrm.is_finite() {
            return Ok(0.0);
        }
        if nrm == 0.0 {
            return Err(SolverError::Factorisation("zero iterate".into()));
        }
        let est = nrm;
        x = y.into_iter().map(|v| v / nrm).collect();
        if (est - prev).abs() <= 1e-10 * est {
            return Ok(1.0 / est.sqrt());
        }
        prev = est;
    }
    Err(SolverError::Budget { iterations: 500, residual: prev })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates() {
        let m = CsrMatrix::from_triplets(2, 3, &[(0, 2, 1.0), (0, 2, 2.0), (1, 0, -1.0), (0, 0, 4.0)]);
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.mul_vec(&[1.0, 1.0, 1.0]), vec![7.0, -1.0]);
        assert_eq!(m.transpose_mul_vec(&[1.0, 2.0]), vec![2.0, 0.0, 3.0]);
        assert_eq!(m.transpose().to_dense(), m.to_dense().transpose());
    }

    #[test]
    fn matmul_and_kron_match_dense() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 1, 3.0)]);
        let b = CsrMatrix::from_triplets(2, 2, &[(0, 0, -1.0), (1, 0, 1.0), (1, 1, 5.0)]);
        assert_eq!(a.matmul(&b).to_dense(), a.to_dense() * b.to_dense());
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
        let k = a.kron(&g).to_dense();
        assert_eq!(k[(1, 3)], 2.0 * 2.0);
        assert_eq!(k[(0, 3)], 2.0 * 0.5);
        assert_eq!(k[(3, 3)], 3.0 * 2.0);
    }

    #[test]
    fn spd_examples() {
        let i = CsrMatrix::identity(3);
        assert_eq!(solve_spd(&i, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]);
        let x = solve_spd(&m, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        let ind = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(solve_spd(&ind, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn least_squares_examples() {
        let m = CsrMatrix::from_triplets(3, 3, &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0), (2, 0, 1.0)]);
        let b = [1.0, 2.0, 3.0];
        let d = solve_direct(&m, &b).unwrap();
        let l = solve_least_squares(&m, &b).unwrap();
        for (a, c) in d.x.iter().zip(&l.x) {
            assert!((a - c).abs() < 1e-10);
        }
        assert!(l.relative_residual <= d.relative_residual.max(1e-15));

        let sing = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]);
        let s = solve_least_squares(&sing, &[1.0, 0.0]).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);

        let inc = solve_least_squares(&sing, &[1.0, 1.0]).unwrap();
        assert!((inc.x[0] - 1.0).abs() < 1e-10);
        assert!((inc.relative_residual - 1.0 / 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn lsqr_on_rectangular_system() {
        let m = CsrMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (1, 1, 1.0), (2, 0, 1.0), (2, 1, 1.0)]);
        let s = solve_least_squares(&m, &[1.0, 1.0, 2.0]).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn newton_examples() {
        let cfg = NewtonConfig { tolerance: 1e-12, ..Default::default() };
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 1, 3.0)]);
        let (z, rep) = newton_solve(|z| a.mul_vec(z), |_| a.clone(), &[0.0, 0.0], &cfg, &[1.0, 2.0]).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!((a.mul_vec(&z)[1] - 2.0).abs() < 1e-12);

        let (z, rep) = newton_solve(
            |z| vec![z[0] * z[0]],
            |z| CsrMatrix::from_diagonal(&[2.0 * z[0]]),
            &[3.0],
            &cfg,
            &[4.0],
        )
        .unwrap();
        assert!((z[0] - 2.0).abs() < 1e-12);
        assert!(rep.iterations <= 6);

        let bad = newton_solve(
            |z| vec![z[0] * z[0]],
            |z| CsrMatrix::from_diagonal(&[2.0 * z[0]]),
            &[3.0],
            &NewtonConfig { max_iterations: 2, ..cfg },
            &[-4.0],
        );
        assert!(matches!(bad, Err(SolverError::NewtonDiverged { .. })));
    }

    #[test]
    fn zero_rhs_uses_absolute_criterion() {
        let cfg = NewtonConfig::default();
        let a = CsrMatrix::identity(2);
        let (z, rep) = newton_solve(|z| a.mul_vec(z), |_| a.clone(), &[0.0, 0.0], &cfg, &[0.0, 0.0]).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(z, vec![0.0, 0.0]);
    }

    #[test]
    fn fd_check_examples() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, -3.0)]);
        let dirs = vec![vec![1.0, 0.0], vec![0.3, -0.7]];
        let ok = jacobian_fd_check(|z| a.mul_vec(z), |_| a.clone(), &[0.5, 0.1], 1e-6, &dirs);
        assert!(ok <= 1e-10);
        let wrong = a.add_scaled(1.0, &CsrMatrix::from_triplets(2, 2, &[(1, 1, 0.1)]), 1.0);
        let bad = jacobian_fd_check(|z| a.mul_vec(z), |_| wrong.clone(), &[0.5, 0.1], 1e-6, &dirs);
        assert!(bad > 1e-3);
    }

    #[test]
    fn min_singular_value_examples() {
        assert!((estimate_min_singular_value(&CsrMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);
        let d = CsrMatrix::from_diagonal(&[3.0, 2.0, 1e-14]);
        let s = estimate_min_singular_value(&d).unwrap();
        assert!((s - 1e-14).abs() < 1e-20, "{s}");
    }
}
