//! Finite-dimensional real Lie algebras given by structure constants and an
//! Ad-invariant metric.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub type LieVector = DVector<f64>;

/// Tolerance for the Jacobi and Ad-invariance checks at construction.
pub const STRUCTURE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum LieError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("structure constants are not antisymmetric (defect {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("Jacobi identity fails (defect {0:.3e})")]
    Jacobi(f64),
    #[error("metric is not symmetric positive definite")]
    MetricNotSpd,
    #[error("metric is not Ad-invariant (defect {0:.3e})")]
    NotAdInvariant(f64),
    #[error("unknown algebra `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone)]
pub struct LieAlgebra {
    name: String,
    dim: usize,
    /// `c[(i * dim + j) * dim + k] = c^k_{ij}`.
    structure: Vec<f64>,
    metric: DMatrix<f64>,
    /// `phi[(i * dim + j) * dim + k] = <[e_i, e_j], e_k>`.
    phi: Vec<f64>,
    abelian: bool,
}

impl LieAlgebra {
    /// Builds an algebra from `c[(i*dim+j)*dim+k] = c^k_{ij}` and a metric,
    /// validating antisymmetry, Jacobi, positivity and Ad-invariance.
    pub fn new(name: &str, dim: usize, structure: Vec<f64>, metric: DMatrix<f64>) -> Result<Self, LieError> {
        if structure.len() != dim * dim * dim {
            return Err(LieError::DimensionMismatch { expected: dim * dim * dim, found: structure.len() });
        }
        if metric.nrows() != dim || metric.ncols() != dim {
            return Err(LieError::DimensionMismatch { expected: dim, found: metric.nrows() });
        }
        let c = |i: usize, j: usize, k: usize| structure[(i * dim + j) * dim + k];
        let scale = structure.iter().fold(1.0f64, |m, v| m.max(v.abs()));

        let mut anti = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    anti = anti.max((c(i, j, k) + c(j, i, k)).abs());
                }
            }
        }
        if anti > STRUCTURE_TOLERANCE * scale {
            return Err(LieError::NotAntisymmetric(anti));
        }
        if (&metric - metric.transpose()).amax() > STRUCTURE_TOLERANCE * metric.amax()
            || metric.clone().cholesky().is_none()
        {
            return Err(LieError::MetricNotSpd);
        }

        let mut phi = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    phi[(i * dim + j) * dim + k] = (0..dim).map(|l| c(i, j, l) * metric[(l, k)]).sum();
                }
            }
        }
        let abelian = structure.iter().all(|&v| v == 0.0);
        let alg = LieAlgebra { name: name.to_string(), dim, structure, metric, phi, abelian };
        let jac = alg.jacobi_defect();
        if jac > STRUCTURE_TOLERANCE * scale * scale {
            return Err(LieError::Jacobi(jac));
        }
        let adinv = alg.ad_invariance_defect();
        if adinv > STRUCTURE_TOLERANCE * scale * alg.metric.amax() {
            return Err(LieError::NotAdInvariant(adinv));
        }
        Ok(alg)
    }

    /// `su(2)` in the basis `e_I = -(i/2) sigma_I`: `[e_1, e_2] = e_3` and
    /// cyclic permutations, metric `delta_IJ`.
    pub fn su2() -> Self {
        let mut c = vec![0.0; 27];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[(i * 3 + j) * 3 + k] = 1.0;
            c[(j * 3 + i) * 3 + k] = -1.0;
        }
        Self::new("su2", 3, c, DMatrix::identity(3, 3)).expect("su(2) is valid")
    }

    /// The abelian algebra `u(1)`.
    pub fn u1() -> Self {
        Self::new("u1", 1, vec![0.0], DMatrix::identity(1, 1)).expect("u(1) is valid")
    }

    pub fn by_name(name: &str) -> Result<Self, LieError> {
        match name {
            "su2" => Ok(Self::su2()),
            "u1" => Ok(Self::u1()),
            _ => Err(LieError::Unknown(name.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// `c^k_{ij}`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    /// `<[e_i, e_j], e_k>`.
    pub fn phi(&self, i: usize, j: usize, k: usize) -> f64 {
        self.phi[(i * self.dim + j) * self.dim + k]
    }

    pub fn basis_vector(&self, i: usize) -> LieVector {
        let mut v = LieVector::zeros(self.dim);
        v[i] = 1.0;
        v
    }

    fn check(&self, v: &[f64]) -> Result<(), LieError> {
        if v.len() == self.dim {
            Ok(())
        } else {
            Err(LieError::DimensionMismatch { expected: self.dim, found: v.len() })
        }
    }

    pub fn bracket(&self, a: &LieVector, b: &LieVector) -> Result<LieVector, LieError> {
        self.check(a.as_slice())?;
        self.check(b.as_slice())?;
        let mut out = LieVector::zeros(self.dim);
        self.bracket_into(a.as_slice(), b.as_slice(), out.as_mut_slice());
        Ok(out)
    }

    pub fn inner(&self, a: &LieVector, b: &LieVector) -> Result<f64, LieError> {
        self.check(a.as_slice())?;
        self.check(b.as_slice())?;
        Ok(self.inner_slices(a.as_slice(), b.as_slice()))
    }

    /// Unchecked bracket on slices, accumulated into `out`. Each pair
    /// `i < j` contributes `c^k_{ij} (a_i b_j - a_j b_i)`, so `[a, a]`
    /// vanishes exactly in floating point.
    pub fn bracket_add(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        let d = self.dim;
        if self.abelian {
            return;
        }
        for i in 0..d {
            for j in i + 1..d {
                let s = a[i] * b[j] - a[j] * b[i];
                if s == 0.0 {
                    continue;
                }
                let base = (i * d + j) * d;
                for k in 0..d {
                    out[k] += self.structure[base + k] * s;
                }
            }
        }
    }

    pub fn bracket_into(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.bracket_add(a, b, out);
    }

    pub fn inner_slices(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = self.dim;
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += a[i] * self.metric[(i, j)] * b[j];
            }
        }
        s
    }

    /// Matrix of `b -> [a, b]`.
    pub fn ad(&self, a: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |k, j| (0..d).map(|i| a[i] * self.structure_constant(i, j, k)).sum())
    }

    /// Max abs entry of the Jacobi tensor
    /// `c^m_{il} c^l_{jk} + c^m_{jl} c^l_{ki} + c^m_{kl} c^l_{ij}`.
    pub fn jacobi_defect(&self) -> f64 {
        let d = self.dim;
        let c = |i, j, k| self.structure_constant(i, j, k);
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let s: f64 = (0..d)
                            .map(|l| c(i, l, m) * c(j, k, l) + c(j, l, m) * c(k, i, l) + c(k, l, m) * c(i, j, l))
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Max deviation of `c^l_{ij} g_{lk}` from total antisymmetry.
    pub fn ad_invariance_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let p = self.phi(i, j, k);
                    worst = worst.max((p + self.phi(j, i, k)).abs());
                    worst = worst.max((p - self.phi(j, k, i)).abs());
                    worst = worst.max((p + self.phi(i, k, j)).abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    type M2 = [[Complex64; 2]; 2];

    fn pauli_basis() -> [M2; 3] {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let s = [[[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]];
        let f = Complex64::new(0.0, -0.5);
        s.map(|m| m.map(|r| r.map(|v| f * v)))
    }

    fn mul(a: &M2, b: &M2) -> M2 {
        let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        c
    }

    fn trace_form(a: &M2, b: &M2) -> f64 {
        let p = mul(a, b);
        -2.0 * (p[0][0] + p[1][1]).re
    }

    #[test]
    fn su2_matches_pauli_commutators_and_trace_form() {
        let e = pauli_basis();
        let alg = LieAlgebra::su2();
        for i in 0..3 {
            for j in 0..3 {
                let ab = mul(&e[i], &e[j]);
                let ba = mul(&e[j], &e[i]);
                let comm: M2 = std::array::from_fn(|r| std::array::from_fn(|c| ab[r][c] - ba[r][c]));
                let br = alg.bracket(&alg.basis_vector(i), &alg.basis_vector(j)).unwrap();
                let mut rebuilt = [[Complex64::new(0.0, 0.0); 2]; 2];
                for k in 0..3 {
                    for r in 0..2 {
                        for c in 0..2 {
                            rebuilt[r][c] += br[k] * e[k][r][c];
                        }
                    }
                }
                for r in 0..2 {
                    for c in 0..2 {
                        assert!((rebuilt[r][c] - comm[r][c]).norm() < 1e-15);
                    }
                }
                assert!((trace_form(&e[i], &e[j]) - alg.metric()[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn su2_examples() {
        let alg = LieAlgebra::su2();
        let e = |i| alg.basis_vector(i);
        assert_eq!(alg.bracket(&e(0), &e(1)).unwrap(), e(2));
        assert_eq!(alg.bracket(&e(1), &e(0)).unwrap(), -e(2));
        assert_eq!(alg.inner(&e(0), &e(0)).unwrap(), 1.0);
        assert!(alg.jacobi_defect() <= 1e-13);
        assert!(alg.ad_invariance_defect() <= 1e-13);
    }

    #[test]
    fn u1_examples() {
        let alg = LieAlgebra::u1();
        let a = LieVector::from_vec(vec![2.5]);
        let b = LieVector::from_vec(vec![-1.5]);
        assert_eq!(alg.bracket(&a, &a).unwrap()[0], 0.0);
        assert_eq!(alg.ad_invariance_defect(), 0.0);
        assert_eq!(alg.inner(&a, &b).unwrap(), -3.75);
        assert!(alg.is_abelian());
    }

    #[test]
    fn dimension_mismatch() {
        let alg = LieAlgebra::su2();
        let r = alg.bracket(&LieVector::zeros(3), &LieVector::zeros(2));
        assert!(matches!(r, Err(LieError::DimensionMismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn invalid_algebras_are_rejected() {
        let mut c = vec![0.0; 27];
        c[(0 * 3 + 1) * 3 + 2] = 1.0;
        assert!(matches!(
            LieAlgebra::new("bad", 3, c, DMatrix::identity(3, 3)),
            Err(LieError::NotAntisymmetric(_))
        ));
        let su2 = LieAlgebra::su2();
        let mut g = DMatrix::identity(3, 3);
        g[(0, 0)] = 2.0;
        assert!(matches!(
            LieAlgebra::new("skew", 3, su2.structure.clone(), g),
            Err(LieError::NotAdInvariant(_))
        ));
        assert!(matches!(
            LieAlgebra::new("neg", 3, su2.structure.clone(), -DMatrix::identity(3, 3)),
            Err(LieError::MetricNotSpd)
        ));
        // [e1,e2]=e2, [e1,e3]=e2, [e2,e3]=e1 violates Jacobi.
        let mut c = vec![0.0; 27];
        let mut set = |i: usize, j: usize, k: usize, v: f64| {
            c[(i * 3 + j) * 3 + k] = v;
            c[(j * 3 + i) * 3 + k] = -v;
        };
        set(0, 1, 1, 1.0);
        set(0, 2, 1, 1.0);
        set(1, 2, 0, 1.0);
        assert!(matches!(
            LieAlgebra::new("nj", 3, c, DMatrix::identity(3, 3)),
            Err(LieError::Jacobi(_))
        ));
    }

    #[test]
    fn ad_matrix_matches_bracket() {
        let alg = LieAlgebra::su2();
        let a = [0.3, -0.7, 1.1];
        let b = LieVector::from_vec(vec![0.2, 0.5, -0.4]);
        let lhs = alg.ad(&a) * &b;
        let rhs = alg.bracket(&LieVector::from_row_slice(&a), &b).unwrap();
        assert!((lhs - rhs).amax() < 1e-15);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 3)
    }

    proptest! {
        #[test]
        fn bracket_self_is_zero(a in vec3()) {
            let alg = LieAlgebra::su2();
            let a = LieVector::from_vec(a);
            prop_assert!(alg.bracket(&a, &a).unwrap().iter().all(|&v| v == 0.0));
        }

        #[test]
        fn ad_invariance_and_jacobi(a in vec3(), b in vec3(), c in vec3()) {
            let alg = LieAlgebra::su2();
            let (a, b, c) = (LieVector::from_vec(a), LieVector::from_vec(b), LieVector::from_vec(c));
            let scale = a.norm() * b.norm() * c.norm() + 1.0;
            let lhs = alg.inner(&alg.bracket(&a, &b).unwrap(), &c).unwrap();
            let rhs = alg.inner(&a, &alg.bracket(&b, &c).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale);
            let j = alg.bracket(&a, &alg.bracket(&b, &c).unwrap()).unwrap()
                + alg.bracket(&b, &alg.bracket(&c, &a).unwrap()).unwrap()
                + alg.bracket(&c, &alg.bracket(&a, &b).unwrap()).unwrap();
            prop_assert!(j.amax() <= 1e-13 * scale);
        }

        #[test]
        fn bracket_is_bilinear_and_antisymmetric(a in vec3(), b in vec3(), c in vec3(), s in -3.0f64..3.0) {
            let alg = LieAlgebra::su2();
            let (a, b, c) = (LieVector::from_vec(a), LieVector::from_vec(b), LieVector::from_vec(c));
            let lhs = alg.bracket(&(&a * s + &c), &b).unwrap();
            let rhs = alg.bracket(&a, &b).unwrap() * s + alg.bracket(&c, &b).unwrap();
            prop_assert!((lhs - rhs).amax() <= 1e-12);
            let ab = alg.bracket(&a, &b).unwrap();
            let ba = alg.bracket(&b, &a).unwrap();
            prop_assert!((ab + ba).amax() == 0.0);
        }
    }
}
