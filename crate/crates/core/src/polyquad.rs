//! Quadrature on edges, polygonal faces and polyhedral cells, scaled
//! monomial bases and L2 projections.
//!
//! Faces are split into triangles joined at `x_F`, cells into tetrahedra
//! joined at `x_T` over those triangles. Each simplex carries a collapsed
//! Gauss-Legendre product rule, and the simplex weights are signed so that
//! star-shaped but non-convex entities still integrate exactly.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::mesh::{EntityId, EntityKind, Mesh, Point};

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("singular Gram matrix on {0}")]
    SingularGram(EntityId),
    #[error("target space {target:?} is not available on {entity}")]
    UnsupportedTarget { target: TargetSpace, entity: EntityId },
    #[error("field kind does not match target space {0:?}")]
    FieldKind(TargetSpace),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
}

#[derive(Debug, Clone, Default)]
pub struct QuadratureRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_vector(&self, f: impl Fn(&Point) -> Point) -> Point {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| *w * f(x)).sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn extend(&mut self, other: QuadratureRule, sign: f64) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights.into_iter().map(|w| sign * w));
    }
}

/// Gauss-Legendre rule with `m` points on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { x } else { p1 };
            let pm1 = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[m - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[m - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

pub fn segment_rule(a: &Point, b: &Point, degree: usize) -> QuadratureRule {
    let (u, w) = gauss_legendre(degree / 2 + 1);
    let len = (b - a).norm();
    QuadratureRule {
        nodes: u.iter().map(|&s| a + s * (b - a)).collect(),
        weights: w.iter().map(|&wi| wi * len).collect(),
    }
}

/// Rule on triangle `abc` with weights summing to the area.
pub fn triangle_rule(a: &Point, b: &Point, c: &Point, degree: usize) -> QuadratureRule {
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    triangle_rule_with_area(a, b, c, degree, area)
}

fn triangle_rule_with_area(a: &Point, b: &Point, c: &Point, degree: usize, area: f64) -> QuadratureRule {
    let (u, wu) = gauss_legendre(degree.div_ceil(2) + 1);
    let mut rule = QuadratureRule::default();
    for (&s, &ws) in u.iter().zip(&wu) {
        for (&t, &wt) in u.iter().zip(&wu) {
            rule.nodes.push((1.0 - s) * a + s * ((1.0 - t) * b + t * c));
            rule.weights.push(2.0 * area * s * ws * wt);
        }
    }
    rule
}

/// Rule on tetrahedron `abcd` with weights summing to the volume.
pub fn tetrahedron_rule(a: &Point, b: &Point, c: &Point, d: &Point, degree: usize) -> QuadratureRule {
    let vol = (b - a).cross(&(c - a)).dot(&(d - a)).abs() / 6.0;
    tetrahedron_rule_with_volume(a, b, c, d, degree, vol)
}

fn tetrahedron_rule_with_volume(a: &Point, b: &Point, c: &Point, d: &Point, degree: usize, vol: f64) -> QuadratureRule {
    let (u, wu) = gauss_legendre((degree + 3).div_ceil(2));
    let mut rule = QuadratureRule::default();
    for (&r, &wr) in u.iter().zip(&wu) {
        for (&s, &ws) in u.iter().zip(&wu) {
            for (&t, &wt) in u.iter().zip(&wu) {
                let inner = (1.0 - t) * c + t * d;
                let mid = (1.0 - s) * b + s * inner;
                rule.nodes.push((1.0 - r) * a + r * mid);
                rule.weights.push(6.0 * vol * r * r * s * wr * ws * wt);
            }
        }
    }
    rule
}

/// Quadrature rule exact for polynomials of total degree `degree` on `p`.
pub fn rule(mesh: &Mesh, p: EntityId, degree: usize) -> Result<QuadratureRule, QuadError> {
    mesh.check(p)?;
    Ok(match p.kind {
        EntityKind::Vertex => QuadratureRule { nodes: vec![*mesh.vertex(p.index)], weights: vec![1.0] },
        EntityKind::Edge => {
            let e = mesh.edge(p.index);
            segment_rule(mesh.vertex(e.vertices[0]), mesh.vertex(e.vertices[1]), degree)
        }
        EntityKind::Face => face_rule(mesh, p.index, degree),
        EntityKind::Cell => cell_rule(mesh, p.index, degree),
    })
}

pub fn face_rule(mesh: &Mesh, f: usize, degree: usize) -> QuadratureRule {
    let face = mesh.face(f);
    let xf = face.centroid;
    let m = face.vertices.len();
    let mut out = QuadratureRule::default();
    for i in 0..m {
        let a = mesh.vertex(face.vertices[i]);
        let b = mesh.vertex(face.vertices[(i + 1) % m]);
        let signed = 0.5 * (a - xf).cross(&(b - xf)).dot(&face.normal);
        if signed == 0.0 {
            continue;
        }
        out.extend(triangle_rule_with_area(&xf, a, b, degree, signed.abs()), signed.signum());
    }
    out
}

pub fn cell_rule(mesh: &Mesh, t: usize, degree: usize) -> QuadratureRule {
    let cell = mesh.cell(t);
    let xt = cell.centroid;
    let mut out = QuadratureRule::default();
    for (&f, &o) in cell.faces.iter().zip(&cell.face_orientations) {
        let face = mesh.face(f);
        let xf = face.centroid;
        let m = face.vertices.len();
        for i in 0..m {
            let a = mesh.vertex(face.vertices[i]);
            let b = mesh.vertex(face.vertices[(i + 1) % m]);
            let signed = o * (a - xf).cross(&(b - xf)).dot(&(xf - xt)) / 6.0;
            if signed == 0.0 {
                continue;
            }
            out.extend(tetrahedron_rule_with_volume(&xt, &xf, a, b, degree, signed.abs()), signed.signum());
        }
    }
    out
}

/// Scaled monomials `prod_a ((x - x_P) . tau_a / h_P)^alpha_a` of total
/// degree at most `degree`, in the intrinsic coordinates of an entity.
#[derive(Debug, Clone)]
pub struct MonomialBasis {
    pub entity: EntityId,
    pub degree: usize,
    pub center: Point,
    pub scale: f64,
    /// Orthonormal tangent frame (one vector for edges, two for faces,
    /// the canonical basis for cells).
    pub frame: Vec<Point>,
    exponents: Vec<Vec<usize>>,
}

/// Orthonormal frame `(tau_1, tau_2)` of a face plane, with
/// `tau_2 = n_F x tau_1`.
pub fn face_frame(mesh: &Mesh, f: usize) -> [Point; 2] {
    let face = mesh.face(f);
    let n = face.normal;
    let m = face.vertices.len();
    let mut t1 = Point::zeros();
    for i in 0..m {
        let d = mesh.vertex(face.vertices[(i + 1) % m]) - mesh.vertex(face.vertices[i]);
        let d = d - d.dot(&n) * n;
        if d.norm() > 1e-12 * face.diameter {
            t1 = d.normalize();
            break;
        }
    }
    [t1, n.cross(&t1)]
}

fn exponents(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=degree {
        match dim {
            0 => {
                if total == 0 {
                    out.push(vec![]);
                }
            }
            1 => out.push(vec![total]),
            2 => {
                for a in (0..=total).rev() {
                    out.push(vec![a, total - a]);
                }
            }
            3 => {
                for a in (0..=total).rev() {
                    for b in (0..=total - a).rev() {
                        out.push(vec![a, b, total - a - b]);
                    }
                }
            }
            _ => unreachable!(),
        }
    }
    out
}

impl MonomialBasis {
    pub fn new(mesh: &Mesh, entity: EntityId, degree: usize) -> Self {
        let (center, scale, frame) = match entity.kind {
            EntityKind::Vertex => (*mesh.vertex(entity.index), 1.0, vec![]),
            EntityKind::Edge => {
                let e = mesh.edge(entity.index);
                (e.midpoint, e.length, vec![e.tangent])
            }
            EntityKind::Face => {
                let f = mesh.face(entity.index);
                (f.centroid, f.diameter, face_frame(mesh, entity.index).to_vec())
            }
            EntityKind::Cell => {
                let c = mesh.cell(entity.index);
                (c.centroid, c.diameter, vec![Point::x(), Point::y(), Point::z()])
            }
        };
        let exps = exponents(frame.len(), degree);
        MonomialBasis { entity, degree, center, scale, frame, exponents: exps }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Local scaled coordinates of `x`.
    pub fn coordinates(&self, x: &Point) -> Vec<f64> {
        self.frame.iter().map(|t| (x - self.center).dot(t) / self.scale).collect()
    }

    pub fn evaluate(&self, x: &Point) -> Vec<f64> {
        let xi = self.coordinates(x);
        self.exponents
            .iter()
            .map(|e| e.iter().zip(&xi).map(|(&k, &c)| c.powi(k as i32)).product())
            .collect()
    }
}

/// Target spaces for [`l2_project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetSpace {
    /// Scalar polynomials of total degree `k`.
    Poly(usize),
    /// Zero-mean scalar polynomials of degree at most `k`.
    ZeroMeanPoly(usize),
    /// `(x - x_P) P^1(P)` on faces and cells.
    KoszulR2,
    /// `(x - x_T) x R^3` on cells.
    KoszulG1,
}

pub enum Field<'a> {
    Scalar(&'a dyn Fn(&Point) -> f64),
    Vector(&'a dyn Fn(&Point) -> Point),
}

/// Result of an L2 projection: coefficients in the basis of the target space.
#[derive(Debug, Clone)]
pub struct Projection {
    pub target: TargetSpace,
    pub basis: MonomialBasis,
    pub coefficients: DVector<f64>,
    means: Vec<f64>,
}

impl Projection {
    pub fn eval_scalar(&self, x: &Point) -> f64 {
        let vals = self.basis.evaluate(x);
        match self.target {
            TargetSpace::Poly(_) => vals.iter().zip(self.coefficients.iter()).map(|(v, c)| v * c).sum(),
            TargetSpace::ZeroMeanPoly(_) => vals[1..]
                .iter()
                .zip(&self.means)
                .zip(self.coefficients.iter())
                .map(|((v, m), c)| (v - m) * c)
                .sum(),
            _ => f64::NAN,
        }
    }

    pub fn eval_vector(&self, x: &Point) -> Point {
        vector_basis(self.target, &self.basis, x)
            .iter()
            .zip(self.coefficients.iter())
            .map(|(b, c)| *c * b)
            .sum()
    }
}

fn vector_basis(target: TargetSpace, basis: &MonomialBasis, x: &Point) -> Vec<Point> {
    let d = (x - basis.center) / basis.scale;
    match target {
        TargetSpace::KoszulR2 => basis.evaluate(x).into_iter().map(|v| v * d).collect(),
        TargetSpace::KoszulG1 => [Point::x(), Point::y(), Point::z()].iter().map(|e| d.cross(e)).collect(),
        _ => Vec::new(),
    }
}

/// L2-orthogonal projection of `f` onto `target` on entity `p`, integrated
/// with a rule of degree `degree`.
pub fn l2_project(
    mesh: &Mesh,
    p: EntityId,
    f: Field<'_>,
    target: TargetSpace,
    degree: usize,
) -> Result<Projection, QuadError> {
    let unsupported = || QuadError::UnsupportedTarget { target, entity: p };
    let q = rule(mesh, p, degree)?;
    let (basis, means, gram, rhs) = match target {
        TargetSpace::Poly(k) | TargetSpace::ZeroMeanPoly(k) => {
            let Field::Scalar(f) = f else { return Err(QuadError::FieldKind(target)) };
            if p.kind == EntityKind::Vertex {
                return Err(unsupported());
            }
            let basis = MonomialBasis::new(mesh, p, k);
            let meas = q.measure();
            let means: Vec<f64> = if matches!(target, TargetSpace::ZeroMeanPoly(_)) {
                let mut s = vec![0.0; basis.len()];
                for (x, w) in q.nodes.iter().zip(&q.weights) {
                    for (acc, v) in s.iter_mut().zip(basis.evaluate(x)) {
                        *acc += w * v;
                    }
                }
                s[1..].iter().map(|v| v / meas).collect()
            } else {
                Vec::new()
            };
            let skip = usize::from(!means.is_empty());
            let n = basis.len() - skip;
            let mut gram = DMatrix::zeros(n, n);
            let mut rhs = DVector::zeros(n);
            for (x, w) in q.nodes.iter().zip(&q.weights) {
                let mut v = basis.evaluate(x)[skip..].to_vec();
                for (vi, m) in v.iter_mut().zip(&means) {
                    *vi -= m;
                }
                let fx = f(x);
                for i in 0..n {
                    rhs[i] += w * v[i] * fx;
                    for j in 0..n {
                        gram[(i, j)] += w * v[i] * v[j];
                    }
                }
            }
            (basis, means, gram, rhs)
        }
        TargetSpace::KoszulR2 | TargetSpace::KoszulG1 => {
            let Field::Vector(f) = f else { return Err(QuadError::FieldKind(target)) };
            let ok = match target {
                TargetSpace::KoszulR2 => matches!(p.kind, EntityKind::Face | EntityKind::Cell),
                _ => p.kind == EntityKind::Cell,
            };
            if !ok {
                return Err(unsupported());
            }
            let basis = MonomialBasis::new(mesh, p, 1);
            let n = vector_basis(target, &basis, &basis.center).len();
            let mut gram = DMatrix::zeros(n, n);
            let mut rhs = DVector::zeros(n);
            for (x, w) in q.nodes.iter().zip(&q.weights) {
                let v = vector_basis(target, &basis, x);
                let fx = f(x);
                for i in 0..n {
                    rhs[i] += w * v[i].dot(&fx);
                    for j in 0..n {
                        gram[(i, j)] += w * v[i].dot(&v[j]);
                    }
                }
            }
            (basis, Vec::new(), gram, rhs)
        }
    };
    let coefficients = gram.cholesky().ok_or(QuadError::SingularGram(p))?.solve(&rhs);
    Ok(Projection { target, basis, coefficients, means })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for m in 1..8 {
            let (x, w) = gauss_legendre(m);
            for k in 0..2 * m {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn unit_square_xy() {
        let m = Mesh::cubic(1);
        let f = m.faces().iter().position(|f| f.normal.z > 0.5 && f.centroid.z < 0.5).unwrap();
        let q = rule(&m, EntityId::face(f), 2).unwrap();
        assert!((q.integrate(|p| p.x * p.y) - 0.25).abs() < 1e-14);
        assert!((q.measure() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unit_cube_cubic() {
        let m = Mesh::cubic(1);
        let q = rule(&m, EntityId::cell(0), 3).unwrap();
        assert!((q.integrate(|p| p.x.powi(3)) - 0.25).abs() < 1e-14);
        assert!((q.measure() - 1.0).abs() < 1e-14);
        let q6 = rule(&m, EntityId::cell(0), 6).unwrap();
        assert!((q6.integrate(|p| p.x.powi(2) * p.y.powi(2) * p.z.powi(2)) - 1.0 / 27.0).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_measure() {
        let m = Mesh::cubic(2);
        for kind in [EntityKind::Edge, EntityKind::Face, EntityKind::Cell] {
            for i in 0..m.count(kind) {
                let id = EntityId { kind, index: i };
                let q = rule(&m, id, 4).unwrap();
                assert!((q.measure() - m.measure(id)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projection_examples() {
        let m = Mesh::cubic(1);
        let e = m.edges().iter().position(|e| e.vertices == [0, 1]).unwrap();
        let id = EntityId::edge(e);
        let p = l2_project(&m, id, Field::Scalar(&|x: &Point| x.x), TargetSpace::Poly(1), 4).unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert!((p.eval_scalar(&Point::new(s, 0.0, 0.0)) - s).abs() < 1e-14);
        }
        let p = l2_project(&m, id, Field::Scalar(&|x: &Point| x.x * x.x), TargetSpace::Poly(0), 4).unwrap();
        assert!((p.coefficients[0] - 1.0 / 3.0).abs() < 1e-14);
        let p = l2_project(&m, EntityId::face(0), Field::Scalar(&|_: &Point| 5.0), TargetSpace::ZeroMeanPoly(1), 4).unwrap();
        assert!(p.coefficients.iter().all(|c| c.abs() < 1e-14));
    }

    #[test]
    fn koszul_projections_are_idempotent() {
        let m = Mesh::cubic(2);
        let xt = m.cell(3).centroid;
        let c = Point::new(0.3, -1.2, 0.5);
        let g = move |x: &Point| (x - xt).cross(&c);
        let p = l2_project(&m, EntityId::cell(3), Field::Vector(&g), TargetSpace::KoszulG1, 4).unwrap();
        for x in rule(&m, EntityId::cell(3), 2).unwrap().nodes {
            assert!((p.eval_vector(&x) - g(&x)).norm() < 1e-13);
        }
        let xf = m.face(5).centroid;
        let r = move |x: &Point| (x - xf) * (1.0 + 2.0 * x.y - x.z);
        let p = l2_project(&m, EntityId::face(5), Field::Vector(&r), TargetSpace::KoszulR2, 4).unwrap();
        for x in rule(&m, EntityId::face(5), 2).unwrap().nodes {
            assert!((p.eval_vector(&x) - r(&x)).norm() < 1e-13);
        }
    }

    #[test]
    fn mismatched_requests_are_rejected() {
        let m = Mesh::cubic(1);
        let r = l2_project(&m, EntityId::edge(0), Field::Vector(&|x: &Point| *x), TargetSpace::KoszulG1, 2);
        assert!(matches!(r, Err(QuadError::UnsupportedTarget { .. })));
        let r = l2_project(&m, EntityId::cell(0), Field::Vector(&|x: &Point| *x), TargetSpace::Poly(1), 2);
        assert!(matches!(r, Err(QuadError::FieldKind(_))));
    }
}
