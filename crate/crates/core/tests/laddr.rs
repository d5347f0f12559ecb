use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ymddr::laddr::dot;
use ymddr::polyquad::cell_rule;
use ymddr::{DdrComplex, LaDofVector, LaddrComplex, LieAlgebra, Mesh, Point, Space};

fn complex(n: usize, alg: LieAlgebra) -> LaddrComplex {
    LaddrComplex::new(DdrComplex::new(Mesh::cubic(n)).unwrap(), alg)
}

fn tet_complex(alg: LieAlgebra) -> LaddrComplex {
    let m = Mesh::from_spec(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/kuhn2.json")).unwrap();
    LaddrComplex::new(DdrComplex::new(m).unwrap(), alg)
}

fn random(rng: &mut ChaCha8Rng, l: &LaddrComplex, space: Space) -> LaDofVector {
    LaDofVector::new(space, l.dim(), (0..l.len(space)).map(|_| rng.random_range(-1.0..1.0)).collect())
}

#[test]
fn lifted_complex_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for l in [complex(2, LieAlgebra::su2()), tet_complex(LieAlgebra::su2())] {
        for _ in 0..5 {
            let q = random(&mut rng, &l, Space::Grad);
            let cg = l.curl(&l.gradient(&q).unwrap()).unwrap();
            assert!(cg.max_abs() <= 1e-13);
        }
    }
}

#[test]
fn one_dimensional_algebra_matches_scalar_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let l = complex(2, LieAlgebra::u1());
    let d = l.ddr();
    let q = random(&mut rng, &l, Space::Grad);
    assert_eq!(l.gradient(&q).unwrap().values, d.discrete_gradient(&q.values).unwrap());
    let v = random(&mut rng, &l, Space::Curl);
    assert_eq!(l.curl(&v).unwrap().values, d.discrete_curl(&v.values).unwrap());
    let w = random(&mut rng, &l, Space::Div);
    assert_eq!(l.divergence(&w).unwrap(), d.discrete_divergence(&w.values).unwrap());
}

#[test]
fn lifting_commutes_with_change_of_basis() {
    // Rotating algebra coefficients by an orthogonal matrix commutes with the
    // lifted operators.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let l = complex(2, LieAlgebra::su2());
    let r = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 0.7).into_inner();
    let rotate = |v: &LaDofVector| {
        let mut out = v.clone();
        for (i, chunk) in out.values.chunks_mut(3).enumerate() {
            let x = r * nalgebra::Vector3::from_column_slice(v.entity(i));
            chunk.copy_from_slice(x.as_slice());
        }
        out
    };
    let v = random(&mut rng, &l, Space::Curl);
    let lhs = l.curl(&rotate(&v)).unwrap();
    let rhs = rotate(&l.curl(&v).unwrap());
    for (a, b) in lhs.values.iter().zip(&rhs.values) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn la_inner_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let l = tet_complex(LieAlgebra::su2());
    let c = Point::new(0.5, 1.0, -2.0);
    let mu = l.interpolate_curl(|_| vec![c, Point::zeros(), Point::zeros()]);
    assert!((l.la_inner(Space::Curl, &mu, &mu).unwrap() - c.norm_squared()).abs() < 1e-12);
    let a = random(&mut rng, &l, Space::Curl);
    let b = random(&mut rng, &l, Space::Curl);
    let z = random(&mut rng, &l, Space::Curl);
    let (s, t) = (0.7, -1.3);
    let comb = LaDofVector::new(Space::Curl, 3, a.values.iter().zip(&b.values).map(|(x, y)| s * x + t * y).collect());
    let lhs = l.la_inner(Space::Curl, &comb, &z).unwrap();
    let rhs = s * l.la_inner(Space::Curl, &a, &z).unwrap() + t * l.la_inner(Space::Curl, &b, &z).unwrap();
    assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
    assert!((l.la_inner(Space::Curl, &a, &z).unwrap() - l.la_inner(Space::Curl, &z, &a).unwrap()).abs() < 1e-12);
    assert!(l.la_inner(Space::Div, &a, &z).is_err());
}

#[test]
fn bracket_of_constants_is_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let alg = LieAlgebra::su2();
    for l in [complex(2, alg.clone()), tet_complex(alg.clone())] {
        for _ in 0..5 {
            let a = Point::new(rng.random(), rng.random(), rng.random());
            let b = Point::new(rng.random(), rng.random(), rng.random());
            let (i, j) = (rng.random_range(0..3), rng.random_range(0..3));
            let v = l.interpolate_curl(|_| (0..3).map(|k| if k == i { a } else { Point::zeros() }).collect());
            let w = l.interpolate_curl(|_| (0..3).map(|k| if k == j { b } else { Point::zeros() }).collect());
            let br = l.bracket_curl_curl(&v, &w).unwrap();
            let eij = alg.bracket(&alg.basis_vector(i), &alg.basis_vector(j)).unwrap();
            for (f, face) in l.mesh().faces().iter().enumerate() {
                let s = a.cross(&b).dot(&face.normal);
                for k in 0..3 {
                    assert!((br.entity(f)[k] - s * eij[k]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn abelian_brackets_vanish() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let l = complex(2, LieAlgebra::u1());
    let v = random(&mut rng, &l, Space::Curl);
    let w = random(&mut rng, &l, Space::Curl);
    let q = random(&mut rng, &l, Space::Grad);
    assert_eq!(l.bracket_curl_curl(&v, &w).unwrap().max_abs(), 0.0);
    assert_eq!(l.bracket_volume_integral(&v, &w, &q).unwrap(), 0.0);
}

/// Per-cell dense evaluation of `int_T <P v, [P w, P q]>` by quadrature.
#[test]
fn boundary_load_matches_divergence_theorem() {
    // For constant c, sum_F int_F (B x n).c = -c . int_U curl B.
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for l in [complex(2, LieAlgebra::su2()), tet_complex(LieAlgebra::su2())] {
        let mats: Vec<nalgebra::Matrix3<f64>> = (0..3).map(|_| nalgebra::Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0))).collect();
        let field = |x: &Point| mats.iter().map(|m| m * x).collect::<Vec<Point>>();
        let load = l.boundary_tangential_load(field);
        for i in 0..3 {
            let c = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let v = l.interpolate_curl(|_| {
                let mut out = vec![Point::zeros(); 3];
                out[i] = c;
                out
            });
            let m = &mats[i];
            let curl = Point::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
            assert!((dot(&load, &v.values) + c.dot(&curl)).abs() < 1e-12);
        }
    }
}

fn dense_bvi(l: &LaddrComplex, v: &LaDofVector, w: &LaDofVector, q: &LaDofVector) -> f64 {
    let alg = l.algebra();
    let d = l.dim();
    let mut total = 0.0;
    for cache in l.ddr().cell_caches() {
        let comp = |x: &LaDofVector, i: usize| cache.local_edge_dofs(&x.component(i));
        let pv: Vec<DVector<f64>> = (0..d).map(|i| &cache.potential_curl * comp(v, i)).collect();
        let pw: Vec<DVector<f64>> = (0..d).map(|i| &cache.potential_curl * comp(w, i)).collect();
        let ql: Vec<DVector<f64>> = (0..d).map(|i| cache.local_vertex_dofs(&q.component(i))).collect();
        let rule = cell_rule(l.mesh(), cache.cell, 2);
        total += rule.integrate(|x| {
            let pq = DVector::from_iterator(d, (0..d).map(|i| cache.eval_potential_grad(&ql[i], x)));
            (0..3)
                .map(|mu| {
                    let a = DVector::from_iterator(d, (0..d).map(|i| pv[i][mu]));
                    let b = DVector::from_iterator(d, (0..d).map(|i| pw[i][mu]));
                    alg.inner(&a, &alg.bracket(&b, &pq).unwrap()).unwrap()
                })
                .sum()
        });
    }
    total
}

#[test]
fn volume_bracket_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for l in [complex(2, LieAlgebra::su2()), tet_complex(LieAlgebra::su2())] {
        for _ in 0..3 {
            let v = random(&mut rng, &l, Space::Curl);
            let w = random(&mut rng, &l, Space::Curl);
            let q = random(&mut rng, &l, Space::Grad);
            let fast = l.bracket_volume_integral(&v, &w, &q).unwrap();
            let oracle = dense_bvi(&l, &v, &w, &q);
            assert!((fast - oracle).abs() <= 1e-13 * oracle.abs().max(1.0), "{fast} {oracle}");
            assert_eq!(l.bracket_volume_integral(&v, &v, &q).unwrap(), 0.0);
        }
    }
}

#[test]
fn bracket_derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let l = complex(2, LieAlgebra::su2());
    let v = random(&mut rng, &l, Space::Curl).values;
    let w = random(&mut rng, &l, Space::Curl).values;
    let q = random(&mut rng, &l, Space::Grad).values;
    let dc = random(&mut rng, &l, Space::Curl).values;
    let dg = random(&mut rng, &l, Space::Grad).values;
    let y = random(&mut rng, &l, Space::Div).values;
    let close = |a: &[f64], b: &[f64]| {
        let scale = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * scale)
    };
    let plus = |x: &[f64], d: &[f64]| x.iter().zip(d).map(|(a, b)| a + b).collect::<Vec<_>>();
    // Gradients are exact linear functionals.
    let g1 = l.bvi_grad_first(&w, &q);
    assert!((dot(&g1, &dc) - l.bracket_volume_integral_raw(&dc, &w, &q)).abs() < 1e-12);
    let g3 = l.bvi_grad_third(&v, &w);
    assert!((dot(&g3, &dg) - l.bracket_volume_integral_raw(&v, &w, &dg)).abs() < 1e-12);
    // Linear maps: difference quotients are exact.
    let lin = |f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], d: &[f64]| -> Vec<f64> {
        f(&plus(x, d)).iter().zip(f(x)).map(|(a, b)| a - b).collect()
    };
    assert!(close(&l.bvi_first_dw(&q).mul_vec(&dc), &lin(&|w| l.bvi_grad_first(w, &q), &w, &dc)));
    assert!(close(&l.bvi_first_dq(&w).mul_vec(&dg), &lin(&|q| l.bvi_grad_first(&w, q), &q, &dg)));
    assert!(close(&l.bvi_third_dv(&w).mul_vec(&dc), &lin(&|v| l.bvi_grad_third(v, &w), &v, &dc)));
    assert!(close(&l.bvi_third_dw(&v).mul_vec(&dc), &lin(&|w| l.bvi_grad_third(&v, w), &w, &dc)));
    assert!(close(&l.bracket_curl_curl_jacobian(&w).mul_vec(&dc), &l.bracket_curl_curl_raw(&w, &dc)));
    let adj = l.bracket_curl_curl_adjoint(&w, &y);
    assert!((dot(&adj, &dc) - dot(&y, &l.bracket_curl_curl_raw(&w, &dc))).abs() < 1e-12);
    let h = l.bracket_curl_curl_hessian(&y);
    assert_eq!(h.max_asymmetry(), 0.0);
    assert!((dot(&dc, &h.mul_vec(&w)) - dot(&y, &l.bracket_curl_curl_raw(&dc, &w))).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_is_symmetric_and_volume_bracket_antisymmetric(seed in any::<u64>()) {
        let l = complex(1, LieAlgebra::su2());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = random(&mut rng, &l, Space::Curl);
        let w = random(&mut rng, &l, Space::Curl);
        let q = random(&mut rng, &l, Space::Grad);
        let a = l.bracket_curl_curl(&v, &w).unwrap();
        let b = l.bracket_curl_curl(&w, &v).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-14);
        }
        let s = l.bracket_volume_integral(&v, &w, &q).unwrap();
        let t = l.bracket_volume_integral(&w, &v, &q).unwrap();
        prop_assert!((s + t).abs() < 1e-13);
        prop_assert_eq!(l.bracket_volume_integral(&v, &v, &q).unwrap(), 0.0);
    }

    #[test]
    fn curl_bracket_is_bilinear(seed in any::<u64>(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let l = complex(1, LieAlgebra::su2());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random(&mut rng, &l, Space::Curl);
        let v = random(&mut rng, &l, Space::Curl);
        let w = random(&mut rng, &l, Space::Curl);
        let comb = LaDofVector::new(Space::Curl, 3, u.values.iter().zip(&v.values).map(|(a, b)| s * a + t * b).collect());
        let lhs = l.bracket_curl_curl(&comb, &w).unwrap();
        let bu = l.bracket_curl_curl(&u, &w).unwrap();
        let bv = l.bracket_curl_curl(&v, &w).unwrap();
        for ((x, a), b) in lhs.values.iter().zip(&bu.values).zip(&bv.values) {
            prop_assert!((x - s * a - t * b).abs() < 1e-12);
        }
    }
}
