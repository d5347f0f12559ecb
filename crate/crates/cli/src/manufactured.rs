//! Closed-form gauge potential used for convergence studies and for the
//! initial data of constraint runs.

use std::f64::consts::PI;

use ymddr::{Forcing, LaddrComplex, LieAlgebra, Point};

/// Finite-difference step for the curl of `B`.
pub const FD_STEP: f64 = 1e-4;

/// Pointwise values of the four fields, one 3-vector per algebra component.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValues {
    pub a: Vec<Point>,
    pub e: Vec<Point>,
    pub b: Vec<Point>,
    pub f: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    algebra: LieAlgebra,
    brackets: bool,
}

fn v_field(x: &Point) -> Point {
    let (sx, cx) = (PI * x.x).sin_cos();
    let (sy, cy) = (PI * x.y).sin_cos();
    let (sz, cz) = (PI * x.z).sin_cos();
    Point::new(-0.5 * sx * cy * cz, cx * sy * cz, -0.5 * cx * cy * sz)
}

fn curl_v(x: &Point) -> Point {
    let (sx, cx) = (PI * x.x).sin_cos();
    let sy = (PI * x.y).sin();
    let (sz, cz) = (PI * x.z).sin_cos();
    Point::new(1.5 * PI * cx * sy * sz, 0.0, -1.5 * PI * sx * sy * cz)
}

fn w_field(t: f64, x: &Point) -> Point {
    let (st, ct) = t.sin_cos();
    Point::new(
        -0.5 * st * (PI * x.y).sin().powi(2),
        ct * (PI * x.z).cos().powi(2),
        -0.5 * st * (PI * x.x).cos().powi(2),
    )
}

fn w_field_dt(t: f64, x: &Point) -> Point {
    let (st, ct) = t.sin_cos();
    Point::new(
        -0.5 * ct * (PI * x.y).sin().powi(2),
        -st * (PI * x.z).cos().powi(2),
        -0.5 * ct * (PI * x.x).cos().powi(2),
    )
}

fn curl_w(t: f64, x: &Point) -> Point {
    let (st, ct) = t.sin_cos();
    Point::new(
        PI * ct * (2.0 * PI * x.z).sin(),
        -0.5 * PI * st * (2.0 * PI * x.x).sin(),
        0.5 * PI * st * (2.0 * PI * x.y).sin(),
    )
}

/// Richardson-extrapolated central difference of `f` along axis `k`.
fn derivative<F: Fn(&Point) -> Vec<Point>>(f: &F, x: &Point, k: usize, h: f64) -> Vec<Point> {
    let central = |h: f64| {
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        f(&xp).iter().zip(f(&xm)).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<Point>>()
    };
    let coarse = central(h);
    let fine = central(0.5 * h);
    fine.iter().zip(coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

/// Componentwise curl of a Lie-valued field by finite differences.
pub fn fd_curl<F: Fn(&Point) -> Vec<Point>>(f: &F, x: &Point, h: f64) -> Vec<Point> {
    let d: Vec<Vec<Point>> = (0..3).map(|k| derivative(f, x, k, h)).collect();
    (0..d[0].len())
        .map(|i| Point::new(d[1][i].z - d[2][i].y, d[2][i].x - d[0][i].z, d[0][i].y - d[1][i].x))
        .collect()
}

impl ManufacturedSolution {
    /// The potential lives in a three-dimensional algebra; `brackets = false`
    /// gives the linear (Maxwell) source.
    pub fn new(algebra: LieAlgebra, brackets: bool) -> Result<Self, crate::CliError> {
        if algebra.dim() != 3 {
            return Err(crate::CliError::Usage(format!(
                "manufactured solution needs a 3-dimensional algebra, `{}` has dimension {}",
                algebra.name(),
                algebra.dim()
            )));
        }
        Ok(ManufacturedSolution { algebra, brackets })
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn potential(&self, t: f64, x: &Point) -> Vec<Point> {
        let v = v_field(x);
        vec![t.cos() * v, t.sin() * v, w_field(t, x)]
    }

    /// `E = -dA/dt`.
    pub fn electric(&self, t: f64, x: &Point) -> Vec<Point> {
        let v = v_field(x);
        vec![t.sin() * v, -t.cos() * v, -w_field_dt(t, x)]
    }

    pub fn curl_potential(&self, t: f64, x: &Point) -> Vec<Point> {
        let c = curl_v(x);
        vec![t.cos() * c, t.sin() * c, curl_w(t, x)]
    }

    /// `[U x W]_k = eps_kij [U_i, W_j]`.
    pub fn bracket_cross(&self, u: &[Point], w: &[Point]) -> Vec<Point> {
        let d = self.algebra.dim();
        let slot = |f: &[Point], i: usize| -> Vec<f64> { (0..d).map(|c| f[c][i]).collect() };
        let mut out = vec![Point::zeros(); d];
        let mut tmp = vec![0.0; d];
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            self.algebra.bracket_into(&slot(u, i), &slot(w, j), &mut tmp);
            for c in 0..d {
                out[c][k] += tmp[c];
            }
            self.algebra.bracket_into(&slot(u, j), &slot(w, i), &mut tmp);
            for c in 0..d {
                out[c][k] -= tmp[c];
            }
        }
        out
    }

    /// `B = curl A + [A x A]/2`.
    pub fn magnetic(&self, t: f64, x: &Point) -> Vec<Point> {
        let mut b = self.curl_potential(t, x);
        if self.brackets {
            let a = self.potential(t, x);
            for (bi, ci) in b.iter_mut().zip(self.bracket_cross(&a, &a)) {
                *bi += 0.5 * ci;
            }
        }
        b
    }

    /// `F = dE/dt - curl B - [A x B]`, with `dE/dt = A` in closed form.
    pub fn forcing(&self, t: f64, x: &Point) -> Vec<Point> {
        let a = self.potential(t, x);
        let curl_b = fd_curl(&|y: &Point| self.magnetic(t, y), x, FD_STEP);
        let mut f: Vec<Point> = a.iter().zip(&curl_b).map(|(a, c)| a - c).collect();
        if self.brackets {
            let b = self.magnetic(t, x);
            for (fi, ci) in f.iter_mut().zip(self.bracket_cross(&a, &b)) {
                *fi -= ci;
            }
        }
        f
    }

    pub fn eval(&self, t: f64, x: &Point) -> FieldValues {
        FieldValues { a: self.potential(t, x), e: self.electric(t, x), b: self.magnetic(t, x), f: self.forcing(t, x) }
    }

    /// Largest deviation of the finite-difference curl of `A` from its closed
    /// form over a fixed sample of points and times.
    pub fn curl_self_check(&self) -> f64 {
        let mut worst = 0.0f64;
        for t in [0.0, 0.37, 1.0] {
            for x in sample_points() {
                let fd = fd_curl(&|y: &Point| self.potential(t, y), &x, FD_STEP);
                for (p, q) in fd.iter().zip(self.curl_potential(t, &x)) {
                    worst = worst.max((p - q).amax());
                }
            }
        }
        worst
    }

    /// Fails unless the finite-difference curl matches the closed form to `1e-9`.
    pub fn self_test(&self) -> Result<(), crate::CliError> {
        let err = self.curl_self_check();
        if err > 1e-9 {
            return Err(crate::CliError::SelfTest(err));
        }
        Ok(())
    }
}

fn sample_points() -> Vec<Point> {
    let c = [0.0, 0.13, 0.5, 0.71, 1.0];
    let mut pts = Vec::new();
    for (i, x) in c.iter().enumerate() {
        pts.push(Point::new(*x, c[(i + 2) % 5], c[(i + 4) % 5]));
    }
    pts
}

/// Interpolated source and electric rate of a [`ManufacturedSolution`].
#[derive(Debug, Clone)]
pub struct ManufacturedForcing {
    pub solution: ManufacturedSolution,
}

impl Forcing for ManufacturedForcing {
    fn source(&self, l: &LaddrComplex, t: f64) -> Vec<f64> {
        l.interpolate_curl(|x| self.solution.forcing(t, x)).values
    }

    fn electric_rate(&self, l: &LaddrComplex, t: f64, dt: f64) -> Vec<f64> {
        let e1 = l.interpolate_curl(|x| self.solution.electric(t + dt, x)).values;
        let e0 = l.interpolate_curl(|x| self.solution.electric(t, x)).values;
        e1.iter().zip(&e0).map(|(a, b)| (a - b) / dt).collect()
    }

    fn boundary_load(&self, l: &LaddrComplex, t: f64) -> Option<Vec<f64>> {
        Some(l.boundary_tangential_load(|x| self.solution.magnetic(t, x)))
    }
}
