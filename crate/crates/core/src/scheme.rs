//! Theta-scheme time stepping for Maxwell and Yang-Mills in temporal gauge,
//! with optional Lagrange-multiplier enforcement of the discrete Gauss law.
//!
//! Unknowns of a step are stacked as `Z = (A', E', lambda')` in the lifted
//! curl, curl and grad spaces. The equations are
//!
//! * `M_c ((A' - A)/dt + E^{n+theta}) = 0`,
//! * `M_c (E' - E)/dt + M_c G lambda' + b(., A^{n+theta}, lambda')
//!   - (C + [[A^{n+1/2}, .]])^T M_d B^{n+theta} - M_c F = 0`,
//! * `G^T M_c rho + b(rho, A^{n+1-theta}, .) = 0` with `rho = (E' - E)/dt`
//!   minus the interpolated exact rate when forcing is active,
//!
//! where `b` is the volume bracket and `B^{n+theta}` the convex combination
//! of `B(A') = C A' + [[A', A']]/2` and `B(A)`.

use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::ddr::Space;
use crate::laddr::{dot, LaDofVector, LaddrComplex, LaddrError};
use crate::mesh::Point;
use crate::solver::{newton_solve, solve_least_squares, CsrMatrix, LinearSolution, NewtonConfig, NewtonReport, SolverError, SpdFactor};

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Laddr(#[from] LaddrError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("step {step}: {source}")]
    Step { step: usize, source: SolverError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Maxwell,
    YangMills,
    YangMillsConstrained,
}

impl Variant {
    pub fn has_brackets(self) -> bool {
        self != Variant::Maxwell
    }

    pub fn is_constrained(self) -> bool {
        self == Variant::YangMillsConstrained
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Maxwell => "maxwell",
            Variant::YangMills => "ym",
            Variant::YangMillsConstrained => "ym-constrained",
        }
    }
}

impl FromStr for Variant {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "maxwell" => Ok(Variant::Maxwell),
            "ym" | "ym-unconstrained" => Ok(Variant::YangMills),
            "ym-constrained" => Ok(Variant::YangMillsConstrained),
            _ => Err(SchemeError::Config(format!("unknown scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig {
    pub variant: Variant,
    pub theta: f64,
    pub dt: f64,
    pub newton: NewtonConfig,
    pub forcing: bool,
}

impl SchemeConfig {
    pub fn new(variant: Variant, theta: f64, dt: f64) -> Self {
        SchemeConfig { variant, theta, dt, newton: NewtonConfig::default(), forcing: false }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(SchemeError::Config(format!("theta = {} outside [1/2, 1]", self.theta)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SchemeError::Config(format!("time step {} is not positive", self.dt)));
        }
        if !(self.newton.tolerance > 0.0) {
            return Err(SchemeError::Config("Newton tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// `max(10, ceil(5 / h))`.
pub fn auto_steps(h: f64) -> usize {
    ((5.0 / h - 1e-12).ceil() as usize).max(10)
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub a: LaDofVector,
    pub e: LaDofVector,
    pub lambda: Option<LaDofVector>,
    pub time: f64,
    pub level: usize,
}

impl State {
    pub fn zero(l: &LaddrComplex, constrained: bool) -> Self {
        State {
            a: l.zeros(Space::Curl),
            e: l.zeros(Space::Curl),
            lambda: constrained.then(|| l.zeros(Space::Grad)),
            time: 0.0,
            level: 0,
        }
    }
}

/// Source data for manufactured runs.
pub trait Forcing: Sync {
    /// `I_curl F(t)`.
    fn source(&self, l: &LaddrComplex, t: f64) -> Vec<f64>;
    /// `(I_curl E(t + dt) - I_curl E(t)) / dt`.
    fn electric_rate(&self, l: &LaddrComplex, t: f64, dt: f64) -> Vec<f64>;
    /// Boundary load from non-homogeneous natural data `B x n`, added to the
    /// electric equation as a dual vector.
    fn boundary_load(&self, _l: &LaddrComplex, _t: f64) -> Option<Vec<f64>> {
        None
    }
}

fn axpby(a: f64, x: &[f64], b: f64, y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(u, v)| a * u + b * v).collect()
}

fn add_into(x: &mut [f64], s: f64, y: &[f64]) {
    x.iter_mut().zip(y).for_each(|(a, b)| *a += s * b);
}

/// `B = C A + [[A, A]]/2` on raw vectors; brackets dropped when `brackets`
/// is false.
pub fn magnetic_field_raw(l: &LaddrComplex, a: &[f64], brackets: bool) -> Vec<f64> {
    let mut b = l.curl_matrix().mul_vec(a);
    if brackets {
        add_into(&mut b, 0.5, &l.bracket_curl_curl_raw(a, a));
    }
    b
}

pub fn magnetic_field(l: &LaddrComplex, a: &LaDofVector) -> Result<LaDofVector, LaddrError> {
    l.check(Space::Curl, a)?;
    Ok(LaDofVector::new(Space::Div, l.dim(), magnetic_field_raw(l, &a.values, true)))
}

/// `C(q_i) = (E, G q_i)_{curl,g,h} + b(E, A, q_i)` over the canonical basis
/// of the lifted grad space.
pub fn constraint_functional(l: &LaddrComplex, a: &LaDofVector, e: &LaDofVector) -> Result<Vec<f64>, LaddrError> {
    l.check(Space::Curl, a)?;
    l.check(Space::Curl, e)?;
    Ok(constraint_functional_raw(l, &a.values, &e.values))
}

fn constraint_functional_raw(l: &LaddrComplex, a: &[f64], e: &[f64]) -> Vec<f64> {
    let mut c = l.gradient_matrix().transpose_mul_vec(&l.gram(Space::Curl).mul_vec(e));
    add_into(&mut c, 1.0, &l.bvi_grad_third(e, a));
    c
}

/// Riesz dual norm `sqrt(c^T M^{-1} c)` on the lifted grad space.
pub struct DualNorm {
    factor: SpdFactor,
}

impl DualNorm {
    pub fn new(l: &LaddrComplex) -> Result<Self, SolverError> {
        Ok(DualNorm { factor: SpdFactor::new(l.gram(Space::Grad))? })
    }

    pub fn norm(&self, c: &[f64]) -> Result<f64, SolverError> {
        if c.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        let y = self.factor.solve(c)?;
        Ok(dot(c, &y).max(0.0).sqrt())
    }
}

pub fn constraint_dual_norm(l: &LaddrComplex, c: &[f64]) -> Result<f64, SolverError> {
    DualNorm::new(l)?.norm(c)
}

/// `(|E|^2 / 2, |B|^2 / 2)` in the lifted Gram norms.
pub fn energy(l: &LaddrComplex, state: &State, brackets: bool) -> (f64, f64) {
    let mc = l.gram(Space::Curl);
    let md = l.gram(Space::Div);
    let e = &state.e.values;
    let b = magnetic_field_raw(l, &state.a.values, brackets);
    (0.5 * dot(e, &mc.mul_vec(e)), 0.5 * dot(&b, &md.mul_vec(&b)))
}

/// Lie-valued vector field, one 3-vector per algebra component.
pub type LieField<'a> = &'a (dyn Fn(&Point) -> Vec<Point> + Sync);

pub fn interpolate_ics(l: &LaddrComplex, a0: LieField, e0: LieField, constrained: bool) -> State {
    State {
        a: l.interpolate_curl(a0),
        e: l.interpolate_curl(e0),
        lambda: constrained.then(|| l.zeros(Space::Grad)),
        time: 0.0,
        level: 0,
    }
}

/// Interpolated `A` and `(E, lambda)` from the constrained projection
/// saddle system; returns the linear solve report alongside.
pub fn project_ics(l: &LaddrComplex, a0: LieField, e0: LieField) -> Result<(State, LinearSolution), SchemeError> {
    let a = l.interpolate_curl(a0);
    let e_int = l.interpolate_curl(e0);
    let nc = l.len(Space::Curl);
    let ng = l.len(Space::Grad);
    let mc = l.gram(Space::Curl);
    let mcg = mc.matmul(l.gradient_matrix());
    let upper = mcg.add_scaled(1.0, &l.bvi_first_dq(&a.values), 1.0);
    let lower = upper.transpose();
    let k = CsrMatrix::block(nc + ng, nc + ng, &[(0, 0, mc), (0, nc, &upper), (nc, 0, &lower)]);
    let mut rhs = mc.mul_vec(&e_int.values);
    rhs.extend(std::iter::repeat_n(0.0, ng));
    let sol = solve_least_squares(&k, &rhs)?;
    let e = LaDofVector::new(Space::Curl, l.dim(), sol.x[..nc].to_vec());
    let lambda = LaDofVector::new(Space::Grad, l.dim(), sol.x[nc..].to_vec());
    Ok((State { a, e, lambda: Some(lambda), time: 0.0, level: 0 }, sol))
}

/// Operators shared by all steps of a run.
#[derive(Debug)]
pub struct Scheme<'a> {
    l: &'a LaddrComplex,
    cfg: SchemeConfig,
    mcg: CsrMatrix,
    gtmc: CsrMatrix,
}

/// The nonlinear system of one step, frozen at the previous level.
pub struct StepProblem<'s, 'a> {
    scheme: &'s Scheme<'a>,
    old: &'s State,
    b_old: Vec<f64>,
    source: Option<Vec<f64>>,
    rate: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct StepReport {
    pub newton: NewtonReport,
}

impl<'a> Scheme<'a> {
    pub fn new(l: &'a LaddrComplex, cfg: SchemeConfig) -> Result<Self, SchemeError> {
        cfg.validate()?;
        let mcg = l.gram(Space::Curl).matmul(l.gradient_matrix());
        let gtmc = mcg.transpose();
        Ok(Scheme { l, cfg, mcg, gtmc })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn complex(&self) -> &LaddrComplex {
        self.l
    }

    /// Size of the stacked unknown `Z`.
    pub fn unknowns(&self) -> usize {
        let nc = self.l.len(Space::Curl);
        2 * nc + if self.cfg.variant.is_constrained() { self.l.len(Space::Grad) } else { 0 }
    }

    pub fn problem<'s>(&'s self, old: &'s State, forcing: Option<&dyn Forcing>) -> StepProblem<'s, 'a> {
        let brackets = self.cfg.variant.has_brackets();
        let (dt, theta) = (self.cfg.dt, self.cfg.theta);
        let (source, rate) = match forcing.filter(|_| self.cfg.forcing) {
            Some(f) => (
                Some({
                    let t = old.time + theta * dt;
                    let mut load = self.l.gram(Space::Curl).mul_vec(&f.source(self.l, t));
                    if let Some(b) = f.boundary_load(self.l, t) {
                        add_into(&mut load, 1.0, &b);
                    }
                    load
                }),
                self.cfg.variant.is_constrained().then(|| f.electric_rate(self.l, old.time, dt)),
            ),
            None => (None, None),
        };
        StepProblem { scheme: self, old, b_old: magnetic_field_raw(self.l, &old.a.values, brackets), source, rate }
    }

    pub fn step(&self, old: &State, forcing: Option<&dyn Forcing>) -> Result<(State, StepReport), SolverError> {
        let p = self.problem(old, forcing);
        let z0 = p.initial_guess();
        let r0 = p.residual(&vec![0.0; z0.len()]);
        let b: Vec<f64> = r0.iter().map(|v| -v).collect();
        let (z, newton) = newton_solve(
            |z| axpby(1.0, &p.residual(z), -1.0, &r0),
            |z| p.jacobian(z),
            &z0,
            &self.cfg.newton,
            &b,
        )?;
        Ok((p.unpack(&z), StepReport { newton }))
    }
}

impl StepProblem<'_, '_> {
    fn split<'z>(&self, z: &'z [f64]) -> (&'z [f64], &'z [f64], Option<&'z [f64]>) {
        let nc = self.scheme.l.len(Space::Curl);
        let lam = self.scheme.cfg.variant.is_constrained().then(|| &z[2 * nc..]);
        (&z[..nc], &z[nc..2 * nc], lam)
    }

    /// The previous level, stacked.
    pub fn initial_guess(&self) -> Vec<f64> {
        let mut z = self.old.a.values.clone();
        z.extend_from_slice(&self.old.e.values);
        if self.scheme.cfg.variant.is_constrained() {
            match &self.old.lambda {
                Some(l) => z.extend_from_slice(&l.values),
                None => z.extend(std::iter::repeat_n(0.0, self.scheme.l.len(Space::Grad))),
            }
        }
        z
    }

    pub fn unpack(&self, z: &[f64]) -> State {
        let (a, e, lam) = self.split(z);
        let d = self.scheme.l.dim();
        State {
            a: LaDofVector::new(Space::Curl, d, a.to_vec()),
            e: LaDofVector::new(Space::Curl, d, e.to_vec()),
            lambda: lam.map(|v| LaDofVector::new(Space::Grad, d, v.to_vec())),
            time: self.old.time + self.scheme.cfg.dt,
            level: self.old.level + 1,
        }
    }

    fn rho(&self, e_new: &[f64]) -> Vec<f64> {
        let dt = self.scheme.cfg.dt;
        let mut rho = axpby(1.0 / dt, e_new, -1.0 / dt, &self.old.e.values);
        if let Some(rate) = &self.rate {
            add_into(&mut rho, -1.0, rate);
        }
        rho
    }

    pub fn residual(&self, z: &[f64]) -> Vec<f64> {
        let s = self.scheme;
        let l = s.l;
        let (dt, theta) = (s.cfg.dt, s.cfg.theta);
        let brackets = s.cfg.variant.has_brackets();
        let (a1, e1, lam) = self.split(z);
        let (a0, e0) = (&self.old.a.values, &self.old.e.values);
        let mc = l.gram(Space::Curl);
        let md = l.gram(Space::Div);

        let a_theta = axpby(theta, a1, 1.0 - theta, a0);
        let e_theta = axpby(theta, e1, 1.0 - theta, e0);
        let mut r1 = axpby(1.0 / dt, a1, -1.0 / dt, a0);
        add_into(&mut r1, 1.0, &e_theta);
        let r1 = mc.mul_vec(&r1);

        let b1 = magnetic_field_raw(l, a1, brackets);
        let y = md.mul_vec(&axpby(theta, &b1, 1.0 - theta, &self.b_old));
        let mut r2 = mc.mul_vec(&axpby(1.0 / dt, e1, -1.0 / dt, e0));
        add_into(&mut r2, -1.0, &l.curl_matrix().transpose_mul_vec(&y));
        if brackets {
            let a_half = axpby(0.5, a1, 0.5, a0);
            add_into(&mut r2, -1.0, &l.bracket_curl_curl_adjoint(&a_half, &y));
        }
        if let Some(f) = &self.source {
            add_into(&mut r2, -1.0, f);
        }
        let mut out = r1;
        if let Some(lam) = lam {
            add_into(&mut r2, 1.0, &s.mcg.mul_vec(lam));
            add_into(&mut r2, 1.0, &l.bvi_grad_first(&a_theta, lam));
            out.extend(r2);
            let rho = self.rho(e1);
            let a_rev = axpby(1.0 - theta, a1, theta, a0);
            let mut r3 = s.gtmc.mul_vec(&rho);
            add_into(&mut r3, 1.0, &l.bvi_grad_third(&rho, &a_rev));
            out.extend(r3);
        } else {
            out.extend(r2);
        }
        out
    }

    pub fn jacobian(&self, z: &[f64]) -> CsrMatrix {
        let s = self.scheme;
        let l = s.l;
        let (dt, theta) = (s.cfg.dt, s.cfg.theta);
        let brackets = s.cfg.variant.has_brackets();
        let (a1, e1, lam) = self.split(z);
        let a0 = &self.old.a.values;
        let mc = l.gram(Space::Curl);
        let md = l.gram(Space::Div);
        let c = l.curl_matrix();
        let nc = l.len(Space::Curl);
        let n = s.unknowns();

        let j11 = mc.scale(1.0 / dt);
        let j12 = mc.scale(theta);
        let j22 = mc.scale(1.0 / dt);
        let j21 = if brackets {
            let a_half = axpby(0.5, a1, 0.5, a0);
            let l_half = c.add_scaled(1.0, &l.bracket_curl_curl_jacobian(&a_half), 1.0);
            let l_new = c.add_scaled(1.0, &l.bracket_curl_curl_jacobian(a1), 1.0);
            let b1 = magnetic_field_raw(l, a1, true);
            let y = md.mul_vec(&axpby(theta, &b1, 1.0 - theta, &self.b_old));
            let main = l_half.transpose().matmul(&md.matmul(&l_new));
            main.add_scaled(-theta, &l.bracket_curl_curl_hessian(&y), -0.5)
        } else {
            c.transpose().matmul(&md.matmul(c)).scale(-theta)
        };

        match lam {
            None => CsrMatrix::block(n, n, &[(0, 0, &j11), (0, nc, &j12), (nc, 0, &j21), (nc, nc, &j22)]),
            Some(lam) => {
                let a_theta = axpby(theta, a1, 1.0 - theta, a0);
                let a_rev = axpby(1.0 - theta, a1, theta, a0);
                let rho = self.rho(e1);
                let j21 = j21.add_scaled(1.0, &l.bvi_first_dw(lam), theta);
                let j23 = s.mcg.add_scaled(1.0, &l.bvi_first_dq(&a_theta), 1.0);
                let j31 = l.bvi_third_dw(&rho).scale(1.0 - theta);
                let j32 = s.gtmc.add_scaled(1.0 / dt, &l.bvi_third_dv(&a_rev), 1.0 / dt);
                CsrMatrix::block(
                    n,
                    n,
                    &[
                        (0, 0, &j11),
                        (0, nc, &j12),
                        (nc, 0, &j21),
                        (nc, nc, &j22),
                        (nc, 2 * nc, &j23),
                        (2 * nc, 0, &j31),
                        (2 * nc, nc, &j32),
                    ],
                )
            }
        }
    }
}

/// One diagnostics row per time level.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub time: f64,
    pub energy_e: f64,
    pub energy_b: f64,
    pub newton_iters: usize,
    pub newton_residual: f64,
    pub constraint_drift_dual_norm: f64,
    pub linear_residual_max: f64,
    /// `max_i |C^n(q_i) - C^0(q_i)|`.
    #[serde(skip)]
    pub constraint_drift_max: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: State,
    pub rows: Vec<DiagnosticsRow>,
}

/// Runs `steps` steps from `initial`, recording a row for the initial level
/// and after every step.
pub fn run(
    l: &LaddrComplex,
    cfg: SchemeConfig,
    initial: State,
    steps: usize,
    forcing: Option<&dyn Forcing>,
) -> Result<RunOutput, SchemeError> {
    let scheme = Scheme::new(l, cfg)?;
    let brackets = cfg.variant.has_brackets();
    let dual = DualNorm::new(l)?;
    let functional = |s: &State| {
        if brackets {
            constraint_functional_raw(l, &s.a.values, &s.e.values)
        } else {
            l.gradient_matrix().transpose_mul_vec(&l.gram(Space::Curl).mul_vec(&s.e.values))
        }
    };
    let c0 = functional(&initial);
    let row = |s: &State, report: Option<&NewtonReport>| -> Result<DiagnosticsRow, SchemeError> {
        let (ee, eb) = energy(l, s, brackets);
        let drift = axpby(1.0, &functional(s), -1.0, &c0);
        Ok(DiagnosticsRow {
            step: s.level,
            time: s.time,
            energy_e: ee,
            energy_b: eb,
            newton_iters: report.map_or(0, |r| r.iterations),
            newton_residual: report.map_or(0.0, |r| r.residual),
            constraint_drift_dual_norm: dual.norm(&drift)?,
            linear_residual_max: report.map_or(0.0, |r| r.linear_residuals.iter().fold(0.0, |m: f64, v| m.max(*v))),
            constraint_drift_max: drift.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        })
    };
    let mut rows = vec![row(&initial, None)?];
    let mut state = initial;
    for k in 0..steps {
        let (next, report) = scheme.step(&state, forcing).map_err(|source| SchemeError::Step { step: k + 1, source })?;
        rows.push(row(&next, Some(&report.newton))?);
        state = next;
    }
    Ok(RunOutput { final_state: state, rows })
}
