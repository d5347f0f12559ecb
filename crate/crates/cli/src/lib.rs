//! Driver layer: run configuration, manufactured-solution runs, convergence
//! tables and CSV output.

use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use ymddr::scheme::{auto_steps, interpolate_ics, project_ics, run};
use ymddr::{
    DdrComplex, DdrError, DiagnosticsRow, LaDofVector, LaddrComplex, LieAlgebra, LieError, Mesh, MeshError, NewtonConfig,
    Point, SchemeConfig, SchemeError, Space, State, Variant,
};

pub mod manufactured;

pub use manufactured::{FieldValues, ManufacturedForcing, ManufacturedSolution};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("finite-difference self-test failed: curl deviation {0:e} exceeds 1e-9")]
    SelfTest(f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Ddr(#[from] DdrError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How the level-0 state is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum IcMode {
    /// Interpolate the gauge potential and its electric field at `t = 0`.
    Interpolate,
    /// Interpolate `A`, project `E` onto the discrete constraint.
    Projected,
    Zero,
    /// Uniform random degrees of freedom from `--seed`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steps {
    Auto,
    Fixed(usize),
}

impl FromStr for Steps {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Steps::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Steps::Fixed(n)),
            _ => Err(CliError::Usage(format!("--steps expects `auto` or a positive integer, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub mesh: String,
    pub variant: Variant,
    pub theta: f64,
    pub tmax: f64,
    pub steps: Steps,
    pub ic: IcMode,
    pub manufactured: bool,
    pub newton_tol: f64,
    pub newton_max: usize,
    pub algebra: String,
    pub seed: u64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            mesh: "cubic:2".into(),
            variant: Variant::YangMillsConstrained,
            theta: 1.0,
            tmax: 1.0,
            steps: Steps::Auto,
            ic: IcMode::Interpolate,
            manufactured: false,
            newton_tol: 1e-6,
            newton_max: 50,
            algebra: "su2".into(),
            seed: 0,
        }
    }
}

impl RunSpec {
    pub fn step_count(&self, h: f64) -> usize {
        match self.steps {
            Steps::Auto => auto_steps(h),
            Steps::Fixed(n) => n,
        }
    }

    pub fn config(&self, dt: f64) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(self.variant, self.theta, dt);
        cfg.newton = NewtonConfig { tolerance: self.newton_tol, max_iterations: self.newton_max, ..NewtonConfig::default() };
        cfg.forcing = self.manufactured;
        cfg
    }
}

pub fn build_complex(mesh: &str, algebra: &str) -> Result<LaddrComplex, CliError> {
    let mesh = Mesh::from_spec(mesh)?;
    let algebra = LieAlgebra::by_name(algebra)?;
    Ok(LaddrComplex::new(DdrComplex::new(mesh)?, algebra))
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
    pub rows: Vec<DiagnosticsRow>,
    /// Relative final-time errors in `A` and `E` for manufactured runs.
    pub errors: Option<(f64, f64)>,
    /// Relative residual of the projected initial-data solve.
    pub ic_residual: Option<f64>,
    pub final_state: State,
}

impl SolveOutcome {
    pub fn mean_newton_iterations(&self) -> f64 {
        let steps = &self.rows[1..];
        if steps.is_empty() {
            return 0.0;
        }
        steps.iter().map(|r| r.newton_iters as f64).sum::<f64>() / steps.len() as f64
    }

    pub fn max_drift(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.constraint_drift_dual_norm))
    }

    pub fn max_linear_residual(&self) -> f64 {
        let ic = self.ic_residual.unwrap_or(0.0);
        self.rows.iter().fold(ic, |m, r| m.max(r.linear_residual_max))
    }
}

fn truncate(mut v: Vec<Point>, d: usize) -> Vec<Point> {
    v.resize(d, Point::zeros());
    v
}

/// Level-0 state for `spec` on `l`.
pub fn initial_state(l: &LaddrComplex, spec: &RunSpec) -> Result<(State, Option<f64>), CliError> {
    let constrained = spec.variant.is_constrained();
    let d = l.dim();
    let gauge = ManufacturedSolution::new(LieAlgebra::su2(), spec.variant.has_brackets())?;
    let a0 = |x: &Point| truncate(gauge.potential(0.0, x), d);
    let e0 = |x: &Point| truncate(gauge.electric(0.0, x), d);
    match spec.ic {
        IcMode::Zero => Ok((State::zero(l, constrained), None)),
        IcMode::Interpolate => Ok((interpolate_ics(l, &a0, &e0, constrained), None)),
        IcMode::Projected => {
            let (mut s, sol) = project_ics(l, &a0, &e0)?;
            if !constrained {
                s.lambda = None;
            }
            Ok((s, Some(sol.relative_residual)))
        }
        IcMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut draw = |space: Space, scale: f64| {
                LaDofVector::new(space, d, (0..l.len(space)).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
            };
            let a = draw(Space::Curl, 0.5);
            let e = draw(Space::Curl, 1.0);
            let lambda = constrained.then(|| l.zeros(Space::Grad));
            Ok((State { a, e, lambda, time: 0.0, level: 0 }, None))
        }
    }
}

/// Relative discrete curl-norm distance between `v` and `reference`.
pub fn relative_error(l: &LaddrComplex, v: &LaDofVector, reference: &LaDofVector) -> Result<f64, CliError> {
    let diff: Vec<f64> = v.values.iter().zip(&reference.values).map(|(a, b)| a - b).collect();
    let diff = LaDofVector::new(Space::Curl, l.dim(), diff);
    let num = l.norm(Space::Curl, &diff).map_err(SchemeError::from)?;
    let den = l.norm(Space::Curl, reference).map_err(SchemeError::from)?;
    Ok(if den > 0.0 { num / den } else { num })
}

/// Runs `spec` on an already assembled complex.
pub fn solve_on(l: &LaddrComplex, spec: &RunSpec) -> Result<SolveOutcome, CliError> {
    if !(spec.tmax > 0.0) {
        return Err(CliError::Usage(format!("--tmax must be positive, got {}", spec.tmax)));
    }
    let h = l.mesh().h();
    let steps = spec.step_count(h);
    let dt = spec.tmax / steps as f64;
    let cfg = spec.config(dt);
    let (initial, ic_residual) = initial_state(l, spec)?;
    let forcing = if spec.manufactured {
        let solution = ManufacturedSolution::new(l.algebra().clone(), spec.variant.has_brackets())?;
        solution.self_test()?;
        Some(ManufacturedForcing { solution })
    } else {
        None
    };
    let out = run(l, cfg, initial, steps, forcing.as_ref().map(|f| f as &dyn ymddr::Forcing))?;
    let errors = match &forcing {
        Some(f) => {
            let t = out.final_state.time;
            let a_ref = l.interpolate_curl(|x| f.solution.potential(t, x));
            let e_ref = l.interpolate_curl(|x| f.solution.electric(t, x));
            Some((relative_error(l, &out.final_state.a, &a_ref)?, relative_error(l, &out.final_state.e, &e_ref)?))
        }
        None => None,
    };
    Ok(SolveOutcome { h, dt, steps, rows: out.rows, errors, ic_residual, final_state: out.final_state })
}

pub fn solve(spec: &RunSpec) -> Result<SolveOutcome, CliError> {
    let l = build_complex(&spec.mesh, &spec.algebra)?;
    solve_on(&l, spec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub mesh: String,
    pub h: f64,
    pub dt: f64,
    pub err_a: f64,
    pub err_e: f64,
    /// Rate against the previous row; `None` on the first row or when
    /// undefined.
    pub rate_a: Option<f64>,
    pub rate_e: Option<f64>,
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`, undefined for equal mesh sizes
/// or non-positive errors.
pub fn observed_rate(h0: f64, h1: f64, e0: f64, e1: f64) -> Option<f64> {
    let dh = (h0 / h1).ln();
    if dh.abs() < 1e-12 || !(e0 > 0.0 && e1 > 0.0) {
        return None;
    }
    Some((e0 / e1).ln() / dh)
}

pub fn rate_table(rows: &mut [ConvergenceRow]) {
    for i in 1..rows.len() {
        let (p, c) = (&rows[i - 1], &rows[i]);
        let rate_a = observed_rate(p.h, c.h, p.err_a, c.err_a);
        let rate_e = observed_rate(p.h, c.h, p.err_e, c.err_e);
        rows[i].rate_a = rate_a;
        rows[i].rate_e = rate_e;
    }
}

/// Manufactured runs on each mesh in turn, followed by the rate table.
pub fn converge(meshes: &[String], spec: &RunSpec) -> Result<Vec<ConvergenceRow>, CliError> {
    if meshes.len() < 2 {
        return Err(CliError::Usage("converge needs at least two meshes".into()));
    }
    let mut rows = Vec::new();
    for mesh in meshes {
        let spec = RunSpec { mesh: mesh.clone(), manufactured: true, ..spec.clone() };
        let out = solve(&spec)?;
        let (err_a, err_e) = out.errors.expect("manufactured run reports errors");
        rows.push(ConvergenceRow { mesh: mesh.clone(), h: out.h, dt: out.dt, err_a, err_e, rate_a: None, rate_e: None });
    }
    rate_table(&mut rows);
    Ok(rows)
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_diagnostics<W: Write>(out: W, rows: &[DiagnosticsRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "step",
        "time",
        "energy_E",
        "energy_B",
        "newton_iters",
        "newton_residual",
        "constraint_drift_dual_norm",
        "linear_residual_max",
    ])?;
    for r in rows {
        w.write_record([
            r.step.to_string(),
            num(r.time),
            num(r.energy_e),
            num(r.energy_b),
            r.newton_iters.to_string(),
            num(r.newton_residual),
            num(r.constraint_drift_dual_norm),
            num(r.linear_residual_max),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_errors<W: Write>(out: W, time: f64, err_a: f64, err_e: f64) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "err_A", "err_E"])?;
    w.write_record([num(time), num(err_a), num(err_e)])?;
    w.flush()?;
    Ok(())
}

pub fn write_convergence<W: Write>(out: W, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    let rate = |r: Option<f64>| r.map_or_else(|| "undefined".to_string(), num);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mesh", "h", "dt", "err_A", "err_E", "rate_A", "rate_E"])?;
    for r in rows {
        w.write_record([r.mesh.clone(), num(r.h), num(r.dt), num(r.err_a), num(r.err_e), rate(r.rate_a), rate(r.rate_e)])?;
    }
    w.flush()?;
    Ok(())
}
