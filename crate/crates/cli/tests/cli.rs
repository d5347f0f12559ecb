use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ymddr::{LieAlgebra, Point, Space, Variant};
use ymddr_cli::manufactured::{fd_curl, FD_STEP};
use ymddr_cli::{
    build_complex, converge, observed_rate, solve, write_convergence, write_diagnostics, ConvergenceRow, IcMode,
    ManufacturedSolution, RunSpec, Steps,
};

fn su2(brackets: bool) -> ManufacturedSolution {
    ManufacturedSolution::new(LieAlgebra::su2(), brackets).unwrap()
}

fn close(a: &[Point], b: &[Point], tol: f64) -> bool {
    a.iter().zip(b).all(|(p, q)| (p - q).amax() <= tol)
}

#[test]
fn manufactured_point_values() {
    let m = su2(true);
    let z = Point::zeros();
    assert!(close(&m.potential(0.0, &z), &[Point::zeros(), Point::zeros(), Point::new(0.0, 1.0, 0.0)], 1e-15));
    assert!(m.potential(0.0, &Point::new(0.5, 0.5, 0.5)).iter().all(|v| v.amax() < 1e-15));
    assert!(close(&m.electric(0.0, &z), &[Point::zeros(), Point::zeros(), Point::new(0.0, 0.0, 0.5)], 1e-15));
}

#[test]
fn electric_field_is_minus_time_derivative() {
    let m = su2(true);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let h = 1e-4;
    for _ in 0..20 {
        let t = rng.random_range(0.0..1.0);
        let x = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let central = |h: f64| -> Vec<Point> {
            m.potential(t + h, &x).iter().zip(m.potential(t - h, &x)).map(|(p, q)| -(p - q) / (2.0 * h)).collect()
        };
        let (c, f) = (central(h), central(0.5 * h));
        let fd: Vec<Point> = f.iter().zip(&c).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
        assert!(close(&fd, &m.electric(t, &x), 1e-9));
        // dE/dt = A.
        let central = |h: f64| -> Vec<Point> {
            m.electric(t + h, &x).iter().zip(m.electric(t - h, &x)).map(|(p, q)| (p - q) / (2.0 * h)).collect()
        };
        let (c, f) = (central(h), central(0.5 * h));
        let fd: Vec<Point> = f.iter().zip(&c).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
        assert!(close(&fd, &m.potential(t, &x), 1e-9));
    }
}

#[test]
fn finite_difference_curl_matches_closed_form() {
    let m = su2(true);
    assert!(m.curl_self_check() <= 1e-9);
    m.self_test().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let t = rng.random_range(0.0..1.0);
        let x = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let fd = fd_curl(&|y: &Point| m.potential(t, y), &x, FD_STEP);
        assert!(close(&fd, &m.curl_potential(t, &x), 1e-9));
    }
}

#[test]
fn magnetic_field_and_forcing_of_linear_source() {
    // Without brackets, curl curl V = 3 pi^2 V for the first two components.
    let m = su2(false);
    let pi2 = std::f64::consts::PI.powi(2);
    let x = Point::new(0.2, 0.35, 0.7);
    let t = 0.3;
    let a = m.potential(t, &x);
    let f = m.forcing(t, &x);
    for i in 0..2 {
        assert!((f[i] - (1.0 - 3.0 * pi2) * a[i]).amax() < 1e-8);
    }
    assert_eq!(m.magnetic(t, &x), m.curl_potential(t, &x));
}

#[test]
fn bracket_cross_is_symmetric() {
    let m = su2(true);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut draw = || (0..3).map(|_| Point::new(rng.random(), rng.random(), rng.random())).collect::<Vec<Point>>();
    let (u, w) = (draw(), draw());
    assert!(close(&m.bracket_cross(&u, &w), &m.bracket_cross(&w, &u), 1e-15));
}

#[test]
fn manufactured_solution_needs_three_dimensional_algebra() {
    assert!(ManufacturedSolution::new(LieAlgebra::u1(), true).is_err());
}

#[test]
fn zero_initial_data_give_zero_rows() {
    let spec = RunSpec {
        mesh: "cubic:2".into(),
        variant: Variant::Maxwell,
        theta: 0.5,
        steps: Steps::Fixed(10),
        ic: IcMode::Zero,
        ..RunSpec::default()
    };
    let out = solve(&spec).unwrap();
    assert_eq!(out.rows.len(), 11);
    for r in &out.rows {
        assert_eq!((r.energy_e, r.energy_b, r.newton_iters, r.constraint_drift_dual_norm), (0.0, 0.0, 0, 0.0));
    }
    let mut buf = Vec::new();
    write_diagnostics(&mut buf, &out.rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with(
        "step,time,energy_E,energy_B,newton_iters,newton_residual,constraint_drift_dual_norm,linear_residual_max\n"
    ));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn step_rule_and_parsing() {
    assert_eq!("auto".parse::<Steps>().unwrap(), Steps::Auto);
    assert_eq!("7".parse::<Steps>().unwrap(), Steps::Fixed(7));
    assert!("0".parse::<Steps>().is_err());
    let spec = RunSpec::default();
    assert_eq!(spec.step_count(3f64.sqrt() / 4.0), 12);
}

#[test]
fn observed_rate_guard() {
    assert!((observed_rate(0.5, 0.25, 0.4, 0.2).unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(observed_rate(0.5, 0.5, 0.4, 0.2), None);
    assert_eq!(observed_rate(0.5, 0.25, 0.0, 0.2), None);
}

#[test]
fn identical_meshes_flag_undefined_rates() {
    let spec = RunSpec { steps: Steps::Fixed(2), tmax: 0.2, ..RunSpec::default() };
    let rows = converge(&["cubic:2".into(), "cubic:2".into()], &spec).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].err_a, rows[1].err_a);
    assert!(rows.iter().all(|r| r.rate_a.is_none() && r.rate_e.is_none()));
    let mut buf = Vec::new();
    write_convergence(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("mesh,h,dt,err_A,err_E,rate_A,rate_E\n"));
    assert!(text.lines().nth(2).unwrap().ends_with("undefined,undefined"));
    assert!(converge(&["cubic:2".into()], &spec).is_err());
}

#[test]
fn rate_table_uses_successive_pairs() {
    let row = |h: f64, e: f64| ConvergenceRow { mesh: String::new(), h, dt: 0.1, err_a: e, err_e: 2.0 * e, rate_a: None, rate_e: None };
    let mut rows = vec![row(0.4, 0.8), row(0.2, 0.2), row(0.1, 0.1)];
    ymddr_cli::rate_table(&mut rows);
    assert!(rows[0].rate_a.is_none());
    assert!((rows[1].rate_a.unwrap() - 2.0).abs() < 1e-14 && (rows[2].rate_e.unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn short_manufactured_run_reports_errors() {
    let spec = RunSpec { manufactured: true, steps: Steps::Fixed(3), tmax: 0.1, ..RunSpec::default() };
    let out = solve(&spec).unwrap();
    let (ea, ee) = out.errors.unwrap();
    assert!(ea.is_finite() && ee.is_finite() && ea > 0.0 && ee > 0.0);
    assert!(out.mean_newton_iterations() <= 4.0);
    assert!(out.max_linear_residual() <= 1e-9);
}

#[test]
fn initial_modes() {
    let l = build_complex("cubic:2", "su2").unwrap();
    let spec = RunSpec { ic: IcMode::Projected, ..RunSpec::default() };
    let (s, res) = ymddr_cli::initial_state(&l, &spec).unwrap();
    assert!(res.unwrap() <= 1e-9 && s.lambda.is_some());
    let spec = RunSpec { ic: IcMode::Random, seed: 5, variant: Variant::Maxwell, ..RunSpec::default() };
    let (s1, _) = ymddr_cli::initial_state(&l, &spec).unwrap();
    let (s2, _) = ymddr_cli::initial_state(&l, &spec).unwrap();
    assert_eq!(s1, s2);
    assert!(s1.lambda.is_none() && s1.e.max_abs() > 0.0);
    assert_eq!(s1.a.values.len(), l.len(Space::Curl));
}

#[test]
fn binary_writes_csv_and_fails_cleanly() {
    let exe = env!("CARGO_BIN_EXE_ymddr");
    let out = Command::new(exe)
        .args(["solve", "--mesh", "cubic:2", "--scheme", "maxwell", "--theta", "0.5", "--steps", "10", "--ic", "zero"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().nth(5).unwrap().starts_with("4,"));
    let bad = Command::new(exe).args(["solve", "--mesh", "cubic:0"]).output().unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8(bad.stderr).unwrap().contains("error"));
}
