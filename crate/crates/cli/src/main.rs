use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use ymddr::Variant;
use ymddr_cli::{converge, solve, write_convergence, write_diagnostics, write_errors, IcMode, RunSpec, Steps};

#[derive(Parser)]
#[command(name = "ymddr", version, about = "Yang-Mills solver on polyhedral meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write the diagnostics CSV.
    Solve {
        /// `cubic:N` or a polymesh JSON file.
        #[arg(long, default_value = "cubic:2")]
        mesh: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Manufactured runs on a mesh sequence; writes the rate table.
    Converge {
        /// Meshes, repeated or comma separated.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        mesh: Vec<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value = "ym-constrained", value_parser = parse_variant)]
    scheme: Variant,
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long, default_value_t = 1.0)]
    tmax: f64,
    /// `auto` or a step count.
    #[arg(long, default_value = "auto", value_parser = parse_steps)]
    steps: Steps,
    #[arg(long, value_enum, default_value = "interpolate")]
    ic: IcMode,
    #[arg(long)]
    manufactured: bool,
    #[arg(long, default_value_t = 1e-6)]
    newton_tol: f64,
    #[arg(long, default_value_t = 50)]
    newton_max: usize,
    #[arg(long, default_value = "su2")]
    algebra: String,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: ymddr::SchemeError| e.to_string())
}

fn parse_steps(s: &str) -> Result<Steps, String> {
    s.parse().map_err(|e: ymddr_cli::CliError| e.to_string())
}

impl RunArgs {
    fn spec(&self, mesh: String, manufactured: bool) -> RunSpec {
        RunSpec {
            mesh,
            variant: self.scheme,
            theta: self.theta,
            tmax: self.tmax,
            steps: self.steps,
            ic: self.ic,
            manufactured,
            newton_tol: self.newton_tol,
            newton_max: self.newton_max,
            algebra: self.algebra.clone(),
            seed: self.seed,
        }
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

/// `diag.csv` -> `diag_errors.csv`.
fn errors_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_errors.csv"))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { mesh, run } => {
            let spec = run.spec(mesh, run.manufactured);
            let outcome = solve(&spec)?;
            write_diagnostics(sink(run.out.as_deref())?, &outcome.rows)?;
            if let Some((ea, ee)) = outcome.errors {
                let t = outcome.final_state.time;
                match run.out.as_deref() {
                    Some(p) => write_errors(sink(Some(&errors_path(p)))?, t, ea, ee)?,
                    None => eprintln!("t = {t}: err_A = {ea:e}, err_E = {ee:e}"),
                }
            }
        }
        Command::Converge { mesh, run } => {
            let rows = converge(&mesh, &run.spec(String::new(), true))?;
            write_convergence(sink(run.out.as_deref())?, &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
