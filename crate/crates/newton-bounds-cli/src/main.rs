//! Command-line front end: bound queries, the bound table, curve data for
//! plotting, threshold tuning, and path-following runs.

mod table;

use clap::{Args, Parser, Subcommand, ValueEnum};
use newton_bounds::bvp::{Shooter, StepQuery};
use newton_bounds::critical::critical_curve_samples_in;
use newton_bounds::damping::integrate_sigma;
use newton_bounds::onedim::{dispersion_curve, switching_curve};
use newton_bounds::pathfollow::{
    make_problem, run, tune, IterationRecord, ProblemKind, ProblemSize, Setup, TunePolicy,
};
use newton_bounds::{Error, Result};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "newton-bounds", version, about = "Worst-case Newton-step decrement bounds and path-following experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Write data here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case decrement after one damped Newton step, as JSON.
    Bound {
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Bound table over a decrement grid, as CSV.
    Table {
        /// Comma-separated decrement values; defaults to the standard grid.
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Curve data for external plotting, as CSV.
    Curves {
        which: CurveKind,
        /// Initial decrement (sigma curve only).
        #[arg(long, default_value_t = 0.4)]
        a: f64,
        /// Number of sample points where the curve is sampled on a grid.
        #[arg(long, default_value_t = 120)]
        n: usize,
        #[command(flatten)]
        out: OutArg,
    },
    /// Tune the neighbourhood threshold for a step policy, as JSON.
    Tune {
        #[arg(long)]
        policy: PolicyArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run short-step path following on a generated problem; log as CSV/JSON.
    Solve {
        #[arg(long)]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Setup name: traditional-full, tight-full, traditional-damped,
        /// tight-optimal.
        #[arg(long)]
        setup: String,
        /// Variables (lp) or matrix order (sdp).
        #[arg(long)]
        size: Option<usize>,
        /// Inequality rows (lp) or equality constraints (sdp).
        #[arg(long)]
        extra: Option<usize>,
        /// Stop once tau/tau0 reaches this factor.
        #[arg(long, default_value_t = 1e4)]
        tau_factor: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        out: OutArg,
    },
    /// Emit a generated problem instance, as JSON.
    Problem {
        #[arg(long)]
        kind: KindArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        size: Option<usize>,
        #[arg(long)]
        extra: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveKind {
    Critical,
    Sigma,
    Bounds,
    Synthesis1d,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Full,
    Optimal,
    ClassicalFull,
    ClassicalDamped,
}

impl From<PolicyArg> for TunePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Full => TunePolicy::FullStep,
            PolicyArg::Optimal => TunePolicy::OptimalDamping,
            PolicyArg::ClassicalFull => TunePolicy::ClassicalFull,
            PolicyArg::ClassicalDamped => TunePolicy::ClassicalDamped,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lp,
    Sdp,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", render_error(&e));
            match e {
                Error::Domain(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn render_error(e: &Error) -> String {
    #[derive(Serialize)]
    struct ErrOut<'a> {
        error: &'a str,
        detail: String,
    }
    let kind = match e {
        Error::Domain(_) => "usage",
        _ => "numerical",
    };
    serde_json::to_string(&ErrOut {
        error: kind,
        detail: e.to_string(),
    })
    .unwrap()
}

fn emit(out: &OutArg, data: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, data)
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{data}");
            Ok(())
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Bound { a, gamma, out } => cmd_bound(a, gamma, &out),
        Command::Table { grid, out } => cmd_table(grid.as_deref(), &out),
        Command::Curves { which, a, n, out } => cmd_curves(which, a, n, &out),
        Command::Tune { policy, out } => {
            let result = tune(policy.into())?;
            emit(&out, &(serde_json::to_string_pretty(&result).unwrap() + "\n"))
        }
        Command::Solve {
            kind,
            seed,
            setup,
            size,
            extra,
            tau_factor,
            format,
            out,
        } => cmd_solve(kind, seed, &setup, size, extra, tau_factor, format, &out),
        Command::Problem {
            kind,
            seed,
            size,
            extra,
            out,
        } => cmd_problem(kind, seed, size, extra, &out),
    }
}

fn cmd_bound(a: f64, gamma: f64, out: &OutArg) -> Result<()> {
    #[derive(Serialize)]
    struct BoundOut {
        a: f64,
        gamma: f64,
        lambda_out: f64,
        regime: newton_bounds::Regime,
        shoot_residual: f64,
    }
    let q = StepQuery::new(a, gamma)?;
    let r = Shooter::default().solve(&q)?;
    let doc = BoundOut {
        a,
        gamma,
        lambda_out: r.lambda_out,
        regime: r.regime,
        shoot_residual: r.shoot_residual,
    };
    emit(out, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))
}

fn cmd_table(grid: Option<&str>, out: &OutArg) -> Result<()> {
    let grid = match grid {
        Some(s) => table::parse_grid(s)?,
        None => table::default_grid(),
    };
    let (rows, failures) = table::build(&grid);
    for (a, e) in &failures {
        eprintln!("row {a}: {e}");
    }
    emit(out, &table::to_csv(&rows))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64)
        .collect()
}

fn cmd_curves(which: CurveKind, a: f64, n: usize, out: &OutArg) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 samples, got {n}")));
    }
    let data = match which {
        CurveKind::Critical => {
            // 120 points over [-6, -0.05] put c = -1 (the focal-limit corner
            // of the curve) exactly on the grid.
            let pts = critical_curve_samples_in(-6.0, -0.05, n)?;
            let mut s = String::from("t,y1,c\n");
            for p in pts {
                s.push_str(&format!("{},{},{}\n", p.t_crit, p.y1, p.c));
            }
            s
        }
        CurveKind::Sigma => {
            let sigma = integrate_sigma(a, 1e-11)?;
            let mut s = String::from("y1,y2\n");
            for (y1, y2) in &sigma.samples {
                s.push_str(&format!("{y1},{y2}\n"));
            }
            s
        }
        CurveKind::Bounds => {
            let grid = linspace(0.02, 0.98, n);
            let (rows, _) = table::build(&grid);
            table::to_csv(&rows)
        }
        CurveKind::Synthesis1d => {
            let mut s = String::from("t,dispersion,switching\n");
            for t in linspace(-1.0, 0.0, n) {
                s.push_str(&format!(
                    "{},{},{}\n",
                    t,
                    dispersion_curve(t),
                    switching_curve(t)
                ));
            }
            s
        }
    };
    emit(out, &data)
}

fn problem_size(kind: KindArg, size: Option<usize>, extra: Option<usize>) -> (ProblemKind, ProblemSize) {
    match kind {
        KindArg::Lp => (
            ProblemKind::LogBarrierLp,
            ProblemSize {
                primary: size.unwrap_or(8),
                secondary: extra.unwrap_or(20),
            },
        ),
        KindArg::Sdp => (
            ProblemKind::LogDetSdp,
            ProblemSize {
                primary: size.unwrap_or(15),
                secondary: extra.unwrap_or(30),
            },
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    kind: KindArg,
    seed: u64,
    setup: &str,
    size: Option<usize>,
    extra: Option<usize>,
    tau_factor: f64,
    format: Format,
    out: &OutArg,
) -> Result<()> {
    let setup = Setup::from_name(setup)
        .ok_or_else(|| Error::Domain(format!("unknown setup: {setup}")))?;
    let factor_ok = tau_factor.is_finite() && tau_factor > 1.0;
    if !factor_ok {
        return Err(Error::Domain(format!(
            "tau factor must exceed 1, got {tau_factor}"
        )));
    }
    let (pk, ps) = problem_size(kind, size, extra);
    let problem = make_problem(pk, seed, ps)?;
    let config = setup.config(problem.tau0, problem.tau0 * tau_factor);
    let log = run(problem.oracle.as_oracle(), &problem.c, &problem.x0, &config)?;
    let data = match format {
        Format::Csv => log_to_csv(&log),
        Format::Json => serde_json::to_string_pretty(&log).unwrap() + "\n",
    };
    emit(out, &data)
}

fn log_to_csv(log: &[IterationRecord]) -> String {
    let mut s = String::from("k,tau,rho_before,rho_after,gamma_used\n");
    for r in log {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.k, r.tau, r.rho_before, r.rho_after, r.gamma_used
        ));
    }
    s
}

fn cmd_problem(
    kind: KindArg,
    seed: u64,
    size: Option<usize>,
    extra: Option<usize>,
    out: &OutArg,
) -> Result<()> {
    #[derive(Serialize)]
    struct ProblemOut {
        kind: ProblemKind,
        seed: u64,
        dim: usize,
        tau0: f64,
        c: Vec<f64>,
        x0: Vec<f64>,
    }
    let (pk, ps) = problem_size(kind, size, extra);
    let p = make_problem(pk, seed, ps)?;
    let doc = ProblemOut {
        kind: p.kind,
        seed: p.seed,
        dim: p.c.len(),
        tau0: p.tau0,
        c: p.c.iter().copied().collect(),
        x0: p.x0.iter().copied().collect(),
    };
    emit(out, &(serde_json::to_string_pretty(&doc).unwrap() + "\n"))
}
