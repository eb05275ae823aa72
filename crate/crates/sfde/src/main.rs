use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sfde::bench::{run_bench, soe_check, BenchConfig};
use sfde::config::{parse_method, StudyArgs};
use sfde::gridfile::{read_grid, write_grid};
use sfde::study::{run_compare, run_convergence, solve, solve_on};
use sfde::table::{bench_csv, compare_csv, convergence_csv, fmt_sci, soe_csv, solution_csv, write_text};
use sfde::{HarnessError, Result};
use sfde_core::march::Method;

/// Fast fractional block-centered finite differences for two-sided
/// space-fractional diffusion.
#[derive(Debug, Parser)]
#[command(name = "sfde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem at one resolution and print its errors.
    Solve {
        #[command(flatten)]
        study: StudyArgs,
        /// Read the grid from this file instead of generating it.
        #[arg(long = "grid-file")]
        grid_file: Option<PathBuf>,
        /// Write the grid that was used to this file.
        #[arg(long = "write-grid")]
        write_grid: Option<PathBuf>,
    },
    /// Errors and observed orders over a list of M.
    Convergence {
        #[command(flatten)]
        study: StudyArgs,
    },
    /// Run several methods on identical inputs.
    Compare {
        #[command(flatten)]
        study: StudyArgs,
        /// Methods to run; the first is the reference for max_diff.
        #[arg(long, value_delimiter = ',', default_value = "dense-ge,dense-bicgstab,fast-bicgstab")]
        methods: Vec<String>,
    },
    /// Build an SOE approximation of x^(1-alpha) and dump its nodes.
    SoeCheck(SoeArgs),
    /// Time fast and dense operator applications over a list of M.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SoeArgs {
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long = "soe-eps", default_value_t = 1e-10)]
    soe_eps: f64,
    /// Smallest distance the approximation must cover.
    #[arg(long, default_value_t = 1e-4)]
    dx: f64,
    /// Largest distance the approximation must cover.
    #[arg(long = "x-max", default_value_t = 2.0)]
    x_max: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long = "soe-eps", default_value_t = 1e-10)]
    soe_eps: f64,
    #[arg(long = "M", value_delimiter = ',', default_value = "1024,2048,4096")]
    m: Vec<usize>,
    /// Largest M for which the dense matvec is timed.
    #[arg(long = "dense-max-M", default_value_t = 4096)]
    dense_max_m: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Done,
    NotConverged,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_text(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Solve {
            study,
            grid_file,
            write_grid: grid_out,
        } => {
            let args = study.resolve()?;
            let st = args.study()?;
            let s = match grid_file {
                Some(path) => solve_on(&st, st.method, read_grid(path)?)?,
                None => solve(&st, st.method, args.single_cells()?)?,
            };
            if let Some(path) = grid_out {
                write_grid(&s.grid, path)?;
            }
            let p = st.manufactured()?;
            let t = p.spec.final_time;
            let exact = p.spec.exact_u.as_ref().map(|f| move |x| f(x, t));
            let exact_ref = exact.as_ref().map(|f| f as &dyn Fn(f64) -> f64);
            eprintln!(
                "{} M={} N={} method={} error_u={} error_p={} avg_iters={:.2} nexp={}",
                st.problem,
                s.grid.cells(),
                s.steps,
                st.method.name(),
                fmt_sci(s.error_u),
                fmt_sci(s.error_p),
                s.result.average_iterations(),
                s.result.nexp.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
            );
            emit(args.out.as_deref(), &solution_csv(s.grid.centers(), &s.result.u_final, exact_ref))?;
            Ok(if s.result.converged() { Outcome::Done } else { Outcome::NotConverged })
        }
        Command::Convergence { study } => {
            let args = study.resolve()?;
            let st = args.study()?;
            let rows = run_convergence(&st, args.cells()?)?;
            emit(args.out.as_deref(), &convergence_csv(&rows))?;
            Ok(if rows.iter().all(|r| r.converged) { Outcome::Done } else { Outcome::NotConverged })
        }
        Command::Compare { study, methods } => {
            let args = study.resolve()?;
            let st = args.study()?;
            let methods = methods.iter().map(|m| parse_method(m)).collect::<Result<Vec<Method>>>()?;
            let rows = run_compare(&st, args.single_cells()?, &methods)?;
            emit(args.out.as_deref(), &compare_csv(&rows))?;
            Ok(if rows.iter().all(|r| r.converged) { Outcome::Done } else { Outcome::NotConverged })
        }
        Command::SoeCheck(a) => {
            let c = soe_check(a.alpha, a.soe_eps, a.dx, a.x_max)?;
            eprintln!(
                "nexp={} max_error={} eps={} elapsed_ms={:.1}",
                c.soe.len(),
                fmt_sci(c.max_error),
                fmt_sci(a.soe_eps),
                c.elapsed.as_secs_f64() * 1e3
            );
            emit(a.out.as_deref(), &soe_csv(&c.soe))?;
            Ok(Outcome::Done)
        }
        Command::Bench(a) => {
            let rows = run_bench(&BenchConfig {
                alpha: a.alpha,
                gamma: a.gamma,
                soe_eps: a.soe_eps,
                ms: a.m,
                dense_max_m: a.dense_max_m,
                reps: a.reps,
            })?;
            emit(a.out.as_deref(), &bench_csv(&rows))?;
            Ok(Outcome::Done)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => {
            eprintln!("error: BiCGSTAB did not reach the tolerance on every time level");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
