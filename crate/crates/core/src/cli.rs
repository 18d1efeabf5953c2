//! The `cot` command-line tool.
//!
//! Exit status: 0 on success, 1 on invalid input or a failed check, 2 on a
//! numerical failure, 3 when a solve stops without converging. Errors are
//! printed to standard error as one JSON object.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::feasibility::{check_feasibility_exact, Feasibility};
use crate::io::{read_instance_file, read_plan_file, write_plan, PlanFormat, PlanSummary};
use crate::problem::ProblemInstance;
use crate::scenarios::{generate_ev_instance, EvScenarioConfig};
use crate::solvers::{solve, write_trace_csv, Algorithm, SolveReport, SolverConfig, Termination};
use crate::verify::{check_kkt, check_positivity, oracle_minimize, OptimalityReport};

#[derive(Debug, Parser)]
#[command(
    name = "cot",
    version,
    about = "Entropic transport plans with forbidden routes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Override the instance's marginal-relaxation constant.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Generate and solve EV-charging instances.
    SimulateEv {
        #[arg(long, default_value_t = 10_000)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Seed of the first run; run k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 1.99)]
        gamma0: f64,
        #[arg(long, default_value_t = 1.005)]
        gamma: f64,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check a plan file against the optimality conditions.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Brute-force minimizer for tiny instances.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = FormatArg::Sparse)]
        format: FormatArg,
    },
    /// Whether the marginals can be matched exactly under the zero pattern.
    Feasibility {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Plan file; standard output when omitted (solve only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trace CSV file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Sparse)]
    format: FormatArg,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Alg1)]
    algorithm: AlgorithmArg,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol_scaling: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol_delta: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgorithmArg {
    Alg1,
    Alg2,
    Sk,
    Chizat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Dense,
    Sparse,
}

impl From<FormatArg> for PlanFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Dense => PlanFormat::Dense,
            FormatArg::Sparse => PlanFormat::Sparse,
        }
    }
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            algorithm: match self.algorithm {
                AlgorithmArg::Alg1 => Algorithm::Alg1,
                AlgorithmArg::Alg2 => Algorithm::Alg2,
                AlgorithmArg::Sk => Algorithm::Sk,
                AlgorithmArg::Chizat => Algorithm::Chizat,
            },
            tol_scaling: self.tol_scaling,
            tol_delta: self.tol_delta,
            max_iter: self.max_iter,
            gamma1: self.gamma1,
            gamma2: self.gamma2,
            trace_every: 1,
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            1
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Invalid(_) => "invalid_instance",
        Error::KernelUnderflow { .. } => "kernel_underflow",
        Error::UnbalancedInput { .. } => "unbalanced_input",
        Error::UnsupportedPattern => "unsupported_pattern",
        Error::UnsupportedIdeal => "unsupported_ideal",
        Error::Domain(_) => "domain",
        Error::PatternMismatch => "pattern_mismatch",
        Error::TooLarge(_) => "too_large",
        Error::PatternSamplingFailed { .. } => "pattern_sampling_failed",
        Error::Format(_) | Error::Json(_) | Error::Csv(_) => "format",
        Error::Io(_) => "io",
    }
}

fn report_error(e: &Error) {
    let mut value = json!({ "error": error_kind(e), "message": e.to_string() });
    if let Error::Invalid(inv) = e {
        value["issues"] = inv.0.iter().map(|i| json!(i.to_string())).collect();
    }
    eprintln!("{value}");
}

fn exit_code(t: Termination) -> i32 {
    match t {
        Termination::Converged => 0,
        Termination::NumericalFailure => 2,
        Termination::MaxIterations | Termination::SuspectedInfeasible => 3,
    }
}

fn termination_line(report: &SolveReport) -> serde_json::Value {
    let s = PlanSummary::from_report(report);
    serde_json::to_value(s).expect("summary serializes")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_outputs(
    report: &SolveReport,
    out: Option<&Path>,
    trace: Option<&Path>,
    format: PlanFormat,
) -> Result<()> {
    let summary = PlanSummary::from_report(report);
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write_plan(&report.plan, &report.v_star, Some(&summary), format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            write_plan(
                &report.plan,
                &report.v_star,
                Some(&summary),
                format,
                stdout.lock(),
            )?;
        }
    }
    if let Some(path) = trace {
        let mut w = create(path)?;
        write_trace_csv(&report.trace, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// `trace.csv` with seed 7 becomes `trace_seed7.csv`.
fn per_run_path(path: &Path, seed: u64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_seed{seed}.{}", ext.to_string_lossy()),
        None => format!("{stem}_seed{seed}"),
    };
    path.with_file_name(name)
}

fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Solve {
            instance,
            output,
            solver,
            gamma,
        } => {
            let mut inst = read_instance_file(instance)?;
            if let Some(g) = gamma {
                inst = inst.with_gamma(*g)?;
            }
            let report = solve(&inst, &solver.config())?;
            write_outputs(
                &report,
                output.out.as_deref(),
                output.trace.as_deref(),
                output.format.into(),
            )?;
            if output.out.is_some() {
                println!("{}", termination_line(&report));
            }
            Ok(exit_code(report.termination))
        }
        Command::SimulateEv {
            m,
            n,
            seed,
            runs,
            gamma0,
            gamma,
            output,
            solver,
        } => simulate_ev(
            *m,
            *n,
            *seed,
            *runs,
            *gamma0,
            *gamma,
            output,
            &solver.config(),
        ),
        Command::Check {
            instance,
            plan,
            tol,
        } => {
            let inst = read_instance_file(instance)?;
            let data = read_plan_file(plan)?;
            let report = check_plan(&inst, &data)?;
            println!("{}", report_json(&report, *tol));
            Ok(if report.passes(*tol) { 0 } else { 1 })
        }
        Command::Oracle {
            instance,
            out,
            format,
        } => {
            let inst = read_instance_file(instance)?;
            let plan = oracle_minimize(&inst)?;
            let v = plan.col_sums();
            match out {
                Some(path) => {
                    let mut w = create(path)?;
                    write_plan(&plan, &v, None, (*format).into(), &mut w)?;
                    w.flush()?;
                }
                None => write_plan(&plan, &v, None, (*format).into(), io::stdout().lock())?,
            }
            Ok(0)
        }
        Command::Feasibility { instance } => {
            let inst = read_instance_file(instance)?;
            let f = check_feasibility_exact(&inst)?;
            let name = match f {
                Feasibility::Feasible => "feasible",
                Feasibility::Infeasible => "infeasible",
            };
            println!("{}", json!({ "feasibility": name }));
            Ok(0)
        }
    }
}

fn check_plan(inst: &ProblemInstance, data: &crate::io::PlanData) -> Result<OptimalityReport> {
    let full = data.full_plan();
    let pattern_ok = full
        .as_ref()
        .is_ok_and(|p| check_positivity(p, inst.pattern()));
    let plan = data.to_transport_plan(inst)?;
    let mut report = check_kkt(inst, &plan, &data.v_star)?;
    report.positivity_ok = report.positivity_ok && pattern_ok;
    Ok(report)
}

fn report_json(r: &OptimalityReport, tol: f64) -> serde_json::Value {
    json!({
        "fixed_point_residual": r.fixed_point_residual,
        "row_residual": r.row_residual,
        "column_residual": r.column_residual,
        "balance_residual": r.balance_residual,
        "min_support_entry": r.min_support_entry,
        "min_v_star": r.min_v_star,
        "positivity_ok": r.positivity_ok,
        "components": r.components,
        "tol": tol,
        "violations": r.violations(tol),
    })
}

/// Summary line and exit status of one simulated run.
type RunOutcome = (serde_json::Value, i32);

#[allow(clippy::too_many_arguments)]
fn simulate_ev(
    m: usize,
    n: usize,
    seed: u64,
    runs: usize,
    gamma0: f64,
    gamma: f64,
    output: &OutputArgs,
    cfg: &SolverConfig,
) -> Result<i32> {
    let runs = runs.max(1);
    let seeds: Vec<u64> = (0..runs as u64).map(|k| seed + k).collect();
    let path_for = |p: &Option<PathBuf>, s: u64| {
        p.as_deref().map(|p| {
            if runs == 1 {
                p.to_path_buf()
            } else {
                per_run_path(p, s)
            }
        })
    };
    let run_one = |s: u64| -> Result<RunOutcome> {
        let ev = EvScenarioConfig {
            m,
            n,
            seed: s,
            gamma0,
            gamma,
        };
        let inst = generate_ev_instance(&ev)?;
        let report = solve(&inst, cfg)?;
        if let Some(path) = path_for(&output.out, s) {
            let mut w = create(&path)?;
            let summary = PlanSummary::from_report(&report);
            write_plan(
                &report.plan,
                &report.v_star,
                Some(&summary),
                output.format.into(),
                &mut w,
            )?;
            w.flush()?;
        }
        if let Some(path) = path_for(&output.trace, s) {
            let mut w = create(&path)?;
            write_trace_csv(&report.trace, &mut w)?;
            w.flush()?;
        }
        let mut line = termination_line(&report);
        line["seed"] = json!(s);
        Ok((line, exit_code(report.termination)))
    };

    let workers = std::thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(runs);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunOutcome>>>> =
        Mutex::new((0..runs).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= runs {
                    break;
                }
                let r = run_one(seeds[k]);
                results.lock().expect("no worker panics")[k] = Some(r);
            });
        }
    });

    let mut code = 0;
    for r in results.into_inner().expect("no worker panics") {
        let (line, c) = r.expect("every run finished")?;
        println!("{line}");
        code = code.max(c);
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_run_paths() {
        assert_eq!(
            per_run_path(Path::new("out/trace.csv"), 7),
            PathBuf::from("out/trace_seed7.csv")
        );
        assert_eq!(
            per_run_path(Path::new("plan"), 0),
            PathBuf::from("plan_seed0")
        );
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "cot",
            "solve",
            "--instance",
            "a.json",
            "--algorithm",
            "sk",
            "--format",
            "dense",
            "--max-iter",
            "10",
            "--gamma",
            "2",
        ])
        .unwrap();
        assert!(matches!(
            cli.command,
            Command::Solve {
                gamma: Some(2.0),
                ..
            }
        ));
        assert!(Cli::try_parse_from(["cot", "solve"]).is_err());
    }
}
