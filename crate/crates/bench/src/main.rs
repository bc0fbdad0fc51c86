use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use locality_mpc::StrategyKind;
use locality_mpc_bench::commands::{breakdown, mean_by_strategy, run, sweep};
use locality_mpc_bench::config::{parse_config, SweepConfig, SweepParam};
use locality_mpc_bench::pool::{available_threads, RayonExecutor, WORKERS_ENV};
use locality_mpc_bench::report::{write_csv, CsvRow, PhaseTimesMs};
use locality_mpc_bench::scenario::Scenario;
use locality_mpc_bench::svg;
use locality_mpc_bench::verify::{all_passed, run_suite, VerifyOptions};

const EXIT_ARGS: u8 = 2;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "locality-mpc", version, about = "Localized MPC benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed loop per selected strategy and print JSON reports.
    Run(ScenarioArgs),
    /// Sweep N, T or d and write one CSV row per run.
    Sweep(ScenarioArgs),
    /// Per-phase wall times for each strategy, as CSV.
    Breakdown(ScenarioArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Number of subsystems.
    #[arg(long)]
    n: Option<usize>,
    /// MPC horizon T.
    #[arg(long)]
    t_horizon: Option<usize>,
    /// Locality radius.
    #[arg(long)]
    d: Option<usize>,
    /// Closed-loop steps.
    #[arg(long)]
    t_sim: Option<usize>,
    /// sequential, naive, padded, fused, patch-local, or all.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    coupling_radius: Option<usize>,
    /// Sweep configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render an SVG chart here.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Run the per-step fixed-point audit (run only).
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Reduced instance sets; finishes in well under a minute.
    #[arg(long)]
    quick: bool,
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
    /// Corrupt one converged entry before auditing it (the audit must fail).
    #[arg(long, hide = true)]
    inject_fault: bool,
}

struct Failure(u8, String);

fn arg_err(msg: impl Into<String>) -> Failure {
    Failure(EXIT_ARGS, msg.into())
}

fn parse_strategies(s: Option<&str>) -> Result<Option<Vec<StrategyKind>>, Failure> {
    match s {
        None => Ok(None),
        Some("all") => Ok(Some(StrategyKind::ALL.to_vec())),
        Some(s) => s
            .parse()
            .map(|k| Some(vec![k]))
            .map_err(|_| arg_err(format!("unknown strategy {s}"))),
    }
}

/// Config file (if any) overlaid with explicit flags. `run` defaults to the
/// sequential strategy, `sweep` and `breakdown` to all of them.
fn resolve(args: &ScenarioArgs, single: bool) -> Result<SweepConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| arg_err(format!("{}: {e}", path.display())))?;
            parse_config(&text).map_err(|e| arg_err(format!("{}: {e}", path.display())))?
        }
        None => SweepConfig::default(),
    };
    let b = &mut cfg.base;
    macro_rules! overlay {
        ($($field:ident => $target:expr),*) => {
            $(if let Some(v) = args.$field { $target = v; })*
        };
    }
    overlay!(n => b.n, t_horizon => b.t_horizon, d => b.d, t_sim => b.t_sim, seed => b.seed,
             rho => b.rho, eps => b.eps, max_iter => b.max_iter,
             coupling_radius => b.coupling_radius, workers => b.worker_count,
             repeats => cfg.repeats);
    if args.workers.is_none() && args.config.is_none() {
        cfg.base.worker_count = available_threads();
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(k) = parse_strategies(args.strategy.as_deref())? {
        cfg.strategies = k;
    } else if single && args.config.is_none() {
        cfg.strategies = vec![StrategyKind::Sequential];
    }
    if args.config.is_none() {
        // without a config file the sweep axis collapses to the given N
        cfg.values = vec![cfg.vary.value(&cfg.base)];
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &SweepConfig) -> Result<(), Failure> {
    let b = &cfg.base;
    if b.n == 0 {
        return Err(arg_err("--n must be at least 1"));
    }
    if b.t_horizon < 2 {
        return Err(arg_err("--t-horizon must be at least 2"));
    }
    if b.rho.is_nan() || b.eps.is_nan() || b.rho <= 0.0 || b.eps <= 0.0 {
        return Err(arg_err("--rho and --eps must be positive"));
    }
    if b.worker_count == 0 {
        return Err(arg_err("--workers must be at least 1"));
    }
    if cfg.repeats == 0 {
        return Err(arg_err("repeats must be at least 1"));
    }
    if cfg.values.is_empty() || cfg.strategies.is_empty() {
        return Err(arg_err("nothing to run"));
    }
    Ok(())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| arg_err(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_text(rows: &[CsvRow]) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).map_err(|e| Failure(1, e.to_string()))?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

fn cmd_run(args: &ScenarioArgs) -> Result<(), Failure> {
    let cfg = resolve(args, true)?;
    let sc: &Scenario = &cfg.base;
    let exec = RayonExecutor::new(sc.worker_count);
    let results = run(sc, &cfg.strategies, &exec, args.audit);
    let mut code = 0;
    let values: Vec<serde_json::Value> = results
        .iter()
        .map(|r| match r {
            Ok(rep) => serde_json::to_value(rep),
            Err(e) => {
                code = e.exit_code();
                serde_json::to_value(serde_json::json!({ "error": e }))
            }
        })
        .collect::<Result<_, _>>()
        .map_err(|e| Failure(1, e.to_string()))?;
    let doc = if values.len() == 1 {
        values.into_iter().next().unwrap()
    } else {
        serde_json::Value::Array(values)
    };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure(1, e.to_string()))? + "\n";
    write_out(cfg.out.as_deref(), &text)?;
    match code {
        0 => Ok(()),
        c => Err(Failure(c as u8, "run failed; see the error record".into())),
    }
}

fn cmd_sweep(args: &ScenarioArgs) -> Result<(), Failure> {
    let cfg = resolve(args, false)?;
    let exec = RayonExecutor::new(cfg.base.worker_count);
    let out = sweep(&cfg, &exec);
    write_out(cfg.out.as_deref(), &csv_text(&out.rows)?)?;
    for e in &out.errors {
        eprintln!("{}", serde_json::to_string(e).unwrap_or_default());
    }
    if let Some(path) = &args.svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = mean_by_strategy(&cfg, &out.reports)
            .into_iter()
            .map(|(k, pts)| (k.to_string(), pts.into_iter().map(|(x, y)| (x as f64, y)).collect()))
            .collect();
        let chart = svg::line_chart("mean time per MPC step", cfg.vary.name(), "ms", &series);
        write_out(Some(path), &chart)?;
    }
    Ok(())
}

fn cmd_breakdown(args: &ScenarioArgs) -> Result<(), Failure> {
    let cfg = resolve(args, false)?;
    let exec = RayonExecutor::new(cfg.base.worker_count);
    let out = breakdown(&cfg, &exec);
    write_out(cfg.out.as_deref(), &csv_text(&out.rows)?)?;
    for e in &out.errors {
        eprintln!("{}", serde_json::to_string(e).unwrap_or_default());
    }
    if let Some(path) = &args.svg {
        let bars: Vec<(String, Vec<f64>)> = out
            .entries
            .iter()
            .filter(|e| e.repeat == 0)
            .map(|e| {
                let label = match cfg.vary {
                    SweepParam::N => format!("{} N={}", e.scenario.strategy, e.scenario.n),
                    p => format!("{} {}={}", e.scenario.strategy, p.name(), p.value(&e.scenario)),
                };
                (label, e.phases.values().to_vec())
            })
            .collect();
        let chart = svg::stacked_bar_chart("phase breakdown", "ms", &PhaseTimesMs::NAMES, &bars);
        write_out(Some(path), &chart)?;
    }
    if let Some(e) = out.errors.first() {
        return Err(Failure(e.exit_code() as u8, e.message.clone()));
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let opts = VerifyOptions {
        quick: args.quick,
        inject_fault: args.inject_fault,
        workers: args.workers.unwrap_or_else(available_threads).max(1),
    };
    let outcomes = run_suite(&opts, |o| println!("{o}"));
    if all_passed(&outcomes) {
        Ok(())
    } else {
        Err(Failure(EXIT_VERIFY, "verification failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ARGS } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Breakdown(a) => cmd_breakdown(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
