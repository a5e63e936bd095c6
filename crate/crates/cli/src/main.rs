//! `hio` — plan model onloading and query offloading for a three-tier
//! multi-task inference system.
//!
//! Subcommands: `solve` one scenario with one method, `sweep` a parameter
//! grid to CSV, `oracle` for the guarded exhaustive search, `validate` a plan
//! against a scenario, and `gen` to emit scenario files. Exit code 0 on
//! success, 1 on validation or guard failures, 2 on usage errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hio_core::baselines::Method;
use hio_core::gen::{generate_scenario, motivating_preset, GeneratorConfig, MotivatingConfig, Preset};
use hio_core::model::{
    canonical_hash, load_scenario, save_scenario, validate_plan, Mode, Plan, Scenario,
    FEASIBILITY_REL_TOL,
};
use hio_core::objective::eval_objective;
use hio_core::sweep::{run_method, run_sweep_to, ExperimentResult, SweepSpec};

#[derive(Parser)]
#[command(
    name = "hio",
    version,
    about = "Joint model onloading and query offloading planner for hierarchical multi-task inference"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Plain,
    Batching,
}

#[derive(Args)]
struct SolveArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Method tag: j3o, baj3o, oracle, greedy_ao, opt_ao, rand_ao, full_local.
    #[arg(long)]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the resulting plan here (flat key/value JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override the scenario's mode before solving.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Enumeration guard for oracle-backed methods.
    #[arg(long, default_value_t = 200_000)]
    limit: u64,
    /// Write the optimizer trace here (line-delimited JSON).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario with one method; prints a result row.
    Solve(SolveArgs),
    /// Run a sweep specification; streams CSV rows.
    Sweep {
        /// Sweep specification file (TOML).
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive onloading enumeration with the LP per configuration.
    Oracle {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 200_000)]
        limit: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Check a plan against a scenario and print per-constraint slacks.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Emit a scenario file from a generator config or preset flags.
    Gen {
        /// Generator configuration file (TOML); overrides the flag-based path.
        #[arg(long)]
        config: Option<PathBuf>,
        /// taskonomy | domainnet | cityscape | custom | motivating
        #[arg(long, default_value = "custom")]
        preset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        lambda_tot: Option<f64>,
        #[arg(long)]
        clients: Option<usize>,
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long)]
        models: Option<usize>,
        #[arg(long)]
        tasks: Option<usize>,
        /// Batching window in seconds; switches the scenario to batching mode.
        #[arg(long)]
        batch_interval: Option<f64>,
        /// Task-A traffic share for the motivating preset.
        #[arg(long, default_value_t = 0.5)]
        p_a: f64,
        /// Concentrate task-B traffic on one hot client (motivating preset).
        #[arg(long)]
        hot_client: bool,
        /// Setup cost of the task-A specialist (motivating preset, batching).
        #[arg(long)]
        nu_a: Option<f64>,
        /// Edge uplink budget as a fraction of demand (motivating preset).
        #[arg(long, default_value_t = 1.0)]
        uplink_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Solve(args) => solve(args),
        Command::Sweep { spec, out } => sweep(&spec, out.as_deref()),
        Command::Oracle {
            scenario,
            limit,
            out,
            format,
            mode,
        } => solve(SolveArgs {
            scenario,
            method: Method::MinlpOracle,
            seed: 0,
            out,
            format,
            mode,
            limit,
            trace: None,
        }),
        Command::Validate {
            scenario,
            plan,
            mode,
        } => validate(&scenario, &plan, mode),
        Command::Gen {
            config,
            preset,
            seed,
            lambda_tot,
            clients,
            edges,
            models,
            tasks,
            batch_interval,
            p_a,
            hot_client,
            nu_a,
            uplink_scale,
            out,
        } => {
            let scenario = if let Some(path) = config {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let cfg: GeneratorConfig = toml::from_str(&text).context("parsing generator config")?;
                generate_scenario(&cfg)?
            } else if preset == "motivating" {
                motivating_preset(&MotivatingConfig {
                    task_a_share: p_a,
                    hot_client,
                    setup_cost_a: nu_a,
                    uplink_scale,
                    batch_interval: batch_interval.unwrap_or(0.5),
                })?
            } else {
                let preset = match preset.as_str() {
                    "taskonomy" => Preset::Taskonomy,
                    "domainnet" => Preset::Domainnet,
                    "cityscape" => Preset::Cityscape,
                    "custom" => Preset::Custom,
                    other => bail!("unknown preset {other:?}"),
                };
                let mut cfg = GeneratorConfig::new(preset, seed);
                if let Some(l) = lambda_tot {
                    cfg.lambda_total = l;
                }
                cfg.clients = clients;
                cfg.edges = edges;
                cfg.models = models;
                cfg.tasks = tasks;
                cfg.batch_interval = batch_interval;
                generate_scenario(&cfg)?
            };
            save_scenario(&scenario, &out)
                .with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote scenario {} ({})", out.display(), canonical_hash(&scenario));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_with_mode(path: &Path, mode: Option<ModeArg>) -> Result<Scenario> {
    let mut scenario =
        load_scenario(path).with_context(|| format!("loading {}", path.display()))?;
    match mode {
        None => {}
        Some(ModeArg::Plain) => {
            scenario.mode = Mode::Plain;
            scenario.batching = None;
        }
        Some(ModeArg::Batching) => {
            if scenario.batching.is_none() {
                bail!("cannot switch to batching mode: the scenario has no [batching] section");
            }
            scenario.mode = Mode::Batching;
        }
    }
    scenario.validate()?;
    Ok(scenario)
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let scenario = load_with_mode(&args.scenario, args.mode)?;
    let started = Instant::now();
    let outcome = run_method(&scenario, args.method, args.seed, args.limit);
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    let (plan, trace, _) = match outcome {
        Ok(v) => v,
        Err(err) => {
            eprintln!("{err}");
            return Ok(ExitCode::FAILURE);
        }
    };

    let breakdown = eval_objective(&scenario, &plan)?;
    let report = validate_plan(&scenario, &plan)?;
    let row = ExperimentResult {
        scenario_digest: canonical_hash(&scenario),
        method: args.method,
        seed: args.seed,
        sweep_param: "none".into(),
        sweep_value: 0.0,
        objective: breakdown.total,
        objective_kind: "acc".into(),
        runtime_ms,
        max_violation: report.max_relative_violation(),
        outer_iters: trace.as_ref().map_or(0, |t| t.outer_iterations() as u64),
    };
    match args.format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(std::io::stdout());
            writer.serialize(&row)?;
            writer.flush()?;
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&row)?),
    }

    if let Some(path) = &args.out {
        std::fs::write(path, plan.to_flat_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let (Some(path), Some(trace)) = (&args.trace, &trace) {
        std::fs::write(path, trace.to_jsonl())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if !report.is_feasible(FEASIBILITY_REL_TOL) {
        eprintln!("returned plan violates constraints");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(spec_path: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(spec_path)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let spec = SweepSpec::from_toml(&text)?;
    let results = match out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            run_sweep_to(&spec, file)?
        }
        None => run_sweep_to(&spec, std::io::stdout())?,
    };
    let errors = results
        .iter()
        .filter(|r| r.objective_kind.starts_with("error"))
        .count();
    if errors > 0 {
        eprintln!("{errors} of {} rows failed", results.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(scenario_path: &Path, plan_path: &Path, mode: Option<ModeArg>) -> Result<ExitCode> {
    let scenario = load_with_mode(scenario_path, mode)?;
    let text = std::fs::read_to_string(plan_path)
        .with_context(|| format!("reading {}", plan_path.display()))?;
    let plan = Plan::from_flat_json(&scenario, &text)?;
    let report = validate_plan(&scenario, &plan)?;

    let mut stdout = std::io::stdout().lock();
    for slack in &report.slacks {
        writeln!(
            stdout,
            "{:<28} slack {: >14.6e}  scale {: >12.4e}  {}",
            slack.constraint.to_string(),
            slack.slack,
            slack.scale,
            if slack.is_violated(FEASIBILITY_REL_TOL) {
                "VIOLATED"
            } else {
                "ok"
            }
        )?;
    }
    let f = eval_objective(&scenario, &plan)?;
    writeln!(stdout, "objective {:.9}", f.total)?;
    if report.is_feasible(FEASIBILITY_REL_TOL) {
        writeln!(stdout, "plan is feasible")?;
        Ok(ExitCode::SUCCESS)
    } else {
        writeln!(stdout, "plan violates constraints")?;
        Ok(ExitCode::FAILURE)
    }
}
