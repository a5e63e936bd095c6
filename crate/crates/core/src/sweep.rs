//! Experiment sweeps: a parameter grid crossed with seeds and methods,
//! results streamed to CSV in a deterministic order.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    full_local, greedy_ao, minlp_oracle, opt_ao, rand_ao, BaselineError, Method,
};
use crate::gen::{
    generate_scenario, motivating_preset, GenError, GeneratorConfig, MotivatingConfig, Preset,
};
use crate::j3o::{baj3o, j3o, AoConfig, AoTrace};
use crate::model::{canonical_hash, validate_plan, Plan, Scenario, FEASIBILITY_REL_TOL};
use crate::objective::eval_objective;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

/// The swept knob. Uplink/compute scales and the batch window apply to
/// generated scenarios; the task share and specialist setup cost apply to
/// the two-task preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "chi_kappa_e")]
    EdgeUplinkScale,
    #[serde(rename = "chi_beta")]
    ComputeScale,
    #[serde(rename = "t_b")]
    BatchInterval,
    #[serde(rename = "p_a")]
    TaskAShare,
    #[serde(rename = "nu_m")]
    SetupCostA,
}

impl SweepParam {
    pub fn tag(&self) -> &'static str {
        match self {
            SweepParam::EdgeUplinkScale => "chi_kappa_e",
            SweepParam::ComputeScale => "chi_beta",
            SweepParam::BatchInterval => "t_b",
            SweepParam::TaskAShare => "p_a",
            SweepParam::SetupCostA => "nu_m",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepBase {
    Generator(GeneratorConfig),
    Motivating(MotivatingConfig),
}

fn default_oracle_limit() -> u64 {
    200_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    /// Seeds per grid point, `0..seeds`.
    pub seeds: u64,
    pub methods: Vec<Method>,
    pub base: SweepBase,
    #[serde(default = "default_oracle_limit")]
    pub oracle_limit: u64,
}

impl SweepSpec {
    pub fn from_toml(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec = toml::from_str(text).map_err(|e| SweepError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.grid.is_empty() {
            return Err(SweepError::InvalidSpec("grid must be non-empty".into()));
        }
        if self.seeds == 0 {
            return Err(SweepError::InvalidSpec("need at least one seed".into()));
        }
        if self.methods.is_empty() {
            return Err(SweepError::InvalidSpec("methods must be non-empty".into()));
        }
        let ok = match (&self.base, self.param) {
            (SweepBase::Generator(_), SweepParam::EdgeUplinkScale)
            | (SweepBase::Generator(_), SweepParam::ComputeScale)
            | (SweepBase::Generator(_), SweepParam::BatchInterval)
            | (SweepBase::Motivating(_), SweepParam::EdgeUplinkScale)
            | (SweepBase::Motivating(_), SweepParam::BatchInterval)
            | (SweepBase::Motivating(_), SweepParam::TaskAShare)
            | (SweepBase::Motivating(_), SweepParam::SetupCostA) => true,
            _ => false,
        };
        if !ok {
            return Err(SweepError::InvalidSpec(format!(
                "parameter {} does not apply to this base",
                self.param.tag()
            )));
        }
        Ok(())
    }

    fn scenario_for(&self, value: f64, seed: u64) -> Result<Scenario, GenError> {
        match &self.base {
            SweepBase::Generator(base) => {
                let mut cfg = base.clone();
                cfg.seed = base.seed ^ seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                match self.param {
                    SweepParam::EdgeUplinkScale => cfg.edge_uplink_scale = value,
                    SweepParam::ComputeScale => cfg.compute_scale = value,
                    SweepParam::BatchInterval => cfg.batch_interval = Some(value),
                    _ => unreachable!("validated spec"),
                }
                generate_scenario(&cfg)
            }
            SweepBase::Motivating(base) => {
                let mut cfg = base.clone();
                match self.param {
                    SweepParam::EdgeUplinkScale => cfg.uplink_scale = value,
                    SweepParam::BatchInterval => cfg.batch_interval = value,
                    SweepParam::TaskAShare => cfg.task_a_share = value,
                    SweepParam::SetupCostA => cfg.setup_cost_a = Some(value),
                    _ => unreachable!("validated spec"),
                }
                motivating_preset(&cfg)
            }
        }
    }

    /// Loss-metric presets report `1 - F`; everything else reports accuracy.
    fn objective_kind(&self) -> &'static str {
        match &self.base {
            SweepBase::Generator(cfg) => match cfg.preset {
                Preset::Taskonomy | Preset::Cityscape => "loss",
                Preset::Domainnet | Preset::Custom => "acc",
            },
            SweepBase::Motivating(_) => "acc",
        }
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub scenario_digest: String,
    pub method: Method,
    pub seed: u64,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub objective: f64,
    /// `acc`, `loss`, or `error` for rows whose run failed.
    pub objective_kind: String,
    pub runtime_ms: f64,
    pub max_violation: f64,
    pub outer_iters: u64,
}

/// Builds the worker pool honoring the `HIO_THREADS` cap.
pub fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var("HIO_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool construction")
}

/// Runs one method on one scenario, returning the plan and outer-iteration
/// count. Used by both the sweep harness and the CLI `solve` command.
pub fn run_method(
    s: &Scenario,
    method: Method,
    seed: u64,
    oracle_limit: u64,
) -> Result<(Plan, Option<AoTrace>, Option<u64>), BaselineError> {
    let mut cfg = AoConfig::default();
    cfg.seed = seed;
    match method {
        Method::J3o => {
            let (plan, trace) = j3o(s, &cfg)?;
            Ok((plan, Some(trace), None))
        }
        Method::Baj3o => {
            let (plan, trace) = baj3o(s, &cfg)?;
            Ok((plan, Some(trace), None))
        }
        Method::MinlpOracle => {
            let result = minlp_oracle(s, oracle_limit)?;
            Ok((result.plan, None, result.enumerated))
        }
        Method::GreedyAo => {
            let result = greedy_ao(s, &cfg)?;
            Ok((result.plan, result.trace, None))
        }
        Method::OptAo => {
            let result = opt_ao(s, &cfg, oracle_limit)?;
            Ok((result.plan, result.trace, None))
        }
        Method::RandAo => {
            let result = rand_ao(s, &cfg, seed)?;
            Ok((result.plan, result.trace, None))
        }
        Method::FullLocal => {
            let result = full_local(s)?;
            Ok((result.plan, None, None))
        }
    }
}

fn run_cell(spec: &SweepSpec, value: f64, seed: u64, method: Method) -> ExperimentResult {
    let kind = spec.objective_kind();
    let started = Instant::now();
    let outcome = (|| -> Result<_, String> {
        let s = spec.scenario_for(value, seed).map_err(|e| e.to_string())?;
        let (plan, trace, _) =
            run_method(&s, method, seed, spec.oracle_limit).map_err(|e| e.to_string())?;
        Ok((s, plan, trace))
    })();
    let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((s, plan, trace)) => {
            let f = eval_objective(&s, &plan).expect("solver plans are well-formed");
            let objective = match kind {
                "loss" => 1.0 - f.total,
                _ => f.total,
            };
            let report = validate_plan(&s, &plan).expect("solver plans resolve");
            debug_assert!(report.is_feasible(FEASIBILITY_REL_TOL));
            ExperimentResult {
                scenario_digest: canonical_hash(&s),
                method,
                seed,
                sweep_param: spec.param.tag().to_string(),
                sweep_value: value,
                objective,
                objective_kind: kind.to_string(),
                runtime_ms,
                max_violation: report.max_relative_violation(),
                outer_iters: trace.map_or(0, |t| t.outer_iterations() as u64),
            }
        }
        Err(err) => ExperimentResult {
            scenario_digest: String::new(),
            method,
            seed,
            sweep_param: spec.param.tag().to_string(),
            sweep_value: value,
            objective: f64::NAN,
            objective_kind: format!("error: {err}"),
            runtime_ms,
            max_violation: f64::NAN,
            outer_iters: 0,
        },
    }
}

/// Runs the whole grid, streaming rows to `sink` one grid point at a time.
/// Cells within a grid point run on the worker pool; row order is always
/// (grid value, seed, method).
pub fn run_sweep_to<W: Write>(
    spec: &SweepSpec,
    sink: W,
) -> Result<Vec<ExperimentResult>, SweepError> {
    spec.validate()?;
    let pool = thread_pool();
    let mut writer = csv::Writer::from_writer(sink);
    let mut all = Vec::new();
    for &value in &spec.grid {
        let cells: Vec<(u64, Method)> = (0..spec.seeds)
            .flat_map(|seed| spec.methods.iter().map(move |&m| (seed, m)))
            .collect();
        let rows: Vec<ExperimentResult> = pool.install(|| {
            cells
                .par_iter()
                .map(|&(seed, method)| run_cell(spec, value, seed, method))
                .collect()
        });
        for row in rows {
            writer.serialize(&row)?;
            all.push(row);
        }
        writer.flush()?;
    }
    Ok(all)
}

/// [`run_sweep_to`] without a CSV sink.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ExperimentResult>, SweepError> {
    run_sweep_to(spec, std::io::sink())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_spec() -> SweepSpec {
        SweepSpec {
            param: SweepParam::EdgeUplinkScale,
            grid: vec![0.4],
            seeds: 1,
            methods: vec![Method::J3o],
            base: SweepBase::Generator(GeneratorConfig::desk_scale(3)),
            oracle_limit: default_oracle_limit(),
        }
    }

    #[test]
    fn single_cell_sweep_emits_one_row() {
        let results = run_sweep(&desk_spec()).unwrap();
        assert_eq!(results.len(), 1);
        let row = &results[0];
        assert_eq!(row.method, Method::J3o);
        assert_eq!(row.objective_kind, "acc");
        assert!(row.objective > 0.0);
        assert!(row.max_violation <= 1e-6);
        assert!(row.outer_iters >= 1);
    }

    #[test]
    fn csv_is_deterministic_modulo_runtime() {
        let spec = SweepSpec {
            grid: vec![0.3, 0.6],
            seeds: 2,
            methods: vec![Method::J3o, Method::FullLocal],
            ..desk_spec()
        };
        let strip = |text: &str| -> String {
            // Drop the runtime_ms column (index 7).
            text.lines()
                .map(|line| {
                    let mut cols: Vec<&str> = line.split(',').collect();
                    cols.remove(7);
                    cols.join(",")
                })
                .collect::<Vec<_>>()
                .join("\n")
        };
        let mut a = Vec::new();
        run_sweep_to(&spec, &mut a).unwrap();
        let mut b = Vec::new();
        run_sweep_to(&spec, &mut b).unwrap();
        assert_eq!(
            strip(&String::from_utf8(a).unwrap()),
            strip(&String::from_utf8(b).unwrap())
        );
    }

    #[test]
    fn grid_times_seeds_times_methods_rows() {
        let spec = SweepSpec {
            grid: vec![0.2, 0.5, 0.8],
            seeds: 2,
            methods: vec![Method::J3o, Method::GreedyAo, Method::FullLocal],
            ..desk_spec()
        };
        let results = run_sweep(&spec).unwrap();
        assert_eq!(results.len(), 3 * 2 * 3);
        assert!(results.iter().all(|r| !r.objective_kind.starts_with("error")));
    }

    #[test]
    fn spec_roundtrips_through_toml() {
        let text = r#"
param = "p_a"
grid = [0.1, 0.5, 0.9]
seeds = 1
methods = ["oracle", "j3o"]

[base.motivating]
task_a_share = 0.5
uplink_scale = 0.5
"#;
        let spec = SweepSpec::from_toml(text).unwrap();
        assert_eq!(spec.param, SweepParam::TaskAShare);
        assert_eq!(spec.methods, vec![Method::MinlpOracle, Method::J3o]);
        match &spec.base {
            SweepBase::Motivating(m) => assert_eq!(m.uplink_scale, 0.5),
            _ => panic!("wrong base"),
        }
    }

    #[test]
    fn incompatible_param_is_rejected() {
        let text = r#"
param = "chi_beta"
grid = [1.0]
seeds = 1
methods = ["j3o"]

[base.motivating]
task_a_share = 0.5
"#;
        assert!(SweepSpec::from_toml(text).is_err());
    }

    #[test]
    fn mismatched_method_becomes_error_row() {
        let spec = SweepSpec {
            methods: vec![Method::Baj3o], // plain-mode scenario
            ..desk_spec()
        };
        let results = run_sweep(&spec).unwrap();
        assert_eq!(results.len(), 1);
        assert!(results[0].objective_kind.starts_with("error"));
        assert!(results[0].objective.is_nan());
    }
}
