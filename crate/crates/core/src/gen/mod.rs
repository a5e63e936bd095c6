//! Seeded scenario generation: benchmark-style device presets, synthetic
//! accuracy tables, Dirichlet-distributed workloads and a small hand-built
//! two-task preset for qualitative studies.
//!
//! All randomness flows through the crate's counter-based stream
//! ([`rng::CounterRng`]), with one substream per concern, so a scenario is a
//! pure function of its configuration.

pub mod rng;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AccuracyTable, BatchingParams, Mode, ModelProfile, NodeBudget, Scenario, TaskProfile,
    Topology, Workload,
};
use rng::CounterRng;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("scenario failed validation after generation: {0}")]
    Invalid(#[from] crate::model::ScenarioError),
}

/// Device family the generated instance mimics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Five indoor vision tasks, 31-entry model library, small devices.
    Taskonomy,
    /// Six domain-classification tasks, same device class as taskonomy.
    Domainnet,
    /// Three urban-perception tasks on a fixed seven-model library with
    /// heavyweight per-query compute.
    Cityscape,
    /// Fully synthetic statistics sized by the workload; dimensions default
    /// to a desk-scale 3-client/1-edge/5-model/3-task instance.
    Custom,
}

impl Preset {
    pub fn tag(&self) -> &'static str {
        match self {
            Preset::Taskonomy => "taskonomy",
            Preset::Domainnet => "domainnet",
            Preset::Cityscape => "cityscape",
            Preset::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub preset: Preset,
    /// Total arrival rate in jobs per second, split over clients and tasks.
    #[serde(default = "default_lambda")]
    pub lambda_total: f64,
    /// Dirichlet concentration for the client split of the total load.
    #[serde(default = "default_concentration")]
    pub client_concentration: f64,
    /// Dirichlet concentration for each client's split across tasks.
    #[serde(default = "default_concentration")]
    pub task_concentration: f64,
    /// Edge uplink budget as a fraction of the edge's full demand bytes.
    #[serde(default = "default_edge_uplink_scale")]
    pub edge_uplink_scale: f64,
    /// Cloud uplink budget as a fraction of the system's full demand bytes.
    #[serde(default = "default_cloud_uplink_scale")]
    pub cloud_uplink_scale: f64,
    /// Scale factor on client compute budgets.
    #[serde(default = "default_one")]
    pub compute_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub clients: Option<usize>,
    #[serde(default)]
    pub edges: Option<usize>,
    #[serde(default)]
    pub models: Option<usize>,
    #[serde(default)]
    pub tasks: Option<usize>,
    /// Batching window in seconds; batching mode when present.
    #[serde(default)]
    pub batch_interval: Option<f64>,
}

fn default_lambda() -> f64 {
    2000.0
}
fn default_concentration() -> f64 {
    0.5
}
fn default_edge_uplink_scale() -> f64 {
    0.5
}
fn default_cloud_uplink_scale() -> f64 {
    0.25
}
fn default_one() -> f64 {
    1.0
}

impl GeneratorConfig {
    pub fn new(preset: Preset, seed: u64) -> Self {
        GeneratorConfig {
            preset,
            lambda_total: default_lambda(),
            client_concentration: default_concentration(),
            task_concentration: default_concentration(),
            edge_uplink_scale: default_edge_uplink_scale(),
            cloud_uplink_scale: default_cloud_uplink_scale(),
            compute_scale: default_one(),
            seed,
            clients: None,
            edges: None,
            models: None,
            tasks: None,
            batch_interval: None,
        }
    }

    /// The desk-scale synthetic instance used throughout the test suites.
    pub fn desk_scale(seed: u64) -> Self {
        let mut cfg = Self::new(Preset::Custom, seed);
        cfg.lambda_total = 100.0;
        cfg
    }

    fn dims(&self) -> (usize, usize, usize, usize) {
        let (c, e, m, t) = match self.preset {
            Preset::Taskonomy => (30, 3, 31, 5),
            Preset::Domainnet => (30, 3, 31, 6),
            Preset::Cityscape => (30, 3, 7, 3),
            Preset::Custom => (3, 1, 5, 3),
        };
        (
            self.clients.unwrap_or(c),
            self.edges.unwrap_or(e),
            self.models.unwrap_or(m),
            self.tasks.unwrap_or(t),
        )
    }
}

struct DeviceTable {
    client_mem: &'static [f64],
    client_compute: &'static [f64],
    edge_mem: &'static [f64],
    edge_compute: &'static [f64],
}

// Small-device tier: client memory is quadrupled relative to the nominal
// budgets because clients cache quantized variants at a quarter of the
// full-precision footprint while the library lists full-precision sizes.
const SMALL_DEVICES: DeviceTable = DeviceTable {
    client_mem: &[96.0e6, 96.0e6, 192.0e6, 192.0e6, 384.0e6],
    client_compute: &[0.5e12, 1.0e12, 1.0e12, 2.0e12, 2.0e12],
    edge_mem: &[512.0e6, 512.0e6, 1024.0e6],
    edge_compute: &[10.0e12, 12.0e12, 15.0e12],
};

// Large-device tier with quantized model sizes listed directly.
const LARGE_DEVICES: DeviceTable = DeviceTable {
    client_mem: &[1.0e9, 2.0e9, 2.0e9, 3.0e9, 4.0e9],
    client_compute: &[10.0e12, 10.0e12, 15.0e12, 15.0e12, 20.0e12],
    edge_mem: &[5.0e9, 6.0e9, 6.0e9],
    edge_compute: &[30.0e12, 40.0e12, 50.0e12],
};

const CITYSCAPE_MODEL_MEM: [f64; 7] = [0.80e9, 0.80e9, 0.84e9, 0.88e9, 0.91e9, 0.91e9, 0.99e9];
const CITYSCAPE_MODEL_FLOPS: [f64; 7] =
    [1.13e12, 1.13e12, 0.73e12, 1.84e12, 1.44e12, 1.44e12, 2.16e12];
const CITYSCAPE_SUPPORT: [&[usize]; 7] = [
    &[0],
    &[1],
    &[2],
    &[0, 1],
    &[0, 2],
    &[1, 2],
    &[0, 1, 2],
];

/// Generates a full scenario from the configuration; same config, same bytes.
pub fn generate_scenario(cfg: &GeneratorConfig) -> Result<Scenario, GenError> {
    if cfg.lambda_total <= 0.0 {
        return Err(GenError::InvalidConfig("lambda_total must be > 0".into()));
    }
    if cfg.client_concentration <= 0.0 || cfg.task_concentration <= 0.0 {
        return Err(GenError::InvalidConfig(
            "concentration parameters must be > 0".into(),
        ));
    }
    if cfg.edge_uplink_scale < 0.0 || cfg.cloud_uplink_scale < 0.0 || cfg.compute_scale < 0.0 {
        return Err(GenError::InvalidConfig("scale factors must be >= 0".into()));
    }
    let (n_clients, n_edges, n_models, n_tasks) = cfg.dims();
    if cfg.preset == Preset::Cityscape && n_models != 7 {
        return Err(GenError::InvalidConfig(
            "the cityscape preset has a fixed seven-model library".into(),
        ));
    }
    if n_tasks == 0 || n_clients == 0 || n_edges == 0 || n_models == 0 {
        return Err(GenError::InvalidConfig("all dimensions must be >= 1".into()));
    }

    // Workload: total load split over clients, then over tasks per client.
    let mut rates = vec![vec![0.0; n_tasks]; n_clients];
    {
        let mut rng = CounterRng::substream(cfg.seed, "workload");
        let client_share = rng.dirichlet(cfg.client_concentration, n_clients);
        for (c, row) in rates.iter_mut().enumerate() {
            let task_share = rng.dirichlet(cfg.task_concentration, n_tasks);
            for (t, slot) in row.iter_mut().enumerate() {
                *slot = cfg.lambda_total * client_share[c] * task_share[t];
            }
        }
        let total: f64 = rates.iter().flatten().sum();
        let fix = cfg.lambda_total / total;
        for v in rates.iter_mut().flatten() {
            *v *= fix;
        }
    }

    // Model library and task payloads.
    let mut rng_models = CounterRng::substream(cfg.seed, "models");
    let mut models = Vec::with_capacity(n_models);
    for id in 0..n_models {
        let (memory_bytes, compute_per_query, supported_tasks) = match cfg.preset {
            Preset::Taskonomy => (73.66e6, 9.17e9, random_support(&mut rng_models, n_tasks)),
            Preset::Domainnet => (83.15e6, 3.68e9, random_support(&mut rng_models, n_tasks)),
            Preset::Cityscape => (
                CITYSCAPE_MODEL_MEM[id],
                CITYSCAPE_MODEL_FLOPS[id],
                CITYSCAPE_SUPPORT[id].to_vec(),
            ),
            Preset::Custom => (
                rng_models.uniform(4.0e7, 9.0e7),
                rng_models.uniform(1.0e9, 8.0e9),
                random_support(&mut rng_models, n_tasks),
            ),
        };
        models.push(ModelProfile {
            id,
            memory_bytes,
            compute_per_query,
            setup_cost: None,
            supported_tasks,
        });
    }

    let mut rng_tasks = CounterRng::substream(cfg.seed, "tasks");
    let tasks: Vec<TaskProfile> = (0..n_tasks)
        .map(|id| TaskProfile {
            id,
            input_bytes: match cfg.preset {
                Preset::Taskonomy => 0.79e6,
                Preset::Domainnet => 0.60e6,
                Preset::Cityscape => 25.17e6,
                Preset::Custom => rng_tasks.uniform(3.0e5, 1.0e6),
            },
        })
        .collect();

    // Attachment: contiguous blocks, balanced across edges.
    let per_edge = n_clients.div_ceil(n_edges);
    let assignment: Vec<usize> = (0..n_clients)
        .map(|c| (c / per_edge).min(n_edges - 1))
        .collect();

    // Device budgets.
    let mut rng_dev = CounterRng::substream(cfg.seed, "devices");
    let mean_model_mem: f64 = models.iter().map(|m| m.memory_bytes).sum::<f64>() / n_models as f64;
    let mean_model_flops: f64 =
        models.iter().map(|m| m.compute_per_query).sum::<f64>() / n_models as f64;
    let table = match cfg.preset {
        Preset::Taskonomy | Preset::Domainnet => Some(&SMALL_DEVICES),
        Preset::Cityscape => Some(&LARGE_DEVICES),
        Preset::Custom => None,
    };
    let clients: Vec<NodeBudget> = (0..n_clients)
        .map(|c| match table {
            Some(t) => NodeBudget {
                memory_bytes: t.client_mem[c % t.client_mem.len()],
                compute_capacity: cfg.compute_scale * t.client_compute[c % t.client_compute.len()],
            },
            None => {
                let local_demand: f64 = rates[c].iter().sum::<f64>() * mean_model_flops;
                NodeBudget {
                    memory_bytes: mean_model_mem * rng_dev.uniform(0.9, 1.7),
                    compute_capacity: cfg.compute_scale
                        * local_demand
                        * rng_dev.uniform(0.4, 0.9),
                }
            }
        })
        .collect();
    let edges: Vec<NodeBudget> = (0..n_edges)
        .map(|e| match table {
            Some(t) => NodeBudget {
                memory_bytes: t.edge_mem[e % t.edge_mem.len()],
                compute_capacity: t.edge_compute[e % t.edge_compute.len()],
            },
            None => {
                let agg_demand: f64 = (0..n_clients)
                    .filter(|&c| assignment[c] == e)
                    .map(|c| rates[c].iter().sum::<f64>())
                    .sum::<f64>()
                    * mean_model_flops;
                NodeBudget {
                    memory_bytes: mean_model_mem * rng_dev.uniform(2.5, 4.5),
                    compute_capacity: agg_demand * rng_dev.uniform(0.9, 1.6),
                }
            }
        })
        .collect();

    // Synthetic accuracy tables: supported accuracies drawn uniformly with a
    // penalty per additional supported task, a small per-edge jitter, and an
    // oracle-grade cloud.
    let mut rng_acc = CounterRng::substream(cfg.seed, "accuracy");
    let mut base = vec![vec![0.0; n_tasks]; n_models];
    for (m, model) in models.iter().enumerate() {
        let penalty = 0.1 * (model.supported_tasks.len() as f64 - 1.0);
        for &t in &model.supported_tasks {
            base[m][t] = rng_acc.uniform(0.6, 0.95) - penalty;
        }
    }
    let edge_tables: Vec<Vec<f64>> = (0..n_edges)
        .map(|_| {
            let mut table = vec![0.0; n_models * n_tasks];
            for m in 0..n_models {
                for t in 0..n_tasks {
                    if base[m][t] > 0.0 {
                        table[m * n_tasks + t] =
                            (base[m][t] + rng_acc.uniform(-0.03, 0.03)).clamp(0.0, 1.0);
                    }
                }
            }
            table
        })
        .collect();

    // Uplinks relative to demand bytes at the full-offload reference point.
    let demand_bytes = |c: usize| -> f64 {
        (0..n_tasks)
            .map(|t| rates[c][t] * tasks[t].input_bytes)
            .sum()
    };
    let edge_uplink: Vec<f64> = (0..n_edges)
        .map(|e| {
            cfg.edge_uplink_scale
                * (0..n_clients)
                    .filter(|&c| assignment[c] == e)
                    .map(demand_bytes)
                    .sum::<f64>()
        })
        .collect();
    let cloud_uplink = cfg.cloud_uplink_scale * (0..n_clients).map(demand_bytes).sum::<f64>();

    let mut models = models;
    let (mode, batching) = match cfg.batch_interval {
        Some(interval) => {
            if interval <= 0.0 {
                return Err(GenError::InvalidConfig("batch interval must be > 0".into()));
            }
            let mut rng_setup = CounterRng::substream(cfg.seed, "setup");
            for model in &mut models {
                model.setup_cost = Some(
                    (0..n_edges)
                        .map(|_| rng_setup.uniform(0.02, 0.10) * interval)
                        .collect(),
                );
            }
            (
                Mode::Batching,
                Some(BatchingParams {
                    interval_sec: interval,
                }),
            )
        }
        None => (Mode::Plain, None),
    };

    let scenario = Scenario {
        models,
        tasks,
        topology: Topology {
            clients,
            edges,
            assignment,
            edge_uplink,
            cloud_uplink,
        },
        accuracy: AccuracyTable {
            edge: edge_tables,
            cloud: vec![1.0; n_tasks],
            rho: 0.9,
        },
        workload: Workload { rates },
        batching,
        mode,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn random_support(rng: &mut CounterRng, n_tasks: usize) -> Vec<usize> {
    let k = (rng.next_below(3) + 1).min(n_tasks);
    let mut order: Vec<usize> = (0..n_tasks).collect();
    rng.shuffle(&mut order);
    let mut support: Vec<usize> = order.into_iter().take(k).collect();
    support.sort_unstable();
    support
}

// ---------------------------------------------------------------------------
// Two-task qualitative preset
// ---------------------------------------------------------------------------

/// Configuration of the hand-built two-task preset: one edge, five clients,
/// three models. Model 0 specializes in task A (0.9 / 0.1), model 1 mirrors
/// it for task B (0.1 / 0.9) and model 2 is a generalist (0.6 / 0.6) with a
/// larger footprint. Every node can host a single model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MotivatingConfig {
    /// Global share of task-A traffic, in (0, 1).
    pub task_a_share: f64,
    /// Concentrate 70% of client 0's queries on task B, keeping the global
    /// task split unchanged.
    #[serde(default)]
    pub hot_client: bool,
    /// Batch setup cost of the task-A specialist; switches the preset into
    /// batching mode. The other models keep a small fixed setup cost.
    #[serde(default)]
    pub setup_cost_a: Option<f64>,
    /// Edge uplink budget as a fraction of total demand bytes.
    #[serde(default = "default_one")]
    pub uplink_scale: f64,
    #[serde(default = "default_batch_interval")]
    pub batch_interval: f64,
}

fn default_batch_interval() -> f64 {
    0.5
}

impl Default for MotivatingConfig {
    fn default() -> Self {
        MotivatingConfig {
            task_a_share: 0.5,
            hot_client: false,
            setup_cost_a: None,
            uplink_scale: 1.0,
            batch_interval: default_batch_interval(),
        }
    }
}

pub fn motivating_preset(cfg: &MotivatingConfig) -> Result<Scenario, GenError> {
    let p = cfg.task_a_share;
    if !(0.0 < p && p < 1.0) {
        return Err(GenError::InvalidConfig("task_a_share must be in (0,1)".into()));
    }
    let lambda_tot = 100.0;
    let rates: Vec<Vec<f64>> = if cfg.hot_client {
        // Client 0 sees 70% task-B traffic; the rest absorb the difference.
        let hot_a = 0.3 * 20.0;
        let rest_a = (lambda_tot * p - hot_a) / 4.0;
        if rest_a < 0.0 || rest_a > 20.0 {
            return Err(GenError::InvalidConfig(format!(
                "task_a_share {p} is incompatible with the hot-client split"
            )));
        }
        let mut rows = vec![vec![hot_a, 20.0 - hot_a]];
        rows.extend((0..4).map(|_| vec![rest_a, 20.0 - rest_a]));
        rows
    } else {
        (0..5).map(|_| vec![20.0 * p, 20.0 * (1.0 - p)]).collect()
    };

    let batching = cfg.setup_cost_a.is_some();
    let setup = |nu_a: f64, id: usize| -> Option<Vec<f64>> {
        Some(vec![if id == 0 { nu_a } else { 0.01 }])
    };
    let models: Vec<ModelProfile> = [
        (50.0e6, [0.9, 0.1]),
        (50.0e6, [0.1, 0.9]),
        (65.0e6, [0.6, 0.6]),
    ]
    .iter()
    .enumerate()
    .map(|(id, &(mem, _))| ModelProfile {
        id,
        memory_bytes: mem,
        compute_per_query: 1.0e9,
        setup_cost: cfg.setup_cost_a.and_then(|nu_a| setup(nu_a, id)),
        supported_tasks: vec![0, 1],
    })
    .collect();

    let accuracy_rows: [[f64; 2]; 3] = [[0.9, 0.1], [0.1, 0.9], [0.6, 0.6]];
    let edge_table: Vec<f64> = accuracy_rows.iter().flatten().copied().collect();

    let scenario = Scenario {
        models,
        tasks: (0..2)
            .map(|id| TaskProfile {
                id,
                input_bytes: 1.0e6,
            })
            .collect(),
        topology: Topology {
            clients: (0..5)
                .map(|_| NodeBudget {
                    memory_bytes: 65.0e6,
                    compute_capacity: 2.0e9,
                })
                .collect(),
            edges: vec![NodeBudget {
                memory_bytes: 65.0e6,
                compute_capacity: 200.0e9,
            }],
            assignment: vec![0; 5],
            edge_uplink: vec![cfg.uplink_scale * lambda_tot * 1.0e6],
            // Two tiers only: the cloud is unreachable.
            cloud_uplink: 0.0,
        },
        accuracy: AccuracyTable {
            edge: vec![edge_table],
            cloud: vec![1.0, 1.0],
            rho: 0.9,
        },
        workload: Workload { rates },
        batching: batching.then(|| BatchingParams {
            interval_sec: cfg.batch_interval,
        }),
        mode: if batching { Mode::Batching } else { Mode::Plain },
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonical_hash;

    #[test]
    fn generation_is_deterministic() {
        let cfg = GeneratorConfig::desk_scale(7);
        let a = generate_scenario(&cfg).unwrap();
        let b = generate_scenario(&cfg).unwrap();
        assert_eq!(canonical_hash(&a), canonical_hash(&b));
        let mut cfg2 = cfg.clone();
        cfg2.seed = 8;
        let c = generate_scenario(&cfg2).unwrap();
        assert_ne!(canonical_hash(&a), canonical_hash(&c));
    }

    #[test]
    fn total_rate_matches_config() {
        for &lambda in &[100.0, 2000.0, 4000.0] {
            let mut cfg = GeneratorConfig::new(Preset::Taskonomy, 3);
            cfg.lambda_total = lambda;
            let s = generate_scenario(&cfg).unwrap();
            let total = s.lambda_total();
            assert!((total - lambda).abs() <= 1e-9 * lambda, "{total} vs {lambda}");
            assert_eq!(s.n_clients(), 30);
            assert_eq!(s.n_edges(), 3);
            assert_eq!(s.n_models(), 31);
            for e in 0..3 {
                assert_eq!(s.clients_of(e).len(), 10);
            }
        }
    }

    #[test]
    fn uplinks_scale_with_demand() {
        let mut cfg = GeneratorConfig::desk_scale(5);
        cfg.cloud_uplink_scale = 0.25;
        cfg.edge_uplink_scale = 0.5;
        let s = generate_scenario(&cfg).unwrap();
        let demand: f64 = (0..s.n_clients())
            .flat_map(|c| (0..s.n_tasks()).map(move |t| (c, t)))
            .map(|(c, t)| s.workload.rates[c][t] * s.tasks[t].input_bytes)
            .sum();
        assert!((s.topology.cloud_uplink - 0.25 * demand).abs() < 1e-6 * demand);
        let edge_demand: f64 = s
            .clients_of(0)
            .iter()
            .flat_map(|&c| (0..s.n_tasks()).map(move |t| (c, t)))
            .map(|(c, t)| s.workload.rates[c][t] * s.tasks[t].input_bytes)
            .sum();
        assert!((s.topology.edge_uplink[0] - 0.5 * edge_demand).abs() < 1e-6 * edge_demand);
    }

    #[test]
    fn batching_interval_adds_setup_costs() {
        let mut cfg = GeneratorConfig::desk_scale(2);
        cfg.batch_interval = Some(0.5);
        let s = generate_scenario(&cfg).unwrap();
        assert_eq!(s.mode, Mode::Batching);
        for m in &s.models {
            let costs = m.setup_cost.as_ref().unwrap();
            assert_eq!(costs.len(), s.n_edges());
            assert!(costs.iter().all(|&nu| nu > 0.0 && nu <= 0.10 * 0.5));
        }
    }

    #[test]
    fn cityscape_has_fixed_library() {
        let cfg = GeneratorConfig::new(Preset::Cityscape, 1);
        let s = generate_scenario(&cfg).unwrap();
        assert_eq!(s.n_models(), 7);
        assert_eq!(s.models[3].supported_tasks, vec![0, 1]);
        assert_eq!(s.models[6].supported_tasks, vec![0, 1, 2]);
        assert_eq!(s.models[0].memory_bytes, 0.80e9);
    }

    #[test]
    fn motivating_preset_matches_headline_numbers() {
        let s = motivating_preset(&MotivatingConfig::default()).unwrap();
        assert_eq!(s.n_clients(), 5);
        assert_eq!(s.n_edges(), 1);
        assert_eq!(s.n_models(), 3);
        assert!((s.lambda_total() - 100.0).abs() < 1e-9);
        assert_eq!(s.edge_accuracy(0, 2, 0), 0.6);
        assert_eq!(s.edge_accuracy(0, 1, 1), 0.9);
        assert_eq!(s.accuracy.rho, 0.9);
        // Single-model capacity per node.
        assert!(s.models.iter().all(|m| m.memory_bytes <= 65.0e6));
        assert!(s.models[0].memory_bytes + s.models[1].memory_bytes > 65.0e6);
    }

    #[test]
    fn hot_client_preserves_global_split() {
        for &p in &[0.2, 0.5, 0.8] {
            let s = motivating_preset(&MotivatingConfig {
                task_a_share: p,
                hot_client: true,
                ..Default::default()
            })
            .unwrap();
            let total_a: f64 = s.workload.rates.iter().map(|r| r[0]).sum();
            assert!((total_a - 100.0 * p).abs() < 1e-9);
            assert!((s.workload.rates[0][1] - 14.0).abs() < 1e-9);
        }
        assert!(motivating_preset(&MotivatingConfig {
            task_a_share: 0.01,
            hot_client: true,
            ..Default::default()
        })
        .is_err());
    }
}
