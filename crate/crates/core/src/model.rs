//! Problem-instance data model: scenarios, plans, validation and serialization.
//!
//! A [`Scenario`] is an immutable description of a three-tier inference system:
//! a library of multi-task models, a set of tasks, clients attached to edge
//! servers, per-edge accuracy tables, a cloud tier with oracle accuracy, and a
//! long-run query workload. A [`Plan`] is one candidate solution: which models
//! each node onloads (`x`), which model serves each task at each node (`z`),
//! and what fraction of each query stream moves up the hierarchy (`o`).
//!
//! Every task assignment is total thanks to a virtual *null model* that is
//! implicitly onloaded everywhere with zero memory, zero compute and zero
//! accuracy. `None` in an assignment slot denotes the null model.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub type ModelId = usize;
pub type TaskId = usize;
pub type ClientId = usize;
pub type EdgeId = usize;

/// Relative feasibility tolerance for all real-valued constraints.
/// Binary constraints (assignment validity) are checked exactly.
pub const FEASIBILITY_REL_TOL: f64 = 1e-6;

/// Absolute tolerance used when comparing objective values.
pub const OBJECTIVE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum PlanError {
    #[error("unresolved id in plan: {0}")]
    UnresolvedId(String),
    #[error("plan shape mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Whether the edge tier is limited by a raw compute budget or by the
/// batching-latency window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Plain,
    Batching,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Plain => write!(f, "plain"),
            Mode::Batching => write!(f, "batching"),
        }
    }
}

/// One entry of the shared model library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProfile {
    pub id: ModelId,
    /// Parameter memory footprint in bytes.
    pub memory_bytes: f64,
    /// Compute cost per query in FLOPs.
    pub compute_per_query: f64,
    /// Batch setup cost in seconds, one entry per edge. Only meaningful in
    /// batching mode; absent means zero setup cost everywhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setup_cost: Option<Vec<f64>>,
    /// Tasks this model can serve. Unsupported tasks have accuracy zero.
    pub supported_tasks: Vec<TaskId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskProfile {
    pub id: TaskId,
    /// Query input payload in bytes.
    pub input_bytes: f64,
}

/// Memory and compute budget of a single client or edge node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeBudget {
    pub memory_bytes: f64,
    /// FLOPs per second.
    pub compute_capacity: f64,
}

/// Node inventory plus the fixed client-to-edge attachment and uplink budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub clients: Vec<NodeBudget>,
    pub edges: Vec<NodeBudget>,
    /// `assignment[c]` is the edge serving client `c`; exactly one per client.
    pub assignment: Vec<EdgeId>,
    /// Shared client-to-edge uplink budget per edge, bytes per second.
    pub edge_uplink: Vec<f64>,
    /// Shared edge-to-cloud uplink budget, bytes per second.
    pub cloud_uplink: f64,
}

/// Model-task accuracies per edge data distribution, the cloud oracle
/// accuracies, and the client-side degradation factor.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyTable {
    /// `edge[e]` is a row-major `[model][task]` matrix.
    pub edge: Vec<Vec<f64>>,
    /// Oracle accuracy per task at the cloud.
    pub cloud: Vec<f64>,
    /// Client-side executions achieve `rho * a` of the edge-table accuracy;
    /// `rho = 1` disables the degradation.
    pub rho: f64,
}

/// Long-run arrival rates, jobs per second, `rates[client][task]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub rates: Vec<Vec<f64>>,
}

impl Workload {
    pub fn total(&self) -> f64 {
        self.rates.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchingParams {
    /// Batching window `T_b` in seconds.
    pub interval_sec: f64,
}

/// A full, validated problem instance. Treated as immutable after
/// construction; rebuild through [`Scenario::validate`] after editing parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub models: Vec<ModelProfile>,
    pub tasks: Vec<TaskProfile>,
    pub topology: Topology,
    pub accuracy: AccuracyTable,
    pub workload: Workload,
    pub batching: Option<BatchingParams>,
    pub mode: Mode,
}

impl Scenario {
    pub fn n_models(&self) -> usize {
        self.models.len()
    }
    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }
    pub fn n_clients(&self) -> usize {
        self.topology.clients.len()
    }
    pub fn n_edges(&self) -> usize {
        self.topology.edges.len()
    }

    /// Total system demand in jobs per second.
    pub fn lambda_total(&self) -> f64 {
        self.workload.total()
    }

    /// Rate of task `t` at client `c`, normalized by the total demand.
    pub fn normalized_rate(&self, c: ClientId, t: TaskId, lambda_tot: f64) -> f64 {
        self.workload.rates[c][t] / lambda_tot
    }

    pub fn assigned_edge(&self, c: ClientId) -> EdgeId {
        self.topology.assignment[c]
    }

    /// Clients attached to edge `e`, in id order.
    pub fn clients_of(&self, e: EdgeId) -> Vec<ClientId> {
        (0..self.n_clients())
            .filter(|&c| self.topology.assignment[c] == e)
            .collect()
    }

    /// Accuracy of model `m` on task `t` under edge `e`'s data distribution.
    pub fn edge_accuracy(&self, e: EdgeId, m: ModelId, t: TaskId) -> f64 {
        self.accuracy.edge[e][m * self.n_tasks() + t]
    }

    /// Client-side accuracy: the degradation factor applied to the accuracy
    /// table of the client's assigned edge.
    pub fn client_accuracy(&self, c: ClientId, m: ModelId, t: TaskId) -> f64 {
        self.accuracy.rho * self.edge_accuracy(self.assigned_edge(c), m, t)
    }

    /// Batch setup cost of model `m` on edge `e`; zero when unset.
    pub fn setup_cost(&self, m: ModelId, e: EdgeId) -> f64 {
        self.models[m]
            .setup_cost
            .as_ref()
            .map_or(0.0, |costs| costs[e])
    }

    pub fn batch_interval(&self) -> Option<f64> {
        self.batching.map(|b| b.interval_sec)
    }

    /// Checks every structural invariant, returning the first violation.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Invalid(msg));
        let nm = self.n_models();
        let nt = self.n_tasks();
        let nc = self.n_clients();
        let ne = self.n_edges();

        if nt == 0 {
            return invalid("at least one task is required".into());
        }
        if nc == 0 || ne == 0 {
            return invalid("at least one client and one edge are required".into());
        }

        for (i, m) in self.models.iter().enumerate() {
            if m.id != i {
                return invalid(format!("model ids must be contiguous, got {} at {i}", m.id));
            }
            if !(m.memory_bytes > 0.0) {
                return invalid(format!("model {i}: memory_bytes must be > 0"));
            }
            if !(m.compute_per_query > 0.0) {
                return invalid(format!("model {i}: compute_per_query must be > 0"));
            }
            if let Some(costs) = &m.setup_cost {
                if costs.len() != ne {
                    return invalid(format!("model {i}: setup_cost needs one entry per edge"));
                }
                if costs.iter().any(|&v| !(v >= 0.0)) {
                    return invalid(format!("model {i}: setup_cost must be >= 0"));
                }
            }
            if m.supported_tasks.is_empty() {
                return invalid(format!("model {i}: supported_tasks must be non-empty"));
            }
            if m.supported_tasks.iter().any(|&t| t >= nt) {
                return invalid(format!("model {i}: supported task out of range"));
            }
        }

        for (i, t) in self.tasks.iter().enumerate() {
            if t.id != i {
                return invalid(format!("task ids must be contiguous, got {} at {i}", t.id));
            }
            if !(t.input_bytes > 0.0) {
                return invalid(format!("task {i}: input_bytes must be > 0"));
            }
        }

        for (c, b) in self.topology.clients.iter().enumerate() {
            if !(b.memory_bytes > 0.0 && b.compute_capacity > 0.0) {
                return invalid(format!("client {c}: budgets must be strictly positive"));
            }
        }
        for (e, b) in self.topology.edges.iter().enumerate() {
            if !(b.memory_bytes > 0.0 && b.compute_capacity > 0.0) {
                return invalid(format!("edge {e}: budgets must be strictly positive"));
            }
        }
        if self.topology.assignment.len() != nc {
            return invalid("assignment needs exactly one edge per client".into());
        }
        if let Some(c) = self.topology.assignment.iter().position(|&e| e >= ne) {
            return invalid(format!("client {c}: assigned edge out of range"));
        }
        if self.topology.edge_uplink.len() != ne {
            return invalid("edge_uplink needs one entry per edge".into());
        }
        if self.topology.edge_uplink.iter().any(|&k| !(k >= 0.0)) {
            return invalid("edge uplink budgets must be >= 0".into());
        }
        if !(self.topology.cloud_uplink >= 0.0) {
            return invalid("cloud uplink budget must be >= 0".into());
        }

        if self.accuracy.edge.len() != ne {
            return invalid("accuracy table needs one matrix per edge".into());
        }
        for (e, table) in self.accuracy.edge.iter().enumerate() {
            if table.len() != nm * nt {
                return invalid(format!(
                    "edge {e}: accuracy matrix must be row-major [model][task] with {} entries",
                    nm * nt
                ));
            }
            for m in 0..nm {
                for t in 0..nt {
                    let a = table[m * nt + t];
                    if !(0.0..=1.0).contains(&a) {
                        return invalid(format!("accuracy out of [0,1] at edge {e} model {m} task {t}"));
                    }
                    if a != 0.0 && !self.models[m].supported_tasks.contains(&t) {
                        return invalid(format!(
                            "edge {e} model {m} task {t}: unsupported task must have accuracy 0"
                        ));
                    }
                }
            }
        }
        if self.accuracy.cloud.len() != nt {
            return invalid("cloud accuracy needs one entry per task".into());
        }
        for t in 0..nt {
            let a_s = self.accuracy.cloud[t];
            if !(0.0..=1.0).contains(&a_s) {
                return invalid(format!("cloud accuracy out of [0,1] for task {t}"));
            }
            let best = (0..nm)
                .flat_map(|m| (0..ne).map(move |e| self.edge_accuracy(e, m, t)))
                .fold(0.0f64, f64::max);
            if a_s < best {
                return invalid(format!(
                    "cloud accuracy for task {t} must dominate every edge accuracy"
                ));
            }
        }
        if !(self.accuracy.rho > 0.0 && self.accuracy.rho <= 1.0) {
            return invalid("rho must be in (0, 1]".into());
        }

        if self.workload.rates.len() != nc {
            return invalid("workload needs one rate row per client".into());
        }
        for (c, row) in self.workload.rates.iter().enumerate() {
            if row.len() != nt {
                return invalid(format!("client {c}: workload row needs one rate per task"));
            }
            if row.iter().any(|&r| !(r >= 0.0)) {
                return invalid(format!("client {c}: rates must be >= 0"));
            }
        }
        if !(self.lambda_total() > 0.0) {
            return invalid("total workload must be strictly positive".into());
        }

        match (self.mode, &self.batching) {
            (Mode::Batching, None) => {
                return invalid("batching mode requires a [batching] section".into())
            }
            (Mode::Batching, Some(b)) if !(b.interval_sec > 0.0) => {
                return invalid("batching interval must be > 0".into())
            }
            _ => {}
        }

        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File schema (schema_version 1)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    schema_version: u32,
    #[serde(default = "default_mode")]
    mode: Mode,
    #[serde(default = "default_rho")]
    rho: f64,
    models: Vec<ModelProfile>,
    tasks: Vec<TaskProfile>,
    clients: Vec<ClientEntry>,
    edges: Vec<EdgeEntry>,
    cloud: CloudEntry,
    workload: WorkloadEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    batching: Option<BatchingParams>,
}

fn default_mode() -> Mode {
    Mode::Plain
}

fn default_rho() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
struct ClientEntry {
    id: ClientId,
    memory_bytes: f64,
    compute_capacity: f64,
    edge: EdgeId,
}

#[derive(Serialize, Deserialize)]
struct EdgeEntry {
    id: EdgeId,
    memory_bytes: f64,
    compute_capacity: f64,
    uplink_bytes_per_sec: f64,
    /// Row-major `[model][task]` accuracy matrix under this edge's data.
    accuracy: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CloudEntry {
    uplink_bytes_per_sec: f64,
    accuracy: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WorkloadEntry {
    rates: Vec<Vec<f64>>,
}

/// Loads and validates a scenario from a TOML file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    scenario_from_toml(&text)
}

/// Parses and validates a scenario from TOML text.
pub fn scenario_from_toml(text: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    if file.schema_version != 1 {
        return Err(ScenarioError::Parse(format!(
            "unsupported schema_version {}",
            file.schema_version
        )));
    }
    for (i, c) in file.clients.iter().enumerate() {
        if c.id != i {
            return Err(ScenarioError::Parse(format!(
                "client ids must be contiguous, got {} at {i}",
                c.id
            )));
        }
    }
    for (i, e) in file.edges.iter().enumerate() {
        if e.id != i {
            return Err(ScenarioError::Parse(format!(
                "edge ids must be contiguous, got {} at {i}",
                e.id
            )));
        }
    }
    let scenario = Scenario {
        models: file.models,
        tasks: file.tasks,
        topology: Topology {
            clients: file
                .clients
                .iter()
                .map(|c| NodeBudget {
                    memory_bytes: c.memory_bytes,
                    compute_capacity: c.compute_capacity,
                })
                .collect(),
            edges: file
                .edges
                .iter()
                .map(|e| NodeBudget {
                    memory_bytes: e.memory_bytes,
                    compute_capacity: e.compute_capacity,
                })
                .collect(),
            assignment: file.clients.iter().map(|c| c.edge).collect(),
            edge_uplink: file.edges.iter().map(|e| e.uplink_bytes_per_sec).collect(),
            cloud_uplink: file.cloud.uplink_bytes_per_sec,
        },
        accuracy: AccuracyTable {
            edge: file.edges.into_iter().map(|e| e.accuracy).collect(),
            cloud: file.cloud.accuracy,
            rho: file.rho,
        },
        workload: Workload {
            rates: file.workload.rates,
        },
        batching: file.batching,
        mode: file.mode,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Serializes a scenario back to the TOML schema.
pub fn scenario_to_toml(s: &Scenario) -> Result<String, ScenarioError> {
    let file = ScenarioFile {
        schema_version: 1,
        mode: s.mode,
        rho: s.accuracy.rho,
        models: s.models.clone(),
        tasks: s.tasks.clone(),
        clients: (0..s.n_clients())
            .map(|c| ClientEntry {
                id: c,
                memory_bytes: s.topology.clients[c].memory_bytes,
                compute_capacity: s.topology.clients[c].compute_capacity,
                edge: s.topology.assignment[c],
            })
            .collect(),
        edges: (0..s.n_edges())
            .map(|e| EdgeEntry {
                id: e,
                memory_bytes: s.topology.edges[e].memory_bytes,
                compute_capacity: s.topology.edges[e].compute_capacity,
                uplink_bytes_per_sec: s.topology.edge_uplink[e],
                accuracy: s.accuracy.edge[e].clone(),
            })
            .collect(),
        cloud: CloudEntry {
            uplink_bytes_per_sec: s.topology.cloud_uplink,
            accuracy: s.accuracy.cloud.clone(),
        },
        workload: WorkloadEntry {
            rates: s.workload.rates.clone(),
        },
        batching: s.batching,
    };
    toml::to_string_pretty(&file).map_err(|e| ScenarioError::Parse(e.to_string()))
}

pub fn save_scenario(s: &Scenario, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    std::fs::write(path, scenario_to_toml(s)?)?;
    Ok(())
}

/// Deterministic digest over canonicalized scenario fields, used to tag
/// result files. Insensitive to key ordering in the input file, sensitive to
/// any value change.
pub fn canonical_hash(s: &Scenario) -> String {
    let mut h = Sha256::new();
    let put_f64 = |h: &mut Sha256, x: f64| h.update(x.to_bits().to_be_bytes());
    let put_usize = |h: &mut Sha256, x: usize| h.update((x as u64).to_be_bytes());

    h.update(b"hio-scenario-v1");
    h.update(match s.mode {
        Mode::Plain => b"plain".as_slice(),
        Mode::Batching => b"batching".as_slice(),
    });
    put_usize(&mut h, s.models.len());
    for m in &s.models {
        put_usize(&mut h, m.id);
        put_f64(&mut h, m.memory_bytes);
        put_f64(&mut h, m.compute_per_query);
        match &m.setup_cost {
            None => h.update(b"-"),
            Some(costs) => {
                h.update(b"+");
                for &v in costs {
                    put_f64(&mut h, v);
                }
            }
        }
        put_usize(&mut h, m.supported_tasks.len());
        for &t in &m.supported_tasks {
            put_usize(&mut h, t);
        }
    }
    put_usize(&mut h, s.tasks.len());
    for t in &s.tasks {
        put_usize(&mut h, t.id);
        put_f64(&mut h, t.input_bytes);
    }
    put_usize(&mut h, s.topology.clients.len());
    for (c, b) in s.topology.clients.iter().enumerate() {
        put_f64(&mut h, b.memory_bytes);
        put_f64(&mut h, b.compute_capacity);
        put_usize(&mut h, s.topology.assignment[c]);
    }
    put_usize(&mut h, s.topology.edges.len());
    for (e, b) in s.topology.edges.iter().enumerate() {
        put_f64(&mut h, b.memory_bytes);
        put_f64(&mut h, b.compute_capacity);
        put_f64(&mut h, s.topology.edge_uplink[e]);
        for &a in &s.accuracy.edge[e] {
            put_f64(&mut h, a);
        }
    }
    put_f64(&mut h, s.topology.cloud_uplink);
    for &a in &s.accuracy.cloud {
        put_f64(&mut h, a);
    }
    put_f64(&mut h, s.accuracy.rho);
    for row in &s.workload.rates {
        for &r in row {
            put_f64(&mut h, r);
        }
    }
    match s.batching {
        None => h.update(b"-"),
        Some(b) => {
            h.update(b"+");
            put_f64(&mut h, b.interval_sec);
        }
    }
    let digest = h.finalize();
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

// ---------------------------------------------------------------------------
// Plans
// ---------------------------------------------------------------------------

/// One candidate solution: onloading sets, task assignments and offload rates.
///
/// `None` assignments denote the virtual null model (zero accuracy, zero
/// cost). Offload fractions satisfy `0 <= cloud_offload <= client_offload <= 1`
/// in any feasible plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    /// Onloaded model ids per client, sorted ascending.
    pub client_models: Vec<Vec<ModelId>>,
    /// Onloaded model ids per edge, sorted ascending.
    pub edge_models: Vec<Vec<ModelId>>,
    /// Serving model per `[client][task]`.
    pub client_assignment: Vec<Vec<Option<ModelId>>>,
    /// Serving model per `[edge][task]`.
    pub edge_assignment: Vec<Vec<Option<ModelId>>>,
    /// Fraction of task queries sent from client to its edge, `[client][task]`.
    pub client_offload: Vec<Vec<f64>>,
    /// Fraction of task queries forwarded on to the cloud, `[client][task]`.
    pub cloud_offload: Vec<Vec<f64>>,
}

impl Plan {
    /// The all-local, all-null plan: nothing onloaded, nothing offloaded.
    pub fn empty(s: &Scenario) -> Self {
        Plan {
            client_models: vec![Vec::new(); s.n_clients()],
            edge_models: vec![Vec::new(); s.n_edges()],
            client_assignment: vec![vec![None; s.n_tasks()]; s.n_clients()],
            edge_assignment: vec![vec![None; s.n_tasks()]; s.n_edges()],
            client_offload: vec![vec![0.0; s.n_tasks()]; s.n_clients()],
            cloud_offload: vec![vec![0.0; s.n_tasks()]; s.n_clients()],
        }
    }

    fn check_ids(&self, s: &Scenario) -> Result<(), PlanError> {
        let nm = s.n_models();
        if self.client_models.len() != s.n_clients()
            || self.edge_models.len() != s.n_edges()
            || self.client_assignment.len() != s.n_clients()
            || self.edge_assignment.len() != s.n_edges()
            || self.client_offload.len() != s.n_clients()
            || self.cloud_offload.len() != s.n_clients()
        {
            return Err(PlanError::Shape("node dimension mismatch".into()));
        }
        let all_rows = self
            .client_assignment
            .iter()
            .chain(self.edge_assignment.iter());
        for row in all_rows {
            if row.len() != s.n_tasks() {
                return Err(PlanError::Shape("task dimension mismatch".into()));
            }
            if let Some(m) = row.iter().flatten().find(|&&m| m >= nm) {
                return Err(PlanError::UnresolvedId(format!("model {m}")));
            }
        }
        for row in self.client_offload.iter().chain(self.cloud_offload.iter()) {
            if row.len() != s.n_tasks() {
                return Err(PlanError::Shape("offload dimension mismatch".into()));
            }
        }
        for set in self.client_models.iter().chain(self.edge_models.iter()) {
            if let Some(&m) = set.iter().find(|&&m| m >= nm) {
                return Err(PlanError::UnresolvedId(format!("model {m}")));
            }
        }
        Ok(())
    }

    /// Flat key/value serialization with offload fractions at full precision.
    pub fn to_flat_json(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert(
            "schema_version".to_string(),
            serde_json::Value::from(1u32),
        );
        for (c, set) in self.client_models.iter().enumerate() {
            map.insert(format!("x.client.{c}"), serde_json::Value::from(set.clone()));
        }
        for (e, set) in self.edge_models.iter().enumerate() {
            map.insert(format!("x.edge.{e}"), serde_json::Value::from(set.clone()));
        }
        for (c, row) in self.client_assignment.iter().enumerate() {
            for (t, z) in row.iter().enumerate() {
                map.insert(format!("z.client.{c}.{t}"), serde_json::Value::from(*z));
            }
        }
        for (e, row) in self.edge_assignment.iter().enumerate() {
            for (t, z) in row.iter().enumerate() {
                map.insert(format!("z.edge.{e}.{t}"), serde_json::Value::from(*z));
            }
        }
        for (c, row) in self.client_offload.iter().enumerate() {
            for (t, &o) in row.iter().enumerate() {
                map.insert(format!("o.client.{c}.{t}"), serde_json::Value::from(o));
            }
        }
        for (c, row) in self.cloud_offload.iter().enumerate() {
            for (t, &o) in row.iter().enumerate() {
                map.insert(format!("o.edge.{c}.{t}"), serde_json::Value::from(o));
            }
        }
        serde_json::to_string_pretty(&map).expect("plan serialization cannot fail")
    }

    /// Parses a plan serialized by [`Plan::to_flat_json`]. The scenario fixes
    /// the expected dimensions.
    pub fn from_flat_json(s: &Scenario, text: &str) -> Result<Self, PlanError> {
        let map: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(text).map_err(|e| PlanError::Parse(e.to_string()))?;
        let mut plan = Plan::empty(s);
        let get = |v: &serde_json::Value| -> Result<f64, PlanError> {
            v.as_f64()
                .ok_or_else(|| PlanError::Parse("expected number".into()))
        };
        for (key, value) in &map {
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["schema_version"] => {}
                ["x", "client", c] => {
                    let c: usize = c.parse().map_err(|_| PlanError::Parse(key.clone()))?;
                    let ids: Vec<ModelId> = serde_json::from_value(value.clone())
                        .map_err(|e| PlanError::Parse(e.to_string()))?;
                    *plan
                        .client_models
                        .get_mut(c)
                        .ok_or_else(|| PlanError::UnresolvedId(key.clone()))? = ids;
                }
                ["x", "edge", e] => {
                    let e: usize = e.parse().map_err(|_| PlanError::Parse(key.clone()))?;
                    let ids: Vec<ModelId> = serde_json::from_value(value.clone())
                        .map_err(|e| PlanError::Parse(e.to_string()))?;
                    *plan
                        .edge_models
                        .get_mut(e)
                        .ok_or_else(|| PlanError::UnresolvedId(key.clone()))? = ids;
                }
                ["z", kind, n, t] => {
                    let n: usize = n.parse().map_err(|_| PlanError::Parse(key.clone()))?;
                    let t: usize = t.parse().map_err(|_| PlanError::Parse(key.clone()))?;
                    let z: Option<ModelId> = serde_json::from_value(value.clone())
                        .map_err(|e| PlanError::Parse(e.to_string()))?;
                    let rows = if *kind == "client" {
                        &mut plan.client_assignment
                    } else {
                        &mut plan.edge_assignment
                    };
                    *rows
                        .get_mut(n)
                        .and_then(|row| row.get_mut(t))
                        .ok_or_else(|| PlanError::UnresolvedId(key.clone()))? = z;
                }
                ["o", kind, c, t] => {
                    let c: usize = c.parse().map_err(|_| PlanError::Parse(key.clone()))?;
                    let t: usize = t.parse().map_err(|_| PlanError::Parse(key.clone()))?;
                    let rows = if *kind == "client" {
                        &mut plan.client_offload
                    } else {
                        &mut plan.cloud_offload
                    };
                    *rows
                        .get_mut(c)
                        .and_then(|row| row.get_mut(t))
                        .ok_or_else(|| PlanError::UnresolvedId(key.clone()))? = get(value)?;
                }
                _ => return Err(PlanError::Parse(format!("unknown key {key}"))),
            }
        }
        plan.check_ids(s)?;
        Ok(plan)
    }
}

// ---------------------------------------------------------------------------
// Constraint report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Client(ClientId),
    Edge(EdgeId),
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Client(c) => write!(f, "client {c}"),
            NodeRef::Edge(e) => write!(f, "edge {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    ClientMemory(ClientId),
    EdgeMemory(EdgeId),
    ClientCompute(ClientId),
    EdgeCompute(EdgeId),
    EdgeBatchLatency(EdgeId),
    EdgeUplink(EdgeId),
    CloudUplink,
    /// Every assignment must pick an onloaded model or the null model.
    Assignment(NodeRef),
    /// `0 <= cloud_offload <= client_offload <= 1` per (client, task).
    OffloadChain(ClientId, TaskId),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::ClientMemory(c) => write!(f, "client-memory[{c}]"),
            Constraint::EdgeMemory(e) => write!(f, "edge-memory[{e}]"),
            Constraint::ClientCompute(c) => write!(f, "client-compute[{c}]"),
            Constraint::EdgeCompute(e) => write!(f, "edge-compute[{e}]"),
            Constraint::EdgeBatchLatency(e) => write!(f, "edge-batch-latency[{e}]"),
            Constraint::EdgeUplink(e) => write!(f, "edge-uplink[{e}]"),
            Constraint::CloudUplink => write!(f, "cloud-uplink"),
            Constraint::Assignment(n) => write!(f, "assignment[{n}]"),
            Constraint::OffloadChain(c, t) => write!(f, "offload-chain[{c},{t}]"),
        }
    }
}

/// Signed slack of one constraint; negative slack is a violation. `scale` is
/// the budget the relative feasibility tolerance applies to (1 for binary and
/// unit-interval constraints).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSlack {
    pub constraint: Constraint,
    pub slack: f64,
    pub scale: f64,
}

impl ConstraintSlack {
    pub fn is_violated(&self, rel_tol: f64) -> bool {
        self.slack < -rel_tol * self.scale
    }

    /// Violation magnitude relative to the constraint's scale; zero if slack
    /// is nonnegative.
    pub fn relative_violation(&self) -> f64 {
        if self.slack >= 0.0 {
            0.0
        } else if self.scale > 0.0 {
            -self.slack / self.scale
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintReport {
    pub slacks: Vec<ConstraintSlack>,
}

impl ConstraintReport {
    pub fn is_feasible(&self, rel_tol: f64) -> bool {
        self.slacks.iter().all(|s| !s.is_violated(rel_tol))
    }

    pub fn max_relative_violation(&self) -> f64 {
        self.slacks
            .iter()
            .map(|s| s.relative_violation())
            .fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&ConstraintSlack> {
        self.slacks
            .iter()
            .max_by(|a, b| a.relative_violation().total_cmp(&b.relative_violation()))
    }

    pub fn find(&self, constraint: &Constraint) -> Option<&ConstraintSlack> {
        self.slacks.iter().find(|s| &s.constraint == constraint)
    }
}

/// Evaluates the signed slack of every constraint for `(s, p)`.
///
/// Memory, compute (or batching latency, in batching mode), uplink, assignment
/// validity and the offload chain are each reported; negative slack means the
/// plan violates that constraint.
pub fn validate_plan(s: &Scenario, p: &Plan) -> Result<ConstraintReport, PlanError> {
    p.check_ids(s)?;
    let nt = s.n_tasks();
    let mut slacks = Vec::new();

    for (c, set) in p.client_models.iter().enumerate() {
        let used: f64 = set.iter().map(|&m| s.models[m].memory_bytes).sum();
        let budget = s.topology.clients[c].memory_bytes;
        slacks.push(ConstraintSlack {
            constraint: Constraint::ClientMemory(c),
            slack: budget - used,
            scale: budget,
        });
    }
    for (e, set) in p.edge_models.iter().enumerate() {
        let used: f64 = set.iter().map(|&m| s.models[m].memory_bytes).sum();
        let budget = s.topology.edges[e].memory_bytes;
        slacks.push(ConstraintSlack {
            constraint: Constraint::EdgeMemory(e),
            slack: budget - used,
            scale: budget,
        });
    }

    for c in 0..s.n_clients() {
        let mut used = 0.0;
        for t in 0..nt {
            if let Some(m) = p.client_assignment[c][t] {
                used += s.workload.rates[c][t]
                    * (1.0 - p.client_offload[c][t])
                    * s.models[m].compute_per_query;
            }
        }
        let budget = s.topology.clients[c].compute_capacity;
        slacks.push(ConstraintSlack {
            constraint: Constraint::ClientCompute(c),
            slack: budget - used,
            scale: budget,
        });
    }

    for e in 0..s.n_edges() {
        let clients = s.clients_of(e);
        match s.mode {
            Mode::Plain => {
                let mut used = 0.0;
                for t in 0..nt {
                    if let Some(m) = p.edge_assignment[e][t] {
                        let lam: f64 = clients
                            .iter()
                            .map(|&c| {
                                s.workload.rates[c][t]
                                    * (p.client_offload[c][t] - p.cloud_offload[c][t])
                            })
                            .sum();
                        used += lam * s.models[m].compute_per_query;
                    }
                }
                let budget = s.topology.edges[e].compute_capacity;
                slacks.push(ConstraintSlack {
                    constraint: Constraint::EdgeCompute(e),
                    slack: budget - used,
                    scale: budget,
                });
            }
            Mode::Batching => {
                let t_b = s.batch_interval().expect("validated batching scenario");
                let beta = s.topology.edges[e].compute_capacity;
                let mut used = 0.0;
                for t in 0..nt {
                    if let Some(m) = p.edge_assignment[e][t] {
                        let lam: f64 = clients
                            .iter()
                            .map(|&c| {
                                s.workload.rates[c][t]
                                    * (p.client_offload[c][t] - p.cloud_offload[c][t])
                            })
                            .sum();
                        if lam > 0.0 {
                            used += s.setup_cost(m, e);
                        }
                        used += s.models[m].compute_per_query / beta * lam * t_b;
                    }
                }
                slacks.push(ConstraintSlack {
                    constraint: Constraint::EdgeBatchLatency(e),
                    slack: t_b - used,
                    scale: t_b,
                });
            }
        }

        let mut bytes = 0.0;
        for &c in &clients {
            for t in 0..nt {
                bytes += s.workload.rates[c][t] * p.client_offload[c][t] * s.tasks[t].input_bytes;
            }
        }
        let budget = s.topology.edge_uplink[e];
        slacks.push(ConstraintSlack {
            constraint: Constraint::EdgeUplink(e),
            slack: budget - bytes,
            scale: budget,
        });
    }

    let mut cloud_bytes = 0.0;
    for c in 0..s.n_clients() {
        for t in 0..nt {
            cloud_bytes +=
                s.workload.rates[c][t] * p.cloud_offload[c][t] * s.tasks[t].input_bytes;
        }
    }
    slacks.push(ConstraintSlack {
        constraint: Constraint::CloudUplink,
        slack: s.topology.cloud_uplink - cloud_bytes,
        scale: s.topology.cloud_uplink,
    });

    for (c, row) in p.client_assignment.iter().enumerate() {
        let ok = row
            .iter()
            .flatten()
            .all(|m| p.client_models[c].contains(m));
        slacks.push(ConstraintSlack {
            constraint: Constraint::Assignment(NodeRef::Client(c)),
            slack: if ok { 0.0 } else { -1.0 },
            scale: 1.0,
        });
    }
    for (e, row) in p.edge_assignment.iter().enumerate() {
        let ok = row.iter().flatten().all(|m| p.edge_models[e].contains(m));
        slacks.push(ConstraintSlack {
            constraint: Constraint::Assignment(NodeRef::Edge(e)),
            slack: if ok { 0.0 } else { -1.0 },
            scale: 1.0,
        });
    }

    for c in 0..s.n_clients() {
        for t in 0..nt {
            let oc = p.client_offload[c][t];
            let oce = p.cloud_offload[c][t];
            slacks.push(ConstraintSlack {
                constraint: Constraint::OffloadChain(c, t),
                slack: oce.min(oc - oce).min(1.0 - oc),
                scale: 1.0,
            });
        }
    }

    Ok(ConstraintReport { slacks })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_toml() -> String {
        r#"
schema_version = 1
mode = "plain"
rho = 1.0

[[models]]
id = 0
memory_bytes = 5.0e7
compute_per_query = 1.0e9
supported_tasks = [0]

[[tasks]]
id = 0
input_bytes = 1.0e6

[[clients]]
id = 0
memory_bytes = 1.0e8
compute_capacity = 1.0e10
edge = 0

[[edges]]
id = 0
memory_bytes = 2.0e8
compute_capacity = 1.0e12
uplink_bytes_per_sec = 5.0e6
accuracy = [0.8]

[cloud]
uplink_bytes_per_sec = 2.0e6
accuracy = [1.0]

[workload]
rates = [[10.0]]
"#
        .to_string()
    }

    #[test]
    fn loads_minimal_singleton() {
        let s = scenario_from_toml(&toy_toml()).unwrap();
        assert_eq!(s.n_models(), 1);
        assert_eq!(s.n_clients(), 1);
        assert_eq!(s.lambda_total(), 10.0);
    }

    #[test]
    fn rejects_accuracy_out_of_range() {
        let text = toy_toml().replace("accuracy = [0.8]", "accuracy = [1.2]");
        let err = scenario_from_toml(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("accuracy out of [0,1]"), "{msg}");
    }

    #[test]
    fn rejects_cloud_below_edge() {
        let text = toy_toml().replace("accuracy = [1.0]", "accuracy = [0.5]");
        let err = scenario_from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("dominate"), "{err}");
    }

    #[test]
    fn taskonomy_scale_topology() {
        // 30 clients over 3 edges, 10 per edge.
        let mut s = scenario_from_toml(&toy_toml()).unwrap();
        s.topology.clients = vec![s.topology.clients[0]; 30];
        s.topology.edges = vec![s.topology.edges[0]; 3];
        s.topology.assignment = (0..30).map(|c| c / 10).collect();
        s.topology.edge_uplink = vec![5.0e6; 3];
        s.accuracy.edge = vec![s.accuracy.edge[0].clone(); 3];
        s.workload.rates = vec![vec![10.0]; 30];
        s.validate().unwrap();
        assert_eq!(s.n_clients(), 30);
        assert_eq!(s.n_edges(), 3);
        for e in 0..3 {
            assert_eq!(s.clients_of(e).len(), 10);
        }
    }

    #[test]
    fn digest_is_deterministic_and_sensitive() {
        let s1 = scenario_from_toml(&toy_toml()).unwrap();
        let s2 = scenario_from_toml(&toy_toml()).unwrap();
        assert_eq!(canonical_hash(&s1), canonical_hash(&s2));

        let mut s3 = s1.clone();
        s3.workload.rates[0][0] += 1e-6;
        assert_ne!(canonical_hash(&s1), canonical_hash(&s3));
    }

    #[test]
    fn digest_ignores_key_order() {
        // Same content with table keys permuted.
        let reordered = r#"
mode = "plain"
schema_version = 1
rho = 1.0

[[models]]
supported_tasks = [0]
compute_per_query = 1.0e9
id = 0
memory_bytes = 5.0e7

[[tasks]]
input_bytes = 1.0e6
id = 0

[[clients]]
edge = 0
compute_capacity = 1.0e10
id = 0
memory_bytes = 1.0e8

[[edges]]
accuracy = [0.8]
uplink_bytes_per_sec = 5.0e6
id = 0
memory_bytes = 2.0e8
compute_capacity = 1.0e12

[cloud]
accuracy = [1.0]
uplink_bytes_per_sec = 2.0e6

[workload]
rates = [[10.0]]
"#;
        let a = scenario_from_toml(&toy_toml()).unwrap();
        let b = scenario_from_toml(reordered).unwrap();
        assert_eq!(canonical_hash(&a), canonical_hash(&b));
    }

    #[test]
    fn scenario_roundtrip_is_structurally_equal() {
        let s = scenario_from_toml(&toy_toml()).unwrap();
        let text = scenario_to_toml(&s).unwrap();
        let s2 = scenario_from_toml(&text).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn empty_plan_has_full_memory_slack() {
        let s = scenario_from_toml(&toy_toml()).unwrap();
        let p = Plan::empty(&s);
        let report = validate_plan(&s, &p).unwrap();
        let slack = report.find(&Constraint::ClientMemory(0)).unwrap();
        assert_eq!(slack.slack, 1.0e8);
        assert!(report.is_feasible(FEASIBILITY_REL_TOL));
    }

    #[test]
    fn oversized_model_reports_negative_memory_slack() {
        // A 73.66 MB model on a 24 MB client leaves -49.66 MB of slack.
        let mut s = scenario_from_toml(&toy_toml()).unwrap();
        s.models[0].memory_bytes = 73.66e6;
        s.topology.clients[0].memory_bytes = 24.0e6;
        s.validate().unwrap();
        let mut p = Plan::empty(&s);
        p.client_models[0] = vec![0];
        let report = validate_plan(&s, &p).unwrap();
        let slack = report.find(&Constraint::ClientMemory(0)).unwrap();
        assert!((slack.slack - (-49.66e6)).abs() < 1e-3);
        assert!(slack.is_violated(FEASIBILITY_REL_TOL));
    }

    #[test]
    fn plan_roundtrip_through_flat_json() {
        let s = scenario_from_toml(&toy_toml()).unwrap();
        let mut p = Plan::empty(&s);
        p.client_models[0] = vec![0];
        p.client_assignment[0][0] = Some(0);
        p.client_offload[0][0] = 0.123456789123;
        p.cloud_offload[0][0] = 0.1;
        let text = p.to_flat_json();
        let p2 = Plan::from_flat_json(&s, &text).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn assignment_outside_onloaded_set_is_flagged() {
        let s = scenario_from_toml(&toy_toml()).unwrap();
        let mut p = Plan::empty(&s);
        p.client_assignment[0][0] = Some(0); // model 0 is not onloaded
        let report = validate_plan(&s, &p).unwrap();
        let slack = report
            .find(&Constraint::Assignment(NodeRef::Client(0)))
            .unwrap();
        assert_eq!(slack.slack, -1.0);
    }
}
