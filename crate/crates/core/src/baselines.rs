//! Reference methods: an exhaustive enumeration oracle over onloading
//! configurations, three alternating baselines (greedy, per-node optimal,
//! random), and the all-local lower bound.
//!
//! The oracle enumerates every memory-feasible onloading set per node with
//! the induced task assignment, prunes dominated configurations, solves the
//! offloading LP for each combination and keeps the best. It is the ground
//! truth the optimizer is measured against at desk scale.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::gen::rng::CounterRng;
use crate::j3o::{
    alternating_optimize, repair_batch_latency, AoConfig, AoTrace, LpFailure, SolveError,
};
use crate::lp::{build_offloading_lp, solve_lp, EdgeConstraint, LpStatus};
use crate::model::{Mode, ModelId, NodeRef, Plan, Scenario, FEASIBILITY_REL_TOL};
use crate::objective::eval_objective;
use crate::onload::{greedy_onloading, node_views, Onloading};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MinlpOracle,
    J3o,
    Baj3o,
    GreedyAo,
    OptAo,
    RandAo,
    FullLocal,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::MinlpOracle => "oracle",
            Method::J3o => "j3o",
            Method::Baj3o => "baj3o",
            Method::GreedyAo => "greedy_ao",
            Method::OptAo => "opt_ao",
            Method::RandAo => "rand_ao",
            Method::FullLocal => "full_local",
        }
    }

    pub fn all() -> &'static [Method] {
        &[
            Method::MinlpOracle,
            Method::J3o,
            Method::Baj3o,
            Method::GreedyAo,
            Method::OptAo,
            Method::RandAo,
            Method::FullLocal,
        ]
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::all()
            .iter()
            .copied()
            .find(|m| m.tag() == s)
            .ok_or_else(|| format!("unknown method tag {s:?}"))
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl serde::Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.tag())
    }
}

impl<'de> serde::Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let tag = String::deserialize(deserializer)?;
        tag.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub method: Method,
    pub plan: Plan,
    /// Accuracy-form objective of the returned plan.
    pub objective: f64,
    pub runtime_ms: f64,
    /// Onloading configurations the oracle evaluated.
    pub enumerated: Option<u64>,
    pub trace: Option<AoTrace>,
}

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("instance too large for oracle: at least {0} onloading configurations exceed the limit {1}")]
    TooLarge(u128, u64),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

// ---------------------------------------------------------------------------
// Per-node enumeration
// ---------------------------------------------------------------------------

/// One memory-feasible onloading choice at a node with its induced
/// assignment and per-task signature used for domination pruning.
#[derive(Debug, Clone)]
pub(crate) struct NodeConfig {
    pub set: Vec<ModelId>,
    pub z: Vec<Option<ModelId>>,
    /// Accuracy of the induced assignment per task.
    pub acc: Vec<f64>,
    /// Compute per query of the induced assignment per task.
    pub w: Vec<f64>,
    /// Batch setup cost of the induced assignment per task (edges only).
    pub nu: Vec<f64>,
}

/// Walks every memory-feasible subset in deterministic pre-order. Returns
/// `None` once more than `cap` subsets exist.
fn feasible_sets(mem: &[f64], budget: f64, cap: usize) -> Option<Vec<Vec<ModelId>>> {
    let n = mem.len();
    let mut out: Vec<Vec<ModelId>> = Vec::new();
    let mut current: Vec<ModelId> = Vec::new();

    fn rec(
        start: usize,
        mem: &[f64],
        budget_left: f64,
        current: &mut Vec<ModelId>,
        out: &mut Vec<Vec<ModelId>>,
        cap: usize,
    ) -> bool {
        if out.len() >= cap {
            return false;
        }
        out.push(current.clone());
        for j in start..mem.len() {
            if mem[j] <= budget_left {
                current.push(j);
                let ok = rec(j + 1, mem, budget_left - mem[j], current, out, cap);
                current.pop();
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    if rec(0, mem, budget, &mut current, &mut out, cap + 1) && out.len() <= cap {
        Some(out)
    } else {
        let _ = n;
        None
    }
}

fn count_feasible_sets(mem: &[f64], budget: f64, cap: u128) -> u128 {
    fn rec(start: usize, mem: &[f64], budget_left: f64, count: &mut u128, cap: u128) {
        if *count > cap {
            return;
        }
        for j in start..mem.len() {
            if mem[j] <= budget_left {
                *count += 1;
                rec(j + 1, mem, budget_left - mem[j], count, cap);
                if *count > cap {
                    return;
                }
            }
        }
    }
    let mut count = 1; // the empty set
    rec(0, mem, budget, &mut count, cap);
    count
}

/// All memory-feasible configurations of one node with dominated entries
/// removed: a configuration is dropped when another covers every task with
/// at least the accuracy at no more compute (and, in batching mode, no more
/// setup cost). Sound because coverage is monotone and every constraint is
/// monotone in the per-task signature.
pub(crate) fn node_configs(
    s: &Scenario,
    node: NodeRef,
    cap: usize,
) -> Option<Vec<NodeConfig>> {
    let nt = s.n_tasks();
    let mem: Vec<f64> = s.models.iter().map(|m| m.memory_bytes).collect();
    let (budget, accuracy_of): (f64, Box<dyn Fn(ModelId, usize) -> f64>) = match node {
        NodeRef::Client(c) => (
            s.topology.clients[c].memory_bytes,
            Box::new(move |m, t| s.client_accuracy(c, m, t)),
        ),
        NodeRef::Edge(e) => (
            s.topology.edges[e].memory_bytes,
            Box::new(move |m, t| s.edge_accuracy(e, m, t)),
        ),
    };
    let prune_nu = s.mode == Mode::Batching && matches!(node, NodeRef::Edge(_));

    let sets = feasible_sets(&mem, budget, cap)?;
    let mut configs: Vec<NodeConfig> = sets
        .into_iter()
        .map(|set| {
            let mut z = vec![None; nt];
            let mut acc = vec![0.0; nt];
            for (t, slot) in z.iter_mut().enumerate() {
                for &m in &set {
                    let a = accuracy_of(m, t);
                    if a > acc[t] {
                        acc[t] = a;
                        *slot = Some(m);
                    }
                }
            }
            let w: Vec<f64> = z
                .iter()
                .map(|m| m.map_or(0.0, |m| s.models[m].compute_per_query))
                .collect();
            let nu: Vec<f64> = match node {
                NodeRef::Edge(e) => z
                    .iter()
                    .map(|m| m.map_or(0.0, |m| s.setup_cost(m, e)))
                    .collect(),
                NodeRef::Client(_) => vec![0.0; nt],
            };
            NodeConfig { set, z, acc, w, nu }
        })
        .collect();

    let dominated = |a: &NodeConfig, b: &NodeConfig| -> bool {
        // Does b dominate a?
        (0..nt).all(|t| b.acc[t] >= a.acc[t] && b.w[t] <= a.w[t])
            && (!prune_nu || (0..nt).all(|t| b.nu[t] <= a.nu[t]))
    };
    let keep: Vec<bool> = (0..configs.len())
        .map(|i| {
            !(0..configs.len()).any(|j| {
                j != i
                    && dominated(&configs[i], &configs[j])
                    && (!dominated(&configs[j], &configs[i]) || j < i)
            })
        })
        .collect();
    let mut kept = Vec::with_capacity(configs.len());
    for (i, config) in configs.drain(..).enumerate() {
        if keep[i] {
            kept.push(config);
        }
    }
    Some(kept)
}

fn apply_configs(s: &Scenario, plan: &mut Plan, pick: impl Fn(usize) -> NodeConfig) {
    for c in 0..s.n_clients() {
        let config = pick(c);
        plan.client_models[c] = config.set;
        plan.client_assignment[c] = config.z;
    }
    for e in 0..s.n_edges() {
        let config = pick(s.n_clients() + e);
        plan.edge_models[e] = config.set;
        plan.edge_assignment[e] = config.z;
    }
}

// ---------------------------------------------------------------------------
// Exhaustive oracle
// ---------------------------------------------------------------------------

/// Best objective over the offloading polytope for a fixed onloading, or
/// `None` when no feasible offloading exists. In batching mode every support
/// pattern over edge-assigned tasks is tried, so the true indicator-form
/// latency constraint is honored exactly.
fn best_offloading(s: &Scenario, plan: &Plan) -> Option<(f64, Plan)> {
    match s.mode {
        Mode::Plain => {
            let lp = build_offloading_lp(s, plan, EdgeConstraint::Compute).ok()?;
            let sol = solve_lp(&lp);
            if sol.status != LpStatus::Optimal {
                return None;
            }
            let mut solved = plan.clone();
            crate::lp::apply_solution(s, &lp, &sol, &mut solved);
            let f = eval_objective(s, &solved).expect("plan shapes match").total;
            Some((f, solved))
        }
        Mode::Batching => {
            let nt = s.n_tasks();
            let per_edge_tasks: Vec<Vec<usize>> = (0..s.n_edges())
                .map(|e| {
                    (0..nt)
                        .filter(|&t| plan.edge_assignment[e][t].is_some())
                        .collect()
                })
                .collect();
            let mask_count: Vec<usize> = per_edge_tasks.iter().map(|ts| 1 << ts.len()).collect();
            let total: usize = mask_count.iter().product();
            let mut best: Option<(f64, Plan)> = None;
            for combo in 0..total {
                let mut rem = combo;
                let mut patterns = vec![vec![false; nt]; s.n_edges()];
                for e in 0..s.n_edges() {
                    let mask = rem % mask_count[e];
                    rem /= mask_count[e];
                    for (bit, &t) in per_edge_tasks[e].iter().enumerate() {
                        patterns[e][t] = mask & (1 << bit) != 0;
                    }
                }
                let Ok(lp) = build_offloading_lp(s, plan, EdgeConstraint::BatchingPattern(&patterns))
                else {
                    continue;
                };
                let sol = solve_lp(&lp);
                if sol.status != LpStatus::Optimal {
                    continue;
                }
                let mut solved = plan.clone();
                crate::lp::apply_solution(s, &lp, &sol, &mut solved);
                let f = eval_objective(s, &solved).expect("plan shapes match").total;
                if best.as_ref().map_or(true, |(b, _)| f > *b) {
                    best = Some((f, solved));
                }
            }
            best
        }
    }
}

/// Exhaustively enumerates every memory-feasible onloading combination
/// (after domination pruning), solves the offloading LP for each, and
/// returns the argmax. Guarded by `limit` on the raw combination count.
pub fn minlp_oracle(s: &Scenario, limit: u64) -> Result<BaselineResult, BaselineError> {
    let started = Instant::now();
    let mem: Vec<f64> = s.models.iter().map(|m| m.memory_bytes).collect();

    let mut raw_product: u128 = 1;
    for c in 0..s.n_clients() {
        let cnt = count_feasible_sets(&mem, s.topology.clients[c].memory_bytes, limit as u128);
        raw_product = raw_product.saturating_mul(cnt);
    }
    for e in 0..s.n_edges() {
        let cnt = count_feasible_sets(&mem, s.topology.edges[e].memory_bytes, limit as u128);
        raw_product = raw_product.saturating_mul(cnt);
    }
    if raw_product > limit as u128 {
        return Err(BaselineError::TooLarge(raw_product, limit));
    }

    let n_nodes = s.n_clients() + s.n_edges();
    let configs: Vec<Vec<NodeConfig>> = (0..n_nodes)
        .map(|v| {
            let node = if v < s.n_clients() {
                NodeRef::Client(v)
            } else {
                NodeRef::Edge(v - s.n_clients())
            };
            node_configs(s, node, limit as usize).expect("guard admitted this node")
        })
        .collect();

    let total: usize = configs.iter().map(Vec::len).product();
    let template = Plan::empty(s);

    let decode = |idx: usize| -> Plan {
        let mut rem = idx;
        let mut plan = template.clone();
        let picks: Vec<usize> = configs
            .iter()
            .map(|node| {
                let p = rem % node.len();
                rem /= node.len();
                p
            })
            .collect();
        apply_configs(s, &mut plan, |v| configs[v][picks[v]].clone());
        plan
    };

    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let plan = decode(idx);
            best_offloading(s, &plan).map(|(f, _)| (f, idx))
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (None, x) | (x, None) => x,
                (Some((fa, ia)), Some((fb, ib))) => {
                    if fb > fa || (fb == fa && ib < ia) {
                        Some((fb, ib))
                    } else {
                        Some((fa, ia))
                    }
                }
            },
        );

    let (_, best_idx) = best.expect("the empty combination is always feasible");
    let plan = decode(best_idx);
    let (objective, plan) = best_offloading(s, &plan).expect("best index re-evaluates");

    Ok(BaselineResult {
        method: Method::MinlpOracle,
        plan,
        objective,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        enumerated: Some(total as u64),
        trace: None,
    })
}

// ---------------------------------------------------------------------------
// Alternating baselines
// ---------------------------------------------------------------------------

fn run_ao<F>(
    s: &Scenario,
    cfg: &AoConfig,
    method: Method,
    propose: F,
) -> Result<BaselineResult, BaselineError>
where
    F: FnMut(&Scenario, &Plan, Option<&crate::lp::SurrogateCoefficients>) -> Onloading,
{
    let started = Instant::now();
    let mut cfg = cfg.clone();
    cfg.batching = s.mode == Mode::Batching;
    let (mut plan, mut trace) = alternating_optimize(s, &cfg, LpFailure::Revert, propose)?;
    if s.mode == Mode::Batching {
        trace.repair_scale = repair_batch_latency(s, &mut plan)?;
    }
    let objective = eval_objective(s, &plan)
        .map_err(SolveError::from)?
        .total;
    Ok(BaselineResult {
        method,
        plan,
        objective,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        enumerated: None,
        trace: Some(trace),
    })
}

/// Alternating optimization with plain ratio-greedy onloading under memory
/// only; compute feasibility is restored by the offloading LP.
pub fn greedy_ao(s: &Scenario, cfg: &AoConfig) -> Result<BaselineResult, BaselineError> {
    run_ao(s, cfg, Method::GreedyAo, |s, plan, surrogate| {
        greedy_onloading(s, plan, surrogate)
    })
}

/// Alternating optimization whose onloading step is per-node exhaustive:
/// with offloading fixed the node subproblems are independent, so each node
/// picks its best compute-feasible configuration outright.
pub fn opt_ao(s: &Scenario, cfg: &AoConfig, limit: u64) -> Result<BaselineResult, BaselineError> {
    let n_nodes = s.n_clients() + s.n_edges();
    let configs: Vec<Vec<NodeConfig>> = (0..n_nodes)
        .map(|v| {
            let node = if v < s.n_clients() {
                NodeRef::Client(v)
            } else {
                NodeRef::Edge(v - s.n_clients())
            };
            node_configs(s, node, limit as usize)
                .ok_or(BaselineError::TooLarge(limit as u128 + 1, limit))
        })
        .collect::<Result<_, _>>()?;

    run_ao(s, cfg, Method::OptAo, move |s, plan, surrogate| {
        let views = node_views(s, plan, surrogate);
        let mut onl = Onloading {
            client_models: Vec::with_capacity(s.n_clients()),
            edge_models: Vec::with_capacity(s.n_edges()),
            client_assignment: Vec::with_capacity(s.n_clients()),
            edge_assignment: Vec::with_capacity(s.n_edges()),
        };
        for (v, view) in views.iter().enumerate() {
            let mut best: Option<(f64, &NodeConfig)> = None;
            for config in &configs[v] {
                if view.relative_violation(&config.z) > FEASIBILITY_REL_TOL {
                    continue;
                }
                let value = view.value(&config.z);
                if best.as_ref().map_or(true, |(b, _)| value > *b) {
                    best = Some((value, config));
                }
            }
            let config = best.expect("the empty configuration is always feasible").1;
            if v < s.n_clients() {
                onl.client_models.push(config.set.clone());
                onl.client_assignment.push(config.z.clone());
            } else {
                onl.edge_models.push(config.set.clone());
                onl.edge_assignment.push(config.z.clone());
            }
        }
        onl
    })
}

/// Alternating optimization with uniformly sampled memory-feasible onloading:
/// per node a seeded random permutation of the library is prefix-fitted into
/// the memory budget; proposals are accepted only on improvement.
pub fn rand_ao(s: &Scenario, cfg: &AoConfig, seed: u64) -> Result<BaselineResult, BaselineError> {
    let n_nodes = s.n_clients() + s.n_edges();
    let mut outer = 0u64;
    run_ao(s, cfg, Method::RandAo, move |s, plan, surrogate| {
        outer += 1;
        let views = node_views(s, plan, surrogate);
        let mut onl = Onloading {
            client_models: Vec::with_capacity(s.n_clients()),
            edge_models: Vec::with_capacity(s.n_edges()),
            client_assignment: Vec::with_capacity(s.n_clients()),
            edge_assignment: Vec::with_capacity(s.n_edges()),
        };
        for (v, view) in views.iter().enumerate() {
            let mut rng =
                CounterRng::substream_indexed(seed, "rand-ao", outer * n_nodes as u64 + v as u64);
            let mut order: Vec<ModelId> = (0..s.n_models()).collect();
            rng.shuffle(&mut order);
            let mut set = Vec::new();
            let mut mem_left = view.mem_budget;
            for m in order {
                if view.model_mem[m] <= mem_left {
                    mem_left -= view.model_mem[m];
                    set.push(m);
                }
            }
            set.sort_unstable();
            let z = view.induced_assignment(&set);
            if v < s.n_clients() {
                onl.client_models.push(set);
                onl.client_assignment.push(z);
            } else {
                onl.edge_models.push(set);
                onl.edge_assignment.push(z);
            }
        }
        onl
    })
}

/// Everything served at the clients: offloading pinned to zero and each
/// client picks its best onloading under memory and compute exhaustively.
pub fn full_local(s: &Scenario) -> Result<BaselineResult, BaselineError> {
    const CAP: usize = 1 << 20;
    let started = Instant::now();
    let mut plan = Plan::empty(s);
    let views = node_views(s, &plan, None);

    for c in 0..s.n_clients() {
        let configs = node_configs(s, NodeRef::Client(c), CAP)
            .ok_or(BaselineError::TooLarge(CAP as u128 + 1, CAP as u64))?;
        let view = &views[c];
        let mut best: Option<(f64, &NodeConfig)> = None;
        for config in &configs {
            if view.relative_violation(&config.z) > FEASIBILITY_REL_TOL {
                continue;
            }
            let value = view.value(&config.z);
            if best.as_ref().map_or(true, |(b, _)| value > *b) {
                best = Some((value, config));
            }
        }
        let config = best.expect("the empty configuration is always feasible").1;
        plan.client_models[c] = config.set.clone();
        plan.client_assignment[c] = config.z.clone();
    }

    let objective = eval_objective(&plan_scenario(s), &plan)
        .map_err(SolveError::from)?
        .total;
    Ok(BaselineResult {
        method: Method::FullLocal,
        plan,
        objective,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
        enumerated: None,
        trace: None,
    })
}

fn plan_scenario(s: &Scenario) -> &Scenario {
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::j3o::j3o;
    use crate::model::scenario_from_toml;
    use crate::model::validate_plan;

    fn tiny_scenario() -> Scenario {
        scenario_from_toml(
            r#"
schema_version = 1
mode = "plain"
rho = 0.9

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
memory_bytes = 6.0e7
compute_capacity = 1.0e10
edge = 0

[[edges]]
id = 0
memory_bytes = 1.0
compute_capacity = 1.0e12
uplink_bytes_per_sec = 5.0e6
accuracy = [0.8]

[cloud]
uplink_bytes_per_sec = 2.0e6
accuracy = [1.0]

[workload]
rates = [[10.0]]
"#,
        )
        .unwrap()
    }

    #[test]
    fn single_node_oracle_enumerates_two_configs() {
        // The edge has no memory, so only the client choices {} and {0} exist.
        let s = tiny_scenario();
        let result = minlp_oracle(&s, 1000).unwrap();
        assert_eq!(result.enumerated, Some(2));
        assert!(validate_plan(&s, &result.plan)
            .unwrap()
            .is_feasible(FEASIBILITY_REL_TOL));
    }

    #[test]
    fn oracle_guard_trips() {
        let s = tiny_scenario();
        match minlp_oracle(&s, 1) {
            Err(BaselineError::TooLarge(_, 1)) => {}
            other => panic!("expected TooLarge, got {other:?}"),
        }
    }

    #[test]
    fn oracle_dominates_j3o() {
        let s = tiny_scenario();
        let oracle = minlp_oracle(&s, 1000).unwrap();
        let (plan, _) = j3o(&s, &AoConfig::default()).unwrap();
        let f = eval_objective(&s, &plan).unwrap().total;
        assert!(oracle.objective >= f - 1e-12);
    }

    #[test]
    fn opt_ao_matches_oracle_on_single_node() {
        let s = tiny_scenario();
        let oracle = minlp_oracle(&s, 1000).unwrap();
        let opt = opt_ao(&s, &AoConfig::default(), 1000).unwrap();
        assert!((opt.objective - oracle.objective).abs() < 1e-9);
    }

    #[test]
    fn greedy_ao_matches_relaxed_greedy_when_compute_is_slack() {
        let s = tiny_scenario();
        let greedy = greedy_ao(&s, &AoConfig::default()).unwrap();
        let (plan, _) = j3o(&s, &AoConfig::default()).unwrap();
        assert_eq!(greedy.plan.client_models, plan.client_models);
        assert_eq!(greedy.plan.edge_models, plan.edge_models);
    }

    #[test]
    fn rand_ao_is_seed_deterministic() {
        let s = tiny_scenario();
        let a = rand_ao(&s, &AoConfig::default(), 11).unwrap();
        let b = rand_ao(&s, &AoConfig::default(), 11).unwrap();
        assert_eq!(a.plan.to_flat_json(), b.plan.to_flat_json());
        // With a single feasible non-empty configuration it matches the oracle.
        let oracle = minlp_oracle(&s, 1000).unwrap();
        assert!((a.objective - oracle.objective).abs() < 1e-9);
    }

    #[test]
    fn full_local_never_offloads_and_is_dominated() {
        let s = tiny_scenario();
        let local = full_local(&s).unwrap();
        assert!(local.plan.client_offload.iter().flatten().all(|&o| o == 0.0));
        let oracle = minlp_oracle(&s, 1000).unwrap();
        assert!(local.objective <= oracle.objective + 1e-12);
        // Generous budgets: closed form rho * best accuracy.
        assert!((local.objective - 0.9 * 0.8).abs() < 1e-12);
        assert!(validate_plan(&s, &local.plan)
            .unwrap()
            .is_feasible(FEASIBILITY_REL_TOL));
    }

    #[test]
    fn zero_capacity_client_contributes_nothing() {
        let mut s = tiny_scenario();
        s.topology.clients[0].memory_bytes = 1.0;
        s.validate().unwrap();
        let local = full_local(&s).unwrap();
        assert_eq!(local.objective, 0.0);
    }
}
