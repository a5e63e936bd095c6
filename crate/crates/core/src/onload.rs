//! Model-onloading subproblem for fixed offloading: per-node greedy
//! submodular selection inside a subgradient loop on the relaxed compute
//! (or batching-latency) constraints.
//!
//! For fixed offload rates the objective decomposes across nodes into a
//! weighted task-coverage function, which is monotone and submodular in the
//! onloaded set. Memory stays a hard knapsack constraint handled by the
//! greedy; compute moves into the objective with a multiplier per node and is
//! tightened by subgradient updates until the violation falls under a
//! threshold.

use crate::lp::SurrogateCoefficients;
use crate::model::{Mode, ModelId, NodeRef, Plan, Scenario, FEASIBILITY_REL_TOL};

/// Knobs of the subgradient loop. Defaults: violation threshold `1e-5`,
/// at most 50 dual iterations, unit base step. Violations are measured
/// relative to each node's budget, so steps are dimensionless.
#[derive(Debug, Clone)]
pub struct GreedyLrOptions {
    pub epsilon: f64,
    pub max_dual_iters: usize,
    pub step_size: f64,
}

impl Default for GreedyLrOptions {
    fn default() -> Self {
        GreedyLrOptions {
            epsilon: 1e-5,
            max_dual_iters: 50,
            step_size: 1.0,
        }
    }
}

/// Lagrange multipliers and bookkeeping of one subgradient run.
/// Nodes are indexed clients-first, then edges.
#[derive(Debug, Clone)]
pub struct DualState {
    pub alpha: Vec<f64>,
    /// Subgradient iterations executed.
    pub iterations: usize,
    /// Signed relative violation of each node's relaxed constraint at the
    /// last proposal (negative = slack).
    pub last_violation: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GreedyPick {
    pub model: ModelId,
    pub gain: f64,
    pub gain_per_byte: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// No remaining candidate fits the memory budget.
    Budget,
    /// All remaining gains are nonpositive, or the library is exhausted.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct GreedyTrace {
    pub node: NodeRef,
    pub picks: Vec<GreedyPick>,
    pub stop: StopReason,
}

/// Onloading decisions for every node: sets and induced assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct Onloading {
    pub client_models: Vec<Vec<ModelId>>,
    pub edge_models: Vec<Vec<ModelId>>,
    pub client_assignment: Vec<Vec<Option<ModelId>>>,
    pub edge_assignment: Vec<Vec<Option<ModelId>>>,
}

impl Onloading {
    pub fn apply_to(&self, plan: &mut Plan) {
        plan.client_models = self.client_models.clone();
        plan.edge_models = self.edge_models.clone();
        plan.client_assignment = self.client_assignment.clone();
        plan.edge_assignment = self.edge_assignment.clone();
    }
}

#[derive(Debug, Clone)]
pub struct GreedyLrResult {
    pub onloading: Onloading,
    pub dual: DualState,
    /// Trace of the last greedy pass per node, clients first.
    pub traces: Vec<GreedyTrace>,
}

// ---------------------------------------------------------------------------
// Node views
// ---------------------------------------------------------------------------

/// Everything the per-node subproblem needs, with offloading folded in:
/// task weights, effective accuracies, per-assignment load on the relaxed
/// constraint, and the two budgets.
pub(crate) struct NodeView {
    pub node: NodeRef,
    pub mem_budget: f64,
    pub model_mem: Vec<f64>,
    /// Accuracy weight per task (normalized demand share actually served
    /// here under the fixed offloading).
    pub weight: Vec<f64>,
    /// `acc[m][t]`, degradation applied for clients.
    pub acc: Vec<Vec<f64>>,
    /// Relaxed-constraint increment when task `t` is assigned model `m`.
    pub load: Vec<Vec<f64>>,
    /// Right-hand side of the relaxed constraint; strictly positive.
    pub budget: f64,
}

impl NodeView {
    /// Induced assignment: per task the accuracy-max onloaded model, lowest
    /// id on ties, the null model when nothing supports the task.
    pub fn induced_assignment(&self, set: &[ModelId]) -> Vec<Option<ModelId>> {
        let nt = self.weight.len();
        let mut z = vec![None; nt];
        for (t, slot) in z.iter_mut().enumerate() {
            let mut best = 0.0;
            for &m in set {
                let a = self.acc[m][t];
                if a > best {
                    best = a;
                    *slot = Some(m);
                }
            }
        }
        z
    }

    /// True objective contribution of an assignment under this view.
    pub fn value(&self, z: &[Option<ModelId>]) -> f64 {
        z.iter()
            .enumerate()
            .map(|(t, m)| m.map_or(0.0, |m| self.weight[t] * self.acc[m][t]))
            .sum()
    }

    /// Load the assignment places on the relaxed constraint.
    pub fn load_of(&self, z: &[Option<ModelId>]) -> f64 {
        z.iter()
            .enumerate()
            .map(|(t, m)| m.map_or(0.0, |m| self.load[m][t]))
            .sum()
    }

    /// Signed violation of the relaxed constraint, relative to the budget.
    pub fn relative_violation(&self, z: &[Option<ModelId>]) -> f64 {
        (self.load_of(z) - self.budget) / self.budget
    }
}

/// Builds one view per node (clients first, then edges) for the offloading
/// currently in `plan`. Batching-mode scenarios must supply the surrogate.
pub(crate) fn node_views(
    s: &Scenario,
    plan: &Plan,
    surrogate: Option<&SurrogateCoefficients>,
) -> Vec<NodeView> {
    let nt = s.n_tasks();
    let nm = s.n_models();
    let lambda_tot = s.lambda_total();
    let model_mem: Vec<f64> = s.models.iter().map(|m| m.memory_bytes).collect();
    let mut views = Vec::with_capacity(s.n_clients() + s.n_edges());

    for c in 0..s.n_clients() {
        let weight: Vec<f64> = (0..nt)
            .map(|t| s.normalized_rate(c, t, lambda_tot) * (1.0 - plan.client_offload[c][t]))
            .collect();
        let acc: Vec<Vec<f64>> = (0..nm)
            .map(|m| (0..nt).map(|t| s.client_accuracy(c, m, t)).collect())
            .collect();
        let load: Vec<Vec<f64>> = (0..nm)
            .map(|m| {
                let w = s.models[m].compute_per_query;
                (0..nt).map(|t| weight[t] * w).collect()
            })
            .collect();
        views.push(NodeView {
            node: NodeRef::Client(c),
            mem_budget: s.topology.clients[c].memory_bytes,
            model_mem: model_mem.clone(),
            weight,
            acc,
            load,
            budget: s.topology.clients[c].compute_capacity / lambda_tot,
        });
    }

    for e in 0..s.n_edges() {
        let clients = s.clients_of(e);
        let weight: Vec<f64> = (0..nt)
            .map(|t| {
                clients
                    .iter()
                    .map(|&c| {
                        s.normalized_rate(c, t, lambda_tot)
                            * (plan.client_offload[c][t] - plan.cloud_offload[c][t])
                    })
                    .sum()
            })
            .collect();
        let acc: Vec<Vec<f64>> = (0..nm)
            .map(|m| (0..nt).map(|t| s.edge_accuracy(e, m, t)).collect())
            .collect();
        let (load, budget) = match s.mode {
            Mode::Plain => {
                let load = (0..nm)
                    .map(|m| {
                        let w = s.models[m].compute_per_query;
                        (0..nt).map(|t| weight[t] * w).collect()
                    })
                    .collect();
                (load, s.topology.edges[e].compute_capacity / lambda_tot)
            }
            Mode::Batching => {
                let surrogate = surrogate
                    .expect("batching-mode onloading requires surrogate coefficients");
                let t_b = s.batch_interval().expect("validated batching scenario");
                let beta = s.topology.edges[e].compute_capacity;
                let load = (0..nm)
                    .map(|m| {
                        let w = s.models[m].compute_per_query;
                        let nu = s.setup_cost(m, e);
                        (0..nt)
                            .map(|t| {
                                let lam = weight[t] * lambda_tot;
                                nu * (surrogate.theta[e][t] * lam + surrogate.psi[e][t])
                                    + w / beta * lam * t_b
                            })
                            .collect()
                    })
                    .collect();
                (load, t_b)
            }
        };
        views.push(NodeView {
            node: NodeRef::Edge(e),
            mem_budget: s.topology.edges[e].memory_bytes,
            model_mem: model_mem.clone(),
            weight,
            acc,
            load,
            budget,
        });
    }

    views
}

// ---------------------------------------------------------------------------
// Coverage function and marginal gains
// ---------------------------------------------------------------------------

/// Weighted task-coverage value of a model set: for each task the best
/// accuracy over the set, weighted and summed. Monotone and submodular.
pub fn coverage_value(weights: &[f64], acc: &[Vec<f64>], set: &[ModelId]) -> f64 {
    weights
        .iter()
        .enumerate()
        .map(|(t, &w)| {
            let best = set.iter().map(|&m| acc[m][t]).fold(0.0, f64::max);
            w * best
        })
        .sum()
}

fn penalized_value(view: &NodeView, alpha: f64, z: &[Option<ModelId>]) -> f64 {
    view.value(z) - alpha * view.load_of(z) / view.budget
}

/// Change in the node-local penalized objective when adding `candidate` to
/// `current`: coverage gain minus the multiplier times the relative load
/// increment of the induced assignment change.
pub fn marginal_gain(
    s: &Scenario,
    node: NodeRef,
    candidate: ModelId,
    current: &[ModelId],
    plan: &Plan,
    alpha: f64,
    surrogate: Option<&SurrogateCoefficients>,
) -> f64 {
    debug_assert!(!current.contains(&candidate));
    let views = node_views(s, plan, surrogate);
    let idx = match node {
        NodeRef::Client(c) => c,
        NodeRef::Edge(e) => s.n_clients() + e,
    };
    let view = &views[idx];
    let z_before = view.induced_assignment(current);
    let mut extended: Vec<ModelId> = current.to_vec();
    extended.push(candidate);
    extended.sort_unstable();
    let z_after = view.induced_assignment(&extended);
    penalized_value(view, alpha, &z_after) - penalized_value(view, alpha, &z_before)
}

// ---------------------------------------------------------------------------
// Greedy selection and the dual loop
// ---------------------------------------------------------------------------

/// Ratio-greedy selection for one node: repeatedly add the model with the
/// best penalized gain per byte while the memory budget allows, stopping when
/// nothing fits or no candidate has positive gain. Ties go to the lowest id.
pub(crate) fn greedy_node_select(
    view: &NodeView,
    alpha: f64,
) -> (Vec<ModelId>, Vec<Option<ModelId>>, GreedyTrace) {
    let nm = view.model_mem.len();
    let nt = view.weight.len();
    let mut chosen: Vec<ModelId> = Vec::new();
    let mut in_set = vec![false; nm];
    let mut mem_used = 0.0;
    let mut picks = Vec::new();

    // Incremental best-assignment state; `None` is the null model.
    let mut best_model: Vec<Option<ModelId>> = vec![None; nt];

    let stop = loop {
        if chosen.len() == nm {
            break StopReason::Exhausted;
        }
        let mut any_fits = false;
        let mut best: Option<(f64, f64, ModelId)> = None; // (ratio, gain, id)
        for m in 0..nm {
            if in_set[m] || mem_used + view.model_mem[m] > view.mem_budget {
                continue;
            }
            any_fits = true;
            let mut gain = 0.0;
            for t in 0..nt {
                let (old_acc, old_load) = match best_model[t] {
                    Some(b) => (view.acc[b][t], view.load[b][t]),
                    None => (0.0, 0.0),
                };
                let new_acc = view.acc[m][t];
                let switches = new_acc > old_acc
                    || (new_acc == old_acc
                        && new_acc > 0.0
                        && best_model[t].map_or(false, |b| m < b));
                if switches {
                    gain += view.weight[t] * (new_acc - old_acc)
                        - alpha * (view.load[m][t] - old_load) / view.budget;
                }
            }
            let ratio = gain / view.model_mem[m];
            let better = match best {
                None => true,
                Some((r, _, id)) => ratio > r || (ratio == r && m < id),
            };
            if better {
                best = Some((ratio, gain, m));
            }
        }
        if !any_fits {
            break StopReason::Budget;
        }
        let (ratio, gain, m) = best.unwrap();
        if gain <= 0.0 {
            break StopReason::Exhausted;
        }
        in_set[m] = true;
        chosen.push(m);
        mem_used += view.model_mem[m];
        for t in 0..nt {
            let old_acc = best_model[t].map_or(0.0, |b| view.acc[b][t]);
            let new_acc = view.acc[m][t];
            if new_acc > old_acc
                || (new_acc == old_acc && new_acc > 0.0 && best_model[t].map_or(false, |b| m < b))
            {
                best_model[t] = Some(m);
            }
        }
        picks.push(GreedyPick {
            model: m,
            gain,
            gain_per_byte: ratio,
        });
    };

    chosen.sort_unstable();
    let z = view.induced_assignment(&chosen);
    (
        chosen,
        z,
        GreedyTrace {
            node: view.node,
            picks,
            stop,
        },
    )
}

/// Plain ratio-greedy onloading under memory only (no dual loop); compute
/// feasibility is left to the offloading step.
pub fn greedy_onloading(
    s: &Scenario,
    plan: &Plan,
    surrogate: Option<&SurrogateCoefficients>,
) -> Onloading {
    let views = node_views(s, plan, surrogate);
    collect_onloading(s, views.iter().map(|v| greedy_node_select(v, 0.0)))
}

fn collect_onloading(
    s: &Scenario,
    selections: impl Iterator<Item = (Vec<ModelId>, Vec<Option<ModelId>>, GreedyTrace)>,
) -> Onloading {
    let mut onl = Onloading {
        client_models: Vec::with_capacity(s.n_clients()),
        edge_models: Vec::with_capacity(s.n_edges()),
        client_assignment: Vec::with_capacity(s.n_clients()),
        edge_assignment: Vec::with_capacity(s.n_edges()),
    };
    for (i, (set, z, _)) in selections.enumerate() {
        if i < s.n_clients() {
            onl.client_models.push(set);
            onl.client_assignment.push(z);
        } else {
            onl.edge_models.push(set);
            onl.edge_assignment.push(z);
        }
    }
    onl
}

/// Greedy onloading inside a subgradient loop on the relaxed constraints.
///
/// Per dual iteration every unconverged node reruns its greedy selection
/// under the current multiplier, the multiplier moves along the signed
/// relative violation with step `step_size / sqrt(k)` and projects onto the
/// nonnegative orthant. A node converges once its violation is below
/// `epsilon` and the complementary-slackness product is negligible.
///
/// The returned set per node is the best true-constraint-feasible proposal
/// encountered (the empty set is always feasible, so one always exists).
pub fn greedy_lr(
    s: &Scenario,
    plan: &Plan,
    surrogate: Option<&SurrogateCoefficients>,
    opts: &GreedyLrOptions,
) -> GreedyLrResult {
    let views = node_views(s, plan, surrogate);
    let n = views.len();
    let nt = s.n_tasks();

    struct Best {
        value: f64,
        set: Vec<ModelId>,
        z: Vec<Option<ModelId>>,
    }
    let mut best: Vec<Best> = (0..n)
        .map(|_| Best {
            value: 0.0,
            set: Vec::new(),
            z: vec![None; nt],
        })
        .collect();

    let mut alpha = vec![0.0; n];
    let mut last_violation = vec![0.0; n];
    let mut converged = vec![false; n];
    let mut traces: Vec<Option<GreedyTrace>> = (0..n).map(|_| None).collect();
    let mut iterations = 0;

    for k in 1..=opts.max_dual_iters {
        iterations = k;
        let step = opts.step_size / (k as f64).sqrt();
        let mut all_converged = true;
        for (v, view) in views.iter().enumerate() {
            if converged[v] {
                continue;
            }
            let (set, z, trace) = greedy_node_select(view, alpha[v]);
            let violation = view.relative_violation(&z);
            if violation <= FEASIBILITY_REL_TOL {
                let value = view.value(&z);
                if value > best[v].value {
                    best[v] = Best { value, set, z };
                }
            }
            alpha[v] = (alpha[v] + step * violation).max(0.0);
            last_violation[v] = violation;
            traces[v] = Some(trace);

            let slack_product = alpha[v] * (-violation).max(0.0);
            if violation < opts.epsilon && slack_product <= opts.epsilon {
                converged[v] = true;
            } else {
                all_converged = false;
            }
        }
        if all_converged {
            break;
        }
    }

    let onloading = collect_onloading(
        s,
        best.into_iter().zip(traces.iter()).map(|(b, tr)| {
            (
                b.set,
                b.z,
                tr.clone().expect("every node ran at least once"),
            )
        }),
    );
    let traces = traces.into_iter().map(Option::unwrap).collect();
    GreedyLrResult {
        onloading,
        dual: DualState {
            alpha,
            iterations,
            last_violation,
        },
        traces,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scenario_from_toml;

    /// 1 client, 1 edge, 4 models over 3 tasks; generous compute.
    fn small_scenario() -> Scenario {
        scenario_from_toml(
            r#"
schema_version = 1
mode = "plain"
rho = 1.0

[[models]]
id = 0
memory_bytes = 4.0e7
compute_per_query = 1.0e9
supported_tasks = [0]

[[models]]
id = 1
memory_bytes = 3.0e7
compute_per_query = 1.0e9
supported_tasks = [1]

[[models]]
id = 2
memory_bytes = 5.0e7
compute_per_query = 1.0e9
supported_tasks = [0, 1, 2]

[[models]]
id = 3
memory_bytes = 2.0e7
compute_per_query = 1.0e9
supported_tasks = [2]

[[tasks]]
id = 0
input_bytes = 1.0e6

[[tasks]]
id = 1
input_bytes = 1.0e6

[[tasks]]
id = 2
input_bytes = 1.0e6

[[clients]]
id = 0
memory_bytes = 9.0e7
compute_capacity = 1.0e12
edge = 0

[[edges]]
id = 0
memory_bytes = 1.2e8
compute_capacity = 1.0e13
uplink_bytes_per_sec = 3.0e7
accuracy = [0.9, 0.0, 0.0,  0.0, 0.85, 0.0,  0.6, 0.6, 0.55,  0.0, 0.0, 0.8]

[cloud]
uplink_bytes_per_sec = 1.0e7
accuracy = [1.0, 1.0, 1.0]

[workload]
rates = [[10.0, 12.0, 8.0]]
"#,
        )
        .unwrap()
    }

    #[test]
    fn dominated_model_has_zero_gain() {
        let s = small_scenario();
        let plan = Plan::empty(&s);
        // Model 2 covers everything better than model 1 covers task 1? No:
        // model 1 has 0.85 on task 1 vs 0.6. Use a dominated direction:
        // after onloading 0 and 1, model 2 only improves task 2.
        let gain = marginal_gain(&s, NodeRef::Client(0), 2, &[0, 1], &plan, 0.0, None);
        let lam2 = 8.0 / 30.0;
        assert!((gain - lam2 * 0.55).abs() < 1e-12);

        // A model whose accuracy is dominated on every covered task gains 0.
        let gain = marginal_gain(&s, NodeRef::Client(0), 1, &[2], &plan, 0.0, None);
        let lam1 = 12.0 / 30.0;
        assert!((gain - lam1 * (0.85 - 0.6)).abs() < 1e-12);
        let mut s2 = s.clone();
        s2.accuracy.edge[0][1 * 3 + 1] = 0.5; // now worse than model 2 everywhere
        s2.accuracy.cloud = vec![1.0, 1.0, 1.0];
        s2.validate().unwrap();
        let gain = marginal_gain(&s2, NodeRef::Client(0), 1, &[2], &plan, 0.0, None);
        assert_eq!(gain, 0.0);
    }

    #[test]
    fn gains_match_set_function_differences() {
        let s = small_scenario();
        let plan = Plan::empty(&s);
        let views = node_views(&s, &plan, None);
        let view = &views[0];
        let weights = view.weight.clone();
        let acc = view.acc.clone();
        for current in [vec![], vec![0], vec![1, 3], vec![0, 1, 3]] {
            for m in 0..4 {
                if current.contains(&m) {
                    continue;
                }
                let mut extended = current.clone();
                extended.push(m);
                let expected = coverage_value(&weights, &acc, &extended)
                    - coverage_value(&weights, &acc, &current);
                let got = marginal_gain(&s, NodeRef::Client(0), m, &current, &plan, 0.0, None);
                assert!(
                    (got - expected).abs() < 1e-12,
                    "set {current:?} + {m}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn no_capacity_yields_empty_selection() {
        let mut s = small_scenario();
        s.topology.clients[0].memory_bytes = 1.0e7; // below the smallest model
        s.validate().unwrap();
        let plan = Plan::empty(&s);
        let views = node_views(&s, &plan, None);
        let (set, z, trace) = greedy_node_select(&views[0], 0.0);
        assert!(set.is_empty());
        assert!(z.iter().all(Option::is_none));
        assert_eq!(trace.stop, StopReason::Budget);
    }

    #[test]
    fn int8_sized_variants_fill_client_memory() {
        // Six single-task 18.415 MB models against a 96 MB budget: exactly
        // five fit, and the sixth is cut off by memory, not by gain.
        let n = 6;
        let acc: Vec<Vec<f64>> = (0..n)
            .map(|m| (0..n).map(|t| if t == m { 0.9 } else { 0.0 }).collect())
            .collect();
        let view = NodeView {
            node: NodeRef::Client(0),
            mem_budget: 96.0e6,
            model_mem: vec![18.415e6; n],
            weight: vec![1.0 / n as f64; n],
            acc,
            load: vec![vec![0.0; n]; n],
            budget: 1.0,
        };
        let (set, _, trace) = greedy_node_select(&view, 0.0);
        assert_eq!(set.len(), 5);
        assert_eq!(trace.stop, StopReason::Budget);
    }

    #[test]
    fn greedy_meets_submodular_approximation_bound() {
        // 3 models, 2 tasks: compare against the best of all 8 subsets.
        let weights = vec![0.5, 0.5];
        let acc = vec![
            vec![0.9, 0.1],
            vec![0.1, 0.9],
            vec![0.65, 0.65],
        ];
        let mem = [4.0e7, 4.0e7, 5.0e7];
        let view = NodeView {
            node: NodeRef::Client(0),
            mem_budget: 9.0e7,
            model_mem: mem.to_vec(),
            weight: weights.clone(),
            acc: acc.clone(),
            load: vec![vec![0.0; 2]; 3],
            budget: 1.0,
        };
        let (set, z, _) = greedy_node_select(&view, 0.0);
        let greedy_value = view.value(&z);
        let mut best = 0.0f64;
        for mask in 0u32..8 {
            let subset: Vec<ModelId> = (0..3).filter(|&m| mask & (1 << m) != 0).collect();
            let used: f64 = subset.iter().map(|&m| mem[m]).sum();
            if used <= view.mem_budget {
                best = best.max(coverage_value(&weights, &acc, &subset));
            }
        }
        assert!(!set.is_empty());
        assert!(greedy_value >= (1.0 - 1.0 / std::f64::consts::E) * best);
    }

    #[test]
    fn inactive_constraint_converges_immediately() {
        let s = small_scenario();
        let mut plan = Plan::empty(&s);
        plan.client_offload = vec![vec![0.5; 3]];
        let result = greedy_lr(&s, &plan, None, &GreedyLrOptions::default());
        assert_eq!(result.dual.iterations, 1);
        assert!(result.dual.alpha.iter().all(|&a| a == 0.0));
        assert!(!result.onloading.client_models[0].is_empty());
    }

    #[test]
    fn tight_compute_drives_complementary_slackness() {
        let mut s = small_scenario();
        // Room for roughly a third of the local load.
        s.topology.clients[0].compute_capacity = 1.0e10;
        s.validate().unwrap();
        let plan = Plan::empty(&s);
        let opts = GreedyLrOptions::default();
        let result = greedy_lr(&s, &plan, None, &opts);
        // Multipliers stay in the nonnegative orthant.
        assert!(result.dual.alpha.iter().all(|&a| a >= 0.0));
        // Returned onloading satisfies the true constraint.
        let views = node_views(&s, &plan, None);
        let z = &result.onloading.client_assignment[0];
        assert!(views[0].relative_violation(z) <= FEASIBILITY_REL_TOL);
        // Complementary slackness at termination.
        let slack = -views[0].relative_violation(z);
        let alpha = result.dual.alpha[0];
        assert!(
            alpha * result.dual.last_violation[0].max(0.0) <= 1e-4,
            "alpha {alpha} violation {}",
            result.dual.last_violation[0]
        );
        let _ = slack;
    }

    #[test]
    fn memory_feasibility_is_exact() {
        let s = small_scenario();
        let plan = Plan::empty(&s);
        let result = greedy_lr(&s, &plan, None, &GreedyLrOptions::default());
        for (c, set) in result.onloading.client_models.iter().enumerate() {
            let used: f64 = set.iter().map(|&m| s.models[m].memory_bytes).sum();
            assert!(used <= s.topology.clients[c].memory_bytes);
        }
        for (e, set) in result.onloading.edge_models.iter().enumerate() {
            let used: f64 = set.iter().map(|&m| s.models[m].memory_bytes).sum();
            assert!(used <= s.topology.edges[e].memory_bytes);
        }
    }
}
