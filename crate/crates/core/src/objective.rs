//! System-wide accuracy objective and its decomposition.
//!
//! The objective weights each task's accuracy by its normalized demand share
//! and splits into three terms per client: queries served locally, queries
//! served at the assigned edge, and queries forwarded to the cloud.

use crate::model::{EdgeId, Plan, PlanError, Scenario};

/// Accumulates in pairwise order to bound rounding drift over many terms.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    Accuracy,
    Loss,
}

/// The evaluated objective plus all decomposed terms.
///
/// For the accuracy kind, `total` is the demand-weighted mean accuracy; for
/// the loss kind every term is the complementary loss and `total` is the
/// demand-weighted mean loss. In both cases
/// `total == sum(client_terms) + sum(edge_terms) + sum(cloud_terms)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveBreakdown {
    pub kind: ObjectiveKind,
    pub total: f64,
    /// Locally-served term per client.
    pub client_terms: Vec<f64>,
    /// Edge-served term for each client's traffic at its assigned edge.
    pub edge_terms: Vec<f64>,
    /// Cloud-served term per client.
    pub cloud_terms: Vec<f64>,
    /// Effective task load `[edge][task]` in jobs per second.
    pub edge_load: Vec<Vec<f64>>,
    /// Effective task load normalized by total demand.
    pub edge_load_normalized: Vec<Vec<f64>>,
}

fn eval(s: &Scenario, p: &Plan, kind: ObjectiveKind) -> Result<ObjectiveBreakdown, PlanError> {
    let nt = s.n_tasks();
    let nc = s.n_clients();
    let lambda_tot = s.lambda_total();

    let transform = |a: f64| match kind {
        ObjectiveKind::Accuracy => a,
        ObjectiveKind::Loss => 1.0 - a,
    };

    let mut client_terms = Vec::with_capacity(nc);
    let mut edge_terms = Vec::with_capacity(nc);
    let mut cloud_terms = Vec::with_capacity(nc);
    let mut scratch = Vec::with_capacity(nt);

    for c in 0..nc {
        let e = s.assigned_edge(c);

        scratch.clear();
        for t in 0..nt {
            let lam = s.normalized_rate(c, t, lambda_tot);
            if lam == 0.0 {
                continue;
            }
            let acc = p.client_assignment[c][t].map_or(0.0, |m| s.client_accuracy(c, m, t));
            scratch.push(lam * (1.0 - p.client_offload[c][t]) * transform(acc));
        }
        client_terms.push(pairwise_sum(&scratch));

        scratch.clear();
        for t in 0..nt {
            let lam = s.normalized_rate(c, t, lambda_tot);
            if lam == 0.0 {
                continue;
            }
            let acc = p.edge_assignment[e][t].map_or(0.0, |m| s.edge_accuracy(e, m, t));
            scratch
                .push(lam * (p.client_offload[c][t] - p.cloud_offload[c][t]) * transform(acc));
        }
        edge_terms.push(pairwise_sum(&scratch));

        scratch.clear();
        for t in 0..nt {
            let lam = s.normalized_rate(c, t, lambda_tot);
            if lam == 0.0 {
                continue;
            }
            scratch.push(lam * p.cloud_offload[c][t] * transform(s.accuracy.cloud[t]));
        }
        cloud_terms.push(pairwise_sum(&scratch));
    }

    let mut edge_load = Vec::with_capacity(s.n_edges());
    for e in 0..s.n_edges() {
        edge_load.push(effective_edge_load(s, p, e)?);
    }
    let edge_load_normalized = edge_load
        .iter()
        .map(|row| row.iter().map(|&l| l / lambda_tot).collect())
        .collect();

    let all_terms: Vec<f64> = client_terms
        .iter()
        .chain(edge_terms.iter())
        .chain(cloud_terms.iter())
        .copied()
        .collect();

    Ok(ObjectiveBreakdown {
        kind,
        total: pairwise_sum(&all_terms),
        client_terms,
        edge_terms,
        cloud_terms,
        edge_load,
        edge_load_normalized,
    })
}

/// Demand-weighted system accuracy of `(s, p)` with full decomposition.
pub fn eval_objective(s: &Scenario, p: &Plan) -> Result<ObjectiveBreakdown, PlanError> {
    eval(s, p, ObjectiveKind::Accuracy)
}

/// Complementary loss form of the same objective, for loss-metric benchmarks.
/// Accuracy and loss of the same plan sum to one.
pub fn eval_loss_objective(s: &Scenario, p: &Plan) -> Result<ObjectiveBreakdown, PlanError> {
    eval(s, p, ObjectiveKind::Loss)
}

/// Per-task query rate that edge `e` actually serves under `p`:
/// what its clients offload minus what it forwards to the cloud.
pub fn effective_edge_load(s: &Scenario, p: &Plan, e: EdgeId) -> Result<Vec<f64>, PlanError> {
    if e >= s.n_edges() {
        return Err(PlanError::UnresolvedId(format!("edge {e}")));
    }
    let clients = s.clients_of(e);
    let mut load = vec![0.0; s.n_tasks()];
    let mut scratch = Vec::with_capacity(clients.len());
    for (t, slot) in load.iter_mut().enumerate() {
        scratch.clear();
        for &c in &clients {
            scratch.push(
                s.workload.rates[c][t] * (p.client_offload[c][t] - p.cloud_offload[c][t]),
            );
        }
        *slot = pairwise_sum(&scratch);
    }
    Ok(load)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scenario_from_toml;

    fn two_task_scenario() -> Scenario {
        scenario_from_toml(
            r#"
schema_version = 1
mode = "plain"
rho = 1.0

[[models]]
id = 0
memory_bytes = 5.0e7
compute_per_query = 1.0e9
supported_tasks = [0, 1]

[[tasks]]
id = 0
input_bytes = 1.0e6

[[tasks]]
id = 1
input_bytes = 1.0e6

[[clients]]
id = 0
memory_bytes = 1.0e8
compute_capacity = 1.0e11
edge = 0

[[edges]]
id = 0
memory_bytes = 2.0e8
compute_capacity = 1.0e12
uplink_bytes_per_sec = 1.0e8
accuracy = [0.8, 0.4]

[cloud]
uplink_bytes_per_sec = 1.0e8
accuracy = [1.0, 1.0]

[workload]
rates = [[10.0, 30.0]]
"#,
        )
        .unwrap()
    }

    #[test]
    fn full_cloud_offload_hits_oracle_accuracy() {
        let s = two_task_scenario();
        let mut p = Plan::empty(&s);
        for t in 0..2 {
            p.client_offload[0][t] = 1.0;
            p.cloud_offload[0][t] = 1.0;
        }
        let b = eval_objective(&s, &p).unwrap();
        assert!((b.total - 1.0).abs() < 1e-12);
        let loss = eval_loss_objective(&s, &p).unwrap();
        assert!(loss.total.abs() < 1e-12);
    }

    #[test]
    fn empty_local_plan_scores_zero() {
        let s = two_task_scenario();
        let p = Plan::empty(&s);
        let b = eval_objective(&s, &p).unwrap();
        assert_eq!(b.total, 0.0);
    }

    #[test]
    fn loss_and_accuracy_are_complementary() {
        let s = two_task_scenario();
        let mut p = Plan::empty(&s);
        p.edge_models[0] = vec![0];
        p.edge_assignment[0] = vec![Some(0), Some(0)];
        p.client_offload[0] = vec![0.7, 0.2];
        p.cloud_offload[0] = vec![0.3, 0.1];
        let acc = eval_objective(&s, &p).unwrap();
        let loss = eval_loss_objective(&s, &p).unwrap();
        assert!((acc.total + loss.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn breakdown_matches_term_sums() {
        let s = two_task_scenario();
        let mut p = Plan::empty(&s);
        p.edge_models[0] = vec![0];
        p.edge_assignment[0] = vec![Some(0), Some(0)];
        p.client_offload[0] = vec![0.5, 0.5];
        p.cloud_offload[0] = vec![0.25, 0.0];
        let b = eval_objective(&s, &p).unwrap();
        let direct: f64 = b.client_terms.iter().sum::<f64>()
            + b.edge_terms.iter().sum::<f64>()
            + b.cloud_terms.iter().sum::<f64>();
        assert!((b.total - direct).abs() < 1e-12);
        assert!(b.total >= 0.0 && b.total <= 1.0);
    }

    #[test]
    fn edge_load_passthrough_and_arithmetic() {
        let s = two_task_scenario();
        let mut p = Plan::empty(&s);
        p.client_offload[0] = vec![0.5, 0.5];
        p.cloud_offload[0] = vec![0.5, 0.5];
        let load = effective_edge_load(&s, &p, 0).unwrap();
        assert_eq!(load, vec![0.0, 0.0]);

        p.cloud_offload[0] = vec![0.0, 0.0];
        let load = effective_edge_load(&s, &p, 0).unwrap();
        assert!((load[0] - 5.0).abs() < 1e-12);
        assert!((load[1] - 15.0).abs() < 1e-12);

        assert!(effective_edge_load(&s, &p, 3).is_err());
    }

    #[test]
    fn objective_is_affine_in_offload_coordinates() {
        let s = two_task_scenario();
        let mut p = Plan::empty(&s);
        p.edge_models[0] = vec![0];
        p.edge_assignment[0] = vec![Some(0), Some(0)];
        p.client_offload[0] = vec![0.4, 0.4];
        p.cloud_offload[0] = vec![0.1, 0.1];

        let base = eval_objective(&s, &p).unwrap().total;
        let h = 0.125;
        // Coefficient on client offload of task 0: lambda_bar * (A_e - A_c).
        let lam = 10.0 / 40.0;
        let coeff = lam * (0.8 - 0.0);
        let mut p2 = p.clone();
        p2.client_offload[0][0] += h;
        let bumped = eval_objective(&s, &p2).unwrap().total;
        assert!((bumped - base - h * coeff).abs() < 1e-10);

        // Coefficient on cloud offload of task 1: lambda_bar * (A_s - A_e).
        let lam = 30.0 / 40.0;
        let coeff = lam * (1.0 - 0.4);
        let mut p3 = p.clone();
        p3.cloud_offload[0][1] += h;
        let bumped = eval_objective(&s, &p3).unwrap().total;
        assert!((bumped - base - h * coeff).abs() < 1e-10);
    }
}
