//! The offloading linear program: types, builder and an exact solver.
//!
//! With onloading fixed, choosing offload fractions is a linear program: the
//! objective is affine in every offload coordinate and all resource budgets
//! are linear. [`build_offloading_lp`] casts a `(Scenario, x, z)` triple into
//! a [`LinearProgram`]; [`solve_lp`] solves it with the in-crate simplex.

mod simplex;

pub use simplex::{solve_lp, PIVOT_TOL};

use crate::model::{ClientId, EdgeId, Plan, Scenario, TaskId};
use crate::objective::pairwise_sum;
use thiserror::Error;

/// Linearization of the per-edge batch setup indicator around the current
/// effective loads: `theta * load + psi` over-approximates the indicator at
/// the linearization point and stays conservative away from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCoefficients {
    /// Slope per `[edge][task]`; always nonnegative.
    pub theta: Vec<Vec<f64>>,
    /// Intercept per `[edge][task]`.
    pub psi: Vec<Vec<f64>>,
    /// Smoothing width used to build the coefficients.
    pub epsilon: f64,
}

/// How the edge-tier constraint enters the LP.
#[derive(Debug, Clone, Copy)]
pub enum EdgeConstraint<'a> {
    /// Raw compute budget (plain mode).
    Compute,
    /// Batching-latency window with the setup indicator replaced by its
    /// linear surrogate.
    BatchingSurrogate(&'a SurrogateCoefficients),
    /// Batching-latency window with a fixed support pattern per edge:
    /// `pattern[e][t]` tells whether task `t` may receive load at edge `e`.
    /// Used by exhaustive search, where patterns are enumerated.
    BatchingPattern(&'a [Vec<bool>]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarTag {
    /// Fraction of task queries a client sends to its edge.
    ClientOffload { client: ClientId, task: TaskId },
    /// Fraction of task queries forwarded from the edge to the cloud.
    CloudOffload { client: ClientId, task: TaskId },
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowTag {
    ClientCompute(ClientId),
    EdgeCompute(EdgeId),
    EdgeBatchLatency(EdgeId),
    /// Forces zero effective load for one (client, task) at a fixed-pattern
    /// edge: `client_offload - cloud_offload <= 0`.
    EdgeZeroLoad { client: ClientId, task: TaskId },
    EdgeUplink(EdgeId),
    CloudUplink,
    /// `cloud_offload <= client_offload`.
    OffloadChain { client: ClientId, task: TaskId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowMeta {
    pub tag: RowTag,
    /// Divisor applied to the original row; duals of the scaled row multiply
    /// by `1/scale` to recover original units.
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// A standard-form maximization LP with upper/lower variable bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Constant objective term carried outside the solver.
    pub constant: f64,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub var_tags: Vec<VarTag>,
    pub row_meta: Vec<RowMeta>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
    /// One dual value per row, in the row units of the LP as given.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum LpBuildError {
    /// A constraint cannot be satisfied by any setting of the variables:
    /// its fixed load alone exceeds the budget.
    #[error("infeasible before solve: {tag:?} exceeds its budget by {excess:.6e} even at the most favorable bounds")]
    InfeasibleBudget { tag: RowTag, excess: f64 },
    #[error("batching constraint requested on a plain-mode scenario")]
    ModeMismatch,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    /// Index of the client-offload variable for `(c, t)`.
    pub fn client_var(&self, s: &Scenario, c: ClientId, t: TaskId) -> usize {
        c * s.n_tasks() + t
    }

    /// Index of the cloud-offload variable for `(c, t)`.
    pub fn cloud_var(&self, s: &Scenario, c: ClientId, t: TaskId) -> usize {
        s.n_clients() * s.n_tasks() + c * s.n_tasks() + t
    }
}

/// Builds the offloading LP for fixed onloading `(x, z)` taken from `plan`.
///
/// Variables are the per-(client, task) offload fractions: first the
/// client-to-edge block, then the edge-to-cloud block, all bounded to [0, 1].
/// Rows are scaled to unit magnitude; `row_meta` records each divisor.
///
/// The builder rejects rows that no variable setting can satisfy (a fixed
/// term alone exceeding its budget) instead of silently clamping.
pub fn build_offloading_lp(
    s: &Scenario,
    plan: &Plan,
    edge_constraint: EdgeConstraint<'_>,
) -> Result<LinearProgram, LpBuildError> {
    let nt = s.n_tasks();
    let nc = s.n_clients();
    let n_vars = 2 * nc * nt;
    let lambda_tot = s.lambda_total();

    debug_assert!(
        crate::model::validate_plan(s, plan)
            .map(|r| {
                r.slacks.iter().all(|cs| match cs.constraint {
                    crate::model::Constraint::ClientMemory(_)
                    | crate::model::Constraint::EdgeMemory(_)
                    | crate::model::Constraint::Assignment(_) => {
                        !cs.is_violated(crate::model::FEASIBILITY_REL_TOL)
                    }
                    _ => true,
                })
            })
            .unwrap_or(false),
        "offloading LP requires memory- and assignment-feasible onloading"
    );

    let client_var = |c: ClientId, t: TaskId| c * nt + t;
    let cloud_var = |c: ClientId, t: TaskId| nc * nt + c * nt + t;

    let mut objective = vec![0.0; n_vars];
    let mut constant_terms = Vec::with_capacity(nc * nt);
    let mut var_tags = vec![VarTag::Free; n_vars];
    for c in 0..nc {
        let e = s.assigned_edge(c);
        for t in 0..nt {
            let lam = s.normalized_rate(c, t, lambda_tot);
            let a_c = plan.client_assignment[c][t].map_or(0.0, |m| s.client_accuracy(c, m, t));
            let a_e = plan.edge_assignment[e][t].map_or(0.0, |m| s.edge_accuracy(e, m, t));
            let a_s = s.accuracy.cloud[t];
            objective[client_var(c, t)] = lam * (a_e - a_c);
            objective[cloud_var(c, t)] = lam * (a_s - a_e);
            constant_terms.push(lam * a_c);
            var_tags[client_var(c, t)] = VarTag::ClientOffload { client: c, task: t };
            var_tags[cloud_var(c, t)] = VarTag::CloudOffload { client: c, task: t };
        }
    }
    let constant = pairwise_sum(&constant_terms);

    let mut rows: Vec<LpRow> = Vec::new();
    let mut row_meta: Vec<RowMeta> = Vec::new();
    let mut push_row = |coeffs: Vec<f64>, rhs: f64, tag: RowTag| -> Result<(), LpBuildError> {
        let max_abs = coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        if max_abs == 0.0 {
            if rhs < -1e-12 {
                return Err(LpBuildError::InfeasibleBudget { tag, excess: -rhs });
            }
            return Ok(()); // trivially satisfied
        }
        // Most favorable value of the left-hand side over the variable box.
        let min_lhs: f64 = coeffs
            .iter()
            .map(|&a| if a < 0.0 { a } else { 0.0 })
            .sum();
        if min_lhs > rhs + 1e-9 * max_abs.max(rhs.abs()) {
            return Err(LpBuildError::InfeasibleBudget {
                tag,
                excess: min_lhs - rhs,
            });
        }
        let scale = max_abs;
        rows.push(LpRow {
            coeffs: coeffs.iter().map(|&a| a / scale).collect(),
            rhs: rhs / scale,
        });
        row_meta.push(RowMeta { tag, scale });
        Ok(())
    };

    // Client compute: local service of assigned models must fit the budget.
    for c in 0..nc {
        let mut coeffs = vec![0.0; n_vars];
        let mut fixed = 0.0;
        for t in 0..nt {
            if let Some(m) = plan.client_assignment[c][t] {
                let w = s.workload.rates[c][t] * s.models[m].compute_per_query;
                coeffs[client_var(c, t)] = -w;
                fixed += w;
            }
        }
        push_row(
            coeffs,
            s.topology.clients[c].compute_capacity - fixed,
            RowTag::ClientCompute(c),
        )?;
    }

    // Edge tier: raw compute or a batching-latency row.
    for e in 0..s.n_edges() {
        let clients = s.clients_of(e);
        match edge_constraint {
            EdgeConstraint::Compute => {
                let mut coeffs = vec![0.0; n_vars];
                for t in 0..nt {
                    if let Some(m) = plan.edge_assignment[e][t] {
                        let w = s.models[m].compute_per_query;
                        for &c in &clients {
                            let lw = s.workload.rates[c][t] * w;
                            coeffs[client_var(c, t)] += lw;
                            coeffs[cloud_var(c, t)] -= lw;
                        }
                    }
                }
                push_row(
                    coeffs,
                    s.topology.edges[e].compute_capacity,
                    RowTag::EdgeCompute(e),
                )?;
            }
            EdgeConstraint::BatchingSurrogate(surrogate) => {
                let t_b = s.batch_interval().ok_or(LpBuildError::ModeMismatch)?;
                let beta = s.topology.edges[e].compute_capacity;
                let mut coeffs = vec![0.0; n_vars];
                let mut fixed = 0.0;
                for t in 0..nt {
                    if let Some(m) = plan.edge_assignment[e][t] {
                        let nu = s.setup_cost(m, e);
                        let per_load =
                            nu * surrogate.theta[e][t] + s.models[m].compute_per_query / beta * t_b;
                        fixed += nu * surrogate.psi[e][t];
                        for &c in &clients {
                            let v = s.workload.rates[c][t] * per_load;
                            coeffs[client_var(c, t)] += v;
                            coeffs[cloud_var(c, t)] -= v;
                        }
                    }
                }
                push_row(coeffs, t_b - fixed, RowTag::EdgeBatchLatency(e))?;
            }
            EdgeConstraint::BatchingPattern(patterns) => {
                let t_b = s.batch_interval().ok_or(LpBuildError::ModeMismatch)?;
                let beta = s.topology.edges[e].compute_capacity;
                let mut coeffs = vec![0.0; n_vars];
                let mut fixed = 0.0;
                for t in 0..nt {
                    if let Some(m) = plan.edge_assignment[e][t] {
                        if patterns[e][t] {
                            fixed += s.setup_cost(m, e);
                            let per_load = s.models[m].compute_per_query / beta * t_b;
                            for &c in &clients {
                                let v = s.workload.rates[c][t] * per_load;
                                coeffs[client_var(c, t)] += v;
                                coeffs[cloud_var(c, t)] -= v;
                            }
                        } else {
                            // Excluded from the pattern: force zero edge load.
                            for &c in &clients {
                                if s.workload.rates[c][t] > 0.0 {
                                    let mut zero = vec![0.0; n_vars];
                                    zero[client_var(c, t)] = 1.0;
                                    zero[cloud_var(c, t)] = -1.0;
                                    push_row(
                                        zero,
                                        0.0,
                                        RowTag::EdgeZeroLoad { client: c, task: t },
                                    )?;
                                }
                            }
                        }
                    }
                }
                push_row(coeffs, t_b - fixed, RowTag::EdgeBatchLatency(e))?;
            }
        }

        let mut coeffs = vec![0.0; n_vars];
        for &c in &clients {
            for t in 0..nt {
                coeffs[client_var(c, t)] = s.workload.rates[c][t] * s.tasks[t].input_bytes;
            }
        }
        push_row(coeffs, s.topology.edge_uplink[e], RowTag::EdgeUplink(e))?;
    }

    let mut coeffs = vec![0.0; n_vars];
    for c in 0..nc {
        for t in 0..nt {
            coeffs[cloud_var(c, t)] = s.workload.rates[c][t] * s.tasks[t].input_bytes;
        }
    }
    push_row(coeffs, s.topology.cloud_uplink, RowTag::CloudUplink)?;

    // Hierarchical consistency: what goes to the cloud must first reach the edge.
    for c in 0..nc {
        for t in 0..nt {
            let mut coeffs = vec![0.0; n_vars];
            coeffs[cloud_var(c, t)] = 1.0;
            coeffs[client_var(c, t)] = -1.0;
            push_row(coeffs, 0.0, RowTag::OffloadChain { client: c, task: t })?;
        }
    }

    Ok(LinearProgram {
        objective,
        constant,
        rows,
        lower: vec![0.0; n_vars],
        upper: vec![1.0; n_vars],
        var_tags,
        row_meta,
    })
}

/// Writes the offload fractions of an optimal solution back into `plan`.
pub fn apply_solution(s: &Scenario, lp: &LinearProgram, sol: &LpSolution, plan: &mut Plan) {
    debug_assert_eq!(sol.status, LpStatus::Optimal);
    for (j, tag) in lp.var_tags.iter().enumerate() {
        let v = sol.primal[j].clamp(0.0, 1.0);
        match *tag {
            VarTag::ClientOffload { client, task } => plan.client_offload[client][task] = v,
            VarTag::CloudOffload { client, task } => plan.cloud_offload[client][task] = v,
            VarTag::Free => {}
        }
    }
    let _ = s;
}

/// Numerical quality of an optimal solution, for verification.
#[derive(Debug, Clone, Copy)]
pub struct SolutionCheck {
    /// Worst `a'x - rhs` over rows, and bound violation over variables.
    pub max_primal_residual: f64,
    /// `|primal objective - dual objective|`.
    pub duality_gap: f64,
    /// Worst `|dual * slack|` over rows plus reduced-cost violation over
    /// strictly interior variables.
    pub max_complementarity: f64,
    /// Most negative row dual (should be ~0 for a maximization with <= rows).
    pub min_dual: f64,
}

pub fn check_solution(lp: &LinearProgram, sol: &LpSolution) -> SolutionCheck {
    assert_eq!(sol.status, LpStatus::Optimal);
    let n = lp.n_vars();
    let mut max_primal = 0.0f64;
    for (j, &x) in sol.primal.iter().enumerate() {
        max_primal = max_primal.max(lp.lower[j] - x).max(x - lp.upper[j]);
    }
    let mut slacks = Vec::with_capacity(lp.rows.len());
    for row in &lp.rows {
        let lhs: f64 = row
            .coeffs
            .iter()
            .zip(&sol.primal)
            .map(|(a, x)| a * x)
            .sum();
        slacks.push(row.rhs - lhs);
        max_primal = max_primal.max(lhs - row.rhs);
    }

    // Reduced costs under the reported duals.
    let mut reduced = lp.objective.clone();
    for (i, row) in lp.rows.iter().enumerate() {
        let y = sol.duals[i];
        if y != 0.0 {
            for j in 0..n {
                reduced[j] -= y * row.coeffs[j];
            }
        }
    }

    let mut dual_obj: f64 = lp
        .rows
        .iter()
        .zip(&sol.duals)
        .map(|(row, y)| y * row.rhs)
        .sum();
    for j in 0..n {
        let d = reduced[j];
        // Contribution of active bounds to the dual objective.
        if d > 0.0 {
            dual_obj += d * lp.upper[j];
        } else {
            dual_obj += d * lp.lower[j];
        }
    }

    let mut max_compl = 0.0f64;
    for (i, &slack) in slacks.iter().enumerate() {
        max_compl = max_compl.max((sol.duals[i] * slack).abs());
    }
    for j in 0..n {
        let x = sol.primal[j];
        let interior = x > lp.lower[j] + 1e-7 && x < lp.upper[j] - 1e-7;
        if interior {
            max_compl = max_compl.max(reduced[j].abs());
        }
    }

    SolutionCheck {
        max_primal_residual: max_primal,
        duality_gap: (dual_obj - sol.objective).abs(),
        max_complementarity: max_compl,
        min_dual: sol.duals.iter().fold(0.0f64, |acc, &y| acc.min(y)),
    }
}

/// Dumps the LP in fixed-column MPS format for external cross-checking.
/// MPS has no objective sense; a comment records that rows maximize.
pub fn write_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("* maximization problem: {}\n", name));
    out.push_str(&format!("NAME          {}\n", name));
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for i in 0..lp.rows.len() {
        out.push_str(&format!(" L  R{:07}\n", i));
    }
    out.push_str("COLUMNS\n");
    for j in 0..lp.n_vars() {
        let col = format!("X{:07}", j);
        if lp.objective[j] != 0.0 {
            out.push_str(&format!(
                "    {:<10}{:<10}{:<15.9e}\n",
                col, "OBJ", lp.objective[j]
            ));
        }
        for (i, row) in lp.rows.iter().enumerate() {
            if row.coeffs[j] != 0.0 {
                out.push_str(&format!(
                    "    {:<10}{:<10}{:<15.9e}\n",
                    col,
                    format!("R{:07}", i),
                    row.coeffs[j]
                ));
            }
        }
    }
    out.push_str("RHS\n");
    for (i, row) in lp.rows.iter().enumerate() {
        out.push_str(&format!(
            "    {:<10}{:<10}{:<15.9e}\n",
            "RHS",
            format!("R{:07}", i),
            row.rhs
        ));
    }
    out.push_str("BOUNDS\n");
    for j in 0..lp.n_vars() {
        let col = format!("X{:07}", j);
        out.push_str(&format!(
            " LO {:<7}{:<10}{:<15.9e}\n",
            "BND", col, lp.lower[j]
        ));
        if lp.upper[j].is_finite() {
            out.push_str(&format!(
                " UP {:<7}{:<10}{:<15.9e}\n",
                "BND", col, lp.upper[j]
            ));
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::scenario_from_toml;
    use crate::objective::eval_objective;

    fn one_client_scenario(cloud_uplink: f64) -> Scenario {
        scenario_from_toml(&format!(
            r#"
schema_version = 1
mode = "plain"
rho = 1.0

[[models]]
id = 0
memory_bytes = 5.0e7
compute_per_query = 1.0e9
supported_tasks = [0]

[[models]]
id = 1
memory_bytes = 5.0e7
compute_per_query = 1.0e9
supported_tasks = [0]

[[tasks]]
id = 0
input_bytes = 1.0e6

[[clients]]
id = 0
memory_bytes = 6.0e7
compute_capacity = 1.0e11
edge = 0

[[edges]]
id = 0
memory_bytes = 2.0e8
compute_capacity = 1.0e12
uplink_bytes_per_sec = 1.0e8
accuracy = [0.5, 0.8]

[cloud]
uplink_bytes_per_sec = {cloud_uplink}
accuracy = [1.0]

[workload]
rates = [[10.0]]
"#
        ))
        .unwrap()
    }

    fn onloaded_plan(s: &Scenario) -> Plan {
        let mut p = Plan::empty(s);
        p.client_models[0] = vec![0];
        p.client_assignment[0][0] = Some(0);
        p.edge_models[0] = vec![1];
        p.edge_assignment[0][0] = Some(1);
        p
    }

    #[test]
    fn dominant_chain_offloads_everything() {
        let s = one_client_scenario(1.0e8);
        let p = onloaded_plan(&s);
        let lp = build_offloading_lp(&s, &p, EdgeConstraint::Compute).unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + lp.constant - 1.0).abs() < 1e-9);
        let oc = sol.primal[lp.client_var(&s, 0, 0)];
        let oce = sol.primal[lp.cloud_var(&s, 0, 0)];
        assert!((oc - 1.0).abs() < 1e-9);
        assert!((oce - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_cloud_uplink_keeps_queries_at_edge() {
        let s = one_client_scenario(0.0);
        let p = onloaded_plan(&s);
        let lp = build_offloading_lp(&s, &p, EdgeConstraint::Compute).unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective + lp.constant - 0.8).abs() < 1e-9);
        assert!(sol.primal[lp.cloud_var(&s, 0, 0)].abs() < 1e-9);
        assert!((sol.primal[lp.client_var(&s, 0, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lp_objective_matches_reconstructed_plan() {
        let s = one_client_scenario(5.0e6);
        let p = onloaded_plan(&s);
        let lp = build_offloading_lp(&s, &p, EdgeConstraint::Compute).unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        let mut reconstructed = p.clone();
        apply_solution(&s, &lp, &sol, &mut reconstructed);
        let f = eval_objective(&s, &reconstructed).unwrap().total;
        assert!((sol.objective + lp.constant - f).abs() < 1e-9);
    }

    #[test]
    fn strong_duality_holds() {
        let s = one_client_scenario(5.0e6);
        let p = onloaded_plan(&s);
        let lp = build_offloading_lp(&s, &p, EdgeConstraint::Compute).unwrap();
        let sol = solve_lp(&lp);
        let check = check_solution(&lp, &sol);
        assert!(check.max_primal_residual < 1e-9, "{check:?}");
        assert!(check.duality_gap < 1e-7, "{check:?}");
        assert!(check.max_complementarity < 1e-7, "{check:?}");
        assert!(check.min_dual > -1e-9, "{check:?}");
    }

    #[test]
    fn grid_search_agrees_on_small_instances() {
        // Binding uplink, cloud blocked: the two offload fractions are the
        // only free coordinates, so a fine grid is an independent oracle.
        let mut s = one_client_scenario(0.0);
        s.tasks.push(crate::model::TaskProfile {
            id: 1,
            input_bytes: 1.0e6,
        });
        s.models[0].supported_tasks = vec![0, 1];
        s.models[1].supported_tasks = vec![0, 1];
        s.accuracy.edge[0] = vec![0.5, 0.6, 0.8, 0.7];
        s.accuracy.cloud = vec![1.0, 1.0];
        s.workload.rates = vec![vec![10.0, 20.0]];
        s.topology.edge_uplink[0] = 1.5e7; // half the demand bytes
        s.validate().unwrap();

        let mut p = Plan::empty(&s);
        p.client_models[0] = vec![0];
        p.client_assignment[0] = vec![Some(0), Some(0)];
        p.edge_models[0] = vec![1];
        p.edge_assignment[0] = vec![Some(1), Some(1)];

        let lp = build_offloading_lp(&s, &p, EdgeConstraint::Compute).unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);

        let mut best = f64::NEG_INFINITY;
        let steps = 1000;
        for i in 0..=steps {
            for j in 0..=steps {
                let o0 = i as f64 / steps as f64;
                let o1 = j as f64 / steps as f64;
                let bytes = 10.0 * o0 * 1.0e6 + 20.0 * o1 * 1.0e6;
                if bytes > 1.5e7 {
                    continue;
                }
                let mut cand = p.clone();
                cand.client_offload[0] = vec![o0, o1];
                let f = eval_objective(&s, &cand).unwrap().total;
                best = best.max(f);
            }
        }
        let lp_val = sol.objective + lp.constant;
        assert!(
            (lp_val - best).abs() < 1e-3,
            "lp={lp_val} grid={best}"
        );
        assert!(lp_val >= best - 1e-9);
    }

    #[test]
    fn mps_dump_contains_all_sections() {
        let s = one_client_scenario(5.0e6);
        let p = onloaded_plan(&s);
        let lp = build_offloading_lp(&s, &p, EdgeConstraint::Compute).unwrap();
        let text = write_mps(&lp, "OFFLOAD");
        for section in ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] {
            assert!(text.contains(section), "missing {section}");
        }
    }
}
