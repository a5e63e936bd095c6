//! Near-optimal model onloading and query offloading for three-tier
//! (client / edge / cloud) multi-task inference systems.
//!
//! The crate decomposes the joint placement-and-routing problem into two
//! tractable pieces and alternates between them: greedy submodular model
//! selection under Lagrangian-relaxed compute constraints, and an exact
//! linear program over the offload fractions. On top of the optimizer sit an
//! exhaustive oracle and reference baselines, a seeded scenario generator,
//! and an experiment harness that streams results to CSV.

pub mod model;
pub mod objective;
pub mod lp;
pub mod onload;
pub mod j3o;
pub mod baselines;
pub mod gen;
pub mod sweep;

pub use model::{
    canonical_hash, load_scenario, save_scenario, scenario_from_toml, scenario_to_toml,
    Constraint, ConstraintReport, ConstraintSlack, Mode, NodeRef, Plan, Scenario, ScenarioError,
    FEASIBILITY_REL_TOL, OBJECTIVE_TOL,
};
pub use objective::{
    effective_edge_load, eval_loss_objective, eval_objective, ObjectiveBreakdown, ObjectiveKind,
};
