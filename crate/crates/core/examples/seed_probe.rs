//! Inspect one desk-scale seed in detail:
//! `cargo run -p hio-core --example seed_probe -- 52`

use hio_core::baselines::minlp_oracle;
use hio_core::gen::{generate_scenario, GeneratorConfig};
use hio_core::j3o::{initial_offloading, j3o, AoConfig};
use hio_core::objective::eval_objective;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|v| v.parse().ok())
        .unwrap_or(52);
    let cfg = GeneratorConfig::desk_scale(seed);
    let s = generate_scenario(&cfg).unwrap();
    println!("lambda_tot = {}", s.lambda_total());
    for (m, model) in s.models.iter().enumerate() {
        println!(
            "model {m}: mem {:.1} MB  w {:.2} GF  tasks {:?}  acc(e0) {:?}",
            model.memory_bytes / 1e6,
            model.compute_per_query / 1e9,
            model.supported_tasks,
            (0..s.n_tasks())
                .map(|t| (s.edge_accuracy(0, m, t) * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        );
    }
    for c in 0..s.n_clients() {
        println!(
            "client {c}: mem {:.1} MB  beta {:.2} GF/s  rates {:?}",
            s.topology.clients[c].memory_bytes / 1e6,
            s.topology.clients[c].compute_capacity / 1e9,
            s.workload.rates[c]
                .iter()
                .map(|r| (r * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        );
    }
    println!(
        "edge: mem {:.1} MB  beta {:.2} GF/s  uplink {:.2} MB/s  cloud {:.2} MB/s",
        s.topology.edges[0].memory_bytes / 1e6,
        s.topology.edges[0].compute_capacity / 1e9,
        s.topology.edge_uplink[0] / 1e6,
        s.topology.cloud_uplink / 1e6
    );
    println!(
        "tasks input: {:?} MB",
        s.tasks.iter().map(|t| t.input_bytes / 1e6).collect::<Vec<_>>()
    );

    let o = initial_offloading(&s);
    println!("initial offload fractions: {:?}", o[0]);

    let oracle = minlp_oracle(&s, 1_000_000).unwrap();
    println!(
        "oracle F = {:.5}  clients x = {:?}  edge x = {:?}",
        oracle.objective, oracle.plan.client_models, oracle.plan.edge_models
    );
    println!(
        "oracle o_client[0] = {:?}\noracle o_cloud[0] = {:?}",
        oracle.plan.client_offload[0], oracle.plan.cloud_offload[0]
    );

    let (plan, trace) = j3o(&s, &AoConfig::default()).unwrap();
    let f = eval_objective(&s, &plan).unwrap().total;
    println!(
        "j3o F = {:.5}  clients x = {:?}  edge x = {:?}",
        f, plan.client_models, plan.edge_models
    );
    for (k, it) in trace.iterations.iter().enumerate() {
        println!(
            "  iter {}: onload {:.5} accepted={} lp {:.5}",
            k + 1,
            it.objective_after_onloading,
            it.accepted,
            it.objective_after_lp
        );
    }
    println!("ratio = {:.4}", f / oracle.objective);
}
