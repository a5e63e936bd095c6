//! Scratch probe for desk-scale suite statistics: run with
//! `cargo run -p hio-core --example desk_probe`.

use std::time::Instant;

use hio_core::baselines::minlp_oracle;
use hio_core::gen::{generate_scenario, GeneratorConfig};
use hio_core::j3o::{j3o, AoConfig};
use hio_core::objective::eval_objective;

fn main() {
    let t0 = Instant::now();
    let mut ratios = Vec::new();
    let mut counts = Vec::new();
    let mut worst = (1.0f64, 0u64);
    for seed in 0..100 {
        let cfg = GeneratorConfig::desk_scale(seed);
        let s = generate_scenario(&cfg).unwrap();
        let oracle = minlp_oracle(&s, 1_000_000).unwrap();
        let (plan, trace) = j3o(&s, &AoConfig::default()).unwrap();
        let f = eval_objective(&s, &plan).unwrap().total;
        let ratio = f / oracle.objective;
        if ratio < worst.0 {
            worst = (ratio, seed);
        }
        ratios.push(ratio);
        counts.push(oracle.enumerated.unwrap());
        let _ = trace;
    }
    ratios.sort_by(f64::total_cmp);
    counts.sort_unstable();
    println!("elapsed: {:.1}s", t0.elapsed().as_secs_f64());
    println!(
        "ratio min={:.4} (seed {}) p10={:.4} median={:.4} max={:.4}",
        ratios[0],
        worst.1,
        ratios[10],
        ratios[50],
        ratios[99]
    );
    println!(
        "enumerated configs min={} median={} max={}",
        counts[0], counts[50], counts[99]
    );
}
