//! Accuracy and wall time of NoCurl against the augmented-Lagrangian
//! baseline on the same data.
//!
//! `cargo run --release --example notears_vs_nocurl -- [d]`

use nocurl::lbfgs::OptimOptions;
use nocurl::metrics::{delta_f, shd};
use nocurl::synth::{simulate, GraphScheme, GraphSpec, NoiseKind};
use nocurl::{nocurl_run, notears_baseline, HKind, NoCurlConfig, Variant};

fn main() -> nocurl::Result<()> {
    let d = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let spec = GraphSpec { d, scheme: GraphScheme::Er, k: 3.0, seed: 3 };
    let sim = simulate(&spec, 1000, NoiseKind::Gaussian)?;

    let runs = [
        nocurl_run(&sim.data, &NoCurlConfig::new(Variant::Nocurl1))?,
        nocurl_run(&sim.data, &NoCurlConfig::new(Variant::Nocurl2))?,
        notears_baseline(&sim.data, HKind::Poly, 0.3, &OptimOptions::default())?,
    ];
    println!("{:<10} {:>5} {:>8} {:>9}", "method", "SHD", "dF", "time(s)");
    for r in &runs {
        let s = shd(&r.a_hat, &sim.a_true)?.shd;
        let df = delta_f(&r.a_hat, &sim.a_true, &sim.data)?;
        println!("{:<10} {s:>5} {df:>8.3} {:>9.3}", r.method, r.wall_time);
    }
    let nt = runs.last().expect("three runs");
    println!("baseline used {} penalty rounds", nt.notears_trace.len());
    Ok(())
}
