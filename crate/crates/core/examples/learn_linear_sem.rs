//! Simulate a linear SEM and learn it back with the two-step method.
//!
//! `cargo run --release --example learn_linear_sem -- [d] [seed]`

use nocurl::metrics::{delta_f, shd};
use nocurl::synth::{simulate, GraphScheme, GraphSpec, NoiseKind};
use nocurl::{nocurl_run, NoCurlConfig, Variant};

fn main() -> nocurl::Result<()> {
    let mut args = std::env::args().skip(1);
    let d = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let spec = GraphSpec { d, scheme: GraphScheme::Er, k: 2.0, seed };
    let sim = simulate(&spec, 1000, NoiseKind::Gaussian)?;
    let r = nocurl_run(&sim.data, &NoCurlConfig { seed, ..NoCurlConfig::new(Variant::Nocurl2) })?;

    let s = shd(&r.a_hat, &sim.a_true)?;
    println!("d={d} true edges={} learned={}", sim.a_true.nnz(), r.a_hat.nnz());
    println!("SHD={} (extra {}, missing {}, reversed {})", s.shd, s.extra, s.missing, s.reverse);
    println!("dF={:.4}  time={:.3}s  lambdas={:?}", delta_f(&r.a_hat, &sim.a_true, &sim.data)?, r.wall_time, r.lambdas);
    if let Some(p) = &r.p_tilde {
        let fmt: Vec<String> = p.values().iter().map(|v| format!("{v:.2}")).collect();
        println!("potential: [{}]", fmt.join(", "));
    }
    Ok(())
}
