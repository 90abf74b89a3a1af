//! A small benchmark grid written to a directory, the library form of
//! `nocurl bench`.
//!
//! `cargo run --release --example bench_small -- [out_dir]`

use nocurl::cli::bench::{bench_to_dir, BenchConfig};
use nocurl::synth::{GraphScheme, NoiseKind};
use nocurl::{HKind, Method, Variant};

fn main() -> nocurl::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "bench_small_out".into());
    let cfg = BenchConfig {
        d: vec![8, 12],
        scheme: GraphScheme::Er,
        k: 2.0,
        noise: NoiseKind::Gaussian,
        n: 500,
        trials: 3,
        variants: vec![Method::NoCurl(Variant::Nocurl1), Method::NoCurl(Variant::Nocurl2), Method::Notears],
        seed: 42,
        eps: 0.3,
        h: HKind::Poly,
        max_iters: None,
    };
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let (rows, summary) = bench_to_dir(&cfg, jobs, std::path::Path::new(&out))?;
    println!("{} runs written to {out}/results.csv", rows.len());
    for c in &summary.cells {
        let shd = c.shd.map_or("-".into(), |m| format!("{:.2}", m.mean));
        let t = c.time_seconds.map_or("-".into(), |m| format!("{:.3}", m.mean));
        println!("d={:<3} {:<8} SHD {shd:>6}  time {t:>7}s", c.d, c.variant.tag());
    }
    Ok(())
}
