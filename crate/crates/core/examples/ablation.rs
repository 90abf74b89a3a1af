//! All ten variants on one dense graph: incremental thresholding, the
//! closed-form W, joint refinement and random initializations.

use nocurl::metrics::shd;
use nocurl::synth::{simulate, GraphScheme, GraphSpec, NoiseKind};
use nocurl::{nocurl_run, NoCurlConfig, Variant};

fn main() -> nocurl::Result<()> {
    let spec = GraphSpec { d: 20, scheme: GraphScheme::Er, k: 4.0, seed: 8 };
    let sim = simulate(&spec, 1000, NoiseKind::Gaussian)?;
    println!("{} true edges", sim.a_true.nnz());
    for v in Variant::ALL {
        let r = nocurl_run(&sim.data, &NoCurlConfig { seed: 8, ..NoCurlConfig::new(v) })?;
        let s = shd(&r.a_hat, &sim.a_true)?;
        println!(
            "{:<14} SHD {:>3}  threshold {:.2}  {} solves  {:.2}s",
            v.tag(),
            s.shd,
            r.final_threshold,
            r.optim_reports.len(),
            r.wall_time
        );
    }
    Ok(())
}
