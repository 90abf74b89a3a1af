//! Erdos-Renyi and scale-free ground truths with Gaussian and Gumbel noise.

use nocurl::synth::{gen_graph, simulate, GraphScheme, GraphSpec, NoiseKind};

fn main() -> nocurl::Result<()> {
    for (scheme, k) in [(GraphScheme::Er, 2.0), (GraphScheme::Sf, 2.0)] {
        let spec = GraphSpec { d: 30, scheme, k, seed: 5 };
        let b = gen_graph(&spec)?;
        let d = b.rows();
        let indeg: Vec<usize> = (0..d).map(|j| (0..d).filter(|&i| b[(i, j)] != 0.0).count()).collect();
        let outdeg: Vec<usize> = (0..d).map(|i| b.row(i).iter().filter(|v| **v != 0.0).count()).collect();
        println!(
            "{scheme}{k}: {} edges, max in-degree {}, max out-degree {}",
            b.nnz(),
            indeg.iter().max().unwrap_or(&0),
            outdeg.iter().max().unwrap_or(&0)
        );
    }

    let spec = GraphSpec { d: 5, scheme: GraphScheme::Er, k: 1.0, seed: 2 };
    for noise in [NoiseKind::Gaussian, NoiseKind::Gumbel] {
        let sim = simulate(&spec, 2000, noise)?;
        let x = sim.data.x();
        let n = x.rows() as f64;
        let means: Vec<String> = (0..x.cols())
            .map(|j| format!("{:.2}", (0..x.rows()).map(|i| x[(i, j)]).sum::<f64>() / n))
            .collect();
        println!("{noise} noise, column means: [{}]", means.join(", "));
    }
    Ok(())
}
