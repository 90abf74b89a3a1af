//! Any skew-symmetric W and potential p give a DAG through
//! `W o relu(grad p)`, and every DAG arises this way.

use nocurl::dag::{closed_form_w, gamma, is_dag, topo_potential, topological_sort};
use nocurl::objective::h_poly;
use nocurl::rng::Rng;
use nocurl::synth::{assign_weights, gen_er, GraphScheme, GraphSpec};
use nocurl::{DagParams, EdgeFlow, Potential};

fn main() -> nocurl::Result<()> {
    let d = 8;
    let mut rng = Rng::new(1);
    let w = EdgeFlow::from_upper_fn(d, |_, _| rng.uniform(-2.0, 2.0));
    let p = Potential::new((0..d).map(|_| rng.uniform(0.0, 1.0)).collect())?;
    let a = gamma(&DagParams::new(w, p.clone())?);
    println!("random (W, p): {} edges, is_dag={}, h={:.1e}", a.nnz(), is_dag(&a), h_poly(&a)?);
    println!("order from p: {:?}", topological_sort(&a)?);

    // and back: an ER graph recovered exactly from its closed-form parameters
    let spec = GraphSpec { d, scheme: GraphScheme::Er, k: 2.0, seed: 4 };
    let truth = assign_weights(&gen_er(&spec)?, &mut rng)?;
    let p = topo_potential(&truth)?;
    let w = closed_form_w(&truth, &p)?;
    let back = gamma(&DagParams::new(w, p)?);
    println!("ER2 round trip: max error {:.1e}", back.sub(&truth)?.max_abs());
    Ok(())
}
