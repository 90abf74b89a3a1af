//! Projects a cyclic four-node graph onto a DAG through its topological
//! potential and closed-form weights.

use nocurl::calculus::{connectivity, curl_max, hodge_project};
use nocurl::dag::{closed_form_w, gamma, topo_potential};
use nocurl::{DagParams, DenseMatrix, EdgeFlow};

fn show(name: &str, m: &DenseMatrix) {
    println!("{name}:");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{:7.3}", v + 0.0)).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> nocurl::Result<()> {
    // a two-cycle between 0 and 1, plus 2 -> 3 -> 0
    let a = DenseMatrix::from_rows(&[
        [0., -1., 0., 0.],
        [2., 0., 0., 0.],
        [0., 0., 0., 5.],
        [-2., 0., 0., 0.],
    ])?;
    show("A", &a);
    show("connectivity", &connectivity(&a));

    let p = topo_potential(&a)?;
    println!("potential: {:?}", p.values());
    let w = closed_form_w(&a, &p)?;
    show("W", w.as_matrix());
    show("projected DAG", &gamma(&DagParams::new(w, p)?));

    // any flow splits into a curl-free part and an orthogonal remainder
    let y = EdgeFlow::skew_part(&a)?;
    let py = hodge_project(&y);
    println!("curl of y: {:.3}, curl of projection: {:.1e}", curl_max(&y), curl_max(&py));
    println!("<Py, y - Py> = {:.1e}", py.inner(&y.sub(&py)?));
    Ok(())
}
