//! The in-crate L-BFGS on the n-dimensional Rosenbrock function.

use nocurl::lbfgs::{minimize, OptimOptions};
use nocurl::objective::ObjectiveEval;

fn rosenbrock(x: &[f64]) -> nocurl::Result<ObjectiveEval> {
    let mut value = 0.0;
    let mut gradient = vec![0.0; x.len()];
    for i in 0..x.len() - 1 {
        let a = x[i + 1] - x[i] * x[i];
        let b = 1.0 - x[i];
        value += 100.0 * a * a + b * b;
        gradient[i] += -400.0 * x[i] * a - 2.0 * b;
        gradient[i + 1] += 200.0 * a;
    }
    Ok(ObjectiveEval { value, gradient })
}

fn main() -> nocurl::Result<()> {
    for n in [2, 10, 50] {
        let x0: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { -1.2 } else { 1.0 }).collect();
        let r = minimize(rosenbrock, &x0, &OptimOptions::default())?;
        let err = r.x_final.iter().fold(0.0_f64, |m, v| m.max((v - 1.0).abs()));
        println!(
            "n={n:<3} f={:.2e} iters={:<4} evals={:<4} stop={:?} max|x-1|={err:.1e}",
            r.f_final, r.iterations, r.function_evals, r.converged_by
        );
    }
    Ok(())
}
