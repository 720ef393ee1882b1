//! The binary SMO solver on a tiny separable problem.
use gso::classifiers::smo_solve;
use gso::features::SparseVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let points = [[2.0, 2.0], [3.0, 1.0], [2.5, 3.0], [-1.0, -1.0], [-2.0, 0.5], [0.0, -2.0]];
    let x: Vec<SparseVector> = points.iter().map(|p| SparseVector::from_dense(p)).collect();
    let y = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
    let sol = smo_solve(&x, &y, 1.0, 1e-3, 50)?;
    println!("w = {:?}, b = {:.4}", sol.weights, sol.bias);
    println!("converged {} after {} iterations, gap {:.2e}", sol.converged, sol.iterations, sol.gap);
    for (i, a) in sol.alphas.iter().enumerate() {
        println!("x{i} alpha {a:.4} margin {:+.4}", y[i] * sol.decision(&x[i]));
    }
    Ok(())
}
