//! Multinomial logistic regression.
//!
//! Minimizes mean softmax cross-entropy plus `(l2 / 2) * |W|^2` by full-batch
//! gradient descent. Each epoch starts from a Barzilai-Borwein step and
//! halves it until the Armijo condition holds, so the loss never increases.
//! The intercept is a constant-1 feature appended to every row.

use super::argmax;
use crate::features::SparseVector;
use serde::{Deserialize, Serialize};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

fn scores(w: &[Vec<f64>], x: &SparseVector) -> Vec<f64> {
    w.iter().map(|row| x.dot_dense(row)).collect()
}

fn squared_norm(w: &[Vec<f64>]) -> f64 {
    w.iter().flatten().map(|v| v * v).sum()
}

/// Mean softmax cross-entropy of `W` (one row per class, one column per
/// feature) plus `(l2 / 2) * |W|^2`.
pub fn cross_entropy_loss(w: &[Vec<f64>], x: &[SparseVector], y: &[usize], l2: f64) -> f64 {
    let mut total = 0.0;
    for (row, &c) in x.iter().zip(y) {
        let z = scores(w, row);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - z[c];
    }
    let n = x.len().max(1) as f64;
    total / n + 0.5 * l2 * squared_norm(w)
}

/// Gradient of [`cross_entropy_loss`] with respect to `W`.
pub fn cross_entropy_gradient(w: &[Vec<f64>], x: &[SparseVector], y: &[usize], l2: f64) -> Vec<Vec<f64>> {
    let n = x.len().max(1) as f64;
    let mut g: Vec<Vec<f64>> = w.iter().map(|row| row.iter().map(|v| l2 * v).collect()).collect();
    for (row, &c) in x.iter().zip(y) {
        let mut p = scores(w, row);
        softmax_in_place(&mut p);
        p[c] -= 1.0;
        for (k, pk) in p.iter().enumerate() {
            for (f, v) in row.iter() {
                g[k][f] += pk * v / n;
            }
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub l2: f64,
    /// One row per class; the last column is the intercept.
    pub weights: Vec<Vec<f64>>,
    pub epochs: usize,
    pub converged: bool,
}

/// A fitted model together with its optimization trace.
#[derive(Debug, Clone)]
pub struct LogisticFit {
    pub model: LogisticModel,
    /// Training loss after every accepted step, starting with the loss at zero.
    pub losses: Vec<f64>,
    pub final_grad_norm: f64,
}

fn with_intercept(x: &SparseVector) -> SparseVector {
    let dim = x.dim();
    let mut entries = x.entries().to_vec();
    entries.push((dim as u32, 1.0));
    SparseVector::new(dim + 1, entries).expect("intercept index is last")
}

impl LogisticModel {
    pub fn fit(x: &[SparseVector], y: &[usize], k: usize, l2: f64, max_epochs: usize, grad_tol: f64) -> LogisticFit {
        let dim = x.first().map_or(0, |r| r.dim());
        let xa: Vec<SparseVector> = x.iter().map(with_intercept).collect();
        let mut w = vec![vec![0.0; dim + 1]; k];
        let mut loss = cross_entropy_loss(&w, &xa, y, l2);
        let mut losses = vec![loss];
        let mut g = cross_entropy_gradient(&w, &xa, y, l2);
        let mut gnorm2 = squared_norm(&g);
        let mut step = 1.0;
        let mut prev: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
        let mut converged = false;
        let mut epochs = 0;

        while epochs < max_epochs {
            if gnorm2.sqrt() < grad_tol {
                converged = true;
                break;
            }
            if let Some((pw, pg)) = &prev {
                let (mut ss, mut sy) = (0.0, 0.0);
                for ((wr, pwr), (gr, pgr)) in w.iter().zip(pw).zip(g.iter().zip(pg)) {
                    for i in 0..wr.len() {
                        let s = wr[i] - pwr[i];
                        ss += s * s;
                        sy += s * (gr[i] - pgr[i]);
                    }
                }
                if sy > 0.0 && (ss / sy).is_finite() {
                    step = ss / sy;
                }
            }
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                let cand: Vec<Vec<f64>> =
                    w.iter().zip(&g).map(|(wr, gr)| wr.iter().zip(gr).map(|(a, b)| a - step * b).collect()).collect();
                let cand_loss = cross_entropy_loss(&cand, &xa, y, l2);
                if cand_loss <= loss - ARMIJO * step * gnorm2 {
                    accepted = Some((cand, cand_loss));
                    break;
                }
                step *= 0.5;
            }
            let Some((next, next_loss)) = accepted else { break };
            epochs += 1;
            let next_g = cross_entropy_gradient(&next, &xa, y, l2);
            prev = Some((std::mem::replace(&mut w, next), std::mem::replace(&mut g, next_g)));
            loss = next_loss;
            losses.push(loss);
            gnorm2 = squared_norm(&g);
        }
        if !converged && gnorm2.sqrt() < grad_tol {
            converged = true;
        }
        LogisticFit { model: LogisticModel { l2, weights: w, epochs, converged }, losses, final_grad_norm: gnorm2.sqrt() }
    }

    /// Class probabilities for one row.
    pub fn probabilities(&self, x: &SparseVector) -> Vec<f64> {
        let mut z = scores(&self.weights, &with_intercept(x));
        softmax_in_place(&mut z);
        z
    }

    pub fn predict(&self, x: &SparseVector) -> usize {
        argmax(&scores(&self.weights, &with_intercept(x)))
    }
}
