//! Linear support vector machine trained by sequential minimal optimization.
//!
//! The binary solver works on the dual
//!
//! ```text
//! max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j <x_i, x_j>
//! s.t. 0 <= a_i <= C,  sum(a_i y_i) = 0
//! ```
//!
//! picking the maximal violating pair at every step. Multiclass problems are
//! split one-vs-one and decided by pairwise voting.

use super::ClassifierError;
use crate::features::SparseVector;
use serde::{Deserialize, Serialize};

/// Kernel matrices up to this many entries are cached in full.
const CACHE_LIMIT: usize = 16 << 20;
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// `w = sum(a_i y_i x_i)`, dense.
    pub weights: Vec<f64>,
    /// False when the pair-update budget ran out before the KKT gap closed.
    pub converged: bool,
    pub iterations: usize,
    /// Final maximal KKT violation `max_up(v) - min_low(v)`.
    pub gap: f64,
}

impl SmoSolution {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }

    pub fn support_vectors(&self) -> usize {
        self.alphas.iter().filter(|&&a| a > 0.0).count()
    }
}

struct Kernel<'a> {
    x: &'a [SparseVector],
    columns: Vec<Vec<f64>>,
    cache: bool,
    buf: Vec<f64>,
}

impl<'a> Kernel<'a> {
    fn new(x: &'a [SparseVector], dim: usize) -> Self {
        let n = x.len();
        Kernel { x, columns: vec![Vec::new(); n], cache: n.saturating_mul(n) <= CACHE_LIMIT, buf: vec![0.0; dim] }
    }

    fn compute(&mut self, i: usize) -> Vec<f64> {
        for (f, v) in self.x[i].iter() {
            self.buf[f] = v;
        }
        let col = self.x.iter().map(|r| r.dot_dense(&self.buf)).collect();
        for (f, _) in self.x[i].iter() {
            self.buf[f] = 0.0;
        }
        col
    }

    fn column(&mut self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        if !self.cache {
            return std::borrow::Cow::Owned(self.compute(i));
        }
        if self.columns[i].is_empty() && !self.x.is_empty() {
            self.columns[i] = self.compute(i);
        }
        std::borrow::Cow::Borrowed(&self.columns[i])
    }
}

/// Solves the binary soft-margin dual with a linear kernel.
///
/// Stops once the maximal KKT violation drops below `tol` or after
/// `max_passes * n` pair updates; in the latter case the current iterate is
/// returned with `converged == false`.
pub fn smo_solve(x: &[SparseVector], y: &[f64], c: f64, tol: f64, max_passes: usize) -> Result<SmoSolution, ClassifierError> {
    if x.len() != y.len() {
        return Err(ClassifierError::DimensionMismatch { expected: y.len(), got: x.len() });
    }
    if !(c > 0.0 && c.is_finite()) || !(tol > 0.0) {
        return Err(ClassifierError::InvalidParams("need C > 0 and tol > 0".into()));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(ClassifierError::InvalidParams("labels must be +1 or -1".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(ClassifierError::InvalidParams("both +1 and -1 labels are required".into()));
    }
    let n = x.len();
    let dim = x[0].dim();
    if let Some(bad) = x.iter().find(|r| r.dim() != dim) {
        return Err(ClassifierError::DimensionMismatch { expected: dim, got: bad.dim() });
    }

    let mut kernel = Kernel::new(x, dim);
    let mut alpha = vec![0.0; n];
    // Gradient of the minimization form, Q a - e.
    let mut grad = vec![-1.0; n];
    let cap = max_passes.saturating_mul(n);
    let mut iterations = 0;
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let (converged, gap) = loop {
        let (mut i, mut m) = (usize::MAX, f64::NEG_INFINITY);
        let (mut j, mut big_m) = (usize::MAX, f64::INFINITY);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v > m {
                i = t;
                m = v;
            }
            if in_low(alpha[t], y[t]) && v < big_m {
                j = t;
                big_m = v;
            }
        }
        let gap = m - big_m;
        if i == usize::MAX || j == usize::MAX || gap < tol {
            break (true, gap.max(0.0));
        }
        if iterations >= cap {
            break (false, gap);
        }
        iterations += 1;

        let ki = kernel.column(i).into_owned();
        let kj = kernel.column(j);
        let eta = (ki[i] + kj[j] - 2.0 * ki[j]).max(TAU);
        let mut step = gap / eta;
        let room_i = if y[i] > 0.0 { c - alpha[i] } else { alpha[i] };
        let room_j = if y[j] > 0.0 { alpha[j] } else { c - alpha[j] };
        step = step.min(room_i).min(room_j);

        let old_i = alpha[i];
        let old_j = alpha[j];
        alpha[i] = if step == room_i { if y[i] > 0.0 { c } else { 0.0 } } else { old_i + y[i] * step };
        alpha[j] = if step == room_j { if y[j] > 0.0 { 0.0 } else { c } } else { old_j - y[j] * step };
        let di = (alpha[i] - old_i) * y[i];
        let dj = (alpha[j] - old_j) * y[j];
        for k in 0..n {
            grad[k] += y[k] * (ki[k] * di + kj[k] * dj);
        }
    };

    let free: Vec<f64> = (0..n).filter(|&t| alpha[t] > 0.0 && alpha[t] < c).map(|t| -y[t] * grad[t]).collect();
    let bias = if free.is_empty() {
        let up = (0..n).filter(|&t| in_up(alpha[t], y[t])).map(|t| -y[t] * grad[t]).fold(f64::NEG_INFINITY, f64::max);
        let low = (0..n).filter(|&t| in_low(alpha[t], y[t])).map(|t| -y[t] * grad[t]).fold(f64::INFINITY, f64::min);
        match (up.is_finite(), low.is_finite()) {
            (true, true) => (up + low) / 2.0,
            (true, false) => up,
            (false, true) => low,
            (false, false) => 0.0,
        }
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };

    let mut weights = vec![0.0; dim];
    for t in 0..n {
        if alpha[t] > 0.0 {
            for (f, v) in x[t].iter() {
                weights[f] += alpha[t] * y[t] * v;
            }
        }
    }
    Ok(SmoSolution { alphas: alpha, bias, weights, converged, iterations, gap })
}

/// Binary machine separating `positive` (decision > 0) from `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMachine {
    pub positive: usize,
    pub negative: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub support_vectors: usize,
    pub converged: bool,
}

impl PairwiseMachine {
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(&self.weights) + self.bias
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub c: f64,
    /// Training frequency of each class, used to break voting ties.
    pub class_counts: Vec<usize>,
    pub machines: Vec<PairwiseMachine>,
}

impl SvmModel {
    pub(crate) fn fit(x: &[SparseVector], y: &[usize], k: usize, c: f64, tol: f64, max_passes: usize) -> Result<Self, ClassifierError> {
        let mut class_counts = vec![0; k];
        for &c in y {
            class_counts[c] += 1;
        }
        let mut machines = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                let idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == a || y[i] == b).collect();
                let xs: Vec<SparseVector> = idx.iter().map(|&i| x[i].clone()).collect();
                let ys: Vec<f64> = idx.iter().map(|&i| if y[i] == a { 1.0 } else { -1.0 }).collect();
                let sol = smo_solve(&xs, &ys, c, tol, max_passes)?;
                if !sol.converged {
                    log::warn!("SMO {a} vs {b} stopped after {} updates with KKT gap {:.2e}", sol.iterations, sol.gap);
                }
                machines.push(PairwiseMachine {
                    positive: a,
                    negative: b,
                    support_vectors: sol.support_vectors(),
                    converged: sol.converged,
                    weights: sol.weights,
                    bias: sol.bias,
                });
            }
        }
        Ok(SvmModel { c, class_counts, machines })
    }

    pub fn votes(&self, x: &SparseVector) -> Vec<usize> {
        let mut votes = vec![0; self.class_counts.len()];
        for m in &self.machines {
            if m.decision(x) > 0.0 {
                votes[m.positive] += 1;
            } else {
                votes[m.negative] += 1;
            }
        }
        votes
    }

    /// Most votes; ties go to the more frequent training class, then the
    /// lower label.
    pub fn predict(&self, x: &SparseVector) -> usize {
        let votes = self.votes(x);
        (0..votes.len())
            .max_by(|&a, &b| votes[a].cmp(&votes[b]).then(self.class_counts[a].cmp(&self.class_counts[b])).then(b.cmp(&a)))
            .expect("at least two classes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(points: &[[f64; 2]]) -> Vec<SparseVector> {
        points.iter().map(|p| SparseVector::from_dense(p)).collect()
    }

    #[test]
    fn two_points_are_both_support_vectors() {
        let x = rows(&[[1.0, 1.0], [-1.0, -1.0]]);
        let s = smo_solve(&x, &[1.0, -1.0], 1.0, 1e-3, 100).unwrap();
        assert!(s.converged);
        // w = a (x1 - x2) with |w|^2 = 2a and margin 1 gives a = 1/4.
        assert!((s.alphas[0] - 0.25).abs() < 1e-12 && (s.alphas[1] - 0.25).abs() < 1e-12);
        assert!(s.bias.abs() < 1e-12);
        assert!(s.decision(&SparseVector::from_dense(&[0.0, 0.0])).abs() < 1e-12);
    }

    #[test]
    fn conflicting_duplicates_sit_at_the_bound() {
        let x = rows(&[[0.5, 2.0], [0.5, 2.0]]);
        let s = smo_solve(&x, &[1.0, -1.0], 1.0, 1e-3, 100).unwrap();
        assert_eq!(s.alphas, vec![1.0, 1.0]);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let x = rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.2, 0.1], [0.9, 0.3]]);
        let y = [1.0, -1.0, 1.0, -1.0, -1.0];
        let s = smo_solve(&x, &y, 10.0, 1e-9, 1).unwrap();
        assert!(s.iterations <= 5);
        let full = smo_solve(&x, &y, 10.0, 1e-9, 1000).unwrap();
        assert!(full.converged);
        assert!(!s.converged || s.iterations == full.iterations);
    }

    #[test]
    fn rejects_bad_labels() {
        let x = rows(&[[1.0, 0.0], [0.0, 1.0]]);
        assert!(smo_solve(&x, &[1.0, 0.0], 1.0, 1e-3, 10).is_err());
        assert!(smo_solve(&x, &[1.0, 1.0], 1.0, 1e-3, 10).is_err());
        assert!(smo_solve(&x, &[1.0, -1.0], -1.0, 1e-3, 10).is_err());
    }

    #[test]
    fn voting_ties_prefer_frequent_class() {
        let machine = |p, n, bias| PairwiseMachine { positive: p, negative: n, weights: vec![0.0], bias, support_vectors: 0, converged: true };
        // Cyclic votes: 0 beats 1, 1 beats 2, 2 beats 0.
        let model = SvmModel {
            c: 1.0,
            class_counts: vec![3, 9, 5],
            machines: vec![machine(0, 1, 1.0), machine(0, 2, -1.0), machine(1, 2, 1.0)],
        };
        let x = SparseVector::zeros(1);
        assert_eq!(model.votes(&x), vec![1, 1, 1]);
        assert_eq!(model.predict(&x), 1);
        let even = SvmModel { class_counts: vec![4, 4, 4], ..model };
        assert_eq!(even.predict(&x), 0);
    }
}
