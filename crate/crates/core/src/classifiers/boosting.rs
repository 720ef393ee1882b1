//! SAMME boosting over decision stumps.

use super::argmax;
use crate::features::SparseVector;
use serde::{Deserialize, Serialize};

/// Error rate used in place of zero when a stump fits the weighted data perfectly.
const MIN_ERROR: f64 = 1e-10;

/// One-split tree: `x[feature] <= threshold` goes left. A stump without a
/// feature always answers `left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: Option<usize>,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
    pub alpha: f64,
}

impl Stump {
    pub fn classify(&self, x: &SparseVector) -> usize {
        match self.feature {
            Some(f) if x.get(f) > self.threshold => self.right,
            _ => self.left,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub classes: usize,
    pub stumps: Vec<Stump>,
}

/// Instance weight distribution before each round and after the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostTrace {
    pub distributions: Vec<Vec<f64>>,
    pub errors: Vec<f64>,
}

/// Nonzero entries of each column, sorted by value.
fn columns(x: &[SparseVector], dim: usize) -> Vec<Vec<(f64, usize)>> {
    let mut cols = vec![Vec::new(); dim];
    for (r, row) in x.iter().enumerate() {
        for (f, v) in row.iter() {
            cols[f].push((v, r));
        }
    }
    for c in &mut cols {
        c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    }
    cols
}

fn weighted_error(left: &[f64], right: &[f64], total: f64) -> f64 {
    let best = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    total - best(left) - best(right)
}

/// Minimum weighted error stump; ties go to the lower feature, then the
/// lower threshold.
fn fit_stump(cols: &[Vec<(f64, usize)>], y: &[usize], w: &[f64], k: usize) -> Stump {
    let mut totals = vec![0.0; k];
    for (&c, &wi) in y.iter().zip(w) {
        totals[c] += wi;
    }
    let total: f64 = totals.iter().sum();
    let majority = argmax(&totals);
    let mut best = Stump { feature: None, threshold: 0.0, left: majority, right: majority, alpha: 0.0 };
    let mut best_err = total - totals[majority];

    let mut left = vec![0.0; k];
    for (f, col) in cols.iter().enumerate() {
        if col.is_empty() {
            continue;
        }
        let mut zeros = totals.clone();
        for &(_, r) in col {
            zeros[y[r]] -= w[r];
        }
        let zero_rows = y.len() - col.len();
        // Distinct values in order, zero block included where it falls.
        let mut blocks: Vec<(f64, Vec<f64>)> = Vec::new();
        let push = |v: f64, c: usize, wi: f64, blocks: &mut Vec<(f64, Vec<f64>)>| match blocks.last_mut() {
            Some((last, acc)) if *last == v => acc[c] += wi,
            _ => {
                let mut acc = vec![0.0; k];
                acc[c] += wi;
                blocks.push((v, acc));
            }
        };
        let mut zero_done = zero_rows == 0;
        for &(v, r) in col {
            if !zero_done && v > 0.0 {
                blocks.push((0.0, zeros.clone()));
                zero_done = true;
            }
            push(v, y[r], w[r], &mut blocks);
        }
        if !zero_done {
            blocks.push((0.0, zeros.clone()));
        }
        left.iter_mut().for_each(|v| *v = 0.0);
        for pair in blocks.windows(2) {
            for (l, a) in left.iter_mut().zip(&pair[0].1) {
                *l += a;
            }
            let right: Vec<f64> = totals.iter().zip(&left).map(|(t, l)| t - l).collect();
            let err = weighted_error(&left, &right, total);
            if err < best_err {
                best_err = err;
                best = Stump {
                    feature: Some(f),
                    threshold: (pair[0].0 + pair[1].0) / 2.0,
                    left: argmax(&left),
                    right: argmax(&right),
                    alpha: 0.0,
                };
            }
        }
    }
    best
}

impl AdaBoostModel {
    pub fn fit(x: &[SparseVector], y: &[usize], k: usize, rounds: usize) -> (Self, AdaBoostTrace) {
        let n = y.len();
        let dim = x.first().map_or(0, |r| r.dim());
        let cols = columns(x, dim);
        let mut w = vec![1.0 / n as f64; n];
        let mut trace = AdaBoostTrace { distributions: vec![w.clone()], errors: Vec::new() };
        let mut stumps = Vec::new();
        let chance = 1.0 - 1.0 / k as f64;
        let extra = ((k - 1) as f64).ln();

        for _ in 0..rounds {
            let mut stump = fit_stump(&cols, y, &w, k);
            let miss: Vec<bool> = x.iter().zip(y).map(|(r, &c)| stump.classify(r) != c).collect();
            let err: f64 = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(wi, _)| wi).sum();
            trace.errors.push(err);
            if err >= chance {
                // No better than chance: keep it only so the ensemble is never empty.
                if stumps.is_empty() {
                    stump.alpha = 1.0;
                    stumps.push(stump);
                }
                break;
            }
            let e = err.max(MIN_ERROR);
            stump.alpha = ((1.0 - e) / e).ln() + extra;
            let perfect = err <= MIN_ERROR;
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= stump.alpha.exp();
                }
            }
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= sum);
            trace.distributions.push(w.clone());
            stumps.push(stump);
            if perfect {
                break;
            }
        }
        (AdaBoostModel { classes: k, stumps }, trace)
    }

    pub fn predict(&self, x: &SparseVector) -> usize {
        let mut score = vec![0.0; self.classes];
        for s in &self.stumps {
            score[s.classify(x)] += s.alpha;
        }
        argmax(&score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stump_finds_the_separating_threshold() {
        let x: Vec<SparseVector> = [0.0, 1.0, 2.0, 3.0, -1.0].iter().map(|&v| SparseVector::from_dense(&[0.5, v])).collect();
        let y = [0, 1, 1, 1, 0];
        let s = fit_stump(&columns(&x, 2), &y, &[0.2; 5], 2);
        assert_eq!((s.feature, s.threshold, s.left, s.right), (Some(1), 0.5, 0, 1));
    }

    #[test]
    fn agreeing_stumps_always_give_their_label() {
        let stump = Stump { feature: Some(0), threshold: 0.5, left: 2, right: 2, alpha: 0.7 };
        let model = AdaBoostModel { classes: 3, stumps: vec![stump.clone(), Stump { feature: Some(1), ..stump }] };
        for v in [[0.0, 0.0], [1.0, 0.0], [5.0, 5.0]] {
            assert_eq!(model.predict(&SparseVector::from_dense(&v)), 2);
        }
    }

    #[test]
    fn weights_stay_a_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<SparseVector> =
            (0..90).map(|_| SparseVector::from_dense(&(0..6).map(|_| f64::from(rng.random_range(0..3u8))).collect::<Vec<_>>())).collect();
        let y: Vec<usize> = (0..90).map(|_| rng.random_range(0..3)).collect();
        let (model, trace) = AdaBoostModel::fit(&x, &y, 3, 10);
        assert!(!model.stumps.is_empty());
        for d in &trace.distributions {
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(d.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn perfect_stump_stops_early() {
        let x: Vec<SparseVector> = [[1.0], [1.0], [0.0], [0.0]].iter().map(|r| SparseVector::from_dense(r)).collect();
        let (model, _) = AdaBoostModel::fit(&x, &[1, 1, 0, 0], 2, 10);
        assert_eq!(model.stumps.len(), 1);
        assert_eq!(model.predict(&SparseVector::from_dense(&[1.0])), 1);
    }
}
