//! CART decision trees (Gini impurity) and a bagged random forest.

use super::argmax;
use crate::features::SparseVector;
use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf { class: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Unpruned CART tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

struct Split {
    feature: usize,
    threshold: f64,
    /// Sum over both children of `sum_c count_c^2 / size`; larger is purer.
    purity: f64,
}

struct Builder<'a> {
    x: &'a [SparseVector],
    y: &'a [usize],
    k: usize,
    dim: usize,
    max_features: usize,
    nodes: Vec<TreeNode>,
    candidate: Vec<bool>,
}

fn purity(counts: &[f64], size: f64) -> f64 {
    if size == 0.0 {
        0.0
    } else {
        counts.iter().map(|c| c * c).sum::<f64>() / size
    }
}

impl Builder<'_> {
    /// Best split over the features flagged in `candidate`. Ties go to the
    /// lower feature index, then the lower threshold.
    fn best_split(&self, rows: &[usize], counts: &[f64], use_all: bool) -> Option<Split> {
        let mut entries: Vec<(usize, f64, usize)> = Vec::new();
        for &r in rows {
            for (f, v) in self.x[r].iter() {
                if use_all || self.candidate[f] {
                    entries.push((f, v, self.y[r]));
                }
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let n = rows.len() as f64;
        let mut best: Option<Split> = None;
        let mut start = 0;
        while start < entries.len() {
            let f = entries[start].0;
            let end = start + entries[start..].iter().take_while(|e| e.0 == f).count();
            let group = &entries[start..end];
            start = end;

            let mut zeros = counts.to_vec();
            for &(_, _, c) in group {
                zeros[c] -= 1.0;
            }
            let zero_count = rows.len() - group.len();
            let mut blocks: Vec<(f64, Vec<f64>)> = Vec::new();
            let mut zero_done = zero_count == 0;
            for &(_, v, c) in group {
                if !zero_done && v > 0.0 {
                    blocks.push((0.0, zeros.clone()));
                    zero_done = true;
                }
                match blocks.last_mut() {
                    Some((last, acc)) if *last == v => acc[c] += 1.0,
                    _ => {
                        let mut acc = vec![0.0; self.k];
                        acc[c] += 1.0;
                        blocks.push((v, acc));
                    }
                }
            }
            if !zero_done {
                blocks.push((0.0, zeros));
            }
            let mut left = vec![0.0; self.k];
            let mut left_n = 0.0;
            for pair in blocks.windows(2) {
                for (l, a) in left.iter_mut().zip(&pair[0].1) {
                    *l += a;
                }
                left_n += pair[0].1.iter().sum::<f64>();
                let right: Vec<f64> = counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                let p = purity(&left, left_n) + purity(&right, n - left_n);
                if best.as_ref().is_none_or(|b| p > b.purity) {
                    best = Some(Split { feature: f, threshold: (pair[0].0 + pair[1].0) / 2.0, purity: p });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, rng: &mut ChaCha8Rng) -> usize {
        let mut counts = vec![0.0; self.k];
        for &r in &rows {
            counts[self.y[r]] += 1.0;
        }
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { class: argmax(&counts) });
        if rows.len() < 2 || counts.iter().filter(|&&c| c > 0.0).count() < 2 {
            return id;
        }
        let split = if self.max_features >= self.dim {
            self.best_split(&rows, &counts, true)
        } else {
            let picked = sample(rng, self.dim, self.max_features);
            for f in picked.iter() {
                self.candidate[f] = true;
            }
            let s = self.best_split(&rows, &counts, false);
            for f in picked.iter() {
                self.candidate[f] = false;
            }
            // All sampled features constant here: fall back to every feature.
            s.or_else(|| self.best_split(&rows, &counts, true))
        };
        let Some(split) = split else { return id };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.x[r].get(split.feature) <= split.threshold);
        let left = self.grow(left_rows, rng);
        let right = self.grow(right_rows, rng);
        self.nodes[id] = TreeNode::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }
}

impl DecisionTree {
    /// Grows a tree on `rows` (repeats allowed) until leaves are pure or no
    /// feature separates them. With `max_features < dim` each split considers
    /// a fresh random subset of that size.
    pub fn fit(x: &[SparseVector], y: &[usize], k: usize, rows: Vec<usize>, max_features: usize, rng: &mut ChaCha8Rng) -> Self {
        let dim = x.first().map_or(0, |r| r.dim());
        let mut b = Builder { x, y, k, dim, max_features: max_features.max(1), nodes: Vec::new(), candidate: vec![false; dim] };
        b.grow(rows, rng);
        DecisionTree { nodes: b.nodes }
    }

    /// Tree over all rows considering every feature at every split.
    pub fn fit_full(x: &[SparseVector], y: &[usize], k: usize) -> Self {
        let dim = x.first().map_or(0, |r| r.dim());
        DecisionTree::fit(x, y, k, (0..y.len()).collect(), dim, &mut ChaCha8Rng::seed_from_u64(0))
    }

    pub fn predict(&self, x: &SparseVector) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { class } => return class,
                TreeNode::Split { feature, threshold, left, right } => {
                    at = if x.get(feature) <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Leaf { .. } => 1,
                TreeNode::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub classes: usize,
    pub max_features: usize,
    pub bootstrap: bool,
    pub trees: Vec<DecisionTree>,
}

impl ForestModel {
    /// Trees are grown in parallel, each from its own seed drawn in order
    /// from `seed`, so the result does not depend on the thread count.
    pub fn fit(x: &[SparseVector], y: &[usize], k: usize, trees: usize, max_features: Option<usize>, bootstrap: bool, seed: u64) -> Self {
        let dim = x.first().map_or(0, |r| r.dim());
        let m = max_features.unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize).clamp(1, dim.max(1));
        let mut master = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..trees).map(|_| master.next_u64()).collect();
        let n = y.len();
        let trees = seeds
            .par_iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let rows = if bootstrap { (0..n).map(|_| rng.random_range(0..n)).collect() } else { (0..n).collect() };
                DecisionTree::fit(x, y, k, rows, m, &mut rng)
            })
            .collect();
        ForestModel { classes: k, max_features: m, bootstrap, trees }
    }

    /// Majority vote; ties go to the lower class.
    pub fn predict(&self, x: &SparseVector) -> usize {
        let mut votes = vec![0.0; self.classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1.0;
        }
        argmax(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(seed: u64) -> (Vec<SparseVector>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<SparseVector> = (0..120)
            .map(|_| {
                let v: Vec<f64> = (0..8).map(|_| if rng.random_bool(0.3) { f64::from(rng.random_range(1..4u8)) } else { 0.0 }).collect();
                SparseVector::from_dense(&v)
            })
            .collect();
        let y = x.iter().map(|r| if r.get(0) > 1.0 { 0 } else if r.get(3) > 0.0 { 1 } else { 2 }).collect();
        (x, y)
    }

    #[test]
    fn full_tree_fits_consistent_data() {
        let (x, y) = data(1);
        let tree = DecisionTree::fit_full(&x, &y, 3);
        for (r, &c) in x.iter().zip(&y) {
            assert_eq!(tree.predict(r), c);
        }
        assert!(tree.depth() <= 4);
    }

    #[test]
    fn identical_rows_with_different_labels_become_a_leaf() {
        let x = vec![SparseVector::from_dense(&[1.0]); 3];
        let tree = DecisionTree::fit_full(&x, &[0, 1, 1], 2);
        assert_eq!(tree.nodes, vec![TreeNode::Leaf { class: 1 }]);
    }

    #[test]
    fn single_tree_forest_equals_plain_tree() {
        for seed in 0..5 {
            let (x, mut y) = data(seed);
            y[7] = (y[7] + 1) % 3;
            let forest = ForestModel::fit(&x, &y, 3, 1, Some(8), false, seed);
            let tree = DecisionTree::fit_full(&x, &y, 3);
            assert_eq!(forest.trees[0], tree);
        }
    }

    #[test]
    fn forest_is_seed_deterministic() {
        let (x, y) = data(3);
        let a = ForestModel::fit(&x, &y, 3, 20, None, true, 9);
        assert_eq!(a, ForestModel::fit(&x, &y, 3, 20, None, true, 9));
        assert_ne!(a, ForestModel::fit(&x, &y, 3, 20, None, true, 10));
        assert_eq!(a.max_features, 3);
    }
}
