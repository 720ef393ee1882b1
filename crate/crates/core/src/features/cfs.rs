//! Correlation-based feature subset selection.
//!
//! Subsets are scored with the CFS merit
//!
//! ```text
//! merit(S) = k * mean(r_cf) / sqrt(k + k(k-1) * mean(r_ff))
//!          = sum(r_cf) / sqrt(k + 2 * sum_{i<j} r_ff)
//! ```
//!
//! where `r` is symmetric uncertainty between discrete columns. The search is
//! best-first, forward from the empty set, and gives up after a fixed number
//! of consecutive expansions that fail to improve the best merit.

use super::{FeatureError, SparseVector};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

/// Improvements smaller than this do not count as progress.
const MERIT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CfsConfig {
    /// Consecutive non-improving expansions before the search stops.
    pub stall_limit: usize,
}

impl Default for CfsConfig {
    fn default() -> Self {
        CfsConfig { stall_limit: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CfsResult {
    /// Selected column indices, ascending.
    pub selected: Vec<usize>,
    pub merit: f64,
    /// Number of subsets scored during the search.
    pub evaluated: usize,
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// SU over two columns already coded as `0..na` and `0..nb`.
fn su_coded(a: &[u8], na: usize, b: &[u8], nb: usize) -> f64 {
    let n = a.len() as f64;
    let mut joint = vec![0usize; na * nb];
    let mut ca = vec![0usize; na];
    let mut cb = vec![0usize; nb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x as usize * nb + y as usize] += 1;
        ca[x as usize] += 1;
        cb[y as usize] += 1;
    }
    let ha = entropy(ca.into_iter(), n);
    let hb = entropy(cb.into_iter(), n);
    if ha <= 0.0 || hb <= 0.0 {
        return 0.0;
    }
    let hab = entropy(joint.into_iter(), n);
    (2.0 * (ha + hb - hab) / (ha + hb)).clamp(0.0, 1.0)
}

fn code(values: &[u32]) -> Result<(Vec<u8>, usize), FeatureError> {
    let mut distinct: Vec<u32> = values.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > u8::MAX as usize + 1 {
        return Err(FeatureError::DegenerateInput(format!("{} distinct values in one column", distinct.len())));
    }
    let coded = values.iter().map(|v| distinct.binary_search(v).expect("value present") as u8).collect();
    Ok((coded, distinct.len()))
}

/// Symmetric uncertainty `2 I(a;b) / (H(a) + H(b))`, in `[0, 1]`. Zero when
/// either column is constant.
pub fn symmetric_uncertainty(a: &[u32], b: &[u32]) -> Result<f64, FeatureError> {
    if a.len() != b.len() {
        return Err(FeatureError::LengthMismatch { left: a.len(), right: b.len() });
    }
    if a.is_empty() {
        return Err(FeatureError::EmptyColumn);
    }
    let (ca, na) = code(a)?;
    let (cb, nb) = code(b)?;
    Ok(su_coded(&ca, na, &cb, nb))
}

/// Presence/absence columns of a row-major sparse matrix.
pub fn binarize_columns(rows: &[SparseVector], dim: usize) -> Vec<Vec<u8>> {
    let mut cols = vec![vec![0u8; rows.len()]; dim];
    for (r, row) in rows.iter().enumerate() {
        for (i, v) in row.iter() {
            if v != 0.0 {
                cols[i][r] = 1;
            }
        }
    }
    cols
}

struct Scorer<'a> {
    columns: &'a [Vec<u8>],
    rcf: Vec<f64>,
    rff: HashMap<(usize, usize), f64>,
}

impl<'a> Scorer<'a> {
    fn new(columns: &'a [Vec<u8>], y: &[u8], ny: usize) -> Self {
        let rcf = columns.iter().map(|c| su_coded(c, 2, y, ny)).collect();
        Scorer { columns, rcf, rff: HashMap::new() }
    }

    fn rff(&mut self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        let columns = self.columns;
        *self.rff.entry(key).or_insert_with(|| su_coded(&columns[key.0], 2, &columns[key.1], 2))
    }
}

fn merit_of(sum_rcf: f64, sum_rff: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let denom = k as f64 + 2.0 * sum_rff;
    sum_rcf / denom.sqrt()
}

fn check_inputs(columns: &[Vec<u8>], y: &[u32]) -> Result<(Vec<u8>, usize), FeatureError> {
    if columns.is_empty() {
        return Err(FeatureError::DegenerateInput("no features".into()));
    }
    for c in columns {
        if c.len() != y.len() {
            return Err(FeatureError::LengthMismatch { left: c.len(), right: y.len() });
        }
        if c.iter().any(|&v| v > 1) {
            return Err(FeatureError::DegenerateInput("columns must be binary".into()));
        }
    }
    let (yc, ny) = code(y)?;
    if ny < 2 {
        return Err(FeatureError::DegenerateInput("fewer than two classes".into()));
    }
    Ok((yc, ny))
}

/// Merit of `subset` computed directly from the data.
pub fn cfs_merit(subset: &[usize], columns: &[Vec<u8>], y: &[u32]) -> Result<f64, FeatureError> {
    let (yc, ny) = check_inputs(columns, y)?;
    let sum_rcf: f64 = subset.iter().map(|&i| su_coded(&columns[i], 2, &yc, ny)).sum();
    let mut sum_rff = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            sum_rff += su_coded(&columns[i], 2, &columns[j], 2);
        }
    }
    Ok(merit_of(sum_rcf, sum_rff, subset.len()))
}

struct Node {
    subset: Vec<usize>,
    merit: f64,
    sum_rcf: f64,
    sum_rff: f64,
    seq: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap: higher merit first, then earlier insertion.
    fn cmp(&self, other: &Self) -> Ordering {
        self.merit.total_cmp(&other.merit).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Best-first forward search for the subset of binary `columns` with the
/// highest merit against class labels `y`.
pub fn cfs_select(columns: &[Vec<u8>], y: &[u32], config: CfsConfig) -> Result<CfsResult, FeatureError> {
    let (yc, ny) = check_inputs(columns, y)?;
    let mut scorer = Scorer::new(columns, &yc, ny);
    let d = columns.len();

    let mut seq = 0usize;
    let mut open = BinaryHeap::new();
    let mut visited: HashSet<Vec<usize>> = HashSet::new();
    visited.insert(Vec::new());
    open.push(Node { subset: Vec::new(), merit: 0.0, sum_rcf: 0.0, sum_rff: 0.0, seq });
    let (mut best_subset, mut best_merit) = (Vec::new(), 0.0f64);
    let mut evaluated = 1usize;
    let mut stale = 0usize;

    while let Some(node) = open.pop() {
        let mut improved = false;
        for f in 0..d {
            if node.subset.binary_search(&f).is_ok() {
                continue;
            }
            let mut child = node.subset.clone();
            let pos = child.binary_search(&f).unwrap_err();
            child.insert(pos, f);
            if !visited.insert(child.clone()) {
                continue;
            }
            let sum_rcf = node.sum_rcf + scorer.rcf[f];
            let sum_rff = node.sum_rff + node.subset.iter().map(|&g| scorer.rff(f, g)).sum::<f64>();
            let merit = merit_of(sum_rcf, sum_rff, child.len());
            evaluated += 1;
            if merit > best_merit + MERIT_EPS {
                best_merit = merit;
                best_subset = child.clone();
                improved = true;
            }
            seq += 1;
            open.push(Node { subset: child, merit, sum_rcf, sum_rff, seq });
        }
        if improved {
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.stall_limit {
                break;
            }
        }
    }
    Ok(CfsResult { selected: best_subset, merit: best_merit, evaluated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn self_su_is_one_and_constant_is_zero() {
        let x = [0, 1, 2, 1, 0, 2];
        assert!((symmetric_uncertainty(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(symmetric_uncertainty(&[1, 1, 1], &[0, 1, 2]).unwrap(), 0.0);
        assert!(matches!(symmetric_uncertainty(&[1], &[1, 2]), Err(FeatureError::LengthMismatch { .. })));
        assert_eq!(symmetric_uncertainty(&[], &[]), Err(FeatureError::EmptyColumn));
    }

    #[test]
    fn independent_columns() {
        // Every (a, b) combination exactly once: joint is the product of marginals.
        let a = [0, 0, 1, 1];
        let b = [0, 1, 0, 1];
        assert!(symmetric_uncertainty(&a, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn hand_computed_joint_table() {
        // {(0,0):4, (0,1):1, (1,0):1, (1,1):4}
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (x, y, n) in [(0, 0, 4), (0, 1, 1), (1, 0, 1), (1, 1, 4)] {
            for _ in 0..n {
                a.push(x);
                b.push(y);
            }
        }
        // H(a) = H(b) = ln 2; H(a,b) = -2(0.4 ln 0.4) - 2(0.1 ln 0.1).
        let ha = std::f64::consts::LN_2;
        let hab = -2.0 * 0.4 * 0.4f64.ln() - 2.0 * 0.1 * 0.1f64.ln();
        let expected = 2.0 * (2.0 * ha - hab) / (2.0 * ha);
        let su = symmetric_uncertainty(&a, &b).unwrap();
        assert!((su - expected).abs() < 1e-12, "{su} vs {expected}");
        assert!((su - 0.278_071_905_1).abs() < 1e-9);
    }

    #[test]
    fn dominant_feature_selected_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y: Vec<u32> = (0..80).map(|i| (i % 2) as u32).collect();
        let mut cols = vec![y.iter().map(|&v| v as u8).collect::<Vec<u8>>()];
        for _ in 0..6 {
            cols.push((0..80).map(|_| rng.random_range(0..2u8)).collect());
        }
        let r = cfs_select(&cols, &y, CfsConfig::default()).unwrap();
        assert_eq!(r.selected, [0]);
        assert!((r.merit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_features_and_single_class() {
        let cols = vec![vec![1u8; 10], vec![0u8; 10]];
        let y: Vec<u32> = (0..10).map(|i| i % 3).collect();
        let r = cfs_select(&cols, &y, CfsConfig::default()).unwrap();
        assert!(r.selected.is_empty());
        assert_eq!(r.merit, 0.0);
        assert!(matches!(cfs_select(&cols, &[2; 10], CfsConfig::default()), Err(FeatureError::DegenerateInput(_))));
    }

    #[test]
    fn incremental_merit_matches_scratch() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let y: Vec<u32> = (0..50).map(|_| rng.random_range(0..3)).collect();
            let cols: Vec<Vec<u8>> = (0..8)
                .map(|_| y.iter().map(|&c| if rng.random_bool(0.3) { rng.random_range(0..2) } else { u8::from(c == 0) }).collect())
                .collect();
            let r = cfs_select(&cols, &y, CfsConfig::default()).unwrap();
            let scratch = cfs_merit(&r.selected, &cols, &y).unwrap();
            assert!((r.merit - scratch).abs() < 1e-12);
        }
    }

    #[test]
    fn merit_invariant_under_column_reordering() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y: Vec<u32> = (0..40).map(|_| rng.random_range(0..3)).collect();
        let cols: Vec<Vec<u8>> = (0..5).map(|_| (0..40).map(|_| rng.random_range(0..2)).collect()).collect();
        let m = cfs_merit(&[0, 2, 4], &cols, &y).unwrap();
        let reversed: Vec<Vec<u8>> = cols.iter().rev().cloned().collect();
        let m2 = cfs_merit(&[4, 2, 0], &reversed, &y).unwrap();
        assert!((m - m2).abs() < 1e-12);
    }
}
