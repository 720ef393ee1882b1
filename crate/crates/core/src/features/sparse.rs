use super::FeatureError;
use serde::{Deserialize, Serialize};

/// Sparse real vector: `(index, value)` entries with strictly increasing
/// indices below `dim` and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector { dim, entries: Vec::new() }
    }

    /// Checks the ordering and range invariants; explicit zeros are dropped.
    pub fn new(dim: usize, entries: Vec<(u32, f64)>) -> Result<Self, FeatureError> {
        let mut prev: Option<u32> = None;
        for &(i, _) in &entries {
            if i as usize >= dim {
                return Err(FeatureError::InvalidVector(format!("index {i} outside dimension {dim}")));
            }
            if prev.is_some_and(|p| p >= i) {
                return Err(FeatureError::InvalidVector(format!("index {i} not strictly increasing")));
            }
            prev = Some(i);
        }
        Ok(SparseVector { dim, entries: entries.into_iter().filter(|&(_, v)| v != 0.0).collect() })
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i as u32, v)).collect();
        SparseVector { dim: values.len(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|&(i, v)| (i as usize, v))
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.entries.binary_search_by_key(&(index as u32), |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }

    /// Dot product with a dense vector of at least `dim` entries.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i as usize]).sum()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut sum = 0.0;
        while let (Some(&&(i, x)), Some(&&(j, y))) = (a.peek(), b.peek()) {
            match i.cmp(&j) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum += x * y;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|&(_, v)| v.is_finite())
    }

    /// Keeps entries whose index is selected by `map` and renumbers them.
    pub fn project(&self, map: &[Option<u32>], new_dim: usize) -> SparseVector {
        let entries = self.entries.iter().filter_map(|&(i, v)| map[i as usize].map(|j| (j, v))).collect();
        SparseVector { dim: new_dim, entries }
    }
}
