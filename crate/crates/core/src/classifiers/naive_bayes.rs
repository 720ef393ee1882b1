use super::{argmax, ClassifierError};
use crate::features::SparseVector;
use serde::{Deserialize, Serialize};

/// Multinomial naive Bayes over feature counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub alpha: f64,
    /// `ln P(class)`.
    pub log_prior: Vec<f64>,
    /// `ln P(feature | class)`, one row per class.
    pub log_likelihood: Vec<Vec<f64>>,
}

impl NaiveBayesModel {
    pub(crate) fn fit(x: &[SparseVector], y: &[usize], k: usize, dim: usize, alpha: f64) -> Result<Self, ClassifierError> {
        let mut counts = vec![vec![0.0; dim]; k];
        let mut docs = vec![0usize; k];
        for (row, (v, &c)) in x.iter().zip(y).enumerate() {
            docs[c] += 1;
            for (i, val) in v.iter() {
                if val < 0.0 {
                    return Err(ClassifierError::NegativeFeature { row });
                }
                counts[c][i] += val;
            }
        }
        let n = x.len() as f64;
        let log_prior = docs.iter().map(|&d| (d as f64 / n).ln()).collect();
        let log_likelihood = counts
            .iter()
            .map(|row| {
                let total: f64 = row.iter().sum::<f64>() + alpha * dim as f64;
                row.iter().map(|&c| ((c + alpha) / total).ln()).collect()
            })
            .collect();
        Ok(NaiveBayesModel { alpha, log_prior, log_likelihood })
    }

    /// Unnormalized log posterior of each class.
    pub fn log_scores(&self, x: &SparseVector) -> Vec<f64> {
        self.log_prior
            .iter()
            .zip(&self.log_likelihood)
            .map(|(&prior, ll)| prior + x.iter().map(|(i, v)| v * ll[i]).sum::<f64>())
            .collect()
    }

    pub fn predict(&self, x: &SparseVector) -> usize {
        argmax(&self.log_scores(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{train, Algorithm, ModelParams, TrainParams};
    use crate::dataset::SentimentLabel::*;

    #[test]
    fn laplace_smoothed_likelihood() {
        // Class A: feature f present in 3 of 4 rows, g in the other; class B the reverse.
        let f = SparseVector::from_dense(&[1.0, 0.0]);
        let g = SparseVector::from_dense(&[0.0, 1.0]);
        let x = vec![f.clone(), f.clone(), f.clone(), g.clone(), g.clone(), g.clone(), g.clone(), f.clone()];
        let y = vec![Positive, Positive, Positive, Positive, Negative, Negative, Negative, Negative];
        let m = train(&x, &y, &TrainParams::new(Algorithm::NaiveBayes, 0)).unwrap();
        let ModelParams::NaiveBayes(nb) = &m.model else { panic!() };
        // (3 + 1) / (4 + 1 * 2)
        assert!((nb.log_likelihood[0][0].exp() - 4.0 / 6.0).abs() < 1e-15);
        assert!((nb.log_likelihood[1][0].exp() - 2.0 / 6.0).abs() < 1e-15);
        assert!(nb.log_likelihood.iter().flatten().all(|v| v.is_finite()));
    }

    #[test]
    fn zero_vector_follows_prior() {
        let x: Vec<SparseVector> = [[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|r| SparseVector::from_dense(r))
            .collect();
        let y = vec![Negative, Neutral, Neutral, Neutral, Positive];
        let m = train(&x, &y, &TrainParams::new(Algorithm::NaiveBayes, 0)).unwrap();
        assert_eq!(m.predict(&SparseVector::zeros(2)).unwrap(), Neutral);
    }

    #[test]
    fn negative_counts_rejected() {
        let x = vec![SparseVector::from_dense(&[1.0]), SparseVector::from_dense(&[-0.5])];
        let err = train(&x, &[Positive, Negative], &TrainParams::new(Algorithm::NaiveBayes, 0)).unwrap_err();
        assert_eq!(err, ClassifierError::NegativeFeature { row: 1 });
    }
}
