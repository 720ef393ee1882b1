use super::{cross_validate, EvalError, EvalReport, FeatureConfig, Representation};
use crate::classifiers::{Algorithm, TrainParams};
use crate::dataset::Dataset;
use crate::features::FeatureMode;
use crate::ontology::SynsetForest;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub algorithms: Vec<Algorithm>,
    pub representations: Vec<Representation>,
    /// Selection settings to run; `[false, true]` covers both tables.
    pub selection: Vec<bool>,
    /// Columns of the representation table.
    pub ablation_algorithms: Vec<Algorithm>,
    pub mode: FeatureMode,
    pub min_freq: usize,
    pub pair_bigrams: bool,
    pub k: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            algorithms: Algorithm::ALL.to_vec(),
            representations: Representation::ALL.to_vec(),
            selection: vec![false, true],
            ablation_algorithms: vec![Algorithm::Smo, Algorithm::Logistic, Algorithm::RandomForest],
            mode: FeatureMode::Binary,
            min_freq: 1,
            pair_bigrams: false,
            k: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCell {
    pub algorithm: Algorithm,
    pub selection: bool,
    pub representation: Representation,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub instances: usize,
    /// Grid order: selection, then representation, then algorithm.
    pub cells: Vec<SuiteCell>,
}

/// Cross-validates every (algorithm, selection, representation) combination.
/// Cells run in parallel; the report lists them in grid order.
pub fn run_suite(ds: &Dataset, forest: &SynsetForest, config: &SuiteConfig) -> Result<SuiteReport, EvalError> {
    for inst in &ds.instances {
        for p in &inst.sequence {
            if !forest.contains(p.modifier()) || !forest.contains(p.noun()) {
                return Err(EvalError::Invalid(format!("{}: pair {} is not in the forest", inst.gif_id, p.label())));
            }
        }
    }
    if config.algorithms.is_empty() || config.representations.is_empty() || config.selection.is_empty() {
        return Err(EvalError::Invalid("suite grid is empty".into()));
    }
    let mut grid = Vec::new();
    for &selection in &config.selection {
        for &representation in &config.representations {
            for &algorithm in &config.algorithms {
                grid.push((algorithm, selection, representation));
            }
        }
    }
    let cells = grid
        .par_iter()
        .map(|&(algorithm, selection, representation)| {
            let features = FeatureConfig {
                mode: config.mode,
                min_freq: config.min_freq,
                selection,
                representation,
                pair_bigrams: config.pair_bigrams,
            };
            let params = TrainParams::new(algorithm, config.seed);
            let report = cross_validate(ds, &features, &params, config.k, config.seed)?;
            Ok(SuiteCell { algorithm, selection, representation, report })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(SuiteReport { config: config.clone(), instances: ds.trainable_indices().len(), cells })
}

fn row_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::NaiveBayes => "Naive Bayes",
        Algorithm::Smo => "SMO",
        Algorithm::Logistic => "Logistic",
        Algorithm::AdaBoost => "AdaBoost",
        Algorithm::RandomForest => "Rand.Forest",
    }
}

impl SuiteReport {
    pub fn cell(&self, algorithm: Algorithm, selection: bool, representation: Representation) -> Option<&SuiteCell> {
        self.cells.iter().find(|c| c.algorithm == algorithm && c.selection == selection && c.representation == representation)
    }

    pub fn accuracy(&self, algorithm: Algorithm, selection: bool, representation: Representation) -> Option<f64> {
        self.cell(algorithm, selection, representation).map(|c| c.report.metrics.accuracy)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Tables with one-decimal percentages.
    pub fn render(&self) -> String {
        self.tables(|v| format!("{:.1}%", v * 100.0))
    }

    /// Tables with three-decimal proportions.
    pub fn render_paper(&self) -> String {
        self.tables(|v| format!("{v:.3}"))
    }

    fn tables(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::new();
        let metric_titles = [(false, "Accuracy without attribute selection"), (true, "Accuracy with Correlation Based Subset")];
        for (selection, title) in metric_titles {
            if !self.config.selection.contains(&selection) || !self.config.representations.contains(&Representation::SentiPair) {
                continue;
            }
            out.push_str(&format!("Table {}: {title}\n", if selection { 2 } else { 1 }));
            out.push_str(&format!("{:<13}{:>9}{:>9}{:>9}{:>9}\n", "Algorithm", "Prec.", "Recall", "FScore", "Acc."));
            for &a in &self.config.algorithms {
                let Some(c) = self.cell(a, selection, Representation::SentiPair) else { continue };
                let m = &c.report.metrics;
                out.push_str(&format!(
                    "{:<13}{:>9}{:>9}{:>9}{:>9}\n",
                    row_name(a),
                    fmt(m.precision),
                    fmt(m.recall),
                    fmt(m.f1),
                    fmt(m.accuracy)
                ));
            }
            out.push('\n');
        }

        let columns: Vec<Algorithm> =
            self.config.ablation_algorithms.iter().copied().filter(|a| self.config.algorithms.contains(a)).collect();
        if !columns.is_empty() {
            for &selection in &self.config.selection {
                let variant = if selection { "with Correlation Based Subset" } else { "without attribute selection" };
                out.push_str(&format!("Table 3{}: Accuracy by representation, {variant}\n", if selection { "b" } else { "a" }));
                out.push_str(&format!("{:<13}", "Type"));
                for &a in &columns {
                    out.push_str(&format!("{:>13}", if a == Algorithm::RandomForest { "Rand. Forest" } else { row_name(a) }));
                }
                out.push('\n');
                for &r in &Representation::ALL {
                    if !self.config.representations.contains(&r) {
                        continue;
                    }
                    out.push_str(&format!("{:<13}", r.as_str()));
                    for &a in &columns {
                        let v = self.accuracy(a, selection, r).map(&fmt).unwrap_or_else(|| "-".into());
                        out.push_str(&format!("{v:>13}"));
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
        }
        out.push_str(&format!(
            "{} instances, {}-fold stratified cross-validation, seed {}, {:?} features\n",
            self.instances, self.config.k, self.config.seed, self.config.mode
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticConfig};
    use crate::ontology::fixture_lexicon;

    #[test]
    fn small_grid_renders_all_tables() {
        let forest = SynsetForest::build(fixture_lexicon()).unwrap().propagate_scores().unwrap();
        let ds = generate_synthetic(&forest, &SyntheticConfig { n: 90, seed: 4, ..Default::default() }).unwrap().dataset;
        let cfg = SuiteConfig { algorithms: vec![Algorithm::NaiveBayes, Algorithm::Smo], k: 3, ..Default::default() };
        let r = run_suite(&ds, &forest, &cfg).unwrap();
        assert_eq!(r.cells.len(), 2 * 3 * 2);
        assert_eq!(r.cells[0].algorithm, Algorithm::NaiveBayes);
        assert!(!r.cells[0].selection);
        let paper = r.render_paper();
        for t in ["Table 1:", "Table 2:", "Table 3a:", "Table 3b:", "Naive Bayes", "ANP only", "VNP only"] {
            assert!(paper.contains(t), "missing {t}\n{paper}");
        }
        assert!(r.render().contains('%'));
        let again = run_suite(&ds, &forest, &cfg).unwrap();
        assert_eq!(again.to_json(), r.to_json());
    }
}
