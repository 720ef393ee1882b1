use super::{Dataset, NoiseFlag, SentimentLabel};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DurationStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseStat {
    pub flag: NoiseFlag,
    pub count: usize,
    /// Share of all instances carrying the flag.
    pub proportion: f64,
}

/// Corpus statistics. Counts are exact; rounding happens only in
/// [`DatasetStats::render`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub total: usize,
    pub counts: BTreeMap<SentimentLabel, usize>,
    /// Instances labelled Positive, Negative or Neutral.
    pub labeled: usize,
    /// Share of each trainable class among `labeled`; empty when nothing is labeled.
    pub proportions: BTreeMap<SentimentLabel, f64>,
    pub duration: Option<DurationStats>,
    pub noise: Vec<NoiseStat>,
    /// Sequence length -> number of instances.
    pub length_histogram: BTreeMap<usize, usize>,
}

pub fn compute_stats(ds: &Dataset) -> DatasetStats {
    let mut counts: BTreeMap<SentimentLabel, usize> = SentimentLabel::ALL.iter().map(|&l| (l, 0)).collect();
    let mut length_histogram = BTreeMap::new();
    let mut durations = Vec::new();
    for inst in &ds.instances {
        *counts.get_mut(&inst.label).expect("all labels present") += 1;
        *length_histogram.entry(inst.sequence.len()).or_insert(0) += 1;
        if let Some(d) = inst.duration_s {
            durations.push(d);
        }
    }
    let labeled: usize = SentimentLabel::CLASSES.iter().map(|l| counts[l]).sum();
    let proportions = if labeled == 0 {
        BTreeMap::new()
    } else {
        SentimentLabel::CLASSES.iter().map(|&l| (l, counts[&l] as f64 / labeled as f64)).collect()
    };
    let duration = (!durations.is_empty()).then(|| DurationStats {
        count: durations.len(),
        mean: durations.iter().sum::<f64>() / durations.len() as f64,
        min: durations.iter().copied().fold(f64::INFINITY, f64::min),
        max: durations.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    });
    let noise = NoiseFlag::ALL
        .iter()
        .map(|&flag| {
            let count = ds.instances.iter().filter(|i| i.has_flag(flag)).count();
            NoiseStat {
                flag,
                count,
                proportion: if ds.instances.is_empty() { 0.0 } else { count as f64 / ds.instances.len() as f64 },
            }
        })
        .collect();
    DatasetStats { total: ds.instances.len(), counts, labeled, proportions, duration, noise, length_histogram }
}

impl DatasetStats {
    /// Class share as a one-decimal percentage, e.g. `"60.1%"`.
    pub fn percent(&self, label: SentimentLabel) -> Option<String> {
        self.proportions.get(&label).map(|p| format!("{:.1}%", p * 100.0))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<12} {:>7} {:>8}\n", "class", "count", "share"));
        for label in SentimentLabel::ALL {
            let share = self.percent(label).unwrap_or_else(|| "-".into());
            out.push_str(&format!("{:<12} {:>7} {:>8}\n", label.as_str(), self.counts[&label], share));
        }
        out.push_str(&format!("{:<12} {:>7}\n", "total", self.total));
        match &self.duration {
            Some(d) => out.push_str(&format!(
                "duration (s): mean {:.2}, min {:.2}, max {:.2} over {} GIFs\n",
                d.mean, d.min, d.max, d.count
            )),
            None => out.push_str("duration (s): n/a\n"),
        }
        for n in &self.noise {
            out.push_str(&format!("noise {:<20} {:>7} {:>7.2}%\n", n.flag.as_str(), n.count, n.proportion * 100.0));
        }
        out.push_str("sequence length histogram:\n");
        for (len, count) in &self.length_histogram {
            out.push_str(&format!("  {len:>3}: {count}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::AnnotatedInstance;
    use crate::ontology::SentiPairSequence;

    fn inst(label: SentimentLabel, duration: Option<f64>, flags: Option<Vec<NoiseFlag>>) -> AnnotatedInstance {
        AnnotatedInstance {
            gif_id: String::new(),
            sequence: SentiPairSequence::default(),
            label,
            duration_s: duration,
            noise_flags: flags,
        }
    }

    #[test]
    fn empty_dataset() {
        let s = compute_stats(&Dataset::default());
        assert_eq!(s.total, 0);
        assert!(s.proportions.is_empty());
        assert!(s.duration.is_none());
        assert_eq!(s.percent(SentimentLabel::Positive), None);
    }

    #[test]
    fn class_counts_and_shares() {
        let mut v = Vec::new();
        for (label, n) in [(SentimentLabel::Positive, 1124), (SentimentLabel::Negative, 146), (SentimentLabel::Neutral, 599)] {
            v.extend((0..n).map(|_| inst(label, None, None)));
        }
        v.push(inst(SentimentLabel::CantJudge, None, None));
        let s = compute_stats(&Dataset::new(v));
        assert_eq!(s.labeled, 1869);
        assert_eq!(s.counts[&SentimentLabel::CantJudge], 1);
        assert_eq!(s.proportions[&SentimentLabel::Positive], 1124.0 / 1869.0);
        let sum: f64 = s.proportions.values().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        // 1124/1869 = 0.60139..., 146/1869 = 0.07811..., 599/1869 = 0.32049...
        assert_eq!(s.percent(SentimentLabel::Positive).unwrap(), "60.1%");
        assert_eq!(s.percent(SentimentLabel::Negative).unwrap(), "7.8%");
        assert_eq!(s.percent(SentimentLabel::Neutral).unwrap(), "32.0%");
    }

    #[test]
    fn constant_duration_mean() {
        let v = (0..10).map(|_| inst(SentimentLabel::Neutral, Some(17.82), None)).collect();
        let s = compute_stats(&Dataset::new(v));
        let d = s.duration.clone().unwrap();
        assert!((d.mean - 17.82).abs() < 1e-12);
        assert!(s.render().contains("mean 17.82"));
    }

    #[test]
    fn noise_proportion() {
        let v = (0..100)
            .map(|i| inst(SentimentLabel::Positive, None, (i < 71).then(|| vec![NoiseFlag::MixedContent])))
            .collect();
        let s = compute_stats(&Dataset::new(v));
        let mixed = s.noise.iter().find(|n| n.flag == NoiseFlag::MixedContent).unwrap();
        assert_eq!(mixed.count, 71);
        assert_eq!(mixed.proportion, 0.71);
    }
}
