use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{ari_detail, fscore_kappa, oa_aa, ConfusionMatrix};
use crate::data::{Label, PointCloud};
use crate::error::{Error, Result};
use crate::graph::sq_dist;
use crate::pipeline::Embedding;

fn require_labels(pc: &PointCloud) -> Result<&[Label]> {
    pc.labels()
        .ok_or_else(|| Error::Stratification("points carry no labels".into()))
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("train fraction must lie in (0, 1), got {f}")))
    }
}

fn train_count(fraction: f64, count: usize) -> usize {
    // The 1e-9 slack keeps 0.1·100 from rounding up to 11.
    (((fraction * count as f64) - 1e-9).ceil() as usize).clamp(1, count)
}

/// Per class, ⌈fraction·count⌉ members train and the rest test.
/// Returns (train mask, test mask).
pub fn stratified_split(pc: &PointCloud, train_fraction: f64, seed: u64) -> Result<(Vec<bool>, Vec<bool>)> {
    check_fraction(train_fraction)?;
    require_labels(pc)?;
    let mut rng = crate::data::rng(seed);
    let mut train = vec![false; pc.len()];
    for class in pc.classes() {
        let mut members = pc.members(class);
        members.shuffle(&mut rng);
        for &i in &members[..train_count(train_fraction, members.len())] {
            train[i] = true;
        }
    }
    let test = train.iter().map(|t| !t).collect();
    Ok((train, test))
}

/// Label of the nearest training point for every test point; equal
/// distances go to the lower training index.
pub fn knn1_classify(train: &PointCloud, test: &PointCloud) -> Result<Vec<Label>> {
    let labels = require_labels(train)?;
    if train.dim() != test.dim() {
        return Err(Error::Shape(format!(
            "train dimension {} vs test dimension {}",
            train.dim(),
            test.dim()
        )));
    }
    Ok((0..test.len())
        .into_par_iter()
        .map(|t| {
            let q = test.point(t);
            let mut best = (f64::INFINITY, 0);
            for i in 0..train.len() {
                let d = sq_dist(q, train.point(i));
                if d < best.0 {
                    best = (d, i);
                }
            }
            labels[best.1]
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetrics {
    pub ari: f64,
    pub oa: f64,
    pub aa: f64,
    pub fs: f64,
    pub kappa: f64,
    /// ARI came from the degenerate-denominator fallback.
    pub ari_degenerate: bool,
}

impl RunMetrics {
    pub fn from_confusion(c: &ConfusionMatrix) -> Result<Self> {
        let (ari, ari_degenerate) = ari_detail(c)?;
        let (oa, aa) = oa_aa(c)?;
        let (fs, kappa) = fscore_kappa(c)?;
        Ok(Self {
            ari,
            oa,
            aa,
            fs,
            kappa,
            ari_degenerate,
        })
    }

    /// In table order: ARI, OA, AA, FS, κ.
    pub fn as_array(&self) -> [f64; 5] {
        [self.ari, self.oa, self.aa, self.fs, self.kappa]
    }

    fn mean(runs: &[RunMetrics]) -> Self {
        let k = runs.len() as f64;
        let avg = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).sum::<f64>() / k;
        Self {
            ari: avg(|r| r.ari),
            oa: avg(|r| r.oa),
            aa: avg(|r| r.aa),
            fs: avg(|r| r.fs),
            kappa: avg(|r| r.kappa),
            ari_degenerate: runs.iter().any(|r| r.ari_degenerate),
        }
    }
}

pub const METRIC_NAMES: [&str; 5] = ["ARI", "OA", "AA", "FS", "kappa"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitScheme {
    /// Train sets are disjoint slices of one shuffle per class.
    DisjointFolds,
    /// Each run draws its own stratified split.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub runs: Vec<RunMetrics>,
    pub mean: RunMetrics,
    pub run_count: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub split_seeds: Vec<u64>,
    pub scheme: SplitScheme,
    /// Confusion matrices of all runs summed.
    pub confusion: ConfusionMatrix,
}

impl EvaluationReport {
    /// Rows ARI, OA, AA, FS, κ; one column per run and a final mean column.
    pub fn to_table(&self) -> String {
        let mut s = String::from("metric");
        for r in 1..=self.run_count {
            write!(s, "\trun{r}").unwrap();
        }
        s.push_str("\tmean\n");
        for (k, name) in METRIC_NAMES.iter().enumerate() {
            s.push_str(name);
            for r in &self.runs {
                write!(s, "\t{:.4}", r.as_array()[k]).unwrap();
            }
            writeln!(s, "\t{:.4}", self.mean.as_array()[k]).unwrap();
        }
        s
    }

    /// `key: value` summary followed by the per-run table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "runs: {}", self.run_count).unwrap();
        writeln!(s, "train_fraction: {}", self.train_fraction).unwrap();
        writeln!(s, "seed: {}", self.seed).unwrap();
        let scheme = match self.scheme {
            SplitScheme::DisjointFolds => "disjoint-folds",
            SplitScheme::Independent => "independent",
        };
        writeln!(s, "scheme: {scheme}").unwrap();
        for (name, v) in METRIC_NAMES.iter().zip(self.mean.as_array()) {
            writeln!(s, "{name}: {v:.6}").unwrap();
        }
        if self.mean.ari_degenerate {
            s.push_str("ari_degenerate: true\n");
        }
        s.push('\n');
        s.push_str(&self.to_table());
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Disjoint train slices need runs·fraction ≤ 1.
fn uses_disjoint_folds(runs: usize, fraction: f64) -> bool {
    runs > 1 && runs as f64 * fraction <= 1.0 + 1e-9
}

fn train_masks(pc: &PointCloud, runs: usize, fraction: f64, seeds: &[u64], seed: u64) -> Result<(Vec<Vec<bool>>, SplitScheme)> {
    if !uses_disjoint_folds(runs, fraction) {
        let masks = seeds
            .iter()
            .map(|&s| stratified_split(pc, fraction, s).map(|(t, _)| t))
            .collect::<Result<_>>()?;
        return Ok((masks, SplitScheme::Independent));
    }
    let mut rng = crate::data::rng(seed);
    let mut masks = vec![vec![false; pc.len()]; runs];
    for class in pc.classes() {
        let mut members = pc.members(class);
        if members.len() < runs {
            return Err(Error::Protocol(format!(
                "class {class} has {} members, fewer than the {runs} runs needing disjoint train sets; use fewer runs",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let t = train_count(fraction, members.len()).min(members.len() / runs);
        for (r, mask) in masks.iter_mut().enumerate() {
            for &i in &members[r * t..(r + 1) * t] {
                mask[i] = true;
            }
        }
    }
    Ok((masks, SplitScheme::DisjointFolds))
}

/// Split → 1-NN → metrics, `runs` times. When `runs·train_fraction ≤ 1`
/// the train sets of different runs are pairwise disjoint.
pub fn run_protocol_points(pc: &PointCloud, runs: usize, train_fraction: f64, seed: u64) -> Result<EvaluationReport> {
    if runs == 0 {
        return Err(Error::Parameter("runs must be >= 1".into()));
    }
    check_fraction(train_fraction)?;
    let labels = require_labels(pc)?;
    let mut seeder = crate::data::rng(seed);
    let seeds: Vec<u64> = (0..runs).map(|_| seeder.next_u64()).collect();
    let (masks, scheme) = train_masks(pc, runs, train_fraction, &seeds, seed)?;

    let classes = pc.classes();
    let outcomes: Vec<(RunMetrics, ConfusionMatrix)> = masks
        .par_iter()
        .map(|train| {
            let test: Vec<bool> = train.iter().map(|t| !t).collect();
            let tr = pc.select(train)?;
            let te = pc.select(&test)?;
            let pred = knn1_classify(&tr, &te)?;
            let truth: Vec<Label> = (0..pc.len()).filter(|&i| test[i]).map(|i| labels[i]).collect();
            let c = confusion_over(&classes, &truth, &pred)?;
            Ok((RunMetrics::from_confusion(&c)?, c))
        })
        .collect::<Result<_>>()?;

    let runs_m: Vec<RunMetrics> = outcomes.iter().map(|(m, _)| *m).collect();
    let mut confusion = outcomes[0].1.clone();
    for (_, c) in &outcomes[1..] {
        confusion = confusion.add(c)?;
    }
    Ok(EvaluationReport {
        mean: RunMetrics::mean(&runs_m),
        runs: runs_m,
        run_count: runs,
        train_fraction,
        seed,
        split_seeds: seeds,
        scheme,
        confusion,
    })
}

/// Square confusion matrix over a fixed class list so runs can be summed.
fn confusion_over(classes: &[Label], truth: &[Label], pred: &[Label]) -> Result<ConfusionMatrix> {
    let pos = |l: &Label| classes.binary_search(l).map_err(|_| Error::UnknownClass(*l));
    let r = classes.len();
    let mut counts = vec![vec![0u64; r]; r];
    for (t, p) in truth.iter().zip(pred) {
        counts[pos(t)?][pos(p)?] += 1;
    }
    Ok(ConfusionMatrix {
        row_classes: classes.to_vec(),
        col_classes: classes.to_vec(),
        counts,
    })
}

/// The protocol on embedded coordinates.
pub fn run_protocol(
    embedding: &Embedding,
    labels: &[Label],
    runs: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<EvaluationReport> {
    if labels.len() != embedding.len() {
        return Err(Error::Shape(format!(
            "{} labels for {} embedded points",
            labels.len(),
            embedding.len()
        )));
    }
    run_protocol_points(&embedding.to_point_cloud(Some(labels))?, runs, train_fraction, seed)
}
