use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

/// `counts[i][j]` = number of samples with row class `i` and column class
/// `j`. Built from labels, rows are true classes and columns predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub row_classes: Vec<Label>,
    pub col_classes: Vec<Label>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    /// Square matrix over the union of classes seen in either sequence.
    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape(format!(
                "{} true labels vs {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let mut classes: Vec<Label> = truth.iter().chain(predicted).copied().collect();
        classes.sort_unstable();
        classes.dedup();
        let pos: BTreeMap<Label, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let r = classes.len();
        let mut counts = vec![vec![0u64; r]; r];
        for (t, p) in truth.iter().zip(predicted) {
            counts[pos[t]][pos[p]] += 1;
        }
        Ok(Self {
            row_classes: classes.clone(),
            col_classes: classes,
            counts,
        })
    }

    /// Contingency table of two partitions, each with its own class set.
    pub fn from_partitions(p: &[Label], q: &[Label]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Shape(format!("partitions of {} and {} items", p.len(), q.len())));
        }
        let index = |xs: &[Label]| {
            let mut c: Vec<Label> = xs.to_vec();
            c.sort_unstable();
            c.dedup();
            let m: BTreeMap<Label, usize> = c.iter().enumerate().map(|(i, &l)| (l, i)).collect();
            (c, m)
        };
        let (rc, rm) = index(p);
        let (cc, cm) = index(q);
        let mut counts = vec![vec![0u64; cc.len()]; rc.len()];
        for (a, b) in p.iter().zip(q) {
            counts[rm[a]][cm[b]] += 1;
        }
        Ok(Self {
            row_classes: rc,
            col_classes: cc,
            counts,
        })
    }

    /// Rows and columns are labelled 0, 1, ….
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let s = counts.first().map_or(0, Vec::len);
        if counts.iter().any(|r| r.len() != s) {
            return Err(Error::Shape("ragged confusion matrix".into()));
        }
        Ok(Self {
            row_classes: (0..counts.len() as Label).collect(),
            col_classes: (0..s as Label).collect(),
            counts,
        })
    }

    pub fn nrows(&self) -> usize {
        self.counts.len()
    }

    pub fn ncols(&self) -> usize {
        self.col_classes.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.ncols())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Entry-wise sum of two matrices over the same classes.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.row_classes != other.row_classes || self.col_classes != other.col_classes {
            return Err(Error::Shape("confusion matrices over different classes".into()));
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self {
            counts,
            ..self.clone()
        })
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "confusion matrix is {}×{}, expected square",
                self.nrows(),
                self.ncols()
            )))
        }
    }
}

fn pairs(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// ARI with its degenerate flag: `true` when the expected-index
/// denominator vanishes and the value comes from the fallback policy
/// (1 for identical partitions, 0 otherwise).
pub fn ari_detail(c: &ConfusionMatrix) -> Result<(f64, bool)> {
    let n = c.total();
    if n < 2 {
        return Err(Error::UndefinedMetric(format!("ARI needs at least 2 samples, got {n}")));
    }
    let sum_ij: i128 = c.counts.iter().flatten().map(|&x| pairs(x)).sum();
    let sa: i128 = c.row_sums().into_iter().map(pairs).sum();
    let sb: i128 = c.col_sums().into_iter().map(pairs).sum();
    let total = pairs(n);
    // ARI = (Σnij − Sa·Sb/N) / ((Sa+Sb)/2 − Sa·Sb/N); scaled by 2N to stay integral.
    let num = 2 * (sum_ij * total - sa * sb);
    let den = (sa + sb) * total - 2 * sa * sb;
    if den == 0 {
        // Both partitions all-singletons or both a single block.
        let identical = sa == sb && sum_ij == sa;
        return Ok((if identical { 1.0 } else { 0.0 }, true));
    }
    Ok((num as f64 / den as f64, false))
}

pub fn ari(c: &ConfusionMatrix) -> Result<f64> {
    ari_detail(c).map(|(v, _)| v)
}

/// Overall accuracy and average per-class recall. Classes without true
/// samples are left out of AA.
pub fn oa_aa(c: &ConfusionMatrix) -> Result<(f64, f64)> {
    c.require_square()?;
    let n = c.total();
    if n == 0 {
        return Err(Error::UndefinedMetric("empty confusion matrix".into()));
    }
    let diag: u64 = (0..c.nrows()).map(|i| c.counts[i][i]).sum();
    let rows = c.row_sums();
    let recalls: Vec<f64> = rows
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 0)
        .map(|(i, &r)| c.counts[i][i] as f64 / r as f64)
        .collect();
    let skipped = rows.len() - recalls.len();
    if skipped > 0 {
        log::warn!("{skipped} class(es) with no true samples left out of AA");
    }
    let aa = recalls.iter().sum::<f64>() / recalls.len() as f64;
    Ok((diag as f64 / n as f64, aa))
}

/// Mean F-score over classes present in either rows or columns, and
/// Cohen's κ from the row and column marginals.
pub fn fscore_kappa(c: &ConfusionMatrix) -> Result<(f64, f64)> {
    c.require_square()?;
    let n = c.total();
    if n == 0 {
        return Err(Error::UndefinedMetric("all-zero confusion matrix".into()));
    }
    let rows = c.row_sums();
    let cols = c.col_sums();
    let mut f = Vec::with_capacity(rows.len());
    for i in 0..rows.len() {
        let tp = c.counts[i][i];
        // 2·C_ii + Σ_{j≠i} (C_ij + C_ji) = row_i + col_i.
        let den = rows[i] + cols[i];
        if den > 0 {
            f.push(2.0 * tp as f64 / den as f64);
        }
    }
    let fs = f.iter().sum::<f64>() / f.len() as f64;

    let n = n as i128;
    let diag: i128 = (0..rows.len()).map(|i| c.counts[i][i] as i128).sum();
    let chance: i128 = rows.iter().zip(&cols).map(|(&r, &c)| r as i128 * c as i128).sum();
    let den = n * n - chance;
    // A vanishing denominator means every sample sits in one class on both
    // sides, which is perfect agreement.
    let kappa = if den == 0 {
        1.0
    } else {
        (n * diag - chance) as f64 / den as f64
    };
    Ok((fs, kappa))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(counts: &[&[u64]]) -> ConfusionMatrix {
        ConfusionMatrix::from_counts(counts.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn hand_case_9_1_4_6() {
        let m = c(&[&[9, 1], &[4, 6]]);
        let (oa, aa) = oa_aa(&m).unwrap();
        assert!((oa - 0.75).abs() < 1e-15);
        assert!((aa - 0.75).abs() < 1e-15);
        let (fs, kappa) = fscore_kappa(&m).unwrap();
        assert!((fs - (18.0 / 23.0 + 12.0 / 17.0) / 2.0).abs() < 1e-15);
        assert!((kappa - 0.5).abs() < 1e-15);
    }

    #[test]
    fn perfect_agreement() {
        let m = c(&[&[3, 0, 0], &[0, 5, 0], &[0, 0, 2]]);
        assert_eq!(oa_aa(&m).unwrap(), (1.0, 1.0));
        assert_eq!(fscore_kappa(&m).unwrap(), (1.0, 1.0));
        assert_eq!(ari(&m).unwrap(), 1.0);
    }

    #[test]
    fn ari_small_cases() {
        assert_eq!(ari(&c(&[&[2, 0], &[0, 2]])).unwrap(), 1.0);
        // [[1,1],[1,1]]: Σnij = 0, Sa = Sb = 2, N = 6 → (0 − 4/6)/(2 − 4/6) = −0.5.
        assert!((ari(&c(&[&[1, 1], &[1, 1]])).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn ari_degenerate_policy() {
        // Single cluster vs single cluster.
        assert_eq!(ari_detail(&c(&[&[5]])).unwrap(), (1.0, true));
        // All singletons on both sides.
        let p: Vec<Label> = (0..4).collect();
        let m = ConfusionMatrix::from_partitions(&p, &p).unwrap();
        assert_eq!(ari_detail(&m).unwrap(), (1.0, true));
        // Singletons vs one block is not degenerate: the index is 0.
        let q = vec![0; 4];
        let m = ConfusionMatrix::from_partitions(&p, &q).unwrap();
        assert_eq!(ari_detail(&m).unwrap(), (0.0, false));
        assert!(ari(&c(&[&[1]])).is_err());
    }

    #[test]
    fn zero_row_excluded_from_aa() {
        let m = c(&[&[4, 0, 1], &[0, 0, 0], &[1, 0, 4]]);
        let (oa, aa) = oa_aa(&m).unwrap();
        assert!((oa - 0.8).abs() < 1e-15);
        assert!((aa - 0.8).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(oa_aa(&c(&[&[1, 2]])), Err(Error::Shape(_))));
        assert!(matches!(fscore_kappa(&c(&[&[0, 0], &[0, 0]])), Err(Error::UndefinedMetric(_))));
        assert!(ConfusionMatrix::from_labels(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn from_labels_orientation() {
        let m = ConfusionMatrix::from_labels(&[1, 1, 2], &[1, 2, 2]).unwrap();
        assert_eq!(m.row_classes, vec![1, 2]);
        assert_eq!(m.counts, vec![vec![1, 1], vec![0, 1]]);
    }
}
