//! Datasets: point clouds, hyperspectral cubes, class groupings, and the
//! synthetic and noise generators used by the demos and sweeps.

mod csv;
mod cube;
mod synth;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

pub(crate) use self::synth::rng;
pub(crate) use self::csv::{column_count, parse_point_csv};
pub(crate) use self::cube::sidecar_path;
pub use self::csv::{load_labels, load_point_csv, write_point_csv};
pub use self::cube::{cube_to_points, load_cube, remove_bands, write_cube, GroundTruth, HyperCube};
pub use self::synth::{
    add_gaussian_noise, log_spaced, make_toy_clusters, supervision_subset, ToyConfig,
};

/// Integer class label. `0` is reserved for unlabeled pixels.
pub type Label = i64;

/// n points in d dimensions, stored row-major, with optional labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    n: usize,
    d: usize,
    values: Vec<f64>,
    labels: Option<Vec<Label>>,
    class_names: Option<BTreeMap<Label, String>>,
}

impl PointCloud {
    /// Builds a cloud from row-major coordinates.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput("point cloud has no points".into()));
        }
        if d == 0 {
            return Err(Error::Shape("points must have dimension >= 1".into()));
        }
        if values.len() != n * d {
            return Err(Error::Shape(format!(
                "{} values cannot form {n} points of dimension {d}",
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite coordinate at point {}, dimension {}",
                p / d,
                p % d
            )));
        }
        Ok(Self {
            n,
            d,
            values,
            labels: None,
            class_names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some((r, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::Format {
                row: r,
                msg: format!("expected {d} coordinates, found {}", rows[r].len()),
            });
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Shape(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_class_names(mut self, names: BTreeMap<Label, String>) -> Self {
        self.class_names = Some(names);
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn class_names(&self) -> Option<&BTreeMap<Label, String>> {
        self.class_names.as_ref()
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<Label> {
        self.labels
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Indices of the points carrying `class`.
    pub fn members(&self, class: Label) -> Vec<usize> {
        self.labels
            .iter()
            .flatten()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect()
    }

    /// Keeps the points whose index is set in `mask`, in order.
    pub fn select(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.n {
            return Err(Error::Shape(format!(
                "mask of length {} for {} points",
                mask.len(),
                self.n
            )));
        }
        let keep: Vec<usize> = (0..self.n).filter(|&i| mask[i]).collect();
        let values = keep.iter().flat_map(|&i| self.point(i).to_vec()).collect();
        let mut out = Self::new(keep.len(), self.d, values)?;
        out.labels = self
            .labels
            .as_ref()
            .map(|l| keep.iter().map(|&i| l[i]).collect());
        out.class_names = self.class_names.clone();
        Ok(out)
    }

    /// Reorders points so that output row `k` is input row `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        let values = perm.iter().flat_map(|&i| self.point(i).to_vec()).collect();
        Self {
            n: self.n,
            d: self.d,
            values,
            labels: self
                .labels
                .as_ref()
                .map(|l| perm.iter().map(|&i| l[i]).collect()),
            class_names: self.class_names.clone(),
        }
    }

    pub(crate) fn map_values(&self, f: impl FnMut(&f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(f).collect(),
            ..self.clone()
        }
    }
}

/// Rescaling applied to raw coordinates before graph construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    #[default]
    None,
    /// Divide every value by the largest absolute value in the cloud.
    MaxAbs,
    /// Scale each point to unit Euclidean norm.
    UnitNorm,
}

impl std::str::FromStr for Scaling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "max-abs" => Ok(Self::MaxAbs),
            "unit-norm" => Ok(Self::UnitNorm),
            _ => Err(format!("expected none, max-abs or unit-norm, got {s:?}")),
        }
    }
}

impl std::fmt::Display for Scaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::MaxAbs => "max-abs",
            Self::UnitNorm => "unit-norm",
        })
    }
}

/// Heat weights with a fixed σ depend on the data's units; raw
/// hyperspectral radiances in the thousands underflow at σ = 1.
/// All-zero data and zero-norm points are left unchanged.
pub fn rescale(pc: &PointCloud, scaling: Scaling) -> PointCloud {
    match scaling {
        Scaling::None => pc.clone(),
        Scaling::MaxAbs => {
            let m = pc.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                pc.clone()
            } else {
                pc.map_values(|v| v / m)
            }
        }
        Scaling::UnitNorm => {
            let mut out = pc.clone();
            for row in out.values.chunks_mut(pc.d) {
                let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    row.iter_mut().for_each(|v| *v /= norm);
                }
            }
            out
        }
    }
}

/// Surjective relabeling of original classes onto grouped classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGrouping {
    mapping: BTreeMap<Label, Label>,
}

impl ClassGrouping {
    /// Validates that the grouped labels form a contiguous range.
    pub fn new(mapping: BTreeMap<Label, Label>) -> Result<Self> {
        let targets: BTreeSet<Label> = mapping.values().copied().collect();
        if let (Some(&lo), Some(&hi)) = (targets.first(), targets.last()) {
            if (hi - lo + 1) as usize != targets.len() {
                return Err(Error::Parameter(format!(
                    "grouped labels {targets:?} are not a contiguous range"
                )));
            }
        }
        Ok(Self { mapping })
    }

    /// Builds a grouping from lists of original labels, each list mapped to
    /// its own target.
    pub fn from_groups(groups: &[(Label, &[Label])]) -> Result<Self> {
        let mut mapping = BTreeMap::new();
        for &(target, members) in groups {
            for &m in members {
                if mapping.insert(m, target).is_some() {
                    return Err(Error::Parameter(format!(
                        "label {m} appears in more than one group"
                    )));
                }
            }
        }
        Self::new(mapping)
    }

    pub fn identity(labels: &[Label]) -> Self {
        Self {
            mapping: labels.iter().map(|&l| (l, l)).collect(),
        }
    }

    pub fn get(&self, label: Label) -> Option<Label> {
        self.mapping.get(&label).copied()
    }

    pub fn mapping(&self) -> &BTreeMap<Label, Label> {
        &self.mapping
    }
}

/// Remaps every label of `pc` through `grouping`; points are untouched.
pub fn group_classes(pc: &PointCloud, grouping: &ClassGrouping) -> Result<PointCloud> {
    let labels = pc
        .labels()
        .ok_or_else(|| Error::Parameter("point cloud has no labels to group".into()))?;
    let grouped = labels
        .iter()
        .map(|&l| grouping.get(l).ok_or(Error::UnmappedLabel(l)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = pc.clone();
    out.labels = Some(grouped);
    out.class_names = None;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labelled(labels: Vec<Label>) -> PointCloud {
        let n = labels.len();
        PointCloud::new(n, 1, (0..n).map(|i| i as f64).collect())
            .unwrap()
            .with_labels(labels)
            .unwrap()
    }

    #[test]
    fn rescaling() {
        let pc = PointCloud::new(2, 2, vec![3.0, 4.0, -8.0, 0.0]).unwrap();
        assert_eq!(rescale(&pc, Scaling::MaxAbs).values(), &[0.375, 0.5, -1.0, 0.0]);
        assert_eq!(rescale(&pc, Scaling::UnitNorm).values(), &[0.6, 0.8, -1.0, 0.0]);
        assert_eq!(rescale(&pc, Scaling::None), pc);
        let zero = PointCloud::new(1, 2, vec![0.0, 0.0]).unwrap();
        assert_eq!(rescale(&zero, Scaling::UnitNorm), zero);
        assert_eq!("max-abs".parse::<Scaling>().unwrap(), Scaling::MaxAbs);
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(PointCloud::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(matches!(
            PointCloud::from_rows(&[vec![1.0, 2.0], vec![1.0]]),
            Err(Error::Format { row: 1, .. })
        ));
        assert!(matches!(
            PointCloud::new(0, 1, vec![]),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn corn_group_merges_two_to_four() {
        let g = ClassGrouping::from_groups(&[(1, &[1]), (2, &[2, 3, 4])]).unwrap();
        let pc = labelled(vec![3, 1, 4]);
        let out = group_classes(&pc, &g).unwrap();
        assert_eq!(out.labels().unwrap(), &[2, 1, 2]);
        assert_eq!(out.values(), pc.values());
    }

    #[test]
    fn identity_grouping_keeps_labels() {
        let pc = labelled(vec![0, 5, 2]);
        let g = ClassGrouping::identity(&pc.classes());
        assert_eq!(group_classes(&pc, &g).unwrap(), pc);
    }

    #[test]
    fn unmapped_label_is_reported() {
        let g = ClassGrouping::identity(&[1, 2]);
        let err = group_classes(&labelled(vec![1, 7]), &g).unwrap_err();
        assert!(matches!(err, Error::UnmappedLabel(7)));
    }

    #[test]
    fn grouping_targets_must_be_contiguous() {
        let m = [(1, 1), (2, 3)].into_iter().collect();
        assert!(ClassGrouping::new(m).is_err());
    }

    #[test]
    fn grouping_is_idempotent_for_idempotent_maps() {
        let g = ClassGrouping::from_groups(&[(1, &[1]), (2, &[2, 3])]).unwrap();
        // {1→1, 2→2, 3→2} fixes its own image, so applying twice is a no-op.
        let once = group_classes(&labelled(vec![1, 2, 3, 3]), &g).unwrap();
        let twice = group_classes(&once, &g).unwrap();
        assert_eq!(once.labels(), twice.labels());
        assert_eq!(once.len(), 4);
        assert_eq!(once.dim(), 1);
    }
}
