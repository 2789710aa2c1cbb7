use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Label, PointCloud};
use crate::error::{Error, Result};

/// Parameters of the five-blob demo dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub seed: u64,
    pub n_per_cluster: usize,
    pub centers: Vec<[f64; 2]>,
    /// Either one value for every cluster or one per center.
    pub spread: Vec<f64>,
}

impl Default for ToyConfig {
    /// Cluster 0 at the origin and four more on a circle of radius 2.5 at
    /// 45°, 135°, 225° and 315°; 100 points each with standard deviation
    /// 0.6. The tails touch, so a kNN graph with moderate k is connected.
    fn default() -> Self {
        let centers = std::iter::once([0.0, 0.0])
            .chain((0..4).map(|k| {
                let t = (45.0 + 90.0 * k as f64).to_radians();
                [2.5 * t.cos(), 2.5 * t.sin()]
            }))
            .collect();
        Self {
            seed: 42,
            n_per_cluster: 100,
            centers,
            spread: vec![0.6],
        }
    }
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Isotropic Gaussian blobs around `centers`; labels are cluster indices.
pub fn make_toy_clusters(cfg: &ToyConfig) -> Result<PointCloud> {
    if cfg.n_per_cluster == 0 {
        return Err(Error::Parameter("n_per_cluster must be >= 1".into()));
    }
    if cfg.centers.is_empty() {
        return Err(Error::Parameter("at least one center is required".into()));
    }
    if cfg.spread.len() != 1 && cfg.spread.len() != cfg.centers.len() {
        return Err(Error::Parameter(format!(
            "{} spreads for {} centers",
            cfg.spread.len(),
            cfg.centers.len()
        )));
    }
    if let Some(s) = cfg.spread.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
        return Err(Error::Parameter(format!("spread must be positive, got {s}")));
    }

    let mut rng = rng(cfg.seed);
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    let n = cfg.n_per_cluster * cfg.centers.len();
    let mut values = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (c, center) in cfg.centers.iter().enumerate() {
        let s = if cfg.spread.len() == 1 {
            cfg.spread[0]
        } else {
            cfg.spread[c]
        };
        for _ in 0..cfg.n_per_cluster {
            values.push(center[0] + s * std_normal.sample(&mut rng));
            values.push(center[1] + s * std_normal.sample(&mut rng));
            labels.push(c as Label);
        }
    }
    PointCloud::new(n, 2, values)?.with_labels(labels)
}

/// Adds independent N(0, sigma²) noise to every coordinate.
pub fn add_gaussian_noise(pc: &PointCloud, seed: u64, sigma: f64) -> Result<PointCloud> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Parameter(format!(
            "noise sigma must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(pc.clone());
    }
    let mut rng = rng(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    Ok(pc.map_values(|v| v + normal.sample(&mut rng)))
}

/// `count` values 10^lo … 10^hi, evenly spaced in the exponent.
pub fn log_spaced(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo_exp)],
        _ => (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                10f64.powf(lo_exp + t * (hi_exp - lo_exp))
            })
            .collect(),
    }
}

/// Marks ⌊fraction·|class|⌋ members of `class`, drawn without replacement.
pub fn supervision_subset(
    pc: &PointCloud,
    class: Label,
    fraction: f64,
    seed: u64,
) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::Parameter(format!(
            "fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let members = pc.members(class);
    if members.is_empty() {
        return Err(Error::UnknownClass(class));
    }
    // Guard against 0.35·20 = 6.999… style truncation.
    let take = ((fraction * members.len() as f64) + 1e-9).floor() as usize;
    let take = take.min(members.len());
    let mut mask = vec![false; pc.len()];
    for p in index::sample(&mut rng(seed), members.len(), take) {
        mask[members[p]] = true;
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_blobs_of_one_hundred() {
        let pc = make_toy_clusters(&ToyConfig::default()).unwrap();
        assert_eq!(pc.len(), 500);
        assert_eq!(pc.classes(), vec![0, 1, 2, 3, 4]);
        assert!((0..5).all(|c| pc.members(c).len() == 100));
    }

    #[test]
    fn single_center_single_class() {
        let cfg = ToyConfig {
            centers: vec![[0.0, 0.0]],
            n_per_cluster: 7,
            ..ToyConfig::default()
        };
        let pc = make_toy_clusters(&cfg).unwrap();
        assert!(pc.labels().unwrap().iter().all(|&l| l == 0));
    }

    #[test]
    fn toy_is_deterministic() {
        let a = make_toy_clusters(&ToyConfig::default()).unwrap();
        let b = make_toy_clusters(&ToyConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = make_toy_clusters(&ToyConfig {
            seed: 43,
            ..ToyConfig::default()
        })
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn toy_rejects_bad_spread() {
        let cfg = ToyConfig {
            spread: vec![0.0],
            ..ToyConfig::default()
        };
        assert!(matches!(make_toy_clusters(&cfg), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_noise_is_exact() {
        let pc = make_toy_clusters(&ToyConfig::default()).unwrap();
        assert_eq!(add_gaussian_noise(&pc, 1, 0.0).unwrap(), pc);
        assert!(add_gaussian_noise(&pc, 1, -1.0).is_err());
    }

    #[test]
    fn noise_mean_within_three_standard_errors() {
        let n = 100_000;
        let pc = PointCloud::new(n, 1, vec![0.0; n]).unwrap();
        let sigma = 2.5;
        let noisy = add_gaussian_noise(&pc, 7, sigma).unwrap();
        let mean = noisy.values().iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 3.0 * sigma / (n as f64).sqrt(), "mean {mean}");
        let var = noisy.values().iter().map(|v| v * v).sum::<f64>() / n as f64;
        assert!((var.sqrt() / sigma - 1.0).abs() < 0.02);
    }

    #[test]
    fn noise_preserves_labels() {
        let pc = make_toy_clusters(&ToyConfig::default()).unwrap();
        let noisy = add_gaussian_noise(&pc, 3, 0.1).unwrap();
        assert_eq!(noisy.labels(), pc.labels());
        assert_eq!(noisy, add_gaussian_noise(&pc, 3, 0.1).unwrap());
    }

    #[test]
    fn twenty_log_spaced_sigmas() {
        let g = log_spaced(0.0, 5.0, 20);
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 1.0);
        assert!((g[19] - 1e5).abs() < 1e-6);
        let ratio = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-9));
    }

    #[test]
    fn subset_sizes() {
        let pc = make_toy_clusters(&ToyConfig::default()).unwrap();
        let full = supervision_subset(&pc, 2, 1.0, 0).unwrap();
        assert_eq!(full.iter().filter(|m| **m).count(), 100);
        assert!(pc.members(2).iter().all(|&i| full[i]));
        let none = supervision_subset(&pc, 2, 0.0, 0).unwrap();
        assert!(none.iter().all(|m| !m));
        let half = supervision_subset(&pc, 2, 0.5, 0).unwrap();
        assert_eq!(half.iter().filter(|m| **m).count(), 50);
        let labels = pc.labels().unwrap();
        assert!(half.iter().zip(labels).all(|(&m, &l)| !m || l == 2));
        let five = supervision_subset(&pc, 2, 0.35, 0).unwrap();
        assert_eq!(five.iter().filter(|m| **m).count(), 35);
    }

    #[test]
    fn subset_unknown_class() {
        let pc = make_toy_clusters(&ToyConfig::default()).unwrap();
        assert!(matches!(
            supervision_subset(&pc, 9, 0.5, 0),
            Err(Error::UnknownClass(9))
        ));
    }
}
