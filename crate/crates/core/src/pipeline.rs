//! Points in, embedding out: kNN graph → heat weights → operator →
//! generalized eigenvectors → drop the kernel vector.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{Label, PointCloud};
use crate::eigen::{fix_sign, smallest_pairs, EigenOptions};
use crate::error::{Error, Result, Stage};
use crate::graph::{
    auto_connect, component_count, heat_weights, knn_graph, KnnOptions, WeightedGraph,
};
use crate::operators::{
    build_le, build_se, build_ta, build_te, build_tg, OperatorMatrix, SupervisionParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pca,
    Le,
    Se,
    Ta,
    Tg,
    Te,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Pca,
        Method::Le,
        Method::Se,
        Method::Ta,
        Method::Tg,
        Method::Te,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Le => "le",
            Method::Se => "se",
            Method::Ta => "ta",
            Method::Tg => "tg",
            Method::Te => "te",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config {
                field: "method".into(),
                msg: format!("unknown method {s:?}; expected one of pca, le, se, ta, tg, te"),
            })
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    pub method: Method,
    pub k: usize,
    pub sigma: f64,
    pub m: usize,
    pub supervision: SupervisionParams,
    pub seed: u64,
    pub knn: KnnOptions,
    /// Join disconnected kNN components by their shortest edges instead of
    /// failing.
    pub auto_connect: bool,
    pub eigen: EigenOptions,
}

impl EmbedConfig {
    /// k = 12, σ = 1, m = 50, no supervision.
    pub fn new(method: Method) -> Self {
        Self {
            method,
            k: 12,
            sigma: 1.0,
            m: 50,
            supervision: SupervisionParams::default(),
            seed: 0,
            knn: KnnOptions::default(),
            auto_connect: false,
            eigen: EigenOptions::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |field: &str, msg: String| {
            Err(Error::Config {
                field: field.into(),
                msg,
            })
        };
        if self.m == 0 {
            return bad("m", "must be >= 1".into());
        }
        if self.method == Method::Pca {
            return Ok(());
        }
        if self.k == 0 || self.k >= n {
            return bad("k", format!("must satisfy 1 <= k < n = {n}, got {}", self.k));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return bad("sigma", format!("must be positive, got {}", self.sigma));
        }
        if self.m + 1 > n {
            return bad("m", format!("m + 1 = {} exceeds n = {n}", self.m + 1));
        }
        let s = &self.supervision;
        match self.method {
            Method::Se if s.alpha_hat > 0.0 && s.potential.is_none() => {
                bad("potential", "SE with alpha_hat > 0 needs a potential V".into())
            }
            Method::Ta if s.beta != 0.0 && s.mu.is_none() => {
                bad("mu", "TA with beta != 0 needs an advection indicator mu".into())
            }
            Method::Tg | Method::Te if s.a.is_none() => {
                bad("a", "TG and TE need measure modifiers a".into())
            }
            _ => Ok(()),
        }
    }
}

/// Rows are points, columns the embedding coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub coords: DMatrix<f64>,
    /// The m+1 smallest eigenvalues (graph methods) or the m leading
    /// variances (PCA).
    pub spectrum: Vec<f64>,
    pub method: Method,
    pub config: EmbedConfig,
    /// Edges added by auto-connect.
    pub added_edges: Vec<(usize, usize)>,
    pub residuals: Vec<f64>,
}

impl Embedding {
    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.coords.row(i).iter().copied().collect()
    }

    /// The embedded points as a cloud, carrying `labels` when given.
    pub fn to_point_cloud(&self, labels: Option<&[Label]>) -> Result<PointCloud> {
        let n = self.len();
        let values = (0..n).flat_map(|i| self.row(i)).collect();
        let pc = PointCloud::new(n, self.dim(), values)?;
        match labels {
            Some(l) => pc.with_labels(l.to_vec()),
            None => Ok(pc),
        }
    }

    /// CSV with n rows and m columns, plus a label column when given.
    pub fn write_csv(&self, path: impl AsRef<Path>, labels: Option<&[Label]>) -> Result<()> {
        let pc = self.to_point_cloud(labels)?;
        crate::data::write_point_csv(path, &pc)
    }

    /// One eigenvalue (or variance) per line.
    pub fn write_spectrum(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = self.spectrum.iter().fold(String::new(), |mut s, v| {
            writeln!(s, "{v}").unwrap();
            s
        });
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Builds the heat-weighted kNN graph; fails on a disconnected graph unless
/// `cfg.auto_connect` is set. Returns the graph and any added edges.
pub fn build_graph(pc: &PointCloud, cfg: &EmbedConfig) -> Result<(WeightedGraph, Vec<(usize, usize)>)> {
    let mut edges = knn_graph(pc, cfg.k, &cfg.knn).map_err(|e| e.at(Stage::Graph))?;
    let probe = WeightedGraph::unit(pc.len(), &edges).map_err(|e| e.at(Stage::Graph))?;
    let comps = component_count(&crate::graph::connected_components(&probe));
    let mut added = Vec::new();
    if comps > 1 {
        if !cfg.auto_connect {
            return Err(Error::Disconnected { components: comps }.at(Stage::Graph));
        }
        log::warn!("kNN graph has {comps} components; auto-connecting");
        let (all, extra) = auto_connect(&edges, pc);
        edges = all;
        added = extra;
    }
    let g = heat_weights(&edges, pc, cfg.sigma).map_err(|e| e.at(Stage::Weights))?;
    Ok((g, added))
}

/// The operator for `method` on a built graph.
pub fn build_operator(
    g: &WeightedGraph,
    method: Method,
    params: &SupervisionParams,
) -> Result<OperatorMatrix> {
    let op = match method {
        Method::Le => Ok(build_le(g)),
        Method::Se => build_se(g, params),
        Method::Ta => build_ta(g, params),
        Method::Tg => build_tg(g, params),
        Method::Te => build_te(g, params),
        Method::Pca => Err(Error::Parameter("PCA has no graph operator".into())),
    };
    op.map_err(|e| e.at(Stage::Operator))
}

/// Embeds `pc` into `cfg.m` dimensions.
pub fn embed(pc: &PointCloud, cfg: &EmbedConfig) -> Result<Embedding> {
    cfg.validate(pc.len())?;
    if cfg.method == Method::Pca {
        let mut e = embed_pca(pc, cfg.m)?;
        e.config = cfg.clone();
        return Ok(e);
    }
    let (g, added) = build_graph(pc, cfg)?;
    let op = build_operator(&g, cfg.method, &cfg.supervision)?;
    let eig_opts = EigenOptions {
        seed: cfg.seed,
        ..cfg.eigen.clone()
    };
    let eig = smallest_pairs(&op, cfg.m, &eig_opts).map_err(|e| e.at(Stage::Eigensolve))?;
    let coords = eig.eigenvectors.columns(1, cfg.m).into_owned();
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite embedding coordinate".into()).at(Stage::Embedding));
    }
    Ok(Embedding {
        coords,
        spectrum: eig.eigenvalues,
        method: cfg.method,
        config: cfg.clone(),
        added_edges: added,
        residuals: eig.residuals,
    })
}

/// Projection of the mean-centered data onto its `m` leading principal
/// directions, each direction signed so its largest-magnitude loading is
/// positive.
pub fn embed_pca(pc: &PointCloud, m: usize) -> Result<Embedding> {
    let (n, d) = (pc.len(), pc.dim());
    if m == 0 || m > d {
        return Err(Error::Parameter(format!(
            "PCA dimension must satisfy 1 <= m <= d = {d}, got {m}"
        )));
    }
    let mut mean = vec![0.0; d];
    for i in 0..n {
        mean.iter_mut().zip(pc.point(i)).for_each(|(s, v)| *s += v);
    }
    mean.iter_mut().for_each(|s| *s /= n as f64);
    let centered = DMatrix::from_fn(n, d, |i, j| pc.point(i)[j] - mean[j]);
    let denom = (n.max(2) - 1) as f64;
    let cov = (centered.transpose() * &centered) / denom;
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    order.truncate(m);
    let mut basis = DMatrix::zeros(d, m);
    for (c, &k) in order.iter().enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        fix_sign(&mut v);
        basis.column_mut(c).copy_from_slice(&v);
    }
    let spectrum = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    Ok(Embedding {
        coords: centered * basis,
        spectrum,
        method: Method::Pca,
        config: EmbedConfig {
            m,
            ..EmbedConfig::new(Method::Pca)
        },
        added_edges: Vec::new(),
        residuals: Vec::new(),
    })
}
