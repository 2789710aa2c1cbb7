//! Transport eigenmaps: semi-supervised spectral embeddings on graphs.
//!
//! Laplacian eigenmaps embed points with the smallest generalized
//! eigenvectors of `L u = λ D u` on a k-nearest-neighbor heat-kernel graph.
//! This crate generalizes the operator `L` to a family of transport
//! operators
//!
//! ```text
//! (T y)_i = Σ_j (a_i y_i − a_j y_j) · w_ij · 2 r_ij / (a_i + a_j)
//! ```
//!
//! driven by a positive measure modifier `a` on nodes and a symmetric weight
//! modifier `r` on edges. `T` is self-adjoint and non-negative in the inner
//! product weighted by `X = diag(a)`, so the pencil `(X·T, X·D)` is
//! symmetric-definite and its eigenvectors are real.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`data`] | point clouds, hyperspectral cubes, toy data, noise |
//! | [`graph`] | kNN graph, heat kernel, divergence/gradient/Laplacian |
//! | [`operators`] | LE, SE, TA, TG and general TE operator builders |
//! | [`fieldcheck`] | solvability of the metric equations for a velocity field |
//! | [`eigen`] | smallest generalized eigenpairs of `(X·T, X·D)` |
//! | [`pipeline`] | points in, m-dimensional embedding out |
//! | [`evaluate`] | 1-NN protocol, ARI / OA / AA / FS / κ |
//! | [`cli`] | the `teigen` command-line front end |
//!
//! ```
//! use transport_eigenmaps::data::{make_toy_clusters, ToyConfig};
//! use transport_eigenmaps::pipeline::{embed, EmbedConfig, Method};
//!
//! let pc = make_toy_clusters(&ToyConfig { n_per_cluster: 20, ..ToyConfig::default() }).unwrap();
//! let cfg = EmbedConfig { k: 10, m: 2, ..EmbedConfig::new(Method::Le) };
//! let emb = embed(&pc, &cfg).unwrap();
//! assert_eq!(emb.dim(), 2);
//! ```

pub mod cli;
pub mod data;
pub mod eigen;
pub mod error;
pub mod evaluate;
pub mod fieldcheck;
pub mod graph;
pub mod operators;
pub mod pipeline;
pub mod sparse;

pub use error::{Error, Result};
