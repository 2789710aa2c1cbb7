mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use transport_eigenmaps::data::{make_toy_clusters, ToyConfig};
use transport_eigenmaps::eigen::{smallest_pairs, EigenOptions};
use transport_eigenmaps::graph::WeightedGraph;
use transport_eigenmaps::operators::*;
use transport_eigenmaps::pipeline::{embed, EmbedConfig, Method};
use transport_eigenmaps::Error;

fn iterative() -> EigenOptions {
    EigenOptions {
        dense_limit: 0,
        ..EigenOptions::default()
    }
}

fn dense(op: &OperatorMatrix) -> Dense {
    let n = op.n();
    (0..n).map(|i| (0..n).map(|j| op.t.get(i, j)).collect()).collect()
}

/// Checks eigenvalues and the leading invariant subspace against the
/// Jacobi oracle.
fn check_against_oracle(op: &OperatorMatrix, m: usize, opts: &EigenOptions) {
    let got = smallest_pairs(op, m, opts).unwrap();
    let (vals, vecs) = generalized_oracle(&dense(op), &op.metric, &op.degree);
    for k in 0..=m {
        assert!(
            (got.eigenvalues[k] - vals[k]).abs() <= 1e-8,
            "{:?} λ{k}: {} vs {}",
            op.kind,
            got.eigenvalues[k],
            vals[k]
        );
    }
    if vals.get(m + 1).is_some_and(|v| v - vals[m] < 1e-6) {
        return;
    }
    let mass: Vec<f64> = op.metric.iter().zip(&op.degree).map(|(x, d)| x * d).collect();
    let ours: Vec<Vec<f64>> = (0..=m).map(|k| got.vector(k)).collect();
    let angle = max_principal_angle(&ours, &vecs[..=m], &mass);
    assert!(angle <= 1e-6, "{:?}: principal angle {angle:e}", op.kind);
    assert!(got.residuals.iter().all(|r| *r < 1e-8), "{:?}", got.residuals);
}

#[test]
fn iterative_path_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let n = rng.random_range(60..140);
        let g = random_connected_graph(&mut rng, n, 0.05);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..5.0)).collect();
        let mu: Vec<f64> = (0..n).map(|_| f64::from(u8::from(rng.random_bool(0.2)))).collect();
        let p = SupervisionParams {
            a: Some(a),
            mu: Some(mu.clone()),
            potential: Some(mu),
            beta: 5.0,
            alpha_hat: 10.0,
            ..Default::default()
        };
        let m = rng.random_range(1..6);
        for op in [
            build_le(&g),
            build_se(&g, &p).unwrap(),
            build_ta(&g, &p).unwrap(),
            build_tg(&g, &p).unwrap(),
            build_te(&g, &p).unwrap(),
        ] {
            check_against_oracle(&op, m, &iterative());
        }
    }
}

#[test]
fn dense_path_matches_oracle_on_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let n = rng.random_range(2..50);
        let g = random_connected_graph(&mut rng, n, 0.2);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let op = build_te(
            &g,
            &SupervisionParams {
                a: Some(a),
                ..Default::default()
            },
        )
        .unwrap();
        check_against_oracle(&op, rng.random_range(0..n), &EigenOptions::default());
    }
}

#[test]
fn path_graph_spectrum() {
    // (L, D) on P3 has eigenvalues 0, 1, 2.
    let p3 = WeightedGraph::unit(3, &[(0, 1), (1, 2)]).unwrap();
    let e = smallest_pairs(&build_le(&p3), 2, &EigenOptions::default()).unwrap();
    for (got, want) in e.eigenvalues.iter().zip([0.0, 1.0, 2.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn multiplet_spans_agree() {
    // The complete graph K6 has (L, D) eigenvalue 6/5 with multiplicity 5;
    // only the span is defined.
    let pairs: Vec<(usize, usize)> = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).collect();
    let g = WeightedGraph::unit(6, &pairs).unwrap();
    let e = smallest_pairs(&build_le(&g), 5, &EigenOptions::default()).unwrap();
    for v in &e.eigenvalues[1..] {
        assert!((v - 1.2).abs() < 1e-12);
    }
}

#[test]
fn toy_embedding_same_on_both_paths() {
    let pc = make_toy_clusters(&ToyConfig::default()).unwrap();
    let base = EmbedConfig {
        k: 50,
        m: 4,
        ..EmbedConfig::new(Method::Le)
    };
    let d = embed(&pc, &base).unwrap();
    let mut cfg = base.clone();
    cfg.eigen.dense_limit = 0;
    let it = embed(&pc, &cfg).unwrap();
    for k in 0..=base.m {
        assert!((d.spectrum[k] - it.spectrum[k]).abs() < 1e-8);
    }
    for k in 0..base.m {
        let u: Vec<f64> = d.coords.column(k).iter().copied().collect();
        let v: Vec<f64> = it.coords.column(k).iter().copied().collect();
        assert!(cosine(&u, &v) > 1.0 - 1e-8, "column {k}");
    }
}

#[test]
fn disconnected_operator_is_rejected() {
    let g = WeightedGraph::unit(4, &[(0, 1), (2, 3)]).unwrap();
    let err = smallest_pairs(&build_le(&g), 1, &EigenOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Disconnected { components: 2 }));
}
