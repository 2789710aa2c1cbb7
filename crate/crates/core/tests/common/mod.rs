//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numerical code: matrices are rebuilt from the
//! definitions, eigenproblems go through a plain cyclic Jacobi solver and
//! metrics are counted pair by pair.

#![allow(dead_code)]

use rand::Rng;
use transport_eigenmaps::graph::WeightedGraph;

pub type Dense = Vec<Vec<f64>>;

/// Random spanning tree plus extra edges with probability `p`; weights in
/// [0.1, 2).
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, p: f64) -> WeightedGraph {
    let mut edges = Vec::new();
    for j in 1..n {
        let i = rng.random_range(0..j);
        edges.push((i, j, rng.random_range(0.1..2.0)));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p && !edges.iter().any(|&(a, b, _)| (a, b) == (i, j)) {
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    WeightedGraph::new(n, edges).unwrap()
}

pub fn weight_dense(g: &WeightedGraph) -> Dense {
    let n = g.node_count();
    let mut w = vec![vec![0.0; n]; n];
    for &(i, j, v) in g.edges() {
        w[i][j] = v;
        w[j][i] = v;
    }
    w
}

pub fn degrees(g: &WeightedGraph) -> Vec<f64> {
    weight_dense(g).iter().map(|r| r.iter().sum()).collect()
}

/// `T` of the general transport operator written entry by entry:
/// `T_ii = a_i Σ_j w̃_ij`, `T_ij = −w̃_ij a_j`, `w̃ = w·2r/(a_i + a_j)`.
pub fn te_dense(g: &WeightedGraph, a: &[f64], r: &Dense) -> Dense {
    let n = g.node_count();
    let w = weight_dense(g);
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if w[i][j] != 0.0 {
                let wt = w[i][j] * 2.0 * r[i][j] / (a[i] + a[j]);
                t[i][i] += a[i] * wt;
                t[i][j] -= wt * a[j];
            }
        }
    }
    t
}

pub fn matvec(m: &Dense, x: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cyclic Jacobi rotations on a symmetric matrix. Returns ascending
/// eigenvalues and the matching eigenvectors as columns `vecs[k]`.
pub fn jacobi_eigen(a: &Dense) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m = a.clone();
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[x][x].total_cmp(&m[y][y]));
    let vals = order.iter().map(|&k| m[k][k]).collect();
    let vecs = order.iter().map(|&k| v.iter().map(|row| row[k]).collect()).collect();
    (vals, vecs)
}

/// Generalized pairs of `T u = λ D u` with metric `X`, via the symmetric
/// pencil `(X·T, X·D)`. Vectors are returned unit in the `X·D` norm.
pub fn generalized_oracle(t: &Dense, x: &[f64], d: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = t.len();
    let mass: Vec<f64> = x.iter().zip(d).map(|(a, b)| a * b).collect();
    let s: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let a: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| 0.5 * (x[i] * t[i][j] + x[j] * t[j][i]) * s[i] * s[j])
                .collect()
        })
        .collect();
    let (vals, ys) = jacobi_eigen(&a);
    let vecs = ys
        .into_iter()
        .map(|y| {
            let u: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a * b).collect();
            let nrm = u.iter().zip(&mass).map(|(u, m)| u * u * m).sum::<f64>().sqrt();
            u.into_iter().map(|v| v / nrm).collect()
        })
        .collect();
    (vals, vecs)
}

/// Largest principal angle between the spans of `u` and `v` in the inner
/// product weighted by `mass`.
pub fn max_principal_angle(u: &[Vec<f64>], v: &[Vec<f64>], mass: &[f64]) -> f64 {
    let ip = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(mass).map(|((x, y), m)| x * y * m).sum::<f64>();
    let orth = |cols: &[Vec<f64>]| {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for c in cols {
            let mut w = c.clone();
            for _ in 0..2 {
                for q in &out {
                    let p = ip(q, &w);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= p * y);
                }
            }
            let nrm = ip(&w, &w).sqrt();
            out.push(w.into_iter().map(|x| x / nrm).collect());
        }
        out
    };
    let (qu, qv) = (orth(u), orth(v));
    let c: Dense = qu.iter().map(|a| qv.iter().map(|b| ip(a, b)).collect()).collect();
    // Singular values of C are square roots of eig(CᵀC).
    let k = qv.len();
    let ctc: Dense = (0..k)
        .map(|i| (0..k).map(|j| c.iter().map(|row| row[i] * row[j]).sum()).collect())
        .collect();
    let (ev, _) = jacobi_eigen(&ctc);
    let smin = ev[0].max(0.0).sqrt().min(1.0);
    smin.acos()
}

/// ARI from the four pair counts (Hubert–Arabie form).
pub fn pair_counting_ari(p: &[i64], q: &[i64]) -> f64 {
    let n = p.len();
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (p[i] == p[j], q[i] == q[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let den = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if den == 0.0 {
        return if n10 == 0.0 && n01 == 0.0 { 1.0 } else { 0.0 };
    }
    2.0 * (n00 * n11 - n01 * n10) / den
}

/// Null space of the stacked edge equations
/// `(1 + a_i − a_j)·x_j − (1 + a_j − a_i)·x_i = 0`, via SVD.
pub fn affine_nullspace(g: &WeightedGraph, a: &[f64]) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let m = g.edge_count().max(1);
    let mut e = nalgebra::DMatrix::<f64>::zeros(m.max(n), n);
    for (row, &(i, j, _)) in g.edges().iter().enumerate() {
        e[(row, j)] = 1.0 + a[i] - a[j];
        e[(row, i)] = -(1.0 + a[j] - a[i]);
    }
    let svd = e.svd(false, true);
    let vt = svd.v_t.unwrap();
    let smax = svd.singular_values.max();
    (0..n)
        .filter(|&k| svd.singular_values[k] <= 1e-10 * smax.max(1.0))
        .map(|k| vt.row(k).iter().copied().collect())
        .collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).abs() / (norm(a) * norm(b))
}
