//! Weighted similarity graphs and the discrete calculus on them.
//!
//! Node functions are plain slices of length n. Edge functions live on the
//! stored edges and carry a parity: antisymmetric ones model flows
//! (gradients, velocity fields), symmetric ones model weight modifiers.
//!
//! With `(∇y)_ij = (y_j − y_i)·w_ij` and `div(f)_i = Σ_j f_ij`, the graph
//! Laplacian `L = D − W` satisfies `div(∇y) = −L·y`.

mod knn;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::PointCloud;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub use self::knn::{knn_graph, nearest_neighbors, KnnOptions, Symmetrize};
pub(crate) use self::knn::sq_dist;

/// Sparse symmetric graph with positive edge weights.
///
/// Edges are stored once as `(i, j, w)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    // Per node: (neighbor, edge index), sorted by neighbor.
    adj: Vec<Vec<(usize, usize)>>,
}

impl WeightedGraph {
    /// Builds a graph from undirected weighted edges in any orientation.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut list: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Bounds(format!("edge ({i}, {j}) in a graph of {n} nodes")));
            }
            if i == j {
                return Err(Error::Parameter(format!("self-loop at node {i}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Parameter(format!(
                    "edge ({i}, {j}) has non-positive weight {w}"
                )));
            }
            list.push((i.min(j), i.max(j), w));
        }
        list.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if let Some(w) = list.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::Parameter(format!(
                "edge ({}, {}) listed twice",
                w[0].0, w[0].1
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (e, &(i, j, _)) in list.iter().enumerate() {
            adj[i].push((j, e));
            adj[j].push((i, e));
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        Ok(Self {
            n,
            edges: list,
            adj,
        })
    }

    /// All pairs joined with unit weight.
    pub fn unit(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, pairs.iter().map(|&(i, j)| (i, j, 1.0)))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Stored edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of `i` with the connecting weight, ascending by neighbor.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[i].iter().map(|&(j, e)| (j, self.edges[e].2))
    }

    /// Index into [`edges`](Self::edges) of the edge joining `i` and `j`.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let row = self.adj.get(i)?;
        row.binary_search_by_key(&j, |&(nb, _)| nb)
            .ok()
            .map(|p| row[p].1)
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.edge_index(i, j).map_or(0.0, |e| self.edges[e].2)
    }

    /// Same topology with every weight multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.2 *= c;
        }
        g
    }

    /// Writes one `i j w` line per stored edge.
    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for &(i, j, w) in &self.edges {
            writeln!(out, "{i} {j} {w}").unwrap();
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reads `i j [w]` lines (weight defaults to 1). `n` defaults to one
    /// more than the largest index seen.
    pub fn read_edge_list(path: impl AsRef<Path>, n: Option<usize>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut edges = Vec::new();
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cells: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&cells.len()) {
                return Err(Error::Format {
                    row,
                    msg: format!("expected `i j [w]`, found {line:?}"),
                });
            }
            let idx = |c: usize| {
                cells[c].parse::<usize>().map_err(|_| Error::Parse {
                    row,
                    column: c,
                    cell: cells[c].into(),
                })
            };
            let w = match cells.get(2) {
                Some(s) => s.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    column: 2,
                    cell: s.to_string(),
                })?,
                None => 1.0,
            };
            edges.push((idx(0)?, idx(1)?, w));
        }
        let n = n.unwrap_or_else(|| edges.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(0));
        Self::new(n, edges)
    }
}

/// Heat-kernel weights `exp(−‖x_i − x_j‖² / (2σ²))` on the given edges.
pub fn heat_weights(edges: &[(usize, usize)], pc: &PointCloud, sigma: f64) -> Result<WeightedGraph> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let two_s2 = 2.0 * sigma * sigma;
    let weighted: Vec<_> = edges
        .iter()
        .map(|&(i, j)| (i, j, (-knn::sq_dist(pc.point(i), pc.point(j)) / two_s2).exp()))
        .collect();
    // Far-apart endpoints underflow to zero; such an edge carries no weight.
    if let Some(&(i, j, _)) = weighted.iter().find(|e| e.2 == 0.0) {
        return Err(Error::Parameter(format!(
            "heat weight of edge ({i}, {j}) underflows to 0; increase sigma"
        )));
    }
    WeightedGraph::new(pc.len(), weighted)
}

/// Component label per node; labels are contiguous from 0 in order of each
/// component's lowest node index.
pub fn connected_components(g: &WeightedGraph) -> Vec<usize> {
    components_of(g.n, g.edges.iter().map(|e| (e.0, e.1)))
}

fn components_of(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, j) in edges {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[i] = label[r];
    }
    out
}

pub fn component_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |m| m + 1)
}

/// Joins components of an edge set by repeatedly adding, for every
/// component, its single shortest edge to another component, until one
/// component remains. Returns the augmented edge set and the added edges.
pub fn auto_connect(
    edges: &[(usize, usize)],
    pc: &PointCloud,
) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let n = pc.len();
    let mut all = edges.to_vec();
    let mut added = Vec::new();
    loop {
        let comp = components_of(n, all.iter().copied());
        let count = component_count(&comp);
        if count <= 1 {
            break;
        }
        let mut best: Vec<Option<(f64, usize, usize)>> = vec![None; count];
        for i in 0..n {
            for j in (i + 1)..n {
                if comp[i] == comp[j] {
                    continue;
                }
                let d = knn::sq_dist(pc.point(i), pc.point(j));
                for c in [comp[i], comp[j]] {
                    if best[c].is_none_or(|b| (d, i, j) < b) {
                        best[c] = Some((d, i, j));
                    }
                }
            }
        }
        for (_, i, j) in best.into_iter().flatten() {
            if !all.contains(&(i, j)) {
                all.push((i, j));
                added.push((i, j));
            }
        }
    }
    all.sort_unstable();
    added.sort_unstable();
    (all, added)
}

/// Diagonal of the degree matrix, `d_ii = Σ_j w_ij`.
///
/// Sums run over neighbors in ascending index order; operator builders
/// accumulate in the same order so their reductions to `L` are exact.
pub fn degree_diag(g: &WeightedGraph) -> Vec<f64> {
    (0..g.n).map(|i| g.neighbors(i).map(|(_, w)| w).sum()).collect()
}

/// `L = D − W` as a sparse matrix with a full diagonal.
pub fn laplacian(g: &WeightedGraph) -> CsrMatrix {
    let mut t: Vec<(usize, usize, f64)> = degree_diag(g)
        .into_iter()
        .enumerate()
        .map(|(i, d)| (i, i, d))
        .collect();
    for &(i, j, w) in &g.edges {
        t.push((i, j, -w));
        t.push((j, i, -w));
    }
    CsrMatrix::from_triplets(g.n, g.n, &t)
}

/// The weight matrix W.
pub fn weight_matrix(g: &WeightedGraph) -> CsrMatrix {
    let t: Vec<_> = g
        .edges
        .iter()
        .flat_map(|&(i, j, w)| [(i, j, w), (j, i, w)])
        .collect();
    CsrMatrix::from_triplets(g.n, g.n, &t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

/// A function on the edges of a particular graph.
///
/// `values[e]` is the value at `(i, j)` for stored edge `e = (i, j)`,
/// `i < j`; the value at `(j, i)` follows from the parity.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    parity: Parity,
    values: Vec<f64>,
}

impl EdgeFunction {
    pub fn new(g: &WeightedGraph, parity: Parity, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.edge_count() {
            return Err(Error::Shape(format!(
                "{} values for {} edges",
                values.len(),
                g.edge_count()
            )));
        }
        Ok(Self { parity, values })
    }

    pub fn constant(g: &WeightedGraph, parity: Parity, value: f64) -> Self {
        Self {
            parity,
            values: vec![value; g.edge_count()],
        }
    }

    /// Builds from `(i, j, value)` entries in either orientation; every
    /// entry must lie on an edge of `g`, unlisted edges take `default`.
    pub fn from_entries(
        g: &WeightedGraph,
        parity: Parity,
        entries: &[(usize, usize, f64)],
        default: f64,
    ) -> Result<Self> {
        let mut values = vec![default; g.edge_count()];
        for &(i, j, v) in entries {
            let e = g.edge_index(i, j).ok_or(Error::EdgeDomain { i, j })?;
            values[e] = if i < j || parity == Parity::Symmetric {
                v
            } else {
                -v
            };
        }
        Ok(Self { parity, values })
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `(i, j)`; zero off the edge set.
    pub fn get(&self, g: &WeightedGraph, i: usize, j: usize) -> f64 {
        match g.edge_index(i, j) {
            None => 0.0,
            Some(e) if i < j || self.parity == Parity::Symmetric => self.values[e],
            Some(e) => -self.values[e],
        }
    }
}

/// Net flow at each node: `div(f)_i = Σ_j f_ij`.
pub fn divergence(f: &EdgeFunction, g: &WeightedGraph) -> Result<Vec<f64>> {
    if f.values.len() != g.edge_count() {
        return Err(Error::Shape(format!(
            "edge function has {} values, graph has {} edges",
            f.values.len(),
            g.edge_count()
        )));
    }
    let mut div = vec![0.0; g.n];
    for (&(i, j, _), &v) in g.edges.iter().zip(&f.values) {
        div[i] += v;
        div[j] += match f.parity {
            Parity::Symmetric => v,
            Parity::Antisymmetric => -v,
        };
    }
    Ok(div)
}

/// `(∇y)_ij = (y_j − y_i)·w_ij`.
pub fn gradient(y: &[f64], g: &WeightedGraph) -> Result<EdgeFunction> {
    if y.len() != g.n {
        return Err(Error::Shape(format!(
            "node vector of length {} on {} nodes",
            y.len(),
            g.n
        )));
    }
    Ok(EdgeFunction {
        parity: Parity::Antisymmetric,
        values: g.edges.iter().map(|&(i, j, w)| (y[j] - y[i]) * w).collect(),
    })
}
