//! Exact k-nearest-neighbor search under the Euclidean metric.
//!
//! Neighbors are ordered by (squared distance, index), so ties always
//! resolve to the lower index. Brute force is used up to
//! [`KnnOptions::brute_force_limit`] points; above that a kd-tree with the
//! same ordering gives identical results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::data::PointCloud;
use crate::error::{Error, Result};

/// How directed kNN relations become undirected edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetrize {
    /// Edge if either endpoint lists the other.
    #[default]
    Or,
    /// Edge only if both endpoints list each other.
    And,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnOptions {
    pub symmetrize: Symmetrize,
    pub brute_force_limit: usize,
}

impl Default for KnnOptions {
    fn default() -> Self {
        Self {
            symmetrize: Symmetrize::Or,
            brute_force_limit: 20_000,
        }
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Clone, Copy, PartialEq)]
struct Cand {
    d2: f64,
    idx: usize,
}

impl Eq for Cand {}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `k` nearest neighbors of every point, self excluded, nearest first.
pub fn nearest_neighbors(pc: &PointCloud, k: usize, opts: &KnnOptions) -> Result<Vec<Vec<usize>>> {
    let n = pc.len();
    if k == 0 || k >= n {
        return Err(Error::Parameter(format!(
            "k must satisfy 1 <= k < n (k = {k}, n = {n})"
        )));
    }
    if n <= opts.brute_force_limit {
        Ok((0..n)
            .into_par_iter()
            .map(|i| brute_force(pc, i, k))
            .collect())
    } else {
        let tree = KdTree::build(pc);
        Ok((0..n)
            .into_par_iter()
            .map(|i| tree.query(pc, i, k))
            .collect())
    }
}

fn brute_force(pc: &PointCloud, i: usize, k: usize) -> Vec<usize> {
    let q = pc.point(i);
    let mut cands: Vec<Cand> = (0..pc.len())
        .filter(|&j| j != i)
        .map(|j| Cand {
            d2: sq_dist(q, pc.point(j)),
            idx: j,
        })
        .collect();
    cands.select_nth_unstable(k - 1);
    cands.truncate(k);
    cands.sort_unstable();
    cands.into_iter().map(|c| c.idx).collect()
}

/// Undirected kNN edge set as sorted `(i, j)` pairs with `i < j`.
pub fn knn_graph(pc: &PointCloud, k: usize, opts: &KnnOptions) -> Result<Vec<(usize, usize)>> {
    let nn = nearest_neighbors(pc, k, opts)?;
    let mut edges: Vec<(usize, usize)> = match opts.symmetrize {
        Symmetrize::Or => nn
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i.min(j), i.max(j))))
            .collect(),
        Symmetrize::And => nn
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                let nn = &nn;
                row.iter()
                    .filter(move |&&j| i < j && nn[j].contains(&i))
                    .map(move |&j| (i, j))
            })
            .collect(),
    };
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

enum Node {
    Leaf(Vec<usize>),
    Split {
        dim: usize,
        value: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

struct KdTree {
    root: Node,
}

const LEAF_SIZE: usize = 16;

impl KdTree {
    fn build(pc: &PointCloud) -> Self {
        let idx: Vec<usize> = (0..pc.len()).collect();
        Self {
            root: Self::build_node(pc, idx),
        }
    }

    fn build_node(pc: &PointCloud, mut idx: Vec<usize>) -> Node {
        if idx.len() <= LEAF_SIZE {
            return Node::Leaf(idx);
        }
        // Split on the dimension of largest spread at the median.
        let d = pc.dim();
        let mut best = (0, -1.0);
        for dim in 0..d {
            let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let v = pc.point(i)[dim];
                (lo.min(v), hi.max(v))
            });
            if hi - lo > best.1 {
                best = (dim, hi - lo);
            }
        }
        let dim = best.0;
        if best.1 <= 0.0 {
            return Node::Leaf(idx);
        }
        let mid = idx.len() / 2;
        idx.select_nth_unstable_by(mid, |&a, &b| pc.point(a)[dim].total_cmp(&pc.point(b)[dim]));
        let value = pc.point(idx[mid])[dim];
        let right = idx.split_off(mid);
        Node::Split {
            dim,
            value,
            left: Box::new(Self::build_node(pc, idx)),
            right: Box::new(Self::build_node(pc, right)),
        }
    }

    fn query(&self, pc: &PointCloud, i: usize, k: usize) -> Vec<usize> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        Self::visit(&self.root, pc, i, k, &mut heap);
        heap.into_sorted_vec().into_iter().map(|c| c.idx).collect()
    }

    fn visit(node: &Node, pc: &PointCloud, i: usize, k: usize, heap: &mut BinaryHeap<Cand>) {
        let q = pc.point(i);
        match node {
            Node::Leaf(pts) => {
                for &j in pts {
                    if j == i {
                        continue;
                    }
                    let c = Cand {
                        d2: sq_dist(q, pc.point(j)),
                        idx: j,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                dim,
                value,
                left,
                right,
            } => {
                let diff = q[*dim] - value;
                let (near, far) = if diff < 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                Self::visit(near, pc, i, k, heap);
                // Equal distances must still be visited for the index tie rule.
                if heap.len() < k || diff * diff <= heap.peek().unwrap().d2 {
                    Self::visit(far, pc, i, k, heap);
                }
            }
        }
    }
}
