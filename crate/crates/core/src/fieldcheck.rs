//! Solvability of the metric equations for a velocity field.
//!
//! An antisymmetric field `v̄` on the edges makes the transport operator
//! self-adjoint in `X = diag(x)` exactly when, on every edge,
//! `(1 − v̄_ij)·x_j = (1 + v̄_ij)·x_i`. Two choices are checked here:
//!
//! * the affine field `v̄_ij = a_j − a_i`, where the system reads
//!   `(1 + a_i − a_j)·x_j = (1 + a_j − a_i)·x_i` and is consistent only if
//!   the products of these factors agree around every cycle;
//! * the ratio field `v̄_ij = (a_j − a_i)/(a_j + a_i)`, where it reduces to
//!   `a_i·x_j = a_j·x_i` and `x = a` always works.
//!
//! Propagation runs along a BFS spanning tree rooted at the lowest-index
//! node of each component; each non-tree edge closes one fundamental cycle,
//! and checking those is equivalent to checking the whole linear system.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Relative tolerance for comparing the two cycle products.
pub const CYCLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldReport {
    pub solvable: bool,
    /// Representative solution, 1 at the lowest-index node of each component.
    pub x: Option<Vec<f64>>,
    /// Fundamental cycle on which the products disagree, as a closed walk
    /// listed without repeating the first node.
    pub violating_cycle: Option<Vec<usize>>,
    /// When the system is consistent but forces a non-positive entry: the
    /// tree path from the component root to the first such node.
    pub nonpositive_path: Option<Vec<usize>>,
}

impl fmt::Display for FieldReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "solvable: {}", self.solvable)?;
        let list = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" ")
        };
        if let Some(x) = &self.x {
            let xs: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
            writeln!(f, "x: {}", xs.join(" "))?;
        }
        if let Some(c) = &self.violating_cycle {
            writeln!(f, "violating_cycle: {}", list(c))?;
        }
        if let Some(p) = &self.nonpositive_path {
            writeln!(f, "nonpositive_path: {}", list(p))?;
        }
        Ok(())
    }
}

/// A product of real factors kept as (zero count, sign, Σ log|f|).
#[derive(Debug, Clone, Copy)]
struct LogProduct {
    zeros: usize,
    negative: bool,
    log_abs: f64,
}

impl LogProduct {
    fn one() -> Self {
        Self {
            zeros: 0,
            negative: false,
            log_abs: 0.0,
        }
    }

    fn times(mut self, f: f64) -> Self {
        if f == 0.0 {
            self.zeros += 1;
        } else {
            self.negative ^= f < 0.0;
            self.log_abs += f.abs().ln();
        }
        self
    }

    /// Equal within relative tolerance `tol` (|ln(L/R)| ≤ tol).
    fn matches(&self, other: &Self, tol: f64) -> bool {
        if self.zeros > 0 || other.zeros > 0 {
            return self.zeros > 0 && other.zeros > 0;
        }
        self.negative == other.negative && (self.log_abs - other.log_abs).abs() <= tol
    }
}

/// Both sides of the cycle condition for the closed walk `cycle`:
/// `Π (1 + a_k − a_{k+1})` versus `Π (1 + a_{k+1} − a_k)`.
pub fn cycle_products(a: &[f64], cycle: &[usize]) -> (f64, f64) {
    let l = cycle.len();
    (0..l).fold((1.0, 1.0), |(lhs, rhs), k| {
        let (p, q) = (cycle[k], cycle[(k + 1) % l]);
        (lhs * (1.0 + a[p] - a[q]), rhs * (1.0 + a[q] - a[p]))
    })
}

fn cycle_holds(a: &[f64], cycle: &[usize]) -> bool {
    let l = cycle.len();
    let (lhs, rhs) = (0..l).fold((LogProduct::one(), LogProduct::one()), |(lhs, rhs), k| {
        let (p, q) = (cycle[k], cycle[(k + 1) % l]);
        (lhs.times(1.0 + a[p] - a[q]), rhs.times(1.0 + a[q] - a[p]))
    });
    lhs.matches(&rhs, CYCLE_TOL)
}

struct SpanningForest {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    order: Vec<usize>,
    tree_edge: Vec<bool>,
}

fn bfs_forest(g: &WeightedGraph) -> SpanningForest {
    let n = g.node_count();
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut tree_edge = vec![false; g.edge_count()];
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for (j, _) in g.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    parent[j] = Some(i);
                    depth[j] = depth[i] + 1;
                    tree_edge[g.edge_index(i, j).unwrap()] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    SpanningForest {
        parent,
        depth,
        order,
        tree_edge,
    }
}

impl SpanningForest {
    fn path_to_root(&self, mut i: usize) -> Vec<usize> {
        let mut path = vec![i];
        while let Some(p) = self.parent[i] {
            path.push(p);
            i = p;
        }
        path
    }

    /// The cycle closed by non-tree edge (i, j): tree path i → lca → j.
    fn fundamental_cycle(&self, i: usize, j: usize) -> Vec<usize> {
        let (mut u, mut v) = (i, j);
        let mut left = vec![u];
        let mut right = vec![v];
        while self.depth[u] > self.depth[v] {
            u = self.parent[u].unwrap();
            left.push(u);
        }
        while self.depth[v] > self.depth[u] {
            v = self.parent[v].unwrap();
            right.push(v);
        }
        while u != v {
            u = self.parent[u].unwrap();
            v = self.parent[v].unwrap();
            left.push(u);
            right.push(v);
        }
        right.pop();
        left.extend(right.into_iter().rev());
        canonical_cycle(left)
    }
}

/// Rotates to start at the smallest node and walks toward its smaller
/// neighbor on the cycle.
fn canonical_cycle(mut c: Vec<usize>) -> Vec<usize> {
    let start = (0..c.len()).min_by_key(|&k| c[k]).unwrap();
    c.rotate_left(start);
    if c.len() > 2 && c[c.len() - 1] < c[1] {
        c[1..].reverse();
    }
    c
}

/// Decides whether `(1 + a_i − a_j)·x_j = (1 + a_j − a_i)·x_i` has a
/// positive solution on `g`.
///
/// Cycle conditions are checked first, so an inconsistent cycle is reported
/// even when it passes through an edge with `|a_i − a_j| = 1`. If every
/// cycle is consistent, such an edge makes the propagation ratio undefined
/// and is returned as [`Error::DegenerateEdge`].
pub fn solve_affine_metric(g: &WeightedGraph, a: &[f64]) -> Result<FieldReport> {
    let n = g.node_count();
    if a.len() != n {
        return Err(Error::Shape(format!("a has length {}, graph has {n} nodes", a.len())));
    }
    let forest = bfs_forest(g);

    for (e, &(i, j, _)) in g.edges().iter().enumerate() {
        if forest.tree_edge[e] {
            continue;
        }
        let cycle = forest.fundamental_cycle(i, j);
        if !cycle_holds(a, &cycle) {
            return Ok(FieldReport {
                solvable: false,
                x: None,
                violating_cycle: Some(cycle),
                nonpositive_path: None,
            });
        }
    }

    // Consistent: propagate signed log-magnitudes from each root.
    let mut log_x = vec![0.0; n];
    let mut negative = vec![false; n];
    for &j in &forest.order {
        let Some(i) = forest.parent[j] else { continue };
        let num = 1.0 + a[j] - a[i];
        let den = 1.0 + a[i] - a[j];
        if num == 0.0 || den == 0.0 {
            return Err(Error::DegenerateEdge {
                i: i.min(j),
                j: i.max(j),
            });
        }
        log_x[j] = log_x[i] + num.abs().ln() - den.abs().ln();
        negative[j] = negative[i] ^ ((num < 0.0) != (den < 0.0));
    }
    for (e, &(i, j, _)) in g.edges().iter().enumerate() {
        if !forest.tree_edge[e] && ((1.0 + a[i] - a[j]) == 0.0 || (1.0 + a[j] - a[i]) == 0.0) {
            return Err(Error::DegenerateEdge { i, j });
        }
    }
    if let Some(bad) = forest.order.iter().copied().find(|&i| negative[i]) {
        let mut path = forest.path_to_root(bad);
        path.reverse();
        return Ok(FieldReport {
            solvable: false,
            x: None,
            violating_cycle: None,
            nonpositive_path: Some(path),
        });
    }
    Ok(FieldReport {
        solvable: true,
        x: Some(log_x.into_iter().map(f64::exp).collect()),
        violating_cycle: None,
        nonpositive_path: None,
    })
}

/// The ratio field always admits `x ∝ a`; returned scaled so that the
/// lowest-index node of each component has `x = 1`.
pub fn check_ratio_metric(g: &WeightedGraph, a: &[f64]) -> Result<FieldReport> {
    let n = g.node_count();
    if a.len() != n {
        return Err(Error::Shape(format!("a has length {}, graph has {n} nodes", a.len())));
    }
    if let Some(i) = a.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Positivity {
            node: i,
            msg: format!("a = {}", a[i]),
        });
    }
    let comp = crate::graph::connected_components(g);
    let mut root_value = vec![None; n];
    let x = (0..n)
        .map(|i| {
            let r = *root_value[comp[i]].get_or_insert(a[i]);
            a[i] / r
        })
        .collect();
    Ok(FieldReport {
        solvable: true,
        x: Some(x),
        violating_cycle: None,
        nonpositive_path: None,
    })
}

/// Largest relative residual of `lhs_ij·x_j = rhs_ij·x_i` over the edges.
pub fn affine_residual(g: &WeightedGraph, a: &[f64], x: &[f64]) -> f64 {
    g.edges()
        .iter()
        .map(|&(i, j, _)| {
            let l = (1.0 + a[i] - a[j]) * x[j];
            let r = (1.0 + a[j] - a[i]) * x[i];
            (l - r).abs() / l.abs().max(r.abs()).max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> WeightedGraph {
        WeightedGraph::unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn tree_is_solvable() {
        let g = WeightedGraph::unit(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        let a = [0.1, 0.4, 0.35, 0.9, 0.2];
        let r = solve_affine_metric(&g, &a).unwrap();
        assert!(r.solvable);
        let x = r.x.unwrap();
        assert_eq!(x[0], 1.0);
        assert!(affine_residual(&g, &a, &x) < 1e-12);
    }

    #[test]
    fn distinct_triangle_is_inconsistent() {
        let r = solve_affine_metric(&triangle(), &[1.0, 2.0, 3.0]).unwrap();
        assert!(!r.solvable);
        assert_eq!(r.violating_cycle, Some(vec![0, 1, 2]));
        let r = solve_affine_metric(&triangle(), &[0.1, 0.3, 0.6]).unwrap();
        assert_eq!(r.violating_cycle, Some(vec![0, 1, 2]));
    }

    #[test]
    fn two_valued_a_is_solvable() {
        let g = WeightedGraph::unit(5, &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 0), (1, 3)])
            .unwrap();
        let a = [0.2, 0.7, 0.2, 0.7, 0.7];
        let r = solve_affine_metric(&g, &a).unwrap();
        assert!(r.solvable);
        assert!(affine_residual(&g, &a, r.x.as_ref().unwrap()) < 1e-12);
    }

    #[test]
    fn degenerate_edge_on_a_tree() {
        let g = WeightedGraph::unit(2, &[(0, 1)]).unwrap();
        assert!(matches!(
            solve_affine_metric(&g, &[0.0, 1.0]),
            Err(Error::DegenerateEdge { i: 0, j: 1 })
        ));
    }

    #[test]
    fn negative_factor_reports_path() {
        let g = WeightedGraph::unit(3, &[(0, 1), (1, 2)]).unwrap();
        // 1 + a_0 − a_1 = −1 flips the sign of x_1.
        let r = solve_affine_metric(&g, &[0.0, 2.0, 2.0]).unwrap();
        assert!(!r.solvable);
        assert_eq!(r.nonpositive_path, Some(vec![0, 1]));
    }

    #[test]
    fn witness_violates_product_form() {
        let g = WeightedGraph::unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let a = [0.1, 0.5, 0.2, 0.8, 0.3];
        let r = solve_affine_metric(&g, &a).unwrap();
        let c = r.violating_cycle.unwrap();
        assert_eq!(c, vec![0, 1, 2, 3, 4]);
        let (l, rr) = cycle_products(&a, &c);
        assert!((l - rr).abs() > CYCLE_TOL * l.abs().max(rr.abs()));
    }

    #[test]
    fn ratio_metric_cases() {
        let r = check_ratio_metric(&triangle(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.x.unwrap(), vec![1.0, 2.0, 3.0]);
        let r = check_ratio_metric(&triangle(), &[1.0; 3]).unwrap();
        assert_eq!(r.x.unwrap(), vec![1.0; 3]);
        assert!(check_ratio_metric(&triangle(), &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn disconnected_components_scale_independently() {
        let g = WeightedGraph::unit(4, &[(0, 1), (2, 3)]).unwrap();
        let r = check_ratio_metric(&g, &[2.0, 4.0, 5.0, 10.0]).unwrap();
        assert_eq!(r.x.unwrap(), vec![1.0, 2.0, 1.0, 2.0]);
        let r = solve_affine_metric(&g, &[0.0, 0.5, 0.0, 0.5]).unwrap();
        let x = r.x.unwrap();
        assert_eq!((x[0], x[2]), (1.0, 1.0));
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn report_text() {
        let r = solve_affine_metric(&triangle(), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.to_string(), "solvable: false\nviolating_cycle: 0 1 2\n");
    }
}
