//! Smallest eigenpairs of the symmetric-definite pencil `(X·T, X·D)`.
//!
//! With `M = X·D` (a positive diagonal) the pencil is reduced to the
//! standard problem `A y = λ y`, `A = M^{-1/2}·sym(X·T)·M^{-1/2}`, and
//! eigenvectors are mapped back as `u = M^{-1/2}·y`. Since `X` and `D` are
//! diagonal, `u` then solves `T u = λ D u` and is unit in the `X·D` norm.
//!
//! Up to [`EigenOptions::dense_limit`] nodes the reduced matrix is
//! diagonalized densely. Larger problems use LOBPCG with a Jacobi
//! preconditioner on the reduced matrix.

mod lobpcg;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operators::OperatorMatrix;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    /// Largest n solved with a dense symmetric eigendecomposition.
    pub dense_limit: usize,
    /// Extra block vectors beyond the m+1 wanted ones (iterative path).
    pub extra_block: usize,
    /// Iteration budget of the iterative path; `None` uses
    /// `max(10·(m+1), 500)`.
    pub max_iterations: Option<usize>,
    /// Convergence threshold on `‖A y − θ y‖` relative to a norm bound of A.
    pub tolerance: f64,
    /// Seed for the random starting block.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_limit: 3000,
            extra_block: 8,
            max_iterations: None,
            tolerance: 1e-11,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// n × (m+1), column k pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    /// `‖T u − λ D u‖ / ((‖T‖_∞ + |λ|·‖D‖_∞)·‖u‖)` per pair.
    pub residuals: Vec<f64>,
    /// Iterations used by the iterative path (0 for dense).
    pub iterations: usize,
}

impl EigenResult {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }
}

fn check_connected(t: &CsrMatrix) -> Result<()> {
    let n = t.nrows();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for (j, v) in t.row(i) {
            if j != i && v != 0.0 && !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    if count < n {
        let mut comps = 1;
        // Count the rest for the message.
        for s in 0..n {
            if seen[s] {
                continue;
            }
            comps += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(i) = stack.pop() {
                for (j, v) in t.row(i) {
                    if j != i && v != 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        return Err(Error::Disconnected { components: comps });
    }
    Ok(())
}

/// Flips the sign so that the first entry of largest magnitude is positive.
pub(crate) fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// The `m + 1` smallest generalized eigenpairs of `T u = λ D u`.
pub fn smallest_pairs(op: &OperatorMatrix, m: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = op.n();
    let want = m + 1;
    if want > n {
        return Err(Error::Parameter(format!(
            "{want} eigenpairs requested from a problem of size {n}"
        )));
    }
    if let Some(i) = op.degree.iter().position(|d| !(*d > 0.0)) {
        return Err(Error::Definiteness {
            node: i,
            value: op.degree[i],
        });
    }
    check_connected(&op.t)?;
    let (sym, mass) = op.symmetric_pencil()?;
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let reduced = sym.scale(Some(&inv_sqrt), Some(&inv_sqrt));

    let block = want + opts.extra_block;
    let (values, mut vectors, iterations) = if n <= opts.dense_limit || 3 * block >= n {
        let (v, y) = dense_smallest(&reduced, want);
        (v, y, 0)
    } else {
        let budget = opts.max_iterations.unwrap_or((10 * want).max(500));
        lobpcg::smallest(&reduced, want, block, budget, opts.tolerance, opts.seed)?
    };

    for k in 0..want {
        let mut col: Vec<f64> = vectors
            .column(k)
            .iter()
            .zip(&inv_sqrt)
            .map(|(y, s)| y * s)
            .collect();
        // Unit X·D norm.
        let norm = col
            .iter()
            .zip(&mass)
            .map(|(u, m)| u * u * m)
            .sum::<f64>()
            .sqrt();
        col.iter_mut().for_each(|u| *u /= norm);
        fix_sign(&mut col);
        vectors.column_mut(k).copy_from_slice(&col);
    }
    let residuals = pencil_residuals(op, &values, &vectors);
    Ok(EigenResult {
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
        iterations,
    })
}

fn dense_smallest(reduced: &CsrMatrix, want: usize) -> (Vec<f64>, DMatrix<f64>) {
    let eig = reduced.to_dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    order.truncate(want);
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// Scaled residual of each pair against the original operator.
pub fn pencil_residuals(op: &OperatorMatrix, values: &[f64], vectors: &DMatrix<f64>) -> Vec<f64> {
    let t_norm = (0..op.n())
        .map(|i| op.t.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let d_norm = op.degree.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    values
        .iter()
        .enumerate()
        .map(|(k, &lam)| {
            let u: Vec<f64> = vectors.column(k).iter().copied().collect();
            let tu = op.t.matvec(&u);
            let r = tu
                .iter()
                .zip(&u)
                .zip(&op.degree)
                .map(|((t, u), d)| (t - lam * d * u).powi(2))
                .sum::<f64>()
                .sqrt();
            let unorm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            r / ((t_norm + lam.abs() * d_norm) * unorm)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;
    use crate::operators::{build_le, build_tg, SupervisionParams};

    fn p3() -> WeightedGraph {
        WeightedGraph::unit(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn le_spectrum_of_p3() {
        let r = smallest_pairs(&build_le(&p3()), 2, &EigenOptions::default()).unwrap();
        for (got, want) in r.eigenvalues.iter().zip([0.0, 1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(r.residuals.iter().all(|&x| x < 1e-12));
        // λ = 1 eigenvector of (L, D) is ∝ (1, 0, −1).
        let u = r.vector(1);
        assert!(u[1].abs() < 1e-12 && (u[0] + u[2]).abs() < 1e-12);
        assert!(u[0] > 0.0);
    }

    #[test]
    fn tg_kernel_vector() {
        let p = SupervisionParams {
            a: Some(vec![2.0, 1.0, 1.0]),
            ..Default::default()
        };
        let op = build_tg(&p3(), &p).unwrap();
        let r = smallest_pairs(&op, 1, &EigenOptions::default()).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-12);
        let u = r.vector(0);
        assert!((u[0] / u[1] - 0.5).abs() < 1e-12);
        assert!((u[2] / u[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_xd_norm_and_sign() {
        let op = build_le(&p3());
        let r = smallest_pairs(&op, 2, &EigenOptions::default()).unwrap();
        for k in 0..3 {
            let u = r.vector(k);
            let norm: f64 = u.iter().zip(&op.degree).map(|(u, d)| u * u * d).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            let big = u.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn too_many_pairs() {
        assert!(matches!(
            smallest_pairs(&build_le(&p3()), 3, &EigenOptions::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn zero_degree_is_not_definite() {
        let g = WeightedGraph::unit(3, &[(0, 1)]).unwrap();
        assert!(matches!(
            smallest_pairs(&build_le(&g), 1, &EigenOptions::default()),
            Err(Error::Definiteness { node: 2, .. })
        ));
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = WeightedGraph::unit(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            smallest_pairs(&build_le(&g), 1, &EigenOptions::default()),
            Err(Error::Disconnected { components: 2 })
        ));
    }
}
