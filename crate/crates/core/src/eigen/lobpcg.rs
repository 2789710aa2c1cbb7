//! Block LOBPCG for the smallest eigenpairs of a sparse symmetric matrix.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Appends the columns of `cand` to the orthonormal `basis`, projecting out
/// earlier columns twice and dropping numerically dependent ones.
/// Returns the number of columns kept and their positions in `cand`.
fn extend_orthonormal(basis: &mut Vec<Vec<f64>>, cand: &DMatrix<f64>) -> Vec<usize> {
    let mut kept = Vec::new();
    for c in 0..cand.ncols() {
        let mut v: Vec<f64> = cand.column(c).iter().copied().collect();
        let before = norm(&v);
        if before == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in basis.iter() {
                let p = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let after = norm(&v);
        if after <= 1e-10 * before {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= after);
        basis.push(v);
        kept.push(c);
    }
    kept
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn columns_to_matrix(n: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Rayleigh–Ritz on the orthonormal basis `s`: the `b` smallest Ritz pairs.
fn rayleigh_ritz(s: &DMatrix<f64>, as_: &DMatrix<f64>, b: usize) -> (Vec<f64>, DMatrix<f64>) {
    let g = s.transpose() * as_;
    let g = (&g + g.transpose()) * 0.5;
    let eig = g.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    order.truncate(b);
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

/// Returns (eigenvalues, eigenvectors as columns, iterations) for the
/// `want` smallest eigenpairs of `a`, iterating a block of `block` vectors.
pub(super) fn smallest(
    a: &CsrMatrix,
    want: usize,
    block: usize,
    max_iterations: usize,
    tolerance: f64,
    seed: u64,
) -> Result<(Vec<f64>, DMatrix<f64>, usize)> {
    let n = a.nrows();
    let block = block.max(want).min(n / 3);
    // Gershgorin bound on ‖A‖₂ sets the residual scale.
    let a_norm = (0..n)
        .map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let threshold = tolerance * a_norm;
    let precond: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = DMatrix::from_fn(n, block, |_, _| StandardNormal.sample(&mut rng));
    let mut basis = Vec::with_capacity(block);
    extend_orthonormal(&mut basis, &start);
    let s = columns_to_matrix(n, &basis);
    let as_ = a.mul_dense(&s);
    let (mut theta, c) = rayleigh_ritz(&s, &as_, block);
    let mut x = &s * &c;
    let mut ax = &as_ * &c;
    let mut p: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
    let mut residuals = vec![f64::INFINITY; block];

    for it in 0..max_iterations {
        let mut r = ax.clone();
        for k in 0..x.ncols() {
            let t = theta[k];
            r.column_mut(k).axpy(-t, &x.column(k), 1.0);
            residuals[k] = r.column(k).norm();
        }
        if residuals[..want].iter().all(|&res| res <= threshold) {
            return Ok((theta[..want].to_vec(), x.columns(0, want).into_owned(), it));
        }
        let active: Vec<usize> = (0..x.ncols()).filter(|&k| residuals[k] > threshold).collect();
        let mut w = DMatrix::zeros(n, active.len());
        for (c, &k) in active.iter().enumerate() {
            for i in 0..n {
                w[(i, c)] = precond[i] * r[(i, k)];
            }
        }

        // Basis [X | W | P] with X first, so P's share of the new Ritz
        // vectors is read off the trailing coefficients.
        let mut cols: Vec<Vec<f64>> = (0..x.ncols())
            .map(|k| x.column(k).iter().copied().collect())
            .collect();
        // Re-orthonormalize X itself to stop drift.
        let xm = columns_to_matrix(n, &cols);
        cols.clear();
        extend_orthonormal(&mut cols, &xm);
        let nx = cols.len();
        extend_orthonormal(&mut cols, &w);
        if let Some((pm, _)) = &p {
            extend_orthonormal(&mut cols, pm);
        }
        let s = columns_to_matrix(n, &cols);
        let as_ = a.mul_dense(&s);
        let (t_new, c) = rayleigh_ritz(&s, &as_, block.min(s.ncols()));
        let x_new = &s * &c;
        let ax_new = &as_ * &c;
        let tail = s.ncols() - nx;
        if tail > 0 {
            let ct = c.rows(nx, tail);
            let pm = s.columns(nx, tail) * ct;
            let apm = as_.columns(nx, tail) * ct;
            p = Some((pm, apm));
        } else {
            p = None;
        }
        x = x_new;
        ax = ax_new;
        theta = t_new;
    }

    let worst = residuals[..want].iter().cloned().fold(0.0, f64::max) / a_norm;
    Err(Error::Convergence {
        iterations: max_iterations,
        worst_residual: worst,
        residuals: residuals[..want].iter().map(|r| r / a_norm).collect(),
    })
}
