//! Operator matrices for the generalized eigenproblem `T u = λ D u`.
//!
//! Every builder returns the operator `T` together with the diagonal metric
//! `X` in which it is self-adjoint and the degree diagonal `D` of the
//! unmodified graph:
//!
//! | kind | `T` | `X` |
//! |------|-----|-----|
//! | LE | `L = D − W` | `I` |
//! | SE | `L + α·diag(V)`, `α = α̂·tr(L)/tr(V)` | `I` |
//! | TA | `L·(I + β·diag(μ))` | `I + β·diag(μ)` |
//! | TG | `Σ_j [(1 − v̄_ij) y_i − (1 + v̄_ij) y_j] w_ij`, `v̄_ij = (a_j − a_i)/(a_j + a_i)` | `diag(a)` |
//! | TE | `diag(a_i Σ_j w^r_ij) − W^r·diag(a)`, `w^r_ij = w_ij·2r_ij/(a_i + a_j)` | `diag(a)` |
//!
//! `X·T` is symmetric for all of them and `yᵀ·X·T·y ≥ 0`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::graph::{degree_diag, laplacian, EdgeFunction, Parity, WeightedGraph};
use crate::sparse::CsrMatrix;

/// Relative tolerance on `‖X·T − (X·T)ᵀ‖_max / ‖X·T‖_max`.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OperatorKind {
    Le,
    Se,
    Ta,
    Tg,
    Te,
}

/// Symmetric per-edge weight modifier `r`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightModifier {
    /// `r ≡ 1`.
    Uniform,
    /// Explicit `(i, j, r_ij)` entries; edges not listed keep `r = 1`.
    Entries(Vec<(usize, usize, f64)>),
    /// `big` inside a known class, `small` across two different known
    /// classes, and 1 when either endpoint is unknown.
    KnownClasses {
        classes: Vec<Option<Label>>,
        small: f64,
        big: f64,
    },
}

impl WeightModifier {
    /// Resolves to a symmetric edge function on `g`.
    pub fn resolve(&self, g: &WeightedGraph) -> Result<EdgeFunction> {
        let r = match self {
            WeightModifier::Uniform => EdgeFunction::constant(g, Parity::Symmetric, 1.0),
            WeightModifier::Entries(e) => EdgeFunction::from_entries(g, Parity::Symmetric, e, 1.0)?,
            WeightModifier::KnownClasses {
                classes,
                small,
                big,
            } => {
                if classes.len() != g.node_count() {
                    return Err(Error::Shape(format!(
                        "{} class entries for {} nodes",
                        classes.len(),
                        g.node_count()
                    )));
                }
                let values = g
                    .edges()
                    .iter()
                    .map(|&(i, j, _)| match (classes[i], classes[j]) {
                        (Some(ci), Some(cj)) if ci == cj => *big,
                        (Some(_), Some(_)) => *small,
                        _ => 1.0,
                    })
                    .collect();
                EdgeFunction::new(g, Parity::Symmetric, values)?
            }
        };
        if let Some(e) = r.values().iter().position(|v| !(*v > 0.0)) {
            let (i, _, _) = g.edges()[e];
            return Err(Error::Positivity {
                node: i,
                msg: format!("weight modifier r = {} on edge {e}", r.values()[e]),
            });
        }
        Ok(r)
    }
}

/// Per-node and per-edge parameters encoding the semi-supervision.
///
/// Vectors left as `None` take their neutral default: `a ≡ 1`, `μ ≡ 0`,
/// `V ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisionParams {
    pub a: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub potential: Option<Vec<f64>>,
    pub r: WeightModifier,
    pub beta: f64,
    pub alpha_hat: f64,
}

impl Default for SupervisionParams {
    fn default() -> Self {
        Self {
            a: None,
            mu: None,
            potential: None,
            r: WeightModifier::Uniform,
            beta: 0.0,
            alpha_hat: 0.0,
        }
    }
}

/// Knobs for turning known class memberships into [`SupervisionParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnownClassSettings {
    pub beta: f64,
    pub alpha_hat: f64,
    /// Measure modifier per known class; classes not listed get `beta`.
    pub a_values: BTreeMap<Label, f64>,
    pub r_small: f64,
    pub r_big: f64,
}

impl Default for KnownClassSettings {
    fn default() -> Self {
        Self {
            beta: 20.0,
            alpha_hat: 1e4,
            a_values: BTreeMap::new(),
            r_small: 0.9,
            r_big: 1e4,
        }
    }
}

impl SupervisionParams {
    /// Indicator supervision from per-node known classes: `μ_i = V_i = 1`
    /// on known nodes, `a_i` from the per-class table (default `β`) on
    /// known nodes and 1 elsewhere, and `r` from class agreement.
    pub fn from_known(known: &[Option<Label>], s: &KnownClassSettings) -> Self {
        let indicator: Vec<f64> = known.iter().map(|k| f64::from(u8::from(k.is_some()))).collect();
        let a = known
            .iter()
            .map(|k| match k {
                Some(c) => s.a_values.get(c).copied().unwrap_or(s.beta),
                None => 1.0,
            })
            .collect();
        Self {
            a: Some(a),
            mu: Some(indicator.clone()),
            potential: Some(indicator),
            r: WeightModifier::KnownClasses {
                classes: known.to_vec(),
                small: s.r_small,
                big: s.r_big,
            },
            beta: s.beta,
            alpha_hat: s.alpha_hat,
        }
    }

    fn node_vector(v: &Option<Vec<f64>>, n: usize, default: f64, name: &str) -> Result<Vec<f64>> {
        match v {
            None => Ok(vec![default; n]),
            Some(v) if v.len() == n => Ok(v.clone()),
            Some(v) => Err(Error::Shape(format!("{name} has length {}, graph has {n} nodes", v.len()))),
        }
    }

    fn measure(&self, n: usize) -> Result<Vec<f64>> {
        let a = Self::node_vector(&self.a, n, 1.0, "a")?;
        if let Some(i) = a.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Positivity {
                node: i,
                msg: format!("measure modifier a = {}", a[i]),
            });
        }
        Ok(a)
    }
}

/// An operator with its metric and degree diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub t: CsrMatrix,
    /// Diagonal of `X`.
    pub metric: Vec<f64>,
    /// Diagonal of `D`.
    pub degree: Vec<f64>,
}

impl OperatorMatrix {
    pub fn n(&self) -> usize {
        self.t.nrows()
    }

    /// `X·T`.
    pub fn metric_weighted(&self) -> CsrMatrix {
        self.t.scale(Some(&self.metric), None)
    }

    /// `‖X·T − (X·T)ᵀ‖_max / ‖X·T‖_max` (0 for the zero matrix).
    pub fn relative_asymmetry(&self) -> f64 {
        let q = self.metric_weighted();
        let scale = q.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            q.asymmetry() / scale
        }
    }

    /// The symmetric-definite pencil `(sym(X·T), X·D)`; fails when the
    /// asymmetry of `X·T` exceeds [`SYMMETRY_TOL`].
    pub fn symmetric_pencil(&self) -> Result<(CsrMatrix, Vec<f64>)> {
        let asym = self.relative_asymmetry();
        if asym > SYMMETRY_TOL {
            return Err(Error::Asymmetric {
                asymmetry: asym,
                tolerance: SYMMETRY_TOL,
            });
        }
        let mass = self
            .metric
            .iter()
            .zip(&self.degree)
            .map(|(x, d)| x * d)
            .collect();
        Ok((self.metric_weighted().symmetric_part(), mass))
    }

    /// Writes `<prefix>.T.txt` (`i j value`), `<prefix>.X.txt` and
    /// `<prefix>.D.txt` (`i value`).
    pub fn dump(&self, dir: impl AsRef<Path>, prefix: &str) -> Result<()> {
        let dir = dir.as_ref();
        let write = |name: String, text: String| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))
        };
        let mut t = String::new();
        for (i, j, v) in self.t.triplets() {
            writeln!(t, "{i} {j} {v}").unwrap();
        }
        write(format!("{prefix}.T.txt"), t)?;
        let diag = |d: &[f64]| {
            d.iter()
                .enumerate()
                .fold(String::new(), |mut s, (i, v)| {
                    writeln!(s, "{i} {v}").unwrap();
                    s
                })
        };
        write(format!("{prefix}.X.txt"), diag(&self.metric))?;
        write(format!("{prefix}.D.txt"), diag(&self.degree))
    }
}

/// Laplacian eigenmaps: `T = L`, `X = I`.
pub fn build_le(g: &WeightedGraph) -> OperatorMatrix {
    OperatorMatrix {
        kind: OperatorKind::Le,
        t: laplacian(g),
        metric: vec![1.0; g.node_count()],
        degree: degree_diag(g),
    }
}

/// Schroedinger eigenmaps: `T = L + α·diag(V)` with `α = α̂·tr(L)/tr(V)`.
pub fn build_se(g: &WeightedGraph, params: &SupervisionParams) -> Result<OperatorMatrix> {
    let n = g.node_count();
    let mut op = build_le(g);
    op.kind = OperatorKind::Se;
    if !(params.alpha_hat >= 0.0) || !params.alpha_hat.is_finite() {
        return Err(Error::Parameter(format!(
            "alpha_hat must be >= 0, got {}",
            params.alpha_hat
        )));
    }
    let v = SupervisionParams::node_vector(&params.potential, n, 0.0, "potential")?;
    if let Some(i) = v.iter().position(|x| !(*x >= 0.0)) {
        return Err(Error::Positivity {
            node: i,
            msg: format!("potential V = {}", v[i]),
        });
    }
    if params.alpha_hat == 0.0 {
        return Ok(op);
    }
    let tr_v: f64 = v.iter().sum();
    if tr_v == 0.0 {
        return Err(Error::Division(
            "tr(V) = 0 with alpha_hat > 0; the potential must be non-zero somewhere".into(),
        ));
    }
    let tr_l: f64 = op.degree.iter().sum();
    let alpha = params.alpha_hat * tr_l / tr_v;
    let scaled: Vec<f64> = v.iter().map(|x| alpha * x).collect();
    op.t = op.t.add_scaled(1.0, &CsrMatrix::from_diagonal(&scaled), 1.0);
    Ok(op)
}

/// Transport by advection: `T = L·(I + β·diag(μ))`, `X = I + β·diag(μ)`.
pub fn build_ta(g: &WeightedGraph, params: &SupervisionParams) -> Result<OperatorMatrix> {
    let n = g.node_count();
    let mu = SupervisionParams::node_vector(&params.mu, n, 0.0, "mu")?;
    let a: Vec<f64> = mu.iter().map(|m| 1.0 + params.beta * m).collect();
    if let Some(i) = a.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Positivity {
            node: i,
            msg: format!("1 + beta*mu = {} (beta = {}, mu = {})", a[i], params.beta, mu[i]),
        });
    }
    Ok(OperatorMatrix {
        kind: OperatorKind::Ta,
        t: laplacian(g).scale(None, Some(&a)),
        metric: a,
        degree: degree_diag(g),
    })
}

/// Transport by gradient flow, from the velocity form
/// `(T y)_i = Σ_j [(1 − v̄_ij) y_i − (1 + v̄_ij) y_j] w_ij`.
pub fn build_tg(g: &WeightedGraph, params: &SupervisionParams) -> Result<OperatorMatrix> {
    let n = g.node_count();
    let a = params.measure(n)?;
    let mut trip = Vec::with_capacity(n + 2 * g.edge_count());
    for i in 0..n {
        let mut diag = 0.0;
        for (j, w) in g.neighbors(i) {
            let vbar = (a[j] - a[i]) / (a[j] + a[i]);
            diag += (1.0 - vbar) * w;
            trip.push((i, j, -(1.0 + vbar) * w));
        }
        trip.push((i, i, diag));
    }
    Ok(OperatorMatrix {
        kind: OperatorKind::Tg,
        t: CsrMatrix::from_triplets(n, n, &trip),
        metric: a,
        degree: degree_diag(g),
    })
}

/// General transport: `T = diag(a_i Σ_j w^r_ij) − W^r·diag(a)` with
/// `w^r_ij = w_ij·2r_ij/(a_i + a_j)`.
pub fn build_te(g: &WeightedGraph, params: &SupervisionParams) -> Result<OperatorMatrix> {
    let n = g.node_count();
    let a = params.measure(n)?;
    let r = params.r.resolve(g)?;
    let mut trip = Vec::with_capacity(n + 2 * g.edge_count());
    for i in 0..n {
        let mut row_sum = 0.0;
        for (j, w) in g.neighbors(i) {
            let e = g.edge_index(i, j).unwrap();
            let wr = w * (2.0 * r.values()[e] / (a[i] + a[j]));
            row_sum += wr;
            trip.push((i, j, -wr * a[j]));
        }
        trip.push((i, i, a[i] * row_sum));
    }
    Ok(OperatorMatrix {
        kind: OperatorKind::Te,
        t: CsrMatrix::from_triplets(n, n, &trip),
        metric: a,
        degree: degree_diag(g),
    })
}

fn check_len(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::Shape(format!("vector of length {} for {n} nodes", y.len())));
    }
    Ok(())
}

/// The term `−(β/2)·Σ_j (y_j² − y_i²)·w_ij` of the nonlinear transport.
pub fn nonlinear_quadratic_term(g: &WeightedGraph, y: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_len(y, g.node_count())?;
    Ok((0..g.node_count())
        .map(|i| {
            let s: f64 = g.neighbors(i).map(|(j, w)| (y[j] * y[j] - y[i] * y[i]) * w).sum();
            -0.5 * beta * s
        })
        .collect())
}

/// Transport with the velocity field `β·∇y`, which is quadratic in `y`:
/// `(T y)_i = Σ_j (y_i − y_j)·w_ij − (β/2)·Σ_j (y_j² − y_i²)·w_ij`.
pub fn eval_nonlinear_transport(g: &WeightedGraph, y: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_len(y, g.node_count())?;
    let ly = laplacian(g).matvec(y);
    if beta == 0.0 {
        return Ok(ly);
    }
    let q = nonlinear_quadratic_term(g, y, beta)?;
    Ok(ly.iter().zip(&q).map(|(l, q)| l + q).collect())
}

/// `yᵀ·X·T·y`.
pub fn metric_quadratic_form(op: &OperatorMatrix, y: &[f64]) -> Result<f64> {
    check_len(y, op.n())?;
    let ty = op.t.matvec(y);
    Ok(y.iter()
        .zip(&op.metric)
        .zip(&ty)
        .map(|((y, x), t)| y * x * t)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn p3() -> WeightedGraph {
        WeightedGraph::unit(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn dense(rows: &[[f64; 3]; 3]) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &rows.concat())
    }

    fn with_a(a: &[f64]) -> SupervisionParams {
        SupervisionParams {
            a: Some(a.to_vec()),
            ..Default::default()
        }
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn le_on_p3() {
        let op = build_le(&p3());
        assert_eq!(
            op.t.to_dense(),
            dense(&[[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
        );
        assert_eq!(op.metric, vec![1.0; 3]);
        assert_eq!(op.t.matvec(&[1.0; 3]), vec![0.0; 3]);
    }

    #[test]
    fn se_potential() {
        let g = p3();
        let p = SupervisionParams {
            potential: Some(vec![1.0, 0.0, 0.0]),
            alpha_hat: 1.0,
            ..Default::default()
        };
        let op = build_se(&g, &p).unwrap();
        // tr(L) = 4, tr(V) = 1, so α = 4.
        assert_eq!(
            op.t.to_dense(),
            dense(&[[5.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
        );
        let zero = SupervisionParams { alpha_hat: 0.0, ..p };
        assert_eq!(build_se(&g, &zero).unwrap().t, build_le(&g).t);
    }

    #[test]
    fn se_needs_nonzero_potential() {
        let p = SupervisionParams {
            alpha_hat: 1e4,
            ..Default::default()
        };
        assert!(matches!(build_se(&p3(), &p), Err(Error::Division(_))));
    }

    #[test]
    fn ta_on_p3() {
        let p = SupervisionParams {
            mu: Some(vec![1.0, 0.0, 0.0]),
            beta: 1.0,
            ..Default::default()
        };
        let op = build_ta(&p3(), &p).unwrap();
        assert_eq!(
            op.t.to_dense(),
            dense(&[[2.0, -1.0, 0.0], [-2.0, 2.0, -1.0], [0.0, -1.0, 1.0]])
        );
        assert_eq!(op.metric, vec![2.0, 1.0, 1.0]);
        assert_eq!(op.t.matvec(&[0.5, 1.0, 1.0]), vec![0.0; 3]);
    }

    #[test]
    fn ta_positivity() {
        let p = SupervisionParams {
            mu: Some(vec![0.0, 1.0, 0.0]),
            beta: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            build_ta(&p3(), &p),
            Err(Error::Positivity { node: 1, .. })
        ));
    }

    #[test]
    fn tg_on_p3() {
        let op = build_tg(&p3(), &with_a(&[2.0, 1.0, 1.0])).unwrap();
        let expected = dense(&[
            [4.0 / 3.0, -2.0 / 3.0, 0.0],
            [-4.0 / 3.0, 5.0 / 3.0, -1.0],
            [0.0, -1.0, 1.0],
        ]);
        assert!(close(&op.t.to_dense(), &expected, 1e-15));
        assert!(op.t.matvec(&[0.5, 1.0, 1.0]).iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(
            build_tg(&p3(), &with_a(&[1.0, 0.0, 1.0])),
            Err(Error::Positivity { node: 1, .. })
        ));
    }

    #[test]
    fn tg_matches_velocity_matrix_form() {
        // L − (D_v + W_v) with v_ij = (a_j − a_i)/(a_j + a_i).
        let g = WeightedGraph::new(4, [(0, 1, 0.5), (1, 2, 1.5), (0, 2, 0.25), (2, 3, 2.0)]).unwrap();
        let a = [3.0, 1.0, 0.5, 2.0];
        let n = 4;
        let mut wv = DMatrix::zeros(n, n);
        for &(i, j, w) in g.edges() {
            wv[(i, j)] = w * (a[j] - a[i]) / (a[j] + a[i]);
            wv[(j, i)] = w * (a[i] - a[j]) / (a[i] + a[j]);
        }
        let dv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            (0..n).map(|i| wv.row(i).sum()),
        ));
        let expected = laplacian(&g).to_dense() - (dv + wv);
        let op = build_tg(&g, &with_a(&a)).unwrap();
        assert!(close(&op.t.to_dense(), &expected, 1e-14));
    }

    #[test]
    fn te_reductions() {
        let g = p3();
        assert_eq!(build_te(&g, &SupervisionParams::default()).unwrap().t, build_le(&g).t);
        let p = with_a(&[2.0, 1.0, 1.0]);
        let te = build_te(&g, &p).unwrap();
        let tg = build_tg(&g, &p).unwrap();
        assert!(close(&te.t.to_dense(), &tg.t.to_dense(), 1e-15));
    }

    #[test]
    fn te_with_advection_r_is_ta() {
        let g = WeightedGraph::new(4, [(0, 1, 0.5), (1, 2, 1.5), (0, 2, 0.25), (2, 3, 2.0)]).unwrap();
        let mu = [1.0, 0.0, 0.0, 1.0];
        let beta = 3.0;
        let a: Vec<f64> = mu.iter().map(|m| 1.0 + beta * m).collect();
        let r = g
            .edges()
            .iter()
            .map(|&(i, j, _)| (i, j, (a[i] + a[j]) / 2.0))
            .collect();
        let te = build_te(
            &g,
            &SupervisionParams {
                a: Some(a),
                r: WeightModifier::Entries(r),
                ..Default::default()
            },
        )
        .unwrap();
        let ta = build_ta(
            &g,
            &SupervisionParams {
                mu: Some(mu.to_vec()),
                beta,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(close(&te.t.to_dense(), &ta.t.to_dense(), 1e-14));
        assert_eq!(te.metric, ta.metric);
    }

    #[test]
    fn te_weight_modifier_domain() {
        let p = SupervisionParams {
            r: WeightModifier::Entries(vec![(0, 2, 2.0)]),
            ..Default::default()
        };
        assert!(matches!(build_te(&p3(), &p), Err(Error::EdgeDomain { .. })));
        let p = SupervisionParams {
            r: WeightModifier::Entries(vec![(0, 1, -2.0)]),
            ..Default::default()
        };
        assert!(matches!(build_te(&p3(), &p), Err(Error::Positivity { .. })));
    }

    #[test]
    fn known_class_r_policy() {
        let g = WeightedGraph::unit(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = WeightModifier::KnownClasses {
            classes: vec![Some(1), Some(1), Some(2), None],
            small: 0.9,
            big: 1e4,
        }
        .resolve(&g)
        .unwrap();
        assert_eq!(r.values(), &[1e4, 0.9, 1.0]);
    }

    #[test]
    fn from_known_defaults() {
        let s = KnownClassSettings {
            beta: 20.0,
            a_values: [(3, 0.5)].into_iter().collect(),
            ..Default::default()
        };
        let p = SupervisionParams::from_known(&[Some(11), None, Some(3)], &s);
        assert_eq!(p.a.unwrap(), vec![20.0, 1.0, 0.5]);
        assert_eq!(p.mu.unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(p.potential.unwrap(), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn nonlinear_transport_cases() {
        let g = p3();
        assert_eq!(eval_nonlinear_transport(&g, &[2.0; 3], 5.0).unwrap(), vec![0.0; 3]);
        assert_eq!(
            eval_nonlinear_transport(&g, &[1.0, 0.0, 0.0], 2.0).unwrap(),
            vec![2.0, -2.0, 0.0]
        );
        let y = [0.3, -1.2, 0.7];
        assert_eq!(
            eval_nonlinear_transport(&g, &y, 0.0).unwrap(),
            laplacian(&g).matvec(&y)
        );
        assert!(matches!(
            eval_nonlinear_transport(&g, &[1.0], 1.0),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn quadratic_form_kernel_and_le() {
        let g = p3();
        let op = build_tg(&g, &with_a(&[2.0, 1.0, 1.0])).unwrap();
        assert!(metric_quadratic_form(&op, &[0.5, 1.0, 1.0]).unwrap().abs() < 1e-15);
        let le = build_le(&g);
        let y = [1.0, 3.0, -2.0];
        // (1/2)·Σ_{i,j} (y_i − y_j)² w_ij counts each edge twice.
        let expected = (1.0f64 - 3.0).powi(2) + (3.0f64 + 2.0).powi(2);
        assert_eq!(metric_quadratic_form(&le, &y).unwrap(), expected);
    }

    #[test]
    fn pencil_rejects_asymmetric_operator() {
        let mut op = build_le(&p3());
        op.metric = vec![2.0, 1.0, 1.0];
        assert!(matches!(op.symmetric_pencil(), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn dump_writes_three_files() {
        let dir = tempfile::tempdir().unwrap();
        let op = build_tg(&p3(), &with_a(&[2.0, 1.0, 1.0])).unwrap();
        op.dump(dir.path(), "tg").unwrap();
        let t = fs::read_to_string(dir.path().join("tg.T.txt")).unwrap();
        assert_eq!(t.lines().count(), op.t.nnz());
        assert!(t.starts_with("0 0 1.3333333333333333\n"));
        let x = fs::read_to_string(dir.path().join("tg.X.txt")).unwrap();
        assert_eq!(x, "0 2\n1 1\n2 1\n");
    }
}
