//! The operator family on a three-node path, printed as dense matrices,
//! together with the checks that make them usable for embedding: `X·T` is
//! symmetric and `T (1/a) = 0`.
//!
//!     cargo run --example operators

use transport_eigenmaps::graph::WeightedGraph;
use transport_eigenmaps::operators::*;

fn show(op: &OperatorMatrix) {
    println!("{:?}  metric = {:?}", op.kind, op.metric);
    for i in 0..op.n() {
        let row: Vec<String> = (0..op.n()).map(|j| format!("{:8.4}", op.t.get(i, j))).collect();
        println!("  [{}]", row.join(" "));
    }
    println!("  relative asymmetry of X·T: {:.1e}", op.relative_asymmetry());
}

fn main() -> transport_eigenmaps::Result<()> {
    let g = WeightedGraph::unit(3, &[(0, 1), (1, 2)])?;
    let params = SupervisionParams {
        a: Some(vec![2.0, 1.0, 1.0]),
        mu: Some(vec![1.0, 0.0, 0.0]),
        potential: Some(vec![1.0, 0.0, 0.0]),
        r: WeightModifier::Entries(vec![(0, 1, 3.0)]),
        beta: 1.0,
        alpha_hat: 1.0,
    };
    for op in [
        build_le(&g),
        build_se(&g, &params)?,
        build_ta(&g, &params)?,
        build_tg(&g, &params)?,
        build_te(&g, &params)?,
    ] {
        show(&op);
        if op.kind != OperatorKind::Se {
            let kernel: Vec<f64> = op.metric.iter().map(|a| 1.0 / a).collect();
            println!("  T·(1/a) = {:?}", op.t.matvec(&kernel));
        }
        let y = [1.0, -0.5, 2.0];
        println!("  yᵀ X T y at y = {y:?}: {:.4}", metric_quadratic_form(&op, &y)?);
    }

    // The nonlinear transport reduces to TA to first order around y.
    let y = [1.0, 0.0, 0.0];
    println!("nonlinear transport at y = {y:?}, beta = 2: {:?}", eval_nonlinear_transport(&g, &y, 2.0)?);
    Ok(())
}
