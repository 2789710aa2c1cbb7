//! When does a velocity field admit a metric? The affine field
//! `v̄_ij = a_j − a_i` needs balanced products around every cycle; the
//! ratio field always works with `x = a`.
//!
//!     cargo run --example fieldcheck

use transport_eigenmaps::fieldcheck::{affine_residual, check_ratio_metric, solve_affine_metric};
use transport_eigenmaps::graph::WeightedGraph;

fn main() -> transport_eigenmaps::Result<()> {
    let path = WeightedGraph::unit(3, &[(0, 1), (1, 2)])?;
    let triangle = WeightedGraph::unit(3, &[(0, 1), (1, 2), (0, 2)])?;
    let cases = [
        ("path, distinct a", &path, vec![0.1, 0.6, 0.3]),
        ("triangle, distinct a", &triangle, vec![0.1, 0.6, 0.3]),
        ("triangle, two values", &triangle, vec![0.1, 0.6, 0.6]),
    ];
    for (name, g, a) in cases {
        let report = solve_affine_metric(g, &a)?;
        println!("== {name}, a = {a:?}");
        print!("{report}");
        if let Some(x) = &report.x {
            println!("max edge residual: {:.1e}", affine_residual(g, &a, x));
        }
    }
    println!("== ratio field on the triangle");
    print!("{}", check_ratio_metric(&triangle, &[0.1, 0.6, 0.3])?);
    Ok(())
}
