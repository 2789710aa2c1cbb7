//! Dense and iterative solves of the same pencil side by side.
//!
//!     cargo run --release --example eigensolver

use std::time::Instant;

use transport_eigenmaps::data::{make_toy_clusters, ToyConfig};
use transport_eigenmaps::eigen::{smallest_pairs, EigenOptions};
use transport_eigenmaps::operators::{build_tg, SupervisionParams};
use transport_eigenmaps::pipeline::{build_graph, EmbedConfig, Method};

fn main() -> transport_eigenmaps::Result<()> {
    let pc = make_toy_clusters(&ToyConfig {
        n_per_cluster: 160,
        ..ToyConfig::default()
    })?;
    let (g, _) = build_graph(
        &pc,
        &EmbedConfig {
            k: 30,
            ..EmbedConfig::new(Method::Tg)
        },
    )?;
    let a = pc.labels().unwrap().iter().map(|&l| if l == 0 { 10.0 } else { 1.0 }).collect();
    let op = build_tg(
        &g,
        &SupervisionParams {
            a: Some(a),
            ..Default::default()
        },
    )?;
    let m = 8;
    for (name, dense_limit) in [("dense", usize::MAX), ("lobpcg", 0)] {
        let opts = EigenOptions {
            dense_limit,
            ..EigenOptions::default()
        };
        let start = Instant::now();
        let r = smallest_pairs(&op, m, &opts)?;
        let worst = r.residuals.iter().fold(0.0f64, |a, b| a.max(*b));
        println!(
            "{name:>6}: {:.2?}, {} iterations, max residual {worst:.1e}",
            start.elapsed(),
            r.iterations
        );
        let vals: Vec<String> = r.eigenvalues.iter().map(|v| format!("{v:.6}")).collect();
        println!("        {}", vals.join(" "));
    }
    Ok(())
}
