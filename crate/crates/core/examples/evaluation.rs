//! Metrics on a hand-made confusion matrix, then the 1-NN protocol on two
//! embeddings of the toy data.
//!
//!     cargo run --example evaluation

use transport_eigenmaps::data::{make_toy_clusters, ToyConfig};
use transport_eigenmaps::evaluate::{ari, fscore_kappa, oa_aa, run_protocol, ConfusionMatrix};
use transport_eigenmaps::pipeline::{embed, EmbedConfig, Method};

fn main() -> transport_eigenmaps::Result<()> {
    // Rows are true classes, columns predictions.
    let c = ConfusionMatrix::from_counts(vec![vec![9, 1], vec![4, 6]])?;
    let (oa, aa) = oa_aa(&c)?;
    let (fs, kappa) = fscore_kappa(&c)?;
    println!("C = [[9,1],[4,6]]: OA {oa} AA {aa} FS {fs:.4} kappa {kappa} ARI {:.4}", ari(&c)?);

    let pc = make_toy_clusters(&ToyConfig::default())?;
    let labels = pc.labels().unwrap();
    for method in [Method::Pca, Method::Le] {
        let e = embed(
            &pc,
            &EmbedConfig {
                k: 50,
                m: 2,
                ..EmbedConfig::new(method)
            },
        )?;
        let report = run_protocol(&e, labels, 10, 0.1, 7)?;
        println!("\n{method}, 10 runs, 10% training:\n{}", report.to_text());
    }
    Ok(())
}
