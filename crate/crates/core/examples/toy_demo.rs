//! Every method on the five-cluster toy data, summarised by where the red
//! cluster (cluster 0) ends up relative to the rest.
//!
//!     cargo run --example toy_demo

use transport_eigenmaps::data::{make_toy_clusters, Label, ToyConfig};
use transport_eigenmaps::operators::{KnownClassSettings, SupervisionParams};
use transport_eigenmaps::pipeline::{embed, EmbedConfig, Embedding, Method};

fn centroid_norm(e: &Embedding, idx: &[usize]) -> f64 {
    (0..e.dim())
        .map(|j| (idx.iter().map(|&i| e.coords[(i, j)]).sum::<f64>() / idx.len() as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn mean_distance(e: &Embedding, idx: &[usize]) -> f64 {
    let mut total = 0.0;
    let mut count = 0;
    for (p, &i) in idx.iter().enumerate() {
        for &j in &idx[p + 1..] {
            let d: f64 = e.row(i).iter().zip(e.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
            total += d.sqrt();
            count += 1;
        }
    }
    total / count as f64
}

fn main() -> transport_eigenmaps::Result<()> {
    let pc = make_toy_clusters(&ToyConfig::default())?;
    let labels = pc.labels().unwrap();
    let red = pc.members(0);
    let all: Vec<usize> = (0..pc.len()).collect();
    let red_indicator: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l == 0))).collect();
    let known: Vec<Option<Label>> = labels.iter().map(|&l| (l == 0).then_some(0)).collect();

    let base = EmbedConfig {
        k: 50,
        m: 2,
        seed: 42,
        ..EmbedConfig::new(Method::Le)
    };
    let runs = [
        (Method::Le, SupervisionParams::default()),
        (
            Method::Se,
            SupervisionParams {
                potential: Some(red_indicator.clone()),
                alpha_hat: 10.0,
                ..Default::default()
            },
        ),
        (
            Method::Ta,
            SupervisionParams {
                mu: Some(red_indicator.clone()),
                beta: 10.0,
                ..Default::default()
            },
        ),
        (
            Method::Tg,
            SupervisionParams {
                a: Some(red_indicator.iter().map(|v| 1.0 + 9.0 * v).collect()),
                ..Default::default()
            },
        ),
        (
            Method::Te,
            SupervisionParams::from_known(
                &known,
                &KnownClassSettings {
                    a_values: [(0, 10.0)].into_iter().collect(),
                    r_small: 0.5,
                    r_big: 100.0,
                    ..Default::default()
                },
            ),
        ),
    ];

    println!("{:<4} {:>14} {:>18} {:>10}", "", "|centroid red|", "red/global spread", "lambda_1");
    for (method, supervision) in runs {
        let e = embed(
            &pc,
            &EmbedConfig {
                method,
                supervision,
                ..base.clone()
            },
        )?;
        println!(
            "{:<4} {:>14.5} {:>18.5} {:>10.3e}",
            method,
            centroid_norm(&e, &red),
            mean_distance(&e, &red) / mean_distance(&e, &all),
            e.spectrum[1]
        );
    }
    Ok(())
}
