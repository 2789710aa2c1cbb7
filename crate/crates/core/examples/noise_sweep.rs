//! Robustness to additive noise: OA of LE and TA on the toy data as the
//! noise level grows over a log-spaced grid.
//!
//!     cargo run --release --example noise_sweep

use transport_eigenmaps::data::{add_gaussian_noise, log_spaced, make_toy_clusters, ToyConfig};
use transport_eigenmaps::evaluate::run_protocol;
use transport_eigenmaps::operators::SupervisionParams;
use transport_eigenmaps::pipeline::{embed, EmbedConfig, Method};

fn main() -> transport_eigenmaps::Result<()> {
    let clean = make_toy_clusters(&ToyConfig {
        n_per_cluster: 60,
        ..ToyConfig::default()
    })?;
    let red: Vec<f64> = clean.labels().unwrap().iter().map(|&l| f64::from(u8::from(l == 0))).collect();
    println!("{:>10} {:>8} {:>8}", "sigma", "LE", "TA");
    for sigma in log_spaced(-2.0, 0.5, 6) {
        let pc = add_gaussian_noise(&clean, 1, sigma)?;
        let mut row = format!("{sigma:>10.4}");
        for (method, supervision) in [
            (Method::Le, SupervisionParams::default()),
            (
                Method::Ta,
                SupervisionParams {
                    mu: Some(red.clone()),
                    beta: 20.0,
                    ..Default::default()
                },
            ),
        ] {
            let cfg = EmbedConfig {
                method,
                k: 20,
                m: 4,
                supervision,
                auto_connect: true,
                ..EmbedConfig::new(method)
            };
            let oa = match embed(&pc, &cfg) {
                Ok(e) => run_protocol(&e, pc.labels().unwrap(), 5, 0.1, 0)?.mean.oa,
                Err(e) => {
                    eprintln!("sigma {sigma}: {method} failed: {e}");
                    f64::NAN
                }
            };
            row.push_str(&format!(" {oa:>8.4}"));
        }
        println!("{row}");
    }
    Ok(())
}
