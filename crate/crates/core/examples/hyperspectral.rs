//! The hyperspectral path end to end on a small synthetic scene: write a
//! cube with its header, read it back, drop noisy bands, embed with TA
//! (one class known) and classify.
//!
//!     cargo run --example hyperspectral

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use transport_eigenmaps::data::{
    cube_to_points, load_cube, remove_bands, rescale, write_cube, GroundTruth, HyperCube, Label, Scaling,
};
use transport_eigenmaps::evaluate::run_protocol;
use transport_eigenmaps::operators::{KnownClassSettings, SupervisionParams};
use transport_eigenmaps::pipeline::{embed, EmbedConfig, Method};

const H: usize = 30;
const W: usize = 30;
const BANDS: usize = 40;

/// Four vertical stripes of material, each with its own smooth spectrum,
/// plus an unlabelled border.
fn scene(rng: &mut ChaCha8Rng) -> transport_eigenmaps::Result<(HyperCube, GroundTruth)> {
    let mut values = Vec::with_capacity(H * W * BANDS);
    let mut labels = Vec::with_capacity(H * W);
    for r in 0..H {
        for c in 0..W {
            let class = (c * 4 / W) as Label + 1;
            let border = r == 0 || r == H - 1;
            labels.push(if border { 0 } else { class });
            for b in 0..BANDS {
                let t = b as f64 / BANDS as f64;
                let base = 1000.0 + 400.0 * (t * (3.0 + 0.25 * class as f64)).sin();
                values.push(base + rng.random_range(-200.0..200.0));
            }
        }
    }
    Ok((HyperCube::new(H, W, BANDS, values)?, GroundTruth::new(H, W, labels)?))
}

fn main() -> transport_eigenmaps::Result<()> {
    let dir = tempfile::tempdir().expect("temporary directory");
    let path = dir.path().join("scene.raw");
    let (cube, truth) = scene(&mut ChaCha8Rng::seed_from_u64(3))?;
    write_cube(&path, &cube)?;

    let cube = remove_bands(&load_cube(&path, None)?, &[0, 1, 38, 39])?;
    let pc = rescale(&cube_to_points(&cube, &truth, true)?, Scaling::MaxAbs);
    println!("{} labelled pixels, {} bands", pc.len(), pc.dim());

    let known: Vec<Option<Label>> = pc.labels().unwrap().iter().map(|&l| (l == 2).then_some(l)).collect();
    let settings = KnownClassSettings::default();
    for (method, supervision) in [
        (Method::Le, SupervisionParams::default()),
        (Method::Ta, SupervisionParams::from_known(&known, &settings)),
    ] {
        let cfg = EmbedConfig {
            method,
            k: 12,
            sigma: 0.5,
            m: 10,
            supervision,
            auto_connect: true,
            ..EmbedConfig::new(method)
        };
        let e = embed(&pc, &cfg)?;
        let report = run_protocol(&e, pc.labels().unwrap(), 5, 0.1, 0)?;
        print!("{method}\n{}", report.to_table());
    }
    Ok(())
}
