//! Hyperspectral cubes stored band-interleaved-by-pixel.
//!
//! On disk a cube is raw little-endian `f32` samples in BIP order plus a
//! plain-text sidecar of `key=value` lines giving `height`, `width` and
//! `bands`. Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Label, PointCloud};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HyperCube {
    height: usize,
    width: usize,
    bands: usize,
    values: Vec<f64>,
    band_mask: Vec<bool>,
}

impl HyperCube {
    pub fn new(height: usize, width: usize, bands: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != height * width * bands {
            return Err(Error::Shape(format!(
                "{} samples for a {height}x{width}x{bands} cube",
                values.len()
            )));
        }
        Ok(Self {
            height,
            width,
            bands,
            values,
            band_mask: vec![true; bands],
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    /// One flag per band of the original acquisition; `true` = retained.
    pub fn band_mask(&self) -> &[bool] {
        &self.band_mask
    }

    pub fn spectrum(&self, row: usize, col: usize) -> &[f64] {
        let p = (row * self.width + col) * self.bands;
        &self.values[p..p + self.bands]
    }

    pub fn value(&self, row: usize, col: usize, band: usize) -> f64 {
        self.spectrum(row, col)[band]
    }
}

/// Drops the listed bands (indices into the current band axis).
pub fn remove_bands(cube: &HyperCube, band_indices: &[usize]) -> Result<HyperCube> {
    let mut drop = vec![false; cube.bands];
    for &b in band_indices {
        if b >= cube.bands {
            return Err(Error::Bounds(format!(
                "band {b} in a cube with {} bands",
                cube.bands
            )));
        }
        if drop[b] {
            return Err(Error::Parameter(format!("band {b} listed twice")));
        }
        drop[b] = true;
    }
    let keep: Vec<usize> = (0..cube.bands).filter(|&b| !drop[b]).collect();
    let values = cube
        .values
        .chunks_exact(cube.bands)
        .flat_map(|px| keep.iter().map(move |&b| px[b]))
        .collect();

    let mut band_mask = cube.band_mask.clone();
    let mut current = 0;
    for slot in band_mask.iter_mut().filter(|m| **m) {
        if drop[current] {
            *slot = false;
        }
        current += 1;
    }
    Ok(HyperCube {
        height: cube.height,
        width: cube.width,
        bands: keep.len(),
        values,
        band_mask,
    })
}

/// Label image aligned with a cube.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub height: usize,
    pub width: usize,
    pub labels: Vec<Label>,
}

impl GroundTruth {
    pub fn new(height: usize, width: usize, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != height * width {
            return Err(Error::Shape(format!(
                "{} labels for a {height}x{width} image",
                labels.len()
            )));
        }
        Ok(Self {
            height,
            width,
            labels,
        })
    }
}

/// One point per pixel in raster order, optionally skipping label-0 pixels.
pub fn cube_to_points(
    cube: &HyperCube,
    ground_truth: &GroundTruth,
    drop_label_zero: bool,
) -> Result<PointCloud> {
    if (ground_truth.height, ground_truth.width) != (cube.height, cube.width) {
        return Err(Error::Shape(format!(
            "ground truth is {}x{} but the cube is {}x{}",
            ground_truth.height, ground_truth.width, cube.height, cube.width
        )));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (p, &label) in ground_truth.labels.iter().enumerate() {
        if drop_label_zero && label == 0 {
            continue;
        }
        values.extend_from_slice(&cube.values[p * cube.bands..(p + 1) * cube.bands]);
        labels.push(label);
    }
    PointCloud::new(labels.len(), cube.bands, values)?.with_labels(labels)
}

pub(crate) fn sidecar_path(data: &Path) -> PathBuf {
    let mut s = data.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

fn parse_sidecar(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeMap::new();
    for (row, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Format {
            row,
            msg: format!("expected key=value, found {line:?}"),
        })?;
        out.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
    }
    Ok(out)
}

/// Loads `data` and its sidecar (`header`, or `<data>.hdr` when `None`).
pub fn load_cube(data: impl AsRef<Path>, header: Option<&Path>) -> Result<HyperCube> {
    let data = data.as_ref();
    let header = header.map_or_else(|| sidecar_path(data), Path::to_path_buf);
    let meta = parse_sidecar(&header)?;
    let dim = |key: &str| -> Result<usize> {
        meta.get(key)
            .ok_or_else(|| Error::Config {
                field: key.into(),
                msg: format!("missing from {}", header.display()),
            })?
            .parse()
            .map_err(|_| Error::Config {
                field: key.into(),
                msg: "not a non-negative integer".into(),
            })
    };
    let (height, width, bands) = (dim("height")?, dim("width")?, dim("bands")?);
    let bytes = fs::read(data).map_err(|e| Error::io(data, e))?;
    if bytes.len() != 4 * height * width * bands {
        return Err(Error::Shape(format!(
            "{} bytes cannot hold {height}x{width}x{bands} f32 samples",
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    HyperCube::new(height, width, bands, values)
}

/// Writes the cube as f32 BIP plus its sidecar at `<data>.hdr`.
pub fn write_cube(data: impl AsRef<Path>, cube: &HyperCube) -> Result<()> {
    let data = data.as_ref();
    let bytes: Vec<u8> = cube
        .values
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect();
    fs::write(data, bytes).map_err(|e| Error::io(data, e))?;
    let header = sidecar_path(data);
    let text = format!(
        "height={}\nwidth={}\nbands={}\n",
        cube.height, cube.width, cube.bands
    );
    fs::write(&header, text).map_err(|e| Error::io(&header, e))
}
