//! Six-layer ship-detection CNN run patch by patch in half precision.
//!
//! Topology on a 3x128x128 patch (CHW):
//!
//! | layer | op                         | output     |
//! |-------|----------------------------|------------|
//! | 1     | conv 3x3, 8, same, ReLU    | 8x128x128  |
//! | 2     | max-pool 4x4 / 4           | 8x32x32    |
//! | 3     | conv 3x3, 16, same, ReLU   | 16x32x32   |
//! | 4     | max-pool 3x3 / 3, ceil     | 16x11x11   |
//! | 5     | dense 1936 -> 64, ReLU     | 64         |
//! | 6     | dense 64 -> 1, sigmoid     | 1          |
//!
//! 125,425 parameters. Weights and activations are stored as f16; dot
//! products accumulate in f32 and round back to f16 on store.

use half::f16;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::exec::Executor;
use crate::error::KernelError;

pub const PATCH_SIZE: usize = 128;
const IN_CH: usize = 3;
const C1: usize = 8;
const POOL1: usize = 4;
const C2: usize = 16;
const POOL2: usize = 3;
const HIDDEN: usize = 64;

const S1: usize = PATCH_SIZE / POOL1;
const S2: usize = S1.div_ceil(POOL2);
const FLAT: usize = C2 * S2 * S2;

/// Name and shape of one tensor in the flat weight file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub name: String,
    pub shape: Vec<usize>,
}

impl LayerShape {
    fn new(name: &str, shape: &[usize]) -> Self {
        LayerShape {
            name: name.to_string(),
            shape: shape.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// JSON sidecar describing the flat little-endian f16 weight file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightManifest {
    pub dtype: String,
    pub layers: Vec<LayerShape>,
}

impl WeightManifest {
    pub fn expected() -> Self {
        WeightManifest {
            dtype: "f16le".into(),
            layers: vec![
                LayerShape::new("conv1.weight", &[C1, IN_CH, 3, 3]),
                LayerShape::new("conv1.bias", &[C1]),
                LayerShape::new("conv2.weight", &[C2, C1, 3, 3]),
                LayerShape::new("conv2.bias", &[C2]),
                LayerShape::new("dense1.weight", &[HIDDEN, FLAT]),
                LayerShape::new("dense1.bias", &[HIDDEN]),
                LayerShape::new("dense2.weight", &[1, HIDDEN]),
                LayerShape::new("dense2.bias", &[1]),
            ],
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(LayerShape::len).sum()
    }
}

/// Weights of the fixed topology, one f16 vector per manifest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    tensors: Vec<Vec<f16>>,
    // f32 copies for the accumulation loops; values are exactly the f16 ones.
    wide: Vec<Vec<f32>>,
}

impl CnnModel {
    pub const LAYERS: usize = 6;

    pub fn from_tensors(tensors: Vec<Vec<f16>>) -> Result<Self, KernelError> {
        let manifest = WeightManifest::expected();
        if tensors.len() != manifest.layers.len() {
            return Err(KernelError::Model(format!(
                "expected {} tensors, got {}",
                manifest.layers.len(),
                tensors.len()
            )));
        }
        for (t, layer) in tensors.iter().zip(&manifest.layers) {
            if t.len() != layer.len() {
                return Err(KernelError::Model(format!(
                    "{} has {} values, shape {:?} needs {}",
                    layer.name,
                    t.len(),
                    layer.shape,
                    layer.len()
                )));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(KernelError::Model(format!("{} contains non-finite weights", layer.name)));
            }
        }
        let wide = tensors
            .iter()
            .map(|t| t.iter().map(|v| v.to_f32()).collect())
            .collect();
        Ok(CnnModel { tensors, wide })
    }

    /// He-uniform weights from a fixed seed, small uniform biases.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fan_in = [IN_CH * 9, C1 * 9, FLAT, HIDDEN];
        let tensors = WeightManifest::expected()
            .layers
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let scale = if i % 2 == 0 {
                    (6.0 / fan_in[i / 2] as f64).sqrt()
                } else {
                    0.05
                };
                (0..layer.len())
                    .map(|_| f16::from_f64(rng.gen_range(-scale..scale)))
                    .collect()
            })
            .collect();
        CnnModel::from_tensors(tensors).expect("seeded tensors match the manifest")
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(Vec::len).sum()
    }

    pub fn tensors(&self) -> &[Vec<f16>] {
        &self.tensors
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.tensors
            .iter()
            .flatten()
            .flat_map(|v| v.to_le_bytes())
            .collect()
    }

    pub fn from_le_bytes(bytes: &[u8], manifest: &WeightManifest) -> Result<Self, KernelError> {
        if manifest.dtype != "f16le" {
            return Err(KernelError::Model(format!("unsupported dtype {}", manifest.dtype)));
        }
        if *manifest != WeightManifest::expected() {
            return Err(KernelError::Model("manifest does not describe the 6-layer topology".into()));
        }
        if bytes.len() != 2 * manifest.parameter_count() {
            return Err(KernelError::Model(format!(
                "weight file has {} bytes, manifest needs {}",
                bytes.len(),
                2 * manifest.parameter_count()
            )));
        }
        let mut values = bytes
            .chunks_exact(2)
            .map(|c| f16::from_le_bytes([c[0], c[1]]));
        let tensors = manifest
            .layers
            .iter()
            .map(|l| values.by_ref().take(l.len()).collect())
            .collect();
        CnnModel::from_tensors(tensors)
    }

    /// Reads `<weights>` and its JSON manifest.
    pub fn load(weights: &Path, manifest: &Path) -> Result<Self, KernelError> {
        let io = |e: std::io::Error, p: &Path| KernelError::Model(format!("{}: {e}", p.display()));
        let text = std::fs::read_to_string(manifest).map_err(|e| io(e, manifest))?;
        let manifest: WeightManifest =
            serde_json::from_str(&text).map_err(|e| KernelError::Model(format!("manifest: {e}")))?;
        let bytes = std::fs::read(weights).map_err(|e| io(e, weights))?;
        CnnModel::from_le_bytes(&bytes, &manifest)
    }

    pub fn save(&self, weights: &Path, manifest: &Path) -> std::io::Result<()> {
        std::fs::write(weights, self.to_le_bytes())?;
        let json = serde_json::to_string_pretty(&WeightManifest::expected())?;
        std::fs::write(manifest, json)
    }

    /// Ship probability for one CHW patch of f16 values in [0, 1].
    pub fn infer_patch(&self, patch: &[f16]) -> f32 {
        assert_eq!(patch.len(), IN_CH * PATCH_SIZE * PATCH_SIZE, "patch must be 3x128x128");
        let input: Vec<f32> = patch.iter().map(|v| v.to_f32()).collect();
        let w = &self.wide;
        let a1 = conv3x3_relu(&input, IN_CH, PATCH_SIZE, &w[0], &w[1], C1);
        let p1 = max_pool(&a1, C1, PATCH_SIZE, POOL1);
        let a2 = conv3x3_relu(&p1, C1, S1, &w[2], &w[3], C2);
        let p2 = max_pool(&a2, C2, S1, POOL2);
        let h = dense(&p2, &w[4], &w[5], HIDDEN, true);
        let logit = dense(&h, &w[6], &w[7], 1, false)[0];
        round_f16(1.0 / (1.0 + (-logit).exp()))
    }
}

fn round_f16(v: f32) -> f32 {
    f16::from_f32(v).to_f32()
}

fn conv3x3_relu(input: &[f32], cin: usize, size: usize, weights: &[f32], bias: &[f32], cout: usize) -> Vec<f32> {
    let mut out = vec![0.0f32; cout * size * size];
    for o in 0..cout {
        for y in 0..size {
            for x in 0..size {
                let mut acc = bias[o];
                for c in 0..cin {
                    let plane = &input[c * size * size..(c + 1) * size * size];
                    let taps = &weights[(o * cin + c) * 9..(o * cin + c + 1) * 9];
                    for ky in 0..3 {
                        let sy = y as isize + ky as isize - 1;
                        if sy < 0 || sy >= size as isize {
                            continue;
                        }
                        for kx in 0..3 {
                            let sx = x as isize + kx as isize - 1;
                            if sx < 0 || sx >= size as isize {
                                continue;
                            }
                            acc += plane[sy as usize * size + sx as usize] * taps[ky * 3 + kx];
                        }
                    }
                }
                out[(o * size + y) * size + x] = round_f16(acc.max(0.0));
            }
        }
    }
    out
}

/// Non-overlapping max pooling; the last window is clipped when `k` does not
/// divide `size`.
fn max_pool(input: &[f32], channels: usize, size: usize, k: usize) -> Vec<f32> {
    let out_size = size.div_ceil(k);
    let mut out = vec![f32::NEG_INFINITY; channels * out_size * out_size];
    for c in 0..channels {
        for y in 0..size {
            for x in 0..size {
                let o = &mut out[(c * out_size + y / k) * out_size + x / k];
                *o = o.max(input[(c * size + y) * size + x]);
            }
        }
    }
    out
}

fn dense(input: &[f32], weights: &[f32], bias: &[f32], outputs: usize, relu: bool) -> Vec<f32> {
    let n = input.len();
    (0..outputs)
        .map(|o| {
            let acc = weights[o * n..(o + 1) * n]
                .iter()
                .zip(input)
                .fold(bias[o], |acc, (w, x)| acc + w * x);
            round_f16(if relu { acc.max(0.0) } else { acc })
        })
        .collect()
}

/// Interleaved RGB image with 16-bit channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[u16; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<[u16; 3]>) -> Result<Self, KernelError> {
        if data.len() != width * height || width == 0 || height == 0 {
            return Err(KernelError::Geometry(format!(
                "{} RGB pixels for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            data,
        })
    }

    /// One channel as a plane of samples.
    pub fn channel(&self, c: usize) -> Vec<u32> {
        self.data.iter().map(|p| p[c] as u32).collect()
    }

    pub fn from_planes(width: usize, height: usize, planes: [&[u32]; 3]) -> Result<Self, KernelError> {
        let data = (0..width * height)
            .map(|i| planes.map(|p| p.get(i).copied().unwrap_or(0) as u16))
            .collect();
        if planes.iter().any(|p| p.len() != width * height) {
            return Err(KernelError::Geometry("channel planes differ in size".into()));
        }
        RgbImage::new(width, height, data)
    }

    /// CHW half-precision patch at grid cell (px, py), samples scaled to [0, 1].
    pub fn patch(&self, px: usize, py: usize) -> Vec<f16> {
        let mut out = Vec::with_capacity(IN_CH * PATCH_SIZE * PATCH_SIZE);
        for c in 0..IN_CH {
            for y in 0..PATCH_SIZE {
                let row = (py * PATCH_SIZE + y) * self.width + px * PATCH_SIZE;
                out.extend(
                    self.data[row..row + PATCH_SIZE]
                        .iter()
                        .map(|p| f16::from_f32(p[c] as f32 / 65535.0)),
                );
            }
        }
        out
    }
}

/// Splits the image into 128x128 patches (row-major grid) and scores each.
pub fn cnn_ship_detect(image: &RgbImage, model: &CnnModel, exec: Executor) -> Result<Vec<f32>, KernelError> {
    if !image.width.is_multiple_of(PATCH_SIZE) || !image.height.is_multiple_of(PATCH_SIZE) {
        return Err(KernelError::Geometry(format!(
            "{}x{} is not a whole number of {PATCH_SIZE}x{PATCH_SIZE} patches",
            image.width, image.height
        )));
    }
    let cols = image.width / PATCH_SIZE;
    let cells: Vec<(usize, usize)> = (0..image.height / PATCH_SIZE)
        .flat_map(|py| (0..cols).map(move |px| (px, py)))
        .collect();
    Ok(exec.map(&cells, |&(px, py)| model.infer_patch(&image.patch(px, py))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_sizes() {
        assert_eq!(S1, 32);
        assert_eq!(S2, 11);
        assert_eq!(FLAT, 1936);
        let n = WeightManifest::expected().parameter_count();
        assert_eq!(n, 125_425);
        assert!((n as f64 - 132_000.0).abs() <= 0.05 * 132_000.0);
        assert_eq!(CnnModel::seeded(1).parameter_count(), n);
    }

    #[test]
    fn weight_file_round_trip() {
        let m = CnnModel::seeded(7);
        let back = CnnModel::from_le_bytes(&m.to_le_bytes(), &WeightManifest::expected()).unwrap();
        assert_eq!(back, m);
        assert!(CnnModel::from_le_bytes(&m.to_le_bytes()[2..], &WeightManifest::expected()).is_err());
        let mut wrong = WeightManifest::expected();
        wrong.dtype = "f32le".into();
        assert!(CnnModel::from_le_bytes(&m.to_le_bytes(), &wrong).is_err());
    }

    #[test]
    fn pooling_clips_last_window() {
        // 1 channel, 4x4 -> ceil(4/3) = 2.
        let input: Vec<f32> = (0..16).map(|v| v as f32).collect();
        assert_eq!(max_pool(&input, 1, 4, 3), vec![10.0, 11.0, 14.0, 15.0]);
    }

    #[test]
    fn rejects_partial_patches() {
        let img = RgbImage::new(130, 128, vec![[0; 3]; 130 * 128]).unwrap();
        assert!(cnn_ship_detect(&img, &CnnModel::seeded(0), Executor::Sequential).is_err());
    }
}
