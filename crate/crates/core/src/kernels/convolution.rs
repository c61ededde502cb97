use serde::{Deserialize, Serialize};

use super::exec::run_bands;
use super::BandPlan;
use crate::error::KernelError;
use crate::frame::{BitDepth, Frame};

/// Square, odd-sized correlation kernel of 32-bit floats, 3x3 to 13x13.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct ConvKernel {
    size: usize,
    weights: Vec<f32>,
}

#[derive(Serialize, Deserialize)]
struct RawKernel {
    size: usize,
    weights: Vec<f32>,
}

impl TryFrom<RawKernel> for ConvKernel {
    type Error = KernelError;
    fn try_from(raw: RawKernel) -> Result<Self, KernelError> {
        ConvKernel::new(raw.size, raw.weights)
    }
}

impl From<ConvKernel> for RawKernel {
    fn from(k: ConvKernel) -> Self {
        RawKernel {
            size: k.size,
            weights: k.weights,
        }
    }
}

impl ConvKernel {
    pub const SIZES: [usize; 6] = [3, 5, 7, 9, 11, 13];

    pub fn new(size: usize, weights: Vec<f32>) -> Result<Self, KernelError> {
        if !Self::SIZES.contains(&size) {
            return Err(KernelError::Parameter(format!(
                "kernel size must be odd and within 3..=13, got {size}"
            )));
        }
        if weights.len() != size * size {
            return Err(KernelError::Parameter(format!(
                "{size}x{size} kernel needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        Ok(ConvKernel { size, weights })
    }

    /// Normalized box filter.
    pub fn box_filter(size: usize) -> Result<Self, KernelError> {
        ConvKernel::new(size, vec![1.0 / (size * size) as f32; size * size])
    }

    /// 1.0 at the centre tap, 0 elsewhere.
    pub fn delta(size: usize) -> Result<Self, KernelError> {
        let mut weights = vec![0.0; size * size];
        weights[size * size / 2] = 1.0;
        ConvKernel::new(size, weights)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }
}

/// Correlation of one output row, zero padding outside the image. Taps are
/// accumulated in kernel row-major order in f32.
fn correlate_row<T: Copy>(
    src: &[T],
    width: usize,
    height: usize,
    kernel: &ConvKernel,
    y: usize,
    to_f32: impl Fn(T) -> f32,
    mut emit: impl FnMut(usize, f32),
) {
    let k = kernel.size;
    let r = (k / 2) as isize;
    for x in 0..width {
        let mut acc = 0.0f32;
        for ky in 0..k {
            let sy = y as isize + ky as isize - r;
            if sy < 0 || sy >= height as isize {
                continue;
            }
            let row = &src[sy as usize * width..(sy as usize + 1) * width];
            let taps = &kernel.weights[ky * k..(ky + 1) * k];
            for (kx, &w) in taps.iter().enumerate() {
                let sx = x as isize + kx as isize - r;
                if sx < 0 || sx >= width as isize {
                    continue;
                }
                acc += to_f32(row[sx as usize]) * w;
            }
        }
        emit(x, acc);
    }
}

/// Unquantized correlation over a float image.
pub fn correlate_f32(
    input: &[f32],
    width: usize,
    height: usize,
    kernel: &ConvKernel,
) -> Result<Vec<f32>, KernelError> {
    if input.len() != width * height {
        return Err(KernelError::Geometry(format!(
            "{} samples for a {width}x{height} image",
            input.len()
        )));
    }
    let mut out = vec![0.0f32; width * height];
    for (y, out_row) in out.chunks_exact_mut(width.max(1)).enumerate() {
        correlate_row(input, width, height, kernel, y, |v| v, |x, v| out_row[x] = v);
    }
    Ok(out)
}

/// Floating-point correlation (no kernel flip) of an 8 bpp frame with zero
/// padding. Results are rounded to nearest (halves away from zero) and
/// clamped to [0, 255].
pub fn fp_convolution(frame: &Frame, kernel: &ConvKernel, plan: &BandPlan) -> Result<Frame, KernelError> {
    if frame.bpp() != BitDepth::Eight {
        return Err(KernelError::Geometry(format!(
            "convolution expects 8 bpp input, got {}",
            frame.bpp()
        )));
    }
    let (w, h) = (frame.width(), frame.height());
    let partition = plan.partition(h)?;
    let src = frame.pixels();
    let mut out = vec![0u32; w * h];
    run_bands(plan.executor, &partition, w, &mut out, |rows, band| {
        for (y, out_row) in rows.zip(band.chunks_exact_mut(w)) {
            correlate_row(src, w, h, kernel, y, |p| p as f32, |x, v| {
                out_row[x] = v.round().clamp(0.0, 255.0) as u32;
            });
        }
    });
    Ok(Frame::new(w, h, BitDepth::Eight, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Frame {
        Frame::from_fn(w, h, BitDepth::Eight, |x, y| ((x * 31 + y * 17) % 256) as u32).unwrap()
    }

    #[test]
    fn delta_kernel_is_identity() {
        let f = ramp(20, 13);
        for k in ConvKernel::SIZES {
            let out = fp_convolution(&f, &ConvKernel::delta(k).unwrap(), &BandPlan::default()).unwrap();
            assert_eq!(out, f, "k={k}");
        }
    }

    #[test]
    fn box_filter_keeps_constant_interior() {
        let f = Frame::from_fn(9, 9, BitDepth::Eight, |_, _| 90).unwrap();
        let out = fp_convolution(&f, &ConvKernel::box_filter(3).unwrap(), &BandPlan::default()).unwrap();
        for y in 1..8 {
            for x in 1..8 {
                assert_eq!(out.get(x, y), 90);
            }
        }
        // Zero padding darkens the corner: 4 of 9 taps see the image.
        assert_eq!(out.get(0, 0), 40);
    }

    #[test]
    fn correlation_does_not_flip() {
        // Single bright pixel; an asymmetric kernel shows up mirrored.
        let mut px = vec![0u32; 25];
        px[12] = 100;
        let f = Frame::new(5, 5, BitDepth::Eight, px).unwrap();
        let mut w = vec![0.0; 9];
        w[0] = 1.0; // top-left tap
        let out = fp_convolution(&f, &ConvKernel::new(3, w).unwrap(), &BandPlan::default()).unwrap();
        // out(x,y) reads in(x-1,y-1), so the spot moves down-right.
        assert_eq!(out.get(3, 3), 100);
        assert_eq!(out.get(1, 1), 0);
    }

    #[test]
    fn clamps_and_rounds() {
        let f = Frame::from_fn(3, 3, BitDepth::Eight, |_, _| 200).unwrap();
        let k = ConvKernel::new(3, vec![0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(fp_convolution(&f, &k, &BandPlan::default()).unwrap().pixels().iter().all(|&p| p == 255));
        let k = ConvKernel::new(3, vec![0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(fp_convolution(&f, &k, &BandPlan::default()).unwrap().pixels().iter().all(|&p| p == 0));
        let f = Frame::from_fn(3, 3, BitDepth::Eight, |_, _| 5).unwrap();
        let k = ConvKernel::new(3, vec![0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(fp_convolution(&f, &k, &BandPlan::default()).unwrap().pixels().iter().all(|&p| p == 3));
    }

    #[test]
    fn bad_kernel_sizes_rejected() {
        for k in [0, 1, 2, 4, 15] {
            assert!(ConvKernel::new(k, vec![0.0; k * k]).is_err(), "k={k}");
        }
        assert!(ConvKernel::new(3, vec![0.0; 8]).is_err());
    }
}
