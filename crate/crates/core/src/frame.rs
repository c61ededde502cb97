//! Frames: rectangular rasters with a declared pixel bit depth.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::CodecError;

/// Pixel bit width supported by the CIF and LCD buses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum BitDepth {
    Eight,
    Sixteen,
    TwentyFour,
}

impl BitDepth {
    pub const ALL: [BitDepth; 3] = [BitDepth::Eight, BitDepth::Sixteen, BitDepth::TwentyFour];

    pub fn bits(self) -> u32 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
            BitDepth::TwentyFour => 24,
        }
    }

    pub fn bytes_per_pixel(self) -> usize {
        self.bits() as usize / 8
    }

    /// Pixels carried by one 32-bit bus word.
    pub fn pixels_per_word(self) -> usize {
        match self {
            BitDepth::Eight => 4,
            BitDepth::Sixteen => 2,
            BitDepth::TwentyFour => 1,
        }
    }

    /// Largest representable pixel value.
    pub fn max_value(self) -> u32 {
        (1u32 << self.bits()) - 1
    }

    pub fn from_bits(bits: u32) -> Option<Self> {
        match bits {
            8 => Some(BitDepth::Eight),
            16 => Some(BitDepth::Sixteen),
            24 => Some(BitDepth::TwentyFour),
            _ => None,
        }
    }
}

impl TryFrom<u32> for BitDepth {
    type Error = CodecError;

    fn try_from(bits: u32) -> Result<Self, Self::Error> {
        BitDepth::from_bits(bits).ok_or(CodecError::UnsupportedBitDepth(bits))
    }
}

impl From<BitDepth> for u32 {
    fn from(bpp: BitDepth) -> u32 {
        bpp.bits()
    }
}

impl fmt::Display for BitDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} bpp", self.bits())
    }
}

/// A row-major raster of unsigned pixels.
///
/// Construction goes through [`Frame::new`], which enforces the geometry and
/// range invariants, so every `Frame` in circulation is valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    bpp: BitDepth,
    pixels: Vec<u32>,
}

impl Frame {
    pub fn new(
        width: usize,
        height: usize,
        bpp: BitDepth,
        pixels: Vec<u32>,
    ) -> Result<Self, CodecError> {
        if width == 0 || height == 0 {
            return Err(CodecError::EmptyGeometry { width, height });
        }
        let expected = width
            .checked_mul(height)
            .ok_or(CodecError::EmptyGeometry { width, height })?;
        if pixels.len() != expected {
            return Err(CodecError::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        let max = bpp.max_value();
        if let Some(index) = pixels.iter().position(|&p| p > max) {
            return Err(CodecError::PixelRange {
                index,
                value: pixels[index],
                bpp: bpp.bits(),
            });
        }
        Ok(Frame {
            width,
            height,
            bpp,
            pixels,
        })
    }

    /// All-zero frame.
    pub fn zeros(width: usize, height: usize, bpp: BitDepth) -> Result<Self, CodecError> {
        Frame::new(width, height, bpp, vec![0; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        bpp: BitDepth,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Result<Self, CodecError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Frame::new(width, height, bpp, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bpp(&self) -> BitDepth {
        self.bpp
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u32> {
        self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.pixels[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u32] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }
}
