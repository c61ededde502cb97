//! Binary PGM (8/16-bit gray) and PPM (RGB) files.

use image::DynamicImage;
use std::io::{BufWriter, Write};
use std::path::Path;
use thiserror::Error;

use crate::error::{CodecError, KernelError};
use crate::frame::{BitDepth, Frame};
use crate::kernels::RgbImage;

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Image {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: expected a {expected} image, found {found:?}")]
    Kind {
        path: String,
        expected: &'static str,
        found: image::ColorType,
    },
    #[error("{0} frames cannot be stored as PGM")]
    Unsupported(BitDepth),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

fn open(path: &Path) -> Result<DynamicImage, ImageIoError> {
    image::ImageReader::open(path)
        .map_err(|e| ImageIoError::Image {
            path: path.display().to_string(),
            source: e.into(),
        })?
        .with_guessed_format()
        .map_err(|e| ImageIoError::Image {
            path: path.display().to_string(),
            source: e.into(),
        })?
        .decode()
        .map_err(|e| ImageIoError::Image {
            path: path.display().to_string(),
            source: e,
        })
}

/// Reads an 8- or 16-bit PGM as a frame of matching depth.
pub fn read_pgm(path: &Path) -> Result<Frame, ImageIoError> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => Ok(Frame::new(
            w,
            h,
            BitDepth::Eight,
            buf.into_raw().into_iter().map(u32::from).collect(),
        )?),
        DynamicImage::ImageLuma16(buf) => Ok(Frame::new(
            w,
            h,
            BitDepth::Sixteen,
            buf.into_raw().into_iter().map(u32::from).collect(),
        )?),
        other => Err(ImageIoError::Kind {
            path: path.display().to_string(),
            expected: "grayscale",
            found: other.color(),
        }),
    }
}

// The image crate decodes 16-bit P5/P6 but only encodes 8-bit ones, so
// the (trivial) binary netpbm layout is written here: ASCII header, then
// samples, 16-bit ones big-endian.
fn write_netpbm(path: &Path, magic: &str, w: usize, h: usize, maxval: u32, samples: impl Iterator<Item = u32>) -> Result<(), ImageIoError> {
    let io = |e: std::io::Error| ImageIoError::Image {
        path: path.display().to_string(),
        source: e.into(),
    };
    let mut out = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    write!(out, "{magic}\n{w} {h}\n{maxval}\n").map_err(io)?;
    for v in samples {
        if maxval > 255 {
            out.write_all(&(v as u16).to_be_bytes())
        } else {
            out.write_all(&[v as u8])
        }
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Writes a binary (P5) graymap with maxval 255 or 65535.
pub fn write_pgm(path: &Path, frame: &Frame) -> Result<(), ImageIoError> {
    let bpp = frame.bpp();
    if bpp == BitDepth::TwentyFour {
        return Err(ImageIoError::Unsupported(bpp));
    }
    write_netpbm(path, "P5", frame.width(), frame.height(), bpp.max_value(), frame.pixels().iter().copied())
}

/// Reads a PPM; 8-bit channels are widened to 16 bits (`v * 257`).
pub fn read_ppm(path: &Path) -> Result<RgbImage, ImageIoError> {
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageRgb16(buf) => buf.pixels().map(|p| p.0).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| p.0.map(|c| c as u16 * 257)).collect(),
        other => {
            return Err(ImageIoError::Kind {
                path: path.display().to_string(),
                expected: "RGB",
                found: other.color(),
            })
        }
    };
    Ok(RgbImage::new(w, h, data)?)
}

/// Writes a binary (P6) pixmap with 16-bit channels.
pub fn write_ppm(path: &Path, img: &RgbImage) -> Result<(), ImageIoError> {
    let samples = img.data.iter().flatten().map(|&c| c as u32);
    write_netpbm(path, "P6", img.width, img.height, 65535, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trip_8_and_16() {
        let dir = tempfile::tempdir().unwrap();
        for (bpp, scale) in [(BitDepth::Eight, 3u32), (BitDepth::Sixteen, 977)] {
            let f = Frame::from_fn(7, 5, bpp, |x, y| ((x * 5 + y) as u32 * scale) & bpp.max_value()).unwrap();
            let p = dir.path().join(format!("f{}.pgm", bpp.bits()));
            write_pgm(&p, &f).unwrap();
            assert_eq!(read_pgm(&p).unwrap(), f);
        }
    }

    #[test]
    fn pgm_header_is_binary_graymap() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.pgm");
        write_pgm(&p, &Frame::zeros(3, 2, BitDepth::Sixteen).unwrap()).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert!(std::str::from_utf8(&bytes[..12]).unwrap().contains("65535"));
        // 16-bit samples are big-endian, 2 bytes each.
        assert!(bytes.ends_with(&[0u8; 12]));
    }

    #[test]
    fn ppm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = RgbImage::new(4, 3, (0..12).map(|i| [i * 1000, 65535 - i, 7]).collect()).unwrap();
        let p = dir.path().join("c.ppm");
        write_ppm(&p, &img).unwrap();
        assert_eq!(read_ppm(&p).unwrap(), img);
        assert!(matches!(read_pgm(&p), Err(ImageIoError::Kind { .. })));
    }

    #[test]
    fn rejects_24bpp_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let f = Frame::zeros(2, 2, BitDepth::TwentyFour).unwrap();
        assert!(matches!(write_pgm(&dir.path().join("x.pgm"), &f), Err(ImageIoError::Unsupported(_))));
    }
}
