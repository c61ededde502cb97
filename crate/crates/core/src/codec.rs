//! Bit-exact conversions between frames, 32-bit bus words and CRC-framed
//! payloads.
//!
//! Wire contract (see `docs/protocol.md`):
//!
//! * Words: little-endian packing, the lowest-index pixel sits in the lowest
//!   byte(s). 8 bpp packs 4 pixels per word, 16 bpp packs 2, 24 bpp packs one
//!   pixel per word with the top byte zero. A final partial word is
//!   zero-padded in its unused high bytes.
//! * Bytes: row-major, each pixel as `bpp / 8` little-endian bytes.
//! * Trailer: one extra line after the body. Its byte serialization starts
//!   with the CRC-16/XMODEM of the body bytes, high byte first; every other
//!   trailer byte is zero.

use crate::crc::crc16_xmodem;
use crate::error::CodecError;
use crate::frame::{BitDepth, Frame};

/// Pixels packed into 32-bit words, as moved over the FPGA-internal bus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordStream {
    pub words: Vec<u32>,
    pub bpp: BitDepth,
    pub pixel_count: usize,
}

pub fn words_needed(pixel_count: usize, bpp: BitDepth) -> usize {
    pixel_count.div_ceil(bpp.pixels_per_word())
}

pub fn pack_pixels(pixels: &[u32], bpp: BitDepth) -> Vec<u32> {
    let per_word = bpp.pixels_per_word();
    let shift = if per_word == 1 { 0 } else { bpp.bits() };
    pixels
        .chunks(per_word)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u32, |word, (i, &p)| word | (p << (shift * i as u32)))
        })
        .collect()
}

pub fn pixels_to_words(frame: &Frame) -> WordStream {
    WordStream {
        words: pack_pixels(frame.pixels(), frame.bpp()),
        bpp: frame.bpp(),
        pixel_count: frame.pixel_count(),
    }
}

pub fn words_to_pixels(stream: &WordStream, expected_pixels: usize) -> Result<Vec<u32>, CodecError> {
    let bpp = stream.bpp;
    if stream.pixel_count != expected_pixels
        || stream.words.len() != words_needed(expected_pixels, bpp)
    {
        return Err(CodecError::MalformedStream {
            words: stream.words.len(),
            pixels: expected_pixels,
            bpp: bpp.bits(),
        });
    }
    Ok(unpack_words(&stream.words, bpp, expected_pixels))
}

/// Unpacks `pixel_count` pixels; the caller guarantees enough words.
pub(crate) fn unpack_words(words: &[u32], bpp: BitDepth, pixel_count: usize) -> Vec<u32> {
    let per_word = bpp.pixels_per_word();
    let mask = bpp.max_value();
    let shift = if per_word == 1 { 0 } else { bpp.bits() };
    let mut pixels = Vec::with_capacity(pixel_count);
    'outer: for &word in words {
        for i in 0..per_word {
            if pixels.len() == pixel_count {
                break 'outer;
            }
            pixels.push((word >> (shift * i as u32)) & mask);
        }
    }
    pixels
}

pub fn pixels_to_bytes(pixels: &[u32], bpp: BitDepth) -> Vec<u8> {
    let n = bpp.bytes_per_pixel();
    let mut bytes = Vec::with_capacity(pixels.len() * n);
    for &p in pixels {
        bytes.extend_from_slice(&p.to_le_bytes()[..n]);
    }
    bytes
}

pub fn bytes_to_pixels(bytes: &[u8], bpp: BitDepth) -> Vec<u32> {
    let n = bpp.bytes_per_pixel();
    bytes
        .chunks_exact(n)
        .map(|c| {
            let mut le = [0u8; 4];
            le[..n].copy_from_slice(c);
            u32::from_le_bytes(le)
        })
        .collect()
}

/// Canonical byte serialization; the CRC is computed over this.
pub fn frame_to_bytes(frame: &Frame) -> Vec<u8> {
    pixels_to_bytes(frame.pixels(), frame.bpp())
}

/// A frame plus the CRC trailer line that travels after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramedPayload {
    pub body: Frame,
    pub trailer: Vec<u32>,
}

impl FramedPayload {
    /// Rebuilds a payload from `lines` received lines of `width` pixels; the
    /// last line is the trailer.
    pub fn from_lines(
        width: usize,
        lines: usize,
        bpp: BitDepth,
        mut pixels: Vec<u32>,
    ) -> Result<Self, CodecError> {
        if lines < 2 {
            return Err(CodecError::MalformedPayload(format!(
                "{lines} line(s) received, need a body line and a trailer line"
            )));
        }
        if pixels.len() != width * lines {
            return Err(CodecError::PixelCount {
                expected: width * lines,
                actual: pixels.len(),
            });
        }
        let trailer = pixels.split_off(width * (lines - 1));
        let body = Frame::new(width, lines - 1, bpp, pixels)?;
        if let Some(&bad) = trailer.iter().find(|&&p| p > bpp.max_value()) {
            return Err(CodecError::PixelRange {
                index: body.pixel_count(),
                value: bad,
                bpp: bpp.bits(),
            });
        }
        Ok(FramedPayload { body, trailer })
    }

    pub fn width(&self) -> usize {
        self.body.width()
    }

    pub fn bpp(&self) -> BitDepth {
        self.body.bpp()
    }

    /// Lines on the wire: body height plus the trailer.
    pub fn lines(&self) -> usize {
        self.body.height() + 1
    }

    pub fn pixel_count(&self) -> usize {
        self.width() * self.lines()
    }

    /// Body pixels followed by trailer pixels, in transmission order.
    pub fn wire_pixels(&self) -> impl Iterator<Item = u32> + '_ {
        self.body.pixels().iter().chain(self.trailer.iter()).copied()
    }

    /// CRC value stored in the trailer.
    pub fn trailer_crc(&self) -> u16 {
        let bytes = pixels_to_bytes(&self.trailer, self.bpp());
        u16::from_be_bytes([bytes[0], bytes[1]])
    }

    fn trailer_padding_is_zero(&self) -> bool {
        pixels_to_bytes(&self.trailer, self.bpp())[2..]
            .iter()
            .all(|&b| b == 0)
    }
}

fn trailer_for(crc: u16, width: usize, bpp: BitDepth) -> Vec<u32> {
    let mut bytes = vec![0u8; width * bpp.bytes_per_pixel()];
    bytes[..2].copy_from_slice(&crc.to_be_bytes());
    bytes_to_pixels(&bytes, bpp)
}

/// Appends the CRC trailer line. Fails only for 1-pixel-wide 8 bpp frames,
/// whose trailer line is a single byte.
pub fn append_crc_trailer(frame: Frame) -> Result<FramedPayload, CodecError> {
    let bpp = frame.bpp();
    if frame.width() * bpp.bytes_per_pixel() < 2 {
        return Err(CodecError::TrailerTooNarrow {
            width: frame.width(),
            bpp: bpp.bits(),
        });
    }
    let crc = crc16_xmodem(&frame_to_bytes(&frame));
    let trailer = trailer_for(crc, frame.width(), bpp);
    Ok(FramedPayload {
        body: frame,
        trailer,
    })
}

/// Recomputes the body CRC. `crc_ok` requires the stored CRC to match and
/// the trailer padding to be zero. The body is returned either way.
pub fn verify_and_strip(payload: FramedPayload) -> (Frame, bool) {
    let computed = crc16_xmodem(&frame_to_bytes(&payload.body));
    let ok = computed == payload.trailer_crc() && payload.trailer_padding_is_zero();
    (payload.body, ok)
}
