use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{self, Write};

use super::BusConfig;
use crate::codec::FramedPayload;
use crate::error::BusError;
use crate::frame::BitDepth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BusEventKind {
    VsyncStart,
    HsyncStart,
    Pixel(u32),
    FrameEnd,
}

impl BusEventKind {
    pub fn name(&self) -> &'static str {
        match self {
            BusEventKind::VsyncStart => "VSYNC_START",
            BusEventKind::HsyncStart => "HSYNC_START",
            BusEventKind::Pixel(_) => "PIXEL",
            BusEventKind::FrameEnd => "FRAME_END",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusEvent {
    pub cycle: u64,
    pub kind: BusEventKind,
}

impl fmt::Display for BusEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            BusEventKind::Pixel(v) => write!(f, "{},{},{:#x}", self.cycle, self.kind.name(), v),
            _ => write!(f, "{},{},", self.cycle, self.kind.name()),
        }
    }
}

/// Cycle-indexed wire activity for one frame. Sync events share their cycle
/// with the first pixel they frame; `FRAME_END` sits on the cycle after the
/// last pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusEventStream {
    pub bpp: BitDepth,
    pub events: Vec<BusEvent>,
}

impl BusEventStream {
    pub fn pixel_events(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.events.iter().filter_map(|e| match e.kind {
            BusEventKind::Pixel(v) => Some((e.cycle, v)),
            _ => None,
        })
    }

    /// Cycle of the final event, i.e. the number of active cycles.
    pub fn final_cycle(&self) -> u64 {
        self.events.last().map_or(0, |e| e.cycle)
    }

    /// Writes `cycle,kind,value` rows; pixel values are hex, sync rows leave
    /// `value` empty.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "cycle,kind,value")?;
        for e in &self.events {
            writeln!(out, "{e}")?;
        }
        Ok(())
    }

    fn pixel_index_at(&self, cycle: u64) -> Option<usize> {
        let start = self.events.partition_point(|e| e.cycle < cycle);
        self.events[start..]
            .iter()
            .take_while(|e| e.cycle == cycle)
            .position(|e| matches!(e.kind, BusEventKind::Pixel(_)))
            .map(|i| start + i)
    }
}

fn check_geometry(payload: &FramedPayload, config: &BusConfig) -> Result<(), BusError> {
    if payload.width() != config.width
        || payload.lines() != config.height
        || payload.bpp() != config.bpp
    {
        return Err(BusError::Config(format!(
            "payload is {}x{} lines at {}, bus is configured for {}x{} at {}",
            payload.width(),
            payload.lines(),
            payload.bpp(),
            config.width,
            config.height,
            config.bpp
        )));
    }
    Ok(())
}

/// CIF/LCD transmit side: drives vsync, one hsync per line and one pixel per
/// cycle.
pub fn serialize_frame(
    payload: &FramedPayload,
    config: &BusConfig,
) -> Result<BusEventStream, BusError> {
    check_geometry(payload, config)?;
    let width = config.width as u64;
    let mut events = Vec::with_capacity(payload.pixel_count() + config.height + 2);
    events.push(BusEvent {
        cycle: 0,
        kind: BusEventKind::VsyncStart,
    });
    let mut cycle = 0u64;
    for (i, value) in payload.wire_pixels().enumerate() {
        if (i as u64).is_multiple_of(width) {
            events.push(BusEvent {
                cycle,
                kind: BusEventKind::HsyncStart,
            });
        }
        events.push(BusEvent {
            cycle,
            kind: BusEventKind::Pixel(value),
        });
        cycle += 1;
    }
    events.push(BusEvent {
        cycle,
        kind: BusEventKind::FrameEnd,
    });
    Ok(BusEventStream {
        bpp: config.bpp,
        events,
    })
}

fn framing(cycle: u64, reason: impl Into<String>) -> BusError {
    BusError::Framing {
        cycle,
        reason: reason.into(),
    }
}

/// Receive side: rebuilds the payload from sync-framed pixels, rejecting the
/// stream at the first cycle that breaks the framing rules.
pub fn deserialize_frame(
    stream: &BusEventStream,
    config: &BusConfig,
) -> Result<FramedPayload, BusError> {
    if stream.bpp != config.bpp {
        return Err(BusError::Config(format!(
            "stream carries {} pixels, bus is configured for {}",
            stream.bpp, config.bpp
        )));
    }
    let mut events = stream.events.iter();
    match events.next() {
        Some(BusEvent {
            kind: BusEventKind::VsyncStart,
            cycle: 0,
        }) => {}
        Some(e) => return Err(framing(e.cycle, format!("expected VSYNC_START at cycle 0, found {}", e.kind.name()))),
        None => return Err(framing(0, "empty stream")),
    }

    let width = config.width;
    let mut pixels = Vec::with_capacity(width * config.height);
    let mut lines = 0usize;
    let mut in_line = 0usize;
    let mut next_cycle = 0u64;
    let mut ended = false;

    for e in events {
        if ended {
            return Err(framing(e.cycle, format!("{} after FRAME_END", e.kind.name())));
        }
        if e.cycle != next_cycle {
            return Err(framing(
                e.cycle,
                format!("{} at cycle {}, expected cycle {}", e.kind.name(), e.cycle, next_cycle),
            ));
        }
        match e.kind {
            BusEventKind::VsyncStart => {
                return Err(framing(e.cycle, "VSYNC_START inside a frame"));
            }
            BusEventKind::HsyncStart => {
                if lines > 0 && in_line < width {
                    return Err(framing(
                        e.cycle,
                        format!("HSYNC_START after {in_line} of {width} pixels"),
                    ));
                }
                if lines == config.height {
                    return Err(framing(e.cycle, format!("more than {} lines", config.height)));
                }
                lines += 1;
                in_line = 0;
            }
            BusEventKind::Pixel(value) => {
                if lines == 0 {
                    return Err(framing(e.cycle, "PIXEL before the first HSYNC_START"));
                }
                if in_line == width {
                    return Err(framing(e.cycle, format!("pixel {} in a {width}-pixel line (missing HSYNC_START)", in_line + 1)));
                }
                pixels.push(value);
                in_line += 1;
                next_cycle += 1;
            }
            BusEventKind::FrameEnd => {
                if lines != config.height || in_line != width {
                    return Err(framing(
                        e.cycle,
                        format!(
                            "FRAME_END after {lines} lines ({in_line} pixels in the last), expected {} lines",
                            config.height
                        ),
                    ));
                }
                ended = true;
            }
        }
    }
    if !ended {
        return Err(framing(next_cycle, "stream ends without FRAME_END"));
    }
    FramedPayload::from_lines(width, lines, config.bpp, pixels).map_err(BusError::from)
}

/// One bit to invert in the pixel driven at `cycle`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitFlip {
    pub cycle: u64,
    pub bit: u32,
}

/// Test harness: flips pixel bits in place of a wire fault. Sync events are
/// never touched.
pub fn inject_errors(stream: &BusEventStream, flips: &[BitFlip]) -> Result<BusEventStream, BusError> {
    let mut out = stream.clone();
    for flip in flips {
        if flip.bit >= stream.bpp.bits() {
            return Err(BusError::BitOutOfRange {
                bit: flip.bit,
                bpp: stream.bpp.bits(),
            });
        }
        let idx = out
            .pixel_index_at(flip.cycle)
            .ok_or(BusError::NotAPixel { cycle: flip.cycle })?;
        if let BusEventKind::Pixel(v) = &mut out.events[idx].kind {
            *v ^= 1 << flip.bit;
        }
    }
    Ok(out)
}
