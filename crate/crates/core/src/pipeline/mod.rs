//! System-level timing: closed-form unmasked/masked latency and throughput,
//! plus a discrete-event model of the streaming pipeline to cross-check them.

mod benchmark;
mod sim;
mod table;

pub use benchmark::{derive_component_times, Benchmark, BenchmarkGeometry, Provenance, TaggedTime, TaggedTimes};
pub use sim::{simulate_stream, PipelineReport, Stage, StageSpan, TICK};
pub use table::{
    reproduce_table2, Cell, DatasetRow, PublishedFigures, PublishedTimes, ReferenceTable, TableRow, TimingDataset,
    FPS_ABS, LATENCY_ABS, LATENCY_REL, PUBLISHED_DATASET,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::time::Duration;

use crate::error::PipelineError;
use crate::frame::Frame;

/// Per-stage durations of one frame's trip through the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentTimes {
    pub cif: Duration,
    pub vpu: Duration,
    pub lcd: Duration,
    pub cif_buffer: Duration,
    pub lcd_buffer: Duration,
}

impl ComponentTimes {
    pub fn from_ms(cif: f64, vpu: f64, lcd: f64, cif_buffer: f64, lcd_buffer: f64) -> Self {
        let d = |ms: f64| Duration::from_secs_f64(ms.max(0.0) / 1e3);
        ComponentTimes {
            cif: d(cif),
            vpu: d(vpu),
            lcd: d(lcd),
            cif_buffer: d(cif_buffer),
            lcd_buffer: d(lcd_buffer),
        }
    }

    /// Serial I/O: receive, compute, transmit.
    pub fn serial_chain(&self) -> Duration {
        self.cif + self.vpu + self.lcd
    }

    /// Work of the I/O process in one masked cycle: buffer the previous
    /// output, receive and buffer the next input, transmit the previous
    /// output.
    pub fn masked_io_chain(&self) -> Duration {
        self.lcd_buffer + self.cif + self.cif_buffer + self.lcd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Unmasked,
    Masked,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Unmasked, Mode::Masked];
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Unmasked => "unmasked",
            Mode::Masked => "masked",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "unmasked" => Ok(Mode::Unmasked),
            "masked" => Ok(Mode::Masked),
            _ => Err(PipelineError::Config(format!("unknown mode `{s}` (unmasked|masked)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub latency: Duration,
    /// Steady-state time between frame completions.
    pub period: Duration,
    /// Frames per second, `1 / period`.
    pub throughput: f64,
}

impl Metrics {
    fn new(latency: Duration, period: Duration) -> Result<Self, PipelineError> {
        if period.is_zero() {
            return Err(PipelineError::UndefinedThroughput);
        }
        Ok(Metrics {
            latency,
            period,
            throughput: 1.0 / period.as_secs_f64(),
        })
    }
}

pub fn unmasked_metrics(t: &ComponentTimes) -> Result<Metrics, PipelineError> {
    let chain = t.serial_chain();
    Metrics::new(chain, chain)
}

/// Pipelined I/O: one process does all I/O and buffering while the other
/// computes, and both meet at a barrier every cycle, so
///
/// ```text
/// period  = max{vpu, lcd_buf + cif + cif_buf + lcd}
/// latency = max{vpu - lcd_buf, cif + cif_buf + lcd} + period
///         + (lcd_buf + cif + cif_buf + lcd)
/// ```
///
/// `vpu - lcd_buf` floors at zero.
pub fn masked_metrics(t: &ComponentTimes) -> Result<Metrics, PipelineError> {
    let chain = t.masked_io_chain();
    let period = t.vpu.max(chain);
    let lead = t.vpu.saturating_sub(t.lcd_buffer).max(t.cif + t.cif_buffer + t.lcd);
    Metrics::new(lead + period + chain, period)
}

pub fn metrics(t: &ComponentTimes, mode: Mode) -> Result<Metrics, PipelineError> {
    match mode {
        Mode::Unmasked => unmasked_metrics(t),
        Mode::Masked => masked_metrics(t),
    }
}

/// DRAM staging cost per megapixel (2^20 samples).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferRate {
    per_mpixel: Duration,
}

impl BufferRate {
    pub const MPIXEL: u64 = 1 << 20;

    pub fn new(per_mpixel: Duration) -> Result<Self, PipelineError> {
        if per_mpixel.is_zero() {
            return Err(PipelineError::Config("buffer rate must be positive".into()));
        }
        Ok(BufferRate { per_mpixel })
    }

    pub fn from_ms(ms: f64) -> Result<Self, PipelineError> {
        if !(ms.is_finite() && ms > 0.0) {
            return Err(PipelineError::Config(format!("buffer rate must be positive, got {ms} ms")));
        }
        BufferRate::new(Duration::from_secs_f64(ms / 1e3))
    }

    pub fn per_mpixel(&self) -> Duration {
        self.per_mpixel
    }

    /// Copy time for `samples` pixels (or channel samples), independent of
    /// bit depth.
    pub fn time_for(&self, samples: u64) -> Duration {
        let nanos = self.per_mpixel.as_nanos() * samples as u128 / Self::MPIXEL as u128;
        Duration::from_nanos(nanos as u64)
    }
}

impl Default for BufferRate {
    /// 42 ms per megapixel.
    fn default() -> Self {
        BufferRate {
            per_mpixel: Duration::from_millis(42),
        }
    }
}

pub fn buffer_time(frame: &Frame, rate: &BufferRate) -> Duration {
    rate.time_for(frame.pixel_count() as u64)
}
