use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use super::{BufferRate, ComponentTimes};
use crate::bus::{transfer_time, PixelClock};
use crate::error::PipelineError;
use crate::frame::BitDepth;

const MPIX: usize = 1024 * 1024;

/// The six benchmark workloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Benchmark {
    Binning,
    Convolution(usize),
    Render,
    Cnn,
}

impl Benchmark {
    pub const ALL: [Benchmark; 6] = [
        Benchmark::Binning,
        Benchmark::Convolution(3),
        Benchmark::Convolution(7),
        Benchmark::Convolution(13),
        Benchmark::Render,
        Benchmark::Cnn,
    ];

    /// Wire and buffer geometry at full size (1 MPixel class).
    pub fn geometry(self) -> BenchmarkGeometry {
        match self {
            Benchmark::Binning => BenchmarkGeometry::new(4 * MPIX, BitDepth::Eight, MPIX, BitDepth::Eight),
            Benchmark::Convolution(_) => BenchmarkGeometry::new(MPIX, BitDepth::Eight, MPIX, BitDepth::Eight),
            // Six pose values, each f32 sent as two 16-bit halves. The input
            // is staged through a frame-sized buffer all the same.
            Benchmark::Render => BenchmarkGeometry {
                input_buffer_samples: MPIX,
                ..BenchmarkGeometry::new(12, BitDepth::Sixteen, MPIX, BitDepth::Sixteen)
            },
            // Three 16-bit colour planes in, one score per 128x128 patch out.
            Benchmark::Cnn => BenchmarkGeometry::new(3 * MPIX, BitDepth::Sixteen, 64, BitDepth::Sixteen),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Benchmark::Binning => f.write_str("binning"),
            Benchmark::Convolution(k) => write!(f, "conv{k}"),
            Benchmark::Render => f.write_str("render"),
            Benchmark::Cnn => f.write_str("cnn"),
        }
    }
}

impl FromStr for Benchmark {
    type Err = PipelineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PipelineError::Config(format!("unknown benchmark `{s}` (binning|conv3|conv7|conv13|render|cnn)"));
        match s.to_ascii_lowercase().as_str() {
            "binning" => Ok(Benchmark::Binning),
            "render" => Ok(Benchmark::Render),
            "cnn" => Ok(Benchmark::Cnn),
            other => {
                let k: usize = other
                    .strip_prefix("conv")
                    .map(|k| k.trim_start_matches(['_', 'k']))
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(bad)?;
                if k % 2 == 1 {
                    Ok(Benchmark::Convolution(k))
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl TryFrom<String> for Benchmark {
    type Error = PipelineError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Benchmark> for String {
    fn from(b: Benchmark) -> String {
        b.to_string()
    }
}

/// Sample counts moved over each bus and through each staging buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkGeometry {
    pub input_samples: usize,
    pub input_bpp: BitDepth,
    pub output_samples: usize,
    pub output_bpp: BitDepth,
    pub input_buffer_samples: usize,
    pub output_buffer_samples: usize,
}

impl BenchmarkGeometry {
    pub fn new(input_samples: usize, input_bpp: BitDepth, output_samples: usize, output_bpp: BitDepth) -> Self {
        BenchmarkGeometry {
            input_samples,
            input_bpp,
            output_samples,
            output_bpp,
            input_buffer_samples: input_samples,
            output_buffer_samples: output_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Printed in the published evaluation.
    Published,
    /// Timed on this machine; informational only.
    MeasuredHost,
    /// Computed from geometry, clock and buffer rate.
    Derived,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Published => "published",
            Provenance::MeasuredHost => "measured-host",
            Provenance::Derived => "derived",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedTime {
    #[serde(with = "millis")]
    pub value: Duration,
    pub provenance: Provenance,
}

impl TaggedTime {
    pub fn new(value: Duration, provenance: Provenance) -> Self {
        TaggedTime { value, provenance }
    }

    pub fn derived(value: Duration) -> Self {
        TaggedTime::new(value, Provenance::Derived)
    }
}

/// Component times, each labelled with where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedTimes {
    pub cif: TaggedTime,
    pub vpu: TaggedTime,
    pub lcd: TaggedTime,
    pub cif_buffer: TaggedTime,
    pub lcd_buffer: TaggedTime,
}

impl TaggedTimes {
    pub fn times(&self) -> ComponentTimes {
        ComponentTimes {
            cif: self.cif.value,
            vpu: self.vpu.value,
            lcd: self.lcd.value,
            cif_buffer: self.cif_buffer.value,
            lcd_buffer: self.lcd_buffer.value,
        }
    }
}

/// Durations in (fractional) milliseconds.
pub(crate) mod millis {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_nanos() as f64 / 1e6)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        if !(ms.is_finite() && ms >= 0.0) {
            return Err(serde::de::Error::custom(format!("duration must be >= 0 ms, got {ms}")));
        }
        Ok(Duration::from_nanos((ms * 1e6).round() as u64))
    }
}

/// Bus and buffer times from geometry; the VPU time must be supplied.
pub fn derive_component_times(
    geometry: &BenchmarkGeometry,
    clock: PixelClock,
    rate: &BufferRate,
    vpu: Option<TaggedTime>,
) -> Result<TaggedTimes, PipelineError> {
    let vpu = vpu.ok_or_else(|| PipelineError::Config("vpu_time is required (published or measured-host)".into()))?;
    Ok(TaggedTimes {
        cif: TaggedTime::derived(transfer_time(geometry.input_samples as u64, clock)),
        vpu,
        lcd: TaggedTime::derived(transfer_time(geometry.output_samples as u64, clock)),
        cif_buffer: TaggedTime::derived(rate.time_for(geometry.input_buffer_samples as u64)),
        lcd_buffer: TaggedTime::derived(rate.time_for(geometry.output_buffer_samples as u64)),
    })
}
