//! Scenario files: one end-to-end run described in JSON.

use copro::bus::{BitFlip, PixelClock};
use copro::kernels::{Camera, ConvKernel};
use copro::pipeline::{Benchmark, Mode, Provenance};
use copro::BitDepth;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Environment variable naming the fixture root that relative input paths
/// resolve against.
pub const FIXTURES_ENV: &str = "COPRO_FIXTURES";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub benchmark: Benchmark,
    /// Geometry of the frame on the input (CIF) bus.
    pub bus: BusSpec,
    pub mode: Mode,
    #[serde(default)]
    pub inputs: Inputs,
    pub timing: TimingSource,
    /// Drives seeded weights and the synthetic full-size inputs.
    #[serde(default)]
    pub seed: u64,
    /// Frames pushed through the discrete-event model.
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default)]
    pub kernel: Option<ConvKernel>,
    #[serde(default)]
    pub camera: Option<Camera>,
    /// x, y, z, then X-Y-Z Euler angles in radians.
    #[serde(default)]
    pub pose: Option<[f64; 6]>,
    /// Largest per-sample absolute difference that still matches the golden.
    #[serde(default)]
    pub golden_tolerance: f64,
    #[serde(default)]
    pub inject_errors: Injections,
}

fn default_frames() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusSpec {
    pub frequency_hz: PixelClock,
    pub bpp: BitDepth,
    pub width: usize,
    pub height: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub image: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub golden: Option<PathBuf>,
}

/// Bit flips applied to each link's pixel stream before reception.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injections {
    #[serde(default)]
    pub cif: Vec<BitFlip>,
    #[serde(default)]
    pub lcd: Vec<BitFlip>,
}

impl Injections {
    pub fn is_empty(&self) -> bool {
        self.cif.is_empty() && self.lcd.is_empty()
    }
}

/// Where the component times come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimingSource {
    /// The bundled row for this benchmark.
    Published,
    /// Bus and buffer times from the run's own geometry; the VPU time is
    /// supplied (or measured on this host when tagged `measured-host` and
    /// left out).
    Derived {
        #[serde(default = "default_rate")]
        buffer_rate_ms_per_mpixel: f64,
        #[serde(default)]
        vpu_time_ms: Option<f64>,
        vpu_provenance: Provenance,
    },
}

fn default_rate() -> f64 {
    42.0
}

impl Scenario {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|source| CliError::Parse {
            path: origin.display().to_string(),
            source,
        })
    }

    /// Reads a scenario file. Relative input paths resolve against
    /// `$COPRO_FIXTURES`, or else the parent of the scenario's directory
    /// (scenarios live in `<root>/scenarios/`).
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let scenario = Scenario::from_json(&text, path)?;
        let root = match std::env::var_os(FIXTURES_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => path
                .parent()
                .and_then(Path::parent)
                .map(Path::to_path_buf)
                .unwrap_or_default(),
        };
        Ok((scenario, root))
    }

    /// Structural checks that do not need any input file.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.frames < 3 {
            return Err(CliError::Config(format!("frames must be at least 3, got {}", self.frames)));
        }
        if !(self.golden_tolerance.is_finite() && self.golden_tolerance >= 0.0) {
            return Err(CliError::Config("golden_tolerance must be a non-negative number".into()));
        }
        if let (Benchmark::Convolution(k), Some(kernel)) = (self.benchmark, &self.kernel) {
            if kernel.size() != k {
                return Err(CliError::Config(format!(
                    "benchmark {} but kernel is {}x{}",
                    self.benchmark,
                    kernel.size(),
                    kernel.size()
                )));
            }
        }
        if self.kernel.is_some() && !matches!(self.benchmark, Benchmark::Convolution(_)) {
            return Err(CliError::Config(format!("a kernel makes no sense for {}", self.benchmark)));
        }
        if let TimingSource::Derived {
            buffer_rate_ms_per_mpixel,
            vpu_time_ms,
            vpu_provenance,
        } = &self.timing
        {
            if !(buffer_rate_ms_per_mpixel.is_finite() && *buffer_rate_ms_per_mpixel > 0.0) {
                return Err(CliError::Config("buffer_rate_ms_per_mpixel must be positive".into()));
            }
            if *vpu_provenance == Provenance::Derived {
                return Err(CliError::Config("vpu time provenance must be published or measured-host".into()));
            }
            match vpu_time_ms {
                Some(ms) if !(ms.is_finite() && *ms >= 0.0) => {
                    return Err(CliError::Config(format!("vpu_time_ms must be >= 0, got {ms}")))
                }
                None if *vpu_provenance == Provenance::Published => {
                    return Err(CliError::Config("published timing needs vpu_time_ms".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn resolve(&self, root: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            root.join(p)
        }
    }

    /// Resolved path of a required input, or a configuration error naming it.
    pub fn input(&self, root: &Path, field: &str, p: Option<&PathBuf>) -> Result<PathBuf, CliError> {
        let p = p.ok_or_else(|| CliError::Config(format!("{} needs inputs.{field}", self.benchmark)))?;
        let full = self.resolve(root, p);
        if !full.is_file() {
            return Err(CliError::Config(format!("inputs.{field}: {} does not exist", full.display())));
        }
        Ok(full)
    }
}
