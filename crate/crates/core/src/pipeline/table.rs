//! Reproduction of the published latency/throughput table from the bundled
//! component times.

use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};
use std::time::Duration;

use super::benchmark::{millis, TaggedTime, TaggedTimes};
use super::{metrics, simulate_stream, Benchmark, BufferRate, Mode, Provenance};
use crate::bus::PixelClock;
use crate::error::PipelineError;

/// The bundled dataset, as JSON.
pub const PUBLISHED_DATASET: &str = include_str!("../../data/published_timings.json");

/// Latency cells match within `max(LATENCY_ABS, LATENCY_REL * published)`.
pub const LATENCY_ABS: Duration = Duration::from_millis(2);
pub const LATENCY_REL: f64 = 0.02;
/// Throughput cells match within this many frames per second.
pub const FPS_ABS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedTimes {
    #[serde(with = "millis")]
    pub cif: Duration,
    #[serde(with = "millis")]
    pub vpu: Duration,
    #[serde(with = "millis")]
    pub lcd: Duration,
    #[serde(with = "millis")]
    pub cif_buffer: Duration,
    #[serde(with = "millis")]
    pub lcd_buffer: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedFigures {
    pub latency_ms: f64,
    pub fps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub benchmark: Benchmark,
    pub label: String,
    pub geometry: String,
    pub times_ms: PublishedTimes,
    pub unmasked: PublishedFigures,
    pub masked: PublishedFigures,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingDataset {
    #[serde(default)]
    pub description: String,
    pub buffer_rate_ms_per_mpixel: f64,
    pub rows: Vec<DatasetRow>,
}

impl TimingDataset {
    pub fn bundled() -> Self {
        TimingDataset::from_json(PUBLISHED_DATASET).expect("bundled dataset parses")
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(format!("timing dataset: {e}")))
    }

    pub fn row(&self, benchmark: Benchmark) -> Option<&DatasetRow> {
        self.rows.iter().find(|r| r.benchmark == benchmark)
    }
}

impl DatasetRow {
    /// Bus and VPU times are published figures; buffer times come from the
    /// published per-megapixel copy rate.
    pub fn tagged_times(&self) -> TaggedTimes {
        let t = &self.times_ms;
        let published = |v| TaggedTime::new(v, Provenance::Published);
        TaggedTimes {
            cif: published(t.cif),
            vpu: published(t.vpu),
            lcd: published(t.lcd),
            cif_buffer: TaggedTime::derived(t.cif_buffer),
            lcd_buffer: TaggedTime::derived(t.lcd_buffer),
        }
    }

    pub fn published(&self, mode: Mode) -> PublishedFigures {
        match mode {
            Mode::Unmasked => self.unmasked,
            Mode::Masked => self.masked,
        }
    }
}

/// One (benchmark, mode) pair: model figures against published ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub mode: Mode,
    pub model_latency_ms: f64,
    pub published_latency_ms: f64,
    pub latency_delta_ms: f64,
    pub latency_tolerance_ms: f64,
    pub latency_ok: bool,
    pub model_fps: f64,
    pub published_fps: f64,
    pub fps_delta: f64,
    pub fps_ok: bool,
    /// Whether the event simulation reproduced the closed-form figures.
    pub simulation_agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub benchmark: Benchmark,
    pub label: String,
    pub geometry: String,
    pub times: TaggedTimes,
    /// Bus times computed from geometry at 50 MHz; informational.
    pub derived_cif_ms: f64,
    pub derived_lcd_ms: f64,
    pub cells: Vec<Cell>,
}

impl TableRow {
    pub fn cell(&self, mode: Mode) -> &Cell {
        self.cells.iter().find(|c| c.mode == mode).expect("both modes present")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceTable {
    pub rows: Vec<TableRow>,
}

fn ms(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1e6
}

/// Model figures for every dataset row (or just `only`), each annotated
/// with its delta from the published value.
pub fn reproduce_table2(dataset: &TimingDataset, only: Option<Benchmark>) -> Result<ReferenceTable, PipelineError> {
    if dataset.rows.is_empty() {
        return Err(PipelineError::Config("timing dataset has no rows".into()));
    }
    let rate = BufferRate::from_ms(dataset.buffer_rate_ms_per_mpixel)?;
    let selected: Vec<&DatasetRow> = match only {
        Some(b) => vec![dataset
            .row(b)
            .ok_or_else(|| PipelineError::Config(format!("no dataset row for `{b}`")))?],
        None => dataset.rows.iter().collect(),
    };

    let mut rows = Vec::with_capacity(selected.len());
    for row in selected {
        let times = row.tagged_times();
        let t = times.times();
        let vpu = Some(times.vpu);
        let derived =
            super::derive_component_times(&row.benchmark.geometry(), PixelClock::MHZ_50, &rate, vpu)?;
        let mut cells = Vec::with_capacity(2);
        for mode in Mode::ALL {
            let m = metrics(&t, mode)?;
            let sim = simulate_stream(&t, mode, 5)?;
            let published = row.published(mode);
            let latency_delta_ms = ms(m.latency) - published.latency_ms;
            let latency_tolerance_ms = ms(LATENCY_ABS).max(LATENCY_REL * published.latency_ms);
            let fps_delta = m.throughput - published.fps;
            cells.push(Cell {
                mode,
                model_latency_ms: ms(m.latency),
                published_latency_ms: published.latency_ms,
                latency_delta_ms,
                latency_tolerance_ms,
                latency_ok: latency_delta_ms.abs() <= latency_tolerance_ms + 1e-9,
                model_fps: m.throughput,
                published_fps: published.fps,
                fps_delta,
                fps_ok: fps_delta.abs() <= FPS_ABS + 1e-9,
                simulation_agrees: sim.latency == m.latency && sim.period == m.period,
            });
        }
        rows.push(TableRow {
            benchmark: row.benchmark,
            label: row.label.clone(),
            geometry: row.geometry.clone(),
            times,
            derived_cif_ms: ms(derived.cif.value),
            derived_lcd_ms: ms(derived.lcd.value),
            cells,
        });
    }
    Ok(ReferenceTable { rows })
}

impl ReferenceTable {
    pub fn cells(&self) -> impl Iterator<Item = (&TableRow, &Cell)> {
        self.rows.iter().flat_map(|r| r.cells.iter().map(move |c| (r, c)))
    }

    pub fn all_within_tolerance(&self) -> bool {
        self.cells().all(|(_, c)| c.latency_ok && c.fps_ok)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    /// One line per (benchmark, mode).
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "benchmark,mode,cif_ms,vpu_ms,lcd_ms,cif_buffer_ms,lcd_buffer_ms,vpu_provenance,\
             model_latency_ms,published_latency_ms,latency_delta_ms,latency_ok,\
             model_fps,published_fps,fps_delta,fps_ok,derived_cif_ms,derived_lcd_ms\n",
        );
        for (r, c) in self.cells() {
            let t = r.times.times();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{:.3},{},{:.3},{},{:.4},{},{:.4},{},{:.4},{:.4}",
                r.benchmark,
                c.mode,
                ms(t.cif),
                ms(t.vpu),
                ms(t.lcd),
                ms(t.cif_buffer),
                ms(t.lcd_buffer),
                r.times.vpu.provenance,
                c.model_latency_ms,
                c.published_latency_ms,
                c.latency_delta_ms,
                c.latency_ok,
                c.model_fps,
                c.published_fps,
                c.fps_delta,
                c.fps_ok,
                r.derived_cif_ms,
                r.derived_lcd_ms,
            );
        }
        s
    }
}

impl fmt::Display for ReferenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<22} {:>6} {:>6} {:>6} | {:>9} {:>7} {:>7} | {:>9} {:>7} {:>7}",
            "benchmark", "cif", "vpu", "lcd", "unm. lat", "fps", "d", "mask lat", "fps", "d"
        )?;
        for r in &self.rows {
            let t = r.times.times();
            write!(f, "{:<22} {:>6.1} {:>6.1} {:>6.1}", r.label, ms(t.cif), ms(t.vpu), ms(t.lcd))?;
            for mode in Mode::ALL {
                let c = r.cell(mode);
                let mark = if c.latency_ok && c.fps_ok { ' ' } else { '!' };
                write!(
                    f,
                    " | {:>7.1}ms {:>7.2} {:>+6.2}{mark}",
                    c.model_latency_ms, c.model_fps, c.fps_delta
                )?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
