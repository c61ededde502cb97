//! Run reports and their JSON/CSV renderings.

use copro::pipeline::{Benchmark, Mode, PipelineReport, TaggedTime, TaggedTimes};
use copro::BitDepth;
use serde::Serialize;
use std::fmt::Write as _;

use crate::golden::GoldenReport;

/// One direction of the link as observed by the receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkReport {
    pub width: usize,
    pub height: usize,
    pub bpp: BitDepth,
    /// Pixel cycles including the CRC trailer line.
    pub wire_cycles: u64,
    /// Body transfer time, n / f.
    pub transfer_ms: f64,
    pub flips_injected: usize,
    pub tx_crc: String,
    pub rx_crc: String,
    pub crc_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Functional {
    pub cif: LinkReport,
    /// Absent when the kernel rejected a corrupted input.
    pub lcd: Option<LinkReport>,
    pub crc_ok: bool,
    pub kernel_error: Option<String>,
    /// CRC-16/XMODEM of the received output bytes.
    pub output_checksum: Option<String>,
    pub golden: Option<GoldenReport>,
    pub golden_match: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Performance {
    pub mode: Mode,
    pub buffer_rate_ms_per_mpixel: f64,
    /// Every component time with its provenance tag.
    pub times: TaggedTimes,
    pub latency_ms: f64,
    pub period_ms: f64,
    pub fps: f64,
    pub simulation_agrees: bool,
    pub simulation: PipelineReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub strict: bool,
    pub exit_code: u8,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub benchmark: Benchmark,
    pub seed: u64,
    pub full_size: bool,
    pub functional: Functional,
    pub performance: Performance,
    pub verdict: Verdict,
}

const CSV_HEADER: &str = "scenario,benchmark,mode,\
cif_ms,cif_src,vpu_ms,vpu_src,lcd_ms,lcd_src,cif_buffer_ms,cif_buffer_src,lcd_buffer_ms,lcd_buffer_src,\
latency_ms,fps,sim_latency_ms,sim_fps,crc_ok_cif,crc_ok_lcd,output_checksum,golden_match,golden_max_abs_diff,pass";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Header plus one row, the columns of the reference timing table.
    pub fn to_csv(&self) -> String {
        let p = &self.performance;
        let f = &self.functional;
        let t = |x: &TaggedTime| format!("{:.3},{}", x.value.as_secs_f64() * 1e3, x.provenance);
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{},{},{},{},{},{}",
            self.scenario.replace(',', ";"),
            self.benchmark,
            p.mode,
            t(&p.times.cif),
            t(&p.times.vpu),
            t(&p.times.lcd),
            t(&p.times.cif_buffer),
            t(&p.times.lcd_buffer),
            p.latency_ms,
            p.fps,
            p.simulation.latency.as_secs_f64() * 1e3,
            p.simulation.throughput,
            f.cif.crc_ok,
            opt(f.lcd.as_ref().map(|l| l.crc_ok)),
            opt(f.output_checksum.as_ref()),
            opt(f.golden_match),
            opt(f.golden.as_ref().map(|g| g.max_abs_diff)),
            self.verdict.pass,
        );
        out
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn header_has_23_columns() {
        assert_eq!(super::CSV_HEADER.split(',').count(), 23);
    }
}
