//! Argument handling and dispatch for the `copro` binary.

use clap::Parser;
use copro::pipeline::{reproduce_table2, Benchmark, Mode, TimingDataset};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, EXIT_CONFIG, EXIT_FUNCTIONAL, EXIT_PASS};
use crate::run::{run_scenario, write_artifacts, RunOptions};
use crate::scenario::Scenario;

/// Runs co-processing scenarios end to end (frame -> CIF bus -> VPU kernel
/// -> LCD bus -> verify) and reproduces the reference timing table.
///
/// Exit status: 0 pass, 1 functional failure, 2 configuration error.
#[derive(Debug, Parser)]
#[command(name = "copro", version)]
pub struct Args {
    /// Scenario JSON file. Relative inputs resolve against $COPRO_FIXTURES,
    /// or the parent of the scenario's directory.
    #[arg(required_unless_present = "reproduce_table2", conflicts_with = "reproduce_table2")]
    pub scenario: Option<PathBuf>,

    /// Directory for report.json, report.csv and outputs.
    #[arg(short, long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Override the scenario's pipeline mode.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,

    /// Any CRC failure or golden mismatch fails the run.
    #[arg(long)]
    pub strict: bool,

    /// Synthesize full-size (1-4 MPixel) inputs instead of the fixtures.
    #[arg(long)]
    pub full_size: bool,

    /// Also write per-link bus event CSVs and register dumps to --out.
    #[arg(long, requires = "out")]
    pub dump_bus_events: bool,

    /// Print the modelled timing table against the published figures.
    #[arg(long)]
    pub reproduce_table2: bool,

    /// With --reproduce-table2: only this benchmark's row.
    #[arg(long, value_name = "BENCHMARK", value_parser = parse_benchmark)]
    pub row: Option<Benchmark>,

    /// With --reproduce-table2: timing dataset instead of the bundled one.
    #[arg(long, value_name = "JSON")]
    pub dataset: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: copro::PipelineError| e.to_string())
}

fn parse_benchmark(s: &str) -> Result<Benchmark, String> {
    s.parse().map_err(|e: copro::PipelineError| e.to_string())
}

impl Args {
    /// Checks clap cannot express: `requires` on a plain bool flag is
    /// satisfied by its default.
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.reproduce_table2 && (self.row.is_some() || self.dataset.is_some()) {
            return Err(CliError::Config("--row and --dataset only apply to --reproduce-table2".into()));
        }
        Ok(())
    }
}

/// Runs the command and returns the process exit status.
pub fn execute(args: &Args) -> u8 {
    let result = if let Err(e) = args.validate() {
        Err(e)
    } else if args.reproduce_table2 {
        table(args)
    } else {
        scenario(args)
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn scenario(args: &Args) -> Result<u8, CliError> {
    let path = args.scenario.as_deref().expect("clap enforces a scenario");
    let (scenario, root) = Scenario::load(path)?;
    let opts = RunOptions {
        mode: args.mode,
        strict: args.strict,
        full_size: args.full_size,
    };
    let outcome = run_scenario(&scenario, &root, &opts)?;
    if let Some(dir) = &args.out {
        write_artifacts(dir, &outcome, args.dump_bus_events)?;
    }
    let r = &outcome.report;
    let f = &r.functional;
    let p = &r.performance;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{} [{}] crc cif={} lcd={} golden={} | {}: latency {:.1} ms, {:.2} FPS (vpu {:.1} ms, {})",
        r.scenario,
        r.benchmark,
        f.cif.crc_ok,
        f.lcd.as_ref().map_or("n/a".to_string(), |l| l.crc_ok.to_string()),
        f.golden_match.map_or("n/a".to_string(), |g| g.to_string()),
        p.mode,
        p.latency_ms,
        p.fps,
        p.times.vpu.value.as_secs_f64() * 1e3,
        p.times.vpu.provenance,
    );
    for failure in &r.verdict.failures {
        let _ = writeln!(out, "  FAIL: {failure}");
    }
    let _ = writeln!(out, "{}", if r.verdict.pass { "PASS" } else { "FAIL" });
    Ok(r.verdict.exit_code)
}

fn load_dataset(path: &Path) -> Result<TimingDataset, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(TimingDataset::from_json(&text)?)
}

fn table(args: &Args) -> Result<u8, CliError> {
    let dataset = match &args.dataset {
        Some(p) => load_dataset(p)?,
        None => TimingDataset::bundled(),
    };
    let table = reproduce_table2(&dataset, args.row)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (name, body) in [("table2.json", table.to_json()), ("table2.csv", table.to_csv())] {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| CliError::io(&p, e))?;
        }
    }
    print!("{table}");
    Ok(if table.all_within_tolerance() {
        EXIT_PASS
    } else {
        EXIT_FUNCTIONAL
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Args::command().debug_assert();
    }

    #[test]
    fn scenario_and_table_are_exclusive() {
        assert!(Args::try_parse_from(["copro"]).is_err());
        assert!(Args::try_parse_from(["copro", "s.json", "--reproduce-table2"]).is_err());
        let stray = Args::try_parse_from(["copro", "s.json", "--row", "cnn"]).unwrap();
        assert!(matches!(stray.validate(), Err(CliError::Config(_))));
        let a = Args::try_parse_from(["copro", "--reproduce-table2", "--row", "conv7"]).unwrap();
        assert_eq!(a.row, Some(Benchmark::Convolution(7)));
    }

    #[test]
    fn mode_and_dump_flags() {
        let a = Args::try_parse_from(["copro", "s.json", "--mode", "masked", "-o", "x", "--dump-bus-events"]).unwrap();
        assert_eq!(a.mode, Some(Mode::Masked));
        assert!(Args::try_parse_from(["copro", "s.json", "--dump-bus-events"]).is_err());
        assert!(Args::try_parse_from(["copro", "s.json", "--mode", "both"]).is_err());
    }
}
