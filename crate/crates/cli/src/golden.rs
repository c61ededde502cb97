//! Output-versus-reference comparison.

use copro::Frame;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenReport {
    pub samples: usize,
    pub differing: usize,
    pub max_abs_diff: f64,
    pub mean_abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl GoldenReport {
    fn from_diffs(diffs: impl ExactSizeIterator<Item = f64>, tolerance: f64) -> Self {
        let samples = diffs.len();
        let (mut max, mut sum, mut differing) = (0.0f64, 0.0f64, 0);
        for d in diffs {
            max = max.max(d);
            sum += d;
            differing += usize::from(d > 0.0);
        }
        GoldenReport {
            samples,
            differing,
            max_abs_diff: max,
            mean_abs_diff: if samples == 0 { 0.0 } else { sum / samples as f64 },
            tolerance,
            pass: max <= tolerance,
        }
    }
}

/// Per-pixel absolute difference; passes iff the largest one is within
/// `tolerance`.
pub fn compare_golden(output: &Frame, golden: &Frame, tolerance: f64) -> Result<GoldenReport, CliError> {
    if (output.width(), output.height(), output.bpp()) != (golden.width(), golden.height(), golden.bpp()) {
        return Err(CliError::Geometry(format!(
            "output is {}x{} at {} bpp, golden is {}x{} at {} bpp",
            output.width(),
            output.height(),
            output.bpp(),
            golden.width(),
            golden.height(),
            golden.bpp()
        )));
    }
    let diffs = output
        .pixels()
        .iter()
        .zip(golden.pixels())
        .map(|(&a, &b)| a.abs_diff(b) as f64);
    Ok(GoldenReport::from_diffs(diffs, tolerance))
}

/// Same comparison over score vectors (CNN output).
pub fn compare_scores(output: &[f32], golden: &[f32], tolerance: f64) -> Result<GoldenReport, CliError> {
    if output.len() != golden.len() {
        return Err(CliError::Geometry(format!(
            "{} scores against {} golden scores",
            output.len(),
            golden.len()
        )));
    }
    let diffs = output.iter().zip(golden).map(|(&a, &b)| (a as f64 - b as f64).abs());
    Ok(GoldenReport::from_diffs(diffs, tolerance))
}
