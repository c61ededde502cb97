use super::exec::run_bands;
use super::BandPlan;
use crate::error::KernelError;
use crate::frame::{BitDepth, Frame};

/// 2x2 averaging with stride 2: each output pixel is the floor of the mean of
/// its source block. Output rows are split into bands per `plan`.
pub fn average_binning(frame: &Frame, plan: &BandPlan) -> Result<Frame, KernelError> {
    if frame.bpp() != BitDepth::Eight {
        return Err(KernelError::Geometry(format!(
            "binning expects 8 bpp input, got {}",
            frame.bpp()
        )));
    }
    let (w, h) = (frame.width(), frame.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(KernelError::Geometry(format!(
            "binning needs even dimensions, got {w}x{h}"
        )));
    }
    let (ow, oh) = (w / 2, h / 2);
    let partition = plan.partition(oh)?;
    let src = frame.pixels();
    let mut out = vec![0u32; ow * oh];
    run_bands(plan.executor, &partition, ow, &mut out, |rows, band| {
        for (r, out_row) in rows.zip(band.chunks_exact_mut(ow)) {
            let top = &src[2 * r * w..(2 * r + 1) * w];
            let bottom = &src[(2 * r + 1) * w..(2 * r + 2) * w];
            for (j, px) in out_row.iter_mut().enumerate() {
                let sum = top[2 * j] + top[2 * j + 1] + bottom[2 * j] + bottom[2 * j + 1];
                *px = sum / 4;
            }
        }
    });
    Ok(Frame::new(ow, oh, BitDepth::Eight, out)?)
}
