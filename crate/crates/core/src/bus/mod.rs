//! Cycle-level model of the CIF (FPGA to VPU) and LCD (VPU to FPGA) parallel
//! pixel buses.
//!
//! One pixel moves per pixel-clock cycle and there are no blanking intervals,
//! so a frame of `n` pixels occupies exactly `n` cycles.

mod endpoint;
mod events;
mod fifo;
mod registers;

pub use endpoint::{CifTransmitter, LcdReceiver};
pub use events::{
    deserialize_frame, inject_errors, serialize_frame, BusEvent, BusEventKind, BusEventStream,
    BitFlip,
};
pub use fifo::{
    peak_occupancy, simulate_cdc, CdcReport, DualClockFifo, ProducerPolicy, PushOutcome,
};
pub use registers::{ControlRegisters, Register, RegisterFile, StatusRegisters};

use serde::{Deserialize, Serialize};
use std::num::NonZeroU64;
use std::time::Duration;

use crate::error::BusError;
use crate::frame::BitDepth;

/// Pixel clock frequency in Hz. Always non-zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PixelClock(NonZeroU64);

impl PixelClock {
    pub const MHZ_50: PixelClock = PixelClock(NonZeroU64::new(50_000_000).unwrap());
    pub const MHZ_90: PixelClock = PixelClock(NonZeroU64::new(90_000_000).unwrap());
    pub const MHZ_100: PixelClock = PixelClock(NonZeroU64::new(100_000_000).unwrap());

    pub fn new(hz: u64) -> Result<Self, BusError> {
        NonZeroU64::new(hz)
            .map(PixelClock)
            .ok_or_else(|| BusError::Config("pixel clock frequency must be positive".into()))
    }

    pub fn hz(self) -> u64 {
        self.0.get()
    }

    /// Clock period rounded to the nearest picosecond.
    pub fn period_ps(self) -> u64 {
        (1_000_000_000_000u128 + self.hz() as u128 / 2) as u64 / self.hz()
    }

    /// Time of the start of cycle `cycle`, rounded to the nearest nanosecond.
    pub fn cycles_to_duration(self, cycles: u64) -> Duration {
        let hz = self.hz() as u128;
        let nanos = (cycles as u128 * 1_000_000_000 + hz / 2) / hz;
        Duration::from_nanos(nanos as u64)
    }
}

impl TryFrom<u64> for PixelClock {
    type Error = BusError;

    fn try_from(hz: u64) -> Result<Self, BusError> {
        PixelClock::new(hz)
    }
}

impl From<PixelClock> for u64 {
    fn from(c: PixelClock) -> u64 {
        c.hz()
    }
}

/// Geometry and clocking of one bus direction. `height` counts every line on
/// the wire, including the CRC trailer line of a framed payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BusConfig {
    pub frequency: PixelClock,
    pub bpp: BitDepth,
    pub width: usize,
    pub height: usize,
}

impl BusConfig {
    pub fn new(frequency: PixelClock, bpp: BitDepth, width: usize, height: usize) -> Self {
        BusConfig {
            frequency,
            bpp,
            width,
            height,
        }
    }

    /// Config for a body of `width`x`body_height` plus its trailer line.
    pub fn framed(frequency: PixelClock, bpp: BitDepth, width: usize, body_height: usize) -> Self {
        BusConfig::new(frequency, bpp, width, body_height + 1)
    }

    pub fn pixel_count(&self) -> u64 {
        (self.width * self.height) as u64
    }

    /// FIFO depth used when none is configured: two full lines.
    pub fn default_fifo_capacity(&self) -> usize {
        2 * self.width
    }
}

/// Wire time for `pixel_count` pixels at one pixel per clock.
pub fn transfer_time(pixel_count: u64, frequency: PixelClock) -> Duration {
    frequency.cycles_to_duration(pixel_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_megapixel_at_50mhz() {
        let t = transfer_time(1024 * 1024, PixelClock::MHZ_50);
        assert_eq!(t, Duration::from_nanos(20_971_520));
    }

    #[test]
    fn four_megapixel_at_50mhz() {
        let t = transfer_time(2048 * 2048, PixelClock::MHZ_50);
        assert_eq!(t, Duration::from_nanos(83_886_080));
    }

    #[test]
    fn zero_pixels_take_no_time() {
        assert_eq!(transfer_time(0, PixelClock::MHZ_100), Duration::ZERO);
    }

    #[test]
    fn zero_frequency_rejected() {
        assert!(PixelClock::new(0).is_err());
        assert_eq!(PixelClock::MHZ_90.period_ps(), 11_111);
        assert_eq!(PixelClock::MHZ_100.period_ps(), 10_000);
    }
}
