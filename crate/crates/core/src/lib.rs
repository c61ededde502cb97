//! Desk-scale simulator of an FPGA and VPU co-processing link.
//!
//! * [`codec`] and [`crc`]: pixel/word packing, byte serialization and the
//!   CRC-16/XMODEM trailer line.
//! * [`bus`]: cycle-level CIF/LCD framing, dual-clock FIFOs and the
//!   control/status register file.
//! * [`kernels`]: the four benchmark workloads with band partitioning.
//! * [`pipeline`]: unmasked/masked timing formulas and the discrete-event
//!   model of the streaming pipeline.

pub mod bus;
pub mod codec;
pub mod crc;
pub mod error;
pub mod frame;
pub mod image_io;
pub mod kernels;
pub mod pipeline;

pub use error::{BusError, CodecError, KernelError, PipelineError};
pub use frame::{BitDepth, Frame};
