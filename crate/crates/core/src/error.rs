use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("unsupported pixel bit depth {0} (expected 8, 16 or 24)")]
    UnsupportedBitDepth(u32),
    #[error("frame geometry {width}x{height} is empty")]
    EmptyGeometry { width: usize, height: usize },
    #[error("expected {expected} pixels, got {actual}")]
    PixelCount { expected: usize, actual: usize },
    #[error("pixel {index} has value {value:#x}, which does not fit in {bpp} bits")]
    PixelRange { index: usize, value: u32, bpp: u32 },
    #[error("malformed word stream: {words} words cannot hold exactly {pixels} pixels at {bpp} bpp")]
    MalformedStream { words: usize, pixels: usize, bpp: u32 },
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("trailer line of {width} pixels at {bpp} bpp is too narrow for a 16-bit CRC")]
    TrailerTooNarrow { width: usize, bpp: u32 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BusError {
    #[error("bus configuration error: {0}")]
    Config(String),
    #[error("framing error at cycle {cycle}: {reason}")]
    Framing { cycle: u64, reason: String },
    #[error("error injection references cycle {cycle}, which carries no pixel")]
    NotAPixel { cycle: u64 },
    #[error("bit index {bit} is out of range for {bpp} bpp")]
    BitOutOfRange { bit: u32, bpp: u32 },
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register `{0}` is read-only")]
    ReadOnlyRegister(String),
    #[error("transmitter is busy with a frame")]
    Busy,
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("partition error: {0}")]
    Partition(String),
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("throughput is undefined when every component time is zero")]
    UndefinedThroughput,
    #[error("configuration error: {0}")]
    Config(String),
}
