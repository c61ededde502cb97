use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::BusError;
use crate::frame::BitDepth;

/// Frame geometry of the body (the trailer line is implied).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ControlRegisters {
    pub frame_width: u32,
    pub frame_height: u32,
    pub bpp: BitDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct StatusRegisters {
    pub tx_crc: u16,
    pub rx_crc: u16,
    pub crc_ok: bool,
    pub frames_transmitted: u64,
    pub frames_received: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Register {
    FrameWidth,
    FrameHeight,
    Bpp,
    TxCrc,
    RxCrc,
    CrcOk,
    FramesTransmitted,
    FramesReceived,
}

impl Register {
    pub const ALL: [Register; 8] = [
        Register::FrameWidth,
        Register::FrameHeight,
        Register::Bpp,
        Register::TxCrc,
        Register::RxCrc,
        Register::CrcOk,
        Register::FramesTransmitted,
        Register::FramesReceived,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Register::FrameWidth => "frame_width",
            Register::FrameHeight => "frame_height",
            Register::Bpp => "bpp",
            Register::TxCrc => "tx_crc",
            Register::RxCrc => "rx_crc",
            Register::CrcOk => "crc_ok",
            Register::FramesTransmitted => "frames_transmitted",
            Register::FramesReceived => "frames_received",
        }
    }

    pub fn is_control(self) -> bool {
        matches!(self, Register::FrameWidth | Register::FrameHeight | Register::Bpp)
    }
}

impl FromStr for Register {
    type Err = BusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Register::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| BusError::UnknownRegister(s.to_string()))
    }
}

impl fmt::Display for Register {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Control/status registers of one interface.
///
/// Control writes land in a shadow copy and take effect at the next frame
/// boundary ([`RegisterFile::latch`]); reads return the values in effect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegisterFile {
    control: ControlRegisters,
    #[serde(skip)]
    pending: ControlRegisters,
    status: StatusRegisters,
}

impl RegisterFile {
    pub fn new(control: ControlRegisters) -> Self {
        RegisterFile {
            control,
            pending: control,
            status: StatusRegisters::default(),
        }
    }

    pub fn control(&self) -> ControlRegisters {
        self.control
    }

    pub fn pending_control(&self) -> ControlRegisters {
        self.pending
    }

    pub fn status(&self) -> StatusRegisters {
        self.status
    }

    pub fn read(&self, name: &str) -> Result<u64, BusError> {
        Ok(self.read_register(name.parse()?))
    }

    pub fn read_register(&self, reg: Register) -> u64 {
        let (c, s) = (&self.control, &self.status);
        match reg {
            Register::FrameWidth => c.frame_width as u64,
            Register::FrameHeight => c.frame_height as u64,
            Register::Bpp => c.bpp.bits() as u64,
            Register::TxCrc => s.tx_crc as u64,
            Register::RxCrc => s.rx_crc as u64,
            Register::CrcOk => s.crc_ok as u64,
            Register::FramesTransmitted => s.frames_transmitted,
            Register::FramesReceived => s.frames_received,
        }
    }

    pub fn write(&mut self, name: &str, value: u64) -> Result<(), BusError> {
        let reg: Register = name.parse()?;
        let as_u32 = || {
            u32::try_from(value)
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| BusError::Config(format!("{reg} must be in 1..=u32::MAX, got {value}")))
        };
        match reg {
            Register::FrameWidth => self.pending.frame_width = as_u32()?,
            Register::FrameHeight => self.pending.frame_height = as_u32()?,
            Register::Bpp => {
                self.pending.bpp = BitDepth::from_bits(value as u32)
                    .filter(|_| value <= 24)
                    .ok_or_else(|| BusError::Config(format!("bpp must be 8, 16 or 24, got {value}")))?
            }
            _ => return Err(BusError::ReadOnlyRegister(reg.name().to_string())),
        }
        Ok(())
    }

    /// Frame boundary: shadow control values take effect.
    pub fn latch(&mut self) -> ControlRegisters {
        self.control = self.pending;
        self.control
    }

    pub(crate) fn record_transmitted(&mut self, crc: u16) {
        self.status.tx_crc = crc;
        self.status.frames_transmitted += 1;
    }

    pub(crate) fn record_received(&mut self, rx_crc: u16, crc_ok: bool) {
        self.status.rx_crc = rx_crc;
        self.status.crc_ok = crc_ok;
        self.status.frames_received += 1;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("register file serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regs() -> RegisterFile {
        RegisterFile::new(ControlRegisters {
            frame_width: 8,
            frame_height: 4,
            bpp: BitDepth::Eight,
        })
    }

    #[test]
    fn unknown_register_is_addressing_error() {
        let mut r = regs();
        assert!(matches!(r.read("gain"), Err(BusError::UnknownRegister(_))));
        assert!(matches!(r.write("gain", 1), Err(BusError::UnknownRegister(_))));
    }

    #[test]
    fn status_registers_are_read_only() {
        let mut r = regs();
        assert!(matches!(r.write("frames_received", 3), Err(BusError::ReadOnlyRegister(_))));
    }

    #[test]
    fn control_write_latches_at_boundary() {
        let mut r = regs();
        r.write("bpp", 16).unwrap();
        assert_eq!(r.read("bpp").unwrap(), 8);
        r.latch();
        assert_eq!(r.read("bpp").unwrap(), 16);
        assert!(r.write("bpp", 12).is_err());
        assert!(r.write("frame_width", 0).is_err());
    }

    #[test]
    fn json_dump_has_status_and_control() {
        let mut r = regs();
        r.record_transmitted(0x31C3);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["status"]["tx_crc"], 0x31C3);
        assert_eq!(v["status"]["frames_transmitted"], 1);
        assert_eq!(v["control"]["bpp"], 8);
    }
}
