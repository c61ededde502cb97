//! CRC-16/XMODEM: poly 0x1021, init 0x0000, no reflection, no final XOR.

const POLY: u16 = 0x1021;

const TABLE: [u16; 256] = build_table();

const fn build_table() -> [u16; 256] {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u16) << 8;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ POLY
            } else {
                crc << 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// Streaming CRC-16/XMODEM state, for callers that see bytes incrementally
/// (the receiver accumulates it pixel by pixel).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Crc16Xmodem(u16);

impl Crc16Xmodem {
    pub fn new() -> Self {
        Crc16Xmodem(0)
    }

    pub fn update(&mut self, bytes: &[u8]) {
        let mut crc = self.0;
        for &b in bytes {
            crc = (crc << 8) ^ TABLE[((crc >> 8) as u8 ^ b) as usize];
        }
        self.0 = crc;
    }

    pub fn value(&self) -> u16 {
        self.0
    }
}

pub fn crc16_xmodem(bytes: &[u8]) -> u16 {
    let mut crc = Crc16Xmodem::new();
    crc.update(bytes);
    crc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Bit-serial shift register, one input bit at a time.
    fn bit_serial(bytes: &[u8]) -> u16 {
        let mut reg: u16 = 0;
        for &byte in bytes {
            for i in (0..8).rev() {
                let input = (byte >> i) & 1;
                let feedback = ((reg >> 15) as u8 & 1) ^ input;
                reg <<= 1;
                if feedback == 1 {
                    reg ^= 0x1021;
                }
            }
        }
        reg
    }

    #[test]
    fn check_value() {
        assert_eq!(crc16_xmodem(b"123456789"), 0x31C3);
        assert_eq!(bit_serial(b"123456789"), 0x31C3);
    }

    #[test]
    fn empty_is_initial_value() {
        assert_eq!(crc16_xmodem(&[]), 0x0000);
    }

    #[test]
    fn single_zero_byte_matches_bit_serial() {
        // A zero byte into a zero register leaves it at zero.
        assert_eq!(bit_serial(&[0x00]), 0x0000);
        assert_eq!(crc16_xmodem(&[0x00]), bit_serial(&[0x00]));
    }

    #[test]
    fn table_matches_bit_serial_on_every_single_byte() {
        for b in 0..=255u8 {
            assert_eq!(crc16_xmodem(&[b]), bit_serial(&[b]), "byte {b:#04x}");
        }
    }

    #[test]
    fn streaming_equals_one_shot() {
        let data: Vec<u8> = (0..200u32).map(|i| (i * 37 % 251) as u8).collect();
        let mut crc = Crc16Xmodem::new();
        for chunk in data.chunks(7) {
            crc.update(chunk);
        }
        assert_eq!(crc.value(), crc16_xmodem(&data));
        assert_eq!(crc.value(), bit_serial(&data));
    }
}
