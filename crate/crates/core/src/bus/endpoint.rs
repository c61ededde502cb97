use super::{deserialize_frame, serialize_frame, BusConfig, BusEvent, BusEventKind, BusEventStream, ControlRegisters, PixelClock, RegisterFile};
use crate::codec::{
    append_crc_trailer, frame_to_bytes, unpack_words, verify_and_strip, words_needed,
};
use crate::crc::crc16_xmodem;
use crate::error::{BusError, CodecError};
use crate::frame::Frame;

struct InFlight {
    stream: BusEventStream,
    next: usize,
    crc: u16,
}

/// FPGA-side CIF transmitter: takes 32-bit words from the image buffer,
/// unpacks them at the latched bit depth, appends the CRC line and drives
/// the bus one cycle per [`CifTransmitter::step`].
pub struct CifTransmitter {
    clock: PixelClock,
    regs: RegisterFile,
    current: Option<InFlight>,
}

impl CifTransmitter {
    pub fn new(clock: PixelClock, control: ControlRegisters) -> Self {
        CifTransmitter {
            clock,
            regs: RegisterFile::new(control),
            current: None,
        }
    }

    pub fn registers(&self) -> &RegisterFile {
        &self.regs
    }

    pub fn registers_mut(&mut self) -> &mut RegisterFile {
        &mut self.regs
    }

    pub fn is_busy(&self) -> bool {
        self.current.is_some()
    }

    /// Frame boundary: latches the control registers and queues the frame.
    pub fn start_frame(&mut self, words: &[u32]) -> Result<BusConfig, BusError> {
        if self.is_busy() {
            return Err(BusError::Busy);
        }
        let ctl = self.regs.latch();
        let (width, height) = (ctl.frame_width as usize, ctl.frame_height as usize);
        let pixel_count = width * height;
        if words.len() != words_needed(pixel_count, ctl.bpp) {
            return Err(CodecError::MalformedStream {
                words: words.len(),
                pixels: pixel_count,
                bpp: ctl.bpp.bits(),
            }
            .into());
        }
        let body = Frame::new(width, height, ctl.bpp, unpack_words(words, ctl.bpp, pixel_count))?;
        let crc = crc16_xmodem(&frame_to_bytes(&body));
        let payload = append_crc_trailer(body)?;
        let config = BusConfig::framed(self.clock, ctl.bpp, width, height);
        let stream = serialize_frame(&payload, &config)?;
        self.current = Some(InFlight {
            stream,
            next: 0,
            crc,
        });
        Ok(config)
    }

    /// Advances one pixel clock; returns the events driven on that cycle.
    pub fn step(&mut self) -> Vec<BusEvent> {
        let Some(flight) = self.current.as_mut() else {
            return Vec::new();
        };
        let events = &flight.stream.events;
        let cycle = events[flight.next].cycle;
        let end = events[flight.next..]
            .iter()
            .position(|e| e.cycle != cycle)
            .map_or(events.len(), |n| flight.next + n);
        let out = events[flight.next..end].to_vec();
        flight.next = end;
        if out.iter().any(|e| e.kind == BusEventKind::FrameEnd) {
            let crc = flight.crc;
            self.current = None;
            self.regs.record_transmitted(crc);
        }
        out
    }

    /// Sends one whole frame and returns its event stream.
    pub fn transmit(&mut self, words: &[u32]) -> Result<BusEventStream, BusError> {
        let config = self.start_frame(words)?;
        let mut events = Vec::new();
        while self.is_busy() {
            events.extend(self.step());
        }
        Ok(BusEventStream {
            bpp: config.bpp,
            events,
        })
    }
}

/// FPGA-side LCD receiver: rebuilds frames from the bus and records the CRC
/// outcome in its status registers.
pub struct LcdReceiver {
    clock: PixelClock,
    regs: RegisterFile,
}

impl LcdReceiver {
    pub fn new(clock: PixelClock, control: ControlRegisters) -> Self {
        LcdReceiver {
            clock,
            regs: RegisterFile::new(control),
        }
    }

    pub fn registers(&self) -> &RegisterFile {
        &self.regs
    }

    pub fn registers_mut(&mut self) -> &mut RegisterFile {
        &mut self.regs
    }

    /// Receives one frame. The body is returned with the CRC verdict; framing
    /// errors leave the status registers untouched.
    pub fn receive(&mut self, stream: &BusEventStream) -> Result<(Frame, bool), BusError> {
        let ctl = self.regs.latch();
        let config = BusConfig::framed(
            self.clock,
            ctl.bpp,
            ctl.frame_width as usize,
            ctl.frame_height as usize,
        );
        let payload = deserialize_frame(stream, &config)?;
        let (frame, ok) = verify_and_strip(payload);
        let rx_crc = crc16_xmodem(&frame_to_bytes(&frame));
        self.regs.record_received(rx_crc, ok);
        Ok((frame, ok))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bus::{inject_errors, BitFlip};
    use crate::codec::pack_pixels;
    use crate::frame::BitDepth;

    fn control(w: u32, h: u32, bpp: BitDepth) -> ControlRegisters {
        ControlRegisters {
            frame_width: w,
            frame_height: h,
            bpp,
        }
    }

    #[test]
    fn counters_track_frames() {
        let ctl = control(4, 3, BitDepth::Eight);
        let mut tx = CifTransmitter::new(PixelClock::MHZ_50, ctl);
        let mut rx = LcdReceiver::new(PixelClock::MHZ_50, ctl);
        for k in 1..=3u32 {
            let pixels: Vec<u32> = (0..12).map(|i| (i * k) & 0xFF).collect();
            let stream = tx.transmit(&pack_pixels(&pixels, BitDepth::Eight)).unwrap();
            let (frame, ok) = rx.receive(&stream).unwrap();
            assert!(ok);
            assert_eq!(frame.pixels(), &pixels[..]);
            assert_eq!(tx.registers().read("frames_transmitted").unwrap(), k as u64);
            assert_eq!(rx.registers().read("frames_received").unwrap(), k as u64);
            assert_eq!(
                tx.registers().read("tx_crc").unwrap(),
                rx.registers().read("rx_crc").unwrap()
            );
        }
    }

    #[test]
    fn corrupted_pixel_clears_crc_ok() {
        let ctl = control(4, 2, BitDepth::Sixteen);
        let mut tx = CifTransmitter::new(PixelClock::MHZ_50, ctl);
        let mut rx = LcdReceiver::new(PixelClock::MHZ_50, ctl);
        let stream = tx.transmit(&pack_pixels(&[9; 8], BitDepth::Sixteen)).unwrap();
        let bad = inject_errors(&stream, &[BitFlip { cycle: 5, bit: 3 }]).unwrap();
        let (_, ok) = rx.receive(&bad).unwrap();
        assert!(!ok);
        assert_eq!(rx.registers().read("crc_ok").unwrap(), 0);
        assert_ne!(
            tx.registers().read("tx_crc").unwrap(),
            rx.registers().read("rx_crc").unwrap()
        );
    }

    #[test]
    fn busy_transmitter_refuses_second_frame() {
        let ctl = control(2, 2, BitDepth::Eight);
        let mut tx = CifTransmitter::new(PixelClock::MHZ_50, ctl);
        tx.start_frame(&[0]).unwrap();
        assert!(matches!(tx.start_frame(&[0]), Err(BusError::Busy)));
    }

    #[test]
    fn word_count_mismatch_rejected() {
        let ctl = control(4, 4, BitDepth::Eight);
        let mut tx = CifTransmitter::new(PixelClock::MHZ_50, ctl);
        assert!(matches!(
            tx.start_frame(&[0; 3]),
            Err(BusError::Codec(CodecError::MalformedStream { .. }))
        ));
    }
}
