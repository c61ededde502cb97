use copro::bus::{
    deserialize_frame, inject_errors, peak_occupancy, serialize_frame, simulate_cdc, transfer_time, BitFlip,
    BusConfig, BusEventKind, CifTransmitter, ControlRegisters, LcdReceiver, PixelClock, ProducerPolicy,
};
use copro::codec::{
    append_crc_trailer, bytes_to_pixels, pack_pixels, pixels_to_bytes, pixels_to_words, verify_and_strip,
    words_to_pixels,
};
use copro::crc::crc16_xmodem;
use copro::{BitDepth, Frame};
use proptest::prelude::*;

mod common;
use common::crc_bitwise;
use std::time::Duration;

fn bpp_strategy() -> impl Strategy<Value = BitDepth> {
    prop_oneof![Just(BitDepth::Eight), Just(BitDepth::Sixteen), Just(BitDepth::TwentyFour)]
}

fn frame_strategy() -> impl Strategy<Value = Frame> {
    (bpp_strategy(), 2usize..=64, 1usize..=64).prop_flat_map(|(bpp, w, h)| {
        proptest::collection::vec(0..=bpp.max_value(), w * h)
            .prop_map(move |px| Frame::new(w, h, bpp, px).unwrap())
    })
}

fn clock_strategy() -> impl Strategy<Value = PixelClock> {
    prop_oneof![Just(PixelClock::MHZ_50), Just(PixelClock::MHZ_100)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn words_round_trip(f in frame_strategy()) {
        let ws = pixels_to_words(&f);
        let per = f.bpp().pixels_per_word();
        prop_assert_eq!(ws.words.len(), f.pixel_count().div_ceil(per));
        prop_assert_eq!(words_to_pixels(&ws, f.pixel_count()).unwrap(), f.pixels().to_vec());
    }

    #[test]
    fn bytes_round_trip(f in frame_strategy()) {
        let bytes = pixels_to_bytes(f.pixels(), f.bpp());
        prop_assert_eq!(bytes.len(), f.pixel_count() * f.bpp().bytes_per_pixel());
        prop_assert_eq!(bytes_to_pixels(&bytes, f.bpp()), f.pixels().to_vec());
    }

    #[test]
    fn wire_round_trip(f in frame_strategy(), clock in clock_strategy()) {
        let cfg = BusConfig::framed(clock, f.bpp(), f.width(), f.height());
        let payload = append_crc_trailer(f.clone()).unwrap();
        let stream = serialize_frame(&payload, &cfg).unwrap();
        prop_assert_eq!(stream.final_cycle(), cfg.pixel_count());
        prop_assert_eq!(stream.pixel_events().count() as u64, cfg.pixel_count());
        let (back, ok) = verify_and_strip(deserialize_frame(&stream, &cfg).unwrap());
        prop_assert!(ok);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn table_crc_matches_bitwise(bytes in proptest::collection::vec(any::<u8>(), 0..300)) {
        prop_assert_eq!(crc16_xmodem(&bytes), crc_bitwise(&bytes));
    }

    #[test]
    fn any_single_flip_is_detected(f in frame_strategy(), pick in any::<proptest::sample::Index>(), bit in 0u32..24) {
        let bit = bit % f.bpp().bits();
        let cfg = BusConfig::framed(PixelClock::MHZ_50, f.bpp(), f.width(), f.height());
        let stream = serialize_frame(&append_crc_trailer(f).unwrap(), &cfg).unwrap();
        let cycle = pick.index(cfg.pixel_count() as usize) as u64;
        let bad = inject_errors(&stream, &[BitFlip { cycle, bit }]).unwrap();
        let (_, ok) = verify_and_strip(deserialize_frame(&bad, &cfg).unwrap());
        prop_assert!(!ok);
    }
}

#[test]
fn crc_check_value() {
    assert_eq!(crc16_xmodem(b"123456789"), 0x31C3);
    assert_eq!(crc_bitwise(b"123456789"), 0x31C3);
    assert_eq!(crc16_xmodem(&[0x00]), crc_bitwise(&[0x00]));
    assert_eq!(crc16_xmodem(&[]), 0);
}

#[test]
fn exhaustive_single_bit_flips_16x16_8bpp() {
    let f = Frame::from_fn(16, 16, BitDepth::Eight, |x, y| ((x * 37 + y * 11) % 256) as u32).unwrap();
    let cfg = BusConfig::framed(PixelClock::MHZ_50, BitDepth::Eight, 16, 16);
    let stream = serialize_frame(&append_crc_trailer(f).unwrap(), &cfg).unwrap();
    let mut trials = 0;
    for cycle in 0..cfg.pixel_count() {
        for bit in 0..8 {
            let bad = inject_errors(&stream, &[BitFlip { cycle, bit }]).unwrap();
            let (_, ok) = verify_and_strip(deserialize_frame(&bad, &cfg).unwrap());
            assert!(!ok, "flip at cycle {cycle} bit {bit} went undetected");
            trials += 1;
        }
    }
    // 16 body lines plus the trailer line, 8 bits each.
    assert_eq!(trials, 17 * 16 * 8);
}

#[test]
fn event_layout_matches_wire_rules() {
    let f = Frame::from_fn(5, 3, BitDepth::Sixteen, |x, y| (x + 10 * y) as u32).unwrap();
    let cfg = BusConfig::framed(PixelClock::MHZ_50, BitDepth::Sixteen, 5, 3);
    let s = serialize_frame(&append_crc_trailer(f).unwrap(), &cfg).unwrap();
    assert_eq!(s.events[0].kind, BusEventKind::VsyncStart);
    assert_eq!(s.events[0].cycle, 0);
    let hsyncs: Vec<u64> = s
        .events
        .iter()
        .filter(|e| e.kind == BusEventKind::HsyncStart)
        .map(|e| e.cycle)
        .collect();
    assert_eq!(hsyncs, vec![0, 5, 10, 15]);
    let last = s.events.last().unwrap();
    assert_eq!((last.kind, last.cycle), (BusEventKind::FrameEnd, 20));
    let mut csv = Vec::new();
    s.write_csv(&mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("cycle,kind,value\n0,VSYNC_START,\n0,HSYNC_START,\n0,PIXEL,0x0\n"));
}

#[test]
fn transfer_time_at_reference_points() {
    assert_eq!(transfer_time(1024 * 1024, PixelClock::MHZ_50), Duration::from_nanos(20_971_520));
    assert_eq!(transfer_time(2048 * 2048, PixelClock::MHZ_50), Duration::from_nanos(83_886_080));
    assert_eq!(transfer_time(1024 * 1024, PixelClock::MHZ_100), Duration::from_nanos(10_485_760));
}

#[test]
fn control_writes_mid_frame_apply_to_next_frame() {
    let ctl = ControlRegisters {
        frame_width: 4,
        frame_height: 2,
        bpp: BitDepth::Eight,
    };
    let mut tx = CifTransmitter::new(PixelClock::MHZ_50, ctl);
    let first: Vec<u32> = (0..8).collect();
    tx.start_frame(&pack_pixels(&first, BitDepth::Eight)).unwrap();
    let mut events = tx.step();
    // Reconfigure while the frame is on the wire.
    tx.registers_mut().write("bpp", 16).unwrap();
    tx.registers_mut().write("frame_width", 2).unwrap();
    assert_eq!(tx.registers().control().bpp, BitDepth::Eight);
    while tx.is_busy() {
        events.extend(tx.step());
    }
    let pixel_count = events.iter().filter(|e| matches!(e.kind, BusEventKind::Pixel(_))).count();
    assert_eq!(pixel_count, 4 * 3, "first frame keeps its 8 bpp, 4-wide geometry");

    let second: Vec<u32> = vec![0xBEEF, 1, 2, 0xFFFF];
    let stream = tx.transmit(&pack_pixels(&second, BitDepth::Sixteen)).unwrap();
    assert_eq!(stream.bpp, BitDepth::Sixteen);
    let mut rx = LcdReceiver::new(
        PixelClock::MHZ_50,
        ControlRegisters {
            frame_width: 2,
            frame_height: 2,
            bpp: BitDepth::Sixteen,
        },
    );
    let (frame, ok) = rx.receive(&stream).unwrap();
    assert!(ok);
    assert_eq!(frame.pixels(), &second[..]);
    assert_eq!(tx.registers().status().frames_transmitted, 2);
    assert_eq!(rx.registers().status().rx_crc, tx.registers().status().tx_crc);
}

#[test]
fn receiver_flags_corrupted_frame() {
    let ctl = ControlRegisters {
        frame_width: 8,
        frame_height: 8,
        bpp: BitDepth::TwentyFour,
    };
    let mut tx = CifTransmitter::new(PixelClock::MHZ_100, ctl);
    let mut rx = LcdReceiver::new(PixelClock::MHZ_100, ctl);
    let pixels: Vec<u32> = (0..64).map(|i| i * 0x030201).collect();
    let stream = tx.transmit(&pack_pixels(&pixels, BitDepth::TwentyFour)).unwrap();
    let bad = inject_errors(&stream, &[BitFlip { cycle: 17, bit: 23 }]).unwrap();
    let (_, ok) = rx.receive(&bad).unwrap();
    assert!(!ok);
    assert_eq!(rx.registers().read("crc_ok").unwrap(), 0);
    let (_, ok) = rx.receive(&stream).unwrap();
    assert!(ok);
    assert_eq!(rx.registers().status().frames_received, 2);
}

#[test]
fn truncated_stream_is_framing_error() {
    let f = Frame::zeros(4, 4, BitDepth::Eight).unwrap();
    let cfg = BusConfig::framed(PixelClock::MHZ_50, BitDepth::Eight, 4, 4);
    let mut s = serialize_frame(&append_crc_trailer(f).unwrap(), &cfg).unwrap();
    s.events.truncate(s.events.len() - 3);
    assert!(matches!(deserialize_frame(&s, &cfg), Err(copro::BusError::Framing { .. })));
}

#[test]
fn cdc_100_to_90_mhz() {
    let items = 64 * 64;
    let cap = BusConfig::framed(PixelClock::MHZ_100, BitDepth::Eight, 64, 64).default_fifo_capacity();
    let free = simulate_cdc(items, cap, PixelClock::MHZ_100, PixelClock::MHZ_90, ProducerPolicy::FreeRunning);
    // Writing 10% faster than reading, a 2-line FIFO cannot absorb a whole frame.
    assert!(free.overflows > 0);
    assert_eq!(free.delivered + free.overflows, items);

    let held = simulate_cdc(items, cap, PixelClock::MHZ_100, PixelClock::MHZ_90, ProducerPolicy::Backpressure);
    assert_eq!((held.overflows, held.delivered), (0, items));
    assert!(held.producer_stalls > 0);

    let peak = peak_occupancy(items, PixelClock::MHZ_100, PixelClock::MHZ_90);
    // items * (1 - 90/100), within a couple of entries.
    assert!((peak as i64 - 410).abs() <= 3, "peak {peak}");
    let sized = simulate_cdc(items, peak, PixelClock::MHZ_100, PixelClock::MHZ_90, ProducerPolicy::FreeRunning);
    assert_eq!((sized.overflows, sized.delivered), (0, items));
    let short = simulate_cdc(items, peak - 1, PixelClock::MHZ_100, PixelClock::MHZ_90, ProducerPolicy::FreeRunning);
    assert!(short.overflows > 0);
}

#[test]
fn cdc_slow_writer_never_overflows() {
    let r = simulate_cdc(4096, 2, PixelClock::MHZ_90, PixelClock::MHZ_100, ProducerPolicy::FreeRunning);
    assert_eq!((r.overflows, r.delivered), (0, 4096));
}

#[test]
fn documented_worked_example() {
    let f = Frame::from_fn(4, 2, BitDepth::Eight, |x, y| (1 + x + 4 * y) as u32).unwrap();
    assert_eq!(crc16_xmodem(&[1, 2, 3, 4, 5, 6, 7, 8]), 0x76AC);
    let cfg = BusConfig::framed(PixelClock::MHZ_50, BitDepth::Eight, 4, 2);
    let stream = serialize_frame(&append_crc_trailer(f).unwrap(), &cfg).unwrap();
    let trailer: Vec<u32> = stream.pixel_events().skip(8).map(|(_, v)| v).collect();
    assert_eq!(trailer, vec![0x76, 0xAC, 0x00, 0x00]);
    assert_eq!(stream.final_cycle(), 12);
}
