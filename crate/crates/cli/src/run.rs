//! End-to-end scenario execution: frame in, CIF bus, kernel, LCD bus,
//! verification, then timing through the pipeline model.

use copro::bus::{inject_errors, BitFlip, BusEventStream, CifTransmitter, ControlRegisters, LcdReceiver, PixelClock};
use copro::codec::{frame_to_bytes, pack_pixels};
use copro::crc::crc16_xmodem;
use copro::image_io::{read_pgm, read_ppm, write_pgm};
use copro::kernels::{
    average_binning, cnn_ship_detect, fp_convolution, render_depth, BandPlan, Camera, CnnModel, ConvKernel, Executor,
    Pose6D, RgbImage, TriangleMesh, PATCH_SIZE,
};
use copro::pipeline::{
    derive_component_times, metrics, simulate_stream, Benchmark, BenchmarkGeometry, BufferRate, Mode, Provenance,
    TaggedTime, TaggedTimes, TimingDataset,
};
use copro::{BitDepth, Frame};
use half::f16;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::error::{CliError, EXIT_FUNCTIONAL, EXIT_PASS};
use crate::golden::{compare_golden, compare_scores, GoldenReport};
use crate::report::{Functional, LinkReport, Performance, RunReport, Verdict};
use crate::scenario::{Scenario, TimingSource};

/// Full-size inputs: 4 MPixel for binning, 1 MPixel otherwise.
pub const FULL_SIDE: usize = 1024;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Overrides the scenario's mode.
    pub mode: Option<Mode>,
    pub strict: bool,
    pub full_size: bool,
}

/// What the host gets back over the LCD link.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Image(Frame),
    Scores(Vec<f32>),
}

/// Raw material for protocol dumps.
#[derive(Debug, Clone)]
pub struct LinkTrace {
    pub events: BusEventStream,
    pub registers: serde_json::Value,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub output: Option<Output>,
    pub cif: LinkTrace,
    pub lcd: Option<LinkTrace>,
}

enum Job {
    Binning,
    Convolution(ConvKernel),
    Render { mesh: TriangleMesh, camera: Camera },
    Cnn(CnnModel),
}

/// Runs one scenario. Errors are configuration problems (exit 2); a failed
/// CRC or golden comparison is part of the returned verdict.
pub fn run_scenario(sc: &Scenario, root: &Path, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    sc.validate()?;
    let clock = sc.bus.frequency_hz;
    let (job, cif_frame) = prepare(sc, root, opts.full_size)?;
    if !opts.full_size {
        check_bus(sc, &cif_frame)?;
    }
    let out_shape = output_shape(&job, &cif_frame);

    let (received, cif_link, cif_trace) = transfer(&cif_frame, clock, &sc.inject_errors.cif)?;
    let started = Instant::now();
    let computed = compute(&job, &received);
    let measured = started.elapsed();

    let mut failures = Vec::new();
    if !cif_link.crc_ok {
        failures.push("CIF link CRC mismatch".to_string());
    }
    let (lcd_link, lcd_trace, output, kernel_error) = match computed {
        Ok(out_frame) => {
            let (back, link, trace) = transfer(&out_frame, clock, &sc.inject_errors.lcd)?;
            if !link.crc_ok {
                failures.push("LCD link CRC mismatch".to_string());
            }
            (Some(link), Some(trace), Some(decode_output(&job, back)), None)
        }
        // A clean input the kernel cannot handle is a configuration problem;
        // a corrupted one is a functional failure of the run.
        Err(e) if cif_link.crc_ok => return Err(e),
        Err(e) => {
            failures.push(format!("kernel rejected the corrupted input: {e}"));
            (None, None, None, Some(e.to_string()))
        }
    };

    let golden = match (&output, opts.full_size) {
        (Some(out), false) => verify(sc, root, out)?,
        _ => None,
    };
    if golden.as_ref().is_some_and(|g| !g.pass) {
        failures.push("output differs from golden".to_string());
    }

    let crc_ok = cif_link.crc_ok && lcd_link.as_ref().is_some_and(|l| l.crc_ok);
    let functional = Functional {
        crc_ok,
        kernel_error,
        output_checksum: output.as_ref().map(|o| format!("0x{:04X}", crc16_xmodem(&frame_to_bytes(&output_frame(o))))),
        golden_match: golden.as_ref().map(|g| g.pass),
        golden,
        cif: cif_link,
        lcd: lcd_link,
    };
    let performance = performance(sc, opts, &cif_frame, out_shape, measured)?;

    let pass = failures.is_empty();
    // Without --strict a run only fails when a clean link still produced the
    // wrong answer; link corruption is reported but expected under injection.
    let exit_code = if pass || !(opts.strict || crc_ok) {
        EXIT_PASS
    } else {
        EXIT_FUNCTIONAL
    };
    let report = RunReport {
        scenario: sc.name.clone(),
        benchmark: sc.benchmark,
        seed: sc.seed,
        full_size: opts.full_size,
        functional,
        performance,
        verdict: Verdict {
            pass,
            strict: opts.strict,
            exit_code,
            failures,
        },
    };
    Ok(RunOutcome {
        report,
        output,
        cif: cif_trace,
        lcd: lcd_trace,
    })
}

// ---- inputs ----------------------------------------------------------------

fn prepare(sc: &Scenario, root: &Path, full_size: bool) -> Result<(Job, Frame), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let gray = |side: usize, rng: &mut ChaCha8Rng| -> Result<Frame, CliError> {
        if full_size {
            let px = (0..side * side).map(|_| rng.gen_range(0..=255u32)).collect();
            Ok(Frame::new(side, side, BitDepth::Eight, px)?)
        } else {
            let path = sc.input(root, "image", sc.inputs.image.as_ref())?;
            Ok(read_pgm(&path)?)
        }
    };
    match sc.benchmark {
        Benchmark::Binning => Ok((Job::Binning, gray(2 * FULL_SIDE, &mut rng)?)),
        Benchmark::Convolution(k) => {
            let kernel = match &sc.kernel {
                Some(kernel) => kernel.clone(),
                None => ConvKernel::box_filter(k)?,
            };
            Ok((Job::Convolution(kernel), gray(FULL_SIDE, &mut rng)?))
        }
        Benchmark::Render => {
            let path = sc.input(root, "mesh", sc.inputs.mesh.as_ref())?;
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let mesh = TriangleMesh::from_off(&text)?;
            let pose = sc
                .pose
                .ok_or_else(|| CliError::Config("render needs a pose".into()))
                .and_then(|p| Ok(Pose6D::from_array(p)?))?;
            let mut camera = sc.camera.unwrap_or_else(|| Camera::square(16, 16.0));
            if full_size {
                camera = scale_camera(&camera, FULL_SIDE);
            }
            camera.validate()?;
            Ok((Job::Render { mesh, camera }, pose_to_frame(&pose)?))
        }
        Benchmark::Cnn => {
            let model = match (&sc.inputs.weights, &sc.inputs.manifest) {
                (None, None) => CnnModel::seeded(sc.seed),
                (w, m) => CnnModel::load(&sc.input(root, "weights", w.as_ref())?, &sc.input(root, "manifest", m.as_ref())?)?,
            };
            let img = if full_size {
                let data = (0..FULL_SIDE * FULL_SIDE).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
                RgbImage::new(FULL_SIDE, FULL_SIDE, data)?
            } else {
                read_ppm(&sc.input(root, "image", sc.inputs.image.as_ref())?)?
            };
            if img.width % PATCH_SIZE != 0 || img.height % PATCH_SIZE != 0 {
                return Err(CliError::Geometry(format!(
                    "{}x{} is not a whole number of {PATCH_SIZE}x{PATCH_SIZE} patches",
                    img.width, img.height
                )));
            }
            Ok((Job::Cnn(model), planes_to_frame(&img)?))
        }
    }
}

/// Same field of view at a different resolution.
fn scale_camera(c: &Camera, side: usize) -> Camera {
    let s = side as f64 / c.width as f64;
    Camera {
        width: side,
        height: (c.height as f64 * s).round() as usize,
        fx: c.fx * s,
        fy: c.fy * s,
        cx: c.cx * s,
        cy: c.cy * s,
        ..*c
    }
}

fn check_bus(sc: &Scenario, f: &Frame) -> Result<(), CliError> {
    let b = &sc.bus;
    if (b.width, b.height, b.bpp) != (f.width(), f.height(), f.bpp()) {
        return Err(CliError::Geometry(format!(
            "scenario bus is {}x{} at {} bpp but the {} input frame is {}x{} at {} bpp",
            b.width,
            b.height,
            b.bpp,
            sc.benchmark,
            f.width(),
            f.height(),
            f.bpp()
        )));
    }
    Ok(())
}

/// Six f32 values, each as two 16-bit pixels, low half first.
pub fn pose_to_frame(pose: &Pose6D) -> Result<Frame, CliError> {
    let px = pose
        .to_array()
        .iter()
        .flat_map(|&v| {
            let bits = (v as f32).to_bits();
            [bits & 0xFFFF, bits >> 16]
        })
        .collect();
    Ok(Frame::new(12, 1, BitDepth::Sixteen, px)?)
}

pub fn frame_to_pose(f: &Frame) -> Result<Pose6D, CliError> {
    if (f.width(), f.height(), f.bpp()) != (12, 1, BitDepth::Sixteen) {
        return Err(CliError::Geometry("a pose is 12 16-bit pixels".into()));
    }
    let px = f.pixels();
    let v: [f64; 6] = std::array::from_fn(|i| f32::from_bits(px[2 * i] | (px[2 * i + 1] << 16)) as f64);
    Ok(Pose6D::from_array(v)?)
}

/// Red, green and blue planes stacked vertically in one 16 bpp frame.
fn planes_to_frame(img: &RgbImage) -> Result<Frame, CliError> {
    let px = (0..3).flat_map(|c| img.channel(c)).collect();
    Ok(Frame::new(img.width, 3 * img.height, BitDepth::Sixteen, px)?)
}

fn frame_to_planes(f: &Frame) -> Result<RgbImage, CliError> {
    let n = f.pixel_count() / 3;
    let px = f.pixels();
    Ok(RgbImage::from_planes(f.width(), f.height() / 3, [&px[..n], &px[n..2 * n], &px[2 * n..]])?)
}

// ---- link and kernel -------------------------------------------------------

/// One frame over one link: transmitter, optional bit flips, receiver.
fn transfer(frame: &Frame, clock: PixelClock, flips: &[BitFlip]) -> Result<(Frame, LinkReport, LinkTrace), CliError> {
    let ctl = ControlRegisters {
        frame_width: frame.width() as u32,
        frame_height: frame.height() as u32,
        bpp: frame.bpp(),
    };
    let mut tx = CifTransmitter::new(clock, ctl);
    let mut rx = LcdReceiver::new(clock, ctl);
    let clean = tx.transmit(&pack_pixels(frame.pixels(), frame.bpp()))?;
    let wire = inject_errors(&clean, flips).map_err(|e| CliError::Config(format!("inject_errors: {e}")))?;
    let (received, ok) = rx.receive(&wire)?;
    let (tx_status, rx_status) = (tx.registers().status(), rx.registers().status());
    let link = LinkReport {
        width: frame.width(),
        height: frame.height(),
        bpp: frame.bpp(),
        wire_cycles: wire.final_cycle(),
        transfer_ms: copro::bus::transfer_time(frame.pixel_count() as u64, clock).as_secs_f64() * 1e3,
        flips_injected: flips.len(),
        tx_crc: format!("0x{:04X}", tx_status.tx_crc),
        rx_crc: format!("0x{:04X}", rx_status.rx_crc),
        crc_ok: ok,
    };
    let parse = |s: String| serde_json::from_str::<serde_json::Value>(&s).expect("register dump is JSON");
    let trace = LinkTrace {
        events: wire,
        registers: serde_json::json!({
            "transmitter": parse(tx.registers().to_json()),
            "receiver": parse(rx.registers().to_json()),
        }),
    };
    Ok((received, link, trace))
}

fn compute(job: &Job, input: &Frame) -> Result<Frame, CliError> {
    let plan = BandPlan::static_36();
    match job {
        Job::Binning => Ok(average_binning(input, &plan)?),
        Job::Convolution(k) => Ok(fp_convolution(input, k, &plan)?),
        Job::Render { mesh, camera } => Ok(render_depth(mesh, &frame_to_pose(input)?, camera, &plan)?),
        Job::Cnn(model) => {
            let scores = cnn_ship_detect(&frame_to_planes(input)?, model, Executor::Parallel)?;
            let px = scores.iter().map(|&s| f16::from_f32(s).to_bits() as u32).collect();
            Ok(Frame::new(scores.len(), 1, BitDepth::Sixteen, px)?)
        }
    }
}

/// Output frame geometry, known before the kernel runs.
fn output_shape(job: &Job, input: &Frame) -> (usize, BitDepth) {
    match job {
        Job::Binning => (input.pixel_count() / 4, BitDepth::Eight),
        Job::Convolution(_) => (input.pixel_count(), BitDepth::Eight),
        Job::Render { camera, .. } => (camera.width * camera.height, BitDepth::Sixteen),
        Job::Cnn(_) => (input.pixel_count() / 3 / (PATCH_SIZE * PATCH_SIZE), BitDepth::Sixteen),
    }
}

fn decode_output(job: &Job, f: Frame) -> Output {
    match job {
        Job::Cnn(_) => Output::Scores(f.pixels().iter().map(|&p| f16::from_bits(p as u16).to_f32()).collect()),
        _ => Output::Image(f),
    }
}

pub fn output_frame(o: &Output) -> Frame {
    match o {
        Output::Image(f) => f.clone(),
        Output::Scores(s) => {
            let px = s.iter().map(|&v| f16::from_f32(v).to_bits() as u32).collect();
            Frame::new(s.len(), 1, BitDepth::Sixteen, px).expect("score frame")
        }
    }
}

#[derive(Deserialize)]
struct ScoreFile {
    scores: Vec<f32>,
}

fn verify(sc: &Scenario, root: &Path, out: &Output) -> Result<Option<GoldenReport>, CliError> {
    let Some(path) = sc.inputs.golden.as_ref() else {
        return Ok(None);
    };
    let path: PathBuf = sc.input(root, "golden", Some(path))?;
    let report = match out {
        Output::Image(f) => compare_golden(f, &read_pgm(&path)?, sc.golden_tolerance)?,
        Output::Scores(s) => {
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let golden: ScoreFile = serde_json::from_str(&text).map_err(|source| CliError::Parse {
                path: path.display().to_string(),
                source,
            })?;
            compare_scores(s, &golden.scores, sc.golden_tolerance)?
        }
    };
    Ok(Some(report))
}

// ---- timing ----------------------------------------------------------------

fn tagged_times(
    sc: &Scenario,
    input: &Frame,
    (out_samples, out_bpp): (usize, BitDepth),
    measured: Duration,
) -> Result<(TaggedTimes, f64), CliError> {
    match &sc.timing {
        TimingSource::Published => {
            let ds = TimingDataset::bundled();
            let row = ds
                .row(sc.benchmark)
                .ok_or_else(|| CliError::Config(format!("no published timings for {}", sc.benchmark)))?;
            Ok((row.tagged_times(), ds.buffer_rate_ms_per_mpixel))
        }
        TimingSource::Derived {
            buffer_rate_ms_per_mpixel,
            vpu_time_ms,
            vpu_provenance,
        } => {
            let mut geometry = BenchmarkGeometry::new(input.pixel_count(), input.bpp(), out_samples, out_bpp);
            if sc.benchmark == Benchmark::Render {
                // The pose is staged through a frame-sized buffer.
                geometry.input_buffer_samples = out_samples;
            }
            let vpu = match vpu_time_ms {
                Some(ms) => TaggedTime::new(Duration::from_secs_f64(ms / 1e3), *vpu_provenance),
                None => TaggedTime::new(measured, Provenance::MeasuredHost),
            };
            let rate = BufferRate::from_ms(*buffer_rate_ms_per_mpixel)?;
            let times = derive_component_times(&geometry, sc.bus.frequency_hz, &rate, Some(vpu))?;
            Ok((times, *buffer_rate_ms_per_mpixel))
        }
    }
}

fn performance(
    sc: &Scenario,
    opts: &RunOptions,
    input: &Frame,
    out_shape: (usize, BitDepth),
    measured: Duration,
) -> Result<Performance, CliError> {
    let (times, rate) = tagged_times(sc, input, out_shape, measured)?;
    let mode = opts.mode.unwrap_or(sc.mode);
    let m = metrics(&times.times(), mode)?;
    let simulation = simulate_stream(&times.times(), mode, sc.frames)?;
    let ms = |d: Duration| d.as_secs_f64() * 1e3;
    // The event model runs on a 1 us grid; allow one tick per component.
    let slack = Duration::from_micros(10);
    Ok(Performance {
        mode,
        buffer_rate_ms_per_mpixel: rate,
        times,
        latency_ms: ms(m.latency),
        period_ms: ms(m.period),
        fps: m.throughput,
        simulation_agrees: simulation.latency.abs_diff(m.latency) <= slack && simulation.period.abs_diff(m.period) <= slack,
        simulation,
    })
}

// ---- artifacts -------------------------------------------------------------

/// Writes the report, the output and (optionally) bus dumps into `dir`.
pub fn write_artifacts(dir: &Path, outcome: &RunOutcome, dump_bus_events: bool) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<(), CliError> {
        let p = dir.join(name);
        std::fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        written.push(p);
        Ok(())
    };
    put("report.json", outcome.report.to_json().as_bytes())?;
    put("report.csv", outcome.report.to_csv().as_bytes())?;
    if let Some(Output::Scores(s)) = &outcome.output {
        let mut json = serde_json::to_string_pretty(&serde_json::json!({ "scores": s })).expect("scores serialize");
        json.push('\n');
        put("scores.json", json.as_bytes())?;
    }
    if dump_bus_events {
        let links = [("cif", Some(&outcome.cif)), ("lcd", outcome.lcd.as_ref())];
        for (name, trace) in links {
            let Some(trace) = trace else { continue };
            let mut csv = Vec::new();
            trace.events.write_csv(&mut csv).map_err(|e| CliError::io(Path::new(name), e))?;
            put(&format!("{name}_events.csv"), &csv)?;
            let regs = serde_json::to_string_pretty(&trace.registers).expect("registers serialize") + "\n";
            put(&format!("{name}_registers.json"), regs.as_bytes())?;
        }
    }
    if let Some(Output::Image(f)) = &outcome.output {
        let p = dir.join("output.pgm");
        write_pgm(&p, f)?;
        written.push(p);
    }
    Ok(written)
}
