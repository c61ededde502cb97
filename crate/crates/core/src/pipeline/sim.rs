//! Discrete-event model of the two VPU processes.
//!
//! Unmasked: one process receives, computes and transmits each frame in turn.
//!
//! Masked: in cycle `c` the I/O process buffers output `c-2`, receives and
//! buffers input `c`, then transmits output `c-2`, while the compute process
//! works on frame `c-1`. Both meet at a barrier before the next cycle.

use serde::Serialize;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Duration;

use super::{ComponentTimes, Mode};
use crate::error::PipelineError;

/// Event resolution.
pub const TICK: Duration = Duration::from_micros(1);

/// Frames streamed before and after the tracked window in masked mode, so
/// every tracked cycle carries a full load.
const ROLL: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    CifReceive,
    CifBuffer,
    Compute,
    LcdBuffer,
    LcdTransmit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageSpan {
    pub frame: usize,
    pub stage: Stage,
    #[serde(with = "micros")]
    pub start: Duration,
    #[serde(with = "micros")]
    pub end: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub mode: Mode,
    #[serde(with = "micros")]
    pub latency: Duration,
    /// Steady-state interval between frame completions.
    #[serde(with = "micros")]
    pub period: Duration,
    pub throughput: f64,
    pub timeline: Vec<StageSpan>,
}

impl PipelineReport {
    /// Completion time of each tracked frame, in frame order.
    pub fn completions(&self) -> Vec<Duration> {
        let mut done: Vec<(usize, Duration)> = self
            .timeline
            .iter()
            .filter(|s| s.stage == Stage::LcdTransmit)
            .map(|s| (s.frame, s.end))
            .collect();
        done.sort_unstable();
        done.into_iter().map(|(_, t)| t).collect()
    }
}

mod micros {
    use serde::Serializer;
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }
}

fn to_ticks(d: Duration) -> u64 {
    ((d.as_nanos() + TICK.as_nanos() / 2) / TICK.as_nanos()) as u64
}

fn from_ticks(t: u64) -> Duration {
    Duration::from_micros(t)
}

#[derive(Debug, Clone, Copy)]
struct Job {
    frame: usize,
    stage: Stage,
    ticks: u64,
}

struct Process {
    pending: VecDeque<Job>,
    at_barrier: bool,
}

/// Event-driven executor for a set of processes that run job lists per
/// cycle and synchronize at a barrier between cycles.
/// (time, sequence, process, job, stage), ordered earliest first.
type Pending = Reverse<(u64, u64, usize, usize, Stage)>;

struct Engine {
    now: u64,
    seq: u64,
    events: BinaryHeap<Pending>,
    processes: Vec<Process>,
    spans: Vec<(usize, Stage, u64, u64)>,
    cycle_starts: Vec<u64>,
}

impl Engine {
    fn new(n_processes: usize) -> Self {
        Engine {
            now: 0,
            seq: 0,
            events: BinaryHeap::new(),
            processes: (0..n_processes)
                .map(|_| Process {
                    pending: VecDeque::new(),
                    at_barrier: true,
                })
                .collect(),
            spans: Vec::new(),
            cycle_starts: Vec::new(),
        }
    }

    fn dispatch(&mut self, p: usize) {
        match self.processes[p].pending.pop_front() {
            Some(job) => {
                self.seq += 1;
                let end = self.now + job.ticks;
                self.spans.push((job.frame, job.stage, self.now, end));
                self.events.push(Reverse((end, self.seq, p, job.frame, job.stage)));
            }
            None => self.processes[p].at_barrier = true,
        }
    }

    /// Runs `n_cycles` cycles; `plan(cycle, process)` yields that process's
    /// jobs for the cycle.
    fn run(&mut self, n_cycles: usize, mut plan: impl FnMut(usize, usize) -> Vec<Job>) {
        for cycle in 0..n_cycles {
            debug_assert!(self.processes.iter().all(|p| p.at_barrier));
            self.cycle_starts.push(self.now);
            for p in 0..self.processes.len() {
                self.processes[p].pending = plan(cycle, p).into();
                self.processes[p].at_barrier = false;
                self.dispatch(p);
            }
            while let Some(Reverse((t, _, p, _, _))) = self.events.pop() {
                self.now = t;
                self.dispatch(p);
            }
        }
    }
}

/// Simulates `n_frames` tracked frames. In masked mode the tracked window
/// sits inside a longer stream, and times are relative to the start of the
/// cycle that receives the first tracked frame.
pub fn simulate_stream(t: &ComponentTimes, mode: Mode, n_frames: usize) -> Result<PipelineReport, PipelineError> {
    if n_frames < 3 {
        return Err(PipelineError::Config(format!(
            "at least 3 frames are needed for a steady-state period, got {n_frames}"
        )));
    }
    let job = |frame, stage, d| Job {
        frame,
        stage,
        ticks: to_ticks(d),
    };

    let (engine, first, origin) = match mode {
        Mode::Unmasked => {
            let mut e = Engine::new(1);
            e.run(n_frames, |f, _| {
                vec![
                    job(f, Stage::CifReceive, t.cif),
                    job(f, Stage::Compute, t.vpu),
                    job(f, Stage::LcdTransmit, t.lcd),
                ]
            });
            (e, 0, 0)
        }
        Mode::Masked => {
            let total = n_frames + 2 * ROLL;
            let mut e = Engine::new(2);
            e.run(total + 2, |c, p| {
                let mut jobs = Vec::new();
                if p == 0 {
                    let out = c.checked_sub(2);
                    if let Some(o) = out {
                        jobs.push(job(o, Stage::LcdBuffer, t.lcd_buffer));
                    }
                    if c < total {
                        jobs.push(job(c, Stage::CifReceive, t.cif));
                        jobs.push(job(c, Stage::CifBuffer, t.cif_buffer));
                    }
                    if let Some(o) = out {
                        jobs.push(job(o, Stage::LcdTransmit, t.lcd));
                    }
                } else if (1..=total).contains(&c) {
                    jobs.push(job(c - 1, Stage::Compute, t.vpu));
                }
                jobs
            });
            let origin = e.cycle_starts[ROLL];
            (e, ROLL, origin)
        }
    };

    let tracked = first..first + n_frames;
    let mut timeline: Vec<StageSpan> = engine
        .spans
        .iter()
        .filter(|s| tracked.contains(&s.0))
        .map(|&(frame, stage, s, e)| StageSpan {
            frame: frame - first,
            stage,
            start: from_ticks(s - origin),
            end: from_ticks(e - origin),
        })
        .collect();
    timeline.sort_by_key(|s| (s.start, s.frame));

    let span_of = |f: usize, stage: Stage| {
        timeline
            .iter()
            .find(|s| s.frame == f && s.stage == stage)
            .copied()
            .expect("every tracked frame has every stage")
    };
    let latency = (0..n_frames)
        .map(|f| span_of(f, Stage::LcdTransmit).end - span_of(f, Stage::CifReceive).start)
        .max()
        .unwrap_or_default();
    let period = span_of(n_frames - 1, Stage::LcdTransmit).end - span_of(n_frames - 2, Stage::LcdTransmit).end;
    if period.is_zero() {
        return Err(PipelineError::UndefinedThroughput);
    }
    Ok(PipelineReport {
        mode,
        latency,
        period,
        throughput: 1.0 / period.as_secs_f64(),
        timeline,
    })
}
