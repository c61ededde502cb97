use serde::Serialize;
use std::collections::VecDeque;

use super::PixelClock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushOutcome {
    Accepted,
    Rejected,
}

/// Bounded FIFO whose write and read sides run on independent clocks.
///
/// Every push on a full FIFO is rejected and recorded in `overflows`; every
/// pop on an empty FIFO is recorded in `underflows`.
#[derive(Debug, Clone)]
pub struct DualClockFifo<T> {
    capacity: usize,
    write_clock: PixelClock,
    read_clock: PixelClock,
    queue: VecDeque<T>,
    pushes: u64,
    pops: u64,
    overflows: u64,
    underflows: u64,
}

impl<T> DualClockFifo<T> {
    pub fn new(capacity: usize, write_clock: PixelClock, read_clock: PixelClock) -> Self {
        DualClockFifo {
            capacity,
            write_clock,
            read_clock,
            queue: VecDeque::with_capacity(capacity.min(1 << 16)),
            pushes: 0,
            pops: 0,
            overflows: 0,
            underflows: 0,
        }
    }

    pub fn push(&mut self, item: T) -> PushOutcome {
        self.pushes += 1;
        if self.queue.len() >= self.capacity {
            self.overflows += 1;
            return PushOutcome::Rejected;
        }
        self.queue.push_back(item);
        PushOutcome::Accepted
    }

    pub fn pop(&mut self) -> Option<T> {
        match self.queue.pop_front() {
            Some(item) => {
                self.pops += 1;
                Some(item)
            }
            None => {
                self.underflows += 1;
                None
            }
        }
    }

    pub fn is_full(&self) -> bool {
        self.queue.len() >= self.capacity
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn occupancy(&self) -> usize {
        self.queue.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn write_clock(&self) -> PixelClock {
        self.write_clock
    }

    pub fn read_clock(&self) -> PixelClock {
        self.read_clock
    }

    /// Push attempts, including rejected ones.
    pub fn pushes(&self) -> u64 {
        self.pushes
    }

    /// Successful pops.
    pub fn pops(&self) -> u64 {
        self.pops
    }

    pub fn overflows(&self) -> u64 {
        self.overflows
    }

    pub fn underflows(&self) -> u64 {
        self.underflows
    }
}

/// What the writer does when it finds the FIFO full.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProducerPolicy {
    /// Writes on every write-clock edge; items pushed while full are lost.
    FreeRunning,
    /// Holds the item and retries on the next edge (full-flag handshake).
    Backpressure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CdcReport {
    pub items: u64,
    pub delivered: u64,
    pub overflows: u64,
    pub underflows: u64,
    pub producer_stalls: u64,
    pub max_occupancy: usize,
    /// Time of the last delivery, in picoseconds.
    pub finish_ps: u64,
}

fn edge_ps(clock: PixelClock, k: u64) -> u64 {
    (k as u128 * 1_000_000_000_000 / clock.hz() as u128) as u64
}

/// Moves `items` words through `fifo` with each side stepping on its own clock
/// grid (picosecond resolution). The reader pops on every read edge until the
/// stream is complete; at coincident edges the read happens first, so an item
/// is never visible on the edge that wrote it.
pub fn simulate_cdc(
    items: u64,
    capacity: usize,
    write_clock: PixelClock,
    read_clock: PixelClock,
    policy: ProducerPolicy,
) -> CdcReport {
    let mut fifo = DualClockFifo::new(capacity, write_clock, read_clock);
    let (mut w_edge, mut r_edge) = (0u64, 0u64);
    let mut produced = 0u64;
    let mut stalls = 0u64;
    let mut delivered = 0u64;
    let mut max_occupancy = 0usize;
    let mut finish_ps = 0u64;

    loop {
        let producer_done = produced == items;
        if producer_done && fifo.is_empty() {
            break;
        }
        let tw = edge_ps(write_clock, w_edge);
        let tr = edge_ps(read_clock, r_edge);
        if producer_done || tr <= tw {
            r_edge += 1;
            if fifo.pop().is_some() {
                delivered += 1;
                finish_ps = tr;
            }
        } else {
            w_edge += 1;
            match policy {
                ProducerPolicy::Backpressure if fifo.is_full() => stalls += 1,
                _ => {
                    fifo.push(produced);
                    produced += 1;
                }
            }
            max_occupancy = max_occupancy.max(fifo.occupancy());
        }
    }

    CdcReport {
        items,
        delivered,
        overflows: fifo.overflows(),
        underflows: fifo.underflows(),
        producer_stalls: stalls,
        max_occupancy,
        finish_ps,
    }
}

/// Smallest capacity that lets a free-running writer move `items` words
/// without overflow.
pub fn peak_occupancy(items: u64, write_clock: PixelClock, read_clock: PixelClock) -> usize {
    simulate_cdc(items, usize::MAX, write_clock, read_clock, ProducerPolicy::FreeRunning)
        .max_occupancy
}
