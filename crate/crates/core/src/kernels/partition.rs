//! Horizontal band partitioning and the logical worker scheduler.

use serde::Serialize;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Range;

use crate::error::KernelError;

/// Worker count of the VPU's vector-core array.
pub const VPU_WORKERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PartitionMode {
    /// Each worker owns a fixed block of consecutive bands.
    Static,
    /// Workers take the next band from a shared queue when they go idle.
    Dynamic,
}

/// Bands tiling `height` rows plus the band list each worker processes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BandPartition {
    pub height: usize,
    pub bands: Vec<Range<usize>>,
    pub assignment: Vec<Vec<usize>>,
    pub mode: PartitionMode,
}

impl BandPartition {
    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    pub fn n_workers(&self) -> usize {
        self.assignment.len()
    }

    /// Bands in the order a sequential run visits them: worker by worker for
    /// static partitions, queue order for dynamic ones.
    pub fn visit_order(&self) -> Vec<usize> {
        match self.mode {
            PartitionMode::Static => self.assignment.concat(),
            PartitionMode::Dynamic => (0..self.bands.len()).collect(),
        }
    }
}

fn split_evenly(total: usize, parts: usize) -> impl Iterator<Item = usize> {
    let (base, extra) = (total / parts, total % parts);
    (0..parts).map(move |i| base + usize::from(i < extra))
}

/// Splits `height` rows into `n_bands` bands. When the division is not exact
/// the first `height % n_bands` bands are one row taller.
///
/// Static mode hands each worker a contiguous block of bands; dynamic mode
/// records the queue assignment a unit-cost scheduler would produce.
pub fn partition_bands(
    height: usize,
    n_bands: usize,
    n_workers: usize,
    mode: PartitionMode,
) -> Result<BandPartition, KernelError> {
    if n_bands == 0 || n_workers == 0 {
        return Err(KernelError::Partition(format!(
            "need at least one band and one worker, got {n_bands} bands / {n_workers} workers"
        )));
    }
    if n_bands > height {
        return Err(KernelError::Partition(format!(
            "{n_bands} bands cannot tile {height} rows"
        )));
    }
    let mut bands = Vec::with_capacity(n_bands);
    let mut row = 0;
    for h in split_evenly(height, n_bands) {
        bands.push(row..row + h);
        row += h;
    }

    let assignment = match mode {
        PartitionMode::Static => {
            let mut next = 0;
            split_evenly(n_bands, n_workers)
                .map(|count| {
                    let block: Vec<usize> = (next..next + count).collect();
                    next += count;
                    block
                })
                .collect()
        }
        PartitionMode::Dynamic => schedule_dynamic(&vec![1.0; n_bands], n_workers).assignment,
    };

    Ok(BandPartition {
        height,
        bands,
        assignment,
        mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandRun {
    pub band: usize,
    pub worker: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicSchedule {
    pub assignment: Vec<Vec<usize>>,
    pub runs: Vec<BandRun>,
    pub makespan: f64,
}

/// Simulates the work queue: bands are dequeued in index order by whichever
/// worker becomes idle first (lowest worker index on ties). Deterministic for
/// a given cost vector.
pub fn schedule_dynamic(costs: &[f64], n_workers: usize) -> DynamicSchedule {
    #[derive(PartialEq)]
    struct Free(f64, usize);
    impl Eq for Free {}
    impl PartialOrd for Free {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Free {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
        }
    }

    let mut idle: BinaryHeap<Reverse<Free>> = (0..n_workers).map(|w| Reverse(Free(0.0, w))).collect();
    let mut assignment = vec![Vec::new(); n_workers];
    let mut runs = Vec::with_capacity(costs.len());
    let mut makespan = 0.0f64;
    for (band, &cost) in costs.iter().enumerate() {
        let Reverse(Free(start, worker)) = idle.pop().expect("at least one worker");
        let end = start + cost.max(0.0);
        assignment[worker].push(band);
        runs.push(BandRun {
            band,
            worker,
            start,
            end,
        });
        makespan = makespan.max(end);
        idle.push(Reverse(Free(end, worker)));
    }
    DynamicSchedule {
        assignment,
        runs,
        makespan,
    }
}
