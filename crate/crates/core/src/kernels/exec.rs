//! Band execution on real threads (rayon, behind the `parallel` feature) or
//! sequentially. Both paths write disjoint row slices, so results are
//! identical.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
#[cfg(feature = "parallel")]
use std::sync::atomic::{AtomicUsize, Ordering};
#[cfg(feature = "parallel")]
use std::sync::Mutex;

use super::partition::BandPartition;
#[cfg(feature = "parallel")]
use super::partition::PartitionMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Executor {
    Sequential,
    /// Rayon thread pool. Falls back to sequential without the `parallel`
    /// feature.
    #[default]
    Parallel,
}

impl Executor {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Executor::Parallel
    }

    /// Applies `f` to every item, preserving order.
    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

/// Splits `out` (row-major, `width` items per row) along the partition's
/// bands and calls `f(rows, band_slice)` once per band.
///
/// Static partitions run one task per worker over its band block; dynamic
/// partitions run one task per worker pulling bands from a shared counter.
pub fn run_bands<T, F>(exec: Executor, partition: &BandPartition, width: usize, out: &mut [T], f: F)
where
    T: Send,
    F: Fn(Range<usize>, &mut [T]) + Sync + Send,
{
    assert_eq!(out.len(), partition.height * width, "output does not match partition");
    let mut slices: Vec<Option<&mut [T]>> = Vec::with_capacity(partition.n_bands());
    let mut rest = out;
    for band in &partition.bands {
        let (head, tail) = rest.split_at_mut(band.len() * width);
        slices.push(Some(head));
        rest = tail;
    }

    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        match partition.mode {
            PartitionMode::Static => {
                let mut per_worker: Vec<Vec<(usize, &mut [T])>> = partition
                    .assignment
                    .iter()
                    .map(|bands| {
                        bands
                            .iter()
                            .map(|&b| (b, slices[b].take().expect("band assigned twice")))
                            .collect()
                    })
                    .collect();
                per_worker.par_iter_mut().for_each(|work| {
                    for (b, slice) in work.iter_mut() {
                        f(partition.bands[*b].clone(), slice);
                    }
                });
            }
            PartitionMode::Dynamic => {
                let queue: Vec<Mutex<Option<&mut [T]>>> = slices.into_iter().map(Mutex::new).collect();
                let next = AtomicUsize::new(0);
                (0..partition.n_workers()).into_par_iter().for_each(|_| loop {
                    let b = next.fetch_add(1, Ordering::Relaxed);
                    if b >= queue.len() {
                        break;
                    }
                    let slice = queue[b].lock().unwrap().take().expect("band dequeued twice");
                    f(partition.bands[b].clone(), slice);
                });
            }
        }
        return;
    }

    let _ = exec;
    for b in partition.visit_order() {
        let slice = slices[b].take().expect("band visited twice");
        f(partition.bands[b].clone(), slice);
    }
}
