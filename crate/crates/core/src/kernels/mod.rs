//! The four benchmark workloads and their work partitioning.

mod binning;
mod cnn;
mod convolution;
mod exec;
mod mesh;
mod partition;
mod render;

pub use binning::average_binning;
pub use cnn::{cnn_ship_detect, CnnModel, LayerShape, RgbImage, WeightManifest, PATCH_SIZE};
pub use convolution::{correlate_f32, fp_convolution, ConvKernel};
pub use exec::{run_bands, Executor};
pub use mesh::{Pose6D, TriangleMesh};
pub use partition::{
    partition_bands, schedule_dynamic, BandPartition, BandRun, DynamicSchedule, PartitionMode,
    VPU_WORKERS,
};
pub use render::{quantize_depth, render_depth, Camera, DEPTH_MISS};

use crate::error::KernelError;

/// How a kernel splits its output rows across logical workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandPlan {
    pub n_bands: usize,
    pub n_workers: usize,
    pub mode: PartitionMode,
    pub executor: Executor,
}

impl BandPlan {
    /// 36 bands over 12 workers, 3 bands each.
    pub const fn static_36() -> Self {
        BandPlan {
            n_bands: 36,
            n_workers: VPU_WORKERS,
            mode: PartitionMode::Static,
            executor: Executor::Parallel,
        }
    }

    /// One band per worker-sized strip, handed out from a queue.
    pub const fn dynamic(n_bands: usize) -> Self {
        BandPlan {
            n_bands,
            n_workers: VPU_WORKERS,
            mode: PartitionMode::Dynamic,
            executor: Executor::Parallel,
        }
    }

    pub const fn single_worker() -> Self {
        BandPlan {
            n_bands: 1,
            n_workers: 1,
            mode: PartitionMode::Static,
            executor: Executor::Sequential,
        }
    }

    pub fn with_executor(self, executor: Executor) -> Self {
        BandPlan { executor, ..self }
    }

    /// Partition of `height` rows; the band count is capped at `height` so
    /// small test frames stay valid.
    pub fn partition(&self, height: usize) -> Result<BandPartition, KernelError> {
        partition_bands(height, self.n_bands.min(height).max(1), self.n_workers, self.mode)
    }
}

impl Default for BandPlan {
    fn default() -> Self {
        BandPlan::static_36()
    }
}
