//! Partitioned right-hand sides N(y*, y).
//!
//! The duplicated system y*' = N(y*, y), y' = N(y*, y) has identical
//! right-hand sides, so exact integration keeps y* = y; a partitioned
//! integrator treats the first argument explicitly and the second
//! implicitly. Implementations declare which components are actually read
//! through the first argument so the stepper only materializes that slice
//! of the explicit stage values.

use std::ops::Range;

use crate::error::Result;

/// Per-stage-solve work counters, accumulated into step records.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageStats {
    /// Transport sweeps (or other high-order solves) performed.
    pub ho_solves: u64,
    /// Inner nonlinear (Newton) iterations.
    pub lo_iters: u64,
    /// Outer fixed-point iterations of the stage solve.
    pub outer_iters: u64,
    /// Mass removed by negativity clipping, in the system's own units.
    pub clipped_mass: f64,
}

impl StageStats {
    pub fn accumulate(&mut self, other: &StageStats) {
        self.ho_solves += other.ho_solves;
        self.lo_iters += other.lo_iters;
        self.outer_iters += other.outer_iters;
        self.clipped_mass += other.clipped_mass;
    }
}

/// A right-hand side N(y*, y) with an implicit stage-solve capability.
pub trait PartitionedSystem {
    /// State dimension.
    fn dim(&self) -> usize;

    /// Named component blocks of the flat state vector, for error masks
    /// and reporting.
    fn component_blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        vec![("state", 0..self.dim())]
    }

    /// The contiguous index range read through the explicit argument.
    /// Only this slice of Y* is materialized by the stepper.
    fn explicit_projection(&self) -> Range<usize> {
        0..self.dim()
    }

    /// Evaluates N(y*, y) into `out`. `y_star` holds only the components
    /// of the explicit projection, in order.
    fn eval(&self, y_star: &[f64], y: &[f64], out: &mut [f64]);

    /// Solves Y = known + mu * N(y_star, Y) for Y. The residual of the
    /// returned Y must satisfy the declared [`stage_tolerance`] in the
    /// implementation's own relative measure.
    ///
    /// [`stage_tolerance`]: PartitionedSystem::stage_tolerance
    fn solve_stage(&self, known: &[f64], mu: f64, y_star: &[f64]) -> Result<(Vec<f64>, StageStats)>;

    /// Declared relative tolerance of `solve_stage`.
    fn stage_tolerance(&self) -> f64 {
        1e-12
    }

    /// Applies the system's documented state fixup (e.g. clipping
    /// negative intensities) to a candidate solution, returning the
    /// magnitude removed in the system's own units. The stepper calls
    /// this on the primary and embedded solutions of every step.
    fn fixup_state(&self, _y: &mut [f64]) -> f64 {
        0.0
    }
}
