//! Descent loops and the classical baselines they are compared against.

mod descent;
mod euclid;
mod expgrad;
mod mm;

use alloc::vec::Vec;

use crate::geometry::Chart;

pub use descent::{
    Connection, DEFAULT_MAX_HALVINGS, DEFAULT_MAX_ITERS, DescentConfig, GeodesicMove, HalvingRule, StopKind, StopRule,
    geodesic_move, run_geodesic_descent,
};
pub use euclid::run_euclidean_gd;
pub use expgrad::{ExpGradStep, exponentiated_gradient_step, run_exponentiated_gradient};
pub use mm::{bt_mm_step, run_mm};

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Converged,
    /// The iteration budget ran out (for fixed-length runs, the normal end).
    MaxIters,
    /// A multiplicative update produced a non-finite value.
    Overflow,
    /// No acceptable step was found within the halving budget.
    StepUnderflow,
}

/// Coordinates the iterates of a trace are recorded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceCoords {
    Theta,
    Eta,
    /// Points of the probability simplex (strengths, mixture weights).
    Simplex,
    /// Raw parameters of a Euclidean method.
    Parameters,
}

impl From<Chart> for TraceCoords {
    fn from(chart: Chart) -> Self {
        match chart {
            Chart::Theta => TraceCoords::Theta,
            Chart::Eta => TraceCoords::Eta,
        }
    }
}

/// History of an optimizer run.
///
/// `iterates[0]` is the starting point, so `iterates.len() == iterations + 1`;
/// `step_sizes_used[k]` is the step actually taken at iteration `k`, after any
/// halvings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub coords: TraceCoords,
    pub iterates: Vec<Vec<f64>>,
    pub step_sizes_used: Vec<f64>,
    pub iterations: usize,
    pub outcome: Outcome,
}

impl RunTrace {
    pub fn new(coords: impl Into<TraceCoords>) -> Self {
        Self {
            coords: coords.into(),
            iterates: Vec::new(),
            step_sizes_used: Vec::new(),
            iterations: 0,
            outcome: Outcome::MaxIters,
        }
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.iterates.last().map(Vec::as_slice)
    }

    pub fn converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }
}
