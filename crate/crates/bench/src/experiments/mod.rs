//! Seeded experiment drivers. Each returns structured per-run records and
//! renders them as a [`ResultTable`](crate::table::ResultTable).

mod bradley_terry;
mod categorical;
mod mixture;
mod vi;

use geodesic_core::optimizers::{Outcome, RunTrace};

use crate::table::Value;

pub use bradley_terry::{BtConfig, BtMethod, BtMode, BtRecord, BtResult, run_bradley_terry};
pub use categorical::{CategoricalKlConfig, CategoricalKlResult, KlObjective, KlRun, run_categorical_kl};
pub use mixture::{MixtureCell, MixtureConfig, MixtureMethod, MixtureResult, run_mixture_mle};
pub use vi::{ViConfig, ViRecord, ViResult, run_vi_mlr};

/// Default master seed of every experiment.
pub const DEFAULT_SEED: u64 = 0;

/// How one optimizer run ended, with its iteration count.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Converged(usize),
    MaxIters(usize),
    Overflow(usize),
    StepUnderflow(usize),
    /// The run aborted with an error (for example a failed Newton inversion).
    Error(String),
}

impl RunOutcome {
    pub fn from_trace(trace: &RunTrace) -> Self {
        match trace.outcome {
            Outcome::Converged => RunOutcome::Converged(trace.iterations),
            Outcome::MaxIters => RunOutcome::MaxIters(trace.iterations),
            Outcome::Overflow => RunOutcome::Overflow(trace.iterations),
            Outcome::StepUnderflow => RunOutcome::StepUnderflow(trace.iterations),
        }
    }

    pub fn from_result(result: geodesic_core::Result<RunTrace>) -> Self {
        match result {
            Ok(trace) => Self::from_trace(&trace),
            Err(e) => RunOutcome::Error(e.to_string()),
        }
    }

    /// Iteration count of a converged run.
    pub fn iterations(&self) -> Option<usize> {
        match self {
            RunOutcome::Converged(k) => Some(*k),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            RunOutcome::Converged(k) => k.to_string(),
            RunOutcome::MaxIters(k) => format!("no convergence in {k} iterations"),
            RunOutcome::Overflow(_) => "overflow".to_owned(),
            RunOutcome::StepUnderflow(k) => format!("step underflow at iteration {}", k + 1),
            RunOutcome::Error(e) => format!("error: {e}"),
        }
    }

    pub fn value(&self) -> Value {
        match self {
            RunOutcome::Converged(k) => Value::Count(*k),
            other => Value::Failure(other.label()),
        }
    }
}

/// Summary of the converged runs, or a failure note if any run failed.
pub(crate) fn summarize_runs<'a>(runs: impl IntoIterator<Item = &'a RunOutcome>) -> Value {
    let runs: Vec<&RunOutcome> = runs.into_iter().collect();
    let iterations: Vec<f64> = runs.iter().filter_map(|r| r.iterations()).map(|k| k as f64).collect();
    let failed = runs.len() - iterations.len();
    if failed > 0 {
        let first = runs
            .iter()
            .find(|r| r.iterations().is_none())
            .map(|r| r.label())
            .unwrap_or_default();
        return Value::Failure(format!("{failed} of {} runs failed (first: {first})", runs.len()));
    }
    Value::summarize(&iterations)
}

pub(crate) fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}
