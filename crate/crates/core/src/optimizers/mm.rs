use alloc::vec::Vec;

use crate::error::{Error, Result, check_len};
use crate::linalg::norm2;
use crate::models::{BradleyTerryModel, BtObservation};

use super::{Outcome, RunTrace, TraceCoords};

/// One minorize–maximize update of Bradley–Terry strengths:
/// `π̃_i = T_i / Σ_{j≠i} n_ij / (π_i + π_j)`, then normalized.
///
/// A player without wins gets strength zero, which is reported as leaving
/// the domain.
pub fn bt_mm_step(model: &BradleyTerryModel, obs: &BtObservation, pi: &[f64]) -> Result<Vec<f64>> {
    let n = model.players();
    check_len(n, pi.len())?;
    if pi.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::OutOfDomain("Bradley-Terry strengths"));
    }
    let wins = model.sufficient_statistics(obs);
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let denom: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| f64::from(model.games(i, j)) / (pi[i] + pi[j]))
                .sum();
            wins[i] / denom
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let next: Vec<f64> = raw.into_iter().map(|v| v / total).collect();
    if next.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
        return Err(Error::OutOfDomain("Bradley-Terry strengths (a player has no wins)"));
    }
    Ok(next)
}

/// Iterates [`bt_mm_step`] until the strength gradient of the negative
/// log-likelihood has Euclidean norm below `epsilon`.
pub fn run_mm(
    model: &BradleyTerryModel,
    obs: &BtObservation,
    init: &[f64],
    epsilon: f64,
    max_iters: usize,
) -> Result<RunTrace> {
    let mut trace = RunTrace::new(TraceCoords::Simplex);
    let mut pi = init.to_vec();
    trace.iterates.push(pi.clone());
    if norm2(&model.nll_grad_pi(obs, &pi)?) < epsilon {
        trace.outcome = Outcome::Converged;
        return Ok(trace);
    }
    for _ in 0..max_iters {
        pi = bt_mm_step(model, obs, &pi)?;
        trace.iterates.push(pi.clone());
        trace.iterations += 1;
        if norm2(&model.nll_grad_pi(obs, &pi)?) < epsilon {
            trace.outcome = Outcome::Converged;
            return Ok(trace);
        }
    }
    trace.outcome = Outcome::MaxIters;
    Ok(trace)
}
