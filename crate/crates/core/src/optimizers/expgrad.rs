use alloc::vec::Vec;

// Unused whenever std is linked (tests, std dependents), which supplies the inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result, check_finite, check_len};

use super::{Outcome, RunTrace, TraceCoords};

/// Outcome of one multiplicative update.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpGradStep {
    Updated(Vec<f64>),
    /// Some `exp(−t g_j)` or the normalizer was not finite.
    Overflow,
}

/// `r_j ← r_j exp(−t g_j) / Σ_i r_i exp(−t g_i)` on the probability simplex.
///
/// The exponentials are evaluated as written, without a max-shift, so large
/// steps overflow exactly as a direct implementation would; that case is
/// returned as [`ExpGradStep::Overflow`].
pub fn exponentiated_gradient_step(r: &[f64], euclid_grad: &[f64], t: f64) -> Result<ExpGradStep> {
    check_len(r.len(), euclid_grad.len())?;
    if r.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::OutOfDomain("simplex (entries must be positive)"));
    }
    let weighted: Vec<f64> = r.iter().zip(euclid_grad).map(|(ri, gi)| ri * (-t * gi).exp()).collect();
    let total: f64 = weighted.iter().sum();
    if weighted.iter().any(|w| !w.is_finite()) || !total.is_finite() || !(total > 0.0) {
        return Ok(ExpGradStep::Overflow);
    }
    let next: Vec<f64> = weighted.into_iter().map(|w| w / total).collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Ok(ExpGradStep::Overflow);
    }
    Ok(ExpGradStep::Updated(next))
}

/// Exponentiated-gradient loop.
///
/// `grad` returns the Euclidean gradient at a simplex point and `monitor` the
/// stopping statistic; the run stops once `monitor < epsilon`. A non-finite
/// gradient or update ends the run with [`Outcome::Overflow`].
pub fn run_exponentiated_gradient<G, S>(
    init: &[f64],
    mut grad: G,
    mut monitor: S,
    step_size: f64,
    epsilon: f64,
    max_iters: usize,
) -> Result<RunTrace>
where
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
    S: FnMut(&[f64]) -> Result<f64>,
{
    check_finite(init, "initial simplex point")?;
    let mut trace = RunTrace::new(TraceCoords::Simplex);
    trace.iterates.push(init.to_vec());
    let mut r = init.to_vec();
    if monitor(&r)? < epsilon {
        trace.outcome = Outcome::Converged;
        return Ok(trace);
    }
    for _ in 0..max_iters {
        let g = match grad(&r) {
            Ok(g) if g.iter().all(|v| v.is_finite()) => g,
            Ok(_) | Err(Error::OutOfDomain(_)) => {
                trace.outcome = Outcome::Overflow;
                return Ok(trace);
            }
            Err(e) => return Err(e),
        };
        r = match exponentiated_gradient_step(&r, &g, step_size)? {
            ExpGradStep::Updated(next) => next,
            ExpGradStep::Overflow => {
                trace.outcome = Outcome::Overflow;
                return Ok(trace);
            }
        };
        trace.iterates.push(r.clone());
        trace.step_sizes_used.push(step_size);
        trace.iterations += 1;
        match monitor(&r) {
            Ok(v) if v < epsilon => {
                trace.outcome = Outcome::Converged;
                return Ok(trace);
            }
            Ok(v) if v.is_finite() => {}
            Ok(_) | Err(Error::OutOfDomain(_)) => {
                trace.outcome = Outcome::Overflow;
                return Ok(trace);
            }
            Err(e) => return Err(e),
        }
    }
    trace.outcome = Outcome::MaxIters;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn zero_gradient_keeps_point() {
        let r = [0.2, 0.5, 0.3];
        assert_eq!(
            exponentiated_gradient_step(&r, &[0.0; 3], 1.0).unwrap(),
            ExpGradStep::Updated(r.to_vec())
        );
    }

    #[test]
    fn unit_gradient_on_first_coordinate() {
        let r = [1.0 / 3.0; 3];
        let ExpGradStep::Updated(next) = exponentiated_gradient_step(&r, &[1.0, 0.0, 0.0], 1.0).unwrap() else {
            panic!("unexpected overflow");
        };
        let e = (-1.0f64).exp();
        let expected = [e / (e + 2.0), 1.0 / (e + 2.0), 1.0 / (e + 2.0)];
        assert!(max_abs_diff(&next, &expected) < 1e-15);
        assert!(max_abs_diff(&next, &[0.155_362, 0.422_319, 0.422_319]) < 1e-6);
    }

    #[test]
    fn huge_step_overflows() {
        let r = [0.5, 0.5];
        assert_eq!(
            exponentiated_gradient_step(&r, &[-1000.0, 0.0], 1.0).unwrap(),
            ExpGradStep::Overflow
        );
    }
}
