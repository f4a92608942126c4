use alloc::vec::Vec;

use crate::error::{Result, check_len};

use super::{Outcome, RunTrace, TraceCoords};

/// Plain gradient descent `x ← x − t ∇f(x)` for a fixed number of iterations.
///
/// The objective is evaluated only to detect divergence: a non-finite value
/// or gradient ends the run with [`Outcome::Overflow`]. A run that uses its
/// whole budget ends with [`Outcome::MaxIters`].
pub fn run_euclidean_gd<F, G>(mut f: F, mut grad: G, init: &[f64], step_size: f64, iters: usize) -> Result<RunTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
    G: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut trace = RunTrace::new(TraceCoords::Parameters);
    let mut x = init.to_vec();
    trace.iterates.push(x.clone());
    for _ in 0..iters {
        let g = grad(&x)?;
        check_len(x.len(), g.len())?;
        if g.iter().any(|v| !v.is_finite()) {
            trace.outcome = Outcome::Overflow;
            return Ok(trace);
        }
        x.iter_mut().zip(&g).for_each(|(xi, gi)| *xi -= step_size * gi);
        if x.iter().any(|v| !v.is_finite()) || !f(&x)?.is_finite() {
            trace.outcome = Outcome::Overflow;
            return Ok(trace);
        }
        trace.iterates.push(x.clone());
        trace.step_sizes_used.push(step_size);
        trace.iterations += 1;
    }
    trace.outcome = Outcome::MaxIters;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_contracts() {
        let trace = run_euclidean_gd(|x| Ok(x[0] * x[0]), |x| Ok(alloc::vec![2.0 * x[0]]), &[1.0], 0.25, 3).unwrap();
        assert_eq!(trace.iterations, 3);
        assert_eq!(trace.last().unwrap(), &[0.125]);
    }
}
