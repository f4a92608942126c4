//! Finite-difference oracles used to check analytic derivatives.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, max_abs_diff, norm_inf};

/// Relative step used by the scaled variants: `h_i = 1e-6 · (1 + |x_i|)`.
pub const FD_REL_STEP: f64 = 1e-6;

/// Central differences `(f(x + h e_i) − f(x − h e_i)) / 2h` with a fixed `h`.
pub fn fd_gradient<F>(f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    fd_gradient_with(f, x, |_| h)
}

/// Central differences with the per-coordinate step `1e-6 · (1 + |x_i|)`.
pub fn fd_gradient_scaled<F>(f: F, x: &[f64]) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    fd_gradient_with(f, x, |xi| FD_REL_STEP * (1.0 + xi.abs()))
}

fn fd_gradient_with<F, H>(mut f: F, x: &[f64], step: H) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
    H: Fn(f64) -> f64,
{
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = step(x[i]);
        if !(h > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "finite-difference step must be positive, got {h}"
            )));
        }
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite("finite-difference evaluation"));
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

/// Jacobian `J_ij = ∂f_i/∂x_j` of a vector map by scaled central differences.
pub fn fd_jacobian<F>(mut f: F, x: &[f64]) -> Result<Matrix>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut probe = x.to_vec();
    let mut columns = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = FD_REL_STEP * (1.0 + x[j].abs());
        probe[j] = x[j] + h;
        let up = f(&probe)?;
        probe[j] = x[j] - h;
        let down = f(&probe)?;
        probe[j] = x[j];
        if up.len() != down.len() {
            return Err(Error::DimensionMismatch {
                expected: up.len(),
                got: down.len(),
            });
        }
        if up.iter().chain(&down).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("finite-difference evaluation"));
        }
        columns.push(
            up.iter()
                .zip(&down)
                .map(|(u, d)| (u - d) / (2.0 * h))
                .collect::<Vec<_>>(),
        );
    }
    let rows = columns.first().map_or(0, Vec::len);
    Ok(Matrix::from_fn(rows, x.len(), |i, j| columns[j][i]))
}

/// `‖a − b‖∞ / max(‖a‖∞, ‖b‖∞, 1)`.
///
/// The unit floor keeps the measure meaningful at stationary points, where a
/// purely relative error would divide by rounding noise.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    max_abs_diff(a, b) / norm_inf(a).max(norm_inf(b)).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn quadratic_gradient() {
        let g = fd_gradient(|x| Ok(x.iter().map(|v| v * v).sum()), &[1.0, 2.0], 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-8 && (g[1] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn constant_has_zero_gradient() {
        let g = fd_gradient_scaled(|_| Ok(7.5), &[0.3, -2.0, 11.0]).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn non_finite_evaluation_is_an_error() {
        let err = fd_gradient(|x| Ok(if x[0] > 0.0 { f64::INFINITY } else { 0.0 }), &[0.0], 1e-3).unwrap_err();
        assert_eq!(err, Error::NonFinite("finite-difference evaluation"));
    }

    #[test]
    fn jacobian_of_linear_map() {
        let j = fd_jacobian(|x| Ok(vec![2.0 * x[0] + x[1], -x[1]]), &[0.5, 0.25]).unwrap();
        assert!(max_abs_diff(j.as_slice(), &[2.0, 1.0, 0.0, -1.0]) < 1e-9);
    }
}
