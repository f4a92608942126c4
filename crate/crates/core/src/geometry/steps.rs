use alloc::vec::Vec;

use crate::error::{Error, Result, check_finite, check_len};
use crate::linalg::{dot, norm_inf, spd_solve};

use super::{DuallyFlatModel, EtaCoords, Point, ThetaCoords};

fn check_step(dim: usize, coords: &[f64], grad: &[f64], t: f64) -> Result<()> {
    check_len(dim, coords.len())?;
    check_len(dim, grad.len())?;
    check_finite(grad, "gradient")?;
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidInput(alloc::format!(
            "step size must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

/// Point reached at time `t` along the e-geodesic leaving `θ` with velocity
/// `−grad f`: `θ − t · D_η f`.
///
/// The result is not checked against the model's domain.
pub fn e_geodesic_step<M: DuallyFlatModel + ?Sized>(
    model: &M,
    theta: &ThetaCoords,
    grad_eta: &[f64],
    t: f64,
) -> Result<ThetaCoords> {
    check_step(model.dim(), theta.as_slice(), grad_eta, t)?;
    ThetaCoords::new(theta.as_slice().iter().zip(grad_eta).map(|(x, g)| x - t * g).collect())
}

/// Point reached at time `t` along the m-geodesic leaving `η` with velocity
/// `−grad f`: `η − t · D_θ f`.
///
/// The result is not checked against the model's domain.
pub fn m_geodesic_step<M: DuallyFlatModel + ?Sized>(
    model: &M,
    eta: &EtaCoords,
    grad_theta: &[f64],
    t: f64,
) -> Result<EtaCoords> {
    check_step(model.dim(), eta.as_slice(), grad_theta, t)?;
    EtaCoords::new(eta.as_slice().iter().zip(grad_theta).map(|(x, g)| x - t * g).collect())
}

/// Canonical divergence `B_ψ(r, q) = ψ(θ(r)) + φ(η(q)) − Σ θʲ(r) η_j(q)`.
///
/// For an exponential family this is `KL(q‖r) = E_q[log q/r]`.
pub fn bregman_divergence<M: DuallyFlatModel + ?Sized>(model: &M, r: &Point, q: &Point) -> Result<f64> {
    if !r.in_domain(model) || !q.in_domain(model) {
        return Err(Error::OutOfDomain("model"));
    }
    let theta_r = r.theta(model)?;
    let eta_q = q.eta(model)?;
    let d = model.psi(theta_r)? + model.dual_potential(eta_q)? - dot(theta_r.as_slice(), eta_q.as_slice());
    if !d.is_finite() {
        return Err(Error::NonFinite("divergence"));
    }
    Ok(d.max(0.0))
}

/// Legendre conjugate `φ(η)` of the potential.
pub fn dual_potential<M: DuallyFlatModel + ?Sized>(model: &M, eta: &EtaCoords) -> Result<f64> {
    if !model.eta_in_domain(eta) {
        return Err(Error::OutOfDomain("eta"));
    }
    model.dual_potential(eta)
}

const MIRROR_TOL: f64 = 1e-12;
const MIRROR_MAX_ITERS: usize = 100;

/// Mirror-descent update solved numerically:
/// `argmin_θ ⟨D_θ f, θ⟩ + B_ψ(θ, θ_k) / t`.
///
/// Damped Newton on the strictly convex inner problem, stopping when the
/// gradient `D_θ f + (η(θ) − η(θ_k)) / t` has ∞-norm below `1e-12`. Intended
/// as an independent check of [`m_geodesic_step`], not as an optimizer.
pub fn mirror_descent_step_numeric<M: DuallyFlatModel + ?Sized>(
    model: &M,
    theta_k: &ThetaCoords,
    grad_theta: &[f64],
    t: f64,
) -> Result<ThetaCoords> {
    check_step(model.dim(), theta_k.as_slice(), grad_theta, t)?;
    if t == 0.0 {
        return Ok(theta_k.clone());
    }
    let eta_k = model.eta_from_theta(theta_k)?;
    let psi_k = model.psi(theta_k)?;
    let inner = |theta: &ThetaCoords| -> Result<f64> {
        let div = model.psi(theta)? - psi_k - dot(eta_k.as_slice(), theta.as_slice())
            + dot(eta_k.as_slice(), theta_k.as_slice());
        Ok(dot(grad_theta, theta.as_slice()) + div / t)
    };

    let mut theta = theta_k.clone();
    let mut hint = eta_k.clone();
    let mut value = inner(&theta)?;
    for _ in 0..MIRROR_MAX_ITERS {
        let eta = model.eta_from_theta_near(&theta, Some(&hint))?;
        let grad: Vec<f64> = grad_theta
            .iter()
            .zip(eta.as_slice().iter().zip(eta_k.as_slice()))
            .map(|(g, (e, ek))| g + (e - ek) / t)
            .collect();
        if norm_inf(&grad) < MIRROR_TOL {
            return Ok(theta);
        }
        let hess = model.metric_theta(&theta)?;
        // Hessian of the inner objective is g(θ)/t, so the Newton step is t·g⁻¹∇.
        let dir = spd_solve(&hess, &grad)?;
        let grad_norm = norm_inf(&grad);
        let mut step = t;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = theta.as_slice().iter().zip(&dir).map(|(x, d)| x - step * d).collect();
            if let Ok(candidate) = ThetaCoords::new(candidate)
                && model.theta_in_domain(&candidate)
            {
                // Near the optimum ψ differences drown in rounding, so a
                // smaller gradient also counts as progress.
                let progress = match (inner(&candidate), model.eta_from_theta_near(&candidate, Some(&eta))) {
                    (Ok(v), Ok(e)) => {
                        let cand_norm = grad_theta
                            .iter()
                            .zip(e.as_slice().iter().zip(eta_k.as_slice()))
                            .map(|(g, (e, ek))| (g + (e - ek) / t).abs())
                            .fold(0.0f64, f64::max);
                        (v < value || cand_norm < grad_norm).then_some(v)
                    }
                    _ => None,
                };
                if let Some(v) = progress {
                    theta = candidate;
                    value = v;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                what: "mirror-descent inner solve",
                iterations: MIRROR_MAX_ITERS,
            });
        }
        hint = eta;
    }
    Err(Error::NoConvergence {
        what: "mirror-descent inner solve",
        iterations: MIRROR_MAX_ITERS,
    })
}
