use crate::error::Result;
use crate::linalg::{Matrix, dot};

use super::{EtaCoords, ThetaCoords};

/// Absolute margin used by every strict domain predicate.
pub const DOMAIN_MARGIN: f64 = 1e-12;

/// A model family carrying a dually flat structure.
///
/// `ψ` is the potential in the natural chart, `η = ∇ψ(θ)`, and the Fisher
/// metric is `g(θ) = ∇²ψ(θ)`. The same metric written in the expectation chart
/// is `∇²φ(η) = g(θ)⁻¹`, where `φ` is the Legendre conjugate of `ψ`.
pub trait DuallyFlatModel {
    fn dim(&self) -> usize;

    fn psi(&self, theta: &ThetaCoords) -> Result<f64>;

    fn eta_from_theta(&self, theta: &ThetaCoords) -> Result<EtaCoords>;

    /// Same as [`eta_from_theta`](Self::eta_from_theta), seeded with a nearby
    /// `η` for models whose inverse map is iterative.
    fn eta_from_theta_near(&self, theta: &ThetaCoords, _hint: Option<&EtaCoords>) -> Result<EtaCoords> {
        self.eta_from_theta(theta)
    }

    fn theta_from_eta(&self, eta: &EtaCoords) -> Result<ThetaCoords>;

    /// `g_ij(θ) = ∂²ψ/∂θⁱ∂θʲ`.
    fn metric_theta(&self, theta: &ThetaCoords) -> Result<Matrix>;

    /// `∂²φ/∂η_i∂η_j`, the inverse of [`metric_theta`](Self::metric_theta).
    fn metric_eta(&self, eta: &EtaCoords) -> Result<Matrix>;

    fn theta_in_domain(&self, theta: &ThetaCoords) -> bool;

    fn eta_in_domain(&self, eta: &EtaCoords) -> bool;

    /// `φ(η) = Σ θⁱ η_i − ψ(θ(η))`.
    fn dual_potential(&self, eta: &EtaCoords) -> Result<f64> {
        let theta = self.theta_from_eta(eta)?;
        Ok(dot(theta.as_slice(), eta.as_slice()) - self.psi(&theta)?)
    }
}

impl<M: DuallyFlatModel + ?Sized> DuallyFlatModel for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn psi(&self, theta: &ThetaCoords) -> Result<f64> {
        (**self).psi(theta)
    }
    fn eta_from_theta(&self, theta: &ThetaCoords) -> Result<EtaCoords> {
        (**self).eta_from_theta(theta)
    }
    fn eta_from_theta_near(&self, theta: &ThetaCoords, hint: Option<&EtaCoords>) -> Result<EtaCoords> {
        (**self).eta_from_theta_near(theta, hint)
    }
    fn theta_from_eta(&self, eta: &EtaCoords) -> Result<ThetaCoords> {
        (**self).theta_from_eta(eta)
    }
    fn metric_theta(&self, theta: &ThetaCoords) -> Result<Matrix> {
        (**self).metric_theta(theta)
    }
    fn metric_eta(&self, eta: &EtaCoords) -> Result<Matrix> {
        (**self).metric_eta(eta)
    }
    fn theta_in_domain(&self, theta: &ThetaCoords) -> bool {
        (**self).theta_in_domain(theta)
    }
    fn eta_in_domain(&self, eta: &EtaCoords) -> bool {
        (**self).eta_in_domain(eta)
    }
    fn dual_potential(&self, eta: &EtaCoords) -> Result<f64> {
        (**self).dual_potential(eta)
    }
}
