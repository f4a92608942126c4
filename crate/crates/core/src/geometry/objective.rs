use alloc::vec::Vec;

use crate::error::{Result, check_finite};
use crate::linalg::{dot, spd_solve, sub};

use super::{DuallyFlatModel, EtaCoords, Point, ThetaCoords, bregman_divergence};

/// The analytic gradient an objective computes directly.
#[derive(Debug, Clone, PartialEq)]
pub enum Gradient {
    /// `D_θ f`.
    Theta(Vec<f64>),
    /// `D_η f`.
    Eta(Vec<f64>),
    Both {
        theta: Vec<f64>,
        eta: Vec<f64>,
    },
}

/// A smooth function on a model with partial derivatives in both charts.
///
/// Implementors supply whichever gradient is cheap; the other one follows from
/// the chain rule through the metric, `D_η f = g(θ)⁻¹ D_θ f`.
pub trait DualGradientObjective<M: DuallyFlatModel + ?Sized> {
    fn value(&self, model: &M, p: &Point) -> Result<f64>;

    fn gradient(&self, model: &M, p: &Point) -> Result<Gradient>;

    /// `D_θ f(p)`.
    fn grad_theta(&self, model: &M, p: &Point) -> Result<Vec<f64>> {
        let g = match self.gradient(model, p)? {
            Gradient::Theta(g) | Gradient::Both { theta: g, .. } => g,
            Gradient::Eta(ge) => spd_solve(&model.metric_eta(p.eta(model)?)?, &ge)?,
        };
        check_finite(&g, "theta gradient")?;
        Ok(g)
    }

    /// `D_η f(p)`.
    fn grad_eta(&self, model: &M, p: &Point) -> Result<Vec<f64>> {
        let g = match self.gradient(model, p)? {
            Gradient::Eta(g) | Gradient::Both { eta: g, .. } => g,
            Gradient::Theta(gt) => spd_solve(&model.metric_theta(p.theta(model)?)?, &gt)?,
        };
        check_finite(&g, "eta gradient")?;
        Ok(g)
    }

    /// Gradient in the strength parametrisation `π₁..π_{N−1}`, for objectives
    /// that have one.
    fn pi_gradient(&self, _model: &M, _p: &Point) -> Option<Result<Vec<f64>>> {
        None
    }
}

/// `f(r) = B_ψ(r, q)`, which for an exponential family is `KL(q‖r)`.
///
/// `D_θ f(r) = η(r) − η(q)`, so one m-geodesic step of unit length lands on
/// `q` from anywhere.
#[derive(Debug, Clone)]
pub struct ForwardKl {
    target_eta: EtaCoords,
    target_dual_potential: f64,
}

impl ForwardKl {
    pub fn new<M: DuallyFlatModel + ?Sized>(model: &M, target: &Point) -> Result<Self> {
        let target_eta = target.eta(model)?.clone();
        let target_dual_potential = model.dual_potential(&target_eta)?;
        Ok(Self {
            target_eta,
            target_dual_potential,
        })
    }

    pub fn target_eta(&self) -> &EtaCoords {
        &self.target_eta
    }
}

impl<M: DuallyFlatModel + ?Sized> DualGradientObjective<M> for ForwardKl {
    fn value(&self, model: &M, p: &Point) -> Result<f64> {
        let theta = p.theta(model)?;
        Ok(model.psi(theta)? + self.target_dual_potential - dot(theta.as_slice(), self.target_eta.as_slice()))
    }

    fn gradient(&self, model: &M, p: &Point) -> Result<Gradient> {
        Ok(Gradient::Theta(sub(
            p.eta(model)?.as_slice(),
            self.target_eta.as_slice(),
        )))
    }
}

/// `h(r) = B_ψ(q, r)`, which for an exponential family is `KL(r‖q)`.
///
/// `D_η h(r) = θ(r) − θ(q)`, so one e-geodesic step of unit length lands on
/// `q` from anywhere.
#[derive(Debug, Clone)]
pub struct BackwardKl {
    target: Point,
    target_theta: ThetaCoords,
}

impl BackwardKl {
    pub fn new<M: DuallyFlatModel + ?Sized>(model: &M, target: &Point) -> Result<Self> {
        let target_theta = target.theta(model)?.clone();
        target.eta(model)?;
        Ok(Self {
            target: target.clone(),
            target_theta,
        })
    }

    pub fn target_theta(&self) -> &ThetaCoords {
        &self.target_theta
    }
}

impl<M: DuallyFlatModel + ?Sized> DualGradientObjective<M> for BackwardKl {
    fn value(&self, model: &M, p: &Point) -> Result<f64> {
        bregman_divergence(model, &self.target, p)
    }

    fn gradient(&self, model: &M, p: &Point) -> Result<Gradient> {
        Ok(Gradient::Eta(sub(
            p.theta(model)?.as_slice(),
            self.target_theta.as_slice(),
        )))
    }
}

/// Negative log-likelihood of `n` observations from an exponential family
/// with natural sufficient statistics, `n (ψ(θ) − Σ θⁱ T̄_i)`, dropping the
/// base-measure term.
///
/// `T̄` is the sample mean of the sufficient statistic; `D_θ = n (η(θ) − T̄)`.
#[derive(Debug, Clone)]
pub struct ExpFamilyNll {
    mean_statistic: Vec<f64>,
    sample_size: f64,
}

impl ExpFamilyNll {
    pub fn new(mean_statistic: Vec<f64>, sample_size: f64) -> Result<Self> {
        check_finite(&mean_statistic, "sufficient statistic")?;
        if !(sample_size > 0.0) {
            return Err(crate::Error::InvalidInput(alloc::format!(
                "sample size must be positive, got {sample_size}"
            )));
        }
        Ok(Self {
            mean_statistic,
            sample_size,
        })
    }

    pub fn mean_statistic(&self) -> &[f64] {
        &self.mean_statistic
    }

    pub fn sample_size(&self) -> f64 {
        self.sample_size
    }
}

impl<M: DuallyFlatModel + ?Sized> DualGradientObjective<M> for ExpFamilyNll {
    fn value(&self, model: &M, p: &Point) -> Result<f64> {
        let theta = p.theta(model)?;
        Ok(self.sample_size * (model.psi(theta)? - dot(theta.as_slice(), &self.mean_statistic)))
    }

    fn gradient(&self, model: &M, p: &Point) -> Result<Gradient> {
        let eta = p.eta(model)?;
        crate::error::check_len(eta.len(), self.mean_statistic.len())?;
        Ok(Gradient::Theta(
            eta.as_slice()
                .iter()
                .zip(&self.mean_statistic)
                .map(|(e, t)| self.sample_size * (e - t))
                .collect(),
        ))
    }
}
