use alloc::format;
use alloc::vec::Vec;

// Unused whenever std is linked (tests, std dependents), which supplies the inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result, check_len};
use crate::geometry::{DOMAIN_MARGIN, DuallyFlatModel, EtaCoords, ExpFamilyNll, ThetaCoords};
use crate::linalg::Matrix;

/// Categorical distributions over `m + 1` outcomes.
///
/// `η = (η₁..η_m)` are the first `m` outcome probabilities with
/// `η_{m+1} = 1 − Σ η_i`; `θⁱ = log(η_i / η_{m+1})`; the potential is
/// `ψ(θ) = log(1 + Σ exp θⁱ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoricalModel {
    dim: usize,
}

impl CategoricalModel {
    /// `m` is the number of outcomes minus one.
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModel(
                "categorical model needs at least two outcomes".into(),
            ));
        }
        Ok(Self { dim: m })
    }

    pub fn outcomes(&self) -> usize {
        self.dim + 1
    }

    pub fn theta(&self, values: &[f64]) -> Result<ThetaCoords> {
        check_len(self.dim, values.len())?;
        ThetaCoords::new(values.to_vec())
    }

    pub fn eta(&self, values: &[f64]) -> Result<EtaCoords> {
        check_len(self.dim, values.len())?;
        EtaCoords::new(values.to_vec())
    }

    /// `η` from a full probability vector of length `m + 1`.
    pub fn eta_from_probabilities(&self, probs: &[f64]) -> Result<EtaCoords> {
        check_len(self.outcomes(), probs.len())?;
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(*p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("not a probability vector (sum {total})")));
        }
        self.eta(&probs[..self.dim])
    }

    /// Appends `η_{m+1}` to `η`.
    pub fn probabilities(&self, eta: &EtaCoords) -> Vec<f64> {
        let mut p = eta.as_slice().to_vec();
        p.push(1.0 - eta.as_slice().iter().sum::<f64>());
        p
    }

    /// Negative log-likelihood `N (ψ(θ) − Σ θⁱ T̄_i)` for outcome frequencies
    /// `T̄` (length `m + 1`, summing to one) from `N` observations.
    pub fn nll(&self, frequencies: &[f64], sample_size: f64) -> Result<ExpFamilyNll> {
        check_len(self.outcomes(), frequencies.len())?;
        let total: f64 = frequencies.iter().sum();
        if frequencies.iter().any(|f| !(*f >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "frequencies must be non-negative and sum to one (sum {total})"
            )));
        }
        ExpFamilyNll::new(frequencies[..self.dim].to_vec(), sample_size)
    }

    /// Outcome frequencies of 1-based observations in `1..=m+1`.
    pub fn frequencies(&self, observations: &[usize]) -> Result<Vec<f64>> {
        if observations.is_empty() {
            return Err(Error::InvalidInput("no observations".into()));
        }
        let mut counts = alloc::vec![0.0; self.outcomes()];
        for &x in observations {
            if x == 0 || x > self.outcomes() {
                return Err(Error::InvalidInput(format!(
                    "observation {x} outside 1..={}",
                    self.outcomes()
                )));
            }
            counts[x - 1] += 1.0;
        }
        let n = observations.len() as f64;
        Ok(counts.into_iter().map(|c| c / n).collect())
    }

    // max(0, θ) shift shared by ψ and η(θ)
    fn shifted_terms(theta: &[f64]) -> (f64, Vec<f64>, f64) {
        let shift = theta.iter().copied().fold(0.0, f64::max);
        let terms: Vec<f64> = theta.iter().map(|t| (t - shift).exp()).collect();
        let denom = (-shift).exp() + terms.iter().sum::<f64>();
        (shift, terms, denom)
    }
}

impl DuallyFlatModel for CategoricalModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn psi(&self, theta: &ThetaCoords) -> Result<f64> {
        check_len(self.dim, theta.len())?;
        let (shift, _, denom) = Self::shifted_terms(theta.as_slice());
        Ok(shift + denom.ln())
    }

    fn eta_from_theta(&self, theta: &ThetaCoords) -> Result<EtaCoords> {
        check_len(self.dim, theta.len())?;
        let (_, terms, denom) = Self::shifted_terms(theta.as_slice());
        EtaCoords::new(terms.into_iter().map(|t| t / denom).collect())
    }

    fn theta_from_eta(&self, eta: &EtaCoords) -> Result<ThetaCoords> {
        check_len(self.dim, eta.len())?;
        if !self.eta_in_domain(eta) {
            return Err(Error::OutOfDomain("categorical eta"));
        }
        let last = 1.0 - eta.as_slice().iter().sum::<f64>();
        ThetaCoords::new(eta.as_slice().iter().map(|e| (e / last).ln()).collect())
    }

    fn metric_theta(&self, theta: &ThetaCoords) -> Result<Matrix> {
        let eta = self.eta_from_theta(theta)?;
        let e = eta.as_slice();
        Ok(Matrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j { e[i] - e[i] * e[i] } else { -e[i] * e[j] }
        }))
    }

    fn metric_eta(&self, eta: &EtaCoords) -> Result<Matrix> {
        check_len(self.dim, eta.len())?;
        if !self.eta_in_domain(eta) {
            return Err(Error::OutOfDomain("categorical eta"));
        }
        let e = eta.as_slice();
        let inv_last = 1.0 / (1.0 - e.iter().sum::<f64>());
        Ok(Matrix::from_fn(self.dim, self.dim, |i, j| {
            if i == j { 1.0 / e[i] + inv_last } else { inv_last }
        }))
    }

    fn theta_in_domain(&self, theta: &ThetaCoords) -> bool {
        theta.len() == self.dim && theta.as_slice().iter().all(|t| t.is_finite())
    }

    fn eta_in_domain(&self, eta: &EtaCoords) -> bool {
        eta.len() == self.dim
            && eta.as_slice().iter().all(|&e| e > DOMAIN_MARGIN)
            && 1.0 - eta.as_slice().iter().sum::<f64>() > DOMAIN_MARGIN
    }

    /// Negative Shannon entropy `Σ_{i=1}^{m+1} η_i log η_i`.
    fn dual_potential(&self, eta: &EtaCoords) -> Result<f64> {
        check_len(self.dim, eta.len())?;
        if !self.eta_in_domain(eta) {
            return Err(Error::OutOfDomain("categorical eta"));
        }
        Ok(self.probabilities(eta).iter().map(|p| p * p.ln()).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, bregman_divergence, oracle};
    use alloc::vec;

    fn model() -> CategoricalModel {
        CategoricalModel::new(2).unwrap()
    }

    #[test]
    fn uniform_maps_to_origin() {
        let m = model();
        let theta = m.theta_from_eta(&m.eta(&[1.0 / 3.0, 1.0 / 3.0]).unwrap()).unwrap();
        assert!(theta.as_slice().iter().all(|t| t.abs() < 1e-15));
        assert!((m.psi(&theta).unwrap() - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn theta_of_half_three_tenths() {
        let m = model();
        let theta = m.theta_from_eta(&m.eta(&[0.5, 0.3]).unwrap()).unwrap();
        assert!((theta.as_slice()[0] - 2.5f64.ln()).abs() < 1e-14);
        assert!((theta.as_slice()[1] - 1.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn round_trip_of_extreme_theta() {
        let m = model();
        let theta = m.theta(&[5.0, -5.0]).unwrap();
        let back = m.theta_from_eta(&m.eta_from_theta(&theta).unwrap()).unwrap();
        assert!(crate::linalg::max_abs_diff(back.as_slice(), theta.as_slice()) < 1e-10);
    }

    #[test]
    fn psi_does_not_overflow() {
        let m = model();
        let psi = m.psi(&m.theta(&[800.0, 0.0]).unwrap()).unwrap();
        assert!((psi - 800.0).abs() < 1e-12);
        let eta = m.eta_from_theta(&m.theta(&[800.0, 0.0]).unwrap()).unwrap();
        assert!(eta.as_slice().iter().all(|e| e.is_finite()));
    }

    #[test]
    fn boundary_eta_is_rejected() {
        let m = model();
        assert_eq!(
            m.theta_from_eta(&m.eta(&[0.5, 0.5]).unwrap()).unwrap_err(),
            Error::OutOfDomain("categorical eta")
        );
        assert!(m.theta_from_eta(&m.eta(&[0.0, 0.5]).unwrap()).is_err());
    }

    #[test]
    fn dual_potential_is_negative_entropy() {
        let m = model();
        let uniform = m.dual_potential(&m.eta(&[1.0 / 3.0, 1.0 / 3.0]).unwrap()).unwrap();
        assert!((uniform + 3f64.ln()).abs() < 1e-14);
        // 0.5 ln 0.5 + 0.3 ln 0.3 + 0.2 ln 0.2
        let phi = m.dual_potential(&m.eta(&[0.5, 0.3]).unwrap()).unwrap();
        assert!((phi - (-1.029_653_014_064_573_7)).abs() < 1e-12);
    }

    #[test]
    fn divergence_matches_direct_kl_sum() {
        let m = model();
        let uniform = Point::from_eta(m.eta(&[1.0 / 3.0, 1.0 / 3.0]).unwrap());
        let q = Point::from_eta(m.eta(&[0.5, 0.3]).unwrap());
        let q_probs = [0.5, 0.3, 0.2];
        let direct: f64 = q_probs.iter().map(|p| p * (3.0 * p).ln()).sum();
        let b = bregman_divergence(&m, &uniform, &q).unwrap();
        assert!((b - direct).abs() < 1e-14);
        assert!((b - 0.068_959_274_603_536_15).abs() < 1e-12);
        assert_eq!(bregman_divergence(&m, &q, &q).unwrap(), 0.0);
    }

    #[test]
    fn psi_gradient_at_origin_is_uniform() {
        let m = model();
        let g = oracle::fd_gradient(|x| m.psi(&ThetaCoords::new(x.to_vec())?), &[0.0, 0.0], 1e-6).unwrap();
        assert!((g[0] - 1.0 / 3.0).abs() < 1e-9 && (g[1] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn nll_at_uniform_for_one_of_each() {
        use crate::geometry::DualGradientObjective;
        let m = model();
        let freqs = m.frequencies(&[1, 2, 3]).unwrap();
        let nll = m.nll(&freqs, 3.0).unwrap();
        let p = Point::from_theta(m.theta(&[0.0, 0.0]).unwrap());
        assert!((nll.value(&m, &p).unwrap() - 3.0 * 3f64.ln()).abs() < 1e-14);
        assert_eq!(nll.grad_theta(&m, &p).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_frequencies() {
        let m = model();
        assert!(m.nll(&[0.5, 0.6, -0.1], 10.0).is_err());
        assert!(m.nll(&[0.5, 0.5], 10.0).is_err());
        assert!(m.frequencies(&[0, 1]).is_err());
        assert!(CategoricalModel::new(0).is_err());
    }
}
