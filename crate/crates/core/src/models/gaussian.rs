use alloc::vec::Vec;

// Unused whenever std is linked (tests, std dependents), which supplies the inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result, check_len};
use crate::geometry::{DOMAIN_MARGIN, DuallyFlatModel, EtaCoords, ThetaCoords};
use crate::linalg::Matrix;

/// Product of `d` independent univariate normals `N(μ_j, σ_j²)`.
///
/// Coordinates are laid out as `d` location entries followed by `d` scale
/// entries: `θ = (μ/σ², −1/(2σ²))` and `η = (μ, μ² + σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagGaussianModel {
    d: usize,
}

/// Location and scale of a diagonal Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct MuSigma {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl DiagGaussianModel {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidModel(
                "diagonal Gaussian needs at least one coordinate".into(),
            ));
        }
        Ok(Self { d })
    }

    pub fn components(&self) -> usize {
        self.d
    }

    fn check_mu_sigma(&self, mu: &[f64], sigma: &[f64]) -> Result<()> {
        check_len(self.d, mu.len())?;
        check_len(self.d, sigma.len())?;
        if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::OutOfDomain("Gaussian scale (sigma must be positive)"));
        }
        Ok(())
    }

    pub fn theta_from_musigma(&self, mu: &[f64], sigma: &[f64]) -> Result<ThetaCoords> {
        self.check_mu_sigma(mu, sigma)?;
        let mut theta: Vec<f64> = mu.iter().zip(sigma).map(|(m, s)| m / (s * s)).collect();
        theta.extend(sigma.iter().map(|s| -0.5 / (s * s)));
        ThetaCoords::new(theta)
    }

    pub fn eta_from_musigma(&self, mu: &[f64], sigma: &[f64]) -> Result<EtaCoords> {
        self.check_mu_sigma(mu, sigma)?;
        let mut eta = mu.to_vec();
        eta.extend(mu.iter().zip(sigma).map(|(m, s)| m * m + s * s));
        EtaCoords::new(eta)
    }

    /// `σ² = −1/(2θ_{d+j})`, `μ = θ_j σ²`.
    pub fn musigma_from_theta(&self, theta: &ThetaCoords) -> Result<MuSigma> {
        check_len(2 * self.d, theta.len())?;
        let t = theta.as_slice();
        let (loc, scale) = t.split_at(self.d);
        if scale.iter().any(|s| !(*s < 0.0)) {
            return Err(Error::OutOfDomain(
                "Gaussian theta (precision entries must be negative)",
            ));
        }
        let var: Vec<f64> = scale.iter().map(|s| -0.5 / s).collect();
        Ok(MuSigma {
            mu: loc.iter().zip(&var).map(|(l, v)| l * v).collect(),
            sigma: var.iter().map(|v| v.sqrt()).collect(),
        })
    }

    /// `μ = η_j`, `σ² = η_{d+j} − η_j²`.
    pub fn musigma_from_eta(&self, eta: &EtaCoords) -> Result<MuSigma> {
        check_len(2 * self.d, eta.len())?;
        let (loc, second) = eta.as_slice().split_at(self.d);
        let var: Vec<f64> = loc.iter().zip(second).map(|(m, s)| s - m * m).collect();
        if var.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::OutOfDomain(
                "Gaussian eta (second moment must exceed squared mean)",
            ));
        }
        Ok(MuSigma {
            mu: loc.to_vec(),
            sigma: var.iter().map(|v| v.sqrt()).collect(),
        })
    }
}

impl DuallyFlatModel for DiagGaussianModel {
    fn dim(&self) -> usize {
        2 * self.d
    }

    /// `Σ_j −θ_j²/(4θ_{d+j}) + ½ log(π / −θ_{d+j})`.
    fn psi(&self, theta: &ThetaCoords) -> Result<f64> {
        check_len(2 * self.d, theta.len())?;
        let (loc, scale) = theta.as_slice().split_at(self.d);
        if scale.iter().any(|s| !(*s < 0.0)) {
            return Err(Error::OutOfDomain(
                "Gaussian theta (precision entries must be negative)",
            ));
        }
        Ok(loc
            .iter()
            .zip(scale)
            .map(|(a, b)| -a * a / (4.0 * b) + 0.5 * (core::f64::consts::PI / -b).ln())
            .sum())
    }

    fn eta_from_theta(&self, theta: &ThetaCoords) -> Result<EtaCoords> {
        let MuSigma { mu, sigma } = self.musigma_from_theta(theta)?;
        self.eta_from_musigma(&mu, &sigma)
    }

    fn theta_from_eta(&self, eta: &EtaCoords) -> Result<ThetaCoords> {
        let MuSigma { mu, sigma } = self.musigma_from_eta(eta)?;
        self.theta_from_musigma(&mu, &sigma)
    }

    /// Covariance of `(w, w²)` per coordinate:
    /// `[[σ², 2μσ²], [2μσ², 4μ²σ² + 2σ⁴]]`.
    fn metric_theta(&self, theta: &ThetaCoords) -> Result<Matrix> {
        let MuSigma { mu, sigma } = self.musigma_from_theta(theta)?;
        let d = self.d;
        let mut g = Matrix::zeros(2 * d, 2 * d);
        for j in 0..d {
            let (m, s) = (mu[j], sigma[j] * sigma[j]);
            g[(j, j)] = s;
            g[(j, d + j)] = 2.0 * m * s;
            g[(d + j, j)] = 2.0 * m * s;
            g[(d + j, d + j)] = 4.0 * m * m * s + 2.0 * s * s;
        }
        Ok(g)
    }

    /// Blockwise inverse of the `θ` metric:
    /// `[[(2μ² + σ²)/σ⁴, −μ/σ⁴], [−μ/σ⁴, 1/(2σ⁴)]]`.
    fn metric_eta(&self, eta: &EtaCoords) -> Result<Matrix> {
        let MuSigma { mu, sigma } = self.musigma_from_eta(eta)?;
        let d = self.d;
        let mut g = Matrix::zeros(2 * d, 2 * d);
        for j in 0..d {
            let (m, s) = (mu[j], sigma[j] * sigma[j]);
            let s2 = s * s;
            g[(j, j)] = (2.0 * m * m + s) / s2;
            g[(j, d + j)] = -m / s2;
            g[(d + j, j)] = -m / s2;
            g[(d + j, d + j)] = 0.5 / s2;
        }
        Ok(g)
    }

    fn theta_in_domain(&self, theta: &ThetaCoords) -> bool {
        theta.len() == 2 * self.d
            && theta.as_slice().iter().all(|t| t.is_finite())
            && theta.as_slice()[self.d..].iter().all(|&s| s < -DOMAIN_MARGIN)
    }

    fn eta_in_domain(&self, eta: &EtaCoords) -> bool {
        if eta.len() != 2 * self.d || !eta.as_slice().iter().all(|e| e.is_finite()) {
            return false;
        }
        let (loc, second) = eta.as_slice().split_at(self.d);
        loc.iter().zip(second).all(|(m, s)| s - m * m > DOMAIN_MARGIN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, spd_inverse};

    #[test]
    fn standard_normal_coordinates() {
        let g = DiagGaussianModel::new(1).unwrap();
        assert_eq!(g.theta_from_musigma(&[0.0], &[1.0]).unwrap().as_slice(), &[0.0, -0.5]);
        assert_eq!(g.eta_from_musigma(&[0.0], &[1.0]).unwrap().as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn shifted_narrow_normal() {
        let g = DiagGaussianModel::new(1).unwrap();
        assert_eq!(g.theta_from_musigma(&[2.0], &[0.5]).unwrap().as_slice(), &[8.0, -2.0]);
        assert_eq!(g.eta_from_musigma(&[2.0], &[0.5]).unwrap().as_slice(), &[2.0, 4.25]);
    }

    #[test]
    fn inverses_are_exact() {
        let g = DiagGaussianModel::new(3).unwrap();
        let mu = [0.3, -1.7, 4.0];
        let sigma = [0.7, 2.5, 0.01];
        let from_theta = g
            .musigma_from_theta(&g.theta_from_musigma(&mu, &sigma).unwrap())
            .unwrap();
        let from_eta = g.musigma_from_eta(&g.eta_from_musigma(&mu, &sigma).unwrap()).unwrap();
        assert!(max_abs_diff(&from_theta.mu, &mu) < 1e-12 && max_abs_diff(&from_theta.sigma, &sigma) < 1e-12);
        assert!(max_abs_diff(&from_eta.mu, &mu) < 1e-12 && max_abs_diff(&from_eta.sigma, &sigma) < 1e-12);
    }

    #[test]
    fn metrics_are_mutual_inverses() {
        let g = DiagGaussianModel::new(2).unwrap();
        let theta = g.theta_from_musigma(&[0.3, -1.0], &[0.7, 1.3]).unwrap();
        let eta = g.eta_from_theta(&theta).unwrap();
        let inv = spd_inverse(&g.metric_theta(&theta).unwrap()).unwrap();
        assert!(max_abs_diff(inv.as_slice(), g.metric_eta(&eta).unwrap().as_slice()) < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let g = DiagGaussianModel::new(1).unwrap();
        assert!(
            g.musigma_from_theta(&ThetaCoords::new(alloc::vec![1.0, 0.0]).unwrap())
                .is_err()
        );
        assert!(
            g.musigma_from_eta(&EtaCoords::new(alloc::vec![2.0, 4.0]).unwrap())
                .is_err()
        );
        assert!(g.theta_from_musigma(&[0.0], &[0.0]).is_err());
    }
}
