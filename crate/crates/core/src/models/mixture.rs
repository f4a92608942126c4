use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Unused whenever std is linked (tests, std dependents), which supplies the inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result, check_finite, check_len};
use crate::geometry::{DOMAIN_MARGIN, DualGradientObjective, DuallyFlatModel, EtaCoords, Gradient, Point, ThetaCoords};
use crate::linalg::{Cholesky, Matrix, dot, norm_inf, spd_inverse, spd_solve};

/// Settings of the Newton inversion `θ → η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub tolerance: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iters: 100,
            max_halvings: 30,
        }
    }
}

/// Mixture family `p(x|η) = Σ_{k<n} η_k p_k(x) + (1 − Σ η_k) p_n(x)` over a
/// finite sample space.
///
/// `η` is the m-affine chart (the first `n − 1` mixture weights). The dual
/// chart is `θⁱ = Σ_x (p_i(x) − p_n(x)) log p(x|η)` and the dual potential is
/// the negative entropy `φ(η) = Σ_x p log p`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    omega_size: usize,
    components: Vec<Vec<f64>>,
    // p_i − p_n for i < n, restricted to the support
    differences: Vec<Vec<f64>>,
    support: Vec<usize>,
    theta_image_is_full: bool,
    newton: NewtonConfig,
}

impl MixtureModel {
    /// Builds the family from `n ≥ 2` probability tables over `{0..omega_size}`.
    ///
    /// Rejects tables that do not sum to one and families whose differences
    /// `p_i − p_n` are linearly dependent (the `θ` map would not be injective).
    pub fn new(omega_size: usize, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "mixture needs at least two components, got {}",
                components.len()
            )));
        }
        for (k, c) in components.iter().enumerate() {
            if c.len() != omega_size {
                return Err(Error::InvalidModel(format!(
                    "component {k} has {} entries, expected {omega_size}",
                    c.len()
                )));
            }
            let total: f64 = c.iter().sum();
            if c.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || (total - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidModel(format!(
                    "component {k} is not a probability table (sum {total})"
                )));
            }
        }
        let support: Vec<usize> = (0..omega_size)
            .filter(|&x| components.iter().any(|c| c[x] > 0.0))
            .collect();
        let last = components.len() - 1;
        let differences: Vec<Vec<f64>> = (0..last)
            .map(|i| {
                support
                    .iter()
                    .map(|&x| components[i][x] - components[last][x])
                    .collect()
            })
            .collect();
        let gram = Matrix::from_fn(last, last, |i, j| dot(&differences[i], &differences[j]));
        let scale = (0..last).map(|i| gram[(i, i)]).fold(0.0, f64::max);
        let regular = Cholesky::new(&gram).is_ok_and(|c| {
            let l = c.lower();
            (0..last).all(|i| l[(i, i)] * l[(i, i)] > 1e-12 * scale)
        });
        if !regular {
            return Err(Error::InvalidModel(
                "component differences are linearly dependent".into(),
            ));
        }
        Ok(Self {
            omega_size,
            components,
            differences,
            support,
            theta_image_is_full: false,
            newton: NewtonConfig::default(),
        })
    }

    /// Four uniform components on `{0,1,2}`, `{2,3,4}`, `{4,5,6}`, `{6,7,0}`
    /// over `Ω = {0..7}`. For this instance `θ(S) = ℝ³`.
    pub fn four_arcs() -> Self {
        let arcs: [[usize; 3]; 4] = [[0, 1, 2], [2, 3, 4], [4, 5, 6], [6, 7, 0]];
        let components = arcs
            .iter()
            .map(|arc| {
                let mut p = vec![0.0; 8];
                for &x in arc {
                    p[x] = 1.0 / 3.0;
                }
                p
            })
            .collect();
        let mut model = Self::new(8, components).expect("four-arc instance is regular");
        model.theta_image_is_full = true;
        model
    }

    pub fn with_newton(mut self, newton: NewtonConfig) -> Self {
        self.newton = newton;
        self
    }

    /// True only when the image of the `θ` map is known to be all of `ℝ^{n−1}`.
    pub fn theta_image_is_full(&self) -> bool {
        self.theta_image_is_full
    }

    pub fn omega_size(&self) -> usize {
        self.omega_size
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn eta(&self, values: &[f64]) -> Result<EtaCoords> {
        check_len(self.dim(), values.len())?;
        EtaCoords::new(values.to_vec())
    }

    /// Full weight vector `(η₁..η_{n−1}, 1 − Σ η)`.
    pub fn weights(&self, eta: &[f64]) -> Vec<f64> {
        let mut w = eta.to_vec();
        w.push(1.0 - eta.iter().sum::<f64>());
        w
    }

    /// `p(x|η)`.
    pub fn density(&self, eta: &EtaCoords, x: usize) -> Result<f64> {
        check_len(self.dim(), eta.len())?;
        if x >= self.omega_size {
            return Err(Error::InvalidInput(format!(
                "sample point {x} outside Ω of size {}",
                self.omega_size
            )));
        }
        let w = self.weights(eta.as_slice());
        Ok(self.components.iter().zip(&w).map(|(c, wk)| wk * c[x]).sum())
    }

    /// `p(x|w)` for every `x` in the support, from full weights.
    fn support_densities(&self, weights: &[f64]) -> Vec<f64> {
        self.support
            .iter()
            .map(|&x| self.components.iter().zip(weights).map(|(c, wk)| wk * c[x]).sum())
            .collect()
    }

    fn densities_checked(&self, eta: &EtaCoords) -> Result<Vec<f64>> {
        check_len(self.dim(), eta.len())?;
        let dens = self.support_densities(&self.weights(eta.as_slice()));
        if dens.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::OutOfDomain("mixture eta (density vanishes on the support)"));
        }
        Ok(dens)
    }

    /// `J_ij(η) = Σ_x (p_i − p_n)(p_j − p_n) / p(x|η)`, the Jacobian of
    /// `η ↦ θ` and the metric in the `η` chart.
    pub fn jacobian(&self, eta: &EtaCoords) -> Result<Matrix> {
        let dens = self.densities_checked(eta)?;
        let m = self.dim();
        Ok(Matrix::from_fn(m, m, |i, j| {
            self.differences[i]
                .iter()
                .zip(&self.differences[j])
                .zip(&dens)
                .map(|((a, b), p)| a * b / p)
                .sum()
        }))
    }

    /// Newton solve of `θ(η) = θ*`, started from `start` (or the centroid).
    pub fn eta_from_theta_from(&self, theta: &ThetaCoords, start: Option<&EtaCoords>) -> Result<EtaCoords> {
        let m = self.dim();
        check_len(m, theta.len())?;
        let centroid = || EtaCoords::new(vec![1.0 / (m + 1) as f64; m]);
        let mut eta = match start {
            Some(s) if s.len() == m && self.eta_in_domain(s) => s.clone(),
            _ => centroid()?,
        };
        let NewtonConfig {
            tolerance,
            max_iters,
            max_halvings,
        } = self.newton;
        for _ in 0..max_iters {
            let current = self.theta_from_eta(&eta)?;
            let residual: Vec<f64> = current
                .as_slice()
                .iter()
                .zip(theta.as_slice())
                .map(|(a, b)| a - b)
                .collect();
            if norm_inf(&residual) < tolerance {
                return Ok(eta);
            }
            let step = spd_solve(&self.jacobian(&eta)?, &residual)?;
            let mut scale = 1.0;
            let mut next = None;
            for _ in 0..=max_halvings {
                let candidate: Vec<f64> = eta.as_slice().iter().zip(&step).map(|(e, s)| e - scale * s).collect();
                let candidate = EtaCoords::new(candidate)?;
                if self.eta_in_domain(&candidate) {
                    next = Some(candidate);
                    break;
                }
                scale *= 0.5;
            }
            eta = next.ok_or(Error::NoConvergence {
                what: "mixture newton (iterate left the simplex)",
                iterations: max_iters,
            })?;
        }
        Err(Error::NoConvergence {
            what: "mixture newton",
            iterations: max_iters,
        })
    }

    /// Negative log-likelihood for observed frequencies over `Ω`.
    pub fn nll(&self, frequencies: &[f64], sample_size: f64) -> Result<MixtureNll> {
        check_len(self.omega_size, frequencies.len())?;
        check_finite(frequencies, "frequencies")?;
        let total: f64 = frequencies.iter().sum();
        if frequencies.iter().any(|f| *f < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "frequencies must be non-negative and sum to one (sum {total})"
            )));
        }
        if (0..self.omega_size).any(|x| frequencies[x] > 0.0 && !self.support.contains(&x)) {
            return Err(Error::InvalidInput(
                "observations outside the support of every component".into(),
            ));
        }
        if !(sample_size > 0.0) {
            return Err(Error::InvalidInput("sample size must be positive".into()));
        }
        let freq_on_support = self.support.iter().map(|&x| frequencies[x]).collect();
        Ok(MixtureNll {
            freq_on_support,
            sample_size,
        })
    }
}

impl DuallyFlatModel for MixtureModel {
    fn dim(&self) -> usize {
        self.components.len() - 1
    }

    /// `ψ(θ) = Σ θⁱ η_i − φ(η)` at `η = η(θ)`; requires a Newton solve.
    fn psi(&self, theta: &ThetaCoords) -> Result<f64> {
        let eta = self.eta_from_theta(theta)?;
        Ok(dot(theta.as_slice(), eta.as_slice()) - self.dual_potential(&eta)?)
    }

    fn eta_from_theta(&self, theta: &ThetaCoords) -> Result<EtaCoords> {
        self.eta_from_theta_from(theta, None)
    }

    fn eta_from_theta_near(&self, theta: &ThetaCoords, hint: Option<&EtaCoords>) -> Result<EtaCoords> {
        self.eta_from_theta_from(theta, hint)
    }

    fn theta_from_eta(&self, eta: &EtaCoords) -> Result<ThetaCoords> {
        let logs: Vec<f64> = self.densities_checked(eta)?.iter().map(|p| p.ln()).collect();
        ThetaCoords::new(self.differences.iter().map(|d| dot(d, &logs)).collect())
    }

    fn metric_theta(&self, theta: &ThetaCoords) -> Result<Matrix> {
        spd_inverse(&self.jacobian(&self.eta_from_theta(theta)?)?)
    }

    fn metric_eta(&self, eta: &EtaCoords) -> Result<Matrix> {
        self.jacobian(eta)
    }

    /// Finite coordinates are accepted; when the image of `θ` is not known to
    /// be the whole space, membership is settled by the Newton inversion.
    fn theta_in_domain(&self, theta: &ThetaCoords) -> bool {
        theta.len() == self.dim() && theta.as_slice().iter().all(|t| t.is_finite())
    }

    fn eta_in_domain(&self, eta: &EtaCoords) -> bool {
        eta.len() == self.dim()
            && eta.as_slice().iter().all(|&e| e > DOMAIN_MARGIN)
            && 1.0 - eta.as_slice().iter().sum::<f64>() > DOMAIN_MARGIN
    }

    fn dual_potential(&self, eta: &EtaCoords) -> Result<f64> {
        Ok(self.densities_checked(eta)?.iter().map(|p| p * p.ln()).sum())
    }
}

/// `−N Σ_x T̄_x log p(x|η)` for a [`MixtureModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureNll {
    freq_on_support: Vec<f64>,
    sample_size: f64,
}

impl MixtureNll {
    fn densities(&self, model: &MixtureModel, weights: &[f64]) -> Result<Vec<f64>> {
        let dens = model.support_densities(weights);
        if dens
            .iter()
            .zip(&self.freq_on_support)
            .any(|(p, f)| *f > 0.0 && !(*p > 0.0))
        {
            return Err(Error::OutOfDomain("mixture eta (observed point has zero density)"));
        }
        Ok(dens)
    }

    pub fn value_at(&self, model: &MixtureModel, eta: &EtaCoords) -> Result<f64> {
        let dens = self.densities(model, &model.weights(eta.as_slice()))?;
        let ll: f64 = self
            .freq_on_support
            .iter()
            .zip(&dens)
            .filter(|(f, _)| **f > 0.0)
            .map(|(f, p)| f * p.ln())
            .sum();
        Ok(-self.sample_size * ll)
    }

    /// `D_η = −N Σ_x T̄_x (p_k(x) − p_n(x)) / p(x|η)`.
    pub fn grad_eta_at(&self, model: &MixtureModel, eta: &EtaCoords) -> Result<Vec<f64>> {
        let dens = self.densities(model, &model.weights(eta.as_slice()))?;
        let ratio: Vec<f64> = self
            .freq_on_support
            .iter()
            .zip(&dens)
            .map(|(f, p)| if *f > 0.0 { f / p } else { 0.0 })
            .collect();
        Ok(model
            .differences
            .iter()
            .map(|d| -self.sample_size * dot(d, &ratio))
            .collect())
    }

    /// Euclidean gradient with respect to the full weight vector `w ∈ Δⁿ`,
    /// `∂/∂w_k = −N Σ_x T̄_x p_k(x) / p(x|w)`.
    pub fn weight_gradient(&self, model: &MixtureModel, weights: &[f64]) -> Result<Vec<f64>> {
        check_len(model.components.len(), weights.len())?;
        let dens = self.densities(model, weights)?;
        Ok(model
            .components
            .iter()
            .map(|c| {
                let s: f64 = model
                    .support
                    .iter()
                    .zip(self.freq_on_support.iter().zip(&dens))
                    .filter(|(_, (f, _))| **f > 0.0)
                    .map(|(&x, (f, p))| f * c[x] / p)
                    .sum();
                -self.sample_size * s
            })
            .collect())
    }
}

impl DualGradientObjective<MixtureModel> for MixtureNll {
    fn value(&self, model: &MixtureModel, p: &Point) -> Result<f64> {
        self.value_at(model, p.eta(model)?)
    }

    fn gradient(&self, model: &MixtureModel, p: &Point) -> Result<Gradient> {
        Ok(Gradient::Eta(self.grad_eta_at(model, p.eta(model)?)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::oracle;
    use crate::linalg::{max_abs_diff, symmetric_eigenvalues};

    fn quarter() -> EtaCoords {
        EtaCoords::new(vec![0.25; 3]).unwrap()
    }

    #[test]
    fn symmetric_point_maps_to_origin() {
        let m = MixtureModel::four_arcs();
        let theta = m.theta_from_eta(&quarter()).unwrap();
        assert!(norm_inf(theta.as_slice()) < 1e-15);
        let back = m.eta_from_theta(&ThetaCoords::new(vec![0.0; 3]).unwrap()).unwrap();
        assert!(max_abs_diff(back.as_slice(), &[0.25; 3]) < 1e-12);
    }

    #[test]
    fn densities_at_symmetric_point() {
        let m = MixtureModel::four_arcs();
        assert!((m.density(&quarter(), 0).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.density(&quarter(), 1).unwrap() - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn identical_components_are_rejected() {
        let p = vec![0.5, 0.5];
        assert!(matches!(
            MixtureModel::new(2, vec![p.clone(), p]),
            Err(Error::InvalidModel(_))
        ));
        assert!(MixtureModel::new(2, vec![vec![0.5, 0.4], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = MixtureModel::four_arcs();
        let eta = m.eta(&[0.4, 0.2, 0.15]).unwrap();
        let fd = oracle::fd_jacobian(
            |x| Ok(m.theta_from_eta(&EtaCoords::new(x.to_vec())?)?.into_vec()),
            eta.as_slice(),
        )
        .unwrap();
        let j = m.jacobian(&eta).unwrap();
        assert!(oracle::relative_error(j.as_slice(), fd.as_slice()) < 1e-4);
        assert!(symmetric_eigenvalues(&j).unwrap()[0] > 0.0);
    }

    #[test]
    fn nll_gradient_vanishes_at_model_probabilities() {
        let m = MixtureModel::four_arcs();
        let eta = m.eta(&[0.4, 0.2, 0.15]).unwrap();
        let freqs: Vec<f64> = (0..8).map(|x| m.density(&eta, x).unwrap()).collect();
        let nll = m.nll(&freqs, 1000.0).unwrap();
        assert!(norm_inf(&nll.grad_eta_at(&m, &eta).unwrap()) < 1e-10);
    }

    #[test]
    fn nll_gradient_for_concentrated_counts() {
        let m = MixtureModel::four_arcs();
        let mut freqs = vec![0.0; 8];
        freqs[1] = 1.0;
        let nll = m.nll(&freqs, 1000.0).unwrap();
        let eta = quarter();
        // Only A₁ covers x = 1, so D_η = −N (1/3 − 0)/(1/12) e₁ = (−4000, 0, 0).
        let g = nll.grad_eta_at(&m, &eta).unwrap();
        assert!(max_abs_diff(&g, &[-4000.0, 0.0, 0.0]) < 1e-9);
        let fd =
            oracle::fd_gradient_scaled(|x| nll.value_at(&m, &EtaCoords::new(x.to_vec())?), eta.as_slice()).unwrap();
        assert!(oracle::relative_error(&g, &fd) < 1e-4);
    }

    #[test]
    fn newton_failure_is_reported() {
        let m = MixtureModel::four_arcs().with_newton(NewtonConfig {
            tolerance: 1e-10,
            max_iters: 1,
            max_halvings: 30,
        });
        let err = m
            .eta_from_theta(&ThetaCoords::new(vec![3.0, -2.0, 1.0]).unwrap())
            .unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }
}
