//! Mean-field Gaussian variational inference for multinomial logistic
//! regression.
//!
//! The weight matrix `W` (features × classes) is flattened row-major, so
//! entry `(m, c)` sits at index `m·D + c`. The variational family is
//! `q(W) = Π_j N(w_j | μ_j, σ_j²)` with `σ_j = softplus(ρ_j)`, and the prior is
//! `N(0, λ⁻¹ I)`. The objective is the Monte-Carlo estimate
//!
//! ```text
//! h(μ, σ) = (1/K) Σ_k [log q(W_k) − log p(Y | X, W_k) − log p(W_k)],   W_k = μ + σ ∘ ε_k
//! ```
//!
//! evaluated with a fixed set of standard-normal draws `ε_k`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

// Unused whenever std is linked (tests, std dependents), which supplies the inherent float methods.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::seq::SliceRandom;
use rand_distr::StandardNormal;

use crate::error::{Error, Result, check_finite, check_len};
use crate::geometry::{Chart, DualGradientObjective, Gradient, Point};
use crate::linalg::Matrix;
use crate::models::DiagGaussianModel;
use crate::optimizers::{Connection, DEFAULT_MAX_HALVINGS, geodesic_move};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Design matrix and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct VIDataset {
    features: Matrix,
    labels: Vec<usize>,
    classes: usize,
}

impl VIDataset {
    /// `features` is `N × M`; `labels[i] < classes`.
    pub fn new(features: Matrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        check_len(features.rows(), labels.len())?;
        if classes < 2 {
            return Err(Error::InvalidInput(format!("need at least two classes, got {classes}")));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidInput(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        check_finite(features.as_slice(), "design matrix")?;
        Ok(Self {
            features,
            labels,
            classes,
        })
    }

    /// Builds a dataset from an `N × D` one-hot response matrix.
    pub fn from_one_hot(features: Matrix, responses: &Matrix) -> Result<Self> {
        check_len(features.rows(), responses.rows())?;
        let labels = (0..responses.rows())
            .map(|i| {
                let row = responses.row(i);
                let ones = row.iter().filter(|&&v| v == 1.0).count();
                let zeros = row.iter().filter(|&&v| v == 0.0).count();
                if ones != 1 || ones + zeros != row.len() {
                    return Err(Error::InvalidInput(format!("response row {i} is not one-hot")));
                }
                Ok(row.iter().position(|&v| v == 1.0).unwrap_or(0))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(features, labels, responses.cols())
    }

    /// A dataset without observations; the objective reduces to `KL(q ‖ prior)`.
    pub fn empty(features: usize, classes: usize) -> Result<Self> {
        Self::new(Matrix::zeros(0, features), Vec::new(), classes)
    }

    pub fn samples(&self) -> usize {
        self.labels.len()
    }

    pub fn features(&self) -> usize {
        self.features.cols()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Number of regression weights, `M·D`.
    pub fn weight_dim(&self) -> usize {
        self.features() * self.classes
    }

    pub fn design(&self) -> &Matrix {
        &self.features
    }

    pub fn x(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn one_hot(&self) -> Matrix {
        Matrix::from_fn(self.samples(), self.classes, |i, c| {
            if self.labels[i] == c { 1.0 } else { 0.0 }
        })
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        let m = self.features();
        let features = Matrix::from_fn(rows.len(), m, |r, k| self.features[(rows[r], k)]);
        Self {
            features,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            classes: self.classes,
        }
    }

    /// Random split into `(train, test)` with `round(test_fraction · N)` test rows.
    pub fn train_test_split<R: Rng + ?Sized>(&self, test_fraction: f64, rng: &mut R) -> Result<(Self, Self)> {
        if !(0.0..=1.0).contains(&test_fraction) {
            return Err(Error::InvalidInput(format!(
                "test fraction must lie in [0, 1], got {test_fraction}"
            )));
        }
        let n = self.samples();
        let n_test = (test_fraction * n as f64).round() as usize;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let (test, train) = order.split_at(n_test);
        Ok((self.subset(train), self.subset(test)))
    }
}

/// `log(1 + eᵖ)`, stable for large `|ρ|`.
pub fn softplus(rho: f64) -> f64 {
    rho.max(0.0) + (-rho.abs()).exp().ln_1p()
}

/// Inverse of [`softplus`] for `σ > 0`: `σ + log(1 − e^{−σ})`.
pub fn softplus_inverse(sigma: f64) -> f64 {
    sigma + (-(-sigma).exp_m1()).ln()
}

/// Derivative of [`softplus`].
pub fn logistic(rho: f64) -> f64 {
    if rho >= 0.0 {
        1.0 / (1.0 + (-rho).exp())
    } else {
        let e = rho.exp();
        e / (1.0 + e)
    }
}

/// Variational parameters; `σ` is kept in sync with `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct VIState {
    mu: Vec<f64>,
    rho: Vec<f64>,
    sigma: Vec<f64>,
}

impl VIState {
    pub fn from_mu_rho(mu: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        check_len(mu.len(), rho.len())?;
        check_finite(&mu, "variational mean")?;
        check_finite(&rho, "variational rho")?;
        let sigma: Vec<f64> = rho.iter().map(|&r| softplus(r)).collect();
        if sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::OutOfDomain("variational scale (softplus underflowed)"));
        }
        Ok(Self { mu, rho, sigma })
    }

    pub fn from_mu_sigma(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        check_len(mu.len(), sigma.len())?;
        check_finite(&mu, "variational mean")?;
        if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::OutOfDomain("variational scale (sigma must be positive)"));
        }
        let rho = sigma.iter().map(|&s| softplus_inverse(s)).collect();
        Ok(Self { mu, rho, sigma })
    }

    /// `μ` and `ρ` drawn independently from the standard normal.
    pub fn standard_normal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mu: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let rho: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let sigma = rho.iter().map(|&r| softplus(r)).collect();
        Self { mu, rho, sigma }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn to_point(&self, model: &DiagGaussianModel, chart: Chart) -> Result<Point> {
        Ok(match chart {
            Chart::Theta => Point::from_theta(model.theta_from_musigma(&self.mu, &self.sigma)?),
            Chart::Eta => Point::from_eta(model.eta_from_musigma(&self.mu, &self.sigma)?),
        })
    }

    pub fn from_point(model: &DiagGaussianModel, p: &Point) -> Result<Self> {
        let ms = match p.native() {
            Chart::Theta => model.musigma_from_theta(p.theta(model)?)?,
            Chart::Eta => model.musigma_from_eta(p.eta(model)?)?,
        };
        Self::from_mu_sigma(ms.mu, ms.sigma)
    }
}

/// Monte-Carlo settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MCConfig {
    /// Draws for the objective, `K`.
    pub samples: usize,
    /// Draws for prediction, `L`.
    pub predict_samples: usize,
    /// Prior precision `λ`.
    pub prior_precision: f64,
    pub seed: u64,
    /// Reuse one set of draws for every evaluation within an iteration.
    pub common_noise: bool,
}

impl MCConfig {
    pub fn new(samples: usize, prior_precision: f64, seed: u64) -> Self {
        Self {
            samples,
            predict_samples: 10,
            prior_precision,
            seed,
            common_noise: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 || self.predict_samples == 0 {
            return Err(Error::InvalidInput(
                "Monte-Carlo sample counts must be at least 1".into(),
            ));
        }
        if !(self.prior_precision > 0.0) || !self.prior_precision.is_finite() {
            return Err(Error::InvalidInput(format!(
                "prior precision must be positive, got {}",
                self.prior_precision
            )));
        }
        Ok(())
    }
}

/// `rows × dim` independent standard-normal draws.
pub fn draw_noise<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, dim, |_, _| rng.sample(StandardNormal))
}

/// Max-shifted softmax.
pub fn softmax(a: &[f64]) -> Vec<f64> {
    let max = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = a.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

/// `Σ_k y_k log s_k`.
pub fn cat_logpdf(y: &[f64], s: &[f64]) -> f64 {
    y.iter()
        .zip(s)
        .filter(|(yk, _)| **yk != 0.0)
        .map(|(yk, sk)| yk * sk.ln())
        .sum()
}

/// Logits `Wᵀx` for one sample.
fn logits(x: &[f64], w: &[f64], classes: usize) -> Vec<f64> {
    let mut a = vec![0.0; classes];
    for (m, xm) in x.iter().enumerate() {
        let row = &w[m * classes..(m + 1) * classes];
        a.iter_mut().zip(row).for_each(|(ac, wc)| *ac += xm * wc);
    }
    a
}

/// The Monte-Carlo objective with its draws held fixed.
#[derive(Debug, Clone)]
pub struct ViObjective<'a> {
    data: &'a VIDataset,
    prior_precision: f64,
    noise: &'a Matrix,
}

/// Reparameterized gradients with respect to `μ` and `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuSigmaGradient {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl<'a> ViObjective<'a> {
    pub fn new(data: &'a VIDataset, prior_precision: f64, noise: &'a Matrix) -> Result<Self> {
        check_len(data.weight_dim(), noise.cols())?;
        if noise.rows() == 0 {
            return Err(Error::InvalidInput("need at least one Monte-Carlo draw".into()));
        }
        if !(prior_precision > 0.0) {
            return Err(Error::InvalidInput(format!(
                "prior precision must be positive, got {prior_precision}"
            )));
        }
        Ok(Self {
            data,
            prior_precision,
            noise,
        })
    }

    fn check(&self, mu: &[f64], sigma: &[f64]) -> Result<()> {
        check_len(self.data.weight_dim(), mu.len())?;
        check_len(self.data.weight_dim(), sigma.len())?;
        if sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::OutOfDomain("variational scale (sigma must be positive)"));
        }
        Ok(())
    }

    fn draw(&self, k: usize, mu: &[f64], sigma: &[f64]) -> Vec<f64> {
        let eps = self.noise.row(k);
        mu.iter().zip(sigma).zip(eps).map(|((m, s), e)| m + s * e).collect()
    }

    pub fn value_musigma(&self, mu: &[f64], sigma: &[f64]) -> Result<f64> {
        self.check(mu, sigma)?;
        let lambda = self.prior_precision;
        let dim = mu.len() as f64;
        let log_sigma: f64 = sigma.iter().map(|s| s.ln()).sum();
        let mut total = 0.0;
        for k in 0..self.noise.rows() {
            let eps = self.noise.row(k);
            let w = self.draw(k, mu, sigma);
            let log_q = -dim * HALF_LN_2PI - log_sigma - 0.5 * eps.iter().map(|e| e * e).sum::<f64>();
            let neg_log_prior =
                dim * (HALF_LN_2PI - 0.5 * lambda.ln()) + 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
            let mut neg_log_lik = 0.0;
            for (i, &label) in self.data.labels().iter().enumerate() {
                let a = logits(self.data.x(i), &w, self.data.classes());
                neg_log_lik += crate::linalg::log_sum_exp(&a) - a[label];
            }
            total += log_q + neg_log_prior + neg_log_lik;
        }
        let value = total / self.noise.rows() as f64;
        if !value.is_finite() {
            return Err(Error::NonFinite("Monte-Carlo objective"));
        }
        Ok(value)
    }

    /// `∂h/∂μ = mean_k g_k` and `∂h/∂σ = −1/σ + mean_k g_k ∘ ε_k`, where
    /// `g_k = λW_k + vec(Xᵀ(S_k − Y))` is the gradient of the negative
    /// log-joint at `W_k`.
    pub fn grad_musigma(&self, mu: &[f64], sigma: &[f64]) -> Result<MuSigmaGradient> {
        self.check(mu, sigma)?;
        let classes = self.data.classes();
        let dim = mu.len();
        let draws = self.noise.rows() as f64;
        let mut g_mu = vec![0.0; dim];
        let mut g_sigma = vec![0.0; dim];
        let mut g = vec![0.0; dim];
        for k in 0..self.noise.rows() {
            let eps = self.noise.row(k);
            let w = self.draw(k, mu, sigma);
            g.iter_mut()
                .zip(&w)
                .for_each(|(gj, wj)| *gj = self.prior_precision * wj);
            for (i, &label) in self.data.labels().iter().enumerate() {
                let x = self.data.x(i);
                let mut resid = softmax(&logits(x, &w, classes));
                resid[label] -= 1.0;
                for (m, xm) in x.iter().enumerate() {
                    g[m * classes..(m + 1) * classes]
                        .iter_mut()
                        .zip(&resid)
                        .for_each(|(gj, r)| *gj += xm * r);
                }
            }
            for j in 0..dim {
                g_mu[j] += g[j] / draws;
                g_sigma[j] += g[j] * eps[j] / draws;
            }
        }
        g_sigma.iter_mut().zip(sigma).for_each(|(gs, s)| *gs -= 1.0 / s);
        check_finite(&g_mu, "mean gradient")?;
        check_finite(&g_sigma, "scale gradient")?;
        Ok(MuSigmaGradient {
            mu: g_mu,
            sigma: g_sigma,
        })
    }

    /// `∂h/∂ρ = ∂h/∂σ · logistic(ρ)`, returned with `∂h/∂μ`.
    pub fn grad_mu_rho(&self, state: &VIState) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.grad_musigma(state.mu(), state.sigma())?;
        let g_rho = g
            .sigma
            .iter()
            .zip(state.rho())
            .map(|(gs, r)| gs * logistic(*r))
            .collect();
        Ok((g.mu, g_rho))
    }

    /// `(D_θ h, D_η h)` in the diagonal-Gaussian layout (locations, then
    /// scales), by the chain rule through `(μ, σ)`.
    pub fn grad_dual(&self, mu: &[f64], sigma: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let g = self.grad_musigma(mu, sigma)?;
        Ok(dual_from_musigma(mu, sigma, &g))
    }

    pub fn data(&self) -> &VIDataset {
        self.data
    }

    pub fn prior_precision(&self) -> f64 {
        self.prior_precision
    }
}

/// Chain rule from `(∂μ, ∂σ)` to the natural and expectation charts.
///
/// With `s = σ²`: `D_θ = (s ∂μ, 2μs ∂μ + σ³ ∂σ)` and
/// `D_η = (∂μ − (μ/σ) ∂σ, ∂σ / (2σ))`.
pub fn dual_from_musigma(mu: &[f64], sigma: &[f64], g: &MuSigmaGradient) -> (Vec<f64>, Vec<f64>) {
    let d = mu.len();
    let mut theta = vec![0.0; 2 * d];
    let mut eta = vec![0.0; 2 * d];
    for j in 0..d {
        let (m, s, gm, gs) = (mu[j], sigma[j], g.mu[j], g.sigma[j]);
        let var = s * s;
        theta[j] = var * gm;
        theta[d + j] = 2.0 * m * var * gm + var * s * gs;
        eta[j] = gm - m / s * gs;
        eta[d + j] = gs / (2.0 * s);
    }
    (theta, eta)
}

impl DualGradientObjective<DiagGaussianModel> for ViObjective<'_> {
    fn value(&self, model: &DiagGaussianModel, p: &Point) -> Result<f64> {
        let state = VIState::from_point(model, p)?;
        self.value_musigma(state.mu(), state.sigma())
    }

    fn gradient(&self, model: &DiagGaussianModel, p: &Point) -> Result<Gradient> {
        let state = VIState::from_point(model, p)?;
        let (theta, eta) = self.grad_dual(state.mu(), state.sigma())?;
        Ok(Gradient::Both { theta, eta })
    }
}

/// `(1/K) Σ_k [log q − log p(Y|X,W_k) − log p(W_k)]` at `state`.
pub fn mc_objective(data: &VIDataset, state: &VIState, cfg: &MCConfig, noise: &Matrix) -> Result<f64> {
    ViObjective::new(data, cfg.prior_precision, noise)?.value_musigma(state.mu(), state.sigma())
}

pub fn mc_grad_musigma(data: &VIDataset, state: &VIState, cfg: &MCConfig, noise: &Matrix) -> Result<MuSigmaGradient> {
    ViObjective::new(data, cfg.prior_precision, noise)?.grad_musigma(state.mu(), state.sigma())
}

pub fn mc_grad_rho(data: &VIDataset, state: &VIState, cfg: &MCConfig, noise: &Matrix) -> Result<Vec<f64>> {
    Ok(ViObjective::new(data, cfg.prior_precision, noise)?
        .grad_mu_rho(state)?
        .1)
}

pub fn mc_grad_dual(data: &VIDataset, state: &VIState, cfg: &MCConfig, noise: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
    ViObjective::new(data, cfg.prior_precision, noise)?.grad_dual(state.mu(), state.sigma())
}

/// Update rule for a single VI iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViMethod {
    /// Euclidean step on `(μ, ρ)`.
    Gradient,
    EGeodesic,
    MGeodesic,
}

impl ViMethod {
    pub const ALL: [ViMethod; 3] = [ViMethod::Gradient, ViMethod::EGeodesic, ViMethod::MGeodesic];

    pub fn name(self) -> &'static str {
        match self {
            ViMethod::Gradient => "gradient",
            ViMethod::EGeodesic => "e-geodesic",
            ViMethod::MGeodesic => "m-geodesic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViStep {
    pub state: VIState,
    pub step_size: f64,
    pub halvings: usize,
}

/// One update of `init` with step size `lr`.
///
/// The geodesic methods halve `lr` until the proposal lies in the domain of
/// their chart (negative precision entries for `θ`, positive variance for
/// `η`).
pub fn vi_single_iteration(objective: &ViObjective<'_>, init: &VIState, method: ViMethod, lr: f64) -> Result<ViStep> {
    if !(lr >= 0.0) || !lr.is_finite() {
        return Err(Error::InvalidInput(format!("step size must be non-negative, got {lr}")));
    }
    match method {
        ViMethod::Gradient => {
            let (g_mu, g_rho) = objective.grad_mu_rho(init)?;
            let mu = init.mu().iter().zip(&g_mu).map(|(m, g)| m - lr * g).collect();
            let rho = init.rho().iter().zip(&g_rho).map(|(r, g)| r - lr * g).collect();
            Ok(ViStep {
                state: VIState::from_mu_rho(mu, rho)?,
                step_size: lr,
                halvings: 0,
            })
        }
        ViMethod::EGeodesic | ViMethod::MGeodesic => {
            let model = DiagGaussianModel::new(init.dim())?;
            let connection = if method == ViMethod::EGeodesic {
                Connection::E
            } else {
                Connection::M
            };
            let p = init.to_point(&model, connection.chart())?;
            let (g_theta, g_eta) = objective.grad_dual(init.mu(), init.sigma())?;
            let grad = if connection == Connection::E { g_eta } else { g_theta };
            let step = geodesic_move(&model, &p, &grad, connection, lr, DEFAULT_MAX_HALVINGS, |_| Ok(true))?.ok_or(
                Error::StepUnderflow {
                    halvings: DEFAULT_MAX_HALVINGS,
                },
            )?;
            Ok(ViStep {
                state: VIState::from_point(&model, &step.point)?,
                step_size: step.step_size,
                halvings: step.halvings,
            })
        }
    }
}

/// Class predicted for `x` by averaging `softmax(W_lᵀx)` over the weight
/// draws `W_l = μ + σ ∘ ε_l`, `ε_l` the rows of `noise`; ties go to the
/// lowest index.
pub fn predict(x: &[f64], state: &VIState, classes: usize, noise: &Matrix) -> Result<usize> {
    check_len(state.dim(), x.len() * classes)?;
    check_len(state.dim(), noise.cols())?;
    let mut avg = vec![0.0; classes];
    for l in 0..noise.rows() {
        let w: Vec<f64> = state
            .mu()
            .iter()
            .zip(state.sigma())
            .zip(noise.row(l))
            .map(|((m, s), e)| m + s * e)
            .collect();
        avg.iter_mut()
            .zip(softmax(&logits(x, &w, classes)))
            .for_each(|(a, p)| *a += p);
    }
    let mut best = 0;
    for c in 1..classes {
        if avg[c] > avg[best] {
            best = c;
        }
    }
    Ok(best)
}

/// Fraction of samples whose predicted class matches the label; the same
/// `noise` draws are used for every sample.
pub fn accuracy(data: &VIDataset, state: &VIState, noise: &Matrix) -> Result<f64> {
    if data.samples() == 0 {
        return Err(Error::InvalidInput("accuracy of an empty dataset".into()));
    }
    let mut correct = 0usize;
    for (i, &label) in data.labels().iter().enumerate() {
        if predict(data.x(i), state, data.classes(), noise)? == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.samples() as f64)
}

/// [`accuracy`] with `draws` weight samples from `rng`.
pub fn accuracy_sampled<R: Rng + ?Sized>(data: &VIDataset, state: &VIState, draws: usize, rng: &mut R) -> Result<f64> {
    accuracy(data, state, &draw_noise(draws, state.dim(), rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DuallyFlatModel;
    use crate::geometry::oracle::{fd_gradient_scaled, relative_error};
    use crate::linalg::{max_abs_diff, spd_solve};
    use crate::rng::rng_from_seed;

    fn small_problem(seed: u64) -> (VIDataset, Matrix, VIState) {
        let mut rng = rng_from_seed(seed);
        let (n, m, d) = (6, 2, 3);
        let x = draw_noise(n, m, &mut rng);
        let labels = (0..n).map(|i| i % d).collect();
        let data = VIDataset::new(x, labels, d).unwrap();
        let noise = draw_noise(4, m * d, &mut rng);
        let state = VIState::standard_normal(m * d, &mut rng);
        (data, noise, state)
    }

    #[test]
    fn softmax_basics() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        let s = softmax(&[1000.0, 0.0]);
        assert!(s.iter().all(|v| v.is_finite()));
        assert!((s[0] - 1.0).abs() < 1e-15 && s[1] < 1e-300);
        assert_eq!(cat_logpdf(&[1.0, 0.0], &[0.5, 0.5]), 0.5f64.ln());
    }

    #[test]
    fn softplus_round_trip() {
        for rho in [-30.0, -2.0, 0.0, 0.3, 5.0, 40.0] {
            let s = softplus(rho);
            assert!((softplus_inverse(s) - rho).abs() < 1e-9 * (1.0 + rho.abs()), "{rho}");
        }
        assert!((softplus(0.0) - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn prior_matches_variational_at_origin() {
        let data = VIDataset::empty(1, 2).unwrap();
        let noise = Matrix::zeros(1, 2);
        let obj = ViObjective::new(&data, 1.0, &noise).unwrap();
        assert!(obj.value_musigma(&[0.0, 0.0], &[1.0, 1.0]).unwrap().abs() < 1e-15);
        let g = obj.grad_musigma(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(g.mu, vec![0.0, 0.0]);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (data, noise, state) = small_problem(3);
        let obj = ViObjective::new(&data, 0.7, &noise).unwrap();
        let dim = state.dim();
        let g = obj.grad_musigma(state.mu(), state.sigma()).unwrap();
        let joint: Vec<f64> = state.mu().iter().chain(state.sigma()).copied().collect();
        let fd = fd_gradient_scaled(|v| obj.value_musigma(&v[..dim], &v[dim..]), &joint).unwrap();
        let analytic: Vec<f64> = g.mu.iter().chain(&g.sigma).copied().collect();
        assert!(relative_error(&analytic, &fd) < 1e-6);

        let (_, g_rho) = obj.grad_mu_rho(&state).unwrap();
        let fd_rho = fd_gradient_scaled(
            |r| {
                let s = VIState::from_mu_rho(state.mu().to_vec(), r.to_vec()).unwrap();
                obj.value_musigma(s.mu(), s.sigma())
            },
            state.rho(),
        )
        .unwrap();
        assert!(relative_error(&g_rho, &fd_rho) < 1e-6);
    }

    #[test]
    fn dual_gradients_match_finite_differences_and_metric() {
        let (data, noise, state) = small_problem(5);
        let obj = ViObjective::new(&data, 1.3, &noise).unwrap();
        let model = DiagGaussianModel::new(state.dim()).unwrap();
        let (g_theta, g_eta) = obj.grad_dual(state.mu(), state.sigma()).unwrap();

        let theta = model.theta_from_musigma(state.mu(), state.sigma()).unwrap();
        let fd_theta = fd_gradient_scaled(
            |t| {
                let ms = model
                    .musigma_from_theta(&crate::geometry::ThetaCoords::new(t.to_vec()).unwrap())
                    .unwrap();
                obj.value_musigma(&ms.mu, &ms.sigma)
            },
            theta.as_slice(),
        )
        .unwrap();
        assert!(relative_error(&g_theta, &fd_theta) < 1e-5);

        let eta = model.eta_from_musigma(state.mu(), state.sigma()).unwrap();
        let fd_eta = fd_gradient_scaled(
            |e| {
                let ms = model
                    .musigma_from_eta(&crate::geometry::EtaCoords::new(e.to_vec()).unwrap())
                    .unwrap();
                obj.value_musigma(&ms.mu, &ms.sigma)
            },
            eta.as_slice(),
        )
        .unwrap();
        assert!(relative_error(&g_eta, &fd_eta) < 1e-5);

        let via_metric = spd_solve(&model.metric_theta(&theta).unwrap(), &g_theta).unwrap();
        assert!(relative_error(&g_eta, &via_metric) < 1e-8);
    }

    #[test]
    fn zero_step_keeps_state() {
        let (data, noise, state) = small_problem(9);
        let obj = ViObjective::new(&data, 1.0, &noise).unwrap();
        for method in ViMethod::ALL {
            let step = vi_single_iteration(&obj, &state, method, 0.0).unwrap();
            assert!(max_abs_diff(step.state.mu(), state.mu()) < 1e-12);
            assert!(max_abs_diff(step.state.sigma(), state.sigma()) < 1e-12);
        }
    }

    #[test]
    fn huge_e_step_is_halved_into_domain() {
        let (data, noise, state) = small_problem(11);
        let obj = ViObjective::new(&data, 1.0, &noise).unwrap();
        let step = vi_single_iteration(&obj, &state, ViMethod::EGeodesic, 1e6).unwrap();
        assert!(step.halvings > 0);
        assert!(step.state.sigma().iter().all(|s| *s > 0.0));
    }

    #[test]
    fn prediction_ties_go_to_lowest_index() {
        let state = VIState::from_mu_sigma(vec![0.0; 6], vec![1e-300; 6]).unwrap();
        assert_eq!(predict(&[1.0, 2.0], &state, 3, &Matrix::zeros(1, 6)).unwrap(), 0);
    }

    #[test]
    fn deterministic_separating_weights_score_perfectly() {
        let x = Matrix::from_row_major(4, 2, vec![1.0, 0.0, 2.0, 0.1, 0.0, 1.0, -0.1, 3.0]).unwrap();
        let data = VIDataset::new(x, vec![0, 0, 1, 1], 2).unwrap();
        let state = VIState::from_mu_sigma(vec![1.0, -1.0, -1.0, 1.0], vec![1e-12; 4]).unwrap();
        let mut rng = rng_from_seed(1);
        assert_eq!(accuracy_sampled(&data, &state, 10, &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn one_hot_round_trip() {
        let (data, _, _) = small_problem(2);
        let back = VIDataset::from_one_hot(data.design().clone(), &data.one_hot()).unwrap();
        assert_eq!(back, data);
        let bad = Matrix::from_row_major(1, 2, vec![1.0, 1.0]).unwrap();
        assert!(VIDataset::from_one_hot(Matrix::zeros(1, 1), &bad).is_err());
    }
}
