//! Runtime property suites: coordinate maps, metrics, gradients, the
//! one-step and equivalence properties, MM fixed points and the data
//! generator's statistics.

use std::fmt;

use geodesic_core::datagen::{GenConfig, generate, partition_sizes};
use geodesic_core::geometry::oracle::{fd_gradient_scaled, fd_jacobian, relative_error};
use geodesic_core::geometry::{
    BackwardKl, DualGradientObjective, DuallyFlatModel, EtaCoords, ForwardKl, Point, ThetaCoords, bregman_divergence,
    e_geodesic_step, m_geodesic_step, mirror_descent_step_numeric,
};
use geodesic_core::linalg::{Matrix, dot, max_abs_diff, spd_solve, symmetric_eigenvalues};
use geodesic_core::models::{
    BradleyTerryModel, CategoricalModel, DiagGaussianModel, MixtureModel, three_player_example,
};
use geodesic_core::optimizers::{ExpGradStep, bt_mm_step, exponentiated_gradient_step, run_euclidean_gd, run_mm};
use geodesic_core::rng::{Rng as StreamRng, trial_rng};
use geodesic_core::varinf::{VIDataset, VIState, ViObjective, draw_noise};
use rand::Rng;
use rand::distributions::Open01;

use crate::BenchError;

pub const LEGENDRE_TOL: f64 = 1e-8;
pub const METRIC_TOL: f64 = 1e-4;
pub const GRADIENT_TOL: f64 = 1e-4;
pub const MC_GRADIENT_TOL: f64 = 1e-3;
pub const MIRROR_TOL: f64 = 1e-8;
pub const EXPGRAD_TOL: f64 = 1e-10;
pub const MM_FIXED_POINT_TOL: f64 = 1e-12;
pub const ONE_STEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub points_per_model: usize,
    pub covariance_samples: usize,
    pub noise_samples: usize,
    pub one_step_datasets: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            points_per_model: 8,
            covariance_samples: 50_000,
            noise_samples: 100_000,
            one_step_datasets: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    fn record(&mut self, name: &str, outcome: Result<(bool, String), BenchError>) {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        self.results.push(CheckResult {
            name: name.to_owned(),
            passed,
            detail,
        });
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.results.len(), failed)
    }
}

fn within(err: f64, tol: f64) -> (bool, String) {
    (err < tol, format!("max error {err:.3e} (tolerance {tol:.0e})"))
}

/// A model whose `θ` metric is shifted by `shift · I`; used as a negative
/// control for [`metric_hessian_error`].
#[derive(Debug, Clone)]
pub struct PerturbedMetric<M> {
    pub inner: M,
    pub shift: f64,
}

impl<M: DuallyFlatModel> DuallyFlatModel for PerturbedMetric<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn psi(&self, theta: &ThetaCoords) -> geodesic_core::Result<f64> {
        self.inner.psi(theta)
    }
    fn eta_from_theta(&self, theta: &ThetaCoords) -> geodesic_core::Result<EtaCoords> {
        self.inner.eta_from_theta(theta)
    }
    fn theta_from_eta(&self, eta: &EtaCoords) -> geodesic_core::Result<ThetaCoords> {
        self.inner.theta_from_eta(eta)
    }
    fn metric_theta(&self, theta: &ThetaCoords) -> geodesic_core::Result<Matrix> {
        let g = self.inner.metric_theta(theta)?;
        Ok(Matrix::from_fn(g.rows(), g.cols(), |i, j| {
            g[(i, j)] + if i == j { self.shift } else { 0.0 }
        }))
    }
    fn metric_eta(&self, eta: &EtaCoords) -> geodesic_core::Result<Matrix> {
        self.inner.metric_eta(eta)
    }
    fn theta_in_domain(&self, theta: &ThetaCoords) -> bool {
        self.inner.theta_in_domain(theta)
    }
    fn eta_in_domain(&self, eta: &EtaCoords) -> bool {
        self.inner.eta_in_domain(eta)
    }
}

/// Largest relative disagreement between the analytic metrics and
/// finite-difference Jacobians of the coordinate maps, and between `η` and
/// the finite-difference gradient of `ψ`.
pub fn metric_hessian_error<M: DuallyFlatModel + ?Sized>(model: &M, p: &Point) -> Result<f64, BenchError> {
    let theta = p.theta(model)?.clone();
    let eta = p.eta(model)?.clone();
    let jac_eta = fd_jacobian(
        |t| Ok(model.eta_from_theta(&ThetaCoords::new(t.to_vec())?)?.into_vec()),
        theta.as_slice(),
    )?;
    let jac_theta = fd_jacobian(
        |e| Ok(model.theta_from_eta(&EtaCoords::new(e.to_vec())?)?.into_vec()),
        eta.as_slice(),
    )?;
    let grad_psi = fd_gradient_scaled(|t| model.psi(&ThetaCoords::new(t.to_vec())?), theta.as_slice())?;
    Ok(
        relative_error(model.metric_theta(&theta)?.as_slice(), jac_eta.as_slice())
            .max(relative_error(model.metric_eta(&eta)?.as_slice(), jac_theta.as_slice()))
            .max(relative_error(&grad_psi, eta.as_slice())),
    )
}

/// Relative errors of `(D_θ f, D_η f)` against finite differences of `f` in
/// each chart.
pub fn dual_gradient_error<M, O>(model: &M, objective: &O, p: &Point) -> Result<(f64, f64), BenchError>
where
    M: DuallyFlatModel + ?Sized,
    O: DualGradientObjective<M> + ?Sized,
{
    let theta = p.theta(model)?.clone();
    let eta = p.eta(model)?.clone();
    let fd_theta = fd_gradient_scaled(
        |t| {
            objective.value(
                model,
                &Point::from_theta(ThetaCoords::new(t.to_vec())?).with_eta_hint(eta.clone()),
            )
        },
        theta.as_slice(),
    )?;
    let fd_eta = fd_gradient_scaled(
        |e| objective.value(model, &Point::from_eta(EtaCoords::new(e.to_vec())?)),
        eta.as_slice(),
    )?;
    Ok((
        relative_error(&objective.grad_theta(model, p)?, &fd_theta),
        relative_error(&objective.grad_eta(model, p)?, &fd_eta),
    ))
}

fn random_simplex(rng: &mut StreamRng, n: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| floor + rng.sample::<f64, _>(Open01)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn normals(rng: &mut StreamRng, n: usize) -> Vec<f64> {
    draw_noise(1, n, rng).as_slice().to_vec()
}

type Zoo = Vec<(&'static str, Box<dyn DuallyFlatModel>, Vec<Point>)>;

/// Models with random interior points in their native charts.
fn zoo(cfg: &CheckConfig, stream: u64) -> Result<Zoo, BenchError> {
    let mut rng = trial_rng(cfg.seed, stream, 0);
    let k = cfg.points_per_model;
    let mut zoo: Zoo = Vec::new();

    for outcomes in [3usize, 6] {
        let model = CategoricalModel::new(outcomes - 1)?;
        let points = (0..k)
            .map(|_| {
                Ok(Point::from_eta(
                    model.eta_from_probabilities(&random_simplex(&mut rng, outcomes, 0.05))?,
                ))
            })
            .collect::<Result<_, BenchError>>()?;
        zoo.push((
            if outcomes == 3 {
                "categorical(3)"
            } else {
                "categorical(6)"
            },
            Box::new(model),
            points,
        ));
    }

    let mixture = MixtureModel::four_arcs();
    let points = (0..k)
        .map(|_| Ok(Point::from_eta(mixture.eta(&random_simplex(&mut rng, 4, 0.2)[..3])?)))
        .collect::<Result<_, BenchError>>()?;
    zoo.push(("mixture(four arcs)", Box::new(mixture), points));

    let (bt, _) = three_player_example();
    let points = (0..k)
        .map(|_| Ok(Point::from_theta(ThetaCoords::new(normals(&mut rng, 2))?)))
        .collect::<Result<_, BenchError>>()?;
    zoo.push(("bradley-terry(3)", Box::new(bt), points));

    let gauss = DiagGaussianModel::new(3)?;
    let points = (0..k)
        .map(|_| {
            let mu = normals(&mut rng, 3);
            let sigma: Vec<f64> = (0..3).map(|_| 0.3 + 1.7 * rng.sample::<f64, _>(Open01)).collect();
            Ok(Point::from_theta(gauss.theta_from_musigma(&mu, &sigma)?))
        })
        .collect::<Result<_, BenchError>>()?;
    zoo.push(("diag-gaussian(3)", Box::new(gauss), points));
    Ok(zoo)
}

fn check_legendre(zoo: &Zoo) -> Result<(bool, String), BenchError> {
    let mut worst = 0.0f64;
    for (_, model, points) in zoo {
        for p in points {
            let (theta, eta) = (p.theta(model.as_ref())?, p.eta(model.as_ref())?);
            worst = worst.max(relative_error(model.theta_from_eta(eta)?.as_slice(), theta.as_slice()));
            worst = worst.max(relative_error(model.eta_from_theta(theta)?.as_slice(), eta.as_slice()));
        }
    }
    Ok(within(worst, LEGENDRE_TOL))
}

fn check_metric(zoo: &Zoo) -> Result<(bool, String), BenchError> {
    let mut worst = 0.0f64;
    for (_, model, points) in zoo {
        for p in points {
            worst = worst.max(metric_hessian_error(model.as_ref(), p)?);
        }
    }
    Ok(within(worst, METRIC_TOL))
}

fn check_metric_negative_control(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let model = PerturbedMetric {
        inner: CategoricalModel::new(2)?,
        shift: 1e-2,
    };
    let mut rng = trial_rng(cfg.seed, 90, 0);
    let p = Point::from_eta(model.inner.eta_from_probabilities(&random_simplex(&mut rng, 3, 0.05))?);
    let err = metric_hessian_error(&model, &p)?;
    Ok((
        err >= METRIC_TOL,
        format!("perturbed metric error {err:.3e} (must reach {METRIC_TOL:.0e})"),
    ))
}

fn check_dual_gradients(zoo: &Zoo, cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let mut worst = 0.0f64;
    for (_, model, points) in zoo {
        let model = model.as_ref();
        for pair in points.windows(2) {
            let forward = ForwardKl::new(model, &pair[1])?;
            let backward = BackwardKl::new(model, &pair[1])?;
            let (a, b) = dual_gradient_error(model, &forward, &pair[0])?;
            let (c, d) = dual_gradient_error(model, &backward, &pair[0])?;
            worst = worst.max(a).max(b).max(c).max(d);
        }
    }
    let mut rng = trial_rng(cfg.seed, 91, 0);
    let mixture = MixtureModel::four_arcs();
    let freq = random_simplex(&mut rng, 8, 0.1);
    let nll = mixture.nll(&freq, 1000.0)?;
    let p = Point::from_eta(mixture.eta(&random_simplex(&mut rng, 4, 0.2)[..3])?);
    let (a, b) = dual_gradient_error(&mixture, &nll, &p)?;
    let (bt, obs) = three_player_example();
    let bt_nll = bt.nll(&obs)?;
    let (c, d) = dual_gradient_error(
        &bt,
        &bt_nll,
        &Point::from_theta(ThetaCoords::new(normals(&mut rng, 2))?),
    )?;
    let cat = CategoricalModel::new(4)?;
    let cat_nll = cat.nll(&random_simplex(&mut rng, 5, 0.0), 250.0)?;
    let q = Point::from_eta(cat.eta_from_probabilities(&random_simplex(&mut rng, 5, 0.05))?);
    let (e, f) = dual_gradient_error(&cat, &cat_nll, &q)?;
    worst = worst.max(a).max(b).max(c).max(d).max(e).max(f);
    Ok(within(worst, GRADIENT_TOL))
}

fn vi_fixture(cfg: &CheckConfig) -> Result<(VIDataset, Matrix), BenchError> {
    let data = generate(&GenConfig::new(30, 3, 3, cfg.seed))?.dataset;
    let mut rng = trial_rng(cfg.seed, 92, 0);
    let noise = draw_noise(50, data.weight_dim(), &mut rng);
    Ok((data, noise))
}

fn check_mc_gradients(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let (data, noise) = vi_fixture(cfg)?;
    let dim = data.weight_dim();
    let objective = ViObjective::new(&data, 1.0, &noise)?;
    let model = DiagGaussianModel::new(dim)?;
    let mut worst = 0.0f64;
    for (mu, sigma) in [(0.0, 1.0), (0.3, 0.7)] {
        let state = VIState::from_mu_sigma(vec![mu; dim], vec![sigma; dim])?;
        let p = Point::from_theta(model.theta_from_musigma(state.mu(), state.sigma())?);
        let (a, b) = dual_gradient_error(&model, &objective, &p)?;
        let g = objective.grad_musigma(state.mu(), state.sigma())?;
        let joint: Vec<f64> = state.mu().iter().chain(state.sigma()).copied().collect();
        let fd = fd_gradient_scaled(|v| objective.value_musigma(&v[..dim], &v[dim..]), &joint)?;
        let analytic: Vec<f64> = g.mu.iter().chain(&g.sigma).copied().collect();
        let (_, g_rho) = objective.grad_mu_rho(&state)?;
        let fd_rho = fd_gradient_scaled(
            |r| {
                let s = VIState::from_mu_rho(state.mu().to_vec(), r.to_vec())?;
                objective.value_musigma(s.mu(), s.sigma())
            },
            state.rho(),
        )?;
        worst = worst
            .max(a)
            .max(b)
            .max(relative_error(&analytic, &fd))
            .max(relative_error(&g_rho, &fd_rho));
    }
    Ok(within(worst, MC_GRADIENT_TOL))
}

fn check_mirror(zoo: &Zoo) -> Result<(bool, String), BenchError> {
    let mut worst = 0.0f64;
    for (name, model, points) in zoo {
        if name.starts_with("mixture") {
            continue;
        }
        let model = model.as_ref();
        for pair in points.windows(2) {
            let f = ForwardKl::new(model, &pair[1])?;
            let grad = f.grad_theta(model, &pair[0])?;
            let t = 0.5;
            let numeric = mirror_descent_step_numeric(model, pair[0].theta(model)?, &grad, t)?;
            let closed = m_geodesic_step(model, pair[0].eta(model)?, &grad, t)?;
            worst = worst.max(relative_error(
                model.eta_from_theta(&numeric)?.as_slice(),
                closed.as_slice(),
            ));
        }
    }
    Ok(within(worst, MIRROR_TOL))
}

fn check_expgrad_equivalence(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let mut rng = trial_rng(cfg.seed, 93, 0);
    let n = 5;
    let model = CategoricalModel::new(n - 1)?;
    let sample_size = 400.0;
    let freq = random_simplex(&mut rng, n, 0.05);
    let nll = model.nll(&freq, sample_size)?;
    let t = 0.4 / sample_size;
    let mut simplex = random_simplex(&mut rng, n, 0.1);
    let mut point = Point::from_eta(model.eta_from_probabilities(&simplex)?);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let euclid: Vec<f64> = freq.iter().zip(&simplex).map(|(f, p)| -sample_size * f / p).collect();
        simplex = match exponentiated_gradient_step(&simplex, &euclid, t)? {
            ExpGradStep::Updated(next) => next,
            ExpGradStep::Overflow => return Ok((false, "unexpected overflow".into())),
        };
        let grad = nll.grad_eta(&model, &point)?;
        point = Point::from_theta(e_geodesic_step(&model, point.theta(&model)?, &grad, t)?);
        worst = worst.max(max_abs_diff(point.eta(&model)?.as_slice(), &simplex[..n - 1]));
    }
    Ok(within(worst, EXPGRAD_TOL))
}

fn raw_divergence(model: &dyn DuallyFlatModel, r: &Point, q: &Point) -> Result<f64, BenchError> {
    let theta = r.theta(model)?;
    let eta = q.eta(model)?;
    Ok(model.psi(theta)? + model.dual_potential(eta)? - dot(theta.as_slice(), eta.as_slice()))
}

fn check_bregman(zoo: &Zoo) -> Result<(bool, String), BenchError> {
    let mut min = f64::INFINITY;
    let mut self_max = 0.0f64;
    for (_, model, points) in zoo {
        let model = model.as_ref();
        for p in points {
            self_max = self_max.max(raw_divergence(model, p, p)?.abs());
            for q in points {
                // the library clamps rounding noise at zero; inspect the raw value
                let raw = raw_divergence(model, p, q)?;
                min = min.min(raw / (1.0 + bregman_divergence(model, p, q)?));
            }
        }
    }
    Ok((
        min >= -1e-10 && self_max < 1e-8,
        format!("min relative B(p,q) = {min:.3e}, max |B(p,p)| = {self_max:.3e}"),
    ))
}

fn check_bt_natural_gradient(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let mut rng = trial_rng(cfg.seed, 94, 0);
    let (model, obs) = three_player_example();
    let nll = model.nll(&obs)?;
    let stats = model.sufficient_statistics(&obs);
    let mut worst = 0.0f64;
    for _ in 0..cfg.points_per_model {
        let theta = ThetaCoords::new(normals(&mut rng, 2))?;
        let p = Point::from_theta(theta.clone());
        let t = 0.7;
        let step = e_geodesic_step(&model, &theta, &nll.grad_eta(&model, &p)?, t)?;
        let eta = model.eta_from_theta(&theta)?;
        let residual: Vec<f64> = eta.as_slice().iter().zip(&stats).map(|(e, s)| e - s).collect();
        let direction = spd_solve(&model.metric_theta(&theta)?, &residual)?;
        let explicit: Vec<f64> = theta
            .as_slice()
            .iter()
            .zip(&direction)
            .map(|(th, d)| th - t * d)
            .collect();
        worst = worst.max(relative_error(step.as_slice(), &explicit));
    }
    Ok(within(worst, 1e-10))
}

fn check_mm_fixed_point(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let mut instances = vec![three_player_example()];
    let mut rng = trial_rng(cfg.seed, 95, 0);
    let n = 6;
    let mut wins = vec![0u32; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let games = rng.gen_range(1..=50u32);
            let x = rng.gen_range(1..games.max(2));
            wins[i * n + j] = x.min(games);
            wins[j * n + i] = games - x.min(games);
        }
    }
    instances.push(BradleyTerryModel::from_wins(n, wins)?);
    let mut worst = 0.0f64;
    for (model, obs) in &instances {
        let start = vec![1.0 / model.players() as f64; model.players()];
        let trace = run_mm(model, obs, &start, 1e-11, 100_000)?;
        let pi = trace.last().expect("traces hold the initial point");
        worst = worst.max(max_abs_diff(pi, &bt_mm_step(model, obs, pi)?));
    }
    Ok(within(worst, MM_FIXED_POINT_TOL))
}

/// Largest deviation from the sample frequencies after one m-geodesic step
/// with `t = 1/N` on random categorical datasets (up to 10 outcomes and
/// `10⁴` observations), each from a random interior start.
pub fn one_step_mle_error(seed: u64, datasets: usize) -> Result<f64, BenchError> {
    let mut worst = 0.0f64;
    for d in 0..datasets {
        let mut rng = trial_rng(seed, 1000 + d as u64, 0);
        let outcomes = rng.gen_range(2..=10usize);
        let n = rng.gen_range(outcomes..=10_000usize);
        let probs = random_simplex(&mut rng, outcomes, 0.0);
        // every outcome at least once so the MLE is interior
        let mut counts = vec![1usize; outcomes];
        for _ in outcomes..n {
            let u: f64 = rng.sample(Open01);
            let mut acc = 0.0;
            let idx = probs.iter().position(|p| {
                acc += p;
                u < acc
            });
            counts[idx.unwrap_or(outcomes - 1)] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let model = CategoricalModel::new(outcomes - 1)?;
        let nll = model.nll(&freq, n as f64)?;
        let start = Point::from_eta(model.eta_from_probabilities(&random_simplex(&mut rng, outcomes, 0.05))?);
        let grad = nll.grad_theta(&model, &start)?;
        let landed = m_geodesic_step(&model, start.eta(&model)?, &grad, 1.0 / n as f64)?;
        worst = worst.max(max_abs_diff(landed.as_slice(), &freq[..outcomes - 1]));
    }
    Ok(worst)
}

fn check_one_step_mle(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    Ok(within(
        one_step_mle_error(cfg.seed, cfg.one_step_datasets)?,
        ONE_STEP_TOL,
    ))
}

fn check_gaussian_domains(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let model = DiagGaussianModel::new(2)?;
    let mut rng = trial_rng(cfg.seed, 96, 0);
    let mut mismatches = 0;
    for _ in 0..200 {
        let v = normals(&mut rng, 4);
        let theta = ThetaCoords::new(v.clone())?;
        let eta = EtaCoords::new(v)?;
        if model.theta_in_domain(&theta) {
            mismatches += usize::from(!model.eta_in_domain(&model.eta_from_theta(&theta)?));
        }
        if model.eta_in_domain(&eta) {
            mismatches += usize::from(!model.theta_in_domain(&model.theta_from_eta(&eta)?));
        }
    }
    Ok((
        mismatches == 0,
        format!("{mismatches} points mapped outside the dual domain"),
    ))
}

fn check_kl_prior(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let lambda = 4.0;
    let data = VIDataset::empty(1, 2)?;
    // antithetic draws with exact unit second moment
    let noise = Matrix::from_row_major(2, 2, vec![1.0, -1.0, -1.0, 1.0])?;
    let objective = ViObjective::new(&data, lambda, &noise)?;
    let mut rng = trial_rng(cfg.seed, 97, 0);
    let init: Vec<f64> = normals(&mut rng, 4);
    let trace = run_euclidean_gd(
        |x| {
            let s = VIState::from_mu_rho(x[..2].to_vec(), x[2..].to_vec())?;
            objective.value_musigma(s.mu(), s.sigma())
        },
        |x| {
            let s = VIState::from_mu_rho(x[..2].to_vec(), x[2..].to_vec())?;
            let (gm, gr) = objective.grad_mu_rho(&s)?;
            Ok(gm.into_iter().chain(gr).collect())
        },
        &init,
        0.1,
        500,
    )?;
    let last = trace.last().expect("traces hold the initial point");
    let state = VIState::from_mu_rho(last[..2].to_vec(), last[2..].to_vec())?;
    let target_sigma = 1.0 / lambda.sqrt();
    let err = max_abs_diff(state.mu(), &[0.0, 0.0]).max(max_abs_diff(state.sigma(), &[target_sigma; 2]));
    Ok(within(err, 1e-3))
}

fn check_datagen(cfg: &CheckConfig) -> Result<(bool, String), BenchError> {
    let mut notes = Vec::new();
    let mut ok = true;

    let sizes = partition_sizes(7, 3);
    ok &= sizes == [3, 2, 2];
    notes.push(format!("partition(7,3)={sizes:?}"));

    let (m, d) = (3, 2);
    let n = cfg.covariance_samples * d;
    let mut gen_cfg = GenConfig::new(n, m, d, cfg.seed);
    gen_cfg.label_noise = 0.0;
    let g = generate(&gen_cfg)?;
    let mut perm = g.feature_permutation.clone();
    perm.sort_unstable();
    ok &= perm == (0..m).collect::<Vec<_>>();
    let mut worst_cov = 0.0f64;
    let mut min_eig = f64::INFINITY;
    for j in 0..d {
        let a = &g.factors[j];
        let target = a.transpose().mul(a)?;
        min_eig = min_eig.min(symmetric_eigenvalues(&target)?[0]);
        // back to original feature order
        let rows: Vec<Vec<f64>> = (0..n)
            .filter(|&i| g.clean_labels[i] == j)
            .map(|i| {
                let x = g.dataset.x(i);
                let mut orig = vec![0.0; m];
                for (k, &src) in g.feature_permutation.iter().enumerate() {
                    orig[src] = x[k];
                }
                orig
            })
            .collect();
        let count = rows.len() as f64;
        let mean: Vec<f64> = (0..m).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / count).collect();
        let cov = Matrix::from_fn(m, m, |a, b| {
            rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / (count - 1.0)
        });
        let diff: f64 = cov
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = target.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
        worst_cov = worst_cov.max(diff / norm);
    }
    ok &= worst_cov < 0.1 && min_eig > -1e-12;
    notes.push(format!("covariance Frobenius rel. error {worst_cov:.3e}"));
    notes.push(format!("min eigenvalue of A^T A {min_eig:.3e}"));

    let noisy = generate(&GenConfig::new(cfg.noise_samples, 2, 2, cfg.seed ^ 0x5eed))?;
    let rate = noisy.noise_applied.iter().filter(|&&b| b).count() as f64 / cfg.noise_samples as f64;
    ok &= (rate - 0.03).abs() <= 0.005;
    notes.push(format!("label-noise rate {rate:.4}"));

    let a = generate(&gen_cfg)?;
    ok &= a == g;
    Ok((ok, notes.join(", ")))
}

/// Runs every property suite.
pub fn run_checks(cfg: &CheckConfig) -> CheckReport {
    let mut report = CheckReport::default();
    let zoo = match zoo(cfg, 0) {
        Ok(z) => z,
        Err(e) => {
            report.record("model fixtures", Err(e));
            return report;
        }
    };
    report.record("legendre round trips", check_legendre(&zoo));
    report.record("metric vs finite-difference hessian", check_metric(&zoo));
    report.record(
        "negative control: perturbed metric is detected",
        check_metric_negative_control(cfg),
    );
    report.record("dual gradients vs finite differences", check_dual_gradients(&zoo, cfg));
    report.record("monte-carlo gradients vs finite differences", check_mc_gradients(cfg));
    report.record("mirror descent equals m-geodesic step", check_mirror(&zoo));
    report.record(
        "exponentiated gradient equals e-geodesic (categorical)",
        check_expgrad_equivalence(cfg),
    );
    report.record("bregman divergence is non-negative", check_bregman(&zoo));
    report.record(
        "bradley-terry e-step equals natural gradient step",
        check_bt_natural_gradient(cfg),
    );
    report.record("mm fixed point", check_mm_fixed_point(cfg));
    report.record(
        "one m-step with t=1/N reaches the categorical MLE",
        check_one_step_mle(cfg),
    );
    report.record("gaussian domains correspond", check_gaussian_domains(cfg));
    report.record("empty-data VI converges to the prior", check_kl_prior(cfg));
    report.record("data generator statistics", check_datagen(cfg));
    report
}
