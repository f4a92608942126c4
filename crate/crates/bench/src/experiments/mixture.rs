use std::time::Instant;

use geodesic_core::geometry::Point;
use geodesic_core::linalg::norm2;
use geodesic_core::models::{MixtureModel, MixtureNll};
use geodesic_core::optimizers::{
    Connection, DescentConfig, StopKind, StopRule, run_exponentiated_gradient, run_geodesic_descent,
};
use geodesic_core::rng::trial_rng;
use rand::distributions::{Distribution, WeightedIndex};

use super::{DEFAULT_SEED, RunOutcome, join};
use crate::BenchError;
use crate::io::MixtureSpec;
use crate::table::{Metadata, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixtureMethod {
    ExponentiatedGradient,
    MGeodesic,
    EGeodesic,
}

impl MixtureMethod {
    pub const ALL: [MixtureMethod; 3] = [
        MixtureMethod::ExponentiatedGradient,
        MixtureMethod::MGeodesic,
        MixtureMethod::EGeodesic,
    ];

    pub fn label(self) -> &'static str {
        match self {
            MixtureMethod::ExponentiatedGradient => "exponentiated-gradient",
            MixtureMethod::MGeodesic => "m-geodesic",
            MixtureMethod::EGeodesic => "e-geodesic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    pub components: MixtureSpec,
    /// Per case, how many samples are drawn from each component.
    pub cases: Vec<Vec<usize>>,
    /// Step sizes as multiples of `1/N`, run for every method.
    pub lr_multipliers: Vec<f64>,
    /// Extra multiples of `1/N` run for exponentiated gradient only.
    pub expgrad_extra_multipliers: Vec<f64>,
    pub epsilon: f64,
    pub seed: u64,
    pub max_iters: usize,
}

pub fn four_arc_spec() -> MixtureSpec {
    let model = MixtureModel::four_arcs();
    MixtureSpec {
        omega_size: model.omega_size(),
        components: model.components().to_vec(),
    }
}

impl Default for MixtureConfig {
    fn default() -> Self {
        Self {
            components: four_arc_spec(),
            cases: vec![
                vec![250, 250, 250, 250],
                vec![400, 400, 100, 100],
                vec![700, 100, 100, 100],
            ],
            lr_multipliers: vec![0.5, 1.0, 1.5],
            expgrad_extra_multipliers: vec![1.6, 1.7, 1.8, 1.9, 2.0, 2.1],
            epsilon: 1e-5,
            seed: DEFAULT_SEED,
            max_iters: 100_000,
        }
    }
}

impl MixtureConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let k = self.components.components.len();
        if self.cases.is_empty() {
            return Err(BenchError::Config("no data cases".into()));
        }
        for case in &self.cases {
            if case.len() != k {
                return Err(BenchError::Config(format!(
                    "case {case:?} needs one count per component ({k})"
                )));
            }
            if case.iter().sum::<usize>() == 0 {
                return Err(BenchError::Config(format!("case {case:?} has no samples")));
            }
        }
        if self
            .lr_multipliers
            .iter()
            .chain(&self.expgrad_extra_multipliers)
            .any(|m| !(*m > 0.0) || !m.is_finite())
        {
            return Err(BenchError::Config("learning-rate multipliers must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(BenchError::Config("epsilon must be positive".into()));
        }
        Ok(())
    }

    fn metadata(&self) -> Metadata {
        Metadata::new(
            "mixture-mle",
            self.seed,
            vec![
                ("omega_size".into(), self.components.omega_size.to_string()),
                (
                    "components".into(),
                    self.components
                        .components
                        .iter()
                        .map(|c| join(c))
                        .collect::<Vec<_>>()
                        .join("|"),
                ),
                (
                    "cases".into(),
                    self.cases.iter().map(|c| join(c)).collect::<Vec<_>>().join("|"),
                ),
                ("lr_multipliers_of_1/N".into(), join(&self.lr_multipliers)),
                (
                    "expgrad_extra_multipliers_of_1/N".into(),
                    join(&self.expgrad_extra_multipliers),
                ),
                ("epsilon".into(), self.epsilon.to_string()),
                ("max_iters".into(), self.max_iters.to_string()),
                ("start".into(), "uniform weights".into()),
                ("stop".into(), "||D_eta NLL||_2 < epsilon".into()),
            ],
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureCell {
    pub case: usize,
    pub method: MixtureMethod,
    pub lr_multiplier: f64,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureResult {
    pub config: MixtureConfig,
    /// Observed counts over `Ω` per case.
    pub counts: Vec<Vec<usize>>,
    pub cells: Vec<MixtureCell>,
    pub wall_time_secs: f64,
}

impl MixtureResult {
    pub fn get(&self, case: usize, method: MixtureMethod, lr_multiplier: f64) -> Option<&RunOutcome> {
        self.cells
            .iter()
            .find(|c| c.case == case && c.method == method && c.lr_multiplier == lr_multiplier)
            .map(|c| &c.outcome)
    }

    pub fn table(&self) -> ResultTable {
        let mut meta = self.config.metadata();
        meta.wall_time_secs = self.wall_time_secs;
        let mut t = ResultTable::new(meta);
        for cell in &self.cells {
            let label = format!(
                "case={} lr={}/N",
                join(&self.config.cases[cell.case]),
                cell.lr_multiplier
            );
            t.push(cell.method.label(), label, "iterations", cell.outcome.value());
        }
        t
    }
}

fn sample_counts(spec: &MixtureSpec, case: &[usize], seed: u64, index: usize) -> Result<Vec<usize>, BenchError> {
    let mut rng = trial_rng(seed, index as u64, 0);
    let mut counts = vec![0usize; spec.omega_size];
    for (component, &n) in spec.components.iter().zip(case) {
        let dist = WeightedIndex::new(component)
            .map_err(|e| BenchError::Config(format!("component is not a distribution: {e}")))?;
        for _ in 0..n {
            counts[dist.sample(&mut rng)] += 1;
        }
    }
    Ok(counts)
}

fn run_method(
    model: &MixtureModel,
    nll: &MixtureNll,
    method: MixtureMethod,
    lr: f64,
    cfg: &MixtureConfig,
) -> Result<RunOutcome, BenchError> {
    let k = model.components().len();
    let uniform = vec![1.0 / k as f64; k];
    let init_eta = model.eta(&uniform[..k - 1])?;
    Ok(match method {
        MixtureMethod::ExponentiatedGradient => RunOutcome::from_result(run_exponentiated_gradient(
            &uniform,
            |w| nll.weight_gradient(model, w),
            |w| Ok(norm2(&nll.grad_eta_at(model, &model.eta(&w[..k - 1])?)?)),
            lr,
            cfg.epsilon,
            cfg.max_iters,
        )),
        MixtureMethod::MGeodesic | MixtureMethod::EGeodesic => {
            let connection = if method == MixtureMethod::MGeodesic {
                Connection::M
            } else {
                Connection::E
            };
            let descent = DescentConfig::new(connection, lr, StopRule::new(StopKind::GradNormEta, cfg.epsilon)?)
                .with_max_iters(cfg.max_iters);
            RunOutcome::from_result(run_geodesic_descent(model, nll, Point::from_eta(init_eta), &descent))
        }
    })
}

/// Maximum-likelihood estimation of mixture weights from data drawn per
/// case, by exponentiated gradient and by m- and e-geodesic descent, all
/// started from uniform weights.
pub fn run_mixture_mle(cfg: &MixtureConfig) -> Result<MixtureResult, BenchError> {
    cfg.validate()?;
    let started = Instant::now();
    let model = cfg.components.clone().into_model()?;
    let mut all_counts = Vec::new();
    let mut cells = Vec::new();
    for (index, case) in cfg.cases.iter().enumerate() {
        let counts = sample_counts(&cfg.components, case, cfg.seed, index)?;
        let n = counts.iter().sum::<usize>() as f64;
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
        let nll = model.nll(&freq, n)?;
        for method in MixtureMethod::ALL {
            let extra = if method == MixtureMethod::ExponentiatedGradient {
                &cfg.expgrad_extra_multipliers[..]
            } else {
                &[]
            };
            for &mult in cfg.lr_multipliers.iter().chain(extra) {
                let outcome = run_method(&model, &nll, method, mult / n, cfg)?;
                cells.push(MixtureCell {
                    case: index,
                    method,
                    lr_multiplier: mult,
                    outcome,
                });
            }
        }
        all_counts.push(counts);
    }
    Ok(MixtureResult {
        config: cfg.clone(),
        counts: all_counts,
        cells,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}
