use std::time::Instant;

use geodesic_core::geometry::{BackwardKl, DualGradientObjective, ForwardKl, Point};
use geodesic_core::linalg::norm_inf;
use geodesic_core::models::CategoricalModel;
use geodesic_core::optimizers::{Connection, DescentConfig, HalvingRule, StopKind, StopRule, run_geodesic_descent};
use geodesic_core::rng::trial_rng;
use rand::Rng;
use rand::distributions::Open01;

use super::{DEFAULT_SEED, RunOutcome, summarize_runs};
use crate::BenchError;
use crate::table::{Metadata, ResultTable, Value};

/// The two divergence objectives towards a target `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KlObjective {
    /// `f(r) = KL(q ‖ r)`.
    Forward,
    /// `h(r) = KL(r ‖ q)`.
    Backward,
}

impl KlObjective {
    pub fn label(self) -> &'static str {
        match self {
            KlObjective::Forward => "f=KL(q||r)",
            KlObjective::Backward => "h=KL(r||q)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalKlConfig {
    /// Number of outcomes of the categorical distribution.
    pub outcomes: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub step_size: f64,
    pub seed: u64,
    pub halving_rule: HalvingRule,
    pub max_iters: usize,
}

impl Default for CategoricalKlConfig {
    fn default() -> Self {
        Self {
            outcomes: 3,
            trials: 100,
            epsilon: 1e-5,
            step_size: 1.0,
            seed: DEFAULT_SEED,
            halving_rule: HalvingRule::DomainOnly,
            max_iters: 100_000,
        }
    }
}

impl CategoricalKlConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.outcomes < 2 {
            return Err(BenchError::Config(format!(
                "need at least two outcomes, got {}",
                self.outcomes
            )));
        }
        if self.trials == 0 {
            return Err(BenchError::Config("trials must be positive".into()));
        }
        if !(self.epsilon > 0.0) || !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(BenchError::Config("epsilon and step size must be positive".into()));
        }
        Ok(())
    }

    fn metadata(&self) -> Metadata {
        Metadata::new(
            "categorical-kl",
            self.seed,
            vec![
                ("outcomes".into(), self.outcomes.to_string()),
                ("trials".into(), self.trials.to_string()),
                ("epsilon".into(), self.epsilon.to_string()),
                ("step_size".into(), self.step_size.to_string()),
                ("halving_rule".into(), format!("{:?}", self.halving_rule)),
                ("max_iters".into(), self.max_iters.to_string()),
                ("start".into(), "uniform".into()),
                ("stop".into(), "||eta(p)-eta(q)||_2 < epsilon".into()),
            ],
        )
    }
}

/// One descent run towards a random target.
#[derive(Debug, Clone, PartialEq)]
pub struct KlRun {
    pub trial: usize,
    pub objective: KlObjective,
    pub connection: Connection,
    pub outcome: RunOutcome,
    /// `‖η(p_final) − η(q)‖_∞`.
    pub landing_error: f64,
    /// Objective value at the final point.
    pub final_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalKlResult {
    pub config: CategoricalKlConfig,
    pub runs: Vec<KlRun>,
    pub wall_time_secs: f64,
}

pub const KL_CELLS: [(KlObjective, Connection); 4] = [
    (KlObjective::Forward, Connection::M),
    (KlObjective::Forward, Connection::E),
    (KlObjective::Backward, Connection::M),
    (KlObjective::Backward, Connection::E),
];

fn connection_label(c: Connection) -> &'static str {
    match c {
        Connection::E => "e-geodesic",
        Connection::M => "m-geodesic",
    }
}

impl CategoricalKlResult {
    pub fn runs_of(&self, objective: KlObjective, connection: Connection) -> impl Iterator<Item = &KlRun> {
        self.runs
            .iter()
            .filter(move |r| r.objective == objective && r.connection == connection)
    }

    pub fn table(&self) -> ResultTable {
        let mut meta = self.config.metadata();
        meta.wall_time_secs = self.wall_time_secs;
        let mut t = ResultTable::new(meta);
        for (objective, connection) in KL_CELLS {
            let runs: Vec<&KlRun> = self.runs_of(objective, connection).collect();
            let method = connection_label(connection);
            t.push(
                method,
                objective.label(),
                "iterations",
                summarize_runs(runs.iter().map(|r| &r.outcome)),
            );
            let errors: Vec<f64> = runs.iter().map(|r| r.landing_error).collect();
            t.push(method, objective.label(), "landing_error", Value::summarize(&errors));
        }
        t
    }
}

/// Random targets `q ∝ (u₁, …, u_n)` with `u_i` uniform on `(0, 1)`, started
/// from the uniform distribution; descends both divergences along both
/// connections until `‖η(p) − η(q)‖₂ < ε`.
pub fn run_categorical_kl(cfg: &CategoricalKlConfig) -> Result<CategoricalKlResult, BenchError> {
    cfg.validate()?;
    let started = Instant::now();
    let model = CategoricalModel::new(cfg.outcomes - 1)?;
    let uniform = vec![1.0 / cfg.outcomes as f64; cfg.outcomes];
    let mut runs = Vec::with_capacity(4 * cfg.trials);
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial as u64, 0);
        let raw: Vec<f64> = (0..cfg.outcomes).map(|_| rng.sample(Open01)).collect();
        let total: f64 = raw.iter().sum();
        let probs: Vec<f64> = raw.iter().map(|u| u / total).collect();
        let target = Point::from_eta(model.eta_from_probabilities(&probs)?);
        let target_eta = target.eta(&model)?.as_slice().to_vec();
        let stop = StopRule::new(StopKind::DistanceToTargetEta(target_eta.clone()), cfg.epsilon)?;
        let forward = ForwardKl::new(&model, &target)?;
        let backward = BackwardKl::new(&model, &target)?;
        for (objective, connection) in KL_CELLS {
            let descent = DescentConfig::new(connection, cfg.step_size, stop.clone())
                .with_max_iters(cfg.max_iters)
                .with_halving_rule(cfg.halving_rule);
            let objective_ref: &dyn DualGradientObjective<CategoricalModel> = match objective {
                KlObjective::Forward => &forward,
                KlObjective::Backward => &backward,
            };
            let init = Point::from_eta(model.eta_from_probabilities(&uniform)?);
            let trace = run_geodesic_descent(&model, objective_ref, init, &descent);
            let (landing_error, final_value) = match &trace {
                Ok(tr) => {
                    let last = tr.last().expect("traces hold the initial point");
                    let p = match connection {
                        Connection::E => Point::from_theta(geodesic_core::geometry::ThetaCoords::new(last.to_vec())?),
                        Connection::M => Point::from_eta(geodesic_core::geometry::EtaCoords::new(last.to_vec())?),
                    };
                    let eta = p.eta(&model)?.as_slice().to_vec();
                    let diff: Vec<f64> = eta.iter().zip(&target_eta).map(|(a, b)| a - b).collect();
                    (norm_inf(&diff), objective_ref.value(&model, &p)?)
                }
                Err(_) => (f64::NAN, f64::NAN),
            };
            runs.push(KlRun {
                trial,
                objective,
                connection,
                outcome: RunOutcome::from_result(trace),
                landing_error,
                final_value,
            });
        }
    }
    Ok(CategoricalKlResult {
        config: cfg.clone(),
        runs,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}
