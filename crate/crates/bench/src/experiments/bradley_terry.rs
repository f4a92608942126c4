use std::time::Instant;

use geodesic_core::geometry::Point;
use geodesic_core::linalg::norm2;
use geodesic_core::models::{BradleyTerryModel, BtObservation, three_player_example};
use geodesic_core::optimizers::{
    Connection, DescentConfig, StopKind, StopRule, run_exponentiated_gradient, run_geodesic_descent, run_mm,
};
use geodesic_core::rng::trial_rng;
use rand::Rng;

use super::{DEFAULT_SEED, RunOutcome, join, summarize_runs};
use crate::BenchError;
use crate::table::{Metadata, ResultTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BtMode {
    /// One fixed instance (the three-player example unless data is supplied).
    Small,
    /// Random round-robin instances with `n_ij ~ U{1..max_games}` and
    /// `x_ij ~ U{0..n_ij}`.
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BtMethod {
    Mm,
    ExponentiatedGradient,
    EGeodesic,
}

impl BtMethod {
    pub fn label(self) -> &'static str {
        match self {
            BtMethod::Mm => "mm",
            BtMethod::ExponentiatedGradient => "exponentiated-gradient",
            BtMethod::EGeodesic => "e-geodesic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtConfig {
    pub mode: BtMode,
    pub lrs: Vec<f64>,
    pub epsilon: f64,
    pub seed: u64,
    /// Large mode only.
    pub instances: usize,
    pub players: usize,
    pub max_games: u32,
    /// Run exponentiated gradient in large mode too.
    pub large_expgrad: bool,
    pub max_iters: usize,
    /// Small-mode data; the three-player example when `None`.
    pub data: Option<(BradleyTerryModel, BtObservation)>,
}

impl BtConfig {
    pub fn small() -> Self {
        Self {
            mode: BtMode::Small,
            lrs: vec![0.01, 1.0],
            epsilon: 1e-5,
            seed: DEFAULT_SEED,
            instances: 1,
            players: 3,
            max_games: 10,
            large_expgrad: false,
            max_iters: 100_000,
            data: None,
        }
    }

    pub fn large() -> Self {
        Self {
            mode: BtMode::Large,
            lrs: vec![1.0],
            instances: 100,
            players: 100,
            max_games: 1000,
            ..Self::small()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.lrs.is_empty() || self.lrs.iter().any(|lr| !(*lr > 0.0) || !lr.is_finite()) {
            return Err(BenchError::Config("learning rates must be positive".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(BenchError::Config("epsilon must be positive".into()));
        }
        if self.mode == BtMode::Large && (self.instances == 0 || self.players < 2 || self.max_games == 0) {
            return Err(BenchError::Config(
                "large mode needs instances ≥ 1, players ≥ 2, max games ≥ 1".into(),
            ));
        }
        if self.mode == BtMode::Large && self.data.is_some() {
            return Err(BenchError::Config("input data is only used in small mode".into()));
        }
        Ok(())
    }

    fn metadata(&self) -> Metadata {
        let mut config = vec![
            ("mode".into(), format!("{:?}", self.mode).to_lowercase()),
            ("lrs".into(), join(&self.lrs)),
            ("epsilon".into(), self.epsilon.to_string()),
            ("max_iters".into(), self.max_iters.to_string()),
            ("start".into(), "uniform strengths".into()),
            ("stop".into(), "||dNLL/d(pi_1..pi_{N-1})||_2 < epsilon".into()),
        ];
        match (self.mode, &self.data) {
            (BtMode::Small, None) => config.push(("data".into(), "three-player example".into())),
            (BtMode::Small, Some((_, obs))) => {
                let n = obs.players();
                let wins: Vec<u32> = (0..n * n).map(|k| obs.wins(k / n, k % n)).collect();
                config.push(("data.players".into(), n.to_string()));
                config.push(("data.wins_row_major".into(), join(&wins)));
            }
            (BtMode::Large, _) => {
                config.push(("instances".into(), self.instances.to_string()));
                config.push(("players".into(), self.players.to_string()));
                config.push(("max_games".into(), self.max_games.to_string()));
                config.push(("large_expgrad".into(), self.large_expgrad.to_string()));
            }
        }
        Metadata::new("bradley-terry", self.seed, config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtRecord {
    pub instance: usize,
    pub method: BtMethod,
    /// `None` for MM, which has no step size.
    pub lr: Option<f64>,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtResult {
    pub config: BtConfig,
    pub records: Vec<BtRecord>,
    pub wall_time_secs: f64,
}

impl BtResult {
    pub fn outcomes(&self, method: BtMethod, lr: Option<f64>) -> impl Iterator<Item = &RunOutcome> {
        self.records
            .iter()
            .filter(move |r| r.method == method && r.lr == lr)
            .map(|r| &r.outcome)
    }

    pub fn table(&self) -> ResultTable {
        let mut meta = self.config.metadata();
        meta.wall_time_secs = self.wall_time_secs;
        let mut t = ResultTable::new(meta);
        let mut cells: Vec<(BtMethod, Option<f64>)> = vec![(BtMethod::Mm, None)];
        for &lr in &self.config.lrs {
            cells.push((BtMethod::ExponentiatedGradient, Some(lr)));
            cells.push((BtMethod::EGeodesic, Some(lr)));
        }
        for (method, lr) in cells {
            let runs: Vec<&RunOutcome> = self.outcomes(method, lr).collect();
            if runs.is_empty() {
                continue;
            }
            let cell = lr.map_or_else(|| "any lr".to_owned(), |lr| format!("lr={lr}"));
            let value = if runs.len() == 1 {
                runs[0].value()
            } else {
                summarize_runs(runs)
            };
            t.push(method.label(), cell, "iterations", value);
        }
        t
    }
}

fn random_instance(cfg: &BtConfig, instance: usize) -> Result<(BradleyTerryModel, BtObservation), BenchError> {
    let n = cfg.players;
    let mut rng = trial_rng(cfg.seed, instance as u64, 0);
    let mut wins = vec![0u32; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let games = rng.gen_range(1..=cfg.max_games);
            let x = rng.gen_range(0..=games);
            wins[i * n + j] = x;
            wins[j * n + i] = games - x;
        }
    }
    Ok(BradleyTerryModel::from_wins(n, wins)?)
}

fn run_instance(
    cfg: &BtConfig,
    instance: usize,
    model: &BradleyTerryModel,
    obs: &BtObservation,
    expgrad: bool,
    records: &mut Vec<BtRecord>,
) -> Result<(), BenchError> {
    let n = model.players();
    let uniform = vec![1.0 / n as f64; n];
    let mm = RunOutcome::from_result(run_mm(model, obs, &uniform, cfg.epsilon, cfg.max_iters));
    records.push(BtRecord {
        instance,
        method: BtMethod::Mm,
        lr: None,
        outcome: mm,
    });
    let nll = model.nll(obs)?;
    for &lr in &cfg.lrs {
        if expgrad {
            let outcome = RunOutcome::from_result(run_exponentiated_gradient(
                &uniform,
                |pi| model.nll_full_gradient_pi(obs, pi),
                |pi| Ok(norm2(&model.nll_grad_pi(obs, pi)?)),
                lr,
                cfg.epsilon,
                cfg.max_iters,
            ));
            records.push(BtRecord {
                instance,
                method: BtMethod::ExponentiatedGradient,
                lr: Some(lr),
                outcome,
            });
        }
        let descent = DescentConfig::new(Connection::E, lr, StopRule::new(StopKind::GradNormPi, cfg.epsilon)?)
            .with_max_iters(cfg.max_iters);
        let init = Point::from_theta(model.theta_from_pi(&uniform)?);
        let outcome = RunOutcome::from_result(run_geodesic_descent(model, &nll, init, &descent));
        records.push(BtRecord {
            instance,
            method: BtMethod::EGeodesic,
            lr: Some(lr),
            outcome,
        });
    }
    Ok(())
}

/// Bradley–Terry maximum likelihood by MM, exponentiated gradient on the
/// strengths and e-geodesic descent, from uniform strengths.
pub fn run_bradley_terry(cfg: &BtConfig) -> Result<BtResult, BenchError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut records = Vec::new();
    match cfg.mode {
        BtMode::Small => {
            let (model, obs) = cfg.data.clone().unwrap_or_else(three_player_example);
            run_instance(cfg, 0, &model, &obs, true, &mut records)?;
        }
        BtMode::Large => {
            for instance in 0..cfg.instances {
                let (model, obs) = random_instance(cfg, instance)?;
                run_instance(cfg, instance, &model, &obs, cfg.large_expgrad, &mut records)?;
            }
        }
    }
    Ok(BtResult {
        config: cfg.clone(),
        records,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}
