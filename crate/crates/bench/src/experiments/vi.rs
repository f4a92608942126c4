use std::time::Instant;

use geodesic_core::datagen::{GenConfig, generate};
use geodesic_core::rng::{trial_rng, trial_seed};
use geodesic_core::varinf::{VIDataset, VIState, ViMethod, ViObjective, accuracy, draw_noise, vi_single_iteration};

use super::{DEFAULT_SEED, join};
use crate::BenchError;
use crate::table::{Metadata, ResultTable, Value, mean_std};

#[derive(Debug, Clone, PartialEq)]
pub struct ViConfig {
    /// `(N, M, D)` of the generated data.
    pub triple: (usize, usize, usize),
    pub lambdas: Vec<f64>,
    pub lrs: Vec<f64>,
    /// Monte-Carlo draws for the objective, `K`.
    pub mc_samples: usize,
    /// Weight draws for prediction, `L`.
    pub predict_samples: usize,
    pub trials: usize,
    pub seed: u64,
    pub test_fraction: f64,
    pub label_noise: f64,
    /// Fixed data for every trial instead of freshly generated data.
    pub dataset: Option<VIDataset>,
}

impl Default for ViConfig {
    fn default() -> Self {
        Self {
            triple: (200, 5, 3),
            lambdas: vec![0.01, 1.0, 100.0],
            lrs: vec![0.01, 1.0, 100.0],
            mc_samples: 1000,
            predict_samples: 10,
            trials: 20,
            seed: DEFAULT_SEED,
            test_fraction: 0.3,
            label_noise: 0.03,
            dataset: None,
        }
    }
}

impl ViConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 || self.mc_samples == 0 || self.predict_samples == 0 {
            return Err(BenchError::Config("trials, K and L must be positive".into()));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(BenchError::Config("prior precisions must be positive".into()));
        }
        if self.lrs.is_empty() || self.lrs.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(BenchError::Config("learning rates must be non-negative".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(BenchError::Config("test fraction must lie in (0, 1)".into()));
        }
        if self.dataset.is_none() {
            let (n, m, d) = self.triple;
            let mut g = GenConfig::new(n, m, d, 0);
            g.label_noise = self.label_noise;
            g.validate()?;
        }
        Ok(())
    }

    fn metadata(&self) -> Metadata {
        let mut config = vec![
            ("lambdas".into(), join(&self.lambdas)),
            ("lrs".into(), join(&self.lrs)),
            ("K".into(), self.mc_samples.to_string()),
            ("L".into(), self.predict_samples.to_string()),
            ("trials".into(), self.trials.to_string()),
            ("test_fraction".into(), self.test_fraction.to_string()),
            ("iterations".into(), "1".into()),
            ("init".into(), "mu, rho ~ N(0, 1)".into()),
        ];
        match &self.dataset {
            None => {
                let (n, m, d) = self.triple;
                config.insert(0, ("triple".into(), format!("{n},{m},{d}")));
                config.push(("label_noise".into(), self.label_noise.to_string()));
                config.push(("cube_half_width".into(), "1.5".into()));
            }
            Some(data) => {
                let mut buf = Vec::new();
                crate::io::write_dataset_csv(&mut buf, data).expect("writing to memory cannot fail");
                config.insert(
                    0,
                    ("dataset_csv".into(), String::from_utf8_lossy(&buf).replace('\n', "\\n")),
                );
            }
        }
        Metadata::new("vi-mlr", self.seed, config)
    }
}

/// One method applied once in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ViRecord {
    pub trial: usize,
    pub lambda: f64,
    pub lr: f64,
    pub method: ViMethod,
    /// `(train, test)` accuracy, or the reason the step failed.
    pub accuracy: Result<(f64, f64), String>,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViResult {
    pub config: ViConfig,
    pub records: Vec<ViRecord>,
    pub wall_time_secs: f64,
}

impl ViResult {
    pub fn records_of(&self, lambda: f64, lr: f64, method: ViMethod) -> impl Iterator<Item = &ViRecord> {
        self.records
            .iter()
            .filter(move |r| r.lambda == lambda && r.lr == lr && r.method == method)
    }

    /// Mean `(train, test)` accuracy over the successful trials.
    pub fn mean_accuracy(&self, lambda: f64, lr: f64, method: ViMethod) -> Option<(f64, f64)> {
        let ok: Vec<(f64, f64)> = self
            .records_of(lambda, lr, method)
            .filter_map(|r| r.accuracy.clone().ok())
            .collect();
        if ok.is_empty() {
            return None;
        }
        let train: Vec<f64> = ok.iter().map(|a| a.0).collect();
        let test: Vec<f64> = ok.iter().map(|a| a.1).collect();
        Some((mean_std(&train).0, mean_std(&test).0))
    }

    pub fn table(&self) -> ResultTable {
        let mut meta = self.config.metadata();
        meta.wall_time_secs = self.wall_time_secs;
        let mut t = ResultTable::new(meta);
        for &lambda in &self.config.lambdas {
            for &lr in &self.config.lrs {
                for method in ViMethod::ALL {
                    let recs: Vec<&ViRecord> = self.records_of(lambda, lr, method).collect();
                    let cell = format!("lambda={lambda} lr={lr}");
                    let ok: Vec<(f64, f64)> = recs.iter().filter_map(|r| r.accuracy.clone().ok()).collect();
                    let failed = recs.len() - ok.len();
                    if ok.is_empty() {
                        t.push(
                            method.name(),
                            &cell,
                            "accuracy",
                            Value::Failure(format!("all {failed} trials failed")),
                        );
                        continue;
                    }
                    let train: Vec<f64> = ok.iter().map(|a| a.0).collect();
                    let test: Vec<f64> = ok.iter().map(|a| a.1).collect();
                    t.push(method.name(), &cell, "train_accuracy", Value::summarize(&train));
                    t.push(method.name(), &cell, "test_accuracy", Value::summarize(&test));
                    let halvings: Vec<f64> = recs.iter().map(|r| r.halvings as f64).collect();
                    t.push(method.name(), &cell, "halvings", Value::summarize(&halvings));
                    if failed > 0 {
                        t.push(method.name(), &cell, "failed_trials", Value::Count(failed));
                    }
                }
            }
        }
        t
    }
}

/// Single-iteration variational inference for multinomial logistic
/// regression. Within a trial every `(λ, lr, method)` cell shares the data,
/// split, initial state and Monte-Carlo draws.
pub fn run_vi_mlr(cfg: &ViConfig) -> Result<ViResult, BenchError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut records = Vec::new();
    for trial in 0..cfg.trials {
        let data = match &cfg.dataset {
            Some(d) => d.clone(),
            None => {
                let (n, m, d) = cfg.triple;
                let mut g = GenConfig::new(n, m, d, trial_seed(cfg.seed, trial as u64));
                g.label_noise = cfg.label_noise;
                generate(&g)?.dataset
            }
        };
        let mut rng = trial_rng(cfg.seed, trial as u64, 1);
        let (train, test) = data.train_test_split(cfg.test_fraction, &mut rng)?;
        let dim = train.weight_dim();
        let init = VIState::standard_normal(dim, &mut rng);
        let noise = draw_noise(cfg.mc_samples, dim, &mut rng);
        let predict_noise = draw_noise(cfg.predict_samples, dim, &mut rng);
        for &lambda in &cfg.lambdas {
            let objective = ViObjective::new(&train, lambda, &noise)?;
            for &lr in &cfg.lrs {
                for method in ViMethod::ALL {
                    let (accuracy, halvings) = match vi_single_iteration(&objective, &init, method, lr) {
                        Ok(step) => {
                            let acc = (
                                accuracy(&train, &step.state, &predict_noise)?,
                                accuracy(&test, &step.state, &predict_noise)?,
                            );
                            (Ok(acc), step.halvings)
                        }
                        Err(e) => (Err(e.to_string()), 0),
                    };
                    records.push(ViRecord {
                        trial,
                        lambda,
                        lr,
                        method,
                        accuracy,
                        halvings,
                    });
                }
            }
        }
    }
    Ok(ViResult {
        config: cfg.clone(),
        records,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}
