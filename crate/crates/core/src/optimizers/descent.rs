use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Chart, DualGradientObjective, DuallyFlatModel, Point, e_geodesic_step, m_geodesic_step};
use crate::linalg::{norm2, sub};

use super::{Outcome, RunTrace};

/// Which dual connection the descent follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connection {
    /// Straight lines in `θ`, driven by `D_η f`.
    E,
    /// Straight lines in `η`, driven by `D_θ f`.
    M,
}

impl Connection {
    pub fn chart(self) -> Chart {
        match self {
            Connection::E => Chart::Theta,
            Connection::M => Chart::Eta,
        }
    }
}

/// When a proposed step is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HalvingRule {
    /// Halve until the proposal lies in the domain.
    #[default]
    DomainOnly,
    /// Halve until the proposal lies in the domain and strictly decreases `f`.
    DomainAndDecrease,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StopKind {
    /// `‖D_η f‖₂`.
    GradNormEta,
    /// `‖∂f/∂(π₁..π_{N−1})‖₂`, for objectives exposing a strength gradient.
    GradNormPi,
    /// `‖η(p) − η*‖₂`.
    DistanceToTargetEta(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopRule {
    pub kind: StopKind,
    pub epsilon: f64,
}

impl StopRule {
    pub fn new(kind: StopKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "stopping tolerance must be positive, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    /// The monitored quantity at `p`.
    pub fn measure<M, O>(&self, model: &M, objective: &O, p: &Point) -> Result<f64>
    where
        M: DuallyFlatModel + ?Sized,
        O: DualGradientObjective<M> + ?Sized,
    {
        let v = match &self.kind {
            StopKind::GradNormEta => norm2(&objective.grad_eta(model, p)?),
            StopKind::GradNormPi => {
                let g = objective
                    .pi_gradient(model, p)
                    .ok_or(Error::Unsupported("objective has no strength gradient"))??;
                norm2(&g)
            }
            StopKind::DistanceToTargetEta(target) => norm2(&sub(p.eta(model)?.as_slice(), target)),
        };
        if v.is_nan() {
            return Err(Error::NonFinite("stopping statistic"));
        }
        Ok(v)
    }
}

pub const DEFAULT_MAX_ITERS: usize = 100_000;
pub const DEFAULT_MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    pub connection: Connection,
    pub step_size: f64,
    pub max_iters: usize,
    pub max_halvings: usize,
    pub stop_rule: StopRule,
    pub halving_rule: HalvingRule,
}

impl DescentConfig {
    pub fn new(connection: Connection, step_size: f64, stop_rule: StopRule) -> Self {
        Self {
            connection,
            step_size,
            max_iters: DEFAULT_MAX_ITERS,
            max_halvings: DEFAULT_MAX_HALVINGS,
            stop_rule,
            halving_rule: HalvingRule::default(),
        }
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_halving_rule(mut self, rule: HalvingRule) -> Self {
        self.halving_rule = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return Err(Error::InvalidInput(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        if self.max_halvings == 0 || self.max_halvings > DEFAULT_MAX_HALVINGS {
            return Err(Error::InvalidInput(format!(
                "max_halvings must be in 1..=60, got {}",
                self.max_halvings
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidInput("max_iters must be positive".into()));
        }
        if !(self.stop_rule.epsilon > 0.0) {
            return Err(Error::InvalidInput("stopping tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one accepted dual-geodesic move.
#[derive(Debug, Clone)]
pub struct GeodesicMove {
    pub point: Point,
    pub step_size: f64,
    pub halvings: usize,
}

/// Proposes `p − t·grad` along `connection`, halving `t` until `accept`
/// holds and the proposal is in the domain. Returns `None` once
/// `max_halvings` halvings have been spent.
///
/// `grad` is `D_η f` for the e-connection and `D_θ f` for the m-connection.
pub fn geodesic_move<M, A>(
    model: &M,
    p: &Point,
    grad: &[f64],
    connection: Connection,
    step_size: f64,
    max_halvings: usize,
    mut accept: A,
) -> Result<Option<GeodesicMove>>
where
    M: DuallyFlatModel + ?Sized,
    A: FnMut(&Point) -> Result<bool>,
{
    let mut t = step_size;
    for halvings in 0..=max_halvings {
        let candidate = match connection {
            Connection::E => {
                let theta = e_geodesic_step(model, p.theta(model)?, grad, t)?;
                let next = Point::from_theta(theta);
                match p.eta(model) {
                    Ok(eta) => next.with_eta_hint(eta.clone()),
                    Err(_) => next,
                }
            }
            Connection::M => Point::from_eta(m_geodesic_step(model, p.eta(model)?, grad, t)?),
        };
        if candidate.in_domain(model) && accept(&candidate)? {
            return Ok(Some(GeodesicMove {
                point: candidate,
                step_size: t,
                halvings,
            }));
        }
        t *= 0.5;
    }
    Ok(None)
}

/// Steepest descent along e- or m-geodesics with per-iteration step halving.
///
/// Each iteration starts from the configured step size, halves it until the
/// proposal is acceptable under the halving rule, then evaluates the stopping
/// rule at the new point. The stopping rule is also checked at `init`.
pub fn run_geodesic_descent<M, O>(model: &M, objective: &O, init: Point, cfg: &DescentConfig) -> Result<RunTrace>
where
    M: DuallyFlatModel + ?Sized,
    O: DualGradientObjective<M> + ?Sized,
{
    cfg.validate()?;
    if !init.in_domain(model) {
        return Err(Error::OutOfDomain("initial point"));
    }
    let chart = cfg.connection.chart();
    let coords = |p: &Point| -> Result<Vec<f64>> {
        Ok(match chart {
            Chart::Theta => p.theta(model)?.as_slice().to_vec(),
            Chart::Eta => p.eta(model)?.as_slice().to_vec(),
        })
    };

    let mut trace = RunTrace::new(chart);
    trace.iterates.push(coords(&init)?);
    let mut point = init;
    if cfg.stop_rule.measure(model, objective, &point)? < cfg.stop_rule.epsilon {
        trace.outcome = Outcome::Converged;
        return Ok(trace);
    }

    for _ in 0..cfg.max_iters {
        let grad = match cfg.connection {
            Connection::E => objective.grad_eta(model, &point)?,
            Connection::M => objective.grad_theta(model, &point)?,
        };
        let current = match cfg.halving_rule {
            HalvingRule::DomainOnly => f64::INFINITY,
            HalvingRule::DomainAndDecrease => objective.value(model, &point)?,
        };
        let accept = |candidate: &Point| -> Result<bool> {
            match cfg.halving_rule {
                HalvingRule::DomainOnly => Ok(true),
                HalvingRule::DomainAndDecrease => match objective.value(model, candidate) {
                    Ok(v) => Ok(v < current),
                    Err(Error::OutOfDomain(_)) => Ok(false),
                    Err(e) => Err(e),
                },
            }
        };
        let Some(step) = geodesic_move(
            model,
            &point,
            &grad,
            cfg.connection,
            cfg.step_size,
            cfg.max_halvings,
            accept,
        )?
        else {
            trace.outcome = Outcome::StepUnderflow;
            return Ok(trace);
        };
        point = step.point;
        trace.iterates.push(coords(&point)?);
        trace.step_sizes_used.push(step.step_size);
        trace.iterations += 1;
        if cfg.stop_rule.measure(model, objective, &point)? < cfg.stop_rule.epsilon {
            trace.outcome = Outcome::Converged;
            return Ok(trace);
        }
    }
    trace.outcome = Outcome::MaxIters;
    Ok(trace)
}
