use core::cell::OnceCell;

use crate::error::{Error, Result};

use super::{Chart, DuallyFlatModel, EtaCoords, ThetaCoords};

/// A point of a model, stored in the chart it was created in.
///
/// The companion chart is computed on first use and cached. Points created by
/// an e-geodesic step keep the previous `η` as a hint so that models with an
/// iterative `θ → η` map can warm-start.
#[derive(Debug, Clone)]
pub struct Point {
    native: Chart,
    theta: OnceCell<ThetaCoords>,
    eta: OnceCell<EtaCoords>,
    hint: Option<EtaCoords>,
}

impl Point {
    pub fn from_theta(theta: ThetaCoords) -> Self {
        Self {
            native: Chart::Theta,
            theta: OnceCell::from(theta),
            eta: OnceCell::new(),
            hint: None,
        }
    }

    pub fn from_eta(eta: EtaCoords) -> Self {
        Self {
            native: Chart::Eta,
            theta: OnceCell::new(),
            eta: OnceCell::from(eta),
            hint: None,
        }
    }

    /// Attaches a warm start for the `θ → η` inversion.
    pub fn with_eta_hint(mut self, hint: EtaCoords) -> Self {
        self.hint = Some(hint);
        self
    }

    pub fn native(&self) -> Chart {
        self.native
    }

    /// Coordinates in the native chart.
    pub fn native_coords(&self) -> &[f64] {
        match self.native {
            Chart::Theta => self.theta.get().map(|t| t.as_slice()),
            Chart::Eta => self.eta.get().map(|e| e.as_slice()),
        }
        .unwrap_or(&[])
    }

    pub fn theta<M: DuallyFlatModel + ?Sized>(&self, model: &M) -> Result<&ThetaCoords> {
        if let Some(theta) = self.theta.get() {
            return Ok(theta);
        }
        let eta = self.eta.get().ok_or(Error::Unsupported("point without coordinates"))?;
        let theta = model.theta_from_eta(eta)?;
        Ok(self.theta.get_or_init(|| theta))
    }

    pub fn eta<M: DuallyFlatModel + ?Sized>(&self, model: &M) -> Result<&EtaCoords> {
        if let Some(eta) = self.eta.get() {
            return Ok(eta);
        }
        let theta = self
            .theta
            .get()
            .ok_or(Error::Unsupported("point without coordinates"))?;
        let eta = model.eta_from_theta_near(theta, self.hint.as_ref())?;
        Ok(self.eta.get_or_init(|| eta))
    }

    /// Whether the point lies in the model's strict domain, judged in the
    /// native chart.
    pub fn in_domain<M: DuallyFlatModel + ?Sized>(&self, model: &M) -> bool {
        match self.native {
            Chart::Theta => self
                .theta
                .get()
                .is_some_and(|t| t.len() == model.dim() && model.theta_in_domain(t)),
            Chart::Eta => self
                .eta
                .get()
                .is_some_and(|e| e.len() == model.dim() && model.eta_in_domain(e)),
        }
    }
}
