//! System parameter assembly and validation shared by all modules.

use crate::channel::{FrameGeometry, GaussMarkov};
use crate::error::{Error, Result};
use crate::estimation::EstimationContext;
use crate::optimizer::InterferenceBudget;
use crate::sensing::SensingConfig;

/// Every physical and link constant of one experiment.
#[derive(Debug, Clone, Copy)]
pub struct SystemParams {
    pub geom: FrameGeometry,
    pub gm: GaussMarkov,
    pub noise_var: f64,
    pub interference_var: f64,
    pub activity_prob: f64,
    pub budget: InterferenceBudget,
}

impl SystemParams {
    /// Re-check every cross-module invariant and return the canonical form.
    /// Component constructors already hold their own invariants, so this is
    /// idempotent; derived counts (TB, NB, data symbols) live on the
    /// geometry.
    pub fn validate(self) -> Result<SystemParams> {
        if !self.noise_var.is_finite() || self.noise_var <= 0.0 {
            return Err(Error::domain("noise variance must be positive"));
        }
        if !self.interference_var.is_finite() || self.interference_var < 0.0 {
            return Err(Error::domain("interference variance must be nonnegative"));
        }
        if !self.activity_prob.is_finite() || !(0.0..=1.0).contains(&self.activity_prob) {
            return Err(Error::domain("activity probability must lie in [0, 1]"));
        }
        if self.geom.nb() < 1 {
            return Err(Error::domain("sensing requires NB ≥ 1"));
        }
        if self.geom.data_count() < 1 {
            return Err(Error::domain("frame leaves no data symbols"));
        }
        Ok(self)
    }

    /// Detector view of these parameters.
    pub fn sensing_config(&self) -> Result<SensingConfig> {
        SensingConfig::new(
            self.geom.nb() as u32,
            self.noise_var,
            self.interference_var,
        )
    }

    /// Estimation view at a given pilot power.
    pub fn estimation_context(&self, pilot_power: f64) -> Result<EstimationContext> {
        EstimationContext::new(
            self.gm,
            self.geom,
            pilot_power,
            self.noise_var,
            self.interference_var,
            self.activity_prob,
        )
    }
}
