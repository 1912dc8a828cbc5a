//! Experiment configuration: a nested key-value TOML file with explicit
//! units in the key names, resolved into validated system parameters.

use serde::{Deserialize, Serialize};

use crate::channel::{FrameGeometry, GaussMarkov};
use crate::error::{Error, Result};
use crate::estimation::EstimatorKind;
use crate::frame::SystemParams;
use crate::optimizer::InterferenceBudget;
use crate::sensing::OperatingPoint;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemSection,
    #[serde(default)]
    pub detector: DetectorSection,
    #[serde(default)]
    pub estimators: EstimatorSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub bandwidth_hz: f64,
    pub block_sec: f64,
    pub sensing_sec: f64,
    pub alpha: f64,
    #[serde(default = "one")]
    pub fading_var: f64,
    #[serde(default = "one")]
    pub noise_var: f64,
    #[serde(default = "one")]
    pub interference_var: f64,
    #[serde(default = "default_activity")]
    pub activity_prob: f64,
    pub interference_cap: f64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    /// Fixed detection threshold; (P_f, P_d) follow from the chi-square law.
    pub lambda: Option<f64>,
    /// Pinned operating point (mutually exclusive with `lambda`).
    pub p_f: Option<f64>,
    pub p_d: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub kinds: Vec<String>,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            kinds: vec!["noncausal".into(), "causal".into()],
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub snr: Option<SnrSweep>,
    pub pd: Option<PdSweep>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SnrSweep {
    pub start_db: f64,
    pub stop_db: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PdSweep {
    pub lambda_start: f64,
    pub lambda_stop: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub grid_resolution: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            grid_resolution: 32,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub seed: u64,
    pub trials: u64,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            seed: 42,
            trials: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            format: "csv".into(),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_activity() -> f64 {
    0.1
}

/// A parsed and validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub estimators: Vec<EstimatorKind>,
    pub snr_sweep: Option<SnrSweep>,
    pub lambda_grid: Option<Vec<f64>>,
    pub grid_resolution: usize,
    pub seed: u64,
    pub trials: u64,
    pub format: String,
    /// Canonical echo of the resolved configuration (header block).
    pub echo: String,
    raw: ConfigFile,
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        Self::resolve(file)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    fn resolve(file: ConfigFile) -> Result<Self> {
        let lift = |e: Error| match e {
            Error::Domain(m) => Error::Config(m),
            other => other,
        };
        let sys = &file.system;
        let geom = FrameGeometry::new(sys.bandwidth_hz, sys.block_sec, sys.sensing_sec)
            .map_err(lift)?;
        let gm = GaussMarkov::new(sys.alpha, sys.fading_var).map_err(lift)?;
        let budget = InterferenceBudget::new(sys.interference_cap).map_err(lift)?;
        let params = SystemParams {
            geom,
            gm,
            noise_var: sys.noise_var,
            interference_var: sys.interference_var,
            activity_prob: sys.activity_prob,
            budget,
        }
        .validate()
        .map_err(lift)?;

        let mut estimators = Vec::new();
        for kind in &file.estimators.kinds {
            match kind.as_str() {
                "noncausal" => estimators.push(EstimatorKind::Noncausal),
                "causal" => estimators.push(EstimatorKind::Causal),
                other => {
                    return Err(Error::Config(format!(
                        "unknown estimator kind '{other}' (expected 'causal' or 'noncausal')"
                    )))
                }
            }
        }
        if estimators.is_empty() {
            return Err(Error::Config("estimators.kinds must be nonempty".into()));
        }

        if let Some(snr) = &file.sweep.snr {
            if snr.steps == 0 {
                return Err(Error::Config("sweep.snr.steps must be at least 1".into()));
            }
            if snr.steps > 1 && snr.stop_db <= snr.start_db {
                return Err(Error::Config(
                    "sweep.snr range must be ordered: stop_db > start_db".into(),
                ));
            }
        }
        let lambda_grid = match &file.sweep.pd {
            Some(pd) => {
                if pd.steps == 0 {
                    return Err(Error::Config("sweep.pd.steps must be at least 1".into()));
                }
                if pd.lambda_start < 0.0 {
                    return Err(Error::Config("sweep.pd thresholds must be nonnegative".into()));
                }
                if pd.steps > 1 && pd.lambda_stop <= pd.lambda_start {
                    return Err(Error::Config(
                        "sweep.pd range must be ordered: lambda_stop > lambda_start".into(),
                    ));
                }
                Some(linspace(pd.lambda_start, pd.lambda_stop, pd.steps))
            }
            None => None,
        };

        if file.detector.lambda.is_some() && (file.detector.p_f.is_some() || file.detector.p_d.is_some()) {
            return Err(Error::Config(
                "detector: give either lambda or the (p_f, p_d) pair, not both".into(),
            ));
        }
        if file.detector.p_f.is_some() != file.detector.p_d.is_some() {
            return Err(Error::Config(
                "detector: p_f and p_d must be given together".into(),
            ));
        }

        if file.optimizer.grid_resolution < 8 {
            return Err(Error::Config("optimizer.grid_resolution must be at least 8".into()));
        }
        match file.output.format.as_str() {
            "csv" | "json" => {}
            other => {
                return Err(Error::Config(format!(
                    "output.format '{other}' not supported (csv or json)"
                )))
            }
        }

        let echo = toml::to_string(&file)
            .map_err(|e| Error::Config(format!("cannot echo config: {e}")))?;
        Ok(Self {
            params,
            estimators,
            snr_sweep: file.sweep.snr.clone(),
            lambda_grid,
            grid_resolution: file.optimizer.grid_resolution,
            seed: file.mc.seed,
            trials: file.mc.trials,
            format: file.output.format.clone(),
            echo,
            raw: file,
        })
    }

    /// The configured fixed operating point, if any: an explicit (P_f, P_d)
    /// pair, or the pair induced by a fixed threshold.
    pub fn operating_point(&self) -> Result<Option<OperatingPoint>> {
        if let (Some(p_f), Some(p_d)) = (self.raw.detector.p_f, self.raw.detector.p_d) {
            return Ok(Some(OperatingPoint::from_probs(p_f, p_d).map_err(|e| {
                Error::Config(format!("detector operating point: {e}"))
            })?));
        }
        if let Some(lambda) = self.raw.detector.lambda {
            let cfg = self.params.sensing_config()?;
            return Ok(Some(OperatingPoint::from_threshold(&cfg, lambda)?));
        }
        Ok(None)
    }

    pub fn require_operating_point(&self) -> Result<OperatingPoint> {
        self.operating_point()?.ok_or_else(|| {
            Error::Config("this command needs [detector] lambda or (p_f, p_d)".into())
        })
    }
}

pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    (0..steps)
        .map(|i| start + (stop - start) * i as f64 / (steps - 1) as f64)
        .collect()
}
