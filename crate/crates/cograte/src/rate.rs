//! The four-scenario ergodic achievable-rate lower bound.
//!
//! Estimation error times data power is treated as additional Gaussian
//! noise; the bound averages ln(1 + γ|ξ|²) over the unit-mean exponential
//! fading power |ξ|² and over the four sensing outcomes (busy/idle ×
//! detected-busy/detected-idle), then scales by the data symbols per second
//! after the sensing and pilot overhead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimation::{estimate_variance, mmse, EstimatorKind};
use crate::frame::SystemParams;
use crate::rng::unit_exponential;
use crate::sensing::OperatingPoint;
use crate::specfun::exp_e1_product;

/// Per-symbol transmit powers: the pilot, and the data power used when the
/// detector reported busy (P_1) or idle (P_2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    pub pilot: f64,
    pub busy_data: f64,
    pub idle_data: f64,
}

impl PowerAllocation {
    pub fn new(pilot: f64, busy_data: f64, idle_data: f64) -> Result<Self> {
        let alloc = Self {
            pilot,
            busy_data,
            idle_data,
        };
        alloc.validate()?;
        Ok(alloc)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("pilot", self.pilot),
            ("busy_data", self.busy_data),
            ("idle_data", self.idle_data),
        ] {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::domain(format!(
                    "power {name} = {p} must be nonnegative and finite"
                )));
            }
        }
        Ok(())
    }
}

/// The four sensing outcomes, in the fixed reporting order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Primary active, detector said busy: data power P_1, interference present.
    BusyDetected,
    /// Primary active, detector said idle: data power P_2, interference present.
    BusyMissed,
    /// Primary idle, detector said busy: data power P_1, no interference.
    IdleFalseAlarm,
    /// Primary idle, detector said idle: data power P_2, no interference.
    IdleClear,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::BusyDetected,
        Scenario::BusyMissed,
        Scenario::IdleFalseAlarm,
        Scenario::IdleClear,
    ];
}

/// The bound split into its four scenario terms.
///
/// `scenario_rates[i]` is the rate the link would achieve if scenario `i`
/// had probability one (overhead included); `total` is the
/// probability-weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub scenario_rates: [f64; 4],
    pub weights: [f64; 4],
    pub total: f64,
}

/// E[ln(1 + γ|ξ|²)] for unit-mean exponential |ξ|², in closed form:
/// e^(1/γ) E1(1/γ). Zero at γ = 0, strictly increasing and concave.
/// Below γ = 1e−8 the asymptotic γ − γ² avoids the 1/γ blow-up.
pub fn expected_log_term(gamma: f64) -> Result<f64> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::domain(format!(
            "effective SINR {gamma} must be nonnegative and finite"
        )));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if gamma < 1e-8 {
        return Ok(gamma - gamma * gamma);
    }
    exp_e1_product(1.0 / gamma)
}

/// Monte Carlo oracle for the fading expectation: sample mean and standard
/// error of ln(1 + γ|ξ|²) over `samples` exponential draws.
pub fn simulate_expected_log_term(gamma: f64, samples: u64, seed: u64) -> Result<(f64, f64)> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::domain("negative SINR"));
    }
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let x = (1.0 + gamma * unit_exponential(&mut rng)).ln();
        sum += x;
        sum_sq += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

/// Effective SINR of one scenario: data power on the estimate variance over
/// estimation-error self-noise plus the scenario's ambient noise.
pub fn scenario_sinr(
    alloc: &PowerAllocation,
    est_var: f64,
    mmse_var: f64,
    noise_var: f64,
    interference_var: f64,
    scenario: Scenario,
) -> Result<f64> {
    alloc.validate()?;
    for (name, v) in [
        ("estimate variance", est_var),
        ("error variance", mmse_var),
        ("noise variance", noise_var),
        ("interference variance", interference_var),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::domain(format!("{name} = {v} must be nonnegative")));
        }
    }
    let (power, ambient) = match scenario {
        Scenario::BusyDetected => (alloc.busy_data, noise_var + interference_var),
        Scenario::BusyMissed => (alloc.idle_data, noise_var + interference_var),
        Scenario::IdleFalseAlarm => (alloc.busy_data, noise_var),
        Scenario::IdleClear => (alloc.idle_data, noise_var),
    };
    let denom = power * mmse_var + ambient;
    if denom <= 0.0 {
        return Err(Error::domain("scenario noise denominator must be positive"));
    }
    Ok(power * est_var / denom)
}

/// Scenario weights (ρP_d, ρ(1−P_d), (1−ρ)P_f, (1−ρ)(1−P_f)).
pub fn scenario_weights(activity_prob: f64, op: &OperatingPoint) -> [f64; 4] {
    let rho = activity_prob;
    [
        rho * op.p_d,
        rho * (1.0 - op.p_d),
        (1.0 - rho) * op.p_f,
        (1.0 - rho) * (1.0 - op.p_f),
    ]
}

/// The achievable-rate bound with the estimator statistics already in hand.
/// The optimizer calls this directly so one quadrature per pilot power is
/// shared across the whole data-power grid.
pub fn achievable_rate_with_stats(
    params: &SystemParams,
    alloc: &PowerAllocation,
    op: &OperatingPoint,
    est_var: f64,
    mmse_var: f64,
) -> Result<RateBreakdown> {
    alloc.validate()?;
    let weights = scenario_weights(params.activity_prob, op);
    let overhead = params.geom.data_count() as f64 / params.geom.block_sec();
    let mut scenario_rates = [0.0; 4];
    let mut total = 0.0;
    for (i, scenario) in Scenario::ALL.iter().enumerate() {
        let gamma = scenario_sinr(
            alloc,
            est_var,
            mmse_var,
            params.noise_var,
            params.interference_var,
            *scenario,
        )?;
        scenario_rates[i] = overhead * expected_log_term(gamma)?;
        total += weights[i] * scenario_rates[i];
    }
    Ok(RateBreakdown {
        scenario_rates,
        weights,
        total,
    })
}

/// The full bound: estimation error from the chosen Wiener filter at the
/// allocation's pilot power, estimate variance by orthogonality, then the
/// weighted fading expectations with the ((T−N)B−1)/T prefactor. Nats/sec.
pub fn achievable_rate(
    params: &SystemParams,
    alloc: &PowerAllocation,
    op: &OperatingPoint,
    kind: EstimatorKind,
) -> Result<RateBreakdown> {
    let ctx = params.estimation_context(alloc.pilot)?;
    let mmse_var = mmse(&ctx, kind)?;
    let est_var = estimate_variance(params.gm.fading_var(), mmse_var)?;
    achievable_rate_with_stats(params, alloc, op, est_var, mmse_var)
}

/// Per-offset variant: one error variance per data symbol, summed at 1/T.
/// Reduces to [`achievable_rate`] when every entry is equal.
pub fn achievable_rate_per_m(
    params: &SystemParams,
    alloc: &PowerAllocation,
    op: &OperatingPoint,
    mmse_per_m: &[f64],
) -> Result<RateBreakdown> {
    alloc.validate()?;
    let data_count = params.geom.data_count();
    if mmse_per_m.len() != data_count {
        return Err(Error::domain(format!(
            "need one error variance per data symbol: got {}, expected {data_count}",
            mmse_per_m.len()
        )));
    }
    let weights = scenario_weights(params.activity_prob, op);
    let inv_t = 1.0 / params.geom.block_sec();
    let sig_h2 = params.gm.fading_var();
    let mut scenario_rates = [0.0; 4];
    for &mmse_var in mmse_per_m {
        let est_var = estimate_variance(sig_h2, mmse_var)?;
        for (i, scenario) in Scenario::ALL.iter().enumerate() {
            let gamma = scenario_sinr(
                alloc,
                est_var,
                mmse_var,
                params.noise_var,
                params.interference_var,
                *scenario,
            )?;
            scenario_rates[i] += inv_t * expected_log_term(gamma)?;
        }
    }
    let total = weights
        .iter()
        .zip(&scenario_rates)
        .map(|(w, r)| w * r)
        .sum();
    Ok(RateBreakdown {
        scenario_rates,
        weights,
        total,
    })
}
