//! Neyman-Pearson energy detection of primary-user activity.
//!
//! The detector averages the energy of NB complex samples and compares it
//! to a threshold λ. Under circular Gaussian noise (H0) and signal-plus-
//! noise (H1) the statistic is Gamma(NB)-distributed, giving exact
//! chi-square operating characteristics; a Gaussian approximation and a
//! Monte Carlo oracle sit alongside.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::normal_pair;
use crate::specfun::{gaussian_q, reg_lower_gamma};

/// Detector configuration: NB samples, noise power, and the variance of
/// the aggregate primary signal at the secondary receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingConfig {
    n_samples: u32,
    noise_var: f64,
    interference_var: f64,
}

impl SensingConfig {
    pub fn new(n_samples: u32, noise_var: f64, interference_var: f64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::domain("detector needs at least one sample"));
        }
        if !noise_var.is_finite() || noise_var <= 0.0 {
            return Err(Error::domain("noise variance must be positive"));
        }
        if !interference_var.is_finite() || interference_var < 0.0 {
            return Err(Error::domain("interference variance must be nonnegative"));
        }
        Ok(Self {
            n_samples,
            noise_var,
            interference_var,
        })
    }

    pub fn n_samples(&self) -> u32 {
        self.n_samples
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn interference_var(&self) -> f64 {
        self.interference_var
    }
}

/// A detector state: threshold (when known) and the (P_f, P_d) pair it
/// induces. Figure reproduction sometimes pins the pair directly, in which
/// case no threshold is recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub threshold: Option<f64>,
    pub p_f: f64,
    pub p_d: f64,
}

impl OperatingPoint {
    /// Derive the full operating point from a threshold.
    pub fn from_threshold(cfg: &SensingConfig, threshold: f64) -> Result<Self> {
        Ok(Self {
            threshold: Some(threshold),
            p_f: false_alarm_prob(cfg, threshold)?,
            p_d: detection_prob(cfg, threshold)?,
        })
    }

    /// Pin the probabilities directly (paper-quoted operating points).
    pub fn from_probs(p_f: f64, p_d: f64) -> Result<Self> {
        for (name, p) in [("p_f", p_f), ("p_d", p_d)] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!("{name} = {p} outside [0, 1]")));
            }
        }
        Ok(Self {
            threshold: None,
            p_f,
            p_d,
        })
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(Error::domain(format!(
            "detection threshold {threshold} must be nonnegative"
        )));
    }
    Ok(())
}

/// P_f(λ) = 1 − P(NB, NB λ / σ_n²): the chance the averaged noise energy
/// exceeds λ on an idle channel. Strictly decreasing in λ, 1 at λ = 0.
pub fn false_alarm_prob(cfg: &SensingConfig, threshold: f64) -> Result<f64> {
    check_threshold(threshold)?;
    let nb = cfg.n_samples as f64;
    Ok(1.0 - reg_lower_gamma(nb, nb * threshold / cfg.noise_var)?)
}

/// P_d(λ) = 1 − P(NB, NB λ / (σ_n² + σ_sp²)): same statistic when the
/// primary signal is present.
pub fn detection_prob(cfg: &SensingConfig, threshold: f64) -> Result<f64> {
    check_threshold(threshold)?;
    let nb = cfg.n_samples as f64;
    let total = cfg.noise_var + cfg.interference_var;
    Ok(1.0 - reg_lower_gamma(nb, nb * threshold / total)?)
}

/// Invert P_f by bracketed bisection: |P_f(λ) − target| ≤ 1e−10.
pub fn threshold_for_false_alarm(cfg: &SensingConfig, target_pf: f64) -> Result<f64> {
    if !target_pf.is_finite() || target_pf <= 0.0 || target_pf >= 1.0 {
        return Err(Error::domain(format!(
            "target false-alarm probability {target_pf} must lie in (0, 1)"
        )));
    }
    const TOL: f64 = 1e-10;

    // P_f(0) = 1 > target; expand hi until P_f(hi) drops below target.
    let mut lo = 0.0;
    let mut hi = cfg.noise_var;
    let mut expansions = 0;
    while false_alarm_prob(cfg, hi)? > target_pf {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::convergence(
                "could not bracket the false-alarm threshold in 200 doublings",
            ));
        }
    }
    for _ in 0..500 {
        let mid = 0.5 * (lo + hi);
        let pf = false_alarm_prob(cfg, mid)?;
        if (pf - target_pf).abs() <= TOL {
            return Ok(mid);
        }
        if pf > target_pf {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    if (false_alarm_prob(cfg, mid)? - target_pf).abs() <= TOL {
        Ok(mid)
    } else {
        Err(Error::convergence(format!(
            "false-alarm inversion did not reach |P_f − {target_pf}| ≤ {TOL}"
        )))
    }
}

/// One operating point per threshold of an ascending grid.
pub fn roc_curve(cfg: &SensingConfig, thresholds: &[f64]) -> Result<Vec<OperatingPoint>> {
    if thresholds.is_empty() {
        return Err(Error::domain("ROC grid must be nonempty"));
    }
    for pair in thresholds.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::domain("ROC grid must be sorted ascending"));
        }
    }
    thresholds
        .iter()
        .map(|&t| OperatingPoint::from_threshold(cfg, t))
        .collect()
}

/// Gaussian approximation of the operating characteristics, accurate for
/// large NB: under each hypothesis Y has mean σ² and variance σ⁴/NB, so
/// P ≈ Q((λ − σ²) √NB / σ²).
pub fn gaussian_approx_probs(cfg: &SensingConfig, threshold: f64) -> Result<(f64, f64)> {
    check_threshold(threshold)?;
    let sqrt_nb = (cfg.n_samples as f64).sqrt();
    let s0 = cfg.noise_var;
    let s1 = cfg.noise_var + cfg.interference_var;
    let p_f = gaussian_q((threshold - s0) * sqrt_nb / s0)?;
    let p_d = gaussian_q((threshold - s1) * sqrt_nb / s1)?;
    Ok((p_f, p_d))
}

/// Monte Carlo detection probabilities at a single threshold.
pub fn simulate_detection(
    cfg: &SensingConfig,
    threshold: f64,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let v = simulate_operating_points(cfg, &[threshold], trials, seed)?;
    Ok(v[0])
}

/// Monte Carlo detection probabilities, amortizing one set of draws across
/// many thresholds. Trials are partitioned into fixed-size chunks with
/// per-chunk ChaCha streams, so the result is independent of the worker
/// count.
pub fn simulate_operating_points(
    cfg: &SensingConfig,
    thresholds: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if trials == 0 {
        return Err(Error::domain("simulation needs at least one trial"));
    }
    for &t in thresholds {
        check_threshold(t)?;
    }
    const CHUNK: u64 = 1 << 14;
    let n_chunks = trials.div_ceil(CHUNK);
    let nb = cfg.n_samples as usize;
    let noise_scale = (0.5 * cfg.noise_var).sqrt();
    let signal_scale = (0.5 * cfg.interference_var).sqrt();

    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let chunk_trials = CHUNK.min(trials - chunk * CHUNK);
            let mut exceed = vec![0u64; 2 * thresholds.len()];
            for _ in 0..chunk_trials {
                let mut energy_h0 = 0.0;
                let mut energy_h1 = 0.0;
                for _ in 0..nb {
                    let (a, b) = normal_pair(&mut rng);
                    energy_h0 += noise_scale * noise_scale * (a * a + b * b);
                    let (c, d) = normal_pair(&mut rng);
                    let (e, f) = normal_pair(&mut rng);
                    let re = noise_scale * c + signal_scale * e;
                    let im = noise_scale * d + signal_scale * f;
                    energy_h1 += re * re + im * im;
                }
                let y0 = energy_h0 / nb as f64;
                let y1 = energy_h1 / nb as f64;
                for (i, &t) in thresholds.iter().enumerate() {
                    if y0 > t {
                        exceed[2 * i] += 1;
                    }
                    if y1 > t {
                        exceed[2 * i + 1] += 1;
                    }
                }
            }
            exceed
        })
        .reduce(
            || vec![0u64; 2 * thresholds.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    Ok(thresholds
        .iter()
        .enumerate()
        .map(|(i, _)| {
            (
                counts[2 * i] as f64 / trials as f64,
                counts[2 * i + 1] as f64 / trials as f64,
            )
        })
        .collect())
}
