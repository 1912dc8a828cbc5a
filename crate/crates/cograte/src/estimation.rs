//! Pilot-based MMSE channel estimation: noncausal and causal Wiener-filter
//! error variances under the Nyquist-sampling (no-aliasing) model, the
//! Gauss-Markov canonical-factorization constants behind the causal closed
//! form, the exact per-offset error variance with aliasing, and a
//! time-domain FIR Wiener oracle that validates all of it.
//!
//! Pilots are observed every TB samples with power P_t through noise of
//! variance σ_n² + ρσ_sp² (activity-averaged: the estimator cannot condition
//! on the true primary state).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    autocorrelation, generate_path, psd_periodic, undersampled_spectrum_tb, FrameGeometry,
    GaussMarkov,
};
use crate::error::{Error, Result};
use crate::quad;
use crate::rng::complex_normal;

const PI: f64 = std::f64::consts::PI;

/// Which pilot observations the Wiener filter may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// All pilots, past and future (interpolation).
    Noncausal,
    /// Past pilots only, up to and including the current block's.
    Causal,
}

impl EstimatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorKind::Noncausal => "noncausal",
            EstimatorKind::Causal => "causal",
        }
    }
}

/// Everything the estimation-error formulas need.
#[derive(Debug, Clone, Copy)]
pub struct EstimationContext {
    pub gm: GaussMarkov,
    pub geom: FrameGeometry,
    pub pilot_power: f64,
    pub noise_var: f64,
    pub interference_var: f64,
    pub activity_prob: f64,
}

impl EstimationContext {
    pub fn new(
        gm: GaussMarkov,
        geom: FrameGeometry,
        pilot_power: f64,
        noise_var: f64,
        interference_var: f64,
        activity_prob: f64,
    ) -> Result<Self> {
        if !pilot_power.is_finite() || pilot_power < 0.0 {
            return Err(Error::domain("pilot power must be nonnegative"));
        }
        if !noise_var.is_finite() || noise_var <= 0.0 {
            return Err(Error::domain("noise variance must be positive"));
        }
        if !interference_var.is_finite() || interference_var < 0.0 {
            return Err(Error::domain("interference variance must be nonnegative"));
        }
        if !activity_prob.is_finite() || !(0.0..=1.0).contains(&activity_prob) {
            return Err(Error::domain("activity probability must lie in [0, 1]"));
        }
        let ctx = Self {
            gm,
            geom,
            pilot_power,
            noise_var,
            interference_var,
            activity_prob,
        };
        if ctx.training_noise_var() <= 0.0 {
            return Err(Error::domain("effective training noise variance must be positive"));
        }
        Ok(ctx)
    }

    /// σ_n² + ρ σ_sp², the activity-averaged pilot observation noise.
    pub fn training_noise_var(&self) -> f64 {
        self.noise_var + self.activity_prob * self.interference_var
    }

    pub fn with_pilot_power(mut self, pilot_power: f64) -> Result<Self> {
        if !pilot_power.is_finite() || pilot_power < 0.0 {
            return Err(Error::domain("pilot power must be nonnegative"));
        }
        self.pilot_power = pilot_power;
        Ok(self)
    }
}

/// Canonical-factorization constants of the pilot observation spectrum
/// r_e · L L* = P_t S_h(e^{jw/TB})/TB + σ_n² + ρσ_sp², with
/// L = (1 − v e^{−jw/TB}) / (1 − α e^{−jw/TB}).
#[derive(Debug, Clone, Copy)]
pub struct FactorizationConstants {
    pub c: f64,
    pub r_e: f64,
    pub v: f64,
}

/// Solve for (c, r_e, v) and verify the spectral identity on a 64-point
/// grid before returning.
pub fn factorization_constants(ctx: &EstimationContext) -> Result<FactorizationConstants> {
    let alpha = ctx.gm.alpha();
    let sig_h2 = ctx.gm.fading_var();
    let tb = ctx.geom.tb() as f64;
    let s = ctx.training_noise_var();
    let pt = ctx.pilot_power;

    let c = pt / tb * (1.0 - alpha * alpha) * sig_h2 + (1.0 + alpha * alpha) * s;
    let disc = c * c - 4.0 * alpha * alpha * s * s;
    if disc < 0.0 {
        // (1+α²)s ≥ 2αs for α ∈ [0,1), so this cannot happen for valid inputs.
        return Err(Error::numeric(format!(
            "negative factorization discriminant {disc}"
        )));
    }
    let r_e = 0.5 * (c + disc.sqrt());
    let v = alpha * s / r_e;

    // r_e |L|² must reproduce the observation spectrum everywhere.
    for i in 0..64 {
        let w = -PI + (i as f64 + 0.5) * (2.0 * PI / 64.0);
        let theta = w / tb;
        let num = 1.0 + v * v - 2.0 * v * theta.cos();
        let den = 1.0 + alpha * alpha - 2.0 * alpha * theta.cos();
        let lhs = r_e * num / den;
        let rhs = pt * psd_periodic(&ctx.gm, theta) / tb + s;
        if (lhs - rhs).abs() > 1e-8 * rhs.abs() {
            return Err(Error::numeric(format!(
                "spectral factorization identity failed at w = {w}: {lhs} vs {rhs}"
            )));
        }
    }

    Ok(FactorizationConstants { c, r_e, v })
}

/// Quadrature tolerance scaled so the error-variance result is good to
/// ~1e−10 after the P_t/π prefactor.
fn mmse_quad_tol(pt: f64) -> f64 {
    1e-10 * PI / pt.max(1.0)
}

/// Noncausal Wiener-filter error variance in the no-aliasing regime:
/// σ_h̃² = σ_h² − (P_t/2π) ∫_{−π/TB}^{π/TB} S_h² / (P_t S_h + TB(σ_n²+ρσ_sp²)) dw.
pub fn noncausal_mmse(ctx: &EstimationContext) -> Result<f64> {
    let sig_h2 = ctx.gm.fading_var();
    let pt = ctx.pilot_power;
    if pt == 0.0 {
        return Ok(sig_h2);
    }
    let tb = ctx.geom.tb() as f64;
    let s = ctx.training_noise_var();
    // Even integrand, sharply peaked at w = 0 for α near 1: integrate the
    // half interval starting at the peak.
    let gm = ctx.gm;
    let reduction = quad::integrate(
        |w| {
            let sh = psd_periodic(&gm, w);
            sh * sh / (pt * sh + tb * s)
        },
        0.0,
        PI / tb,
        mmse_quad_tol(pt),
    )?;
    Ok((sig_h2 - pt / PI * reduction).clamp(0.0, sig_h2))
}

/// Closed-form causal penalty on top of the noncausal error variance.
///
/// The anti-causal part of S_h(e^{jw/TB})/L*(e^{jw}) is
/// K e^{jw/TB} / (1 − v e^{jw/TB}) with K = (1−α²)σ_h² v/(1−αv); its squared
/// magnitude integrates (over a full period of the factorization variable)
/// to K²/(1−v²), giving penalty = P_t K² / (r_e (TB)² (1−v²)).
fn causal_penalty(ctx: &EstimationContext, fac: &FactorizationConstants) -> f64 {
    let alpha = ctx.gm.alpha();
    let sig_h2 = ctx.gm.fading_var();
    let tb = ctx.geom.tb() as f64;
    let v = fac.v;
    if v == 0.0 || ctx.pilot_power == 0.0 {
        return 0.0;
    }
    let k = (1.0 - alpha * alpha) * sig_h2 * v / (1.0 - alpha * v);
    ctx.pilot_power * k * k / (fac.r_e * tb * tb * (1.0 - v * v))
}

/// Causal Wiener-filter error variance: the noncausal integral plus the
/// nonnegative canonical-factorization penalty.
pub fn causal_mmse(ctx: &EstimationContext) -> Result<f64> {
    let sig_h2 = ctx.gm.fading_var();
    if ctx.pilot_power == 0.0 {
        return Ok(sig_h2);
    }
    let nc = noncausal_mmse(ctx)?;
    let fac = factorization_constants(ctx)?;
    Ok((nc + causal_penalty(ctx, &fac)).min(sig_h2))
}

pub fn mmse(ctx: &EstimationContext, kind: EstimatorKind) -> Result<f64> {
    match kind {
        EstimatorKind::Noncausal => noncausal_mmse(ctx),
        EstimatorKind::Causal => causal_mmse(ctx),
    }
}

/// Exact per-offset noncausal error variance with aliasing:
/// σ_h̃²(m) = σ_h² − (P_t/2π) ∫_{−π}^{π} |S_{h,m}|² / (P_t S_{h,0} + σ_n²+ρσ_sp²) dw.
pub fn noncausal_mmse_per_m(ctx: &EstimationContext, m: usize) -> Result<f64> {
    let tb = ctx.geom.tb();
    if m >= tb {
        return Err(Error::domain(format!("offset m = {m} must be < TB = {tb}")));
    }
    per_m_core(ctx, tb, m)
}

pub(crate) fn per_m_core(ctx: &EstimationContext, tb: usize, m: usize) -> Result<f64> {
    let sig_h2 = ctx.gm.fading_var();
    let pt = ctx.pilot_power;
    if pt == 0.0 {
        return Ok(sig_h2);
    }
    let s = ctx.training_noise_var();
    let gm = ctx.gm;
    // |S_{h,m}|² is even in w (real cross-correlation), so fold to [0, π].
    let reduction = quad::integrate(
        |w| {
            let cross = undersampled_spectrum_tb(&gm, tb, m, w).expect("in-domain");
            let s0 = undersampled_spectrum_tb(&gm, tb, 0, w).expect("in-domain").re;
            cross.norm_sqr() / (pt * s0 + s)
        },
        0.0,
        PI,
        mmse_quad_tol(pt),
    )?;
    Ok((sig_h2 - pt / PI * reduction).clamp(0.0, sig_h2))
}

/// Orthogonality: the estimate variance is σ_ĥ² = σ_h² − σ_h̃².
pub fn estimate_variance(fading_var: f64, mmse: f64) -> Result<f64> {
    if !fading_var.is_finite() || !mmse.is_finite() {
        return Err(Error::domain("estimate_variance requires finite inputs"));
    }
    if mmse < 0.0 || mmse > fading_var {
        return Err(Error::domain(format!(
            "mmse = {mmse} outside [0, fading variance = {fading_var}]"
        )));
    }
    Ok(fading_var - mmse)
}

/// Autocorrelation model backing the FIR oracle's normal equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleChannelModel {
    /// Exact Gauss-Markov autocorrelation σ_h² α^{|τ|}.
    GaussMarkov,
    /// Autocorrelation of the process low-pass limited to the pilot Nyquist
    /// band [−π/TB, π/TB] — the sampling model under which the analytic
    /// no-aliasing error variances are derived. Under this model TB-spaced
    /// pilots critically sample the in-band component and the analytic
    /// formulas are the exact infinite-tap limits.
    Bandlimited,
}

/// How the oracle produces its number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// Solve the normal equations built from model autocorrelations.
    Analytic,
    /// Additionally simulate pilot observations on a generated sample path
    /// and measure the realized error variance of the solved filter.
    Empirical { seed: u64, n_blocks: usize },
}

/// Time-domain FIR Wiener oracle: the linear MMSE estimator of the fading
/// coefficient at data-symbol offset `m` from `n_taps` pilot observations
/// spaced TB samples apart (two-sided for `Noncausal`, past-only for
/// `Causal`), built from model autocorrelations and the activity-averaged
/// pilot noise, solved by Cholesky factorization.
///
/// Independent of the spectral-integral implementation path it validates:
/// only autocorrelations and dense linear algebra are used here.
pub fn fir_wiener_oracle(
    ctx: &EstimationContext,
    kind: EstimatorKind,
    n_taps: usize,
    m: usize,
    model: OracleChannelModel,
    mode: OracleMode,
) -> Result<f64> {
    if n_taps == 0 {
        return Err(Error::domain("oracle needs at least one tap"));
    }
    let tb = ctx.geom.tb();
    if m >= tb {
        return Err(Error::domain(format!("offset m = {m} must be < TB = {tb}")));
    }
    let sig_h2 = ctx.gm.fading_var();
    let pt = ctx.pilot_power;
    if pt == 0.0 {
        return Ok(sig_h2);
    }
    let s = ctx.training_noise_var();

    // Pilot block indices relative to the target's own block (pilot at 0,
    // target at +m). Past-only keeps every pilot at or before the block
    // start, which precedes the data symbol.
    let taps: Vec<i64> = match kind {
        EstimatorKind::Noncausal => {
            let lo = -((n_taps as i64 - 1) / 2);
            (lo..lo + n_taps as i64).collect()
        }
        EstimatorKind::Causal => (-(n_taps as i64 - 1)..=0).collect(),
    };

    let r = |tau: i64| -> f64 {
        match model {
            OracleChannelModel::GaussMarkov => autocorrelation(&ctx.gm, tau),
            OracleChannelModel::Bandlimited => bandlimited_autocorrelation(&ctx.gm, tb, tau),
        }
    };

    let n = taps.len();
    let mut matrix = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let val = pt * r(tb as i64 * (taps[i] - taps[j]));
            matrix[i * n + j] = val;
            matrix[j * n + i] = val;
        }
        matrix[i * n + i] += s;
    }
    let cross: Vec<f64> = taps
        .iter()
        .map(|&k| pt.sqrt() * r(m as i64 - tb as i64 * k))
        .collect();

    let weights = solve_spd(&mut matrix, &cross, n)?;
    let reduction: f64 = cross.iter().zip(&weights).map(|(p, w)| p * w).sum();
    let analytic = (sig_h2 - reduction).clamp(0.0, sig_h2);

    match mode {
        OracleMode::Analytic => Ok(analytic),
        OracleMode::Empirical { seed, n_blocks } => {
            if n_blocks == 0 {
                return Err(Error::domain("empirical oracle needs at least one block"));
            }
            Ok(empirical_error_variance(ctx, &taps, &weights, m, seed, n_blocks))
        }
    }
}

/// Band-limited autocorrelation r_bl(τ) = (1/2π) ∫_{−π/TB}^{π/TB} S_h e^{jwτ} dw,
/// via the geometric Fourier series of the Gauss-Markov PSD.
fn bandlimited_autocorrelation(gm: &GaussMarkov, tb: usize, tau: i64) -> f64 {
    let alpha = gm.alpha();
    let b = PI / tb as f64;
    // S_h(w) = σ_h² Σ_k α^{|k|} e^{−jkw}; band-limiting turns each harmonic
    // into a sinc sample. Cut the series where α^k is below 1e−18.
    let kmax = if alpha == 0.0 {
        0
    } else {
        ((-18.0 * std::f64::consts::LN_10) / alpha.ln()).ceil() as i64
    };
    let sinc = |n: f64| -> f64 {
        if n == 0.0 {
            b / PI
        } else {
            (n * b).sin() / (n * PI)
        }
    };
    let mut acc = sinc(-(tau as f64));
    for k in 1..=kmax {
        let ak = alpha.powi(k as i32);
        acc += ak * (sinc(k as f64 - tau as f64) + sinc(-(k as f64) - tau as f64));
    }
    gm.fading_var() * acc
}

/// Cholesky solve of the (symmetric positive definite) normal equations,
/// with one diagonal-loading retry if roundoff spoils positivity.
fn solve_spd(matrix: &mut [f64], rhs: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut attempt = matrix.to_vec();
    if let Some(sol) = cholesky_solve(&mut attempt, rhs, n) {
        return Ok(sol);
    }
    let trace: f64 = (0..n).map(|i| matrix[i * n + i]).sum();
    let load = 1e-12 * trace / n as f64;
    log::warn!("oracle normal equations not positive definite; retrying with diagonal loading {load:.3e}");
    for i in 0..n {
        matrix[i * n + i] += load;
    }
    cholesky_solve(matrix, rhs, n)
        .ok_or_else(|| Error::numeric("oracle normal equations singular even after regularization"))
}

fn cholesky_solve(a: &mut [f64], rhs: &[f64], n: usize) -> Option<Vec<f64>> {
    // In-place lower-triangular factor.
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 0.0 {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / d;
        }
    }
    // Forward then backward substitution.
    let mut y = rhs.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= a[i * n + k] * y[k];
        }
        y[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= a[k * n + i] * y[k];
        }
        y[i] /= a[i * n + i];
    }
    Some(y)
}

/// Apply the solved filter to simulated pilot observations on a true
/// Gauss-Markov path and measure the sample error variance at offset `m`.
fn empirical_error_variance(
    ctx: &EstimationContext,
    taps: &[i64],
    weights: &[f64],
    m: usize,
    seed: u64,
    n_blocks: usize,
) -> f64 {
    let tb = ctx.geom.tb();
    let span_lo = taps.first().copied().unwrap_or(0).min(0);
    let span_hi = taps.last().copied().unwrap_or(0).max(0);
    let lead = (-span_lo) as usize; // blocks of history needed before the first target
    let total_blocks = n_blocks + lead + span_hi as usize + 1;
    let path = generate_path(&ctx.gm, total_blocks * tb + m + 1, seed);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1); // observation noise independent of the path stream
    let s = ctx.training_noise_var();
    let sqrt_pt = ctx.pilot_power.sqrt();

    // Pilot observations at every block start.
    let observations: Vec<Complex64> = (0..total_blocks)
        .map(|l| sqrt_pt * path[l * tb] + complex_normal(&mut rng, s))
        .collect();

    let mut acc = 0.0;
    for block in lead..lead + n_blocks {
        let mut est = Complex64::new(0.0, 0.0);
        for (k, w) in taps.iter().zip(weights) {
            est += *w * observations[(block as i64 + k) as usize];
        }
        let truth = path[block * tb + m];
        acc += (truth - est).norm_sqr();
    }
    acc / n_blocks as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_ctx(pilot_power: f64) -> EstimationContext {
        let gm = GaussMarkov::new(0.99, 1.0).unwrap();
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        EstimationContext::new(gm, geom, pilot_power, 1.0, 1.0, 0.1).unwrap()
    }

    #[test]
    fn factorization_no_pilot_collapses() {
        // P_t = 0: c = (1+α²)s, r_e = s, v = α, so L = 1.
        let ctx = paper_ctx(0.0);
        let f = factorization_constants(&ctx).unwrap();
        let s = ctx.training_noise_var();
        assert!((f.c - (1.0 + 0.99 * 0.99) * s).abs() < 1e-12);
        assert!((f.r_e - s).abs() < 1e-9);
        assert!((f.v - 0.99).abs() < 1e-9);
    }

    #[test]
    fn factorization_white_channel_needs_no_whitening() {
        let gm = GaussMarkov::new(0.0, 1.0).unwrap();
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        let ctx = EstimationContext::new(gm, geom, 10.0, 1.0, 0.0, 0.0).unwrap();
        let f = factorization_constants(&ctx).unwrap();
        assert_eq!(f.v, 0.0);
        assert!((f.r_e - f.c).abs() < 1e-12);
        assert!((f.c - (10.0 / 50.0 + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn factorization_frozen_constants() {
        // α = 0.99, σ_h² = 1, TB = 50, P_t = 10, s = 1.
        let gm = GaussMarkov::new(0.99, 1.0).unwrap();
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        let ctx = EstimationContext::new(gm, geom, 10.0, 1.0, 0.0, 0.0).unwrap();
        let f = factorization_constants(&ctx).unwrap();
        assert!((f.c - 1.98408).abs() < 1e-12);
        assert!((f.r_e - 1.055_627_432_720_624_9).abs() < 1e-12);
        assert!((f.v - 0.937_830_876_039_772_8).abs() < 1e-12);
    }

    #[test]
    fn spectral_identity_on_dense_grid() {
        // The 64-point check runs inside factorization_constants; verify a
        // denser grid here at the paper parameters.
        let ctx = paper_ctx(10.0);
        let f = factorization_constants(&ctx).unwrap();
        let s = ctx.training_noise_var();
        let tb = 50.0;
        for i in 0..10_000 {
            let w = -PI + (i as f64 + 0.5) * (2.0 * PI / 10_000.0);
            let theta = w / tb;
            let lhs = f.r_e * (1.0 + f.v * f.v - 2.0 * f.v * theta.cos())
                / (1.0 + 0.99f64 * 0.99 - 2.0 * 0.99 * theta.cos());
            let rhs = 10.0 * psd_periodic(&ctx.gm, theta) / tb + s;
            assert!((lhs - rhs).abs() <= 1e-8 * rhs, "identity fails at {w}");
        }
    }

    #[test]
    fn mmse_no_pilot_no_information() {
        let ctx = paper_ctx(0.0);
        assert_eq!(noncausal_mmse(&ctx).unwrap(), 1.0);
        assert_eq!(causal_mmse(&ctx).unwrap(), 1.0);
        assert_eq!(noncausal_mmse_per_m(&ctx, 3).unwrap(), 1.0);
    }

    #[test]
    fn mmse_frozen_example_values() {
        // P_t = 20, σ_n² = 1, ρ = 0.1, σ_sp² = 1 → s = 1.1 (quadrature oracle).
        let ctx = paper_ctx(20.0);
        let nc = noncausal_mmse(&ctx).unwrap();
        let ca = causal_mmse(&ctx).unwrap();
        assert!((nc - 0.147_806_756_031_67).abs() < 1e-9, "noncausal {nc}");
        assert!((ca - 0.149_499_346_878_23).abs() < 1e-9, "causal {ca}");
    }

    #[test]
    fn mmse_monotone_in_pilot_power() {
        let mut prev_nc = f64::INFINITY;
        let mut prev_ca = f64::INFINITY;
        for &pt in &[0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
            let ctx = paper_ctx(pt);
            let nc = noncausal_mmse(&ctx).unwrap();
            let ca = causal_mmse(&ctx).unwrap();
            assert!(nc < prev_nc, "noncausal not decreasing at P_t = {pt}");
            assert!(ca < prev_ca, "causal not decreasing at P_t = {pt}");
            prev_nc = nc;
            prev_ca = ca;
        }
    }

    #[test]
    fn mmse_nondecreasing_in_interference() {
        let gm = GaussMarkov::new(0.99, 1.0).unwrap();
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        let mut prev = 0.0;
        for &ssp in &[0.0, 0.5, 1.0, 2.0, 5.0] {
            let ctx = EstimationContext::new(gm, geom, 10.0, 1.0, ssp, 0.4).unwrap();
            let nc = noncausal_mmse(&ctx).unwrap();
            assert!(nc >= prev);
            prev = nc;
        }
    }

    #[test]
    fn dominance_chain() {
        for &pt in &[0.1, 1.0, 10.0, 100.0, 1000.0] {
            let ctx = paper_ctx(pt);
            let nc = noncausal_mmse(&ctx).unwrap();
            let ca = causal_mmse(&ctx).unwrap();
            assert!(nc >= 0.0 && nc <= ca && ca <= 1.0, "chain fails at P_t = {pt}: {nc} vs {ca}");
        }
    }

    #[test]
    fn memoryless_channel_causal_equals_noncausal() {
        let gm = GaussMarkov::new(0.0, 1.0).unwrap();
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        let ctx = EstimationContext::new(gm, geom, 7.0, 1.0, 1.0, 0.3).unwrap();
        let nc = noncausal_mmse(&ctx).unwrap();
        let ca = causal_mmse(&ctx).unwrap();
        assert_eq!(nc, ca);
    }

    #[test]
    fn per_m_degenerate_tb_one_matches_flat() {
        // TB = 1 collapses the undersampling; compare the per-m core at
        // tb = 1, m = 0 with the flat integral evaluated at TB = 1. The
        // frame cannot host TB = 1, so drive the cores directly.
        let gm = GaussMarkov::new(0.8, 1.0).unwrap();
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        let ctx = EstimationContext::new(gm, geom, 4.0, 1.0, 0.5, 0.2).unwrap();
        let per = per_m_core(&ctx, 1, 0).unwrap();
        let s = ctx.training_noise_var();
        let flat = 1.0
            - 4.0 / PI
                * quad::integrate(
                    |w| {
                        let sh = psd_periodic(&gm, w);
                        sh * sh / (4.0 * sh + s)
                    },
                    0.0,
                    PI,
                    1e-12,
                )
                .unwrap();
        assert!((per - flat).abs() < 1e-9, "{per} vs {flat}");
    }

    #[test]
    fn per_m_symmetric_and_bounded_by_aliasing() {
        let ctx = paper_ctx(1.0);
        let flat = noncausal_mmse(&ctx).unwrap();
        let m1 = noncausal_mmse_per_m(&ctx, 1).unwrap();
        let m49 = noncausal_mmse_per_m(&ctx, 49).unwrap();
        assert!((m1 - m49).abs() < 1e-9, "symmetry: {m1} vs {m49}");
        let m25 = noncausal_mmse_per_m(&ctx, 25).unwrap();
        for v in [m1, m25, m49] {
            assert!((v - flat).abs() < 0.102, "per-m {v} too far from flat {flat}");
        }
    }

    #[test]
    fn estimate_variance_orthogonality() {
        assert_eq!(estimate_variance(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(estimate_variance(1.0, 0.0).unwrap(), 1.0);
        assert!((estimate_variance(1.0, 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!(estimate_variance(1.0, 1.2).is_err());
        assert!(estimate_variance(1.0, -0.1).is_err());
    }

    #[test]
    fn oracle_single_tap_closed_form() {
        // One pilot, offset m: MMSE = σ_h² (1 − α^{2m} P_t σ_h²/(P_t σ_h² + s)).
        let ctx = paper_ctx(1e9);
        for &m in &[1_usize, 5, 20] {
            let got = fir_wiener_oracle(
                &ctx,
                EstimatorKind::Causal,
                1,
                m,
                OracleChannelModel::GaussMarkov,
                OracleMode::Analytic,
            )
            .unwrap();
            let want = 1.0 - 0.99f64.powi(2 * m as i32) * 1e9 / (1e9 + 1.1);
            assert!((got - want).abs() < 1e-9, "m = {m}: {got} vs {want}");
        }
    }

    #[test]
    fn oracle_bandlimited_matches_noncausal_formula() {
        // The analytic noncausal variance is the infinite-tap limit of the
        // band-limited sampling problem; 501 taps converge geometrically.
        for &pt in &[1.0, 10.0] {
            let ctx = paper_ctx(pt);
            let formula = noncausal_mmse(&ctx).unwrap();
            let oracle = fir_wiener_oracle(
                &ctx,
                EstimatorKind::Noncausal,
                501,
                1,
                OracleChannelModel::Bandlimited,
                OracleMode::Analytic,
            )
            .unwrap();
            let rel = (oracle - formula).abs() / formula;
            assert!(rel < 1e-4, "P_t = {pt}: formula {formula}, oracle {oracle}");
        }
    }

    #[test]
    fn oracle_tap_convergence_is_monotone() {
        let ctx = paper_ctx(10.0);
        let formula = noncausal_mmse(&ctx).unwrap();
        let mut prev = f64::INFINITY;
        for &taps in &[11_usize, 51, 201, 501] {
            let oracle = fir_wiener_oracle(
                &ctx,
                EstimatorKind::Noncausal,
                taps,
                1,
                OracleChannelModel::Bandlimited,
                OracleMode::Analytic,
            )
            .unwrap();
            let err = (oracle - formula).abs();
            assert!(err <= prev, "error not shrinking at {taps} taps");
            prev = err;
        }
    }

    #[test]
    fn oracle_empirical_agrees_with_analytic() {
        // Exact-model filter measured on a simulated path; 20k blocks give
        // a few-percent Monte Carlo error.
        let ctx = paper_ctx(10.0);
        let analytic = fir_wiener_oracle(
            &ctx,
            EstimatorKind::Noncausal,
            21,
            5,
            OracleChannelModel::GaussMarkov,
            OracleMode::Analytic,
        )
        .unwrap();
        let empirical = fir_wiener_oracle(
            &ctx,
            EstimatorKind::Noncausal,
            21,
            5,
            OracleChannelModel::GaussMarkov,
            OracleMode::Empirical {
                seed: 99,
                n_blocks: 20_000,
            },
        )
        .unwrap();
        let rel = (empirical - analytic).abs() / analytic;
        assert!(rel < 0.05, "analytic {analytic} vs empirical {empirical}");
    }

    #[test]
    fn oracle_rejects_bad_inputs() {
        let ctx = paper_ctx(1.0);
        assert!(fir_wiener_oracle(
            &ctx,
            EstimatorKind::Causal,
            0,
            1,
            OracleChannelModel::GaussMarkov,
            OracleMode::Analytic
        )
        .is_err());
        assert!(fir_wiener_oracle(
            &ctx,
            EstimatorKind::Causal,
            5,
            50,
            OracleChannelModel::GaussMarkov,
            OracleMode::Analytic
        )
        .is_err());
    }
}
