//! Fading-process models: Gauss-Markov PSD and autocorrelation, the
//! undersampled Doppler spectrum seen through TB-spaced pilots, aliasing
//! diagnostics, and seeded sample-path generation for the oracles.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::complex_normal;

const PI: f64 = std::f64::consts::PI;

/// First-order Gauss-Markov fading: h_k = α h_{k−1} + z_k, stationary with
/// variance σ_h². The innovation variance is (1−α²)σ_h², the unique choice
/// for which the stationary power matches the rational PSD used everywhere
/// else in the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussMarkov {
    alpha: f64,
    fading_var: f64,
}

impl GaussMarkov {
    /// α ∈ [0, 1) (α = 1 rejected: the PSD diverges), σ_h² > 0.
    pub fn new(alpha: f64, fading_var: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
            return Err(Error::domain(format!(
                "Gauss-Markov coefficient alpha = {alpha} must lie in [0, 1)"
            )));
        }
        if !fading_var.is_finite() || fading_var <= 0.0 {
            return Err(Error::domain(format!(
                "fading variance {fading_var} must be positive"
            )));
        }
        Ok(Self { alpha, fading_var })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn fading_var(&self) -> f64 {
        self.fading_var
    }
}

/// Frame timing: bandwidth B, block length T with one pilot per block, and
/// a sensing prefix of N seconds. Sampling at 1/B makes TB and NB symbol
/// counts; both must be integers and the block must leave room for the
/// pilot plus at least one data symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameGeometry {
    bandwidth_hz: f64,
    block_sec: f64,
    sensing_sec: f64,
    tb: usize,
    nb: usize,
}

impl FrameGeometry {
    pub fn new(bandwidth_hz: f64, block_sec: f64, sensing_sec: f64) -> Result<Self> {
        if !bandwidth_hz.is_finite() || bandwidth_hz <= 0.0 {
            return Err(Error::domain("bandwidth must be positive"));
        }
        if !block_sec.is_finite() || block_sec <= 0.0 {
            return Err(Error::domain("block length must be positive"));
        }
        if !sensing_sec.is_finite() || sensing_sec < 0.0 {
            return Err(Error::domain("sensing length must be nonnegative"));
        }
        let tb = integer_count(block_sec * bandwidth_hz, "T·B")?;
        let nb = integer_count(sensing_sec * bandwidth_hz, "N·B")?;
        if nb < 1 {
            return Err(Error::domain(
                "N·B must be a positive integer: sensing requires at least one sample",
            ));
        }
        if tb < nb + 2 {
            return Err(Error::domain(format!(
                "(T−N)·B = {} leaves no room for a pilot plus a data symbol",
                tb as i64 - nb as i64
            )));
        }
        Ok(Self {
            bandwidth_hz,
            block_sec,
            sensing_sec,
            tb,
            nb,
        })
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn block_sec(&self) -> f64 {
        self.block_sec
    }

    pub fn sensing_sec(&self) -> f64 {
        self.sensing_sec
    }

    /// Symbols per block, T·B.
    pub fn tb(&self) -> usize {
        self.tb
    }

    /// Sensing samples per block, N·B.
    pub fn nb(&self) -> usize {
        self.nb
    }

    /// Data symbols per block, (T−N)·B − 1.
    pub fn data_count(&self) -> usize {
        self.tb - self.nb - 1
    }
}

/// Round to a count, rejecting values that are not integral to within
/// 1e−9 relative. Silent rounding would corrupt the detector's degrees of
/// freedom.
fn integer_count(x: f64, what: &str) -> Result<usize> {
    let rounded = x.round();
    if (x - rounded).abs() > 1e-9 * rounded.abs().max(1.0) {
        return Err(Error::domain(format!("{what} = {x} is not an integer")));
    }
    if rounded < 0.0 || rounded > 1e9 {
        return Err(Error::domain(format!("{what} = {x} out of range")));
    }
    Ok(rounded as usize)
}

/// PSD of the Gauss-Markov process on the unit circle:
/// S_h(e^{jw}) = (1−α²)σ_h² / (1 + α² − 2α cos w), for w ∈ [−π, π].
pub fn psd(gm: &GaussMarkov, w: f64) -> Result<f64> {
    if !w.is_finite() || !(-PI..=PI).contains(&w) {
        return Err(Error::domain(format!("psd frequency {w} outside [−π, π]")));
    }
    Ok(psd_periodic(gm, w))
}

/// Same evaluation without the principal-interval check; the aliasing fold
/// needs the 2π-periodic extension.
pub(crate) fn psd_periodic(gm: &GaussMarkov, w: f64) -> f64 {
    let a = gm.alpha;
    (1.0 - a * a) * gm.fading_var / (1.0 + a * a - 2.0 * a * w.cos())
}

/// Autocorrelation r_h[m] = σ_h² α^{|m|}.
pub fn autocorrelation(gm: &GaussMarkov, lag: i64) -> f64 {
    gm.fading_var * gm.alpha.powi(lag.unsigned_abs().min(i32::MAX as u64) as i32)
}

/// Undersampled Doppler spectrum at symbol offset m:
/// S_{h,m}(e^{jw}) = (1/TB) Σ_{i=0}^{TB−1} e^{jm(w−2iπ)/TB} S_h(e^{j(w−2iπ)/TB}).
///
/// For m = 0 this is the (real, nonnegative) spectrum of the pilot-position
/// subsequence; for other offsets it is the cross-spectrum between the data
/// symbol and the pilots, and the aliasing folds no longer add coherently.
pub fn undersampled_spectrum(
    gm: &GaussMarkov,
    geom: &FrameGeometry,
    m: usize,
    w: f64,
) -> Result<Complex64> {
    undersampled_spectrum_tb(gm, geom.tb(), m, w)
}

/// Raw-count core of [`undersampled_spectrum`]; also covers the degenerate
/// TB = 1 reduction that a valid frame cannot host.
pub(crate) fn undersampled_spectrum_tb(
    gm: &GaussMarkov,
    tb: usize,
    m: usize,
    w: f64,
) -> Result<Complex64> {
    if tb == 0 {
        return Err(Error::domain("undersampling factor TB must be positive"));
    }
    if m >= tb {
        return Err(Error::domain(format!(
            "symbol offset m = {m} must be < TB = {tb}"
        )));
    }
    if !w.is_finite() || !(-PI..=PI).contains(&w) {
        return Err(Error::domain(format!(
            "undersampled spectrum frequency {w} outside [−π, π]"
        )));
    }
    let tbf = tb as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..tb {
        let theta = (w - 2.0 * PI * i as f64) / tbf;
        let phase = Complex64::from_polar(1.0, m as f64 * theta);
        acc += phase * psd_periodic(gm, theta);
    }
    Ok(acc / tbf)
}

/// Fraction of the fading power inside [−b, b]:
/// (1/2π) ∫_{−b}^{b} S_h dw / σ_h², by adaptive quadrature.
pub fn band_power_fraction(gm: &GaussMarkov, band_halfwidth: f64) -> Result<f64> {
    if !band_halfwidth.is_finite() || band_halfwidth <= 0.0 || band_halfwidth > PI {
        return Err(Error::domain(format!(
            "band halfwidth {band_halfwidth} must lie in (0, π]"
        )));
    }
    let integral = quad::integrate(|w| psd_periodic(gm, w), 0.0, band_halfwidth, 1e-10)?;
    Ok((integral / (PI * gm.fading_var)).min(1.0))
}

/// Stationary sample path of length n: h_0 ~ CN(0, σ_h²), innovations
/// CN(0, (1−α²)σ_h²). Deterministic for a fixed seed.
pub fn generate_path(gm: &GaussMarkov, n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = Vec::with_capacity(n);
    if n == 0 {
        return path;
    }
    let alpha = gm.alpha;
    let innovation_var = (1.0 - alpha * alpha) * gm.fading_var;
    let mut h = complex_normal(&mut rng, gm.fading_var);
    path.push(h);
    for _ in 1..n {
        h = alpha * h + complex_normal(&mut rng, innovation_var);
        path.push(h);
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gm(alpha: f64) -> GaussMarkov {
        GaussMarkov::new(alpha, 1.0).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_params() {
        assert!(GaussMarkov::new(1.0, 1.0).is_err());
        assert!(GaussMarkov::new(-0.1, 1.0).is_err());
        assert!(GaussMarkov::new(0.5, 0.0).is_err());
        assert!(GaussMarkov::new(0.5, -1.0).is_err());
    }

    #[test]
    fn psd_white_process_is_flat() {
        let g = gm(0.0);
        for &w in &[-PI, -1.0, 0.0, 0.3, PI] {
            assert!((psd(&g, w).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn psd_peak_value() {
        // (1−0.99²)/(1−0.99)² = 199
        let g = gm(0.99);
        assert!((psd(&g, 0.0).unwrap() - 199.0).abs() < 1e-9);
    }

    #[test]
    fn psd_even_and_in_domain_only() {
        let g = gm(0.7);
        for i in 1..10 {
            let w = i as f64 * 0.3;
            assert!((psd(&g, w).unwrap() - psd(&g, -w).unwrap()).abs() < 1e-15);
        }
        assert!(psd(&g, 3.2).is_err());
        assert!(psd(&g, f64::NAN).is_err());
    }

    #[test]
    fn psd_integrates_to_total_power() {
        // (1/2π) ∫ S_h dw = σ_h², i.e. band fraction at b = π is 1.
        for &a in &[0.0, 0.5, 0.9, 0.99] {
            let g = GaussMarkov::new(a, 2.3).unwrap();
            let frac = band_power_fraction(&g, PI).unwrap();
            assert!((frac - 1.0).abs() < 1e-8, "alpha={a}: {frac}");
        }
    }

    #[test]
    fn autocorrelation_closed_form() {
        let g = gm(0.99);
        assert!((autocorrelation(&g, 0) - 1.0).abs() < 1e-15);
        assert!((autocorrelation(&g, 50) - 0.605_006_067_137_536_7).abs() < 1e-12);
        assert!((autocorrelation(&g, -50) - autocorrelation(&g, 50)).abs() < 1e-15);
    }

    #[test]
    fn autocorrelation_inverse_transform() {
        // r_h[m] = (1/2π) ∫ S_h(w) cos(mw) dw, checked by quadrature.
        let g = gm(0.9);
        for &m in &[1_i64, 5, 10] {
            let integral = quad::integrate(
                |w| psd_periodic(&g, w) * (m as f64 * w).cos(),
                0.0,
                PI,
                1e-11,
            )
            .unwrap();
            let r = integral / PI;
            assert!(
                (r - autocorrelation(&g, m)).abs() < 1e-9,
                "lag {m}: {r} vs {}",
                autocorrelation(&g, m)
            );
        }
    }

    #[test]
    fn frame_geometry_paper_values() {
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        assert_eq!(geom.tb(), 50);
        assert_eq!(geom.nb(), 10);
        assert_eq!(geom.data_count(), 39);
    }

    #[test]
    fn frame_geometry_rejections() {
        assert!(FrameGeometry::new(99.0, 0.5, 0.1).is_err()); // TB = 49.5
        assert!(FrameGeometry::new(100.0, 0.5, 0.0).is_err()); // NB = 0
        assert!(FrameGeometry::new(100.0, 0.11, 0.1).is_err()); // no data room
    }

    #[test]
    fn undersampled_reduces_at_tb_one() {
        // TB = 1: single fold term, S_{h,0} = S_h exactly.
        let g = gm(0.8);
        for &w in &[-2.0, 0.0, 0.7, PI] {
            let s = undersampled_spectrum_tb(&g, 1, 0, w).unwrap();
            assert!((s.re - psd(&g, w).unwrap()).abs() < 1e-14);
            assert!(s.im.abs() < 1e-15);
        }
    }

    #[test]
    fn undersampled_matches_decimated_autocorrelation() {
        // S_{h,m}(e^{jw}) is the DTFT of r_h[TB·k + m]; truncated sum oracle.
        let g = gm(0.99);
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        for &(m, w) in &[(0_usize, 0.0_f64), (0, 1.3), (7, 0.4), (25, -2.0)] {
            let s = undersampled_spectrum(&g, &geom, m, w).unwrap();
            let mut direct = Complex64::new(0.0, 0.0);
            for k in -2000_i64..=2000 {
                let r = autocorrelation(&g, 50 * k + m as i64);
                direct += Complex64::from_polar(r, -(w * k as f64));
            }
            assert!(
                (s - direct).norm() < 1e-9,
                "m={m}, w={w}: {s} vs {direct}"
            );
        }
    }

    #[test]
    fn undersampled_m0_is_real_nonnegative() {
        let g = gm(0.99);
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        for i in 0..=20 {
            let w = -PI + i as f64 * (2.0 * PI / 20.0);
            let s = undersampled_spectrum(&g, &geom, 0, w).unwrap();
            assert!(s.im.abs() < 1e-12, "imag at {w}: {}", s.im);
            assert!(s.re >= 0.0);
        }
    }

    #[test]
    fn undersampled_m0_frozen_value() {
        // DTFT of the decimated autocorrelation at w=0: (1+β)/(1−β), β = α^50.
        let g = gm(0.99);
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        let s = undersampled_spectrum(&g, &geom, 0, 0.0).unwrap();
        assert!(
            (s.re - 4.063_368_911_786_295).abs() < 1e-9,
            "S_h0(0) = {}",
            s.re
        );
    }

    #[test]
    fn undersampled_total_power_preserved() {
        // (1/2π) ∫ S_{h,0} dw = σ_h²: aliasing folds conserve power.
        let g = gm(0.95);
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        let integral = quad::integrate(
            |w| undersampled_spectrum(&g, &geom, 0, w).unwrap().re,
            0.0,
            PI,
            1e-10,
        )
        .unwrap();
        assert!((integral / PI - 1.0).abs() < 1e-8);
    }

    #[test]
    fn undersampled_domain_errors() {
        let g = gm(0.9);
        let geom = FrameGeometry::new(100.0, 0.5, 0.1).unwrap();
        assert!(undersampled_spectrum(&g, &geom, 50, 0.0).is_err());
        assert!(undersampled_spectrum(&g, &geom, 0, 4.0).is_err());
    }

    #[test]
    fn band_power_paper_claims() {
        // More than 90% of the power in [−π/49, π/49] at α = 0.99 and in
        // [−π/9, π/9] at α = 0.95.
        let frac99 = band_power_fraction(&gm(0.99), PI / 49.0).unwrap();
        assert!(frac99 > 0.90, "alpha=0.99: {frac99}");
        assert!((frac99 - 0.901_045_183_089_48).abs() < 1e-6);
        let frac95 = band_power_fraction(&gm(0.95), PI / 9.0).unwrap();
        assert!(frac95 > 0.90, "alpha=0.95: {frac95}");
    }

    #[test]
    fn band_power_monotone_in_width() {
        let g = gm(0.99);
        let mut prev = 0.0;
        for i in 1..=20 {
            let b = PI * i as f64 / 20.0;
            let f = band_power_fraction(&g, b).unwrap();
            assert!(f >= prev);
            prev = f;
        }
    }

    #[test]
    fn path_is_deterministic_per_seed() {
        let g = gm(0.9);
        let a = generate_path(&g, 100, 7);
        let b = generate_path(&g, 100, 7);
        let c = generate_path(&g, 100, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn path_statistics_match_model() {
        let g = gm(0.9);
        let n = 1_000_000;
        let path = generate_path(&g, n, 2024);
        let var: f64 = path.iter().map(|h| h.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.01, "sample variance {var}");
        let lag1: f64 = path
            .windows(2)
            .map(|w| (w[1] * w[0].conj()).re)
            .sum::<f64>()
            / (n - 1) as f64;
        assert!((lag1 / var - 0.9).abs() < 0.005, "lag-1 correlation {lag1}");
        // lag-5 against α^5
        let lag5: f64 = (0..n - 5)
            .map(|i| (path[i + 5] * path[i].conj()).re)
            .sum::<f64>()
            / (n - 5) as f64;
        assert!(
            (lag5 / var - 0.9f64.powi(5)).abs() < 0.01,
            "lag-5 correlation {lag5}"
        );
    }

    #[test]
    fn white_path_has_no_memory() {
        let g = gm(0.0);
        let n = 1_000_000;
        let path = generate_path(&g, n, 5);
        let lag1: f64 = path
            .windows(2)
            .map(|w| (w[1] * w[0].conj()).re)
            .sum::<f64>()
            / (n - 1) as f64;
        assert!(lag1.abs() < 0.005, "lag-1 of white path: {lag1}");
    }
}
