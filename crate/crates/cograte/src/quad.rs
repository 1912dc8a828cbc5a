//! Adaptive Simpson quadrature for the smooth, periodic spectral integrands
//! used by the channel and estimation modules.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 60;

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Standard recursive Simpson with Richardson correction; integrands here
/// are smooth (rational trigonometric spectra), so failure to converge
/// indicates a caller bug rather than a hard integral.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("integration bounds must be finite"));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::domain("integration tolerance must be positive"));
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    step(&f, a, b, fa, fm, fb, whole, abs_tol, MAX_DEPTH)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::convergence(format!(
            "adaptive Simpson exceeded max depth on [{a}, {b}]"
        )));
    }
    let half_tol = 0.5 * tol;
    Ok(step(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
        + step(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12).unwrap();
        // ∫ x³−2x+1 over [−1,3] = [x⁴/4 − x² + x] = (81/4−9+3) − (1/4−1−1) = 16
        assert!((v - 16.0).abs() < 1e-10);
    }

    #[test]
    fn peaked_lorentzian() {
        // ∫_{-1}^{1} eps/(x²+eps²) dx = 2 atan(1/eps)
        let eps = 1e-3;
        let v = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, 1e-11).unwrap();
        let expect = 2.0 * (1.0 / eps).atan();
        assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(integrate(|x| x, 2.0, 2.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(integrate(|x| x, f64::NAN, 1.0, 1e-10).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
    }
}
