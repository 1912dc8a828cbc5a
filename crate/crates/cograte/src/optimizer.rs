//! Interference-constrained power allocation and detector-threshold search.
//!
//! The rate bound is strictly increasing in each transmit power, so the
//! optimum saturates the average interference constraint
//! P_t + [(T−N)B−1](P_d P_1 + (1−P_d) P_2) = T·I_avg. The search therefore
//! walks the constraint surface through a pilot fraction φ ∈ (0,1) and a
//! busy/idle split ψ ∈ [0,1]: a coarse grid followed by coordinate-wise
//! golden-section refinement, guarded by an exhaustive-grid oracle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{estimate_variance, mmse, EstimatorKind};
use crate::frame::SystemParams;
use crate::channel::FrameGeometry;
use crate::rate::{achievable_rate, achievable_rate_with_stats, PowerAllocation};
use crate::sensing::{roc_curve, OperatingPoint};

/// Cap on the secondary's average transmit power while primaries are
/// (believed) active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceBudget {
    i_avg: f64,
}

impl InterferenceBudget {
    pub fn new(i_avg: f64) -> Result<Self> {
        if !i_avg.is_finite() || i_avg <= 0.0 {
            return Err(Error::domain(format!(
                "interference cap {i_avg} must be positive and finite"
            )));
        }
        Ok(Self { i_avg })
    }

    pub fn i_avg(&self) -> f64 {
        self.i_avg
    }
}

/// Average SNR induced by a budget: SNR = I_avg / (B σ_n²).
pub fn snr_from_budget(
    budget: &InterferenceBudget,
    bandwidth_hz: f64,
    noise_var: f64,
) -> Result<(f64, f64)> {
    if !(bandwidth_hz > 0.0) || !(noise_var > 0.0) {
        return Err(Error::domain("SNR mapping needs positive bandwidth and noise"));
    }
    let snr = budget.i_avg / (bandwidth_hz * noise_var);
    Ok((snr, 10.0 * snr.log10()))
}

/// Inverse mapping for CLI sweeps: I_avg = 10^(dB/10) · B σ_n².
pub fn budget_from_snr_db(
    snr_db: f64,
    bandwidth_hz: f64,
    noise_var: f64,
) -> Result<InterferenceBudget> {
    if !snr_db.is_finite() {
        return Err(Error::domain("SNR must be finite"));
    }
    if !(bandwidth_hz > 0.0) || !(noise_var > 0.0) {
        return Err(Error::domain("SNR mapping needs positive bandwidth and noise"));
    }
    InterferenceBudget::new(10f64.powf(snr_db / 10.0) * bandwidth_hz * noise_var)
}

/// Check P_t + [(T−N)B−1](P_d P_1 + (1−P_d) P_2) ≤ T·I_avg;
/// slack is the unused budget (negative when infeasible).
pub fn feasible(
    alloc: &PowerAllocation,
    geom: &FrameGeometry,
    p_d: f64,
    budget: &InterferenceBudget,
) -> (bool, f64) {
    let used = alloc.pilot
        + geom.data_count() as f64 * (p_d * alloc.busy_data + (1.0 - p_d) * alloc.idle_data);
    let slack = geom.block_sec() * budget.i_avg - used;
    (slack >= -1e-9, slack)
}

/// One optimization outcome. `trace` records every (candidate, rate)
/// evaluation in deterministic order.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_alloc: PowerAllocation,
    pub best_op: OperatingPoint,
    pub best_rate: f64,
    pub constraint_slack: f64,
    pub trace: Vec<(PowerAllocation, f64)>,
}

/// Map (φ, ψ) onto the constraint boundary. When one detector outcome has
/// zero probability its data power drops out of the constraint; the whole
/// data budget then goes to the other state and ψ is ignored.
fn boundary_alloc(
    geom: &FrameGeometry,
    budget: &InterferenceBudget,
    p_d: f64,
    phi: f64,
    psi: f64,
) -> Result<PowerAllocation> {
    let total = geom.block_sec() * budget.i_avg;
    let pilot = phi * total;
    let data_budget = (1.0 - phi) * total;
    let d = geom.data_count() as f64;
    let w_busy = d * p_d;
    let w_idle = d * (1.0 - p_d);
    let (busy, idle) = if w_idle <= 0.0 {
        (data_budget / w_busy, 0.0)
    } else if w_busy <= 0.0 {
        (0.0, data_budget / w_idle)
    } else {
        (psi * data_budget / w_busy, (1.0 - psi) * data_budget / w_idle)
    };
    PowerAllocation::new(pilot, busy, idle)
}

const PHI_MIN: f64 = 1e-4;
const TIE_TOL: f64 = 1e-12;

struct Candidate {
    phi: f64,
    psi: f64,
    alloc: PowerAllocation,
    rate: f64,
}

/// Prefer higher rate; on a tie (within 1e−12) prefer the smaller pilot.
fn better(a: &Candidate, b: &Candidate) -> bool {
    if a.rate > b.rate + TIE_TOL {
        return true;
    }
    if b.rate > a.rate + TIE_TOL {
        return false;
    }
    a.alloc.pilot < b.alloc.pilot
}

/// Estimator statistics for a pilot power: (estimate variance, error variance).
fn stats_for(params: &SystemParams, kind: EstimatorKind, pilot: f64) -> Result<(f64, f64)> {
    let ctx = params.estimation_context(pilot)?;
    let m = mmse(&ctx, kind)?;
    let e = estimate_variance(params.gm.fading_var(), m)?;
    Ok((e, m))
}

/// Maximize the rate bound over the constraint boundary: coarse
/// `grid_resolution`² sweep over (φ, ψ), then three rounds of
/// coordinate-wise golden-section refinement to 1e−6 relative.
pub fn optimize_powers(
    params: &SystemParams,
    op: &OperatingPoint,
    budget: &InterferenceBudget,
    kind: EstimatorKind,
    grid_resolution: usize,
) -> Result<OptimizationResult> {
    if grid_resolution < 8 {
        return Err(Error::domain("grid resolution must be at least 8"));
    }
    let res = grid_resolution;
    let phis: Vec<f64> = (0..res)
        .map(|i| PHI_MIN + (1.0 - 2.0 * PHI_MIN) * i as f64 / (res - 1) as f64)
        .collect();
    let psis: Vec<f64> = (0..res).map(|i| i as f64 / (res - 1) as f64).collect();

    // One quadrature per φ column, shared across the ψ row. Columns are
    // independent; the reduce below is order-deterministic.
    let columns: Vec<Result<Vec<Candidate>>> = phis
        .par_iter()
        .map(|&phi| {
            let (est, err) = stats_for(params, kind, phi * geom_total(params, budget))?;
            psis.iter()
                .map(|&psi| {
                    let alloc = boundary_alloc(&params.geom, budget, op.p_d, phi, psi)?;
                    let rb = achievable_rate_with_stats(params, &alloc, op, est, err)?;
                    Ok(Candidate {
                        phi,
                        psi,
                        alloc,
                        rate: rb.total,
                    })
                })
                .collect()
        })
        .collect();

    let mut trace = Vec::with_capacity(res * res);
    let mut best: Option<Candidate> = None;
    for column in columns {
        for cand in column? {
            trace.push((cand.alloc, cand.rate));
            if best.as_ref().map_or(true, |b| better(&cand, b)) {
                best = Some(cand);
            }
        }
    }
    let mut best = best.expect("grid is nonempty");

    // Coordinate-wise golden-section around the incumbent; every evaluation
    // is considered for the incumbent, so refinement never loses to the grid.
    let phi_step = (1.0 - 2.0 * PHI_MIN) / (res - 1) as f64;
    let psi_step = 1.0 / (res - 1) as f64;
    for _ in 0..3 {
        let psi_hold = best.psi;
        let lo = (best.phi - phi_step).max(PHI_MIN);
        let hi = (best.phi + phi_step).min(1.0 - PHI_MIN);
        golden_refine(
            lo,
            hi,
            &mut |phi| {
                let (est, err) = stats_for(params, kind, phi * geom_total(params, budget))?;
                let alloc = boundary_alloc(&params.geom, budget, op.p_d, phi, psi_hold)?;
                let rb = achievable_rate_with_stats(params, &alloc, op, est, err)?;
                Ok(Candidate {
                    phi,
                    psi: psi_hold,
                    alloc,
                    rate: rb.total,
                })
            },
            &mut best,
            &mut trace,
        )?;

        let phi_hold = best.phi;
        let (est, err) = stats_for(params, kind, phi_hold * geom_total(params, budget))?;
        let lo = (best.psi - psi_step).max(0.0);
        let hi = (best.psi + psi_step).min(1.0);
        golden_refine(
            lo,
            hi,
            &mut |psi| {
                let alloc = boundary_alloc(&params.geom, budget, op.p_d, phi_hold, psi)?;
                let rb = achievable_rate_with_stats(params, &alloc, op, est, err)?;
                Ok(Candidate {
                    phi: phi_hold,
                    psi,
                    alloc,
                    rate: rb.total,
                })
            },
            &mut best,
            &mut trace,
        )?;
    }

    // Reported rate is reproducible through the public evaluation path.
    let best_rate = achievable_rate(params, &best.alloc, op, kind)?.total;
    let (_, slack) = feasible(&best.alloc, &params.geom, op.p_d, budget);
    Ok(OptimizationResult {
        best_alloc: best.alloc,
        best_op: *op,
        best_rate,
        constraint_slack: slack,
        trace,
    })
}

fn geom_total(params: &SystemParams, budget: &InterferenceBudget) -> f64 {
    params.geom.block_sec() * budget.i_avg
}

/// Golden-section maximization on [lo, hi] to 1e−6 relative width,
/// folding every evaluation into the incumbent.
fn golden_refine(
    lo: f64,
    hi: f64,
    objective: &mut dyn FnMut(f64) -> Result<Candidate>,
    best: &mut Candidate,
    trace: &mut Vec<(PowerAllocation, f64)>,
) -> Result<()> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut a = lo;
    let mut b = hi;
    if b <= a {
        return Ok(());
    }
    let mut eval = |x: f64, best: &mut Candidate, trace: &mut Vec<_>| -> Result<f64> {
        let cand = objective(x)?;
        let rate = cand.rate;
        trace.push((cand.alloc, rate));
        if better(&cand, best) {
            *best = cand;
        }
        Ok(rate)
    };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1, best, trace)?;
    let mut f2 = eval(x2, best, trace)?;
    for _ in 0..200 {
        if (b - a) <= 1e-6 * b.abs().max(1.0) {
            break;
        }
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1, best, trace)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2, best, trace)?;
        }
    }
    Ok(())
}

/// Plain exhaustive boundary grid without refinement: the independent
/// soundness oracle for [`optimize_powers`].
pub fn exhaustive_boundary_best(
    params: &SystemParams,
    op: &OperatingPoint,
    budget: &InterferenceBudget,
    kind: EstimatorKind,
    resolution: usize,
) -> Result<(PowerAllocation, f64)> {
    if resolution < 2 {
        return Err(Error::domain("exhaustive grid needs at least 2 points"));
    }
    let mut best: Option<(PowerAllocation, f64)> = None;
    for i in 0..resolution {
        let phi = PHI_MIN + (1.0 - 2.0 * PHI_MIN) * i as f64 / (resolution - 1) as f64;
        for j in 0..resolution {
            let psi = j as f64 / (resolution - 1) as f64;
            let alloc = boundary_alloc(&params.geom, budget, op.p_d, phi, psi)?;
            let rate = achievable_rate(params, &alloc, op, kind)?.total;
            let take = match &best {
                None => true,
                Some((ba, br)) => {
                    rate > br + TIE_TOL || (rate > br - TIE_TOL && alloc.pilot < ba.pilot)
                }
            };
            if take {
                best = Some((alloc, rate));
            }
        }
    }
    Ok(best.expect("grid nonempty"))
}

/// One row of a detector-threshold sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub op: OperatingPoint,
    pub alloc: PowerAllocation,
    pub rate: f64,
    pub slack: f64,
}

/// Threshold sweep outcome: the full (P_d, P_f, rate) curve plus the
/// optimizer result at the winning threshold.
#[derive(Debug, Clone)]
pub struct OperatingPointSweep {
    pub curve: Vec<SweepEntry>,
    pub best_index: usize,
    pub best: OptimizationResult,
}

/// For each threshold: derive (P_f, P_d), optimize the powers, and keep the
/// λ that maximizes the optimized rate.
pub fn optimize_operating_point(
    params: &SystemParams,
    budget: &InterferenceBudget,
    kind: EstimatorKind,
    thresholds: &[f64],
    grid_resolution: usize,
) -> Result<OperatingPointSweep> {
    let cfg = params.sensing_config()?;
    let ops = roc_curve(&cfg, thresholds)?;
    let results: Vec<Result<SweepEntry>> = ops
        .par_iter()
        .map(|op| {
            let r = optimize_powers(params, op, budget, kind, grid_resolution)?;
            Ok(SweepEntry {
                op: *op,
                alloc: r.best_alloc,
                rate: r.best_rate,
                slack: r.constraint_slack,
            })
        })
        .collect();
    let mut curve = Vec::with_capacity(results.len());
    for r in results {
        curve.push(r?);
    }
    let mut best_index = 0;
    for (i, entry) in curve.iter().enumerate() {
        if entry.rate > curve[best_index].rate + TIE_TOL {
            best_index = i;
        }
    }
    let best = optimize_powers(params, &curve[best_index].op, budget, kind, grid_resolution)?;
    Ok(OperatingPointSweep {
        curve,
        best_index,
        best,
    })
}
