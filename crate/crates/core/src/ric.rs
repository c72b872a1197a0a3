//! Restricted isometry constants derived from the angle bounds.
//!
//! Projecting a known column subspace out of a sensing matrix with RIC
//! `delta` leaves an effective matrix `P Phi` whose RIC is at most
//! `min{1, delta + delta^2 / (1 + delta)}`, compared with the polarization
//! estimate `min{1, delta / (1 - delta)}`. The inversions and OMP thresholds
//! below follow from these two expressions.

use crate::error::{domain, Error, Result};

/// `sqrt(2) - 1`, the RIC ceiling for the stable-recovery error bound.
pub const STABLE_RECOVERY_RIC: f64 = std::f64::consts::SQRT_2 - 1.0;

fn check_unit_open(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(domain(name, format!("{name} must be in (0,1), got {x}")))
    }
}

/// RIC of `P Phi` from the angle bounds: `min{1, delta + delta^2/(1 + delta)}`.
pub fn projected_ric(delta: f64) -> Result<f64> {
    check_unit_open("delta", delta)?;
    Ok((delta + delta * delta / (1.0 + delta)).min(1.0))
}

/// The same constant assembled from the orthogonal angle bound: the worst
/// `|cos|^2` between compressed vectors with disjoint supports is
/// `min{1, delta^2 / (1 - delta^2)}`, and `1 - (1 - cos^2)(1 - delta)` is
/// the resulting lower isometry defect.
pub fn projected_ric_via_angle(delta: f64) -> Result<f64> {
    check_unit_open("delta", delta)?;
    let cos_sq = (delta * delta / (1.0 - delta * delta)).min(1.0);
    Ok((1.0 - (1.0 - cos_sq) * (1.0 - delta)).min(1.0))
}

/// RIC of `P Phi` from the polarization identity: `min{1, delta/(1 - delta)}`.
pub fn algebraic_projected_ric(delta: f64) -> Result<f64> {
    check_unit_open("delta", delta)?;
    Ok((delta / (1.0 - delta)).min(1.0))
}

/// Both projected constants for one `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicComparison {
    pub delta: f64,
    pub delta_bar: f64,
    pub delta_bar_a: f64,
}

impl RicComparison {
    pub fn new(delta: f64) -> Result<Self> {
        Ok(Self {
            delta,
            delta_bar: projected_ric(delta)?,
            delta_bar_a: algebraic_projected_ric(delta)?,
        })
    }
}

/// `4(1 + ric) eps / (1 - (sqrt(2) - 1) ric)`, valid for `ric < sqrt(2) - 1`.
pub fn reconstruction_error_bound(ric: f64, eps: f64) -> Result<f64> {
    if !(ric >= 0.0) {
        return Err(domain("ric", format!("ric must be nonnegative, got {ric}")));
    }
    if ric >= STABLE_RECOVERY_RIC {
        return Err(Error::StabilityCondition { ric });
    }
    if !(eps >= 0.0) {
        return Err(domain("eps", format!("eps must be nonnegative, got {eps}")));
    }
    Ok(4.0 * (1.0 + ric) * eps / (1.0 - STABLE_RECOVERY_RIC * ric))
}

/// Largest `delta` whose projected RIC stays at `tau`: the positive root of
/// `2 delta^2 + (1 - tau) delta - tau = 0`.
pub fn invert_projected_ric(tau: f64) -> Result<f64> {
    check_unit_open("tau", tau)?;
    Ok((tau - 1.0 + (tau * tau + 6.0 * tau + 1.0).sqrt()) / 4.0)
}

/// Largest `delta` whose algebraic projected RIC stays at `tau`.
pub fn invert_algebraic_ric(tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(domain("tau", format!("tau must be in (0,1], got {tau}")));
    }
    Ok(tau / (tau + 1.0))
}

/// Fractional saving in measurements, with `m` proportional to `1/delta^2`,
/// when sizing by the projected rather than the algebraic inversion.
pub fn measurement_reduction(tau: f64) -> Result<f64> {
    let alg = invert_algebraic_ric(tau)?;
    let new = invert_projected_ric(tau)?;
    Ok(1.0 - (alg / new).powi(2))
}

fn check_sparsity(k: usize) -> Result<f64> {
    if k == 0 {
        Err(domain("K", "sparsity level must be at least 1"))
    } else {
        Ok(k as f64)
    }
}

/// OMP recovery threshold from the projected RIC: the positive root of
/// `4 sqrt(K) delta^2 + (2 sqrt(K) - 1) delta - 1 = 0`.
pub fn omp_ric_threshold(k: usize) -> Result<f64> {
    let s = check_sparsity(k)?.sqrt();
    Ok((1.0 - 2.0 * s + (4.0 * s * s + 12.0 * s + 1.0).sqrt()) / (8.0 * s))
}

/// OMP recovery threshold from the polarization estimate: `1/(1 + sqrt(2K))`.
pub fn omp_ric_threshold_prior(k: usize) -> Result<f64> {
    let k = check_sparsity(k)?;
    Ok(1.0 / (1.0 + (2.0 * k).sqrt()))
}

/// Residual of the OMP threshold quadratic at `delta`.
pub fn omp_quadratic(k: usize, delta: f64) -> f64 {
    let s = (k as f64).sqrt();
    4.0 * s * delta * delta + (2.0 * s - 1.0) * delta - 1.0
}

/// RIC of a row-deleted sub-matrix whose parent has RIC `delta` on the
/// relevant order: the projected constant applies in place of `delta/(1 - delta)`.
pub fn democracy_ric(delta: f64) -> Result<f64> {
    projected_ric(delta)
}
