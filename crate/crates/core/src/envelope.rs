//! RIP scenarios, the squared-distance envelope they induce, and the
//! feasibility predicate for compressed magnitude triples.
//!
//! With unit-norm `u`, `v` at angle `theta` and a sensing matrix with
//! restricted isometry constant `delta`, the compressed quantities obey
//!
//! ```text
//! (1 - delta)            <= |Phi u|^2, |Phi v|^2 <= (1 + delta)
//! 2(1 - delta)(1 - cos)  <= |Phi (u - v)|^2      <= 2(1 + delta)(1 - cos)
//! 2(1 - delta)(1 + cos)  <= |Phi (u + v)|^2      <= 2(1 + delta)(1 + cos)
//! ```
//!
//! and `|Phi (u + v)|^2 = 2(a + b) - d^2` by the parallelogram law, so a
//! compressed configuration is described by the triple `(a, b, d^2)` alone.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Result};

/// Absolute slack admitted on squared quantities when testing membership.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// One analysis instance: an isometry constant and the angle between the
/// uncompressed vectors, folded into `(0, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipScenario {
    delta: f64,
    theta_input: f64,
    theta: f64,
    flipped: bool,
}

impl RipScenario {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The angle as supplied by the caller, in `(0, pi)`.
    pub fn theta_input(&self) -> f64 {
        self.theta_input
    }

    /// The folded angle in `(0, pi/2]`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// True when `theta_input > pi/2` and the supplement was substituted.
    /// Angle bounds computed on the folded scenario map back through
    /// `alpha -> pi - alpha` with the endpoints swapped.
    pub fn flipped(&self) -> bool {
        self.flipped
    }

    pub fn envelope(&self) -> DistanceEnvelope {
        compute_envelope(self)
    }
}

/// Validates `(delta, theta_input)` and folds obtuse angles onto their
/// supplement. `theta_input == pi/2` stays unflipped.
pub fn normalize_scenario(delta: f64, theta_input: f64) -> Result<RipScenario> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(
            "delta",
            format!("delta must be in (0,1), got {delta}"),
        ));
    }
    if !(theta_input > 0.0 && theta_input < PI) {
        return Err(domain(
            "theta",
            format!("theta must be in (0,pi), got {theta_input}"),
        ));
    }
    let flipped = theta_input > FRAC_PI_2;
    let theta = if flipped {
        PI - theta_input
    } else {
        theta_input
    };
    Ok(RipScenario {
        delta,
        theta_input,
        theta,
        flipped,
    })
}

/// Extremes of `|Phi(u - v)|^2` (`d_*`) and `|Phi(u + v)|^2` (`dt_*`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEnvelope {
    pub d_min_sq: f64,
    pub d_max_sq: f64,
    pub dt_min_sq: f64,
    pub dt_max_sq: f64,
}

impl DistanceEnvelope {
    /// Envelope for an arbitrary `delta` in `[0, 1)` and angle `theta`.
    ///
    /// Unlike [`compute_envelope`] this accepts `delta = 0`, where the
    /// envelope collapses onto the uncompressed geometry.
    pub fn for_angle(delta: f64, theta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&delta) {
            return Err(domain(
                "delta",
                format!("delta must be in [0,1), got {delta}"),
            ));
        }
        Ok(Self::from_cos(delta, theta.cos()))
    }

    fn from_cos(delta: f64, cos_theta: f64) -> Self {
        let lower = 1.0 - cos_theta;
        let upper = 1.0 + cos_theta;
        Self {
            d_min_sq: 2.0 * (1.0 - delta) * lower,
            d_max_sq: 2.0 * (1.0 + delta) * lower,
            dt_min_sq: 2.0 * (1.0 - delta) * upper,
            dt_max_sq: 2.0 * (1.0 + delta) * upper,
        }
    }
}

pub fn compute_envelope(scenario: &RipScenario) -> DistanceEnvelope {
    DistanceEnvelope::from_cos(scenario.delta, scenario.theta.cos())
}

/// A compressed configuration `(|Phi u|^2, |Phi v|^2, |Phi(u - v)|^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleTriple {
    pub a: f64,
    pub b: f64,
    pub d_sq: f64,
}

impl FeasibleTriple {
    pub fn new(a: f64, b: f64, d_sq: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(domain(
                "a",
                format!("squared norm must be positive, got {a}"),
            ));
        }
        if !(b > 0.0) {
            return Err(domain(
                "b",
                format!("squared norm must be positive, got {b}"),
            ));
        }
        if !(d_sq >= 0.0) {
            return Err(domain(
                "d_sq",
                format!("squared distance must be nonnegative, got {d_sq}"),
            ));
        }
        Ok(Self { a, b, d_sq })
    }

    /// `|Phi(u + v)|^2` by the parallelogram law.
    pub fn s_sq(&self) -> f64 {
        2.0 * (self.a + self.b) - self.d_sq
    }

    /// The three side lengths `sqrt(a)`, `sqrt(b)`, `sqrt(d_sq)` close a triangle.
    pub fn triangle_valid(&self) -> bool {
        let (ra, rb) = (self.a.sqrt(), self.b.sqrt());
        let lo = (ra - rb) * (ra - rb);
        let hi = (ra + rb) * (ra + rb);
        self.d_sq >= lo - FEASIBILITY_TOL && self.d_sq <= hi + FEASIBILITY_TOL
    }

    /// Law of cosines, clamped to `[-1, 1]`.
    pub fn cos_angle(&self) -> f64 {
        ((self.a + self.b - self.d_sq) / (2.0 * (self.a * self.b).sqrt())).clamp(-1.0, 1.0)
    }

    pub fn angle(&self) -> f64 {
        self.cos_angle().acos()
    }
}

fn within(x: f64, lo: f64, hi: f64) -> bool {
    x >= lo - FEASIBILITY_TOL && x <= hi + FEASIBILITY_TOL
}

/// Whether `triple` is consistent with every RIP constraint of `env`.
pub fn is_feasible(triple: &FeasibleTriple, env: &DistanceEnvelope, delta: f64) -> bool {
    let (lo, hi) = (1.0 - delta, 1.0 + delta);
    within(triple.a, lo, hi)
        && within(triple.b, lo, hi)
        && within(triple.d_sq, env.d_min_sq, env.d_max_sq)
        && within(triple.s_sq(), env.dt_min_sq, env.dt_max_sq)
        && triple.triangle_valid()
}

/// The identity-compressed triple `(1, 1, 2(1 - cos theta))`, always feasible.
pub fn nominal_triple(scenario: &RipScenario) -> FeasibleTriple {
    FeasibleTriple {
        a: 1.0,
        b: 1.0,
        d_sq: 2.0 * (1.0 - scenario.theta.cos()),
    }
}
