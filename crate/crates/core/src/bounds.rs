//! Closed-form extremes of the compressed angle `alpha = angle(Phi u, Phi v)`.
//!
//! The maximal angle is attained on the lower boundary of the feasible
//! region, where `|Phi(u - v)|^2 = d_max^2` and `|Phi(u + v)|^2 = dt_min^2`;
//! the minimal angle on the upper boundary (`d_min^2`, `dt_max^2`). On each
//! boundary curve the law of cosines reduces to
//! `cos alpha = (dt^2 - d^2) / (4 |DB| |DC|)` with `|DB|^2 + |DC|^2` fixed,
//! so the extremes sit either at the symmetric tangency point or at a corner
//! where one compressed norm hits `sqrt(1 - delta)` or `sqrt(1 + delta)`.
//!
//! Every evaluation records which case fired; see [`branch_coverage`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::envelope::{normalize_scenario, DistanceEnvelope, RipScenario};
use crate::error::Result;

/// Width of the band around each branch predicate that is resolved to a
/// fixed side. Both formulas agree on every boundary, so the choice only
/// affects which label is reported.
pub const BRANCH_BAND: f64 = 1e-12;

/// Which closed form produced `alpha_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaxCase {
    /// `dt_min^2 >= d_max^2`: equal compressed norms at the tangency point.
    Tangency,
    /// `dt_min^2 < d_max^2`, `dt_min^2 + d_max^2 <= 4`: one norm at `sqrt(1 - delta)`.
    LowerCorner,
    /// `dt_min^2 < d_max^2`, `dt_min^2 + d_max^2 > 4`: one norm at `sqrt(1 + delta)`.
    UpperCorner,
}

/// Which closed form produced `alpha_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinCase {
    /// `dt_max^2 < d_min^2`: equal compressed norms at the tangency point.
    /// Unreachable for folded angles; kept for completeness.
    Tangency,
    /// `dt_max^2 + d_min^2 < 4`: one norm at `sqrt(1 - delta)`.
    LowerCorner,
    /// `dt_max^2 + d_min^2 >= 4` and `1 + delta >= d_min^2`. The flag records
    /// whether `dt_min^2 + d_min^2 > 4` selected the second candidate.
    UpperCorner { floor_above_four: bool },
    /// `dt_max^2 + d_min^2 >= 4` and `1 + delta < d_min^2`.
    UpperCornerOnly,
}

impl MaxCase {
    pub fn label(self) -> &'static str {
        match self {
            MaxCase::Tangency => "T3.2",
            MaxCase::LowerCorner => "T3.4(1)",
            MaxCase::UpperCorner => "T3.4(2)",
        }
    }

    fn slot(self) -> usize {
        match self {
            MaxCase::Tangency => 0,
            MaxCase::LowerCorner => 1,
            MaxCase::UpperCorner => 2,
        }
    }
}

impl MinCase {
    pub fn label(self) -> &'static str {
        match self {
            MinCase::Tangency => "T4.2",
            MinCase::LowerCorner => "T4.4(1)",
            MinCase::UpperCorner { .. } => "T4.4(2)(a)",
            MinCase::UpperCornerOnly => "T4.4(2)(b)",
        }
    }

    fn slot(self) -> usize {
        match self {
            MinCase::Tangency => 3,
            MinCase::LowerCorner => 4,
            MinCase::UpperCorner {
                floor_above_four: true,
            } => 5,
            MinCase::UpperCorner {
                floor_above_four: false,
            } => 6,
            MinCase::UpperCornerOnly => 7,
        }
    }
}

impl fmt::Display for MaxCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl fmt::Display for MinCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

const SLOT_NAMES: [&str; 8] = [
    "T3.2",
    "T3.4(1)",
    "T3.4(2)",
    "T4.2",
    "T4.4(1)",
    "T4.4(2)(a)/wide",
    "T4.4(2)(a)/narrow",
    "T4.4(2)(b)",
];

static HITS: [AtomicU64; 8] = [const { AtomicU64::new(0) }; 8];

fn record(slot: usize) {
    HITS[slot].fetch_add(1, Ordering::Relaxed);
}

/// Process-wide count of how often each closed-form case has been evaluated
/// through [`alpha_max`], [`alpha_min`] or [`analyze`].
pub fn branch_coverage() -> Vec<(&'static str, u64)> {
    SLOT_NAMES
        .iter()
        .zip(HITS.iter())
        .map(|(name, hits)| (*name, hits.load(Ordering::Relaxed)))
        .collect()
}

/// Hit count for one coverage slot, by the name used in [`branch_coverage`].
pub fn branch_hits(name: &str) -> u64 {
    SLOT_NAMES
        .iter()
        .position(|n| *n == name)
        .map_or(0, |i| HITS[i].load(Ordering::Relaxed))
}

/// `4 sqrt(r) sqrt(sum/2 - r)`: four times the product of the two compressed
/// norms at a corner where one squared norm equals `r`.
fn corner_product(r: f64, sum: f64) -> f64 {
    4.0 * r.sqrt() * (sum / 2.0 - r).max(0.0).sqrt()
}

/// Cosine of the maximal angle, before the final `acos`.
pub(crate) fn max_cos(env: &DistanceEnvelope, delta: f64) -> (f64, MaxCase) {
    let diff = env.dt_min_sq - env.d_max_sq;
    let sum = env.dt_min_sq + env.d_max_sq;
    if diff >= -BRANCH_BAND {
        (diff / sum, MaxCase::Tangency)
    } else if sum <= 4.0 + BRANCH_BAND {
        let c = diff / corner_product(1.0 - delta, sum);
        (c.max(-1.0), MaxCase::LowerCorner)
    } else {
        let c = diff / corner_product(1.0 + delta, sum);
        (c.max(-1.0), MaxCase::UpperCorner)
    }
}

/// Cosine of the minimal angle, before the final `acos`.
pub(crate) fn min_cos(env: &DistanceEnvelope, delta: f64) -> (f64, MinCase) {
    let diff = env.dt_max_sq - env.d_min_sq;
    let sum = env.dt_max_sq + env.d_min_sq;
    if diff < -BRANCH_BAND {
        return (diff / sum, MinCase::Tangency);
    }
    if sum < 4.0 - BRANCH_BAND {
        let c = diff / corner_product(1.0 - delta, sum);
        return (c.min(1.0), MinCase::LowerCorner);
    }
    let upper = diff / corner_product(1.0 + delta, sum);
    if (1.0 + delta) - env.d_min_sq >= -BRANCH_BAND {
        let floor_sum = env.dt_min_sq + env.d_min_sq;
        let floor_above_four = floor_sum > 4.0;
        let second = if floor_above_four {
            (env.dt_min_sq - env.d_min_sq) / corner_product(1.0 + delta, floor_sum)
        } else {
            (2.0 - env.d_min_sq) / (2.0 * (1.0 + delta).sqrt() * (1.0 - delta).sqrt())
        };
        (
            upper.max(second).min(1.0),
            MinCase::UpperCorner { floor_above_four },
        )
    } else {
        (upper.min(1.0), MinCase::UpperCornerOnly)
    }
}

fn safe_acos(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos()
}

/// Maximal achievable compressed angle for a folded scenario, with the case used.
pub fn alpha_max_detail(scenario: &RipScenario) -> (f64, MaxCase) {
    let (c, case) = max_cos(&scenario.envelope(), scenario.delta());
    record(case.slot());
    (safe_acos(c), case)
}

/// Minimal achievable compressed angle for a folded scenario, with the case used.
pub fn alpha_min_detail(scenario: &RipScenario) -> (f64, MinCase) {
    let (c, case) = min_cos(&scenario.envelope(), scenario.delta());
    record(case.slot());
    (safe_acos(c), case)
}

/// Maximal achievable compressed angle for the folded angle `scenario.theta()`.
pub fn alpha_max(scenario: &RipScenario) -> f64 {
    alpha_max_detail(scenario).0
}

/// Minimal achievable compressed angle for the folded angle `scenario.theta()`.
pub fn alpha_min(scenario: &RipScenario) -> f64 {
    alpha_min_detail(scenario).0
}

/// Range of achievable compressed angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleInterval {
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl AngleInterval {
    pub fn contains(&self, alpha: f64, tol: f64) -> bool {
        alpha >= self.alpha_min - tol && alpha <= self.alpha_max + tol
    }

    pub fn width(&self) -> f64 {
        self.alpha_max - self.alpha_min
    }
}

/// An interval together with the scenario and closed-form cases behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalReport {
    pub scenario: RipScenario,
    pub interval: AngleInterval,
    pub max_case: MaxCase,
    pub min_case: MinCase,
}

impl IntervalReport {
    /// `"<min label>/<max label>"`, e.g. `T4.4(2)(a)/T3.4(1)`.
    pub fn branch_label(&self) -> String {
        format!("{}/{}", self.min_case.label(), self.max_case.label())
    }
}

/// Folds, evaluates both closed forms and unfolds the result.
pub fn analyze(delta: f64, theta_input: f64) -> Result<IntervalReport> {
    let scenario = normalize_scenario(delta, theta_input)?;
    let (hi, max_case) = alpha_max_detail(&scenario);
    let (lo, min_case) = alpha_min_detail(&scenario);
    let interval = if scenario.flipped() {
        AngleInterval {
            alpha_min: PI - hi,
            alpha_max: PI - lo,
        }
    } else {
        AngleInterval {
            alpha_min: lo,
            alpha_max: hi,
        }
    };
    Ok(IntervalReport {
        scenario,
        interval,
        max_case,
        min_case,
    })
}

/// Achievable compressed angles for vectors at angle `theta_input` in `(0, pi)`.
pub fn angle_interval(delta: f64, theta_input: f64) -> Result<AngleInterval> {
    analyze(delta, theta_input).map(|r| r.interval)
}

/// Direct form for orthogonal inputs: `cos alpha` ranges over
/// `+-min{1, delta / sqrt(1 - delta^2)}`.
pub fn orthogonal_interval(delta: f64) -> Result<AngleInterval> {
    normalize_scenario(delta, FRAC_PI_2)?;
    let r = delta / (1.0 - delta * delta).sqrt();
    Ok(AngleInterval {
        alpha_min: safe_acos(r.min(1.0)),
        alpha_max: safe_acos((-r).max(-1.0)),
    })
}

/// Bound on `|cos alpha|` obtained from the polarization identity:
/// `min{(delta + |cos theta|) / (1 - delta), 1}`.
pub fn polarization_cos_bound(scenario: &RipScenario) -> f64 {
    ((scenario.delta() + scenario.theta_input().cos().abs()) / (1.0 - scenario.delta())).min(1.0)
}

/// Range of achievable `|cos alpha|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosRange {
    pub lo: f64,
    pub hi: f64,
}

impl CosRange {
    pub fn from_interval(interval: &AngleInterval) -> Self {
        let c_min = interval.alpha_min.cos().abs();
        let c_max = interval.alpha_max.cos().abs();
        if interval.alpha_max <= FRAC_PI_2 {
            CosRange {
                lo: c_max,
                hi: c_min,
            }
        } else if interval.alpha_min >= FRAC_PI_2 {
            CosRange {
                lo: c_min,
                hi: c_max,
            }
        } else {
            CosRange {
                lo: 0.0,
                hi: c_min.max(c_max),
            }
        }
    }
}

pub fn achievable_cos_range(delta: f64, theta_input: f64) -> Result<CosRange> {
    angle_interval(delta, theta_input).map(|i| CosRange::from_interval(&i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_3;

    fn scen(d: f64, t: f64) -> RipScenario {
        normalize_scenario(d, t).unwrap()
    }

    #[test]
    fn alpha_max_sixty_degrees() {
        let (a, case) = alpha_max_detail(&scen(0.3, FRAC_PI_3));
        assert_eq!(case, MaxCase::Tangency);
        assert_abs_diff_eq!(a, (0.8f64 / 3.4).acos(), epsilon = 1e-12);
        assert_abs_diff_eq!(a, 1.333_275, epsilon = 1e-6);
    }

    #[test]
    fn alpha_max_right_angle() {
        let (a, case) = alpha_max_detail(&scen(0.3, FRAC_PI_2));
        assert_eq!(case, MaxCase::LowerCorner);
        let expected = (-1.2 / (4.0 * 0.7f64.sqrt() * 1.3f64.sqrt())).acos();
        assert_abs_diff_eq!(a, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(a, 1.890_711, epsilon = 1e-6);
    }

    #[test]
    fn clamps_saturate_for_large_delta() {
        assert_abs_diff_eq!(alpha_max(&scen(0.8, FRAC_PI_2)), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(alpha_min(&scen(0.8, FRAC_PI_2)), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn alpha_min_right_angle() {
        let (a, case) = alpha_min_detail(&scen(0.3, FRAC_PI_2));
        // d_min^2 = 1.4 exceeds 1 + delta, so only the upper-corner term applies
        assert_eq!(case, MinCase::UpperCornerOnly);
        assert_abs_diff_eq!(a, (0.3f64 / 0.91f64.sqrt()).acos(), epsilon = 1e-12);
        assert_abs_diff_eq!(a, 1.250_882, epsilon = 1e-6);
    }

    #[test]
    fn tiny_delta_recovers_theta() {
        for theta in [0.1, FRAC_PI_3, 1.2, FRAC_PI_2, 2.5] {
            let i = angle_interval(1e-12, theta).unwrap();
            assert_abs_diff_eq!(i.alpha_min, theta, epsilon = 1e-5);
            assert_abs_diff_eq!(i.alpha_max, theta, epsilon = 1e-5);
        }
    }

    #[test]
    fn interval_examples() {
        let r = analyze(0.3, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(r.interval.alpha_min, 1.250_882, epsilon = 1e-6);
        assert_abs_diff_eq!(r.interval.alpha_max, 1.890_711, epsilon = 1e-6);
        assert_eq!(r.branch_label(), "T4.4(2)(b)/T3.4(1)");

        let folded = angle_interval(0.3, FRAC_PI_3).unwrap();
        let obtuse = angle_interval(0.3, 2.0 * PI / 3.0).unwrap();
        assert_abs_diff_eq!(obtuse.alpha_min, PI - folded.alpha_max, epsilon = 1e-12);
        assert_abs_diff_eq!(obtuse.alpha_max, PI - folded.alpha_min, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_examples() {
        let i = orthogonal_interval(0.5).unwrap();
        assert_abs_diff_eq!(i.alpha_min, 0.955_32, epsilon = 1e-5);
        assert_abs_diff_eq!(i.alpha_max, 2.186_28, epsilon = 1e-5);
        for d in [1.0 / 2f64.sqrt(), 0.75, 0.99] {
            let i = orthogonal_interval(d).unwrap();
            assert_abs_diff_eq!(i.alpha_min, 0.0, epsilon = 1e-7);
            assert_abs_diff_eq!(i.alpha_max, PI, epsilon = 1e-7);
        }
        let i = orthogonal_interval(1e-12).unwrap();
        assert_abs_diff_eq!(i.alpha_min, FRAC_PI_2, epsilon = 1e-11);
        assert_abs_diff_eq!(i.alpha_max, FRAC_PI_2, epsilon = 1e-11);
        assert!(orthogonal_interval(1.0).is_err());
    }

    #[test]
    fn polarization_examples() {
        assert_abs_diff_eq!(
            polarization_cos_bound(&scen(0.2, FRAC_PI_2)),
            0.25,
            epsilon = 1e-12
        );
        assert_eq!(polarization_cos_bound(&scen(0.3, FRAC_PI_3)), 1.0);
        assert_abs_diff_eq!(
            polarization_cos_bound(&scen(1e-12, FRAC_PI_3)),
            0.5,
            epsilon = 1e-11
        );
    }

    #[test]
    fn cos_range_examples() {
        let r = achievable_cos_range(0.3, FRAC_PI_2).unwrap();
        assert_eq!(r.lo, 0.0);
        assert_abs_diff_eq!(r.hi, 0.314_49, epsilon = 1e-5);

        let r = achievable_cos_range(1e-12, FRAC_PI_3).unwrap();
        assert_abs_diff_eq!(r.lo, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(r.hi, 0.5, epsilon = 1e-6);

        let r = achievable_cos_range(0.2, FRAC_PI_2).unwrap();
        assert_eq!(r.lo, 0.0);
        assert_abs_diff_eq!(r.hi, 0.2 / 0.96f64.sqrt(), epsilon = 1e-12);
        assert!(r.hi < 0.25);
    }

    #[test]
    fn cos_range_cases() {
        let acute = AngleInterval {
            alpha_min: 0.2,
            alpha_max: 1.0,
        };
        let r = CosRange::from_interval(&acute);
        assert_eq!((r.lo, r.hi), (1.0f64.cos(), 0.2f64.cos()));
        let obtuse = AngleInterval {
            alpha_min: 2.0,
            alpha_max: 3.0,
        };
        let r = CosRange::from_interval(&obtuse);
        assert_eq!((r.lo, r.hi), (2.0f64.cos().abs(), 3.0f64.cos().abs()));
    }

    #[test]
    fn tangency_formula_evaluated_verbatim() {
        // Synthetic envelope with dt_max^2 < d_min^2, outside the folded domain.
        let env = DistanceEnvelope {
            d_min_sq: 3.0,
            d_max_sq: 3.5,
            dt_min_sq: 0.5,
            dt_max_sq: 1.0,
        };
        let (c, case) = min_cos(&env, 0.1);
        assert_eq!(case, MinCase::Tangency);
        assert_abs_diff_eq!(c, -2.0 / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn remaining_cases_evaluated_verbatim() {
        // Envelopes chosen so each otherwise-unreached predicate fires.
        let env = DistanceEnvelope {
            d_min_sq: 0.5,
            d_max_sq: 3.0,
            dt_min_sq: 2.0,
            dt_max_sq: 2.5,
        };
        let (c, case) = max_cos(&env, 0.3);
        assert_eq!(case, MaxCase::UpperCorner);
        assert_abs_diff_eq!(
            c,
            -1.0 / (4.0 * 1.3f64.sqrt() * 1.2f64.sqrt()),
            epsilon = 1e-15
        );

        let (c, case) = min_cos(&env, 0.3);
        assert_eq!(case, MinCase::LowerCorner);
        assert_abs_diff_eq!(
            c,
            2.0 / (4.0 * 0.7f64.sqrt() * 0.8f64.sqrt()),
            epsilon = 1e-15
        );

        let env = DistanceEnvelope {
            d_min_sq: 1.5,
            d_max_sq: 2.0,
            dt_min_sq: 2.6,
            dt_max_sq: 3.0,
        };
        let (c, case) = min_cos(&env, 0.6);
        assert_eq!(
            case,
            MinCase::UpperCorner {
                floor_above_four: true
            }
        );
        let first = 1.5 / (4.0 * 1.6f64.sqrt() * 0.65f64.sqrt());
        let second = 1.1 / (4.0 * 1.6f64.sqrt() * 0.45f64.sqrt());
        assert_abs_diff_eq!(c, first.max(second).min(1.0), epsilon = 1e-15);

        let (_, case) = min_cos(&env, 0.1);
        assert_eq!(case, MinCase::UpperCornerOnly);
    }

    #[test]
    fn reduction_to_orthogonal_form() {
        for i in 1..1000 {
            let d = i as f64 / 1000.0;
            let a = angle_interval(d, FRAC_PI_2).unwrap();
            let b = orthogonal_interval(d).unwrap();
            assert!((a.alpha_min - b.alpha_min).abs() <= 1e-12, "delta {d}");
            assert!((a.alpha_max - b.alpha_max).abs() <= 1e-12, "delta {d}");
        }
    }

    proptest! {
        #[test]
        fn interval_contains_theta(delta in 1e-6..0.999f64, theta in 1e-4..PI - 1e-4) {
            let i = angle_interval(delta, theta).unwrap();
            prop_assert!(0.0 <= i.alpha_min && i.alpha_min <= i.alpha_max && i.alpha_max <= PI);
            prop_assert!(i.contains(theta, 1e-9));
        }

        #[test]
        fn interval_monotone_in_delta(d1 in 1e-4..0.99f64, step in 0.0..0.3f64, theta in 1e-3..PI - 1e-3) {
            let d2 = (d1 + step).min(0.995);
            let a = angle_interval(d1, theta).unwrap();
            let b = angle_interval(d2, theta).unwrap();
            prop_assert!(b.alpha_max >= a.alpha_max - 1e-12);
            prop_assert!(b.alpha_min <= a.alpha_min + 1e-12);
        }

        #[test]
        fn tighter_than_polarization(delta in 1e-4..0.99f64, theta in 1e-3..PI - 1e-3) {
            let s = normalize_scenario(delta, theta).unwrap();
            let r = achievable_cos_range(delta, theta).unwrap();
            prop_assert!(r.hi <= polarization_cos_bound(&s) + 1e-12);
            prop_assert!(0.0 <= r.lo && r.lo <= r.hi && r.hi <= 1.0);
        }

        #[test]
        fn right_angle_symmetry(delta in 1e-6..0.999f64) {
            let i = angle_interval(delta, FRAC_PI_2).unwrap();
            prop_assert!((i.alpha_max - (PI - i.alpha_min)).abs() < 1e-12);
        }
    }
}
