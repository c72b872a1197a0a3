use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain the formulas are defined on.
    #[error("{param} out of range: {reason}")]
    Domain { param: &'static str, reason: String },

    /// The brute-force search found no feasible grid point.
    #[error("internal consistency: feasible region is empty for delta={delta}, theta={theta}")]
    EmptyFeasibleRegion { delta: f64, theta: f64 },

    /// Exhaustive enumeration would visit more subsets than allowed.
    #[error("refusing to enumerate {count} supports (cap is {cap})")]
    EnumerationCap { count: u128, cap: u128 },

    /// A column submatrix does not have full column rank.
    #[error("column submatrix is rank deficient ({rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    /// Random construction kept producing a degenerate draw.
    #[error("degenerate random draw after {attempts} attempts")]
    DegenerateDraw { attempts: usize },

    /// The stable-recovery condition ric < sqrt(2) - 1 does not hold.
    #[error("stability condition violated: ric {ric} >= sqrt(2) - 1")]
    StabilityCondition { ric: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(param: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        param,
        reason: reason.into(),
    }
}
