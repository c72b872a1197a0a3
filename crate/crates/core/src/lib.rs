//! Achievable angles between sparse vectors after compression by a matrix
//! with the restricted isometry property.
//!
//! Given an isometry constant `delta` and the angle `theta` between two
//! vectors whose union support is within the RIP order, [`angle_interval`]
//! returns the exact range of angles their images can make. The
//! [`oracle`] module recomputes the same extremes by brute force over the
//! feasible set of compressed norms, [`ric`] collects the derived
//! isometry-constant formulas, and [`lab`] runs Monte Carlo checks with
//! Gaussian sensing matrices and orthogonal matching pursuit.

pub mod bounds;
pub mod envelope;
pub mod error;
pub mod lab;
pub mod oracle;
pub mod ric;

pub use bounds::{
    achievable_cos_range, alpha_max, alpha_min, analyze, angle_interval, branch_coverage,
    branch_hits, orthogonal_interval, polarization_cos_bound, AngleInterval, CosRange,
    IntervalReport, MaxCase, MinCase,
};
pub use envelope::{
    compute_envelope, is_feasible, normalize_scenario, DistanceEnvelope, FeasibleTriple,
    RipScenario,
};
pub use error::{Error, Result};
pub use lab::SensingConfig;
pub use nalgebra::{DMatrix, DVector};
pub use oracle::{oracle_extremes, OracleResult};
pub use ric::{
    algebraic_projected_ric, invert_algebraic_ric, invert_projected_ric, measurement_reduction,
    omp_ric_threshold, omp_ric_threshold_prior, projected_ric, reconstruction_error_bound,
    RicComparison,
};
