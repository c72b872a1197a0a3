//! Monte Carlo checks at desk scale: Gaussian sensing ensembles, sparse pairs
//! at a prescribed angle, per-support isometry constants, orthogonal
//! projections and orthogonal matching pursuit.
//!
//! Every trial draws from its own ChaCha stream keyed by `(seed, stream)`,
//! so reports are identical regardless of how trials are scheduled.

mod experiments;
mod matrix;
mod omp;
mod pairs;

pub use experiments::{
    certified_omp_experiment, containment_experiment, design_delta, measurement_size,
    omp_recovery_experiment, projected_ric_experiment, CertifiedOmpConfig, CertifiedOmpReport,
    ContainmentConfig, ContainmentReport, ContainmentRow, MatrixDesign, ProjectedRicConfig,
    ProjectedRicReport, ProjectedRicRow, RecoveryConfig, RecoveryReport, RecoveryRow,
    SlackHistogram, ThetaSource, ThresholdFormula, CONTAINMENT_TOL, PROJECTION_TOL,
};
pub use matrix::{
    exhaustive_ric, exhaustive_ric_with_cap, gaussian_matrix, gaussian_sensing_matrix,
    near_orthogonal_matrix, projection_complement, support_ric, DEFAULT_ENUMERATION_CAP,
};
pub use omp::{omp, OmpReport, EXACT_COEFFICIENT_TOL};
pub use pairs::{angle_between, sparse_pair, SparsePairSample};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

/// Reproducible random source for one trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Shape and reproducibility settings shared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SensingConfig {
    /// Ambient dimension.
    pub p: usize,
    /// Number of measurements.
    pub m: usize,
    /// Sparsity budget for the union support.
    pub k: usize,
    pub seed: u64,
    pub trials: usize,
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k > self.m {
            return Err(domain(
                "K",
                format!("need K <= m, got K={} m={}", self.k, self.m),
            ));
        }
        if self.m >= self.p {
            return Err(domain(
                "m",
                format!("need m < p, got m={} p={}", self.m, self.p),
            ));
        }
        if self.trials == 0 {
            return Err(domain("trials", "need at least one trial"));
        }
        Ok(())
    }
}
