use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::matrix::{
    exhaustive_ric, gaussian_matrix, gaussian_sensing_matrix, least_squares,
    near_orthogonal_matrix, projection_complement, support_ric,
};
use super::omp::omp;
use super::pairs::sparse_pair;
use super::{trial_rng, SensingConfig};
use crate::bounds::{angle_interval, AngleInterval};
use crate::error::{domain, Result};
use crate::ric::{omp_ric_threshold, omp_ric_threshold_prior, projected_ric};

/// Angular slack allowed when checking a measured angle against its interval.
pub const CONTAINMENT_TOL: f64 = 1e-8;

/// Slack allowed when checking the projected energy ratio against its bounds.
pub const PROJECTION_TOL: f64 = 1e-8;

/// Stream reserved for a matrix shared across a whole batch.
const SHARED_MATRIX_STREAM: u64 = u64::MAX;

/// `sqrt(c K ln(p/K) / m)`: the isometry constant the sizing heuristic
/// associates with `m` measurements.
pub fn design_delta(sizing_constant: f64, k: usize, p: usize, m: usize) -> f64 {
    (sizing_constant * k as f64 * (p as f64 / k as f64).ln() / m as f64).sqrt()
}

/// `ceil(c K ln(p/K) / delta^2)`.
pub fn measurement_size(sizing_constant: f64, k: usize, p: usize, delta: f64) -> usize {
    (sizing_constant * k as f64 * (p as f64 / k as f64).ln() / (delta * delta)).ceil() as usize
}

/// Where the ambient angle of each sampled pair comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSource {
    /// Picked uniformly from a fixed list.
    List(Vec<f64>),
    /// Uniform on `(lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl ThetaSource {
    fn validate(&self) -> Result<()> {
        let ok = |t: f64| t > 0.0 && t < std::f64::consts::PI;
        match self {
            ThetaSource::List(v) if v.is_empty() => Err(domain("theta", "empty theta list")),
            ThetaSource::List(v) => match v.iter().find(|&&t| !ok(t)) {
                Some(t) => Err(domain("theta", format!("theta must be in (0,pi), got {t}"))),
                None => Ok(()),
            },
            ThetaSource::Uniform { lo, hi } => {
                if *lo >= 0.0 && lo < hi && ok(*hi) {
                    Ok(())
                } else {
                    Err(domain("theta", format!("bad uniform range ({lo}, {hi}]")))
                }
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ThetaSource::List(v) => v[rng.random_range(0..v.len())],
            ThetaSource::Uniform { lo, hi } => hi - (hi - lo) * rng.random::<f64>(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentConfig {
    pub sensing: SensingConfig,
    pub thetas: ThetaSource,
    /// Draw one matrix for the whole batch instead of one per pair.
    pub reuse_matrix: bool,
    /// Compute bounds with this constant instead of the per-support one.
    pub bound_delta: Option<f64>,
    /// Constant in the sizing heuristic, used for the design-delta columns.
    pub sizing_constant: f64,
}

impl ContainmentConfig {
    pub fn new(sensing: SensingConfig, thetas: ThetaSource) -> Self {
        ContainmentConfig {
            sensing,
            thetas,
            reuse_matrix: false,
            bound_delta: None,
            sizing_constant: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContainmentRow {
    pub trial: usize,
    pub theta: f64,
    pub alpha: f64,
    pub support_ric: f64,
    /// Constant the bounds were computed with.
    pub bound_delta: f64,
    /// `None` when the bound constant is at least 1.
    pub bounds: Option<AngleInterval>,
    /// Bounds under the design constant, for comparison only.
    pub design_bounds: Option<AngleInterval>,
    pub violation: bool,
    /// Relative parallelogram-law residual of the compressed pair.
    pub parallelogram_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub seed: u64,
    pub design_delta: f64,
    pub rows: Vec<ContainmentRow>,
    pub counted: usize,
    pub excluded: usize,
    pub violations: usize,
    pub max_parallelogram_residual: f64,
}

/// Samples pairs at known angles, compresses them and checks each measured
/// angle against the interval for the isometry constant of its support.
pub fn containment_experiment(config: &ContainmentConfig) -> Result<ContainmentReport> {
    let s = config.sensing;
    s.validate()?;
    config.thetas.validate()?;
    if let Some(d) = config.bound_delta {
        if !(d > 0.0 && d < 1.0) {
            return Err(domain("delta", format!("delta must be in (0,1), got {d}")));
        }
    }
    let design = design_delta(config.sizing_constant, s.k, s.p, s.m);
    let shared = config
        .reuse_matrix
        .then(|| gaussian_sensing_matrix(&s, &mut trial_rng(s.seed, SHARED_MATRIX_STREAM)));

    let rows = (0..s.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(s.seed, trial as u64);
            let fresh;
            let phi = match &shared {
                Some(phi) => phi,
                None => {
                    fresh = gaussian_sensing_matrix(&s, &mut rng);
                    &fresh
                }
            };
            let theta = config.thetas.draw(&mut rng);
            let pair = sparse_pair(s.p, s.k, theta, &mut rng)?.measure(phi)?;
            let alpha = pair.measured_alpha.unwrap_or(f64::NAN);
            let ric = pair.support_ric.unwrap_or(f64::NAN);
            let bound_delta = config.bound_delta.unwrap_or(ric);
            let bounds = if bound_delta < 1.0 {
                Some(angle_interval(bound_delta.max(f64::MIN_POSITIVE), theta)?)
            } else {
                None
            };
            let design_bounds = if design < 1.0 {
                Some(angle_interval(design, theta)?)
            } else {
                None
            };
            let violation = bounds.is_some_and(|b| !b.contains(alpha, CONTAINMENT_TOL));
            Ok(ContainmentRow {
                trial,
                theta,
                alpha,
                support_ric: ric,
                bound_delta,
                bounds,
                design_bounds,
                violation,
                parallelogram_residual: parallelogram_residual(phi, &pair.u, &pair.v),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let counted = rows.iter().filter(|r| r.bounds.is_some()).count();
    Ok(ContainmentReport {
        seed: s.seed,
        design_delta: design,
        counted,
        excluded: rows.len() - counted,
        violations: rows.iter().filter(|r| r.violation).count(),
        max_parallelogram_residual: rows
            .iter()
            .map(|r| r.parallelogram_residual)
            .fold(0.0, f64::max),
        rows,
    })
}

fn parallelogram_residual(phi: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let (pu, pv) = (phi * u, phi * v);
    let a = pu.norm_squared();
    let b = pv.norm_squared();
    let d = (&pu - &pv).norm_squared();
    let s = (&pu + &pv).norm_squared();
    (s - (2.0 * a + 2.0 * b - d)).abs() / (2.0 * (a + b)).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectedRicConfig {
    pub sensing: SensingConfig,
    /// Size of the interference support projected out.
    pub k_i: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedRicRow {
    pub trial: usize,
    /// `|P Phi x|^2 / |x|^2`.
    pub ratio: f64,
    pub support_ric: f64,
    /// `None` when the support constant is at least 1.
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Distance from the ratio to the nearer bound; negative on a violation.
    pub slack: Option<f64>,
    pub violation: bool,
    /// Relative residual of `|P Phi x|^2 = |Phi x|^2 (1 - cos^2 angle(Phi x, Phi_I x_I))`.
    pub identity_residual: f64,
}

/// Equal-width histogram of nonnegative slacks over `[0, max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl SlackHistogram {
    pub fn new(values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let hi = values.iter().copied().fold(0.0f64, f64::max);
        let width = if hi > 0.0 { hi / bins as f64 } else { 1.0 };
        let edges = (0..=bins).map(|i| i as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let i = ((v.max(0.0) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        SlackHistogram { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedRicReport {
    pub seed: u64,
    pub rows: Vec<ProjectedRicRow>,
    pub excluded: usize,
    pub violations: usize,
    pub mean_slack: f64,
    pub histogram: SlackHistogram,
    pub max_identity_residual: f64,
}

/// Projects out a random interference support and checks the energy kept
/// from a disjoint sparse signal against the projected-RIC bounds.
pub fn projected_ric_experiment(config: &ProjectedRicConfig) -> Result<ProjectedRicReport> {
    let s = config.sensing;
    s.validate()?;
    if config.k_i >= s.k {
        return Err(domain(
            "kI",
            format!("need kI < K, got kI={} K={}", config.k_i, s.k),
        ));
    }
    let rows = (0..s.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(s.seed, trial as u64);
            let phi = gaussian_sensing_matrix(&s, &mut rng);
            let support = sample(&mut rng, s.p, s.k).into_vec();
            let (t_i, t_x) = support.split_at(config.k_i);
            let mut x = DVector::zeros(s.p);
            for &j in t_x {
                x[j] = StandardNormal.sample(&mut rng);
            }
            let proj = projection_complement(&phi, t_i)?;
            let phi_x = &phi * &x;
            let kept = (&proj * &phi_x).norm_squared();
            let ratio = kept / x.norm_squared();

            let mut union = support.clone();
            union.sort_unstable();
            let ric = support_ric(&phi, &union)?;

            let identity_residual = identity_residual(&phi, t_i, &phi_x, kept);
            let (lower, upper) = if ric < 1.0 {
                (
                    Some(1.0 - projected_ric(ric.max(f64::MIN_POSITIVE))?),
                    Some(1.0 + ric),
                )
            } else {
                (None, None)
            };
            let slack = lower
                .zip(upper)
                .map(|(lo, hi)| (ratio - lo).min(hi - ratio));
            Ok(ProjectedRicRow {
                trial,
                ratio,
                support_ric: ric,
                lower,
                upper,
                slack,
                violation: slack.is_some_and(|sl| sl < -PROJECTION_TOL),
                identity_residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let slacks: Vec<f64> = rows.iter().filter_map(|r| r.slack).collect();
    let mean_slack = if slacks.is_empty() {
        f64::NAN
    } else {
        slacks.iter().sum::<f64>() / slacks.len() as f64
    };
    Ok(ProjectedRicReport {
        seed: s.seed,
        excluded: rows.len() - slacks.len(),
        violations: rows.iter().filter(|r| r.violation).count(),
        mean_slack,
        histogram: SlackHistogram::new(&slacks, 10),
        max_identity_residual: rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max),
        rows,
    })
}

fn identity_residual(phi: &DMatrix<f64>, t_i: &[usize], phi_x: &DVector<f64>, kept: f64) -> f64 {
    let total = phi_x.norm_squared();
    if t_i.is_empty() {
        return (kept - total).abs() / total.max(f64::MIN_POSITIVE);
    }
    let Some(coef) = least_squares(phi, t_i, phi_x) else {
        return f64::NAN;
    };
    let fit = phi.select_columns(t_i) * coef;
    let cos = phi_x.dot(&fit) / (phi_x.norm() * fit.norm()).max(f64::MIN_POSITIVE);
    let predicted = total * (1.0 - cos * cos);
    (kept - predicted).abs() / total.max(f64::MIN_POSITIVE)
}

/// Which OMP threshold sizes the measurement count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ThresholdFormula {
    /// `1/(1 + sqrt(2K))`.
    Prior,
    /// Root of the projected-RIC quadratic.
    Projected,
}

impl ThresholdFormula {
    pub const ALL: [ThresholdFormula; 2] = [ThresholdFormula::Prior, ThresholdFormula::Projected];

    pub fn threshold(self, k: usize) -> Result<f64> {
        match self {
            ThresholdFormula::Prior => omp_ric_threshold_prior(k),
            ThresholdFormula::Projected => omp_ric_threshold(k),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ThresholdFormula::Prior => "prior",
            ThresholdFormula::Projected => "projected",
        }
    }

    fn index(self) -> u64 {
        match self {
            ThresholdFormula::Prior => 0,
            ThresholdFormula::Projected => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub p: usize,
    pub k_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub sizing_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryRow {
    pub k: usize,
    pub formula: ThresholdFormula,
    pub delta: f64,
    pub m: usize,
    /// The sizing rule asked for at least `p` measurements.
    pub capped: bool,
    pub exact: usize,
    pub trials: usize,
    /// `1 - (delta_prior / delta_projected)^2` for this `K`.
    pub measurement_reduction: f64,
}

impl RecoveryRow {
    pub fn fraction(&self) -> f64 {
        self.exact as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub seed: u64,
    pub rows: Vec<RecoveryRow>,
}

/// Draws a `k`-sparse vector with magnitudes uniform on `[0.5, 1.5]` and
/// random signs.
fn sparse_signal<R: Rng + ?Sized>(p: usize, k: usize, rng: &mut R) -> DVector<f64> {
    let mut x = DVector::zeros(p);
    for j in sample(rng, p, k).into_vec() {
        let mag = rng.random_range(0.5..=1.5);
        x[j] = if rng.random::<bool>() { mag } else { -mag };
    }
    x
}

fn recovery_stream(k: usize, formula: ThresholdFormula, trial: usize) -> u64 {
    ((k as u64) << 40) | (formula.index() << 32) | trial as u64
}

/// For each `K` and threshold formula, sizes `m` from the threshold and
/// measures how often OMP recovers a random `K`-sparse vector exactly.
pub fn omp_recovery_experiment(config: &RecoveryConfig) -> Result<RecoveryReport> {
    if config.trials == 0 {
        return Err(domain("trials", "need at least one trial"));
    }
    if config.p < 2 {
        return Err(domain("p", format!("need p >= 2, got {}", config.p)));
    }
    if let Some(&k) = config.k_values.iter().find(|&&k| k == 0 || k >= config.p) {
        return Err(domain("K", format!("need 1 <= K < p, got K={k}")));
    }
    let mut rows = Vec::new();
    for &k in &config.k_values {
        let prior = omp_ric_threshold_prior(k)?;
        let projected = omp_ric_threshold(k)?;
        let reduction = 1.0 - (prior / projected).powi(2);
        for formula in ThresholdFormula::ALL {
            let delta = formula.threshold(k)?;
            let wanted = measurement_size(config.sizing_constant, k, config.p, delta);
            let capped = wanted >= config.p;
            let m = wanted.clamp(k, config.p - 1);
            let exact = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(config.seed, recovery_stream(k, formula, trial));
                    let phi = gaussian_matrix(m, config.p, &mut rng);
                    let x = sparse_signal(config.p, k, &mut rng);
                    omp(&phi, &(&phi * &x), k, Some(&x)).map(|r| r.exact)
                })
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|&e| e)
                .count();
            rows.push(RecoveryRow {
                k,
                formula,
                delta,
                m,
                capped,
                exact,
                trials: config.trials,
                measurement_reduction: reduction,
            });
        }
    }
    Ok(RecoveryReport {
        seed: config.seed,
        rows,
    })
}

/// How the candidate sensing matrices are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixDesign {
    Gaussian,
    /// See [`near_orthogonal_matrix`].
    NearOrthogonal {
        perturbation: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifiedOmpConfig {
    pub p: usize,
    pub m: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub design: MatrixDesign,
    /// Matrices drawn while looking for one that certifies.
    pub max_instances: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedOmpReport {
    pub seed: u64,
    /// Exhaustive isometry constant of order `K + 1` of the instance used.
    pub ric: f64,
    pub threshold: f64,
    pub certified: bool,
    /// Matrices drawn, including the one used.
    pub instances_drawn: usize,
    pub exact: usize,
    pub trials: usize,
    /// Per trial: recovered support and whether recovery was exact.
    pub outcomes: Vec<(Vec<usize>, bool)>,
}

/// Finds a matrix whose exhaustively computed constant of order `K + 1`
/// lies below the OMP threshold, then runs OMP on random `K`-sparse vectors.
pub fn certified_omp_experiment(config: &CertifiedOmpConfig) -> Result<CertifiedOmpReport> {
    SensingConfig {
        p: config.p,
        m: config.m,
        k: config.k + 1,
        seed: config.seed,
        trials: config.trials,
    }
    .validate()?;
    if config.k == 0 {
        return Err(domain("K", "sparsity level must be at least 1"));
    }
    let threshold = omp_ric_threshold(config.k)?;
    let mut phi = DMatrix::zeros(0, 0);
    let mut ric = f64::INFINITY;
    let mut drawn = 0;
    for instance in 0..config.max_instances.max(1) {
        let mut rng = trial_rng(config.seed, SHARED_MATRIX_STREAM - instance as u64);
        phi = match config.design {
            MatrixDesign::Gaussian => gaussian_matrix(config.m, config.p, &mut rng),
            MatrixDesign::NearOrthogonal { perturbation } => {
                near_orthogonal_matrix(config.m, config.p, perturbation, &mut rng)
            }
        };
        ric = exhaustive_ric(&phi, config.k + 1)?;
        drawn = instance + 1;
        if ric < threshold {
            break;
        }
    }
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(config.seed, trial as u64);
            let x = sparse_signal(config.p, config.k, &mut rng);
            omp(&phi, &(&phi * &x), config.k, Some(&x)).map(|r| (r.recovered_support, r.exact))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CertifiedOmpReport {
        seed: config.seed,
        ric,
        threshold,
        certified: ric < threshold,
        instances_drawn: drawn,
        exact: outcomes.iter().filter(|o| o.1).count(),
        trials: config.trials,
        outcomes,
    })
}
