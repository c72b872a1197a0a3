use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::SensingConfig;
use crate::error::{domain, Error, Result};

/// Default ceiling on the number of supports [`exhaustive_ric`] visits.
pub const DEFAULT_ENUMERATION_CAP: u128 = 2_000_000;

/// Relative pivot size below which a column submatrix counts as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// `m x p` matrix with i.i.d. `N(0, 1/m)` entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(m: usize, p: usize, rng: &mut R) -> DMatrix<f64> {
    let scale = 1.0 / (m as f64).sqrt();
    DMatrix::from_fn(m, p, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        z * scale
    })
}

pub fn gaussian_sensing_matrix<R: Rng + ?Sized>(
    config: &SensingConfig,
    rng: &mut R,
) -> DMatrix<f64> {
    gaussian_matrix(config.m, config.p, rng)
}

/// A matrix with small low-order isometry constants: an orthonormal basis
/// extended by tiled Walsh sign patterns (mutually orthogonal when `m` is a
/// multiple of the pattern length), randomly rotated and column-permuted,
/// plus a Gaussian perturbation of relative size `perturbation`.
pub fn near_orthogonal_matrix<R: Rng + ?Sized>(
    m: usize,
    p: usize,
    perturbation: f64,
    rng: &mut R,
) -> DMatrix<f64> {
    let extra = p.saturating_sub(m);
    let block = extra.max(1).next_power_of_two();
    let tiled = m.is_multiple_of(block);
    let scale = 1.0 / (m as f64).sqrt();
    let mut base = DMatrix::<f64>::zeros(m, p);
    for j in 0..p.min(m) {
        base[(j, j)] = 1.0;
    }
    for e in 0..extra {
        for i in 0..m {
            let sign = if tiled {
                // row e of the Sylvester-Hadamard matrix of order `block`
                if ((e & (i % block)).count_ones() & 1) == 0 {
                    1.0
                } else {
                    -1.0
                }
            } else if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            };
            base[(i, m + e)] = sign * scale;
        }
    }
    let rotation = gaussian_matrix(m, m, rng).qr().q();
    let mut order: Vec<usize> = (0..p).collect();
    order.shuffle(rng);
    let rotated = rotation * base;
    let mut out = rotated.select_columns(&order);
    out += gaussian_matrix(m, p, rng) * perturbation;
    out
}

/// Exact isometry constant of `matrix` restricted to the columns in
/// `support`: `max(sigma_max^2 - 1, 1 - sigma_min^2)`. Rank-deficient
/// submatrices yield a value of at least 1.
pub fn support_ric(matrix: &DMatrix<f64>, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Ok(0.0);
    }
    if support.len() > matrix.nrows() {
        return Err(domain(
            "support",
            format!(
                "|support| = {} exceeds m = {}",
                support.len(),
                matrix.nrows()
            ),
        ));
    }
    if let Some(&bad) = support.iter().find(|&&j| j >= matrix.ncols()) {
        return Err(domain("support", format!("column {bad} out of range")));
    }
    let sub = matrix.select_columns(support);
    let sv = sub.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    Ok((smax * smax - 1.0).max(1.0 - smin * smin))
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Isometry constant of order `order`, by enumerating every support.
pub fn exhaustive_ric(matrix: &DMatrix<f64>, order: usize) -> Result<f64> {
    exhaustive_ric_with_cap(matrix, order, DEFAULT_ENUMERATION_CAP)
}

pub fn exhaustive_ric_with_cap(matrix: &DMatrix<f64>, order: usize, cap: u128) -> Result<f64> {
    if order == 0 {
        return Ok(0.0);
    }
    if order > matrix.nrows() || order > matrix.ncols() {
        return Err(domain(
            "order",
            format!("order {order} exceeds matrix shape {:?}", matrix.shape()),
        ));
    }
    let count = binomial(matrix.ncols(), order);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    (0..matrix.ncols())
        .combinations(order)
        .par_bridge()
        .map(|support| support_ric(matrix, &support))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// `I - Phi_T (Phi_T^T Phi_T)^{-1} Phi_T^T`: the orthogonal projector onto
/// the complement of the span of the columns in `t_i`.
pub fn projection_complement(matrix: &DMatrix<f64>, t_i: &[usize]) -> Result<DMatrix<f64>> {
    let m = matrix.nrows();
    if t_i.is_empty() {
        return Ok(DMatrix::identity(m, m));
    }
    if t_i.len() > m {
        return Err(Error::RankDeficient {
            rank: m,
            cols: t_i.len(),
        });
    }
    let sub = matrix.select_columns(t_i);
    let scale = sub
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let qr = sub.qr();
    let r = qr.r();
    let rank = r
        .diagonal()
        .iter()
        .filter(|d| d.abs() > RANK_TOL * scale)
        .count();
    if rank < t_i.len() {
        return Err(Error::RankDeficient {
            rank,
            cols: t_i.len(),
        });
    }
    let q = qr.q();
    Ok(DMatrix::identity(m, m) - &q * q.transpose())
}

/// Least-squares coefficients on the columns in `support`, or `None` when
/// the submatrix is numerically rank deficient.
pub(crate) fn least_squares(
    matrix: &DMatrix<f64>,
    support: &[usize],
    y: &DVector<f64>,
) -> Option<DVector<f64>> {
    let sub = matrix.select_columns(support);
    let svd = sub.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOL * smax) {
        return None;
    }
    svd.solve(y, 0.0).ok()
}
