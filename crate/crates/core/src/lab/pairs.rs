use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::support_ric;
use crate::error::{domain, Error, Result};

const MAX_REDRAWS: usize = 16;

/// A unit-norm pair `(u, v)` at a known angle, optionally measured under a
/// sensing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePairSample {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub support_u: Vec<usize>,
    pub support_v: Vec<usize>,
    pub theta: f64,
    /// `angle(Phi u, Phi v)`, set by [`SparsePairSample::measure`].
    pub measured_alpha: Option<f64>,
    /// Isometry constant of `Phi` on the union support, set by `measure`.
    pub support_ric: Option<f64>,
}

impl SparsePairSample {
    /// Sorted union of both supports.
    pub fn union_support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .support_u
            .iter()
            .chain(&self.support_v)
            .copied()
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Compresses both vectors with `phi` and records the compressed angle
    /// and the exact isometry constant on the union support.
    pub fn measure(&self, phi: &DMatrix<f64>) -> Result<SparsePairSample> {
        let alpha = angle_between(&(phi * &self.u), &(phi * &self.v))?;
        let ric = support_ric(phi, &self.union_support())?;
        Ok(SparsePairSample {
            measured_alpha: Some(alpha),
            support_ric: Some(ric),
            ..self.clone()
        })
    }
}

fn support_of(x: &DVector<f64>) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter_map(|(i, &xi)| (xi != 0.0).then_some(i))
        .collect()
}

fn gaussian_on<R: Rng + ?Sized>(p: usize, support: &[usize], rng: &mut R) -> DVector<f64> {
    let mut x = DVector::zeros(p);
    for &i in support {
        x[i] = StandardNormal.sample(rng);
    }
    x
}

/// Draws a support of size `k`, a unit vector `v` on it, a unit vector `w`
/// on the same support orthogonal to `v`, and sets `u = cos(theta) v + sin(theta) w`.
pub fn sparse_pair<R: Rng + ?Sized>(
    p: usize,
    k: usize,
    theta: f64,
    rng: &mut R,
) -> Result<SparsePairSample> {
    if !(2..=p).contains(&k) {
        return Err(domain("K", format!("need 2 <= K <= p, got K={k} p={p}")));
    }
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(domain(
            "theta",
            format!("theta must be in (0,pi), got {theta}"),
        ));
    }
    let mut support = rand::seq::index::sample(rng, p, k).into_vec();
    support.sort_unstable();

    let v = loop_draw(rng, |rng| {
        let v = gaussian_on(p, &support, rng);
        let n = v.norm();
        (n > 1e-8).then(|| v / n)
    })?;
    let w = loop_draw(rng, |rng| {
        let mut w = gaussian_on(p, &support, rng);
        w -= &v * w.dot(&v);
        let n = w.norm();
        (n > 1e-8).then(|| w / n)
    })?;
    let u = &v * theta.cos() + &w * theta.sin();
    Ok(SparsePairSample {
        support_u: support_of(&u),
        support_v: support_of(&v),
        u,
        v,
        theta,
        measured_alpha: None,
        support_ric: None,
    })
}

fn loop_draw<R: Rng + ?Sized, T>(
    rng: &mut R,
    mut draw: impl FnMut(&mut R) -> Option<T>,
) -> Result<T> {
    for _ in 0..MAX_REDRAWS {
        if let Some(x) = draw(rng) {
            return Ok(x);
        }
    }
    Err(Error::DegenerateDraw {
        attempts: MAX_REDRAWS,
    })
}

/// Angle between two nonzero vectors, in `[0, pi]`.
pub fn angle_between(x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(domain("vector", "angle undefined for a zero vector"));
    }
    Ok((x.dot(y) / (nx * ny)).clamp(-1.0, 1.0).acos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::trial_rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn pair_examples() {
        let s = sparse_pair(10, 2, FRAC_PI_2, &mut trial_rng(1, 0)).unwrap();
        assert_abs_diff_eq!(s.u.dot(&s.v), 0.0, epsilon = 1e-12);
        let s = sparse_pair(10, 2, FRAC_PI_3, &mut trial_rng(1, 1)).unwrap();
        assert_abs_diff_eq!(s.u.dot(&s.v), 0.5, epsilon = 1e-12);
        assert!(s.union_support().len() <= 2);
    }

    #[test]
    fn pair_rejects_bad_inputs() {
        assert!(sparse_pair(10, 1, 1.0, &mut trial_rng(1, 0)).is_err());
        assert!(sparse_pair(10, 11, 1.0, &mut trial_rng(1, 0)).is_err());
        assert!(sparse_pair(10, 2, 0.0, &mut trial_rng(1, 0)).is_err());
    }

    #[test]
    fn angle_examples() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        let diag = DVector::from_vec(vec![1.0, 1.0]) / 2f64.sqrt();
        assert_eq!(angle_between(&e1, &e1).unwrap(), 0.0);
        assert_abs_diff_eq!(angle_between(&e1, &e2).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(
            angle_between(&diag, &e1).unwrap(),
            FRAC_PI_4,
            epsilon = 1e-15
        );
        assert!(angle_between(&e1, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn measure_with_identity_keeps_angle() {
        let s = sparse_pair(12, 4, 1.1, &mut trial_rng(3, 0)).unwrap();
        let m = s.measure(&DMatrix::identity(12, 12)).unwrap();
        assert_abs_diff_eq!(m.measured_alpha.unwrap(), 1.1, epsilon = 1e-12);
        assert_abs_diff_eq!(m.support_ric.unwrap(), 0.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn pair_invariants(seed in any::<u64>(), k in 2usize..12, theta in 0.01..3.13f64) {
            let s = sparse_pair(40, k, theta, &mut trial_rng(seed, 0)).unwrap();
            prop_assert!((s.u.norm() - 1.0).abs() < 1e-12);
            prop_assert!((s.v.norm() - 1.0).abs() < 1e-12);
            prop_assert!((s.u.dot(&s.v) - theta.cos()).abs() < 1e-12);
            prop_assert!(s.union_support().len() <= k);
        }
    }
}
