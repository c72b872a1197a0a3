//! Brute-force search for the extreme compressed angles.
//!
//! The search never touches the closed forms in [`crate::bounds`]. It walks
//! the RIP-feasible region in `(a, b, d^2)` coordinates, evaluates the law of
//! cosines everywhere, then refines the best candidates locally.
//!
//! For fixed `(a, b)` the cosine `(a + b - d^2) / (2 sqrt(ab))` is strictly
//! decreasing in `d^2`, so each grid column is also evaluated at the exact
//! ends of its feasible `d^2` interval. Refinement works on those column
//! ends, which keeps extremes that sit on a constraint surface exact in
//! `d^2` and leaves only the `(a, b)` discretization error.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::envelope::{
    is_feasible, nominal_triple, DistanceEnvelope, FeasibleTriple, RipScenario, FEASIBILITY_TOL,
};
use crate::error::{domain, Error, Result};

/// Smallest accepted grid density.
pub const MIN_GRID_PER_AXIS: usize = 16;

/// Refinement stops once the `(a, b)` cell width drops below this.
pub const REFINE_CELL_WIDTH: f64 = 1e-10;

/// Number of coarse candidates refined independently per extreme.
const REFINE_SEEDS: usize = 8;

/// Extremes found by exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub argmin_triple: FeasibleTriple,
    pub argmax_triple: FeasibleTriple,
    /// Largest angle change possible within the final refinement cell,
    /// from a Lipschitz bound on `cos alpha` over the magnitude box.
    pub resolution_bound: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cos: f64,
    triple: FeasibleTriple,
}

impl Candidate {
    fn key(&self) -> (f64, f64, f64, f64) {
        (self.cos, self.triple.a, self.triple.b, self.triple.d_sq)
    }
}

/// Total order used for both extremes; ties fall back to the triple so the
/// parallel reduction is independent of evaluation order.
fn cmp_candidates(x: &Candidate, y: &Candidate) -> Ordering {
    let (kx, ky) = (x.key(), y.key());
    kx.0.total_cmp(&ky.0)
        .then(kx.1.total_cmp(&ky.1))
        .then(kx.2.total_cmp(&ky.2))
        .then(kx.3.total_cmp(&ky.3))
}

/// Running best pair: smallest cosine (largest angle) and largest cosine.
#[derive(Debug, Clone, Copy)]
struct Extremes {
    lowest: Option<Candidate>,
    highest: Option<Candidate>,
}

impl Extremes {
    const EMPTY: Self = Self {
        lowest: None,
        highest: None,
    };

    fn offer(&mut self, c: Candidate) {
        self.lowest = Some(match self.lowest {
            Some(l) if cmp_candidates(&l, &c) != Ordering::Greater => l,
            _ => c,
        });
        self.highest = Some(match self.highest {
            Some(h) if cmp_candidates(&h, &c) != Ordering::Less => h,
            _ => c,
        });
    }

    fn merge(mut self, other: Self) -> Self {
        if let Some(l) = other.lowest {
            self.offer(l);
        }
        if let Some(h) = other.highest {
            self.offer(h);
        }
        self
    }
}

struct Region {
    delta: f64,
    env: DistanceEnvelope,
}

impl Region {
    fn mag_lo(&self) -> f64 {
        1.0 - self.delta
    }

    fn mag_hi(&self) -> f64 {
        1.0 + self.delta
    }

    fn candidate(&self, a: f64, b: f64, d_sq: f64) -> Option<Candidate> {
        let triple = FeasibleTriple { a, b, d_sq };
        is_feasible(&triple, &self.env, self.delta).then(|| Candidate {
            cos: triple.cos_angle(),
            triple,
        })
    }

    /// Feasible `d^2` interval of the column at `(a, b)`, if nonempty.
    fn column(&self, a: f64, b: f64) -> Option<(f64, f64)> {
        let (ra, rb) = (a.sqrt(), b.sqrt());
        let lo = self
            .env
            .d_min_sq
            .max(2.0 * (a + b) - self.env.dt_max_sq)
            .max((ra - rb) * (ra - rb));
        let hi = self
            .env
            .d_max_sq
            .min(2.0 * (a + b) - self.env.dt_min_sq)
            .min((ra + rb) * (ra + rb));
        if lo > hi + FEASIBILITY_TOL {
            None
        } else {
            Some((lo, hi.max(lo)))
        }
    }

    /// Column extremes: largest cosine at the bottom of the `d^2` interval,
    /// smallest at the top.
    fn column_ends(&self, a: f64, b: f64) -> (Option<Candidate>, Option<Candidate>) {
        match self.column(a, b) {
            Some((lo, hi)) => (self.candidate(a, b, lo), self.candidate(a, b, hi)),
            None => (None, None),
        }
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect()
}

/// Exhaustive search for the extreme achievable angles of `scenario`.
pub fn oracle_extremes(scenario: &RipScenario, grid_per_axis: usize) -> Result<OracleResult> {
    if grid_per_axis < MIN_GRID_PER_AXIS {
        return Err(domain(
            "grid_per_axis",
            format!("need at least {MIN_GRID_PER_AXIS} points per axis, got {grid_per_axis}"),
        ));
    }
    let region = Region {
        delta: scenario.delta(),
        env: scenario.envelope(),
    };
    let mags = linspace(region.mag_lo(), region.mag_hi(), grid_per_axis);
    let dists = linspace(region.env.d_min_sq, region.env.d_max_sq, grid_per_axis);

    // Coarse pass over the full 3-D grid.
    let mut best = mags
        .par_iter()
        .map(|&a| {
            let mut grid = Extremes::EMPTY;
            for &b in &mags {
                for &d_sq in &dists {
                    if let Some(c) = region.candidate(a, b, d_sq) {
                        grid.offer(c);
                    }
                }
            }
            grid
        })
        .reduce(|| Extremes::EMPTY, Extremes::merge);
    if let Some(c) = region.candidate(1.0, 1.0, nominal_triple(scenario).d_sq) {
        best.offer(c);
    }
    // Exact column ends; the best of them seed refinement.
    let seeds_low = top_seeds(&region, &mags, false);
    let seeds_high = top_seeds(&region, &mags, true);
    for c in seeds_low.iter().chain(&seeds_high) {
        best.offer(*c);
    }
    let (Some(mut lowest), Some(mut highest)) = (best.lowest, best.highest) else {
        return Err(Error::EmptyFeasibleRegion {
            delta: scenario.delta(),
            theta: scenario.theta(),
        });
    };

    let cell = (region.mag_hi() - region.mag_lo()) / (grid_per_axis - 1) as f64;
    let mut final_cell = cell;
    for seed in seeds_low {
        let (c, h) = refine(&region, seed, cell, false);
        final_cell = final_cell.min(h);
        if cmp_candidates(&c, &lowest) == Ordering::Less {
            lowest = c;
        }
    }
    for seed in seeds_high {
        let (c, h) = refine(&region, seed, cell, true);
        final_cell = final_cell.min(h);
        if cmp_candidates(&c, &highest) == Ordering::Greater {
            highest = c;
        }
    }

    let lipschitz = 2.5 / (1.0 - region.delta);
    let dc = lipschitz * final_cell;
    let resolution_bound = angle_slack(lowest.cos, dc).max(angle_slack(highest.cos, dc));

    Ok(OracleResult {
        alpha_min: highest.cos.acos(),
        alpha_max: lowest.cos.acos(),
        argmin_triple: highest.triple,
        argmax_triple: lowest.triple,
        resolution_bound,
    })
}

/// Largest angle change caused by moving `cos` by up to `dc`.
fn angle_slack(cos: f64, dc: f64) -> f64 {
    let base = cos.acos();
    let up = (cos + dc).clamp(-1.0, 1.0).acos();
    let down = (cos - dc).clamp(-1.0, 1.0).acos();
    (base - up).abs().max((base - down).abs())
}

/// The best `REFINE_SEEDS` column ends, by cosine.
fn top_seeds(region: &Region, mags: &[f64], highest: bool) -> Vec<Candidate> {
    let mut all: Vec<Candidate> = mags
        .iter()
        .flat_map(|&a| mags.iter().map(move |&b| (a, b)))
        .filter_map(|(a, b)| {
            let (top, bottom) = region.column_ends(a, b);
            if highest {
                top
            } else {
                bottom
            }
        })
        .collect();
    all.sort_by(|x, y| {
        let o = cmp_candidates(x, y);
        if highest {
            o.reverse()
        } else {
            o
        }
    });
    all.truncate(REFINE_SEEDS);
    all
}

/// Pattern search on column ends around `seed`, halving the step until it
/// falls below [`REFINE_CELL_WIDTH`]. Returns the best point and final step.
fn refine(region: &Region, seed: Candidate, cell: f64, highest: bool) -> (Candidate, f64) {
    let better = |x: &Candidate, y: &Candidate| {
        let o = cmp_candidates(x, y);
        if highest {
            o == Ordering::Greater
        } else {
            o == Ordering::Less
        }
    };
    let (lo, hi) = (region.mag_lo(), region.mag_hi());
    let mut best = seed;
    let mut step = cell;
    while step >= REFINE_CELL_WIDTH {
        let (a0, b0) = (best.triple.a, best.triple.b);
        for i in -2..=2 {
            for j in -2..=2 {
                let a = (a0 + i as f64 * step / 2.0).clamp(lo, hi);
                let b = (b0 + j as f64 * step / 2.0).clamp(lo, hi);
                let (top, bottom) = region.column_ends(a, b);
                if let Some(c) = if highest { top } else { bottom } {
                    if better(&c, &best) {
                        best = c;
                    }
                }
            }
        }
        step /= 2.0;
    }
    (best, step)
}

/// Extremizes `x + y` on the arc `x^2 + y^2 = c` inside the box
/// `[lo, hi]^2`. Maximization lands on the symmetric point when it is
/// feasible, minimization on an arc end. Ties go to the smaller `x`.
pub fn constrained_sum_extremum(c: f64, lo: f64, hi: f64, maximize: bool) -> Result<(f64, f64)> {
    if !(lo >= 0.0 && lo <= hi) {
        return Err(domain(
            "box",
            format!("need 0 <= lo <= hi, got [{lo}, {hi}]"),
        ));
    }
    let tol = FEASIBILITY_TOL * c.abs().max(1.0);
    if !(c >= 2.0 * lo * lo - tol && c <= 2.0 * hi * hi + tol) {
        return Err(domain(
            "c",
            format!("arc x^2 + y^2 = {c} misses the box [{lo}, {hi}]^2"),
        ));
    }
    let other = |x: f64| (c - x * x).max(0.0).sqrt();
    // x ranges over [x_first, x_last] along the feasible arc.
    let x_first = lo.max(other(hi)).min(hi);
    let x_last = hi.min(other(lo)).max(x_first);
    if maximize {
        let x = (c / 2.0).sqrt().clamp(x_first, x_last);
        Ok((x, other(x)))
    } else {
        let first = (x_first, other(x_first));
        let last = (x_last, other(x_last));
        if last.0 + last.1 < first.0 + first.1 - 4.0 * f64::EPSILON * c.max(1.0) {
            Ok(last)
        } else {
            Ok(first)
        }
    }
}
