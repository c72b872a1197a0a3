use anyhow::{bail, Result};
use ripangle::lab::{
    certified_omp_experiment, containment_experiment, omp_recovery_experiment,
    projected_ric_experiment, CertifiedOmpConfig, ContainmentConfig, MatrixDesign,
    ProjectedRicConfig, RecoveryConfig, ThetaSource,
};
use ripangle::ric::STABLE_RECOVERY_RIC;
use ripangle::{
    algebraic_projected_ric, analyze, invert_algebraic_ric, invert_projected_ric,
    measurement_reduction, normalize_scenario, omp_ric_threshold, omp_ric_threshold_prior,
    oracle_extremes, polarization_cos_bound, projected_ric, reconstruction_error_bound, CosRange,
    SensingConfig,
};

use crate::table::{deg, fmt_num, fmt_opt, Table};
use crate::{
    BoundsArgs, Cli, Command, ContainmentArgs, Curve, Design, OmpArgs, ProjricArgs, RicArgs,
    SensingArgs, SweepArgs,
};

/// Note emitted when the projected OMP threshold is not the larger one.
pub const ORDERING_NOTE: &str = "ordering_differs_from_text";

/// Result of one command: the CSV body, a human summary and the number of
/// soundness violations seen.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Option<String>,
    pub violations: usize,
}

impl Outcome {
    fn clean(table: Table) -> Self {
        Outcome {
            table,
            summary: None,
            violations: 0,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Bounds(a) => bounds(a),
        Command::Sweep(a) => sweep(a),
        Command::Ric(a) => ric(a),
        Command::Containment(a) => containment(a),
        Command::Projric(a) => projric(a),
        Command::Omp(a) => omp(a),
    }
}

fn bool_cell(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

const BOUNDS_HEADER: &[&str] = &[
    "delta",
    "theta_rad",
    "theta_deg",
    "alpha_min_rad",
    "alpha_min_deg",
    "alpha_max_rad",
    "alpha_max_deg",
    "branch",
    "branch_min",
    "branch_max",
    "pol_bound",
    "cos_lo",
    "cos_hi",
];

fn bounds(a: &BoundsArgs) -> Result<Outcome> {
    let theta = a.theta.radians();
    let r = analyze(a.delta, theta)?;
    let cos = CosRange::from_interval(&r.interval);
    let mut t = Table::new(BOUNDS_HEADER);
    t.push(vec![
        fmt_num(a.delta),
        fmt_num(theta),
        fmt_num(deg(theta)),
        fmt_num(r.interval.alpha_min),
        fmt_num(deg(r.interval.alpha_min)),
        fmt_num(r.interval.alpha_max),
        fmt_num(deg(r.interval.alpha_max)),
        r.branch_label(),
        r.min_case.label().into(),
        r.max_case.label().into(),
        fmt_num(polarization_cos_bound(&r.scenario)),
        fmt_num(cos.lo),
        fmt_num(cos.hi),
    ]);
    Ok(Outcome::clean(t))
}

const SWEEP_HEADER: &[&str] = &[
    "delta",
    "theta_rad",
    "theta_deg",
    "alpha_min",
    "alpha_min_deg",
    "alpha_max",
    "alpha_max_deg",
    "pol_bound",
    "cos_lo",
    "cos_hi",
    "oracle_min",
    "oracle_max",
    "dev_min",
    "dev_max",
    "dev_min_deg",
    "dev_max_deg",
    "resolution",
    "branch_min",
    "branch_max",
];

fn sweep(a: &SweepArgs) -> Result<Outcome> {
    let mut t = Table::new(SWEEP_HEADER);
    let mut worst_dev: f64 = 0.0;
    for &delta in &a.deltas {
        for &theta_deg in &a.thetas_deg {
            let theta = theta_deg.to_radians();
            let r = analyze(delta, theta)?;
            let cos = CosRange::from_interval(&r.interval);
            let (lo, hi) = (r.interval.alpha_min, r.interval.alpha_max);
            let oracle = if a.oracle {
                let scenario = normalize_scenario(delta, theta)?;
                let o = oracle_extremes(&scenario, a.grid_n)?;
                let (omin, omax) = if scenario.flipped() {
                    (
                        std::f64::consts::PI - o.alpha_max,
                        std::f64::consts::PI - o.alpha_min,
                    )
                } else {
                    (o.alpha_min, o.alpha_max)
                };
                worst_dev = worst_dev.max((omin - lo).abs()).max((omax - hi).abs());
                Some((omin, omax, o.resolution_bound))
            } else {
                None
            };
            t.push(vec![
                fmt_num(delta),
                fmt_num(theta),
                fmt_num(theta_deg),
                fmt_num(lo),
                fmt_num(deg(lo)),
                fmt_num(hi),
                fmt_num(deg(hi)),
                fmt_num(polarization_cos_bound(&r.scenario)),
                fmt_num(cos.lo),
                fmt_num(cos.hi),
                fmt_opt(oracle.map(|o| o.0)),
                fmt_opt(oracle.map(|o| o.1)),
                fmt_opt(oracle.map(|o| (o.0 - lo).abs())),
                fmt_opt(oracle.map(|o| (o.1 - hi).abs())),
                fmt_opt(oracle.map(|o| deg((o.0 - lo).abs()))),
                fmt_opt(oracle.map(|o| deg((o.1 - hi).abs()))),
                fmt_opt(oracle.map(|o| o.2)),
                r.min_case.label().into(),
                r.max_case.label().into(),
            ]);
        }
    }
    let summary = a.oracle.then(|| {
        format!(
            "sweep: points={} grid_n={} max_dev_deg={}",
            t.rows.len(),
            a.grid_n,
            fmt_num(deg(worst_dev))
        )
    });
    Ok(Outcome {
        table: t,
        summary,
        violations: 0,
    })
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn ordering_cells(projected: f64, prior: f64) -> [String; 2] {
    if projected < prior {
        ["projected<prior".into(), ORDERING_NOTE.into()]
    } else {
        ["projected>=prior".into(), String::new()]
    }
}

const OMP_HEADER: &[&str] = &["K", "delta_projected", "delta_prior", "ordering", "note"];

fn omp_row(k: usize) -> Result<Vec<String>> {
    let new = omp_ric_threshold(k)?;
    let prior = omp_ric_threshold_prior(k)?;
    let [ordering, note] = ordering_cells(new, prior);
    Ok(vec![
        k.to_string(),
        fmt_num(new),
        fmt_num(prior),
        ordering,
        note,
    ])
}

const DELTA_HEADER: &[&str] = &[
    "delta",
    "delta_bar",
    "delta_bar_a",
    "eps",
    "error_bound",
    "error_bound_a",
];

fn delta_row(delta: f64, eps: f64) -> Result<Vec<String>> {
    let bar = projected_ric(delta)?;
    let bar_a = algebraic_projected_ric(delta)?;
    let bound = |r: f64| {
        (r < STABLE_RECOVERY_RIC)
            .then(|| reconstruction_error_bound(r, eps))
            .transpose()
    };
    Ok(vec![
        fmt_num(delta),
        fmt_num(bar),
        fmt_num(bar_a),
        fmt_num(eps),
        fmt_opt(bound(bar)?),
        fmt_opt(bound(bar_a)?),
    ])
}

const TAU_HEADER: &[&str] = &[
    "tau",
    "delta_new",
    "delta_alg",
    "reduction",
    "reduction_pct",
];

fn tau_row(tau: f64) -> Result<Vec<String>> {
    let reduction = measurement_reduction(tau)?;
    Ok(vec![
        fmt_num(tau),
        fmt_num(invert_projected_ric(tau)?),
        fmt_num(invert_algebraic_ric(tau)?),
        fmt_num(reduction),
        fmt_num(100.0 * reduction),
    ])
}

fn ric(a: &RicArgs) -> Result<Outcome> {
    if !(a.eps >= 0.0) {
        bail!(usage("eps", "eps must be nonnegative"));
    }
    let mut t;
    if let Some(delta) = a.mode.delta {
        t = Table::new(DELTA_HEADER);
        t.push(delta_row(delta, a.eps)?);
    } else if let Some(tau) = a.mode.tau {
        t = Table::new(TAU_HEADER);
        t.push(tau_row(tau)?);
    } else if let Some(k) = a.mode.omp_k {
        t = Table::new(OMP_HEADER);
        t.push(omp_row(k)?);
    } else {
        match a.mode.curve.expect("clap enforces one mode") {
            Curve::Projected | Curve::ErrorBound => {
                t = Table::new(DELTA_HEADER);
                for d in grid(0.01, 0.99, a.points) {
                    t.push(delta_row(d, a.eps)?);
                }
            }
            Curve::Inversion => {
                t = Table::new(TAU_HEADER);
                for tau in grid(0.01, 0.99, a.points) {
                    t.push(tau_row(tau)?);
                }
            }
            Curve::Omp => {
                t = Table::new(OMP_HEADER);
                for k in 1..=a.k_max {
                    t.push(omp_row(k)?);
                }
            }
        }
    }
    Ok(Outcome::clean(t))
}

/// A usage error that maps to exit status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(flag: &str, msg: &str) -> UsageError {
    UsageError(format!("--{flag}: {msg}"))
}

fn sensing(a: &SensingArgs, seed: u64) -> SensingConfig {
    SensingConfig {
        p: a.p,
        m: a.m,
        k: a.k,
        seed,
        trials: a.trials,
    }
}

const CONTAINMENT_HEADER: &[&str] = &[
    "seed",
    "trial",
    "theta_rad",
    "theta_deg",
    "alpha_rad",
    "alpha_deg",
    "support_ric",
    "bound_delta",
    "alpha_min_rad",
    "alpha_min_deg",
    "alpha_max_rad",
    "alpha_max_deg",
    "design_alpha_min_rad",
    "design_alpha_max_rad",
    "excluded",
    "violation",
    "parallelogram_residual",
];

fn containment(a: &ContainmentArgs) -> Result<Outcome> {
    let thetas = if a.thetas_deg.is_empty() {
        ThetaSource::Uniform {
            lo: 0.0,
            hi: std::f64::consts::FRAC_PI_2,
        }
    } else {
        ThetaSource::List(a.thetas_deg.iter().map(|d| d.to_radians()).collect())
    };
    let mut t = Table::new(CONTAINMENT_HEADER);
    let (mut counted, mut excluded, mut violations) = (0, 0, 0);
    let mut worst_residual: f64 = 0.0;
    let mut design = f64::NAN;
    for &seed in &a.sensing.seed {
        let cfg = ContainmentConfig {
            reuse_matrix: a.reuse_matrix,
            bound_delta: a.bound_delta,
            sizing_constant: a.sizing_constant,
            ..ContainmentConfig::new(sensing(&a.sensing, seed), thetas.clone())
        };
        let r = containment_experiment(&cfg)?;
        counted += r.counted;
        excluded += r.excluded;
        violations += r.violations;
        worst_residual = worst_residual.max(r.max_parallelogram_residual);
        design = r.design_delta;
        for row in &r.rows {
            t.push(vec![
                seed.to_string(),
                row.trial.to_string(),
                fmt_num(row.theta),
                fmt_num(deg(row.theta)),
                fmt_num(row.alpha),
                fmt_num(deg(row.alpha)),
                fmt_num(row.support_ric),
                fmt_num(row.bound_delta),
                fmt_opt(row.bounds.map(|b| b.alpha_min)),
                fmt_opt(row.bounds.map(|b| deg(b.alpha_min))),
                fmt_opt(row.bounds.map(|b| b.alpha_max)),
                fmt_opt(row.bounds.map(|b| deg(b.alpha_max))),
                fmt_opt(row.design_bounds.map(|b| b.alpha_min)),
                fmt_opt(row.design_bounds.map(|b| b.alpha_max)),
                bool_cell(row.bounds.is_none()),
                bool_cell(row.violation),
                fmt_num(row.parallelogram_residual),
            ]);
        }
    }
    let summary = format!(
        "containment: seeds={} trials={} counted={counted} excluded={excluded} design_delta={} max_parallelogram_residual={} violations: {violations}",
        seed_list(&a.sensing.seed),
        a.sensing.trials,
        fmt_num(design),
        fmt_num(worst_residual),
    );
    Ok(Outcome {
        table: t,
        summary: Some(summary),
        violations,
    })
}

fn seed_list(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

const PROJRIC_HEADER: &[&str] = &[
    "seed",
    "trial",
    "ratio",
    "support_ric",
    "lower",
    "upper",
    "slack",
    "violation",
    "identity_residual",
];

fn projric(a: &ProjricArgs) -> Result<Outcome> {
    let mut t = Table::new(PROJRIC_HEADER);
    let (mut violations, mut excluded) = (0, 0);
    let mut slack_sum = 0.0;
    let mut slack_n = 0usize;
    let mut worst_identity: f64 = 0.0;
    let mut histograms = Vec::new();
    for &seed in &a.sensing.seed {
        let r = projected_ric_experiment(&ProjectedRicConfig {
            sensing: sensing(&a.sensing, seed),
            k_i: a.k_i,
        })?;
        violations += r.violations;
        excluded += r.excluded;
        worst_identity = worst_identity.max(r.max_identity_residual);
        histograms.push(
            r.histogram
                .counts
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" "),
        );
        for row in &r.rows {
            if let Some(s) = row.slack {
                slack_sum += s;
                slack_n += 1;
            }
            t.push(vec![
                seed.to_string(),
                row.trial.to_string(),
                fmt_num(row.ratio),
                fmt_num(row.support_ric),
                fmt_opt(row.lower),
                fmt_opt(row.upper),
                fmt_opt(row.slack),
                bool_cell(row.violation),
                fmt_num(row.identity_residual),
            ]);
        }
    }
    let mean = if slack_n > 0 {
        slack_sum / slack_n as f64
    } else {
        f64::NAN
    };
    let summary = format!(
        "projric: seeds={} trials={} excluded={excluded} mean_slack={} max_identity_residual={} slack_histogram=[{}] violations: {violations}",
        seed_list(&a.sensing.seed),
        a.sensing.trials,
        fmt_num(mean),
        fmt_num(worst_identity),
        histograms.join(" | "),
    );
    Ok(Outcome {
        table: t,
        summary: Some(summary),
        violations,
    })
}

const RECOVERY_HEADER: &[&str] = &[
    "K",
    "formula",
    "delta",
    "m",
    "capped",
    "exact",
    "trials",
    "fraction",
    "measurement_reduction",
];

const CERTIFIED_HEADER: &[&str] = &["trial", "recovered_support", "exact"];

fn omp(a: &OmpArgs) -> Result<Outcome> {
    if a.certify {
        let (&[k], Some(m)) = (a.k.as_slice(), a.m) else {
            bail!(usage(
                "K",
                "--certify needs a single --K and an explicit --m"
            ));
        };
        let design = match a.design {
            Design::Gaussian => MatrixDesign::Gaussian,
            Design::NearOrthogonal => MatrixDesign::NearOrthogonal {
                perturbation: a.perturbation,
            },
        };
        let r = certified_omp_experiment(&CertifiedOmpConfig {
            p: a.p,
            m,
            k,
            trials: a.trials,
            seed: a.seed,
            design,
            max_instances: a.max_instances,
        })?;
        let mut t = Table::new(CERTIFIED_HEADER);
        for (i, (support, exact)) in r.outcomes.iter().enumerate() {
            let s = support
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(" ");
            t.push(vec![i.to_string(), s, bool_cell(*exact)]);
        }
        // a certified instance that fails to recover contradicts the guarantee
        let violations = if r.certified { r.trials - r.exact } else { 0 };
        let summary = format!(
            "omp: seed={} certified={} ric_order_{}={} threshold={} instances_drawn={} exact: {}/{}",
            r.seed,
            r.certified,
            k + 1,
            fmt_num(r.ric),
            fmt_num(r.threshold),
            r.instances_drawn,
            r.exact,
            r.trials,
        );
        return Ok(Outcome {
            table: t,
            summary: Some(summary),
            violations,
        });
    }
    let r = omp_recovery_experiment(&RecoveryConfig {
        p: a.p,
        k_values: a.k.clone(),
        trials: a.trials,
        seed: a.seed,
        sizing_constant: a.sizing_constant,
    })?;
    let mut t = Table::new(RECOVERY_HEADER);
    for row in &r.rows {
        t.push(vec![
            row.k.to_string(),
            row.formula.name().into(),
            fmt_num(row.delta),
            row.m.to_string(),
            bool_cell(row.capped),
            row.exact.to_string(),
            row.trials.to_string(),
            fmt_num(row.fraction()),
            fmt_num(row.measurement_reduction),
        ]);
    }
    let worst = r
        .rows
        .iter()
        .filter(|row| !row.capped)
        .map(|row| row.fraction())
        .fold(f64::INFINITY, f64::min);
    let summary = format!(
        "omp: seed={} rows={} capped={} min_uncapped_fraction={}",
        r.seed,
        r.rows.len(),
        r.rows.iter().filter(|row| row.capped).count(),
        fmt_num(worst),
    );
    Ok(Outcome {
        table: t,
        summary: Some(summary),
        violations: 0,
    })
}
