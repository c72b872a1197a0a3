//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion and then asserts it.
//!
//! Run with `cargo test -p ripangle-cli --test acceptance -- --nocapture`.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;
use std::process::Command as Proc;

use clap::Parser;
use ripangle::lab::{
    certified_omp_experiment, containment_experiment, projected_ric_experiment, CertifiedOmpConfig,
    ContainmentConfig, MatrixDesign, ProjectedRicConfig, ThetaSource,
};
use ripangle::ric::omp_quadratic;
use ripangle::{
    achievable_cos_range, algebraic_projected_ric, angle_interval, invert_projected_ric,
    normalize_scenario, omp_ric_threshold, omp_ric_threshold_prior, oracle_extremes,
    orthogonal_interval, polarization_cos_bound, projected_ric, SensingConfig,
};
use ripangle_cli::commands::ORDERING_NOTE;
use ripangle_cli::{run, Cli};

fn report(id: u32, title: &str, ok: bool, detail: String) {
    println!(
        "{} criterion {id}: {title} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

fn sweep_deltas() -> Vec<f64> {
    (1..=18).map(|i| i as f64 * 0.05).collect()
}

fn sweep_thetas() -> Vec<f64> {
    (1..=18).map(|i| (i as f64 * 5.0).to_radians()).collect()
}

fn cli(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("ripangle").chain(args.iter().copied())).unwrap()
}

#[test]
fn criterion_1_oracle_equivalence() {
    let tol = 0.01f64.to_radians();
    let (mut worst_min, mut worst_max, mut worst_res) = (0.0f64, 0.0f64, 0.0f64);
    let mut points = 0;
    let mut failures = Vec::new();
    for &delta in &sweep_deltas() {
        for &theta in &sweep_thetas() {
            let closed = angle_interval(delta, theta).unwrap();
            let o = oracle_extremes(&normalize_scenario(delta, theta).unwrap(), 96).unwrap();
            let dmin = (o.alpha_min - closed.alpha_min).abs();
            let dmax = (o.alpha_max - closed.alpha_max).abs();
            if dmin > tol || dmax > tol {
                failures.push((delta, theta.to_degrees(), dmin, dmax));
            }
            worst_min = worst_min.max(dmin);
            worst_max = worst_max.max(dmax);
            worst_res = worst_res.max(o.resolution_bound);
            points += 1;
        }
    }
    report(
        1,
        "closed forms match brute-force oracle within 0.01 deg",
        failures.is_empty() && points == 324,
        format!(
            "{points} points, max |dev| min {:.3e} deg, max {:.3e} deg, max resolution bound {:.3e} rad, failures {failures:?}",
            worst_min.to_degrees(),
            worst_max.to_degrees(),
            worst_res
        ),
    );
}

#[test]
fn criterion_2_right_angle_reduction() {
    let mut worst = 0.0f64;
    for i in 1..=1000 {
        let delta = i as f64 / 1001.0;
        let general = angle_interval(delta, FRAC_PI_2).unwrap();
        let direct = orthogonal_interval(delta).unwrap();
        worst = worst
            .max((general.alpha_min - direct.alpha_min).abs())
            .max((general.alpha_max - direct.alpha_max).abs());
    }
    report(
        2,
        "general interval at theta = pi/2 equals the orthogonal form",
        worst <= 1e-12,
        format!("1000 deltas, max |diff| {worst:.3e} rad"),
    );
}

#[test]
fn criterion_3_tighter_than_polarization() {
    let mut worst = f64::NEG_INFINITY;
    for &delta in &sweep_deltas() {
        for &theta in &sweep_thetas() {
            let hi = achievable_cos_range(delta, theta).unwrap().hi;
            let pol = polarization_cos_bound(&normalize_scenario(delta, theta).unwrap());
            worst = worst.max(hi - pol);
        }
    }

    // curves for delta = 0.2 and 0.3 against theta, as CSV
    let thetas: Vec<String> = (1..=90).map(|d| d.to_string()).collect();
    let c = cli(&[
        "sweep",
        "--delta",
        "0.2,0.3",
        "--theta-deg",
        &thetas.join(","),
    ]);
    let out = run(&c).unwrap();
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cos_curves_delta_0.2_0.3.csv");
    std::fs::write(&path, out.table.to_csv_string()).unwrap();
    let cos_hi = out.table.column("cos_hi");
    let pol = out.table.column("pol_bound");
    let curve_ok = out.table.rows.len() == 180
        && cos_hi
            .iter()
            .zip(&pol)
            .all(|(c, p)| c.parse::<f64>().unwrap() <= p.parse::<f64>().unwrap() + 1e-9);

    report(
        3,
        "achievable |cos| never exceeds the polarization bound",
        worst <= 1e-12 && curve_ok,
        format!(
            "324 grid points, max (hi - pol) {worst:.3e}; curves written to {}",
            path.display()
        ),
    );
}

#[test]
fn criterion_4_monte_carlo_containment() {
    let mut violations = 0;
    let mut counted = 0;
    let mut excluded = 0;
    for seed in 0..10 {
        let cfg = ContainmentConfig::new(
            SensingConfig {
                p: 256,
                m: 128,
                k: 8,
                seed,
                trials: 2000,
            },
            ThetaSource::Uniform {
                lo: 0.0,
                hi: FRAC_PI_2,
            },
        );
        let r = containment_experiment(&cfg).unwrap();
        violations += r.violations;
        counted += r.counted;
        excluded += r.excluded;
    }
    report(
        4,
        "sampled compressed angles stay inside their intervals",
        violations == 0 && counted + excluded == 20_000,
        format!("10 seeds x 2000 pairs, counted {counted}, excluded {excluded}, violations {violations}"),
    );
}

#[test]
fn criterion_5_projected_ric() {
    let mut grid_ok = true;
    let mut grid_points = 0;
    for i in 1..1000 {
        let delta = i as f64 / 1000.0;
        let alg = algebraic_projected_ric(delta).unwrap();
        if alg < 1.0 {
            grid_points += 1;
            grid_ok &= projected_ric(delta).unwrap() < alg;
        }
    }
    let r = projected_ric_experiment(&ProjectedRicConfig {
        sensing: SensingConfig {
            p: 128,
            m: 96,
            k: 10,
            seed: 7,
            trials: 500,
        },
        k_i: 4,
    })
    .unwrap();
    let at_worked = projected_ric(0.3217).unwrap();
    let inverted = invert_projected_ric(0.4).unwrap();
    let ok = grid_ok
        && r.violations == 0
        && (at_worked - 0.4).abs() <= 1e-3
        && (inverted - 0.3208).abs() <= 2e-3;
    report(
        5,
        "projected RIC is tighter and empirically sound",
        ok,
        format!(
            "{grid_points} grid deltas ordered: {grid_ok}; 500 trials, {} violations, {} excluded, mean slack {:.4}; projected_ric(0.3217) = {at_worked:.6}; inversion at 0.4 = {inverted:.6} vs printed 0.3208",
            r.violations, r.excluded, r.mean_slack
        ),
    );
}

#[test]
fn criterion_6_omp_threshold_identity() {
    let mut worst_root = 0.0f64;
    let mut worst_trip = 0.0f64;
    for k in 1..=100usize {
        let d = omp_ric_threshold(k).unwrap();
        worst_root = worst_root.max(omp_quadratic(k, d).abs());
        worst_trip =
            worst_trip.max((2.0 * projected_ric(d).unwrap() * (k as f64).sqrt() - 1.0).abs());
    }
    report(
        6,
        "OMP threshold solves its quadratic and round-trips",
        worst_root <= 1e-10 && worst_trip <= 1e-10,
        format!(
            "K = 1..100, max |quadratic| {worst_root:.3e}, max |round trip - 1| {worst_trip:.3e}"
        ),
    );
}

#[test]
fn criterion_7_certified_omp() {
    let threshold = omp_ric_threshold(2).unwrap();
    let r = certified_omp_experiment(&CertifiedOmpConfig {
        p: 32,
        m: 28,
        k: 2,
        trials: 100,
        seed: 7,
        design: MatrixDesign::NearOrthogonal {
            perturbation: 0.005,
        },
        max_instances: 64,
    })
    .unwrap();
    report(
        7,
        "OMP recovers every 2-sparse vector on a certified 28x32 matrix",
        r.certified && r.exact == 100 && r.threshold == threshold,
        format!(
            "RIC of order 3 = {:.6} < threshold {:.6}: {}, exact {}/{}, instances drawn {}",
            r.ric, r.threshold, r.certified, r.exact, r.trials, r.instances_drawn
        ),
    );
}

#[test]
fn criterion_8_discrepancy_reporting() {
    let curve = run(&cli(&["ric", "--curve", "omp", "--k-max", "100"])).unwrap();
    let projected = curve.table.column("delta_projected");
    let prior = curve.table.column("delta_prior");
    let notes = curve.table.column("note");
    let mut consistent = true;
    let mut differing = 0;
    for i in 0..curve.table.rows.len() {
        let (a, b): (f64, f64) = (projected[i].parse().unwrap(), prior[i].parse().unwrap());
        let expect_note = a < b;
        differing += expect_note as usize;
        consistent &= (notes[i] == ORDERING_NOTE) == expect_note;
    }
    let k1 = (
        omp_ric_threshold(1).unwrap(),
        omp_ric_threshold_prior(1).unwrap(),
    );

    let tau = run(&cli(&["ric", "--tau", "0.4"])).unwrap();
    let emitted: f64 = tau.table.column("delta_new")[0].parse().unwrap();
    report(
        8,
        "ric emits both curves and flags ordering against the text",
        curve.table.rows.len() == 100
            && consistent
            && (emitted - invert_projected_ric(0.4).unwrap()).abs() < 1e-9,
        format!(
            "{differing}/100 rows flagged {ORDERING_NOTE}; K=1 projected {:.6} vs prior {:.6}; tau 0.4 -> {emitted}",
            k1.0, k1.1
        ),
    );
}

fn run_bin(args: &[&str], out: &PathBuf) -> (Vec<u8>, i32) {
    let status = Proc::new(env!("CARGO_BIN_EXE_ripangle"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    (
        std::fs::read(out).unwrap(),
        status.status.code().unwrap_or(-1),
    )
}

#[test]
fn criterion_9_determinism() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let commands: &[(&str, &[&str])] = &[
        (
            "containment",
            &[
                "containment",
                "--p",
                "256",
                "--K",
                "8",
                "--m",
                "128",
                "--trials",
                "500",
                "--seed",
                "7",
            ],
        ),
        (
            "projric",
            &[
                "projric", "--p", "128", "--m", "96", "--K", "10", "--kI", "4", "--trials", "200",
                "--seed", "7",
            ],
        ),
        (
            "omp",
            &[
                "omp", "--p", "256", "--K", "1,2,3,4", "--trials", "50", "--seed", "7",
            ],
        ),
        (
            "omp-certify",
            &[
                "omp",
                "--p",
                "32",
                "--m",
                "28",
                "--K",
                "2",
                "--certify",
                "--trials",
                "100",
                "--seed",
                "7",
            ],
        ),
        (
            "sweep",
            &[
                "sweep",
                "--delta",
                "0.2,0.6",
                "--theta-deg",
                "10,45,90",
                "--oracle",
                "--grid-n",
                "32",
            ],
        ),
        ("ric", &["ric", "--curve", "omp"]),
    ];
    let mut mismatched = Vec::new();
    for (name, args) in commands {
        let a = run_bin(args, &dir.join(format!("det_{name}_a.csv")));
        let b = run_bin(args, &dir.join(format!("det_{name}_b.csv")));
        if a != b || a.1 != 0 || a.0.is_empty() {
            mismatched.push(*name);
        }
        assert!(dir.join(format!("det_{name}_a.csv.manifest")).exists());
    }
    report(
        9,
        "experiment commands give byte-identical CSV on rerun",
        mismatched.is_empty(),
        format!(
            "{} commands rerun, mismatched {mismatched:?}",
            commands.len()
        ),
    );
}
