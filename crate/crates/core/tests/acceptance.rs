//! Acceptance suite: every release criterion as one test with one printed
//! pass/fail line (visible with `--nocapture`). Derived constants are
//! reproduced by their independent oracle inside the test before being
//! asserted against the pipeline.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use octoverify_core::algebra::{cd_inverse, cd_multiply, sedenion_zero_divisor, CDElement};
use octoverify_core::catalog::{build_chart, parse_spec};
use octoverify_core::chart::{frames_at, NormalField};
use octoverify_core::gauss::{
    eigenmap_verify, gauss_field, harmonicity_from_cache, laplacian_grid, node_weights,
};
use octoverify_core::hemisphere::{hemisphere_scan, mean_zero_check};
use octoverify_core::runner::{run, run_suite, CheckKind, RunConfig, SuiteReport, Verdict};
use octoverify_core::spectra::{bstarb_eigencheck, combined_normal, gram_spectrum, shape_operator};
use octoverify_core::tol::Tolerances;

struct TimedSuite {
    report: SuiteReport,
    elapsed: Duration,
}

fn timed_suite(workers: usize) -> TimedSuite {
    let mut cfg = RunConfig::new("great:6");
    cfg.workers = workers;
    let start = Instant::now();
    let report = run_suite(&cfg).expect("suite runs");
    TimedSuite {
        report,
        elapsed: start.elapsed(),
    }
}

fn suite_w1() -> &'static TimedSuite {
    static S: OnceLock<TimedSuite> = OnceLock::new();
    S.get_or_init(|| timed_suite(1))
}

fn suite_w8() -> &'static TimedSuite {
    static S: OnceLock<TimedSuite> = OnceLock::new();
    S.get_or_init(|| timed_suite(8))
}

fn verdict_line(n: usize, name: &str, pass: bool, details: &str) {
    println!(
        "ACCEPTANCE {n} [{name}]: {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} ({name}) failed: {details}");
}

fn entry_report<'a>(
    suite: &'a SuiteReport,
    name: &str,
) -> &'a octoverify_core::runner::VerificationReport {
    suite
        .reports
        .iter()
        .find(|r| r.entry.name == name)
        .unwrap_or_else(|| panic!("entry {name} missing from suite"))
}

fn check_stats<'a>(
    report: &'a octoverify_core::runner::VerificationReport,
    check: &str,
) -> &'a BTreeMap<String, f64> {
    &report
        .checks
        .iter()
        .find(|c| c.name == check)
        .unwrap_or_else(|| panic!("check {check} missing"))
        .stats
}

#[test]
fn criterion_1_algebra_suite() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0001);
    let mut norm_dev = 0.0f64;
    let mut alt_dev = 0.0f64;
    let mut inv_dev = 0.0f64;
    for _ in 0..10_000 {
        let x =
            CDElement::from_coords((0..8).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let y =
            CDElement::from_coords((0..8).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let p = cd_multiply(&x, &y).unwrap();
        norm_dev = norm_dev.max((p.norm() - x.norm() * y.norm()).abs());
        let xx = cd_multiply(&x, &x).unwrap();
        let lhs = cd_multiply(&x, &cd_multiply(&x, &y).unwrap()).unwrap();
        alt_dev = alt_dev.max(lhs.sub(&cd_multiply(&xx, &y).unwrap()).unwrap().norm());
        if x.norm() > 1e-2 {
            let xi = cd_inverse(&x).unwrap();
            inv_dev = inv_dev.max(
                cd_multiply(&x, &xi)
                    .unwrap()
                    .sub(&CDElement::one(3))
                    .unwrap()
                    .norm(),
            );
        }
    }
    // sedenion negative control: a zero divisor certifies the norm law fails
    let witness = sedenion_zero_divisor();
    let witness_ok = match witness {
        Some((a, b, c, d)) => {
            let x = CDElement::basis(4, a).add(&CDElement::basis(4, b)).unwrap();
            let y = CDElement::basis(4, c).sub(&CDElement::basis(4, d)).unwrap();
            cd_multiply(&x, &y).unwrap().norm() < 1e-12
        }
        None => false,
    };
    let elapsed = start.elapsed();

    let pass = norm_dev < 1e-12
        && alt_dev < 1e-12
        && inv_dev < 1e-12
        && witness_ok
        && elapsed < Duration::from_secs(1);
    verdict_line(
        1,
        "algebra",
        pass,
        &format!(
            "norm {norm_dev:.2e}, alternativity {alt_dev:.2e}, inverse {inv_dev:.2e}, \
             zero divisor {witness:?}, runtime {:.2?}",
            elapsed
        ),
    );
}

#[test]
fn criterion_2_great_sphere_eigenmap_and_lemma() {
    // oracle first: the 1-d polar reduction of the Laplacian on S⁶ applied to
    // cos φ gives −6·cos φ, so the expected eigenvalue is 6
    let m = 6.0;
    let w = |phi: f64| phi.sin().powi(5);
    let h = 1e-4;
    let mut oracle_dev = 0.0f64;
    for phi in [0.8, 1.4, 2.1] {
        let flux = |p: f64| w(p) * ((p + h).cos() - (p - h).cos()) / (2.0 * h);
        let lap = (flux(phi + h) - flux(phi - h)) / (2.0 * h) / w(phi);
        oracle_dev = oracle_dev.max((lap + m * phi.cos()).abs());
    }
    assert!(oracle_dev < 1e-6, "1-d oracle deviates: {oracle_dev}");

    let start = Instant::now();
    let mut cfg = RunConfig::new("great:6");
    cfg.grid = Some(vec![24]);
    cfg.fd_step = 1e-3;
    cfg.checks = vec![
        CheckKind::Minimality,
        CheckKind::Parallelism,
        CheckKind::Isoparametric,
        CheckKind::Lemma,
        CheckKind::Theorem2,
    ];
    let report = run(&cfg).expect("great:6 runs");
    let elapsed = start.elapsed();

    let row = &report.eigenmap_table[0];
    let lemma = check_stats(&report, "lemma");
    let pass = report.all_pass()
        && (row.lambda - 6.0).abs() < 1e-12
        && row.residual_l2 < 1e-4
        && lemma["residual_l2"] < 1e-4
        && lemma["directions"] == 20.0
        && elapsed < Duration::from_secs(30);
    verdict_line(
        2,
        "great:6 eigenmap + Laplacian identity",
        pass,
        &format!(
            "eigenmap residual {:.2e} (λ = {}), lemma residual {:.2e} over 20 directions, runtime {:.2?}",
            row.residual_l2, row.lambda, lemma["residual_l2"], elapsed
        ),
    );
}

#[test]
fn criterion_3_clifford_product() {
    // oracle: principal curvatures of the minimal S³×S³ through a chartwise
    // (finite-difference) shape operator — no analytic derivative involved
    let spec = parse_spec("product:3,3").unwrap();
    let (chart, hints) = build_chart(&spec, &[4, 4, 6, 4, 4, 6]).unwrap();
    let u = chart.node_u(chart.node_count() / 2);
    let frames = frames_at(&chart, &u, Some(&hints)).unwrap();
    let analytic = hints.hints[0].field.clone();
    let c2 = chart.clone();
    let fd_field = NormalField::chartwise(move |v| analytic.value(&c2, v));
    let op = shape_operator(&chart, &frames, &fd_field, 1e-5, "fd").unwrap();
    let pc = op.principal_curvatures().unwrap();
    let mut oracle_dev = 0.0f64;
    for (got, expect) in pc.iter().zip([-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]) {
        oracle_dev = oracle_dev.max((got - expect).abs());
    }
    assert!(
        oracle_dev < 1e-6,
        "FD curvature oracle deviates {oracle_dev}"
    );
    let hs_expected = 6.0; // 3·(−1)² + 3·(+1)²

    let report = entry_report(&suite_w1().report, "product:3,3");
    let gram = report.gram.as_ref().unwrap();
    let row = &report.eigenmap_table[0];
    let trace_max = check_stats(report, "minimality")["trace_max"];
    let pass = report.all_pass()
        && (gram.sigma[0] - hs_expected).abs() < 1e-8
        && (row.lambda - 12.0).abs() < 1e-12
        && row.residual_l2 < 1e-4
        && trace_max < 1e-8;
    verdict_line(
        3,
        "product:3,3",
        pass,
        &format!(
            "‖S‖² = {:.10} (target 6 ± 1e-8), eigenmap residual {:.2e} at λ = 12, trace max {:.2e}",
            gram.sigma[0], row.residual_l2, trace_max
        ),
    );
}

#[test]
fn criterion_4_codimension_two_product() {
    // oracle: G_{ab} = Σ_i n_i a_i b_i / r_i² on the catalog coefficient rows
    // with r_i² = n_i/5 reduces to 5·δ_{ab}
    let ns = [1.0f64, 1.0, 3.0];
    let radii: Vec<f64> = ns.iter().map(|n| (n / 5.0).sqrt()).collect();
    let rows = octoverify_core::catalog::normal_coefficient_rows(&radii);
    assert_eq!(rows.len(), 2);
    let mut oracle_dev = 0.0f64;
    for (a, ra) in rows.iter().enumerate() {
        for (b, rb) in rows.iter().enumerate() {
            let g: f64 = (0..3)
                .map(|i| ns[i] * ra[i] * rb[i] / (radii[i] * radii[i]))
                .sum();
            let expect = if a == b { 5.0 } else { 0.0 };
            oracle_dev = oracle_dev.max((g - expect).abs());
        }
    }
    assert!(oracle_dev < 1e-12, "Gram oracle deviates {oracle_dev}");

    let report = entry_report(&suite_w1().report, "product:1,1,3");
    let gram = report.gram.as_ref().unwrap();
    let iso = check_stats(report, "isoparametric");
    let mut gram_dev = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let expect = if i == j { 5.0 } else { 0.0 };
            gram_dev = gram_dev.max((gram.gram[i][j] - expect).abs());
        }
    }
    let worst_res = report
        .eigenmap_table
        .iter()
        .map(|r| r.residual_l2)
        .fold(0.0f64, f64::max);
    let lambda_ok = report
        .eigenmap_table
        .iter()
        .all(|r| (r.lambda - 10.0).abs() < 1e-8);
    let pass = report.all_pass()
        && gram_dev < 1e-8
        && iso["gram_spread"] < 1e-8
        && lambda_ok
        && report.eigenmap_table.len() == 2
        && worst_res < 1e-4
        && iso["commutator_max"] < 1e-8;
    verdict_line(
        4,
        "product:1,1,3",
        pass,
        &format!(
            "G − 5I max {gram_dev:.2e}, spread {:.2e}, both eigenmaps λ = 10 residual {:.2e}, commutator {:.2e}",
            iso["gram_spread"], worst_res, iso["commutator_max"]
        ),
    );
}

#[test]
fn criterion_5_corollary_composition() {
    // oracles: the Clifford circle-product in S³ has principal curvatures ±1
    // (FD route), so σ = 1² + 1² = 2; the flat-torus metric diag(1/2,1/2)
    // turns the angular modes cos(a), cos(b−a) into eigenvalues 2 and 4
    let spec = parse_spec("compose:great:3/product:1,1").unwrap();
    let (chart, hints) = build_chart(&spec, &[24, 24]).unwrap();
    let u = chart.node_u(100);
    let frames = frames_at(&chart, &u, Some(&hints)).unwrap();
    let analytic = hints.hints[0].field.clone();
    let c2 = chart.clone();
    let fd_field = NormalField::chartwise(move |v| analytic.value(&c2, v));
    let op = shape_operator(&chart, &frames, &fd_field, 1e-5, "fd").unwrap();
    let pc = op.principal_curvatures().unwrap();
    assert!((pc[0] + 1.0).abs() < 1e-6 && (pc[1] - 1.0).abs() < 1e-6);
    let sigma_oracle = pc[0] * pc[0] + pc[1] * pc[1];
    assert!((sigma_oracle - 2.0).abs() < 1e-5);
    let g_inv = 2.0; // both metric entries are 1/2
    let lambda_low = g_inv * 1.0; // cos(a): frequency 1 in one angle
    let lambda_high = g_inv * (1.0 + 1.0); // cos(b−a): frequency 1 in both
    assert_eq!((lambda_low, lambda_high), (2.0, 4.0));

    let report = entry_report(&suite_w1().report, "compose:great:3/product:1,1");
    let gram = report.gram.as_ref().unwrap();
    let mut sigma_dev = 0.0f64;
    for (got, expect) in gram.sigma.iter().zip([0.0, 0.0, 0.0, 0.0, 2.0]) {
        sigma_dev = sigma_dev.max((got - expect).abs());
    }
    let lambdas: Vec<f64> = report.eigenmap_table.iter().map(|r| r.lambda).collect();
    let lambda_ok = lambdas
        .iter()
        .zip([2.0, 2.0, 2.0, 2.0, 4.0])
        .all(|(a, b)| (a - b).abs() < 1e-8);
    let worst_res = report
        .eigenmap_table
        .iter()
        .map(|r| r.residual_l2)
        .fold(0.0f64, f64::max);
    let corollary = check_stats(report, "corollary");
    let pass = report.all_pass()
        && sigma_dev < 1e-8
        && lambda_ok
        && worst_res < 1e-4
        && corollary["harmonicity_defect_l2"] < 1e-4;
    verdict_line(
        5,
        "compose:great:3/product:1,1",
        pass,
        &format!(
            "spectrum dev {sigma_dev:.2e} from (0,0,0,0,2), λ = {lambdas:?}, residual {worst_res:.2e}, \
             in-sphere-normal harmonicity {:.2e}",
            corollary["harmonicity_defect_l2"]
        ),
    );
}

#[test]
fn criterion_6_equivalence_negative_direction() {
    let spec = parse_spec("compose:great:3/product:1,1").unwrap();
    let (chart, hints) = build_chart(&spec, &[24, 24]).unwrap();
    let u0 = chart.node_u(0);
    let frames = frames_at(&chart, &u0, Some(&hints)).unwrap();
    let spectrum = gram_spectrum(&chart, &frames, &hints, 1e-3).unwrap();

    // 45° mixture of a σ=0 and the σ=2 eigenvector
    let k = spectrum.k;
    let mix: Vec<f64> = (0..k)
        .map(|i| (spectrum.vectors[0][i] + spectrum.vectors[k - 1][i]) / 2.0f64.sqrt())
        .collect();
    let chk = bstarb_eigencheck(&spectrum, &mix, 1e-8).unwrap();

    let eta = combined_normal(&hints, &mix).unwrap();
    let field = gauss_field(&chart, eta, "mixture").unwrap();
    let laps = laplacian_grid(&chart, &field.eta, 1e-3).unwrap();
    let weights = node_weights(&chart);
    let (_, defect_max) = harmonicity_from_cache(&field.values, &laps, &weights);

    let pass = !chk.is_eigenvector && (chk.residual - 1.0).abs() < 1e-8 && defect_max > 0.1;
    verdict_line(
        6,
        "theorem-1 negative direction",
        pass,
        &format!(
            "mixture eigencheck residual {:.10} (target 1), harmonicity defect max {:.4} (> 0.1)",
            chk.residual, defect_max
        ),
    );
}

#[test]
fn criterion_7_hemisphere_suite() {
    let suite = &suite_w1().report;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut worst_mean = 0.0f64;
    let mut directions = 0;
    let mut all_ok = true;
    for report in &suite.reports {
        assert!(report.entry.codim <= 5, "unexpected k=6 entry in catalog");
        let hemi = report
            .checks
            .iter()
            .find(|c| c.name == "hemisphere")
            .expect("hemisphere requested");
        if hemi.verdict != Verdict::Pass {
            all_ok = false;
        }
        for h in &report.hemisphere {
            directions += 1;
            worst_margin = worst_margin.max(h.best_margin);
        }
        worst_mean = worst_mean.max(hemi.stats["mean_zero_max"]);
    }

    // synthetic constant map: the scan must detect hemisphere containment
    let spec = parse_spec("great:2").unwrap();
    let (chart, _) = build_chart(&spec, &[16, 16]).unwrap();
    let weights = node_weights(&chart);
    let mut e1 = [0.0; 8];
    e1[1] = 1.0;
    let constant = vec![e1; chart.node_count()];
    let control = hemisphere_scan(&chart, "constant", &constant, &weights, 64, 1, 1e-3).unwrap();
    let control_mean = mean_zero_check(&constant, &weights);

    let pass = all_ok
        && worst_margin <= 1e-3
        && worst_mean < 1e-5
        && (control.best_margin - 1.0).abs() < 1e-12
        && (control_mean - 1.0).abs() < 1e-12;
    verdict_line(
        7,
        "hemisphere suite",
        pass,
        &format!(
            "{directions} eigen-directions: worst margin {worst_margin:+.2e} (≤ 1e-3), \
             worst mean {worst_mean:.2e} (< 1e-5); constant-map control margin {:.3}",
            control.best_margin
        ),
    );
}

#[test]
fn criterion_8_fd_convergence() {
    let tol = Tolerances::default();
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["great:6", "product:3,3", "product:1,1,3"] {
        let cfg = RunConfig::new(name);
        let entry = octoverify_core::runner::prepare_entry(&cfg).unwrap();
        let coarse = eigenmap_verify(
            &entry.chart,
            &entry.hints,
            &entry.spectrum,
            0,
            2e-3,
            &tol,
            None,
        )
        .unwrap()
        .residual_l2;
        let fine = eigenmap_verify(
            &entry.chart,
            &entry.hints,
            &entry.spectrum,
            0,
            1e-3,
            &tol,
            None,
        )
        .unwrap()
        .residual_l2;
        let ratio = coarse / fine;
        if !(3.5..=4.5).contains(&ratio) {
            pass = false;
        }
        details.push(format!("{name}: {ratio:.3}"));
    }
    verdict_line(
        8,
        "FD second-order convergence",
        pass,
        &format!(
            "residual ratios h=2e-3 vs 1e-3 in [3.5, 4.5]: {}",
            details.join(", ")
        ),
    );
}

#[test]
fn criterion_9_determinism_and_runtime() {
    let w1 = suite_w1();
    let w8 = suite_w8();
    let identical = w1.report.canonical_json() == w8.report.canonical_json();
    let within_budget =
        w1.elapsed < Duration::from_secs(600) && w8.elapsed < Duration::from_secs(600);
    let pass = identical && w1.report.all_pass && w8.report.all_pass && within_budget;
    verdict_line(
        9,
        "determinism + runtime",
        pass,
        &format!(
            "workers 1 vs 8 canonical reports identical: {identical}; suite runtimes {:.1?} / {:.1?} (< 600 s); all pass: {}",
            w1.elapsed, w8.elapsed, w1.report.all_pass && w8.report.all_pass
        ),
    );
}
