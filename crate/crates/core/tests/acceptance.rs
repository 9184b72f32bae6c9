//! Acceptance suite: one test per criterion, every tolerance pinned in
//! code. Run with `cargo test -p ergodiff --test acceptance -- --nocapture`
//! to see one PASS line per criterion.

use std::sync::Arc;

use ergodiff::drift_fields::{make_z4_field, VectorField};
use ergodiff::ergodic_estimator::{
    convergence_diagnostic, occupation_comparison, run_ensemble, EnsembleConfig, IndicatorBall,
};
use ergodiff::recurrence_classifier::{
    classify, cr5_quotient, criterion_verdict, envelopes, logsubexp, outer_integral_logdomain,
    ClassifierConfig, Criterion, OuterIntegrand, RadialProfile, Summary, Verdict,
};
use ergodiff::sde_integrator::{
    make_noise_stream, strong_order_estimate, NoiseSource, Scheme, StrongOrderSetup,
};

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Deterministic pseudo-random points in [-5, 5]^2.
fn random_points(n: usize) -> Vec<[f64; 2]> {
    let mut s = 0.5_f64;
    let mut next = move || {
        s = (s * 997.0 + 0.1234567).fract();
        s * 10.0 - 5.0
    };
    (0..n).map(|_| [next(), next()]).collect()
}

#[test]
fn criterion_1_classifier_regression() {
    let config = ClassifierConfig::default();

    // Brownian motion: recurrent in d = 1, 2; transient for d >= 3.
    for d in [1usize, 2] {
        let report = classify(&RadialProfile::brownian(d).unwrap(), &config).unwrap();
        assert!(report.summary.is_recurrent(), "brownian d={d}: {:?}", report.summary);
    }
    for d in [3usize, 4, 5] {
        let report = classify(&RadialProfile::brownian(d).unwrap(), &config).unwrap();
        assert_eq!(report.summary, Summary::Transient, "brownian d={d}");
    }

    // Power well, alpha = 1: recurrent for d = 1, 2; transient for d >= 3;
    // no finite invariant measure in any dimension.
    for d in [1usize, 2] {
        let report = classify(&RadialProfile::power_well(d, 1.0).unwrap(), &config).unwrap();
        assert!(report.summary.is_recurrent(), "well d={d}: {:?}", report.summary);
        assert_eq!(report.verdict(Criterion::Cr5), Verdict::Holds, "well cr5 d={d}");
    }
    for d in [3usize, 4] {
        let report = classify(&RadialProfile::power_well(d, 1.0).unwrap(), &config).unwrap();
        assert_eq!(report.summary, Summary::Transient, "well d={d}");
        assert_eq!(report.verdict(Criterion::Cr5), Verdict::Holds, "well cr5 d={d}");
    }
    // quotient growth at least linear: Q(2N)/Q(N) > 1.5 for N >= 8
    for d in [1usize, 2, 3] {
        let p = RadialProfile::power_well(d, 1.0).unwrap();
        let q8 = cr5_quotient(&p, 1.0, 8.0).unwrap().log_quotient();
        let q16 = cr5_quotient(&p, 1.0, 16.0).unwrap().log_quotient();
        let q32 = cr5_quotient(&p, 1.0, 32.0).unwrap().log_quotient();
        assert!((q16 - q8).exp() > 1.5, "well d={d}: Q(16)/Q(8) = {}", (q16 - q8).exp());
        assert!((q32 - q16).exp() > 1.5, "well d={d}: Q(32)/Q(16) = {}", (q32 - q16).exp());
    }

    // Attractive power potential: positive recurrent for every tested
    // (alpha, d) pair.
    for alpha in [1.0, 2.0, 4.0] {
        for d in [1usize, 2, 3] {
            let report =
                classify(&RadialProfile::power_attract(d, alpha).unwrap(), &config).unwrap();
            assert_eq!(report.verdict(Criterion::Cr1), Verdict::Holds, "attract a={alpha} d={d}");
            assert_eq!(report.verdict(Criterion::Cr4), Verdict::Holds, "attract a={alpha} d={d}");
            assert_eq!(
                report.summary,
                Summary::PositiveRecurrent,
                "attract a={alpha} d={d}"
            );
        }
    }
    println!("ACCEPTANCE 1 (classifier regression): PASS");
}

#[test]
fn criterion_2_z4_inconclusiveness() {
    let z4 = RadialProfile::z4();
    let config = ClassifierConfig::default();

    // cr1 fails: the recurrence integral converges; the tail increment over
    // the last doubling is below 1e-8 relative.
    let cr1 = criterion_verdict(&z4, Criterion::Cr1, &config).unwrap();
    assert_eq!(cr1.verdict, Verdict::Fails);
    let l2 = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusUpper, 1.0, 2.0).unwrap();
    let l4 = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusUpper, 1.0, 4.0).unwrap();
    let tail_rel = (logsubexp(l4, l2) - l4).exp();
    assert!(tail_rel < 1e-8, "cr1 tail {tail_rel}");

    // cr2 fails: the transience integral diverges; the log partial passes 50.
    let cr2 = criterion_verdict(&z4, Criterion::Cr2, &config).unwrap();
    assert_eq!(cr2.verdict, Verdict::Fails);
    let l = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusLower, 1.0, 4.0).unwrap();
    assert!(l > 50.0, "cr2 log partial {l}");

    // cr5 quotient collapses: Q(3) under 1e-10 of Q(1.5).
    let cr5 = criterion_verdict(&z4, Criterion::Cr5, &config).unwrap();
    assert_eq!(cr5.verdict, Verdict::Fails);
    let q15 = cr5_quotient(&z4, 1.0, 1.5).unwrap().log_quotient();
    let q3 = cr5_quotient(&z4, 1.0, 3.0).unwrap().log_quotient();
    assert!(q3 - q15 < (1e-10_f64).ln(), "Q(3)/Q(1.5) = {}", (q3 - q15).exp());

    let report = classify(&z4, &config).unwrap();
    assert_eq!(report.summary, Summary::Inconclusive);
    println!("ACCEPTANCE 2 (z4 inconclusiveness): PASS");
}

#[test]
fn criterion_3_envelope_closed_form() {
    let field = make_z4_field();
    for &r in &[0.5, 1.0, 2.0, 5.0] {
        let (upper, lower) = envelopes(&field, r, 256).unwrap();
        let expect_upper = 1.0 + 8.0 * r.powi(4);
        let expect_lower = 1.0 - 8.0 * r.powi(4);
        assert!(
            rel_err(upper, expect_upper) < 1e-6,
            "upper at r={r}: {upper} vs {expect_upper}"
        );
        assert!(
            rel_err(lower, expect_lower) < 1e-6,
            "lower at r={r}: {lower} vs {expect_lower}"
        );
    }
    println!("ACCEPTANCE 3 (envelope closed form): PASS");
}

#[test]
fn criterion_4_derivative_oracle() {
    let field = make_z4_field();
    let jacobian = field.jacobian();
    let h = 1e-5;
    for x in random_points(100) {
        for k in 0..2 {
            let component = field.component(k);
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let fd = (component.eval(&xp) - component.eval(&xm)) / (2.0 * h);
                let sym = jacobian.entry(k, j).eval(&x);
                assert!(
                    rel_err(sym, fd) < 1e-6 || (sym.abs() < 1e-7 && fd.abs() < 1e-6),
                    "jacobian({k},{j}) at {x:?}: {sym} vs {fd}"
                );
            }
            // second derivatives against the identically-zero Laplacian
            let lap = field.laplacian_component(k).unwrap();
            assert!(lap.is_zero(), "component {k} must be harmonic");
            let fd_lap = (0..2)
                .map(|j| {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    (component.eval(&xp) - 2.0 * component.eval(&x) + component.eval(&xm))
                        / (h * h)
                })
                .sum::<f64>();
            // the FD Laplacian of a cubic is exact up to rounding noise
            assert!(fd_lap.abs() < 1e-3, "fd laplacian {fd_lap} at {x:?}");
        }
    }
    println!("ACCEPTANCE 4 (derivative oracle): PASS");
}

#[test]
fn criterion_5_noise_law() {
    let delta: f64 = 1e-2;
    let n: u64 = 1_000_000;
    let mut stream = make_noise_stream(2024, 0, delta);
    let mut sum_w = [0.0_f64; 2];
    let mut sum_ww = [0.0_f64; 2];
    let mut sum_zz = [0.0_f64; 2];
    let mut sum_wz = [0.0_f64; 2];
    for step in 0..n {
        let inc = stream.increment(step);
        for k in 0..2 {
            sum_w[k] += inc.dw[k];
            sum_ww[k] += inc.dw[k] * inc.dw[k];
            sum_zz[k] += inc.dz[k] * inc.dz[k];
            sum_wz[k] += inc.dw[k] * inc.dz[k];
        }
    }
    let nf = n as f64;
    for k in 0..2 {
        let mean_w = sum_w[k] / nf;
        // sample mean of n draws of N(0, delta) has standard deviation
        // sqrt(delta/n); allow four of those
        assert!(mean_w.abs() < 4.0 * (delta / nf).sqrt(), "mean dW[{k}] = {mean_w}");
        let var_w = sum_ww[k] / nf - mean_w * mean_w;
        assert!((var_w / delta - 1.0).abs() < 0.02, "Var dW[{k}]/delta = {}", var_w / delta);
        let var_z = sum_zz[k] / nf;
        let z_ref = delta.powi(3) / 3.0;
        assert!((var_z / z_ref - 1.0).abs() < 0.02, "Var dZ[{k}] ratio {}", var_z / z_ref);
        let cov = sum_wz[k] / nf;
        let cov_ref = delta * delta / 2.0;
        assert!((cov / cov_ref - 1.0).abs() < 0.02, "Cov[{k}] ratio {}", cov / cov_ref);
    }
    println!("ACCEPTANCE 5 (noise increment law): PASS");
}

#[test]
fn criterion_6_strong_order() {
    let field = make_z4_field();
    let t = 0.5;
    let setup = StrongOrderSetup {
        start: [0.5, 0.0],
        horizon: t,
        deltas: (6..=10).map(|k| t / f64::powi(2.0, k)).collect(),
        delta_ref: t / f64::powi(2.0, 14),
        n_paths: 200,
        master_seed: 17,
    };
    let taylor = strong_order_estimate(&field, Scheme::Taylor15Full, &setup).unwrap();
    let euler = strong_order_estimate(&field, Scheme::Euler, &setup).unwrap();
    let st = taylor.slope.expect("taylor errors nonzero");
    let se = euler.slope.expect("euler errors nonzero");
    assert!((1.2..=1.8).contains(&st), "taylor slope {st}");
    assert!((0.7..=1.3).contains(&se), "euler slope {se}");
    println!(
        "ACCEPTANCE 6 (strong order): PASS  taylor15_full slope {st:.3}, euler slope {se:.3}"
    );
}

#[test]
fn criterion_7_ergodic_reproduction() {
    let field = make_z4_field();
    let mut config = EnsembleConfig::new("z4", 8, 20.0, 1e-4);
    config.master_seed = 1;

    // (i) agreement across starts: every terminal within three of its own
    // batch-means standard errors of the ensemble mean
    let origin = run_ensemble(&field, &IndicatorBall::unit([0.0, 0.0]), &config).unwrap();
    assert!(origin.summary.exploded.iter().all(|e| e.is_none()), "explosion in ensemble");
    let mean = origin.summary.terminal_mean;
    for series in &origin.series {
        let terminal = series.terminal().unwrap();
        let se = series.batch_standard_error(10).unwrap();
        assert!(
            (terminal - mean).abs() <= 3.0 * se,
            "terminal {terminal} vs mean {mean} (se {se})"
        );
    }

    // (ii) occupation decays across centers at distances 0, 2, 3 with
    // non-overlapping 3-sigma intervals on the ensemble means
    let rows =
        occupation_comparison(&field, &[[0.0, 0.0], [2.0, 0.0], [3.0, 0.0]], 1.0, &config)
            .unwrap();
    for pair in rows.windows(2) {
        let hi = pair[0].terminal_mean - 3.0 * pair[0].terminal_stderr;
        let lo = pair[1].terminal_mean + 3.0 * pair[1].terminal_stderr;
        assert!(
            hi > lo,
            "intervals overlap: {:?} [{hi}] vs {:?} [{lo}]",
            pair[0].center,
            pair[1].center
        );
    }

    // (iii) the convergence diagnostic reports stabilized for every
    // trajectory
    for series in &origin.series {
        let diag = convergence_diagnostic(series, 0.25).unwrap();
        assert!(diag.stabilized, "trajectory {} not stabilized", series.trajectory_index);
    }
    println!(
        "ACCEPTANCE 7 (ergodic reproduction): PASS  f_T(0) = {mean:.4}, decay {:.4} -> {:.4} -> {:.5}",
        rows[0].terminal_mean, rows[1].terminal_mean, rows[2].terminal_mean
    );
}

#[test]
fn criterion_8_antipodal_symmetry() {
    let field = make_z4_field();
    let ball = IndicatorBall::unit([2.0, 0.0]);
    let mut config = EnsembleConfig::new("z4", 8, 5.0, 1e-4);
    config.master_seed = 1;
    let forward = run_ensemble(&field, &ball, &config).unwrap();

    let mut mirrored = config.clone();
    mirrored.starts_override =
        Some(forward.summary.starts.iter().map(|s| [-s[0], -s[1]]).collect());
    mirrored.negate_noise = true;
    let mirror_ball = IndicatorBall::unit([-2.0, 0.0]);
    let backward = run_ensemble(&field, &mirror_ball, &mirrored).unwrap();

    for (a, b) in forward.series.iter().zip(&backward.series) {
        assert_eq!(a.times, b.times, "checkpoint grids must match");
        assert_eq!(a.averages, b.averages, "f_T series must be bit-identical");
    }
    println!("ACCEPTANCE 8 (antipodal symmetry): PASS");
}

/// The z4 field definition file exercised through the same classifier path
/// the CLI uses for external field files.
#[test]
fn sampled_field_file_classification_is_inconclusive() {
    let field = ergodiff::drift_fields::PolyDriftField::from_json_str(
        ergodiff::drift_fields::Z4_FIELD_JSON,
    )
    .unwrap();
    let profile = RadialProfile::sampled(Arc::new(field) as Arc<dyn VectorField + Send + Sync>, 256)
        .unwrap();
    let config = ClassifierConfig::default();
    let report = classify(&profile, &config).unwrap();
    assert_eq!(report.summary, Summary::Inconclusive);
}
