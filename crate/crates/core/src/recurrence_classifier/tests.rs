use std::sync::Arc;

use super::*;
use crate::drift_fields::{make_z4_field, make_zero_field};

fn rel_close(a: f64, b: f64, rtol: f64) -> bool {
    (a - b).abs() <= rtol * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn c_function_values() {
    let z4 = make_z4_field();
    assert_eq!(c_function(&z4, &[1.0, 0.0]).unwrap(), -8.0);
    assert_eq!(c_function(&z4, &[0.0, 1.0]).unwrap(), 8.0);
    assert_eq!(c_function(&z4, &[0.0, 0.0]).unwrap(), 0.0);
    // C(x) = 8 (x2^4 - x1^4) for the z4 drift
    let x = [1.3, -0.4];
    assert!(rel_close(
        c_function(&z4, &x).unwrap(),
        8.0 * (x[1].powi(4) - x[0].powi(4)),
        1e-12
    ));
    let zero = make_zero_field(2);
    assert_eq!(c_function(&zero, &[3.0, 4.0]).unwrap(), 0.0);
}

#[test]
fn sampled_envelopes_match_z4_closed_form() {
    let z4 = make_z4_field();
    for &r in &[0.5, 1.0, 2.0, 5.0] {
        let (up, lo) = envelopes(&z4, r, 256).unwrap();
        let expect_up = 1.0 + 8.0 * r.powi(4);
        let expect_lo = 1.0 - 8.0 * r.powi(4);
        assert!(rel_close(up, expect_up, 1e-6), "upper at r={r}: {up} vs {expect_up}");
        assert!(rel_close(lo, expect_lo, 1e-6), "lower at r={r}: {lo} vs {expect_lo}");
    }
    let (up, lo) = envelopes(&z4, 1.0, 256).unwrap();
    assert!(rel_close(up, 9.0, 1e-9) && rel_close(lo, -7.0, 1e-9));
    let (up2, lo2) = envelopes(&z4, 2.0, 256).unwrap();
    assert!(rel_close(up2, 129.0, 1e-9) && rel_close(lo2, -127.0, 1e-9));
}

#[test]
fn zero_drift_envelopes_are_flat() {
    let zero = make_zero_field(2);
    for &r in &[0.1, 1.0, 10.0] {
        let (up, lo) = envelopes(&zero, r, 64).unwrap();
        assert_eq!((up, lo), (1.0, 1.0));
    }
}

#[test]
fn envelope_input_validation() {
    let z4 = make_z4_field();
    assert!(envelopes(&z4, 0.0, 64).is_err());
    assert!(envelopes(&z4, 1.0, 4).is_err());
    assert!(envelopes(&make_zero_field(3), 1.0, 64).is_err());
}

#[test]
fn i_integral_closed_forms() {
    let z4 = RadialProfile::z4();
    // ln 2 + 2 (2^4 - 1)
    let v = z4.i_integral(Envelope::Upper, 1.0, 2.0).unwrap();
    assert!(rel_close(v, std::f64::consts::LN_2 + 30.0, 1e-14), "{v}");
    let brownian = RadialProfile::brownian(2).unwrap();
    let e = brownian.i_integral(Envelope::Upper, 1.0, std::f64::consts::E).unwrap();
    assert!(rel_close(e, 1.0, 1e-14), "{e}");
    assert_eq!(z4.i_integral(Envelope::Lower, 2.5, 2.5).unwrap(), 0.0);
    assert!(z4.i_integral(Envelope::Upper, 2.0, 1.0).is_err());
    assert!(z4.i_integral(Envelope::Upper, 0.0, 1.0).is_err());
}

#[test]
fn quadrature_route_matches_closed_forms() {
    let profiles = [
        RadialProfile::brownian(1).unwrap(),
        RadialProfile::brownian(3).unwrap(),
        RadialProfile::power_well(2, 1.0).unwrap(),
        RadialProfile::power_well(3, 1.0).unwrap(),
        RadialProfile::power_attract(2, 2.0).unwrap(),
        RadialProfile::power_attract(1, 4.0).unwrap(),
        RadialProfile::z4(),
    ];
    for p in &profiles {
        for which in [Envelope::Upper, Envelope::Lower] {
            for &(r0, r) in &[(0.5, 1.0), (1.0, 2.0), (1.0, 5.5), (2.0, 3.25)] {
                let closed = p.i_closed(which, r0, r).unwrap();
                let numeric = p.i_numeric(which, r0, r).unwrap();
                assert!(
                    rel_close(closed, numeric, 1e-8),
                    "{} {which:?} on [{r0},{r}]: {closed} vs {numeric}",
                    p.name()
                );
            }
        }
    }
}

#[test]
fn sampled_z4_profile_matches_builtin() {
    let z4 = RadialProfile::z4();
    let sampled = RadialProfile::sampled(Arc::new(make_z4_field()), 256).unwrap();
    for which in [Envelope::Upper, Envelope::Lower] {
        let a = z4.i_integral(which, 1.0, 2.0).unwrap();
        let b = sampled.i_integral(which, 1.0, 2.0).unwrap();
        assert!(rel_close(a, b, 1e-6), "{which:?}: {a} vs {b}");
    }
    assert!(sampled.envelope_order_ok(&[0.5, 1.0, 2.0, 5.0]));
}

#[test]
fn i_upper_dominates_i_lower() {
    let z4 = RadialProfile::z4();
    for &r in &[1.0, 1.5, 2.0, 4.0, 8.0] {
        let up = z4.i_integral(Envelope::Upper, 1.0, r).unwrap();
        let lo = z4.i_integral(Envelope::Lower, 1.0, r).unwrap();
        assert!(up >= lo);
    }
}

#[test]
fn log_integral_brownian_is_log_log() {
    // d = 2: int_1^N du/u = ln N, so the log of the integral is ln ln N.
    let b2 = RadialProfile::brownian(2).unwrap();
    for &n in &[4.0, 16.0, 256.0] {
        let v = outer_integral_logdomain(&b2, OuterIntegrand::ExpMinusUpper, 1.0, n).unwrap();
        assert!(rel_close(v, n.ln().ln(), 1e-8), "N={n}: {v} vs {}", n.ln().ln());
    }
}

#[test]
fn log_integral_z4_transience_integrand() {
    // integrand (r0/u) exp(2(u^4 - r0^4)); reference value from
    // high-precision quadrature: 153.53234034494768 at N = 3.
    let z4 = RadialProfile::z4();
    let v = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusLower, 1.0, 3.0).unwrap();
    assert!((150.0..=162.0).contains(&v), "{v}");
    assert!((v - 153.53234034494768).abs() < 1e-5, "{v}");
}

#[test]
fn log_integral_z4_recurrence_tail_is_negligible() {
    let z4 = RadialProfile::z4();
    let l3 = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusUpper, 1.0, 3.0).unwrap();
    let l4 = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusUpper, 1.0, 4.0).unwrap();
    assert!(l4 >= l3);
    // increment below 1e-60 in linear scale
    let inc = logsubexp(l4, l3);
    assert!(inc < -138.0, "tail increment e^{inc}");
}

#[test]
fn log_integral_state_is_incremental() {
    let z4 = RadialProfile::z4();
    let mut state = LogIntegralState::new(&z4, OuterIntegrand::ExpMinusLower, 1.0, 1_000_000).unwrap();
    let v2 = state.extend_to(2.0).unwrap();
    let v3 = state.extend_to(3.0).unwrap();
    let direct2 = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusLower, 1.0, 2.0).unwrap();
    let direct3 = outer_integral_logdomain(&z4, OuterIntegrand::ExpMinusLower, 1.0, 3.0).unwrap();
    assert!((v2 - direct2).abs() < 1e-9);
    assert!((v3 - direct3).abs() < 1e-9);
}

#[test]
fn cr5_toy_quotient_is_half_span() {
    // beta = 0 (Brownian d = 1): I = 0, inner integral = s - r0, so
    // Q(N) = ((N - r0)^2 / 2) / (N - r0) = (N - r0) / 2.
    let toy = RadialProfile::brownian(1).unwrap();
    let q = cr5_quotient(&toy, 1.0, 9.0).unwrap();
    let val = (q.log_numerator - q.log_denominator).exp();
    assert!(rel_close(val, 4.0, 1e-6), "{val}");
}

#[test]
fn cr5_power_well_grows_at_least_linearly() {
    for d in [1, 2, 3] {
        let p = RadialProfile::power_well(d, 1.0).unwrap();
        let mut prev = cr5_quotient(&p, 1.0, 8.0).unwrap().log_quotient();
        for &n in &[16.0, 32.0] {
            let next = cr5_quotient(&p, 1.0, n).unwrap().log_quotient();
            let ratio = (next - prev).exp();
            assert!(ratio > 1.5, "d={d}, N={n}: ratio {ratio}");
            prev = next;
        }
    }
    // frozen oracle: Q(16)/Q(8) = 3.2709 for d = 3
    let p3 = RadialProfile::power_well(3, 1.0).unwrap();
    let q8 = cr5_quotient(&p3, 1.0, 8.0).unwrap().log_quotient();
    let q16 = cr5_quotient(&p3, 1.0, 16.0).unwrap().log_quotient();
    assert!(rel_close((q16 - q8).exp(), 3.2709234, 1e-3));
}

#[test]
fn cr5_z4_quotient_collapses() {
    let z4 = RadialProfile::z4();
    let q15 = cr5_quotient(&z4, 1.0, 1.5).unwrap().log_quotient();
    let q3 = cr5_quotient(&z4, 1.0, 3.0).unwrap().log_quotient();
    // frozen oracle: log Q(1.5) = -8.1503, log Q(3) = -156.56
    assert!((q15 - -8.150253947756407).abs() < 1e-4, "{q15}");
    assert!((q3 - -156.55911287294467).abs() < 1e-3, "{q3}");
    assert!(q3 - q15 < (1e-10_f64).ln());
}

fn default_config() -> ClassifierConfig {
    ClassifierConfig::default()
}

#[test]
fn brownian_regression_verdicts() {
    let cfg = default_config();
    for d in [1, 2] {
        let p = RadialProfile::brownian(d).unwrap();
        let cr1 = criterion_verdict(&p, Criterion::Cr1, &cfg).unwrap();
        assert_eq!(cr1.verdict, Verdict::Holds, "cr1 d={d}");
        let report = classify(&p, &cfg).unwrap();
        assert!(report.summary.is_recurrent(), "d={d}: {:?}", report.summary);
    }
    for d in [3, 4, 5] {
        let p = RadialProfile::brownian(d).unwrap();
        let cr2 = criterion_verdict(&p, Criterion::Cr2, &cfg).unwrap();
        assert_eq!(cr2.verdict, Verdict::Holds, "cr2 d={d}");
        let report = classify(&p, &cfg).unwrap();
        assert_eq!(report.summary, Summary::Transient, "d={d}");
    }
}

#[test]
fn z4_all_criteria_fail() {
    let cfg = default_config();
    let z4 = RadialProfile::z4();
    let report = classify(&z4, &cfg).unwrap();
    assert_eq!(report.verdict(Criterion::Cr1), Verdict::Fails);
    assert_eq!(report.verdict(Criterion::Cr2), Verdict::Fails);
    assert_eq!(report.verdict(Criterion::Cr4), Verdict::Fails);
    assert_eq!(report.verdict(Criterion::Cr5), Verdict::Fails);
    assert_eq!(report.summary, Summary::Inconclusive);
    assert!(report.notes.contains("stays open"));
}

#[test]
fn power_attract_is_positive_recurrent() {
    let cfg = default_config();
    let p = RadialProfile::power_attract(2, 2.0).unwrap();
    let report = classify(&p, &cfg).unwrap();
    assert_eq!(report.verdict(Criterion::Cr1), Verdict::Holds);
    assert_eq!(report.verdict(Criterion::Cr4), Verdict::Holds);
    assert_eq!(report.summary, Summary::PositiveRecurrent);
}

#[test]
fn power_well_matrix() {
    let cfg = default_config();
    for d in [1, 2] {
        let p = RadialProfile::power_well(d, 1.0).unwrap();
        let report = classify(&p, &cfg).unwrap();
        assert!(report.summary.is_recurrent(), "d={d}: {:?}", report.summary);
        assert_eq!(report.verdict(Criterion::Cr5), Verdict::Holds, "d={d}");
        assert_eq!(report.summary, Summary::RecurrentNoFiniteMeasure, "d={d}");
    }
    let p3 = RadialProfile::power_well(3, 1.0).unwrap();
    let report = classify(&p3, &cfg).unwrap();
    assert_eq!(report.summary, Summary::Transient);
    assert_eq!(report.verdict(Criterion::Cr5), Verdict::Holds);
}

#[test]
fn evidence_is_monotone_for_partial_integrals() {
    let cfg = default_config();
    for p in [
        RadialProfile::brownian(3).unwrap(),
        RadialProfile::z4(),
        RadialProfile::power_attract(2, 1.0).unwrap(),
    ] {
        for c in [Criterion::Cr1, Criterion::Cr2, Criterion::Cr4] {
            let v = criterion_verdict(&p, c, &cfg).unwrap();
            for w in v.evidence.windows(2) {
                assert!(w[1].1 >= w[0].1, "{} {c:?}: {:?}", p.name(), v.evidence);
            }
        }
    }
}

#[test]
fn report_json_schema() {
    let cfg = default_config();
    let report = classify(&RadialProfile::brownian(2).unwrap(), &cfg).unwrap();
    let json: serde_json::Value = serde_json::from_str(&report.to_json_string()).unwrap();
    assert_eq!(json["profile"], "brownian(d=2)");
    assert_eq!(json["r0"], 1.0);
    assert!(json["criteria"].as_array().unwrap().len() == 4);
    let first = &json["criteria"][0];
    assert_eq!(first["name"], "cr1");
    assert_eq!(first["verdict"], "holds");
    assert!(first["evidence"][0].as_array().unwrap().len() == 2);
    assert!(json["summary"].is_string());
}

#[test]
fn stationary_residual_vanishes_for_well_density() {
    let mut s = 0.37_f64;
    let mut next = || {
        s = (s * 997.0 + 0.1234567).fract();
        s
    };
    for &alpha in &[1.0, 2.0] {
        for dim in [2usize, 3] {
            for _ in 0..50 {
                // random direction and radius in [0.5, 5]
                let r = 0.5 + 4.5 * next();
                let mut x: Vec<f64> = (0..dim).map(|_| next() - 0.5).collect();
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v *= r / norm);
                let res = power_well_stationary_residual(alpha, &x).unwrap();
                assert!(res.abs() < 1e-8, "alpha={alpha} d={dim} x={x:?}: {res}");
            }
        }
    }
    assert!(power_well_stationary_residual(1.0, &[0.0, 0.0]).is_err());
    assert!(power_well_stationary_residual(-1.0, &[1.0, 0.0]).is_err());
}

#[test]
fn logaddexp_and_logsubexp_basics() {
    assert!(rel_close(logaddexp(1000.0, 1000.0), 1000.0 + std::f64::consts::LN_2, 1e-12));
    assert_eq!(logaddexp(f64::NEG_INFINITY, 3.0), 3.0);
    assert!(rel_close(logsubexp(1000.0 + std::f64::consts::LN_2, 1000.0), 1000.0, 1e-12));
    assert_eq!(logsubexp(5.0, 5.0), f64::NEG_INFINITY);
}
