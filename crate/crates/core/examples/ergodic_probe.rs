use ergodiff::drift_fields::make_z4_field;
use ergodiff::ergodic_estimator::{
    convergence_diagnostic, occupation_comparison, run_ensemble, EnsembleConfig, IndicatorBall,
};

fn main() {
    let field = make_z4_field();
    for seed in [1u64, 2, 7, 42] {
        let mut config = EnsembleConfig::new("z4", 8, 20.0, 1e-4);
        config.master_seed = seed;
        let result = run_ensemble(&field, &IndicatorBall::unit([0.0, 0.0]), &config).unwrap();
        let nexp = result.summary.exploded.iter().filter(|e| e.is_some()).count();
        let mean = result.summary.terminal_mean;
        let std = result.summary.terminal_std;
        let max_dev = result
            .summary
            .terminals
            .iter()
            .map(|t| (t - mean).abs())
            .fold(0.0f64, f64::max);
        let max_dev_over_batchse = result
            .series
            .iter()
            .map(|s| {
                let se = s.batch_standard_error(10).unwrap_or(1e-9);
                (s.terminal().unwrap() - mean).abs() / se.max(1e-6)
            })
            .fold(0.0f64, f64::max);
        let all_stab = result
            .series
            .iter()
            .all(|s| convergence_diagnostic(s, 0.25).map(|d| d.stabilized).unwrap_or(false));
        println!(
            "seed {seed}: exploded={nexp} mean={mean:.4} std={std:.4} max_dev={max_dev:.4} maxdev/batchse={max_dev_over_batchse:.2} all_stabilized={all_stab}"
        );
        let rows = occupation_comparison(&field, &[[0.0, 0.0], [2.0, 0.0], [3.0, 0.0]], 1.0, &config).unwrap();
        for r in &rows {
            println!(
                "   center ({:.0},{:.0}): mean={:.5} stderr={:.5}  3sig=({:.5},{:.5})",
                r.center[0], r.center[1], r.terminal_mean, r.terminal_stderr,
                r.terminal_mean - 3.0 * r.terminal_stderr,
                r.terminal_mean + 3.0 * r.terminal_stderr
            );
        }
    }
}
