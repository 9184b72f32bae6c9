use std::time::Instant;
use ergodiff::recurrence_classifier::*;

fn main() {
    let config = ClassifierConfig::default();
    let cases: Vec<(String, RadialProfile)> = vec![
        ("brownian d1".into(), RadialProfile::brownian(1).unwrap()),
        ("brownian d2".into(), RadialProfile::brownian(2).unwrap()),
        ("brownian d3".into(), RadialProfile::brownian(3).unwrap()),
        ("brownian d5".into(), RadialProfile::brownian(5).unwrap()),
        ("well d1".into(), RadialProfile::power_well(1, 1.0).unwrap()),
        ("well d3".into(), RadialProfile::power_well(3, 1.0).unwrap()),
        ("attr a1 d1".into(), RadialProfile::power_attract(1, 1.0).unwrap()),
        ("attr a2 d2".into(), RadialProfile::power_attract(2, 2.0).unwrap()),
        ("attr a4 d1".into(), RadialProfile::power_attract(1, 4.0).unwrap()),
        ("attr a4 d3".into(), RadialProfile::power_attract(3, 4.0).unwrap()),
    ];
    for (name, p) in &cases {
        for c in [Criterion::Cr1, Criterion::Cr2, Criterion::Cr4, Criterion::Cr5] {
            let t = Instant::now();
            let v = criterion_verdict(p, c, &config).unwrap();
            let el = t.elapsed().as_secs_f64();
            if el > 0.2 {
                println!("{name} {c:?}: {:?} in {el:.2}s ({} evidence)", v.verdict, v.evidence.len());
            }
        }
        println!("{name}: done");
    }
}
