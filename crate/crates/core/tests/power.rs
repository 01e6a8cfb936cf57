use scdf::experiments::run_power_comparison;
use scdf::power::{adaptive_split, exact_outage, numeric_split, rayleigh_optimal_split};
use scdf::SystemConfig;

#[test]
fn cubic_tracks_numeric_at_moderate_and_high_budget() {
    // the surrogate is a small-threshold expansion, so agreement is checked from 12 dB up
    let cfg = SystemConfig::asymmetric_preset().to_rayleigh();
    for db in [12.0, 16.0, 20.0, 25.0, 30.0, 40.0] {
        let p = 10f64.powf(db / 10.0);
        let num = numeric_split(&cfg, p, 1e-10).unwrap();
        let cub = rayleigh_optimal_split(&cfg, p).unwrap();
        let rel = (cub.objective_value - num.objective_value) / num.objective_value;
        assert!((0.0..0.02).contains(&rel), "{db} dB: {rel}");
    }
}

#[test]
fn numeric_split_matches_dense_grid() {
    for cfg in [SystemConfig::symmetric_preset(), SystemConfig::asymmetric_preset()] {
        for p in [2.0, 20.0, 200.0] {
            let best = (1..10_000)
                .map(|i| p * i as f64 / 10_000.0)
                .map(|x| exact_outage(&cfg, x, p - x))
                .fold(f64::INFINITY, f64::min);
            let num = numeric_split(&cfg, p, 1e-10).unwrap();
            assert!(num.objective_value <= best * (1.0 + 1e-9), "P={p}: {} vs {best}", num.objective_value);
        }
    }
}

#[test]
fn adaptive_column_is_four_ninths_split() {
    let cfg = SystemConfig::symmetric_preset();
    let report = run_power_comparison(&cfg, &[0.0, 10.0, 20.0]).unwrap();
    let adaptive = report.table.column("adaptive").unwrap();
    for (db, got) in [0.0, 10.0, 20.0].iter().zip(adaptive) {
        let p = 10f64.powf(db / 10.0);
        let want = exact_outage(&cfg, 4.0 * p / 9.0, 5.0 * p / 9.0);
        assert!((got.unwrap() / want - 1.0).abs() < 1e-12);
        assert!((adaptive_split(&cfg, p).unwrap().p_source - 4.0 * p / 9.0).abs() < 1e-12 * p);
    }
}

#[test]
fn comparison_columns() {
    let report = run_power_comparison(&SystemConfig::asymmetric_preset(), &[0.0, 10.0, 20.0]).unwrap();
    let t = &report.table;
    assert!(t.column("cubic").unwrap().iter().all(Option::is_none));
    let (eq, num) = (t.column("equal").unwrap(), t.column("numeric").unwrap());
    for (e, n) in eq.iter().zip(&num) {
        assert!(n.unwrap() <= e.unwrap());
    }
    assert!(report.max_saving_db.unwrap() >= 0.0);
}
