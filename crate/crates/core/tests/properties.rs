use proptest::prelude::*;

use scdf::analytic::{mgf, outage_probability, sc_pdf_mixture, sc_pdf_mixture_for_config, sep_mpsk};
use scdf::montecarlo::simulate_outage;
use scdf::power::{equal_split, numeric_split};
use scdf::{Antennas, BranchParams, LinkParams, SystemConfig};

#[test]
fn mixtures_normalize() {
    for k in 1..=5 {
        for m in 1..=4u32 {
            for ant in [Antennas::One, Antennas::Two] {
                let mix = sc_pdf_mixture(k, m, 0.7, ant).unwrap();
                assert!((mix.total_mass() - 1.0).abs() < 1e-9, "K={k} m={m} {ant:?}");
            }
        }
    }
}

#[test]
fn mixture_cdf_at_threshold_is_outage() {
    for snr in [0.0, 6.0, 12.0] {
        for k in 1..=4 {
            let cfg = SystemConfig::symmetric_with(k, 2, 3.0).at_snr_db(snr);
            let mix = sc_pdf_mixture_for_config(&cfg).unwrap();
            let out = outage_probability(&cfg).unwrap();
            assert!((mix.cdf(cfg.gamma_th) - out).abs() < 1e-9);
        }
    }
}

#[test]
fn mgf_is_completely_monotone_on_a_grid() {
    let mix = sc_pdf_mixture(3, 2, 0.5, Antennas::Two).unwrap();
    let vals: Vec<f64> = (0..60).map(|i| mgf(&mix, 0.25 * i as f64)).collect();
    assert_eq!(vals[0], vals[0].min(1.0 + 1e-12));
    for w in vals.windows(3) {
        assert!(w[1] < w[0]);
        assert!(w[2] - 2.0 * w[1] + w[0] > 0.0);
    }
    assert!(vals.iter().all(|v| *v > 0.0));
}

#[test]
fn sweeps_are_monotone() {
    let base = SystemConfig::symmetric_preset();
    let mut last = (f64::INFINITY, f64::INFINITY);
    for i in 0..=10 {
        let cfg = base.at_snr_db(2.0 * i as f64);
        let out = outage_probability(&cfg).unwrap();
        let sep = sep_mpsk(&sc_pdf_mixture_for_config(&cfg).unwrap(), 16).unwrap();
        assert!(out < last.0 && sep < last.1);
        last = (out, sep);
    }
}

#[test]
fn standard_error_scales_as_inverse_sqrt_n() {
    let cfg = SystemConfig::symmetric_preset();
    let a = simulate_outage(&cfg, 50_000, 11).unwrap();
    let b = simulate_outage(&cfg, 800_000, 11).unwrap();
    let ratio = b.std_error / a.std_error;
    assert!((ratio - 0.25).abs() < 0.025, "{ratio}");
}

fn link() -> impl Strategy<Value = LinkParams> {
    (1u32..=3, 0.2f64..5.0).prop_map(|(m, omega)| LinkParams::new(m, omega))
}

fn relay() -> impl Strategy<Value = BranchParams> {
    (link(), link(), link()).prop_map(|(a, b, c)| BranchParams::from_links(a, b, c))
}

fn config() -> impl Strategy<Value = SystemConfig> {
    (prop::collection::vec(relay(), 1..4), 0.1f64..10.0, 0.1f64..10.0, 0.5f64..5.0).prop_map(
        |(relays, ps, pr, th)| SystemConfig {
            relays,
            p_source: ps,
            p_relay: pr,
            gamma_th: th,
            ..SystemConfig::symmetric_preset()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn outage_is_a_probability(cfg in config()) {
        let p = outage_probability(&cfg).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn second_antenna_never_hurts(cfg in config()) {
        let one = outage_probability(&cfg.with_antennas(Antennas::One)).unwrap();
        let two = outage_probability(&cfg.with_antennas(Antennas::Two)).unwrap();
        prop_assert!(two <= one * (1.0 + 1e-12));
    }

    #[test]
    fn extra_relay_never_hurts(cfg in config(), extra in relay()) {
        let mut more = cfg.clone();
        more.relays.push(extra);
        prop_assert!(outage_probability(&more).unwrap() <= outage_probability(&cfg).unwrap());
    }

    #[test]
    fn numeric_split_beats_equal(cfg in config(), p in 0.5f64..200.0) {
        let n = numeric_split(&cfg, p, 1e-9).unwrap();
        let e = equal_split(&cfg, p).unwrap();
        prop_assert!(n.objective_value <= e.objective_value);
        prop_assert!(n.p_source > 0.0 && n.p_relay > 0.0);
        prop_assert!((n.p_source + n.p_relay - p).abs() <= 1e-12 * p);
    }
}
