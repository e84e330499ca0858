use num_complex::Complex64;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use rfcap::field_stats::{dbm_to_rssi, rssi_to_dbm, student_t_two_sided_p, welch_t_test};
use rfcap::matching;
use rfcap::metrics::{self, MetricThresholds};
use rfcap::rf::{self, FixtureMode, ImpedanceProfile};
use rfcap::touchstone::{
    parse_touchstone, write_touchstone, Encoding, FrequencyUnit, NetworkData, TouchstoneFormat,
};

fn entry() -> impl Strategy<Value = Complex64> {
    (0.0..1.0f64, -180.0..180.0f64).prop_map(|(m, a)| Complex64::from_polar(m, a.to_radians()))
}

fn network() -> impl Strategy<Value = NetworkData> {
    (
        prop_oneof![Just(1usize), Just(2usize)],
        1usize..12,
        1.0..1e10f64,
    )
        .prop_flat_map(|(ports, n, f0)| {
            (
                proptest::collection::vec(proptest::collection::vec(entry(), ports * ports), n),
                proptest::collection::vec(1.0..1e8f64, n),
            )
                .prop_map(move |(s, steps)| {
                    let freqs = steps
                        .iter()
                        .scan(f0, |f, d| {
                            let cur = *f;
                            *f += d;
                            Some(cur)
                        })
                        .collect();
                    NetworkData::new(freqs, ports, s, 50.0).unwrap()
                })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn touchstone_round_trip(net in network(), unit_idx in 0usize..4, enc_idx in 0usize..3) {
        let fmt = TouchstoneFormat::new(FrequencyUnit::ALL[unit_idx], Encoding::ALL[enc_idx]);
        let back = parse_touchstone(&write_touchstone(&net, fmt)).unwrap();
        prop_assert!(net.max_relative_difference(&back).unwrap() <= 1e-12);
    }

    #[test]
    fn t_tail_matches_reference(t in -30.0..30.0f64, df in 1.0..200.0f64) {
        let reference = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
        let p = student_t_two_sided_p(t, df).unwrap();
        prop_assert!((p - reference).abs() <= 1e-8, "p {} vs {}", p, reference);
    }

    #[test]
    fn welch_is_shift_invariant(a in proptest::collection::vec(0.0..31.0f64, 3..20),
                                b in proptest::collection::vec(0.0..31.0f64, 3..20),
                                shift in -10.0..10.0f64) {
        let base = welch_t_test(&a, &b);
        let a2: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let b2: Vec<f64> = b.iter().map(|x| x + shift).collect();
        if let (Ok(x), Ok(y)) = (base, welch_t_test(&a2, &b2)) {
            prop_assert!((x.t - y.t).abs() <= 1e-9 * (1.0 + x.t.abs()));
            prop_assert!((x.p - y.p).abs() <= 1e-9);
        }
    }

    #[test]
    fn rlc_metrics_match_closed_form(r in 0.01..5.0f64, l in 0.1e-9..10e-9f64, c in 0.1e-12..10e-12f64) {
        let model = rf::SeriesRlcModel::new(r, l, c).unwrap();
        let sweep = rf::linear_sweep(1e8, 2e10, 200).unwrap();
        let net = rf::synthesize_series_rlc(&model, &sweep, 50.0, FixtureMode::SeriesThrough).unwrap();
        let profile = rf::impedance_profile(&net, FixtureMode::SeriesThrough).unwrap();
        let m = metrics::metrics_report(&profile, MetricThresholds::default()).unwrap();
        for (i, f) in sweep.iter().enumerate() {
            if let Some(df) = m.loss.df[i] {
                let x = model.reactance(*f).abs();
                prop_assert!((df - r / x).abs() <= 1e-3 * r / x);
            }
        }
    }

    #[test]
    fn matched_vswr_is_at_least_one(re in 0.0..500.0f64, im in -500.0..500.0f64) {
        let p = ImpedanceProfile::new(vec![1e9], vec![Complex64::new(re, im)]).unwrap();
        let v = matching::vswr_profile(&p, 50.0);
        prop_assert!(v.vswr[0].unwrap() >= 1.0);
    }
}

#[test]
fn rssi_mapping_inverts() {
    for rssi in 0..=31u8 {
        assert_eq!(dbm_to_rssi(rssi_to_dbm(rssi).unwrap()).unwrap(), rssi);
    }
    assert!(rssi_to_dbm(99).is_err());
    assert!(rssi_to_dbm(32).is_err());
}
