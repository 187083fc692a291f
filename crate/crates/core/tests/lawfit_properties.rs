use evfield::lawfit::{
    discriminate, fit_powerlaw, fit_reciprocal, DecaySeries, PreferredModel, SeriesPoint, Thresholds,
};
use evfield::physics::{tunneling_depth, HBAR_C_EV_NM};
use evfield::units::ElectronVolts;
use proptest::prelude::*;

const GRID: [f64; 6] = [0.9, 2.5, 5.0, 10.0, 20.0, 40.0];

fn noisy(kappa: f64, noise: &[f64]) -> Vec<SeriesPoint> {
    GRID.iter()
        .zip(noise)
        .map(|(&e, &n)| {
            let x = kappa / e;
            SeriesPoint::new(e, x * (1.0 + 0.01 * n), 0.01 * x)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exact_reciprocal_data_returns_kappa(kappa in 1.0f64..500.0) {
        let s = DecaySeries::from_triples(&GRID.map(|e| (e, kappa / e, 0.02 * kappa / e))).unwrap();
        let f = fit_reciprocal(&s).unwrap();
        prop_assert!(((f.hbar_v - kappa) / kappa).abs() < 1e-12);
    }

    #[test]
    fn scaling_scales_hbar_v_and_keeps_the_verdict(
        noise in prop::collection::vec(-2.0f64..2.0, 6),
        s in 0.01f64..100.0,
    ) {
        let series = DecaySeries::new(noisy(106.0, &noise)).unwrap();
        let a = discriminate(&series, Thresholds::default()).unwrap();
        let b = discriminate(&series.scaled(s).unwrap(), Thresholds::default()).unwrap();
        prop_assert!(((b.hbar_v - s * a.hbar_v) / b.hbar_v).abs() < 1e-12);
        prop_assert_eq!(a.preferred_model, b.preferred_model);
    }

    #[test]
    fn reordering_is_bit_identical(noise in prop::collection::vec(-2.0f64..2.0, 6), perm in Just(()).prop_perturb(|_, mut rng| {
        let mut idx: Vec<usize> = (0..6).collect();
        for i in (1..6).rev() {
            let j = (rng.next_u32() as usize) % (i + 1);
            idx.swap(i, j);
        }
        idx
    })) {
        let pts = noisy(106.0, &noise);
        let shuffled: Vec<SeriesPoint> = perm.iter().map(|&i| pts[i].clone()).collect();
        let a = discriminate(&DecaySeries::new(pts).unwrap(), Thresholds::default()).unwrap();
        let b = discriminate(&DecaySeries::new(shuffled).unwrap(), Thresholds::default()).unwrap();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn tunneling_lengths_follow_half_power() {
    let s = DecaySeries::from_triples(&GRID.map(|e| {
        let l = tunneling_depth(ElectronVolts(e)).unwrap().value();
        (e, l, 0.01 * l)
    }))
    .unwrap();
    let p = fit_powerlaw(&s).unwrap();
    assert!((p.p - 0.5).abs() < 1e-10);
    let r = discriminate(&s, Thresholds::default()).unwrap();
    assert_eq!(r.preferred_model, PreferredModel::Sqrt);
}

#[test]
fn kappa_106_gives_velocity_ratio_near_0_54() {
    let r = 106.0 / HBAR_C_EV_NM;
    assert!((0.53..=0.55).contains(&r));
}
