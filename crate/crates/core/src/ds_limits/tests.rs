use super::*;
use crate::poisson_dsm::ARandomIntervalLaw;
use crate::sampling::RngHandle;
use proptest::prelude::*;

fn ch(n: u64, y: u64, z: u64, t: f64, u: f64) -> ChannelObservation {
    ChannelObservation::new(n, y, z, t, u).unwrap()
}

/// Conditional interval samples `(S_l, S_u)` given `S_u >= 0`, with the
/// lower end truncated at 0.
fn sample_s_intervals(c: &ChannelObservation, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let ln = ARandomIntervalLaw::unscaled(c.n);
    let lb = ARandomIntervalLaw::with_exposure(c.y, c.t).unwrap();
    let le = ARandomIntervalLaw::with_exposure(c.z, c.u).unwrap();
    let mut rng = RngHandle::new(seed, 0);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (nl, nu) = ln.sample_interval(&mut rng);
        let (bl, bu) = lb.sample_interval(&mut rng);
        let (el, eu) = le.sample_interval(&mut rng);
        if nu < bl {
            continue;
        }
        let s_lo = ((nl - bu) / eu).max(0.0);
        let s_hi = if el == 0.0 { f64::INFINITY } else { (nu - bl) / el };
        out.push((s_lo, s_hi));
    }
    out
}

#[test]
fn cdfs_match_interval_sampling() {
    let channels = [
        ch(5, 10, 100, 33.0, 100.0),
        ch(0, 3, 10, 3.3, 10.0),
        ch(12, 0, 25, 3.3, 10.0),
        ch(49, 20, 30, 3.3, 10.0),
    ];
    let draws = 1_000_000;
    for (i, c) in channels.iter().enumerate() {
        let model = ChannelModel::new(*c, CdfRoute::quadrature()).unwrap();
        let samples = sample_s_intervals(c, draws, 100 + i as u64);
        let xs = dataset_grid(std::slice::from_ref(&model), &GridConfig { points: 40, ..Default::default() }).unwrap();
        for &x in xs.iter().step_by(2) {
            let fl = model.cdf_lower(x).unwrap();
            let fu = model.cdf_upper(x).unwrap();
            let el = samples.iter().filter(|(lo, _)| *lo <= x).count() as f64 / draws as f64;
            let eu = samples.iter().filter(|(_, hi)| *hi <= x).count() as f64 / draws as f64;
            for (exact, freq) in [(fl, el), (fu, eu)] {
                // floor at one count so a single draw in a far tail is not a failure
                let se = ((exact * (1.0 - exact)).max(1.0 / draws as f64) / draws as f64).sqrt();
                assert!((exact - freq).abs() <= 4.0 * se, "{c:?} x={x}: {exact} vs {freq}");
            }
        }
    }
}

#[test]
fn zero_count_conventions() {
    let model = ChannelModel::new(ch(0, 4, 7, 2.0, 3.0), CdfRoute::default()).unwrap();
    for &x in &[0.0, 0.3, 5.0, 1e3] {
        assert_eq!(model.cdf_lower(x).unwrap(), 1.0);
    }
    let improper = ch(6, 2, 0, 2.0, 3.0);
    for &x in &[0.0, 0.3, 5.0, 1e6] {
        assert_eq!(channel_cdf_upper(&improper, x).unwrap(), 0.0);
    }
    let curves = channel_curves(&improper, &GridConfig::default()).unwrap();
    assert!(curves.improper);
    assert!(matches!(
        combine_channels(&[curves], &GridConfig::default()),
        Err(Error::UnboundedLimit { .. })
    ));
    // y = 0 makes the conditioning event certain
    let model = ChannelModel::new(ch(3, 0, 5, 2.0, 3.0), CdfRoute::default()).unwrap();
    assert_eq!(model.conditioning_mass(), 1.0);
}

#[test]
fn upper_cdf_vanishes_at_zero() {
    for c in [ch(5, 10, 100, 33.0, 100.0), ch(1, 1, 1, 1.0, 1.0), ch(30, 2, 4, 0.5, 2.0)] {
        assert!(channel_cdf_upper(&c, 0.0).unwrap() < 1e-12);
    }
}

#[test]
fn empty_channel_has_r_from_upper_end() {
    let c = ch(0, 0, 1, 1.0, 1.0);
    let curves = channel_curves(&c, &GridConfig::default()).unwrap();
    assert_eq!(curves.r[0], 1.0);
    for i in 0..curves.xs.len() {
        assert!((curves.r[i] - (1.0 - curves.f_upper[i])).abs() < 1e-12);
    }
}

#[test]
fn curves_dominance_and_monotonicity() {
    for c in [
        ch(5, 10, 100, 33.0, 100.0),
        ch(0, 3, 10, 3.3, 10.0),
        ch(12, 0, 25, 3.3, 10.0),
        ch(49, 20, 30, 3.3, 10.0),
        ch(2, 40, 3, 10.0, 1.0),
    ] {
        let cv = channel_curves(&c, &GridConfig::default()).unwrap();
        assert!(cv.xs.windows(2).all(|w| w[0] < w[1]));
        for i in 0..cv.xs.len() {
            assert!(0.0 <= cv.f_upper[i] && cv.f_upper[i] <= cv.f_lower[i] && cv.f_lower[i] <= 1.0);
            assert!(cv.r[i] >= 0.0 && cv.r[i] <= 1.0);
            if i > 0 {
                assert!(cv.f_lower[i] >= cv.f_lower[i - 1]);
                assert!(cv.f_upper[i] >= cv.f_upper[i - 1]);
            }
        }
        if !cv.improper {
            assert!(*cv.r.last().unwrap() <= GridConfig::default().tail_eps);
        }
    }
}

#[test]
fn density_is_normalized() {
    let cfg = DsConfig::default();
    let ds = Dataset::single(ch(5, 10, 100, 33.0, 100.0));
    let d = cfg.density(&ds).unwrap();
    let mass: f64 = (1..d.xs.len()).map(|i| 0.5 * (d.pdf[i] + d.pdf[i - 1]) * (d.xs[i] - d.xs[i - 1])).sum();
    assert!((mass - 1.0).abs() < 1e-6);
    assert!(*d.cdf.last().unwrap() >= 1.0 - 1e-6);
    assert!(d.cdf.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn upper_limit_inverts_cdf() {
    let d = DsConfig::default().density(&Dataset::single(ch(8, 10, 100, 33.0, 100.0))).unwrap();
    for q in [0.5, 0.9, 0.99] {
        let s = upper_limit(&d, q).unwrap();
        let j = d.xs.partition_point(|&x| x < s).min(d.xs.len() - 1);
        let cell = d.cdf[j] - d.cdf[j.saturating_sub(1)];
        let f = interpolate(&d.xs, &d.cdf, s);
        assert!((f - q).abs() <= cell + 1e-12, "q={q}: F(s)={f}");
    }
    // a quantile already reached at the first knot returns the first knot
    let flat = PlausibilityDensity { xs: vec![0.0, 1.0], pdf: vec![1.0, 1.0], cdf: vec![0.5, 1.0], normalization: 1.0 };
    assert_eq!(upper_limit(&flat, 0.3).unwrap(), 0.0);
    assert!(upper_limit(&flat, 1.0).is_err());
}

#[test]
fn limit_nondecreasing_in_n() {
    let cfg = DsConfig::default();
    let mut prev = 0.0;
    for n in 0..=20 {
        let ds = Dataset::single(ch(n, 10, 100, 33.0, 100.0));
        let s90 = cfg.upper_limits(&ds, &[0.9]).unwrap()[0];
        assert!(s90 >= prev - 1e-9, "n={n}: {s90} < {prev}");
        prev = s90;
    }
}

#[test]
fn two_identical_channels_shift_left() {
    let cfg = DsConfig::default();
    let one = ch(6, 10, 100, 33.0, 100.0);
    let single = cfg.upper_limits(&Dataset::single(one), &[0.9, 0.99]).unwrap();
    let double = cfg.upper_limits(&Dataset::new(vec![one, one], "pair").unwrap(), &[0.9, 0.99]).unwrap();
    assert!(double[0] < single[0] && double[1] < single[1]);
}

#[test]
fn combine_is_order_invariant() {
    let cfg = DsConfig::default();
    let chans = vec![ch(3, 7, 20, 3.3, 10.0), ch(9, 2, 40, 1.0, 5.0), ch(0, 5, 0, 2.0, 2.0)];
    let fwd = cfg.curves(&Dataset::new(chans.clone(), "").unwrap()).unwrap();
    let mut rev = fwd.clone();
    rev.reverse();
    let a = combine_channels(&fwd, &cfg.grid).unwrap();
    let b = combine_channels(&rev, &cfg.grid).unwrap();
    for i in 0..a.xs.len() {
        assert!((a.pdf[i] - b.pdf[i]).abs() <= 1e-12 * a.pdf[i].abs().max(1.0));
        assert!((a.cdf[i] - b.cdf[i]).abs() <= 1e-12);
    }
}

#[test]
fn z_equal_one_is_unbounded_alone() {
    let cfg = DsConfig::default();
    let lim = cfg.upper_limits(&Dataset::single(ch(4, 2, 1, 1.0, 1.0)), &[0.9]).unwrap();
    assert!(lim[0].is_infinite());
    // two such channels decay like x^-2 and are integrable
    let c = ch(4, 2, 1, 1.0, 1.0);
    let lim = cfg.upper_limits(&Dataset::new(vec![c, c], "").unwrap(), &[0.9]).unwrap();
    assert!(lim[0].is_finite());
}

#[test]
fn grid_config_validation() {
    assert!(GridConfig { points: 8, ..Default::default() }.validate().is_err());
    assert!(GridConfig { tail_eps: 0.01, ..Default::default() }.validate().is_err());
    assert!(GridConfig::default().validate().is_ok());
    assert!(ChannelObservation::new(1, 1, 1, 0.0, 1.0).is_err());
    assert!(Dataset::new(vec![], "").is_err());
}

#[test]
fn routes_give_same_limits() {
    let ds = Dataset::single(ch(7, 12, 95, 33.0, 100.0));
    let a = DsConfig { route: CdfRoute::quadrature(), ..Default::default() }.upper_limits(&ds, &[0.9, 0.99]).unwrap();
    let b = DsConfig { route: CdfRoute::NegativeBinomialSum, ..Default::default() }
        .upper_limits(&ds, &[0.9, 0.99])
        .unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-6 * x, "{a:?} vs {b:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn dominance_holds_pointwise(n in 0u64..40, y in 0u64..40, z in 0u64..60, t in 0.2f64..40.0, u in 0.2f64..120.0, x in 0.0f64..50.0) {
        let m = ChannelModel::new(ch(n, y, z, t, u), CdfRoute::NegativeBinomialSum).unwrap();
        let (fl, fu, r) = m.evaluate(x).unwrap();
        prop_assert!(fu <= fl && (0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fu));
        prop_assert!((r - (fl - fu)).abs() < 1e-9);
    }
}
