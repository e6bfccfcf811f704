//! Property tests for the model-family invariants.

use proptest::prelude::*;

use canyoncov::angular::{azimuth_gain, empirical_cdf, omni_path_gain, AngularScan, ScanMeta};
use canyoncov::io::fmt_sig;
use canyoncov::propagation::{
    friis_path_gain, CornerModel, CornerVariant, SlopeInterceptModel, DEFAULT_FREQUENCY_HZ,
};
use canyoncov::raytrace::{enumerate_rays, incoherent_path_gain, CanyonGeometry};

proptest! {
    // Friis: one decade of distance is exactly -20 dB.
    #[test]
    fn friis_decade_step(d in 1.0f64..5000.0) {
        let near = friis_path_gain(d, DEFAULT_FREQUENCY_HZ).unwrap();
        let far = friis_path_gain(d * 10.0, DEFAULT_FREQUENCY_HZ).unwrap();
        prop_assert!((near - far - 20.0).abs() < 1e-9);
    }

    // Slope-intercept models with negative exponent strictly decrease on a
    // 1..1000 m grid.
    #[test]
    fn slope_intercept_monotone(
        a in -120.0f64..-20.0,
        n in -6.0f64..-0.05,
        sigma in 0.0f64..10.0,
    ) {
        let m = SlopeInterceptModel::new(a, n, sigma).unwrap();
        let mut prev = f64::INFINITY;
        let mut d = 1.0;
        while d <= 1000.0 {
            let v = m.eval(d).unwrap();
            prop_assert!(v < prev);
            prev = v;
            d += 24.975;
        }
    }

    // All corner variants agree exactly on the before-corner branch.
    #[test]
    fn corner_variants_share_before_branch(
        p1 in -90.0f64..-40.0,
        n in -5.0f64..-1.0,
        delta in 0.0f64..20.0,
        dc in 50.0f64..500.0,
        frac in 0.01f64..0.999,
    ) {
        let x = 1.0 + frac * (dc - 1.0);
        prop_assume!(x > 1.0 && x <= dc);
        let mut values = Vec::new();
        for variant in [CornerVariant::Diffraction, CornerVariant::Scattering, CornerVariant::DualSlope] {
            let m = CornerModel::new(p1, n, n * 3.0, delta, dc, variant).unwrap();
            let e = m.eval(x).unwrap();
            prop_assert!(!e.clamped);
            values.push(e.gain_db);
        }
        prop_assert!((values[0] - values[1]).abs() < 1e-12);
        prop_assert!((values[0] - values[2]).abs() < 1e-12);
    }

    // Dual-slope: the discontinuity at the corner converges to exactly the
    // corner loss.
    #[test]
    fn dualslope_jump_is_corner_loss(
        p1 in -90.0f64..-40.0,
        n1 in -5.0f64..-1.0,
        n2 in -15.0f64..-1.0,
        delta in 0.0f64..25.0,
        dc in 50.0f64..500.0,
    ) {
        let m = CornerModel::new(p1, n1, n2, delta, dc, CornerVariant::DualSlope).unwrap();
        let below = m.eval(dc).unwrap().gain_db;
        let above = m.eval(dc * (1.0 + 1e-9)).unwrap().gain_db;
        prop_assert!(((below - above) - delta).abs() < 1e-6);
    }

    // Diffraction spreads over d_c * leg * x, scattering over the product
    // of the legs; with equal parameters diffraction is stronger whenever
    // the leg product exceeds the total run.
    #[test]
    fn diffraction_at_least_scattering(
        p1 in -90.0f64..-40.0,
        n in -5.0f64..-1.0,
        delta in 0.0f64..15.0,
        dc in 50.0f64..500.0,
        leg in 10.0f64..300.0,
    ) {
        let x = dc + leg;
        prop_assume!(dc * leg >= x);
        let diff = CornerModel::new(p1, n, n, delta, dc, CornerVariant::Diffraction).unwrap();
        let scat = CornerModel::new(p1, n, n, delta, dc, CornerVariant::Scattering).unwrap();
        let vd = diff.eval(x).unwrap().gain_db;
        let vs = scat.eval(x).unwrap().gain_db;
        prop_assert!(vd >= vs - 1e-12, "diffraction {vd} < scattering {vs}");
    }

    // Azimuth gain is invariant to uniform power scaling and angle-axis
    // rotation, and never negative.
    #[test]
    fn azimuth_gain_invariances(
        seed_powers in proptest::collection::vec(1e-6f64..1e3, 144),
        scale in 1e-3f64..1e3,
        rot in 0usize..144,
    ) {
        let g0 = azimuth_gain(&seed_powers).unwrap();
        prop_assert!(g0 >= 0.0);
        let scaled: Vec<f64> = seed_powers.iter().map(|p| p * scale).collect();
        prop_assert!((azimuth_gain(&scaled).unwrap() - g0).abs() < 1e-9);
        let rotated: Vec<f64> = (0..seed_powers.len())
            .map(|i| seed_powers[(i + rot) % seed_powers.len()])
            .collect();
        prop_assert!((azimuth_gain(&rotated).unwrap() - g0).abs() < 1e-12);
    }

    // Omni path gain moves one-for-one against the budget terms.
    #[test]
    fn omni_budget_shift(
        powers in proptest::collection::vec(1e-6f64..10.0, 72),
        shift in -30.0f64..30.0,
    ) {
        let angles: Vec<f64> = (0..72).map(|i| i as f64 * 5.0).collect();
        let base = AngularScan::new(angles.clone(), powers.clone(), ScanMeta::default()).unwrap();
        let shifted = AngularScan::new(
            angles,
            powers,
            ScanMeta { tx_power_dbm: shift, ..ScanMeta::default() },
        )
        .unwrap();
        prop_assert!((omni_path_gain(&shifted) - (omni_path_gain(&base) - shift)).abs() < 1e-9);
    }

    // Empirical CDF probabilities are non-decreasing and end at 1; the
    // band epsilon follows the closed form.
    #[test]
    fn cdf_shape(samples in proptest::collection::vec(-50.0f64..50.0, 2..400), alpha in 0.01f64..0.5) {
        let cdf = empirical_cdf(&samples, alpha).unwrap();
        for pair in cdf.probs.windows(2) {
            prop_assert!(pair[1] >= pair[0]);
        }
        prop_assert!((cdf.probs.last().unwrap() - 1.0).abs() < 1e-12);
        let n = samples.len() as f64;
        prop_assert!((cdf.band_epsilon - ((2.0 / alpha).ln() / (2.0 * n)).sqrt()).abs() < 1e-12);
        for i in 0..cdf.values.len() {
            let (lo, hi) = cdf.band(i);
            prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    // Ray enumeration: counts follow the image construction, every
    // coefficient only attenuates, and the incoherent sum dominates the
    // direct ray.
    #[test]
    fn ray_sum_dominates_direct(
        width in 10.0f64..60.0,
        eps in 2.0f64..15.0,
        bs_h in 5.0f64..40.0,
        ue_frac in 0.05f64..0.95,
        bounces in 0u32..8,
        range in 10.0f64..600.0,
    ) {
        let g = CanyonGeometry {
            street_width_m: width,
            wall_rel_permittivity: eps,
            bs_height_m: bs_h,
            ue_height_m: 1.5,
            bs_lateral_offset_m: width * 0.25,
            ue_lateral_offset_m: width * ue_frac,
            max_wall_reflections: bounces,
            include_ground: true,
        };
        let rays = enumerate_rays(&g, range).unwrap();
        prop_assert_eq!(rays.len(), 2 * (1 + 2 * bounces as usize));
        let direct = rays.iter().find(|r| r.wall_bounce_count == 0 && !r.ground_bounce).unwrap();
        let total = incoherent_path_gain(&g, range).unwrap();
        prop_assert!(total >= 10.0 * direct.power_gain_linear.log10() - 1e-9);
        for r in &rays {
            prop_assert!(r.power_gain_linear >= 0.0);
            prop_assert!(r.path_length_m >= range);
        }
    }

    // The 6-significant-digit formatter parses back to within one unit in
    // the last place.
    #[test]
    fn fmt_sig_round_trip(x in -1e12f64..1e12) {
        prop_assume!(x != 0.0);
        let s = fmt_sig(x, 6);
        let back: f64 = s.parse().unwrap();
        let rel = ((back - x) / x).abs();
        prop_assert!(rel < 1e-5, "{x} -> {s} -> {back}");
    }
}
