mod common;

use std::f64::consts::TAU;

use common::{rel_close, OracleCell, TestRng};
use metashap::dispersion::{
    dispersion_rhs, find_band_gaps, qois, search_band_gaps, wave_speed, LayeredUnitCell, Material,
    MaterialLayer, ParameterRatios, ScanSettings,
};
use proptest::prelude::*;

fn cell(e: f64, rho: f64, h: f64) -> LayeredUnitCell {
    LayeredUnitCell::from_ratios(ParameterRatios::new(e, rho, h).unwrap(), Material::RUBBER).unwrap()
}

fn scaled_cell(c: &LayeredUnitCell, thickness: f64, stiffness: f64) -> LayeredUnitCell {
    let layer = |l: MaterialLayer| {
        MaterialLayer::new(l.youngs_modulus * stiffness, l.density, l.thickness * thickness).unwrap()
    };
    LayeredUnitCell::new(layer(c.layer1), layer(c.layer2))
}

#[test]
fn wave_speed_examples() {
    assert_eq!(wave_speed(4.0, 1.0).unwrap(), 2.0);
    assert!(rel_close(wave_speed(3.49e6, 1100.0).unwrap(), 56.326_967_544_216_98, 1e-14));
    assert!(wave_speed(0.0, 1.0).is_err());
    assert!(wave_speed(1.0, -1.0).is_err());
}

#[test]
fn rhs_matches_independent_formula() {
    let mut rng = TestRng::new(5);
    for _ in 0..50 {
        let (e, r, h) = (rng.log_uniform(1e-2, 1e4), rng.uniform(0.1, 10.0), rng.uniform(0.1, 11.0));
        let (lib, oracle) = (cell(e, r, h), OracleCell::from_ratios(e, r, h));
        for _ in 0..20 {
            let w = rng.uniform(0.0, 5000.0);
            assert!((dispersion_rhs(w, &lib) - oracle.rhs(w)).abs() <= 1e-9 * (1.0 + oracle.rhs(w).abs()));
        }
    }
}

#[test]
fn first_gap_matches_dense_oracle_at_reference_points() {
    for (e, r, h) in [(50.0, 2.0, 1.0), (0.1, 0.1, 0.1), (0.1, 2.0, 1.0)] {
        let report = qois(ParameterRatios::new(e, r, h).unwrap(), Material::RUBBER, &ScanSettings::default()).unwrap();
        let dense = OracleCell::from_ratios(e, r, h).dense_gaps(report.omega_max_searched, 1_000_000);
        let g = report.gaps[0];
        assert!(rel_close(g.lower_hz, dense[0].0, 1e-9), "{g:?} vs {:?}", dense[0]);
        assert!(rel_close(g.upper_hz, dense[0].1, 1e-9), "{g:?} vs {:?}", dense[0]);
    }
}

#[test]
fn frequency_and_stiffness_scaling_move_edges() {
    let mut rng = TestRng::new(17);
    for _ in 0..3 {
        let base = cell(rng.log_uniform(0.1, 100.0), rng.uniform(0.2, 9.0), rng.uniform(0.2, 10.0));
        let omega_max = base.default_omega_max();
        let tol = 1e-9;
        let reference = find_band_gaps(&base, omega_max, 4096, tol).unwrap();
        assert!(reference.has_gap());

        let s = rng.uniform(0.5, 3.0);
        let thick = find_band_gaps(&scaled_cell(&base, s, 1.0), omega_max / s, 4096, tol).unwrap();
        let stiff = find_band_gaps(&scaled_cell(&base, 1.0, s), omega_max * s.sqrt(), 4096, tol).unwrap();
        assert_eq!(thick.gaps.len(), reference.gaps.len());
        assert_eq!(stiff.gaps.len(), reference.gaps.len());
        for ((g, t), k) in reference.gaps.iter().zip(&thick.gaps).zip(&stiff.gaps) {
            assert!(rel_close(t.lower_hz, g.lower_hz / s, 2.0 * tol));
            assert!(rel_close(t.upper_hz, g.upper_hz / s, 2.0 * tol));
            assert!(rel_close(k.lower_hz, g.lower_hz * s.sqrt(), 2.0 * tol));
            assert!(rel_close(k.upper_hz, g.upper_hz * s.sqrt(), 2.0 * tol));
        }
    }
}

#[test]
fn reports_are_well_ordered() {
    let mut rng = TestRng::new(23);
    for _ in 0..30 {
        let c = cell(rng.log_uniform(1e-2, 1e4), rng.uniform(0.1, 9.5), rng.uniform(0.1, 11.0));
        let r = search_band_gaps(&c, &ScanSettings::default()).unwrap();
        for g in &r.gaps {
            assert!(g.lower_hz < g.upper_hz);
        }
        for w in r.gaps.windows(2) {
            assert!(w[0].upper_hz < w[1].lower_hz);
        }
        match r.gaps.first() {
            Some(g) => {
                assert_eq!(r.first_cutoff_hz, Some(g.lower_hz));
                assert_eq!(r.first_gap_width_hz, Some(g.upper_hz - g.lower_hz));
            }
            None => assert!(r.first_cutoff_hz.is_none() && r.first_gap_width_hz.is_none()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rhs_is_one_at_zero(e in 1e-3f64..1e4, rho in 0.05f64..20.0, h in 0.05f64..20.0) {
        prop_assert_eq!(dispersion_rhs(0.0, &cell(e, rho, h)), 1.0);
    }

    #[test]
    fn layer_swap_symmetry(e in 1e-3f64..1e4, rho in 0.05f64..20.0, h in 0.05f64..20.0, w in 0.0f64..1e4) {
        let c = cell(e, rho, h);
        let a = dispersion_rhs(w, &c);
        let b = dispersion_rhs(w, &c.swapped());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn impedance_match_has_no_gaps(log_r in -3.0f64..3.0, h in 0.05f64..20.0) {
        let r = 10f64.powf(log_r);
        let report = qois(ParameterRatios::new(r, 1.0 / r, h).unwrap(), Material::RUBBER, &ScanSettings::default()).unwrap();
        prop_assert!(report.gaps.is_empty(), "{:?}", report.gaps);
    }

    #[test]
    fn gap_edges_are_roots(e in 1e-2f64..1e4, rho in 0.1f64..9.5, h in 0.1f64..11.0) {
        let c = cell(e, rho, h);
        let r = search_band_gaps(&c, &ScanSettings::default()).unwrap();
        for g in &r.gaps {
            for w in [g.lower_omega(), g.upper_omega()] {
                prop_assert!((dispersion_rhs(w, &c).abs() - 1.0).abs() <= 1e-6);
            }
        }
        prop_assert!(r.gaps.iter().all(|g| g.lower_hz * TAU <= r.omega_max_searched));
    }
}
