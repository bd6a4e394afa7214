use gaf_zeros::covariance::{
    classify_region, spectral_factorize, spectral_poly, two_dependent, Covariance, MaFilter, RegionLabel,
};
use gaf_zeros::expected_zeros::{correction_contour_quad, correction_residue, expected_zeros, Method};
use gaf_zeros::kernel::{g_poly, kernel_value, oracle_correction, OracleModel};
use gaf_zeros::puiseux::puiseux_branches;
use gaf_zeros::rootfind::{poly_roots, theta_roots, track_branches};
use gaf_zeros::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

fn covariance_from_taps(taps: Vec<(f64, f64)>) -> Option<Covariance> {
    let taps: Vec<Complex64> = taps.into_iter().map(|(re, im)| Complex64::new(re, im)).collect();
    let acv = MaFilter { taps }.autocovariance();
    let scale = acv[0].re;
    if scale < 1e-3 || acv.last().unwrap().norm() / scale < 1e-6 {
        return None;
    }
    let mut gamma: Vec<Complex64> = acv.iter().map(|g| g / scale).collect();
    gamma[0] = Complex64::new(1.0, 0.0);
    Covariance::new(gamma).ok()
}

fn covariance() -> impl Strategy<Value = Covariance> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..=5).prop_filter_map("degenerate taps", covariance_from_taps)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaled_density_positive(cov in covariance(), r in 0.01f64..0.99) {
        let min = (0..4096)
            .map(|j| cov.scaled_density(r, TAU * j as f64 / 4096.0))
            .fold(f64::INFINITY, f64::min);
        prop_assert!(min > 0.0);
    }

    #[test]
    fn theta_roots_pair_and_avoid_circle(cov in covariance(), r in 0.05f64..0.98) {
        let set = theta_roots(&cov, r).unwrap();
        prop_assert_eq!(set.degree(), 2 * cov.trimmed().order());
        for z in &set.roots {
            prop_assert!((z.norm() - 1.0).abs() >= 1e-9);
            let partner = 1.0 / z.conj();
            let d = set.roots.iter().map(|w| (w - partner).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d < 1e-8 * partner.norm().max(1.0), "pairing gap {}", d);
        }
        prop_assert_eq!(set.inside.len(), cov.trimmed().order());
    }

    #[test]
    fn spectral_poly_hermitian(cov in covariance(), r in 0.05f64..1.0) {
        let sp = spectral_poly(&cov, r).unwrap();
        let n = sp.order as i64;
        for k in 0..=n {
            prop_assert_eq!(sp.laurent(-k), sp.laurent(k).conj());
        }
    }

    #[test]
    fn region_consistent_with_validation(a in -1.2f64..1.2, b in -0.7f64..0.7) {
        let label = classify_region(a, b);
        let valid = two_dependent(a, b);
        match label {
            RegionLabel::Outside => prop_assert!(matches!(valid, Err(Error::NotPositiveDefinite(_)))),
            _ => prop_assert!(valid.is_ok()),
        }
        // The grid positivity check is an independent oracle for the region.
        let grid_ok = Covariance::from_real(&[1.0, a, b]).is_ok();
        let margin = 1e-3;
        if classify_region(a, b) == RegionLabel::Outside && !boundary_nearby(a, b, margin) {
            prop_assert!(!grid_ok);
        }
        if label == RegionLabel::Interior && !boundary_nearby(a, b, margin) {
            prop_assert!(grid_ok);
        }
    }

    #[test]
    fn factorization_round_trip(cov in covariance()) {
        let f = spectral_factorize(&cov).unwrap();
        prop_assert!(f.roundtrip_residual(&cov) < 1e-10);
        let unit: f64 = f.taps.iter().map(|t| t.norm_sqr()).sum();
        prop_assert!((unit - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_is_hermitian_and_positive(
        cov in covariance(),
        zr in 0.0f64..0.99, zt in 0.0f64..TAU,
        wr in 0.0f64..0.99, wt in 0.0f64..TAU,
    ) {
        let z = Complex64::from_polar(zr, zt);
        let w = Complex64::from_polar(wr, wt);
        let kzw = kernel_value(&cov, z, w).unwrap();
        let kwz = kernel_value(&cov, w, z).unwrap();
        prop_assert!((kzw - kwz.conj()).norm() < 1e-12 * kzw.norm().max(1.0));
        let kzz = kernel_value(&cov, z, z).unwrap();
        prop_assert!(kzz.re > 0.0 && kzz.im.abs() < 1e-12 * kzz.re.max(1.0));
    }

    #[test]
    fn oracle_corrections_negative(rho in 0.01f64..0.99, r in 0.01f64..0.99) {
        prop_assert!(oracle_correction(OracleModel::ornstein_uhlenbeck(rho).unwrap(), r).unwrap() < 0.0);
        prop_assert!(oracle_correction(OracleModel::common_shock(rho).unwrap(), r).unwrap() < 0.0);
    }

    #[test]
    fn correction_negative_and_methods_agree(cov in covariance(), r in 0.1f64..0.9) {
        let res = correction_residue(&cov, r).unwrap();
        let con = correction_contour_quad(&g_poly(&cov), r).unwrap();
        prop_assert!(res <= 1e-10);
        prop_assert!((res - con).abs() < 1e-8, "{} vs {}", res, con);
    }

    #[test]
    fn total_monotone_in_r(cov in covariance(), r0 in 0.05f64..0.5) {
        let mut last = 0.0;
        for k in 0..8 {
            let r = r0 + (0.95 - r0) * k as f64 / 7.0;
            let t = expected_zeros(&cov, r, Method::Residue).unwrap();
            prop_assert_eq!(t.total, t.baseline + t.correction);
            prop_assert!(t.total >= 0.0);
            prop_assert!(t.total >= last);
            last = t.total;
        }
    }

    #[test]
    fn random_polynomial_residuals(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)) {
        let p: Vec<Complex64> = coeffs.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        prop_assume!(p[8].norm() > 1e-3 && p[0].norm() > 1e-3);
        let set = poly_roots(&p).unwrap();
        prop_assert_eq!(set.degree(), 8);
        prop_assert!(set.residual < 1e-10);
    }

    #[test]
    fn tracking_matches_root_sets(cov in covariance(), r0 in 0.2f64..0.6) {
        let grid: Vec<f64> = (0..5).map(|k| r0 + 0.08 * k as f64).collect();
        let track = match track_branches(&cov, &grid) {
            Ok(t) => t,
            Err(Error::AmbiguousMatching { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        for (m, &r) in grid.iter().enumerate() {
            let set = theta_roots(&cov, r).unwrap();
            for z in track.at(m) {
                let d = set.roots.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(d < 1e-12 * z.norm().max(1.0));
            }
        }
    }
}

fn boundary_nearby(a: f64, b: f64, margin: f64) -> bool {
    [(-margin, 0.0), (margin, 0.0), (0.0, -margin), (0.0, margin)]
        .iter()
        .any(|&(da, db)| classify_region(a + da, b + db) != classify_region(a, b))
}

#[test]
fn wilkinson_style_polynomials() {
    for d in 4..=12 {
        let roots: Vec<Complex64> = (1..=d).map(|k| Complex64::new(k as f64 / d as f64, 0.0)).collect();
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &w in &roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * w;
            }
            c = next;
        }
        let set = poly_roots(&c).unwrap();
        assert_eq!(set.degree(), d);
        assert!(set.residual < 1e-8, "d={d} residual={}", set.residual);
    }
}

#[test]
fn puiseux_leading_coefficient_identity() {
    for n in 1..=10usize {
        let c = (0..n - 1).fold(1.0, |acc, i| acc * (2 * (n - 1) - i) as f64 / (i + 1) as f64);
        let target = -2.0 * (-1f64).powi(n as i32) * c;
        for br in puiseux_branches(n) {
            assert!((br.b.powi(2 * n as i32) - target).norm() < 1e-12 * target.abs().max(1.0));
        }
    }
}
