//! Randomised invariants of the geometry and I/O layers.

use proptest::prelude::*;

use gaussflow::convex::{ellipsoid_support, speed_g, ConvexBody};
use gaussflow::io::{fmt_f64, parse_snapshot, snapshot_to_string};
use gaussflow::sphere::{build_grid, dot};

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn printed_floats_read_back_exactly(x in proptest::num::f64::NORMAL) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn ellipse_area_matches_pi_ab(a in 0.5f64..2.0, b in 0.5f64..2.0) {
        let grid = build_grid(2, &[128]).unwrap();
        let body = ConvexBody::from_fn(grid, |z| ellipsoid_support(&[a, b], z)).unwrap();
        let exact = std::f64::consts::PI * a * b;
        prop_assert!((body.volume() - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn translation_leaves_circle_radii_unchanged(vx in -0.3f64..0.3, vy in -0.3f64..0.3) {
        let grid = build_grid(2, &[64]).unwrap();
        let base = ConvexBody::from_fn(grid.clone(), |z| ellipsoid_support(&[1.0, 1.5], z)).unwrap();
        let v = [vx, vy, 0.0];
        let moved = ConvexBody::from_fn(grid, |z| ellipsoid_support(&[1.0, 1.5], z) + dot(&v, z)).unwrap();
        for (a, b) in base.radii().s_det().iter().zip(moved.radii().s_det()) {
            prop_assert!((a - b).abs() < 1e-10 * a.abs());
        }
    }

    #[test]
    fn translation_leaves_sphere_radii_nearly_unchanged(
        vx in -0.3f64..0.3, vy in -0.3f64..0.3, vz in -0.3f64..0.3,
    ) {
        // linear functions are annihilated only up to the O(h^2) stencil error
        let grid = build_grid(3, &[32, 64]).unwrap();
        let axes = [1.0, 1.2, 1.5];
        let base = ConvexBody::from_fn(grid.clone(), |z| ellipsoid_support(&axes, z)).unwrap();
        let v = [vx, vy, vz];
        let moved = ConvexBody::from_fn(grid, |z| ellipsoid_support(&axes, z) + dot(&v, z)).unwrap();
        for (a, b) in base.radii().s_det().iter().zip(moved.radii().s_det()) {
            prop_assert!((a - b).abs() < 1e-4 * a.abs());
        }
        prop_assert!((base.volume() - moved.volume()).abs() < 1e-6 * base.volume());
    }

    #[test]
    fn volume_scales_with_the_cube(a in 0.2f64..5.0) {
        let grid = build_grid(3, &[16, 32]).unwrap();
        let body = ConvexBody::from_fn(grid, |z| ellipsoid_support(&[1.0, 1.2, 1.5], z)).unwrap();
        let scaled = body.scaled(a).unwrap();
        prop_assert!((scaled.volume() - a.powi(3) * body.volume()).abs() < 1e-10 * scaled.volume());
    }

    #[test]
    fn speed_is_homogeneous_of_degree_p(
        l1 in 0.1f64..10.0, l2 in 0.1f64..10.0, c in 0.1f64..10.0, p in 0.05f64..0.95,
    ) {
        // G(cλ) = c^p G(λ) for G = (λ1 λ2)^{p/2}
        let g = speed_g(&[l1, l2], p).unwrap();
        let gc = speed_g(&[c * l1, c * l2], p).unwrap();
        prop_assert!((gc - c.powf(p) * g).abs() < 1e-12 * gc);
        prop_assert!((g - (l1 * l2).powf(p / 2.0)).abs() < 1e-12 * g);
    }

    #[test]
    fn snapshots_roundtrip_bit_exactly(amp in 0.0f64..0.05, t in 0.0f64..100.0) {
        let grid = build_grid(2, &[32]).unwrap();
        let body = ConvexBody::from_fn(grid, |z| 1.0 + amp * (z[0] * z[0] - z[1] * z[1])).unwrap();
        let text = snapshot_to_string(body.support(), t);
        let (back, t_back) = parse_snapshot(&text).unwrap();
        prop_assert_eq!(t_back, t);
        prop_assert_eq!(back.values(), body.support().values());
    }
}
