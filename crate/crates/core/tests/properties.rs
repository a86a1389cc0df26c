//! Property tests for the geometric and numerical invariants the library
//! is built around.

use proptest::prelude::*;

use trajraster::geometry::{
    box_corners, covariance_from_state, mahalanobis_sq, GridSpec, Trajectory, WaypointState,
};
use trajraster::loss::smooth_l1;
use trajraster::map::DrivableMask;
use trajraster::metrics::{
    l2_errors, orfp_flags_from_status, orfp_ratio, OffroadPolicy, RoadStatus,
};
use trajraster::raster::{rasterize_waypoint, GaussianKernel, DEFAULT_K};

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    /// Eigenvalues of the box covariance are exactly the axis variances
    /// {(k·l)², (k·w)²}, independent of heading.
    #[test]
    fn covariance_eigenvalues_are_axis_variances(
        l in 0.5f64..6.0,
        w in 0.3f64..3.0,
        theta in -7.0f64..7.0,
        k in 0.2f64..1.5,
    ) {
        let cov = covariance_from_state(l, w, theta, k).unwrap();
        let mut eigs = cov.eigenvalues();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mut want = [(k * l) * (k * l), (k * w) * (k * w)];
        want.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assert!(rel_close(eigs[0], want[0], 1e-12));
        prop_assert!(rel_close(eigs[1], want[1], 1e-12));
    }

    /// Headings θ and θ+π give the same covariance; θ+π/2 swaps the axes.
    #[test]
    fn covariance_periodicity(
        l in 0.5f64..6.0,
        w in 0.3f64..3.0,
        theta in -7.0f64..7.0,
    ) {
        let a = covariance_from_state(l, w, theta, DEFAULT_K).unwrap();
        let b = covariance_from_state(l, w, theta + std::f64::consts::PI, DEFAULT_K).unwrap();
        prop_assert!(rel_close(a.xx, b.xx, 1e-12));
        prop_assert!(rel_close(a.xy, b.xy, 1e-12));
        prop_assert!(rel_close(a.yy, b.yy, 1e-12));

        let c = covariance_from_state(l, w, theta + std::f64::consts::FRAC_PI_2, DEFAULT_K).unwrap();
        prop_assert!(rel_close(c.xx, a.yy, 1e-12));
        prop_assert!(rel_close(c.yy, a.xx, 1e-12));
        prop_assert!(rel_close(c.xy, -a.xy, 1e-12));
    }

    /// Mahalanobis distance is invariant under a simultaneous rotation of
    /// the displacement and the covariance.
    #[test]
    fn mahalanobis_rotation_invariance(
        l in 0.5f64..6.0,
        w in 0.3f64..3.0,
        theta in -7.0f64..7.0,
        phi in -7.0f64..7.0,
        dx in -4.0f64..4.0,
        dy in -4.0f64..4.0,
    ) {
        let sigma = covariance_from_state(l, w, theta, DEFAULT_K).unwrap();
        let q = mahalanobis_sq([dx, dy], &sigma).unwrap();

        let (s, c) = phi.sin_cos();
        let rotated_d = [c * dx - s * dy, s * dx + c * dy];
        let rotated_sigma = covariance_from_state(l, w, theta + phi, DEFAULT_K).unwrap();
        let q_rot = mahalanobis_sq(rotated_d, &rotated_sigma).unwrap();
        prop_assert!(rel_close(q, q_rot, 1e-9), "{q} vs {q_rot}");
    }

    /// With k = √2/2 every box corner lies exactly on the unit Mahalanobis
    /// ellipse — the circumscription that fixes the default k.
    #[test]
    fn corners_lie_on_unit_ellipse(
        x in -5.0f64..5.0,
        y in -5.0f64..5.0,
        l in 0.5f64..6.0,
        w in 0.3f64..3.0,
        theta in -7.0f64..7.0,
    ) {
        let s = WaypointState::new(x, y, l, w, theta);
        let sigma = covariance_from_state(l, w, theta, DEFAULT_K).unwrap();
        for corner in box_corners(&s) {
            let q = mahalanobis_sq([corner[0] - x, corner[1] - y], &sigma).unwrap();
            prop_assert!((q - 1.0).abs() <= 1e-12, "corner at squared distance {q}");
        }
    }

    /// Raster values are non-negative, zero beyond the truncation radius,
    /// and every nonzero cell lies inside the reported window.
    #[test]
    fn raster_support_and_window(
        x in -10.0f64..10.0,
        y in -10.0f64..10.0,
        l in 0.5f64..6.0,
        w in 0.3f64..3.0,
        theta in -7.0f64..7.0,
        md in 0.4f64..2.5,
    ) {
        let grid = GridSpec::new(16.0, 16.0, 0.5, 0.5, [-8.0, -8.0]).unwrap();
        let s = WaypointState::new(x, y, l, w, theta);
        let raster = rasterize_waypoint(&s, &grid, DEFAULT_K, Some(md)).unwrap();
        let kernel = GaussianKernel::from_state(&s, DEFAULT_K).unwrap();
        for j in 0..grid.ny() {
            for i in 0..grid.nx() {
                let v = raster.value(i, j);
                prop_assert!(v >= 0.0);
                let c = grid.cell_center(i, j);
                let q = kernel.mahalanobis_sq(c[0] - x, c[1] - y);
                if q > md * md {
                    prop_assert_eq!(v, 0.0);
                }
                if v != 0.0 {
                    let rect = raster.window().unwrap();
                    prop_assert!(rect.contains(i, j));
                }
            }
        }
    }

    /// The carry-over logic agrees with a literal stateful simulation.
    #[test]
    fn orfp_carry_over_matches_stateful_oracle(
        seq in proptest::collection::vec((0u8..3, 0u8..3), 1..40),
    ) {
        let decode = |v: u8| match v {
            0 => RoadStatus::Inroad,
            1 => RoadStatus::Offroad,
            _ => RoadStatus::OutOfRange,
        };
        let pred: Vec<RoadStatus> = seq.iter().map(|&(p, _)| decode(p)).collect();
        let gt: Vec<RoadStatus> = seq.iter().map(|&(_, g)| decode(g)).collect();

        let mut expect = Vec::with_capacity(seq.len());
        let mut prev = false;
        for t in 0..seq.len() {
            let flagged = if pred[t] == RoadStatus::OutOfRange || gt[t] == RoadStatus::OutOfRange {
                prev
            } else {
                pred[t] == RoadStatus::Offroad && gt[t] == RoadStatus::Inroad
            };
            expect.push(flagged);
            prev = flagged;
        }
        prop_assert_eq!(orfp_flags_from_status(&pred, &gt), expect);
    }

    /// Smooth-L1 is even, non-negative, zero only at zero, and
    /// non-decreasing in |r|.
    #[test]
    fn smooth_l1_shape(r in -10.0f64..10.0, beta in 0.1f64..3.0) {
        prop_assert_eq!(smooth_l1(r, beta), smooth_l1(-r, beta));
        prop_assert!(smooth_l1(r, beta) >= 0.0);
        if r != 0.0 {
            prop_assert!(smooth_l1(r, beta) > 0.0);
            prop_assert!(smooth_l1(1.5 * r, beta) >= smooth_l1(r, beta));
        }
    }
}

// ---- half-plane scenes: center policy implies box policy -------------------

fn dyadic(v: i64) -> f64 {
    v as f64 / 64.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// On vertical half-plane scenes with cells no larger than half the box,
    /// the center-policy ORFP ratio never exceeds the box-policy ratio.
    #[test]
    fn center_orfp_bounded_by_box_orfp(
        boundary_i in -128i64..128, // dyadic boundary in [-2, 2]
        steps in 1usize..12,
        actors in proptest::collection::vec(
            (-256i64..256, -256i64..256, 1.0f64..4.0, 0.5f64..2.0, -7.0f64..7.0),
            1..5,
        ),
    ) {
        let boundary = dyadic(boundary_i);
        let grid = GridSpec::new(20.0, 20.0, 0.25, 0.25, [-10.0, -10.0]).unwrap();
        let mask = DrivableMask::from_fn(&grid, |x, _| x < boundary);

        let mut preds = Vec::new();
        let mut gts = Vec::new();
        for &(xi, yi, l, w, theta) in &actors {
            // predictions near the boundary, fully inside the grid
            let (x, y) = (dyadic(xi), dyadic(yi));
            let wp = WaypointState::new(x, y, l, w, theta);
            preds.push(Trajectory::new(vec![wp; steps], 0.1).unwrap());
            // ground truth parked safely on the drivable side
            let gt = WaypointState::new(boundary - 5.0, 0.0, 1.0, 0.5, 0.0);
            gts.push(Trajectory::new(vec![gt; steps], 0.1).unwrap());
        }

        let ctr = orfp_ratio(&preds, &gts, &mask, OffroadPolicy::Center).unwrap();
        let bx = orfp_ratio(&preds, &gts, &mask, OffroadPolicy::Box).unwrap();
        for (t, (c, b)) in ctr.per_horizon.iter().zip(&bx.per_horizon).enumerate() {
            prop_assert!(c <= b, "horizon {t}: center {c} > box {b}");
        }
    }

    /// ORFP ratios and displacement errors are invariant under actor
    /// reordering and whole-cell scene translation.
    #[test]
    fn metrics_invariances(
        boundary_i in -128i64..128,
        shift_cells in (-8i64..8, -8i64..8),
        actors in proptest::collection::vec(
            (-256i64..256, -256i64..256, 1.0f64..4.0, 0.5f64..2.0, -7.0f64..7.0),
            2..5,
        ),
    ) {
        let boundary = dyadic(boundary_i);
        let grid = GridSpec::new(20.0, 20.0, 0.25, 0.25, [-10.0, -10.0]).unwrap();
        let mask = DrivableMask::from_fn(&grid, |x, _| x < boundary);

        let mut preds = Vec::new();
        let mut gts = Vec::new();
        for &(xi, yi, l, w, theta) in &actors {
            let wp = WaypointState::new(dyadic(xi), dyadic(yi), l, w, theta);
            preds.push(Trajectory::new(vec![wp; 3], 0.1).unwrap());
            let gt = WaypointState::new(boundary - 5.0, dyadic(yi), 1.0, 0.5, 0.0);
            gts.push(Trajectory::new(vec![gt; 3], 0.1).unwrap());
        }

        let base_ctr = orfp_ratio(&preds, &gts, &mask, OffroadPolicy::Center).unwrap();
        let base_l2 = l2_errors(&preds, &gts).unwrap();

        // reordering
        let mut rp = preds.clone();
        let mut rg = gts.clone();
        rp.rotate_left(1);
        rg.rotate_left(1);
        let rot_ctr = orfp_ratio(&rp, &rg, &mask, OffroadPolicy::Center).unwrap();
        prop_assert_eq!(&base_ctr, &rot_ctr);
        let rot_l2 = l2_errors(&rp, &rg).unwrap();
        prop_assert!((base_l2.average - rot_l2.average).abs() <= 1e-12 * base_l2.average.max(1.0));

        // whole-cell translation of everything (dyadic, so exact)
        let (dx, dy) = (shift_cells.0 as f64 * 0.25, shift_cells.1 as f64 * 0.25);
        let shifted_mask = DrivableMask::from_fn(&grid, |x, _| x < boundary + dx);
        let shift = |t: &Trajectory| {
            let wps: Vec<WaypointState> = t
                .waypoints()
                .iter()
                .map(|s| WaypointState::new(s.x + dx, s.y + dy, s.l, s.w, s.theta))
                .collect();
            Trajectory::new(wps, t.timestep()).unwrap()
        };
        let sp: Vec<Trajectory> = preds.iter().map(shift).collect();
        let sg: Vec<Trajectory> = gts.iter().map(shift).collect();
        let shifted_ctr = orfp_ratio(&sp, &sg, &shifted_mask, OffroadPolicy::Center).unwrap();
        prop_assert_eq!(&base_ctr, &shifted_ctr);
    }
}
