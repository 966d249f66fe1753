mod common;

use common::*;
use pcfilter_core::filtering::data_energy;
use pcfilter_core::metrics::{chamfer_distance, mean_square_error, MseVariant};
use pcfilter_core::{NeighborIndex, Vec3};
use proptest::prelude::*;

#[test]
fn grid_knn_matches_exhaustive_scan() {
    // 100 points on a 5×5×4 grid: many exact distance ties.
    let pts: Vec<Vec3> = (0..100)
        .map(|i| Vec3::new((i % 5) as f64, ((i / 5) % 5) as f64, (i / 25) as f64))
        .collect();
    let index = NeighborIndex::build(&pts).unwrap();
    for q in 0..pts.len() {
        assert_eq!(index.k_nearest(q, 4).unwrap(), brute_knn(&pts, q, 4), "query {q}");
    }
}

#[test]
fn random_knn_matches_exhaustive_scan() {
    let pts = random_points(11, 500);
    let index = NeighborIndex::build(&pts).unwrap();
    for q in 0..pts.len() {
        assert_eq!(index.k_nearest(q, 30).unwrap(), brute_knn(&pts, q, 30));
    }
}

#[test]
fn queries_leave_source_untouched() {
    let pts = random_points(5, 64);
    let copy = pts.clone();
    let index = NeighborIndex::build(&pts).unwrap();
    for q in 0..64 {
        index.k_nearest(q, 7).unwrap();
    }
    assert_eq!(pts, copy);
    assert_eq!(index.points(), &copy[..]);
}

#[test]
fn chamfer_matches_double_loop() {
    let a = random_points(1, 40);
    let b = random_points(2, 40);
    let c = chamfer_distance(&a, &b).unwrap();
    assert!(relative_error(c, brute_chamfer(&a, &b)) < 1e-12);
    assert_eq!(c, chamfer_distance(&b, &a).unwrap());
}

#[test]
fn mse_matches_double_loop() {
    let s1 = random_points(3, 200);
    let s2 = random_points(4, 180);
    let m = mean_square_error(&s1, &s2, 10, MseVariant::Described).unwrap();
    assert!(relative_error(m, brute_mse(&s1, &s2, 10)) < 1e-12);
}

#[test]
fn data_energy_matches_double_loop() {
    let pts = random_points(9, 20);
    let mut r = rng(10);
    let normals: Vec<Vec3> = (0..20).map(|_| random_unit(&mut r)).collect();
    let index = NeighborIndex::build(&pts).unwrap();
    for k in [1, 5, 19] {
        let e = data_energy(&index, &normals, k).unwrap();
        assert!(relative_error(e, brute_data_energy(&pts, &normals, k)) < 1e-12);
    }
}

#[test]
fn coplanar_energy_is_zero() {
    let pts: Vec<Vec3> = random_points(12, 30)
        .into_iter()
        .map(|p| Vec3::new(p.x, p.y, 0.0))
        .collect();
    let index = NeighborIndex::build(&pts).unwrap();
    assert_eq!(data_energy(&index, &vec![Vec3::Z; 30], 8).unwrap(), 0.0);
}

fn cloud_strategy() -> impl Strategy<Value = Vec<Vec3>> {
    // Coarse lattice values so duplicate distances and coincident points occur.
    prop::collection::vec((-4i32..4, -4i32..4, -2i32..2), 2..60).prop_map(|v| {
        v.into_iter()
            .map(|(x, y, z)| Vec3::new(x as f64 * 0.5, y as f64 * 0.5, z as f64 * 0.5))
            .collect()
    })
}

proptest! {
    #[test]
    fn knn_equals_brute_force(pts in cloud_strategy(), q_seed in 0usize..1000, k_seed in 0usize..1000) {
        let q = q_seed % pts.len();
        let k = 1 + k_seed % (pts.len() - 1);
        let index = NeighborIndex::build(&pts).unwrap();
        let got = index.k_nearest(q, k).unwrap();
        prop_assert_eq!(got.len(), k);
        prop_assert!(!got.contains(&q));
        prop_assert_eq!(got, brute_knn(&pts, q, k));
    }

    #[test]
    fn metrics_scale_quadratically(seed in 0u64..500, c in 0.1f64..10.0) {
        let a = random_points(seed, 25);
        let b = random_points(seed + 1000, 30);
        let sa: Vec<Vec3> = a.iter().map(|&p| p * c).collect();
        let sb: Vec<Vec3> = b.iter().map(|&p| p * c).collect();
        let cd = chamfer_distance(&a, &b).unwrap();
        prop_assert!(relative_error(chamfer_distance(&sa, &sb).unwrap(), c * c * cd) < 1e-9);
        let m = mean_square_error(&a, &b, 10, MseVariant::Described).unwrap();
        prop_assert!(relative_error(mean_square_error(&sa, &sb, 10, MseVariant::Described).unwrap(), c * c * m) < 1e-9);
    }

    #[test]
    fn metrics_are_rigid_invariant(seed in 0u64..500, angle in -3.0f64..3.0, tx in -5.0f64..5.0) {
        let a = random_points(seed, 25);
        let b = random_points(seed + 7, 20);
        let r = rotation(Vec3::new(0.3, -0.5, 1.0), angle);
        let t = Vec3::new(tx, 1.0, -2.0);
        let ta: Vec<Vec3> = a.iter().map(|&p| rotate(&r, p) + t).collect();
        let tb: Vec<Vec3> = b.iter().map(|&p| rotate(&r, p) + t).collect();
        let cd = chamfer_distance(&a, &b).unwrap();
        prop_assert!((chamfer_distance(&ta, &tb).unwrap() - cd).abs() < 1e-9);
        let m = mean_square_error(&a, &b, 10, MseVariant::Described).unwrap();
        prop_assert!((mean_square_error(&ta, &tb, 10, MseVariant::Described).unwrap() - m).abs() < 1e-9);
    }
}

#[test]
fn identical_sets_give_zero_metrics() {
    let a = random_points(77, 50);
    assert_eq!(chamfer_distance(&a, &a).unwrap(), 0.0);
    assert_eq!(mean_square_error(&a, &a, 1, MseVariant::Described).unwrap(), 0.0);
}
