mod common;

use common::mst_weights;
use gaze_topo::embed::PointCloud;
use gaze_topo::persistence::{
    compute_diagrams, oracle_persistence, pairwise_distances, rips_h0, rips_h1, Bar,
    DistanceMatrix, PersistenceDiagram,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> PointCloud {
    let coords = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    PointCloud::from_flat(dim, coords).unwrap()
}

fn circle(n: usize) -> PointCloud {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    PointCloud::from_points(&pts).unwrap()
}

#[test]
fn engine_matches_oracle_on_random_clouds() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for trial in 0..200 {
        let n = rng.gen_range(3..=10);
        let dim = [2, 3, 6][trial % 3];
        let cloud = random_cloud(&mut rng, n, dim);
        let (d0, d1) = compute_diagrams(&cloud).unwrap();
        let oracle = oracle_persistence(&pairwise_distances(&cloud), 1).unwrap();
        assert!(
            d0.approx_eq(&oracle[0], 1e-9),
            "H0 trial {trial}: {d0:?} vs {:?}",
            oracle[0]
        );
        assert!(
            d1.approx_eq(&oracle[1], 1e-9),
            "H1 trial {trial}: {d1:?} vs {:?}",
            oracle[1]
        );
    }
}

#[test]
fn h0_deaths_are_mst_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let n = rng.gen_range(1..=50);
        let dim = rng.gen_range(1..=4);
        let dist = pairwise_distances(&random_cloud(&mut rng, n, dim));
        let h0 = rips_h0(&dist);
        let mut deaths: Vec<f64> = h0.finite().map(|b| b.death).collect();
        deaths.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = mst_weights(&dist)
            .into_iter()
            .filter(|&w| w > 0.0)
            .collect();
        expected.sort_by(f64::total_cmp);
        assert_eq!(deaths, expected);
        assert_eq!(h0.infinite_count(), 1);
        assert!(h0.bars.iter().all(|b| b.birth == 0.0));
    }
}

#[test]
fn ten_points_in_unit_square_h0() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dist = pairwise_distances(&random_cloud(&mut rng, 10, 2));
    let deaths: Vec<f64> = rips_h0(&dist).finite().map(|b| b.death).collect();
    let mut mst = mst_weights(&dist);
    mst.sort_by(f64::total_cmp);
    assert_eq!(deaths, mst);
}

#[test]
fn unit_square_loop_exact() {
    let sq = PointCloud::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
    let dist = pairwise_distances(&sq);
    let d1 = rips_h1(&dist, 2.0).unwrap();
    assert_eq!(d1.len(), 1);
    assert!((d1.bars[0].birth - 1.0).abs() <= 1e-12);
    assert!((d1.bars[0].death - 2f64.sqrt()).abs() <= 1e-12);
    let oracle = oracle_persistence(&dist, 1).unwrap();
    let (d0, d1c) = compute_diagrams(&sq).unwrap();
    assert!(d0.approx_eq(&oracle[0], 0.0));
    assert!(d1c.approx_eq(&oracle[1], 0.0));
}

#[test]
fn twelve_point_circle() {
    let c = circle(12);
    let dist = pairwise_distances(&c);
    let d1 = rips_h1(&dist, 2.0).unwrap();
    assert_eq!(d1.len(), 1, "{d1:?}");
    let expected_birth = 2.0 * (std::f64::consts::PI / 12.0).sin();
    assert!((d1.bars[0].birth - expected_birth).abs() <= 1e-12);
    let oracle = oracle_persistence(&dist, 1).unwrap();
    assert_eq!(oracle[1].len(), 1);
    assert!((d1.bars[0].death - oracle[1].bars[0].death).abs() <= 1e-12);
}

#[test]
fn collinear_points_have_empty_h1() {
    let c = PointCloud::from_points(&[[0.0], [1.0], [3.0]]).unwrap();
    assert!(compute_diagrams(&c).unwrap().1.is_empty());
}

#[test]
fn oracle_single_point() {
    let d = oracle_persistence(&DistanceMatrix::from_lower(1, vec![]), 1).unwrap();
    assert_eq!(d[0].bars, vec![Bar::new(0.0, f64::INFINITY)]);
    assert!(d[1].is_empty());
}

#[test]
fn truncated_threshold_matches_oracle_up_to_threshold() {
    // Bars dying past the threshold become essential; everything else agrees.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let cloud = random_cloud(&mut rng, 9, 2);
        let dist = pairwise_distances(&cloud);
        let t = 0.6 * dist.diameter();
        let d1 = rips_h1(&dist, t).unwrap();
        let oracle = oracle_persistence(&dist, 1).unwrap();
        let expected = PersistenceDiagram::new(
            1,
            oracle[1].bars.iter().filter(|b| b.birth <= t).map(|b| {
                if b.death > t {
                    Bar::new(b.birth, f64::INFINITY)
                } else {
                    *b
                }
            }),
        );
        assert!(d1.approx_eq(&expected, 1e-12), "{d1:?} vs {expected:?}");
    }
}

/// Greedy matching of two diagrams of equal size after sorting by
/// persistence; returns the largest endpoint displacement.
fn greedy_shift(a: &PersistenceDiagram, b: &PersistenceDiagram) -> f64 {
    let mut a: Vec<Bar> = a.finite().copied().collect();
    let mut b: Vec<Bar> = b.finite().copied().collect();
    a.sort_by(|x, y| y.persistence().total_cmp(&x.persistence()));
    b.sort_by(|x, y| y.persistence().total_cmp(&x.persistence()));
    let mut worst: f64 = 0.0;
    for (x, y) in a.iter().zip(&b) {
        worst = worst
            .max((x.birth - y.birth).abs())
            .max((x.death - y.death).abs());
    }
    // Unmatched bars must be within reach of the diagonal.
    for extra in a.iter().skip(b.len()).chain(b.iter().skip(a.len())) {
        worst = worst.max(extra.persistence() / 2.0);
    }
    worst
}

#[test]
fn small_perturbations_move_bars_little() {
    let base = circle(12);
    let (b0, b1) = compute_diagrams(&base).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for &delta in &[1e-3, 5e-4, 1e-4] {
        for _ in 0..20 {
            let coords: Vec<f64> = base
                .points()
                .flat_map(|p| {
                    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                    let r = delta * rng.gen::<f64>();
                    [p[0] + r * angle.cos(), p[1] + r * angle.sin()]
                })
                .collect();
            let moved = PointCloud::from_flat(2, coords).unwrap();
            let (m0, m1) = compute_diagrams(&moved).unwrap();
            assert!(greedy_shift(&b0, &m0) <= 2.0 * delta + 1e-12);
            assert!(greedy_shift(&b1, &m1) <= 2.0 * delta + 1e-12);
        }
    }
}

#[test]
fn h1_births_are_edge_lengths() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..30 {
        let cloud = random_cloud(&mut rng, 25, 3);
        let dist = pairwise_distances(&cloud);
        let (_, d1) = compute_diagrams(&cloud).unwrap();
        for bar in &d1.bars {
            assert!(dist.lower().contains(&bar.birth));
            assert!(dist.lower().contains(&bar.death));
            assert!(bar.birth < bar.death);
        }
        assert_eq!(d1.infinite_count(), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_invariance(seed in any::<u64>(), n in 3usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cloud = random_cloud(&mut rng, n, 2);
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let shuffled: Vec<Vec<f64>> = order.iter().map(|&i| cloud.point(i).to_vec()).collect();
        let shuffled = PointCloud::from_points(&shuffled).unwrap();
        let (a0, a1) = compute_diagrams(&cloud).unwrap();
        let (b0, b1) = compute_diagrams(&shuffled).unwrap();
        prop_assert!(a0.approx_eq(&b0, 0.0));
        prop_assert!(a1.approx_eq(&b1, 0.0));
    }

    #[test]
    fn h0_has_one_essential_bar(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d0 = rips_h0(&pairwise_distances(&random_cloud(&mut rng, n, 3)));
        prop_assert_eq!(d0.infinite_count(), 1);
        prop_assert_eq!(d0.len(), n);
    }
}
