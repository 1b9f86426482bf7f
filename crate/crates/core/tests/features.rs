use gaze_topo::embed::EmbeddingParams;
use gaze_topo::features::{
    alpha_values, featurize, slot, stats, Alpha, FeatureVector, FEATURE_LEN,
};
use gaze_topo::ingest::{generate_synthetic, LabeledTrajectory};
use gaze_topo::persistence::{Bar, PersistenceDiagram};

fn small_params() -> EmbeddingParams {
    EmbeddingParams {
        dim: 3,
        delay: 4,
        reduction: 10,
        normalize: false,
    }
}

/// Entropy slots lie in `[0, ln n]` for the count `n` stored next to them.
fn check_entropy_bounds(fv: &FeatureVector) {
    for c in 0..3 {
        for d in 0..2 {
            for a in 0..3 {
                let h = fv.values[slot(c, d, a, 1)];
                let n = fv.values[slot(c, d, a, 3)];
                assert!(h >= 0.0);
                if n > 0.0 {
                    assert!(h <= n.ln() + 1e-12, "entropy {h} above ln {n}");
                }
            }
        }
    }
}

#[test]
fn synthetic_features_are_finite_and_bounded() {
    for class in 0..4 {
        for seed in 0..3 {
            let t = generate_synthetic(class, 800, 0.01, seed).unwrap();
            let fv = featurize(&t, &small_params()).unwrap();
            assert_eq!(fv.values.len(), FEATURE_LEN);
            assert!(fv.values.iter().all(|v| v.is_finite()));
            assert_eq!(fv.label, Some(class));
            check_entropy_bounds(&fv);
        }
    }
}

#[test]
fn uniform_persistence_has_maximal_entropy() {
    for n in [1usize, 2, 3, 7, 50, 1000] {
        let bars = (0..n).map(|i| Bar::new(i as f64 * 0.1, i as f64 * 0.1 + 0.25));
        let d = PersistenceDiagram::new(1, bars);
        let s = stats(&alpha_values(&d, Alpha::Persistence));
        assert!(
            (s.entropy - (n as f64).ln()).abs() <= 1e-12,
            "n={n}: {}",
            s.entropy
        );
        assert_eq!(s.cardinality, n as f64);
    }
}

#[test]
fn scaling_the_trajectory_scales_values_only() {
    let t = generate_synthetic(0, 800, 0.01, 9).unwrap();
    let k = 3.5;
    let scaled = LabeledTrajectory::new(
        t.samples().iter().map(|&[x, y]| [k * x, k * y]).collect(),
        t.label(),
        t.sample_rate_hz(),
    )
    .unwrap();
    let a = featurize(&t, &small_params()).unwrap();
    let b = featurize(&scaled, &small_params()).unwrap();
    for i in 0..FEATURE_LEN {
        let (u, v) = (a.values[i], b.values[i]);
        match i % 4 {
            0 | 2 => assert!(
                (k * u - v).abs() <= 1e-9 * (1.0 + v.abs()),
                "slot {i}: {u} {v}"
            ),
            1 => assert!((u - v).abs() <= 1e-9, "slot {i}: {u} {v}"),
            _ => assert_eq!(u, v, "slot {i}"),
        }
    }
}

#[test]
fn too_short_trajectory_is_rejected() {
    let t = LabeledTrajectory::new(vec![[0.0, 0.0]; 100], None, 60.0).unwrap();
    assert!(featurize(&t, &EmbeddingParams::default()).is_err());
}
