mod oracle;

use larseg_core::classifiers::{
    feature_importance, fit_logreg, ranked_importance, train_forest, train_logreg, train_stump,
    Node, Polarity, PredictError, TrainError,
};
use larseg_core::{FeatureMatrix, LabeledDataset, Model, TrainConfig, N_FEATURES};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rows of 42 noise features; feature `signal` carries the label plus noise.
fn signal_dataset(n: usize, signal: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * N_FEATURES);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y = rng.random_bool(0.3) as u8;
        for f in 0..N_FEATURES {
            let noise = rng.random_range(-1.0f32..1.0);
            data.push(if f == signal { y as f32 * 1.5 + noise } else { noise });
        }
        labels.push(y);
    }
    LabeledDataset::new(FeatureMatrix::from_rows(data, vec![]).unwrap(), labels, vec![]).unwrap()
}

fn small_config(n_trees: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        n_trees,
        forest_seed: seed,
        ..TrainConfig::default()
    }
}

#[test]
fn single_tree_matches_cart_oracle() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f32>> = (0..20)
            .map(|_| (0..N_FEATURES).map(|_| rng.random_range(0..6) as f32).collect())
            .collect();
        let labels: Vec<u8> = rows.iter().map(|r| ((r[0] + r[1] + rng.random_range(0.0..3.0)) > 6.0) as u8).collect();
        if !labels.contains(&0) || !labels.contains(&1) {
            continue;
        }
        let data = LabeledDataset::new(
            FeatureMatrix::from_rows(rows.concat(), vec![]).unwrap(),
            labels.clone(),
            vec![],
        )
        .unwrap();
        let config = TrainConfig {
            n_trees: 1,
            bootstrap: false,
            max_features: N_FEATURES,
            forest_seed: seed,
            ..TrainConfig::default()
        };
        let forest = train_forest(&data, &config).unwrap();
        let tree = &forest.trees[0];

        let mut follow_tree = |path: &[bool], _: &[(usize, f64)]| {
            let mut i = 0usize;
            for &right in path {
                match tree.nodes[i] {
                    Node::Split { left, right: r, .. } => i = if right { r } else { left } as usize,
                    Node::Leaf { .. } => panic!("tree is shallower than the oracle"),
                }
            }
            match tree.nodes[i] {
                Node::Split { feature, threshold, .. } => (feature as usize, threshold),
                Node::Leaf { .. } => panic!("tree stopped where the oracle splits"),
            }
        };
        let cart = oracle::CartOracle::fit(&rows, &labels, &mut follow_tree);

        let mut probe = ChaCha8Rng::seed_from_u64(seed + 100);
        for _ in 0..200 {
            let row: Vec<f32> = (0..N_FEATURES).map(|_| probe.random_range(-0.5f32..6.5)).collect();
            assert_eq!(tree.vote(&row), cart.predict(&row), "seed {seed}");
        }
        for (r, &l) in rows.iter().zip(&labels) {
            assert_eq!(cart.predict(r), tree.vote(r));
            // distinct rows with a full-depth tree reproduce their labels
            if rows.iter().filter(|o| *o == r).count() == 1 {
                assert_eq!(tree.vote(r), l);
            }
        }
    }
}

#[test]
fn forest_score_is_vote_fraction() {
    let data = signal_dataset(300, 4, 1);
    let forest = train_forest(&data, &small_config(7, 3)).unwrap();
    let scores = forest.predict_proba(data.features()).unwrap();
    for (row, s) in data.features().rows().zip(&scores) {
        assert_eq!(*s, oracle::traverse_forest(&forest.trees, row));
        let k = (s * 7.0).round();
        assert!((s * 7.0 - k).abs() < 1e-12);
    }
}

#[test]
fn forest_is_deterministic_and_prefix_stable() {
    let data = signal_dataset(250, 2, 5);
    let a = train_forest(&data, &small_config(12, 9)).unwrap();
    let b = train_forest(&data, &small_config(12, 9)).unwrap();
    assert_eq!(a, b);
    let short = train_forest(&data, &small_config(5, 9)).unwrap();
    assert_eq!(short.trees[..], a.trees[..5]);
    assert_eq!(a.truncated(5), short);
    let other = train_forest(&data, &small_config(12, 10)).unwrap();
    assert_ne!(other.trees, a.trees);
}

#[test]
fn importance_contract() {
    let data = signal_dataset(400, 17, 2);
    let forest = train_forest(&data, &small_config(30, 1)).unwrap();
    let imp = feature_importance(&forest);
    assert_eq!(imp.len(), 42);
    assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert!(imp.iter().all(|&v| v >= 0.0));
    let ranked = ranked_importance(&forest);
    assert_eq!(ranked[0].0, 17);
    for w in ranked.windows(2) {
        assert!(w[0].1 >= w[1].1);
    }
}

#[test]
fn unsplit_features_have_zero_importance() {
    // only feature 9 varies, so no other feature can ever be split on
    let n = 60;
    let mut data = vec![0.0f32; n * N_FEATURES];
    let labels: Vec<u8> = (0..n).map(|i| (i % 3 == 0) as u8).collect();
    for i in 0..n {
        data[i * N_FEATURES + 9] = i as f32;
    }
    let d = LabeledDataset::new(FeatureMatrix::from_rows(data, vec![]).unwrap(), labels, vec![]).unwrap();
    let forest = train_forest(&d, &small_config(5, 0)).unwrap();
    let imp = feature_importance(&forest);
    assert_eq!(imp[9], 1.0);
    assert!(imp.iter().enumerate().all(|(f, &v)| f == 9 || v == 0.0));
}

#[test]
fn deep_forest_beats_stump_on_training_data() {
    let data = signal_dataset(300, 0, 8);
    let forest = train_forest(&data, &small_config(25, 2)).unwrap();
    let stump = train_stump(&data.features().column(0), data.labels()).unwrap();
    let accuracy = |pred: Vec<u8>| {
        pred.iter().zip(data.labels()).filter(|(p, l)| p == l).count() as f64 / data.n_samples() as f64
    };
    let f = accuracy(forest.predict_proba(data.features()).unwrap().iter().map(|&s| (s > 0.5) as u8).collect());
    let s = accuracy(data.features().column(0).iter().map(|&a| stump.predict(a)).collect());
    assert!(f >= s, "forest {f} stump {s}");
}

#[test]
fn trainers_reject_single_class() {
    let mut d = signal_dataset(20, 0, 0);
    d = d.select(&(0..20).filter(|&i| d.labels()[i] == 0).collect::<Vec<_>>());
    assert_eq!(train_forest(&d, &TrainConfig::default()), Err(TrainError::SingleClass));
    assert_eq!(train_logreg(&d, &TrainConfig::default()), Err(TrainError::SingleClass));
    assert_eq!(
        train_stump(&d.features().column(0), d.labels()),
        Err(TrainError::SingleClass)
    );
    let bad = TrainConfig {
        n_trees: 0,
        ..TrainConfig::default()
    };
    assert!(matches!(bad.validate(), Err(TrainError::InvalidConfig(_))));
}

#[test]
fn feature_count_mismatch() {
    let data = signal_dataset(50, 0, 0);
    let forest = train_forest(&data, &small_config(2, 0)).unwrap();
    let narrow = FeatureMatrix::from_rows(vec![0.0; 40 * 2], vec![]);
    // a 40-wide matrix cannot even be built as a descriptor matrix
    assert!(narrow.is_err());
    let mut broken = forest.clone();
    broken.feature_count = 41;
    assert!(matches!(
        broken.predict_proba(data.features()),
        Err(PredictError::FeatureCount { .. })
    ));
    assert!(Model::Forest(broken).validate().is_err());
}

#[test]
fn logreg_default_fit_converges_on_signal() {
    let data = signal_dataset(400, 3, 4);
    let fit = fit_logreg(&data, &TrainConfig::default()).unwrap();
    for w in fit.losses.windows(2) {
        assert!(w[1] <= w[0]);
    }
    let top = fit
        .model
        .weights
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap()
        .0;
    assert_eq!(top, 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stump_inverted_labels(amps in prop::collection::vec(-10i32..10, 2..40), bits in prop::collection::vec(0u8..2, 40)) {
        let amps: Vec<f32> = amps.into_iter().map(|a| a as f32 * 0.5).collect();
        let labels: Vec<u8> = bits[..amps.len()].to_vec();
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let inverted: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
        let a = train_stump(&amps, &labels).unwrap();
        let b = train_stump(&amps, &inverted).unwrap();
        prop_assert_eq!(a.threshold, b.threshold);

        // brute force: best midpoint by Gini, smallest on ties
        let mut sorted = amps.clone();
        sorted.sort_by(f32::total_cmp);
        sorted.dedup();
        prop_assume!(sorted.len() > 1);
        let gini = |ls: &[u8]| {
            if ls.is_empty() { return 0.0; }
            let n = ls.len() as f64;
            let p = ls.iter().filter(|&&l| l == 1).count() as f64 / n;
            n * 2.0 * p * (1.0 - p)
        };
        let mut best = (f64::INFINITY, 0.0);
        for w in sorted.windows(2) {
            let t = (w[0] as f64 + w[1] as f64) / 2.0;
            let left: Vec<u8> = amps.iter().zip(&labels).filter(|(a, _)| **a as f64 <= t).map(|(_, l)| *l).collect();
            let right: Vec<u8> = amps.iter().zip(&labels).filter(|(a, _)| **a as f64 > t).map(|(_, l)| *l).collect();
            let g = gini(&left) + gini(&right);
            if g < best.0 - 1e-9 {
                best = (g, t);
            }
        }
        prop_assert_eq!(a.threshold, best.1);
        let left_rate = {
            let l: Vec<u8> = amps.iter().zip(&labels).filter(|(x, _)| **x as f64 <= a.threshold).map(|(_, l)| *l).collect();
            l.iter().filter(|&&v| v == 1).count() as f64 / l.len() as f64
        };
        let right_rate = {
            let r: Vec<u8> = amps.iter().zip(&labels).filter(|(x, _)| **x as f64 > a.threshold).map(|(_, l)| *l).collect();
            r.iter().filter(|&&v| v == 1).count() as f64 / r.len() as f64
        };
        if right_rate != left_rate {
            prop_assert_ne!(a.polarity, b.polarity);
            prop_assert_eq!(a.polarity == Polarity::PositiveAbove, right_rate > left_rate);
        }
    }

    #[test]
    fn stump_scores_rank_like_amplitude(amps in prop::collection::vec(-100.0f32..100.0, 2..50), above in any::<bool>()) {
        let stump = larseg_core::StumpModel {
            threshold: 0.0,
            polarity: if above { Polarity::PositiveAbove } else { Polarity::PositiveBelow },
        };
        let s = stump.scores(&amps);
        for i in 0..amps.len() {
            prop_assert!((0.0..=1.0).contains(&s[i]));
            for j in 0..amps.len() {
                if amps[i] < amps[j] {
                    let ordered = if above { s[i] < s[j] } else { s[i] > s[j] };
                    prop_assert!(ordered);
                }
            }
        }
    }

    #[test]
    fn forest_scores_are_vote_fractions(seed in 0u64..1000, trees in 1usize..6) {
        let data = signal_dataset(60, (seed % 42) as usize, seed);
        prop_assume!(data.n_positives() > 0 && data.n_negatives() > 0);
        let forest = train_forest(&data, &small_config(trees, seed)).unwrap();
        for s in forest.predict_proba(data.features()).unwrap() {
            let k = s * trees as f64;
            prop_assert!((k - k.round()).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&s));
        }
        let imp = feature_importance(&forest);
        prop_assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9 || imp.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn logreg_ranking_survives_affine_rescaling() {
    let data = signal_dataset(300, 5, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let scale: Vec<f32> = (0..N_FEATURES).map(|_| rng.random_range(0.5f32..4.0)).collect();
    let shift: Vec<f32> = (0..N_FEATURES).map(|_| rng.random_range(-3.0f32..3.0)).collect();
    let transform = |m: &FeatureMatrix| {
        let mut out = Vec::with_capacity(m.as_slice().len());
        for row in m.rows() {
            for f in 0..N_FEATURES {
                out.push(row[f] * scale[f] + shift[f]);
            }
        }
        FeatureMatrix::from_rows(out, vec![]).unwrap()
    };
    let scaled = LabeledDataset::new(transform(data.features()), data.labels().to_vec(), vec![]).unwrap();
    let test = signal_dataset(200, 5, 7);
    let config = TrainConfig::default();
    let a = train_logreg(&data, &config).unwrap().predict_proba(test.features()).unwrap();
    let b = train_logreg(&scaled, &config)
        .unwrap()
        .predict_proba(&transform(test.features()))
        .unwrap();
    let order = |s: &[f64]| {
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&i, &j| s[i].total_cmp(&s[j]).then(i.cmp(&j)));
        idx
    };
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-4, "{x} vs {y}");
    }
    let (oa, ob) = (order(&a), order(&b));
    let agree = oa.iter().zip(&ob).filter(|(x, y)| x == y).count();
    // f32 rounding of the rescaled inputs may swap near-ties only
    assert!(agree as f64 >= 0.95 * oa.len() as f64, "{agree}/{}", oa.len());
}

#[test]
fn logreg_scores_identical_under_power_of_two_scaling() {
    // power-of-two factors are exact in floating point, so standardization
    // absorbs them bit for bit
    let data = signal_dataset(300, 11, 12);
    let factors: Vec<f32> = (0..N_FEATURES).map(|f| [0.25f32, 0.5, 2.0, 4.0, 8.0][f % 5]).collect();
    let rescale = |m: &FeatureMatrix| {
        let out: Vec<f32> = m.as_slice().iter().enumerate().map(|(i, v)| v * factors[i % N_FEATURES]).collect();
        FeatureMatrix::from_rows(out, vec![]).unwrap()
    };
    let scaled = LabeledDataset::new(rescale(data.features()), data.labels().to_vec(), vec![]).unwrap();
    let config = TrainConfig::default();
    let a = train_logreg(&data, &config).unwrap().predict_proba(data.features()).unwrap();
    let b = train_logreg(&scaled, &config).unwrap().predict_proba(scaled.features()).unwrap();
    assert_eq!(a, b);
}
