use std::collections::BTreeSet;

use larseg_core::dataset::{
    build_dataset, downsample_negatives, event_samples, negative_quota, DatasetError,
};
use larseg_core::image::{LabelMask, NOISE, TRACK, UNLABELED};
use larseg_core::synth::generate_event;
use larseg_core::{EventImage, FeatureMatrix, LabeledDataset, LabeledEvent, SplitSpec, SynthConfig};
use proptest::prelude::*;

fn toy(labels: Vec<u8>) -> LabeledDataset {
    let n = labels.len();
    // feature 1 holds the row index so selections can be traced
    let data: Vec<f32> = (0..n * 42).map(|i| if i % 42 == 1 { (i / 42) as f32 } else { 0.0 }).collect();
    LabeledDataset::new(FeatureMatrix::from_rows(data, vec![]).unwrap(), labels, vec![]).unwrap()
}

fn events(n: u32) -> Vec<LabeledEvent> {
    let cfg = SynthConfig {
        width: 24,
        height: 20,
        ..SynthConfig::default()
    };
    (0..n)
        .map(|id| {
            let (image, mask) = generate_event(&cfg, cfg.event_seed(id as u64)).unwrap();
            LabeledEvent { id, image, mask }
        })
        .collect()
}

#[test]
fn full_scale_quota() {
    assert_eq!(negative_quota(51_300, usize::MAX, 100), 5_130_000);
    assert_eq!(negative_quota(10, 10, 1), 10);
    assert_eq!(negative_quota(10, 15, 20), 15);
}

#[test]
fn ratio_one_on_balanced_set_keeps_everything() {
    let mut labels = vec![1u8; 10];
    labels.extend(vec![0u8; 10]);
    let d = toy(labels);
    assert_eq!(downsample_negatives(&d, 1, 3).unwrap(), d);
}

#[test]
fn downsampling_errors() {
    let d = toy(vec![0, 0, 0]);
    assert_eq!(downsample_negatives(&d, 5, 0), Err(DatasetError::NoPositives));
    let d = toy(vec![1, 0]);
    assert_eq!(downsample_negatives(&d, 0, 0), Err(DatasetError::InvalidRatio(0)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn downsampling_properties(labels in prop::collection::vec(prop::bool::weighted(0.1), 1..400), ratio in 1u32..120, seed in any::<u64>()) {
        let labels: Vec<u8> = labels.into_iter().map(u8::from).collect();
        prop_assume!(labels.contains(&1));
        let d = toy(labels.clone());
        let n_pos = d.n_positives();
        let out = downsample_negatives(&d, ratio, seed).unwrap();
        prop_assert_eq!(out.n_positives(), n_pos);
        prop_assert_eq!(out.n_negatives(), negative_quota(n_pos, d.n_negatives(), ratio));
        prop_assert_eq!(out.n_negatives(), (n_pos * ratio as usize).min(d.n_negatives()));

        let rows: Vec<usize> = out.features().column(1).iter().map(|&v| v as usize).collect();
        let unique: BTreeSet<usize> = rows.iter().copied().collect();
        prop_assert_eq!(unique.len(), rows.len(), "duplicated rows");
        prop_assert!(rows.windows(2).all(|w| w[0] < w[1]), "original order kept");
        for (&r, &l) in rows.iter().zip(out.labels()) {
            prop_assert_eq!(l, labels[r]);
        }
        let again = downsample_negatives(&d, ratio, seed).unwrap();
        prop_assert_eq!(&again, &out);
        let other = downsample_negatives(&d, ratio, seed.wrapping_add(1)).unwrap();
        prop_assert_eq!(other.n_negatives(), out.n_negatives());
        prop_assert!((out.negatives_per_positive() - out.n_negatives() as f64 / n_pos as f64).abs() < 1e-12);
    }
}

#[test]
fn split_validation() {
    assert_eq!(SplitSpec::new(vec![1, 2], vec![2, 3]), Err(DatasetError::OverlappingSplit(2)));
    assert_eq!(SplitSpec::new(vec![1, 1], vec![]), Err(DatasetError::DuplicateEvent(1)));
    let s = SplitSpec::leading(&[4, 5, 6, 7, 8], 3).unwrap();
    assert_eq!((s.train(), s.test()), (&[4u32, 5, 6][..], &[7u32, 8][..]));

    let ev = events(3);
    let missing = SplitSpec::new(vec![0, 1], vec![9]).unwrap();
    assert_eq!(build_dataset(&ev, &missing).unwrap_err(), DatasetError::UnknownEvent(9));
    let partial = SplitSpec::new(vec![0], vec![1]).unwrap();
    assert_eq!(build_dataset(&ev, &partial).unwrap_err(), DatasetError::UnassignedEvent(2));
}

#[test]
fn event_level_split_and_counts() {
    let ev = events(6);
    let split = SplitSpec::new(vec![0, 2, 3, 5], vec![1, 4]).unwrap();
    let (train, test) = build_dataset(&ev, &split).unwrap();

    let train_ids: BTreeSet<u32> = train.event_ids().iter().copied().collect();
    let test_ids: BTreeSet<u32> = test.event_ids().iter().copied().collect();
    assert!(train_ids.is_disjoint(&test_ids));
    assert_eq!(train_ids, BTreeSet::from([0, 2, 3, 5]));

    let count = |ids: &[u32], code: u8| -> usize {
        ev.iter().filter(|e| ids.contains(&e.id)).map(|e| e.mask.count(code)).sum()
    };
    assert_eq!(train.n_positives(), count(split.train(), TRACK));
    assert_eq!(train.n_negatives(), count(split.train(), NOISE));
    assert_eq!(test.n_positives(), count(split.test(), TRACK));
    assert_eq!(test.n_samples(), 2 * 24 * 20);
    for p in test.features().provenance() {
        assert!(split.test().contains(&p.image_id));
    }
}

#[test]
fn unlabeled_pixels_are_dropped() {
    let image = EventImage::from_fn(5, 4, |r, c| (r * 5 + c) as f32).unwrap();
    let mut labels = vec![NOISE; 20];
    labels[3] = TRACK;
    labels[7] = UNLABELED;
    labels[8] = UNLABELED;
    let mask = LabelMask::new(5, 4, labels).unwrap();
    let d = event_samples(&LabeledEvent { id: 2, image, mask }).unwrap();
    assert_eq!(d.n_samples(), 18);
    assert_eq!(d.n_positives(), 1);
    let amps = d.features().column(0);
    assert!(!amps.contains(&7.0) && !amps.contains(&8.0));
    assert_eq!(d.event_ids(), &[2; 18]);
}

#[test]
fn mismatched_mask_rejected() {
    let image = EventImage::new(3, 3, vec![0.0; 9]).unwrap();
    let mask = LabelMask::filled(3, 2, NOISE).unwrap();
    let e = LabeledEvent { id: 7, image, mask };
    assert_eq!(event_samples(&e).unwrap_err(), DatasetError::DimensionMismatch(7));
}
