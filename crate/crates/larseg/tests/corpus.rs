use larseg::corpus::{
    corpus_datasets, default_train_count, generate_corpus, label_counts, load_corpus,
    CorpusError, MANIFEST_FILE,
};
use larseg::io::{save_image, save_mask};
use larseg_core::image::{NOISE, TRACK, UNLABELED};
use larseg_core::{EventImage, LabelMask, SynthConfig};

fn small() -> SynthConfig {
    SynthConfig {
        width: 24,
        height: 24,
        seed: 11,
        ..SynthConfig::default()
    }
}

#[test]
fn generated_corpus_layout_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = generate_corpus(&small(), 10, dir.path()).unwrap();
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 21);
    assert!(dir.path().join(MANIFEST_FILE).is_file());
    assert_eq!(manifest.split.train, (0..8).collect::<Vec<u32>>());
    assert_eq!(manifest.split.test, vec![8, 9]);

    let (loaded, events) = load_corpus(dir.path()).unwrap();
    assert_eq!(loaded, manifest);
    let (track, noise, unlabeled) = label_counts(&events);
    assert_eq!((track, noise, unlabeled), (manifest.track_pixels, manifest.noise_pixels, 0));
    assert_eq!(manifest.prevalence, track as f64 / (track + noise) as f64);
    for (e, entry) in events.iter().zip(&manifest.events) {
        assert_eq!(e.mask.count(TRACK), entry.track_pixels);
        assert_eq!(entry.seed, small().event_seed(entry.id as u64));
    }
}

#[test]
fn generation_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate_corpus(&small(), 4, a.path()).unwrap();
    generate_corpus(&small(), 4, b.path()).unwrap();
    for entry in std::fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
}

#[test]
fn split_datasets_follow_events() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = generate_corpus(&small(), 5, dir.path()).unwrap();
    let (_, events) = load_corpus(dir.path()).unwrap();
    let (train, test) = corpus_datasets(&manifest, &events).unwrap();
    assert_eq!(train.n_samples(), 4 * 24 * 24);
    assert_eq!(test.n_samples(), 24 * 24);
    assert_eq!(train.n_positives() + test.n_positives(), manifest.track_pixels);
}

#[test]
fn directory_without_manifest_is_scanned() {
    let dir = tempfile::tempdir().unwrap();
    for (i, name) in ["b", "a", "c"].iter().enumerate() {
        let image = EventImage::new(2, 2, vec![i as f32; 4]).unwrap();
        save_image(&image, &dir.path().join(format!("{name}.larimg"))).unwrap();
        if *name != "c" {
            let mask = LabelMask::new(2, 2, vec![TRACK, NOISE, UNLABELED, NOISE]).unwrap();
            save_mask(&mask, &dir.path().join(format!("{name}.larmsk"))).unwrap();
        }
    }
    let (manifest, events) = load_corpus(dir.path()).unwrap();
    assert!(manifest.config.is_none());
    let names: Vec<&str> = manifest.events.iter().map(|e| e.image.as_str()).collect();
    assert_eq!(names, ["a.larimg", "b.larimg"]);
    assert_eq!(events[0].image.pixels()[0], 1.0);
    assert_eq!((manifest.track_pixels, manifest.noise_pixels), (2, 4));
    assert_eq!(label_counts(&events), (2, 4, 2));
    assert_eq!(manifest.split.train, vec![0]);
    assert_eq!(manifest.split.test, vec![1]);
}

#[test]
fn errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(generate_corpus(&small(), 0, dir.path()), Err(CorpusError::NoEvents)));
    assert!(matches!(load_corpus(dir.path()), Err(CorpusError::Empty(_))));
    std::fs::write(dir.path().join(MANIFEST_FILE), b"{").unwrap();
    assert!(matches!(load_corpus(dir.path()), Err(CorpusError::Manifest { .. })));
}

#[test]
fn train_count() {
    assert_eq!(default_train_count(50), 40);
    assert_eq!(default_train_count(1), 1);
    assert_eq!(default_train_count(2), 1);
    assert_eq!(default_train_count(3), 2);
}
