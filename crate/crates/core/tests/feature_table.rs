use std::collections::{BTreeMap, HashSet};

use pdvoice_core::cohort::{CohortManifest, Group, SubjectRow};
use pdvoice_core::features::{
    column_names, extract_recording, registry, ExtractConfig, FeatureKind, RecordingFeatures,
    REGISTRY,
};
use pdvoice_core::synth::{self, VoiceParams};
use pdvoice_core::table::{build_matrix, registry_json, summarize, Extracted, Scope};
use pdvoice_core::{Recording, Task, Vowel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn manifest(ids: &[&str]) -> CohortManifest {
    CohortManifest {
        rows: ids
            .iter()
            .map(|id| SubjectRow {
                subject_id: id.to_string(),
                group: Group::Pd,
                sex: None,
                age: None,
                scores: BTreeMap::new(),
                recordings: BTreeMap::new(),
            })
            .collect(),
    }
}

/// Fake extractor output with every non-cross feature present.
fn fake(seed: u64, f1: f64, f2: f64) -> RecordingFeatures {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RecordingFeatures::default();
    for spec in REGISTRY.iter().filter(|f| !f.cross_vowel) {
        match spec.kind {
            FeatureKind::Scalar => {
                out.scalars.insert(spec.name, rng.random_range(0.0..1.0));
            }
            FeatureKind::Contour => {
                let v = match spec.name {
                    "f1" => vec![f1; 5],
                    "f2" => vec![f2; 5],
                    _ => (0..20).map(|_| rng.random_range(0.0..1.0)).collect(),
                };
                out.contours.insert(spec.name, v);
            }
        }
    }
    out
}

fn extracted(ids: &[&str], task: Task) -> Extracted {
    let corners = [
        (Vowel::A, 800.0, 1200.0),
        (Vowel::E, 500.0, 1800.0),
        (Vowel::I, 300.0, 2300.0),
        (Vowel::O, 500.0, 900.0),
        (Vowel::U, 350.0, 800.0),
    ];
    let mut out = Extracted::new();
    for (k, id) in ids.iter().enumerate() {
        for (j, &(v, f1, f2)) in corners.iter().enumerate() {
            out.insert((id.to_string(), v, task), fake((k * 10 + j) as u64, f1, f2));
        }
    }
    out
}

#[test]
fn uniform_percentiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<f64> = (0..10_000).map(|_| rng.random_range(0.0..1.0)).collect();
    let s = summarize(&x).unwrap();
    assert!((s.p1 - 0.01).abs() <= 0.005, "p1 {}", s.p1);
    assert!((s.p99 - 0.99).abs() <= 0.005, "p99 {}", s.p99);
    // Order-statistics oracle: linear interpolation at rank p (n - 1).
    let mut sorted = x.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pos = 0.01 * 9_999.0;
    let lo = pos as usize;
    let expected = sorted[lo] + (pos - lo as f64) * (sorted[lo + 1] - sorted[lo]);
    assert_eq!(s.p1, expected);
}

proptest! {
    #[test]
    fn summary_permutation_invariant(x in prop::collection::vec(-1e3f64..1e3, 1..200), seed in any::<u64>()) {
        let mut y = x.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..y.len()).rev() {
            y.swap(i, rng.random_range(0..=i));
        }
        let (a, b) = (summarize(&x).unwrap(), summarize(&y).unwrap());
        prop_assert_eq!(a.median, b.median);
        prop_assert_eq!(a.p1, b.p1);
        prop_assert_eq!(a.p99, b.p99);
        prop_assert!((a.std - b.std).abs() <= 1e-9 * a.std.max(1.0));
    }

    #[test]
    fn summary_shift_equivariant(x in prop::collection::vec(-1e3f64..1e3, 1..200), c in -1e3f64..1e3) {
        let y: Vec<f64> = x.iter().map(|v| v + c).collect();
        let (a, b) = (summarize(&x).unwrap(), summarize(&y).unwrap());
        let tol = 1e-9 * 2e3;
        prop_assert!((b.median - a.median - c).abs() <= tol);
        prop_assert!((b.p1 - a.p1 - c).abs() <= tol);
        prop_assert!((b.p99 - a.p99 - c).abs() <= tol);
        prop_assert!((b.std - a.std).abs() <= tol);
        prop_assert!((b.ir - a.ir).abs() <= tol);
        prop_assert_eq!(a.ir, a.p99 - a.p1);
    }
}

#[test]
fn single_vowel_shape() {
    let ids = ["s1", "s2", "s3"];
    let m = build_matrix(
        &manifest(&ids),
        &extracted(&ids, Task::S),
        Scope::Vowel(Vowel::E, Task::S),
    );
    assert_eq!(m.n_rows(), 3);
    assert_eq!(m.columns, column_names());
    assert!(m.column_index("e_jitter_local").is_none());
    assert!((300..=400).contains(&m.n_cols()));
    // Cross-vowel indices are attached to the [e] rows too.
    let (a, i, u): ((f64, f64), (f64, f64), (f64, f64)) =
        ((800.0, 1200.0), (300.0, 2300.0), (350.0, 800.0));
    let shoelace =
        0.5 * ((a.0 * i.1 - i.0 * a.1) + (i.0 * u.1 - u.0 * i.1) + (u.0 * a.1 - a.0 * u.1)).abs();
    let j = m.column_index("vsa").unwrap();
    for row in &m.values {
        assert!((row[j].unwrap() - shoelace).abs() < 1e-6);
    }
    assert_eq!(m.missing_fraction(), 0.0);
}

#[test]
fn all_vowel_shape_and_dedup() {
    let ids = ["s1", "s2"];
    let single = column_names().len();
    let cross = REGISTRY.iter().filter(|f| f.cross_vowel).count();
    let m = build_matrix(
        &manifest(&ids),
        &extracted(&ids, Task::Ls),
        Scope::All(Task::Ls),
    );
    assert_eq!(m.n_rows(), 2);
    assert_eq!(m.n_cols() + 4 * cross, 5 * single);
    let unique: HashSet<&String> = m.columns.iter().collect();
    assert_eq!(unique.len(), m.n_cols());
    assert!(m.column_index("a_jitter_local").is_some());
    assert!(m.column_index("u_f1_median").is_some());
    assert!(m.column_index("vsa").is_some());
    assert!(m.column_index("a_vsa").is_none());
}

#[test]
fn missing_recording_keeps_row() {
    let ids = ["s1", "s2"];
    let mut ex = extracted(&ids, Task::S);
    ex.remove(&("s2".to_string(), Vowel::A, Task::S));
    let m = build_matrix(&manifest(&ids), &ex, Scope::Vowel(Vowel::A, Task::S));
    assert_eq!(m.n_rows(), 2);
    assert!(m.values[1].iter().all(Option::is_none));
    assert!(m.values[0].iter().all(Option::is_some));
}

#[test]
fn csv_is_deterministic() {
    let ids = ["s1", "s2", "s3"];
    let a = build_matrix(
        &manifest(&ids),
        &extracted(&ids, Task::S),
        Scope::All(Task::S),
    )
    .to_csv_string();
    let b = build_matrix(
        &manifest(&ids),
        &extracted(&ids, Task::S),
        Scope::All(Task::S),
    )
    .to_csv_string();
    assert_eq!(a, b);
    let json = registry_json().unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), registry().len());
}

fn synthetic_voice(scale: f64) -> Recording {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let x = synth::voice(&VoiceParams::default(), &mut rng);
    Recording::from_samples(x.iter().map(|v| v * scale).collect(), 16_000)
}

#[test]
fn extractor_outputs_match_registry() {
    let f = extract_recording(&synthetic_voice(1.0), &ExtractConfig::default()).unwrap();
    assert!(f.failures.is_empty(), "{:?}", f.failures);
    for spec in REGISTRY.iter().filter(|s| !s.cross_vowel) {
        match spec.kind {
            FeatureKind::Scalar => {
                assert!(f.scalars.contains_key(spec.name), "missing {}", spec.name)
            }
            FeatureKind::Contour => {
                assert!(f.contours.contains_key(spec.name), "missing {}", spec.name)
            }
        }
    }
    let registered = REGISTRY.iter().filter(|s| !s.cross_vowel).count();
    assert_eq!(f.scalars.len() + f.contours.len(), registered);
}

#[test]
fn scale_invariance_flags_hold() {
    let a = extract_recording(&synthetic_voice(1.0), &ExtractConfig::default()).unwrap();
    let b = extract_recording(&synthetic_voice(0.5), &ExtractConfig::default()).unwrap();
    let close =
        |p: f64, q: f64| (p - q).abs() <= 1e-6 * p.abs().max(1e-9) || (p.is_nan() && q.is_nan());
    for spec in REGISTRY.iter().filter(|s| !s.cross_vowel) {
        let same = match spec.kind {
            FeatureKind::Scalar => close(a.scalars[spec.name], b.scalars[spec.name]),
            FeatureKind::Contour => {
                let (p, q) = (&a.contours[spec.name], &b.contours[spec.name]);
                p.len() == q.len() && p.iter().zip(q).all(|(x, y)| close(*x, *y))
            }
        };
        assert_eq!(same, spec.scale_invariant, "{}", spec.name);
    }
}
