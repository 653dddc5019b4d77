use std::collections::BTreeMap;

use pdvoice_core::audio::{load_recording_with, LoadOptions};
use pdvoice_core::cohort::load_manifest;
use pdvoice_core::features::{extract_recording, per_vowel_width, ExtractConfig};
use pdvoice_core::table::{build_matrix, registry_json, Extracted};
use pdvoice_core::{CohortManifest, RecordingMeta, Scope, Task, Vowel};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedRecording {
    pub subject: String,
    pub vowel: String,
    pub task: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixInfo {
    pub scope: String,
    pub file: String,
    pub rows: usize,
    pub columns: usize,
    pub missing_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionLog {
    pub recordings: usize,
    pub extracted: usize,
    pub failed: Vec<FailedRecording>,
    /// Recordings on which each extraction stage failed.
    pub stage_failures: BTreeMap<String, usize>,
    pub per_vowel_width: usize,
    pub matrices: Vec<MatrixInfo>,
}

pub fn load_cohort(config: &RunConfig) -> Result<CohortManifest> {
    let path = config.manifest_path();
    if !path.exists() {
        return Err(CliError::Config(format!(
            "manifest {} not found",
            path.display()
        )));
    }
    Ok(load_manifest(&path)?)
}

fn in_scopes(scopes: &[Scope], vowel: Vowel, task: Task) -> bool {
    scopes.is_empty()
        || scopes.iter().any(|s| match *s {
            Scope::Vowel(v, t) => v == vowel && t == task,
            Scope::All(t) => t == task,
        })
}

/// Scopes with data: a vowel scope needs one extracted recording, an
/// all-vowel scope needs every vowel of its task.
pub fn scopes_with_data(extracted: &Extracted, tasks: &[Task]) -> Vec<Scope> {
    let has = |v: Vowel, t: Task| extracted.keys().any(|(_, kv, kt)| *kv == v && *kt == t);
    Scope::every(tasks)
        .into_iter()
        .filter(|s| match *s {
            Scope::Vowel(v, t) => has(v, t),
            Scope::All(t) => Vowel::ALL.iter().all(|&v| has(v, t)),
        })
        .collect()
}

/// Extracts every manifest recording and writes one matrix per scope.
/// Unreadable or failing recordings are logged and leave their cells empty.
pub fn cmd_extract(config: &RunConfig) -> Result<ExtractionLog> {
    config.validate()?;
    let manifest = load_cohort(config)?;
    let jobs: Vec<(String, Vowel, Task, std::path::PathBuf)> = manifest
        .rows
        .iter()
        .flat_map(|r| {
            r.recordings
                .iter()
                .filter(|((v, t), _)| in_scopes(&config.scopes, *v, *t))
                .map(|((v, t), p)| (r.subject_id.clone(), *v, *t, p.clone()))
        })
        .collect();
    let extract_config = ExtractConfig {
        peak_normalize: config.peak_normalize,
        ..ExtractConfig::default()
    };
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(subject, v, t, path)| {
            let meta = RecordingMeta::new(subject.clone(), *v, *t);
            let out = load_recording_with(path, meta, LoadOptions::default())
                .and_then(|rec| extract_recording(&rec, &extract_config));
            ((subject.clone(), *v, *t), out)
        })
        .collect();

    let mut extracted = Extracted::new();
    let mut failed = Vec::new();
    let mut stage_failures: BTreeMap<String, usize> = BTreeMap::new();
    for ((subject, v, t), out) in results {
        match out {
            Ok(f) => {
                for (stage, message) in &f.failures {
                    log::warn!("{subject} {v}({t}): {stage} failed: {message}");
                    *stage_failures.entry(stage.to_string()).or_default() += 1;
                }
                extracted.insert((subject, v, t), f);
            }
            Err(e) => {
                log::warn!("{subject} {v}({t}): recording skipped: {e}");
                failed.push(FailedRecording {
                    subject,
                    vowel: v.to_string(),
                    task: t.to_string(),
                    error: e.to_string(),
                });
            }
        }
    }

    let width = per_vowel_width();
    if (300..=400).contains(&width) {
        log::info!("per-vowel feature count {width}");
    } else {
        log::warn!("per-vowel feature count {width} outside [300, 400]");
    }

    let scopes = if config.scopes.is_empty() {
        scopes_with_data(&extracted, &manifest.tasks())
    } else {
        config.scopes.clone()
    };
    let dir = config.features_dir();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("registry.json"), registry_json()?)?;
    let mut matrices = Vec::new();
    for scope in scopes {
        let m = build_matrix(&manifest, &extracted, scope);
        let path = config.matrix_path(scope);
        m.write_csv(&path)?;
        matrices.push(MatrixInfo {
            scope: scope.label(),
            file: format!("{}.csv", scope.stem()),
            rows: m.n_rows(),
            columns: m.n_cols(),
            missing_fraction: m.missing_fraction(),
        });
    }
    let log = ExtractionLog {
        recordings: jobs.len(),
        extracted: extracted.len(),
        failed,
        stage_failures,
        per_vowel_width: width,
        matrices,
    };
    std::fs::write(
        config.out.join("extraction_log.json"),
        serde_json::to_string_pretty(&log)?,
    )?;
    Ok(log)
}
