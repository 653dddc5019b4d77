//! Synthetic cohort with known voice perturbations and clinical scores.
//!
//! Every subject gets a severity in [0, 1]. Jitter, shimmer and noise grow
//! with it and every clinical score is a monotone function of it, so the
//! scores are monotone in the injected jitter. When both groups are present
//! HC severities lie in [0, 0.35] and PD severities in [0.65, 1].

use std::collections::BTreeMap;
use std::path::PathBuf;

use pdvoice_core::audio::write_wav_i16;
use pdvoice_core::cohort::SubjectRow;
use pdvoice_core::synth::{self, VoiceParams};
use pdvoice_core::{ClinicalScale, CohortManifest, Group, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const FS: u32 = 16_000;

/// Injected parameters of one synthetic subject.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSubject {
    pub subject_id: String,
    pub group: Group,
    pub severity: f64,
    pub jitter: f64,
    pub shimmer: f64,
    pub snr_db: f64,
    pub f0: f64,
    pub formant_scale: f64,
}

pub fn jitter_for(severity: f64) -> f64 {
    0.002 + 0.028 * severity
}

pub fn shimmer_for(severity: f64) -> f64 {
    0.02 + 0.10 * severity
}

pub fn snr_for(severity: f64) -> f64 {
    35.0 - 20.0 * severity
}

/// Clinical score of a subject with the given severity, rounded to 0.01.
pub fn score_for(scale: ClinicalScale, severity: f64) -> f64 {
    let v = match (scale, scale.theoretical_max()) {
        (ClinicalScale::Mmse | ClinicalScale::Acer, Some(max)) => max * (0.95 - 0.35 * severity),
        (_, Some(max)) => max * (0.1 + 0.8 * severity),
        (ClinicalScale::Duration, None) => 1.0 + 14.0 * severity,
        (_, None) => 100.0 + 1400.0 * severity,
    };
    (v * 100.0).round() / 100.0
}

fn task_gain(task: Task) -> f64 {
    match task {
        Task::S | Task::L => 1.0,
        Task::Ll => 1.6,
        Task::Ls => 0.3,
    }
}

fn task_secs(task: Task, secs: f64) -> f64 {
    match task {
        Task::S => secs,
        _ => secs * 1.5,
    }
}

fn severities(n: usize, band: (f64, f64)) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if n == 1 {
                (band.0 + band.1) / 2.0
            } else {
                band.0 + (band.1 - band.0) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Draws the cohort without writing audio.
pub fn plan_cohort(config: &RunConfig) -> Vec<SyntheticSubject> {
    let n = config.synth.subjects;
    let n_pd = (n as f64 * config.synth.pd_fraction).round() as usize;
    let n_hc = n - n_pd;
    let (hc_band, pd_band) = if n_pd > 0 && n_hc > 0 {
        ((0.0, 0.35), (0.65, 1.0))
    } else {
        ((0.0, 1.0), (0.0, 1.0))
    };
    let groups = std::iter::repeat_n(Group::Hc, n_hc).chain(std::iter::repeat_n(Group::Pd, n_pd));
    let sev = severities(n_hc, hc_band)
        .into_iter()
        .chain(severities(n_pd, pd_band));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    groups
        .zip(sev)
        .enumerate()
        .map(|(i, (group, s))| SyntheticSubject {
            subject_id: format!("S{:03}", i + 1),
            group,
            severity: s,
            jitter: jitter_for(s),
            shimmer: shimmer_for(s),
            snr_db: snr_for(s),
            f0: rng.random_range(100.0..180.0),
            formant_scale: rng.random_range(0.95..1.05),
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthSummary {
    pub subjects: Vec<SyntheticSubject>,
    pub recordings: usize,
    pub manifest: PathBuf,
}

/// Writes `audio/*.wav`, `manifest.csv` and `synth_truth.json` under the
/// output directory.
pub fn cmd_synth(config: &RunConfig) -> Result<SynthSummary> {
    config.validate()?;
    if config.synth.subjects == 0 {
        return Err(CliError::Config("subjects must be positive".into()));
    }
    let audio = config.out.join("audio");
    std::fs::create_dir_all(&audio)?;
    let subjects = plan_cohort(config);
    let mut rows = Vec::with_capacity(subjects.len());
    let mut recordings = 0;
    for (i, s) in subjects.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(
            config
                .seed
                .wrapping_add(1 + i as u64)
                .wrapping_mul(0x9E37_79B9),
        );
        let mut paths = BTreeMap::new();
        for &task in &config.synth.tasks {
            for &vowel in &config.synth.vowels {
                let formants: Vec<(f64, f64)> = synth::vowel_formants(vowel)
                    .iter()
                    .map(|&(f, bw)| (f * s.formant_scale, bw))
                    .collect();
                let params = VoiceParams {
                    f0: s.f0,
                    jitter: s.jitter,
                    shimmer: s.shimmer,
                    formants,
                    snr_db: Some(s.snr_db),
                    secs: task_secs(task, config.synth.secs),
                    fs: FS,
                };
                let gain = task_gain(task);
                let x: Vec<f64> = synth::voice(&params, &mut rng)
                    .iter()
                    .map(|v| v * gain)
                    .collect();
                let rel =
                    PathBuf::from("audio").join(format!("{}_{vowel}_{task}.wav", s.subject_id));
                write_wav_i16(config.out.join(&rel), &x, FS)?;
                paths.insert((vowel, task), rel);
                recordings += 1;
            }
        }
        let scores = if s.group == Group::Pd {
            ClinicalScale::ALL
                .iter()
                .map(|&c| (c, score_for(c, s.severity)))
                .collect()
        } else {
            BTreeMap::new()
        };
        rows.push(SubjectRow {
            subject_id: s.subject_id.clone(),
            group: s.group,
            sex: Some(if i % 2 == 0 { "F" } else { "M" }.to_string()),
            age: Some(55.0 + (i % 20) as f64),
            scores,
            recordings: paths,
        });
    }
    let manifest = config.out.join("manifest.csv");
    CohortManifest { rows }.to_csv(&manifest)?;
    std::fs::write(
        config.out.join("synth_truth.json"),
        serde_json::to_string_pretty(&subjects)?,
    )?;
    log::info!(
        "synthesized {} subjects, {recordings} recordings",
        subjects.len()
    );
    Ok(SynthSummary {
        subjects,
        recordings,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_are_monotone_in_severity() {
        for scale in ClinicalScale::ALL {
            let a = score_for(scale, 0.2);
            let b = score_for(scale, 0.8);
            assert_ne!(a, b);
            assert!(scale.contains(a) && scale.contains(b));
        }
    }

    #[test]
    fn groups_are_separated() {
        let mut c = RunConfig::default();
        c.synth.subjects = 10;
        let plan = plan_cohort(&c);
        let hc_max = plan
            .iter()
            .filter(|s| s.group == Group::Hc)
            .map(|s| s.severity)
            .fold(0.0, f64::max);
        let pd_min = plan
            .iter()
            .filter(|s| s.group == Group::Pd)
            .map(|s| s.severity)
            .fold(1.0, f64::min);
        assert!(hc_max < pd_min);
        assert_eq!(plan.iter().filter(|s| s.group == Group::Pd).count(), 5);
    }
}
