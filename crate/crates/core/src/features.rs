//! Canonical feature registry and per-recording extraction.

use std::collections::BTreeMap;

use log::debug;
use serde::Serialize;

use crate::articulation::{default_lpc_order, estimate_formants, FormantTrack};
use crate::audio::{default_frames, resample, FrameSequence, Recording, ANALYSIS_FS};
use crate::bispectrum::{
    bicepstral_block, bicepstral_distances, bicepstral_features, bispectral_features,
    estimate_bispectrum, BicepstralFeatures, BispectralFeatures,
};
use crate::dsp;
use crate::emd::{emd, imf_features, zero_crossing_frequency};
use crate::error::Result;
use crate::nonlinear::{
    complexity_features, entropy_features, fmmi, permutation_entropy, Embedding,
    EMBEDDING_DIMENSION, HISTOGRAM_BINS, PE_ORDER,
};
use crate::phonation::{
    energy_features, glottal_quotient_stds, jitter_features, ppe, shimmer_features,
};
use crate::pitch::{detect_cycles, estimate_f0_with, F0Contour, PitchConfig};
use crate::quality::{
    cepstral_quality, modulation_measures, noise_measures, spectral_quality, temporal_quality,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Scalar,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FeatureSpec {
    pub name: &'static str,
    pub group: u8,
    pub kind: FeatureKind,
    pub scale_invariant: bool,
    pub cross_vowel: bool,
    pub definition_version: u32,
    /// Computed by an approximation of the named measure.
    pub approximated: bool,
    /// Definition reconstructed from indirect sources; may be revised.
    pub provisional: bool,
    /// Depends on analysis parameters the literature leaves open.
    pub configurable: bool,
}

const fn spec(name: &'static str, group: u8, kind: FeatureKind) -> FeatureSpec {
    FeatureSpec {
        name,
        group,
        kind,
        scale_invariant: true,
        cross_vowel: false,
        definition_version: 1,
        approximated: false,
        provisional: false,
        configurable: false,
    }
}

const fn s(name: &'static str, group: u8) -> FeatureSpec {
    spec(name, group, FeatureKind::Scalar)
}

const fn c(name: &'static str, group: u8) -> FeatureSpec {
    spec(name, group, FeatureKind::Contour)
}

impl FeatureSpec {
    const fn energy(mut self) -> Self {
        self.scale_invariant = false;
        self
    }

    const fn cross(mut self) -> Self {
        self.cross_vowel = true;
        self
    }

    const fn approx(mut self) -> Self {
        self.approximated = true;
        self
    }

    const fn provisional(mut self) -> Self {
        self.provisional = true;
        self
    }

    const fn tunable(mut self) -> Self {
        self.configurable = true;
        self
    }

    /// Matrix column names this feature expands to.
    pub fn columns(&self) -> Vec<String> {
        match self.kind {
            FeatureKind::Scalar => vec![self.name.to_string()],
            FeatureKind::Contour => STATISTICS
                .iter()
                .map(|st| format!("{}_{st}", self.name))
                .collect(),
        }
    }
}

/// Summary statistics applied to every contour, in column order.
pub const STATISTICS: [&str; 5] = ["median", "std", "p1", "p99", "ir"];

pub static REGISTRY: &[FeatureSpec] = &[
    // Phonation.
    s("jitter_local", 1),
    s("jitter_abs", 1),
    s("jitter_rap", 1),
    s("jitter_ppq5", 1),
    s("jitter_ddp", 1),
    s("shimmer_local", 1),
    s("shimmer_db", 1),
    s("shimmer_apq3", 1),
    s("shimmer_apq5", 1),
    s("shimmer_apq11", 1),
    s("shimmer_dda", 1),
    s("ppe", 1).tunable(),
    s("gq_open_std", 1).approx(),
    s("gq_closed_std", 1).approx(),
    s("me_4hz", 1),
    s("mpsd", 1).energy(),
    s("lster", 1),
    c("e", 1).energy(),
    c("tkeo", 1).energy(),
    c("f0", 1),
    c("period", 1),
    c("amplitude", 1).energy(),
    c("open_quotient", 1).approx(),
    c("voicing_strength", 1),
    // Articulation.
    c("f1", 2),
    c("f2", 2),
    c("f3", 2),
    c("bw1", 2),
    c("bw2", 2),
    c("bw3", 2),
    s("vsa", 2).cross(),
    s("ln_vsa", 2).cross(),
    s("fcr", 2).cross(),
    s("vai", 2).cross(),
    s("f2i_f2u", 2).cross(),
    // Voice quality.
    s("hzcrr", 3),
    s("fluf", 3),
    s("sdbm", 3),
    s("sdbp", 3),
    s("cpp", 3),
    s("pecm", 3),
    s("vr", 3),
    s("hnr", 3),
    s("nhr", 3),
    s("nne", 3),
    s("gne", 3),
    s("spi", 3),
    s("vti", 3),
    s("ssd", 3),
    s("mser", 3),
    s("mfp", 3),
    s("rphm", 3),
    s("icer", 3).provisional(),
    s("rphic", 3).provisional(),
    c("zcr", 3),
    c("sf", 3),
    c("sdbm_frame", 3),
    c("sdbp_frame", 3),
    c("cpp_frame", 3),
    c("hnr_frame", 3),
    c("nhr_frame", 3),
    c("nne_frame", 3),
    c("gne_frame", 3),
    c("spi_frame", 3),
    c("vti_frame", 3),
    c("ssd_frame", 3),
    // Bispectrum and bicepstrum.
    s("bis_bii", 4).tunable(),
    s("bis_hfeb", 4).tunable(),
    s("bis_lfeb", 4).tunable(),
    s("bis_bmii", 4).tunable(),
    s("bis_bpii", 4).tunable(),
    s("bis_lsber", 4).tunable(),
    s("bis_hsber", 4).tunable(),
    s("bic_bcii", 4).tunable(),
    s("bic_hfebc", 4).tunable(),
    s("bic_lfebc", 4).tunable(),
    s("bic_cmii", 4).tunable(),
    s("bic_bcpii", 4).tunable(),
    s("bic_lcbcer", 4).tunable(),
    s("bic_hcbcer", 4).tunable(),
    s("bic_bcmd", 4).tunable(),
    s("bic_bcpd", 4).tunable(),
    c("bis_bii_block", 4).tunable(),
    c("bis_hfeb_block", 4).tunable(),
    c("bis_lfeb_block", 4).tunable(),
    c("bis_bmii_block", 4).tunable(),
    c("bis_bpii_block", 4).tunable(),
    c("bis_lsber_block", 4).tunable(),
    c("bis_hsber_block", 4).tunable(),
    c("bic_bcii_block", 4).tunable(),
    c("bic_hfebc_block", 4).tunable(),
    c("bic_lfebc_block", 4).tunable(),
    c("bic_cmii_block", 4).tunable(),
    c("bic_bcpii_block", 4).tunable(),
    c("bic_lcbcer_block", 4).tunable(),
    c("bic_hcbcer_block", 4).tunable(),
    c("bic_bcmd_pair", 4).tunable(),
    c("bic_bcpd_pair", 4).tunable(),
    // Empirical mode decomposition.
    s("imf_snr_tkeo", 5).tunable(),
    s("imf_snr_seo", 5).tunable(),
    s("imf_snr_se", 5).tunable(),
    s("imf_snr_re", 5).tunable(),
    s("imf_snr_zcr", 5).tunable(),
    s("imf_nsr_tkeo", 5).tunable(),
    s("imf_nsr_seo", 5).tunable(),
    s("imf_nsr_se", 5).tunable(),
    s("imf_nsr_re", 5).tunable(),
    s("imf_fd", 5).tunable(),
    s("imf_cpp", 5).tunable(),
    s("imf_gne", 5).tunable(),
    c("imf_energy_share", 5).tunable(),
    c("imf_freq", 5).tunable(),
    // Nonlinear dynamics.
    s("cd", 6),
    s("fd", 6),
    s("zl", 6),
    s("he", 6),
    s("lle", 6),
    s("she", 6),
    s("re", 6),
    s("ce", 6),
    s("rbe1", 6).provisional(),
    s("rbe2", 6).provisional(),
    s("ae", 6),
    s("se_k1", 6).provisional(),
    s("se_k2", 6).provisional(),
    s("se_k3", 6).provisional(),
    s("se_k4", 6).provisional(),
    s("se_k5", 6).provisional(),
    s("se_k6", 6).provisional(),
    s("se_k7", 6).provisional(),
    s("se_k8", 6).provisional(),
    s("pe", 6),
    s("fmmi", 6),
    c("she_frame", 6),
    c("pe_frame", 6),
];

pub fn registry() -> &'static [FeatureSpec] {
    REGISTRY
}

pub fn lookup(name: &str) -> Option<(usize, &'static FeatureSpec)> {
    REGISTRY.iter().enumerate().find(|(_, f)| f.name == name)
}

/// Per-vowel matrix columns in registry order.
pub fn column_names() -> Vec<String> {
    REGISTRY.iter().flat_map(FeatureSpec::columns).collect()
}

pub fn per_vowel_width() -> usize {
    REGISTRY
        .iter()
        .map(|f| match f.kind {
            FeatureKind::Scalar => 1,
            FeatureKind::Contour => STATISTICS.len(),
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractConfig {
    pub pitch: PitchConfig,
    pub emd_max_imfs: usize,
    /// Largest delay searched for the embedding, in samples.
    pub mi_max_lag: usize,
    pub embedding_dimension: usize,
    pub peak_normalize: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            pitch: PitchConfig::default(),
            emd_max_imfs: 10,
            mi_max_lag: 100,
            embedding_dimension: EMBEDDING_DIMENSION,
            peak_normalize: false,
        }
    }
}

/// Raw extractor outputs of one recording keyed by registry name. Features
/// whose extractor failed are absent and listed in `failures`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordingFeatures {
    pub scalars: BTreeMap<&'static str, f64>,
    pub contours: BTreeMap<&'static str, Vec<f64>>,
    /// Extraction stage and error message for each failed stage.
    pub failures: Vec<(&'static str, String)>,
}

impl RecordingFeatures {
    fn scalar(&mut self, name: &'static str, v: f64) {
        debug_assert!(
            matches!(lookup(name), Some((_, f)) if f.kind == FeatureKind::Scalar),
            "{name}"
        );
        self.scalars.insert(name, v);
    }

    fn contour(&mut self, name: &'static str, v: Vec<f64>) {
        debug_assert!(
            matches!(lookup(name), Some((_, f)) if f.kind == FeatureKind::Contour),
            "{name}"
        );
        self.contours.insert(name, v);
    }

    fn fail(&mut self, stage: &'static str, err: impl std::fmt::Display) {
        debug!("{stage} failed: {err}");
        self.failures.push((stage, err.to_string()));
    }

    /// Median F1 and F2 over retained frames, used for cross-vowel indices.
    pub fn formant_medians(&self) -> Option<(f64, f64)> {
        let med = |name| {
            self.contours
                .get(name)
                .filter(|v: &&Vec<f64>| !v.is_empty())
                .map(|v| dsp::median(v))
        };
        Some((med("f1")?, med("f2")?))
    }
}

fn finite(v: &[f64]) -> Vec<f64> {
    v.iter().copied().filter(|x| x.is_finite()).collect()
}

/// Frames whose centre falls in a voiced pitch frame; all frames when none do.
fn voiced_frames(frames: &FrameSequence, contour: &F0Contour) -> FrameSequence {
    let kept: Vec<Vec<f64>> = frames
        .frames
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            contour
                .nearest_frame(frames.center_time(*i))
                .is_some_and(|k| contour.voicing[k])
        })
        .map(|(_, f)| f.clone())
        .collect();
    if kept.is_empty() {
        return frames.clone();
    }
    FrameSequence {
        frames: kept,
        ..frames.clone()
    }
}

fn formant_contours(out: &mut RecordingFeatures, track: &FormantTrack) {
    out.contour("f1", finite(&track.f1));
    out.contour("f2", finite(&track.f2));
    out.contour("f3", finite(&track.f3));
    out.contour("bw1", finite(&track.bw1));
    out.contour("bw2", finite(&track.bw2));
    out.contour("bw3", finite(&track.bw3));
}

/// Runs every extractor on one recording (resampled to the analysis rate).
/// Individual stage failures leave their features missing.
pub fn extract_recording(rec: &Recording, config: &ExtractConfig) -> Result<RecordingFeatures> {
    let mut rec = if rec.fs == ANALYSIS_FS {
        rec.clone()
    } else {
        resample(rec, ANALYSIS_FS)?
    };
    if config.peak_normalize {
        rec = rec.peak_normalized();
    }
    let rec = &rec;
    let frames = default_frames(rec)?;
    let contour = estimate_f0_with(rec, &config.pitch);
    let mut out = RecordingFeatures::default();

    phonation(&mut out, rec, &frames, &contour);

    let voiced = voiced_frames(&frames, &contour);
    match estimate_formants(&voiced, rec.fs as f64, default_lpc_order(rec.fs)) {
        Ok(track) => formant_contours(&mut out, &track),
        Err(e) => out.fail("formants", e),
    }

    quality(&mut out, rec, &frames, &contour);
    higher_order(&mut out, rec, &frames, &contour, config);
    nonlinear(&mut out, rec, &frames, config);
    Ok(out)
}

fn phonation(
    out: &mut RecordingFeatures,
    rec: &Recording,
    frames: &FrameSequence,
    contour: &F0Contour,
) {
    out.contour("f0", contour.voiced_f0());
    out.contour(
        "voicing_strength",
        contour
            .strength
            .iter()
            .zip(&contour.voicing)
            .filter(|(_, v)| **v)
            .map(|(s, _)| *s)
            .collect(),
    );
    match detect_cycles(rec, contour) {
        Ok(cycles) => {
            out.contour("period", cycles.periods.clone());
            out.contour("amplitude", cycles.peak_amplitudes.clone());
            out.contour("open_quotient", cycles.open_fractions.clone());
            match jitter_features(&cycles) {
                Ok(j) => {
                    out.scalar("jitter_local", j.local);
                    out.scalar("jitter_abs", j.abs);
                    out.scalar("jitter_rap", j.rap);
                    out.scalar("jitter_ppq5", j.ppq5);
                    out.scalar("jitter_ddp", j.ddp);
                }
                Err(e) => out.fail("jitter", e),
            }
            match shimmer_features(&cycles) {
                Ok(sh) => {
                    out.scalar("shimmer_local", sh.local);
                    out.scalar("shimmer_db", sh.db);
                    out.scalar("shimmer_apq3", sh.apq3);
                    out.scalar("shimmer_apq5", sh.apq5);
                    out.scalar("shimmer_apq11", sh.apq11);
                    out.scalar("shimmer_dda", sh.dda);
                }
                Err(e) => out.fail("shimmer", e),
            }
            match glottal_quotient_stds(&cycles) {
                Ok((open, closed)) => {
                    out.scalar("gq_open_std", open);
                    out.scalar("gq_closed_std", closed);
                }
                Err(e) => out.fail("glottal_quotient", e),
            }
        }
        Err(e) => out.fail("cycles", e),
    }
    let voiced = contour.voiced_f0();
    let reference = if voiced.is_empty() {
        1.0
    } else {
        dsp::median(&voiced)
    };
    match ppe(contour, reference) {
        Ok(v) => out.scalar("ppe", v),
        Err(e) => out.fail("ppe", e),
    }
    match energy_features(frames, rec) {
        Ok(en) => {
            out.scalar("me_4hz", en.me_4hz);
            out.scalar("mpsd", en.mpsd);
            out.scalar("lster", en.lster);
            out.contour("e", en.e);
            out.contour("tkeo", en.tkeo);
        }
        Err(e) => out.fail("energy", e),
    }
}

fn quality(
    out: &mut RecordingFeatures,
    rec: &Recording,
    frames: &FrameSequence,
    contour: &F0Contour,
) {
    let t = temporal_quality(frames, contour);
    out.scalar("hzcrr", t.hzcrr);
    out.scalar("fluf", t.fluf);
    out.contour("zcr", t.zcr);
    match spectral_quality(frames) {
        Ok(sq) => {
            out.scalar("sdbm", sq.sdbm);
            out.scalar("sdbp", sq.sdbp);
            out.contour("sf", sq.sf);
            out.contour("sdbm_frame", sq.sdbm_frame);
            out.contour("sdbp_frame", sq.sdbp_frame);
        }
        Err(e) => out.fail("spectral", e),
    }
    match cepstral_quality(frames, contour) {
        Ok(cq) => {
            out.scalar("cpp", cq.cpp);
            out.scalar("pecm", cq.pecm);
            out.scalar("vr", cq.vr);
            out.contour("cpp_frame", cq.cpp_frame);
        }
        Err(e) => out.fail("cepstral", e),
    }
    match noise_measures(rec, contour) {
        Ok(n) => {
            out.scalar("hnr", n.hnr);
            out.scalar("nhr", n.nhr);
            out.scalar("nne", n.nne);
            out.scalar("gne", n.gne);
            out.scalar("spi", n.spi);
            out.scalar("vti", n.vti);
            out.scalar("ssd", n.ssd);
            out.contour("hnr_frame", n.hnr_frame);
            out.contour("nhr_frame", n.nhr_frame);
            out.contour("nne_frame", n.nne_frame);
            out.contour("gne_frame", n.gne_frame);
            out.contour("spi_frame", n.spi_frame);
            out.contour("vti_frame", n.vti_frame);
            out.contour("ssd_frame", n.ssd_frame);
        }
        Err(e) => out.fail("noise", e),
    }
    match modulation_measures(rec) {
        Ok(m) => {
            out.scalar("mser", m.mser);
            out.scalar("mfp", m.mfp);
            out.scalar("rphm", m.rphm);
            out.scalar("icer", m.icer);
            out.scalar("rphic", m.rphic);
        }
        Err(e) => out.fail("modulation", e),
    }
}

fn higher_order(
    out: &mut RecordingFeatures,
    rec: &Recording,
    frames: &FrameSequence,
    contour: &F0Contour,
    config: &ExtractConfig,
) {
    match estimate_bispectrum(frames) {
        Ok(est) => {
            let b = bispectral_features(&est.total, &est.total.spectrum);
            out.scalar("bis_bii", b.bii);
            out.scalar("bis_hfeb", b.hfeb);
            out.scalar("bis_lfeb", b.lfeb);
            out.scalar("bis_bmii", b.bmii);
            out.scalar("bis_bpii", b.bpii);
            out.scalar("bis_lsber", b.lsber);
            out.scalar("bis_hsber", b.hsber);
            let bc = bicepstral_features(&est);
            out.scalar("bic_bcii", bc.bcii);
            out.scalar("bic_hfebc", bc.hfebc);
            out.scalar("bic_lfebc", bc.lfebc);
            out.scalar("bic_cmii", bc.cmii);
            out.scalar("bic_bcpii", bc.bcpii);
            out.scalar("bic_lcbcer", bc.lcbcer);
            out.scalar("bic_hcbcer", bc.hcbcer);
            out.scalar("bic_bcmd", bc.bcmd);
            out.scalar("bic_bcpd", bc.bcpd);
            let blocks: Vec<_> = est
                .blocks
                .iter()
                .map(|blk| {
                    (
                        bispectral_features(blk, &blk.spectrum),
                        bicepstral_block(blk, est.size),
                    )
                })
                .collect();
            type Pair = (BispectralFeatures, BicepstralFeatures);
            let col = |f: fn(&Pair) -> f64| blocks.iter().map(f).collect::<Vec<f64>>();
            out.contour("bis_bii_block", col(|b| b.0.bii));
            out.contour("bis_hfeb_block", col(|b| b.0.hfeb));
            out.contour("bis_lfeb_block", col(|b| b.0.lfeb));
            out.contour("bis_bmii_block", col(|b| b.0.bmii));
            out.contour("bis_bpii_block", col(|b| b.0.bpii));
            out.contour("bis_lsber_block", col(|b| b.0.lsber));
            out.contour("bis_hsber_block", col(|b| b.0.hsber));
            out.contour("bic_bcii_block", col(|b| b.1.bcii));
            out.contour("bic_hfebc_block", col(|b| b.1.hfebc));
            out.contour("bic_lfebc_block", col(|b| b.1.lfebc));
            out.contour("bic_cmii_block", col(|b| b.1.cmii));
            out.contour("bic_bcpii_block", col(|b| b.1.bcpii));
            out.contour("bic_lcbcer_block", col(|b| b.1.lcbcer));
            out.contour("bic_hcbcer_block", col(|b| b.1.hcbcer));
            let (md, pd) = bicepstral_distances(&est);
            out.contour("bic_bcmd_pair", md);
            out.contour("bic_bcpd_pair", pd);
        }
        Err(e) => out.fail("bispectrum", e),
    }
    match emd(rec, config.emd_max_imfs) {
        Ok(set) => {
            let total: f64 = set.imfs.iter().map(|m| dsp::energy(m)).sum();
            out.contour(
                "imf_energy_share",
                set.imfs
                    .iter()
                    .map(|m| {
                        if total > 0.0 {
                            dsp::energy(m) / total
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
            out.contour(
                "imf_freq",
                set.imfs
                    .iter()
                    .map(|m| zero_crossing_frequency(m, rec.fs))
                    .collect(),
            );
            match imf_features(&set, rec.fs, contour) {
                Ok(f) => {
                    out.scalar("imf_snr_tkeo", f.snr_tkeo);
                    out.scalar("imf_snr_seo", f.snr_seo);
                    out.scalar("imf_snr_se", f.snr_se);
                    out.scalar("imf_snr_re", f.snr_re);
                    out.scalar("imf_snr_zcr", f.snr_zcr);
                    out.scalar("imf_nsr_tkeo", f.nsr_tkeo);
                    out.scalar("imf_nsr_seo", f.nsr_seo);
                    out.scalar("imf_nsr_se", f.nsr_se);
                    out.scalar("imf_nsr_re", f.nsr_re);
                    out.scalar("imf_fd", f.fd);
                    if let Some(cpp) = f.cpp {
                        out.scalar("imf_cpp", cpp);
                    }
                    out.scalar("imf_gne", f.gne);
                }
                Err(e) => out.fail("imf_features", e),
            }
        }
        Err(e) => out.fail("emd", e),
    }
}

const SE_NAMES: [&str; 8] = [
    "se_k1", "se_k2", "se_k3", "se_k4", "se_k5", "se_k6", "se_k7", "se_k8",
];

fn nonlinear(
    out: &mut RecordingFeatures,
    rec: &Recording,
    frames: &FrameSequence,
    config: &ExtractConfig,
) {
    out.contour(
        "she_frame",
        frames
            .frames
            .iter()
            .map(|f| dsp::shannon_entropy_counts(&dsp::histogram(f, HISTOGRAM_BINS)))
            .collect(),
    );
    out.contour(
        "pe_frame",
        frames
            .frames
            .iter()
            .map(|f| permutation_entropy(f, PE_ORDER))
            .collect(),
    );
    let tau = fmmi(&rec.samples, config.mi_max_lag);
    out.scalar("fmmi", tau as f64);
    let emb = match Embedding::new(&rec.samples, config.embedding_dimension, tau) {
        Ok(e) => e,
        Err(e) => {
            out.fail("embedding", e);
            return;
        }
    };
    match complexity_features(&emb, rec) {
        Ok(cf) => {
            out.scalar("cd", cf.cd);
            out.scalar("fd", cf.fd);
            out.scalar("zl", cf.zl);
            out.scalar("he", cf.he);
            out.scalar("lle", cf.lle);
        }
        Err(e) => out.fail("complexity", e),
    }
    match entropy_features(rec, &emb) {
        Ok(ef) => {
            out.scalar("she", ef.she);
            out.scalar("re", ef.re);
            out.scalar("ce", ef.ce);
            out.scalar("rbe1", ef.rbe1);
            out.scalar("rbe2", ef.rbe2);
            out.scalar("ae", ef.ae);
            for (name, v) in SE_NAMES.iter().zip(ef.se) {
                out.scalar(name, v);
            }
            out.scalar("pe", ef.pe);
        }
        Err(e) => out.fail("entropy", e),
    }
}
