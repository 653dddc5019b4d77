//! Empirical mode decomposition by cubic-spline sifting.

use serde::Serialize;

use crate::audio::{default_frames, Recording};
use crate::dsp;
use crate::error::{Error, Result};
use crate::nonlinear::{higuchi_fd, HIGUCHI_KMAX, HISTOGRAM_BINS};
use crate::pitch::F0Contour;
use crate::quality::{cepstral_quality, gne};

/// IMFs whose zero-crossing frequency exceeds this form the noise group.
pub const NOISE_IMF_MIN_HZ: f64 = 2000.0;
const RATIO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmdConfig {
    pub max_imfs: usize,
    /// Cauchy-type stop threshold on successive sifting results.
    pub sd_threshold: f64,
    pub max_sifts: usize,
}

impl Default for EmdConfig {
    fn default() -> Self {
        Self {
            max_imfs: 10,
            sd_threshold: 0.2,
            max_sifts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImfSet {
    pub imfs: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
}

impl ImfSet {
    pub fn len(&self) -> usize {
        self.imfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.imfs.is_empty()
    }
}

pub fn emd(rec: &Recording, max_imfs: usize) -> Result<ImfSet> {
    emd_samples(
        &rec.samples,
        &EmdConfig {
            max_imfs,
            ..EmdConfig::default()
        },
    )
}

/// Sifting stops once SD drops below the threshold with extrema and zero
/// crossings differing by at most one, or after `max_sifts` rounds.
/// Decomposition stops when the residual has fewer than three extrema.
pub fn emd_samples(x: &[f64], config: &EmdConfig) -> Result<ImfSet> {
    let (maxima, minima) = extrema(x);
    if maxima.len() + minima.len() < 4 {
        return Err(Error::NoOscillation);
    }
    let mut imfs: Vec<Vec<f64>> = Vec::new();
    let mut r = x.to_vec();
    while imfs.len() < config.max_imfs {
        let (mx, mn) = extrema(&r);
        if mx.len() + mn.len() < 3 || mx.len() < 2 || mn.len() < 2 {
            break;
        }
        let imf = sift(&r, config);
        for (a, b) in r.iter_mut().zip(&imf) {
            *a -= b;
        }
        imfs.push(imf);
    }
    let mut residual = x.to_vec();
    for imf in &imfs {
        for (a, b) in residual.iter_mut().zip(imf) {
            *a -= b;
        }
    }
    Ok(ImfSet { imfs, residual })
}

fn sift(x: &[f64], config: &EmdConfig) -> Vec<f64> {
    let mut h = x.to_vec();
    for _ in 0..config.max_sifts {
        let Some(mean) = envelope_mean(&h) else {
            break;
        };
        let next: Vec<f64> = h.iter().zip(&mean).map(|(a, m)| a - m).collect();
        let num: f64 = h.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = h.iter().map(|a| a * a).sum();
        h = next;
        let sd = if den > 0.0 { num / den } else { 0.0 };
        let (mx, mn) = extrema(&h);
        let zc = crate::dsp::zero_crossings(&h);
        if sd < config.sd_threshold && (mx.len() + mn.len()).abs_diff(zc) <= 1 {
            break;
        }
    }
    h
}

/// Indices of strict local maxima and minima; plateaus count once at their
/// first sample.
pub fn extrema(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    if x.len() < 3 {
        return (maxima, minima);
    }
    let mut i = 1;
    while i < x.len() - 1 {
        let mut j = i;
        while j < x.len() - 1 && x[j + 1] == x[i] {
            j += 1;
        }
        if j >= x.len() - 1 {
            break;
        }
        if x[i] > x[i - 1] && x[i] > x[j + 1] {
            maxima.push(i);
        } else if x[i] < x[i - 1] && x[i] < x[j + 1] {
            minima.push(i);
        }
        i = j + 1;
    }
    (maxima, minima)
}

/// Mean of the upper and lower cubic-spline envelopes, with the two
/// outermost extrema on each side mirrored about the signal ends.
fn envelope_mean(x: &[f64]) -> Option<Vec<f64>> {
    let (mx, mn) = extrema(x);
    if mx.len() < 2 || mn.len() < 2 {
        return None;
    }
    let upper = envelope(x, &mx)?;
    let lower = envelope(x, &mn)?;
    Some(
        upper
            .iter()
            .zip(&lower)
            .map(|(a, b)| 0.5 * (a + b))
            .collect(),
    )
}

fn envelope(x: &[f64], idx: &[usize]) -> Option<Vec<f64>> {
    let n = x.len();
    let last = (n - 1) as f64;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(idx.len() + 4);
    for &i in idx.iter().take(2).rev() {
        pts.push((-(i as f64), x[i]));
    }
    pts.extend(idx.iter().map(|&i| (i as f64, x[i])));
    for &i in idx.iter().rev().take(2) {
        pts.push((2.0 * last - i as f64, x[i]));
    }
    pts.dedup_by(|a, b| a.0 == b.0);
    let spline = NaturalSpline::new(&pts)?;
    Some((0..n).map(|t| spline.eval(t as f64)).collect())
}

/// Natural cubic spline through strictly increasing knots.
pub struct NaturalSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(points: &[(f64, f64)]) -> Option<Self> {
        let n = points.len();
        if n < 2 || points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return None;
        }
        let t: Vec<f64> = points.iter().map(|p| p.0).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the second derivatives.
            let k = n - 2;
            let mut a = vec![0.0; k];
            let mut b = vec![0.0; k];
            let mut c = vec![0.0; k];
            let mut d = vec![0.0; k];
            for i in 0..k {
                let h0 = t[i + 1] - t[i];
                let h1 = t[i + 2] - t[i + 1];
                a[i] = h0;
                b[i] = 2.0 * (h0 + h1);
                c[i] = h1;
                d[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let w = a[i] / b[i - 1];
                b[i] -= w * c[i - 1];
                d[i] -= w * d[i - 1];
            }
            let mut sol = vec![0.0; k];
            sol[k - 1] = d[k - 1] / b[k - 1];
            for i in (0..k - 1).rev() {
                sol[i] = (d[i] - c[i] * sol[i + 1]) / b[i];
            }
            m[1..n - 1].copy_from_slice(&sol);
        }
        Some(Self { t, y, m })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let i = match self.t.partition_point(|&v| v <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

/// Mean frequency of an oscillation from its zero-crossing count.
pub fn zero_crossing_frequency(x: &[f64], fs: u32) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    dsp::zero_crossings(x) as f64 * fs as f64 / (2.0 * x.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImfFeatures {
    pub snr_tkeo: f64,
    pub snr_seo: f64,
    pub snr_se: f64,
    pub snr_re: f64,
    pub snr_zcr: f64,
    pub nsr_tkeo: f64,
    pub nsr_seo: f64,
    pub nsr_se: f64,
    pub nsr_re: f64,
    pub fd: f64,
    /// `None` when IMF1 has no voiced frame.
    pub cpp: Option<f64>,
    pub gne: f64,
}

fn group_sum(imfs: &[&Vec<f64>], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for imf in imfs {
        for (o, v) in out.iter_mut().zip(imf.iter()) {
            *o += v;
        }
    }
    out
}

fn ratio(signal: f64, noise: f64) -> (f64, f64) {
    let s = signal.max(RATIO_FLOOR);
    let n = noise.max(RATIO_FLOOR);
    (s / n, n / s)
}

/// Signal-to-noise functionals between the high-frequency (noise) and
/// remaining (signal) IMF groups, plus fractal dimension, CPP and GNE of
/// IMF1. An empty group contributes zero, floored at 1e-12 in the ratios.
pub fn imf_features(set: &ImfSet, fs: u32, contour: &F0Contour) -> Result<ImfFeatures> {
    if set.len() < 2 {
        return Err(Error::Degenerate(format!(
            "{} IMFs, need at least 2",
            set.len()
        )));
    }
    let n = set.imfs[0].len();
    let (noise, signal): (Vec<&Vec<f64>>, Vec<&Vec<f64>>) = set
        .imfs
        .iter()
        .partition(|imf| zero_crossing_frequency(imf, fs) > NOISE_IMF_MIN_HZ);
    let noise = group_sum(&noise, n);
    let signal = group_sum(&signal, n);
    let tkeo = |x: &[f64]| dsp::mean(&dsp::tkeo(x)).abs();
    let seo = |x: &[f64]| dsp::energy(x) / n as f64;
    let active = |x: &[f64]| x.iter().any(|v| *v != 0.0);
    let she = |x: &[f64]| {
        if active(x) {
            dsp::shannon_entropy_counts(&dsp::histogram(x, HISTOGRAM_BINS))
        } else {
            0.0
        }
    };
    let re = |x: &[f64]| {
        if active(x) {
            dsp::renyi2_entropy_counts(&dsp::histogram(x, HISTOGRAM_BINS))
        } else {
            0.0
        }
    };
    let (snr_tkeo, nsr_tkeo) = ratio(tkeo(&signal), tkeo(&noise));
    let (snr_seo, nsr_seo) = ratio(seo(&signal), seo(&noise));
    let (snr_se, nsr_se) = ratio(she(&signal), she(&noise));
    let (snr_re, nsr_re) = ratio(re(&signal), re(&noise));
    let (snr_zcr, _) = ratio(
        zero_crossing_frequency(&signal, fs),
        zero_crossing_frequency(&noise, fs),
    );
    let first = Recording::from_samples(set.imfs[0].clone(), fs);
    let cpp = default_frames(&first)
        .and_then(|frames| cepstral_quality(&frames, contour))
        .ok()
        .map(|c| c.cpp);
    Ok(ImfFeatures {
        snr_tkeo,
        snr_seo,
        snr_se,
        snr_re,
        snr_zcr,
        nsr_tkeo,
        nsr_seo,
        nsr_se,
        nsr_re,
        fd: higuchi_fd(&set.imfs[0], HIGUCHI_KMAX),
        cpp,
        gne: gne(&set.imfs[0], fs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spline_interpolates_knots_and_lines() {
        let pts = [(0.0, 1.0), (1.0, 3.0), (2.5, 6.0), (4.0, 9.0)];
        let s = NaturalSpline::new(&pts).unwrap();
        for (t, y) in pts {
            assert!((s.eval(t) - y).abs() < 1e-12);
        }
        assert!((s.eval(3.0) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn extrema_of_sine() {
        let x: Vec<f64> = (0..400)
            .map(|i| (2.0 * PI * i as f64 / 100.0).sin())
            .collect();
        let (mx, mn) = extrema(&x);
        assert_eq!(mx.len(), 4);
        assert_eq!(mn.len(), 4);
    }

    #[test]
    fn ramp_has_no_oscillation() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert!(matches!(
            emd_samples(&x, &EmdConfig::default()),
            Err(Error::NoOscillation)
        ));
    }

    #[test]
    fn prefix_stable_across_max_imfs() {
        let x: Vec<f64> = (0..2000)
            .map(|i| {
                let t = i as f64 / 1000.0;
                (2.0 * PI * 40.0 * t).sin() + 0.5 * (2.0 * PI * 7.0 * t).sin() + 0.1 * t
            })
            .collect();
        let two = emd_samples(
            &x,
            &EmdConfig {
                max_imfs: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let more = emd_samples(
            &x,
            &EmdConfig {
                max_imfs: 6,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(two.imfs[..], more.imfs[..2]);
    }
}
