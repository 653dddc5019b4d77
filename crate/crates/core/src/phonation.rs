//! Perturbation, pitch-period entropy, glottal quotient and energy measures.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::audio::{FrameSequence, Recording};
use crate::dsp;
use crate::error::{Error, Result};
use crate::pitch::{CycleMarks, F0Contour};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JitterFeatures {
    pub local: f64,
    /// Seconds.
    pub abs: f64,
    pub rap: f64,
    pub ppq5: f64,
    pub ddp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShimmerFeatures {
    pub local: f64,
    /// Decibels.
    pub db: f64,
    pub apq3: f64,
    pub apq5: f64,
    pub apq11: f64,
    pub dda: f64,
}

/// Mean absolute deviation of each point from the centred `width`-point
/// moving average, over all points where the window fits.
fn perturbation_quotient(x: &[f64], width: usize) -> f64 {
    let half = width / 2;
    let terms: Vec<f64> = (half..x.len() - half)
        .map(|i| {
            let avg = x[i - half..=i + half].iter().sum::<f64>() / width as f64;
            (x[i] - avg).abs()
        })
        .collect();
    dsp::mean(&terms)
}

fn mean_abs_diff(x: &[f64]) -> f64 {
    let d: Vec<f64> = x.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    dsp::mean(&d)
}

pub fn jitter_from_periods(periods: &[f64]) -> Result<JitterFeatures> {
    if periods.len() < 5 {
        return Err(Error::InsufficientCycles {
            needed: 5,
            got: periods.len(),
        });
    }
    let mean_t = dsp::mean(periods);
    let abs = mean_abs_diff(periods);
    let rap = perturbation_quotient(periods, 3) / mean_t;
    Ok(JitterFeatures {
        local: abs / mean_t,
        abs,
        rap,
        ppq5: perturbation_quotient(periods, 5) / mean_t,
        ddp: 3.0 * rap,
    })
}

pub fn jitter_features(cycles: &CycleMarks) -> Result<JitterFeatures> {
    jitter_from_periods(&cycles.periods)
}

pub fn shimmer_from_amplitudes(amps: &[f64]) -> Result<ShimmerFeatures> {
    if amps.len() < 11 {
        return Err(Error::InsufficientCycles {
            needed: 11,
            got: amps.len(),
        });
    }
    if amps.iter().any(|&a| a <= 0.0) {
        return Err(Error::Degenerate("zero cycle amplitude".into()));
    }
    let mean_a = dsp::mean(amps);
    let db: Vec<f64> = amps
        .windows(2)
        .map(|w| (20.0 * (w[1] / w[0]).log10()).abs())
        .collect();
    let apq3 = perturbation_quotient(amps, 3) / mean_a;
    Ok(ShimmerFeatures {
        local: mean_abs_diff(amps) / mean_a,
        db: dsp::mean(&db),
        apq3,
        apq5: perturbation_quotient(amps, 5) / mean_a,
        apq11: perturbation_quotient(amps, 11) / mean_a,
        dda: 3.0 * apq3,
    })
}

pub fn shimmer_features(cycles: &CycleMarks) -> Result<ShimmerFeatures> {
    shimmer_from_amplitudes(&cycles.peak_amplitudes)
}

pub const PPE_BINS: usize = 30;
pub const PPE_SPAN_SEMITONES: f64 = 6.0;

/// Entropy (nats) of the whitened semitone pitch distribution.
///
/// The voiced f0 values are mapped to semitones re `reference_f0`, their mean
/// is removed, and an order-2 least-squares predictor fitted on the sequence
/// whitens them. Residuals are histogrammed in 30 bins over +/-6 semitones,
/// outliers falling into the edge bins.
pub fn ppe(contour: &F0Contour, reference_f0: f64) -> Result<f64> {
    let f0 = contour.voiced_f0();
    if f0.len() < 50 {
        return Err(Error::InsufficientVoicing(format!(
            "{} voiced frames, 50 required",
            f0.len()
        )));
    }
    if reference_f0 <= 0.0 {
        return Err(Error::InvalidParameter(
            "reference f0 must be positive".into(),
        ));
    }
    let st: Vec<f64> = f0
        .iter()
        .map(|f| 12.0 * (f / reference_f0).log2())
        .collect();
    let m = dsp::mean(&st);
    let s: Vec<f64> = st.iter().map(|v| v - m).collect();
    let residual = ar2_residual(&s);
    let mut counts = vec![0.0; PPE_BINS];
    let width = 2.0 * PPE_SPAN_SEMITONES / PPE_BINS as f64;
    for r in residual {
        let idx = ((r + PPE_SPAN_SEMITONES) / width).floor();
        counts[idx.clamp(0.0, (PPE_BINS - 1) as f64) as usize] += 1.0;
    }
    Ok(dsp::shannon_entropy_counts(&counts))
}

/// Residual of `s[n] - a1 s[n-1] - a2 s[n-2]` with least-squares `a`.
fn ar2_residual(s: &[f64]) -> Vec<f64> {
    let (mut r11, mut r12, mut r22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for n in 2..s.len() {
        let (x1, x2, y) = (s[n - 1], s[n - 2], s[n]);
        r11 += x1 * x1;
        r12 += x1 * x2;
        r22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = r11 * r22 - r12 * r12;
    let (a1, a2) = if det.abs() > 1e-12 * (r11 * r22).max(1e-300) {
        ((b1 * r22 - b2 * r12) / det, (r11 * b2 - r12 * b1) / det)
    } else if r11 > 0.0 {
        (b1 / r11, 0.0)
    } else {
        (0.0, 0.0)
    };
    (2..s.len())
        .map(|n| s[n] - a1 * s[n - 1] - a2 * s[n - 2])
        .collect()
}

/// Population standard deviations of per-cycle open and closed fractions.
pub fn glottal_quotient_stds(cycles: &CycleMarks) -> Result<(f64, f64)> {
    if cycles.len() < 3 {
        return Err(Error::InsufficientCycles {
            needed: 3,
            got: cycles.len(),
        });
    }
    Ok((
        dsp::std_dev(&cycles.open_fractions),
        dsp::std_dev(&cycles.closed_fractions),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyFeatures {
    /// Mean square per frame.
    pub e: Vec<f64>,
    /// Mean Teager-Kaiser energy per frame.
    pub tkeo: Vec<f64>,
    pub me_4hz: f64,
    pub mpsd: f64,
    pub lster: f64,
}

/// Energy measures on the unwindowed samples spanned by each frame.
pub fn energy_features(frames: &FrameSequence, rec: &Recording) -> Result<EnergyFeatures> {
    if rec.duration() < 1.0 {
        return Err(Error::SignalTooShort {
            needed: rec.fs as usize,
            got: rec.samples.len(),
        });
    }
    let mut e = Vec::with_capacity(frames.len());
    let mut tk = Vec::with_capacity(frames.len());
    for i in 0..frames.len() {
        let start = frames.start(i);
        let seg = &rec.samples[start..(start + frames.frame_length).min(rec.samples.len())];
        e.push(dsp::energy(seg) / seg.len() as f64);
        tk.push(dsp::mean(&dsp::tkeo(seg)));
    }
    let frames_per_second = (rec.fs as f64 / frames.hop as f64).round().max(1.0) as usize;
    Ok(EnergyFeatures {
        lster: low_ratio(&e, frames_per_second, 0.5, false),
        e,
        tkeo: tk,
        me_4hz: modulation_energy_4hz(rec),
        mpsd: dsp::median(&dsp::welch_psd(&rec.samples, rec.fs as f64, 512).1),
    })
}

/// Windowed ratio of frames below (or above, when `above`) `factor` times
/// the window mean, counting exact ties as one half. Windows hold
/// `window` frames; a trailing partial window is kept when it is the only one.
pub(crate) fn low_ratio(values: &[f64], window: usize, factor: f64, above: bool) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut ratios = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let end = (start + window).min(values.len());
        if end - start < window && !ratios.is_empty() {
            break;
        }
        let w = &values[start..end];
        let threshold = factor * dsp::mean(w);
        let score: f64 = w
            .iter()
            .map(|&v| {
                let d = if above { v - threshold } else { threshold - v };
                if d > 0.0 {
                    1.0
                } else if d == 0.0 {
                    0.5
                } else {
                    0.0
                }
            })
            .sum();
        ratios.push(score / w.len() as f64);
        start += window;
    }
    dsp::mean(&ratios)
}

/// Intensity envelope (RMS of 25 ms frames every 10 ms) of `x`.
pub(crate) fn rms_envelope(x: &[f64], fs: u32) -> Vec<f64> {
    let len = (0.025 * fs as f64).round() as usize;
    let hop = (0.010 * fs as f64).round() as usize;
    if x.len() < len {
        return Vec::new();
    }
    (0..=(x.len() - len) / hop)
        .map(|i| dsp::rms(&x[i * hop..i * hop + len]))
        .collect()
}

/// Share of intensity-envelope energy in the 3-5 Hz band. The band energy of
/// the mean-removed envelope is divided by the total envelope energy
/// including its mean.
pub fn modulation_energy_4hz(rec: &Recording) -> f64 {
    let env = rms_envelope(&rec.samples, rec.fs);
    let total = dsp::energy(&env);
    if env.len() < 4 || total <= 0.0 {
        return 0.0;
    }
    let rate = 100.0;
    let m = dsp::mean(&env);
    let n = (env.len() * 8).next_power_of_two();
    let mut buf: Vec<Complex64> = env.iter().map(|v| Complex64::new(v - m, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    dsp::fft_in_place(&mut buf);
    let mut band = 0.0;
    for (k, z) in buf.iter().enumerate().take(n / 2 + 1) {
        let f = k as f64 * rate / n as f64;
        if (3.0..=5.0).contains(&f) {
            let w = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
            band += w * z.norm_sqr();
        }
    }
    // Parseval: time-domain energy equals spectral energy / n.
    (band / n as f64 / total).clamp(0.0, 1.0)
}
