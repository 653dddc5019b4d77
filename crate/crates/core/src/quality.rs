//! Temporal, spectral, cepstral, noise and modulation voice-quality measures.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::articulation::default_lpc_order;
use crate::audio::{resample_samples, FrameSequence, Recording};
use crate::dsp;
use crate::error::{Error, Result};
use crate::phonation::low_ratio;
use crate::pitch::F0Contour;

pub const DB_FLOOR: f64 = -20.0;
pub const DB_CEIL: f64 = 60.0;
pub const NNE_FLOOR: f64 = -60.0;
pub const NNE_CEIL: f64 = 20.0;
/// Quefrency search range, as pitch bounds in Hz.
pub const CEPSTRAL_F0_MIN: f64 = 60.0;
pub const CEPSTRAL_F0_MAX: f64 = 400.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemporalQuality {
    pub zcr: Vec<f64>,
    pub hzcrr: f64,
    pub fluf: f64,
}

/// Zero-crossing rate per frame, high-ZCR ratio over 1 s windows (frames
/// above 1.5 times the window mean ZCR) and the unvoiced frame fraction.
pub fn temporal_quality(frames: &FrameSequence, contour: &F0Contour) -> TemporalQuality {
    let zcr: Vec<f64> = frames
        .frames
        .iter()
        .map(|f| dsp::zero_crossings(f) as f64 / f.len() as f64)
        .collect();
    let per_second = (frames.fs as f64 / frames.hop as f64).round().max(1.0) as usize;
    let fluf = if contour.is_empty() {
        1.0
    } else {
        (contour.len() - contour.voiced_count()) as f64 / contour.len() as f64
    };
    TemporalQuality {
        hzcrr: low_ratio(&zcr, per_second, 1.5, true),
        zcr,
        fluf,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralQuality {
    /// Distance between successive unit-norm magnitude spectra.
    pub sf: Vec<f64>,
    pub sdbm_frame: Vec<f64>,
    pub sdbp_frame: Vec<f64>,
    pub sdbm: f64,
    pub sdbp: f64,
}

fn unit_magnitude(spec: &[Complex64]) -> Vec<f64> {
    let mag: Vec<f64> = spec.iter().map(|z| z.norm()).collect();
    let norm = mag.iter().map(|m| m * m).sum::<f64>().sqrt();
    if norm > 0.0 {
        mag.iter().map(|m| m / norm).collect()
    } else {
        mag
    }
}

/// `A(e^{jw})` of a prediction polynomial on `nfft` bins `0..=nfft/2`.
fn polynomial_response(a: &[f64], nfft: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(nfft, Complex64::new(0.0, 0.0));
    dsp::fft_in_place(&mut buf);
    buf.truncate(nfft / 2 + 1);
    buf
}

/// Spectral flux plus module (dB RMS) and phase (mean absolute wrapped
/// difference) distances between each frame's spectrum and its all-pole
/// envelope.
pub fn spectral_quality(frames: &FrameSequence) -> Result<SpectralQuality> {
    if frames.len() < 2 {
        return Err(Error::SignalTooShort {
            needed: 2,
            got: frames.len(),
        });
    }
    let nfft = frames.frame_length.next_power_of_two();
    let order = default_lpc_order(frames.fs);
    let mut sf = Vec::with_capacity(frames.len() - 1);
    let mut sdbm_frame = Vec::new();
    let mut sdbp_frame = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    for frame in &frames.frames {
        let spec = dsp::rfft(frame, nfft);
        let unit = unit_magnitude(&spec);
        if let Some(p) = &prev {
            let d: f64 = p.iter().zip(&unit).map(|(a, b)| (a - b) * (a - b)).sum();
            sf.push(d.sqrt());
        }
        prev = Some(unit);

        if dsp::energy(frame) <= 1e-12 {
            continue;
        }
        let Some((a, err)) = dsp::lpc(frame, order) else {
            continue;
        };
        let gain = err.max(0.0).sqrt();
        let resp = polynomial_response(&a, nfft);
        let peak = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let floor = 1e-10 * peak.max(1e-300);
        let mut sq = 0.0;
        let mut phase = 0.0;
        let bins = nfft / 2 - 1;
        for k in 1..nfft / 2 {
            let x = spec[k].norm().max(floor);
            let h = (gain / resp[k].norm().max(1e-300)).max(floor);
            let diff = 20.0 * (x / h).log10();
            sq += diff * diff;
            // Model phase is the negated phase of A.
            phase += dsp::wrap_phase(spec[k].arg() + resp[k].arg()).abs();
        }
        sdbm_frame.push((sq / bins as f64).sqrt());
        sdbp_frame.push(phase / bins as f64);
    }
    Ok(SpectralQuality {
        sf,
        sdbm: dsp::mean(&sdbm_frame),
        sdbp: dsp::mean(&sdbp_frame),
        sdbm_frame,
        sdbp_frame,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CepstralQuality {
    pub cpp: f64,
    pub pecm: f64,
    pub vr: f64,
    pub cpp_frame: Vec<f64>,
}

/// Real cepstrum of one frame (first `nfft/2` quefrencies).
fn real_cepstrum(frame: &[f64], nfft: usize) -> Vec<f64> {
    let power = dsp::power_spectrum(frame, nfft);
    let peak = power.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-12 * peak.max(1e-300);
    let mut buf: Vec<Complex64> = (0..nfft)
        .map(|k| {
            let bin = if k <= nfft / 2 { k } else { nfft - k };
            Complex64::new(power[bin].max(floor).ln(), 0.0)
        })
        .collect();
    dsp::ifft_in_place(&mut buf);
    buf.iter().take(nfft / 2).map(|z| z.re).collect()
}

/// Peak of a dB power cepstrum above its regression line over `[q_lo, q_hi]`,
/// with the line fitted from 1 ms upward. Returns `(prominence, peak index)`.
fn prominence(db: &[f64], fs: f64, q_lo: usize, q_hi: usize) -> (f64, usize) {
    let q_hi = q_hi.min(db.len() - 1);
    let (pk, _) =
        (q_lo..=q_hi)
            .map(|q| (q, db[q]))
            .fold((q_lo, f64::NEG_INFINITY), |acc, (q, v)| {
                if v > acc.1 {
                    (q, v)
                } else {
                    acc
                }
            });
    let start = ((0.001 * fs).round() as usize).max(1).min(q_lo);
    let qs: Vec<f64> = (start..=q_hi).map(|q| q as f64).collect();
    let ys: Vec<f64> = (start..=q_hi).map(|q| db[q]).collect();
    let (slope, intercept) = dsp::linear_fit(&qs, &ys);
    (db[pk] - (slope * pk as f64 + intercept), pk)
}

fn voiced_frame_f0(frames: &FrameSequence, contour: &F0Contour, i: usize) -> Option<f64> {
    contour.at_time(frames.center_time(i))
}

/// Cepstral peak prominence, pitch energy cepstral measure and the variation
/// of the second-to-first rahmonic ratio over voiced frames.
///
/// `cpp` is measured on the power cepstrum averaged over voiced frames;
/// `cpp_frame` holds the same measure per frame.
pub fn cepstral_quality(frames: &FrameSequence, contour: &F0Contour) -> Result<CepstralQuality> {
    let fs = frames.fs as f64;
    let nfft = (2 * frames.frame_length).next_power_of_two();
    let q_lo = (fs / CEPSTRAL_F0_MAX).floor() as usize;
    let q_hi = ((fs / CEPSTRAL_F0_MIN).ceil() as usize).min(nfft / 2 - 1);
    let mut avg = vec![0.0; nfft / 2];
    let mut count = 0usize;
    let mut cpp_frame = Vec::new();
    let mut ratios = Vec::new();
    for (i, frame) in frames.frames.iter().enumerate() {
        let Some(f0) = voiced_frame_f0(frames, contour, i) else {
            continue;
        };
        if dsp::energy(frame) <= 1e-12 {
            continue;
        }
        let c = real_cepstrum(frame, nfft);
        let power: Vec<f64> = c.iter().map(|v| v * v).collect();
        for (a, p) in avg.iter_mut().zip(&power) {
            *a += p;
        }
        count += 1;
        let db: Vec<f64> = power.iter().map(|p| 10.0 * (p + 1e-300).log10()).collect();
        cpp_frame.push(prominence(&db, fs, q_lo, q_hi).0);
        let q0 = (fs / f0).round() as usize;
        if 2 * q0 < c.len() && c[q0].abs() > 1e-12 {
            ratios.push(c[2 * q0].abs() / c[q0].abs());
        }
    }
    if count == 0 {
        return Err(Error::InsufficientVoicing(
            "no voiced frames for cepstral analysis".into(),
        ));
    }
    for a in avg.iter_mut() {
        *a /= count as f64;
    }
    let db: Vec<f64> = avg.iter().map(|p| 10.0 * (p + 1e-300).log10()).collect();
    let (cpp, pk) = prominence(&db, fs, q_lo, q_hi);
    let range: f64 = avg[q_lo..=q_hi].iter().sum();
    let near: f64 = avg[pk.saturating_sub(2)..=(pk + 2).min(q_hi)].iter().sum();
    Ok(CepstralQuality {
        cpp,
        pecm: if range > 0.0 { near / range } else { 0.0 },
        vr: if ratios.is_empty() {
            0.0
        } else {
            dsp::std_dev(&ratios)
        },
        cpp_frame,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseMeasures {
    pub hnr: f64,
    pub nhr: f64,
    pub nne: f64,
    pub gne: f64,
    pub spi: f64,
    pub vti: f64,
    pub ssd: f64,
    pub hnr_frame: Vec<f64>,
    pub nhr_frame: Vec<f64>,
    pub nne_frame: Vec<f64>,
    pub gne_frame: Vec<f64>,
    pub spi_frame: Vec<f64>,
    pub vti_frame: Vec<f64>,
    pub ssd_frame: Vec<f64>,
}

/// Harmonic-to-noise ratio in dB from a normalized autocorrelation peak.
pub fn hnr_from_correlation(r: f64) -> f64 {
    if r >= 1.0 {
        return DB_CEIL;
    }
    if r <= 0.0 {
        return DB_FLOOR;
    }
    (10.0 * (r / (1.0 - r)).log10()).clamp(DB_FLOOR, DB_CEIL)
}

/// Per-bin distance (in multiples of f0) to the nearest harmonic.
fn harmonic_distance(freq: f64, f0: f64) -> f64 {
    let h = (freq / f0).round().max(1.0);
    (freq - h * f0).abs() / f0
}

const INTERHARMONIC: f64 = 0.4;

struct SpectralNoise {
    nne: f64,
    spi: Option<f64>,
    vti: Option<f64>,
    low: f64,
    high: f64,
}

fn spectral_noise(frame: &[f64], fs: f64, f0: f64) -> SpectralNoise {
    let win = dsp::hann(frame.len());
    let x: Vec<f64> = frame.iter().zip(&win).map(|(a, w)| a * w).collect();
    let nfft = (2 * frame.len()).next_power_of_two();
    let p = dsp::power_spectrum(&x, nfft);
    let df = fs / nfft as f64;
    let bin = |f: f64| ((f / df).round() as usize).min(p.len() - 1);

    // Noise level per harmonic interval from its central region.
    let (lo, hi) = (bin(60.0), bin(4000.0));
    let total: f64 = p[lo..=hi].iter().sum();
    let mut noise = 0.0;
    let mut h = 0usize;
    loop {
        let a = h as f64 * f0;
        let b = a + f0;
        if a > 4000.0 {
            break;
        }
        let region: Vec<f64> = (bin(a.max(60.0))..=bin(b.min(4000.0)))
            .filter(|&k| harmonic_distance(k as f64 * df, f0) >= INTERHARMONIC)
            .map(|k| p[k])
            .collect();
        let span = (bin(b.min(4000.0)) + 1).saturating_sub(bin(a.max(60.0)));
        if !region.is_empty() {
            noise += dsp::mean(&region) * span as f64;
        }
        h += 1;
    }
    let nne = if total > 0.0 && noise > 0.0 {
        (10.0 * (noise / total).log10()).clamp(NNE_FLOOR, NNE_CEIL)
    } else {
        NNE_FLOOR
    };
    let band = |a: f64, b: f64| -> f64 { p[bin(a)..=bin(b)].iter().sum() };
    let low = band(70.0, 1600.0);
    let high = band(1600.0, 4500.0);
    let harmonic: f64 = (bin(70.0)..=bin(4500.0))
        .filter(|&k| harmonic_distance(k as f64 * df, f0) < INTERHARMONIC)
        .map(|k| p[k])
        .sum();
    let top = bin(5800.0f64.min(fs / 2.0));
    let inharmonic: f64 = (bin(2800.0)..=top)
        .filter(|&k| harmonic_distance(k as f64 * df, f0) >= INTERHARMONIC)
        .map(|k| p[k])
        .sum();
    SpectralNoise {
        nne,
        spi: (high > 0.0).then(|| low / high),
        vti: (harmonic > 0.0).then(|| inharmonic / harmonic),
        low,
        high,
    }
}

/// Signal-to-dysperiodicity ratio (dB) of one frame at period `t` samples.
fn ssd_frame(frame: &[f64], t: usize) -> f64 {
    if t == 0 || t >= frame.len() {
        return DB_FLOOR;
    }
    let mut s = 0.0;
    let mut d = 0.0;
    for n in 0..frame.len() - t {
        s += frame[n] * frame[n];
        let e = frame[n + t] - frame[n];
        d += e * e;
    }
    if d <= 0.0 {
        return DB_CEIL;
    }
    if s <= 0.0 {
        return DB_FLOOR;
    }
    (10.0 * (s / d).log10()).clamp(DB_FLOOR, DB_CEIL)
}

/// Noise measures over the voiced frames of `contour`; GNE uses every
/// frame with energy.
pub fn noise_measures(rec: &Recording, contour: &F0Contour) -> Result<NoiseMeasures> {
    let fs = rec.fs as f64;
    let voiced_secs = contour.voiced_count() as f64 * contour.hop as f64 / fs;
    if voiced_secs < 0.5 {
        return Err(Error::InsufficientVoicing(format!(
            "{voiced_secs:.2} s voiced, 0.5 s required"
        )));
    }
    let mut m = NoiseMeasures {
        hnr: 0.0,
        nhr: 0.0,
        nne: 0.0,
        gne: 0.0,
        spi: 0.0,
        vti: 0.0,
        ssd: 0.0,
        hnr_frame: Vec::new(),
        nhr_frame: Vec::new(),
        nne_frame: Vec::new(),
        gne_frame: Vec::new(),
        spi_frame: Vec::new(),
        vti_frame: Vec::new(),
        ssd_frame: Vec::new(),
    };
    let (mut low, mut high) = (0.0, 0.0);
    for i in 0..contour.len() {
        if !contour.voicing[i] {
            continue;
        }
        let f0 = contour.f0[i];
        let start = contour.frame_start(i);
        let frame = &rec.samples[start..start + contour.frame_length];
        let hnr = hnr_from_correlation(contour.strength[i]);
        m.hnr_frame.push(hnr);
        m.nhr_frame.push(10f64.powf(-hnr / 10.0));
        let sn = spectral_noise(frame, fs, f0);
        m.nne_frame.push(sn.nne);
        if let Some(v) = sn.spi {
            m.spi_frame.push(v);
        }
        if let Some(v) = sn.vti {
            m.vti_frame.push(v);
        }
        low += sn.low;
        high += sn.high;
        m.ssd_frame
            .push(ssd_frame(frame, (fs / f0).round() as usize));
    }
    m.hnr = dsp::mean(&m.hnr_frame);
    m.nhr = dsp::mean(&m.nhr_frame);
    m.nne = dsp::mean(&m.nne_frame);
    m.spi = if high > 0.0 { low / high } else { 0.0 };
    m.vti = dsp::mean(&m.vti_frame);
    m.ssd = dsp::mean(&m.ssd_frame);
    m.gne_frame = gne_contour(&rec.samples, rec.fs);
    m.gne = dsp::mean(&m.gne_frame).clamp(0.0, 1.0);
    Ok(m)
}

pub const GNE_FS: u32 = 10_000;
pub const GNE_ORDER: usize = 13;
pub const GNE_BANDWIDTH: f64 = 1000.0;
pub const GNE_STEP: f64 = 300.0;
pub const GNE_MAX_LAG: usize = 3;

/// Glottal-to-noise excitation ratio of a signal.
pub fn gne(samples: &[f64], fs: u32) -> f64 {
    dsp::mean(&gne_contour(samples, fs)).clamp(0.0, 1.0)
}

/// Per-frame GNE: the signal is resampled to 10 kHz and inverse filtered
/// with an order-13 predictor per 30 ms frame; Hilbert envelopes of 1 kHz
/// bands centred every 300 Hz from 500 Hz are cross-correlated (maximum
/// over lags up to 3 samples) for every pair at least half a bandwidth
/// apart, and the frame value is the mean of those maxima.
pub fn gne_contour(samples: &[f64], fs: u32) -> Vec<f64> {
    let x = resample_samples(samples, fs, GNE_FS);
    let gfs = GNE_FS as f64;
    let len = (0.030 * gfs).round() as usize;
    let hop = (0.010 * gfs).round() as usize;
    if x.len() < len + GNE_ORDER {
        return Vec::new();
    }
    let nfft = (2 * len).next_power_of_two();
    let centres: Vec<f64> = (0..)
        .map(|i| 500.0 + GNE_STEP * i as f64)
        .take_while(|c| c + GNE_BANDWIDTH / 2.0 <= gfs / 2.0)
        .collect();
    let win = dsp::hann(len);
    let mut out = Vec::new();
    let mut start = GNE_ORDER;
    while start + len <= x.len() {
        let seg = &x[start..start + len];
        start += hop;
        if dsp::energy(seg) / len as f64 <= 1e-10 {
            continue;
        }
        let windowed: Vec<f64> = seg.iter().zip(&win).map(|(a, w)| a * w).collect();
        let Some((a, _)) = dsp::lpc(&windowed, GNE_ORDER) else {
            continue;
        };
        let s = start - hop;
        let residual: Vec<f64> = (s..s + len)
            .map(|n| (0..=GNE_ORDER).map(|k| a[k] * x[n - k]).sum())
            .collect();
        let spec = dsp::rfft(&residual, nfft);
        let envelopes: Vec<Vec<f64>> = centres
            .iter()
            .map(|&c| hilbert_band_envelope(&spec, nfft, gfs, c, len))
            .collect();
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..centres.len() {
            for j in i + 1..centres.len() {
                if centres[j] - centres[i] < GNE_BANDWIDTH / 2.0 {
                    continue;
                }
                sum += max_lag_correlation(&envelopes[i], &envelopes[j], GNE_MAX_LAG);
                pairs += 1;
            }
        }
        if pairs > 0 {
            out.push((sum / pairs as f64).clamp(0.0, 1.0));
        }
    }
    out
}

/// Envelope of the analytic band signal `[centre - bw/2, centre + bw/2]`.
fn hilbert_band_envelope(
    spec: &[Complex64],
    nfft: usize,
    fs: f64,
    centre: f64,
    len: usize,
) -> Vec<f64> {
    let lo = centre - GNE_BANDWIDTH / 2.0;
    let hi = centre + GNE_BANDWIDTH / 2.0;
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for (k, z) in spec.iter().enumerate() {
        let f = k as f64 * fs / nfft as f64;
        if f >= lo && f <= hi && k > 0 && k < nfft / 2 {
            // Hann-shaped band keeps the envelope smooth.
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * (f - lo) / GNE_BANDWIDTH).cos();
            buf[k] = 2.0 * w * z;
        }
    }
    dsp::ifft_in_place(&mut buf);
    buf.iter().take(len).map(|z| z.norm()).collect()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let ma = dsp::mean(a);
    let mb = dsp::mean(b);
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += (x - ma) * (y - mb);
        aa += (x - ma) * (x - ma);
        bb += (y - mb) * (y - mb);
    }
    if aa <= 0.0 || bb <= 0.0 {
        0.0
    } else {
        ab / (aa * bb).sqrt()
    }
}

fn max_lag_correlation(a: &[f64], b: &[f64], max_lag: usize) -> f64 {
    let n = a.len().min(b.len());
    let mut best = f64::NEG_INFINITY;
    for lag in 0..=max_lag.min(n.saturating_sub(2)) {
        best = best.max(pearson(&a[lag..n], &b[..n - lag]));
        best = best.max(pearson(&a[..n - lag], &b[lag..n]));
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationMeasures {
    pub mser: f64,
    pub mfp: f64,
    pub rphm: f64,
    pub icer: f64,
    pub rphic: f64,
}

pub const MOD_WINDOW: usize = 256;
pub const MOD_HOP: usize = 32;

/// Modulation spectrum of the STFT magnitude envelopes.
///
/// Each acoustic bin's envelope (sampled every 32 samples) is mean-removed and
/// transformed; the modulation spectrum `M(fm)` sums the resulting powers
/// over bins and `M0` sums the squared envelope means scaled by the
/// envelope length (the DC term). Then:
/// `mfp` = argmax of `M` above 0.5 Hz, `rphm` = that peak over `M0`,
/// `mser` = share of `M` in 1-20 Hz, `icer` = share in 64-128 Hz and
/// `rphic` = the largest `M` in 64-128 Hz over `M0`.
pub fn modulation_measures(rec: &Recording) -> Result<ModulationMeasures> {
    if rec.duration() < 1.0 {
        return Err(Error::SignalTooShort {
            needed: rec.fs as usize,
            got: rec.samples.len(),
        });
    }
    let x = &rec.samples;
    let win = dsp::hann(MOD_WINDOW);
    let n_frames = (x.len() - MOD_WINDOW) / MOD_HOP + 1;
    let n_bins = MOD_WINDOW / 2;
    let mut env = vec![vec![0.0; n_frames]; n_bins];
    for t in 0..n_frames {
        let frame: Vec<f64> = x[t * MOD_HOP..t * MOD_HOP + MOD_WINDOW]
            .iter()
            .zip(&win)
            .map(|(a, w)| a * w)
            .collect();
        let spec = dsp::rfft(&frame, MOD_WINDOW);
        for b in 0..n_bins {
            env[b][t] = spec[b + 1].norm();
        }
    }
    let rate = rec.fs as f64 / MOD_HOP as f64;
    let nfft = (4 * n_frames).next_power_of_two();
    let mut m = vec![0.0; nfft / 2 + 1];
    let mut m0 = 0.0;
    for e in &env {
        let mu = dsp::mean(e);
        m0 += (mu * n_frames as f64).powi(2);
        let mut buf: Vec<Complex64> = e.iter().map(|v| Complex64::new(v - mu, 0.0)).collect();
        buf.resize(nfft, Complex64::new(0.0, 0.0));
        dsp::fft_in_place(&mut buf);
        for (acc, z) in m.iter_mut().zip(&buf) {
            *acc += z.norm_sqr();
        }
    }
    let freq = |k: usize| k as f64 * rate / nfft as f64;
    let band = |lo: f64, hi: f64| -> f64 {
        m.iter()
            .enumerate()
            .filter(|(k, _)| (lo..=hi).contains(&freq(*k)))
            .map(|(_, v)| v)
            .sum()
    };
    let total: f64 = m.iter().skip(1).sum();
    let (pk, pv) = m.iter().enumerate().filter(|(k, _)| freq(*k) >= 0.5).fold(
        (0usize, f64::NEG_INFINITY),
        |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc },
    );
    let ic_max = m
        .iter()
        .enumerate()
        .filter(|(k, _)| (64.0..=128.0).contains(&freq(*k)))
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    Ok(ModulationMeasures {
        mser: ratio(band(1.0, 20.0), total),
        mfp: freq(pk),
        rphm: ratio(pv.max(0.0), m0),
        icer: ratio(band(64.0, 128.0), total),
        rphic: ratio(ic_max, m0),
    })
}
