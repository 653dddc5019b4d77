//! Test-signal generators. Randomness comes from a caller-supplied RNG, so
//! output is reproducible for a seeded generator.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Smooth pulses (Gaussian, `width` seconds standard deviation) placed at the
/// cumulative sums of `periods`, starting at `offset` seconds, with heights
/// `amps[i]`. The signal lasts until the last pulse plus one period.
pub fn pulse_train(periods: &[f64], amps: &[f64], fs: u32, width: f64, offset: f64) -> Vec<f64> {
    let fs = fs as f64;
    let total: f64 = offset + periods.iter().sum::<f64>() + periods.last().copied().unwrap_or(0.0);
    let n = (total * fs).ceil() as usize;
    let mut x = vec![0.0; n];
    let sigma = width * fs;
    let reach = (6.0 * sigma).ceil() as isize;
    let mut t = offset;
    for (i, p) in periods.iter().enumerate() {
        let centre = t * fs;
        let a = amps[i % amps.len()];
        let c = centre.round() as isize;
        for k in (c - reach)..=(c + reach) {
            if k >= 0 && (k as usize) < n {
                let d = (k as f64 - centre) / sigma;
                x[k as usize] += a * (-0.5 * d * d).exp();
            }
        }
        t += p;
    }
    x
}

/// Sum of `n` equal-amplitude cosine harmonics of `f0` with a 1/h roll-off.
pub fn harmonic_complex(f0: f64, harmonics: usize, fs: u32, secs: f64) -> Vec<f64> {
    let n = (secs * fs as f64) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / fs as f64;
            (1..=harmonics)
                .filter(|h| (*h as f64) * f0 < fs as f64 / 2.0)
                .map(|h| (2.0 * PI * h as f64 * f0 * t).sin() / h as f64)
                .sum()
        })
        .collect()
}

/// Cascade of two-pole resonators with unity gain at DC-free peaks.
pub fn resonate(x: &[f64], fs: u32, formants: &[(f64, f64)]) -> Vec<f64> {
    let mut y = x.to_vec();
    for &(f, bw) in formants {
        let r = (-PI * bw / fs as f64).exp();
        let theta = 2.0 * PI * f / fs as f64;
        let (a1, a2) = (2.0 * r * theta.cos(), -r * r);
        let gain = 1.0 - r;
        let (mut y1, mut y2) = (0.0, 0.0);
        for v in y.iter_mut() {
            let out = gain * *v + a1 * y1 + a2 * y2;
            y2 = y1;
            y1 = out;
            *v = out;
        }
    }
    y
}

/// Glottal-like waveform: in each period an open phase of relative length
/// `duty[i]` decays linearly from 1 to 0.8 with raised-cosine edges lasting
/// `edge` of the period, then a closed phase ramps from -0.05 to -0.1.
pub fn glottal_waveform(periods: &[f64], duty: &[f64], fs: u32, edge: f64) -> Vec<f64> {
    let fs = fs as f64;
    let total: f64 = periods.iter().sum();
    let n = (total * fs).ceil() as usize;
    let mut x = Vec::with_capacity(n);
    let mut start = 0.0;
    let mut idx = 0;
    for i in 0..n {
        let t = i as f64 / fs;
        while idx + 1 < periods.len() && t >= start + periods[idx] {
            start += periods[idx];
            idx += 1;
        }
        let phase = ((t - start) / periods[idx]).clamp(0.0, 1.0);
        let d = duty[idx % duty.len()];
        let value = if phase < d {
            let open = 1.0 - 0.2 * phase / d;
            let rise = (phase / edge).min(1.0);
            let fall = ((d - phase) / edge).min(1.0);
            let taper = 0.5 - 0.5 * (PI * rise.min(fall)).cos();
            -0.05 + (open + 0.05) * taper
        } else {
            -0.05 - 0.05 * (phase - d) / (1.0 - d)
        };
        x.push(value);
    }
    x
}

/// Period sequence of `n` cycles around `t0` with relative perturbation
/// `jitter * noise[i]` (noise values supplied by the caller).
pub fn perturbed(t0: f64, jitter: f64, noise: &[f64]) -> Vec<f64> {
    noise.iter().map(|e| t0 * (1.0 + jitter * e)).collect()
}

/// Parameters of a synthetic sustained vowel.
#[derive(Debug, Clone, PartialEq)]
pub struct VoiceParams {
    pub f0: f64,
    /// Standard deviation of the relative period perturbation.
    pub jitter: f64,
    /// Standard deviation of the relative pulse-amplitude perturbation.
    pub shimmer: f64,
    /// Resonances as (frequency, bandwidth) in Hz.
    pub formants: Vec<(f64, f64)>,
    /// Signal-to-noise ratio of additive white noise; `None` for no noise.
    pub snr_db: Option<f64>,
    pub secs: f64,
    pub fs: u32,
}

impl Default for VoiceParams {
    fn default() -> Self {
        Self {
            f0: 140.0,
            jitter: 0.005,
            shimmer: 0.03,
            formants: vec![(700.0, 90.0), (1200.0, 110.0), (2600.0, 160.0)],
            snr_db: Some(30.0),
            secs: 1.5,
            fs: 16_000,
        }
    }
}

/// Canonical (F1, F2, F3) targets for the five vowels, adult-male range.
pub fn vowel_formants(vowel: crate::audio::Vowel) -> [(f64, f64); 3] {
    use crate::audio::Vowel;
    match vowel {
        Vowel::A => [(750.0, 90.0), (1250.0, 110.0), (2600.0, 160.0)],
        Vowel::E => [(500.0, 80.0), (1850.0, 120.0), (2600.0, 160.0)],
        Vowel::I => [(300.0, 70.0), (2250.0, 130.0), (3000.0, 170.0)],
        Vowel::O => [(500.0, 80.0), (900.0, 100.0), (2500.0, 160.0)],
        Vowel::U => [(330.0, 70.0), (800.0, 100.0), (2400.0, 160.0)],
    }
}

/// Gaussian glottal pulses with perturbed periods and heights, shaped by
/// the formant resonators, plus white noise; peak-normalized to 0.5.
pub fn voice<R: Rng + ?Sized>(params: &VoiceParams, rng: &mut R) -> Vec<f64> {
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let t0 = 1.0 / params.f0;
    let n_pulses = (params.secs / t0).ceil() as usize + 1;
    let periods: Vec<f64> = (0..n_pulses)
        .map(|_| t0 * (1.0 + params.jitter * unit.sample(rng)).max(0.5))
        .collect();
    let amps: Vec<f64> = (0..n_pulses)
        .map(|_| (1.0 + params.shimmer * unit.sample(rng)).max(0.05))
        .collect();
    let pulses = pulse_train(&periods, &amps, params.fs, 0.00015, 0.005);
    let n = (params.secs * params.fs as f64) as usize;
    let mut x = resonate(&pulses[..n.min(pulses.len())], params.fs, &params.formants);
    if let Some(snr) = params.snr_db {
        let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
        let sd = rms * 10f64.powf(-snr / 20.0);
        for v in x.iter_mut() {
            *v += sd * unit.sample(rng);
        }
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for v in x.iter_mut() {
            *v *= 0.5 / peak;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulses_land_on_schedule() {
        let x = pulse_train(&[0.01, 0.01], &[1.0], 16_000, 0.0002, 0.005);
        assert!((x[80] - 1.0).abs() < 1e-12);
        assert!((x[240] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resonator_is_stable() {
        let mut x = vec![0.0; 4000];
        x[0] = 1.0;
        let y = resonate(&x, 16_000, &[(500.0, 80.0), (1500.0, 100.0)]);
        assert!(y.iter().all(|v| v.is_finite()));
        assert!(y[3999].abs() < 1e-6);
    }

    #[test]
    fn glottal_duty() {
        let x = glottal_waveform(&[0.01; 10], &[0.3], 16_000, 0.02);
        let open = x[..160].iter().filter(|v| **v > 0.45).count();
        assert!((open as f64 / 160.0 - 0.3).abs() < 0.03);
    }
}
