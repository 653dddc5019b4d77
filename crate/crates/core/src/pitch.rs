//! Fundamental-frequency tracking and glottal cycle detection.

use std::io::Write;
use std::path::Path;

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitchConfig {
    pub f0_min: f64,
    pub f0_max: f64,
    /// Minimum normalized autocorrelation peak for a voiced frame.
    pub voicing_threshold: f64,
    /// Minimum frame mean-square energy for a voiced frame.
    pub energy_threshold: f64,
    pub hop_ms: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f0_min: 60.0,
            f0_max: 400.0,
            voicing_threshold: 0.45,
            energy_threshold: 1e-6,
            hop_ms: 10.0,
        }
    }
}

/// Frame-wise f0 track. `f0 == 0` marks unvoiced frames.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Contour {
    pub times: Vec<f64>,
    pub f0: Vec<f64>,
    pub voicing: Vec<bool>,
    /// Autocorrelation peak height per frame.
    pub strength: Vec<f64>,
    pub frame_length: usize,
    pub hop: usize,
    pub fs: u32,
}

impl F0Contour {
    pub fn len(&self) -> usize {
        self.f0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0.is_empty()
    }

    pub fn voiced_f0(&self) -> Vec<f64> {
        self.f0
            .iter()
            .zip(&self.voicing)
            .filter(|(_, v)| **v)
            .map(|(f, _)| *f)
            .collect()
    }

    pub fn voiced_count(&self) -> usize {
        self.voicing.iter().filter(|v| **v).count()
    }

    /// Start sample of frame `i`.
    pub fn frame_start(&self, i: usize) -> usize {
        i * self.hop
    }

    /// Index of the frame whose centre is closest to `t` seconds.
    pub fn nearest_frame(&self, t: f64) -> Option<usize> {
        if self.times.is_empty() {
            return None;
        }
        let first = self.times[0];
        let step = self.hop as f64 / self.fs as f64;
        let idx = ((t - first) / step).round();
        Some(idx.clamp(0.0, (self.times.len() - 1) as f64) as usize)
    }

    /// Voicing/f0 of the frame nearest to `t`.
    pub fn at_time(&self, t: f64) -> Option<f64> {
        let i = self.nearest_frame(t)?;
        self.voicing[i].then_some(self.f0[i])
    }

    /// Contour with every frame voiced at `f0`, using the tracker's framing.
    pub fn constant(f0: f64, n_samples: usize, fs: u32, config: &PitchConfig) -> Self {
        let (frame_length, hop) = frame_geometry(fs, config);
        let count = if n_samples >= frame_length {
            (n_samples - frame_length) / hop + 1
        } else {
            0
        };
        Self {
            times: (0..count)
                .map(|i| (i * hop) as f64 / fs as f64 + frame_length as f64 / (2.0 * fs as f64))
                .collect(),
            f0: vec![f0; count],
            voicing: vec![true; count],
            strength: vec![1.0; count],
            frame_length,
            hop,
            fs,
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("time,f0,voicing\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.times[i], self.f0[i], self.voicing[i] as u8
            ));
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn frame_geometry(fs: u32, config: &PitchConfig) -> (usize, usize) {
    let max_lag = (fs as f64 / config.f0_min).ceil() as usize;
    let hop = ((config.hop_ms * fs as f64 / 1000.0).round() as usize).max(1);
    (3 * max_lag, hop)
}

pub fn estimate_f0(rec: &Recording, f0_min: f64, f0_max: f64) -> F0Contour {
    estimate_f0_with(
        rec,
        &PitchConfig {
            f0_min,
            f0_max,
            ..PitchConfig::default()
        },
    )
}

/// Normalized-autocorrelation tracker. Frames span three periods of the
/// lowest admissible f0; the chosen lag is the shortest local maximum within
/// 10 % of the best peak, refined parabolically.
pub fn estimate_f0_with(rec: &Recording, config: &PitchConfig) -> F0Contour {
    let fs = rec.fs as f64;
    let (frame_length, hop) = frame_geometry(rec.fs, config);
    let min_lag = ((fs / config.f0_max).floor() as usize).max(2);
    let max_lag = (fs / config.f0_min).ceil() as usize;
    let n = rec.samples.len();
    let count = if n >= frame_length && config.f0_min < config.f0_max {
        (n - frame_length) / hop + 1
    } else {
        0
    };
    let mut contour = F0Contour {
        times: Vec::with_capacity(count),
        f0: Vec::with_capacity(count),
        voicing: Vec::with_capacity(count),
        strength: Vec::with_capacity(count),
        frame_length,
        hop,
        fs: rec.fs,
    };
    for i in 0..count {
        let start = i * hop;
        let raw = &rec.samples[start..start + frame_length];
        let m = dsp::mean(raw);
        let frame: Vec<f64> = raw.iter().map(|v| v - m).collect();
        let frame_energy = dsp::energy(&frame) / frame_length as f64;
        contour
            .times
            .push(start as f64 / fs + frame_length as f64 / (2.0 * fs));
        let (lag, peak) = if frame_energy >= config.energy_threshold {
            best_lag(&frame, min_lag, max_lag)
        } else {
            (0.0, 0.0)
        };
        let f0 = if lag > 0.0 { fs / lag } else { 0.0 };
        let voiced = frame_energy >= config.energy_threshold
            && peak >= config.voicing_threshold
            && f0 >= config.f0_min
            && f0 <= config.f0_max;
        contour.f0.push(if voiced { f0 } else { 0.0 });
        contour.voicing.push(voiced);
        contour.strength.push(peak);
    }
    correct_octaves(&mut contour, &rec.samples, config);
    contour
}

/// Voiced frames more than 35 % away from the median voiced f0 are re-tracked
/// with the lag search restricted to that neighbourhood, which removes octave
/// and third-harmonic jumps. Frames without an admissible peak there become
/// unvoiced.
fn correct_octaves(contour: &mut F0Contour, samples: &[f64], config: &PitchConfig) {
    const SPAN: f64 = 1.35;
    let voiced = contour.voiced_f0();
    if voiced.is_empty() {
        return;
    }
    let med = dsp::median(&voiced);
    let fs = contour.fs as f64;
    let min_lag = ((fs / (med * SPAN)).floor() as usize).max(2);
    let max_lag = (fs * SPAN / med).ceil() as usize;
    for i in 0..contour.len() {
        let f0 = contour.f0[i];
        if !contour.voicing[i] || (f0 <= med * SPAN && f0 >= med / SPAN) {
            continue;
        }
        let start = contour.frame_start(i);
        let raw = &samples[start..start + contour.frame_length];
        let m = dsp::mean(raw);
        let frame: Vec<f64> = raw.iter().map(|v| v - m).collect();
        let (lag, peak) = best_lag(&frame, min_lag, max_lag);
        let f = if lag > 0.0 { fs / lag } else { 0.0 };
        let ok = peak >= config.voicing_threshold && f >= config.f0_min && f <= config.f0_max;
        contour.f0[i] = if ok { f } else { 0.0 };
        contour.voicing[i] = ok;
        contour.strength[i] = peak;
    }
}

/// Returns `(fractional lag, peak height)`; `(0, 0)` when no peak exists.
pub(crate) fn best_lag(frame: &[f64], min_lag: usize, max_lag: usize) -> (f64, f64) {
    let hi = (max_lag + 1).min(frame.len().saturating_sub(2));
    if hi <= min_lag {
        return (0.0, 0.0);
    }
    let lo = min_lag - 1;
    let r: Vec<f64> = (lo..=hi)
        .map(|lag| dsp::normalized_lag_correlation(frame, lag))
        .collect();
    let mut peaks = Vec::new();
    for j in 1..r.len() - 1 {
        if r[j] > r[j - 1] && r[j] >= r[j + 1] && r[j] > 0.0 {
            peaks.push(j);
        }
    }
    let Some(best) = peaks.iter().map(|&j| r[j]).reduce(f64::max) else {
        return (0.0, 0.0);
    };
    let j = peaks
        .into_iter()
        .find(|&j| r[j] >= 0.9 * best)
        .expect("best peak satisfies its own threshold");
    let (delta, value) = dsp::parabolic_peak(r[j - 1], r[j], r[j + 1]);
    ((lo + j) as f64 + delta, value.min(1.0))
}

/// Per-cycle measurements of the glottal waveform.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CycleMarks {
    /// Cycle start landmarks in (fractional) samples.
    pub starts: Vec<f64>,
    /// Cycle durations in seconds.
    pub periods: Vec<f64>,
    /// Maximum absolute amplitude within each cycle.
    pub peak_amplitudes: Vec<f64>,
    /// Fraction of each cycle above its mid-range level (folds apart).
    pub open_fractions: Vec<f64>,
    pub closed_fractions: Vec<f64>,
}

impl CycleMarks {
    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = String::from("index,start,period,amplitude,open_fraction\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{i},{},{},{},{}\n",
                self.starts[i], self.periods[i], self.peak_amplitudes[i], self.open_fractions[i]
            ));
        }
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Sample ranges `[start, end)` covered by runs of voiced frames.
fn voiced_regions(contour: &F0Contour, n: usize) -> Vec<(usize, usize)> {
    let mut regions = Vec::new();
    let mut i = 0;
    while i < contour.len() {
        if !contour.voicing[i] {
            i += 1;
            continue;
        }
        let first = i;
        while i < contour.len() && contour.voicing[i] {
            i += 1;
        }
        let start = contour.frame_start(first);
        let end = (contour.frame_start(i - 1) + contour.frame_length).min(n);
        regions.push((start, end));
    }
    regions
}

/// Cycle landmarks are the dominant-polarity extremum of each pitch period:
/// waveform minima unless positive excursions dominate, in which case the
/// signal is tracked through its maxima. Each next landmark is searched in
/// `[0.7 T, 1.3 T]` after the previous one, with `T` from the contour.
/// The amplitude of a cycle is the magnitude of its starting landmark.
pub fn detect_cycles(rec: &Recording, contour: &F0Contour) -> Result<CycleMarks> {
    let x = &rec.samples;
    let fs = rec.fs as f64;
    let regions = voiced_regions(contour, x.len());
    if regions.is_empty() {
        return Err(Error::InsufficientVoicing("no voiced frames".into()));
    }

    let voiced: Vec<f64> = regions
        .iter()
        .flat_map(|&(s, e)| x[s..e].iter().copied())
        .collect();
    let sorted = dsp::sorted_copy(&voiced);
    let med = dsp::percentile_sorted(&sorted, 50.0);
    let pos = dsp::percentile_sorted(&sorted, 99.5) - med;
    let neg = med - dsp::percentile_sorted(&sorted, 0.5);
    // Landmarks are minima of `sign * x`.
    let sign = if pos > neg { -1.0 } else { 1.0 };
    let y: Vec<f64> = x.iter().map(|v| sign * v).collect();

    let mut marks = CycleMarks::default();
    for (start, end) in regions {
        let period_at =
            |i: usize| -> Option<f64> { contour.at_time(i as f64 / fs).map(|f0| fs / f0) };
        let Some(t0) = period_at(start + contour.frame_length / 2) else {
            continue;
        };
        let first_end = (start + t0.ceil() as usize).min(end);
        let Some(mut prev) = argmin(&y, start, first_end, None) else {
            continue;
        };
        let mut landmarks = vec![refine_min(&y, prev)];
        loop {
            let t = match period_at(prev) {
                Some(t) => t,
                None => break,
            };
            let lo = prev + (0.7 * t).floor() as usize;
            let hi = prev + (1.3 * t).ceil() as usize + 1;
            if hi > end {
                break;
            }
            let Some(next) = argmin(&y, lo, hi, Some(prev as f64 + t)) else {
                break;
            };
            landmarks.push(refine_min(&y, next));
            prev = next;
        }
        for w in landmarks.windows(2) {
            let ((a, depth), (b, _)) = (w[0], w[1]);
            marks.starts.push(a);
            marks.periods.push((b - a) / fs);
            // The landmark is the cycle's dominant extremum.
            marks.peak_amplitudes.push(depth.abs());
            let lo = a.round() as usize;
            let hi = (b.round() as usize).min(x.len());
            let open = open_fraction(&x[lo..hi]);
            marks.open_fractions.push(open);
            marks.closed_fractions.push(1.0 - open);
        }
    }
    if marks.len() < 3 {
        return Err(Error::InsufficientVoicing(format!(
            "only {} glottal cycles detected",
            marks.len()
        )));
    }
    Ok(marks)
}

/// Index of the minimum of `y[lo..hi]`; exact ties go to the sample closest
/// to `expected`, else the earliest.
fn argmin(y: &[f64], lo: usize, hi: usize, expected: Option<f64>) -> Option<usize> {
    let hi = hi.min(y.len());
    if lo >= hi {
        return None;
    }
    let mut best = lo;
    for i in lo + 1..hi {
        let better = y[i] < y[best]
            || (y[i] == y[best]
                && expected.is_some_and(|e| (i as f64 - e).abs() < (best as f64 - e).abs()));
        if better {
            best = i;
        }
    }
    Some(best)
}

/// Sub-sample position and value of the minimum of `y` at `i`.
fn refine_min(y: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= y.len() {
        return (i as f64, y[i]);
    }
    let (delta, value) = dsp::parabolic_peak(-y[i - 1], -y[i], -y[i + 1]);
    (i as f64 + delta, -value)
}

fn open_fraction(cycle: &[f64]) -> f64 {
    if cycle.is_empty() {
        return 0.0;
    }
    let max = cycle.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = cycle.iter().cloned().fold(f64::INFINITY, f64::min);
    let mid = 0.5 * (max + min);
    cycle.iter().filter(|&&v| v > mid).count() as f64 / cycle.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sawtooth(f0: f64, fs: u32, secs: f64) -> Vec<f64> {
        let n = (secs * fs as f64) as usize;
        (0..n)
            .map(|i| {
                let phase = (i as f64 * f0 / fs as f64).fract();
                2.0 * phase - 1.0
            })
            .collect()
    }

    #[test]
    fn sawtooth_100hz() {
        let rec = Recording::from_samples(sawtooth(100.0, 16_000, 2.0), 16_000);
        let c = estimate_f0(&rec, 60.0, 400.0);
        let voiced = c.voiced_f0();
        assert!(voiced.len() as f64 >= 0.95 * c.len() as f64);
        assert!((dsp::median(&voiced) - 100.0).abs() <= 1.0);
    }

    #[test]
    fn sine_220hz() {
        let x: Vec<f64> = (0..32_000)
            .map(|i| 0.5 * (2.0 * PI * 220.0 * i as f64 / 16_000.0).sin())
            .collect();
        let c = estimate_f0(&Recording::from_samples(x, 16_000), 60.0, 400.0);
        assert!((dsp::median(&c.voiced_f0()) - 220.0).abs() <= 2.0);
    }

    #[test]
    fn silence_is_unvoiced() {
        let c = estimate_f0(
            &Recording::from_samples(vec![0.0; 16_000], 16_000),
            60.0,
            400.0,
        );
        assert!(!c.is_empty());
        assert!(c.voicing.iter().all(|v| !v));
        assert!(c.f0.iter().all(|f| *f == 0.0));
    }

    #[test]
    fn too_short_input_gives_empty_contour() {
        let c = estimate_f0(
            &Recording::from_samples(vec![0.1; 100], 16_000),
            60.0,
            400.0,
        );
        assert!(c.is_empty());
    }

    #[test]
    fn pulse_train_periods() {
        let fs = 16_000;
        let x: Vec<f64> = (0..16_000)
            .map(|i| if i % 160 == 0 { 1.0 } else { 0.0 })
            .collect();
        let rec = Recording::from_samples(x, fs);
        let c = estimate_f0(&rec, 60.0, 400.0);
        let cycles = detect_cycles(&rec, &c).unwrap();
        assert!(cycles.len() > 50);
        for t in &cycles.periods {
            assert!((t - 0.010).abs() <= 1.0 / fs as f64);
        }
    }

    #[test]
    fn no_voicing_is_an_error() {
        let rec = Recording::from_samples(vec![0.0; 16_000], 16_000);
        let c = estimate_f0(&rec, 60.0, 400.0);
        assert!(matches!(
            detect_cycles(&rec, &c),
            Err(Error::InsufficientVoicing(_))
        ));
    }

    #[test]
    fn fractions_sum_to_one() {
        let rec = Recording::from_samples(sawtooth(120.0, 16_000, 1.0), 16_000);
        let c = estimate_f0(&rec, 60.0, 400.0);
        let m = detect_cycles(&rec, &c).unwrap();
        for (o, cl) in m.open_fractions.iter().zip(&m.closed_fractions) {
            assert!((o + cl - 1.0).abs() < 1e-9);
        }
    }
}
