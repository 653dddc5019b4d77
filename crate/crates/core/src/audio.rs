//! Recording decode, sample-rate conversion and framing.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dsp;
use crate::error::{Error, Result};

/// Analysis rate used throughout feature extraction.
pub const ANALYSIS_FS: u32 = 16_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vowel {
    A,
    E,
    I,
    O,
    U,
}

impl Vowel {
    pub const ALL: [Vowel; 5] = [Vowel::A, Vowel::E, Vowel::I, Vowel::O, Vowel::U];

    pub fn as_str(self) -> &'static str {
        match self {
            Vowel::A => "a",
            Vowel::E => "e",
            Vowel::I => "i",
            Vowel::O => "o",
            Vowel::U => "u",
        }
    }
}

impl fmt::Display for Vowel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Vowel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Vowel::A),
            "e" => Ok(Vowel::E),
            "i" => Ok(Vowel::I),
            "o" => Ok(Vowel::O),
            "u" => Ok(Vowel::U),
            other => Err(Error::InvalidParameter(format!("unknown vowel '{other}'"))),
        }
    }
}

/// Vowel task: short (`s`), sustained (`l`), sustained loud (`ll`),
/// sustained soft but not whispered (`ls`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    S,
    L,
    Ll,
    Ls,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::S, Task::L, Task::Ll, Task::Ls];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::S => "s",
            Task::L => "l",
            Task::Ll => "ll",
            Task::Ls => "ls",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s" => Ok(Task::S),
            "l" => Ok(Task::L),
            "ll" => Ok(Task::Ll),
            "ls" => Ok(Task::Ls),
            other => Err(Error::InvalidParameter(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecordingMeta {
    pub subject_id: String,
    pub vowel: Vowel,
    pub task: Task,
}

impl RecordingMeta {
    pub fn new(subject_id: impl Into<String>, vowel: Vowel, task: Task) -> Self {
        Self {
            subject_id: subject_id.into(),
            vowel,
            task,
        }
    }
}

/// A mono recording with amplitudes in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub samples: Vec<f64>,
    pub fs: u32,
    pub subject_id: String,
    pub vowel: Vowel,
    pub task: Task,
}

impl Recording {
    pub fn new(samples: Vec<f64>, fs: u32, meta: RecordingMeta) -> Self {
        Self {
            samples,
            fs,
            subject_id: meta.subject_id,
            vowel: meta.vowel,
            task: meta.task,
        }
    }

    /// Unlabelled recording, convenient for synthetic signals.
    pub fn from_samples(samples: Vec<f64>, fs: u32) -> Self {
        Self::new(samples, fs, RecordingMeta::new("", Vowel::A, Task::L))
    }

    pub fn meta(&self) -> RecordingMeta {
        RecordingMeta::new(self.subject_id.clone(), self.vowel, self.task)
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.fs as f64
    }

    /// Copy with the samples replaced, keeping rate and labels.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        Self {
            samples,
            ..self.clone()
        }
    }

    /// Scales so that the largest absolute amplitude is 1. Silent input is
    /// returned unchanged.
    pub fn peak_normalized(&self) -> Self {
        let peak = self.samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak <= 0.0 {
            return self.clone();
        }
        self.with_samples(self.samples.iter().map(|v| v / peak).collect())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub peak_normalize: bool,
}

/// Decodes a PCM WAV file (16/24/32-bit integer or 32-bit float).
/// Integer samples are divided by `2^(bits-1)`; stereo is averaged to mono.
pub fn load_recording(path: impl AsRef<Path>, meta: RecordingMeta) -> Result<Recording> {
    load_recording_with(path, meta, LoadOptions::default())
}

pub fn load_recording_with(
    path: impl AsRef<Path>,
    meta: RecordingMeta,
    options: LoadOptions,
) -> Result<Recording> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    let spec = reader.spec();
    let decode_err = |e: hound::Error| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(decode_err)?,
        (hound::SampleFormat::Int, bits @ (24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(decode_err)?
        }
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(decode_err)?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding(format!(
                "{fmt:?} {bits}-bit in {}",
                path.display()
            )))
        }
    };
    let channels = spec.channels.max(1) as usize;
    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyAudio(path.to_path_buf()));
    }
    let rec = Recording::new(samples, spec.sample_rate, meta);
    Ok(if options.peak_normalize {
        rec.peak_normalized()
    } else {
        rec
    })
}

/// Writes mono 16-bit PCM; samples are clipped to `[-1, 1)`.
pub fn write_wav_i16(path: impl AsRef<Path>, samples: &[f64], fs: u32) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: fs,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let wrap = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::Decode {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wrap)?;
    for &s in samples {
        let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v).map_err(wrap)?;
    }
    writer.finalize().map_err(wrap)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc kernel shared by all polyphase branches.
struct SincKernel {
    cutoff: f64,
    half_width: usize,
    beta: f64,
    i0_beta: f64,
}

impl SincKernel {
    const STOPBAND_DB: f64 = 80.0;

    fn new(fs: u32, target: u32) -> Self {
        let min_rate = fs.min(target) as f64;
        // Pass up to 0.45 of the lower rate, stop at its Nyquist.
        let cutoff = 0.475 * min_rate / fs as f64;
        let transition = 0.05 * min_rate / fs as f64;
        let taps = (Self::STOPBAND_DB - 7.95) / (2.285 * 2.0 * PI * transition) + 1.0;
        let beta = 0.1102 * (Self::STOPBAND_DB - 8.7);
        Self {
            cutoff,
            half_width: (taps / 2.0).ceil() as usize,
            beta,
            i0_beta: bessel_i0(beta),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let hw = self.half_width as f64;
        if t.abs() >= hw {
            return 0.0;
        }
        let x = 2.0 * self.cutoff * t;
        let sinc = if x.abs() < 1e-12 {
            1.0
        } else {
            (PI * x).sin() / (PI * x)
        };
        let r = t / hw;
        let w = bessel_i0(self.beta * (1.0 - r * r).max(0.0).sqrt()) / self.i0_beta;
        2.0 * self.cutoff * sinc * w
    }

    /// Normalized weights for the fractional offset `frac` in `[0, 1)`,
    /// covering input taps `base - half_width + 1 ..= base + half_width`.
    fn phase_weights(&self, frac: f64) -> Vec<f64> {
        let hw = self.half_width as i64;
        let mut w: Vec<f64> = (-hw + 1..=hw).map(|k| self.eval(frac - k as f64)).collect();
        let sum: f64 = w.iter().sum();
        if sum.abs() > 0.0 {
            for v in &mut w {
                *v /= sum;
            }
        }
        w
    }
}

/// Rational windowed-sinc polyphase resampling of a raw sample buffer.
/// Edges are extended by sample replication so constant signals stay exact.
pub fn resample_samples(x: &[f64], fs: u32, target_fs: u32) -> Vec<f64> {
    if fs == target_fs || x.is_empty() {
        return x.to_vec();
    }
    let g = gcd(fs as u64, target_fs as u64);
    let up = target_fs as u64 / g;
    let down = fs as u64 / g;
    let n_out = ((x.len() as u64 * up).div_ceil(down)) as usize;
    let kernel = SincKernel::new(fs, target_fs);
    let hw = kernel.half_width as i64;
    let table: Option<Vec<Vec<f64>>> = (up <= 2048).then(|| {
        (0..up)
            .map(|p| kernel.phase_weights(p as f64 / up as f64))
            .collect()
    });
    let last = x.len() as i64 - 1;
    (0..n_out)
        .map(|m| {
            let pos = m as u64 * down;
            let base = (pos / up) as i64;
            let phase = pos % up;
            let owned;
            let weights: &[f64] = match &table {
                Some(t) => &t[phase as usize],
                None => {
                    owned = kernel.phase_weights(phase as f64 / up as f64);
                    &owned
                }
            };
            weights
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    let idx = (base - hw + 1 + j as i64).clamp(0, last) as usize;
                    w * x[idx]
                })
                .sum()
        })
        .collect()
}

/// Converts a recording to `target_fs`. Identity when the rate already matches.
pub fn resample(rec: &Recording, target_fs: u32) -> Result<Recording> {
    if target_fs == 0 {
        return Err(Error::InvalidParameter("target_fs must be positive".into()));
    }
    let mut out = rec.clone();
    out.samples = resample_samples(&rec.samples, rec.fs, target_fs);
    out.fs = target_fs;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
    Hamming,
}

impl Window {
    pub fn taper(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => dsp::hann(n),
            Window::Hamming => dsp::hamming(n),
        }
    }
}

impl FromStr for Window {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" => Ok(Window::Rectangular),
            "hann" | "hanning" => Ok(Window::Hann),
            "hamming" => Ok(Window::Hamming),
            other => Err(Error::InvalidParameter(format!("unknown window '{other}'"))),
        }
    }
}

/// Equal-length tapered frames of a signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    pub frames: Vec<Vec<f64>>,
    pub frame_length: usize,
    pub hop: usize,
    pub window: Window,
    pub fs: u32,
}

impl FrameSequence {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Centre time of frame `i` in seconds.
    pub fn center_time(&self, i: usize) -> f64 {
        (i * self.hop) as f64 / self.fs as f64 + self.frame_length as f64 / (2.0 * self.fs as f64)
    }

    /// Start sample of frame `i` in the source signal.
    pub fn start(&self, i: usize) -> usize {
        i * self.hop
    }
}

/// Splits raw samples into `floor((N - L) / hop) + 1` frames.
pub fn frame_samples(
    x: &[f64],
    fs: u32,
    frame_length: usize,
    hop: usize,
    window: Window,
) -> Result<FrameSequence> {
    if frame_length == 0 || hop == 0 {
        return Err(Error::InvalidParameter(
            "frame length and hop must be positive".into(),
        ));
    }
    if x.len() < frame_length {
        return Err(Error::SignalTooShort {
            needed: frame_length,
            got: x.len(),
        });
    }
    let taper = window.taper(frame_length);
    let count = (x.len() - frame_length) / hop + 1;
    let frames = (0..count)
        .map(|i| {
            x[i * hop..i * hop + frame_length]
                .iter()
                .zip(&taper)
                .map(|(s, w)| s * w)
                .collect()
        })
        .collect();
    Ok(FrameSequence {
        frames,
        frame_length,
        hop,
        window,
        fs,
    })
}

pub fn frame_signal(
    rec: &Recording,
    frame_ms: f64,
    hop_ms: f64,
    window: Window,
) -> Result<FrameSequence> {
    if !(hop_ms > 0.0 && frame_ms >= hop_ms) {
        return Err(Error::InvalidParameter(format!(
            "need frame_ms >= hop_ms > 0, got {frame_ms}/{hop_ms}"
        )));
    }
    let fs = rec.fs as f64;
    let frame_length = (frame_ms * fs / 1000.0).round() as usize;
    let hop = ((hop_ms * fs / 1000.0).round() as usize).max(1);
    frame_samples(&rec.samples, rec.fs, frame_length, hop, window)
}

/// 25 ms Hann frames with a 10 ms hop.
pub fn default_frames(rec: &Recording) -> Result<FrameSequence> {
    frame_signal(rec, 25.0, 10.0, Window::Hann)
}
