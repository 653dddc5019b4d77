//! Formant tracking and vowel-space indices.

use serde::Serialize;
use std::f64::consts::PI;

use crate::audio::FrameSequence;
use crate::dsp;
use crate::error::{Error, Result};

pub const FORMANT_MIN_HZ: f64 = 90.0;
pub const FORMANT_MAX_HZ: f64 = 5500.0;
pub const FORMANT_MAX_BW_HZ: f64 = 600.0;

/// Per-frame resonances. Frames keep their slot even when they yield fewer
/// than three resonances; missing values are NaN.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FormantTrack {
    pub times: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
    pub bw1: Vec<f64>,
    pub bw2: Vec<f64>,
    pub bw3: Vec<f64>,
}

impl FormantTrack {
    pub fn len(&self) -> usize {
        self.f1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1.is_empty()
    }

    /// Median of the finite values of a track.
    pub fn median_of(track: &[f64]) -> Option<f64> {
        let v: Vec<f64> = track.iter().copied().filter(|x| x.is_finite()).collect();
        (!v.is_empty()).then(|| dsp::median(&v))
    }

    pub fn finite(track: &[f64]) -> Vec<f64> {
        track.iter().copied().filter(|x| x.is_finite()).collect()
    }
}

pub fn default_lpc_order(fs: u32) -> usize {
    let order = 2 + (fs as f64 / 1000.0).round() as usize;
    order + order % 2
}

/// Sorted `(frequency, bandwidth)` pairs of the admissible poles of one frame.
pub fn frame_resonances(frame: &[f64], fs: f64, order: usize) -> Vec<(f64, f64)> {
    let Some((a, _)) = dsp::lpc(frame, order) else {
        return Vec::new();
    };
    let mut out: Vec<(f64, f64)> = dsp::polynomial_roots(&a)
        .into_iter()
        .filter(|z| z.im > 0.0)
        .filter_map(|z| {
            let r = z.norm();
            if r <= 0.0 || r >= 1.0 {
                return None;
            }
            let f = z.arg() * fs / (2.0 * PI);
            let bw = -r.ln() * fs / PI;
            (f > FORMANT_MIN_HZ && f < FORMANT_MAX_HZ && bw > 0.0 && bw < FORMANT_MAX_BW_HZ)
                .then_some((f, bw))
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// All-pole formant tracking on the windowed frames. Frames with no valid
/// resonance are dropped; an error is returned only when no frame has any.
pub fn estimate_formants(frames: &FrameSequence, fs: f64, order: usize) -> Result<FormantTrack> {
    if order == 0 || order % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "LPC order {order} must be even"
        )));
    }
    let mut track = FormantTrack::default();
    for (i, frame) in frames.frames.iter().enumerate() {
        if dsp::energy(frame) <= 1e-12 {
            continue;
        }
        let res = frame_resonances(frame, fs, order);
        if res.is_empty() {
            continue;
        }
        let get = |k: usize| res.get(k).copied().unwrap_or((f64::NAN, f64::NAN));
        track.times.push(frames.center_time(i));
        track.f1.push(get(0).0);
        track.f2.push(get(1).0);
        track.f3.push(get(2).0);
        track.bw1.push(get(0).1);
        track.bw2.push(get(1).1);
        track.bw3.push(get(2).1);
    }
    if track.is_empty() {
        return Err(Error::NoResonances);
    }
    Ok(track)
}

/// Median `(F1, F2)` of one vowel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VowelFormants {
    pub f1: f64,
    pub f2: f64,
}

impl VowelFormants {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    pub fn from_track(track: &FormantTrack) -> Option<Self> {
        Some(Self {
            f1: FormantTrack::median_of(&track.f1)?,
            f2: FormantTrack::median_of(&track.f2)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VowelSpaceFeatures {
    pub vsa: f64,
    pub ln_vsa: f64,
    pub fcr: f64,
    pub vai: f64,
    pub f2i_f2u: f64,
}

/// Triangle area (Hz^2) spanned by the corner vowels in the F1/F2 plane.
pub fn vowel_space_area(a: VowelFormants, i: VowelFormants, u: VowelFormants) -> f64 {
    0.5 * (i.f1 * (a.f2 - u.f2) + a.f1 * (u.f2 - i.f2) + u.f1 * (i.f2 - a.f2)).abs()
}

pub fn vowel_space_features(
    a: VowelFormants,
    i: VowelFormants,
    u: VowelFormants,
) -> Result<VowelSpaceFeatures> {
    let all = [a.f1, a.f2, i.f1, i.f2, u.f1, u.f2];
    if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidParameter(
            "corner-vowel formants must be positive".into(),
        ));
    }
    let vsa = vowel_space_area(a, i, u);
    if vsa <= 0.0 {
        return Err(Error::Degenerate("vowel space area is zero".into()));
    }
    let fcr = (u.f2 + a.f2 + i.f1 + u.f1) / (i.f2 + a.f1);
    Ok(VowelSpaceFeatures {
        vsa,
        ln_vsa: vsa.ln(),
        fcr,
        vai: (i.f2 + a.f1) / (u.f2 + a.f2 + i.f1 + u.f1),
        f2i_f2u: i.f2 / u.f2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{frame_samples, Window};

    #[test]
    fn shoelace_example() {
        let a = VowelFormants::new(800.0, 1200.0);
        let i = VowelFormants::new(300.0, 2300.0);
        let u = VowelFormants::new(350.0, 800.0);
        let v = vowel_space_features(a, i, u).unwrap();
        assert_eq!(v.vsa, 347_500.0);
        assert!((v.fcr * v.vai - 1.0).abs() < 1e-12);
        assert!((v.f2i_f2u - 2300.0 / 800.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_corners() {
        let a = VowelFormants::new(500.0, 1200.0);
        let i = VowelFormants::new(500.0, 2300.0);
        let u = VowelFormants::new(500.0, 800.0);
        assert_eq!(vowel_space_area(a, i, u), 0.0);
        assert!(vowel_space_features(a, i, u).is_err());
    }

    #[test]
    fn non_positive_rejected() {
        let a = VowelFormants::new(0.0, 1200.0);
        let i = VowelFormants::new(300.0, 2300.0);
        let u = VowelFormants::new(350.0, 800.0);
        assert!(vowel_space_features(a, i, u).is_err());
    }

    #[test]
    fn dc_has_no_resonances() {
        let frames = frame_samples(&vec![0.5; 16_000], 16_000, 400, 160, Window::Hann).unwrap();
        assert!(matches!(
            estimate_formants(&frames, 16_000.0, 18),
            Err(Error::NoResonances)
        ));
    }

    #[test]
    fn order_default() {
        assert_eq!(default_lpc_order(16_000), 18);
        assert_eq!(default_lpc_order(10_000), 12);
    }
}
