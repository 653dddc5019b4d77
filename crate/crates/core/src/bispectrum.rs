//! Direct bispectrum estimation and bispectral/bicepstral features.
//!
//! Frames are transformed with an FFT long enough to hold them (at least
//! twice the grid size) and sampled on a `grid x grid` lattice of evenly
//! spaced bins up to Nyquist. Features use the principal triangle
//! `1 <= k2 <= k1, k1 + k2 < grid`; low/high bands split at a quarter of
//! the grid.

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::audio::FrameSequence;
use crate::dsp;
use crate::error::{Error, Result};

pub const GRID: usize = 128;
pub const BLOCK_FRAMES: usize = 8;
pub const LOG_FLOOR: f64 = 1e-12;
const RATIO_FLOOR: f64 = 1e-12;

/// Averaged third-order statistics over a set of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct BispectrumBlock {
    /// Row-major `grid x grid` mean bispectrum `E[X(k1) X(k2) X*(k1+k2)]`.
    pub grid: Vec<Complex64>,
    /// Kim-Powers bicoherence magnitude in `[0, 1]`.
    pub bicoherence: Vec<f64>,
    /// Mean power per grid bin.
    pub spectrum: Vec<f64>,
    pub frames: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BispectrumEstimate {
    pub size: usize,
    /// Hz per grid bin.
    pub resolution: f64,
    pub total: BispectrumBlock,
    /// Consecutive blocks of `BLOCK_FRAMES` frames.
    pub blocks: Vec<BispectrumBlock>,
}

impl BispectrumEstimate {
    pub fn grid(&self) -> &[Complex64] {
        &self.total.grid
    }

    pub fn bicoherence(&self) -> &[f64] {
        &self.total.bicoherence
    }

    pub fn at(&self, k1: usize, k2: usize) -> Complex64 {
        self.total.grid[k1 * self.size + k2]
    }
}

struct Accumulator {
    size: usize,
    b: Vec<Complex64>,
    pair: Vec<f64>,
    third: Vec<f64>,
    power: Vec<f64>,
    frames: usize,
}

impl Accumulator {
    fn new(size: usize) -> Self {
        Self {
            size,
            b: vec![Complex64::new(0.0, 0.0); size * size],
            pair: vec![0.0; size * size],
            third: vec![0.0; size * size],
            power: vec![0.0; size],
            frames: 0,
        }
    }

    /// `x` holds spectrum samples at grid spacing, length `2 * size`.
    fn add(&mut self, x: &[Complex64]) {
        let g = self.size;
        for k1 in 0..g {
            self.power[k1] += x[k1].norm_sqr();
            for k2 in 0..g {
                let p = x[k1] * x[k2];
                let s = x[k1 + k2];
                let idx = k1 * g + k2;
                self.b[idx] += p * s.conj();
                self.pair[idx] += p.norm_sqr();
                self.third[idx] += s.norm_sqr();
            }
        }
        self.frames += 1;
    }

    fn merge(&mut self, other: &Accumulator) {
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            *a += b;
        }
        for (a, b) in self.pair.iter_mut().zip(&other.pair) {
            *a += b;
        }
        for (a, b) in self.third.iter_mut().zip(&other.third) {
            *a += b;
        }
        for (a, b) in self.power.iter_mut().zip(&other.power) {
            *a += b;
        }
        self.frames += other.frames;
    }

    fn finish(&self) -> BispectrumBlock {
        let n = self.frames.max(1) as f64;
        let bicoherence = self
            .b
            .iter()
            .zip(self.pair.iter().zip(&self.third))
            .map(|(b, (p, t))| {
                let den = p * t;
                if den > 0.0 {
                    (b.norm_sqr() / den).sqrt().min(1.0)
                } else {
                    0.0
                }
            })
            .collect();
        BispectrumBlock {
            grid: self.b.iter().map(|b| b / n).collect(),
            bicoherence,
            spectrum: self.power.iter().map(|p| p / n).collect(),
            frames: self.frames,
        }
    }
}

pub fn estimate_bispectrum(frames: &FrameSequence) -> Result<BispectrumEstimate> {
    estimate_bispectrum_with(frames, GRID, BLOCK_FRAMES)
}

pub fn estimate_bispectrum_with(
    frames: &FrameSequence,
    size: usize,
    block_frames: usize,
) -> Result<BispectrumEstimate> {
    if frames.len() < 8 {
        return Err(Error::SignalTooShort {
            needed: 8,
            got: frames.len(),
        });
    }
    if size < 4 || block_frames == 0 {
        return Err(Error::InvalidParameter("bispectrum grid too small".into()));
    }
    let nfft = frames.frame_length.max(2 * size).next_power_of_two();
    // nfft is a power of two >= 2 * size, so the stride is exact.
    let stride = nfft / (2 * size);
    let mut total = Accumulator::new(size);
    let mut blocks = Vec::new();
    let mut current = Accumulator::new(size);
    for frame in &frames.frames {
        let spec = dsp::rfft(frame, nfft);
        let mut x: Vec<Complex64> = (0..2 * size)
            .map(|k| spec_at(&spec, nfft, k * stride))
            .collect();
        x.truncate(2 * size);
        current.add(&x);
        if current.frames == block_frames {
            total.merge(&current);
            blocks.push(current.finish());
            current = Accumulator::new(size);
        }
    }
    if current.frames > 0 {
        total.merge(&current);
    }
    Ok(BispectrumEstimate {
        size,
        resolution: frames.fs as f64 / (2 * size) as f64,
        total: total.finish(),
        blocks,
    })
}

/// Full-length spectrum value from the one-sided FFT (Hermitian symmetry).
fn spec_at(one_sided: &[Complex64], nfft: usize, k: usize) -> Complex64 {
    let k = k % nfft;
    if k <= nfft / 2 {
        one_sided[k]
    } else {
        one_sided[nfft - k].conj()
    }
}

/// Indices of the principal triangle.
pub fn principal_triangle(size: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..size).flat_map(move |k1| {
        (1..=k1)
            .filter(move |k2| k1 + k2 < size)
            .map(move |k2| (k1, k2))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BispectralFeatures {
    pub bii: f64,
    pub hfeb: f64,
    pub lfeb: f64,
    pub bmii: f64,
    pub bpii: f64,
    pub lsber: f64,
    pub hsber: f64,
}

fn floor_div(a: f64, b: f64) -> f64 {
    a / b.max(RATIO_FLOOR)
}

/// Share of the `values` sum falling into the low band.
fn split(values: impl Iterator<Item = (bool, f64)>) -> (f64, f64) {
    let (mut low, mut high) = (0.0, 0.0);
    for (is_low, v) in values {
        if is_low {
            low += v;
        } else {
            high += v;
        }
    }
    (low, high)
}

/// Interference indices and band energies of one bispectrum block.
///
/// * `bii` mean bicoherence over the principal triangle
/// * `lfeb`, `hfeb` summed squared bicoherence with `k1` below/above the split
/// * `bmii` mean over peak of `|B|`
/// * `bpii` one minus the phase coherence `|mean(e^{j arg B})|`
/// * `lsber`, `hsber` band share of spectral power over band share of `|B|`
pub fn bispectral_features(block: &BispectrumBlock, spectrum: &[f64]) -> BispectralFeatures {
    let size = spectrum.len();
    let cut = size / 4;
    let tri: Vec<(usize, usize)> = principal_triangle(size).collect();
    let bic: Vec<f64> = tri
        .iter()
        .map(|&(a, b)| block.bicoherence[a * size + b])
        .collect();
    let mag: Vec<f64> = tri
        .iter()
        .map(|&(a, b)| block.grid[a * size + b].norm())
        .collect();
    let (lfeb, hfeb) = split(tri.iter().zip(&bic).map(|(&(k1, _), v)| (k1 < cut, v * v)));
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    let mut phasor = Complex64::new(0.0, 0.0);
    let mut nonzero = 0usize;
    for &(a, b) in &tri {
        let z = block.grid[a * size + b];
        if z.norm() > 0.0 {
            phasor += z / z.norm();
            nonzero += 1;
        }
    }
    let bpii = if nonzero > 0 {
        1.0 - phasor.norm() / nonzero as f64
    } else {
        0.0
    };
    let (bl, bh) = split(tri.iter().zip(&mag).map(|(&(k1, _), v)| (k1 < cut, *v)));
    let (sl, sh) = split(
        spectrum
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, p)| (k < cut, *p)),
    );
    let (bt, st) = (bl + bh, sl + sh);
    BispectralFeatures {
        bii: dsp::mean(&bic),
        hfeb,
        lfeb,
        bmii: if peak > 0.0 {
            dsp::mean(&mag) / peak
        } else {
            0.0
        },
        bpii,
        lsber: floor_div(floor_div(sl, st), floor_div(bl, bt)),
        hsber: floor_div(floor_div(sh, st), floor_div(bh, bt)),
    }
}

/// 2-D inverse FFT of the complex log bispectrum (magnitude floored).
pub fn bicepstrum(grid: &[Complex64], size: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = grid
        .iter()
        .map(|z| Complex64::new(z.norm().max(LOG_FLOOR).ln(), z.arg()))
        .collect();
    for row in buf.chunks_mut(size) {
        dsp::ifft_in_place(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); size];
    for j in 0..size {
        for i in 0..size {
            col[i] = buf[i * size + j];
        }
        dsp::ifft_in_place(&mut col);
        for i in 0..size {
            buf[i * size + j] = col[i];
        }
    }
    buf
}

/// Quefrency cells used by the bicepstral features: `0 <= n <= m < size/2`
/// without the origin. Low quefrencies have `m` below an eighth of `size`.
pub fn quefrency_triangle(size: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..size / 2)
        .flat_map(|m| (0..=m).map(move |n| (m, n)))
        .filter(|&(m, n)| m + n > 0)
}

/// Real cepstrum of a one-sided power spectrum laid out on `size` bins.
fn spectrum_cepstrum(spectrum: &[f64]) -> Vec<f64> {
    let size = spectrum.len();
    let n = 2 * size;
    let mut buf: Vec<Complex64> = (0..n)
        .map(|k| {
            let bin = if k < size {
                k
            } else if k == size {
                size - 1
            } else {
                n - k
            };
            Complex64::new(spectrum[bin].max(LOG_FLOOR).ln(), 0.0)
        })
        .collect();
    dsp::ifft_in_place(&mut buf);
    buf.iter().take(size).map(|z| z.re).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BicepstralFeatures {
    pub bcii: f64,
    pub hfebc: f64,
    pub lfebc: f64,
    pub cmii: f64,
    pub bcpii: f64,
    pub lcbcer: f64,
    pub hcbcer: f64,
    pub bcmd: f64,
    pub bcpd: f64,
}

/// Bicepstral counterparts of the bispectral indices, plus module and phase
/// distances between the bicepstra of consecutive blocks.
///
/// * `bcii` mean `|c|`; `lfebc`, `hfebc` summed `|c|^2` per quefrency band
/// * `cmii` mean over peak of `|c|`; `bcpii` one minus phase coherence
/// * `lcbcer`, `hcbcer` band share of the squared 1-D cepstrum over band
///   share of `|c|^2`
/// * `bcmd` mean over block pairs of the RMS difference of `|c|`
/// * `bcpd` mean over block pairs of the mean absolute wrapped phase change
pub fn bicepstral_features(b: &BispectrumEstimate) -> BicepstralFeatures {
    let mut f = bicepstral_block(&b.total, b.size);
    let (md, pd) = bicepstral_distances(b);
    f.bcmd = dsp::mean(&md);
    f.bcpd = dsp::mean(&pd);
    f
}

/// Module and phase distances between the bicepstra of each pair of
/// consecutive blocks.
pub fn bicepstral_distances(b: &BispectrumEstimate) -> (Vec<f64>, Vec<f64>) {
    let size = b.size;
    let cells: Vec<(usize, usize)> = quefrency_triangle(size).collect();
    let cepstra: Vec<Vec<Complex64>> = b
        .blocks
        .iter()
        .map(|blk| bicepstrum(&blk.grid, size))
        .collect();
    let (mut md, mut pd) = (Vec::new(), Vec::new());
    for w in cepstra.windows(2) {
        let (mut sq, mut ph) = (0.0, 0.0);
        for &(m, n) in &cells {
            let (p, q) = (w[0][m * size + n], w[1][m * size + n]);
            let d = p.norm() - q.norm();
            sq += d * d;
            ph += dsp::wrap_phase(p.arg() - q.arg()).abs();
        }
        md.push((sq / cells.len() as f64).sqrt());
        pd.push(ph / cells.len() as f64);
    }
    (md, pd)
}

/// Bicepstral features of a single block (distances set to zero).
pub fn bicepstral_block(block: &BispectrumBlock, size: usize) -> BicepstralFeatures {
    let c = bicepstrum(&block.grid, size);
    let cut = (size / 8).max(1);
    let cells: Vec<(usize, usize)> = quefrency_triangle(size).collect();
    let mag: Vec<f64> = cells.iter().map(|&(m, n)| c[m * size + n].norm()).collect();
    let (lfebc, hfebc) = split(cells.iter().zip(&mag).map(|(&(m, _), v)| (m < cut, v * v)));
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    let mut phasor = Complex64::new(0.0, 0.0);
    let mut nonzero = 0usize;
    for &(m, n) in &cells {
        let z = c[m * size + n];
        if z.norm() > 0.0 {
            phasor += z / z.norm();
            nonzero += 1;
        }
    }
    let cep = spectrum_cepstrum(&block.spectrum);
    let (cl, ch) = split(
        cep.iter()
            .enumerate()
            .skip(1)
            .take(size / 2 - 1)
            .map(|(q, v)| (q < cut, v * v)),
    );
    let (ct, bt) = (cl + ch, lfebc + hfebc);
    BicepstralFeatures {
        bcii: dsp::mean(&mag),
        hfebc,
        lfebc,
        cmii: if peak > 0.0 {
            dsp::mean(&mag) / peak
        } else {
            0.0
        },
        bcpii: if nonzero > 0 {
            1.0 - phasor.norm() / nonzero as f64
        } else {
            0.0
        },
        lcbcer: floor_div(floor_div(cl, ct), floor_div(lfebc, bt)),
        hcbcer: floor_div(floor_div(ch, ct), floor_div(hfebc, bt)),
        bcmd: 0.0,
        bcpd: 0.0,
    }
}
