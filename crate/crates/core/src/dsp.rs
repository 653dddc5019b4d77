//! Shared numeric and signal-processing helpers.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward FFT.
pub fn fft_in_place(buf: &mut [Complex64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(buf);
}

/// In-place inverse FFT, scaled by `1/n`.
pub fn ifft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    fft.process(buf);
    let scale = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
}

/// FFT of a real signal zero-padded (or truncated) to `n` points.
pub fn rfft(x: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().take(n).map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    fft_in_place(&mut buf);
    buf
}

/// Power spectrum `|X_k|^2` for bins `0..=n/2`.
pub fn power_spectrum(x: &[f64], n: usize) -> Vec<f64> {
    rfft(x, n)
        .into_iter()
        .take(n / 2 + 1)
        .map(|c| c.norm_sqr())
        .collect()
}

/// Symmetric Hann taper of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Symmetric Hamming taper of length `n`.
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

pub fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rms(x: &[f64]) -> f64 {
    (energy(x) / x.len().max(1) as f64).sqrt()
}

/// Percentile `p` in `[0, 100]` of already-sorted data, linear interpolation
/// between closest ranks (position `p/100 * (n-1)`).
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let pos = (p / 100.0).clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn sorted_copy(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(x: &[f64]) -> f64 {
    percentile_sorted(&sorted_copy(x), 50.0)
}

/// Teager-Kaiser energy operator `x[n]^2 - x[n-1] x[n+1]` for interior samples.
pub fn tkeo(x: &[f64]) -> Vec<f64> {
    if x.len() < 3 {
        return Vec::new();
    }
    x.windows(3).map(|w| w[1] * w[1] - w[0] * w[2]).collect()
}

/// Number of sign changes; zeros count with the sign of the previous sample.
pub fn zero_crossings(x: &[f64]) -> usize {
    let mut count = 0;
    let mut prev = match x.first() {
        Some(&v) => v >= 0.0,
        None => return 0,
    };
    for &v in &x[1..] {
        let cur = if v == 0.0 { prev } else { v > 0.0 };
        if cur != prev {
            count += 1;
        }
        prev = cur;
    }
    count
}

/// Biased autocorrelation `r[k] = sum x[n] x[n+k]` for `k = 0..=max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|k| {
            if k >= x.len() {
                0.0
            } else {
                x[..x.len() - k]
                    .iter()
                    .zip(&x[k..])
                    .map(|(a, b)| a * b)
                    .sum()
            }
        })
        .collect()
}

/// Levinson-Durbin recursion. Returns the prediction polynomial
/// `[1, a1, ..., ap]` (so that `e[n] = sum a_k x[n-k]`) and the final error.
/// Returns `None` when the autocorrelation is degenerate.
pub fn levinson(r: &[f64], order: usize) -> Option<(Vec<f64>, f64)> {
    if r.len() <= order || r[0] <= 0.0 || !r[0].is_finite() {
        return None;
    }
    let mut a = vec![0.0; order + 1];
    a[0] = 1.0;
    let mut err = r[0];
    for i in 1..=order {
        let mut acc = r[i];
        for j in 1..i {
            acc += a[j] * r[i - j];
        }
        let k = -acc / err;
        let prev = a.clone();
        for j in 1..i {
            a[j] = prev[j] + k * prev[i - j];
        }
        a[i] = k;
        err *= 1.0 - k * k;
        if err <= 0.0 || !err.is_finite() {
            return None;
        }
    }
    Some((a, err))
}

/// Autocorrelation-method LPC of `order` on a frame.
pub fn lpc(frame: &[f64], order: usize) -> Option<(Vec<f64>, f64)> {
    let r = autocorrelation(frame, order);
    levinson(&r, order)
}

/// Roots of `c[0] z^n + c[1] z^{n-1} + ... + c[n]` via companion-matrix eigenvalues.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let lead = coeffs.iter().position(|c| *c != 0.0);
    let Some(lead) = lead else {
        return Vec::new();
    };
    let c = &coeffs[lead..];
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re, z.im))
        .collect()
}

/// Welch power spectral density (one-sided, Hann segments, 50 % overlap).
/// Returns `(frequencies, psd)`.
pub fn welch_psd(x: &[f64], fs: f64, segment: usize) -> (Vec<f64>, Vec<f64>) {
    let seg = segment.min(x.len()).max(2);
    let hop = (seg / 2).max(1);
    let win = hann(seg);
    let u: f64 = win.iter().map(|w| w * w).sum();
    let nbins = seg / 2 + 1;
    let mut acc = vec![0.0; nbins];
    let mut count = 0usize;
    let mut start = 0;
    while start + seg <= x.len() {
        let frame: Vec<f64> = x[start..start + seg]
            .iter()
            .zip(&win)
            .map(|(a, w)| a * w)
            .collect();
        for (a, p) in acc.iter_mut().zip(power_spectrum(&frame, seg)) {
            *a += p;
        }
        count += 1;
        start += hop;
    }
    let scale = 1.0 / (fs * u * count.max(1) as f64);
    let psd: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || (seg % 2 == 0 && k == nbins - 1) {
                1.0
            } else {
                2.0
            };
            a * scale * one_sided
        })
        .collect();
    let freqs = (0..nbins).map(|k| k as f64 * fs / seg as f64).collect();
    (freqs, psd)
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Wraps a phase difference into `(-pi, pi]`.
pub fn wrap_phase(p: f64) -> f64 {
    let mut v = (p + PI).rem_euclid(2.0 * PI) - PI;
    if v <= -PI {
        v += 2.0 * PI;
    }
    v
}

/// Parabolic interpolation of a peak at `i` from its neighbours; returns
/// `(offset in [-0.5, 0.5], interpolated value)`.
pub fn parabolic_peak(ym1: f64, y0: f64, yp1: f64) -> (f64, f64) {
    let denom = ym1 - 2.0 * y0 + yp1;
    if denom.abs() < 1e-300 {
        return (0.0, y0);
    }
    let delta = (0.5 * (ym1 - yp1) / denom).clamp(-0.5, 0.5);
    (delta, y0 - 0.25 * (ym1 - yp1) * delta)
}

/// Normalized autocorrelation between `x[0..len-lag]` and `x[lag..len]`.
pub fn normalized_lag_correlation(x: &[f64], lag: usize) -> f64 {
    if lag >= x.len() {
        return 0.0;
    }
    let a = &x[..x.len() - lag];
    let b = &x[lag..];
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for (p, q) in a.iter().zip(b) {
        ab += p * q;
        aa += p * p;
        bb += q * q;
    }
    let den = (aa * bb).sqrt();
    if den <= 0.0 {
        0.0
    } else {
        ab / den
    }
}

/// Shannon entropy (nats) of a histogram of counts.
pub fn shannon_entropy_counts(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.ln()
        })
        .sum()
}

/// Second-order Renyi entropy (nats) of a histogram of counts.
pub fn renyi2_entropy_counts(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let s: f64 = counts.iter().map(|&c| (c / total) * (c / total)).sum();
    -s.ln()
}

/// Equal-width histogram over the observed range of `x`.
pub fn histogram(x: &[f64], bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins.max(1)];
    if x.is_empty() {
        return counts;
    }
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    for &v in x {
        let idx = if width > 0.0 {
            (((v - lo) / width) * bins as f64).floor() as usize
        } else {
            0
        };
        counts[idx.min(bins - 1)] += 1.0;
    }
    counts
}
