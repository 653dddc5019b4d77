//! Nonlinear-dynamics and entropy measures over delay embeddings.

use serde::Serialize;

use crate::audio::Recording;
use crate::dsp;
use crate::error::{Error, Result};

pub const MI_BINS: usize = 16;
pub const EMBEDDING_DIMENSION: usize = 3;
pub const HISTOGRAM_BINS: usize = 64;
pub const CD_MAX_POINTS: usize = 1000;
pub const LLE_MAX_POINTS: usize = 2000;
pub const ENTROPY_MAX_SAMPLES: usize = 2000;
pub const LZ_MAX_SAMPLES: usize = 10_000;
pub const HIGUCHI_KMAX: usize = 10;
pub const RBE_LEVELS: usize = 4;
pub const RBE_BLOCK: usize = 3;
pub const PE_ORDER: usize = 3;

/// Grid offsets, in fractions of a bin, averaged by [`mutual_information`].
pub const MI_GRID_SHIFTS: usize = 8;

/// Mutual information (nats) between `x[n]` and `x[n + lag]`, averaged over
/// `MI_GRID_SHIFTS` equal-width binnings offset by fractions of a bin. The
/// averaging suppresses the bin-edge aliasing that makes single-grid
/// estimates on periodic signals jagged.
pub fn mutual_information(x: &[f64], lag: usize, bins: usize) -> f64 {
    if lag >= x.len() || bins == 0 {
        return 0.0;
    }
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return 0.0;
    }
    let width = (hi - lo) / bins as f64;
    let nb = bins + 1;
    let n = x.len() - lag;
    let nf = n as f64;
    let mut total = 0.0;
    for s in 0..MI_GRID_SHIFTS {
        let origin = lo - width * s as f64 / MI_GRID_SHIFTS as f64;
        let bin = |v: f64| (((v - origin) / width) as usize).min(nb - 1);
        let mut joint = vec![0.0; nb * nb];
        let mut pa = vec![0.0; nb];
        let mut pb = vec![0.0; nb];
        for i in 0..n {
            let (a, b) = (bin(x[i]), bin(x[i + lag]));
            joint[a * nb + b] += 1.0;
            pa[a] += 1.0;
            pb[b] += 1.0;
        }
        for a in 0..nb {
            for b in 0..nb {
                let j = joint[a * nb + b];
                if j > 0.0 {
                    total += j / nf * (j * nf / (pa[a] * pb[b])).ln();
                }
            }
        }
    }
    (total / MI_GRID_SHIFTS as f64).max(0.0)
}

/// Embedding delay from the first minimum of the mutual information.
///
/// The minimum must be followed by a rise of at least a tenth of the descent
/// from lag 0; within that stretch the delay is the centre of the lags lying
/// within 1% of the descent above the minimum. When the information at lag 1
/// is already below a tenth of the signal entropy the delay is 1. Without a
/// qualifying minimum the first autocorrelation zero is used, and 1 if there
/// is none.
pub fn fmmi(x: &[f64], max_lag: usize) -> usize {
    let max_lag = max_lag.min(x.len() / 2).max(1);
    let entropy = dsp::shannon_entropy_counts(&dsp::histogram(x, MI_BINS));
    if entropy <= 0.0 {
        return 1;
    }
    let mi: Vec<f64> = (0..=max_lag)
        .map(|l| mutual_information(x, l, MI_BINS))
        .collect();
    if mi[1] < 0.1 * entropy {
        return 1;
    }
    let mut best = 1;
    for l in 1..=max_lag {
        if mi[l] < mi[best] {
            best = l;
        }
        let descent = mi[0] - mi[best];
        if descent > 0.0 && mi[l] > mi[best] + 0.1 * descent {
            let tol = 0.01 * descent;
            let near: Vec<usize> = (1..l).filter(|&k| mi[k] <= mi[best] + tol).collect();
            return (near[0] + near[near.len() - 1]) / 2;
        }
    }
    let m = dsp::mean(x);
    let centred: Vec<f64> = x.iter().map(|v| v - m).collect();
    let r = dsp::autocorrelation(&centred, max_lag);
    (1..r.len()).find(|&l| r[l] <= 0.0).unwrap_or(1)
}

pub fn fmmi_of(rec: &Recording, max_lag: usize) -> usize {
    fmmi(&rec.samples, max_lag)
}

/// Delay-coordinate vectors stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub dimension: usize,
    pub delay: usize,
    pub points: Vec<f64>,
}

impl Embedding {
    pub fn new(x: &[f64], dimension: usize, delay: usize) -> Result<Self> {
        if dimension == 0 || delay == 0 {
            return Err(Error::InvalidParameter(
                "embedding dimension and delay must be positive".into(),
            ));
        }
        let span = (dimension - 1) * delay;
        if x.len() <= span {
            return Err(Error::SignalTooShort {
                needed: span + 1,
                got: x.len(),
            });
        }
        let n = x.len() - span;
        let mut points = Vec::with_capacity(n * dimension);
        for i in 0..n {
            for d in 0..dimension {
                points.push(x[i + d * delay]);
            }
        }
        Ok(Self {
            dimension,
            delay,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Every `step`-th point, keeping at most `max` points.
    fn thinned(&self, max: usize) -> (Vec<&[f64]>, usize) {
        let step = self.len().div_ceil(max).max(1);
        (
            (0..self.len())
                .step_by(step)
                .map(|i| self.point(i))
                .collect(),
            step,
        )
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexityFeatures {
    pub cd: f64,
    pub fd: f64,
    pub zl: f64,
    pub he: f64,
    pub lle: f64,
}

pub fn complexity_features(emb: &Embedding, rec: &Recording) -> Result<ComplexityFeatures> {
    if emb.len() < 100 {
        return Err(Error::SignalTooShort {
            needed: 100,
            got: emb.len(),
        });
    }
    Ok(ComplexityFeatures {
        cd: correlation_dimension(emb),
        fd: higuchi_fd(&rec.samples, HIGUCHI_KMAX),
        zl: lempel_ziv(&rec.samples[..rec.samples.len().min(LZ_MAX_SAMPLES)]),
        he: hurst_rs(&rec.samples),
        lle: largest_lyapunov(emb),
    })
}

/// Grassberger-Procaccia slope of `ln C(r)` against `ln r` for radii
/// between the 5th and 50th percentiles of pair distances, excluding
/// temporally adjacent pairs.
pub fn correlation_dimension(emb: &Embedding) -> f64 {
    let (pts, step) = emb.thinned(CD_MAX_POINTS);
    let theiler = emb.delay.div_ceil(step);
    let mut d = Vec::with_capacity(pts.len() * pts.len() / 2);
    for i in 0..pts.len() {
        for j in i + 1 + theiler..pts.len() {
            d.push(euclidean(pts[i], pts[j]));
        }
    }
    if d.len() < 10 {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let r_lo = dsp::percentile_sorted(&d, 5.0);
    let r_hi = dsp::percentile_sorted(&d, 50.0);
    if !(r_lo > 0.0 && r_hi > r_lo) {
        return 0.0;
    }
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for s in 0..10 {
        let r = r_lo * (r_hi / r_lo).powf(s as f64 / 9.0);
        let c = d.partition_point(|&v| v < r) as f64 / d.len() as f64;
        if c > 0.0 {
            lx.push(r.ln());
            ly.push(c.ln());
        }
    }
    if lx.len() < 2 {
        return 0.0;
    }
    dsp::linear_fit(&lx, &ly).0
}

/// Higuchi fractal dimension with `k = 1..=kmax`.
pub fn higuchi_fd(x: &[f64], kmax: usize) -> f64 {
    let n = x.len();
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for k in 1..=kmax {
        let mut lk = 0.0;
        let mut count = 0usize;
        for m in 0..k {
            let steps = (n - 1 - m) / k;
            if steps == 0 {
                continue;
            }
            let mut len = 0.0;
            for i in 1..=steps {
                len += (x[m + i * k] - x[m + (i - 1) * k]).abs();
            }
            lk += len * (n - 1) as f64 / (steps * k) as f64 / k as f64;
            count += 1;
        }
        if count == 0 {
            continue;
        }
        let lk = lk / count as f64;
        if lk > 0.0 {
            lx.push((1.0 / k as f64).ln());
            ly.push(lk.ln());
        }
    }
    if lx.len() < 2 {
        return 0.0;
    }
    dsp::linear_fit(&lx, &ly).0
}

/// Number of phrases in the Lempel-Ziv (1976) parse of a symbol string.
pub fn lz76_phrases(s: &[u8]) -> usize {
    let n = s.len();
    if n < 2 {
        return n;
    }
    let (mut c, mut l, mut i, mut k, mut k_max) = (1usize, 1usize, 0usize, 1usize, 1usize);
    loop {
        if s[i + k - 1] == s[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

/// Normalized LZ complexity `c log2(n) / n` of the median-binarized signal.
pub fn lempel_ziv(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let med = dsp::median(x);
    let s: Vec<u8> = x.iter().map(|&v| u8::from(v > med)).collect();
    lz76_phrases(&s) as f64 * (n as f64).log2() / n as f64
}

/// Rescaled-range Hurst exponent over dyadic window sizes from 16.
pub fn hurst_rs(x: &[f64]) -> f64 {
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    let mut w = 16;
    while w <= x.len() / 2 {
        let mut rs = Vec::new();
        for chunk in x.chunks_exact(w) {
            let m = dsp::mean(chunk);
            let mut cum = 0.0;
            let (mut lo, mut hi) = (0.0f64, 0.0f64);
            for v in chunk {
                cum += v - m;
                lo = lo.min(cum);
                hi = hi.max(cum);
            }
            let s = dsp::std_dev(chunk);
            if s > 0.0 {
                rs.push((hi - lo) / s);
            }
        }
        if !rs.is_empty() {
            lx.push((w as f64).ln());
            ly.push(dsp::mean(&rs).ln());
        }
        w *= 2;
    }
    if lx.len() < 2 {
        return 0.5;
    }
    dsp::linear_fit(&lx, &ly).0
}

/// Rosenstein estimate (nats per sample): mean log divergence of nearest
/// neighbours over 20 steps, neighbours closer in time than the Theiler
/// window excluded.
pub fn largest_lyapunov(emb: &Embedding) -> f64 {
    let n = emb.len().min(LLE_MAX_POINTS);
    let horizon = 20usize;
    if n <= horizon + 2 {
        return 0.0;
    }
    let theiler = (emb.dimension * emb.delay).max(10);
    let usable = n - horizon;
    let mut sums = vec![0.0; horizon + 1];
    let mut counts = vec![0usize; horizon + 1];
    for i in 0..usable {
        let mut best = f64::INFINITY;
        let mut nn = None;
        for j in 0..usable {
            if i.abs_diff(j) <= theiler {
                continue;
            }
            let d = euclidean(emb.point(i), emb.point(j));
            if d > 0.0 && d < best {
                best = d;
                nn = Some(j);
            }
        }
        let Some(j) = nn else { continue };
        for k in 0..=horizon {
            let d = euclidean(emb.point(i + k), emb.point(j + k));
            if d > 0.0 {
                sums[k] += d.ln();
                counts[k] += 1;
            }
        }
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in 0..=horizon {
        if counts[k] > 0 {
            xs.push(k as f64);
            ys.push(sums[k] / counts[k] as f64);
        }
    }
    if xs.len() < 2 {
        return 0.0;
    }
    dsp::linear_fit(&xs, &ys).0
}

/// Kernels for the generalized sample entropy, as functions of `u = d / r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Kernel {
    Heaviside,
    Gaussian,
    Exponential,
    Logistic,
    Bell,
    Triangular,
    Epanechnikov,
    Cosine,
}

impl Kernel {
    pub const ALL: [Kernel; 8] = [
        Kernel::Heaviside,
        Kernel::Gaussian,
        Kernel::Exponential,
        Kernel::Logistic,
        Kernel::Bell,
        Kernel::Triangular,
        Kernel::Epanechnikov,
        Kernel::Cosine,
    ];

    pub fn weight(self, u: f64) -> f64 {
        match self {
            Kernel::Heaviside => f64::from(u <= 1.0),
            Kernel::Gaussian => (-0.5 * u * u).exp(),
            Kernel::Exponential => (-u).exp(),
            Kernel::Logistic => 1.0 / (1.0 + (10.0 * (u - 1.0)).exp()),
            Kernel::Bell => 1.0 / (1.0 + u.powi(4)),
            Kernel::Triangular => (1.0 - u).max(0.0),
            Kernel::Epanechnikov => (1.0 - u * u).max(0.0),
            Kernel::Cosine => {
                if u <= 1.0 {
                    (0.5 * std::f64::consts::PI * u).cos()
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyFeatures {
    pub she: f64,
    pub re: f64,
    pub ce: f64,
    pub rbe1: f64,
    pub rbe2: f64,
    pub ae: f64,
    /// Sample entropy per kernel, in `Kernel::ALL` order.
    pub se: [f64; 8],
    pub pe: f64,
}

/// Centre segment of at most `max` samples.
fn centre(x: &[f64], max: usize) -> &[f64] {
    if x.len() <= max {
        return x;
    }
    let start = (x.len() - max) / 2;
    &x[start..start + max]
}

pub fn entropy_features(rec: &Recording, emb: &Embedding) -> Result<EntropyFeatures> {
    let x = &rec.samples;
    if x.len() < 500 {
        return Err(Error::SignalTooShort {
            needed: 500,
            got: x.len(),
        });
    }
    let seg = centre(x, ENTROPY_MAX_SAMPLES);
    let counts = dsp::histogram(x, HISTOGRAM_BINS);
    let (rbe1, rbe2) = block_entropies(x, RBE_LEVELS, RBE_BLOCK);
    let mut se = [0.0; 8];
    for (slot, k) in se.iter_mut().zip(Kernel::ALL) {
        *slot = sample_entropy(seg, 2, 0.2, k);
    }
    Ok(EntropyFeatures {
        she: dsp::shannon_entropy_counts(&counts),
        re: dsp::renyi2_entropy_counts(&counts),
        ce: correlation_entropy(seg, emb.dimension, emb.delay, 0.2),
        rbe1,
        rbe2,
        ae: approximate_entropy(seg, 2, 0.2),
        se,
        pe: permutation_entropy(x, PE_ORDER),
    })
}

fn chebyshev_templates(x: &[f64], m: usize, delay: usize, i: usize, j: usize) -> f64 {
    (0..m)
        .map(|k| (x[i + k * delay] - x[j + k * delay]).abs())
        .fold(0.0, f64::max)
}

/// Pincus approximate entropy with tolerance `r_factor * std`.
pub fn approximate_entropy(x: &[f64], m: usize, r_factor: f64) -> f64 {
    let sd = dsp::std_dev(x);
    if sd == 0.0 || x.len() <= m + 1 {
        return 0.0;
    }
    let r = r_factor * sd;
    let phi = |mm: usize| -> f64 {
        let n = x.len() - mm + 1;
        let mut total = 0.0;
        for i in 0..n {
            let c = (0..n)
                .filter(|&j| chebyshev_templates(x, mm, 1, i, j) <= r)
                .count();
            total += (c as f64 / n as f64).ln();
        }
        total / n as f64
    };
    (phi(m) - phi(m + 1)).max(0.0)
}

/// Sample entropy `-ln(A / B)` where `B` and `A` sum kernel weights of
/// Chebyshev distances between distinct templates of length `m` and `m+1`
/// (the same `N - m` templates in both). Returns the largest attainable
/// value `ln(pairs)` when `A` vanishes.
pub fn sample_entropy(x: &[f64], m: usize, r_factor: f64, kernel: Kernel) -> f64 {
    let sd = dsp::std_dev(x);
    if sd == 0.0 || x.len() <= m + 2 {
        return 0.0;
    }
    let r = r_factor * sd;
    let n = x.len() - m;
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            let dm = chebyshev_templates(x, m, 1, i, j);
            let dm1 = dm.max((x[i + m] - x[j + m]).abs());
            b += kernel.weight(dm / r);
            a += kernel.weight(dm1 / r);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    if a <= 0.0 || b <= 0.0 {
        return pairs.ln();
    }
    -(a / b).ln()
}

/// `ln(C_m / C_{m+1})` with correlation sums at tolerance `r_factor * std`.
pub fn correlation_entropy(x: &[f64], m: usize, delay: usize, r_factor: f64) -> f64 {
    let sd = dsp::std_dev(x);
    let span = m * delay;
    if sd == 0.0 || x.len() <= span + 1 {
        return 0.0;
    }
    let r = r_factor * sd;
    let n = x.len() - span;
    let (mut cm, mut cm1) = (0usize, 0usize);
    for i in 0..n {
        for j in i + 1..n {
            let d = chebyshev_templates(x, m, delay, i, j);
            if d <= r {
                cm += 1;
                if (x[i + span] - x[j + span]).abs() <= r {
                    cm1 += 1;
                }
            }
        }
    }
    if cm == 0 || cm1 == 0 {
        return 0.0;
    }
    (cm as f64 / cm1 as f64).ln()
}

/// Shannon and order-2 Renyi entropies (nats per symbol) of non-overlapping
/// blocks of `block` symbols after `levels`-level equal-width quantization.
pub fn block_entropies(x: &[f64], levels: usize, block: usize) -> (f64, f64) {
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let symbol = |v: f64| -> usize {
        if hi > lo {
            (((v - lo) / (hi - lo) * levels as f64) as usize).min(levels - 1)
        } else {
            0
        }
    };
    let words = levels.pow(block as u32);
    let mut counts = vec![0.0; words];
    for chunk in x.chunks_exact(block) {
        let code = chunk
            .iter()
            .fold(0usize, |acc, &v| acc * levels + symbol(v));
        counts[code] += 1.0;
    }
    (
        dsp::shannon_entropy_counts(&counts) / block as f64,
        dsp::renyi2_entropy_counts(&counts) / block as f64,
    )
}

/// Permutation entropy (nats) of ordinal patterns; ties keep sample order.
pub fn permutation_entropy(x: &[f64], order: usize) -> f64 {
    if x.len() < order || order < 2 {
        return 0.0;
    }
    let mut counts = std::collections::BTreeMap::<Vec<usize>, f64>::new();
    for w in x.windows(order) {
        let mut idx: Vec<usize> = (0..order).collect();
        idx.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
        *counts.entry(idx).or_insert(0.0) += 1.0;
    }
    let c: Vec<f64> = counts.into_values().collect();
    dsp::shannon_entropy_counts(&c)
}
