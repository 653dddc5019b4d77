//! Minimum-redundancy maximum-relevance ranking.
//!
//! Mutual information is estimated on quantile-discretized values, so the
//! ranking depends only on the order of each column's values.

use pdvoice_core::FeatureMatrix;

use crate::error::{Error, Result};

pub const QUANTILES: usize = 10;

const MISSING: usize = usize::MAX;

/// Quantile bin of each value: `floor(q * #{x_j < x_i} / n)` over the finite
/// values. Non-finite entries get no bin.
pub fn quantile_bins(x: &[Option<f64>], q: usize) -> Vec<usize> {
    let mut finite: Vec<f64> = x
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    finite.sort_by(f64::total_cmp);
    let n = finite.len();
    x.iter()
        .map(|v| match v {
            Some(v) if v.is_finite() => {
                let below = finite.partition_point(|u| u < v);
                (q * below / n).min(q - 1)
            }
            _ => MISSING,
        })
        .collect()
}

/// Discrete codes for the target: distinct values when there are at most
/// `q` of them, quantile bins otherwise.
pub fn target_codes(y: &[f64], q: usize) -> Vec<usize> {
    let mut distinct: Vec<f64> = y.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() <= q {
        y.iter()
            .map(|v| distinct.partition_point(|u| u < v))
            .collect()
    } else {
        let opt: Vec<Option<f64>> = y.iter().map(|&v| Some(v)).collect();
        quantile_bins(&opt, q)
    }
}

/// Plug-in mutual information (nats) of two code vectors over the rows where
/// both are present.
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    let ka = a
        .iter()
        .filter(|&&v| v != MISSING)
        .max()
        .map_or(0, |m| m + 1);
    let kb = b
        .iter()
        .filter(|&&v| v != MISSING)
        .max()
        .map_or(0, |m| m + 1);
    if ka == 0 || kb == 0 {
        return 0.0;
    }
    let mut joint = vec![0usize; ka * kb];
    let mut n = 0usize;
    for (&u, &v) in a.iter().zip(b) {
        if u != MISSING && v != MISSING {
            joint[u * kb + v] += 1;
            n += 1;
        }
    }
    if n == 0 {
        return 0.0;
    }
    let mut pa = vec![0usize; ka];
    let mut pb = vec![0usize; kb];
    for u in 0..ka {
        for v in 0..kb {
            pa[u] += joint[u * kb + v];
            pb[v] += joint[u * kb + v];
        }
    }
    let n = n as f64;
    let mut mi = 0.0;
    for u in 0..ka {
        for v in 0..kb {
            let c = joint[u * kb + v];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (pa[u] as f64 * pb[v] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Ranks matrix columns by greedy mRMR and returns the first `k` column
/// indices. Rows with a missing target are ignored; ties go to the lower
/// column index.
pub fn mrmr_rank(matrix: &FeatureMatrix, target: &[Option<f64>], k: usize) -> Result<Vec<usize>> {
    let p = matrix.n_cols();
    if k > p {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds {p} features"
        )));
    }
    let rows: Vec<usize> = (0..matrix.n_rows())
        .filter(|&i| target[i].is_some_and(f64::is_finite))
        .collect();
    let y: Vec<f64> = rows.iter().map(|&i| target[i].unwrap()).collect();
    if y.iter().all(|v| *v == y[0]) {
        return Err(Error::ConstantTarget);
    }
    let codes: Vec<Vec<usize>> = (0..p)
        .map(|j| {
            let col: Vec<Option<f64>> = rows.iter().map(|&i| matrix.values[i][j]).collect();
            quantile_bins(&col, QUANTILES)
        })
        .collect();
    Ok(greedy(&codes, &target_codes(&y, QUANTILES), k))
}

/// Greedy selection on pre-discretized columns.
pub fn greedy(codes: &[Vec<usize>], target: &[usize], k: usize) -> Vec<usize> {
    let p = codes.len();
    let relevance: Vec<f64> = codes
        .iter()
        .map(|c| mutual_information(c, target))
        .collect();
    let mut redundancy = vec![0.0; p];
    let mut chosen = vec![false; p];
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let m = out.len() as f64;
        let mut best: Option<(usize, f64)> = None;
        for j in (0..p).filter(|&j| !chosen[j]) {
            let score = if m > 0.0 {
                relevance[j] - redundancy[j] / m
            } else {
                relevance[j]
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else { break };
        chosen[j] = true;
        out.push(j);
        for (i, r) in redundancy.iter_mut().enumerate() {
            if !chosen[i] {
                *r += mutual_information(&codes[i], &codes[j]);
            }
        }
    }
    out
}
