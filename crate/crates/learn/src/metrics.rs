//! Classification and regression scores, clinical estimation errors and
//! correlation analysis.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use pdvoice_core::ClinicalScale;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// `2^(sin(π·sen/2)·sin(π·spe/2))` with sensitivity and specificity as
/// fractions. Ranges over [1, 2].
pub fn tss(sen: f64, spe: f64) -> f64 {
    2f64.powf((PI * sen / 2.0).sin() * (PI * spe / 2.0).sin())
}

/// Rounds to two decimals, halves away from zero.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    /// Percent.
    pub acc: f64,
    pub sen: f64,
    pub spe: f64,
    pub tss: f64,
}

/// Metrics with `true` (PD) as the positive class.
pub fn classification_metrics(pred: &[bool], truth: &[bool]) -> Result<ClassificationMetrics> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidParameter(
            "prediction and truth lengths differ".into(),
        ));
    }
    let (mut tp, mut tn, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        if t {
            pos += 1;
            tp += p as usize;
        } else {
            neg += 1;
            tn += !p as usize;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let sen = tp as f64 / pos as f64;
    let spe = tn as f64 / neg as f64;
    Ok(ClassificationMetrics {
        acc: 100.0 * (tp + tn) as f64 / (pos + neg) as f64,
        sen: 100.0 * sen,
        spe: 100.0 * spe,
        tss: tss(sen, spe),
    })
}

pub fn mean_absolute_error(pred: &[f64], truth: &[f64]) -> Option<f64> {
    if pred.is_empty() || pred.len() != truth.len() {
        return None;
    }
    Some(
        pred.iter()
            .zip(truth)
            .map(|(p, t)| (p - t).abs())
            .sum::<f64>()
            / pred.len() as f64,
    )
}

/// Pearson product-moment correlation; `None` when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub pearson_rho: Option<f64>,
    /// Percent of the observed range.
    pub ee1: Option<f64>,
    /// Percent of the scale maximum; `None` for unbounded scales.
    pub ee2: Option<f64>,
}

pub fn regression_metrics(pred: &[f64], truth: &[f64]) -> Result<RegressionMetrics> {
    if pred.len() != truth.len() {
        return Err(Error::InvalidParameter(
            "prediction and truth lengths differ".into(),
        ));
    }
    if pred.len() < 3 {
        return Err(Error::TooFewRows {
            needed: 3,
            got: pred.len(),
        });
    }
    Ok(RegressionMetrics {
        mae: mean_absolute_error(pred, truth).unwrap_or(0.0),
        pearson_rho: pearson(pred, truth),
        ee1: None,
        ee2: None,
    })
}

/// `(mae / observed_range, mae / max)` in percent.
pub fn estimation_errors(
    mae: f64,
    scale: ClinicalScale,
    observed_range: f64,
) -> Result<(f64, Option<f64>)> {
    if !(mae >= 0.0) {
        return Err(Error::InvalidParameter("mae must be non-negative".into()));
    }
    if !(observed_range > 0.0) {
        return Err(Error::Degenerate("observed score range is zero".into()));
    }
    Ok((
        100.0 * mae / observed_range,
        scale.theoretical_max().map(|m| 100.0 * mae / m),
    ))
}

pub fn observed_range(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided p-value of a correlation coefficient under the t approximation.
pub fn correlation_p_value(rho: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0)
}

/// Spearman rank correlation and its p-value.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("length mismatch".into()));
    }
    if x.len() < 5 {
        return Err(Error::TooFewRows {
            needed: 5,
            got: x.len(),
        });
    }
    let rho = pearson(&average_ranks(x), &average_ranks(y)).ok_or(Error::ConstantTarget)?;
    Ok((rho, correlation_p_value(rho, x.len())))
}

/// Least-squares `[a, b, c]` of `y ≈ a·x² + b·x + c`. The fit runs on
/// standardized `x` and the coefficients are mapped back.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("length mismatch".into()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewRows { needed: 3, got: n });
    }
    let m = x.iter().sum::<f64>() / n as f64;
    let s = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Degenerate("feature values are constant".into()));
    }
    let design = DMatrix::from_fn(n, 3, |i, j| ((x[i] - m) / s).powi(2 - j as i32));
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    if !(svd.singular_values.min() > 1e-10 * smax) {
        return Err(Error::Degenerate(
            "quadratic design matrix is rank deficient".into(),
        ));
    }
    let beta = svd
        .solve(&DVector::from_column_slice(y), 0.0)
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let (a, b, c) = (beta[0] / (s * s), beta[1] / s, beta[2]);
    Ok([a, b - 2.0 * a * m, a * m * m - b * m + c])
}

/// Scatter data of one feature against one clinical scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPanel {
    pub feature: String,
    pub scale: ClinicalScale,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub coefficients: [f64; 3],
    pub rho: f64,
    pub p: f64,
}

pub fn correlation_graph_data(
    feature: &str,
    scale: ClinicalScale,
    x: &[f64],
    y: &[f64],
) -> Result<CorrelationPanel> {
    if x.len() < 5 {
        return Err(Error::TooFewRows {
            needed: 5,
            got: x.len(),
        });
    }
    let (rho, p) = spearman(x, y)?;
    Ok(CorrelationPanel {
        feature: feature.to_string(),
        scale,
        x: x.to_vec(),
        y: y.to_vec(),
        coefficients: quadratic_fit(x, y)?,
        rho,
        p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tss_extremes() {
        assert_eq!(tss(1.0, 1.0), 2.0);
        assert_eq!(tss(0.7, 0.0), 1.0);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
    }

    #[test]
    fn zero_mae_gives_zero_errors() {
        let (e1, e2) = estimation_errors(0.0, ClinicalScale::Mmse, 10.0).unwrap();
        assert_eq!((e1, e2), (0.0, Some(0.0)));
        assert!(estimation_errors(1.0, ClinicalScale::Mmse, 0.0).is_err());
        assert_eq!(
            estimation_errors(1.0, ClinicalScale::Led, 5.0).unwrap().1,
            None
        );
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(-0.125), -0.13);
    }
}
