//! Leave-one-out validation and the objectives used to score it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::Learner;
use crate::metrics::{classification_metrics, mean_absolute_error};

#[derive(Debug, Clone, PartialEq)]
pub struct LooOutcome {
    /// Prediction for each row from the model trained without it.
    pub predictions: Vec<Option<f64>>,
    pub failures: Vec<(usize, String)>,
}

impl LooOutcome {
    /// (prediction, truth) pairs of the successful folds.
    pub fn pairs(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.predictions
            .iter()
            .zip(y)
            .filter_map(|(p, t)| p.map(|p| (p, *t)))
            .unzip()
    }
}

pub fn loo_validate(x: &[Vec<f64>], y: &[f64], learner: &Learner) -> Result<LooOutcome> {
    let n = y.len();
    if n < 3 {
        return Err(Error::TooFewRows { needed: 3, got: n });
    }
    let folds: Vec<std::result::Result<f64, String>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (tx, ty): (Vec<Vec<f64>>, Vec<f64>) = (0..n)
                .filter(|&j| j != i)
                .map(|j| (x[j].clone(), y[j]))
                .unzip();
            learner
                .fit(&tx, &ty)
                .and_then(|m| m.predict(&x[i]))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut out = LooOutcome {
        predictions: Vec::with_capacity(n),
        failures: Vec::new(),
    };
    for (i, f) in folds.into_iter().enumerate() {
        match f {
            Ok(p) => out.predictions.push(Some(p)),
            Err(e) => {
                out.predictions.push(None);
                out.failures.push((i, e));
            }
        }
    }
    Ok(out)
}

/// Quantity maximized by the selection wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// TSS with class 1 as positive.
    Tss,
    /// Negative mean absolute error.
    NegMae,
}

impl Objective {
    /// Score of predictions against truth; `-inf` when undefined.
    pub fn score(self, pred: &[f64], truth: &[f64]) -> f64 {
        let v = match self {
            Objective::Tss => {
                let p: Vec<bool> = pred.iter().map(|v| *v >= 0.5).collect();
                let t: Vec<bool> = truth.iter().map(|v| *v >= 0.5).collect();
                classification_metrics(&p, &t).map(|m| m.tss).ok()
            }
            Objective::NegMae => mean_absolute_error(pred, truth).map(|m| -m),
        };
        v.filter(|v| v.is_finite()).unwrap_or(f64::NEG_INFINITY)
    }
}
