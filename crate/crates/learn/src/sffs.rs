//! Sequential floating forward selection wrapped around leave-one-out.
//!
//! Each step adds the candidate with the best objective, then removes
//! earlier features while doing so beats the best subset of that size seen
//! so far. The search stops after `patience` additions without a new
//! overall best and returns that best subset.

use std::collections::HashMap;

use pdvoice_core::FeatureMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Design;
use crate::error::{Error, Result};
use crate::learner::Learner;
use crate::validate::{loo_validate, Objective};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SffsParams {
    pub patience: usize,
    pub floating: bool,
    pub max_features: Option<usize>,
}

impl Default for SffsParams {
    fn default() -> Self {
        Self {
            patience: 3,
            floating: true,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub step: usize,
    pub action: Action,
    pub feature: String,
    pub objective: f64,
    pub size: usize,
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<String>,
    /// Matrix column indices of `selected`.
    pub indices: Vec<usize>,
    pub objective: f64,
    pub steps: Vec<SelectionStep>,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    /// `step,action,feature,objective,size,dropped_rows` lines.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("step,action,feature,objective,size,dropped_rows\n");
        for t in &self.steps {
            let action = match t.action {
                Action::Add => "add",
                Action::Remove => "remove",
            };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                t.step, action, t.feature, t.objective, t.size, t.dropped_rows
            ));
        }
        s
    }
}

/// LOO objective of one column subset and the number of rows dropped for
/// missing values.
pub fn evaluate_subset(
    matrix: &FeatureMatrix,
    columns: &[usize],
    target: &[Option<f64>],
    learner: &Learner,
    objective: Objective,
) -> (f64, usize) {
    let d = Design::new(matrix, columns, target);
    if d.len() < 3 {
        return (f64::NEG_INFINITY, d.dropped);
    }
    let score = match loo_validate(&d.x, &d.y, learner) {
        Ok(out) => {
            let (p, t) = out.pairs(&d.y);
            objective.score(&p, &t)
        }
        Err(_) => f64::NEG_INFINITY,
    };
    (score, d.dropped)
}

/// Runs the search over `candidates` (matrix column indices). Equal
/// objectives go to the lowest column index.
pub fn sffs(
    matrix: &FeatureMatrix,
    candidates: &[usize],
    target: &[Option<f64>],
    learner: &Learner,
    objective: Objective,
    params: &SffsParams,
) -> Result<SelectionResult> {
    let mut pool: Vec<usize> = candidates.to_vec();
    pool.sort_unstable();
    pool.dedup();
    if pool.is_empty() {
        return Err(Error::InvalidParameter("no candidate features".into()));
    }
    if let Some(&j) = pool.iter().find(|&&j| j >= matrix.n_cols()) {
        return Err(Error::InvalidParameter(format!("column {j} out of range")));
    }
    let max_size = params.max_features.unwrap_or(pool.len()).min(pool.len());
    let eval = |cols: &[usize]| evaluate_subset(matrix, cols, target, learner, objective);

    let mut current: Vec<usize> = Vec::new();
    let mut best_by_size: HashMap<usize, f64> = HashMap::new();
    let mut best: (f64, Vec<usize>) = (f64::NEG_INFINITY, Vec::new());
    let mut steps = Vec::new();
    let mut stale = 0usize;

    while current.len() < max_size && stale < params.patience.max(1) {
        let trials: Vec<(usize, f64, usize)> = pool
            .par_iter()
            .filter(|j| !current.contains(j))
            .map(|&j| {
                let mut s = current.clone();
                s.push(j);
                let (v, dropped) = eval(&s);
                (j, v, dropped)
            })
            .collect();
        // `trials` keeps pool order, so strict comparison keeps the lowest index.
        let Some(&(j, v, dropped)) =
            trials
                .iter()
                .fold(None, |acc: Option<&(usize, f64, usize)>, t| match acc {
                    Some(a) if a.1 >= t.1 => Some(a),
                    _ => Some(t),
                })
        else {
            break;
        };
        current.push(j);
        steps.push(SelectionStep {
            step: steps.len() + 1,
            action: Action::Add,
            feature: matrix.columns[j].clone(),
            objective: v,
            size: current.len(),
            dropped_rows: dropped,
        });
        let slot = best_by_size
            .entry(current.len())
            .or_insert(f64::NEG_INFINITY);
        *slot = slot.max(v);
        if v > best.0 {
            best = (v, current.clone());
            stale = 0;
        } else {
            stale += 1;
        }

        if !params.floating {
            continue;
        }
        while current.len() > 2 {
            let last = *current.last().unwrap();
            let removals: Vec<(usize, f64, usize)> = current
                .par_iter()
                .filter(|&&f| f != last)
                .map(|&f| {
                    let s: Vec<usize> = current.iter().copied().filter(|&g| g != f).collect();
                    let (v, dropped) = eval(&s);
                    (f, v, dropped)
                })
                .collect();
            let mut pick: Option<(usize, f64, usize)> = None;
            for &(f, v, d) in &removals {
                let better = match pick {
                    None => true,
                    Some((pf, pv, _)) => v > pv || (v == pv && f < pf),
                };
                if better {
                    pick = Some((f, v, d));
                }
            }
            let Some((f, v, dropped)) = pick else { break };
            let bound = best_by_size
                .get(&(current.len() - 1))
                .copied()
                .unwrap_or(f64::NEG_INFINITY);
            if v <= bound {
                break;
            }
            current.retain(|&g| g != f);
            best_by_size.insert(current.len(), v);
            steps.push(SelectionStep {
                step: steps.len() + 1,
                action: Action::Remove,
                feature: matrix.columns[f].clone(),
                objective: v,
                size: current.len(),
                dropped_rows: dropped,
            });
            if v > best.0 {
                best = (v, current.clone());
                stale = 0;
            }
        }
    }

    let (objective_value, indices) = best;
    Ok(SelectionResult {
        selected: indices.iter().map(|&j| matrix.columns[j].clone()).collect(),
        indices,
        objective: objective_value,
        steps,
    })
}
