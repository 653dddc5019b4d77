//! Bagged CART ensemble with per-node feature subsampling.
//!
//! Each tree draws its bootstrap sample and feature subsets from its own
//! ChaCha stream seeded from the master seed, so parallel training gives
//! the same model as a serial loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{fit_rows, DecisionTree, Mode, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per node; `None` picks √p for classification and p/3
    /// for regression.
    pub feature_subsample: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
    pub tree: TreeParams,
}

impl ForestParams {
    pub fn new(mode: Mode, seed: u64) -> Self {
        Self {
            n_trees: 500,
            feature_subsample: None,
            bootstrap: true,
            seed,
            tree: TreeParams::new(mode),
        }
    }

    pub fn subsample_for(&self, p: usize) -> usize {
        let m = self
            .feature_subsample
            .unwrap_or_else(|| match self.tree.mode {
                Mode::Classification => (p as f64).sqrt().round() as usize,
                Mode::Regression => p / 3,
            });
        m.clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub mode: Mode,
    pub trees: Vec<DecisionTree>,
    pub seeds: Vec<u64>,
    pub feature_subsample: usize,
}

impl ForestModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &ForestParams) -> Result<Self> {
        if params.n_trees == 0 {
            return Err(Error::InvalidParameter(
                "forest needs at least one tree".into(),
            ));
        }
        if y.is_empty() {
            return Err(Error::TooFewRows { needed: 1, got: 0 });
        }
        if params.tree.mode == Mode::Classification && y.iter().all(|v| *v == y[0]) {
            return Err(Error::SingleClass);
        }
        let p = x.first().map_or(0, Vec::len);
        let m = params.subsample_for(p);
        let mut master = ChaCha8Rng::seed_from_u64(params.seed);
        let seeds: Vec<u64> = (0..params.n_trees).map(|_| master.random()).collect();
        let n = y.len();
        let trees = seeds
            .par_iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                fit_rows(x, y, &rows, &params.tree, Some((&mut rng, m)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ForestModel {
            mode: params.tree.mode,
            trees,
            seeds,
            feature_subsample: m,
        })
    }

    /// Majority vote (ties to the lowest class) or mean of the trees.
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        let votes = self
            .trees
            .iter()
            .map(|t| t.predict(row))
            .collect::<Result<Vec<f64>>>()?;
        Ok(match self.mode {
            Mode::Regression => votes.iter().sum::<f64>() / votes.len() as f64,
            Mode::Classification => majority(&votes),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn majority(votes: &[f64]) -> f64 {
    let k = votes.iter().fold(0.0f64, |m, v| m.max(*v)) as usize + 1;
    let mut counts = vec![0usize; k];
    for v in votes {
        counts[*v as usize] += 1;
    }
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_to_one_vote() {
        assert_eq!(majority(&[0.0, 0.0, 1.0]), 0.0);
        assert_eq!(majority(&[1.0, 0.0, 1.0]), 1.0);
        assert_eq!(majority(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn single_class_rejected() {
        let x = vec![vec![0.0]; 6];
        let p = ForestParams::new(Mode::Classification, 1);
        assert!(matches!(
            ForestModel::fit(&x, &[1.0; 6], &p),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn default_subsample() {
        let p = ForestParams::new(Mode::Classification, 0);
        assert_eq!(p.subsample_for(100), 10);
        assert_eq!(p.subsample_for(1), 1);
    }
}
