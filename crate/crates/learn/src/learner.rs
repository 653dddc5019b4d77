use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forest::{ForestModel, ForestParams};
use crate::tree::{DecisionTree, Mode, TreeParams};

/// What to train on each fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Learner {
    Cart(TreeParams),
    Forest(ForestParams),
}

impl Learner {
    pub fn mode(&self) -> Mode {
        match self {
            Learner::Cart(p) => p.mode,
            Learner::Forest(p) => p.tree.mode,
        }
    }

    pub fn fit(&self, x: &[Vec<f64>], y: &[f64]) -> Result<Model> {
        Ok(match self {
            Learner::Cart(p) => Model::Tree(DecisionTree::fit(x, y, p)?),
            Learner::Forest(p) => Model::Forest(ForestModel::fit(x, y, p)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Tree(DecisionTree),
    Forest(ForestModel),
}

impl Model {
    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        match self {
            Model::Tree(t) => t.predict(row),
            Model::Forest(f) => f.predict(row),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
