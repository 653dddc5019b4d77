//! Feature selection (mRMR filter, floating forward wrapper), CART and random
//! forest learners, leave-one-out validation and evaluation metrics.

pub mod data;
pub mod error;
pub mod forest;
pub mod learner;
pub mod metrics;
pub mod mrmr;
pub mod sffs;
pub mod tree;
pub mod validate;

pub use data::Design;
pub use error::{Error, Result};
pub use forest::{ForestModel, ForestParams};
pub use learner::{Learner, Model};
pub use metrics::{ClassificationMetrics, RegressionMetrics};
pub use mrmr::mrmr_rank;
pub use sffs::{sffs, SelectionResult, SffsParams};
pub use tree::{DecisionTree, Mode, TreeParams};
pub use validate::{loo_validate, LooOutcome, Objective};
