//! Steps shared by the classification and regression commands.

use std::path::Path;

use pdvoice_core::{CohortManifest, FeatureMatrix, Group, Scope, Task};
use pdvoice_learn::{
    mrmr_rank, sffs, ForestParams, Learner, Mode, Objective, SelectionResult, SffsParams,
    TreeParams,
};

use crate::config::{RunConfig, Target, Wrapper};
use crate::error::{CliError, Result};

/// Requested scopes, or every scope whose matrix exists.
pub fn scopes_to_run(config: &RunConfig) -> Result<Vec<Scope>> {
    if !config.scopes.is_empty() {
        return Ok(config.scopes.clone());
    }
    let found: Vec<Scope> = Scope::every(&Task::ALL)
        .into_iter()
        .filter(|s| config.matrix_path(*s).exists())
        .collect();
    if found.is_empty() {
        return Err(CliError::Data(format!(
            "no feature matrices under {}",
            config.features_dir().display()
        )));
    }
    Ok(found)
}

pub fn load_matrix(config: &RunConfig, scope: Scope) -> Result<FeatureMatrix> {
    let path = config.matrix_path(scope);
    if !Path::new(&path).exists() {
        return Err(CliError::Data(format!("missing matrix {}", path.display())));
    }
    Ok(FeatureMatrix::read_csv(&path)?)
}

/// Target value of every matrix row: 1 for PD and 0 for HC, or the score.
pub fn target_values(
    manifest: &CohortManifest,
    matrix: &FeatureMatrix,
    target: Target,
) -> Vec<Option<f64>> {
    matrix
        .subjects
        .iter()
        .map(|id| {
            let row = manifest.subject(id)?;
            match target {
                Target::Group => Some(if row.group == Group::Pd { 1.0 } else { 0.0 }),
                Target::Scale(s) => row.score(s),
            }
        })
        .collect()
}

pub fn wrapper_learner(config: &RunConfig, mode: Mode) -> Learner {
    match config.wrapper {
        Wrapper::Cart => Learner::Cart(TreeParams::new(mode)),
        Wrapper::Forest => {
            let mut p = ForestParams::new(mode, config.seed);
            p.n_trees = config.wrapper_trees;
            Learner::Forest(p)
        }
    }
}

/// mRMR pre-selection followed by the floating wrapper.
pub fn select(
    config: &RunConfig,
    matrix: &FeatureMatrix,
    target: &[Option<f64>],
    learner: &Learner,
    objective: Objective,
) -> Result<SelectionResult> {
    let k = config.mrmr_k.min(matrix.n_cols());
    let ranked = mrmr_rank(matrix, target, k)?;
    let params = SffsParams {
        patience: config.sffs_patience,
        floating: true,
        max_features: config.max_features,
    };
    let result = sffs(matrix, &ranked, target, learner, objective, &params)?;
    if result.is_empty() || !result.objective.is_finite() {
        return Err(CliError::Data(
            "feature selection found no usable subset".into(),
        ));
    }
    Ok(result)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}
