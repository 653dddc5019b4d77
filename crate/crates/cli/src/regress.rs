use pdvoice_core::{ClinicalScale, Group};
use pdvoice_learn::metrics::{estimation_errors, observed_range, regression_metrics, round2};
use pdvoice_learn::{loo_validate, Design, Learner, Mode, Objective, TreeParams};
use serde::Serialize;

use crate::classify::{model_json, Skipped};
use crate::config::{RunConfig, Target};
use crate::error::{CliError, Result};
use crate::extract::load_cohort;
use crate::pipeline::{
    load_matrix, scopes_to_run, select, target_values, wrapper_learner, write_text,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionRow {
    pub scope: String,
    pub mae: f64,
    pub pearson_rho: Option<f64>,
    pub n_selected: usize,
    pub selected_features: Vec<String>,
    pub subjects: usize,
    pub observed_range: f64,
    pub dropped_rows: usize,
    pub failed_folds: usize,
}

/// Estimation errors of the scope with the lowest MAE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionSummary {
    pub scale: ClinicalScale,
    pub scope: String,
    pub mae: f64,
    pub ee1: f64,
    /// Empty for scales without a fixed maximum.
    pub ee2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionReport {
    pub scale: ClinicalScale,
    pub rows: Vec<RegressionRow>,
    pub best: Option<RegressionSummary>,
    pub skipped: Vec<Skipped>,
}

impl RegressionReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("scale,scope,MAE,rho,No,EE1,EE2\n");
        let opt = |v: Option<f64>, d: usize| v.map(|x| format!("{x:.d$}")).unwrap_or_default();
        for r in &self.rows {
            let best = self.best.as_ref().filter(|b| b.scope == r.scope);
            s.push_str(&format!(
                "{},{},{:.4},{},{},{},{}\n",
                self.scale.id(),
                r.scope,
                r.mae,
                opt(r.pearson_rho, 4),
                r.n_selected,
                opt(best.map(|b| b.ee1), 2),
                opt(best.and_then(|b| b.ee2), 2),
            ));
        }
        s
    }
}

/// Clinical score estimation from PD subjects: selection with a regression
/// tree wrapper, then tree LOO.
pub fn cmd_regress(config: &RunConfig) -> Result<RegressionReport> {
    config.validate()?;
    let scale = match config.target {
        Some(Target::Scale(s)) => s,
        _ => {
            return Err(CliError::Config(
                "regression needs a clinical scale target".into(),
            ))
        }
    };
    let manifest = load_cohort(config)?;
    let rated = manifest
        .rows
        .iter()
        .filter(|r| r.group == Group::Pd && r.score(scale).is_some())
        .count();
    if rated < config.min_rated {
        return Err(CliError::Data(format!(
            "{rated} PD subjects rated on {}, need {}",
            scale.id(),
            config.min_rated
        )));
    }
    let wrapper = wrapper_learner(config, Mode::Regression);
    let final_learner = Learner::Cart(TreeParams::new(Mode::Regression));
    let mut report = RegressionReport {
        scale,
        rows: Vec::new(),
        best: None,
        skipped: Vec::new(),
    };
    for scope in scopes_to_run(config)? {
        let matrix = load_matrix(config, scope)?;
        let target: Vec<Option<f64>> = target_values(&manifest, &matrix, Target::Scale(scale))
            .into_iter()
            .zip(&matrix.subjects)
            .map(|(v, id)| v.filter(|_| manifest.subject(id).is_some_and(|r| r.group == Group::Pd)))
            .collect();
        let skip = |report: &mut RegressionReport, reason: String| {
            log::warn!("{}: skipped: {reason}", scope.label());
            report.skipped.push(Skipped {
                scope: scope.label(),
                reason,
            });
        };
        let selection = match select(config, &matrix, &target, &wrapper, Objective::NegMae) {
            Ok(s) => s,
            Err(e) => {
                skip(&mut report, e.to_string());
                continue;
            }
        };
        let design = Design::new(&matrix, &selection.indices, &target);
        let loo = match loo_validate(&design.x, &design.y, &final_learner) {
            Ok(l) => l,
            Err(e) => {
                skip(&mut report, e.to_string());
                continue;
            }
        };
        let (pred, truth) = loo.pairs(&design.y);
        let m = regression_metrics(&pred, &truth)?;
        let model = final_learner.fit(&design.x, &design.y)?;
        let stem = scope.stem();
        let reports = config.reports_dir();
        write_text(
            &reports
                .join("selection")
                .join(format!("regress_{}_{stem}.csv", scale.id())),
            &selection.trace_csv(),
        )?;
        write_text(
            &reports
                .join("models")
                .join(format!("regress_{}_{stem}.json", scale.id())),
            &model_json(&model, &selection.selected)?,
        )?;
        report.rows.push(RegressionRow {
            scope: scope.label(),
            mae: m.mae,
            pearson_rho: m.pearson_rho,
            n_selected: selection.len(),
            selected_features: selection.selected.clone(),
            subjects: design.len(),
            observed_range: observed_range(&design.y),
            dropped_rows: design.dropped,
            failed_folds: loo.failures.len(),
        });
    }
    if let Some(best) = report
        .rows
        .iter()
        .filter(|r| r.observed_range > 0.0)
        .min_by(|a, b| a.mae.total_cmp(&b.mae))
    {
        let (ee1, ee2) = estimation_errors(best.mae, scale, best.observed_range)?;
        report.best = Some(RegressionSummary {
            scale,
            scope: best.scope.clone(),
            mae: best.mae,
            ee1: round2(ee1),
            ee2: ee2.map(round2),
        });
    }
    let reports = config.reports_dir();
    let stem = format!("regression_{}", scale.id());
    write_text(
        &reports.join(format!("{stem}.json")),
        &serde_json::to_string_pretty(&report)?,
    )?;
    write_text(&reports.join(format!("{stem}.csv")), &report.to_csv())?;
    Ok(report)
}
