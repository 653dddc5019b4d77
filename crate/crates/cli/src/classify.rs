use pdvoice_learn::metrics::{classification_metrics, round2};
use pdvoice_learn::{loo_validate, Design, ForestParams, Learner, Mode, Model, Objective};
use serde::Serialize;

use crate::config::{RunConfig, Target};
use crate::error::{CliError, Result};
use crate::extract::load_cohort;
use crate::pipeline::{
    load_matrix, scopes_to_run, select, target_values, wrapper_learner, write_text,
};

/// One row of the classification table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationRow {
    pub scope: String,
    pub acc: f64,
    pub sen: f64,
    pub spe: f64,
    pub tss: f64,
    pub n_selected: usize,
    pub selected_features: Vec<String>,
    pub subjects: usize,
    pub dropped_rows: usize,
    pub failed_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub scope: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub rows: Vec<ClassificationRow>,
    pub skipped: Vec<Skipped>,
}

pub const CSV_HEADER: &str = "scope,ACC,SEN,SPE,TSS,No";

impl ClassificationReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.2},{:.2},{:.2},{:.4},{}\n",
                r.scope, r.acc, r.sen, r.spe, r.tss, r.n_selected
            ));
        }
        s
    }
}

fn forest(config: &RunConfig) -> Learner {
    let mut p = ForestParams::new(Mode::Classification, config.seed);
    p.n_trees = config.trees;
    Learner::Forest(p)
}

/// PD-versus-HC classification per scope: selection, then forest LOO on the
/// selected features.
pub fn cmd_classify(config: &RunConfig) -> Result<ClassificationReport> {
    config.validate()?;
    if matches!(config.target, Some(Target::Scale(_))) {
        return Err(CliError::Config(
            "classification target must be 'group'".into(),
        ));
    }
    let manifest = load_cohort(config)?;
    let (pd, hc) = manifest.group_counts();
    if pd == 0 || hc == 0 {
        return Err(CliError::Data(format!(
            "both groups are required (PD {pd}, HC {hc})"
        )));
    }
    let wrapper = wrapper_learner(config, Mode::Classification);
    let final_learner = forest(config);
    let mut report = ClassificationReport {
        rows: Vec::new(),
        skipped: Vec::new(),
    };
    for scope in scopes_to_run(config)? {
        let matrix = load_matrix(config, scope)?;
        let target = target_values(&manifest, &matrix, Target::Group);
        let present: Vec<f64> = target.iter().flatten().copied().collect();
        if !present.contains(&1.0) || !present.contains(&0.0) {
            let reason = "matrix rows cover a single group".to_string();
            log::warn!("{}: skipped: {reason}", scope.label());
            report.skipped.push(Skipped {
                scope: scope.label(),
                reason,
            });
            continue;
        }
        let selection = match select(config, &matrix, &target, &wrapper, Objective::Tss) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("{}: skipped: {e}", scope.label());
                report.skipped.push(Skipped {
                    scope: scope.label(),
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let design = Design::new(&matrix, &selection.indices, &target);
        let loo = loo_validate(&design.x, &design.y, &final_learner)?;
        let (pred, truth) = loo.pairs(&design.y);
        let as_pd = |v: &f64| *v >= 0.5;
        let m = classification_metrics(
            &pred.iter().map(as_pd).collect::<Vec<_>>(),
            &truth.iter().map(as_pd).collect::<Vec<_>>(),
        )?;
        let model = final_learner.fit(&design.x, &design.y)?;
        let stem = scope.stem();
        let reports = config.reports_dir();
        write_text(
            &reports
                .join("selection")
                .join(format!("classify_{stem}.csv")),
            &selection.trace_csv(),
        )?;
        write_text(
            &reports.join("models").join(format!("classify_{stem}.json")),
            &model_json(&model, &selection.selected)?,
        )?;
        report.rows.push(ClassificationRow {
            scope: scope.label(),
            acc: round2(m.acc),
            sen: round2(m.sen),
            spe: round2(m.spe),
            tss: (m.tss * 1e4).round() / 1e4,
            n_selected: selection.len(),
            selected_features: selection.selected.clone(),
            subjects: design.len(),
            dropped_rows: design.dropped,
            failed_folds: loo.failures.len(),
        });
    }
    let reports = config.reports_dir();
    write_text(
        &reports.join("classification.json"),
        &serde_json::to_string_pretty(&report)?,
    )?;
    write_text(&reports.join("classification.csv"), &report.to_csv())?;
    Ok(report)
}

/// Model JSON with the feature names its indices refer to.
pub fn model_json(model: &Model, features: &[String]) -> Result<String> {
    #[derive(Serialize)]
    struct Saved<'a> {
        features: &'a [String],
        model: &'a Model,
    }
    Ok(serde_json::to_string(&Saved { features, model })?)
}
