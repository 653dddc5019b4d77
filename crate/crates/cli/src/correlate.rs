use pdvoice_core::{ClinicalScale, Group};
use pdvoice_learn::metrics::{correlation_graph_data, spearman, CorrelationPanel};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Target};
use crate::error::{CliError, Result};
use crate::extract::load_cohort;
use crate::pipeline::{load_matrix, scopes_to_run, target_values, write_text};

/// Best-correlated feature of one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePanel {
    pub scope: String,
    pub panel: CorrelationPanel,
}

pub const PLOT_HEADER: &str = "scope,feature,feature_value,clinical_value,fit_a,fit_b,fit_c,rho,p";

pub fn plot_csv(p: &ScalePanel) -> String {
    let mut s = format!("{PLOT_HEADER}\n");
    let [a, b, c] = p.panel.coefficients;
    for (x, y) in p.panel.x.iter().zip(&p.panel.y) {
        s.push_str(&format!(
            "{},{},{x},{y},{a},{b},{c},{},{}\n",
            p.scope, p.panel.feature, p.panel.rho, p.panel.p
        ));
    }
    s
}

/// Complete (feature, score) pairs: at least 5 rows, 3 distinct feature
/// values for the quadratic fit and a non-constant score.
fn pairs(x: &[Option<f64>], y: &[Option<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
    let (a, b): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .unzip();
    let distinct = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.len()
    };
    (a.len() >= 5 && distinct(&a) >= 3 && distinct(&b) >= 2).then_some((a, b))
}

/// For every scale, the feature with the largest |Spearman ρ| against the
/// PD subjects' scores, with its quadratic fit.
pub fn cmd_correlate(config: &RunConfig) -> Result<Vec<ScalePanel>> {
    config.validate()?;
    let scales: Vec<ClinicalScale> = match config.target {
        Some(Target::Scale(s)) => vec![s],
        Some(Target::Group) => {
            return Err(CliError::Config(
                "correlation needs a clinical scale target".into(),
            ))
        }
        None => ClinicalScale::ALL.to_vec(),
    };
    let manifest = load_cohort(config)?;
    let scopes = scopes_to_run(config)?;
    let matrices = scopes
        .iter()
        .map(|&s| Ok((s, load_matrix(config, s)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut panels = Vec::new();
    for scale in scales {
        let mut best: Option<(f64, String, String, Vec<f64>, Vec<f64>)> = None;
        for (scope, m) in &matrices {
            let y: Vec<Option<f64>> = target_values(&manifest, m, Target::Scale(scale))
                .into_iter()
                .zip(&m.subjects)
                .map(|(v, id)| {
                    v.filter(|_| manifest.subject(id).is_some_and(|r| r.group == Group::Pd))
                })
                .collect();
            for (j, name) in m.columns.iter().enumerate() {
                let Some((a, b)) = pairs(&m.column(j), &y) else {
                    continue;
                };
                let Ok((rho, _)) = spearman(&a, &b) else {
                    continue;
                };
                if best.as_ref().is_none_or(|(r, ..)| rho.abs() > *r) {
                    best = Some((rho.abs(), scope.label(), name.clone(), a, b));
                }
            }
        }
        let Some((_, scope, feature, x, y)) = best else {
            log::warn!("{}: no feature has 5 complete pairs", scale.id());
            continue;
        };
        let panel = correlation_graph_data(&feature, scale, &x, &y)?;
        log::info!("{}: {feature} in {scope}, rho {:.3}", scale.id(), panel.rho);
        panels.push(ScalePanel { scope, panel });
    }
    if panels.is_empty() {
        return Err(CliError::Data(
            "no scale has enough complete feature/score pairs".into(),
        ));
    }
    let reports = config.reports_dir();
    for p in &panels {
        write_text(
            &reports
                .join("plots")
                .join(format!("{}.csv", p.panel.scale.id())),
            &plot_csv(p),
        )?;
    }
    write_text(
        &reports.join("correlation.json"),
        &serde_json::to_string_pretty(&panels)?,
    )?;
    Ok(panels)
}
