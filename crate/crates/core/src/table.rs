//! Contour summarization and feature-matrix assembly.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::Serialize;

use crate::articulation::{vowel_space_features, VowelFormants};
use crate::audio::{Task, Vowel};
use crate::cohort::CohortManifest;
use crate::dsp;
use crate::error::{Error, Result};
use crate::features::{column_names, FeatureKind, FeatureSpec, RecordingFeatures, REGISTRY};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub p1: f64,
    pub p99: f64,
    /// `p99 - p1`.
    pub ir: f64,
}

impl Summary {
    pub fn values(&self) -> [f64; 5] {
        [self.median, self.std, self.p1, self.p99, self.ir]
    }
}

/// Five-number summary of the finite values of a contour; `None` when none
/// remain.
pub fn summarize(contour: &[f64]) -> Option<Summary> {
    let mut v: Vec<f64> = contour.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let p1 = dsp::percentile_sorted(&v, 1.0);
    let p99 = dsp::percentile_sorted(&v, 99.0);
    Some(Summary {
        median: dsp::percentile_sorted(&v, 50.0),
        std: dsp::std_dev(&v),
        p1,
        p99,
        ir: p99 - p1,
    })
}

/// Experiment scope: one vowel of one task, or all five vowels of a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    Vowel(Vowel, Task),
    All(Task),
}

impl Scope {
    pub fn task(self) -> Task {
        match self {
            Scope::Vowel(_, t) | Scope::All(t) => t,
        }
    }

    /// Report label such as `a(s)` or `all(ls)`.
    pub fn label(self) -> String {
        match self {
            Scope::Vowel(v, t) => format!("{v}({t})"),
            Scope::All(t) => format!("all({t})"),
        }
    }

    /// File-name stem such as `a_s` or `all_ls`.
    pub fn stem(self) -> String {
        match self {
            Scope::Vowel(v, t) => format!("{v}_{t}"),
            Scope::All(t) => format!("all_{t}"),
        }
    }

    /// The five single-vowel scopes plus the all-vowel scope of each task.
    pub fn every(tasks: &[Task]) -> Vec<Scope> {
        let mut out = Vec::new();
        for &t in tasks {
            out.extend(Vowel::ALL.iter().map(|&v| Scope::Vowel(v, t)));
            out.push(Scope::All(t));
        }
        out
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Vowel(v, t) => write!(f, "{v}-{t}"),
            Scope::All(t) => write!(f, "all-{t}"),
        }
    }
}

impl FromStr for Scope {
    type Err = Error;

    /// Accepts `a-s`, `a_s`, `a:s`, `a(s)` and the same forms with `all`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let (head, tail) = if let Some(stripped) = t.strip_suffix(')') {
            stripped
                .split_once('(')
                .ok_or_else(|| Error::InvalidParameter(format!("bad scope '{s}'")))?
        } else {
            t.split_once(['-', '_', ':'])
                .ok_or_else(|| Error::InvalidParameter(format!("bad scope '{s}'")))?
        };
        let task: Task = tail.parse()?;
        if head == "all" {
            Ok(Scope::All(task))
        } else {
            Ok(Scope::Vowel(head.parse()?, task))
        }
    }
}

/// Extraction results keyed by (subject, vowel, task).
pub type Extracted = BTreeMap<(String, Vowel, Task), RecordingFeatures>;

/// Subjects × columns table; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub columns: Vec<String>,
    pub subjects: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    /// Optional named target column (clinical score or group label).
    pub target: Option<(String, Vec<Option<f64>>)>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.subjects.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, j: usize) -> Vec<Option<f64>> {
        self.values.iter().map(|r| r[j]).collect()
    }

    pub fn with_target(mut self, name: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        assert_eq!(
            values.len(),
            self.n_rows(),
            "target length must match row count"
        );
        self.target = Some((name.into(), values));
        self
    }

    /// Fraction of missing cells.
    pub fn missing_fraction(&self) -> f64 {
        let total = self.n_rows() * self.n_cols();
        if total == 0 {
            return 0.0;
        }
        let missing: usize = self
            .values
            .iter()
            .map(|r| r.iter().filter(|v| v.is_none()).count())
            .sum();
        missing as f64 / total as f64
    }

    /// CSV text: `subject`, then `target:<name>` when present, then the
    /// feature columns. Missing cells are empty.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let mut header = vec!["subject".to_string()];
        if let Some((name, _)) = &self.target {
            header.push(format!("target:{name}"));
        }
        header.extend(self.columns.iter().cloned());
        out.push_str(&header.join(","));
        out.push('\n');
        let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for (i, subject) in self.subjects.iter().enumerate() {
            let mut row = vec![subject.clone()];
            if let Some((_, t)) = &self.target {
                row.push(cell(t[i]));
            }
            row.extend(self.values[i].iter().map(|v| cell(*v)));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv_string().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.first().map(String::as_str) != Some("subject") {
            return Err(Error::Table(
                "feature matrix must start with a 'subject' column".into(),
            ));
        }
        let target_name = header
            .get(1)
            .and_then(|h| h.strip_prefix("target:"))
            .map(str::to_string);
        let first_feature = if target_name.is_some() { 2 } else { 1 };
        let parse = |s: &str| -> Result<Option<f64>> {
            if s.trim().is_empty() {
                return Ok(None);
            }
            s.trim()
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Table(format!("bad numeric cell '{s}'")))
        };
        let mut subjects = Vec::new();
        let mut values = Vec::new();
        let mut target = Vec::new();
        for record in reader.records() {
            let record = record?;
            subjects.push(record[0].to_string());
            if target_name.is_some() {
                target.push(parse(&record[1])?);
            }
            values.push(
                record
                    .iter()
                    .skip(first_feature)
                    .map(parse)
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(Self {
            columns: header[first_feature..].to_vec(),
            subjects,
            values,
            target: target_name.map(|n| (n, target)),
        })
    }
}

/// Registry-ordered values of one recording. Cross-vowel features are left
/// missing; [`build_matrix`] fills them.
pub fn recording_row(f: &RecordingFeatures) -> Vec<Option<f64>> {
    let mut row = Vec::with_capacity(column_names().len());
    for spec in REGISTRY {
        push_feature(&mut row, spec, Some(f));
    }
    row
}

fn push_feature(row: &mut Vec<Option<f64>>, spec: &FeatureSpec, f: Option<&RecordingFeatures>) {
    match spec.kind {
        FeatureKind::Scalar => {
            let v = if spec.cross_vowel {
                None
            } else {
                f.and_then(|f| f.scalars.get(spec.name))
                    .copied()
                    .filter(|v| v.is_finite())
            };
            row.push(v);
        }
        FeatureKind::Contour => match f
            .and_then(|f| f.contours.get(spec.name))
            .and_then(|c| summarize(c))
        {
            Some(s) => row.extend(s.values().map(Some)),
            None => row.extend([None; 5]),
        },
    }
}

/// Vowel-space indices of one subject and task from the [a], [i], [u]
/// recordings; `None` when a corner is missing or degenerate.
pub fn cross_vowel_values(extracted: &Extracted, subject: &str, task: Task) -> Option<[f64; 5]> {
    let corner = |v: Vowel| -> Option<VowelFormants> {
        let (f1, f2) = extracted
            .get(&(subject.to_string(), v, task))?
            .formant_medians()?;
        Some(VowelFormants::new(f1, f2))
    };
    let vs = vowel_space_features(corner(Vowel::A)?, corner(Vowel::I)?, corner(Vowel::U)?).ok()?;
    Some([vs.vsa, vs.ln_vsa, vs.fcr, vs.vai, vs.f2i_f2u])
}

fn cross_specs() -> impl Iterator<Item = &'static FeatureSpec> {
    REGISTRY.iter().filter(|f| f.cross_vowel)
}

/// One row per manifest subject. Single-vowel scopes use unprefixed registry
/// columns; all-vowel scopes prefix each vowel's columns (`a_jitter_local`)
/// and append the cross-vowel columns once, unprefixed.
pub fn build_matrix(
    manifest: &CohortManifest,
    extracted: &Extracted,
    scope: Scope,
) -> FeatureMatrix {
    let task = scope.task();
    let vowels: Vec<Vowel> = match scope {
        Scope::Vowel(v, _) => vec![v],
        Scope::All(_) => Vowel::ALL.to_vec(),
    };
    let mut columns = Vec::new();
    match scope {
        Scope::Vowel(..) => columns = column_names(),
        Scope::All(_) => {
            for v in &vowels {
                for spec in REGISTRY.iter().filter(|f| !f.cross_vowel) {
                    columns.extend(spec.columns().into_iter().map(|c| format!("{v}_{c}")));
                }
            }
            columns.extend(cross_specs().map(|f| f.name.to_string()));
        }
    }
    let mut subjects = Vec::new();
    let mut values = Vec::new();
    for row in &manifest.rows {
        let id = &row.subject_id;
        let cross = cross_vowel_values(extracted, id, task);
        let mut cells = Vec::with_capacity(columns.len());
        for &v in &vowels {
            let rec = extracted.get(&(id.clone(), v, task));
            if rec.is_none() {
                warn!("subject {id}: no features for {v}({task}); cells left missing");
            }
            let mut cross_idx = 0;
            for spec in REGISTRY {
                if spec.cross_vowel {
                    if matches!(scope, Scope::Vowel(..)) {
                        cells.push(cross.map(|c| c[cross_idx]).filter(|x| x.is_finite()));
                    }
                    cross_idx += 1;
                } else {
                    push_feature(&mut cells, spec, rec);
                }
            }
        }
        if matches!(scope, Scope::All(_)) {
            cells.extend(
                (0..cross_specs().count()).map(|k| cross.map(|c| c[k]).filter(|x| x.is_finite())),
            );
        }
        debug_assert_eq!(cells.len(), columns.len());
        subjects.push(id.clone());
        values.push(cells);
    }
    FeatureMatrix {
        columns,
        subjects,
        values,
        target: None,
    }
}

/// Registry as pretty JSON, with the expanded column names per feature.
pub fn registry_json() -> Result<String> {
    #[derive(Serialize)]
    struct Entry<'a> {
        #[serde(flatten)]
        spec: &'a FeatureSpec,
        columns: Vec<String>,
    }
    let entries: Vec<Entry> = REGISTRY
        .iter()
        .map(|spec| Entry {
            spec,
            columns: spec.columns(),
        })
        .collect();
    Ok(serde_json::to_string_pretty(&entries)?)
}
