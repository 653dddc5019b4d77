//! Cohort manifest: subjects, group labels, clinical scores and recording paths.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::{Task, Vowel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "PD")]
    Pd,
    #[serde(rename = "HC")]
    Hc,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Pd => "PD",
            Group::Hc => "HC",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "PD" => Ok(Group::Pd),
            "HC" => Ok(Group::Hc),
            other => Err(Error::InvalidParameter(format!("unknown group '{other}'"))),
        }
    }
}

/// Clinical rating scales with their theoretical score ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClinicalScale {
    Duration,
    Updrs3,
    Updrs4,
    Rbdsq,
    Fog,
    Nmss,
    Bdi,
    Mmse,
    Acer,
    Led,
}

impl ClinicalScale {
    pub const ALL: [ClinicalScale; 10] = [
        ClinicalScale::Duration,
        ClinicalScale::Updrs3,
        ClinicalScale::Updrs4,
        ClinicalScale::Rbdsq,
        ClinicalScale::Fog,
        ClinicalScale::Nmss,
        ClinicalScale::Bdi,
        ClinicalScale::Mmse,
        ClinicalScale::Acer,
        ClinicalScale::Led,
    ];

    /// Column name in the manifest CSV.
    pub fn id(self) -> &'static str {
        match self {
            ClinicalScale::Duration => "duration",
            ClinicalScale::Updrs3 => "updrs3",
            ClinicalScale::Updrs4 => "updrs4",
            ClinicalScale::Rbdsq => "rbdsq",
            ClinicalScale::Fog => "fog",
            ClinicalScale::Nmss => "nmss",
            ClinicalScale::Bdi => "bdi",
            ClinicalScale::Mmse => "mmse",
            ClinicalScale::Acer => "acer",
            ClinicalScale::Led => "led",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ClinicalScale::Duration => "PD duration",
            ClinicalScale::Updrs3 => "UPDRS III",
            ClinicalScale::Updrs4 => "UPDRS IV",
            ClinicalScale::Rbdsq => "RBDSQ",
            ClinicalScale::Fog => "FOG",
            ClinicalScale::Nmss => "NMSS",
            ClinicalScale::Bdi => "BDI",
            ClinicalScale::Mmse => "MMSE",
            ClinicalScale::Acer => "ACE-R",
            ClinicalScale::Led => "LED (mg)",
        }
    }

    pub fn theoretical_min(self) -> f64 {
        0.0
    }

    /// Maximal reachable score; `None` for unbounded quantities.
    pub fn theoretical_max(self) -> Option<f64> {
        match self {
            ClinicalScale::Duration | ClinicalScale::Led => None,
            ClinicalScale::Updrs3 => Some(108.0),
            ClinicalScale::Updrs4 => Some(23.0),
            ClinicalScale::Rbdsq => Some(13.0),
            ClinicalScale::Fog => Some(24.0),
            ClinicalScale::Nmss => Some(360.0),
            ClinicalScale::Bdi => Some(63.0),
            ClinicalScale::Mmse => Some(30.0),
            ClinicalScale::Acer => Some(100.0),
        }
    }

    pub fn contains(self, value: f64) -> bool {
        value.is_finite()
            && value >= self.theoretical_min()
            && self.theoretical_max().is_none_or(|m| value <= m)
    }
}

impl fmt::Display for ClinicalScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ClinicalScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
        ClinicalScale::ALL
            .into_iter()
            .find(|c| c.id() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown clinical scale '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectRow {
    pub subject_id: String,
    pub group: Group,
    pub sex: Option<String>,
    pub age: Option<f64>,
    pub scores: BTreeMap<ClinicalScale, f64>,
    pub recordings: BTreeMap<(Vowel, Task), PathBuf>,
}

impl SubjectRow {
    pub fn score(&self, scale: ClinicalScale) -> Option<f64> {
        self.scores.get(&scale).copied()
    }

    pub fn recording(&self, vowel: Vowel, task: Task) -> Option<&Path> {
        self.recordings.get(&(vowel, task)).map(PathBuf::as_path)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CohortManifest {
    pub rows: Vec<SubjectRow>,
}

impl CohortManifest {
    pub fn group_counts(&self) -> (usize, usize) {
        let pd = self.rows.iter().filter(|r| r.group == Group::Pd).count();
        (pd, self.rows.len() - pd)
    }

    pub fn subject(&self, id: &str) -> Option<&SubjectRow> {
        self.rows.iter().find(|r| r.subject_id == id)
    }

    /// Tasks referenced by at least one recording, in canonical order.
    pub fn tasks(&self) -> Vec<Task> {
        let present: HashSet<Task> = self
            .rows
            .iter()
            .flat_map(|r| r.recordings.keys().map(|(_, t)| *t))
            .collect();
        Task::ALL
            .into_iter()
            .filter(|t| present.contains(t))
            .collect()
    }

    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
        let pairs: Vec<(Vowel, Task)> = Task::ALL
            .iter()
            .flat_map(|t| Vowel::ALL.iter().map(move |v| (*v, *t)))
            .filter(|k| self.rows.iter().any(|r| r.recordings.contains_key(k)))
            .collect();
        header.extend(pairs.iter().map(|(v, t)| format!("path_{v}_{t}")));
        w.write_record(&header)?;
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for row in &self.rows {
            let mut rec = vec![
                row.subject_id.clone(),
                row.group.to_string(),
                row.sex.clone().unwrap_or_default(),
                fmt(row.age),
            ];
            rec.extend(ClinicalScale::ALL.iter().map(|s| fmt(row.score(*s))));
            rec.extend(pairs.iter().map(|k| {
                row.recordings
                    .get(k)
                    .map(|p| p.display().to_string())
                    .unwrap_or_default()
            }));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

const BASE_COLUMNS: [&str; 14] = [
    "subject_id",
    "group",
    "sex",
    "age",
    "duration",
    "updrs3",
    "updrs4",
    "rbdsq",
    "fog",
    "nmss",
    "bdi",
    "mmse",
    "acer",
    "led",
];

fn parse_path_column(name: &str) -> Option<(Vowel, Task)> {
    let rest = name.strip_prefix("path_")?;
    let (v, t) = rest.split_once('_')?;
    Some((v.parse().ok()?, t.parse().ok()?))
}

/// Reads the cohort CSV. Relative recording paths resolve against the
/// manifest's directory; empty cells are missing values.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<CohortManifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_manifest(file, &base_dir)
}

pub fn parse_manifest(reader: impl std::io::Read, base_dir: &Path) -> Result<CohortManifest> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    for (i, expected) in BASE_COLUMNS.iter().enumerate() {
        if header.get(i) != Some(*expected) {
            return Err(Error::Manifest {
                line: 1,
                message: format!(
                    "column {} must be '{expected}', found '{}'",
                    i + 1,
                    header.get(i).unwrap_or("")
                ),
            });
        }
    }
    let mut path_cols = Vec::new();
    for (i, name) in header.iter().enumerate().skip(BASE_COLUMNS.len()) {
        let key = parse_path_column(name).ok_or_else(|| Error::Manifest {
            line: 1,
            message: format!("unexpected column '{name}'"),
        })?;
        path_cols.push((i, key));
    }

    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (idx, record) in rdr.records().enumerate() {
        let line = idx + 2;
        let record = record?;
        let err = |message: String| Error::Manifest { line, message };
        let cell = |i: usize| record.get(i).filter(|s| !s.is_empty());
        let number = |i: usize| -> Result<Option<f64>> {
            cell(i)
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        err(format!(
                            "'{s}' in column {} is not a number",
                            header[i].to_string()
                        ))
                    })
                })
                .transpose()
        };

        let subject_id = cell(0)
            .ok_or_else(|| err("missing subject_id".into()))?
            .to_string();
        if !seen.insert(subject_id.clone()) {
            return Err(err(format!("duplicate subject_id '{subject_id}'")));
        }
        let group: Group = cell(1).unwrap_or("").parse().map_err(|_| {
            err(format!(
                "unknown group label '{}'",
                record.get(1).unwrap_or("")
            ))
        })?;
        let sex = cell(2).map(str::to_string);
        let age = number(3)?;
        let mut scores = BTreeMap::new();
        for (offset, scale) in ClinicalScale::ALL.iter().enumerate() {
            if let Some(v) = number(4 + offset)? {
                if !scale.contains(v) {
                    let range = match scale.theoretical_max() {
                        Some(m) => format!("0..={m}"),
                        None => "0..".to_string(),
                    };
                    return Err(err(format!(
                        "{} = {v} outside theoretical range {range}",
                        scale.id()
                    )));
                }
                scores.insert(*scale, v);
            }
        }
        let mut recordings = BTreeMap::new();
        for (i, key) in &path_cols {
            if let Some(p) = cell(*i) {
                let p = PathBuf::from(p);
                let resolved = if p.is_absolute() { p } else { base_dir.join(p) };
                recordings.insert(*key, resolved);
            }
        }
        rows.push(SubjectRow {
            subject_id,
            group,
            sex,
            age,
            scores,
            recordings,
        });
    }
    Ok(CohortManifest { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "subject_id,group,sex,age,duration,updrs3,updrs4,rbdsq,fog,nmss,bdi,mmse,acer,led,path_a_s,path_e_ll";

    fn parse(body: &str) -> Result<CohortManifest> {
        let text = format!("{HEADER}\n{body}");
        parse_manifest(text.as_bytes(), Path::new("/data"))
    }

    #[test]
    fn mmse_above_thirty_is_rejected() {
        let err = parse("p1,PD,F,60,5,20,2,3,4,30,10,31,90,500,a.wav,").unwrap_err();
        assert!(err.to_string().contains("mmse"), "{err}");
    }

    #[test]
    fn control_without_scores_is_accepted() {
        let m = parse("h1,HC,M,61,,,,,,,,,,,a.wav,e.wav").unwrap();
        assert!(m.rows[0].scores.is_empty());
        assert_eq!(
            m.rows[0].recording(Vowel::E, Task::Ll),
            Some(Path::new("/data/e.wav"))
        );
        assert_eq!(m.rows[0].recording(Vowel::A, Task::L), None);
    }

    #[test]
    fn group_counts_follow_rows() {
        let mut body = String::new();
        for i in 0..84 {
            body.push_str(&format!("p{i},PD,F,60,5,20,2,3,4,30,10,28,90,500,,\n"));
        }
        for i in 0..49 {
            body.push_str(&format!("h{i},HC,M,60,,,,,,,,,,,,\n"));
        }
        assert_eq!(parse(&body).unwrap().group_counts(), (84, 49));
    }

    #[test]
    fn duplicate_and_bad_group_fail() {
        assert!(parse("p1,PD,,,,,,,,,,,,,,\np1,HC,,,,,,,,,,,,,,").is_err());
        assert!(parse("p1,XX,,,,,,,,,,,,,,").is_err());
    }

    #[test]
    fn unbounded_scales_accept_large_values() {
        let m = parse("p1,PD,,,40,,,,,,,,,5000,,").unwrap();
        assert_eq!(m.rows[0].score(ClinicalScale::Led), Some(5000.0));
        assert!(parse("p1,PD,,,-1,,,,,,,,,,,").is_err());
    }

    #[test]
    fn scale_parsing() {
        assert_eq!(
            "ACE-R".parse::<ClinicalScale>().unwrap(),
            ClinicalScale::Acer
        );
        assert_eq!(
            "updrs3".parse::<ClinicalScale>().unwrap(),
            ClinicalScale::Updrs3
        );
    }
}
