//! Run configuration: defaults, then a `key = value` file, then flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pdvoice_core::{ClinicalScale, Scope, Task, Vowel};

use crate::error::{CliError, Result};

/// What classification or regression predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// PD (positive) versus HC.
    Group,
    Scale(ClinicalScale),
}

impl FromStr for Target {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("group") {
            return Ok(Target::Group);
        }
        s.parse::<ClinicalScale>()
            .map(Target::Scale)
            .map_err(|_| CliError::Config(format!("unknown target '{s}'")))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Group => f.write_str("group"),
            Target::Scale(s) => write!(f, "{s}"),
        }
    }
}

/// Learner used inside the selection wrapper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wrapper {
    Cart,
    Forest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub subjects: usize,
    pub pd_fraction: f64,
    pub vowels: Vec<Vowel>,
    pub tasks: Vec<Task>,
    pub secs: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subjects: 20,
            pd_fraction: 0.5,
            vowels: Vowel::ALL.to_vec(),
            tasks: vec![Task::S],
            secs: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Defaults to `<out>/manifest.csv`.
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
    /// Empty means every scope with data.
    pub scopes: Vec<Scope>,
    pub target: Option<Target>,
    pub seed: u64,
    pub mrmr_k: usize,
    pub sffs_patience: usize,
    /// Trees of the evaluation forest.
    pub trees: usize,
    pub wrapper: Wrapper,
    /// Trees of a forest wrapper.
    pub wrapper_trees: usize,
    pub max_features: Option<usize>,
    pub min_rated: usize,
    pub peak_normalize: bool,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            out: PathBuf::from("out"),
            scopes: Vec::new(),
            target: None,
            seed: 1,
            mrmr_k: 500,
            sffs_patience: 3,
            trees: 500,
            wrapper: Wrapper::Cart,
            wrapper_trees: 50,
            max_features: None,
            min_rated: 10,
            peak_normalize: false,
            synth: SynthConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value '{value}' for '{key}'")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(CliError::Config(format!(
            "invalid boolean '{value}' for '{key}'"
        ))),
    }
}

impl RunConfig {
    /// Sets one option by name. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "manifest" => self.manifest = Some(PathBuf::from(v)),
            "out" => self.out = PathBuf::from(v),
            "scope" | "scopes" => self.scopes = list(&key, v)?,
            "target" => self.target = Some(v.parse()?),
            "seed" => self.seed = parse(&key, v)?,
            "mrmr_k" => self.mrmr_k = parse(&key, v)?,
            "sffs_patience" => self.sffs_patience = parse(&key, v)?,
            "trees" => self.trees = parse(&key, v)?,
            "wrapper" => {
                self.wrapper = match v.to_ascii_lowercase().as_str() {
                    "cart" => Wrapper::Cart,
                    "forest" => Wrapper::Forest,
                    _ => return Err(CliError::Config(format!("unknown wrapper '{v}'"))),
                }
            }
            "wrapper_trees" => self.wrapper_trees = parse(&key, v)?,
            "max_features" => self.max_features = Some(parse(&key, v)?),
            "min_rated" => self.min_rated = parse(&key, v)?,
            "peak_normalize" => self.peak_normalize = boolean(&key, v)?,
            "subjects" => self.synth.subjects = parse(&key, v)?,
            "pd_fraction" => self.synth.pd_fraction = parse(&key, v)?,
            "vowels" => self.synth.vowels = list(&key, v)?,
            "tasks" => self.synth.tasks = list(&key, v)?,
            "secs" => self.synth.secs = parse(&key, v)?,
            _ => return Err(CliError::Config(format!("unknown option '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.mrmr_k == 0 {
            return bad("mrmr_k must be positive");
        }
        if self.trees == 0 || self.wrapper_trees == 0 {
            return bad("tree counts must be positive");
        }
        if !(0.0..=1.0).contains(&self.synth.pd_fraction) {
            return bad("pd_fraction must lie in [0, 1]");
        }
        if !(self.synth.secs > 0.2) {
            return bad("secs must exceed 0.2");
        }
        if self.synth.vowels.is_empty() || self.synth.tasks.is_empty() {
            return bad("vowels and tasks must not be empty");
        }
        Ok(())
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.manifest
            .clone()
            .unwrap_or_else(|| self.out.join("manifest.csv"))
    }

    pub fn features_dir(&self) -> PathBuf {
        self.out.join("features")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.out.join("reports")
    }

    pub fn matrix_path(&self, scope: Scope) -> PathBuf {
        self.features_dir().join(format!("{}.csv", scope.stem()))
    }
}
