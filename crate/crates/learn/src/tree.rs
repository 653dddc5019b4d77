//! CART with Gini (classification) or variance (regression) splitting.
//!
//! Thresholds sit halfway between neighbouring distinct values and rows with
//! `x <= threshold` go left. Equal gains keep the first candidate in
//! (feature, threshold) order.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Targets are class ids `0, 1, ...` stored as `f64`.
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub mode: Mode,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl TreeParams {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            max_depth: None,
            min_leaf: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub mode: Mode,
    pub n_features: usize,
    /// Node arena; the root is `nodes[0]`.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &TreeParams) -> Result<Self> {
        let rows: Vec<usize> = (0..y.len()).collect();
        fit_rows(
            x,
            y,
            &rows,
            params,
            None::<(&mut rand_chacha::ChaCha8Rng, usize)>,
        )
    }

    pub fn predict(&self, row: &[f64]) -> Result<f64> {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return Ok(*value),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let v = *row.get(*feature).ok_or(Error::MissingFeature(*feature))?;
                    if !v.is_finite() {
                        return Err(Error::MissingFeature(*feature));
                    }
                    at = if v <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Feature indices used by at least one split, ascending.
    pub fn used_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

/// Grows a tree on `rows` (repeats allowed, as in a bootstrap sample). With
/// `subsample = Some((rng, m))` each node considers `m` random features.
pub fn fit_rows<R: Rng>(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    params: &TreeParams,
    subsample: Option<(&mut R, usize)>,
) -> Result<DecisionTree> {
    if rows.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidParameter("min_leaf must be positive".into()));
    }
    let n_features = x.first().map_or(0, Vec::len);
    if x.iter().any(|r| r.len() != n_features) || x.len() != y.len() {
        return Err(Error::InvalidParameter("ragged design matrix".into()));
    }
    if y.iter().any(|v| !v.is_finite()) || rows.iter().any(|&i| x[i].iter().any(|v| !v.is_finite()))
    {
        return Err(Error::InvalidParameter("non-finite training value".into()));
    }
    let n_classes = match params.mode {
        Mode::Classification => {
            if y.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
                return Err(Error::InvalidParameter(
                    "class labels must be non-negative integers".into(),
                ));
            }
            y.iter().fold(0.0f64, |m, v| m.max(*v)) as usize + 1
        }
        Mode::Regression => 0,
    };
    let mut builder = Builder {
        x,
        y,
        params,
        n_classes,
        n_features,
        nodes: Vec::new(),
        subsample,
    };
    builder.grow(rows.to_vec(), 0);
    Ok(DecisionTree {
        mode: params.mode,
        n_features,
        nodes: builder.nodes,
    })
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a TreeParams,
    n_classes: usize,
    n_features: usize,
    nodes: Vec<Node>,
    subsample: Option<(&'a mut R, usize)>,
}

struct Split {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Running statistics of one side of a split.
#[derive(Clone)]
struct Stats {
    n: f64,
    sum: f64,
    sumsq: f64,
    counts: Vec<f64>,
}

impl Stats {
    fn new(n_classes: usize) -> Self {
        Stats {
            n: 0.0,
            sum: 0.0,
            sumsq: 0.0,
            counts: vec![0.0; n_classes],
        }
    }

    fn add(&mut self, y: f64, sign: f64) {
        self.n += sign;
        self.sum += sign * y;
        self.sumsq += sign * y * y;
        if !self.counts.is_empty() {
            self.counts[y as usize] += sign;
        }
    }

    /// Size-weighted impurity: SSE for regression, `n * gini` for classes.
    fn impurity(&self, mode: Mode) -> f64 {
        if self.n <= 0.0 {
            return 0.0;
        }
        match mode {
            Mode::Regression => (self.sumsq - self.sum * self.sum / self.n).max(0.0),
            Mode::Classification => {
                self.n - self.counts.iter().map(|c| c * c).sum::<f64>() / self.n
            }
        }
    }
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.leaf_value(&rows),
        });
        let limit = self.params.max_depth.is_some_and(|d| depth >= d);
        if limit || rows.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(&rows) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }

    fn leaf_value(&self, rows: &[usize]) -> f64 {
        match self.params.mode {
            Mode::Regression => rows.iter().map(|&i| self.y[i]).sum::<f64>() / rows.len() as f64,
            Mode::Classification => {
                let mut counts = vec![0usize; self.n_classes];
                for &i in rows {
                    counts[self.y[i] as usize] += 1;
                }
                // First maximum: ties go to the lowest class id.
                let mut best = 0;
                for (c, &k) in counts.iter().enumerate() {
                    if k > counts[best] {
                        best = c;
                    }
                }
                best as f64
            }
        }
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let p = self.n_features;
        match self.subsample.as_mut() {
            Some((rng, m)) if *m < p => {
                let mut f = index::sample(*rng, p, *m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..p).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<Split> {
        let mode = self.params.mode;
        let min_leaf = self.params.min_leaf as f64;
        let mut total = Stats::new(self.n_classes);
        for &i in rows {
            total.add(self.y[i], 1.0);
        }
        let parent = total.impurity(mode);
        if parent <= 0.0 {
            return None;
        }
        let tol = 1e-12 * parent;
        let mut best: Option<Split> = None;
        let mut order = rows.to_vec();
        for f in self.candidate_features() {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left = Stats::new(self.n_classes);
            let mut right = total.clone();
            for w in 0..order.len() - 1 {
                let yi = self.y[order[w]];
                left.add(yi, 1.0);
                right.add(yi, -1.0);
                let (lo, hi) = (self.x[order[w]][f], self.x[order[w + 1]][f]);
                if lo == hi || left.n < min_leaf || right.n < min_leaf {
                    continue;
                }
                let gain = parent - left.impurity(mode) - right.impurity(mode);
                if gain > tol && best.as_ref().is_none_or(|b| gain > b.gain + tol) {
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some(Split {
                        feature: f,
                        threshold: if mid < hi { mid } else { lo },
                        gain,
                    });
                }
            }
        }
        best
    }
}
