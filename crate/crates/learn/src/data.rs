use pdvoice_core::FeatureMatrix;

/// Dense copy of some matrix columns restricted to rows where the target and
/// every chosen column are present.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    /// Row-major values; column `j` is `columns[j]` of the source matrix.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    /// Source row of each design row.
    pub rows: Vec<usize>,
    pub columns: Vec<usize>,
    /// Rows dropped for a missing value.
    pub dropped: usize,
}

impl Design {
    pub fn new(matrix: &FeatureMatrix, columns: &[usize], target: &[Option<f64>]) -> Self {
        let mut out = Design {
            x: Vec::new(),
            y: Vec::new(),
            rows: Vec::new(),
            columns: columns.to_vec(),
            dropped: 0,
        };
        for (i, row) in matrix.values.iter().enumerate() {
            let Some(t) = target[i].filter(|t| t.is_finite()) else {
                continue;
            };
            let vals: Option<Vec<f64>> = columns
                .iter()
                .map(|&j| row[j].filter(|v| v.is_finite()))
                .collect();
            match vals {
                Some(v) => {
                    out.x.push(v);
                    out.y.push(t);
                    out.rows.push(i);
                }
                None => out.dropped += 1,
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}
