//! Spectral-efficiency tables indexed by (MIMO size option, subband), their
//! CSV representation, and the two measured reference tables.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, SizeLadder, DEFAULT_CENTERS_GHZ};

/// Spectral efficiency in bits/s/Hz per ladder option (rows) and subband
/// (columns). The zero option row is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeTable {
    subband_centers: Vec<f64>,
    ladder: SizeLadder,
    values: Vec<Vec<f64>>,
    provenance: String,
}

#[derive(Debug, Error)]
pub enum TableCsvError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Invalid(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SeTable {
    pub fn new(
        subband_centers: Vec<f64>,
        ladder: SizeLadder,
        values: Vec<Vec<f64>>,
        provenance: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let invalid = |msg: String| Err(ModelError::InvalidTable(msg));
        if subband_centers.is_empty() {
            return invalid("no subbands".into());
        }
        if subband_centers
            .iter()
            .any(|f| !f.is_finite() || *f <= 0.0)
        {
            return invalid("subband centers must be positive and finite".into());
        }
        if values.len() != ladder.len() {
            return invalid(format!(
                "{} rows for a ladder of {} options",
                values.len(),
                ladder.len()
            ));
        }
        for (r, row) in values.iter().enumerate() {
            if row.len() != subband_centers.len() {
                return invalid(format!(
                    "row {r} has {} values for {} subbands",
                    row.len(),
                    subband_centers.len()
                ));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return invalid(format!("row {r} holds invalid value {v}"));
            }
        }
        if values[0].iter().any(|&v| v != 0.0) {
            return invalid("zero-option row must be identically zero".into());
        }
        Ok(Self {
            subband_centers,
            ladder,
            values,
            provenance: provenance.into(),
        })
    }

    pub fn subband_centers(&self) -> &[f64] {
        &self.subband_centers
    }

    pub fn ladder(&self) -> &SizeLadder {
        &self.ladder
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn num_subbands(&self) -> usize {
        self.subband_centers.len()
    }

    pub fn value(&self, option: usize, subband: usize) -> f64 {
        self.values[option][subband]
    }

    /// Column whose center matches `f_ghz` within 1 kHz.
    pub fn column_of(&self, f_ghz: f64) -> Option<usize> {
        self.subband_centers
            .iter()
            .position(|&c| (c - f_ghz).abs() < 1e-6)
    }

    /// Same values with another ladder of identical costs (e.g. to restore
    /// size labels after reading a CSV).
    pub fn relabeled(mut self, ladder: SizeLadder) -> Result<Self, ModelError> {
        let same = ladder.len() == self.ladder.len()
            && ladder
                .options()
                .iter()
                .zip(self.ladder.options())
                .all(|(a, b)| a.cost == b.cost);
        if !same {
            return Err(ModelError::InvalidTable(
                "relabeling ladder has different costs".into(),
            ));
        }
        self.ladder = ladder;
        Ok(self)
    }

    /// Renders `cost,<f1>,<f2>,...` followed by one row per option,
    /// zero row included. Values carry at least three decimals and enough
    /// digits to be read back exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cost");
        for f in &self.subband_centers {
            write!(out, ",{f}").unwrap();
        }
        out.push('\n');
        for (opt, row) in self.ladder.options().iter().zip(&self.values) {
            write!(out, "{}", opt.cost).unwrap();
            for &v in row {
                write!(out, ",{}", format_se(v)).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form. A missing zero row is synthesized; labels are
    /// the costs themselves.
    pub fn from_csv(text: &str, provenance: impl Into<String>) -> Result<Self, TableCsvError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(TableCsvError::Parse {
            line: 1,
            reason: "empty input".into(),
        })?;
        let mut cols = header.split(',').map(str::trim);
        if cols.next() != Some("cost") {
            return Err(TableCsvError::Parse {
                line: hline,
                reason: "header must start with `cost`".into(),
            });
        }
        let centers = cols
            .map(|c| {
                c.parse::<f64>().map_err(|_| TableCsvError::Parse {
                    line: hline,
                    reason: format!("bad frequency `{c}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut costs = Vec::new();
        let mut values = Vec::new();
        for (line, row) in lines {
            let mut fields = row.split(',').map(str::trim);
            let cost_str = fields.next().unwrap_or_default();
            let cost = cost_str.parse::<u32>().map_err(|_| TableCsvError::Parse {
                line,
                reason: format!("bad cost `{cost_str}`"),
            })?;
            let vals = fields
                .map(|v| {
                    v.parse::<f64>().map_err(|_| TableCsvError::Parse {
                        line,
                        reason: format!("bad value `{v}`"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != centers.len() {
                return Err(TableCsvError::Parse {
                    line,
                    reason: format!("expected {} values, found {}", centers.len(), vals.len()),
                });
            }
            costs.push(cost);
            values.push(vals);
        }
        if costs.first() != Some(&0) {
            costs.insert(0, 0);
            values.insert(0, vec![0.0; centers.len()]);
        }
        let ladder = SizeLadder::from_costs(&costs)?;
        Ok(Self::new(centers, ladder, values, provenance)?)
    }

    pub fn read_csv(path: &Path) -> Result<Self, TableCsvError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text, path.display().to_string())
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), TableCsvError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Shortest exact decimal form, padded to at least three decimals.
pub(crate) fn format_se(v: f64) -> String {
    let mut s = format!("{v}");
    let decimals = match s.find('.') {
        Some(dot) => s.len() - dot - 1,
        None => {
            s.push('.');
            0
        }
    };
    for _ in decimals..3 {
        s.push('0');
    }
    s
}

const INDOOR_ROWS: [[f64; 5]; 9] = [
    [6.525, 6.553, 6.527, 6.520, 6.451],
    [9.145, 9.286, 8.969, 9.202, 9.126],
    [12.252, 11.917, 11.427, 11.962, 11.733],
    [15.617, 15.299, 15.045, 15.348, 15.141],
    [17.986, 17.460, 17.126, 17.359, 17.208],
    [20.486, 19.604, 19.278, 19.406, 19.182],
    [23.606, 22.576, 22.247, 22.579, 21.980],
    [25.738, 24.568, 24.125, 24.459, 23.813],
    [28.083, 26.606, 26.150, 26.394, 25.630],
];

const OUTDOOR_ROWS: [[f64; 5]; 9] = [
    [6.302, 6.720, 6.258, 6.514, 6.553],
    [8.737, 9.152, 8.537, 8.649, 8.677],
    [10.405, 10.882, 10.250, 10.184, 10.302],
    [12.377, 13.339, 13.004, 13.279, 12.769],
    [13.587, 14.635, 14.438, 14.815, 14.170],
    [14.743, 15.934, 15.723, 16.036, 15.340],
    [16.354, 17.956, 17.696, 18.056, 17.434],
    [17.373, 19.070, 18.878, 19.336, 18.645],
    [18.422, 20.200, 19.983, 20.446, 19.690],
];

fn builtin(rows: &[[f64; 5]; 9], provenance: &str) -> SeTable {
    let values = std::iter::once(vec![0.0; 5])
        .chain(rows.iter().map(|r| r.to_vec()))
        .collect();
    SeTable::new(
        DEFAULT_CENTERS_GHZ.to_vec(),
        SizeLadder::linear(9),
        values,
        provenance,
    )
    .expect("builtin tables are valid")
}

/// Ray-traced indoor laboratory averages (100 user locations), sizes
/// 1x1..9x9 at 7, 10, 14, 20 and 24 GHz.
pub fn builtin_indoor() -> SeTable {
    builtin(&INDOOR_ROWS, "builtin:indoor")
}

/// Ray-traced outdoor urban macro averages (20 user positions).
pub fn builtin_outdoor() -> SeTable {
    builtin(&OUTDOOR_ROWS, "builtin:outdoor")
}

/// `(indoor, outdoor)` reference tables.
pub fn builtin_tables() -> (SeTable, SeTable) {
    (builtin_indoor(), builtin_outdoor())
}
