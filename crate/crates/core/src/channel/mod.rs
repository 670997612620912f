//! MIMO channel matrices per user location and frequency, either generated
//! by a clustered multipath model or read from exported channel files.

mod file;
mod synth;

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub use file::{parse_channels, read_channels, write_channels, ChannelParseError, ParseErrorKind};
pub use synth::{sub_seed, synth_generate, ScenarioConfig, ScenarioKind};

pub type CMatrix = DMatrix<Complex64>;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("{what} must be positive, got {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("invalid scenario config field `{field}`: {reason}")]
    Config { field: &'static str, reason: String },
    #[error("record user={user} f={f_ghz} GHz: {reason}")]
    InvalidRecord { user: u32, f_ghz: f64, reason: String },
    #[error("duplicate record for user {user} at {f_ghz} GHz")]
    DuplicateKey { user: u32, f_ghz: f64 },
}

/// Free-space path loss `20 log10(4 pi d f / c)` in dB.
pub fn fspl_db(distance_m: f64, f_ghz: f64) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0 && distance_m.is_finite()) {
        return Err(ChannelError::Domain {
            what: "distance",
            value: distance_m,
        });
    }
    if !(f_ghz > 0.0 && f_ghz.is_finite()) {
        return Err(ChannelError::Domain {
            what: "frequency",
            value: f_ghz,
        });
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance_m * f_ghz * 1e9 / SPEED_OF_LIGHT).log10())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRecord {
    pub user_id: u32,
    pub f_center: f64,
    /// `rx x tx` complex amplitude gains.
    pub matrix: CMatrix,
}

impl ChannelRecord {
    pub fn new(user_id: u32, f_center: f64, matrix: CMatrix) -> Result<Self, ChannelError> {
        let invalid = |reason: &str| ChannelError::InvalidRecord {
            user: user_id,
            f_ghz: f_center,
            reason: reason.to_string(),
        };
        if !(f_center > 0.0 && f_center.is_finite()) {
            return Err(invalid("frequency must be positive"));
        }
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(invalid("matrix must be at least 1x1"));
        }
        if matrix.iter().any(|z| !z.is_finite()) {
            return Err(invalid("non-finite matrix entry"));
        }
        Ok(Self {
            user_id,
            f_center,
            matrix,
        })
    }

    pub fn rx(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tx(&self) -> usize {
        self.matrix.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    records: Vec<ChannelRecord>,
    pub scenario_label: String,
    /// Generator seed; `None` for ingested channels.
    pub seed: Option<u64>,
}

impl ChannelSet {
    /// At most one record per `(user, frequency)`; all records at one
    /// frequency share dimensions.
    pub fn new(
        records: Vec<ChannelRecord>,
        scenario_label: impl Into<String>,
        seed: Option<u64>,
    ) -> Result<Self, ChannelError> {
        let mut keys = BTreeSet::new();
        for r in &records {
            if !keys.insert((r.user_id, r.f_center.to_bits())) {
                return Err(ChannelError::DuplicateKey {
                    user: r.user_id,
                    f_ghz: r.f_center,
                });
            }
            let first = records.iter().find(|o| o.f_center == r.f_center).unwrap();
            if first.matrix.shape() != r.matrix.shape() {
                return Err(ChannelError::InvalidRecord {
                    user: r.user_id,
                    f_ghz: r.f_center,
                    reason: format!(
                        "dimensions {:?} differ from {:?} at the same frequency",
                        r.matrix.shape(),
                        first.matrix.shape()
                    ),
                });
            }
        }
        Ok(Self {
            records,
            scenario_label: scenario_label.into(),
            seed,
        })
    }

    pub fn records(&self) -> &[ChannelRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct frequencies, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut f: Vec<f64> = self.records.iter().map(|r| r.f_center).collect();
        f.sort_by(f64::total_cmp);
        f.dedup();
        f
    }

    /// Records at `f_ghz`, ordered by user id.
    pub fn at_frequency(&self, f_ghz: f64) -> Vec<&ChannelRecord> {
        let mut v: Vec<_> = self.records.iter().filter(|r| r.f_center == f_ghz).collect();
        v.sort_by_key(|r| r.user_id);
        v
    }
}
