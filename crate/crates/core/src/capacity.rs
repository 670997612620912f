//! Spectral efficiency of MIMO channels with equal, fixed per-antenna
//! transmit power, and averaging over user locations into [`SeTable`]s.

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::{CMatrix, ChannelSet};
use crate::model::{ModelError, SizeLadder};
use crate::table::SeTable;

/// Above this bound on the condition number of `I + rho G` the log-det is
/// taken from singular values instead of a Cholesky factor.
const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("per-antenna SNR must be positive and finite, got {0}")]
    InvalidSnr(f64),
    #[error("channel matrix has a non-finite entry")]
    NonFinite,
    #[error("channel matrix is empty")]
    Empty,
    #[error("sub-array {n_rx}x{n_tx} does not fit a {rx}x{tx} channel")]
    SubarrayOutOfRange {
        n_rx: usize,
        n_tx: usize,
        rx: usize,
        tx: usize,
    },
    #[error("no channels at {f_ghz} GHz can supply option `{option}` ({n_rx}x{n_tx}); records are {rx}x{tx}")]
    DimensionShortfall {
        f_ghz: f64,
        option: String,
        n_rx: usize,
        n_tx: usize,
        rx: usize,
        tx: usize,
    },
    #[error("size map has {got} entries for a ladder of {expected}")]
    SizeMapLength { expected: usize, got: usize },
    #[error("channel set is empty")]
    NoChannels,
    #[error(transparent)]
    Table(#[from] ModelError),
}

/// Linear receive SNR contributed by each transmit antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrConfig {
    rho_per_antenna: f64,
}

impl SnrConfig {
    pub fn new(rho_per_antenna: f64) -> Result<Self, CapacityError> {
        if !(rho_per_antenna > 0.0 && rho_per_antenna.is_finite()) {
            return Err(CapacityError::InvalidSnr(rho_per_antenna));
        }
        Ok(Self { rho_per_antenna })
    }

    pub fn from_db(db: f64) -> Result<Self, CapacityError> {
        Self::new(10f64.powf(db / 10.0))
    }

    pub fn rho(&self) -> f64 {
        self.rho_per_antenna
    }
}

/// `log2 det(I + rho H H^H)` in bits/s/Hz.
///
/// `rho` is not divided by the number of transmit antennas: every antenna
/// radiates the same fixed power. The determinant is evaluated on the
/// smaller of the two Gram forms.
pub fn mimo_se(h: &CMatrix, snr: SnrConfig) -> Result<f64, CapacityError> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(CapacityError::Empty);
    }
    if h.iter().any(|z| !z.is_finite()) {
        return Err(CapacityError::NonFinite);
    }
    let rho = snr.rho();
    let gram = if h.nrows() <= h.ncols() {
        h * h.adjoint()
    } else {
        h.adjoint() * h
    };
    let n = gram.nrows();
    let mut a = gram * Complex64::from(rho);
    for i in 0..n {
        a[(i, i)] += 1.0;
    }

    // eigenvalues of `a` are >= 1, so its trace bounds the condition number
    let trace: f64 = (0..n).map(|i| a[(i, i)].re).sum();
    let log2_det = if trace > CONDITION_LIMIT {
        svd_log2_det(h, rho)
    } else {
        cholesky_log_det(a)
            .map(|ln_det| ln_det / std::f64::consts::LN_2)
            .unwrap_or_else(|| svd_log2_det(h, rho))
    };
    Ok(log2_det.max(0.0))
}

/// Natural log-determinant of a Hermitian positive-definite matrix, or
/// `None` if a pivot is not positive.
fn cholesky_log_det(mut a: CMatrix) -> Option<f64> {
    let n = a.nrows();
    let mut ln_det = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= a[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let l_jj = d.sqrt();
        ln_det += 2.0 * l_jj.ln();
        a[(j, j)] = Complex64::from(l_jj);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= a[(i, k)] * a[(j, k)].conj();
            }
            a[(i, j)] = s / l_jj;
        }
    }
    Some(ln_det)
}

fn svd_log2_det(h: &CMatrix, rho: f64) -> f64 {
    h.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| (rho * s * s).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Spectral efficiency of the leading `n_rx x n_tx` block of `h`.
pub fn subarray_se(
    h: &CMatrix,
    n_rx: usize,
    n_tx: usize,
    snr: SnrConfig,
) -> Result<f64, CapacityError> {
    let (rx, tx) = h.shape();
    if n_rx == 0 || n_tx == 0 || n_rx > rx || n_tx > tx {
        return Err(CapacityError::SubarrayOutOfRange { n_rx, n_tx, rx, tx });
    }
    mimo_se(&h.view((0, 0), (n_rx, n_tx)).into_owned(), snr)
}

/// Pairwise summation in index order; the grouping depends only on length.
fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Mean spectral efficiency over users for every (option, frequency).
///
/// `size_map[k]` gives the `(n_rx, n_tx)` sub-array evaluated for ladder
/// option `k`; entry 0 is ignored (the zero option scores 0). Columns are the
/// distinct frequencies of `channels`, ascending; users are averaged in
/// user-id order.
pub fn build_se_table(
    channels: &ChannelSet,
    ladder: &SizeLadder,
    size_map: &[(usize, usize)],
    snr: SnrConfig,
) -> Result<SeTable, CapacityError> {
    if size_map.len() != ladder.len() {
        return Err(CapacityError::SizeMapLength {
            expected: ladder.len(),
            got: size_map.len(),
        });
    }
    let freqs = channels.frequencies();
    if freqs.is_empty() {
        return Err(CapacityError::NoChannels);
    }
    let mut values = vec![vec![0.0; freqs.len()]; ladder.len()];
    for (col, &f) in freqs.iter().enumerate() {
        let records = channels.at_frequency(f);
        let (rx, tx) = records[0].matrix.shape();
        for (opt, &(n_rx, n_tx)) in size_map.iter().enumerate().skip(1) {
            if n_rx > rx || n_tx > tx || n_rx == 0 || n_tx == 0 {
                return Err(CapacityError::DimensionShortfall {
                    f_ghz: f,
                    option: ladder.label(opt).to_string(),
                    n_rx,
                    n_tx,
                    rx,
                    tx,
                });
            }
            let per_user = records
                .iter()
                .map(|r| subarray_se(&r.matrix, n_rx, n_tx, snr))
                .collect::<Result<Vec<_>, _>>()?;
            values[opt][col] = pairwise_sum(&per_user) / per_user.len() as f64;
        }
    }
    Ok(SeTable::new(
        freqs,
        ladder.clone(),
        values,
        channels.scenario_label.clone(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_channel_has_zero_se() {
        let snr = SnrConfig::new(10.0).unwrap();
        for (r, t) in [(1, 1), (2, 3), (4, 1)] {
            assert_eq!(mimo_se(&CMatrix::zeros(r, t), snr).unwrap(), 0.0);
        }
    }

    #[test]
    fn siso_closed_form() {
        let h = CMatrix::from_element(1, 1, c(1.0, 0.0));
        assert_eq!(mimo_se(&h, SnrConfig::new(3.0).unwrap()).unwrap(), 2.0);
    }

    #[test]
    fn identity_two_by_two() {
        let h = CMatrix::identity(2, 2);
        let v = mimo_se(&h, SnrConfig::new(1.0).unwrap()).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn ill_conditioned_input_uses_singular_values() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 0)] = c(1e7, 0.0);
        h[(1, 1)] = c(1e-3, 0.0);
        let snr = SnrConfig::new(1.0).unwrap();
        let expected = ((1.0f64 + 1e14).log2()) + (1.0f64 + 1e-6).log2();
        let got = mimo_se(&h, snr).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn errors() {
        assert!(SnrConfig::new(0.0).is_err());
        assert!(SnrConfig::new(f64::INFINITY).is_err());
        assert!((SnrConfig::from_db(10.0).unwrap().rho() - 10.0).abs() < 1e-12);
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(
            mimo_se(&h, SnrConfig::new(1.0).unwrap()),
            Err(CapacityError::NonFinite)
        );
        let snr = SnrConfig::new(1.0).unwrap();
        assert!(subarray_se(&CMatrix::identity(2, 2), 3, 1, snr).is_err());
        assert!(subarray_se(&CMatrix::identity(2, 2), 0, 1, snr).is_err());
    }

    #[test]
    fn siso_sub_element() {
        let h = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let snr = SnrConfig::new(2.0).unwrap();
        let expected = (1.0 + 2.0 * h[(0, 0)].norm_sqr()).log2();
        assert_eq!(subarray_se(&h, 1, 1, snr).unwrap(), expected);
        assert_eq!(subarray_se(&h, 3, 3, snr).unwrap(), mimo_se(&h, snr).unwrap());
    }

    #[test]
    fn pairwise_sum_matches_plain_sum_on_exact_values() {
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
