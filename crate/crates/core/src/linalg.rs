//! Shared dense linear-algebra helpers: signed log-determinants, principal
//! submatrices, and subset enumeration over bitmasks.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Determinant reported as a sign and the log of the absolute value.
///
/// `sign` is `1.0`, `-1.0`, or `0.0`; when it is `0.0` the determinant is
/// exactly zero (a pivot vanished) and `log_abs` is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignLogDet {
    pub sign: f64,
    pub log_abs: f64,
}

impl SignLogDet {
    /// The determinant itself, `sign * exp(log_abs)`.
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }

    /// Natural log of the determinant if it is strictly positive.
    pub fn log_if_positive(&self) -> Option<f64> {
        (self.sign > 0.0).then_some(self.log_abs)
    }
}

/// Signed log-determinant via LU with partial pivoting.
///
/// Accumulating pivot log-magnitudes instead of the raw product keeps the
/// result finite for matrices whose determinant overflows or underflows f64.
pub fn sign_log_det(m: &DMatrix<f64>) -> SignLogDet {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols(), "sign_log_det needs a square matrix");
    if n == 0 {
        // det of the empty matrix is 1
        return SignLogDet { sign: 1.0, log_abs: 0.0 };
    }
    let lu = m.clone().lu();
    let mut sign: f64 = lu.p().determinant::<f64>();
    let mut log_abs = 0.0;
    let u = lu.u();
    for i in 0..n {
        let pivot = u[(i, i)];
        if pivot == 0.0 {
            return SignLogDet { sign: 0.0, log_abs: f64::NEG_INFINITY };
        }
        sign *= pivot.signum();
        log_abs += pivot.abs().ln();
    }
    SignLogDet { sign, log_abs }
}

/// Principal submatrix `m[idx, idx]`, rows and columns in the order of `idx`.
pub fn principal_submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])])
}

/// Rectangular block `m[rows, cols]`.
pub fn block(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// tr(a · b) without forming the product.
pub fn trace_prod(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut t = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

/// Items of a subset bitmask, ascending.
pub fn mask_members(mask: usize, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask & (1 << i) != 0).collect()
}

/// All subsets of `[m]` as bitmasks, `0..2^m`. Errors beyond the enumeration cap.
pub fn subset_masks(m: usize, cap: usize) -> Result<std::ops::Range<usize>> {
    if m > cap {
        return Err(Error::Capability(format!(
            "exhaustive subset enumeration supports up to {cap} items, got {m}"
        )));
    }
    Ok(0..(1usize << m))
}

/// Validates that `subset` contains distinct indices below `m`.
pub fn validate_subset(subset: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for &i in subset {
        if i >= m {
            return Err(Error::Domain(format!(
                "item index {i} out of range for catalog size {m}"
            )));
        }
        if seen[i] {
            return Err(Error::Domain(format!("duplicate item {i} in subset")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Inverse with an error that reports the condition number on failure.
pub fn try_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    m.clone().try_inverse().ok_or_else(|| {
        let sv = m.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0_f64, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        let cond = if min > 0.0 { max / min } else { f64::INFINITY };
        Error::Numerical(format!("{what} is singular (condition number {cond:.3e})"))
    })
}
