//! Brute-force verification of the matrix classes the model relies on:
//! P₀/P-matrices via exhaustive principal-minor enumeration, PSD symmetric
//! parts, sign-pattern classes, and the symmetric/skew decomposition.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;

/// Largest dimension for exhaustive minor enumeration (2^M − 1 minors).
pub const MAX_ENUM_DIM: usize = 16;

/// Default tolerance for minor nonnegativity and eigenvalue floors.
pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

/// Off-diagonal sign linkage `L_ij = ε_ij·L_ji` with `ε_ij ∈ {−1,+1}`;
/// 0 marks unconstrained pairs (both entries zero) and the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPattern {
    eps: DMatrix<i8>,
}

impl SignPattern {
    pub fn new(eps: DMatrix<i8>) -> Self {
        Self { eps }
    }

    /// All off-diagonal pairs symmetric (`ε = +1` everywhere).
    pub fn symmetric(m: usize) -> Self {
        Self::uniform(m, 1)
    }

    /// All off-diagonal pairs anti-symmetric (`ε = −1`), i.e. diagonal+skew.
    pub fn skew(m: usize) -> Self {
        Self::uniform(m, -1)
    }

    fn uniform(m: usize, eps: i8) -> Self {
        Self {
            eps: DMatrix::from_fn(m, m, |i, j| if i == j { 0 } else { eps }),
        }
    }

    pub fn dim(&self) -> usize {
        self.eps.nrows()
    }

    /// ε for the pair (i, j); 0 when unconstrained.
    pub fn eps(&self, i: usize, j: usize) -> i8 {
        self.eps[(i, j)]
    }
}

/// Result of exhaustive matrix classification.
#[derive(Debug, Clone)]
pub struct MatrixClassReport {
    /// All principal minors ≥ −tol.
    pub is_p0: bool,
    /// All principal minors > tol.
    pub is_p: bool,
    /// Eigenvalues of (M+Mᵀ)/2 all ≥ −tol.
    pub symmetric_part_psd: bool,
    /// Smallest principal minor found.
    pub min_principal_minor: f64,
    /// Subset achieving the minimum, present exactly when `is_p0` is false.
    pub witness_subset: Option<Vec<usize>>,
    /// Off-diagonal sign linkage if the matrix is signed.
    pub sign_pattern: Option<SignPattern>,
}

/// Unique decomposition `M = S + A` with `S = (M+Mᵀ)/2` symmetric and
/// `A = (M−Mᵀ)/2` skew-symmetric.
pub fn decompose_sym_skew(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Domain(format!(
            "decomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let t = m.transpose();
    let s = (m + &t) * 0.5;
    let a = (m - &t) * 0.5;
    Ok((s, a))
}

/// Classifies a square matrix by enumerating all nonempty principal minors.
///
/// P₀ requires every minor ≥ −tol, P every minor > tol. Dimensions above
/// [`MAX_ENUM_DIM`] are rejected; 2^M grows too fast for anything else here
/// and no sampling fallback is provided.
pub fn classify(m: &DMatrix<f64>, tol: f64) -> Result<MatrixClassReport> {
    if m.nrows() != m.ncols() {
        return Err(Error::Domain("classification needs a square matrix".into()));
    }
    let n = m.nrows();
    if n > MAX_ENUM_DIM {
        return Err(Error::Capability(format!(
            "principal-minor enumeration is exhaustive and capped at M = {MAX_ENUM_DIM}; \
             got M = {n}"
        )));
    }

    // Deterministic regardless of the rayon schedule: minors are keyed by
    // mask and the min is reduced with a mask tiebreak.
    let (min_minor, min_mask) = (1..(1usize << n))
        .into_par_iter()
        .map(|mask| {
            let idx = linalg::mask_members(mask, n);
            let det = linalg::sign_log_det(&linalg::principal_submatrix(m, &idx)).value();
            (det, mask)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );

    let is_p0 = min_minor >= -tol;
    let is_p = min_minor > tol;
    let sym = (m + m.transpose()) * 0.5;
    let min_eig = sym
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    Ok(MatrixClassReport {
        is_p0,
        is_p,
        symmetric_part_psd: min_eig >= -tol,
        min_principal_minor: min_minor,
        witness_subset: (!is_p0).then(|| linalg::mask_members(min_mask, n)),
        sign_pattern: check_sign_pattern(m),
    })
}

/// Detects whether `L_ij = ε_ij·L_ji` holds for every off-diagonal pair.
///
/// Magnitudes must agree within 1e−10; both-zero pairs are unconstrained
/// (ε = 0). Returns `None` when some pair has unequal magnitudes.
pub fn check_sign_pattern(m: &DMatrix<f64>) -> Option<SignPattern> {
    let n = m.nrows();
    if n != m.ncols() {
        return None;
    }
    let mut eps = DMatrix::<i8>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            if (a.abs() - b.abs()).abs() > 1e-10 {
                return None;
            }
            let sign = if a.signum() == b.signum() { 1 } else { -1 };
            eps[(i, j)] = sign;
            eps[(j, i)] = sign;
        }
    }
    Some(SignPattern::new(eps))
}

/// Irreducibility: the support graph (edge i→j iff |L_ij| > tol) is strongly
/// connected, equivalently L is not block-diagonal up to a symmetric
/// permutation of rows and columns.
pub fn is_irreducible(m: &DMatrix<f64>, tol: f64) -> bool {
    let n = m.nrows();
    if n != m.ncols() || n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let reaches_all = |transpose: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let w = if transpose { m[(v, u)] } else { m[(u, v)] };
                if !seen[v] && u != v && w.abs() > tol {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reaches_all(false) && reaches_all(true)
}

/// Connected components of the undirected support graph of `|L| + |Lᵀ|`.
///
/// These are the diagonal blocks of `L` under the best symmetric permutation;
/// a single component means the matrix is not block-diagonal in any ordering.
pub fn support_components(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = count;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if comp[v] == usize::MAX
                    && u != v
                    && (m[(u, v)].abs() > tol || m[(v, u)].abs() > tol)
                {
                    comp[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    let mut groups = vec![Vec::new(); count];
    for (i, &c) in comp.iter().enumerate() {
        groups[c].push(i);
    }
    groups
}
