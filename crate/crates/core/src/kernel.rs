//! Kernel assembly from low-rank factors and the determinantal quantities
//! every other module consumes: subset log-probabilities, marginal kernels,
//! conditional (Schur-complement) kernels, and pair correlations.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance for the exact-skewness check on assembly.
const SKEW_TOL: f64 = 1e-12;

/// Finite sentinel used for nonpositive stabilized minors in likelihood
/// paths; keeps the optimizer alive instead of propagating -inf.
pub const SINGULAR_MINOR_SENTINEL: f64 = -1e10;

/// Trainable factors `V` (M×D), `B`, `C` (M×D′) defining
/// `L = V·Vᵀ + (B·Cᵀ − C·Bᵀ)`.
///
/// `V·Vᵀ` is the PSD symmetric part; `B·Cᵀ − C·Bᵀ` is skew-symmetric by
/// construction, so `L + Lᵀ` is PSD and every principal minor of `L` is
/// nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankParams {
    v: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl LowRankParams {
    /// Builds parameters, validating shapes and finiteness.
    ///
    /// `v` must be M×D with D ≥ 1; `b` and `c` must both be M×D′ with the
    /// same row count as `v` (D′ = 0 gives a purely symmetric kernel).
    pub fn new(v: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        let m = v.nrows();
        if m < 1 {
            return Err(Error::Config("catalog size M must be at least 1".into()));
        }
        if v.ncols() < 1 {
            return Err(Error::Config("symmetric rank D must be at least 1".into()));
        }
        if b.nrows() != m || c.nrows() != m {
            return Err(Error::Dimension(format!(
                "V has {m} rows but B has {} and C has {}",
                b.nrows(),
                c.nrows()
            )));
        }
        if b.ncols() != c.ncols() {
            return Err(Error::Dimension(format!(
                "B and C must share the skew rank D', got {} and {}",
                b.ncols(),
                c.ncols()
            )));
        }
        for mat in [&v, &b, &c] {
            if mat.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config("factor entries must be finite".into()));
            }
        }
        Ok(Self { v, b, c })
    }

    /// Seeded uniform initialization in `[-scale, scale]`, filled row-major
    /// V then B then C so draws are reproducible.
    pub fn random_uniform<R: Rng>(
        m: usize,
        rank_sym: usize,
        rank_skew: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut draw = |rows: usize, cols: usize| {
            DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-scale..=scale))
        };
        let v = draw(m, rank_sym);
        let b = draw(m, rank_skew);
        let c = draw(m, rank_skew);
        Self::new(v, b, c)
    }

    pub fn catalog_size(&self) -> usize {
        self.v.nrows()
    }

    /// Rank of the symmetric factor (D).
    pub fn rank_sym(&self) -> usize {
        self.v.ncols()
    }

    /// Rank of the skew factors (D′).
    pub fn rank_skew(&self) -> usize {
        self.b.ncols()
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// True when the skew part vanishes identically (B = C = 0 or D′ = 0).
    pub fn is_symmetric(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0) || self.c.iter().all(|&x| x == 0.0)
    }

    /// Materializes `L = V·Vᵀ + (B·Cᵀ − C·Bᵀ)` and checks the skew part is
    /// exactly skew-symmetric.
    pub fn assemble(&self) -> Result<DenseKernel> {
        let sym = &self.v * self.v.transpose();
        let skew = &self.b * self.c.transpose() - &self.c * self.b.transpose();
        let scale = 1.0 + skew.amax();
        for i in 0..skew.nrows() {
            for j in 0..i {
                if (skew[(i, j)] + skew[(j, i)]).abs() > SKEW_TOL * scale {
                    return Err(Error::Numerical(format!(
                        "skew part lost antisymmetry at ({i},{j})"
                    )));
                }
            }
        }
        Ok(DenseKernel {
            entries: sym + skew,
            role: KernelRole::LEnsemble,
            index_map: (0..self.catalog_size()).collect(),
        })
    }
}

/// What a materialized kernel matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRole {
    /// The L-ensemble kernel: `Pr(J) ∝ det(L_J)`.
    LEnsemble,
    /// The marginal kernel `K = I − (L+I)⁻¹`: `Pr(J ⊆ Y) = det(K_J)`.
    Marginal,
    /// A conditional L-ensemble on the items outside the conditioning set.
    Conditional,
}

/// Materialized square kernel with a role tag.
///
/// `index_map` records which ground-set item each row/column refers to; for
/// `LEnsemble` and `Marginal` it is the identity, for `Conditional` it lists
/// the surviving items so scores can be ranked against the full catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseKernel {
    entries: DMatrix<f64>,
    role: KernelRole,
    index_map: Vec<usize>,
}

/// Log-probability of one subset under the L-ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetProbability {
    /// `log det(L_J)` (or the finite sentinel when degenerate).
    pub log_numerator: f64,
    /// `log det(L + I)`.
    pub log_normalizer: f64,
    /// `log_numerator − log_normalizer`.
    pub log_prob: f64,
    /// Set when the (stabilized) minor was nonpositive and the sentinel was
    /// substituted; the value is then a penalty, not a log-probability.
    pub degenerate: bool,
}

impl DenseKernel {
    /// Wraps an arbitrary square matrix as a kernel with the given role.
    pub fn from_matrix(entries: DMatrix<f64>, role: KernelRole) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension(format!(
                "kernel must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let index_map = (0..entries.nrows()).collect();
        Ok(Self { entries, role, index_map })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn role(&self) -> KernelRole {
        self.role
    }

    /// Ground-set identity of each row/column.
    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn require_l_semantics(&self, op: &str) -> Result<()> {
        if self.role == KernelRole::Marginal {
            return Err(Error::Domain(format!(
                "{op} needs an L-ensemble kernel, not a marginal kernel"
            )));
        }
        Ok(())
    }

    /// Marginal kernel `K = I − (L+I)⁻¹`; `det(K_J)` gives `Pr(J ⊆ Y)`.
    pub fn marginal(&self) -> Result<DenseKernel> {
        self.require_l_semantics("marginal")?;
        let n = self.dim();
        let l_plus_i = &self.entries + DMatrix::identity(n, n);
        let inv = linalg::try_inverse(&l_plus_i, "L + I")?;
        let k = DMatrix::identity(n, n) - inv;
        for i in 0..n {
            let d = k[(i, i)];
            if !(-1e-8..=1.0 + 1e-8).contains(&d) || !d.is_finite() {
                return Err(Error::Numerical(format!(
                    "marginal kernel diagonal K[{i},{i}] = {d} outside [0, 1]"
                )));
            }
        }
        Ok(DenseKernel {
            entries: k,
            role: KernelRole::Marginal,
            index_map: self.index_map.clone(),
        })
    }

    /// Log-probability of `subset` under the L-ensemble, with `epsilon·I`
    /// added to the minor before factorization (pass 0 for raw minors).
    ///
    /// A nonpositive stabilized minor yields a flagged finite sentinel rather
    /// than an error so callers in optimization loops can keep going.
    pub fn log_subset_prob(&self, subset: &[usize], epsilon: f64) -> Result<SubsetProbability> {
        self.require_l_semantics("log_subset_prob")?;
        linalg::validate_subset(subset, self.dim())?;
        let n = self.dim();
        let normalizer = linalg::sign_log_det(&(&self.entries + DMatrix::identity(n, n)));
        let log_normalizer = normalizer.log_if_positive().ok_or_else(|| {
            Error::Numerical("det(L + I) is nonpositive; kernel is not admissible".into())
        })?;
        let mut minor = linalg::principal_submatrix(&self.entries, subset);
        for i in 0..minor.nrows() {
            minor[(i, i)] += epsilon;
        }
        let num = linalg::sign_log_det(&minor);
        match num.log_if_positive() {
            Some(log_numerator) => Ok(SubsetProbability {
                log_numerator,
                log_normalizer,
                log_prob: log_numerator - log_normalizer,
                degenerate: false,
            }),
            None => Ok(SubsetProbability {
                log_numerator: SINGULAR_MINOR_SENTINEL,
                log_normalizer,
                log_prob: SINGULAR_MINOR_SENTINEL - log_normalizer,
                degenerate: true,
            }),
        }
    }

    /// Conditional kernel `L^J = L_J̄ − L_{J̄,J} (L_J + εI)⁻¹ L_{J,J̄}` on the
    /// complement of `subset` (Schur complement over the kept items).
    ///
    /// Diagonal entry `i` of the result equals `det(L_{J∪{i}})/det(L_J)` when
    /// `epsilon` is 0; the `index_map` records surviving ground-set items.
    pub fn conditional(&self, subset: &[usize], epsilon: f64) -> Result<DenseKernel> {
        self.require_l_semantics("conditional")?;
        linalg::validate_subset(subset, self.dim())?;
        if subset.is_empty() {
            return Ok(self.clone());
        }
        let in_subset = {
            let mut mask = vec![false; self.dim()];
            for &i in subset {
                mask[i] = true;
            }
            mask
        };
        let complement: Vec<usize> = (0..self.dim()).filter(|&i| !in_subset[i]).collect();

        let mut l_jj = linalg::principal_submatrix(&self.entries, subset);
        for i in 0..l_jj.nrows() {
            l_jj[(i, i)] += epsilon;
        }
        let inv = l_jj.try_inverse().ok_or_else(|| {
            Error::Numerical(format!(
                "conditioning failed: L_J is singular for subset {subset:?}"
            ))
        })?;
        let cross_rows = linalg::block(&self.entries, &complement, subset);
        let cross_cols = linalg::block(&self.entries, subset, &complement);
        let schur = linalg::principal_submatrix(&self.entries, &complement)
            - &cross_rows * inv * &cross_cols;
        let index_map: Vec<usize> = complement.iter().map(|&i| self.index_map[i]).collect();
        Ok(DenseKernel {
            entries: schur,
            role: KernelRole::Conditional,
            index_map,
        })
    }

    /// Covariance of the inclusion indicators of items `i` and `j`:
    /// `cov(1_{i∈Y}, 1_{j∈Y}) = −K_ij·K_ji`.
    ///
    /// Positive means attraction, negative repulsion, zero independence.
    pub fn pair_correlation(&self, i: usize, j: usize) -> Result<f64> {
        if self.role != KernelRole::Marginal {
            return Err(Error::Domain(
                "pair_correlation needs the marginal kernel K".into(),
            ));
        }
        if i == j {
            return Err(Error::Domain("pair correlation requires i != j".into()));
        }
        linalg::validate_subset(&[i, j], self.dim())?;
        Ok(-self.entries[(i, j)] * self.entries[(j, i)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(m: usize, d: usize, dp: usize, seed: u64) -> LowRankParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LowRankParams::random_uniform(m, d, dp, 0.8, &mut rng).unwrap()
    }

    #[test]
    fn assemble_identity_when_skew_vanishes() {
        let params = LowRankParams::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(2, 1),
        )
        .unwrap();
        let l = params.assemble().unwrap();
        assert_eq!(l.entries(), &DMatrix::identity(2, 2));
        assert!(params.is_symmetric());
    }

    #[test]
    fn assemble_pure_skew_construction() {
        // B = (1,0)ᵀ, C = (0,1)ᵀ: BCᵀ − CBᵀ = [[0,1],[−1,0]]
        let params = LowRankParams::new(
            DMatrix::zeros(2, 1),
            DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
        );
        // V must have D >= 1; an all-zero V column is allowed.
        let params = params.unwrap();
        let l = params.assemble().unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        assert_eq!(l.entries(), &expected);
    }

    #[test]
    fn assemble_rejects_row_mismatch() {
        let err = LowRankParams::new(
            DMatrix::zeros(3, 2),
            DMatrix::zeros(2, 1),
            DMatrix::zeros(3, 1),
        );
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn assembled_kernel_symmetric_part_is_psd() {
        let params = random_params(5, 3, 2, 17);
        let l = params.assemble().unwrap();
        let sym = (l.entries() + l.entries().transpose()) * 0.5;
        let eigs = sym.symmetric_eigenvalues();
        assert!(eigs.iter().all(|&e| e >= -1e-10), "eigs: {eigs:?}");
    }

    #[test]
    fn marginal_of_identity_is_half_identity() {
        let l = DenseKernel::from_matrix(DMatrix::identity(3, 3), KernelRole::LEnsemble).unwrap();
        let k = l.marginal().unwrap();
        assert_relative_eq!(k.entries(), &(DMatrix::identity(3, 3) * 0.5), epsilon = 1e-14);
    }

    #[test]
    fn marginal_of_zero_is_zero() {
        let l = DenseKernel::from_matrix(DMatrix::zeros(3, 3), KernelRole::LEnsemble).unwrap();
        let k = l.marginal().unwrap();
        assert_relative_eq!(k.entries(), &DMatrix::zeros(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn marginal_minors_match_enumerated_inclusion_probabilities() {
        // det(K_J) must equal sum over supersets J' of J of det(L_J')/det(L+I).
        let m = 4;
        let l = random_params(m, 3, 2, 3).assemble().unwrap();
        let k = l.marginal().unwrap();
        let norm = (l.entries() + DMatrix::identity(m, m)).determinant();
        for mask in 1..(1usize << m) {
            let j = linalg::mask_members(mask, m);
            let mut prob = 0.0;
            for sup in 0..(1usize << m) {
                if sup & mask == mask {
                    let idx = linalg::mask_members(sup, m);
                    prob += linalg::principal_submatrix(l.entries(), &idx).determinant();
                }
            }
            prob /= norm;
            let det_k = linalg::principal_submatrix(k.entries(), &j).determinant();
            assert_relative_eq!(det_k, prob, epsilon = 1e-8);
        }
    }

    #[test]
    fn log_prob_of_identity_kernel() {
        let l = DenseKernel::from_matrix(DMatrix::identity(2, 2), KernelRole::LEnsemble).unwrap();
        let empty = l.log_subset_prob(&[], 0.0).unwrap();
        assert_relative_eq!(empty.log_prob, -(4.0f64.ln()), epsilon = 1e-12);
        let single = l.log_subset_prob(&[0], 0.0).unwrap();
        assert_relative_eq!(single.log_prob, -(4.0f64.ln()), epsilon = 1e-12);
        assert_relative_eq!(
            single.log_prob,
            single.log_numerator - single.log_normalizer,
            epsilon = 1e-15
        );
    }

    #[test]
    fn subset_probabilities_sum_to_one() {
        let m = 6;
        let l = random_params(m, 4, 3, 11).assemble().unwrap();
        let mut total = 0.0;
        for mask in 0..(1usize << m) {
            let j = linalg::mask_members(mask, m);
            let p = l.log_subset_prob(&j, 0.0).unwrap();
            if !p.degenerate {
                total += p.log_prob.exp();
            }
        }
        assert_relative_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn degenerate_minor_yields_flagged_sentinel() {
        // Pure skew 2x2: det(L_{0}) = 0, so the raw minor is nonpositive.
        let l = DenseKernel::from_matrix(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            KernelRole::LEnsemble,
        )
        .unwrap();
        let p = l.log_subset_prob(&[0], 0.0).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.log_numerator, SINGULAR_MINOR_SENTINEL);
        // With stabilization it is a plain probability again.
        let p = l.log_subset_prob(&[0], 1e-5).unwrap();
        assert!(!p.degenerate);
        assert_relative_eq!(p.log_numerator, 1e-5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn conditional_scalar_example() {
        let l = DenseKernel::from_matrix(
            DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]),
            KernelRole::LEnsemble,
        )
        .unwrap();
        let cond = l.conditional(&[0], 0.0).unwrap();
        assert_eq!(cond.dim(), 1);
        assert_eq!(cond.index_map(), &[1]);
        // det(L_{01})/det(L_{0}) = 3/2
        assert_relative_eq!(cond.entries()[(0, 0)], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn conditional_on_empty_set_is_identity_operation() {
        let l = random_params(4, 2, 1, 5).assemble().unwrap();
        let cond = l.conditional(&[], 0.0).unwrap();
        assert_eq!(cond.entries(), l.entries());
    }

    #[test]
    fn conditional_diagonal_matches_minor_ratio_oracle() {
        let m = 5;
        let l = random_params(m, 3, 2, 23).assemble().unwrap();
        for mask in 1..(1usize << m) {
            let j = linalg::mask_members(mask, m);
            if j.len() > 2 {
                continue;
            }
            let det_j = linalg::principal_submatrix(l.entries(), &j).determinant();
            let cond = l.conditional(&j, 0.0).unwrap();
            for (row, &item) in cond.index_map().iter().enumerate() {
                let mut extended = j.clone();
                extended.push(item);
                let det_ext = linalg::principal_submatrix(l.entries(), &extended).determinant();
                assert_relative_eq!(cond.entries()[(row, row)], det_ext / det_j, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn conditional_consistency_with_subset_probabilities() {
        // exp(log P(J ∪ {i}) − log P(J)) = L^J_ii
        let m = 6;
        let l = random_params(m, 4, 2, 29).assemble().unwrap();
        let j = vec![1, 4];
        let base = l.log_subset_prob(&j, 0.0).unwrap();
        let cond = l.conditional(&j, 0.0).unwrap();
        for (row, &item) in cond.index_map().iter().enumerate() {
            let mut ext = j.clone();
            ext.push(item);
            let p = l.log_subset_prob(&ext, 0.0).unwrap();
            assert_relative_eq!(
                (p.log_prob - base.log_prob).exp(),
                cond.entries()[(row, row)],
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn conditional_reports_singular_subset() {
        let l = DenseKernel::from_matrix(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            KernelRole::LEnsemble,
        )
        .unwrap();
        let err = l.conditional(&[0], 0.0).unwrap_err();
        assert!(err.to_string().contains("[0]"), "error was: {err}");
    }

    #[test]
    fn pair_correlation_signs() {
        let mut k = DMatrix::zeros(3, 3);
        k[(0, 1)] = 0.3;
        k[(1, 0)] = 0.3;
        k[(0, 2)] = 0.3;
        k[(2, 0)] = -0.2;
        let k = DenseKernel::from_matrix(k, KernelRole::Marginal).unwrap();
        assert_relative_eq!(k.pair_correlation(0, 1).unwrap(), -0.09, epsilon = 1e-15);
        assert_relative_eq!(k.pair_correlation(0, 2).unwrap(), 0.06, epsilon = 1e-15);
        assert_eq!(k.pair_correlation(1, 2).unwrap(), 0.0);
        assert!(k.pair_correlation(1, 1).is_err());
    }

    #[test]
    fn symmetric_mode_matches_plain_symmetric_kernel() {
        // With B = C = 0 every quantity must equal that of the kernel V·Vᵀ.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let params = LowRankParams::random_uniform(5, 3, 0, 0.8, &mut rng).unwrap();
        let l = params.assemble().unwrap();
        let plain = DenseKernel::from_matrix(params.v() * params.v().transpose(), KernelRole::LEnsemble)
            .unwrap();
        assert_relative_eq!(l.entries(), plain.entries(), epsilon = 1e-12);
        let j = vec![0, 3];
        let a = l.log_subset_prob(&j, 1e-5).unwrap();
        let b = plain.log_subset_prob(&j, 1e-5).unwrap();
        assert_relative_eq!(a.log_prob, b.log_prob, epsilon = 1e-12);
    }
}
