//! Data standardization, submodel enumeration, and least-squares fitting.
//!
//! # Background
//!
//! All Bayes factors in this crate are functions of a submodel's coefficient
//! of determination, so the regression layer's only job is to produce
//! residual sums of squares for subsets of predictors, quickly and stably.
//! Predictor columns are centered and scaled to satisfy `1'x_i = 0` and
//! `x_i'x_i / n = 1` (population scaling with divisor `n`); the response is
//! left on its original scale because R-squared is scale-free.
//!
//! # Implementation
//!
//! Each submodel is fit with a column-pivoted Householder QR factorization
//! rather than normal equations: pivoting exposes numerical rank loss on
//! near-collinear data, and applying the orthogonal factor to the centered
//! response yields the residual sum of squares as a plain tail norm, with no
//! cancellation. Normal equations appear only as an independent oracle in
//! the test suite.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of predictors for exhaustive enumeration
/// (2^25 is about 3.3e7 models).
pub const DEFAULT_ENUMERATION_CAP: usize = 25;

/// Relative diagonal threshold below which a triangular factor is treated as
/// numerically singular (condition estimate beyond 1e10).
const RANK_TOLERANCE: f64 = 1e-10;

// =============================================================================
// ModelId
// =============================================================================

/// Identifies a submodel by a bitmask over the `p` predictors.
///
/// Bit `i` (zero-based) set means predictor `i + 1` (one-based, as column
/// order in the dataset) is active. The empty mask is the null model
/// (intercept only). Masks order models deterministically: all rankings and
/// tie-breaks downstream use ascending-mask order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelId(pub u32);

impl ModelId {
    /// The null model (no predictors).
    pub const NULL: ModelId = ModelId(0);

    /// Builds a model from one-based predictor indices.
    pub fn from_indices(indices: &[usize]) -> ModelId {
        let mut mask = 0u32;
        for &i in indices {
            assert!(i >= 1 && i <= 32, "predictor index {i} out of range");
            mask |= 1 << (i - 1);
        }
        ModelId(mask)
    }

    /// One-based indices of the active predictors, ascending.
    pub fn indices(&self) -> Vec<usize> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }

    /// Number of active predictors `q`.
    pub fn q(&self) -> usize {
        self.0.count_ones() as usize
    }

    /// Whether the given one-based predictor index is active.
    pub fn contains(&self, index: usize) -> bool {
        index >= 1 && index <= 32 && self.0 >> (index - 1) & 1 == 1
    }

    /// Whether this is the null model.
    pub fn is_null(&self) -> bool {
        self.0 == 0
    }

    /// The full model on predictors `1..=p`.
    pub fn full(p: usize) -> ModelId {
        assert!(p >= 1 && p <= 32, "predictor count {p} out of range");
        ModelId(u32::try_from((1u64 << p) - 1).unwrap())
    }

    /// Whether every predictor of `other` is also active here.
    pub fn is_superset_of(&self, other: ModelId) -> bool {
        self.0 & other.0 == other.0
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_null() {
            return write!(f, "null");
        }
        let parts: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

// =============================================================================
// RawData and Dataset
// =============================================================================

/// Unprocessed input data: predictor columns plus a response.
#[derive(Debug, Clone, PartialEq)]
pub struct RawData {
    /// Predictor columns, each of length `n`, in dataset order.
    pub columns: Vec<Vec<f64>>,
    /// Column names, parallel to `columns`.
    pub names: Vec<String>,
    /// Response vector of length `n`.
    pub y: Vec<f64>,
}

/// Standardized dataset ready for all-subsets scoring.
///
/// Construction via [`standardize`] guarantees every predictor column has
/// zero sum and squared norm `n`, the columns are numerically full rank,
/// and `n > p + 1`.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    y_centered: DVector<f64>,
    names: Vec<String>,
    offsets: Vec<f64>,
    scales: Vec<f64>,
    ybar: f64,
    tss_centered: f64,
    tss_raw: f64,
}

impl Dataset {
    /// Number of observations.
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of predictors.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// The standardized predictor matrix (n x p).
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// The response on its original scale.
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Column names in dataset order.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Per-column means removed during standardization.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Per-column scale factors (population standard deviations).
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Mean of the response.
    pub fn ybar(&self) -> f64 {
        self.ybar
    }

    /// Centered total sum of squares, `sum((y - ybar)^2)`.
    pub fn tss_centered(&self) -> f64 {
        self.tss_centered
    }

    /// Raw total sum of squares, `sum(y^2)`.
    pub fn tss_raw(&self) -> f64 {
        self.tss_raw
    }
}

/// Per-model regression summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    /// The submodel these statistics belong to.
    pub model: ModelId,
    /// Number of active predictors (intercept excluded).
    pub q: usize,
    /// Residual sum of squares with a fitted intercept.
    pub rss: f64,
    /// Centered coefficient of determination, `1 - rss / tss_centered`.
    pub r2: f64,
    /// Zero-intercept variant, `1 - rss / tss_raw`, used when the null model
    /// must be comparable.
    pub r2_check: f64,
}

// =============================================================================
// Operations
// =============================================================================

/// Centers and scales every predictor column to `1'x = 0`, `x'x / n = 1`.
///
/// The response is not transformed. Returns an error when a column is
/// constant, the centered design is numerically rank deficient, there are
/// not enough rows (`n > p + 1` is required), or any entry is non-finite.
pub fn standardize(raw: &RawData) -> Result<Dataset> {
    let n = raw.y.len();
    let p = raw.columns.len();
    if p == 0 {
        return Err(Error::DomainError {
            reason: "no predictor columns".to_string(),
        });
    }
    if n <= p + 1 {
        return Err(Error::TooFewRows { rows: n, cols: p });
    }
    let names: Vec<String> = if raw.names.len() == p {
        raw.names.clone()
    } else {
        (1..=p).map(|i| format!("x{i}")).collect()
    };
    for (j, col) in raw.columns.iter().enumerate() {
        if col.len() != n {
            return Err(Error::DomainError {
                reason: format!(
                    "column {:?} has {} rows but the response has {}",
                    names[j],
                    col.len(),
                    n
                ),
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainError {
                reason: format!("column {:?} contains a non-finite value", names[j]),
            });
        }
    }
    if raw.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::DomainError {
            reason: "response contains a non-finite value".to_string(),
        });
    }

    let nf = n as f64;
    let mut x = DMatrix::<f64>::zeros(n, p);
    let mut offsets = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    for (j, col) in raw.columns.iter().enumerate() {
        let mean = col.iter().sum::<f64>() / nf;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let var = ss / nf;
        // A column of identical values leaves only rounding residue after
        // centering; treat relative variance below 1e-20 as constant.
        if var <= 1e-20 * (1.0 + mean * mean) {
            return Err(Error::ConstantColumn(names[j].clone()));
        }
        let scale = var.sqrt();
        for i in 0..n {
            x[(i, j)] = (col[i] - mean) / scale;
        }
        offsets.push(mean);
        scales.push(scale);
    }

    // Rank check on the standardized design via pivoted QR.
    let qr = x.clone().col_piv_qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..p).map(|i| r[(i, i)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let rank = diag.iter().filter(|&&d| d > RANK_TOLERANCE * dmax).count();
    if rank < p {
        return Err(Error::RankDeficient { rank, cols: p });
    }

    let y = DVector::from_column_slice(&raw.y);
    let ybar = y.sum() / nf;
    let y_centered = y.map(|v| v - ybar);
    let tss_centered = y_centered.norm_squared();
    let tss_raw = y.norm_squared();
    if tss_centered <= 1e-20 * tss_raw.max(1.0) {
        return Err(Error::DomainError {
            reason: "response is constant; every model fits it exactly".to_string(),
        });
    }

    Ok(Dataset {
        x,
        y,
        y_centered,
        names,
        offsets,
        scales,
        ybar,
        tss_centered,
        tss_raw,
    })
}

/// Fits one submodel by OLS with an intercept and returns its summary.
///
/// The null model is fit as intercept-only (`rss = tss_centered`, `r2 = 0`).
/// Non-null models regress the centered response on the standardized active
/// columns via column-pivoted QR; the residual sum of squares is the squared
/// norm of the last `n - q` coordinates of `Q' (y - ybar)`, which is exact
/// for the intercept-augmented fit because the columns are centered.
pub fn fit_submodel(data: &Dataset, model: ModelId) -> Result<FitSummary> {
    let n = data.n();
    let p = data.p();
    if (model.0 >> p) != 0 {
        return Err(Error::DomainError {
            reason: format!("model {model} references predictors beyond p = {p}"),
        });
    }
    let q = model.q();
    let rss = if q == 0 {
        data.tss_centered
    } else {
        let mut z = DMatrix::<f64>::zeros(n, q);
        for (dst, src) in model.indices().iter().enumerate() {
            z.column_mut(dst).copy_from(&data.x.column(src - 1));
        }
        let qr = z.col_piv_qr();
        let r = qr.r();
        let mut dmin = f64::INFINITY;
        let mut dmax = 0.0f64;
        for i in 0..q {
            let d = r[(i, i)].abs();
            dmin = dmin.min(d);
            dmax = dmax.max(d);
        }
        if dmin <= RANK_TOLERANCE * dmax {
            return Err(Error::NumericalRankLoss {
                model: model.to_string(),
                ratio: if dmax > 0.0 { dmin / dmax } else { 0.0 },
            });
        }
        let mut v = data.y_centered.clone();
        qr.q_tr_mul(&mut v);
        v.rows(q, n - q).norm_squared()
    };
    let rss = rss.max(0.0);
    let r2 = (1.0 - rss / data.tss_centered).clamp(0.0, 1.0);
    let r2_check = (1.0 - rss / data.tss_raw).clamp(0.0, 1.0);
    Ok(FitSummary {
        model,
        q,
        rss,
        r2,
        r2_check,
    })
}

/// Fits many submodels, fanning out across worker threads.
///
/// Results are returned in the order of `models`. The first error
/// encountered (in model order) is returned if any fit fails.
pub fn fit_models(data: &Dataset, models: &[ModelId]) -> Result<Vec<FitSummary>> {
    models
        .par_iter()
        .map(|&m| fit_submodel(data, m))
        .collect::<Result<Vec<_>>>()
}

/// Enumerates all submodels of `p` predictors in ascending mask order.
///
/// Includes the null model when `include_null` is set. Refuses to enumerate
/// more than `2^cap` models.
pub fn enumerate_models(p: usize, include_null: bool, cap: usize) -> Result<Vec<ModelId>> {
    if p > cap || p > 32 {
        return Err(Error::TooManyModels { p, cap: cap.min(32) });
    }
    if p == 0 {
        return Err(Error::DomainError {
            reason: "cannot enumerate models over zero predictors".to_string(),
        });
    }
    let start = if include_null { 0u32 } else { 1u32 };
    let end = (1u64 << p) as u32;
    Ok((start..end).map(ModelId).collect())
}

// =============================================================================
// Tests
// =============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn assert_close(actual: f64, expected: f64, tol: f64, context: &str) {
        assert!(
            (actual - expected).abs() <= tol,
            "{context}: {actual} vs {expected} (diff {:.3e}, tol {tol:.1e})",
            (actual - expected).abs()
        );
    }

    fn random_raw(n: usize, p: usize, seed: u64) -> RawData {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let columns: Vec<Vec<f64>> = (0..p)
            .map(|_| (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
        RawData {
            columns,
            names: (1..=p).map(|i| format!("x{i}")).collect(),
            y,
        }
    }

    // -------------------------------------------------------------------------
    // ModelId
    // -------------------------------------------------------------------------

    #[test]
    fn model_id_roundtrip_and_display() {
        let m = ModelId::from_indices(&[1, 3, 4]);
        assert_eq!(m.0, 0b1101);
        assert_eq!(m.indices(), vec![1, 3, 4]);
        assert_eq!(m.q(), 3);
        assert!(m.contains(3));
        assert!(!m.contains(2));
        assert_eq!(m.to_string(), "{1,3,4}");
        assert_eq!(ModelId::NULL.to_string(), "null");
        assert!(ModelId::from_indices(&[2, 7]).is_superset_of(ModelId::from_indices(&[7])));
        assert!(!ModelId::from_indices(&[2]).is_superset_of(ModelId::from_indices(&[1])));
    }

    // -------------------------------------------------------------------------
    // standardize
    // -------------------------------------------------------------------------

    #[test]
    fn standardize_small_column_matches_hand_computation() {
        // Column (1,2,3): mean 2, population variance 2/3, so the scaled
        // column is (-1.2247, 0, 1.2247) and its squared norm is n = 3.
        // A second independent column keeps the design full rank.
        let raw = RawData {
            columns: vec![vec![1.0, 2.0, 3.0, 2.0, 4.0], vec![5.0, 1.0, 2.0, 8.0, 3.0]],
            names: vec!["a".into(), "b".into()],
            y: vec![1.0, 2.0, 1.5, 3.0, 2.5],
        };
        let data = standardize(&raw).unwrap();
        for j in 0..2 {
            let col = data.x().column(j);
            assert_close(col.sum(), 0.0, 1e-8 * 5.0, "column sum");
            assert_close(col.norm_squared() / 5.0, 1.0, 1e-10, "column norm");
        }

        let raw3 = RawData {
            columns: vec![vec![1.0, 2.0, 3.0]],
            names: vec!["a".into()],
            y: vec![1.0, 0.0, 2.0],
        };
        // n = 3 > p + 1 = 2 holds, so this standardizes.
        let data3 = standardize(&raw3).unwrap();
        let col = data3.x().column(0);
        assert_close(col[0], -1.224744871391589, 1e-12, "first entry");
        assert_close(col[1], 0.0, 1e-12, "second entry");
        assert_close(col[2], 1.224744871391589, 1e-12, "third entry");
    }

    #[test]
    fn standardize_is_identity_on_standardized_columns() {
        let n = 12;
        let raw0 = random_raw(n, 2, 7);
        let first = standardize(&raw0).unwrap();
        let columns: Vec<Vec<f64>> = (0..2)
            .map(|j| first.x().column(j).iter().cloned().collect())
            .collect();
        let raw1 = RawData {
            columns,
            names: raw0.names.clone(),
            y: raw0.y.clone(),
        };
        let second = standardize(&raw1).unwrap();
        for j in 0..2 {
            assert_close(second.offsets()[j], 0.0, 1e-12, "offset of standardized column");
            assert_close(second.scales()[j], 1.0, 1e-12, "scale of standardized column");
            for i in 0..n {
                assert_close(
                    second.x()[(i, j)],
                    first.x()[(i, j)],
                    1e-12,
                    "column unchanged",
                );
            }
        }
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let mut raw = random_raw(10, 3, 1);
        raw.columns[1] = vec![4.5; 10];
        match standardize(&raw) {
            Err(Error::ConstantColumn(name)) => assert_eq!(name, "x2"),
            other => panic!("expected ConstantColumn, got {other:?}"),
        }
    }

    #[test]
    fn standardize_rejects_duplicated_column() {
        let mut raw = random_raw(10, 3, 2);
        raw.columns[2] = raw.columns[0].clone();
        match standardize(&raw) {
            Err(Error::RankDeficient { rank, cols }) => {
                assert_eq!(cols, 3);
                assert!(rank < 3);
            }
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn standardize_rejects_too_few_rows() {
        let raw = random_raw(4, 3, 3);
        assert!(matches!(
            standardize(&raw),
            Err(Error::TooFewRows { rows: 4, cols: 3 })
        ));
    }

    // -------------------------------------------------------------------------
    // fit_submodel
    // -------------------------------------------------------------------------

    #[test]
    fn exact_fit_has_unit_r2() {
        let mut raw = random_raw(15, 2, 4);
        // y = 1 + 2 * x1 in terms of the raw first column.
        raw.y = raw.columns[0].iter().map(|v| 1.0 + 2.0 * v).collect();
        let data = standardize(&raw).unwrap();
        let fit = fit_submodel(&data, ModelId::from_indices(&[1])).unwrap();
        assert!(fit.rss < 1e-18 * data.tss_centered(), "rss = {}", fit.rss);
        assert!(fit.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn null_model_summary() {
        let raw = random_raw(15, 3, 5);
        let data = standardize(&raw).unwrap();
        let fit = fit_submodel(&data, ModelId::NULL).unwrap();
        assert_eq!(fit.q, 0);
        assert_eq!(fit.rss, data.tss_centered());
        assert_eq!(fit.r2, 0.0);
        assert!(fit.r2_check > 0.0 && fit.r2_check < 1.0);
    }

    #[test]
    fn fit_matches_normal_equations_oracle() {
        // Independent oracle: solve the intercept-augmented normal equations
        // with naive Gaussian elimination and compare residuals.
        let raw = random_raw(20, 3, 6);
        let data = standardize(&raw).unwrap();
        let model = ModelId::from_indices(&[1, 3]);
        let fit = fit_submodel(&data, model).unwrap();

        let n = data.n();
        let cols = [0usize, 2usize];
        let m = cols.len() + 1; // intercept + active columns
        let mut a = vec![vec![0.0f64; m + 1]; m];
        let design =
            |i: usize, j: usize| -> f64 { if j == 0 { 1.0 } else { data.x()[(i, cols[j - 1])] } };
        for row in 0..m {
            for col in 0..m {
                a[row][col] = (0..n).map(|i| design(i, row) * design(i, col)).sum();
            }
            a[row][m] = (0..n).map(|i| design(i, row) * data.y()[i]).sum();
        }
        // Gaussian elimination with partial pivoting.
        for k in 0..m {
            let piv = (k..m).max_by(|&r1, &r2| a[r1][k].abs().total_cmp(&a[r2][k].abs())).unwrap();
            a.swap(k, piv);
            for row in k + 1..m {
                let f = a[row][k] / a[k][k];
                for col in k..=m {
                    a[row][col] -= f * a[k][col];
                }
            }
        }
        let mut beta = vec![0.0f64; m];
        for k in (0..m).rev() {
            let mut acc = a[k][m];
            for col in k + 1..m {
                acc -= a[k][col] * beta[col];
            }
            beta[k] = acc / a[k][k];
        }
        let rss_oracle: f64 = (0..n)
            .map(|i| {
                let fitted: f64 = (0..m).map(|j| beta[j] * design(i, j)).sum();
                (data.y()[i] - fitted).powi(2)
            })
            .sum();
        assert_close(fit.rss, rss_oracle, 1e-10 * rss_oracle, "rss vs normal equations");
    }

    #[test]
    fn fit_detects_numerical_rank_loss() {
        // Build a dataset whose third column nearly duplicates the first at
        // the 1e-13 level: it survives the (1e-10) standardization rank gate
        // only if perturbed above that, so perturb at 1e-8 for standardize
        // and then shrink the submodel tolerance window by fitting the pair.
        let mut raw = random_raw(25, 3, 8);
        let base = raw.columns[0].clone();
        raw.columns[2] = base.iter().enumerate().map(|(i, v)| v + 1e-13 * (i as f64)).collect();
        match standardize(&raw) {
            Err(Error::RankDeficient { .. }) => {} // caught at the dataset gate
            Ok(data) => {
                match fit_submodel(&data, ModelId::from_indices(&[1, 3])) {
                    Err(Error::NumericalRankLoss { .. }) | Ok(_) => {}
                    other => panic!("unexpected: {other:?}"),
                }
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn fit_rejects_out_of_range_mask() {
        let raw = random_raw(10, 2, 9);
        let data = standardize(&raw).unwrap();
        assert!(matches!(
            fit_submodel(&data, ModelId::from_indices(&[3])),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn fit_models_preserves_order() {
        let raw = random_raw(14, 3, 10);
        let data = standardize(&raw).unwrap();
        let models = enumerate_models(3, false, DEFAULT_ENUMERATION_CAP).unwrap();
        let fits = fit_models(&data, &models).unwrap();
        assert_eq!(fits.len(), 7);
        for (fit, model) in fits.iter().zip(&models) {
            assert_eq!(fit.model, *model);
        }
    }

    // -------------------------------------------------------------------------
    // enumerate_models
    // -------------------------------------------------------------------------

    #[test]
    fn enumeration_counts_and_order() {
        let models = enumerate_models(4, false, 25).unwrap();
        assert_eq!(models.len(), 15);
        assert_eq!(models[0], ModelId(1));
        assert!(models.windows(2).all(|w| w[0] < w[1]));

        let with_null = enumerate_models(4, true, 25).unwrap();
        assert_eq!(with_null.len(), 16);
        assert_eq!(with_null[0], ModelId::NULL);
    }

    #[test]
    fn enumeration_cap_enforced() {
        assert!(matches!(
            enumerate_models(30, false, 25),
            Err(Error::TooManyModels { p: 30, cap: 25 })
        ));
    }
}
