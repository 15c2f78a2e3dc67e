//! Penalized linear models fit as regression on {0,1} labels: ridge by a
//! symmetric positive-definite solve, lasso by cyclic coordinate descent.
//!
//! Both standardize features internally (population standard deviation) and
//! leave the intercept unpenalized; reported weights are in original feature
//! units. Objectives are (1/2n)||y - Xw - b||^2 plus (lambda/2)||w||^2 for
//! ridge or lambda*||w||_1 for lasso, so on a standardized orthonormal
//! design the ridge weight is the least-squares weight over (1 + lambda) and
//! the lasso weight is the least-squares weight soft-thresholded by lambda.

use super::{LearnerError, Prediction, FORMAT_VERSION};
use crate::corpus::Label;
use crate::features::FeatureId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub format_version: u32,
    /// Row layout expected by `predict`.
    pub features: Vec<FeatureId>,
    /// Weights in original feature units.
    pub weights: BTreeMap<FeatureId, f64>,
    pub intercept: f64,
    pub lambda: f64,
    /// Standardization recipe the fit used, kept for inspection.
    pub feature_means: BTreeMap<FeatureId, f64>,
    pub feature_scales: BTreeMap<FeatureId, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoModel {
    pub format_version: u32,
    pub features: Vec<FeatureId>,
    pub weights: BTreeMap<FeatureId, f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub feature_means: BTreeMap<FeatureId, f64>,
    pub feature_scales: BTreeMap<FeatureId, f64>,
    /// Full coordinate-descent sweeps performed.
    pub iterations: usize,
    /// Largest coordinate change in the final sweep.
    pub final_change: f64,
    /// True when `final_change` dropped to the tolerance before `max_iter`.
    pub converged: bool,
}

/// Means and population standard deviations per column; constant columns get
/// scale 1 so standardization never divides by zero.
pub(crate) struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>], p: usize) -> Standardizer {
        let n = rows.len() as f64;
        let means: Vec<f64> = (0..p)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let scales: Vec<f64> = (0..p)
            .map(|j| {
                let var = rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { means, scales }
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, x)| (x - self.means[j]) / self.scales[j])
                    .collect()
            })
            .collect()
    }
}

fn encode(labels: &[Label]) -> Vec<f64> {
    labels
        .iter()
        .map(|l| if *l == Label::High { 1.0 } else { 0.0 })
        .collect()
}

/// Solves (Z'Z/n + lambda I) w = Z'(y - mean(y))/n on standardized Z, then
/// maps the weights back to original units.
pub fn fit_ridge(
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    lambda: f64,
) -> Result<RidgeModel, LearnerError> {
    check_shape(rows, labels, features)?;
    assert!(lambda >= 0.0, "lambda must be nonnegative");
    let n = rows.len() as f64;
    let p = features.len();
    let std = Standardizer::fit(rows, p);
    let z = std.apply(rows);
    let y = encode(labels);
    let y_mean = y.iter().sum::<f64>() / n;

    let mut gram = vec![vec![0.0f64; p]; p];
    for row in &z {
        for j in 0..p {
            for k in j..p {
                gram[j][k] += row[j] * row[k];
            }
        }
    }
    for j in 0..p {
        for k in j..p {
            gram[j][k] /= n;
            gram[k][j] = gram[j][k];
        }
        gram[j][j] += lambda;
    }
    let rhs: Vec<f64> = (0..p)
        .map(|j| z.iter().zip(&y).map(|(r, yi)| r[j] * (yi - y_mean)).sum::<f64>() / n)
        .collect();
    let w_std = cholesky_solve(gram, rhs).ok_or(LearnerError::SingularSystem)?;

    Ok(build_linear(features, &std, &w_std, y_mean, |w, m, s, b, feats| {
        RidgeModel {
            format_version: FORMAT_VERSION,
            features: feats,
            weights: w,
            intercept: b,
            lambda,
            feature_means: m,
            feature_scales: s,
        }
    }))
}

/// Cyclic coordinate descent with soft thresholding on standardized columns,
/// sweeping in column order from a zero start. Non-convergence is reported
/// in the model flags rather than as an error.
pub fn fit_lasso(
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoModel, LearnerError> {
    check_shape(rows, labels, features)?;
    assert!(lambda >= 0.0, "lambda must be nonnegative");
    let n = rows.len() as f64;
    let p = features.len();
    let std = Standardizer::fit(rows, p);
    let z = std.apply(rows);
    let y = encode(labels);
    let y_mean = y.iter().sum::<f64>() / n;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // Column second moments; exactly 1 for non-constant columns, 0 for
    // constant ones (which therefore keep weight 0).
    let col_sq: Vec<f64> = (0..p)
        .map(|j| z.iter().map(|r| r[j] * r[j]).sum::<f64>() / n)
        .collect();
    let mut w = vec![0.0f64; p];
    let mut residual = yc.clone();
    let mut iterations = 0;
    let mut final_change = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        let mut max_change = 0.0f64;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                continue;
            }
            let rho = z
                .iter()
                .zip(&residual)
                .map(|(r, res)| r[j] * (res + r[j] * w[j]))
                .sum::<f64>()
                / n;
            let new_w = soft_threshold(rho, lambda) / col_sq[j];
            let delta = new_w - w[j];
            if delta != 0.0 {
                for (r, res) in z.iter().zip(residual.iter_mut()) {
                    *res -= r[j] * delta;
                }
            }
            max_change = max_change.max(delta.abs());
            w[j] = new_w;
        }
        iterations += 1;
        final_change = max_change;
        if max_change <= tol {
            converged = true;
            break;
        }
    }

    Ok(build_linear(features, &std, &w, y_mean, |weights, m, s, b, feats| {
        LassoModel {
            format_version: FORMAT_VERSION,
            features: feats,
            weights,
            intercept: b,
            lambda,
            feature_means: m,
            feature_scales: s,
            iterations,
            final_change,
            converged,
        }
    }))
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

fn check_shape(
    rows: &[Vec<f64>],
    labels: &[Label],
    features: &[FeatureId],
) -> Result<(), LearnerError> {
    if rows.len() < 2 {
        return Err(LearnerError::EmptyTrainingSet);
    }
    assert_eq!(rows.len(), labels.len(), "one label per row");
    assert!(rows.iter().all(|r| r.len() == features.len()), "ragged rows");
    Ok(())
}

/// Converts standardized-space weights to original units and assembles the
/// model through `make`.
fn build_linear<M>(
    features: &[FeatureId],
    std: &Standardizer,
    w_std: &[f64],
    y_mean: f64,
    make: impl FnOnce(
        BTreeMap<FeatureId, f64>,
        BTreeMap<FeatureId, f64>,
        BTreeMap<FeatureId, f64>,
        f64,
        Vec<FeatureId>,
    ) -> M,
) -> M {
    let mut weights = BTreeMap::new();
    let mut means = BTreeMap::new();
    let mut scales = BTreeMap::new();
    let mut intercept = y_mean;
    for (j, f) in features.iter().enumerate() {
        let w_orig = w_std[j] / std.scales[j];
        intercept -= w_orig * std.means[j];
        weights.insert(f.clone(), w_orig);
        means.insert(f.clone(), std.means[j]);
        scales.insert(f.clone(), std.scales[j]);
    }
    make(weights, means, scales, intercept, features.to_vec())
}

fn linear_predict(
    features: &[FeatureId],
    weights: &BTreeMap<FeatureId, f64>,
    intercept: f64,
    row: &[f64],
) -> Prediction {
    assert_eq!(row.len(), features.len(), "row width mismatch");
    let raw: f64 = intercept
        + features
            .iter()
            .zip(row)
            .map(|(f, x)| weights[f] * x)
            .sum::<f64>();
    Prediction::from_score(raw.clamp(0.0, 1.0))
}

impl RidgeModel {
    pub fn predict(&self, row: &[f64]) -> Prediction {
        linear_predict(&self.features, &self.weights, self.intercept, row)
    }
}

impl LassoModel {
    pub fn predict(&self, row: &[f64]) -> Prediction {
        linear_predict(&self.features, &self.weights, self.intercept, row)
    }

    pub fn nonzero_weights(&self) -> usize {
        self.weights.values().filter(|w| **w != 0.0).count()
    }
}

/// Cholesky factorization solve; `None` when the matrix is not numerically
/// positive definite, which for the ridge system only happens at lambda = 0
/// on a rank-deficient design.
fn cholesky_solve(mut a: Vec<Vec<f64>>, b: Vec<f64>) -> Option<Vec<f64>> {
    let p = b.len();
    let scale = a
        .iter()
        .enumerate()
        .map(|(j, row)| row[j].abs())
        .fold(1.0f64, f64::max);
    for j in 0..p {
        for k in 0..j {
            a[j][j] -= a[j][k] * a[j][k];
        }
        if a[j][j] <= scale * 1e-12 {
            return None;
        }
        a[j][j] = a[j][j].sqrt();
        for i in j + 1..p {
            for k in 0..j {
                a[i][j] -= a[i][k] * a[j][k];
            }
            a[i][j] /= a[j][j];
        }
    }
    // Forward then back substitution.
    let mut x = b;
    for j in 0..p {
        for k in 0..j {
            x[j] = x[j] - a[j][k] * x[k];
        }
        x[j] /= a[j][j];
    }
    for j in (0..p).rev() {
        for k in j + 1..p {
            x[j] = x[j] - a[k][j] * x[k];
        }
        x[j] /= a[j][j];
    }
    Some(x)
}
