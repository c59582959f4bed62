//! Trajectory classification by Gaussian negative-log-likelihood loss.
//!
//! A trajectory scored against model `(A, W)` incurs
//! `L = T·log det(W) + Σ_t (x_{t+1}−Ax_t)ᵀ W⁻¹ (x_{t+1}−Ax_t)`;
//! each trajectory is assigned to the model with the smallest loss.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_extrema, KahanSum};
use crate::model::LdsModel;
use crate::sim::Trajectory;

/// Relative eigenvalue floor below which a noise covariance is refused.
pub const W_COND_FLOOR: f64 = 1e-12;

struct LossEvaluator {
    a: DMatrix<f64>,
    chol_l: DMatrix<f64>,
    log_det: f64,
}

impl LossEvaluator {
    fn new(model: &LdsModel) -> Result<Self> {
        let (min_eig, max_eig) = sym_eigen_extrema(model.w());
        if min_eig <= W_COND_FLOOR * max_eig.max(0.0) || max_eig <= 0.0 {
            return Err(Error::SingularW { min_eig });
        }
        let chol = nalgebra::Cholesky::new(model.w().clone())
            .ok_or(Error::SingularW { min_eig })?;
        let l = chol.l();
        let log_det = 2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>();
        Ok(Self {
            a: model.a().clone(),
            chol_l: l,
            log_det,
        })
    }

    /// Loss of one trajectory; residual quadratic forms are accumulated with
    /// compensated summation so long trajectories do not drift.
    fn loss(&self, traj: &Trajectory) -> f64 {
        let t_m = traj.num_steps();
        let mut acc = KahanSum::new();
        for t in 0..t_m {
            let r: DVector<f64> = traj.state(t + 1) - &self.a * traj.state(t);
            let z = self
                .chol_l
                .solve_lower_triangular(&r)
                .expect("Cholesky factor is nonsingular");
            acc.add(z.norm_squared());
        }
        t_m as f64 * self.log_det + acc.value()
    }
}

/// Loss of one trajectory under one model (`W` must be positive definite
/// with min eigenvalue above `1e-12 ×` max).
pub fn trajectory_loss(traj: &Trajectory, model: &LdsModel) -> Result<f64> {
    if traj.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory dimension {} vs model dimension {}",
            traj.dim(),
            model.dim()
        )));
    }
    Ok(LossEvaluator::new(model)?.loss(traj))
}

/// Per-trajectory, per-model losses plus the row argmins.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LossTable {
    /// `losses[(m, k)]`
    pub losses: Vec<Vec<f64>>,
    pub argmin: Vec<usize>,
}

/// Score every trajectory against every model; ties break toward the
/// smallest model index.
pub fn classify(trajectories: &[Trajectory], models: &[LdsModel]) -> Result<LossTable> {
    if models.is_empty() {
        return Err(Error::EmptyInput("classification needs at least one model".into()));
    }
    let evaluators: Vec<LossEvaluator> = models.iter().map(LossEvaluator::new).collect::<Result<_>>()?;
    for traj in trajectories {
        if traj.dim() != models[0].dim() {
            return Err(Error::DimensionMismatch(format!(
                "trajectory {} dimension {} vs model dimension {}",
                traj.index,
                traj.dim(),
                models[0].dim()
            )));
        }
    }
    let losses: Vec<Vec<f64>> = trajectories
        .par_iter()
        .map(|traj| evaluators.iter().map(|e| e.loss(traj)).collect())
        .collect();
    let argmin = losses
        .iter()
        .map(|row| {
            let mut best = 0usize;
            for (k, &v) in row.iter().enumerate() {
                if v < row[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    Ok(LossTable { losses, argmin })
}

/// Fraction of trajectories whose permuted argmin disagrees with the truth.
pub fn classification_error(
    table: &LossTable,
    truth: &[usize],
    permutation: &[usize],
) -> Result<f64> {
    if table.argmin.len() != truth.len() {
        return Err(Error::SizeMismatch(format!(
            "loss table has {} rows, truth has {}",
            table.argmin.len(),
            truth.len()
        )));
    }
    let k = permutation.len();
    let mut seen = vec![false; k];
    for &p in permutation {
        if p >= k || seen[p] {
            return Err(Error::InvalidPermutation);
        }
        seen[p] = true;
    }
    if truth.is_empty() {
        return Ok(0.0);
    }
    let mut wrong = 0usize;
    for (&a, &t) in table.argmin.iter().zip(truth) {
        if a >= k || permutation[a] != t {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / truth.len() as f64)
}
