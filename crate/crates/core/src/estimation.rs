//! Per-cluster ordinary least squares for the transition matrix and
//! empirical residual covariance for the noise.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_extrema, symmetrize};
use crate::model::LdsModel;
use crate::sim::Trajectory;

/// One cluster's trajectories, sorted by trajectory index so that partial
/// sums reduce in a fixed order regardless of input order.
pub struct ClusterData<'a> {
    members: Vec<&'a Trajectory>,
    total_steps: usize,
}

impl<'a> ClusterData<'a> {
    pub fn new(mut members: Vec<&'a Trajectory>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyInput("cluster has no members".into()));
        }
        let d = members[0].dim();
        for t in &members {
            if t.dim() != d {
                return Err(Error::DimensionMismatch(
                    "all cluster members must share one dimension".into(),
                ));
            }
        }
        members.sort_by_key(|t| t.index);
        let total_steps = members.iter().map(|t| t.num_steps()).sum();
        Ok(Self {
            members,
            total_steps,
        })
    }

    pub fn members(&self) -> &[&'a Trajectory] {
        &self.members
    }

    pub fn total_steps(&self) -> usize {
        self.total_steps
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }
}

/// An estimated model with solver diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelEstimate {
    #[serde(flatten)]
    pub model: LdsModel,
    /// Smallest eigenvalue of the (un-ridged) normal matrix `Σ x xᵀ`.
    #[serde(rename = "min_eig")]
    pub normal_matrix_min_eig: f64,
    #[serde(rename = "steps")]
    pub steps_used: usize,
}

/// OLS estimate `Â = (Σ x_{t+1}x_tᵀ)(Σ x_t x_tᵀ + ridge·I)⁻¹` and residual
/// covariance `Ŵ = (Σ T_m)⁻¹ Σ ŵŵᵀ` with `ŵ = x_{t+1} − Âx_t`.
///
/// With `ridge = 0` a rank-deficient normal matrix is an error rather than
/// being silently regularized.
pub fn least_squares_estimate(cluster: &ClusterData, ridge: f64) -> Result<ModelEstimate> {
    if ridge < 0.0 {
        return Err(Error::InvalidSpec(format!("ridge must be >= 0, got {ridge}")));
    }
    let d = cluster.dim();
    // Per-trajectory partial sums in parallel, combined in index order.
    let partials: Vec<(DMatrix<f64>, DMatrix<f64>)> = cluster
        .members()
        .par_iter()
        .map(|traj| {
            let t = traj.num_steps();
            let x0 = traj.states().columns(0, t);
            let x1 = traj.states().columns(1, t);
            (x0 * x0.transpose(), x1 * x0.transpose())
        })
        .collect();
    let mut sxx = DMatrix::zeros(d, d);
    let mut sxy = DMatrix::zeros(d, d);
    for (pxx, pxy) in &partials {
        sxx += pxx;
        sxy += pxy;
    }
    let sxx = symmetrize(&sxx);
    let (min_eig, max_eig) = sym_eigen_extrema(&sxx);
    if ridge == 0.0 && (max_eig <= 0.0 || min_eig < 1e-12 * max_eig) {
        return Err(Error::SingularNormalMatrix { min_eig });
    }
    let mut normal = sxx;
    for i in 0..d {
        normal[(i, i)] += ridge;
    }
    let chol = nalgebra::Cholesky::new(normal)
        .ok_or(Error::SingularNormalMatrix { min_eig })?;
    // Â = Sxy · N⁻¹  ⇔  N Âᵀ = Sxyᵀ (N symmetric)
    let a_hat = chol.solve(&sxy.transpose()).transpose();

    let residual_partials: Vec<DMatrix<f64>> = cluster
        .members()
        .par_iter()
        .map(|traj| {
            let t = traj.num_steps();
            let x0 = traj.states().columns(0, t);
            let x1 = traj.states().columns(1, t);
            let resid = x1 - &a_hat * x0;
            &resid * resid.transpose()
        })
        .collect();
    let mut rsum = DMatrix::zeros(d, d);
    for r in &residual_partials {
        rsum += r;
    }
    let w_hat = symmetrize(&rsum) / cluster.total_steps() as f64;
    Ok(ModelEstimate {
        model: LdsModel::from_parts(a_hat, w_hat)?,
        normal_matrix_min_eig: min_eig,
        steps_used: cluster.total_steps(),
    })
}

/// All residuals `ŵ_{m,t} = x_{m,t+1} − Âx_{m,t}`, trajectory-major then
/// time-major.
pub fn residuals(cluster: &ClusterData, model: &LdsModel) -> Result<Vec<DVector<f64>>> {
    if model.dim() != cluster.dim() {
        return Err(Error::DimensionMismatch(format!(
            "model dimension {} does not match cluster dimension {}",
            model.dim(),
            cluster.dim()
        )));
    }
    let mut out = Vec::with_capacity(cluster.total_steps());
    for traj in cluster.members() {
        for t in 0..traj.num_steps() {
            out.push(traj.state(t + 1) - model.a() * traj.state(t));
        }
    }
    Ok(out)
}
