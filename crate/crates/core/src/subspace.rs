//! Spectral subspace estimation from short trajectories.
//!
//! For each coordinate `i`, the rows `{(Γᵏ)_i}` (resp. `{(Yᵏ)_i}`) of the K
//! stationary autocovariances span a rank-≤K subspace. These subspaces are
//! estimated by averaging outer products of segment moments taken from two
//! well-separated segments of each trajectory, then taking the top-r
//! eigenspace of the symmetrized average.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_sorted, KahanMatrixSum};
use crate::model::{Autocovariances, LdsModel};
use crate::sim::Trajectory;

/// Index sets for one trajectory: per copy `g`, the pair `(Ω_{g,1}, Ω_{g,2})`.
///
/// `{0, …, T}` is divided into `4G` segments of length `N = ⌊T/4G⌋`; copy `g`
/// uses the 2nd and 4th segment of its group of four. All indices satisfy
/// `t ≤ T − 1`, so `x_{t+1}` is always available.
#[derive(Clone, Debug)]
pub struct SegmentPlan {
    pub n: usize,
    omegas: Vec<(Vec<usize>, Vec<usize>)>,
}

impl SegmentPlan {
    /// Plan `copies` independent copies over a trajectory with `t` transitions.
    pub fn new(t: usize, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidSpec("copy count must be at least 1".into()));
        }
        let n = t / (4 * copies);
        if n == 0 {
            return Err(Error::TooShort(format!(
                "trajectory length {t} cannot host {copies} copies of four segments"
            )));
        }
        let omegas = (0..copies)
            .map(|g| {
                let o1 = ((4 * g + 1) * n..(4 * g + 2) * n).collect();
                let o2 = ((4 * g + 3) * n..(4 * g + 4) * n).collect();
                (o1, o2)
            })
            .collect();
        Ok(Self { n, omegas })
    }

    /// The quarter-segment plan used for subspace estimation (one copy).
    pub fn quarters(t: usize) -> Result<Self> {
        Self::new(t, 1)
    }

    pub fn copies(&self) -> usize {
        self.omegas.len()
    }

    /// Index set `Ω_{g,j}` for copy `g` and half `j ∈ {0, 1}`.
    pub fn omega(&self, g: usize, j: usize) -> &[usize] {
        match j {
            0 => &self.omegas[g].0,
            1 => &self.omegas[g].1,
            _ => panic!("segment half must be 0 or 1"),
        }
    }
}

/// Segment moments of one trajectory for coordinate `i`:
/// `h = |Ω|⁻¹ Σ_{t∈Ω} (x_t)_i x_t` and `g = |Ω|⁻¹ Σ_{t∈Ω} (x_{t+1})_i x_t`.
pub fn segment_moments(
    traj: &Trajectory,
    omega: &[usize],
    i: usize,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let d = traj.dim();
    if i >= d {
        return Err(Error::IndexOutOfRange(format!(
            "coordinate {i} out of range for dimension {d}"
        )));
    }
    if omega.is_empty() {
        return Err(Error::EmptyInput("segment index set is empty".into()));
    }
    let t_max = traj.num_steps();
    if let Some(&max) = omega.iter().max() {
        if max + 1 > t_max {
            return Err(Error::IndexOutOfRange(format!(
                "segment index {max} needs x_{}, but trajectory ends at x_{t_max}",
                max + 1
            )));
        }
    }
    let mut h = DVector::zeros(d);
    let mut g = DVector::zeros(d);
    for &t in omega {
        let x = traj.state(t);
        h += x * x[i];
        g += x * traj.state(t + 1)[i];
    }
    let scale = 1.0 / omega.len() as f64;
    Ok((h * scale, g * scale))
}

/// Second-moment matrix of a segment: row `i` equals `h_{m,i,j}ᵀ`, i.e. the
/// matrix is `|Ω|⁻¹ Σ_{t∈Ω} x_t x_tᵀ`.
pub(crate) fn segment_h_matrix(traj: &Trajectory, omega: &[usize]) -> DMatrix<f64> {
    let d = traj.dim();
    let mut m = DMatrix::zeros(d, d);
    for &t in omega {
        let x = traj.state(t);
        m.ger(1.0, &x, &x, 1.0);
    }
    m / omega.len() as f64
}

/// Lag-one moment matrix of a segment: row `i` equals `g_{m,i,j}ᵀ`, i.e. the
/// matrix is `|Ω|⁻¹ Σ_{t∈Ω} x_{t+1} x_tᵀ`.
pub(crate) fn segment_g_matrix(traj: &Trajectory, omega: &[usize]) -> DMatrix<f64> {
    let d = traj.dim();
    let mut m = DMatrix::zeros(d, d);
    for &t in omega {
        m.ger(1.0, &traj.state(t + 1), &traj.state(t), 1.0);
    }
    m / omega.len() as f64
}

/// How the subspace rank is chosen.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum RankRule {
    /// Use exactly the given rank (K when the model count is known).
    Fixed(usize),
    /// Smallest rank whose top eigenvalues (by absolute value) cover the
    /// given fraction of the total absolute eigenvalue mass.
    Energy(f64),
}

/// Estimated rank-r subspaces `{V_i}` (for Γ rows) and `{U_i}` (for Y rows).
#[derive(Clone, Debug)]
pub struct SubspaceBank {
    pub r: usize,
    pub v: Vec<DMatrix<f64>>,
    pub u: Vec<DMatrix<f64>>,
}

impl SubspaceBank {
    pub fn dim(&self) -> usize {
        self.v.first().map_or(0, |m| m.nrows())
    }

    /// The trivial full basis (identity columns); projecting with it is exact.
    pub fn full_basis(d: usize) -> Self {
        let eye = DMatrix::identity(d, d);
        Self {
            r: d,
            v: vec![eye.clone(); d],
            u: vec![eye; d],
        }
    }
}

/// Estimate the subspaces from `trajectories`, which are truncated to the
/// shortest length present before segment planning.
///
/// Degenerate conventions: an exactly zero moment matrix yields the first
/// `r` canonical basis vectors, and `r = d` yields the canonical full basis
/// outright (so full-rank projection is exact).
pub fn estimate_subspaces(
    trajectories: &[Trajectory],
    k: usize,
    rank_rule: RankRule,
) -> Result<SubspaceBank> {
    if trajectories.is_empty() {
        return Err(Error::EmptyInput("subspace estimation needs trajectories".into()));
    }
    if k == 0 {
        return Err(Error::InvalidK("subspace rank must be at least 1".into()));
    }
    let d = trajectories[0].dim();
    for t in trajectories {
        if t.dim() != d {
            return Err(Error::DimensionMismatch(
                "all trajectories must share one dimension".into(),
            ));
        }
    }
    let t_min = trajectories.iter().map(|t| t.num_steps()).min().unwrap();
    let plan = SegmentPlan::quarters(t_min)?;

    // Accumulate Ĥ_i and Ĝ_i per coordinate with compensated summation, in
    // trajectory-index order. Moments are computed in parallel per chunk;
    // the chunk layout is fixed, so the result is thread-count independent.
    let mut h_accs: Vec<KahanMatrixSum> = (0..d).map(|_| KahanMatrixSum::zeros(d, d)).collect();
    let mut g_accs: Vec<KahanMatrixSum> = (0..d).map(|_| KahanMatrixSum::zeros(d, d)).collect();
    for chunk in trajectories.chunks(256) {
        let moments: Vec<[DMatrix<f64>; 4]> = chunk
            .par_iter()
            .map(|traj| {
                [
                    segment_h_matrix(traj, plan.omega(0, 0)),
                    segment_h_matrix(traj, plan.omega(0, 1)),
                    segment_g_matrix(traj, plan.omega(0, 0)),
                    segment_g_matrix(traj, plan.omega(0, 1)),
                ]
            })
            .collect();
        h_accs
            .par_iter_mut()
            .zip(g_accs.par_iter_mut())
            .enumerate()
            .for_each(|(i, (h_acc, g_acc))| {
                for mom in &moments {
                    let h1 = mom[0].row(i).transpose();
                    let h2 = mom[1].row(i).transpose();
                    let g1 = mom[2].row(i).transpose();
                    let g2 = mom[3].row(i).transpose();
                    h_acc.add(&(&h1 * h2.transpose()));
                    g_acc.add(&(&g1 * g2.transpose()));
                }
            });
    }

    let scale = 1.0 / trajectories.len() as f64;
    let spectra: Vec<[(Vec<f64>, DMatrix<f64>); 2]> = h_accs
        .into_par_iter()
        .zip(g_accs.into_par_iter())
        .map(|(h_acc, g_acc)| {
            let h_hat = h_acc.finish() * scale;
            let g_hat = g_acc.finish() * scale;
            [
                sym_eigen_sorted(&exact_symmetric_double(&h_hat)),
                sym_eigen_sorted(&exact_symmetric_double(&g_hat)),
            ]
        })
        .collect();

    let r = match rank_rule {
        RankRule::Fixed(r) => r.min(d),
        RankRule::Energy(threshold) => {
            let mut r = 1usize;
            for pair in &spectra {
                for (vals, _) in pair {
                    r = r.max(energy_rank(vals, threshold));
                }
            }
            r.min(d)
        }
    };

    if r == d {
        return Ok(SubspaceBank::full_basis(d));
    }

    let mut v = Vec::with_capacity(d);
    let mut u = Vec::with_capacity(d);
    for pair in &spectra {
        v.push(top_eigenspace(&pair[0], r, d, matches!(rank_rule, RankRule::Energy(_))));
        u.push(top_eigenspace(&pair[1], r, d, matches!(rank_rule, RankRule::Energy(_))));
    }
    Ok(SubspaceBank { r, v, u })
}

/// `m + mᵀ` computed entrywise so the result is exactly symmetric.
fn exact_symmetric_double(m: &DMatrix<f64>) -> DMatrix<f64> {
    let d = m.nrows();
    DMatrix::from_fn(d, d, |r, c| m[(r, c)] + m[(c, r)])
}

fn energy_rank(sorted_by_value: &[f64], threshold: f64) -> usize {
    let mut abs: Vec<f64> = sorted_by_value.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = abs.iter().sum();
    if total <= 0.0 {
        return 1;
    }
    let mut cum = 0.0;
    for (idx, v) in abs.iter().enumerate() {
        cum += v;
        if cum >= threshold * total {
            return idx + 1;
        }
    }
    abs.len()
}

/// Columns of the top-r eigenspace. Ranking is by signed eigenvalue for the
/// fixed rule (the population matrices are PSD) and by absolute value for
/// the energy rule. A zero spectrum falls back to canonical basis columns.
fn top_eigenspace(
    spectrum: &(Vec<f64>, DMatrix<f64>),
    r: usize,
    d: usize,
    by_abs: bool,
) -> DMatrix<f64> {
    let (vals, vecs) = spectrum;
    if vals.iter().all(|&v| v == 0.0) {
        let mut basis = DMatrix::zeros(d, r);
        for j in 0..r {
            basis[(j, j)] = 1.0;
        }
        return basis;
    }
    let mut order: Vec<usize> = (0..d).collect();
    if by_abs {
        order.sort_by(|&i, &j| vals[j].abs().total_cmp(&vals[i].abs()));
    }
    let mut out = DMatrix::zeros(d, r);
    for (j, &src) in order.iter().take(r).enumerate() {
        out.set_column(j, &vecs.column(src));
    }
    out
}

/// Residual table of a bank against a model set: entry `(k, i)` is
/// `max(‖(Γᵏ)_i − V_iV_iᵀ(Γᵏ)_i‖₂, ‖(Yᵏ)_i − U_iU_iᵀ(Yᵏ)_i‖₂)`.
#[derive(Clone, Debug)]
pub struct ProjectionResiduals {
    pub max: f64,
    /// `per_model[k][i]`
    pub per_model: Vec<Vec<f64>>,
}

/// Worst-case projection residual of `bank` over the rows of the model
/// autocovariances.
pub fn projection_residual(bank: &SubspaceBank, models: &[LdsModel]) -> Result<ProjectionResiduals> {
    if models.is_empty() {
        return Err(Error::EmptyInput("projection residual needs models".into()));
    }
    let d = models[0].dim();
    if bank.dim() != d || bank.v.len() != d || bank.u.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "bank dimension {} does not match model dimension {d}",
            bank.dim()
        )));
    }
    let mut per_model = Vec::with_capacity(models.len());
    let mut max = 0.0f64;
    for model in models {
        let ac = Autocovariances::of_model(model, 1e-12)?;
        let mut row = Vec::with_capacity(d);
        for i in 0..d {
            let gi = ac.gamma.row(i).transpose();
            let yi = ac.y.row(i).transpose();
            let rv = (&gi - &bank.v[i] * (bank.v[i].transpose() * &gi)).norm();
            let ru = (&yi - &bank.u[i] * (bank.u[i].transpose() * &yi)).norm();
            let res = rv.max(ru);
            max = max.max(res);
            row.push(res);
        }
        per_model.push(row);
    }
    Ok(ProjectionResiduals { max, per_model })
}
