//! Linear dynamical system models and their stationary autocovariances.
//!
//! A model is the pair `(A, W)` of a state transition matrix and a noise
//! covariance driving the recursion `x_{t+1} = A x_t + w_t`. For a stable
//! model the order-0 stationary autocovariance `Γ = E[x_t x_tᵀ]` solves the
//! discrete Lyapunov equation `Γ = AΓAᵀ + W`, and the order-1 autocovariance
//! is `Y = E[x_{t+1} x_tᵀ] = AΓ`. The pair `(Γ, Y)` determines the model:
//! `A = YΓ⁻¹` and `W = Γ − AΓAᵀ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, spectral_radius, sym_eigen_extrema, symmetrize};

/// Stability guard: Γ is only computed below this spectral-radius ceiling.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Doubling-iteration cap for the stationary covariance solver.
pub const MAX_DOUBLINGS: usize = 200;

/// Relative asymmetry tolerated in a noise covariance before rejection.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Condition-number ceiling for inverting Γ in [`recover_model`].
pub const GAMMA_COND_LIMIT: f64 = 1e12;

/// One linear dynamical system: state transition `a` and noise covariance `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct LdsModel {
    a: DMatrix<f64>,
    w: DMatrix<f64>,
}

impl LdsModel {
    /// Strict constructor: `w` must be symmetric (within [`SYMMETRY_TOL`]
    /// relative) and positive definite. `w` is exactly symmetrized before
    /// storage.
    pub fn new(a: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self> {
        let model = Self::from_parts(a, w)?;
        let (min_eig, _) = sym_eigen_extrema(&model.w);
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        Ok(model)
    }

    /// Shape/symmetry-checked constructor that tolerates a merely positive
    /// *semi*-definite `w`. Estimated models (empirical residual covariances)
    /// use this path; operations that need `w ≻ 0` check at the call site.
    pub fn from_parts(a: DMatrix<f64>, w: DMatrix<f64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "a must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if w.nrows() != a.nrows() || w.ncols() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "w must match a: a is {}x{}, w is {}x{}",
                a.nrows(),
                a.ncols(),
                w.nrows(),
                w.ncols()
            )));
        }
        let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let asym = (&w - w.transpose())
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 && asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { asym });
        }
        Ok(Self {
            a,
            w: symmetrize(&w),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Spectral radius of the transition matrix.
    pub fn radius(&self) -> f64 {
        spectral_radius(&self.a)
    }

    /// Order-0 stationary autocovariance Γ solving `Γ = AΓAᵀ + W`.
    ///
    /// Doubling iteration on the partial sums of `Σ AᵗW(Aᵗ)ᵀ`:
    /// `Γ_{n+1} = Γ_n + PΓ_nPᵀ` with `P = A^{2ⁿ}`, stopped once the added
    /// increment falls below `tol · ‖Γ‖_F`. Quadratically convergent and
    /// needs no eigendecomposition of the (nonsymmetric) transition matrix.
    pub fn stationary_covariance(&self, tol: f64) -> Result<DMatrix<f64>> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "stationary covariance tolerance must be positive, got {tol}"
            )));
        }
        let rho = self.radius();
        if rho >= 1.0 - STABILITY_MARGIN {
            return Err(Error::UnstableModel { rho });
        }
        let mut gamma = self.w.clone();
        let mut pow = self.a.clone();
        for _ in 0..MAX_DOUBLINGS {
            let inc = &pow * &gamma * pow.transpose();
            gamma += &inc;
            if inc.norm() <= tol * gamma.norm() {
                return Ok(symmetrize(&gamma));
            }
            pow = &pow * &pow;
        }
        Err(Error::NoConvergence {
            max_doublings: MAX_DOUBLINGS,
        })
    }

    /// The same model with `eps·I` added to the noise covariance; used to
    /// regularize near-singular covariances from ingested data.
    pub fn jittered(&self, eps: f64) -> Result<Self> {
        let mut w = self.w.clone();
        for i in 0..self.dim() {
            w[(i, i)] += eps;
        }
        Self::from_parts(self.a.clone(), w)
    }

    /// Order-1 stationary autocovariance `Y = A·Γ` for a previously computed Γ.
    pub fn order1_autocovariance(&self, gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if gamma.nrows() != self.dim() || gamma.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "gamma is {}x{}, model dimension is {}",
                gamma.nrows(),
                gamma.ncols(),
                self.dim()
            )));
        }
        Ok(&self.a * gamma)
    }
}

/// Order-0 and order-1 stationary autocovariances of one model.
#[derive(Clone, Debug)]
pub struct Autocovariances {
    pub gamma: DMatrix<f64>,
    pub y: DMatrix<f64>,
}

impl Autocovariances {
    /// Exact autocovariances of a stable model, to relative tolerance `tol`.
    pub fn of_model(model: &LdsModel, tol: f64) -> Result<Self> {
        let gamma = model.stationary_covariance(tol)?;
        let y = model.order1_autocovariance(&gamma)?;
        Ok(Self { gamma, y })
    }
}

/// Recover `(A, W)` from the stationary autocovariances: `A = YΓ⁻¹`,
/// `W = Γ − AΓAᵀ` (symmetrized).
pub fn recover_model(gamma: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<LdsModel> {
    let d = gamma.nrows();
    if gamma.ncols() != d || y.nrows() != d || y.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "gamma is {}x{}, y is {}x{}",
            gamma.nrows(),
            gamma.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    let gamma_sym = symmetrize(gamma);
    let (min_eig, max_eig) = sym_eigen_extrema(&gamma_sym);
    if min_eig <= 0.0 || max_eig / min_eig > GAMMA_COND_LIMIT {
        let cond = if min_eig > 0.0 {
            max_eig / min_eig
        } else {
            f64::INFINITY
        };
        return Err(Error::SingularGamma { cond });
    }
    let chol = nalgebra::Cholesky::new(gamma_sym.clone())
        .ok_or(Error::SingularGamma { cond: f64::INFINITY })?;
    // A = YΓ⁻¹  ⇔  Γ Aᵀ = Yᵀ (Γ symmetric)
    let a = chol.solve(&y.transpose()).transpose();
    let w = symmetrize(&(&gamma_sym - &a * &gamma_sym * a.transpose()));
    let (w_min, _) = sym_eigen_extrema(&w);
    if w_min <= -1e-8 * max_eig || w_min <= 0.0 {
        return Err(Error::NonPsdResidual { min_eig: w_min });
    }
    LdsModel::new(a, w)
}

// JSON format: {"a": row-major array of arrays, "w": row-major array of arrays}
#[derive(Serialize, Deserialize)]
struct ModelJson {
    a: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>]) -> std::result::Result<DMatrix<f64>, String> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err("matrix has no rows".into());
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err("ragged matrix rows".into());
    }
    Ok(DMatrix::from_fn(nrows, ncols, |r, c| rows[r][c]))
}

impl Serialize for LdsModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ModelJson {
            a: matrix_to_rows(&self.a),
            w: matrix_to_rows(&self.w),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LdsModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ModelJson::deserialize(deserializer)?;
        let a = rows_to_matrix(&raw.a).map_err(serde::de::Error::custom)?;
        let w = rows_to_matrix(&raw.w).map_err(serde::de::Error::custom)?;
        LdsModel::from_parts(a, w).map_err(serde::de::Error::custom)
    }
}

/// Pairwise separation and conditioning diagnostics for a model set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationReport {
    /// `min over pairs of √(‖Γk−Γℓ‖²_F + ‖Yk−Yℓ‖²_F)`
    pub d_gamma_y: f64,
    /// `min over pairs of √(‖Ak−Aℓ‖²_F + ‖Wk−Wℓ‖²_F / W_max²)`
    pub d_aw: f64,
    /// `d_gamma_y / √d` (per-coordinate scale)
    pub d_gamma_y_canonical: f64,
    /// `d_aw / √d`
    pub d_aw_canonical: f64,
    /// Largest noise-covariance eigenvalue over all models.
    pub w_max: f64,
    /// Smallest noise-covariance eigenvalue over all models.
    pub w_min: f64,
    /// Largest stationary-covariance eigenvalue over all models.
    pub gamma_max: f64,
    /// Largest spectral radius over all models.
    pub rho_hat: f64,
}

/// Compute the separation diagnostics of `models` (all stable, at least two).
pub fn separation_report(models: &[LdsModel]) -> Result<SeparationReport> {
    if models.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "separation report needs at least 2 models, got {}",
            models.len()
        )));
    }
    let d = models[0].dim();
    let mut w_max = f64::NEG_INFINITY;
    let mut w_min = f64::INFINITY;
    let mut gamma_max = f64::NEG_INFINITY;
    let mut rho_hat: f64 = 0.0;
    let mut autocovs = Vec::with_capacity(models.len());
    for m in models {
        if m.dim() != d {
            return Err(Error::DimensionMismatch(
                "all models must share one dimension".into(),
            ));
        }
        rho_hat = rho_hat.max(m.radius());
        let (lo, hi) = sym_eigen_extrema(m.w());
        w_min = w_min.min(lo);
        w_max = w_max.max(hi);
        let ac = Autocovariances::of_model(m, 1e-12)?;
        let (_, g_hi) = sym_eigen_extrema(&ac.gamma);
        gamma_max = gamma_max.max(g_hi);
        autocovs.push(ac);
    }
    let mut d_gy = f64::INFINITY;
    let mut d_aw = f64::INFINITY;
    for k in 0..models.len() {
        for l in (k + 1)..models.len() {
            let dg = (&autocovs[k].gamma - &autocovs[l].gamma).norm_squared();
            let dy = (&autocovs[k].y - &autocovs[l].y).norm_squared();
            d_gy = d_gy.min((dg + dy).sqrt());
            let da = (models[k].a() - models[l].a()).norm_squared();
            let dw = (models[k].w() - models[l].w()).norm_squared();
            d_aw = d_aw.min((da + dw / (w_max * w_max)).sqrt());
        }
    }
    let sqrt_d = (d as f64).sqrt();
    Ok(SeparationReport {
        d_gamma_y: d_gy,
        d_aw,
        d_gamma_y_canonical: d_gy / sqrt_d,
        d_aw_canonical: d_aw / sqrt_d,
        w_max,
        w_min,
        gamma_max,
        rho_hat,
    })
}

/// Spectral-norm error of an estimated transition matrix.
pub fn a_error(estimate: &LdsModel, truth: &LdsModel) -> f64 {
    spectral_norm(&(estimate.a() - truth.a()))
}

/// Relative spectral-norm error of an estimated noise covariance.
pub fn w_relative_error(estimate: &LdsModel, truth: &LdsModel) -> f64 {
    spectral_norm(&(estimate.w() - truth.w())) / spectral_norm(truth.w())
}
