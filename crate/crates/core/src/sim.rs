//! Mixed-LDS trajectory simulation with deterministic, counter-based seeding.
//!
//! Every noise vector is drawn from a stream keyed by `(seed, m, t)`, so a
//! dataset is a pure function of its [`MixtureSpec`] regardless of thread
//! count or generation order. Labels are keyed by `(seed, m)` and decided
//! before any state is generated.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::haar_orthogonal;
use crate::model::{Autocovariances, LdsModel, STABILITY_MARGIN};

const TAG_NOISE: u64 = 0x6e6f697365; // "noise"
const TAG_LABEL: u64 = 0x6c6162656c; // "label"
const TAG_MODEL: u64 = 0x6d6f64656c; // "model"
const TAG_SHUFFLE: u64 = 0x73686673; // "shfs"

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// ChaCha stream keyed by a seed plus a list of domain-separation tags.
pub(crate) fn keyed_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = mix64(seed ^ 0x243f6a8885a308d3);
    for &t in tags {
        state = mix64(state ^ mix64(t));
    }
    let mut key = [0u8; 32];
    let mut z = state;
    for chunk in key.chunks_mut(8) {
        z = mix64(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// One short trajectory: `T + 1` states stored as matrix columns, plus the
/// (optional) generating label and the global trajectory index.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub index: usize,
    pub true_label: Option<usize>,
    states: DMatrix<f64>,
}

impl Trajectory {
    /// `states` holds one state per column; at least two are required.
    pub fn new(index: usize, true_label: Option<usize>, states: DMatrix<f64>) -> Result<Self> {
        if states.ncols() < 2 {
            return Err(Error::TooShort(format!(
                "trajectory {index} has {} states; need at least 2",
                states.ncols()
            )));
        }
        Ok(Self {
            index,
            true_label,
            states,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.nrows()
    }

    /// Number of transitions `T` (states are `x_0..x_T`).
    pub fn num_steps(&self) -> usize {
        self.states.ncols() - 1
    }

    pub fn state(&self, t: usize) -> nalgebra::DVectorView<'_, f64> {
        self.states.column(t)
    }

    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }
}

/// How each trajectory's latent label is chosen.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    /// One explicit label per trajectory (global, in index order).
    Fixed(Vec<usize>),
    /// Independent uniform draw over the K models.
    Uniform,
    /// Per-subset quotas matching a fraction vector, deterministically
    /// shuffled.
    Fractions(Vec<f64>),
}

/// Initial-state regime.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Every trajectory starts at the zero state.
    Case0,
    /// Trajectories are contiguous segments of one long trajectory:
    /// `x_{m+1,0} = x_{m,T_m}`, with `x_{1,0} = 0`.
    Case1,
}

/// Count and length of one trajectory subset.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SubsetPlan {
    pub count: usize,
    /// Number of transitions per trajectory (`T_m`).
    pub len: usize,
}

/// Full description of a mixed dataset to simulate.
#[derive(Clone, Debug)]
pub struct MixtureSpec {
    pub models: Vec<LdsModel>,
    pub label_mode: LabelMode,
    pub init_mode: InitMode,
    pub subspace: SubsetPlan,
    pub clustering: SubsetPlan,
    pub classification: SubsetPlan,
    pub seed: u64,
}

impl MixtureSpec {
    pub fn total_trajectories(&self) -> usize {
        self.subspace.count + self.clustering.count + self.classification.count
    }

    fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::EmptyInput("mixture needs at least one model".into()));
        }
        let d = self.models[0].dim();
        for m in &self.models {
            if m.dim() != d {
                return Err(Error::DimensionMismatch(
                    "all mixture models must share one dimension".into(),
                ));
            }
            let rho = m.radius();
            if rho >= 1.0 - STABILITY_MARGIN {
                return Err(Error::UnstableModel { rho });
            }
        }
        for plan in [&self.subspace, &self.clustering, &self.classification] {
            if plan.count > 0 && plan.len < 1 {
                return Err(Error::InvalidSpec(
                    "every nonempty subset needs trajectory length >= 1".into(),
                ));
            }
        }
        match &self.label_mode {
            LabelMode::Fixed(labels) => {
                if labels.len() != self.total_trajectories() {
                    return Err(Error::InvalidSpec(format!(
                        "fixed label list has {} entries; dataset has {} trajectories",
                        labels.len(),
                        self.total_trajectories()
                    )));
                }
                if labels.iter().any(|&l| l >= self.models.len()) {
                    return Err(Error::InvalidSpec(
                        "fixed label out of range for the model list".into(),
                    ));
                }
            }
            LabelMode::Uniform => {}
            LabelMode::Fractions(p) => {
                if p.len() != self.models.len() {
                    return Err(Error::InvalidSpec(
                        "fraction vector length must equal the model count".into(),
                    ));
                }
                if p.iter().any(|&v| v < 0.0) {
                    return Err(Error::InvalidSpec("fractions must be nonnegative".into()));
                }
                let sum: f64 = p.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidSpec(format!(
                        "fractions must sum to 1, got {sum}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Which subset a trajectory belongs to.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    Subspace,
    Clustering,
    Classification,
}

/// The three disjoint trajectory subsets plus an echo of the generating spec.
#[derive(Clone, Debug)]
pub struct MixedDataset {
    pub subspace_set: Vec<Trajectory>,
    pub clustering_set: Vec<Trajectory>,
    pub classification_set: Vec<Trajectory>,
    pub spec_echo: MixtureSpec,
}

impl MixedDataset {
    pub fn subset_of(&self, subset: Subset) -> &[Trajectory] {
        match subset {
            Subset::Subspace => &self.subspace_set,
            Subset::Clustering => &self.clustering_set,
            Subset::Classification => &self.classification_set,
        }
    }
}

/// Model-set constructions used by the experiments.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ModelConstruction {
    /// `Aᵏ = ρ·Rᵏ` with independent Haar-orthogonal `Rᵏ`;
    /// `Wᵏ = Uᵏ Λᵏ (Uᵏ)ᵀ` with Haar `Uᵏ` and `Λᵏ` diagonal uniform on [1, 2].
    OrthogonalRotation,
    /// Two models sharing one Haar rotation: `A¹ = (ρ−δ)R`, `A² = (ρ+δ)R`,
    /// `Wᵏ = I`.
    IdentityPerturbation { delta: f64 },
}

/// Generate the ground-truth model sets used by the synthetic experiments.
pub fn generate_benchmark_models(
    d: usize,
    k: usize,
    rho: f64,
    construction: ModelConstruction,
    seed: u64,
) -> Result<Vec<LdsModel>> {
    if d == 0 || k == 0 {
        return Err(Error::InvalidSpec("d and k must be positive".into()));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidRho(rho));
    }
    match construction {
        ModelConstruction::OrthogonalRotation => (0..k)
            .map(|idx| {
                let mut rng = keyed_rng(seed, &[TAG_MODEL, idx as u64]);
                let a = rho * haar_orthogonal(d, &mut rng);
                let u = haar_orthogonal(d, &mut rng);
                let lambda = DMatrix::from_fn(d, d, |r, c| {
                    if r == c {
                        1.0 + rng.random::<f64>()
                    } else {
                        0.0
                    }
                });
                let w = &u * lambda * u.transpose();
                LdsModel::new(a, w)
            })
            .collect(),
        ModelConstruction::IdentityPerturbation { delta } => {
            if k != 2 {
                return Err(Error::InvalidConstruction(format!(
                    "identity_perturbation builds exactly 2 models, requested {k}"
                )));
            }
            if delta < 0.0 || rho + delta >= 1.0 {
                return Err(Error::InvalidRho(rho + delta));
            }
            let mut rng = keyed_rng(seed, &[TAG_MODEL, 0]);
            let r = haar_orthogonal(d, &mut rng);
            let w = DMatrix::identity(d, d);
            Ok(vec![
                LdsModel::new((rho - delta) * &r, w.clone())?,
                LdsModel::new((rho + delta) * r, w)?,
            ])
        }
    }
}

/// Labels for all `M` trajectories, decided before generation.
fn assign_labels(spec: &MixtureSpec) -> Vec<usize> {
    let k = spec.models.len();
    match &spec.label_mode {
        LabelMode::Fixed(labels) => labels.clone(),
        LabelMode::Uniform => (0..spec.total_trajectories())
            .map(|m| {
                let mut rng = keyed_rng(spec.seed, &[TAG_LABEL, m as u64]);
                rng.random_range(0..k)
            })
            .collect(),
        LabelMode::Fractions(p) => {
            let mut labels = Vec::with_capacity(spec.total_trajectories());
            let plans = [
                (0u64, spec.subspace.count),
                (1u64, spec.clustering.count),
                (2u64, spec.classification.count),
            ];
            for (subset_id, count) in plans {
                labels.extend(quota_labels(p, count, spec.seed, subset_id));
            }
            labels
        }
    }
}

/// Largest-remainder quota for `count` slots, then a keyed Fisher-Yates
/// shuffle; empirical fractions match `p` to within 1/count.
fn quota_labels(p: &[f64], count: usize, seed: u64, subset_id: u64) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let k = p.len();
    let mut base: Vec<usize> = p.iter().map(|&f| (f * count as f64).floor() as usize).collect();
    let mut assigned: usize = base.iter().sum();
    let mut remainders: Vec<(usize, f64)> = p
        .iter()
        .enumerate()
        .map(|(i, &f)| (i, f * count as f64 - base[i] as f64))
        .collect();
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut cursor = 0;
    while assigned < count {
        base[remainders[cursor % k].0] += 1;
        assigned += 1;
        cursor += 1;
    }
    let mut labels = Vec::with_capacity(count);
    for (label, &n) in base.iter().enumerate() {
        labels.extend(std::iter::repeat_n(label, n));
    }
    let mut rng = keyed_rng(seed, &[TAG_SHUFFLE, subset_id]);
    for i in (1..labels.len()).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    labels
}

/// Noise vector for step `t` of trajectory `m`: `L·z` with
/// `z ~ N(0, I)` drawn from the `(seed, m, t)` stream.
fn noise_at(seed: u64, m: usize, t: usize, chol_l: &DMatrix<f64>) -> DVector<f64> {
    let d = chol_l.nrows();
    let mut rng = keyed_rng(seed, &[TAG_NOISE, m as u64, t as u64]);
    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    chol_l * z
}

/// Simulate the full mixed dataset described by `spec`.
pub fn simulate_dataset(spec: &MixtureSpec) -> Result<MixedDataset> {
    spec.validate()?;
    let d = spec.models[0].dim();
    let labels = assign_labels(spec);
    let chols: Vec<DMatrix<f64>> = spec
        .models
        .iter()
        .map(|m| {
            nalgebra::Cholesky::new(m.w().clone())
                .map(|c| c.l())
                .ok_or_else(|| Error::NotPositiveDefinite {
                    min_eig: crate::linalg::sym_eigen_extrema(m.w()).0,
                })
        })
        .collect::<Result<_>>()?;

    let lengths: Vec<usize> = (0..spec.total_trajectories())
        .map(|m| subset_for(spec, m).1)
        .collect();

    let trajectories: Vec<Trajectory> = match spec.init_mode {
        InitMode::Case0 => (0..spec.total_trajectories())
            .into_par_iter()
            .map(|m| {
                let t_m = lengths[m];
                let mut states = DMatrix::zeros(d, t_m + 1);
                let mut x = DVector::zeros(d);
                let a = spec.models[labels[m]].a();
                let l = &chols[labels[m]];
                for t in 0..t_m {
                    x = a * &x + noise_at(spec.seed, m, t, l);
                    states.set_column(t + 1, &x);
                }
                Trajectory::new(m, Some(labels[m]), states)
            })
            .collect::<Result<_>>()?,
        InitMode::Case1 => {
            // Noise draws are order-independent; precompute them in parallel,
            // then stitch the continuous trajectory sequentially.
            let noise: Vec<Vec<DVector<f64>>> = (0..spec.total_trajectories())
                .into_par_iter()
                .map(|m| {
                    let l = &chols[labels[m]];
                    (0..lengths[m])
                        .map(|t| noise_at(spec.seed, m, t, l))
                        .collect()
                })
                .collect();
            let mut out = Vec::with_capacity(spec.total_trajectories());
            let mut x = DVector::<f64>::zeros(d);
            for m in 0..spec.total_trajectories() {
                let t_m = lengths[m];
                let mut states = DMatrix::zeros(d, t_m + 1);
                states.set_column(0, &x);
                let a = spec.models[labels[m]].a();
                for (t, w) in noise[m].iter().enumerate() {
                    x = a * &x + w;
                    states.set_column(t + 1, &x);
                }
                out.push(Trajectory::new(m, Some(labels[m]), states)?);
            }
            out
        }
    };

    let mut subspace_set = Vec::with_capacity(spec.subspace.count);
    let mut clustering_set = Vec::with_capacity(spec.clustering.count);
    let mut classification_set = Vec::with_capacity(spec.classification.count);
    for traj in trajectories {
        match subset_for(spec, traj.index).0 {
            Subset::Subspace => subspace_set.push(traj),
            Subset::Clustering => clustering_set.push(traj),
            Subset::Classification => classification_set.push(traj),
        }
    }
    Ok(MixedDataset {
        subspace_set,
        clustering_set,
        classification_set,
        spec_echo: spec.clone(),
    })
}

/// Subset membership and length for global trajectory index `m`.
fn subset_for(spec: &MixtureSpec, m: usize) -> (Subset, usize) {
    if m < spec.subspace.count {
        (Subset::Subspace, spec.subspace.len)
    } else if m < spec.subspace.count + spec.clustering.count {
        (Subset::Clustering, spec.clustering.len)
    } else {
        (Subset::Classification, spec.classification.len)
    }
}

/// Empirical autocovariances of one long trajectory after a burn-in:
/// `gamma = mean x_t x_tᵀ`, `y = mean x_{t+1} x_tᵀ` over `t > burn_in`.
pub fn empirical_autocov(traj: &Trajectory, burn_in: usize) -> Result<Autocovariances> {
    let t_max = traj.num_steps(); // states 0..=t_max
    if t_max < burn_in + 2 {
        return Err(Error::TooShort(format!(
            "trajectory has {} states; need more than burn_in + 2 = {}",
            t_max + 1,
            burn_in + 2
        )));
    }
    let d = traj.dim();
    let mut gamma = DMatrix::zeros(d, d);
    let mut y = DMatrix::zeros(d, d);
    let mut n = 0usize;
    for t in (burn_in + 1)..t_max {
        let x = traj.state(t);
        gamma += x * x.transpose();
        y += traj.state(t + 1) * x.transpose();
        n += 1;
    }
    let n = n as f64;
    Ok(Autocovariances {
        gamma: gamma / n,
        y: y / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single_model_spec(model: LdsModel, count: usize, len: usize, seed: u64) -> MixtureSpec {
        MixtureSpec {
            models: vec![model],
            label_mode: LabelMode::Uniform,
            init_mode: InitMode::Case0,
            subspace: SubsetPlan { count: 0, len: 0 },
            clustering: SubsetPlan { count, len },
            classification: SubsetPlan { count: 0, len: 0 },
            seed,
        }
    }

    #[test]
    fn zero_transition_gives_iid_noise() {
        let model = LdsModel::new(DMatrix::zeros(2, 2), DMatrix::identity(2, 2)).unwrap();
        let ds = simulate_dataset(&single_model_spec(model, 1, 3, 7)).unwrap();
        let traj = &ds.clustering_set[0];
        assert_eq!(traj.num_steps(), 3);
        assert_eq!(traj.state(0).norm(), 0.0);
        // the three post-initial states are distinct nonzero draws
        for t in 1..=3 {
            assert!(traj.state(t).norm() > 0.0);
        }
        assert!((traj.state(1) - traj.state(2)).norm() > 0.0);
    }

    #[test]
    fn same_spec_is_bit_identical() {
        let model = LdsModel::new(0.5 * DMatrix::identity(3, 3), DMatrix::identity(3, 3)).unwrap();
        let spec = single_model_spec(model, 5, 8, 99);
        let a = simulate_dataset(&spec).unwrap();
        let b = simulate_dataset(&spec).unwrap();
        for (x, y) in a.clustering_set.iter().zip(&b.clustering_set) {
            assert_eq!(x.states(), y.states());
            assert_eq!(x.true_label, y.true_label);
        }
    }

    #[test]
    fn determinism_across_worker_counts() {
        let model = LdsModel::new(0.5 * DMatrix::identity(3, 3), DMatrix::identity(3, 3)).unwrap();
        let spec = single_model_spec(model, 16, 6, 3);
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = pool1.install(|| simulate_dataset(&spec)).unwrap();
        let b = pool8.install(|| simulate_dataset(&spec)).unwrap();
        for (x, y) in a.clustering_set.iter().zip(&b.clustering_set) {
            assert_eq!(x.states(), y.states());
        }
    }

    #[test]
    fn case1_stitches_exactly() {
        let model = LdsModel::new(0.4 * DMatrix::identity(2, 2), DMatrix::identity(2, 2)).unwrap();
        let mut spec = single_model_spec(model, 6, 4, 11);
        spec.init_mode = InitMode::Case1;
        let ds = simulate_dataset(&spec).unwrap();
        assert_eq!(ds.clustering_set[0].state(0).norm(), 0.0);
        for w in ds.clustering_set.windows(2) {
            let last = w[0].state(w[0].num_steps());
            let first = w[1].state(0);
            assert_eq!(last, first, "Case 1 stitching must be exact");
        }
    }

    #[test]
    fn scalar_variance_approaches_stationary() {
        // d=1, a=0.5, w=1: Γ = 4/3; late-state empirical variance within 1%.
        let model = LdsModel::new(
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap();
        let spec = single_model_spec(model, 1, 1_000_000, 42);
        let ds = simulate_dataset(&spec).unwrap();
        let traj = &ds.clustering_set[0];
        let start = traj.num_steps() / 4;
        let mut sum = 0.0;
        let mut n = 0.0;
        for t in start..=traj.num_steps() {
            let v = traj.state(t)[0];
            sum += v * v;
            n += 1.0;
        }
        let var = sum / n;
        assert!((var - 4.0 / 3.0).abs() < 0.01 * (4.0 / 3.0), "var {var}");
    }

    #[test]
    fn fraction_labels_match_quota() {
        let m1 = LdsModel::new(DMatrix::zeros(2, 2), DMatrix::identity(2, 2)).unwrap();
        let m2 = m1.clone();
        let m3 = m1.clone();
        let spec = MixtureSpec {
            models: vec![m1, m2, m3],
            label_mode: LabelMode::Fractions(vec![0.5, 0.3, 0.2]),
            init_mode: InitMode::Case0,
            subspace: SubsetPlan { count: 10, len: 4 },
            clustering: SubsetPlan { count: 20, len: 4 },
            classification: SubsetPlan { count: 0, len: 0 },
            seed: 0,
        };
        let ds = simulate_dataset(&spec).unwrap();
        for (set, count) in [(&ds.subspace_set, 10usize), (&ds.clustering_set, 20)] {
            let mut hist = [0usize; 3];
            for t in set.iter() {
                hist[t.true_label.unwrap()] += 1;
            }
            for (k, &p) in [0.5, 0.3, 0.2].iter().enumerate() {
                let frac = hist[k] as f64 / count as f64;
                assert!(
                    (frac - p).abs() <= 1.0 / count as f64 + 1e-12,
                    "subset fraction {frac} vs requested {p}"
                );
            }
        }
    }

    #[test]
    fn empirical_autocov_zero_trajectory() {
        let states = DMatrix::zeros(2, 10);
        let traj = Trajectory::new(0, None, states).unwrap();
        let ac = empirical_autocov(&traj, 2).unwrap();
        assert_eq!(ac.gamma.norm(), 0.0);
        assert_eq!(ac.y.norm(), 0.0);
    }

    #[test]
    fn empirical_autocov_matches_lyapunov() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let q = haar_orthogonal(2, &mut rng);
        let model = LdsModel::new(0.5 * q, DMatrix::identity(2, 2)).unwrap();
        let ac_true = Autocovariances::of_model(&model, 1e-13).unwrap();
        let spec = single_model_spec(model, 1, 100_000, 5);
        let ds = simulate_dataset(&spec).unwrap();
        let ac = empirical_autocov(&ds.clustering_set[0], 100).unwrap();
        let g_rel = (&ac.gamma - &ac_true.gamma).norm() / ac_true.gamma.norm();
        let y_rel = (&ac.y - &ac_true.y).norm() / ac_true.gamma.norm();
        assert!(g_rel < 0.05, "gamma relative error {g_rel}");
        assert!(y_rel < 0.05, "y relative error {y_rel}");
    }

    #[test]
    fn benchmark_models_orthogonal_rotation() {
        let models = generate_benchmark_models(8, 4, 0.5, ModelConstruction::OrthogonalRotation, 1)
            .unwrap();
        assert_eq!(models.len(), 4);
        for m in &models {
            assert_abs_diff_eq!(crate::linalg::spectral_norm(m.a()), 0.5, epsilon = 1e-10);
            let (lo, hi) = crate::linalg::sym_eigen_extrema(m.w());
            assert!(lo >= 1.0 - 1e-9 && hi <= 2.0 + 1e-9, "W eigs [{lo}, {hi}]");
        }
    }

    #[test]
    fn benchmark_models_zero_rho() {
        let models =
            generate_benchmark_models(2, 1, 0.0, ModelConstruction::OrthogonalRotation, 3).unwrap();
        assert_eq!(models[0].a().norm(), 0.0);
    }

    #[test]
    fn benchmark_models_identity_perturbation() {
        let models = generate_benchmark_models(
            40,
            2,
            0.5,
            ModelConstruction::IdentityPerturbation { delta: 0.12 },
            0,
        )
        .unwrap();
        assert_abs_diff_eq!(models[0].radius(), 0.38, epsilon = 1e-10);
        assert_abs_diff_eq!(models[1].radius(), 0.62, epsilon = 1e-10);
    }

    #[test]
    fn invalid_rho_rejected() {
        assert!(matches!(
            generate_benchmark_models(2, 1, 1.0, ModelConstruction::OrthogonalRotation, 0),
            Err(Error::InvalidRho(_))
        ));
        assert!(matches!(
            generate_benchmark_models(2, 2, 0.9, ModelConstruction::IdentityPerturbation { delta: 0.2 }, 0),
            Err(Error::InvalidRho(_))
        ));
    }
}
