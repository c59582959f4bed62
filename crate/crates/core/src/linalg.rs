//! Small dense linear-algebra helpers shared by the estimation and
//! clustering modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Largest eigenvalue magnitude of a square matrix.
///
/// Uses the dense (Schur-based) eigenvalue routine; adequate for the state
/// dimensions this crate targets (d up to a few hundred).
pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    assert_eq!(a.nrows(), a.ncols(), "spectral_radius needs a square matrix");
    if a.nrows() == 0 {
        return 0.0;
    }
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Spectral (operator) norm, computed as the square root of the largest
/// eigenvalue of `mᵀm`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = symmetrize(&(m.transpose() * m));
    let max = gram.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    max.max(0.0).sqrt()
}

/// `(m + mᵀ) / 2`
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out[(r, c)] = 0.5 * (m[(r, c)] + m[(c, r)]);
        }
    }
    out
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order; the i-th returned column pairs with the i-th value.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let d = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Extreme eigenvalues (min, max) of a symmetric matrix.
pub fn sym_eigen_extrema(m: &DMatrix<f64>) -> (f64, f64) {
    let vals = m.symmetric_eigenvalues();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in vals.iter() {
        min = min.min(*v);
        max = max.max(*v);
    }
    (min, max)
}

/// Haar-distributed random orthogonal matrix: QR of a Gaussian matrix with
/// the sign of the R diagonal folded into Q.
pub fn haar_orthogonal<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let gauss = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..d {
        if r[(i, i)] < 0.0 {
            let col = -q.column(i);
            q.set_column(i, &col);
        }
    }
    q
}

/// Kahan-compensated accumulator for matrix sums; keeps long reductions
/// (|M| ~ 10^4 trajectories) insensitive to summation drift.
pub struct KahanMatrixSum {
    sum: DMatrix<f64>,
    comp: DMatrix<f64>,
}

impl KahanMatrixSum {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            sum: DMatrix::zeros(nrows, ncols),
            comp: DMatrix::zeros(nrows, ncols),
        }
    }

    pub fn add(&mut self, m: &DMatrix<f64>) {
        for r in 0..self.sum.nrows() {
            for c in 0..self.sum.ncols() {
                let y = m[(r, c)] - self.comp[(r, c)];
                let t = self.sum[(r, c)] + y;
                self.comp[(r, c)] = (t - self.sum[(r, c)]) - y;
                self.sum[(r, c)] = t;
            }
        }
    }

    pub fn finish(self) -> DMatrix<f64> {
        self.sum
    }
}

/// Kahan-compensated scalar accumulator.
#[derive(Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Euclidean norm of the difference of two vectors.
pub fn vec_dist(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm()
}

/// FNV-1a over a byte slice; used to derive deterministic sub-seeds from
/// data fingerprints.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
