//! Pairwise same-model testing and partitioning of short trajectories.
//!
//! Two trajectories generated by the same model share stationary
//! autocovariances, so the inner product of their segment-moment differences
//! across two well-separated segments concentrates near
//! `‖Γᵏ−Γˡ‖²_F + ‖Yᵏ−Yˡ‖²_F`. The statistic is computed `G` times on
//! disjoint segment groups and robustified by the median; thresholding the
//! median sum yields a similarity matrix that is partitioned into clusters.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{fnv1a64, sym_eigen_sorted, vec_dist};
use crate::sim::Trajectory;
use crate::subspace::{segment_g_matrix, segment_h_matrix, SegmentPlan, SubspaceBank};

/// Dimension reduction applied to the pair statistics: either an estimated
/// subspace bank or the full-basis sentinel (no reduction).
#[derive(Clone, Debug)]
pub enum Reduction {
    Bank(SubspaceBank),
    /// Equivalent to a bank whose every matrix is the identity.
    Identity,
}

impl Reduction {
    /// Project the rows of a segment-moment matrix: column `i` of the output
    /// is `V_iᵀ · (row i of seg)`. The identity sentinel returns `segᵀ`.
    fn project_rows(&self, seg: &DMatrix<f64>, use_v: bool) -> DMatrix<f64> {
        match self {
            Reduction::Identity => seg.transpose(),
            Reduction::Bank(bank) => {
                let d = seg.nrows();
                let mats = if use_v { &bank.v } else { &bank.u };
                let mut out = DMatrix::zeros(bank.r, d);
                for (i, mat) in mats.iter().enumerate() {
                    let row = seg.row(i).transpose();
                    out.set_column(i, &(mat.transpose() * row));
                }
                out
            }
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if let Reduction::Bank(bank) = self {
            if bank.dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "subspace bank has dimension {}, trajectories have {d}",
                    bank.dim()
                )));
            }
        }
        Ok(())
    }
}

/// Per-pair statistic: `G` copies of `(stat_Γ, stat_Y)` and their medians.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairStatistic {
    pub per_copy: Vec<(f64, f64)>,
    pub stat_gamma_median: f64,
    pub stat_y_median: f64,
}

impl PairStatistic {
    pub fn total(&self) -> f64 {
        self.stat_gamma_median + self.stat_y_median
    }
}

/// Median with the lower-middle convention for even counts.
pub fn lower_median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted[(sorted.len() - 1) / 2]
}

/// Projected segment moments of one trajectory: for each copy `g`, the
/// `(projected h, projected g)` matrices of both segment halves.
struct ProjectedMoments {
    // [copy][half] -> (V-projected h-moment, U-projected g-moment)
    copies: Vec<[(DMatrix<f64>, DMatrix<f64>); 2]>,
}

fn projected_moments(
    traj: &Trajectory,
    plan: &SegmentPlan,
    reduction: &Reduction,
) -> ProjectedMoments {
    let copies = (0..plan.copies())
        .map(|g| {
            let project = |j: usize| {
                let h = segment_h_matrix(traj, plan.omega(g, j));
                let gm = segment_g_matrix(traj, plan.omega(g, j));
                (
                    reduction.project_rows(&h, true),
                    reduction.project_rows(&gm, false),
                )
            };
            [project(0), project(1)]
        })
        .collect();
    ProjectedMoments { copies }
}

fn stat_from_moments(a: &ProjectedMoments, b: &ProjectedMoments) -> Vec<(f64, f64)> {
    a.copies
        .iter()
        .zip(&b.copies)
        .map(|(ca, cb)| {
            let dh1 = &ca[0].0 - &cb[0].0;
            let dh2 = &ca[1].0 - &cb[1].0;
            let dg1 = &ca[0].1 - &cb[0].1;
            let dg2 = &ca[1].1 - &cb[1].1;
            (dh1.dot(&dh2), dg1.dot(&dg2))
        })
        .collect()
}

/// The pair statistic for two trajectories with `g` median copies.
///
/// Unequal lengths are handled by truncating to the shorter trajectory
/// before planning segments.
pub fn pair_statistic(
    traj_m: &Trajectory,
    traj_n: &Trajectory,
    reduction: &Reduction,
    g: usize,
) -> Result<PairStatistic> {
    if traj_m.dim() != traj_n.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory dimensions differ: {} vs {}",
            traj_m.dim(),
            traj_n.dim()
        )));
    }
    reduction.check_dim(traj_m.dim())?;
    let t = traj_m.num_steps().min(traj_n.num_steps());
    let plan = SegmentPlan::new(t, g)?;
    let pm = projected_moments(traj_m, &plan, reduction);
    let pn = projected_moments(traj_n, &plan, reduction);
    let per_copy = stat_from_moments(&pm, &pn);
    let gammas: Vec<f64> = per_copy.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = per_copy.iter().map(|c| c.1).collect();
    Ok(PairStatistic {
        stat_gamma_median: lower_median(&gammas),
        stat_y_median: lower_median(&ys),
        per_copy,
    })
}

/// All pairwise median statistics over a trajectory list, computed once and
/// reused for thresholding, export, and threshold search.
#[derive(Clone, Debug)]
pub struct PairTable {
    pub m: usize,
    pub g: usize,
    /// Upper-triangle (m < n), row-major: medians `(stat_Γ, stat_Y)`.
    medians: Vec<(f64, f64)>,
}

impl PairTable {
    fn slot(&self, m: usize, n: usize) -> usize {
        debug_assert!(m < n && n < self.m);
        m * self.m - m * (m + 1) / 2 + (n - m - 1)
    }

    /// Median `(stat_Γ, stat_Y)` for an unordered pair.
    pub fn medians(&self, m: usize, n: usize) -> (f64, f64) {
        if m == n {
            return (0.0, 0.0);
        }
        let (lo, hi) = if m < n { (m, n) } else { (n, m) };
        self.medians[self.slot(lo, hi)]
    }

    /// Threshold the median sums into a similarity matrix.
    pub fn similarity(&self, tau: f64) -> SimilarityMatrix {
        let mut s = DMatrix::from_element(self.m, self.m, 0u8);
        for m in 0..self.m {
            s[(m, m)] = 1;
            for n in (m + 1)..self.m {
                let (sg, sy) = self.medians(m, n);
                let hit = (sg + sy <= tau) as u8;
                s[(m, n)] = hit;
                s[(n, m)] = hit;
            }
        }
        SimilarityMatrix { s, tau, g: self.g }
    }

    /// Rows `(m, n, median_gamma, median_y)` for diagnostics export.
    pub fn rows(&self) -> Vec<(usize, usize, f64, f64)> {
        let mut out = Vec::with_capacity(self.medians.len());
        for m in 0..self.m {
            for n in (m + 1)..self.m {
                let (sg, sy) = self.medians(m, n);
                out.push((m, n, sg, sy));
            }
        }
        out
    }
}

/// Compute the pair table for `trajectories` under `reduction` with `g`
/// median copies. Pairs are evaluated in parallel, each exactly once.
pub fn compute_pair_table(
    trajectories: &[Trajectory],
    reduction: &Reduction,
    g: usize,
) -> Result<PairTable> {
    let m = trajectories.len();
    if m < 2 {
        return Err(Error::EmptyInput(format!(
            "pairwise testing needs at least 2 trajectories, got {m}"
        )));
    }
    let d = trajectories[0].dim();
    for t in trajectories {
        if t.dim() != d {
            return Err(Error::DimensionMismatch(
                "all trajectories must share one dimension".into(),
            ));
        }
    }
    reduction.check_dim(d)?;

    let equal_lengths = trajectories
        .iter()
        .all(|t| t.num_steps() == trajectories[0].num_steps());

    let medians: Vec<(f64, f64)> = if equal_lengths {
        // Shared plan: project each trajectory's moments once.
        let plan = SegmentPlan::new(trajectories[0].num_steps(), g)?;
        let moments: Vec<ProjectedMoments> = trajectories
            .par_iter()
            .map(|t| projected_moments(t, &plan, reduction))
            .collect();
        pair_indices(m)
            .into_par_iter()
            .map(|(a, b)| {
                let per_copy = stat_from_moments(&moments[a], &moments[b]);
                median_pair(&per_copy)
            })
            .collect()
    } else {
        pair_indices(m)
            .into_par_iter()
            .map(|(a, b)| {
                let stat = pair_statistic(&trajectories[a], &trajectories[b], reduction, g)?;
                Ok((stat.stat_gamma_median, stat.stat_y_median))
            })
            .collect::<Result<_>>()?
    };

    Ok(PairTable { m, g, medians })
}

fn median_pair(per_copy: &[(f64, f64)]) -> (f64, f64) {
    let gammas: Vec<f64> = per_copy.iter().map(|c| c.0).collect();
    let ys: Vec<f64> = per_copy.iter().map(|c| c.1).collect();
    (lower_median(&gammas), lower_median(&ys))
}

fn pair_indices(m: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            out.push((a, b));
        }
    }
    out
}

/// Binary symmetric similarity matrix with unit diagonal.
#[derive(Clone, Debug)]
pub struct SimilarityMatrix {
    pub s: DMatrix<u8>,
    pub tau: f64,
    pub g: usize,
}

impl SimilarityMatrix {
    pub fn len(&self) -> usize {
        self.s.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.s.nrows() == 0
    }

    /// Connected components of the similarity graph, labels in order of
    /// first appearance.
    pub fn components(&self) -> ClusterAssignment {
        let m = self.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in 0..m {
            for b in (a + 1)..m {
                if self.s[(a, b)] != 0 {
                    let ra = find(&mut parent, a);
                    let rb = find(&mut parent, b);
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        let mut label_of_root = vec![usize::MAX; m];
        let mut labels = vec![0usize; m];
        let mut next = 0usize;
        for (x, label) in labels.iter_mut().enumerate() {
            let r = find(&mut parent, x);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            *label = label_of_root[r];
        }
        ClusterAssignment { labels, k_hat: next }
    }
}

/// Cluster labels in `[0, k_hat)`, every cluster nonempty.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k_hat: usize,
}

impl ClusterAssignment {
    /// Member indices of each cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k_hat];
        for (idx, &l) in self.labels.iter().enumerate() {
            out[l].push(idx);
        }
        out
    }
}

/// Partition a similarity matrix into `k` clusters.
///
/// If `S` is exactly block-diagonal with `k` blocks (exactly `k` connected
/// components, each a complete clique), the components are returned
/// directly — the exact-clustering regime stays reproducible bit-for-bit.
/// Otherwise normalized spectral clustering with seeded k-means is applied.
/// A merely-connected component is not enough for the fast path: a noisy
/// graph can have `k` components that are far from the planted blocks.
pub fn partition(s: &SimilarityMatrix, k: usize) -> Result<ClusterAssignment> {
    let m = s.len();
    if k == 0 || k > m {
        return Err(Error::InvalidK(format!(
            "cannot split {m} trajectories into {k} clusters"
        )));
    }
    let components = s.components();
    if components.k_hat == k && components_are_cliques(s, &components) {
        return Ok(components);
    }
    spectral_partition(s, k)
}

fn components_are_cliques(s: &SimilarityMatrix, assignment: &ClusterAssignment) -> bool {
    let m = s.len();
    for a in 0..m {
        for b in (a + 1)..m {
            if assignment.labels[a] == assignment.labels[b] && s.s[(a, b)] == 0 {
                return false;
            }
        }
    }
    true
}

fn spectral_partition(s: &SimilarityMatrix, k: usize) -> Result<ClusterAssignment> {
    let m = s.len();
    // Vertices whose only edge is the forced self-loop carry no pairwise
    // information; left in place they each claim a unit eigenvalue of the
    // normalized similarity and poison the top-k embedding. They are set
    // aside and attached to the largest cluster afterwards.
    let active: Vec<usize> = (0..m)
        .filter(|&a| (0..m).any(|b| b != a && s.s[(a, b)] != 0))
        .collect();
    let (active, isolated): (Vec<usize>, Vec<usize>) = if active.len() >= k {
        let isolated = (0..m).filter(|a| !active.contains(a)).collect();
        (active, isolated)
    } else {
        ((0..m).collect(), Vec::new())
    };

    let n = active.len();
    // Symmetrically normalized similarity D^{-1/2} S D^{-1/2} on the active
    // subgraph; the diagonal is one, so every degree is at least one.
    let mut dinv = vec![0.0f64; n];
    for (ia, &a) in active.iter().enumerate() {
        let deg: f64 = active.iter().map(|&b| s.s[(a, b)] as f64).sum();
        dinv[ia] = if deg > 0.0 { 1.0 / deg.sqrt() } else { 0.0 };
    }
    let norm = DMatrix::from_fn(n, n, |ia, ib| {
        s.s[(active[ia], active[ib])] as f64 * dinv[ia] * dinv[ib]
    });
    let (_, vecs) = sym_eigen_sorted(&norm);
    let mut embedding: Vec<Vec<f64>> = (0..n)
        .map(|row| (0..k).map(|col| vecs[(row, col)]).collect())
        .collect();
    for row in embedding.iter_mut() {
        let scale: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if scale > 0.0 {
            for v in row.iter_mut() {
                *v /= scale;
            }
        }
    }
    // Seed k-means from a fingerprint of the similarity matrix itself.
    let mut bytes = Vec::with_capacity(m * m + 16);
    bytes.extend_from_slice(&(m as u64).to_le_bytes());
    bytes.extend_from_slice(&(k as u64).to_le_bytes());
    for a in 0..m {
        for b in 0..m {
            bytes.push(s.s[(a, b)]);
        }
    }
    let seed = fnv1a64(&bytes);
    let labels = kmeans(&embedding, k, seed);

    // Compact labels in order of first appearance over the full index set,
    // attaching isolated vertices to the biggest cluster.
    let mut counts = vec![0usize; k];
    for &l in &labels {
        counts[l] += 1;
    }
    let mut biggest = 0usize;
    for c in 1..k {
        if counts[c] > counts[biggest] {
            biggest = c;
        }
    }
    let mut full = vec![usize::MAX; m];
    for (ia, &a) in active.iter().enumerate() {
        full[a] = labels[ia];
    }
    for &a in &isolated {
        full[a] = biggest;
    }
    let mut remap = vec![usize::MAX; k];
    let mut next = 0usize;
    let mut out = vec![0usize; m];
    for (i, &l) in full.iter().enumerate() {
        if remap[l] == usize::MAX {
            remap[l] = next;
            next += 1;
        }
        out[i] = remap[l];
    }
    Ok(ClusterAssignment {
        labels: out,
        k_hat: next,
    })
}

/// Seeded k-means with k-means++ initialization, 10 restarts, 100-iteration
/// cap, best inertia wins. Empty clusters are refilled with the point
/// farthest from its center.
fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    use rand::Rng;
    let m = points.len();
    let dim = points[0].len();
    let as_vec = |p: &Vec<f64>| nalgebra::DVector::from_column_slice(p);
    let pts: Vec<nalgebra::DVector<f64>> = points.iter().map(as_vec).collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..10u64 {
        let mut rng = crate::sim::keyed_rng(seed, &[0x6b6d65616e73, restart]);
        // k-means++ seeding
        let mut centers: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(k);
        centers.push(pts[rng.random_range(0..m)].clone());
        while centers.len() < k {
            let d2: Vec<f64> = pts
                .iter()
                .map(|p| {
                    centers
                        .iter()
                        .map(|c| vec_dist(p, c).powi(2))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let total: f64 = d2.iter().sum();
            let next = if total > 0.0 {
                let mut target = rng.random::<f64>() * total;
                let mut chosen = m - 1;
                for (i, &w) in d2.iter().enumerate() {
                    if target <= w {
                        chosen = i;
                        break;
                    }
                    target -= w;
                }
                chosen
            } else {
                rng.random_range(0..m)
            };
            centers.push(pts[next].clone());
        }

        let mut labels = vec![0usize; m];
        for _ in 0..100 {
            let mut changed = false;
            for (i, p) in pts.iter().enumerate() {
                let mut best_c = 0usize;
                let mut best_d = f64::INFINITY;
                for (c, center) in centers.iter().enumerate() {
                    let dist = vec_dist(p, center);
                    if dist < best_d {
                        best_d = dist;
                        best_c = c;
                    }
                }
                if labels[i] != best_c {
                    labels[i] = best_c;
                    changed = true;
                }
            }
            // recompute centers
            let mut sums = vec![nalgebra::DVector::<f64>::zeros(dim); k];
            let mut counts = vec![0usize; k];
            for (i, p) in pts.iter().enumerate() {
                sums[labels[i]] += p;
                counts[labels[i]] += 1;
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centers[c] = &sums[c] / counts[c] as f64;
                } else {
                    // refill an empty cluster with the point farthest from
                    // its current center
                    let far = (0..m)
                        .max_by(|&a, &b| {
                            vec_dist(&pts[a], &centers[labels[a]])
                                .total_cmp(&vec_dist(&pts[b], &centers[labels[b]]))
                        })
                        .unwrap();
                    centers[c] = pts[far].clone();
                    labels[far] = c;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = pts
            .iter()
            .zip(&labels)
            .map(|(p, &l)| vec_dist(p, &centers[l]).powi(2))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.unwrap().1
}

/// Pick a threshold from a candidate grid: the component count is evaluated
/// at every candidate, and the τ plateau with the widest span (ties broken
/// toward fewer components, then smaller τ) wins. Returns the midpoint of
/// the winning plateau and its component count.
pub fn auto_threshold_from_table(table: &PairTable, grid: &[f64]) -> Result<(f64, usize)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let counts: Vec<usize> = sorted
        .iter()
        .map(|&tau| table.similarity(tau).components().k_hat)
        .collect();
    // maximal runs of identical component count
    let mut best: Option<(f64, usize, f64)> = None; // (width, count, tau)
    let mut start = 0usize;
    for end in 0..=sorted.len() {
        if end == sorted.len() || counts[end] != counts[start] {
            let width = sorted[end - 1] - sorted[start];
            let count = counts[start];
            let tau = 0.5 * (sorted[start] + sorted[end - 1]);
            let better = match best {
                None => true,
                Some((bw, bc, _)) => width > bw || (width == bw && count < bc),
            };
            if better {
                best = Some((width, count, tau));
            }
            start = end;
        }
    }
    let (_, count, tau) = best.unwrap();
    Ok((tau, count))
}

/// Convenience wrapper: compute the pair table, then search the grid.
pub fn auto_threshold(
    trajectories: &[Trajectory],
    reduction: &Reduction,
    g: usize,
    grid: &[f64],
) -> Result<(f64, usize)> {
    let table = compute_pair_table(trajectories, reduction, g)?;
    auto_threshold_from_table(&table, grid)
}

/// Similarity matrix for a trajectory list (pairs computed once, diagonal
/// forced to one).
pub fn similarity_matrix(
    trajectories: &[Trajectory],
    reduction: &Reduction,
    tau: f64,
    g: usize,
) -> Result<SimilarityMatrix> {
    if !tau.is_finite() {
        return Err(Error::InvalidSpec(format!("tau must be finite, got {tau}")));
    }
    Ok(compute_pair_table(trajectories, reduction, g)?.similarity(tau))
}

/// Fraction of mismatched labels under the best permutation of cluster
/// labels (brute force; at most 10 clusters).
pub fn clustering_error(assignment: &ClusterAssignment, truth: &[usize]) -> Result<f64> {
    if assignment.labels.len() != truth.len() {
        return Err(Error::SizeMismatch(format!(
            "assignment has {} labels, truth has {}",
            assignment.labels.len(),
            truth.len()
        )));
    }
    let k = assignment
        .k_hat
        .max(truth.iter().map(|&t| t + 1).max().unwrap_or(1));
    if k > 10 {
        return Err(Error::TooManyClusters(k));
    }
    let m = truth.len();
    // confusion[a][t] = #trajectories with assignment a and truth t
    let mut confusion = vec![vec![0usize; k]; k];
    for (&a, &t) in assignment.labels.iter().zip(truth) {
        confusion[a][t] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best_match = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let matched: usize = (0..k).map(|a| confusion[a][p[a]]).sum();
        if matched > best_match {
            best_match = matched;
        }
    });
    Ok((m - best_match) as f64 / m as f64)
}

/// Heap-free recursive permutation visitor.
pub(crate) fn permute<F: FnMut(&[usize])>(perm: &mut Vec<usize>, at: usize, visit: &mut F) {
    if at == perm.len() {
        visit(perm);
        return;
    }
    for i in at..perm.len() {
        perm.swap(at, i);
        permute(perm, at + 1, visit);
        perm.swap(at, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{
        generate_benchmark_models, simulate_dataset, InitMode, LabelMode, MixtureSpec,
        ModelConstruction, SubsetPlan,
    };
    use nalgebra::DVector;

    fn traj(index: usize, label: Option<usize>, cols: &[Vec<f64>]) -> Trajectory {
        let d = cols[0].len();
        let mut m = DMatrix::zeros(d, cols.len());
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, &DVector::from_column_slice(c));
        }
        Trajectory::new(index, label, m).unwrap()
    }

    fn random_traj(index: usize, d: usize, t: usize, seed: u64) -> Trajectory {
        use rand::Rng;
        let mut rng = crate::sim::keyed_rng(seed, &[index as u64]);
        let m = DMatrix::from_fn(d, t + 1, |_, _| rng.random::<f64>() - 0.5);
        Trajectory::new(index, None, m).unwrap()
    }

    #[test]
    fn lower_median_conventions() {
        assert_eq!(lower_median(&[3.0]), 3.0);
        assert_eq!(lower_median(&[4.0, 1.0]), 1.0); // lower middle for even
        assert_eq!(lower_median(&[5.0, 1.0, 3.0]), 3.0);
        assert_eq!(lower_median(&[4.0, 2.0, 1.0, 3.0]), 2.0);
    }

    #[test]
    fn identical_trajectories_have_zero_statistic() {
        let a = random_traj(0, 3, 16, 5);
        let b = a.clone();
        let stat = pair_statistic(&a, &b, &Reduction::Identity, 2).unwrap();
        for (sg, sy) in &stat.per_copy {
            assert_eq!(*sg, 0.0);
            assert_eq!(*sy, 0.0);
        }
        assert_eq!(stat.total(), 0.0);
    }

    #[test]
    fn statistic_is_symmetric_in_the_pair() {
        let a = random_traj(0, 3, 16, 6);
        let b = random_traj(1, 3, 16, 7);
        let ab = pair_statistic(&a, &b, &Reduction::Identity, 2).unwrap();
        let ba = pair_statistic(&b, &a, &Reduction::Identity, 2).unwrap();
        assert_eq!(ab.per_copy, ba.per_copy);
    }

    #[test]
    fn scalar_brute_force_oracle() {
        // d=1, G=1, T=8: N = 2, Ω1 = {2,3}, Ω2 = {6,7}.
        let xs = [0.5, -1.0, 2.0, 0.25, 3.0, -0.5, 1.5, 0.75, -2.0];
        let zs = [1.0, 0.5, -0.25, 2.0, -1.0, 0.75, 0.5, -1.5, 1.0];
        let a = traj(0, None, &xs.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        let b = traj(1, None, &zs.iter().map(|&v| vec![v]).collect::<Vec<_>>());
        let stat = pair_statistic(&a, &b, &Reduction::Identity, 1).unwrap();
        let h = |v: &[f64], set: [usize; 2]| (v[set[0]] * v[set[0]] + v[set[1]] * v[set[1]]) / 2.0;
        let g = |v: &[f64], set: [usize; 2]| {
            (v[set[0] + 1] * v[set[0]] + v[set[1] + 1] * v[set[1]]) / 2.0
        };
        let expected_gamma = (h(&xs, [2, 3]) - h(&zs, [2, 3])) * (h(&xs, [6, 7]) - h(&zs, [6, 7]));
        let expected_y = (g(&xs, [2, 3]) - g(&zs, [2, 3])) * (g(&xs, [6, 7]) - g(&zs, [6, 7]));
        assert!((stat.stat_gamma_median - expected_gamma).abs() < 1e-12);
        assert!((stat.stat_y_median - expected_y).abs() < 1e-12);
    }

    #[test]
    fn full_basis_bank_matches_identity_sentinel() {
        let a = random_traj(0, 4, 24, 8);
        let b = random_traj(1, 4, 24, 9);
        let bank = Reduction::Bank(SubspaceBank::full_basis(4));
        let with_bank = pair_statistic(&a, &b, &bank, 2).unwrap();
        let with_identity = pair_statistic(&a, &b, &Reduction::Identity, 2).unwrap();
        for ((g1, y1), (g2, y2)) in with_bank.per_copy.iter().zip(&with_identity.per_copy) {
            assert!((g1 - g2).abs() <= 1e-10 * g2.abs().max(1.0));
            assert!((y1 - y2).abs() <= 1e-10 * y2.abs().max(1.0));
        }
    }

    #[test]
    fn unprojected_oracle_matches_identity_path() {
        // Direct evaluation of the statistic definition without any
        // projection machinery.
        let a = random_traj(0, 3, 16, 10);
        let b = random_traj(1, 3, 16, 11);
        let g = 2usize;
        let stat = pair_statistic(&a, &b, &Reduction::Identity, g).unwrap();
        let plan = SegmentPlan::new(16, g).unwrap();
        for copy in 0..g {
            let mut s_gamma = 0.0;
            let mut s_y = 0.0;
            for i in 0..3 {
                let (h_a1, g_a1) = crate::subspace::segment_moments(&a, plan.omega(copy, 0), i).unwrap();
                let (h_a2, g_a2) = crate::subspace::segment_moments(&a, plan.omega(copy, 1), i).unwrap();
                let (h_b1, g_b1) = crate::subspace::segment_moments(&b, plan.omega(copy, 0), i).unwrap();
                let (h_b2, g_b2) = crate::subspace::segment_moments(&b, plan.omega(copy, 1), i).unwrap();
                s_gamma += (h_a1 - h_b1).dot(&(h_a2 - h_b2));
                s_y += (g_a1 - g_b1).dot(&(g_a2 - g_b2));
            }
            assert!((stat.per_copy[copy].0 - s_gamma).abs() < 1e-12);
            assert!((stat.per_copy[copy].1 - s_y).abs() < 1e-12);
        }
    }

    #[test]
    fn similarity_identical_pair_all_ones() {
        let a = random_traj(0, 2, 8, 1);
        let trajs = vec![a.clone(), a];
        let s = similarity_matrix(&trajs, &Reduction::Identity, 0.0, 1).unwrap();
        assert_eq!(s.s, DMatrix::from_element(2, 2, 1u8));
    }

    #[test]
    fn similarity_negative_tau_is_identity() {
        let trajs = vec![random_traj(0, 2, 8, 2), random_traj(1, 2, 8, 3)];
        let s = similarity_matrix(&trajs, &Reduction::Identity, -1.0, 1).unwrap();
        assert_eq!(s.s, DMatrix::identity(2, 2).map(|v: f64| v as u8));
    }

    #[test]
    fn threshold_monotonicity() {
        let trajs: Vec<Trajectory> = (0..6).map(|i| random_traj(i, 2, 12, i as u64)).collect();
        let table = compute_pair_table(&trajs, &Reduction::Identity, 1).unwrap();
        let taus = [-1.0, 0.0, 0.05, 0.2, 1.0, 10.0];
        let mut prev_count = usize::MAX;
        for window in taus.windows(2) {
            let s1 = table.similarity(window[0]);
            let s2 = table.similarity(window[1]);
            for a in 0..6 {
                for b in 0..6 {
                    assert!(s1.s[(a, b)] <= s2.s[(a, b)], "monotonicity violated");
                }
            }
            let count = s1.components().k_hat;
            assert!(count <= prev_count);
            prev_count = count;
        }
    }

    #[test]
    fn partition_identity_matrix_singletons() {
        let s = SimilarityMatrix {
            s: DMatrix::identity(4, 4).map(|v: f64| v as u8),
            tau: 0.0,
            g: 1,
        };
        let assign = partition(&s, 4).unwrap();
        assert_eq!(assign.k_hat, 4);
        assert_eq!(assign.labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn partition_two_blocks_fast_path() {
        let mut s = DMatrix::from_element(8, 8, 0u8);
        for a in 0..8 {
            for b in 0..8 {
                if (a < 3) == (b < 3) {
                    s[(a, b)] = 1;
                }
            }
        }
        let sim = SimilarityMatrix { s, tau: 1.0, g: 1 };
        let assign = partition(&sim, 2).unwrap();
        assert_eq!(assign.k_hat, 2);
        assert_eq!(&assign.labels[..3], &[0, 0, 0]);
        assert_eq!(&assign.labels[3..], &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn partition_recovers_planted_blocks_with_noise() {
        use rand::Rng;
        let m = 40;
        let mut recovered = 0;
        for trial in 0..20u64 {
            let mut rng = crate::sim::keyed_rng(trial, &[0xb10c]);
            let mut s = DMatrix::from_element(m, m, 0u8);
            for a in 0..m {
                for b in a..m {
                    let same = (a < m / 2) == (b < m / 2);
                    let mut bit = u8::from(same);
                    // flip ~2% of off-diagonal entries
                    if a != b && rng.random::<f64>() < 0.02 {
                        bit = 1 - bit;
                    }
                    if a == b {
                        bit = 1;
                    }
                    s[(a, b)] = bit;
                    s[(b, a)] = bit;
                }
            }
            let sim = SimilarityMatrix { s, tau: 0.0, g: 1 };
            let assign = partition(&sim, 2).unwrap();
            let truth: Vec<usize> = (0..m).map(|i| usize::from(i >= m / 2)).collect();
            if clustering_error(&assign, &truth).unwrap() == 0.0 {
                recovered += 1;
            }
        }
        assert!(recovered >= 19, "planted partition recovered in {recovered}/20");
    }

    #[test]
    fn partition_invalid_k() {
        let s = SimilarityMatrix {
            s: DMatrix::identity(3, 3).map(|v: f64| v as u8),
            tau: 0.0,
            g: 1,
        };
        assert!(matches!(partition(&s, 4), Err(Error::InvalidK(_))));
    }

    #[test]
    fn auto_threshold_single_element_grid() {
        let trajs = vec![random_traj(0, 2, 8, 2), random_traj(1, 2, 8, 3)];
        let (tau, k_hat) = auto_threshold(&trajs, &Reduction::Identity, 1, &[0.37]).unwrap();
        assert_eq!(tau, 0.37);
        let table = compute_pair_table(&trajs, &Reduction::Identity, 1).unwrap();
        assert_eq!(k_hat, table.similarity(0.37).components().k_hat);
    }

    #[test]
    fn auto_threshold_two_models() {
        // Two fast-mixing models separated mostly through the noise scale,
        // so the within/cross statistic histograms split cleanly.
        let mut rng = crate::sim::keyed_rng(4, &[0x5e9]);
        let r = crate::linalg::haar_orthogonal(8, &mut rng);
        let models = vec![
            crate::model::LdsModel::new(0.3 * &r, DMatrix::identity(8, 8)).unwrap(),
            crate::model::LdsModel::new(0.3 * r, 2.5 * DMatrix::identity(8, 8)).unwrap(),
        ];
        let spec = MixtureSpec {
            models,
            label_mode: LabelMode::Fractions(vec![0.5, 0.5]),
            init_mode: InitMode::Case0,
            subspace: SubsetPlan { count: 0, len: 0 },
            clustering: SubsetPlan { count: 24, len: 400 },
            classification: SubsetPlan { count: 0, len: 0 },
            seed: 12,
        };
        let ds = simulate_dataset(&spec).unwrap();
        let table = compute_pair_table(&ds.clustering_set, &Reduction::Identity, 1).unwrap();
        // statistic histogram oracle: the plateau between the largest
        // within-pair and smallest cross-pair statistic must be chosen
        let mut within_max = f64::NEG_INFINITY;
        let mut cross_min = f64::INFINITY;
        for (m, n, sg, sy) in table.rows() {
            let same = ds.clustering_set[m].true_label == ds.clustering_set[n].true_label;
            let total = sg + sy;
            if same {
                within_max = within_max.max(total);
            } else {
                cross_min = cross_min.min(total);
            }
        }
        assert!(
            within_max < cross_min,
            "statistics do not separate: within max {within_max}, cross min {cross_min}"
        );
        let grid: Vec<f64> = (0..200)
            .map(|i| within_max * 0.5 + (cross_min * 1.5 - within_max * 0.5) * i as f64 / 199.0)
            .collect();
        let (tau, k_hat) = auto_threshold_from_table(&table, &grid).unwrap();
        assert_eq!(k_hat, 2);
        assert!(tau > within_max && tau < cross_min, "tau {tau} outside plateau");
    }

    #[test]
    fn auto_threshold_single_model_plateau() {
        let models = generate_benchmark_models(4, 1, 0.5, ModelConstruction::OrthogonalRotation, 6)
            .unwrap();
        let spec = MixtureSpec {
            models,
            label_mode: LabelMode::Uniform,
            init_mode: InitMode::Case0,
            subspace: SubsetPlan { count: 0, len: 0 },
            clustering: SubsetPlan { count: 30, len: 40 },
            classification: SubsetPlan { count: 0, len: 0 },
            seed: 13,
        };
        let ds = simulate_dataset(&spec).unwrap();
        let table = compute_pair_table(&ds.clustering_set, &Reduction::Identity, 2).unwrap();
        let max_stat = table
            .rows()
            .iter()
            .map(|(_, _, sg, sy)| sg + sy)
            .fold(f64::NEG_INFINITY, f64::max);
        let grid: Vec<f64> = (0..100).map(|i| max_stat * 3.0 * i as f64 / 99.0).collect();
        let (_, k_hat) = auto_threshold_from_table(&table, &grid).unwrap();
        assert_eq!(k_hat, 1);
    }

    #[test]
    fn empty_grid_rejected() {
        let trajs = vec![random_traj(0, 2, 8, 2), random_traj(1, 2, 8, 3)];
        assert!(matches!(
            auto_threshold(&trajs, &Reduction::Identity, 1, &[]),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn clustering_error_cases() {
        let assign = ClusterAssignment {
            labels: vec![0, 0, 1, 1],
            k_hat: 2,
        };
        assert_eq!(clustering_error(&assign, &[0, 0, 1, 1]).unwrap(), 0.0);
        // complement labeling is equivalent under permutation
        assert_eq!(clustering_error(&assign, &[1, 1, 0, 0]).unwrap(), 0.0);
        let assign2 = ClusterAssignment {
            labels: vec![0, 1, 1, 1],
            k_hat: 2,
        };
        assert_eq!(clustering_error(&assign2, &[0, 0, 1, 1]).unwrap(), 0.25);
    }

    #[test]
    fn clustering_error_too_many_clusters() {
        let assign = ClusterAssignment {
            labels: (0..11).collect(),
            k_hat: 11,
        };
        let truth: Vec<usize> = (0..11).collect();
        assert!(matches!(
            clustering_error(&assign, &truth),
            Err(Error::TooManyClusters(11))
        ));
    }

    #[test]
    fn appendix_setup_similarity_is_block_dominant() {
        // d=40, K=2, δ=0.12, T=60, |M|=200, τ = Δ²/4, subspaces from an
        // independent set of the same size. At this scale the per-entry
        // statistic noise is a sizable fraction of Δ², so S is noisy
        // block-diagonal rather than exact; the measured violation budget
        // is ~10% of entries, and the partition of S must still recover
        // the planted blocks to within 2% mis-clustering on average.
        let mut total_entries = 0usize;
        let mut violations = 0usize;
        let mut mis = 0.0f64;
        for seed in 0..10u64 {
            let models = generate_benchmark_models(
                40,
                2,
                0.5,
                ModelConstruction::IdentityPerturbation { delta: 0.12 },
                seed,
            )
            .unwrap();
            let rep = crate::model::separation_report(&models).unwrap();
            let tau = rep.d_gamma_y.powi(2) / 4.0;
            let spec = MixtureSpec {
                models,
                label_mode: LabelMode::Fractions(vec![0.5, 0.5]),
                init_mode: InitMode::Case0,
                subspace: SubsetPlan { count: 200, len: 60 },
                clustering: SubsetPlan { count: 200, len: 60 },
                classification: SubsetPlan { count: 0, len: 0 },
                seed: seed + 1000,
            };
            let ds = simulate_dataset(&spec).unwrap();
            let bank = crate::subspace::estimate_subspaces(
                &ds.subspace_set,
                2,
                crate::subspace::RankRule::Fixed(2),
            )
            .unwrap();
            let s = similarity_matrix(&ds.clustering_set, &Reduction::Bank(bank), tau, 1).unwrap();
            for a in 0..200 {
                for b in (a + 1)..200 {
                    let same =
                        ds.clustering_set[a].true_label == ds.clustering_set[b].true_label;
                    total_entries += 1;
                    if (s.s[(a, b)] == 1) != same {
                        violations += 1;
                    }
                }
            }
            let truth: Vec<usize> = ds
                .clustering_set
                .iter()
                .map(|t| t.true_label.unwrap())
                .collect();
            let assign = partition(&s, 2).unwrap();
            mis += clustering_error(&assign, &truth).unwrap() / 10.0;
        }
        let rate = violations as f64 / total_entries as f64;
        assert!(rate <= 0.12, "similarity violation rate {rate}");
        assert!(mis <= 0.02, "mean mis-clustering {mis}");
    }
}
