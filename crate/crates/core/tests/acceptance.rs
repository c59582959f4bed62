//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured values. Run with `cargo test --test acceptance` (add
//! `-- --nocapture` to see the lines for passing criteria too).

use nalgebra::DMatrix;
use std::time::Instant;

use mixlds::clustering::{compute_pair_table, pair_statistic, Reduction};
use mixlds::estimation::{least_squares_estimate, ClusterData};
use mixlds::pipeline::{
    run_pipeline, sweep, ClassificationCurveParams, ClusteringCurveParams, Experiment, Fig2Params,
    KChoice, PipelineConfig, SweepRow,
};
use mixlds::subspace::SubspaceBank;
use mixlds::*;

fn check(name: &str, pass: bool, details: &str) {
    println!(
        "acceptance {name}: {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {details}");
}

fn elapsed_ok(name: &str, started: Instant, budget_s: f64) {
    let secs = started.elapsed().as_secs_f64();
    check(
        &format!("{name} runtime"),
        secs < budget_s,
        &format!("{secs:.1}s (budget {budget_s:.0}s)"),
    );
}

/// 50 random stable models: 10 each of d in {1, 2, 4, 8, 16}.
fn fifty_models() -> Vec<LdsModel> {
    let mut models = Vec::new();
    for (i, &d) in [1usize, 2, 4, 8, 16].iter().enumerate() {
        models.extend(
            generate_benchmark_models(d, 10, 0.8, ModelConstruction::OrthogonalRotation, i as u64)
                .unwrap(),
        );
    }
    models
}

/// Independent oracle: truncated series Σ_{t<10000} AᵗW(Aᵗ)ᵀ (terms that no
/// longer move the f64 sum are skipped).
fn truncated_series_gamma(model: &LdsModel) -> DMatrix<f64> {
    let d = model.dim();
    let mut sum = DMatrix::zeros(d, d);
    let mut pow = DMatrix::identity(d, d);
    for _ in 0..10_000 {
        let term = &pow * model.w() * pow.transpose();
        sum += &term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        pow = &pow * model.a();
    }
    sum
}

#[test]
fn criterion_1_lyapunov_correctness() {
    let started = Instant::now();
    let mut max_residual_rel = 0.0f64;
    let mut max_oracle_rel = 0.0f64;
    for model in fifty_models() {
        let gamma = model.stationary_covariance(1e-13).unwrap();
        let residual =
            (&gamma - model.a() * &gamma * model.a().transpose() - model.w()).norm() / gamma.norm();
        max_residual_rel = max_residual_rel.max(residual);
        let oracle = truncated_series_gamma(&model);
        max_oracle_rel = max_oracle_rel.max((&gamma - &oracle).norm() / oracle.norm());
    }
    check(
        "1 lyapunov residual",
        max_residual_rel <= 1e-10,
        &format!("max ‖Γ−AΓAᵀ−W‖/‖Γ‖ = {max_residual_rel:.3e} (tol 1e-10)"),
    );
    check(
        "1 series oracle",
        max_oracle_rel <= 1e-8,
        &format!("max relative deviation from truncated series = {max_oracle_rel:.3e} (tol 1e-8)"),
    );
    elapsed_ok("1", started, 5.0);
}

#[test]
fn criterion_2_recovery_identity() {
    let started = Instant::now();
    let mut max_rel = 0.0f64;
    for model in fifty_models() {
        let ac = Autocovariances::of_model(&model, 1e-13).unwrap();
        let back = recover_model(&ac.gamma, &ac.y).unwrap();
        let a_rel = (back.a() - model.a()).norm() / model.a().norm().max(1e-300);
        let w_rel = (back.w() - model.w()).norm() / model.w().norm();
        max_rel = max_rel.max(a_rel).max(w_rel);
    }
    check(
        "2 recovery round trip",
        max_rel <= 1e-8,
        &format!("max relative model error = {max_rel:.3e} (tol 1e-8)"),
    );
    elapsed_ok("2", started, 5.0);
}

#[test]
fn criterion_3_switching_example() {
    let started = Instant::now();
    let a_k = 0.99 * DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.5, 0.0]);
    let a_l = 0.99 * DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 1.0 / 3.0, 0.0]);
    let rho_k = spectral_radius(&a_k);
    let rho_l = spectral_radius(&a_l);
    let rho_prod = spectral_radius(&(&a_k * &a_l));
    check(
        "3 factors stable",
        rho_k < 1.0 && rho_l < 1.0 && (rho_k - 0.99).abs() < 1e-9 && (rho_l - 0.99).abs() < 1e-9,
        &format!("factor radii {rho_k:.6}, {rho_l:.6}"),
    );
    check(
        "3 product explodes",
        (rho_prod - 1.47015).abs() <= 1e-6,
        &format!("product radius {rho_prod:.8} (expected 1.47015 ± 1e-6)"),
    );
    elapsed_ok("3", started, 1.0);
}

fn mean_metric(rows: &[SweepRow], metric: &str) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.seed.is_none() && r.metric == metric)
        .map(|r| (r.x, r.value))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn criterion_4_model_error_vs_sample_size() {
    let started = Instant::now();
    let seeds: Vec<u64> = (0..8).collect();
    let rows = sweep(&Experiment::Fig2(Fig2Params::default()), &seeds).unwrap();

    let clustering = mean_metric(&rows, "clustering_error");
    let max_clustering = clustering.iter().map(|p| p.1).fold(0.0, f64::max);
    check(
        "4a exact clustering",
        max_clustering == 0.0,
        &format!("mean clustering error over all sizes = {max_clustering} (required exactly 0)"),
    );
    let classification = mean_metric(&rows, "classification_error");
    let at_largest = classification.last().unwrap().1;
    check(
        "4a classification error",
        at_largest < 0.02,
        &format!("mean classification error at largest size = {at_largest:.5} (< 0.02)"),
    );

    let a_points = mean_metric(&rows, "max_a_error");
    let x_max = a_points.last().unwrap().0;
    let top: Vec<(f64, f64)> = a_points
        .iter()
        .copied()
        .filter(|(x, _)| *x >= x_max / 10.0)
        .collect();
    let slope = loglog_slope(&top);
    check(
        "4b error rate slope",
        (-0.65..=-0.35).contains(&slope),
        &format!("log-log slope of max transition error over the top decade = {slope:.3} (window [-0.65, -0.35])"),
    );
    elapsed_ok("4", started, 600.0);
}

#[test]
fn criterion_5_clustering_curve() {
    let started = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let rows = sweep(
        &Experiment::ClusteringCurve(ClusteringCurveParams::default()),
        &seeds,
    )
    .unwrap();
    let with = mean_metric(&rows, "misclustering_with_reduction");
    let without = mean_metric(&rows, "misclustering_no_reduction");
    let at_60 = with.iter().find(|p| p.0 == 60.0).unwrap().1;
    check(
        "5 reduction error at T=60",
        at_60 < 0.02,
        &format!("mean mis-clustering with reduction at T=60 = {at_60:.5} (< 0.02)"),
    );
    let mut dominated = true;
    let mut detail = String::new();
    for (w, wo) in with.iter().zip(&without) {
        if w.0 >= 20.0 {
            dominated &= w.1 <= wo.1;
            detail.push_str(&format!("T={}: {:.4} vs {:.4}; ", w.0, w.1, wo.1));
        }
    }
    check(
        "5 reduction dominates for T>=20",
        dominated,
        detail.trim_end_matches("; "),
    );
    elapsed_ok("5", started, 600.0);
}

#[test]
fn criterion_6_classification_curve() {
    let started = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let rows = sweep(
        &Experiment::ClassificationCurve(ClassificationCurveParams::default()),
        &seeds,
    )
    .unwrap();
    let means = mean_metric(&rows, "misclassification");
    let at_50 = means.iter().find(|p| p.0 == 50.0).unwrap().1;
    check(
        "6 error at T=50",
        at_50 < 0.01,
        &format!("mean mis-classification at T=50 = {at_50:.5} (< 0.01)"),
    );
    let monotone = means.windows(2).all(|w| w[1].1 <= w[0].1);
    check(
        "6 monotone trend",
        monotone,
        &format!(
            "means along T: {}",
            means
                .iter()
                .map(|p| format!("{:.4}", p.1))
                .collect::<Vec<_>>()
                .join(" → ")
        ),
    );
    elapsed_ok("6", started, 600.0);
}

#[test]
fn criterion_7_ols_rate() {
    let started = Instant::now();
    let sizes = [1000usize, 4000, 16000];
    let mut a_means = Vec::new();
    let mut w_means = Vec::new();
    for &t in &sizes {
        let mut a_sum = 0.0;
        let mut w_sum = 0.0;
        for seed in 0..20u64 {
            let models =
                generate_benchmark_models(4, 1, 0.5, ModelConstruction::OrthogonalRotation, seed)
                    .unwrap();
            let spec = MixtureSpec {
                models: models.clone(),
                label_mode: LabelMode::Uniform,
                init_mode: InitMode::Case0,
                subspace: SubsetPlan { count: 0, len: 0 },
                clustering: SubsetPlan { count: 1, len: t },
                classification: SubsetPlan { count: 0, len: 0 },
                seed,
            };
            let ds = simulate_dataset(&spec).unwrap();
            let refs: Vec<&Trajectory> = ds.clustering_set.iter().collect();
            let est = least_squares_estimate(&ClusterData::new(refs).unwrap(), 0.0).unwrap();
            a_sum += a_error(&est.model, &models[0]);
            w_sum += w_relative_error(&est.model, &models[0]);
        }
        a_means.push((t as f64, a_sum / 20.0));
        w_means.push((t as f64, w_sum / 20.0));
    }
    let a_slope = loglog_slope(&a_means);
    let w_slope = loglog_slope(&w_means);
    check(
        "7 transition error rate",
        (-0.65..=-0.35).contains(&a_slope),
        &format!("log-log slope {a_slope:.3} (window [-0.65, -0.35])"),
    );
    check(
        "7 noise error rate",
        (-0.65..=-0.35).contains(&w_slope),
        &format!("log-log slope {w_slope:.3} (window [-0.65, -0.35])"),
    );
    elapsed_ok("7", started, 120.0);
}

#[test]
fn criterion_8_invariant_suite() {
    let started = Instant::now();

    // Zero self-statistic (exact).
    let models =
        generate_benchmark_models(4, 2, 0.5, ModelConstruction::OrthogonalRotation, 3).unwrap();
    let spec = MixtureSpec {
        models: models.clone(),
        label_mode: LabelMode::Uniform,
        init_mode: InitMode::Case0,
        subspace: SubsetPlan { count: 30, len: 16 },
        clustering: SubsetPlan { count: 24, len: 16 },
        classification: SubsetPlan { count: 16, len: 8 },
        seed: 17,
    };
    let ds = simulate_dataset(&spec).unwrap();
    let traj = &ds.clustering_set[0];
    let self_stat = pair_statistic(traj, traj, &Reduction::Identity, 2).unwrap();
    check(
        "8 zero self-statistic",
        self_stat.per_copy.iter().all(|&(g, y)| g == 0.0 && y == 0.0),
        "statistic of a trajectory against itself is exactly 0 in every copy",
    );

    // Threshold monotonicity of S (entrywise).
    let table = compute_pair_table(&ds.clustering_set, &Reduction::Identity, 1).unwrap();
    let mut monotone = true;
    let taus = [-1.0, 0.0, 0.5, 2.0, 10.0, 1e6];
    for pair in taus.windows(2) {
        let s1 = table.similarity(pair[0]);
        let s2 = table.similarity(pair[1]);
        for a in 0..s1.len() {
            for b in 0..s1.len() {
                monotone &= s1.s[(a, b)] <= s2.s[(a, b)];
            }
        }
    }
    check("8 threshold monotonicity", monotone, "S(τ₁) ≤ S(τ₂) entrywise for τ₁ ≤ τ₂");

    // Full-basis sentinel equivalence to 1e-10.
    let bank = Reduction::Bank(SubspaceBank::full_basis(4));
    let mut max_rel = 0.0f64;
    for n in 1..5 {
        let a = pair_statistic(&ds.clustering_set[0], &ds.clustering_set[n], &bank, 2).unwrap();
        let b = pair_statistic(
            &ds.clustering_set[0],
            &ds.clustering_set[n],
            &Reduction::Identity,
            2,
        )
        .unwrap();
        for (x, y) in a.per_copy.iter().zip(&b.per_copy) {
            max_rel = max_rel.max((x.0 - y.0).abs() / y.0.abs().max(1e-300));
            max_rel = max_rel.max((x.1 - y.1).abs() / y.1.abs().max(1e-300));
        }
    }
    check(
        "8 full-basis sentinel",
        max_rel <= 1e-10,
        &format!("max relative deviation from unprojected statistic = {max_rel:.3e} (tol 1e-10)"),
    );

    // OLS normal-equation residual to 1e-8.
    let refs: Vec<&Trajectory> = ds.clustering_set.iter().collect();
    let cluster = ClusterData::new(refs).unwrap();
    let est = least_squares_estimate(&cluster, 0.0).unwrap();
    let mut cross = DMatrix::zeros(4, 4);
    let mut scale = 0.0f64;
    for traj in ds.clustering_set.iter() {
        for t in 0..traj.num_steps() {
            let w = traj.state(t + 1) - est.model.a() * traj.state(t);
            cross += w * traj.state(t).transpose();
            scale += traj.state(t).norm_squared();
        }
    }
    let rel = cross.norm() / scale;
    check(
        "8 normal equations",
        rel <= 1e-8,
        &format!("‖Σ ŵxᵀ‖ / Σ‖x‖² = {rel:.3e} (tol 1e-8)"),
    );

    // Loss scale identity to 1e-8 relative.
    let model = &models[0];
    let traj = &ds.classification_set[0];
    let base = mixlds::classification::trajectory_loss(traj, model).unwrap();
    let t_m = traj.num_steps() as f64;
    let logdet_w = model
        .w()
        .clone()
        .cholesky()
        .unwrap()
        .l()
        .diagonal()
        .map(|v| v.ln())
        .sum()
        * 2.0;
    let quad = base - t_m * logdet_w;
    let d = model.dim() as f64;
    let mut max_rel = 0.0f64;
    for c in [0.5, 1.7, 3.0] {
        let scaled = LdsModel::new(model.a().clone(), c * model.w()).unwrap();
        let got = mixlds::classification::trajectory_loss(traj, &scaled).unwrap();
        let expected = base + t_m * d * c.ln() + (1.0 / c - 1.0) * quad;
        max_rel = max_rel.max((got - expected).abs() / expected.abs().max(1.0));
    }
    check(
        "8 loss scale identity",
        max_rel <= 1e-8,
        &format!("max relative identity violation = {max_rel:.3e} (tol 1e-8)"),
    );

    // End-to-end determinism: bit-identical reports across two runs and
    // across worker counts 1 vs 8.
    let config = PipelineConfig {
        k: KChoice::Fixed(2),
        ..Default::default()
    };
    let serialize = |report: &mixlds::pipeline::PipelineReport| -> String {
        serde_json::to_string(report).unwrap()
    };
    let r1 = serialize(&run_pipeline(&ds.view(), &config).unwrap());
    let r2 = serialize(&run_pipeline(&ds.view(), &config).unwrap());
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let r3 = serialize(&pool1.install(|| run_pipeline(&ds.view(), &config)).unwrap());
    let r4 = serialize(&pool8.install(|| run_pipeline(&ds.view(), &config)).unwrap());
    check(
        "8 end-to-end determinism",
        r1 == r2 && r1 == r3 && r1 == r4,
        "serialized reports identical across repeated runs and worker counts 1 vs 8",
    );
    elapsed_ok("8", started, 120.0);
}
