//! `mixlds` — simulate mixed-LDS datasets, run the two-stage learning
//! pipeline (whole or stage by stage), ingest external CSV trajectories,
//! and run the evaluation sweeps.
//!
//! Exit codes: 0 success, 2 config parse, 3 I/O, 4 data-contract violation,
//! 5 numeric/stage failure.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{parse_k_flag, parse_seeds, parse_tau_flag, RunConfig};
use mixlds::classification::classification_error;
use mixlds::clustering::{
    auto_threshold_from_table, compute_pair_table, partition, ClusterAssignment,
    Reduction,
};
use mixlds::estimation::{least_squares_estimate, ClusterData, ModelEstimate};
use mixlds::io as mio;
use mixlds::pipeline::{
    match_models, quantile_grid, run_pipeline, sweep, ClassificationCurveParams,
    ClusteringCurveParams, Experiment, Fig2Params, KChoice, PipelineReport, TauChoice,
};
use mixlds::subspace::{estimate_subspaces, RankRule};
use mixlds::{Error, LdsModel, Result, Trajectory};

#[derive(Parser)]
#[command(name = "mixlds", version, about = "Learn mixtures of linear dynamical systems from short trajectories")]
struct Cli {
    /// Output directory for all artifacts (fixed filenames within).
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker thread count (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mixed dataset (dataset.jsonl) from a config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the full two-stage pipeline on a dataset (report.json).
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        overrides: PipelineFlags,
    },
    /// Estimate the autocovariance subspaces (subspaces.json).
    Subspace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Pairwise testing + partitioning only (similarity.csv, assignment.csv).
    Cluster {
        /// JSONL dataset; its clustering subset is used.
        #[arg(long, conflicts_with = "csv_dir")]
        dataset: Option<PathBuf>,
        /// Directory of per-trajectory CSV files (one row per time step).
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// CSV files carry a header row.
        #[arg(long)]
        header: bool,
        /// Cluster count: integer or `auto`.
        #[arg(long, default_value = "auto")]
        k: String,
        /// Similarity threshold: number or `auto`.
        #[arg(long, default_value = "auto")]
        tau: String,
        /// Median copy count.
        #[arg(long, default_value_t = 1)]
        g: usize,
        /// Skip subspace estimation (full-basis statistics).
        #[arg(long)]
        no_subspaces: bool,
    },
    /// Per-cluster least squares from an assignment (models.json).
    Estimate {
        #[arg(long)]
        dataset: PathBuf,
        /// assignment.csv written by `cluster` (index,cluster).
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        ridge: f64,
    },
    /// Score trajectories against models (losses.csv).
    Classify {
        #[arg(long)]
        dataset: PathBuf,
        /// models.json (array of {"a": ..., "w": ...}).
        #[arg(long)]
        models: PathBuf,
        /// Add jitter·I to each noise covariance before factorization.
        #[arg(long, default_value_t = 0.0)]
        jitter: f64,
    },
    /// Run a named experiment over seeds (sweep.csv).
    Sweep {
        /// fig2 | clustering_curve | classification_curve
        #[arg(long)]
        experiment: String,
        /// Seed list `0,1,2` or range `0..8`.
        #[arg(long, default_value = "0..8")]
        seeds: String,
        /// Optional JSON file overriding the experiment parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Re-evaluate a report against ground truth (metrics.json).
    Eval {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PipelineFlags {
    /// Skip subspace estimation (full-basis statistics).
    #[arg(long)]
    no_subspaces: bool,
    /// Similarity threshold: number or `auto`.
    #[arg(long)]
    tau: Option<String>,
    /// Median copy count.
    #[arg(long)]
    g: Option<usize>,
    /// Cluster count: integer or `auto`.
    #[arg(long)]
    k: Option<String>,
    /// Ridge added to the least-squares normal matrix.
    #[arg(long)]
    ridge: Option<f64>,
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config_hash: String,
    seed: u64,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wall_time_ms: u128,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        // A failed build just means a pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            std::process::ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 = config parse, 3 = I/O, 4 = data contract, 5 = numeric/stage failure.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Serde(_) | Error::InvalidSpec(_) | Error::InvalidRho(_)
        | Error::InvalidConstruction(_) => 2,
        Error::Io(_) => 3,
        Error::MissingSubset(_)
        | Error::DimensionMismatch(_)
        | Error::RaggedCsv(_)
        | Error::EmptyInput(_)
        | Error::TooShort(_)
        | Error::SizeMismatch(_)
        | Error::IndexOutOfRange(_)
        | Error::InvalidK(_)
        | Error::EmptyGrid
        | Error::TooManyClusters(_)
        | Error::TooManyModels(_)
        | Error::InvalidPermutation => 4,
        Error::Stage { source, .. } => exit_code(source),
        _ => 5,
    }
}

fn run(cli: Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out)?;
    let started = Instant::now();
    match &cli.command {
        Command::Simulate { config } => cmd_simulate(&cli, config, started),
        Command::Fit {
            config,
            dataset,
            overrides,
        } => cmd_fit(&cli, config, dataset, overrides, started),
        Command::Subspace { config, dataset } => cmd_subspace(&cli, config, dataset, started),
        Command::Cluster {
            dataset,
            csv_dir,
            header,
            k,
            tau,
            g,
            no_subspaces,
        } => cmd_cluster(
            &cli,
            dataset.as_deref(),
            csv_dir.as_deref(),
            *header,
            k,
            tau,
            *g,
            *no_subspaces,
            started,
        ),
        Command::Estimate {
            dataset,
            assignment,
            ridge,
        } => cmd_estimate(&cli, dataset, assignment, *ridge, started),
        Command::Classify {
            dataset,
            models,
            jitter,
        } => cmd_classify(&cli, dataset, models, *jitter, started),
        Command::Sweep {
            experiment,
            seeds,
            params,
        } => cmd_sweep(&cli, experiment, seeds, params.as_deref(), started),
        Command::Eval {
            report,
            config,
            dataset,
        } => cmd_eval(&cli, report, config, dataset.as_deref(), started),
    }
}

fn write_manifest(
    cli: &Cli,
    command: &str,
    config_hash: u64,
    seed: u64,
    inputs: &[&Path],
    outputs: &[&Path],
    started: Instant,
) -> Result<()> {
    let manifest = Manifest {
        command: command.to_string(),
        config_hash: format!("{config_hash:016x}"),
        seed,
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_time_ms: started.elapsed().as_millis(),
    };
    let path = cli.out.join("manifest.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &manifest)?;
    Ok(())
}

fn load_config(cli: &Cli, path: &Path) -> Result<RunConfig> {
    let mut config = RunConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn load_dataset(path: &Path) -> Result<mio::LoadedDataset> {
    mio::read_dataset_jsonl(BufReader::new(File::open(path)?))
}

fn cmd_simulate(cli: &Cli, config_path: &Path, started: Instant) -> Result<()> {
    let config = load_config(cli, config_path)?;
    let spec = config.mixture_spec()?;
    let dataset = mixlds::simulate_dataset(&spec)?;
    let out_path = cli.out.join("dataset.jsonl");
    mio::write_dataset_jsonl(&dataset, BufWriter::new(File::create(&out_path)?))?;
    write_manifest(
        cli,
        "simulate",
        config.hash(),
        config.seed,
        &[config_path],
        &[&out_path],
        started,
    )?;
    println!(
        "wrote {} trajectories to {}",
        spec.total_trajectories(),
        out_path.display()
    );
    Ok(())
}

fn apply_flags(config: &mut RunConfig, flags: &PipelineFlags) -> Result<()> {
    if flags.no_subspaces {
        config.pipeline.use_subspaces = false;
    }
    if let Some(tau) = &flags.tau {
        config.pipeline.tau = Some(parse_tau_flag(tau)?);
    }
    if let Some(g) = flags.g {
        config.pipeline.g = g;
    }
    if let Some(k) = &flags.k {
        config.pipeline.k = parse_k_flag(k)?;
    }
    if let Some(ridge) = flags.ridge {
        config.pipeline.ridge = ridge;
    }
    Ok(())
}

fn cmd_fit(
    cli: &Cli,
    config_path: &Path,
    dataset_path: &Path,
    flags: &PipelineFlags,
    started: Instant,
) -> Result<()> {
    let mut config = load_config(cli, config_path)?;
    apply_flags(&mut config, flags)?;
    let dataset = load_dataset(dataset_path)?;
    // The config is the source of truth for which stages run; a subset it
    // declares must actually be present in the dataset.
    for (name, declared, present) in [
        ("subspace", config.subspace.count, dataset.subspace_set.len()),
        ("clustering", config.clustering.count, dataset.clustering_set.len()),
        (
            "classification",
            config.classification.count,
            dataset.classification_set.len(),
        ),
    ] {
        if declared > 0 && present == 0 {
            return Err(Error::MissingSubset(format!(
                "config declares a {name} subset of {declared} trajectories but the dataset has none"
            )));
        }
    }
    let truth = config.build_models()?;
    let report = run_pipeline(&dataset.view(Some(&truth)), &config.pipeline_config())?;

    let report_path = cli.out.join("report.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&report_path)?), &report)?;
    let similarity_path = cli.out.join("similarity.csv");
    if let Some(similarity) = &report.similarity {
        mio::write_similarity_csv(similarity, BufWriter::new(File::create(&similarity_path)?))?;
    }
    let stats_path = cli.out.join("statistics.csv");
    if let Some(table) = &report.pair_table {
        mio::write_statistics_csv(table, BufWriter::new(File::create(&stats_path)?))?;
    }
    write_manifest(
        cli,
        "fit",
        config.hash(),
        config.seed,
        &[config_path, dataset_path],
        &[&report_path, &similarity_path, &stats_path],
        started,
    )?;
    print_report_summary(&report);
    Ok(())
}

fn print_report_summary(report: &PipelineReport) {
    println!(
        "clusters: {} (tau = {:.6})",
        report.clusters.k_hat, report.tau_used
    );
    if let Some(errors) = &report.a_errors {
        let max_a = errors.iter().copied().fold(0.0f64, f64::max);
        println!("max transition error:   {max_a:.6}");
    }
    if let Some(errors) = &report.w_rel_errors {
        let max_w = errors.iter().copied().fold(0.0f64, f64::max);
        println!("max rel. noise error:   {max_w:.6}");
    }
    if let Some(e) = report.clustering_error {
        println!("clustering error:       {e:.6}");
    }
    if let Some(e) = report.classification_error {
        println!("classification error:   {e:.6}");
    }
}

fn cmd_subspace(cli: &Cli, config_path: &Path, dataset_path: &Path, started: Instant) -> Result<()> {
    let config = load_config(cli, config_path)?;
    let dataset = load_dataset(dataset_path)?;
    let source = if !dataset.subspace_set.is_empty() {
        &dataset.subspace_set
    } else {
        &dataset.clustering_set
    };
    if source.is_empty() {
        return Err(Error::MissingSubset(
            "dataset has neither subspace nor clustering trajectories".into(),
        ));
    }
    let (k_hint, rule) = match config.pipeline.k {
        KChoice::Fixed(k) => (k, RankRule::Fixed(k)),
        KChoice::Auto => (1, RankRule::Energy(config.pipeline.energy)),
    };
    let bank = estimate_subspaces(source, k_hint, rule)?;
    let out_path = cli.out.join("subspaces.json");
    mio::write_bank_json(&bank, BufWriter::new(File::create(&out_path)?))?;
    write_manifest(
        cli,
        "subspace",
        config.hash(),
        config.seed,
        &[config_path, dataset_path],
        &[&out_path],
        started,
    )?;
    println!("estimated rank-{} subspaces for {} coordinates", bank.r, bank.v.len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_cluster(
    cli: &Cli,
    dataset: Option<&Path>,
    csv_dir: Option<&Path>,
    header: bool,
    k_flag: &str,
    tau_flag: &str,
    g: usize,
    no_subspaces: bool,
    started: Instant,
) -> Result<()> {
    let mut inputs: Vec<&Path> = Vec::new();
    let trajectories: Vec<Trajectory> = match (dataset, csv_dir) {
        (Some(path), None) => {
            inputs.push(path);
            let loaded = load_dataset(path)?;
            if loaded.clustering_set.is_empty() {
                return Err(Error::MissingSubset("dataset has no clustering subset".into()));
            }
            loaded.clustering_set
        }
        (None, Some(dir)) => {
            inputs.push(dir);
            mio::read_csv_trajectory_dir(dir, header)?
        }
        _ => {
            return Err(Error::InvalidSpec(
                "cluster needs exactly one of --dataset or --csv-dir".into(),
            ))
        }
    };

    let k_choice = parse_k_flag(k_flag)?;
    let tau_choice = parse_tau_flag(tau_flag)?;
    let reduction = if no_subspaces {
        Reduction::Identity
    } else {
        let (k_hint, rule) = match k_choice {
            KChoice::Fixed(k) => (k, RankRule::Fixed(k)),
            KChoice::Auto => (1, RankRule::Energy(0.9)),
        };
        Reduction::Bank(estimate_subspaces(&trajectories, k_hint, rule)?)
    };
    let table = compute_pair_table(&trajectories, &reduction, g)?;
    let (tau, k) = match (tau_choice, k_choice) {
        (TauChoice::Fixed(tau), KChoice::Fixed(k)) => (tau, k),
        (TauChoice::Fixed(tau), KChoice::Auto) => {
            let k = table.similarity(tau).components().k_hat;
            (tau, k)
        }
        (TauChoice::Auto { grid }, k_choice) => {
            let grid = if grid.is_empty() { quantile_grid(&table) } else { grid };
            let (tau, k_hat) = auto_threshold_from_table(&table, &grid)?;
            let k = match k_choice {
                KChoice::Fixed(k) => k,
                KChoice::Auto => k_hat,
            };
            (tau, k)
        }
    };
    let similarity = table.similarity(tau);
    let assignment = partition(&similarity, k)?;

    let similarity_path = cli.out.join("similarity.csv");
    mio::write_similarity_csv(&similarity, BufWriter::new(File::create(&similarity_path)?))?;
    let stats_path = cli.out.join("statistics.csv");
    mio::write_statistics_csv(&table, BufWriter::new(File::create(&stats_path)?))?;
    let assignment_path = cli.out.join("assignment.csv");
    mio::write_assignment_csv(&assignment, BufWriter::new(File::create(&assignment_path)?))?;
    write_manifest(
        cli,
        "cluster",
        mixlds::linalg::fnv1a64(format!("cluster,{k_flag},{tau_flag},{g},{no_subspaces}").as_bytes()),
        cli.seed.unwrap_or(0),
        &inputs,
        &[&similarity_path, &stats_path, &assignment_path],
        started,
    )?;
    println!(
        "clustered {} trajectories into {} clusters at tau = {tau:.6}",
        trajectories.len(),
        assignment.k_hat
    );
    Ok(())
}

fn cmd_estimate(
    cli: &Cli,
    dataset_path: &Path,
    assignment_path: &Path,
    ridge: f64,
    started: Instant,
) -> Result<()> {
    let dataset = load_dataset(dataset_path)?;
    let trajectories = if !dataset.clustering_set.is_empty() {
        &dataset.clustering_set
    } else {
        return Err(Error::MissingSubset("dataset has no clustering subset".into()));
    };
    let assignment = read_assignment_csv(assignment_path, trajectories.len())?;
    let mut groups: Vec<Vec<&Trajectory>> = vec![Vec::new(); assignment.k_hat];
    for (traj, &label) in trajectories.iter().zip(&assignment.labels) {
        groups[label].push(traj);
    }
    let estimates: Vec<ModelEstimate> = groups
        .into_iter()
        .map(|members| least_squares_estimate(&ClusterData::new(members)?, ridge))
        .collect::<Result<_>>()?;
    let out_path = cli.out.join("models.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&out_path)?), &estimates)?;
    write_manifest(
        cli,
        "estimate",
        mixlds::linalg::fnv1a64(format!("estimate,{ridge}").as_bytes()),
        cli.seed.unwrap_or(0),
        &[dataset_path, assignment_path],
        &[&out_path],
        started,
    )?;
    println!("estimated {} models", estimates.len());
    Ok(())
}

fn read_assignment_csv(path: &Path, expected_len: usize) -> Result<ClusterAssignment> {
    let text = std::fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 || line.trim().is_empty() {
            continue; // header
        }
        let mut fields = line.split(',');
        let _index = fields.next();
        let label: usize = fields
            .next()
            .ok_or_else(|| Error::RaggedCsv(format!("{}: row {}", path.display(), lineno + 1)))?
            .trim()
            .parse()
            .map_err(|_| Error::RaggedCsv(format!("{}: row {}", path.display(), lineno + 1)))?;
        labels.push(label);
    }
    if labels.len() != expected_len {
        return Err(Error::SizeMismatch(format!(
            "assignment has {} rows, dataset has {expected_len} clustering trajectories",
            labels.len()
        )));
    }
    let k_hat = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
    Ok(ClusterAssignment { labels, k_hat })
}

fn cmd_classify(
    cli: &Cli,
    dataset_path: &Path,
    models_path: &Path,
    jitter: f64,
    started: Instant,
) -> Result<()> {
    let dataset = load_dataset(dataset_path)?;
    let trajectories = if !dataset.classification_set.is_empty() {
        &dataset.classification_set
    } else if !dataset.clustering_set.is_empty() {
        &dataset.clustering_set
    } else {
        return Err(Error::MissingSubset(
            "dataset has no classification or clustering subset".into(),
        ));
    };
    let mut models = mio::read_models_json(BufReader::new(File::open(models_path)?))?;
    if jitter > 0.0 {
        models = models
            .into_iter()
            .map(|m| m.jittered(jitter))
            .collect::<Result<_>>()?;
    }
    let table = mixlds::classification::classify(trajectories, &models)?;
    let out_path = cli.out.join("losses.csv");
    mio::write_loss_csv(&table, BufWriter::new(File::create(&out_path)?))?;
    write_manifest(
        cli,
        "classify",
        mixlds::linalg::fnv1a64(format!("classify,{jitter}").as_bytes()),
        cli.seed.unwrap_or(0),
        &[dataset_path, models_path],
        &[&out_path],
        started,
    )?;
    println!("classified {} trajectories against {} models", trajectories.len(), models.len());
    Ok(())
}

fn cmd_sweep(
    cli: &Cli,
    experiment: &str,
    seeds: &str,
    params: Option<&Path>,
    started: Instant,
) -> Result<()> {
    let seeds = parse_seeds(seeds)?;
    let experiment = match experiment {
        "fig2" => {
            let p: Fig2Params = match params {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => Fig2Params::default(),
            };
            Experiment::Fig2(p)
        }
        "clustering_curve" => {
            let p: ClusteringCurveParams = match params {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => ClusteringCurveParams::default(),
            };
            Experiment::ClusteringCurve(p)
        }
        "classification_curve" => {
            let p: ClassificationCurveParams = match params {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
                None => ClassificationCurveParams::default(),
            };
            Experiment::ClassificationCurve(p)
        }
        other => {
            return Err(Error::InvalidSpec(format!(
                "unknown experiment {other}; expected fig2, clustering_curve, or classification_curve"
            )))
        }
    };
    let rows = sweep(&experiment, &seeds)?;
    let out_path = cli.out.join("sweep.csv");
    mio::write_sweep_csv(&rows, BufWriter::new(File::create(&out_path)?))?;
    write_manifest(
        cli,
        "sweep",
        mixlds::linalg::fnv1a64(
            serde_json::to_string(&experiment)
                .expect("experiment serializes")
                .as_bytes(),
        ),
        *seeds.first().unwrap_or(&0),
        &[],
        &[&out_path],
        started,
    )?;
    println!("wrote {} rows to {}", rows.len(), out_path.display());
    Ok(())
}

#[derive(Serialize)]
struct EvalMetrics {
    k_hat: usize,
    permutation: Vec<usize>,
    a_errors: Vec<f64>,
    w_rel_errors: Vec<f64>,
    clustering_error: Option<f64>,
    classification_error: Option<f64>,
}

fn cmd_eval(
    cli: &Cli,
    report_path: &Path,
    config_path: &Path,
    dataset_path: Option<&Path>,
    started: Instant,
) -> Result<()> {
    let config = load_config(cli, config_path)?;
    let report: PipelineReport =
        serde_json::from_reader(BufReader::new(File::open(report_path)?))?;
    let truth = config.build_models()?;
    if report.models.len() != truth.len() {
        return Err(Error::SizeMismatch(format!(
            "report has {} models, ground truth has {}",
            report.models.len(),
            truth.len()
        )));
    }
    let estimates: Vec<LdsModel> = report.models.iter().map(|e| e.model.clone()).collect();
    let matched = match_models(&estimates, &truth)?;

    let mut clustering_err = None;
    let mut classification_err = None;
    if let Some(path) = dataset_path {
        let dataset = load_dataset(path)?;
        let labels: Vec<usize> = dataset
            .clustering_set
            .iter()
            .filter_map(|t| t.true_label)
            .collect();
        if labels.len() == dataset.clustering_set.len()
            && labels.len() == report.clusters.labels.len()
        {
            let wrong = report
                .clusters
                .labels
                .iter()
                .zip(&labels)
                .filter(|(&c, &t)| matched.permutation[c] != t)
                .count();
            clustering_err = Some(wrong as f64 / labels.len() as f64);
        }
        let class_labels: Vec<usize> = dataset
            .classification_set
            .iter()
            .filter_map(|t| t.true_label)
            .collect();
        if !class_labels.is_empty() && class_labels.len() == dataset.classification_set.len() {
            let coarse: Vec<LdsModel> =
                report.coarse_models.iter().map(|e| e.model.clone()).collect();
            let table = mixlds::classification::classify(&dataset.classification_set, &coarse)?;
            classification_err =
                Some(classification_error(&table, &class_labels, &matched.permutation)?);
        }
    }
    let metrics = EvalMetrics {
        k_hat: report.clusters.k_hat,
        permutation: matched.permutation,
        a_errors: matched.a_errors,
        w_rel_errors: matched.w_rel_errors,
        clustering_error: clustering_err,
        classification_error: classification_err,
    };
    let out_path = cli.out.join("metrics.json");
    let mut writer = BufWriter::new(File::create(&out_path)?);
    serde_json::to_writer_pretty(&mut writer, &metrics)?;
    writer.flush()?;
    let mut inputs: Vec<&Path> = vec![report_path, config_path];
    if let Some(p) = dataset_path {
        inputs.push(p);
    }
    write_manifest(
        cli,
        "eval",
        config.hash(),
        config.seed,
        &inputs,
        &[&out_path],
        started,
    )?;
    println!("{}", serde_json::to_string_pretty(&metrics)?);
    Ok(())
}
