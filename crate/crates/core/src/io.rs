//! External file formats: JSONL datasets, per-trajectory CSV ingestion, and
//! CSV exports of similarity matrices, statistic tables, loss tables, and
//! sweep results. Floats are written in shortest round-trip form, so files
//! re-read bit-exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::classification::LossTable;
use crate::clustering::{ClusterAssignment, PairTable, SimilarityMatrix};
use crate::error::{Error, Result};
use crate::model::{matrix_to_rows, rows_to_matrix, LdsModel};
use crate::pipeline::SweepRow;
use crate::sim::{MixedDataset, Subset, Trajectory};
use crate::subspace::SubspaceBank;

/// One dataset line: a trajectory with its subset tag.
#[derive(Serialize, Deserialize)]
struct TrajectoryLine {
    index: usize,
    subset: Subset,
    label: Option<usize>,
    states: Vec<Vec<f64>>,
}

/// A dataset read back from disk (no ground-truth models attached).
#[derive(Clone, Debug, Default)]
pub struct LoadedDataset {
    pub subspace_set: Vec<Trajectory>,
    pub clustering_set: Vec<Trajectory>,
    pub classification_set: Vec<Trajectory>,
}

impl LoadedDataset {
    pub fn view<'a>(&'a self, truth_models: Option<&'a [LdsModel]>) -> crate::pipeline::DatasetView<'a> {
        crate::pipeline::DatasetView {
            subspace: &self.subspace_set,
            clustering: &self.clustering_set,
            classification: &self.classification_set,
            truth_models,
        }
    }
}

fn trajectory_states_to_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    let m = traj.states();
    (0..m.ncols())
        .map(|c| (0..m.nrows()).map(|r| m[(r, c)]).collect())
        .collect()
}

fn rows_to_trajectory(index: usize, label: Option<usize>, rows: &[Vec<f64>]) -> Result<Trajectory> {
    if rows.is_empty() {
        return Err(Error::TooShort(format!("trajectory {index} has no states")));
    }
    let d = rows[0].len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::RaggedCsv(format!(
            "trajectory {index} has states of unequal dimension"
        )));
    }
    let mut m = DMatrix::zeros(d, rows.len());
    for (c, row) in rows.iter().enumerate() {
        for (r, &v) in row.iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    Trajectory::new(index, label, m)
}

/// Write a dataset as JSON Lines, one trajectory per line, in index order.
pub fn write_dataset_jsonl<W: Write>(dataset: &MixedDataset, mut out: W) -> Result<()> {
    let tagged = [
        (Subset::Subspace, &dataset.subspace_set),
        (Subset::Clustering, &dataset.clustering_set),
        (Subset::Classification, &dataset.classification_set),
    ];
    for (subset, set) in tagged {
        for traj in set.iter() {
            let line = TrajectoryLine {
                index: traj.index,
                subset,
                label: traj.true_label,
                states: trajectory_states_to_rows(traj),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Read a JSONL dataset written by [`write_dataset_jsonl`].
pub fn read_dataset_jsonl<R: BufRead>(reader: R) -> Result<LoadedDataset> {
    let mut loaded = LoadedDataset::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TrajectoryLine = serde_json::from_str(&line).map_err(|e| {
            Error::InvalidSpec(format!("dataset line {}: {e}", lineno + 1))
        })?;
        let traj = rows_to_trajectory(parsed.index, parsed.label, &parsed.states)?;
        match parsed.subset {
            Subset::Subspace => loaded.subspace_set.push(traj),
            Subset::Clustering => loaded.clustering_set.push(traj),
            Subset::Classification => loaded.classification_set.push(traj),
        }
    }
    Ok(loaded)
}

/// Read a directory of per-trajectory CSV files (one row per time step, `d`
/// columns). Files are taken in lexicographic order; `index` is the
/// position in that order.
pub fn read_csv_trajectory_dir(dir: &Path, has_header: bool) -> Result<Vec<Trajectory>> {
    let mut files: Vec<std::path::PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no trajectory files in {}",
            dir.display()
        )));
    }
    let mut out = Vec::with_capacity(files.len());
    let mut dim: Option<usize> = None;
    for (index, path) in files.iter().enumerate() {
        let content = std::fs::read_to_string(path)?;
        let rows = parse_csv_states(&content, has_header)
            .map_err(|msg| Error::RaggedCsv(format!("{}: {msg}", path.display())))?;
        let traj = rows_to_trajectory(index, None, &rows)?;
        match dim {
            None => dim = Some(traj.dim()),
            Some(d) if d != traj.dim() => {
                return Err(Error::DimensionMismatch(format!(
                    "{} has dimension {}, earlier files have {d}",
                    path.display(),
                    traj.dim()
                )));
            }
            _ => {}
        }
        out.push(traj);
    }
    Ok(out)
}

fn parse_csv_states(content: &str, has_header: bool) -> std::result::Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, line) in content.lines().enumerate() {
        if lineno == 0 && has_header {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(format!(
                    "row {} has {} fields, expected {w}",
                    lineno + 1,
                    fields.len()
                ));
            }
            _ => {}
        }
        let row = fields
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| format!("row {}: {e}", lineno + 1))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Similarity matrix as CSV of 0/1 entries, one matrix row per line.
pub fn write_similarity_csv<W: Write>(s: &SimilarityMatrix, mut out: W) -> Result<()> {
    for r in 0..s.len() {
        let row: Vec<String> = (0..s.len()).map(|c| s.s[(r, c)].to_string()).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Pairwise statistic table: rows `m,n,median_gamma,median_y`.
pub fn write_statistics_csv<W: Write>(table: &PairTable, mut out: W) -> Result<()> {
    writeln!(out, "m,n,median_gamma,median_y")?;
    for (m, n, sg, sy) in table.rows() {
        writeln!(out, "{m},{n},{sg},{sy}")?;
    }
    Ok(())
}

/// Loss table: rows `m,loss_1..loss_K,argmin`.
pub fn write_loss_csv<W: Write>(table: &LossTable, mut out: W) -> Result<()> {
    let k = table.losses.first().map_or(0, |row| row.len());
    let header: Vec<String> = std::iter::once("m".to_string())
        .chain((1..=k).map(|i| format!("loss_{i}")))
        .chain(std::iter::once("argmin".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (m, row) in table.losses.iter().enumerate() {
        let mut fields: Vec<String> = vec![m.to_string()];
        fields.extend(row.iter().map(|v| v.to_string()));
        fields.push(table.argmin[m].to_string());
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Cluster assignment: rows `index,cluster`.
pub fn write_assignment_csv<W: Write>(assignment: &ClusterAssignment, mut out: W) -> Result<()> {
    writeln!(out, "index,cluster")?;
    for (index, label) in assignment.labels.iter().enumerate() {
        writeln!(out, "{index},{label}")?;
    }
    Ok(())
}

/// Sweep rows with the fixed header `experiment,x,seed,metric,value`;
/// mean rows carry `mean` in the seed column.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "experiment,x,seed,metric,value")?;
    for row in rows {
        let seed = row
            .seed
            .map_or_else(|| "mean".to_string(), |s| s.to_string());
        writeln!(
            out,
            "{},{},{seed},{},{}",
            row.experiment, row.x, row.metric, row.value
        )?;
    }
    Ok(())
}

/// Subspace bank JSON: `{"r": int, "v": [d matrices], "u": [d matrices]}`.
#[derive(Serialize, Deserialize)]
struct BankJson {
    r: usize,
    v: Vec<Vec<Vec<f64>>>,
    u: Vec<Vec<Vec<f64>>>,
}

pub fn write_bank_json<W: Write>(bank: &SubspaceBank, out: W) -> Result<()> {
    let json = BankJson {
        r: bank.r,
        v: bank.v.iter().map(matrix_to_rows).collect(),
        u: bank.u.iter().map(matrix_to_rows).collect(),
    };
    serde_json::to_writer_pretty(out, &json)?;
    Ok(())
}

pub fn read_bank_json<R: std::io::Read>(reader: R) -> Result<SubspaceBank> {
    let json: BankJson = serde_json::from_reader(reader)?;
    let to_mats = |rows: &[Vec<Vec<f64>>]| -> Result<Vec<DMatrix<f64>>> {
        rows.iter()
            .map(|m| rows_to_matrix(m).map_err(Error::InvalidSpec))
            .collect()
    };
    Ok(SubspaceBank {
        r: json.r,
        v: to_mats(&json.v)?,
        u: to_mats(&json.u)?,
    })
}

/// Model list JSON (array of `{"a": ..., "w": ...}` objects).
pub fn write_models_json<W: Write>(models: &[LdsModel], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, models)?;
    Ok(())
}

pub fn read_models_json<R: std::io::Read>(reader: R) -> Result<Vec<LdsModel>> {
    Ok(serde_json::from_reader(reader)?)
}
