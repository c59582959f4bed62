//! The single JSON configuration document: dataset description plus
//! pipeline parameters. Command-line flags override file values; the hash
//! of the effective (post-override) config goes into the run manifest.

use serde::{Deserialize, Serialize};

use mixlds::pipeline::{KChoice, PipelineConfig, TauChoice};
use mixlds::{
    generate_benchmark_models, Error, InitMode, LabelMode, LdsModel, MixtureSpec, ModelConstruction,
    Result, SubsetPlan,
};

/// Ground-truth models: an explicit list or a seeded generator.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelsSpec {
    List(Vec<LdsModel>),
    Generate {
        d: usize,
        k: usize,
        rho: f64,
        construction: ModelConstruction,
        /// Defaults to the dataset seed when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        model_seed: Option<u64>,
    },
}

fn default_seed() -> u64 {
    0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub models: ModelsSpec,
    #[serde(default = "default_label_mode")]
    pub label_mode: LabelMode,
    #[serde(default = "default_init_mode")]
    pub init_mode: InitMode,
    #[serde(default = "empty_plan")]
    pub subspace: SubsetPlan,
    #[serde(default = "empty_plan")]
    pub clustering: SubsetPlan,
    #[serde(default = "empty_plan")]
    pub classification: SubsetPlan,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub pipeline: PipelineSection,
}

fn default_label_mode() -> LabelMode {
    LabelMode::Uniform
}

fn default_init_mode() -> InitMode {
    InitMode::Case0
}

fn empty_plan() -> SubsetPlan {
    SubsetPlan { count: 0, len: 0 }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PipelineSection {
    pub k: KChoice,
    /// `null` derives τ = Δ²/4 from the ground-truth models.
    pub tau: Option<TauChoice>,
    pub g: usize,
    pub use_subspaces: bool,
    pub sample_split: bool,
    pub energy: f64,
    pub ridge: f64,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        Self {
            k: p.k,
            tau: p.tau,
            g: p.g,
            use_subspaces: p.use_subspaces,
            sample_split: p.sample_split,
            energy: p.energy,
            ridge: p.ridge,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(Error::Serde)
    }

    /// Ground-truth model list (regenerated deterministically for the
    /// generator form).
    pub fn build_models(&self) -> Result<Vec<LdsModel>> {
        match &self.models {
            ModelsSpec::List(models) => {
                if models.is_empty() {
                    return Err(Error::EmptyInput("config model list is empty".into()));
                }
                Ok(models.clone())
            }
            ModelsSpec::Generate {
                d,
                k,
                rho,
                construction,
                model_seed,
            } => generate_benchmark_models(*d, *k, *rho, *construction, model_seed.unwrap_or(self.seed)),
        }
    }

    pub fn mixture_spec(&self) -> Result<MixtureSpec> {
        Ok(MixtureSpec {
            models: self.build_models()?,
            label_mode: self.label_mode.clone(),
            init_mode: self.init_mode,
            subspace: self.subspace,
            clustering: self.clustering,
            classification: self.classification,
            seed: self.seed,
        })
    }

    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            k: self.pipeline.k,
            tau: self.pipeline.tau.clone(),
            g: self.pipeline.g,
            use_subspaces: self.pipeline.use_subspaces,
            sample_split: self.pipeline.sample_split,
            energy: self.pipeline.energy,
            ridge: self.pipeline.ridge,
            seed: self.seed,
        }
    }

    /// 64-bit hash of the canonical (serialized) form of this config.
    pub fn hash(&self) -> u64 {
        let canonical = serde_json::to_string(self).expect("config serializes");
        mixlds::linalg::fnv1a64(canonical.as_bytes())
    }
}

/// Parse a `--tau` flag value: a number or `auto`.
pub fn parse_tau_flag(value: &str) -> Result<TauChoice> {
    if value.eq_ignore_ascii_case("auto") {
        Ok(TauChoice::Auto { grid: Vec::new() })
    } else {
        value
            .parse::<f64>()
            .map(TauChoice::Fixed)
            .map_err(|_| Error::InvalidSpec(format!("--tau must be a number or 'auto', got {value}")))
    }
}

/// Parse a `--k` flag value: an integer or `auto`.
pub fn parse_k_flag(value: &str) -> Result<KChoice> {
    if value.eq_ignore_ascii_case("auto") {
        Ok(KChoice::Auto)
    } else {
        value
            .parse::<usize>()
            .map(KChoice::Fixed)
            .map_err(|_| Error::InvalidSpec(format!("--k must be an integer or 'auto', got {value}")))
    }
}

/// Parse a `--seeds` flag: either `a..b` (half-open) or a comma list.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((lo, hi)) = value.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("bad seed range: {value}")))?;
        let hi: u64 = hi
            .trim()
            .parse()
            .map_err(|_| Error::InvalidSpec(format!("bad seed range: {value}")))?;
        if hi <= lo {
            return Err(Error::InvalidSpec(format!("empty seed range: {value}")));
        }
        Ok((lo..hi).collect())
    } else {
        value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::InvalidSpec(format!("bad seed list entry: {s}")))
            })
            .collect()
    }
}
