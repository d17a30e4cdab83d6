use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus_io::DEFAULT_DEDUP_THRESHOLD;
use crate::entity_refine::DEFAULT_LINKING_CONFIDENCE;
use crate::error::{Error, Result};
use crate::kg_emit::QuantifierMode;
use crate::preprocess::PreprocessConfig;
use crate::relation_cluster::{expand_grid, ClusteringConfig};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub posts: Option<PathBuf>,
    pub first_pass: Option<PathBuf>,
    pub second_pass: Option<PathBuf>,
    pub coref: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizeSection {
    pub dedup_threshold: f64,
    pub title_max_len: usize,
    pub retweet_markers: Vec<String>,
}

impl Default for NormalizeSection {
    fn default() -> Self {
        let p = PreprocessConfig::default();
        NormalizeSection {
            dedup_threshold: DEFAULT_DEDUP_THRESHOLD,
            title_max_len: p.title_max_len,
            retweet_markers: p.retweet_markers,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractSection {
    /// Target-pattern file; the built-in patterns when absent.
    pub patterns: Option<PathBuf>,
}

/// Value lists whose Cartesian product is the search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterGrid {
    pub n_neighbors: Vec<usize>,
    pub min_dist: Vec<f64>,
    pub target_dim: Vec<usize>,
    pub min_cluster_size: Vec<usize>,
    pub min_samples: Vec<usize>,
}

impl Default for ClusterGrid {
    fn default() -> Self {
        ClusterGrid {
            n_neighbors: vec![5, 10, 15, 30],
            min_dist: vec![0.0, 0.1],
            target_dim: vec![2, 5],
            min_cluster_size: vec![5, 10, 15, 25],
            min_samples: vec![1, 5],
        }
    }
}

impl ClusterGrid {
    pub fn configs(&self, seed: u64) -> Vec<ClusteringConfig> {
        expand_grid(
            &self.n_neighbors,
            &self.min_dist,
            &self.target_dim,
            &self.min_cluster_size,
            &self.min_samples,
            seed,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkingSection {
    pub endpoint: Option<String>,
    pub confidence: f64,
    pub enabled: bool,
    pub strict: bool,
}

impl Default for LinkingSection {
    fn default() -> Self {
        LinkingSection {
            endpoint: None,
            confidence: DEFAULT_LINKING_CONFIDENCE,
            enabled: true,
            strict: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmitSection {
    pub quantifiers: QuantifierMode,
    pub keep_interrogative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub jobs: usize,
    pub out_dir: PathBuf,
    pub input: InputPaths,
    pub normalize: NormalizeSection,
    pub extract: ExtractSection,
    pub cluster: ClusterGrid,
    pub linking: LinkingSection,
    pub emit: EmitSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 7,
            jobs: 4,
            out_dir: PathBuf::from("out"),
            input: InputPaths::default(),
            normalize: NormalizeSection::default(),
            extract: ExtractSection::default(),
            cluster: ClusterGrid::default(),
            linking: LinkingSection::default(),
            emit: EmitSection::default(),
        }
    }
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl PipelineConfig {
    /// Parses a TOML config. Relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path, origin: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start].matches('\n').count() + 1);
            Error::parse(origin, line, e.message().to_string())
        })?;
        for p in [
            &mut cfg.input.posts,
            &mut cfg.input.first_pass,
            &mut cfg.input.second_pass,
            &mut cfg.input.coref,
            &mut cfg.input.vectors,
            &mut cfg.extract.patterns,
        ] {
            rebase(base, p);
        }
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, path)
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig {
            retweet_markers: self.normalize.retweet_markers.clone(),
            title_max_len: self.normalize.title_max_len,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.normalize.dedup_threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidInput(format!("dedup threshold {t} outside [0, 1]")));
        }
        let c = self.linking.confidence;
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidInput(format!("linking confidence {c} outside [0, 1]")));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidInput("jobs must be positive".into()));
        }
        let g = &self.cluster;
        if g.n_neighbors.is_empty() || g.min_dist.is_empty() || g.target_dim.is_empty() || g.min_cluster_size.is_empty() || g.min_samples.is_empty() {
            return Err(Error::InvalidInput("every cluster grid list needs at least one value".into()));
        }
        Ok(())
    }
}

pub(crate) fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    let path = p
        .as_deref()
        .ok_or_else(|| Error::InvalidInput(format!("no {what} file configured")))?;
    if !path.exists() {
        return Err(Error::InvalidInput(format!("{what} file {} does not exist", path.display())));
    }
    Ok(path)
}
