//! Relation clustering: embed relation forms, reduce with UMAP, cluster with
//! HDBSCAN, grid-search the configuration by `silhouette × clustered
//! fraction`, and map every form onto a cluster representative lemma.

mod hdbscan;
mod silhouette;
mod umap;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus_io::WordVectorTable;
use crate::error::{Error, Result};
use crate::relation_extract::SurfaceTriple;

pub use hdbscan::hdbscan;
pub use silhouette::silhouette_mean;
pub use umap::{euclidean, exact_knn, find_ab_params, fuzzy_simplicial_set, smooth_knn_dist, Knn, PrincipalAxes, UmapParams};

/// A relation form and how often it occurs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationForm {
    pub form: String,
    pub lemma: String,
    pub frequency: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationVector {
    pub form: String,
    pub lemma: String,
    pub vector: Vec<f64>,
    pub frequency: usize,
}

/// Embeddable forms plus the forms with no in-vocabulary token.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddedRelations {
    pub vectors: Vec<RelationVector>,
    pub out_of_vocabulary: Vec<RelationForm>,
}

impl EmbeddedRelations {
    pub fn total_forms(&self) -> usize {
        self.vectors.len() + self.out_of_vocabulary.len()
    }
}

/// Distinct relation forms with frequencies, sorted by form. A form's lemma
/// is its most frequent lemma (ties to the smallest).
pub fn relation_forms<'a>(triples: impl IntoIterator<Item = &'a SurfaceTriple>) -> Vec<RelationForm> {
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for t in triples {
        *counts.entry(t.form()).or_default().entry(t.verb_lemma.clone()).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(form, lemmas)| {
            let frequency = lemmas.values().sum();
            let lemma = lemmas
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(l, _)| l.clone())
                .unwrap_or_default();
            RelationForm { form, lemma, frequency }
        })
        .collect()
}

/// Mean of the in-vocabulary token vectors of each form.
pub fn embed_forms(forms: Vec<RelationForm>, table: &WordVectorTable) -> EmbeddedRelations {
    let mut out = EmbeddedRelations::default();
    for f in forms {
        let vecs: Vec<&[f32]> = f.form.split_whitespace().filter_map(|w| table.get(w)).collect();
        if vecs.is_empty() {
            out.out_of_vocabulary.push(f);
            continue;
        }
        let mut mean = vec![0.0f64; table.dimension()];
        for v in &vecs {
            for (m, x) in mean.iter_mut().zip(v.iter()) {
                *m += f64::from(*x);
            }
        }
        mean.iter_mut().for_each(|m| *m /= vecs.len() as f64);
        out.vectors.push(RelationVector {
            form: f.form,
            lemma: f.lemma,
            vector: mean,
            frequency: f.frequency,
        });
    }
    out
}

pub fn embed_relations<'a>(
    triples: impl IntoIterator<Item = &'a SurfaceTriple>,
    table: &WordVectorTable,
) -> EmbeddedRelations {
    embed_forms(relation_forms(triples), table)
}

/// Per-dimension z-scores with the population standard deviation;
/// constant dimensions are only centred.
pub fn standardize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = vectors.len();
    if n == 0 {
        return Vec::new();
    }
    let d = vectors[0].len();
    let mut out = vectors.to_vec();
    for c in 0..d {
        let mean = vectors.iter().map(|v| v[c]).sum::<f64>() / n as f64;
        let var = vectors.iter().map(|v| (v[c] - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        for row in out.iter_mut() {
            row[c] -= mean;
            if sd > 0.0 {
                row[c] /= sd;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub target_dim: usize,
    pub min_cluster_size: usize,
    pub min_samples: usize,
    pub seed: u64,
}

impl ClusteringConfig {
    pub fn validate(&self, dimension: usize) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidInput(m));
        if self.n_neighbors < 2 {
            return fail(format!("n_neighbors = {} (must be ≥ 2)", self.n_neighbors));
        }
        if self.min_dist.is_nan() || self.min_dist < 0.0 {
            return fail(format!("min_dist = {} (must be ≥ 0)", self.min_dist));
        }
        if self.target_dim == 0 || self.target_dim >= dimension {
            return fail(format!("target_dim = {} (must be in 1..{dimension})", self.target_dim));
        }
        if self.min_cluster_size < 2 {
            return fail(format!("min_cluster_size = {} (must be ≥ 2)", self.min_cluster_size));
        }
        if self.min_samples == 0 {
            return fail("min_samples must be positive".into());
        }
        Ok(())
    }
}

/// Cartesian product of value lists, in nested order with `min_samples`
/// varying fastest.
pub fn expand_grid(
    n_neighbors: &[usize],
    min_dist: &[f64],
    target_dim: &[usize],
    min_cluster_size: &[usize],
    min_samples: &[usize],
    seed: u64,
) -> Vec<ClusteringConfig> {
    let mut out = Vec::new();
    for &nn in n_neighbors {
        for &md in min_dist {
            for &td in target_dim {
                for &mcs in min_cluster_size {
                    for &ms in min_samples {
                        out.push(ClusteringConfig {
                            n_neighbors: nn,
                            min_dist: md,
                            target_dim: td,
                            min_cluster_size: mcs,
                            min_samples: ms,
                            seed,
                        });
                    }
                }
            }
        }
    }
    out
}

pub fn default_grid(seed: u64) -> Vec<ClusteringConfig> {
    expand_grid(&[5, 10, 15, 30], &[0.0, 0.1], &[2, 5], &[5, 10, 15, 25], &[1, 5], seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    pub config: ClusteringConfig,
    pub labels: Vec<Option<usize>>,
    pub num_clusters: usize,
    pub silhouette_mean: f64,
    pub silhouette_defined: bool,
    pub clustered_fraction: f64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ClusteringResult {
    fn failed(config: ClusteringConfig, error: String) -> Self {
        ClusteringResult {
            config,
            labels: Vec::new(),
            num_clusters: 0,
            silhouette_mean: 0.0,
            silhouette_defined: false,
            clustered_fraction: 0.0,
            score: f64::NEG_INFINITY,
            error: Some(error),
        }
    }
}

/// `silhouette × clustered_fraction`.
pub fn score(silhouette: f64, clustered_fraction: f64) -> f64 {
    silhouette * clustered_fraction
}

/// Neighbour table and principal axes shared by every config of a search.
pub struct Prepared<'a> {
    data: &'a [Vec<f64>],
    knn: Knn,
    axes: PrincipalAxes,
}

impl<'a> Prepared<'a> {
    pub fn new(data: &'a [Vec<f64>], max_neighbors: usize, max_dims: usize) -> Self {
        let k = (max_neighbors).min(data.len());
        Prepared {
            data,
            knn: exact_knn(data, k),
            axes: PrincipalAxes::fit(data, max_dims.min(data.first().map_or(0, Vec::len))),
        }
    }

    pub fn for_grid(data: &'a [Vec<f64>], grid: &[ClusteringConfig]) -> Self {
        let k = grid.iter().map(|c| c.n_neighbors).max().unwrap_or(2);
        let dims = grid.iter().map(|c| c.target_dim).max().unwrap_or(2);
        Self::new(data, k, dims)
    }
}

/// UMAP embedding of standardized vectors.
pub fn reduce_dimensions(vectors: &[Vec<f64>], config: &ClusteringConfig) -> Result<Vec<Vec<f64>>> {
    let prepared = Prepared::new(vectors, config.n_neighbors, config.target_dim);
    reduce_prepared(&prepared, config)
}

fn reduce_prepared(prepared: &Prepared, config: &ClusteringConfig) -> Result<Vec<Vec<f64>>> {
    let dimension = prepared.data.first().map_or(0, Vec::len);
    config.validate(dimension)?;
    umap::umap_embed(
        prepared.data,
        &prepared.knn,
        &prepared.axes,
        &UmapParams {
            n_neighbors: config.n_neighbors,
            min_dist: config.min_dist,
            n_components: config.target_dim,
            seed: config.seed,
        },
    )
}

pub fn cluster_density(reduced: &[Vec<f64>], config: &ClusteringConfig) -> Vec<Option<usize>> {
    hdbscan(reduced, config.min_cluster_size, config.min_samples)
}

/// Reduce, cluster and score one configuration. `total_forms` is the size
/// of the whole relation vocabulary, out-of-vocabulary forms included.
pub fn evaluate_config(vectors: &[Vec<f64>], config: &ClusteringConfig, total_forms: usize) -> ClusteringResult {
    let prepared = Prepared::new(vectors, config.n_neighbors, config.target_dim);
    evaluate_prepared(&prepared, config, total_forms)
}

fn evaluate_prepared(prepared: &Prepared, config: &ClusteringConfig, total_forms: usize) -> ClusteringResult {
    let reduced = match reduce_prepared(prepared, config) {
        Ok(r) => r,
        Err(e) => return ClusteringResult::failed(*config, e.to_string()),
    };
    let labels = cluster_density(&reduced, config);
    let num_clusters = labels.iter().flatten().collect::<std::collections::BTreeSet<_>>().len();
    let (sil, defined) = silhouette_mean(&reduced, &labels);
    let clustered = labels.iter().filter(|l| l.is_some()).count();
    let clustered_fraction = if total_forms == 0 { 0.0 } else { clustered as f64 / total_forms as f64 };
    ClusteringResult {
        config: *config,
        labels,
        num_clusters,
        silhouette_mean: sil,
        silhouette_defined: defined,
        clustered_fraction,
        score: score(sil, clustered_fraction),
        error: None,
    }
}

fn better(a: &ClusteringResult, b: &ClusteringResult) -> bool {
    a.score > b.score || (a.score == b.score && a.num_clusters < b.num_clusters)
}

/// Evaluates every config in parallel. Returns the index of the highest
/// score (ties: fewer clusters, then grid order) and the results in grid
/// order.
pub fn grid_search(
    vectors: &[Vec<f64>],
    grid: &[ClusteringConfig],
    total_forms: usize,
) -> Result<(usize, Vec<ClusteringResult>)> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty clustering grid".into()));
    }
    if vectors.is_empty() {
        let failed = grid
            .iter()
            .map(|c| ClusteringResult::failed(*c, "no relation vectors".into()))
            .collect();
        return Ok((0, failed));
    }
    let prepared = Prepared::for_grid(vectors, grid);
    let results: Vec<ClusteringResult> = grid
        .par_iter()
        .map(|c| evaluate_prepared(&prepared, c, total_forms))
        .collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        if better(r, &results[best]) {
            best = i;
        }
    }
    Ok((best, results))
}

/// Among rows within 5% of the best score, the one with the fewest clusters
/// (ties to table order).
pub fn select_config(results: &[ClusteringResult]) -> usize {
    let max = results.iter().map(|r| r.score).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return 0;
    }
    let floor = max - 0.05 * max.abs();
    let mut pick: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if r.score >= floor && pick.is_none_or(|p| r.num_clusters < results[p].num_clusters) {
            pick = Some(i);
        }
    }
    pick.unwrap_or(0)
}

/// Total map from relation form to predicate lemma.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationMap {
    pub entries: BTreeMap<String, String>,
}

impl RelationMap {
    pub fn get(&self, form: &str) -> Option<&str> {
        self.entries.get(form).map(String::as_str)
    }

    /// Display label, e.g. "BUY".
    pub fn label(&self, form: &str) -> Option<String> {
        self.get(form).map(str::to_uppercase)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `form<TAB>LABEL` lines sorted by form.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (form, lemma) in &self.entries {
            let _ = writeln!(out, "{form}\t{}", lemma.to_uppercase());
        }
        out
    }
}

/// Each cluster maps onto the lemma of its most frequent form (ties: the
/// smallest lemma); outliers and out-of-vocabulary forms map to their own
/// lemma.
pub fn build_relation_map(
    vectors: &[RelationVector],
    labels: &[Option<usize>],
    out_of_vocabulary: &[RelationForm],
) -> RelationMap {
    let mut reps: HashMap<usize, (usize, &str)> = HashMap::new();
    for (v, l) in vectors.iter().zip(labels) {
        let Some(c) = l else { continue };
        let slot = reps.entry(*c).or_insert((v.frequency, v.lemma.as_str()));
        if v.frequency > slot.0 || (v.frequency == slot.0 && v.lemma.as_str() < slot.1) {
            *slot = (v.frequency, v.lemma.as_str());
        }
    }
    let mut entries = BTreeMap::new();
    for (i, v) in vectors.iter().enumerate() {
        let lemma = match labels.get(i).copied().flatten() {
            Some(c) => reps[&c].1.to_string(),
            None => v.lemma.clone(),
        };
        entries.insert(v.form.clone(), lemma);
    }
    for f in out_of_vocabulary {
        entries.insert(f.form.clone(), f.lemma.clone());
    }
    RelationMap { entries }
}

/// Results table as CSV: config columns, then the metrics.
pub fn grid_csv(results: &[ClusteringResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
    w.write_record([
        "n_neighbors",
        "min_dist",
        "target_dim",
        "min_cluster_size",
        "min_samples",
        "seed",
        "silhouette_mean",
        "clustered_fraction",
        "num_clusters",
        "score",
        "status",
    ])
    .map_err(io)?;
    for r in results {
        let c = &r.config;
        let status = match &r.error {
            Some(e) => format!("failed: {e}"),
            None => "ok".to_string(),
        };
        w.write_record([
            c.n_neighbors.to_string(),
            c.min_dist.to_string(),
            c.target_dim.to_string(),
            c.min_cluster_size.to_string(),
            c.min_samples.to_string(),
            c.seed.to_string(),
            format!("{:.6}", r.silhouette_mean),
            format!("{:.6}", r.clustered_fraction),
            r.num_clusters.to_string(),
            if r.score.is_finite() { format!("{:.6}", r.score) } else { "-inf".to_string() },
            status,
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(form: &str, lemma: &str, frequency: usize) -> RelationVector {
        RelationVector {
            form: form.into(),
            lemma: lemma.into(),
            vector: vec![0.0],
            frequency,
        }
    }

    fn row(score: f64, k: usize) -> ClusteringResult {
        ClusteringResult {
            config: ClusteringConfig {
                n_neighbors: 5,
                min_dist: 0.0,
                target_dim: 2,
                min_cluster_size: 5,
                min_samples: 1,
                seed: 0,
            },
            labels: vec![],
            num_clusters: k,
            silhouette_mean: 0.0,
            silhouette_defined: true,
            clustered_fraction: 1.0,
            score,
            error: None,
        }
    }

    #[test]
    fn standardize_two_points() {
        assert_eq!(standardize(&[vec![0.0, 5.0], vec![2.0, 5.0]]), vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn score_examples() {
        assert!((score(0.8, 0.5) - 0.4).abs() < 1e-15);
        assert_eq!(score(0.7, 0.0), 0.0);
    }

    #[test]
    fn band_rule_prefers_fewer_clusters() {
        assert_eq!(select_config(&[row(0.64, 332), row(0.65, 511)]), 0);
        assert_eq!(select_config(&[row(0.5, 3)]), 0);
        assert_eq!(select_config(&[row(0.5, 3), row(0.5, 3)]), 0);
        assert_eq!(select_config(&[row(0.2, 2), row(0.9, 10)]), 1);
    }

    #[test]
    fn relation_map_representatives() {
        let vs = [rv("acquires", "acquire", 1), rv("acquired", "acquire", 2), rv("bought", "buy", 3), rv("quantize", "quantize", 1)];
        let labels = [Some(0), Some(0), Some(0), None];
        let m = build_relation_map(&vs, &labels, &[RelationForm { form: "zorp".into(), lemma: "zorp".into(), frequency: 1 }]);
        assert_eq!(m.get("acquires"), Some("buy"));
        assert_eq!(m.get("bought"), Some("buy"));
        assert_eq!(m.label("quantize").as_deref(), Some("QUANTIZE"));
        assert_eq!(m.get("zorp"), Some("zorp"));
        assert_eq!(m.len(), 5);
    }

    #[test]
    fn representative_tie_goes_to_smaller_lemma() {
        let vs = [rv("fuels", "fuel", 2), rv("drives", "drive", 2)];
        let m = build_relation_map(&vs, &[Some(0), Some(0)], &[]);
        assert_eq!(m.get("fuels"), Some("drive"));
    }

    #[test]
    fn grid_expansion_order() {
        let g = expand_grid(&[5, 10], &[0.0], &[2], &[5], &[1, 5], 7);
        assert_eq!(g.len(), 4);
        assert_eq!((g[1].n_neighbors, g[1].min_samples), (5, 5));
        assert_eq!(default_grid(1).len(), 128);
    }

    #[test]
    fn config_validation() {
        let mut c = row(0.0, 0).config;
        assert!(c.validate(300).is_ok());
        c.target_dim = 300;
        assert!(c.validate(300).is_err());
    }
}
