use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{require, PipelineConfig};
use crate::corpus_io::{dedup_corpus, load_conllu, load_coref, load_posts, load_word_vectors, ParsedCorpus};
use crate::entity_extract::{extract_entities, resolve_anaphora, CandidateEntity, EntityKind};
use crate::entity_refine::{head_form, link_sentences, merge_entities, Annotator, EntityLink, LinkKind};
use crate::error::{Error, Result};
use crate::kg_emit::{aggregate_statements, emit_turtle, validate_graph, AggregateOptions, KnowledgeGraph};
use crate::preprocess::{normalize_post, NormalizedPost, RemovalReason};
use crate::relation_cluster::{build_relation_map, embed_relations, grid_csv, grid_search, select_config, standardize, ClusteringConfig};
use crate::relation_extract::{extract_triples, SurfaceTriple, TargetPatterns};

pub const NORMALIZED_FILE: &str = "normalized.jsonl";
pub const ENTITIES_FILE: &str = "entities.jsonl";
pub const TRIPLES_FILE: &str = "triples.jsonl";
pub const GRAPH_FILE: &str = "graph.ttl";
pub const GRID_FILE: &str = "grid.csv";
pub const RELATION_MAP_FILE: &str = "relation_map.tsv";
pub const VALIDATION_FILE: &str = "validation.json";

fn write_file(path: &Path, content: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, item).map_err(|e| Error::InvalidInput(e.to_string()))?;
        buf.push(b'\n');
    }
    write_file(path, &buf)
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
    }
    Ok(out)
}

fn pct(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizeReport {
    pub posts_in: usize,
    pub near_duplicates: usize,
    pub posts_out: usize,
    /// Removed spans per reason, over all posts before deduplication.
    pub removals: BTreeMap<String, usize>,
}

impl fmt::Display for NormalizeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "normalize: {} posts in, {} near-duplicates dropped, {} posts out", self.posts_in, self.near_duplicates, self.posts_out)?;
        writeln!(f, "removed spans by reason:")?;
        for (reason, n) in &self.removals {
            writeln!(f, "  {reason:<18} {n}")?;
        }
        Ok(())
    }
}

/// Normalizes every post against its first-pass parse, drops near
/// duplicates and writes `normalized.jsonl`.
pub fn stage_normalize(cfg: &PipelineConfig) -> Result<NormalizeReport> {
    cfg.validate()?;
    let posts = load_posts(require(&cfg.input.posts, "posts")?)?;
    let parses = load_conllu(require(&cfg.input.first_pass, "first-pass parse")?)?;
    let pre = cfg.preprocess();
    let normalized: Vec<NormalizedPost> = posts
        .par_iter()
        .map(|p| {
            let sentences = parses
                .get(&p.id)
                .ok_or_else(|| Error::InvalidInput(format!("post `{}` has no first-pass parse", p.id)))?;
            normalize_post(p, sentences, &pre)
        })
        .collect::<Result<_>>()?;

    let mut removals: BTreeMap<String, usize> = RemovalReason::ALL.iter().map(|r| (r.as_str().to_string(), 0)).collect();
    for n in &normalized {
        for span in &n.removed_spans {
            *removals.entry(span.reason.as_str().to_string()).or_default() += 1;
        }
    }
    let texts: HashMap<String, String> = normalized.iter().map(|n| (n.post_id.clone(), n.normalized_text.clone())).collect();
    let retained = dedup_corpus(&posts, &texts, cfg.normalize.dedup_threshold);
    let keep: std::collections::HashSet<&str> = retained.iter().map(|p| p.id.as_str()).collect();
    let out: Vec<&NormalizedPost> = normalized.iter().filter(|n| keep.contains(n.post_id.as_str())).collect();
    write_jsonl(&cfg.out_dir.join(NORMALIZED_FILE), &out)?;
    Ok(NormalizeReport {
        posts_in: posts.len(),
        near_duplicates: posts.len() - out.len(),
        posts_out: out.len(),
        removals,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityComposition {
    pub entities: usize,
    pub hashtag_pct: f64,
    pub mention_pct: f64,
    pub pp_pct: f64,
    pub quantifier_pct: f64,
}

impl EntityComposition {
    /// Rates over extracted entities; resolved anaphora copies are not counted.
    pub fn of(entities: &[CandidateEntity]) -> Self {
        let base: Vec<&CandidateEntity> = entities.iter().filter(|e| e.kind != EntityKind::Anaphora).collect();
        let has = |f: &dyn Fn(&CandidateEntity) -> bool| base.iter().filter(|e| f(e)).count();
        let n = base.len();
        EntityComposition {
            entities: n,
            hashtag_pct: pct(has(&|e| e.tokens.iter().any(|t| t.kind == crate::corpus_io::TokenKind::Hashtag)), n),
            mention_pct: pct(has(&|e| e.tokens.iter().any(|t| t.kind == crate::corpus_io::TokenKind::Mention)), n),
            pp_pct: pct(has(&|e| e.unquantified_tokens().iter().any(|t| t.pos == "ADP")), n),
            quantifier_pct: pct(has(&|e| e.quantifier_span.is_some()), n),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TripleFlags {
    pub triples: usize,
    pub anaphora_pct: f64,
    pub negation_pct: f64,
    pub interrogative_pct: f64,
}

impl TripleFlags {
    pub fn of(triples: &[SurfaceTriple]) -> Self {
        let n = triples.len();
        let count = |f: &dyn Fn(&SurfaceTriple) -> bool| triples.iter().filter(|t| f(t)).count();
        TripleFlags {
            triples: n,
            anaphora_pct: pct(count(&|t| t.subject.kind == EntityKind::Anaphora || t.object.kind == EntityKind::Anaphora), n),
            negation_pct: pct(count(&|t| t.negated), n),
            interrogative_pct: pct(count(&|t| t.interrogative), n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub posts: usize,
    pub sentences: usize,
    pub composition: EntityComposition,
    pub flags: TripleFlags,
}

impl fmt::Display for ExtractReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.composition;
        let t = &self.flags;
        writeln!(f, "extract: {} posts, {} sentences, {} entities, {} triples", self.posts, self.sentences, c.entities, t.triples)?;
        writeln!(
            f,
            "entities: {:.2}% hashtag, {:.2}% mention, {:.2}% PP, {:.2}% quantifier",
            c.hashtag_pct, c.mention_pct, c.pp_pct, c.quantifier_pct
        )?;
        writeln!(
            f,
            "triples: {:.2}% anaphora, {:.2}% NEGATION, {:.2}% INTERROGATIVE",
            t.anaphora_pct, t.negation_pct, t.interrogative_pct
        )
    }
}

/// Extraction over the second-pass parses of the retained posts. Returns
/// the report plus the entities and triples written to disk.
pub fn stage_extract(cfg: &PipelineConfig) -> Result<(ExtractReport, Vec<CandidateEntity>, Vec<SurfaceTriple>)> {
    cfg.validate()?;
    let normalized: Vec<NormalizedPost> = read_jsonl(&cfg.out_dir.join(NORMALIZED_FILE))?;
    let parses = load_conllu(require(&cfg.input.second_pass, "second-pass parse")?)?;
    let chains = match &cfg.input.coref {
        Some(_) => load_coref(require(&cfg.input.coref, "coreference")?)?,
        None => BTreeMap::new(),
    };
    let patterns = match &cfg.extract.patterns {
        Some(_) => TargetPatterns::load(require(&cfg.extract.patterns, "target pattern")?)?,
        None => TargetPatterns::default(),
    };
    let per_post: Vec<(usize, Vec<CandidateEntity>, Vec<SurfaceTriple>)> = normalized
        .par_iter()
        .filter_map(|n| parses.get(&n.post_id).map(|s| (n, s)))
        .map(|(n, sentences)| {
            let found: Vec<CandidateEntity> = sentences.iter().flat_map(extract_entities).collect();
            let post_chains = chains.get(&n.post_id).map(Vec::as_slice).unwrap_or(&[]);
            let entities = resolve_anaphora(found, post_chains, sentences);
            let triples = sentences.iter().flat_map(|s| extract_triples(s, &entities, &patterns)).collect();
            (sentences.len(), entities, triples)
        })
        .collect();
    let posts = per_post.len();
    let sentences = per_post.iter().map(|p| p.0).sum();
    let mut entities = Vec::new();
    let mut triples = Vec::new();
    for (_, e, t) in per_post {
        entities.extend(e);
        triples.extend(t);
    }
    write_jsonl(&cfg.out_dir.join(ENTITIES_FILE), &entities)?;
    write_jsonl(&cfg.out_dir.join(TRIPLES_FILE), &triples)?;
    let report = ExtractReport {
        posts,
        sentences,
        composition: EntityComposition::of(&entities),
        flags: TripleFlags::of(&triples),
    };
    Ok((report, entities, triples))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineEmitReport {
    pub entities: usize,
    pub same_as_links: usize,
    pub related_links: usize,
    pub linking_skipped: Option<String>,
    pub relation_forms: usize,
    pub out_of_vocabulary_forms: usize,
    pub grid_rows: usize,
    pub best_row: usize,
    pub selected_row: usize,
    pub selected: Option<ClusteringConfig>,
    pub num_clusters: usize,
    pub score: f64,
    pub predicates: usize,
    pub statements: usize,
    pub violations: usize,
}

impl fmt::Display for RefineEmitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "refine: {} entities, {} sameAs / {} related links", self.entities, self.same_as_links, self.related_links)?;
        if let Some(why) = &self.linking_skipped {
            writeln!(f, "linking skipped: {why}")?;
        }
        writeln!(
            f,
            "cluster: {} relation forms ({} out of vocabulary), {} grid rows, best row {}, selected row {}",
            self.relation_forms,
            self.out_of_vocabulary_forms,
            self.grid_rows,
            self.best_row + 1,
            self.selected_row + 1
        )?;
        match &self.selected {
            Some(c) => writeln!(
                f,
                "selected: n_neighbors={} min_dist={} target_dim={} min_cluster_size={} min_samples={} -> {} clusters, S={:.4}",
                c.n_neighbors, c.min_dist, c.target_dim, c.min_cluster_size, c.min_samples, self.num_clusters, self.score
            )?,
            None => writeln!(f, "selected: none (every relation keeps its own lemma)")?,
        }
        writeln!(f, "emit: {} statements over {} predicates, {} violations", self.statements, self.predicates, self.violations)
    }
}

fn link_entities(
    cfg: &PipelineConfig,
    entities: &[CandidateEntity],
    index: &crate::entity_refine::EntityIndex,
    annotator: &dyn Annotator,
) -> Result<Vec<EntityLink>> {
    let parses: ParsedCorpus = load_conllu(require(&cfg.input.second_pass, "second-pass parse")?)?;
    let mut by_post: BTreeMap<&str, Vec<CandidateEntity>> = BTreeMap::new();
    for e in entities {
        by_post.entry(e.post_id.as_str()).or_default().push(e.clone());
    }
    let mut rewritten = Vec::new();
    for (post, es) in &by_post {
        for s in parses.get(*post).into_iter().flatten() {
            rewritten.push(crate::entity_refine::rewrite_for_linking(s, es, |e| {
                index.key_of(e).map(|k| (k.to_string(), head_form(e)))
            }));
        }
    }
    link_sentences(&rewritten, annotator, cfg.linking.confidence, cfg.jobs)
}

/// Entity merging, optional linking, relation clustering, statement
/// aggregation and Turtle emission, followed by validation of the written
/// graph.
pub fn stage_refine_emit(cfg: &PipelineConfig, annotator: Option<&dyn Annotator>) -> Result<RefineEmitReport> {
    cfg.validate()?;
    let entities: Vec<CandidateEntity> = read_jsonl(&cfg.out_dir.join(ENTITIES_FILE))?;
    let triples: Vec<SurfaceTriple> = read_jsonl(&cfg.out_dir.join(TRIPLES_FILE))?;
    let index = merge_entities(&entities);

    let mut linking_skipped = None;
    let links = match annotator {
        Some(a) if cfg.linking.enabled => match link_entities(cfg, &entities, &index, a) {
            Ok(l) => l,
            Err(Error::Linking(msg)) if !cfg.linking.strict => {
                log::warn!("linking failed, continuing without links: {msg}");
                linking_skipped = Some(msg);
                Vec::new()
            }
            Err(e) => return Err(e),
        },
        _ => {
            linking_skipped = Some("no linking service configured".into());
            Vec::new()
        }
    };

    let table = load_word_vectors(require(&cfg.input.vectors, "word vector")?)?;
    let embedded = embed_relations(&triples, &table);
    let raw: Vec<Vec<f64>> = embedded.vectors.iter().map(|v| v.vector.clone()).collect();
    let z = standardize(&raw);
    let grid = cfg.cluster.configs(cfg.seed);
    let (best, results) = grid_search(&z, &grid, embedded.total_forms())?;
    let selected = select_config(&results);
    let chosen = &results[selected];
    if chosen.error.is_some() {
        log::warn!("no clustering configuration succeeded; relations keep their own lemmas");
    }
    let relmap = build_relation_map(&embedded.vectors, &chosen.labels, &embedded.out_of_vocabulary);

    let options = AggregateOptions {
        keep_interrogative: cfg.emit.keep_interrogative,
        quantifiers: cfg.emit.quantifiers,
    };
    let statements = aggregate_statements(&triples, &relmap, &index, options)?;
    let graph = KnowledgeGraph::assemble(statements, &index, &links);

    let out = &cfg.out_dir;
    write_file(&out.join(GRID_FILE), grid_csv(&results)?.as_bytes())?;
    write_file(&out.join(RELATION_MAP_FILE), relmap.to_tsv().as_bytes())?;
    let graph_path = out.join(GRAPH_FILE);
    emit_turtle(&graph, &graph_path)?;
    let validation = validate_graph(&graph_path)?;
    write_file(&out.join(VALIDATION_FILE), format!("{}\n", validation.to_json()).as_bytes())?;
    if !validation.violations.is_empty() {
        return Err(Error::Invariant(format!(
            "{} violations in the emitted graph (see {})",
            validation.violations.len(),
            VALIDATION_FILE
        )));
    }
    Ok(RefineEmitReport {
        entities: graph.entities.len(),
        same_as_links: graph.links.iter().filter(|l| l.kind == LinkKind::SameAs).count(),
        related_links: graph.links.iter().filter(|l| l.kind == LinkKind::Related).count(),
        linking_skipped,
        relation_forms: embedded.total_forms(),
        out_of_vocabulary_forms: embedded.out_of_vocabulary.len(),
        grid_rows: results.len(),
        best_row: best,
        selected_row: selected,
        selected: chosen.error.is_none().then_some(chosen.config),
        num_clusters: chosen.num_clusters,
        score: chosen.score,
        predicates: graph
            .statements
            .iter()
            .map(|s| s.predicate_label.as_str())
            .collect::<std::collections::BTreeSet<_>>()
            .len(),
        statements: graph.statements.len(),
        violations: validation.violations.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub normalize: NormalizeReport,
    pub extract: ExtractReport,
    pub refine_emit: RefineEmitReport,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.normalize, self.extract, self.refine_emit)
    }
}

pub fn run_all(cfg: &PipelineConfig, annotator: Option<&dyn Annotator>) -> Result<RunReport> {
    let normalize = stage_normalize(cfg)?;
    let (extract, _, _) = stage_extract(cfg)?;
    let refine_emit = stage_refine_emit(cfg, annotator)?;
    Ok(RunReport {
        normalize,
        extract,
        refine_emit,
    })
}
