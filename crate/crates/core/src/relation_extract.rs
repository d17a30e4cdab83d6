//! Surface triple extraction: entity pairs whose connecting dependency path
//! matches one of the target patterns.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{ParsedSentence, TokenKind};
use crate::entity_extract::CandidateEntity;
use crate::error::{Error, Result};

/// Path between two tokens. `nodes` runs from the first token to the second
/// through `lca`; `labels[i]` is the deprel of the edge between `nodes[i]` and
/// `nodes[i + 1]` (the label of whichever end is the child).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyPath {
    pub labels: Vec<String>,
    pub nodes: Vec<usize>,
    pub lca: usize,
    /// Highest VERB/AUX strictly between the endpoints.
    pub pivot_index: Option<usize>,
}

impl DependencyPath {
    /// Label sequence as compared against patterns: `prep` edges are elided
    /// and relative-clause labels are spelled `acl, relcl`.
    pub fn pattern_labels(&self) -> Vec<String> {
        canonical_labels(self.labels.iter().map(String::as_str), true)
    }
}

fn canonical_labels<'a>(labels: impl Iterator<Item = &'a str>, elide_prep: bool) -> Vec<String> {
    let mut out = Vec::new();
    for l in labels {
        match l {
            "prep" if elide_prep => {}
            "relcl" | "acl:relcl" => {
                out.push("acl".to_string());
                out.push("relcl".to_string());
            }
            other => out.push(other.to_string()),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceTriple {
    pub post_id: String,
    pub sent_index: usize,
    pub subject: CandidateEntity,
    pub object: CandidateEntity,
    pub verb_span: (usize, usize),
    pub verb_surface: String,
    pub verb_lemma: String,
    pub path: DependencyPath,
    pub pattern: Vec<String>,
    pub negated: bool,
    pub interrogative: bool,
    /// The path was taken from a coordinated argument's first conjunct.
    #[serde(default)]
    pub via_conjunction: bool,
}

impl SurfaceTriple {
    /// Relation form used for clustering: the lowercased verb surface.
    pub fn form(&self) -> String {
        self.verb_surface.to_lowercase()
    }
}

/// Ordered label sequences a path must equal to yield a triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetPatterns(pub Vec<Vec<String>>);

impl Default for TargetPatterns {
    fn default() -> Self {
        let defaults: [&[&str]; 6] = [
            &["nsubj", "dobj"],
            &["acl", "relcl", "dobj"],
            &["acl", "dobj"],
            &["nsubjpass", "agent", "pobj"],
            &["nsubj", "dobj", "conj"],
            &["nsubj", "conj"],
        ];
        TargetPatterns(
            defaults
                .iter()
                .map(|p| p.iter().map(|s| s.to_string()).collect())
                .collect(),
        )
    }
}

impl TargetPatterns {
    /// One pattern per line, labels separated by commas or whitespace,
    /// optionally bracketed. `#` starts a comment.
    pub fn parse(content: &str) -> Result<Self, String> {
        let mut patterns = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let inner = line.trim_start_matches('[').trim_end_matches(']');
            let raw: Vec<&str> = inner
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if raw.is_empty() {
                return Err(format!("line {}: empty pattern", i + 1));
            }
            patterns.push(canonical_labels(raw.into_iter(), false));
        }
        if patterns.is_empty() {
            return Err("no patterns".into());
        }
        Ok(TargetPatterns(patterns))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&content).map_err(|m| Error::parse(path, 0, m))
    }

    pub fn is_passive(pattern: &[String]) -> bool {
        pattern.first().is_some_and(|l| l == "nsubjpass")
    }
}

/// Unique tree path between `a` and `b` via their lowest common ancestor.
pub fn tree_path(sentence: &ParsedSentence, a: usize, b: usize) -> DependencyPath {
    let ancestors = |mut i: usize| {
        let mut chain = vec![i];
        while sentence.token(i).head != 0 && chain.len() <= sentence.len() {
            i = sentence.token(i).head;
            chain.push(i);
        }
        chain
    };
    let up_a = ancestors(a);
    let up_b = ancestors(b);
    let on_b: HashSet<usize> = up_b.iter().copied().collect();
    let lca_pos_a = up_a.iter().position(|i| on_b.contains(i)).expect("tree has a single root");
    let lca = up_a[lca_pos_a];
    let lca_pos_b = up_b.iter().position(|&i| i == lca).expect("lca lies on both chains");

    let mut nodes: Vec<usize> = up_a[..=lca_pos_a].to_vec();
    nodes.extend(up_b[..lca_pos_b].iter().rev());
    let mut labels: Vec<String> = up_a[..lca_pos_a].iter().map(|&i| sentence.token(i).deprel.clone()).collect();
    labels.extend(up_b[..lca_pos_b].iter().rev().map(|&i| sentence.token(i).deprel.clone()));

    let pivot_index = nodes[1..nodes.len().saturating_sub(1)]
        .iter()
        .copied()
        .filter(|&i| sentence.token(i).is_verbal())
        .min_by_key(|&i| (sentence.depth(i), i));
    DependencyPath {
        labels,
        nodes,
        lca,
        pivot_index,
    }
}

/// The pattern equal to the path's canonical label sequence, if any.
pub fn match_target_pattern<'p>(path: &DependencyPath, patterns: &'p TargetPatterns) -> Option<&'p [String]> {
    let labels = path.pattern_labels();
    patterns.0.iter().find(|p| **p == labels).map(Vec::as_slice)
}

/// False for an `[acl, dobj]` match whose pivot has an `aux` "to" child.
pub fn aux_infinitive_filter(sentence: &ParsedSentence, triple: &SurfaceTriple) -> bool {
    if triple.pattern != ["acl", "dobj"] {
        return true;
    }
    let Some(pivot) = triple.path.pivot_index else { return true };
    !sentence
        .children(pivot)
        .any(|c| c.deprel == "aux" && c.surface.eq_ignore_ascii_case("to"))
}

/// `(negated, interrogative)` for a pivot verb.
pub fn detect_flags(sentence: &ParsedSentence, pivot: usize) -> (bool, bool) {
    let negated = sentence.children(pivot).any(|c| {
        c.deprel == "neg"
            || (c.deprel == "advmod" && matches!(c.lemma.to_lowercase().as_str(), "not" | "never" | "no" | "n't"))
    });
    let interrogative = sentence
        .tokens
        .iter()
        .rev()
        .find(|t| !matches!(t.kind, TokenKind::Hashtag | TokenKind::Mention | TokenKind::Url))
        .is_some_and(|t| t.surface == "?");
    (negated, interrogative)
}

/// Pivot plus its particles, and for passives the agent preposition.
fn verb_tokens(sentence: &ParsedSentence, pivot: usize, passive: bool) -> Vec<usize> {
    let mut toks = vec![pivot];
    for c in sentence.children(pivot) {
        if c.deprel == "prt" || c.deprel == "compound:prt" || (passive && c.deprel == "agent") {
            toks.push(c.index);
        }
    }
    toks.sort_unstable();
    toks
}

/// Climbs a coordination chain to its first conjunct.
fn first_conjunct(sentence: &ParsedSentence, mut i: usize) -> usize {
    for _ in 0..sentence.len() {
        let t = sentence.token(i);
        if t.deprel != "conj" || t.head == 0 {
            break;
        }
        let h = sentence.token(t.head);
        if !(h.is_nominal_pos() || h.kind.is_tag()) {
            break;
        }
        i = t.head;
    }
    i
}

/// Triples for every ordered entity pair of the sentence. Entities located
/// in other sentences are ignored.
pub fn extract_triples(
    sentence: &ParsedSentence,
    entities: &[CandidateEntity],
    patterns: &TargetPatterns,
) -> Vec<SurfaceTriple> {
    let local: Vec<&CandidateEntity> = entities
        .iter()
        .filter(|e| e.post_id == sentence.post_id && e.location().0 == sentence.sent_index)
        .collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for a in &local {
        for b in &local {
            let (ia, ib) = (a.location().1, b.location().1);
            if ia == ib {
                continue;
            }
            let Some(triple) = triple_for_pair(sentence, a, b, patterns) else { continue };
            if !aux_infinitive_filter(sentence, &triple) {
                continue;
            }
            let key = (
                (triple.subject.location(), triple.subject.span),
                triple.path.pivot_index,
                (triple.object.location(), triple.object.span),
            );
            if seen.insert(key) {
                out.push(triple);
            }
        }
    }
    out.sort_by(|x, y| {
        (x.subject.location(), x.subject.span, x.object.location(), x.object.span, x.verb_span).cmp(&(
            y.subject.location(),
            y.subject.span,
            y.object.location(),
            y.object.span,
            y.verb_span,
        ))
    });
    out
}

fn triple_for_pair(
    sentence: &ParsedSentence,
    a: &CandidateEntity,
    b: &CandidateEntity,
    patterns: &TargetPatterns,
) -> Option<SurfaceTriple> {
    let (ia, ib) = (a.location().1, b.location().1);
    let (ca, cb) = (first_conjunct(sentence, ia), first_conjunct(sentence, ib));
    let attempts = [(ia, ib, false), (ca, ib, true), (ia, cb, true), (ca, cb, true)];
    let mut tried = HashSet::new();
    for (x, y, via) in attempts {
        if x == y || !tried.insert((x, y)) {
            continue;
        }
        let path = tree_path(sentence, x, y);
        let Some(pivot) = path.pivot_index else { continue };
        let Some(pattern) = match_target_pattern(&path, patterns) else { continue };
        let pattern = pattern.to_vec();
        let passive = TargetPatterns::is_passive(&pattern);
        let (subject, object) = if passive { (b, a) } else { (a, b) };
        let toks = verb_tokens(sentence, pivot, passive);
        let verb_surface = toks
            .iter()
            .map(|&i| sentence.token(i).surface.as_str())
            .collect::<Vec<_>>()
            .join(" ");
        let verb_lemma = toks
            .iter()
            .map(|&i| sentence.token(i).lemma.to_lowercase())
            .collect::<Vec<_>>()
            .join(" ");
        let (negated, interrogative) = detect_flags(sentence, pivot);
        return Some(SurfaceTriple {
            post_id: sentence.post_id.clone(),
            sent_index: sentence.sent_index,
            subject: subject.clone(),
            object: object.clone(),
            verb_span: (toks[0], *toks.last().expect("pivot present")),
            verb_surface,
            verb_lemma,
            path,
            pattern,
            negated,
            interrogative,
            via_conjunction: via,
        });
    }
    None
}
