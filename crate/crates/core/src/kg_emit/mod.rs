//! Statement aggregation and Turtle serialization of the knowledge graph.

mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::entity_extract::CandidateEntity;
use crate::entity_refine::{quantifier_text, EntityIndex, EntityLink, LinkKind, NormalizedEntity};
use crate::error::{Error, Result};
use crate::relation_cluster::RelationMap;
use crate::relation_extract::SurfaceTriple;

pub use validate::{validate_graph, validate_turtle, ValidationReport, Violation};

pub const RESOURCE_NS: &str = "http://dtsmmkg.org/dtsmmkg/resource/";
pub const ONTOLOGY_NS: &str = "http://dtsmmkg.org/dtsmmkg/ontology#";

pub const PREFIXES: &[(&str, &str)] = &[
    ("dtsmm", RESOURCE_NS),
    ("dtsmm-ont", ONTOLOGY_NS),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
    ("schema", "http://schema.org/"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("xsd", "http://www.w3.org/2001/XMLSchema#"),
];

/// Where quantifiers ("82%") go: a statement annotation, or baked into the
/// entity key ("82% of cio").
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantifierMode {
    #[default]
    Annotate,
    Inline,
}

impl std::str::FromStr for QuantifierMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "annotate" => Ok(QuantifierMode::Annotate),
            "inline" => Ok(QuantifierMode::Inline),
            other => Err(format!("unknown quantifier mode `{other}` (annotate|inline)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AggregateOptions {
    pub keep_interrogative: bool,
    pub quantifiers: QuantifierMode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub subject_key: String,
    /// Upper-case predicate label, e.g. "BUY".
    pub predicate_label: String,
    pub object_key: String,
    pub support: usize,
    pub tweet_ids: BTreeSet<String>,
    pub negated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject_quantifier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_quantifier: Option<String>,
}

type MergeKey = (String, String, String, bool, Option<String>, Option<String>);

fn inline_key(entity: &CandidateEntity, key: &str) -> (String, Option<String>) {
    match quantifier_text(entity) {
        None => (key.to_string(), None),
        Some(q) => {
            let linked_by_of = entity.quantifier_span.is_some_and(|(_, end)| {
                entity
                    .tokens
                    .get(end + 1 - entity.span.0)
                    .is_some_and(|t| t.surface.eq_ignore_ascii_case("of"))
            });
            let joined = if linked_by_of { format!("{q} of {key}") } else { format!("{q} {key}") };
            (joined, None)
        }
    }
}

fn occurrence_key(entity: &CandidateEntity, index: &EntityIndex, mode: QuantifierMode) -> Option<(String, Option<String>)> {
    let key = index.key_of(entity)?;
    Some(match mode {
        QuantifierMode::Inline => inline_key(entity, key),
        QuantifierMode::Annotate => (key.to_string(), quantifier_text(entity)),
    })
}

/// Rewrites each surface triple to `(subject key, relation label, object
/// key)` and merges identical rewrites (negation and quantifiers included)
/// across posts. Triples whose subject or object cleans to nothing are
/// skipped. Output is in canonical order.
pub fn aggregate_statements(
    triples: &[SurfaceTriple],
    relmap: &RelationMap,
    index: &EntityIndex,
    options: AggregateOptions,
) -> Result<Vec<Statement>> {
    let mut merged: BTreeMap<MergeKey, BTreeSet<String>> = BTreeMap::new();
    for t in triples {
        if t.interrogative && !options.keep_interrogative {
            continue;
        }
        let label = relmap
            .label(&t.form())
            .ok_or_else(|| Error::Invariant(format!("relation form `{}` missing from the relation map", t.form())))?;
        let (Some((s, sq)), Some((o, oq))) = (
            occurrence_key(&t.subject, index, options.quantifiers),
            occurrence_key(&t.object, index, options.quantifiers),
        ) else {
            continue;
        };
        merged
            .entry((s, label, o, t.negated, sq, oq))
            .or_default()
            .insert(t.post_id.clone());
    }
    Ok(merged
        .into_iter()
        .map(|((s, p, o, negated, sq, oq), tweet_ids)| Statement {
            subject_key: s,
            predicate_label: p,
            object_key: o,
            support: tweet_ids.len(),
            tweet_ids,
            negated,
            subject_quantifier: sq,
            object_quantifier: oq,
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub statements: Vec<Statement>,
    pub entities: BTreeMap<String, NormalizedEntity>,
    pub links: Vec<EntityLink>,
}

impl KnowledgeGraph {
    /// Keeps the entities the statements mention (adding bare nodes for
    /// inline-quantified keys) and the links on those entities.
    pub fn assemble(statements: Vec<Statement>, index: &EntityIndex, links: &[EntityLink]) -> Self {
        let mut entities = BTreeMap::new();
        for st in &statements {
            for key in [&st.subject_key, &st.object_key] {
                let entity = index.entities.get(key).cloned().unwrap_or_else(|| NormalizedEntity {
                    key: key.clone(),
                    head_lemma: key.rsplit(' ').next().unwrap_or_default().to_string(),
                    quantifiers: BTreeSet::new(),
                    variants: BTreeSet::new(),
                });
                entities.insert(key.clone(), entity);
            }
        }
        let mut links: Vec<EntityLink> = links
            .iter()
            .filter(|l| entities.contains_key(&l.entity_key))
            .cloned()
            .collect();
        links.sort_by(|a, b| {
            (&a.entity_key, a.kind == LinkKind::Related, &a.resource_uri).cmp(&(
                &b.entity_key,
                b.kind == LinkKind::Related,
                &b.resource_uri,
            ))
        });
        KnowledgeGraph {
            statements,
            entities,
            links,
        }
    }

    pub fn check(&self) -> Result<()> {
        for (i, st) in self.statements.iter().enumerate() {
            if st.support != st.tweet_ids.len() || st.support == 0 {
                return Err(Error::Invariant(format!("statement {} has support {} over {} tweets", i + 1, st.support, st.tweet_ids.len())));
            }
            for key in [&st.subject_key, &st.object_key] {
                if key.is_empty() || !self.entities.contains_key(key) {
                    return Err(Error::Invariant(format!("statement {} references unknown entity `{key}`", i + 1)));
                }
            }
        }
        if let Some(l) = self.links.iter().find(|l| !self.entities.contains_key(&l.entity_key)) {
            return Err(Error::Invariant(format!("link on unknown entity `{}`", l.entity_key)));
        }
        Ok(())
    }
}

fn is_unreserved(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b'.' | b'_' | b'~')
}

/// Local name for a key: spaces become `_`, everything outside the
/// unreserved set is percent-encoded.
pub fn encode_local(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    for b in key.replace(' ', "_").bytes() {
        if is_unreserved(b) {
            out.push(b as char);
        } else {
            let _ = write!(out, "%{b:02X}");
        }
    }
    out
}

pub fn mint_entity_uri(key: &str, base: &str) -> Result<String> {
    let iri = format!("{base}{}", encode_local(key));
    oxrdf::NamedNode::new(&iri).map_err(|e| Error::Iri {
        key: key.to_string(),
        message: e.to_string(),
    })?;
    Ok(iri)
}

/// Predicate local name: the lower-case lemma with spaces as `_`.
pub fn predicate_local(label: &str) -> String {
    encode_local(&label.to_lowercase())
}

fn prefixed_ok(local: &str) -> bool {
    !local.is_empty()
        && !local.starts_with(['-', '.'])
        && !local.ends_with('.')
        && local.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'%' | b'.'))
}

fn term(prefix: &str, ns: &str, local: &str) -> String {
    if prefixed_ok(local) {
        format!("{prefix}:{local}")
    } else {
        format!("<{ns}{local}>")
    }
}

fn literal(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn entity_term(key: &str) -> Result<String> {
    mint_entity_uri(key, RESOURCE_NS)?;
    Ok(term("dtsmm", RESOURCE_NS, &encode_local(key)))
}

fn tweet_term(id: &str) -> Result<String> {
    let local = format!("tweet_{}", encode_local(id));
    mint_entity_uri(&local, RESOURCE_NS)?;
    Ok(term("dtsmm", RESOURCE_NS, &local))
}

const ONTOLOGY_HEADER: &str = "\
dtsmm-ont:Statement a owl:Class ;
    rdfs:subClassOf rdf:Statement .

dtsmm-ont:Entity a owl:Class .

dtsmm-ont:Tweet a owl:Class ;
    rdfs:subClassOf schema:SocialMediaPosting .

dtsmm-ont:comesfromTweet a owl:ObjectProperty ;
    rdfs:domain dtsmm-ont:Statement ;
    rdfs:range dtsmm-ont:Tweet .

dtsmm-ont:hasSupport a owl:DatatypeProperty ;
    rdfs:domain dtsmm-ont:Statement ;
    rdfs:range xsd:integer .

dtsmm-ont:negation a owl:DatatypeProperty ;
    rdfs:domain dtsmm-ont:Statement ;
    rdfs:range xsd:boolean .

dtsmm-ont:subjectQuantifier a owl:DatatypeProperty ;
    rdfs:domain dtsmm-ont:Statement ;
    rdfs:range xsd:string .

dtsmm-ont:objectQuantifier a owl:DatatypeProperty ;
    rdfs:domain dtsmm-ont:Statement ;
    rdfs:range xsd:string .
";

/// Serializes the graph as Turtle. Output depends only on the graph, so
/// equal graphs give byte-identical files.
pub fn to_turtle(graph: &KnowledgeGraph) -> Result<String> {
    graph.check()?;
    let mut out = String::new();
    for (p, ns) in PREFIXES {
        let _ = writeln!(out, "@prefix {p}: <{ns}> .");
    }
    out.push('\n');
    out.push_str(ONTOLOGY_HEADER);

    let predicates: BTreeSet<&str> = graph.statements.iter().map(|s| s.predicate_label.as_str()).collect();
    for label in predicates {
        let local = predicate_local(label);
        mint_entity_uri(&local, ONTOLOGY_NS)?;
        let _ = write!(
            out,
            "\n{} a rdf:Property ;\n    rdfs:label {} .\n",
            term("dtsmm-ont", ONTOLOGY_NS, &local),
            literal(label)
        );
    }

    let mut links_by_key: BTreeMap<&str, Vec<&EntityLink>> = BTreeMap::new();
    for l in &graph.links {
        links_by_key.entry(&l.entity_key).or_default().push(l);
    }
    for key in graph.entities.keys() {
        let _ = write!(out, "\n{} a dtsmm-ont:Entity ;\n    rdfs:label {}", entity_term(key)?, literal(key));
        for l in links_by_key.get(key.as_str()).into_iter().flatten() {
            oxrdf::NamedNode::new(&l.resource_uri).map_err(|e| Error::Iri {
                key: l.resource_uri.clone(),
                message: e.to_string(),
            })?;
            let p = match l.kind {
                LinkKind::SameAs => "owl:sameAs",
                LinkKind::Related => "skos:related",
            };
            let _ = write!(out, " ;\n    {p} <{}>", l.resource_uri);
        }
        out.push_str(" .\n");
    }

    let tweets: BTreeSet<&str> = graph.statements.iter().flat_map(|s| s.tweet_ids.iter().map(String::as_str)).collect();
    for id in tweets {
        let _ = write!(out, "\n{} a dtsmm-ont:Tweet .\n", tweet_term(id)?);
    }

    for (i, st) in graph.statements.iter().enumerate() {
        let _ = write!(out, "\ndtsmm-ont:statement_{} a dtsmm-ont:Statement, rdf:Statement ;\n", i + 1);
        let _ = writeln!(out, "    dtsmm-ont:negation {} ;", st.negated);
        for id in &st.tweet_ids {
            let _ = writeln!(out, "    dtsmm-ont:comesfromTweet {} ;", tweet_term(id)?);
        }
        let _ = writeln!(out, "    dtsmm-ont:hasSupport {} ;", st.support);
        let _ = writeln!(out, "    rdf:subject {} ;", entity_term(&st.subject_key)?);
        let _ = writeln!(
            out,
            "    rdf:predicate {} ;",
            term("dtsmm-ont", ONTOLOGY_NS, &predicate_local(&st.predicate_label))
        );
        let _ = write!(out, "    rdf:object {}", entity_term(&st.object_key)?);
        if let Some(q) = &st.subject_quantifier {
            let _ = write!(out, " ;\n    dtsmm-ont:subjectQuantifier {}", literal(q));
        }
        if let Some(q) = &st.object_quantifier {
            let _ = write!(out, " ;\n    dtsmm-ont:objectQuantifier {}", literal(q));
        }
        out.push_str(" .\n");
    }
    Ok(out)
}

pub fn emit_turtle(graph: &KnowledgeGraph, out: &Path) -> Result<()> {
    let text = to_turtle(graph)?;
    std::fs::write(out, text).map_err(|e| Error::io(out, e))
}
