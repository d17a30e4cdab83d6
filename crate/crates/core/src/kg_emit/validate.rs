use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufReader, Read};
use std::path::Path;

use oxrdf::{NamedOrBlankNode, Term};
use oxttl::{TurtleParseError, TurtleParser};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
const OWL_SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
const SKOS_RELATED: &str = "http://www.w3.org/2004/02/skos/core#related";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub statement: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub triples: usize,
    pub statements: usize,
    pub entities: usize,
    pub tweets: usize,
    pub same_as_links: usize,
    pub related_links: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// Vocabulary is matched by local name, case-insensitively, so files using
// other casings ("comesFromTweet") or namespaces still validate.
fn local_name(iri: &str) -> String {
    iri.rsplit(['#', '/']).next().unwrap_or(iri).to_ascii_lowercase()
}

#[derive(Default)]
struct Node {
    is_statement: bool,
    subjects: usize,
    predicates: usize,
    objects: usize,
    provenance: usize,
    support: Vec<Option<u64>>,
}

fn subject_key(s: &NamedOrBlankNode) -> String {
    s.to_string()
}

/// Counts and per-statement checks over a Turtle (or N-Triples) file.
pub fn validate_graph(path: &Path) -> Result<ValidationReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    validate_reader(BufReader::new(file), path)
}

pub fn validate_turtle(text: &str) -> Result<ValidationReport> {
    validate_reader(text.as_bytes(), Path::new("<memory>"))
}

fn validate_reader(reader: impl Read, path: &Path) -> Result<ValidationReport> {
    let mut report = ValidationReport::default();
    let mut nodes: BTreeMap<String, Node> = BTreeMap::new();
    let mut entities = BTreeSet::new();
    let mut tweets = BTreeSet::new();
    for triple in TurtleParser::new().for_reader(reader) {
        let triple = triple.map_err(|e| match e {
            TurtleParseError::Io(e) => Error::io(path, e),
            TurtleParseError::Syntax(e) => Error::parse(path, e.location().start.line as usize + 1, e.to_string()),
        })?;
        report.triples += 1;
        let p = triple.predicate.as_str();
        if p == OWL_SAME_AS {
            report.same_as_links += 1;
            continue;
        }
        if p == SKOS_RELATED {
            report.related_links += 1;
            continue;
        }
        let s = subject_key(&triple.subject);
        if p == format!("{RDF}type") {
            if let Term::NamedNode(class) = &triple.object {
                match local_name(class.as_str()).as_str() {
                    "statement" => nodes.entry(s).or_default().is_statement = true,
                    "entity" => {
                        entities.insert(s);
                    }
                    "tweet" => {
                        tweets.insert(s);
                    }
                    _ => {}
                }
            }
            continue;
        }
        let target = nodes.entry(s);
        match (p.strip_prefix(RDF), local_name(p).as_str()) {
            (Some("subject"), _) => target.or_default().subjects += 1,
            (Some("predicate"), _) => target.or_default().predicates += 1,
            (Some("object"), _) => target.or_default().objects += 1,
            (_, "comesfromtweet") => target.or_default().provenance += 1,
            (_, "hassupport") => {
                let value = match &triple.object {
                    Term::Literal(l) => l.value().trim().parse::<u64>().ok(),
                    _ => None,
                };
                target.or_default().support.push(value);
            }
            _ => {}
        }
    }

    for (id, node) in &nodes {
        if !node.is_statement {
            continue;
        }
        report.statements += 1;
        let mut flag = |message: String| {
            report.violations.push(Violation {
                statement: id.clone(),
                message,
            })
        };
        for (name, count) in [("rdf:subject", node.subjects), ("rdf:predicate", node.predicates), ("rdf:object", node.objects)] {
            if count != 1 {
                flag(format!("{count} {name} values (expected 1)"));
            }
        }
        match node.support.as_slice() {
            [Some(n)] if *n as usize == node.provenance => {}
            [Some(n)] => flag(format!("hasSupport {n} but {} comesfromTweet edges", node.provenance)),
            [None] => flag("hasSupport is not a non-negative integer".into()),
            other => flag(format!("{} hasSupport values (expected 1)", other.len())),
        }
    }
    report.entities = entities.len();
    report.tweets = tweets.len();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "@prefix o: <http://x.org/ont#> .\n@prefix r: <http://x.org/res/> .\n\
        @prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n";

    #[test]
    fn support_mismatch_is_one_violation() {
        let ttl = format!(
            "{HEAD}o:s1 a o:Statement ; o:hasSupport 3 ; o:comesFromTweet r:t1, r:t2 ;\n\
             rdf:subject r:a ; rdf:predicate o:use ; rdf:object r:b .\n"
        );
        let r = validate_turtle(&ttl).unwrap();
        assert_eq!(r.statements, 1);
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].message.contains("hasSupport 3"));
    }

    #[test]
    fn missing_and_doubled_roles() {
        let ttl = format!(
            "{HEAD}o:s1 a o:Statement ; o:hasSupport 0 ;\n\
             rdf:subject r:a, r:c ; rdf:predicate o:use .\n"
        );
        let r = validate_turtle(&ttl).unwrap();
        assert_eq!(r.violations.len(), 2);
    }

    #[test]
    fn syntax_error_has_line() {
        let err = validate_turtle(&format!("{HEAD}\no:s1 a .\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }), "{err}");
    }
}
