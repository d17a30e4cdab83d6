//! Entity linking against a Spotlight-compatible annotation service.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus_io::ParsedSentence;
use crate::entity_extract::CandidateEntity;
use crate::error::{Error, Result};

pub const DEFAULT_LINKING_CONFIDENCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    SameAs,
    Related,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityLink {
    pub entity_key: String,
    pub resource_uri: String,
    pub kind: LinkKind,
    pub confidence: f64,
}

/// One substituted entity in a rewritten sentence. Offsets are character
/// offsets into [`RewrittenSentence::text`], end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkSpan {
    pub key: String,
    pub start: usize,
    pub end: usize,
    pub head_start: usize,
    pub head_end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewrittenSentence {
    pub post_id: String,
    pub sent_index: usize,
    pub text: String,
    pub spans: Vec<LinkSpan>,
}

/// Sentence text with every entity span replaced by its canonical key.
/// Overlapping spans keep the longest.
pub fn rewrite_for_linking(
    sentence: &ParsedSentence,
    entities: &[CandidateEntity],
    key_of: impl Fn(&CandidateEntity) -> Option<(String, String)>,
) -> RewrittenSentence {
    let mut chosen: Vec<(&CandidateEntity, String, String)> = Vec::new();
    let mut local: Vec<&CandidateEntity> = entities
        .iter()
        .filter(|e| e.resolved_from.is_none() && e.sent_index == sentence.sent_index && e.post_id == sentence.post_id)
        .collect();
    local.sort_by(|a, b| (b.span.1 - b.span.0).cmp(&(a.span.1 - a.span.0)).then(a.span.cmp(&b.span)));
    for e in local {
        if chosen.iter().any(|(c, _, _)| !(e.span.1 < c.span.0 || c.span.1 < e.span.0)) {
            continue;
        }
        if let Some((key, head)) = key_of(e) {
            chosen.push((e, key, head));
        }
    }
    chosen.sort_by_key(|(e, _, _)| e.span.0);

    let mut text = String::new();
    let mut len = 0usize;
    let mut spans = Vec::new();
    let mut prev_end: Option<usize> = None;
    let mut i = 1;
    let mut next = chosen.iter().peekable();
    while i <= sentence.len() {
        let t = sentence.token(i);
        if prev_end.is_some_and(|end| end != t.start_char) {
            text.push(' ');
            len += 1;
        }
        match next.peek() {
            Some((e, key, head)) if e.span.0 == i => {
                let start = len;
                text.push_str(key);
                len += key.chars().count();
                let (hs, he) = locate_head(key, head);
                spans.push(LinkSpan {
                    key: key.clone(),
                    start,
                    end: len,
                    head_start: start + hs,
                    head_end: start + he,
                });
                prev_end = Some(sentence.token(e.span.1).end_char);
                i = e.span.1 + 1;
                next.next();
            }
            _ => {
                text.push_str(&t.surface);
                len += t.surface.chars().count();
                prev_end = Some(t.end_char);
                i += 1;
            }
        }
    }
    RewrittenSentence {
        post_id: sentence.post_id.clone(),
        sent_index: sentence.sent_index,
        text,
        spans,
    }
}

/// Character range of the head word inside `key`: its last whole-word
/// occurrence, else the last word.
fn locate_head(key: &str, head: &str) -> (usize, usize) {
    let words: Vec<&str> = key.split(' ').collect();
    let mut offsets = Vec::with_capacity(words.len());
    let mut at = 0;
    for w in &words {
        offsets.push(at);
        at += w.chars().count() + 1;
    }
    let pick = words.iter().rposition(|w| *w == head).unwrap_or(words.len() - 1);
    (offsets[pick], offsets[pick] + words[pick].chars().count())
}

/// A resource annotation returned by the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub uri: String,
    pub surface_form: String,
    pub offset: usize,
    pub similarity: f64,
}

impl Resource {
    pub fn end(&self) -> usize {
        self.offset + self.surface_form.chars().count()
    }
}

/// same_as when the resource lies inside an entity span and overlaps its
/// head; related when it only lies inside; nothing otherwise.
pub fn classify_links(spans: &[LinkSpan], resources: &[Resource]) -> Vec<EntityLink> {
    let mut out = Vec::new();
    for r in resources {
        let (rs, re) = (r.offset, r.end());
        for s in spans {
            let inside = s.start <= rs && re <= s.end;
            if !inside {
                continue;
            }
            let head_overlap = rs < s.head_end && s.head_start < re;
            out.push(EntityLink {
                entity_key: s.key.clone(),
                resource_uri: r.uri.clone(),
                kind: if head_overlap { LinkKind::SameAs } else { LinkKind::Related },
                confidence: r.similarity,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnotateError {
    #[error("service unavailable: {0}")]
    Unavailable(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

pub trait Annotator: Sync {
    fn annotate(&self, text: &str, confidence: f64) -> std::result::Result<Vec<Resource>, AnnotateError>;
}

fn field_str(v: &Value, name: &str) -> Option<String> {
    match v.get(name)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parses the service's JSON body. Attribute values may be strings or
/// numbers; a missing `Resources` field means no annotations.
pub fn parse_annotation_response(body: &str) -> std::result::Result<Vec<Resource>, AnnotateError> {
    let v: Value = serde_json::from_str(body).map_err(|e| AnnotateError::Malformed(e.to_string()))?;
    let items: Vec<&Value> = match v.get("Resources") {
        None | Some(Value::Null) => return Ok(Vec::new()),
        Some(Value::Array(a)) => a.iter().collect(),
        Some(obj @ Value::Object(_)) => vec![obj],
        Some(other) => return Err(AnnotateError::Malformed(format!("unexpected Resources value {other}"))),
    };
    items
        .into_iter()
        .map(|item| {
            let bad = |f: &str| AnnotateError::Malformed(format!("resource lacks a usable {f}"));
            let uri = field_str(item, "@URI").ok_or_else(|| bad("@URI"))?;
            let surface_form = field_str(item, "@surfaceForm").ok_or_else(|| bad("@surfaceForm"))?;
            let offset = field_str(item, "@offset")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("@offset"))?;
            let similarity = field_str(item, "@similarityScore")
                .and_then(|s| s.parse().ok())
                .unwrap_or(0.0);
            Ok(Resource {
                uri,
                surface_form,
                offset,
                similarity,
            })
        })
        .collect()
}

/// HTTP client for `POST {endpoint}/rest/annotate`.
pub struct SpotlightClient {
    url: String,
    agent: ureq::Agent,
    retries: u32,
    backoff: Duration,
}

impl SpotlightClient {
    pub fn new(endpoint: &str) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        SpotlightClient {
            url: format!("{}/rest/annotate", endpoint.trim_end_matches('/')),
            agent,
            retries: 3,
            backoff: Duration::from_millis(200),
        }
    }

    pub fn with_retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.retries = retries;
        self.backoff = backoff;
        self
    }

    fn attempt(&self, text: &str, confidence: f64) -> std::result::Result<Vec<Resource>, AnnotateError> {
        let conf = confidence.to_string();
        let response = self
            .agent
            .post(&self.url)
            .header("Accept", "application/json")
            .send_form([("text", text), ("confidence", conf.as_str())]);
        match response {
            Ok(mut r) => {
                let body = r
                    .body_mut()
                    .read_to_string()
                    .map_err(|e| AnnotateError::Unavailable(e.to_string()))?;
                parse_annotation_response(&body)
            }
            Err(ureq::Error::StatusCode(code)) if (400..500).contains(&code) && code != 429 => {
                Err(AnnotateError::Malformed(format!("http status {code}")))
            }
            Err(e) => Err(AnnotateError::Unavailable(e.to_string())),
        }
    }
}

impl Annotator for SpotlightClient {
    fn annotate(&self, text: &str, confidence: f64) -> std::result::Result<Vec<Resource>, AnnotateError> {
        let mut delay = self.backoff;
        let mut last = None;
        for attempt in 0..=self.retries {
            if attempt > 0 {
                std::thread::sleep(delay);
                delay *= 2;
            }
            match self.attempt(text, confidence) {
                Err(AnnotateError::Unavailable(m)) => {
                    log::debug!("annotation attempt {} failed: {m}", attempt + 1);
                    last = Some(m);
                }
                other => return other,
            }
        }
        Err(AnnotateError::Unavailable(last.unwrap_or_default()))
    }
}

/// Links all rewritten sentences with `jobs` requests in flight.
///
/// Malformed responses are logged and the sentence is skipped. An
/// unreachable service fails the whole call so the caller can fall back to an
/// unlinked graph. Links are merged per (entity, resource): same_as wins over
/// related and the highest confidence is kept.
pub fn link_sentences(
    sentences: &[RewrittenSentence],
    annotator: &dyn Annotator,
    confidence: f64,
    jobs: usize,
) -> Result<Vec<EntityLink>> {
    let work: Vec<&RewrittenSentence> = sentences.iter().filter(|s| !s.spans.is_empty()).collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Vec<EntityLink>)>> = Mutex::new(Vec::new());
    let failure: Mutex<Option<String>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..jobs.max(1).min(work.len().max(1)) {
            scope.spawn(|| loop {
                if failure.lock().expect("lock").is_some() {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(s) = work.get(i) else { break };
                match annotator.annotate(&s.text, confidence) {
                    Ok(resources) => {
                        let links = classify_links(&s.spans, &resources);
                        results.lock().expect("lock").push((i, links));
                    }
                    Err(AnnotateError::Malformed(m)) => {
                        log::warn!("post {} sentence {}: {m}", s.post_id, s.sent_index);
                    }
                    Err(AnnotateError::Unavailable(m)) => {
                        *failure.lock().expect("lock") = Some(m);
                        break;
                    }
                }
            });
        }
    });
    if let Some(m) = failure.into_inner().expect("lock") {
        return Err(Error::Linking(m));
    }
    let mut results = results.into_inner().expect("lock");
    results.sort_by_key(|(i, _)| *i);
    let mut merged: BTreeMap<(String, String), (LinkKind, f64)> = BTreeMap::new();
    for link in results.into_iter().flat_map(|(_, l)| l) {
        let slot = merged
            .entry((link.entity_key, link.resource_uri))
            .or_insert((link.kind, link.confidence));
        slot.0 = slot.0.min(link.kind);
        slot.1 = slot.1.max(link.confidence);
    }
    Ok(merged
        .into_iter()
        .map(|((entity_key, resource_uri), (kind, confidence))| EntityLink {
            entity_key,
            resource_uri,
            kind,
            confidence,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::test_support::sentence;
    use crate::corpus_io::TokenKind::*;
    use crate::entity_extract::extract_entities;
    use crate::entity_refine::{entity_key, head_form};

    fn keys(e: &CandidateEntity) -> Option<(String, String)> {
        Some((entity_key(e)?, head_form(e)))
    }

    fn smart_cities() -> ParsedSentence {
        sentence(
            "p",
            &[
                ("#SmartCities", "#SmartCities", "PROPN", 2, "nsubj", Hashtag),
                ("need", "need", "VERB", 0, "ROOT", Plain),
                ("#AI", "#AI", "PROPN", 2, "dobj", Hashtag),
            ],
        )
    }

    #[test]
    fn rewrite_substitutes_keys() {
        let s = smart_cities();
        let es = extract_entities(&s);
        let r = rewrite_for_linking(&s, &es, keys);
        assert_eq!(r.text, "smart cities need ai");
        assert_eq!(r.spans.len(), 2);
        assert_eq!((r.spans[0].start, r.spans[0].end), (0, 12));
        assert_eq!((r.spans[0].head_start, r.spans[0].head_end), (6, 12));
        assert_eq!((r.spans[1].start, r.spans[1].end), (18, 20));
    }

    #[test]
    fn rewrite_without_entities_is_text() {
        let s = sentence("p", &[("Go", "go", "VERB", 0, "ROOT", Plain), ("now", "now", "ADV", 1, "advmod", Plain)]);
        let r = rewrite_for_linking(&s, &[], keys);
        assert_eq!(r.text, "Go now");
        assert!(r.spans.is_empty());
    }

    fn span(key: &str, start: usize, end: usize, hs: usize, he: usize) -> LinkSpan {
        LinkSpan {
            key: key.into(),
            start,
            end,
            head_start: hs,
            head_end: he,
        }
    }

    fn res(uri: &str, surface: &str, offset: usize) -> Resource {
        Resource {
            uri: uri.into(),
            surface_form: surface.into(),
            offset,
            similarity: 0.9,
        }
    }

    #[test]
    fn same_as_needs_inclusion_and_head() {
        let spans = [span("gartner inc", 0, 11, 8, 11)];
        let links = classify_links(&spans, &[res("G", "gartner inc", 0)]);
        assert_eq!(links[0].kind, LinkKind::SameAs);
    }

    #[test]
    fn related_when_head_missed() {
        let spans = [span("gartner survey", 0, 14, 8, 14)];
        let links = classify_links(&spans, &[res("G", "gartner", 0)]);
        assert_eq!(links[0].kind, LinkKind::Related);
    }

    #[test]
    fn head_overlap_alone_discarded() {
        let spans = [span("ai", 10, 12, 10, 12)];
        assert!(classify_links(&spans, &[res("X", "need ai", 5)]).is_empty());
        assert!(classify_links(&spans, &[]).is_empty());
    }

    #[test]
    fn response_parsing() {
        let body = r#"{"@text":"x","Resources":[{"@URI":"http://dbpedia.org/resource/Gartner","@surfaceForm":"gartner","@offset":"0","@similarityScore":"0.99"},{"@URI":"u","@surfaceForm":"ai","@offset":4,"@similarityScore":1.0}]}"#;
        let r = parse_annotation_response(body).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].offset, 0);
        assert!((r[0].similarity - 0.99).abs() < 1e-12);
        assert_eq!(r[1].offset, 4);
        assert!(parse_annotation_response(r#"{"@text":"x"}"#).unwrap().is_empty());
        assert!(parse_annotation_response("not json").is_err());
    }

    struct Fixed(Vec<Resource>);

    impl Annotator for Fixed {
        fn annotate(&self, _: &str, _: f64) -> std::result::Result<Vec<Resource>, AnnotateError> {
            Ok(self.0.clone())
        }
    }

    struct Down;

    impl Annotator for Down {
        fn annotate(&self, _: &str, _: f64) -> std::result::Result<Vec<Resource>, AnnotateError> {
            Err(AnnotateError::Unavailable("refused".into()))
        }
    }

    #[test]
    fn link_sentences_merges_kinds() {
        let s1 = RewrittenSentence {
            post_id: "1".into(),
            sent_index: 0,
            text: "gartner survey".into(),
            spans: vec![span("gartner survey", 0, 14, 8, 14)],
        };
        let s2 = RewrittenSentence {
            post_id: "2".into(),
            sent_index: 0,
            text: "gartner survey".into(),
            spans: vec![span("gartner survey", 0, 14, 0, 7)],
        };
        let links = link_sentences(&[s1, s2], &Fixed(vec![res("G", "gartner", 0)]), 0.5, 4).unwrap();
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].kind, LinkKind::SameAs);
    }

    #[test]
    fn unavailable_service_is_an_error() {
        let s = RewrittenSentence {
            post_id: "1".into(),
            sent_index: 0,
            text: "ai".into(),
            spans: vec![span("ai", 0, 2, 0, 2)],
        };
        assert!(matches!(link_sentences(&[s], &Down, 0.5, 2), Err(Error::Linking(_))));
    }
}
