//! Candidate entity extraction from second-pass parses: local noun phrases,
//! one level of prepositional attachment, quantity modifiers and pronoun
//! anaphora.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{CorefChain, ParsedSentence, ParsedToken, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Nominal,
    Hashtag,
    Mention,
    Anaphora,
}

/// Token data carried by an entity so later stages do not need the parse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityToken {
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub kind: TokenKind,
    /// Touches the preceding token of the span in the source text.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub glued: bool,
}

impl EntityToken {
    fn of(t: &ParsedToken, prev: Option<&ParsedToken>) -> Self {
        EntityToken {
            surface: t.surface.clone(),
            lemma: t.lemma.clone(),
            pos: t.pos.clone(),
            kind: t.kind,
            glued: prev.is_some_and(|p| p.end_char == t.start_char),
        }
    }
}

/// Joins token surfaces, inserting a space wherever the source had one.
pub fn join_entity_tokens(tokens: &[EntityToken]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 && !t.glued {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

/// A candidate entity phrase. Token indices are 1-based and refer to the
/// sentence `sent_index` of `post_id`.
///
/// `head_index` is the lexical head used for naming; `anchor_index` is the
/// token the phrase hangs from in the tree and is what dependency paths are
/// computed from. They differ only for quantified phrases like
/// "82% of cio" (head "cio", anchor "%") and for anaphora, whose anchor is the
/// pronoun position in `resolved_from`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEntity {
    pub post_id: String,
    pub sent_index: usize,
    pub span: (usize, usize),
    pub head_index: usize,
    pub anchor_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantifier_span: Option<(usize, usize)>,
    pub surface: String,
    pub kind: EntityKind,
    /// `(sent_index, token_index)` of the pronoun this entity replaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_from: Option<(usize, usize)>,
    pub tokens: Vec<EntityToken>,
}

impl CandidateEntity {
    /// Sentence and token where this entity sits in the tree.
    pub fn location(&self) -> (usize, usize) {
        self.resolved_from.unwrap_or((self.sent_index, self.anchor_index))
    }

    pub fn contains(&self, index: usize) -> bool {
        self.span.0 <= index && index <= self.span.1
    }

    pub fn head_token(&self) -> &EntityToken {
        &self.tokens[self.head_index - self.span.0]
    }

    /// Tokens of the span outside the quantifier, with a connecting "of"
    /// dropped.
    pub fn unquantified_tokens(&self) -> &[EntityToken] {
        match self.quantifier_span {
            None => &self.tokens,
            Some((_, q_end)) => {
                let mut rest = &self.tokens[q_end + 1 - self.span.0..];
                if rest.first().is_some_and(|t| t.surface.eq_ignore_ascii_case("of")) {
                    rest = &rest[1..];
                }
                rest
            }
        }
    }

    pub fn quantifier_tokens(&self) -> Option<&[EntityToken]> {
        self.quantifier_span
            .map(|(a, b)| &self.tokens[a - self.span.0..=b - self.span.0])
    }

    fn build(sentence: &ParsedSentence, span: (usize, usize), head: usize, kind: EntityKind) -> Self {
        CandidateEntity {
            post_id: sentence.post_id.clone(),
            sent_index: sentence.sent_index,
            span,
            head_index: head,
            anchor_index: head,
            quantifier_span: None,
            surface: String::new(),
            kind,
            resolved_from: None,
            tokens: Vec::new(),
        }
        .refreshed(sentence)
    }

    fn refreshed(mut self, sentence: &ParsedSentence) -> Self {
        self.surface = sentence.span_text(self.span.0, self.span.1);
        let range = &sentence.tokens[self.span.0 - 1..self.span.1];
        self.tokens = range
            .iter()
            .enumerate()
            .map(|(i, t)| EntityToken::of(t, i.checked_sub(1).map(|j| &range[j])))
            .collect();
        self
    }
}

/// Dependency labels under which a hashtag or mention acts as a nominal.
pub const NOMINAL_DEPRELS: &[&str] = &[
    "nsubj", "nsubjpass", "dobj", "obj", "iobj", "pobj", "conj", "compound", "appos", "attr",
];

/// Modifier labels absorbed into a base noun phrase.
const PHRASE_DEPRELS: &[&str] = &["compound", "amod", "nmod", "flat", "flat:name"];

const QUANTITY_TYPES: &[&str] = &["MONEY", "PERCENT", "QUANTITY", "CARDINAL"];

fn is_candidate_head(t: &ParsedToken) -> bool {
    match t.kind {
        TokenKind::Hashtag | TokenKind::Mention => t.is_nominal_pos() || NOMINAL_DEPRELS.contains(&t.deprel.as_str()),
        TokenKind::Plain => t.is_nominal_pos(),
        _ => false,
    }
}

fn is_nominal_like(t: &ParsedToken) -> bool {
    t.is_nominal_pos() || t.kind.is_tag()
}

fn absorbs(child: &ParsedToken) -> bool {
    if !PHRASE_DEPRELS.contains(&child.deprel.as_str()) {
        return false;
    }
    // nmod only between nominals
    child.deprel != "nmod" || is_nominal_like(child)
}

fn looks_numeric(surface: &str) -> bool {
    let s = surface.trim_start_matches(['$', '€', '£']).trim_end_matches('%');
    !s.is_empty() && s.chars().any(|c| c.is_ascii_digit()) && s.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | ','))
}

/// Quantity token: parser entity label when present, numeric shape otherwise.
pub fn is_quantity(t: &ParsedToken) -> bool {
    match &t.ent_type {
        Some(label) if QUANTITY_TYPES.contains(&label.as_str()) => true,
        Some(_) => false,
        None => t.pos == "NUM" || t.surface == "%" || looks_numeric(&t.surface),
    }
}

/// Contiguous run around `head` of tokens reachable from it through
/// phrase-internal modifier edges.
fn base_span(sentence: &ParsedSentence, head: usize) -> (usize, usize) {
    let mut members = BTreeSet::from([head]);
    let mut stack = vec![head];
    while let Some(i) = stack.pop() {
        for c in sentence.children(i) {
            if absorbs(c) && members.insert(c.index) {
                stack.push(c.index);
            }
        }
    }
    let mut first = head;
    while first > 1 && members.contains(&(first - 1)) {
        first -= 1;
    }
    let mut last = head;
    while members.contains(&(last + 1)) {
        last += 1;
    }
    (first, last)
}

fn kind_of(t: &ParsedToken) -> EntityKind {
    match t.kind {
        TokenKind::Hashtag => EntityKind::Hashtag,
        TokenKind::Mention => EntityKind::Mention,
        _ => EntityKind::Nominal,
    }
}

/// Keeps the longest of overlapping candidates; equal lengths go to the
/// earlier span. Output is sorted by span.
fn resolve_overlaps(mut candidates: Vec<CandidateEntity>) -> Vec<CandidateEntity> {
    candidates.sort_by(|a, b| {
        let la = a.span.1 - a.span.0;
        let lb = b.span.1 - b.span.0;
        lb.cmp(&la).then(a.span.cmp(&b.span))
    });
    let mut kept: Vec<CandidateEntity> = Vec::new();
    for c in candidates {
        if kept.iter().all(|k| c.span.1 < k.span.0 || k.span.1 < c.span.0) {
            kept.push(c);
        }
    }
    kept.sort_by_key(|c| c.span);
    kept
}

/// Base noun phrases: every nominal head with its contiguous compound, amod
/// and nominal nmod dependents. Heads inside a longer phrase are dropped.
pub fn extract_noun_phrases(sentence: &ParsedSentence) -> Vec<CandidateEntity> {
    let candidates = sentence
        .tokens
        .iter()
        .filter(|t| is_candidate_head(t))
        .map(|t| CandidateEntity::build(sentence, base_span(sentence, t.index), t.index, kind_of(t)))
        .collect();
    resolve_overlaps(candidates)
}

fn of_object(sentence: &ParsedSentence, index: usize) -> Option<(usize, usize)> {
    let prep = sentence
        .children(index)
        .find(|c| c.deprel == "prep" && c.lemma.eq_ignore_ascii_case("of") && c.index > index)?;
    let pobj = sentence
        .children(prep.index)
        .find(|c| c.deprel == "pobj" && is_candidate_head(c))?;
    Some((prep.index, pobj.index))
}

/// Contiguous token range of the quantity rooted at `q`, leaving out the
/// subtrees listed in `exclude` and determiners.
fn quantity_range(sentence: &ParsedSentence, q: usize, exclude: &[usize]) -> Option<(usize, usize)> {
    let mut members = BTreeSet::from([q]);
    let mut stack = vec![q];
    while let Some(i) = stack.pop() {
        for c in sentence.children(i) {
            if exclude.contains(&c.index) || c.deprel == "det" || c.deprel == "punct" {
                continue;
            }
            if members.insert(c.index) {
                stack.push(c.index);
            }
        }
    }
    let first = *members.first()?;
    let last = *members.last()?;
    (last - first + 1 == members.len()).then_some((first, last))
}

/// Records a quantity expression governing or modifying the phrase.
///
/// A quantity head with an "of" complement ("Less than 15% of the #banks") is
/// re-headed onto the complement; its anchor stays on the quantity token. A
/// numeric `nummod` before the head ("15 banks") becomes a quantifier prefix.
pub fn attach_quantity_modifiers(entity: CandidateEntity, sentence: &ParsedSentence) -> CandidateEntity {
    if entity.quantifier_span.is_some() || entity.resolved_from.is_some() {
        return entity;
    }
    let head = sentence.token(entity.head_index);
    if is_quantity(head) || head.surface == "%" {
        if let Some((prep, pobj)) = of_object(sentence, head.index) {
            let rest = base_span(sentence, pobj);
            if let Some(q) = quantity_range(sentence, head.index, &[prep]) {
                if q.1 < prep {
                    let pobj_token = sentence.token(pobj);
                    return CandidateEntity {
                        span: (q.0, rest.1),
                        head_index: pobj,
                        anchor_index: head.index,
                        quantifier_span: Some(q),
                        kind: kind_of(pobj_token),
                        ..entity
                    }
                    .refreshed(sentence);
                }
            }
        }
        return entity;
    }
    let nummod = sentence
        .children(entity.head_index)
        .find(|c| c.deprel == "nummod" && c.index < entity.span.0 && is_quantity(c));
    if let Some(n) = nummod {
        if let Some(q) = quantity_range(sentence, n.index, &[]) {
            let adjacent = q.1 + 1 == entity.span.0
                || (q.1 < entity.span.0
                    && (q.1 + 1..entity.span.0).all(|i| sentence.token(i).head == entity.head_index));
            if adjacent {
                return CandidateEntity {
                    span: (q.0, entity.span.1),
                    quantifier_span: Some(q),
                    ..entity
                }
                .refreshed(sentence);
            }
        }
    }
    entity
}

/// Adds the first prepositional attachment directly following the phrase:
/// the `prep` token plus the base phrase of its `pobj`. The attached phrase's
/// own prepositions are not followed.
pub fn expand_with_preps(entity: CandidateEntity, sentence: &ParsedSentence) -> CandidateEntity {
    if entity.head_index != entity.anchor_index || entity.resolved_from.is_some() {
        return entity;
    }
    let Some(prep) = sentence
        .children(entity.head_index)
        .find(|c| c.deprel == "prep" && c.index == entity.span.1 + 1)
    else {
        return entity;
    };
    let Some(pobj) = sentence.children(prep.index).find(|c| c.deprel == "pobj" && is_nominal_like(c)) else {
        return entity;
    };
    let attached = base_span(sentence, pobj.index);
    // the gap between the preposition and the object phrase must belong to the object
    let gap_ok = (prep.index + 1..attached.0).all(|i| sentence.dominates(pobj.index, i));
    if attached.0 <= prep.index || !gap_ok {
        return entity;
    }
    CandidateEntity {
        span: (entity.span.0, attached.1),
        ..entity
    }
    .refreshed(sentence)
}

/// Entity candidates of one sentence, overlap-resolved and sorted by span.
pub fn extract_entities(sentence: &ParsedSentence) -> Vec<CandidateEntity> {
    let expanded = extract_noun_phrases(sentence)
        .into_iter()
        .map(|e| attach_quantity_modifiers(e, sentence))
        .map(|e| expand_with_preps(e, sentence))
        .collect();
    resolve_overlaps(expanded)
}

fn is_pronoun(t: &ParsedToken) -> bool {
    t.pos == "PRON" || (t.pos == "DET" && t.deprel == "poss")
}

/// Adds one anaphora entity per pronoun mention of each chain whose
/// antecedent lies inside an extracted entity. The new entity copies the
/// antecedent entity's span and tokens and records the pronoun position in
/// `resolved_from`. Chains with no matching antecedent entity are skipped.
pub fn resolve_anaphora(
    entities: Vec<CandidateEntity>,
    chains: &[CorefChain],
    sentences: &[ParsedSentence],
) -> Vec<CandidateEntity> {
    let mut out = entities;
    let mut added = Vec::new();
    for chain in chains {
        let (a_sent, a_tok) = chain.antecedent;
        let antecedent = out
            .iter()
            .filter(|e| e.resolved_from.is_none() && e.sent_index == a_sent && e.contains(a_tok))
            .min_by_key(|e| (e.head_index != a_tok, e.span.1 - e.span.0));
        let Some(antecedent) = antecedent else {
            log::debug!("post {}: antecedent {:?} has no entity, chain skipped", chain.post_id, chain.antecedent);
            continue;
        };
        for &(sent, tok) in &chain.mentions {
            if (sent, tok) == chain.antecedent {
                continue;
            }
            let Some(token) = sentences.iter().find(|s| s.sent_index == sent).and_then(|s| s.get(tok)) else {
                continue;
            };
            if !is_pronoun(token) {
                continue;
            }
            added.push(CandidateEntity {
                kind: EntityKind::Anaphora,
                resolved_from: Some((sent, tok)),
                ..antecedent.clone()
            });
        }
    }
    out.extend(added);
    out
}
