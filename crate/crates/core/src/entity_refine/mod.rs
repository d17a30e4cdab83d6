//! Entity refinement: canonical keys, variant merging and knowledge-base
//! linking.

mod lexicon;
mod linking;
mod normalize;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::entity_extract::CandidateEntity;

pub use lexicon::{britishize, is_stopword, spelling_table, stopwords};
pub use linking::{
    classify_links, link_sentences, parse_annotation_response, rewrite_for_linking, AnnotateError, Annotator,
    EntityLink, LinkKind, LinkSpan, Resource, RewrittenSentence, SpotlightClient, DEFAULT_LINKING_CONFIDENCE,
};
pub use normalize::{
    clean_entity, clean_entity_default, entity_key, head_form, is_valid_key, normalize_nominal,
    normalize_nominal_token, normalize_tag, quantifier_text, tag_words,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedEntity {
    pub key: String,
    pub head_lemma: String,
    /// Quantifiers seen on occurrences of this entity.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub quantifiers: BTreeSet<String>,
    /// `(surface, post_id)` occurrences.
    pub variants: BTreeSet<(String, String)>,
}

/// Entities grouped by canonical key, plus the raw-key → canonical-key map
/// used to resolve individual occurrences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityIndex {
    pub entities: BTreeMap<String, NormalizedEntity>,
    aliases: BTreeMap<String, String>,
}

impl EntityIndex {
    /// Canonical key of an occurrence; `None` when it cleans to nothing.
    pub fn key_of(&self, entity: &CandidateEntity) -> Option<&str> {
        let raw = entity_key(entity)?;
        self.aliases.get(&raw).map(String::as_str)
    }

    pub fn canonical(&self, raw_key: &str) -> Option<&str> {
        self.aliases.get(raw_key).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

fn compact(key: &str) -> String {
    key.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Groups candidates by canonical key. Keys that differ only in spacing
/// ("digitaltransformation" / "digital transformation") merge onto the
/// variant with the most word breaks, ties to the smaller string.
pub fn merge_entities<'a>(entities: impl IntoIterator<Item = &'a CandidateEntity>) -> EntityIndex {
    let keyed: Vec<(&CandidateEntity, String)> = entities
        .into_iter()
        .filter_map(|e| entity_key(e).map(|k| (e, k)))
        .collect();

    let mut best: BTreeMap<String, String> = BTreeMap::new();
    for (_, k) in &keyed {
        let slot = best.entry(compact(k)).or_insert_with(|| k.clone());
        let spaces = |s: &str| s.matches(' ').count();
        if (spaces(k), std::cmp::Reverse(k.as_str())) > (spaces(slot), std::cmp::Reverse(slot.as_str())) {
            *slot = k.clone();
        }
    }
    let aliases: BTreeMap<String, String> = keyed
        .iter()
        .map(|(_, k)| (k.clone(), best[&compact(k)].clone()))
        .collect();

    let mut grouped: BTreeMap<String, NormalizedEntity> = BTreeMap::new();
    for (e, raw) in &keyed {
        let key = aliases[raw].clone();
        let entry = grouped.entry(key.clone()).or_insert_with(|| NormalizedEntity {
            key: key.clone(),
            head_lemma: String::new(),
            quantifiers: BTreeSet::new(),
            variants: BTreeSet::new(),
        });
        entry.variants.insert((e.surface.clone(), e.post_id.clone()));
        if let Some(q) = quantifier_text(e) {
            entry.quantifiers.insert(q);
        }
        let head = head_form(e);
        if entry.head_lemma.is_empty() || (*raw == key && head < entry.head_lemma) {
            entry.head_lemma = head;
        }
    }
    for entry in grouped.values_mut() {
        if entry.head_lemma.is_empty() {
            entry.head_lemma = entry.key.rsplit(' ').next().unwrap_or_default().to_string();
        }
    }
    EntityIndex {
        entities: grouped,
        aliases,
    }
}
