use crate::corpus_io::TokenKind;
use crate::entity_extract::{join_entity_tokens, CandidateEntity, EntityKind, EntityToken};

use super::lexicon::{britishize, is_stopword};

fn is_punct_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace() && c != '#' && c != '@'
}

fn is_punct_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| !c.is_alphanumeric())
}

/// Strips leading/trailing punctuation, removes stopword tokens and collapses
/// whitespace, repeated until stable. `None` when nothing is left.
pub fn clean_entity(surface: &str, stopwords: impl Fn(&str) -> bool) -> Option<String> {
    let mut current = surface.to_string();
    loop {
        let trimmed = current.trim_matches(|c: char| is_punct_char(c) || c.is_whitespace());
        let words: Vec<&str> = trimmed
            .split_whitespace()
            .filter(|w| !is_punct_token(w) && !stopwords(&w.to_lowercase()))
            .collect();
        let out = words.join(" ");
        let out = out.trim_matches(is_punct_char).to_string();
        if out.is_empty() {
            return None;
        }
        // trimming can expose a stopword ("a 'a" -> "a")
        if out == current {
            return Some(out);
        }
        current = out;
    }
}

/// [`clean_entity`] with the bundled stopword list.
pub fn clean_entity_default(surface: &str) -> Option<String> {
    clean_entity(surface, is_stopword)
}

fn split_camel(part: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = part.chars().collect();
    let mut word = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if i > 0 && !word.is_empty() {
            let prev = chars[i - 1];
            let next = chars.get(i + 1).copied();
            let boundary = (prev.is_lowercase() && c.is_uppercase())
                || (prev.is_uppercase() && c.is_uppercase() && next.is_some_and(|n| n.is_lowercase()))
                || (prev.is_alphabetic() && c.is_ascii_digit())
                || (prev.is_ascii_digit() && c.is_alphabetic());
            if boundary {
                out.push(std::mem::take(&mut word));
            }
        }
        word.push(c);
    }
    if !word.is_empty() {
        out.push(word);
    }
}

/// Tag words: sigil removed, split at underscores, hyphens, whitespace,
/// lower→upper and letter↔digit transitions (acronyms stay whole), lowercased.
pub fn tag_words(surface: &str) -> Vec<String> {
    let body = surface.trim_start_matches(['#', '@']);
    let mut words = Vec::new();
    for part in body.split(|c: char| c == '_' || c == '-' || c.is_whitespace()) {
        let part = part.trim_matches(|c: char| !c.is_alphanumeric());
        if part.is_empty() {
            continue;
        }
        split_camel(part, &mut words);
    }
    words.into_iter().map(|w| w.to_lowercase()).collect()
}

/// "#SmartCities" → "smart cities", "@Gartner_inc" → "gartner inc".
pub fn normalize_tag(surface: &str) -> String {
    tag_words(surface).join(" ")
}

/// Word form of one non-tag token: lowercased lemma, or lowercased surface
/// for verbs and proper nouns, then the British spelling.
pub fn normalize_nominal_token(surface: &str, lemma: &str, pos: &str) -> String {
    let base = if matches!(pos, "VERB" | "PROPN") || lemma.is_empty() {
        surface.to_lowercase()
    } else {
        lemma.to_lowercase()
    };
    base.split(' ').map(britishize).collect::<Vec<_>>().join(" ")
}

/// Word-by-word nominal normalization of a phrase.
pub fn normalize_nominal(entity: &CandidateEntity) -> String {
    entity
        .tokens
        .iter()
        .map(|t| normalize_nominal_token(&t.surface, &t.lemma, &t.pos))
        .collect::<Vec<_>>()
        .join(" ")
}

fn token_form(t: &EntityToken) -> String {
    if t.kind.is_tag() {
        let words = tag_words(&t.surface);
        if words.len() == 1 && t.pos == "NOUN" {
            // single-word hashtags inflect like nouns ("#banks")
            let lemma_words = tag_words(&t.lemma);
            if lemma_words.len() == 1 {
                return britishize(&lemma_words[0]);
            }
        }
        words.iter().map(|w| britishize(w)).collect::<Vec<_>>().join(" ")
    } else {
        normalize_nominal_token(&t.surface, &t.lemma, &t.pos)
    }
}

fn keeps(t: &EntityToken) -> bool {
    if matches!(t.kind, TokenKind::Url | TokenKind::Emoticon | TokenKind::Reserved) {
        return false;
    }
    if t.pos == "PUNCT" || is_punct_token(&t.surface) {
        return false;
    }
    t.kind.is_tag() || matches!(t.pos.as_str(), "NOUN" | "PROPN") || !is_stopword(&t.surface.to_lowercase())
}

/// Unmerged canonical key of an entity, quantifier excluded.
pub fn entity_key(entity: &CandidateEntity) -> Option<String> {
    let words: Vec<String> = entity
        .unquantified_tokens()
        .iter()
        .filter(|t| keeps(t))
        .map(token_form)
        .filter(|w| !w.is_empty())
        .collect();
    let joined = words.join(" ").replace(['#', '@'], "");
    let key = joined
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .trim_matches(is_punct_char)
        .to_string();
    (!key.is_empty()).then_some(key)
}

/// Normalized form of the lexical head; for multi-word tags, the last word.
pub fn head_form(entity: &CandidateEntity) -> String {
    let form = token_form(entity.head_token());
    form.rsplit(' ').next().unwrap_or("").replace(['#', '@'], "")
}

/// Lowercased quantifier surface, e.g. "less than 15%".
pub fn quantifier_text(entity: &CandidateEntity) -> Option<String> {
    if entity.kind == EntityKind::Anaphora && entity.quantifier_span.is_none() {
        return None;
    }
    entity.quantifier_tokens().map(|ts| {
        let mut ts = ts.to_vec();
        if let Some(first) = ts.first_mut() {
            first.glued = false;
        }
        join_entity_tokens(&ts).to_lowercase()
    })
}

/// True when `key` satisfies the canonical-key shape: non-empty, lowercase,
/// no sigils, no leading/trailing punctuation.
pub fn is_valid_key(key: &str) -> bool {
    !key.is_empty()
        && key == key.to_lowercase()
        && !key.contains(['#', '@'])
        && !key.starts_with(|c: char| is_punct_char(c) || c.is_whitespace())
        && !key.ends_with(|c: char| is_punct_char(c) || c.is_whitespace())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_examples() {
        assert_eq!(clean_entity_default("the digital transformation,").as_deref(), Some("digital transformation"));
        assert_eq!(clean_entity_default("AI").as_deref(), Some("AI"));
        assert_eq!(clean_entity_default(","), None);
        assert_eq!(clean_entity_default("  big   data ").as_deref(), Some("big data"));
        assert_eq!(clean_entity_default("a 'a"), None);
    }

    #[test]
    fn tag_examples() {
        assert_eq!(normalize_tag("#SmartCities"), "smart cities");
        assert_eq!(normalize_tag("@Gartner_inc"), "gartner inc");
        assert_eq!(normalize_tag("#ai"), "ai");
        assert_eq!(normalize_tag("#AI"), "ai");
        assert_eq!(normalize_tag("#AIRevolution"), "ai revolution");
        assert_eq!(normalize_tag("#COVID19"), "covid 19");
        assert_eq!(normalize_tag("#digitaltransformation"), "digitaltransformation");
    }

    #[test]
    fn nominal_examples() {
        assert_eq!(normalize_nominal_token("organizations", "organization", "NOUN"), "organisation");
        assert_eq!(normalize_nominal_token("Gartner", "Gartner", "PROPN"), "gartner");
        assert_eq!(normalize_nominal_token("transformation", "transformation", "NOUN"), "transformation");
        assert_eq!(normalize_nominal_token("guided", "guide", "VERB"), "guided");
    }

    #[test]
    fn key_shape_check() {
        assert!(is_valid_key("digital transformation"));
        assert!(!is_valid_key("AI"));
        assert!(!is_valid_key("#ai"));
        assert!(!is_valid_key("ai,"));
        assert!(!is_valid_key(""));
    }
}
