//! Corpus loading: posts, dependency parses, coreference sidecars and word
//! vectors, plus near-duplicate removal over normalized post text.

mod conllu;
mod coref;
mod dedup;
mod posts;
mod vectors;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use conllu::{load_conllu, parse_conllu, write_conllu};
pub use coref::{load_coref, parse_coref, CorefChain};
pub use dedup::{dedup_corpus, levenshtein_distance, levenshtein_similarity, DEFAULT_DEDUP_THRESHOLD};
pub use posts::{load_posts, parse_posts, RawPost};
pub use vectors::{load_word_vectors, parse_word_vectors, WordVectorTable};

/// Parsed sentences of a corpus, grouped per post id.
pub type ParsedCorpus = BTreeMap<String, Vec<ParsedSentence>>;

/// Platform-level kind assigned to a token by the upstream tokenizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Plain,
    Hashtag,
    Mention,
    Url,
    Emoticon,
    Reserved,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Plain => "plain",
            TokenKind::Hashtag => "hashtag",
            TokenKind::Mention => "mention",
            TokenKind::Url => "url",
            TokenKind::Emoticon => "emoticon",
            TokenKind::Reserved => "reserved",
        }
    }

    /// Hashtags and mentions.
    pub fn is_tag(self) -> bool {
        matches!(self, TokenKind::Hashtag | TokenKind::Mention)
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TokenKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(TokenKind::Plain),
            "hashtag" => Ok(TokenKind::Hashtag),
            "mention" => Ok(TokenKind::Mention),
            "url" => Ok(TokenKind::Url),
            "emoticon" => Ok(TokenKind::Emoticon),
            "reserved" => Ok(TokenKind::Reserved),
            other => Err(format!("unknown token type `{other}`")),
        }
    }
}

/// One token of a dependency-parsed sentence.
///
/// `start_char`/`end_char` are character (not byte) offsets into the text the
/// sentence was parsed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedToken {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub head: usize,
    pub deprel: String,
    pub start_char: usize,
    pub end_char: usize,
    pub kind: TokenKind,
    /// Entity label assigned by the upstream parser (`EntType` in MISC).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ent_type: Option<String>,
}

impl ParsedToken {
    pub fn is_verbal(&self) -> bool {
        matches!(self.pos.as_str(), "VERB" | "AUX")
    }

    pub fn is_nominal_pos(&self) -> bool {
        matches!(self.pos.as_str(), "NOUN" | "PROPN")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedSentence {
    pub post_id: String,
    pub sent_index: usize,
    pub tokens: Vec<ParsedToken>,
}

impl ParsedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token by its 1-based index.
    pub fn token(&self, index: usize) -> &ParsedToken {
        &self.tokens[index - 1]
    }

    pub fn get(&self, index: usize) -> Option<&ParsedToken> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Dependents of `index`, in sentence order.
    pub fn children(&self, index: usize) -> impl Iterator<Item = &ParsedToken> + '_ {
        self.tokens.iter().filter(move |t| t.head == index)
    }

    pub fn root(&self) -> Option<usize> {
        self.tokens.iter().find(|t| t.head == 0).map(|t| t.index)
    }

    /// Depth of a token below the root (root has depth 0).
    pub fn depth(&self, index: usize) -> usize {
        let mut depth = 0;
        let mut cur = self.token(index).head;
        while cur != 0 && depth <= self.len() {
            depth += 1;
            cur = self.token(cur).head;
        }
        depth
    }

    /// True when `ancestor` dominates `index` (a token dominates itself).
    pub fn dominates(&self, ancestor: usize, index: usize) -> bool {
        let mut cur = index;
        let mut steps = 0;
        while cur != 0 && steps <= self.len() {
            if cur == ancestor {
                return true;
            }
            cur = self.token(cur).head;
            steps += 1;
        }
        false
    }

    /// Surface text of a token range, reproducing original adjacency: tokens
    /// that touched in the source are joined without a space.
    pub fn span_text(&self, first: usize, last: usize) -> String {
        join_tokens(self.tokens[first - 1..last].iter())
    }

    pub fn text(&self) -> String {
        join_tokens(self.tokens.iter())
    }

    /// Checks the single-root, in-range, acyclic tree invariant and token
    /// index/offset sanity.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.len();
        if n == 0 {
            return Err("sentence has no tokens".into());
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(format!("token {} has index {}", i + 1, t.index));
            }
            if t.head > n {
                return Err(format!("token {} has head {} outside sentence", t.index, t.head));
            }
            if t.head == t.index {
                return Err(format!("token {} is its own head (cycle)", t.index));
            }
            if t.start_char >= t.end_char {
                return Err(format!(
                    "token {} has empty character range {}..{}",
                    t.index, t.start_char, t.end_char
                ));
            }
        }
        let roots = self.tokens.iter().filter(|t| t.head == 0).count();
        if roots != 1 {
            return Err(format!("expected exactly one root, found {roots}"));
        }
        for t in &self.tokens {
            let mut cur = t.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > n {
                    return Err(format!("cycle through token {}", t.index));
                }
                cur = self.token(cur).head;
            }
        }
        Ok(())
    }

    /// Keeps the tokens for which `keep` holds, renumbering them. Dependents of
    /// a removed token are re-attached to its nearest surviving ancestor; if
    /// the root is removed, its first surviving dependent (in sentence order)
    /// becomes the root.
    pub fn retain(&self, keep: impl Fn(&ParsedToken) -> bool) -> ParsedSentence {
        let kept: Vec<bool> = self.tokens.iter().map(&keep).collect();
        let mut new_index = vec![0usize; self.len() + 1];
        let mut next = 0;
        for (i, k) in kept.iter().enumerate() {
            if *k {
                next += 1;
                new_index[i + 1] = next;
            }
        }
        let surviving_ancestor = |index: usize| -> usize {
            let mut cur = self.token(index).head;
            let mut steps = 0;
            while cur != 0 && !kept[cur - 1] && steps <= self.len() {
                cur = self.token(cur).head;
                steps += 1;
            }
            if cur != 0 && kept[cur - 1] {
                new_index[cur]
            } else {
                0
            }
        };
        let mut tokens: Vec<ParsedToken> = self
            .tokens
            .iter()
            .filter(|t| kept[t.index - 1])
            .map(|t| {
                let mut t2 = t.clone();
                t2.head = surviving_ancestor(t.index);
                t2.index = new_index[t.index];
                t2
            })
            .collect();
        let roots: Vec<usize> = tokens.iter().filter(|t| t.head == 0).map(|t| t.index).collect();
        if roots.len() > 1 {
            let root = roots[0];
            for t in tokens.iter_mut() {
                if t.head == 0 && t.index != root {
                    t.head = root;
                }
            }
        }
        ParsedSentence {
            post_id: self.post_id.clone(),
            sent_index: self.sent_index,
            tokens,
        }
    }
}

fn join_tokens<'a>(tokens: impl Iterator<Item = &'a ParsedToken>) -> String {
    let mut out = String::new();
    let mut prev_end: Option<usize> = None;
    for t in tokens {
        if let Some(end) = prev_end {
            if end != t.start_char {
                out.push(' ');
            }
        }
        out.push_str(&t.surface);
        prev_end = Some(t.end_char);
    }
    out
}


#[cfg(test)]
mod tests {
    use super::test_support::sentence;
    use super::TokenKind::*;

    #[test]
    fn retain_reattaches_orphans() {
        let s = sentence(
            "p",
            &[
                ("AI", "AI", "PROPN", 2, "nsubj", Plain),
                ("wins", "win", "VERB", 0, "ROOT", Plain),
                ("http://x", "http://x", "X", 2, "dep", Url),
                (":)", ":)", "PUNCT", 3, "punct", Emoticon),
            ],
        );
        let r = s.retain(|t| t.kind != Url);
        assert_eq!(r.len(), 3);
        assert_eq!(r.token(3).surface, ":)");
        assert_eq!(r.token(3).head, 2);
        assert!(r.validate().is_ok());
    }

    #[test]
    fn retain_promotes_new_root() {
        let s = sentence(
            "p",
            &[
                ("a", "a", "NOUN", 2, "nsubj", Plain),
                ("b", "b", "VERB", 0, "ROOT", Plain),
                ("c", "c", "NOUN", 2, "dobj", Plain),
            ],
        );
        let r = s.retain(|t| t.index != 2);
        assert_eq!(r.root(), Some(1));
        assert_eq!(r.token(2).head, 1);
        assert!(r.validate().is_ok());
    }

    #[test]
    fn span_text_keeps_adjacency() {
        let mut s = sentence(
            "p",
            &[
                ("15", "15", "NUM", 2, "nummod", Plain),
                ("%", "%", "NOUN", 0, "ROOT", Plain),
            ],
        );
        s.tokens[1].start_char = 2;
        s.tokens[1].end_char = 3;
        assert_eq!(s.span_text(1, 2), "15%");
    }
}
