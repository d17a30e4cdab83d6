//! Post normalization: removal of non-syntactic tokens (emoticons, reserved
//! tokens, URLs) followed by three token-pattern heuristics that target
//! constructs known to derail dependency parsing of tweets.
//!
//! The rules run per sentence in a fixed order: strip, leading mention run,
//! tag sequences, title prefix. The cycle repeats until nothing more is
//! removed, so normalizing a normalized post is a no-op.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus_io::{ParsedSentence, ParsedToken, RawPost, TokenKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Emoticon,
    Reserved,
    Url,
    LeadingMentions,
    TagSequence,
    TitlePrefix,
}

impl RemovalReason {
    pub const ALL: [RemovalReason; 6] = [
        RemovalReason::Emoticon,
        RemovalReason::Reserved,
        RemovalReason::Url,
        RemovalReason::LeadingMentions,
        RemovalReason::TagSequence,
        RemovalReason::TitlePrefix,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RemovalReason::Emoticon => "emoticon",
            RemovalReason::Reserved => "reserved",
            RemovalReason::Url => "url",
            RemovalReason::LeadingMentions => "leading_mentions",
            RemovalReason::TagSequence => "tag_sequence",
            RemovalReason::TitlePrefix => "title_prefix",
        }
    }
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A character range of the original post text removed for one reason.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(usize, usize, RemovalReason)", into = "(usize, usize, RemovalReason)")]
pub struct RemovedSpan {
    pub start_char: usize,
    pub end_char: usize,
    pub reason: RemovalReason,
}

impl From<(usize, usize, RemovalReason)> for RemovedSpan {
    fn from((start_char, end_char, reason): (usize, usize, RemovalReason)) -> Self {
        RemovedSpan {
            start_char,
            end_char,
            reason,
        }
    }
}

impl From<RemovedSpan> for (usize, usize, RemovalReason) {
    fn from(s: RemovedSpan) -> Self {
        (s.start_char, s.end_char, s.reason)
    }
}

/// Stage output record, one per retained post.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedPost {
    #[serde(rename = "id")]
    pub post_id: String,
    pub normalized_text: String,
    #[serde(rename = "removed")]
    pub removed_spans: Vec<RemovedSpan>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    /// Surfaces of reserved tokens that count as retweet markers in a leading
    /// mention run.
    pub retweet_markers: Vec<String>,
    /// Longest verb-free prefix removed when it ends with a colon.
    pub title_max_len: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            retweet_markers: vec!["RT".into(), "rt".into()],
            title_max_len: 6,
        }
    }
}

const ASCII_EMOTICONS: &[&str] = &[
    ":)", ":-)", ":(", ":-(", ";)", ";-)", ":D", ":-D", ":P", ":-P", ":p", ":-p", ":O", ":o", ":/", ":-/", ":'(",
    ":'-(", ":|", ":-|", ";D", ":]", ":[", ":3", "=)", "=(", "=D", "XD", "xD", "<3", "</3", "^_^", "^^", "-_-", "o_O",
    "O_o", ":*", ":-*", "B)", "8)",
];

fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1FAFF | 0x2600..=0x27BF | 0x1F000..=0x1F2FF | 0xFE0F | 0x200D)
}

/// Emoticon check: the tokenizer's `TokenType`, with a fallback for common
/// ASCII emoticons and emoji characters left as plain tokens.
pub fn is_emoticon(token: &ParsedToken) -> bool {
    match token.kind {
        TokenKind::Emoticon => true,
        TokenKind::Plain => {
            ASCII_EMOTICONS.contains(&token.surface.as_str())
                || (!token.surface.is_empty() && token.surface.chars().all(is_emoji))
        }
        _ => false,
    }
}

fn nonsyntactic_reason(token: &ParsedToken) -> Option<RemovalReason> {
    match token.kind {
        TokenKind::Url => Some(RemovalReason::Url),
        TokenKind::Reserved => Some(RemovalReason::Reserved),
        _ if is_emoticon(token) => Some(RemovalReason::Emoticon),
        _ => None,
    }
}

fn is_sentence_closer(token: &ParsedToken) -> bool {
    matches!(token.surface.as_str(), "!" | ":" | "?" | ".")
}

// Each rule returns the positions (into `tokens`) it removes.

fn leading_mention_drops(tokens: &[&ParsedToken], config: &PreprocessConfig) -> Vec<usize> {
    let is_marker = |t: &ParsedToken| {
        t.kind == TokenKind::Mention
            || (t.kind == TokenKind::Reserved && config.retweet_markers.contains(&t.surface))
    };
    let n = tokens.iter().take_while(|t| is_marker(t)).count();
    let followed_by_verb = tokens.get(n).is_some_and(|t| t.is_verbal());
    if n > 1 || (n == 1 && !followed_by_verb) {
        (0..n).collect()
    } else {
        Vec::new()
    }
}

fn tag_sequence_drops(tokens: &[&ParsedToken], preceding: Option<&ParsedToken>) -> Vec<usize> {
    let is_tag = |t: &ParsedToken| matches!(t.kind, TokenKind::Hashtag | TokenKind::Mention | TokenKind::Url);
    let mut drops = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !is_tag(tokens[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < tokens.len() && is_tag(tokens[i]) {
            i += 1;
        }
        if i - start > 1 {
            let before = if start == 0 { preceding } else { Some(tokens[start - 1]) };
            let first_dropped = if before.is_some_and(is_sentence_closer) { start } else { start + 1 };
            drops.extend(first_dropped..i);
        }
    }
    drops
}

fn title_prefix_drops(tokens: &[&ParsedToken], max_len: usize) -> Vec<usize> {
    let limit = tokens.len().min(max_len + 1);
    for (pos, t) in tokens[..limit].iter().enumerate() {
        if t.is_verbal() {
            return Vec::new();
        }
        if t.surface == ":" {
            return if pos >= 1 { (0..=pos).collect() } else { Vec::new() };
        }
    }
    Vec::new()
}

fn keep_positions(sentence: &ParsedSentence, drops: &[usize]) -> ParsedSentence {
    sentence.retain(|t| !drops.contains(&(t.index - 1)))
}

/// Removes emoticons, reserved tokens and URLs; hashtags and mentions stay.
pub fn strip_nonsyntactic(sentence: &ParsedSentence) -> ParsedSentence {
    sentence.retain(|t| nonsyntactic_reason(t).is_none())
}

/// Removes a leading run of mentions/retweet markers when it is longer than
/// one token or not followed by a verb.
pub fn drop_leading_mentions(sentence: &ParsedSentence) -> ParsedSentence {
    let tokens: Vec<&ParsedToken> = sentence.tokens.iter().collect();
    keep_positions(sentence, &leading_mention_drops(&tokens, &PreprocessConfig::default()))
}

/// Keeps only the first element of every run of two or more
/// hashtags/mentions/URLs, or the whole run when it directly follows one of
/// `! : ? .`.
pub fn truncate_tag_sequences(sentence: &ParsedSentence) -> ParsedSentence {
    let tokens: Vec<&ParsedToken> = sentence.tokens.iter().collect();
    keep_positions(sentence, &tag_sequence_drops(&tokens, None))
}

/// Removes a leading, verb-free sequence of at most `max_len` tokens ended by
/// a colon, colon included.
pub fn drop_title_prefix(sentence: &ParsedSentence, max_len: usize) -> ParsedSentence {
    let tokens: Vec<&ParsedToken> = sentence.tokens.iter().collect();
    keep_positions(sentence, &title_prefix_drops(&tokens, max_len))
}

/// Normalizes a post from its first-pass parse and reconstructs the text of
/// the surviving tokens.
pub fn normalize_post(post: &RawPost, first_pass: &[ParsedSentence], config: &PreprocessConfig) -> Result<NormalizedPost> {
    let chars: Vec<char> = post.text.chars().collect();
    for s in first_pass {
        for t in &s.tokens {
            let matches = t.end_char <= chars.len()
                && t.start_char < t.end_char
                && chars[t.start_char..t.end_char].iter().copied().eq(t.surface.chars());
            if !matches {
                return Err(Error::OffsetMismatch {
                    post_id: post.id.clone(),
                    message: format!(
                        "sentence {} token {} `{}` does not match text at {}..{}",
                        s.sent_index, t.index, t.surface, t.start_char, t.end_char
                    ),
                });
            }
        }
    }

    // (token, removal reason) in post order
    let mut outcome: Vec<(&ParsedToken, Option<RemovalReason>)> = Vec::new();
    let mut last_survivor: Option<&ParsedToken> = None;
    for s in first_pass {
        let mut reasons: Vec<Option<RemovalReason>> = s.tokens.iter().map(nonsyntactic_reason).collect();
        loop {
            let alive: Vec<usize> = (0..s.tokens.len()).filter(|&i| reasons[i].is_none()).collect();
            let view: Vec<&ParsedToken> = alive.iter().map(|&i| &s.tokens[i]).collect();
            let mut changed = false;
            let mut apply = |drops: Vec<usize>, reason: RemovalReason, reasons: &mut Vec<Option<RemovalReason>>| {
                for d in drops {
                    reasons[alive[d]] = Some(reason);
                    changed = true;
                }
            };
            let drops = leading_mention_drops(&view, config);
            if !drops.is_empty() {
                apply(drops, RemovalReason::LeadingMentions, &mut reasons);
                continue;
            }
            let drops = tag_sequence_drops(&view, last_survivor);
            if !drops.is_empty() {
                apply(drops, RemovalReason::TagSequence, &mut reasons);
                continue;
            }
            let drops = title_prefix_drops(&view, config.title_max_len);
            apply(drops, RemovalReason::TitlePrefix, &mut reasons);
            if !changed {
                break;
            }
        }
        for (t, r) in s.tokens.iter().zip(reasons) {
            if r.is_none() {
                last_survivor = Some(t);
            }
            outcome.push((t, r));
        }
    }

    let mut text = String::new();
    let mut prev_end: Option<usize> = None;
    let mut removed_spans: Vec<RemovedSpan> = Vec::new();
    let mut open_span = false;
    for (t, reason) in outcome {
        match reason {
            None => {
                if let Some(end) = prev_end {
                    if end != t.start_char {
                        text.push(' ');
                    }
                }
                text.push_str(&t.surface);
                prev_end = Some(t.end_char);
                open_span = false;
            }
            Some(r) => {
                match removed_spans.last_mut() {
                    Some(last) if open_span && last.reason == r => last.end_char = t.end_char,
                    _ => removed_spans.push(RemovedSpan {
                        start_char: t.start_char,
                        end_char: t.end_char,
                        reason: r,
                    }),
                }
                open_span = true;
            }
        }
    }
    Ok(NormalizedPost {
        post_id: post.id.clone(),
        normalized_text: text,
        removed_spans,
    })
}
