use std::collections::HashMap;

use super::RawPost;

pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.85;

/// Edit distance over Unicode scalar values (unit-cost insert/delete/substitute).
pub fn levenshtein_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - dist(a, b) / max(|a|, |b|)`, with lengths in characters; 1 when both
/// strings are empty.
pub fn levenshtein_similarity(a: &str, b: &str) -> f64 {
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein_distance(a, b) as f64 / longest as f64
}

/// Drops every post whose normalized text is at least `threshold` similar to
/// the normalized text of an earlier retained post. Posts missing from
/// `normalized_texts` are compared on their raw text.
pub fn dedup_corpus(posts: &[RawPost], normalized_texts: &HashMap<String, String>, threshold: f64) -> Vec<RawPost> {
    let mut retained: Vec<(RawPost, &str, usize)> = Vec::new();
    for post in posts {
        let text = normalized_texts.get(&post.id).map(String::as_str).unwrap_or(&post.text);
        let len = text.chars().count();
        let duplicate = retained.iter().any(|(_, other, other_len)| {
            let longest = len.max(*other_len);
            if longest > 0 {
                // similarity can never exceed this bound since dist >= |len diff|
                let bound = 1.0 - len.abs_diff(*other_len) as f64 / longest as f64;
                if bound < threshold {
                    return false;
                }
            }
            levenshtein_similarity(text, other) >= threshold
        });
        if !duplicate {
            retained.push((post.clone(), text, len));
        }
    }
    retained.into_iter().map(|(p, _, _)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(id: &str, text: &str) -> RawPost {
        RawPost {
            id: id.into(),
            text: text.into(),
            created_at: None,
            lang: None,
        }
    }

    #[test]
    fn identity_and_full_deletion() {
        assert_eq!(levenshtein_similarity("abc", "abc"), 1.0);
        assert_eq!(levenshtein_similarity("abc", ""), 0.0);
        assert_eq!(levenshtein_similarity("", ""), 1.0);
    }

    #[test]
    fn kitten_sitting() {
        assert_eq!(levenshtein_distance("kitten", "sitting"), 3);
        assert!((levenshtein_similarity("kitten", "sitting") - (1.0 - 3.0 / 7.0)).abs() < 1e-15);
    }

    #[test]
    fn counts_characters_not_bytes() {
        assert_eq!(levenshtein_distance("café", "cafe"), 1);
        assert_eq!(levenshtein_similarity("é", "e"), 0.0);
    }

    #[test]
    fn identical_texts_second_dropped() {
        let posts = vec![post("1", "same text"), post("2", "same text")];
        let kept = dedup_corpus(&posts, &HashMap::new(), DEFAULT_DEDUP_THRESHOLD);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "1");
    }

    #[test]
    fn distinct_texts_both_kept() {
        let posts = vec![post("1", "digital twins rock"), post("2", "quantum computing update")];
        assert!(levenshtein_similarity("digital twins rock", "quantum computing update") < 0.85);
        assert_eq!(dedup_corpus(&posts, &HashMap::new(), 0.85).len(), 2);
    }

    #[test]
    fn threshold_one_keeps_near_identical() {
        let posts = vec![post("1", "AI is great"), post("2", "AI is great!")];
        assert_eq!(dedup_corpus(&posts, &HashMap::new(), 1.0).len(), 2);
    }

    #[test]
    fn normalized_text_drives_comparison() {
        let posts = vec![post("1", "news http://a.co"), post("2", "news http://b.co/xyz")];
        let norm: HashMap<String, String> = [("1".to_string(), "news".to_string()), ("2".to_string(), "news".to_string())].into();
        assert_eq!(dedup_corpus(&posts, &norm, 0.85).len(), 1);
    }
}
