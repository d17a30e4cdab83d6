use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ParsedSentence;
use crate::error::{Error, Result};

/// A pronominal coreference chain within one post. Positions are
/// `(sent_index, token_index)` with 1-based token indices; the first mention
/// is the antecedent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefChain {
    pub post_id: String,
    pub mentions: Vec<(usize, usize)>,
    pub antecedent: (usize, usize),
}

impl CorefChain {
    pub fn new(post_id: impl Into<String>, mentions: Vec<(usize, usize)>) -> Option<Self> {
        let antecedent = *mentions.first()?;
        Some(CorefChain {
            post_id: post_id.into(),
            mentions,
            antecedent,
        })
    }

    /// Checks every mention against the parsed post.
    pub fn validate(&self, sentences: &[ParsedSentence]) -> Result<(), String> {
        for &(s, t) in &self.mentions {
            let sentence = sentences
                .iter()
                .find(|x| x.sent_index == s)
                .ok_or_else(|| format!("chain mention ({s},{t}) names a missing sentence"))?;
            if t == 0 || t > sentence.len() {
                return Err(format!("chain mention ({s},{t}) names a missing token"));
            }
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct SidecarRecord {
    post_id: String,
    #[serde(default)]
    chains: Vec<Vec<(usize, usize)>>,
}

/// Loads the JSON-lines coreference sidecar:
/// `{"post_id": str, "chains": [[[s,t],[s,t],…], …]}`.
pub fn load_coref(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<CorefChain>>> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_coref(&content, path)
}

pub fn parse_coref(content: &str, origin: &Path) -> Result<BTreeMap<String, Vec<CorefChain>>> {
    let mut out: BTreeMap<String, Vec<CorefChain>> = BTreeMap::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: SidecarRecord = serde_json::from_str(line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        let chains = out.entry(rec.post_id.clone()).or_default();
        for mentions in rec.chains {
            if let Some(chain) = CorefChain::new(rec.post_id.clone(), mentions) {
                chains.push(chain);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_mention_is_antecedent() {
        let m = parse_coref(r#"{"post_id":"7","chains":[[[0,3],[1,1]],[]]}"#, Path::new("c")).unwrap();
        let chains = &m["7"];
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].antecedent, (0, 3));
        assert_eq!(chains[0].mentions, vec![(0, 3), (1, 1)]);
    }

    #[test]
    fn malformed_line_reports_line() {
        let err = parse_coref("\n{bad", Path::new("c")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
