use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A micro-blogging post as collected upstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPost {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

/// Loads a JSON-lines posts file. Blank lines are ignored.
pub fn load_posts(path: impl AsRef<Path>) -> Result<Vec<RawPost>> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_posts(&content, path)
}

pub fn parse_posts(content: &str, origin: &Path) -> Result<Vec<RawPost>> {
    let mut seen = HashSet::new();
    let mut posts = Vec::new();
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let post: RawPost = serde_json::from_str(line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        if post.id.is_empty() {
            return Err(Error::parse(origin, i + 1, "empty post id"));
        }
        if post.text.is_empty() {
            return Err(Error::parse(origin, i + 1, format!("post `{}` has empty text", post.id)));
        }
        if !seen.insert(post.id.clone()) {
            return Err(Error::DuplicatePostId(post.id));
        }
        posts.push(post);
    }
    Ok(posts)
}
