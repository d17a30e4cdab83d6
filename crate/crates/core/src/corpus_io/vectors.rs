use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Static word vectors keyed by token.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordVectorTable {
    dimension: usize,
    entries: HashMap<String, Vec<f32>>,
}

impl WordVectorTable {
    pub fn new(dimension: usize) -> Self {
        WordVectorTable {
            dimension,
            entries: HashMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Inserts a vector; panics if its length differs from the table dimension.
    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f32>) {
        assert_eq!(vector.len(), self.dimension, "vector dimension mismatch");
        self.entries.insert(token.into(), vector);
    }
}

/// Loads a plain-text vector file (`token v1 … vD` per line). The dimension is
/// taken from the first non-blank line.
pub fn load_word_vectors(path: impl AsRef<Path>) -> Result<WordVectorTable> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_word_vectors(&content, path)
}

pub fn parse_word_vectors(content: &str, origin: &Path) -> Result<WordVectorTable> {
    let mut table: Option<WordVectorTable> = None;
    for (i, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().unwrap_or_default();
        let values = fields
            .map(|f| f.parse::<f32>())
            .collect::<Result<Vec<f32>, _>>()
            .map_err(|e| Error::parse(origin, i + 1, format!("bad vector component: {e}")))?;
        if values.is_empty() {
            return Err(Error::parse(origin, i + 1, "line has no vector components"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(origin, i + 1, "non-finite vector component"));
        }
        let t = table.get_or_insert_with(|| WordVectorTable::new(values.len()));
        if values.len() != t.dimension {
            return Err(Error::parse(
                origin,
                i + 1,
                format!("expected {} components, found {}", t.dimension, values.len()),
            ));
        }
        t.entries.insert(token.to_string(), values);
    }
    table.ok_or_else(|| Error::parse(origin, 0, "empty vector file: dimension cannot be determined"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<WordVectorTable> {
        parse_word_vectors(s, Path::new("v.txt"))
    }

    #[test]
    fn single_line_table() {
        let t = parse("the 0.1 0.2\n").unwrap();
        assert_eq!(t.dimension(), 2);
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("the"), Some(&[0.1f32, 0.2][..]));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(parse("").is_err());
    }

    #[test]
    fn arity_mismatch_names_line() {
        let err = parse("a 1 2\nb 1 2 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }
}
