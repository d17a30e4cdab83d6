use std::fmt::Write as _;
use std::path::Path;

use super::{ParsedCorpus, ParsedSentence, ParsedToken, TokenKind};
use crate::error::{Error, Result};

/// Loads a CoNLL-U file whose sentence blocks carry `# post_id = …` comments
/// and `StartChar`/`EndChar`/`TokenType` MISC features.
///
/// Sentences are grouped per post and ordered by `# sent_index` when present,
/// otherwise by their position in the file. Every tree is validated.
pub fn load_conllu(path: impl AsRef<Path>) -> Result<ParsedCorpus> {
    let path = path.as_ref();
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(&content, path)
}

struct Block {
    first_line: usize,
    post_id: Option<String>,
    sent_index: Option<usize>,
    tokens: Vec<ParsedToken>,
}

pub fn parse_conllu(content: &str, origin: &Path) -> Result<ParsedCorpus> {
    let mut blocks = Vec::new();
    let mut current: Option<Block> = None;

    for (i, raw) in content.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if let Some(b) = current.take() {
                blocks.push(b);
            }
            continue;
        }
        let block = current.get_or_insert_with(|| Block {
            first_line: line_no,
            post_id: None,
            sent_index: None,
            tokens: Vec::new(),
        });
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "post_id" => block.post_id = Some(value.trim().to_string()),
                    "sent_index" => {
                        let idx = value
                            .trim()
                            .parse()
                            .map_err(|_| Error::parse(origin, line_no, format!("bad sent_index `{}`", value.trim())))?;
                        block.sent_index = Some(idx);
                    }
                    _ => {}
                }
            }
            continue;
        }
        if let Some(token) = parse_token_line(line, origin, line_no)? {
            block.tokens.push(token);
        }
    }
    if let Some(b) = current.take() {
        blocks.push(b);
    }

    let mut corpus = ParsedCorpus::new();
    for block in blocks {
        if block.tokens.is_empty() {
            // comment-only block, e.g. a file-level provenance header
            continue;
        }
        let post_id = block
            .post_id
            .ok_or_else(|| Error::parse(origin, block.first_line, "sentence block without `# post_id` comment"))?;
        let sentences = corpus.entry(post_id.clone()).or_default();
        let sent_index = block.sent_index.unwrap_or(sentences.len());
        let sentence = ParsedSentence {
            post_id: post_id.clone(),
            sent_index,
            tokens: block.tokens,
        };
        sentence.validate().map_err(|message| Error::InvalidTree {
            post_id: post_id.clone(),
            sent_index,
            message: format!("{message} (block at line {})", block.first_line),
        })?;
        sentences.push(sentence);
    }
    for (post_id, sentences) in corpus.iter_mut() {
        sentences.sort_by_key(|s| s.sent_index);
        if sentences.windows(2).any(|w| w[0].sent_index == w[1].sent_index) {
            return Err(Error::InvalidInput(format!(
                "post `{post_id}` has two sentences with the same sent_index"
            )));
        }
    }
    Ok(corpus)
}

fn parse_token_line(line: &str, origin: &Path, line_no: usize) -> Result<Option<ParsedToken>> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(Error::parse(
            origin,
            line_no,
            format!("expected 10 tab-separated columns, found {}", cols.len()),
        ));
    }
    // multiword ranges (1-2) and empty nodes (1.1) carry no tree edges
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let bad = |what: &str, v: &str| Error::parse(origin, line_no, format!("bad {what} `{v}`"));
    let index: usize = cols[0].parse().map_err(|_| bad("ID", cols[0]))?;
    let head: usize = cols[6].parse().map_err(|_| bad("HEAD", cols[6]))?;

    let mut start = None;
    let mut end = None;
    let mut kind = TokenKind::Plain;
    let mut ent_type = None;
    if cols[9] != "_" {
        for feat in cols[9].split('|') {
            let Some((k, v)) = feat.split_once('=') else { continue };
            match k {
                "StartChar" => start = Some(v.parse::<usize>().map_err(|_| bad("StartChar", v))?),
                "EndChar" => end = Some(v.parse::<usize>().map_err(|_| bad("EndChar", v))?),
                "TokenType" => kind = v.parse().map_err(|e: String| Error::parse(origin, line_no, e))?,
                "EntType" => ent_type = Some(v.to_string()),
                _ => {}
            }
        }
    }
    let (Some(start_char), Some(end_char)) = (start, end) else {
        return Err(Error::parse(origin, line_no, "MISC lacks StartChar/EndChar"));
    };
    let lemma = if cols[2] == "_" && cols[1] != "_" { cols[1] } else { cols[2] };
    Ok(Some(ParsedToken {
        index,
        surface: cols[1].to_string(),
        lemma: lemma.to_string(),
        pos: cols[3].to_string(),
        head,
        deprel: cols[7].to_string(),
        start_char,
        end_char,
        kind,
        ent_type,
    }))
}

/// Serializes sentences in the same dialect `load_conllu` reads.
pub fn write_conllu<'a>(sentences: impl IntoIterator<Item = &'a ParsedSentence>) -> String {
    let mut out = String::new();
    for s in sentences {
        let _ = writeln!(out, "# post_id = {}", s.post_id);
        let _ = writeln!(out, "# sent_index = {}", s.sent_index);
        let _ = writeln!(out, "# text = {}", s.text());
        for t in &s.tokens {
            let mut misc = format!("StartChar={}|EndChar={}|TokenType={}", t.start_char, t.end_char, t.kind);
            if let Some(ent) = &t.ent_type {
                let _ = write!(misc, "|EntType={ent}");
            }
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t{}",
                t.index, t.surface, t.lemma, t.pos, t.head, t.deprel, misc
            );
        }
        out.push('\n');
    }
    out
}
