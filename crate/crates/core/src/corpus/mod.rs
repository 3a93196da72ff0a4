//! Corpus ingestion, tokenization, and alias-based mention counting.

mod alias;
mod mentions;
mod tokenize;

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use alias::{AliasEntry, AliasTable, Gender};
pub use mentions::{
    build_character_set, canonical_token, count_mentions, detect_mentions, mention_tokens,
    Mention, MentionTable,
};
pub use tokenize::{normalize_token, token_strings, tokenize, Token};
pub(crate) use mentions::{alias_runs, expect_header};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocKind {
    /// Chapters or stories; the co-occurrence unit is the paragraph.
    Longform,
    /// Posts and comments; the unit is the whole comment, grouped by tree.
    Threaded,
}

impl std::str::FromStr for DocKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "longform" => Ok(DocKind::Longform),
            "threaded" => Ok(DocKind::Threaded),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub source_id: String,
    pub kind: DocKind,
    pub title: Option<String>,
    pub text: String,
    pub tree_id: Option<String>,
    pub parent_id: Option<String>,
}

impl Document {
    pub fn longform(id: &str, source_id: &str, text: &str) -> Self {
        Document {
            id: id.to_string(),
            source_id: source_id.to_string(),
            kind: DocKind::Longform,
            title: None,
            text: text.to_string(),
            tree_id: None,
            parent_id: None,
        }
    }

    pub fn threaded(
        id: &str,
        source_id: &str,
        tree_id: &str,
        parent_id: Option<&str>,
        text: &str,
    ) -> Self {
        Document {
            id: id.to_string(),
            source_id: source_id.to_string(),
            kind: DocKind::Threaded,
            title: None,
            text: text.to_string(),
            tree_id: Some(tree_id.to_string()),
            parent_id: parent_id.map(str::to_string),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            return Err(Error::invalid(format!("document {:?} has empty text", self.id)));
        }
        match self.kind {
            DocKind::Threaded if self.tree_id.is_none() => Err(Error::invalid(format!(
                "threaded document {:?} has no tree_id",
                self.id
            ))),
            DocKind::Longform if self.tree_id.is_some() || self.parent_id.is_some() => {
                Err(Error::invalid(format!(
                    "longform document {:?} carries thread linkage",
                    self.id
                )))
            }
            _ => Ok(()),
        }
    }

    /// Text units used for co-occurrence and embedding training: paragraphs
    /// for long-form documents, the whole comment for threaded ones.
    pub fn units(&self) -> Vec<&str> {
        match self.kind {
            DocKind::Longform => split_paragraphs(&self.text),
            DocKind::Threaded => vec![self.text.as_str()],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CorpusFormat {
    #[default]
    Jsonl,
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    source: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tree_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent_id: Option<String>,
}

/// Read a corpus file, one record per line. Blank lines are ignored.
///
/// Threaded records that carry a title get it prepended to their text,
/// separated by a newline.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file), path),
    }
}

pub fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message,
        };
        let rec: Record = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let kind: DocKind = rec.kind.parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let text = match (&kind, &rec.title) {
            (DocKind::Threaded, Some(title)) if !title.is_empty() => {
                format!("{title}\n{}", rec.text)
            }
            _ => rec.text,
        };
        let doc = Document {
            id: rec.id,
            source_id: rec.source,
            kind,
            title: rec.title,
            text,
            tree_id: rec.tree_id,
            parent_id: rec.parent_id,
        };
        doc.validate().map_err(|e| parse_err(e.to_string()))?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Write documents in the JSONL record format. Threaded titles are not
/// re-prepended, so write the records you want to load, not loaded documents.
pub fn write_jsonl(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    );
    for d in docs {
        let rec = Record {
            id: d.id.clone(),
            source: d.source_id.clone(),
            kind: match d.kind {
                DocKind::Longform => "longform".into(),
                DocKind::Threaded => "threaded".into(),
            },
            title: d.title.clone(),
            text: d.text.clone(),
            tree_id: d.tree_id.clone(),
            parent_id: d.parent_id.clone(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Split text into paragraphs separated by one or more blank lines.
pub fn split_paragraphs(text: &str) -> Vec<&str> {
    let mut paras = Vec::new();
    let mut start: Option<usize> = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if content.trim().is_empty() {
            if let Some(s) = start.take() {
                paras.push(&text[s..end]);
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + content.len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        paras.push(&text[s..end]);
    }
    paras
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn parse(s: &str) -> Result<Vec<Document>> {
        read_jsonl(Cursor::new(s), Path::new("mem.jsonl"))
    }

    #[test]
    fn loads_longform_record() {
        let docs =
            parse(r#"{"id":"1","source":"canon","kind":"longform","text":"Harry ran."}"#).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].kind, DocKind::Longform);
        assert_eq!(docs[0].source_id, "canon");
    }

    #[test]
    fn threaded_title_is_prepended() {
        let docs = parse(
            r#"{"id":"p","source":"forum","kind":"threaded","title":"T","text":"B","tree_id":"p"}"#,
        )
        .unwrap();
        assert_eq!(docs[0].text, "T\nB");
    }

    #[test]
    fn unknown_kind_is_rejected_with_line() {
        let err = parse(
            "\n{\"id\":\"1\",\"source\":\"s\",\"kind\":\"longform\",\"text\":\"x\"}\n\
             {\"id\":\"2\",\"source\":\"s\",\"kind\":\"video\",\"text\":\"x\"}",
        )
        .unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("unknown document kind"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse("{\"id\": 1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn threaded_without_tree_and_blank_text_rejected() {
        assert!(parse(r#"{"id":"c","source":"f","kind":"threaded","text":"hi"}"#).is_err());
        assert!(parse(r#"{"id":"c","source":"f","kind":"longform","text":"   "}"#).is_err());
        assert!(parse(
            r#"{"id":"c","source":"f","kind":"longform","text":"x","parent_id":"p"}"#
        )
        .is_err());
    }

    #[test]
    fn paragraphs() {
        assert_eq!(split_paragraphs("a\n\nb"), vec!["a", "b"]);
        assert_eq!(split_paragraphs("a\n\n\n\nb"), vec!["a", "b"]);
        assert_eq!(split_paragraphs("a\nb"), vec!["a\nb"]);
        assert_eq!(split_paragraphs("\n  \n"), Vec::<&str>::new());
        assert_eq!(split_paragraphs("a\r\n \r\nb\r\n"), vec!["a", "b"]);
    }

    #[test]
    fn threaded_documents_are_one_unit() {
        let d = Document::threaded("c", "f", "t", None, "a\n\nb");
        assert_eq!(d.units(), vec!["a\n\nb"]);
    }

    proptest::proptest! {
        #[test]
        fn paragraphs_preserve_nonblank_content(text in "[ab \n]{0,40}") {
            let paras = split_paragraphs(&text);
            let joined: String = paras.concat().chars().filter(|c| !c.is_whitespace()).collect();
            let orig: String = text.chars().filter(|c| !c.is_whitespace()).collect();
            proptest::prop_assert_eq!(joined, orig);
            for p in paras {
                proptest::prop_assert!(!p.trim().is_empty());
                proptest::prop_assert!(!p.contains("\n\n"));
            }
        }
    }
}
