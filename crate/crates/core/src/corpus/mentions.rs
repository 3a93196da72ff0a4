use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use super::alias::AliasTable;
use super::tokenize::{tokenize, Token};
use super::{DocKind, Document};
use crate::{Error, Result};

/// One alias match: the canonical character plus the token and byte spans it
/// covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mention {
    pub canonical: String,
    pub tokens: Range<usize>,
    pub bytes: Range<usize>,
}

/// Longest-match alias runs over already normalized words.
pub(crate) fn alias_runs(words: &[String], aliases: &AliasTable) -> Vec<(Range<usize>, String)> {
    let max_len = aliases.max_alias_len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let longest = max_len.min(words.len() - i);
        let hit = (1..=longest)
            .rev()
            .find_map(|len| aliases.lookup(&words[i..i + len]).map(|c| (len, c)));
        match hit {
            Some((len, canonical)) => {
                out.push((i..i + len, canonical.to_string()));
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

fn scan(tokens: &[Token], aliases: &AliasTable) -> Vec<Mention> {
    let words: Vec<String> = tokens.iter().map(|t| t.text.clone()).collect();
    alias_runs(&words, aliases)
        .into_iter()
        .map(|(r, canonical)| Mention {
            bytes: tokens[r.start].span.start..tokens[r.end - 1].span.end,
            tokens: r,
            canonical,
        })
        .collect()
}

/// Case-insensitive, token-bounded, longest-match-first alias scan.
pub fn detect_mentions(text: &str, aliases: &AliasTable) -> Vec<Mention> {
    scan(&tokenize(text), aliases)
}

/// Single-token form of a canonical name: lowercased, spaces joined by `_`.
pub fn canonical_token(canonical: &str) -> String {
    super::tokenize::token_strings(canonical).join("_")
}

/// Tokens of `text` with every mention collapsed into its canonical token,
/// so all aliases of a character share one embedding row.
pub fn mention_tokens(text: &str, aliases: &AliasTable) -> Vec<String> {
    let tokens = tokenize(text);
    let mentions = scan(&tokens, aliases);
    let mut out = Vec::with_capacity(tokens.len());
    let mut next = mentions.iter().peekable();
    let mut i = 0;
    while i < tokens.len() {
        match next.peek() {
            Some(m) if m.tokens.start == i => {
                out.push(canonical_token(&m.canonical));
                i = m.tokens.end;
                next.next();
            }
            _ => {
                out.push(tokens[i].text.clone());
                i += 1;
            }
        }
    }
    out
}

/// Mention totals keyed by source and canonical name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MentionTable {
    counts: BTreeMap<String, BTreeMap<String, u64>>,
}

impl MentionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, source: &str, name: &str, n: u64) {
        *self
            .counts
            .entry(source.to_string())
            .or_default()
            .entry(name.to_string())
            .or_insert(0) += n;
    }

    /// Ensure every name has an explicit (possibly zero) row for `source`.
    pub fn register(&mut self, source: &str, names: impl IntoIterator<Item = impl AsRef<str>>) {
        let row = self.counts.entry(source.to_string()).or_default();
        for n in names {
            row.entry(n.as_ref().to_string()).or_insert(0);
        }
    }

    pub fn count(&self, source: &str, name: &str) -> u64 {
        self.counts
            .get(source)
            .and_then(|r| r.get(name))
            .copied()
            .unwrap_or(0)
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn source_counts(&self, source: &str) -> Option<&BTreeMap<String, u64>> {
        self.counts.get(source)
    }

    pub fn total(&self, name: &str) -> u64 {
        self.counts.values().filter_map(|r| r.get(name)).sum()
    }

    pub fn grand_total(&self) -> u64 {
        self.counts.values().flat_map(|r| r.values()).sum()
    }

    pub fn merge(&mut self, other: &MentionTable) {
        for (source, row) in &other.counts {
            for (name, n) in row {
                self.add(source, name, *n);
            }
        }
    }

    /// Names ranked by count within one source, ties broken by name.
    pub fn top_k(&self, source: &str, k: usize) -> Vec<String> {
        let Some(row) = self.counts.get(source) else {
            return Vec::new();
        };
        let mut ranked: Vec<(&String, u64)> =
            row.iter().filter(|(_, &n)| n > 0).map(|(s, &n)| (s, n)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.into_iter().take(k).map(|(s, _)| s.clone()).collect()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["source", "name", "count"])?;
        for (source, row) in &self.counts {
            for (name, n) in row {
                w.write_record([source.as_str(), name.as_str(), &n.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("mentions csv", e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path.as_ref())?;
        expect_header(&mut r, &["source", "name", "count"])?;
        let mut t = MentionTable::new();
        for rec in r.records() {
            let rec = rec?;
            let n: u64 = rec[2]
                .parse()
                .map_err(|_| Error::invalid(format!("bad count {:?}", &rec[2])))?;
            t.add(&rec[0], &rec[1], n);
        }
        Ok(t)
    }
}

pub(crate) fn expect_header<R: std::io::Read>(r: &mut csv::Reader<R>, want: &[&str]) -> Result<()> {
    let got = r.headers()?;
    if got.iter().ne(want.iter().copied()) {
        return Err(Error::invalid(format!(
            "unexpected CSV header {:?}, expected {:?}",
            got.iter().collect::<Vec<_>>(),
            want
        )));
    }
    Ok(())
}

/// Count mentions of every canonical name per source.
///
/// Long-form documents are scanned paragraph by paragraph so that counts
/// agree with the co-occurrence units; every (source, name) pair gets a row.
pub fn count_mentions(corpus: &[Document], aliases: &AliasTable) -> MentionTable {
    let mut table = MentionTable::new();
    for doc in corpus {
        table.register(&doc.source_id, aliases.canonical_names());
        let units = match doc.kind {
            DocKind::Longform => doc.units(),
            DocKind::Threaded => vec![doc.text.as_str()],
        };
        for unit in units {
            for m in detect_mentions(unit, aliases) {
                table.add(&doc.source_id, &m.canonical, 1);
            }
        }
    }
    table
}

/// Union of every source's top-`k` names, ordered by total count descending
/// then by name.
pub fn build_character_set(tables: &[MentionTable], k: usize) -> Vec<String> {
    let mut merged = MentionTable::new();
    for t in tables {
        merged.merge(t);
    }
    let mut set = BTreeSet::new();
    for t in tables {
        for source in t.sources() {
            set.extend(t.top_k(source, k));
        }
    }
    let mut names: Vec<String> = set.into_iter().collect();
    names.sort_by(|a, b| merged.total(b).cmp(&merged.total(a)).then_with(|| a.cmp(b)));
    names
}
