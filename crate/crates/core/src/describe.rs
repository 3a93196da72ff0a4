//! Character descriptions read off external dependency parses in the
//! 10-column CoNLL-U format.
//!
//! Four patterns attribute a word to a character token:
//! an adjectival modifier, a copular predicate, an appositive noun, and a
//! verb with the character as nominal subject. A description is dropped when
//! its governing word carries a negation dependent.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{alias_runs, normalize_token, AliasTable};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedToken {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub feats: String,
    /// 0 marks the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    /// From the most recent `# newdoc id = ...` comment, if any.
    pub doc_id: Option<String>,
    pub tokens: Vec<ParsedToken>,
}

impl Sentence {
    fn token(&self, index: usize) -> &ParsedToken {
        &self.tokens[index - 1]
    }

    fn dependents(&self, head: usize) -> impl Iterator<Item = &ParsedToken> {
        self.tokens.iter().filter(move |t| t.head == head)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DescClass {
    Adjective,
    Noun,
    Verb,
}

impl DescClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DescClass::Adjective => "adjective",
            DescClass::Noun => "noun",
            DescClass::Verb => "verb",
        }
    }
}

impl fmt::Display for DescClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Description {
    pub character: String,
    pub lemma: String,
    pub cls: DescClass,
    pub context_label: String,
    pub doc_id: String,
}

/// Relation labels and tags; defaults follow Universal Dependencies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelConfig {
    pub amod: String,
    pub nsubj: String,
    pub cop: String,
    pub appos: String,
    pub neg: String,
    pub advmod: String,
    pub det: String,
    pub adjective_tag: String,
    pub noun_tag: String,
    pub verb_tag: String,
    pub particle_tag: String,
    pub negation_lemmas: Vec<String>,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            amod: "amod".into(),
            nsubj: "nsubj".into(),
            cop: "cop".into(),
            appos: "appos".into(),
            neg: "neg".into(),
            advmod: "advmod".into(),
            det: "det".into(),
            adjective_tag: "ADJ".into(),
            noun_tag: "NOUN".into(),
            verb_tag: "VERB".into(),
            particle_tag: "PART".into(),
            negation_lemmas: ["not", "n't", "never", "no", "nt"].map(String::from).to_vec(),
        }
    }
}

impl LabelConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn is_negator(&self, t: &ParsedToken) -> bool {
        if t.deprel == self.neg || t.feats.split('|').any(|f| f == "Polarity=Neg") {
            return true;
        }
        let lemma = t.lemma.to_lowercase();
        let marker = t.deprel == self.advmod || t.deprel == self.det || t.upos == self.particle_tag;
        marker && self.negation_lemmas.iter().any(|n| *n == lemma)
    }
}

pub fn parse_conllu(reader: impl BufRead, path: &Path) -> Result<Vec<Sentence>> {
    let perr = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    let mut doc_id: Option<String> = None;
    let mut cur: Vec<(usize, ParsedToken)> = Vec::new();
    let finish = |cur: &mut Vec<(usize, ParsedToken)>, doc: &Option<String>, out: &mut Vec<Sentence>| -> Result<()> {
        if cur.is_empty() {
            return Ok(());
        }
        let n = cur.len();
        for (k, (line, t)) in cur.iter().enumerate() {
            if t.index != k + 1 {
                return Err(perr(*line, format!("token index {} out of sequence", t.index)));
            }
            if t.head > n {
                return Err(perr(*line, format!("head {} exceeds sentence length {n}", t.head)));
            }
            if t.head == t.index {
                return Err(perr(*line, "token is its own head".into()));
            }
        }
        out.push(Sentence {
            doc_id: doc.clone(),
            tokens: cur.drain(..).map(|(_, t)| t).collect(),
        });
        Ok(())
    };
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            finish(&mut cur, &doc_id, &mut out)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim().strip_prefix("newdoc id") {
                doc_id = Some(id.trim_start_matches([' ', '=']).trim().to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(perr(lineno, format!("expected 10 tab-separated columns, found {}", cols.len())));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|_| perr(lineno, format!("bad token index {:?}", cols[0])))?;
        let head: usize = cols[6]
            .parse()
            .map_err(|_| perr(lineno, format!("bad head {:?}", cols[6])))?;
        cur.push((
            lineno,
            ParsedToken {
                index,
                form: cols[1].to_string(),
                lemma: cols[2].to_string(),
                upos: cols[3].to_string(),
                feats: cols[5].to_string(),
                head,
                deprel: cols[7].to_string(),
            },
        ));
    }
    finish(&mut cur, &doc_id, &mut out)?;
    Ok(out)
}

pub fn load_conllu(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(std::io::BufReader::new(file), path)
}

/// 1-based token index → canonical character, for every token inside an
/// alias match on the normalized forms.
fn character_tokens(s: &Sentence, aliases: &AliasTable) -> HashMap<usize, String> {
    let words: Vec<String> = s.tokens.iter().map(|t| normalize_token(&t.form)).collect();
    let mut out = HashMap::new();
    for (range, canonical) in alias_runs(&words, aliases) {
        for i in range {
            out.insert(i + 1, canonical.clone());
        }
    }
    out
}

fn lemma_of(t: &ParsedToken) -> String {
    let raw = if t.lemma.is_empty() || t.lemma == "_" { &t.form } else { &t.lemma };
    raw.to_lowercase()
}

pub fn extract_descriptions(
    sentences: &[Sentence],
    aliases: &AliasTable,
    context_label: &str,
) -> Vec<Description> {
    extract_with_labels(sentences, aliases, context_label, &LabelConfig::default())
}

pub fn extract_with_labels(
    sentences: &[Sentence],
    aliases: &AliasTable,
    context_label: &str,
    labels: &LabelConfig,
) -> Vec<Description> {
    sentences
        .iter()
        .flat_map(|s| extract_sentence(s, aliases, context_label, labels))
        .collect()
}

fn extract_sentence(
    s: &Sentence,
    aliases: &AliasTable,
    context_label: &str,
    labels: &LabelConfig,
) -> Vec<Description> {
    let chars = character_tokens(s, aliases);
    if chars.is_empty() {
        return Vec::new();
    }
    let negated = |idx: usize| s.dependents(idx).any(|d| labels.is_negator(d));
    let mut out = Vec::new();
    let mut push = |character: &str, word: &ParsedToken, cls: DescClass| {
        let lemma = lemma_of(word);
        if !lemma.is_empty() && !negated(word.index) {
            out.push(Description {
                character: character.to_string(),
                lemma,
                cls,
                context_label: context_label.to_string(),
                doc_id: s.doc_id.clone().unwrap_or_default(),
            });
        }
    };
    for t in &s.tokens {
        if t.head == 0 || chars.contains_key(&t.index) {
            continue;
        }
        if let Some(c) = chars.get(&t.head) {
            if t.deprel == labels.amod && t.upos == labels.adjective_tag {
                push(c, t, DescClass::Adjective);
            } else if t.deprel == labels.appos && t.upos == labels.noun_tag {
                push(c, t, DescClass::Noun);
            }
        }
    }
    for t in &s.tokens {
        let Some(c) = chars.get(&t.index) else { continue };
        if t.deprel != labels.nsubj || t.head == 0 || chars.contains_key(&t.head) {
            continue;
        }
        let pred = s.token(t.head);
        let copular = s.dependents(pred.index).any(|d| d.deprel == labels.cop);
        if copular && pred.upos == labels.adjective_tag {
            push(c, pred, DescClass::Adjective);
        } else if copular && pred.upos == labels.noun_tag {
            push(c, pred, DescClass::Noun);
        } else if !copular && pred.upos == labels.verb_tag {
            push(c, pred, DescClass::Verb);
        }
    }
    out
}

/// Lemma frequencies keyed by `(context, lemma)`.
pub fn description_counts(descs: &[Description]) -> BTreeMap<(String, String), u64> {
    let mut out = BTreeMap::new();
    for d in descs {
        *out.entry((d.context_label.clone(), d.lemma.clone())).or_insert(0) += 1;
    }
    out
}

/// Lemma frequencies for one context, as input to log-odds comparison.
pub fn context_lemma_counts(descs: &[Description], context: &str) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for d in descs.iter().filter(|d| d.context_label == context) {
        *out.entry(d.lemma.clone()).or_insert(0) += 1;
    }
    out
}

pub fn write_descriptions_csv(path: impl AsRef<Path>, descs: &[Description]) -> Result<()> {
    let mut table: BTreeMap<(&str, &str, &str, DescClass), u64> = BTreeMap::new();
    for d in descs {
        *table
            .entry((&d.context_label, &d.character, &d.lemma, d.cls))
            .or_insert(0) += 1;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["context", "character", "lemma", "cls", "count"])?;
    for ((ctx, ch, lemma, cls), n) in table {
        w.write_record([ctx, ch, lemma, cls.as_str(), &n.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("descriptions csv", e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocContext {
    pub doc_id: String,
    pub context: String,
}

/// Sidecar listing parse files and the context of each document in them.
/// Relative parse paths resolve against the manifest's directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseManifest {
    pub parses: Vec<PathBuf>,
    pub documents: Vec<DocContext>,
    #[serde(default)]
    pub labels: LabelConfig,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ManifestExtraction {
    pub descriptions: Vec<Description>,
    /// Sentences whose document has no context entry.
    pub unlabeled_sentences: usize,
}

impl ParseManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<(Self, PathBuf)> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: ParseManifest = serde_json::from_str(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, base))
    }

    pub fn extract(&self, base: &Path, aliases: &AliasTable) -> Result<ManifestExtraction> {
        let contexts: HashMap<&str, &str> = self
            .documents
            .iter()
            .map(|d| (d.doc_id.as_str(), d.context.as_str()))
            .collect();
        let mut out = ManifestExtraction::default();
        for p in &self.parses {
            for s in load_conllu(base.join(p))? {
                let ctx = s.doc_id.as_deref().and_then(|d| contexts.get(d));
                match ctx {
                    Some(ctx) => out.descriptions.extend(extract_sentence(&s, aliases, ctx, &self.labels)),
                    None => out.unlabeled_sentences += 1,
                }
            }
        }
        Ok(out)
    }
}
