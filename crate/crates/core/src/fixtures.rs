//! Deterministic synthetic data: planted core-periphery graphs, a corpus
//! generator with planted co-mention and adjective structure, and the bundled
//! three-source mini corpus.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::axes::AxisLexicon;
use crate::charnet::CoocNetwork;
use crate::corpus::{write_jsonl, AliasEntry, AliasTable, DocKind, Document, Gender};
use crate::describe::{DocContext, LabelConfig, ParseManifest};
use crate::embed::TrainConfig;
use crate::netmetrics::CorePeripheryParams;
use crate::pipeline::{RunConfig, SourceSpec};
use crate::{Error, Result};

/// Directory name of the bundled fixture set.
pub const FIXTURE_VERSION: &str = "v1";

/// Content hash of the bundled fixture set, as printed by `charrep fixtures`.
pub const MINI_CORPUS_HASH: &str = "c09c531b12d9253660600a24b3f95ff0322454e37588f91857d3c9bfab1eae4f";

/// Complete core of `core_size` nodes; each periphery node links to
/// `attach_degree` distinct core nodes. All weights are 1.
pub fn generate_planted_core_graph(
    core_size: usize,
    periphery_size: usize,
    attach_degree: usize,
    seed: u64,
) -> Result<CoocNetwork> {
    if core_size < 2 {
        return Err(Error::invalid("core_size must be at least 2"));
    }
    if attach_degree > core_size {
        return Err(Error::invalid(format!(
            "attach_degree {attach_degree} exceeds core_size {core_size}"
        )));
    }
    let core: Vec<String> = (0..core_size).map(|i| format!("core{i:02}")).collect();
    let mut net = CoocNetwork::new();
    for (i, a) in core.iter().enumerate() {
        for b in &core[i + 1..] {
            net.add_edge(a, b, 1)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in 0..periphery_size {
        let name = format!("peri{p:02}");
        net.add_node(&name);
        for c in index::sample(&mut rng, core_size, attach_degree) {
            net.add_edge(&name, &core[c], 1)?;
        }
    }
    Ok(net)
}

const ONSETS: [&str; 12] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "v"];
const NUCLEI: [&str; 5] = ["a", "e", "i", "o", "u"];
const CODAS: [&str; 4] = ["", "n", "r", "th"];

/// Deterministic pronounceable nonsense word for index `k`.
pub fn pseudo_word(k: usize) -> String {
    let per = ONSETS.len() * NUCLEI.len() * CODAS.len();
    let syl = |s: usize| {
        format!(
            "{}{}{}",
            ONSETS[s % ONSETS.len()],
            NUCLEI[(s / ONSETS.len()) % NUCLEI.len()],
            CODAS[(s / (ONSETS.len() * NUCLEI.len())) % CODAS.len()]
        )
    };
    let mut word = syl(k % per) + &syl((k / per) % per);
    if k >= per * per {
        word += &syl(k / (per * per));
    }
    word
}

fn name_offset(name: &str) -> usize {
    let digest = Sha256::digest(name.as_bytes());
    let mut b = [0u8; 4];
    b.copy_from_slice(&digest[..4]);
    100_000 + (u32::from_le_bytes(b) as usize % 1_000_000)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub gender: Gender,
    /// Relative mention rate.
    pub weight: f64,
    /// Adjectives placed directly before this character's mentions.
    #[serde(default)]
    pub adjectives: Vec<String>,
}

impl CharacterSpec {
    pub fn new(name: &str, aliases: &[&str], gender: Gender, weight: f64, adjectives: &[&str]) -> Self {
        CharacterSpec {
            name: name.to_string(),
            aliases: aliases.iter().map(|s| s.to_string()).collect(),
            gender,
            weight,
            adjectives: adjectives.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Words that appear near this character; derived from the name so the
    /// same character shares them across sources.
    pub fn topic_words(&self, n: usize) -> Vec<String> {
        let base = name_offset(&self.name);
        (0..n).map(|i| pseudo_word(base + i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedPair {
    pub a: String,
    pub b: String,
    /// Replaces the base pair rate for this pair.
    pub multiplier: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub source_id: String,
    pub kind: DocKind,
    /// Chapters (long-form) or comment trees (threaded).
    pub documents: usize,
    /// Paragraphs per chapter or comments per tree.
    pub units_per_document: usize,
    /// Filler and topic tokens per unit, excluding mentions.
    pub tokens_per_unit: usize,
    pub filler_vocab: usize,
    pub topic_words: usize,
    /// Chance that a body token is a topic word of a mentioned character.
    pub topic_rate: f64,
    pub adjective_rate: f64,
    /// Chance that a unit mentions a pair rather than one character.
    pub pair_rate: f64,
    /// Pair weight factor for pairs that are not planted.
    pub base_pair_rate: f64,
    pub characters: Vec<CharacterSpec>,
    #[serde(default)]
    pub planted_pairs: Vec<PlantedPair>,
    /// Expected bound on the relative deviation of realized single-character
    /// unit shares from their planted shares.
    pub noise_bound: f64,
}

impl SyntheticSpec {
    pub fn empty(source_id: &str, kind: DocKind) -> Self {
        SyntheticSpec {
            source_id: source_id.to_string(),
            kind,
            documents: 0,
            units_per_document: 0,
            tokens_per_unit: 0,
            filler_vocab: 300,
            topic_words: 8,
            topic_rate: 0.3,
            adjective_rate: 0.5,
            pair_rate: 0.5,
            base_pair_rate: 1.0,
            characters: Vec::new(),
            planted_pairs: Vec::new(),
            noise_bound: 0.15,
        }
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.characters
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::invalid(format!("planted pair names unknown character {name:?}")))
    }

    /// Unit-level planted share of each character when mentioned alone.
    pub fn single_shares(&self) -> Vec<f64> {
        let total: f64 = self.characters.iter().map(|c| c.weight).sum();
        self.characters.iter().map(|c| c.weight / total).collect()
    }

    /// Planted weight of every unordered pair `(i, j)` with `i < j`.
    pub fn pair_weights(&self) -> Result<Vec<((usize, usize), f64)>> {
        let n = self.characters.len();
        let mut w = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                let base = self.characters[i].weight * self.characters[j].weight;
                w.insert((i, j), base * self.base_pair_rate);
            }
        }
        for p in &self.planted_pairs {
            let (a, b) = (self.index_of(&p.a)?, self.index_of(&p.b)?);
            let key = (a.min(b), a.max(b));
            let base = self.characters[a].weight * self.characters[b].weight;
            w.insert(key, base * p.multiplier);
        }
        Ok(w.into_iter().collect())
    }
}

struct UnitWriter<'s> {
    spec: &'s SyntheticSpec,
    topics: Vec<Vec<String>>,
    filler: Vec<String>,
    filler_dist: Option<WeightedIndex<f64>>,
    single_dist: Option<WeightedIndex<f64>>,
    pairs: Vec<(usize, usize)>,
    pair_dist: Option<WeightedIndex<f64>>,
}

impl<'s> UnitWriter<'s> {
    fn new(spec: &'s SyntheticSpec) -> Result<Self> {
        let pw = spec.pair_weights()?;
        let pair_dist = WeightedIndex::new(pw.iter().map(|p| p.1)).ok();
        Ok(UnitWriter {
            topics: spec.characters.iter().map(|c| c.topic_words(spec.topic_words)).collect(),
            filler: (0..spec.filler_vocab).map(pseudo_word).collect(),
            filler_dist: WeightedIndex::new((0..spec.filler_vocab).map(|r| 1.0 / (r as f64 + 1.0))).ok(),
            single_dist: WeightedIndex::new(spec.characters.iter().map(|c| c.weight)).ok(),
            pairs: pw.into_iter().map(|p| p.0).collect(),
            pair_dist,
            spec,
        })
    }

    fn present(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let pair = rng.gen::<f64>() < self.spec.pair_rate;
        match (&self.pair_dist, &self.single_dist) {
            (Some(pd), _) if pair => {
                let (a, b) = self.pairs[pd.sample(rng)];
                vec![a, b]
            }
            (_, Some(sd)) => vec![sd.sample(rng)],
            _ => Vec::new(),
        }
    }

    fn unit(&self, rng: &mut ChaCha8Rng) -> String {
        let present = self.present(rng);
        let mut pieces: Vec<String> = Vec::new();
        for _ in 0..self.spec.tokens_per_unit {
            if !present.is_empty() && self.spec.topic_words > 0 && rng.gen::<f64>() < self.spec.topic_rate {
                let c = *present.choose(rng).expect("non-empty");
                pieces.push(self.topics[c].choose(rng).expect("topic words").clone());
            } else if let Some(fd) = &self.filler_dist {
                pieces.push(self.filler[fd.sample(rng)].clone());
            }
        }
        for &c in &present {
            let ch = &self.spec.characters[c];
            let mentions = if rng.gen::<f64>() < 0.3 { 2 } else { 1 };
            for _ in 0..mentions {
                let surface = match rng.gen_range(0..=ch.aliases.len()) {
                    0 => ch.name.clone(),
                    k => ch.aliases[k - 1].clone(),
                };
                let piece = match ch.adjectives.choose(rng) {
                    Some(adj) if rng.gen::<f64>() < self.spec.adjective_rate => format!("{adj} {surface}"),
                    _ => surface,
                };
                let at = rng.gen_range(0..=pieces.len());
                pieces.insert(at, piece);
            }
        }
        sentences(&pieces, rng)
    }
}

fn sentences(pieces: &[String], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    let mut rest = pieces;
    while !rest.is_empty() {
        let take = rng.gen_range(6..=12).min(rest.len());
        let (head, tail) = rest.split_at(take);
        let mut s = head.join(" ");
        if let Some(first) = s.get(..1) {
            s.replace_range(..1, &first.to_uppercase());
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&s);
        out.push('.');
        rest = tail;
    }
    out
}

/// Documents realizing `spec`; identical for identical `(spec, seed)`.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Document>> {
    let writer = UnitWriter::new(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = &spec.source_id;
    let mut docs = Vec::new();
    for d in 0..spec.documents {
        match spec.kind {
            DocKind::Longform => {
                let paras: Vec<String> = (0..spec.units_per_document)
                    .map(|_| writer.unit(&mut rng))
                    .filter(|p| !p.is_empty())
                    .collect();
                if paras.is_empty() {
                    continue;
                }
                let mut doc = Document::longform(&format!("{src}-{:03}", d + 1), src, &paras.join("\n\n"));
                doc.title = Some(format!("Chapter {}", d + 1));
                docs.push(doc);
            }
            DocKind::Threaded => {
                let tree = format!("{src}-t{:04}", d + 1);
                let mut ids: Vec<String> = Vec::new();
                for k in 0..spec.units_per_document {
                    let text = writer.unit(&mut rng);
                    let parent = (k > 0).then(|| ids[rng.gen_range(0..ids.len())].clone());
                    if text.is_empty() {
                        continue;
                    }
                    let id = format!("{tree}-c{k:02}");
                    docs.push(Document::threaded(&id, src, &tree, parent.as_deref(), &text));
                    ids.push(id);
                }
            }
        }
    }
    Ok(docs)
}

/// Alias table covering every character of every spec.
pub fn alias_table_for(specs: &[SyntheticSpec]) -> Result<AliasTable> {
    let mut entries: BTreeMap<String, AliasEntry> = BTreeMap::new();
    for c in specs.iter().flat_map(|s| &s.characters) {
        let e = entries.entry(c.name.clone()).or_insert_with(|| AliasEntry {
            aliases: Vec::new(),
            gender: c.gender,
        });
        for a in &c.aliases {
            if !e.aliases.contains(a) {
                e.aliases.push(a.clone());
            }
        }
    }
    AliasTable::new(entries)
}

// ---------------------------------------------------------------------------
// bundled mini corpus

struct Cast {
    name: &'static str,
    first: &'static str,
    last: &'static str,
    gender: Gender,
}

const CAST: [Cast; 16] = [
    Cast { name: "Ada Quill", first: "Ada", last: "Quill", gender: Gender::F },
    Cast { name: "Bram Holt", first: "Bram", last: "Holt", gender: Gender::M },
    Cast { name: "Cora Finch", first: "Cora", last: "Finch", gender: Gender::F },
    Cast { name: "Dorian Ash", first: "Dorian", last: "Ash", gender: Gender::M },
    Cast { name: "Edda Marsh", first: "Edda", last: "Marsh", gender: Gender::F },
    Cast { name: "Felix Rowe", first: "Felix", last: "Rowe", gender: Gender::M },
    Cast { name: "Greta Moss", first: "Greta", last: "Moss", gender: Gender::F },
    Cast { name: "Hugo Crane", first: "Hugo", last: "Crane", gender: Gender::M },
    Cast { name: "Iris Vale", first: "Iris", last: "Vale", gender: Gender::F },
    Cast { name: "Jonah Pike", first: "Jonah", last: "Pike", gender: Gender::M },
    Cast { name: "Kit Sorrel", first: "Kit", last: "Sorrel", gender: Gender::U },
    Cast { name: "Lena Frost", first: "Lena", last: "Frost", gender: Gender::F },
    Cast { name: "Milo Thorn", first: "Milo", last: "Thorn", gender: Gender::M },
    Cast { name: "Nell Brook", first: "Nell", last: "Brook", gender: Gender::F },
    Cast { name: "Otto Reed", first: "Otto", last: "Reed", gender: Gender::M },
    Cast { name: "Pia Wren", first: "Pia", last: "Wren", gender: Gender::F },
];

fn cast(weights: [f64; 16], adjectives: &[(&str, &[&str])]) -> Vec<CharacterSpec> {
    CAST.iter()
        .zip(weights)
        .map(|(c, w)| {
            let adj = adjectives
                .iter()
                .find(|(n, _)| *n == c.first)
                .map(|(_, a)| *a)
                .unwrap_or(&[]);
            CharacterSpec::new(c.name, &[c.first, c.last], c.gender, w, adj)
        })
        .collect()
}

fn planted(pairs: &[(&str, &str, f64)]) -> Vec<PlantedPair> {
    pairs
        .iter()
        .map(|(a, b, m)| PlantedPair {
            a: a.to_string(),
            b: b.to_string(),
            multiplier: *m,
        })
        .collect()
}

/// Source specs of the mini corpus: a long-form canon, a threaded forum and
/// a long-form fan-fiction collection.
pub fn mini_corpus_specs() -> Vec<SyntheticSpec> {
    let canon = SyntheticSpec {
        documents: 8,
        units_per_document: 40,
        tokens_per_unit: 36,
        characters: cast(
            [10.0, 8.0, 7.0, 5.0, 4.0, 3.0, 3.0, 2.5, 2.0, 2.0, 1.5, 1.5, 0.6, 0.5, 0.5, 0.4],
            &[
                ("Ada", &["brave", "kind"]),
                ("Bram", &["warm", "gentle"]),
                ("Cora", &["bold", "fierce"]),
                ("Dorian", &["cold", "cruel", "harsh"]),
                ("Edda", &["timid", "meek"]),
                ("Felix", &["bitter", "shy"]),
                ("Hugo", &["harsh", "bold"]),
                ("Lena", &["tender", "shy"]),
            ],
        ),
        planted_pairs: planted(&[("Ada Quill", "Bram Holt", 4.0), ("Ada Quill", "Cora Finch", 3.0)]),
        ..SyntheticSpec::empty("canon", DocKind::Longform)
    };
    let forum = SyntheticSpec {
        documents: 150,
        units_per_document: 4,
        tokens_per_unit: 22,
        characters: cast(
            [8.0, 5.0, 4.0, 9.0, 2.0, 6.0, 2.5, 1.5, 3.0, 1.0, 4.0, 2.0, 0.5, 1.5, 0.3, 0.8],
            &[
                ("Ada", &["brave", "bold"]),
                ("Bram", &["kind", "warm"]),
                ("Dorian", &["cruel", "bitter", "cold"]),
                ("Felix", &["fierce", "bold"]),
                ("Kit", &["gentle", "shy"]),
                ("Iris", &["timid", "tender"]),
            ],
        ),
        planted_pairs: planted(&[("Dorian Ash", "Felix Rowe", 10.0)]),
        ..SyntheticSpec::empty("forum", DocKind::Threaded)
    };
    let fanfic = SyntheticSpec {
        documents: 20,
        units_per_document: 30,
        tokens_per_unit: 36,
        characters: cast(
            [5.0, 3.0, 2.0, 10.0, 1.5, 9.0, 1.0, 2.0, 2.5, 1.0, 3.0, 1.5, 1.0, 0.5, 0.8, 0.4],
            &[
                ("Ada", &["bold", "fierce", "glare", "sneer"]),
                ("Bram", &["harsh", "cold", "scowl", "wait"]),
                ("Dorian", &["gentle", "tender", "kind", "smile", "blush"]),
                ("Felix", &["warm", "brave", "laugh", "whisper"]),
                ("Kit", &["meek", "timid"]),
                ("Hugo", &["cruel", "bitter"]),
            ],
        ),
        planted_pairs: planted(&[("Dorian Ash", "Felix Rowe", 10.0), ("Dorian Ash", "Ada Quill", 3.0)]),
        ..SyntheticSpec::empty("fanfic", DocKind::Longform)
    };
    vec![canon, forum, fanfic]
}

/// Axis lexicons shipped with the mini corpus.
pub fn mini_axes() -> Vec<AxisLexicon> {
    vec![
        AxisLexicon::new("cruel_kind", &["cruel", "harsh", "cold", "bitter"], &["kind", "gentle", "warm", "tender"])
            .expect("valid lexicon"),
        AxisLexicon::new("bold_meek", &["bold", "brave", "fierce"], &["meek", "timid", "shy"])
            .expect("valid lexicon"),
    ]
}

struct Row<'a> {
    form: &'a str,
    lemma: &'a str,
    upos: &'a str,
    head: usize,
    deprel: &'a str,
    feats: &'a str,
}

fn row<'a>(form: &'a str, lemma: &'a str, upos: &'a str, head: usize, deprel: &'a str) -> Row<'a> {
    Row { form, lemma, upos, head, deprel, feats: "_" }
}

fn write_sentence(out: &mut String, sent_id: &str, rows: &[Row]) {
    let text: Vec<&str> = rows.iter().map(|r| r.form).collect();
    writeln!(out, "# sent_id = {sent_id}").unwrap();
    writeln!(out, "# text = {}", text.join(" ")).unwrap();
    for (i, r) in rows.iter().enumerate() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t_\t{}\t{}\t{}\t_\t_",
            i + 1,
            r.form,
            r.lemma,
            r.upos,
            r.feats,
            r.head,
            r.deprel
        )
        .unwrap();
    }
    out.push('\n');
}

const VERBS: [(&str, &str); 8] = [
    ("smile", "smiled"),
    ("laugh", "laughed"),
    ("blush", "blushed"),
    ("sneer", "sneered"),
    ("glare", "glared"),
    ("wait", "waited"),
    ("whisper", "whispered"),
    ("scowl", "scowled"),
];

struct ContextPlan {
    context: &'static str,
    prefix: &'static str,
    names: [&'static str; 2],
    adjectives: &'static [&'static str],
    nouns: &'static [&'static str],
    verbs: &'static [usize],
}

const PLANS: [ContextPlan; 2] = [
    ContextPlan {
        context: "slash",
        prefix: "fanfic-s",
        names: ["Dorian", "Felix"],
        adjectives: &["gentle", "tender", "kind", "warm", "shy", "soft"],
        nouns: &["friend", "partner", "dreamer"],
        verbs: &[0, 1, 2, 6],
    },
    ContextPlan {
        context: "het",
        prefix: "fanfic-h",
        names: ["Dorian", "Ada"],
        adjectives: &["cold", "harsh", "bold", "cruel", "proud", "bitter"],
        nouns: &["rival", "heir", "prefect"],
        verbs: &[3, 4, 5, 7],
    },
];

/// Hand-shaped dependency parses for the fan-fiction source, split into two
/// pairing contexts, with some negated sentences mixed in.
pub fn mini_parses(seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut files = Vec::new();
    for plan in &PLANS {
        let mut out = String::new();
        for d in 1..=10 {
            writeln!(out, "# newdoc id = {}{d:02}", plan.prefix).unwrap();
            for s in 1..=16 {
                let id = format!("{}{d:02}-{s:02}", plan.prefix);
                let name = *plan.names.choose(&mut rng).unwrap();
                let adj = *plan.adjectives.choose(&mut rng).unwrap();
                let noun = *plan.nouns.choose(&mut rng).unwrap();
                let (lemma, past) = VERBS[*plan.verbs.choose(&mut rng).unwrap()];
                let rows = match rng.gen_range(0..6) {
                    0 => vec![
                        row(name, name, "PROPN", 3, "nsubj"),
                        row("was", "be", "AUX", 3, "cop"),
                        row(adj, adj, "ADJ", 0, "root"),
                    ],
                    1 => vec![
                        row("the", "the", "DET", 3, "det"),
                        row(adj, adj, "ADJ", 3, "amod"),
                        row(name, name, "PROPN", 4, "nsubj"),
                        row(past, lemma, "VERB", 0, "root"),
                    ],
                    2 => vec![
                        row(name, name, "PROPN", 5, "nsubj"),
                        row(",", ",", "PUNCT", 4, "punct"),
                        row("a", "a", "DET", 4, "det"),
                        row(noun, noun, "NOUN", 1, "appos"),
                        row(past, lemma, "VERB", 0, "root"),
                    ],
                    3 => vec![row(name, name, "PROPN", 2, "nsubj"), row(past, lemma, "VERB", 0, "root")],
                    4 => {
                        // negated copula; the opposite context's adjective
                        let other = PLANS.iter().find(|p| p.context != plan.context).unwrap();
                        let neg = *other.adjectives.choose(&mut rng).unwrap();
                        vec![
                            row(name, name, "PROPN", 4, "nsubj"),
                            row("was", "be", "AUX", 4, "cop"),
                            Row { feats: "Polarity=Neg", ..row("not", "not", "PART", 4, "advmod") },
                            row(neg, neg, "ADJ", 0, "root"),
                        ]
                    }
                    _ => vec![
                        row(name, name, "PROPN", 4, "nsubj"),
                        row("did", "do", "AUX", 4, "aux"),
                        row("not", "not", "PART", 4, "advmod"),
                        row("waver", "waver", "VERB", 0, "root"),
                    ],
                };
                write_sentence(&mut out, &id, &rows);
            }
        }
        files.push((format!("fanfic_{}.conllu", plan.context), out));
    }
    files
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn json_pretty<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Run configuration for the bundled corpus, with paths relative to its
/// directory.
pub fn mini_run_config() -> RunConfig {
    RunConfig {
        sources: mini_corpus_specs()
            .iter()
            .map(|s| SourceSpec {
                source_id: s.source_id.clone(),
                corpus_path: PathBuf::from(format!("{}.jsonl", s.source_id)),
                kind: s.kind,
            })
            .collect(),
        alias_path: "aliases.json".into(),
        axis_lexicon_paths: mini_axes()
            .iter()
            .map(|a| PathBuf::from(format!("axes/{}.json", a.name)))
            .collect(),
        parse_manifest_path: Some("parses/manifest.json".into()),
        top_k: 12,
        embed: TrainConfig {
            dim: 40,
            ..TrainConfig::default()
        },
        corep: CorePeripheryParams::default(),
        seed: 7,
        output_dir: "out".into(),
        ..RunConfig::default()
    }
}

/// Write the bundled fixture set into `dir` and return its content hash.
pub fn write_mini_corpus(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    let specs = mini_corpus_specs();
    for (i, spec) in specs.iter().enumerate() {
        let docs = generate_synthetic_corpus(spec, 1000 + i as u64)?;
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_jsonl(dir.join(format!("{}.jsonl", spec.source_id)), &docs)?;
    }
    write_file(&dir.join("specs.json"), &json_pretty(&specs)?)?;
    let aliases = alias_table_for(&specs)?;
    write_file(&dir.join("aliases.json"), (aliases.to_json_string() + "\n").as_bytes())?;
    for ax in mini_axes() {
        write_file(&dir.join(format!("axes/{}.json", ax.name)), &json_pretty(&ax)?)?;
    }
    let mut documents = Vec::new();
    let parses = mini_parses(2000);
    for plan in &PLANS {
        for d in 1..=10 {
            documents.push(DocContext {
                doc_id: format!("{}{d:02}", plan.prefix),
                context: plan.context.to_string(),
            });
        }
    }
    for (name, text) in &parses {
        write_file(&dir.join("parses").join(name), text.as_bytes())?;
    }
    let manifest = ParseManifest {
        parses: parses.iter().map(|(n, _)| PathBuf::from(n)).collect(),
        documents,
        labels: LabelConfig::default(),
    };
    write_file(&dir.join("parses/manifest.json"), &json_pretty(&manifest)?)?;
    write_file(&dir.join("config.json"), &json_pretty(&mini_run_config())?)?;
    content_hash(dir)
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, PathBuf)>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("under root");
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            out.push((rel.join("/"), path));
        }
    }
    Ok(())
}

/// SHA-256 over every file under `dir`, in path order, covering relative
/// paths and contents.
pub fn content_hash(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for (rel, path) in files {
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        h.update(rel.as_bytes());
        h.update([0]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Location of the bundled fixture set in a source checkout.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(FIXTURE_VERSION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charnet::build_network;
    use std::collections::HashSet;

    #[test]
    fn planted_graph_shape() {
        let g = generate_planted_core_graph(5, 10, 2, 3).unwrap();
        assert_eq!(g.node_count(), 15);
        assert_eq!(g.edge_count(), 10 + 20);
        let single = generate_planted_core_graph(2, 0, 1, 0).unwrap();
        assert_eq!(single.edge_count(), 1);
        assert_eq!(g, generate_planted_core_graph(5, 10, 2, 3).unwrap());
        assert!(generate_planted_core_graph(1, 3, 1, 0).is_err());
        assert!(generate_planted_core_graph(3, 3, 4, 0).is_err());
        for ((a, b), _) in g.edges() {
            assert!(a.starts_with("core") || b.starts_with("core"));
        }
    }

    #[test]
    fn pseudo_words_are_distinct() {
        let words: HashSet<String> = (0..5000).map(pseudo_word).collect();
        assert_eq!(words.len(), 5000);
        assert!(words.iter().all(|w| w.chars().all(|c| c.is_ascii_lowercase())));
    }

    #[test]
    fn empty_spec_gives_empty_corpus() {
        let spec = SyntheticSpec::empty("x", DocKind::Longform);
        assert!(generate_synthetic_corpus(&spec, 1).unwrap().is_empty());
    }

    fn two_pair_spec() -> SyntheticSpec {
        SyntheticSpec {
            documents: 40,
            units_per_document: 10,
            tokens_per_unit: 15,
            characters: vec![
                CharacterSpec::new("Anna Bell", &["Anna"], Gender::F, 1.0, &["gentle"]),
                CharacterSpec::new("Bert Cole", &["Bert"], Gender::M, 1.0, &["harsh"]),
                CharacterSpec::new("Cleo Dunn", &["Cleo"], Gender::F, 1.0, &[]),
                CharacterSpec::new("Dirk Eby", &["Dirk"], Gender::M, 1.0, &[]),
            ],
            planted_pairs: planted(&[("Anna Bell", "Bert Cole", 10.0)]),
            ..SyntheticSpec::empty("t", DocKind::Longform)
        }
    }

    #[test]
    fn planted_pair_is_the_heaviest_edge() {
        let spec = two_pair_spec();
        let docs = generate_synthetic_corpus(&spec, 5).unwrap();
        assert_eq!(docs, generate_synthetic_corpus(&spec, 5).unwrap());
        let aliases = alias_table_for(&[spec.clone()]).unwrap();
        let names: Vec<String> = spec.characters.iter().map(|c| c.name.clone()).collect();
        let net = build_network(&docs, &names, &aliases).unwrap();
        let top = net.edges().iter().max_by_key(|(_, w)| **w).unwrap();
        assert_eq!(top.0, &("Anna Bell".to_string(), "Bert Cole".to_string()));
        for d in &docs {
            d.validate().unwrap();
        }
    }

    #[test]
    fn threaded_generation_links_parents() {
        let spec = SyntheticSpec {
            kind: DocKind::Threaded,
            ..two_pair_spec()
        };
        let docs = generate_synthetic_corpus(&spec, 9).unwrap();
        let ids: HashSet<&str> = docs.iter().map(|d| d.id.as_str()).collect();
        for d in &docs {
            d.validate().unwrap();
            if let Some(p) = &d.parent_id {
                assert!(ids.contains(p.as_str()));
            }
        }
    }

    #[test]
    fn unknown_planted_name_is_an_error() {
        let mut spec = two_pair_spec();
        spec.planted_pairs[0].a = "Nobody".into();
        assert!(generate_synthetic_corpus(&spec, 1).is_err());
    }

    #[test]
    fn parses_load_and_cover_both_contexts() {
        for (name, text) in mini_parses(2000) {
            let s = crate::describe::parse_conllu(text.as_bytes(), Path::new(&name)).unwrap();
            assert_eq!(s.len(), 160);
            assert!(s.iter().all(|s| s.doc_id.is_some()));
        }
    }
}
