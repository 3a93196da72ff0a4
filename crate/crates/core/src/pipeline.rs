//! Configuration, per-stage runners, the end-to-end comparison run, and
//! plot-data emission.
//!
//! Every stage writes its artifacts into the output directory. The
//! standalone runners ([`Workspace::run_stage`]) read earlier stages' files
//! back, so partial pipelines can be scripted one subcommand at a time.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::align::{cross_model_similarity, procrustes_align, seed_stability_report, write_similarity_csv, SeedStability};
use crate::axes::{compare_on_axis, compare_on_axis_aligned, write_axis_report_csv, AxisLexicon, AxisMethod, AxisReportRow};
use crate::charnet::{build_network, CoocNetwork};
use crate::corpus::{build_character_set, canonical_token, count_mentions, load_corpus, mention_tokens, AliasTable, CorpusFormat, DocKind, Document, MentionTable};
use crate::describe::{context_lemma_counts, write_descriptions_csv, Description, DescClass, ParseManifest};
use crate::embed::{train, EmbeddingModel, TrainConfig};
use crate::netmetrics::{compute_metric, write_metrics_csv, write_shift_csv, CorePeripheryParams, MetricKind, MetricVector};
use crate::ranks::{rank_shift, to_ranks, RankVector};
use crate::stats::{axis_summary, chi_square_independence, default_prior_scale, select_distinctive, weighted_log_odds, write_logodds_csv, write_summary_csv, AxisSummary, ChiSquareResult, LogOddsResult, DEFAULT_LOGODDS_THRESHOLD};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub source_id: String,
    pub corpus_path: PathBuf,
    pub kind: DocKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// The first source is the reference every other model aligns to.
    pub sources: Vec<SourceSpec>,
    pub alias_path: PathBuf,
    pub axis_lexicon_paths: Vec<PathBuf>,
    pub parse_manifest_path: Option<PathBuf>,
    pub top_k: usize,
    /// Per-source top-k used to pick the chi-square rows.
    pub chi_square_top: usize,
    pub embed: TrainConfig,
    pub corep: CorePeripheryParams,
    pub logodds_threshold: f64,
    /// Overrides the seeds inside `embed` and `corep`.
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Words for the cross-model stability baseline; empty means the 20 most
    /// frequent shared tokens.
    pub baseline_words: Vec<String>,
    /// Source whose model scores description terms; defaults to the last.
    pub description_source: Option<String>,
    /// Score axis rankings in the reference space after alignment instead
    /// of per model.
    pub aligned_axes: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sources: Vec::new(),
            alias_path: PathBuf::new(),
            axis_lexicon_paths: Vec::new(),
            parse_manifest_path: None,
            top_k: 100,
            chi_square_top: 10,
            embed: TrainConfig::default(),
            corep: CorePeripheryParams::default(),
            logodds_threshold: DEFAULT_LOGODDS_THRESHOLD,
            seed: 0,
            output_dir: PathBuf::from("out"),
            baseline_words: Vec::new(),
            description_source: None,
            aligned_axes: false,
        }
    }
}

impl RunConfig {
    /// Parse a JSON config; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for s in &mut self.sources {
            fix(&mut s.corpus_path);
        }
        fix(&mut self.alias_path);
        self.axis_lexicon_paths.iter_mut().for_each(fix);
        if let Some(p) = &mut self.parse_manifest_path {
            fix(p);
        }
        fix(&mut self.output_dir);
    }

    /// Copy with `seed` pushed into the stage parameters.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.embed.seed = self.seed;
        c.corep.seed = self.seed;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(Error::invalid("config lists no sources"));
        }
        let ids: BTreeSet<&str> = self.sources.iter().map(|s| s.source_id.as_str()).collect();
        if ids.len() != self.sources.len() {
            return Err(Error::invalid("source ids must be unique"));
        }
        if let Some(bad) = ids.iter().find(|s| s.is_empty() || s.contains(['/', '\\'])) {
            return Err(Error::invalid(format!("source id {bad:?} cannot name a file")));
        }
        if self.top_k == 0 || self.chi_square_top == 0 {
            return Err(Error::invalid("top_k and chi_square_top must be positive"));
        }
        if !(self.logodds_threshold > 0.0) {
            return Err(Error::invalid("logodds_threshold must be positive"));
        }
        if let Some(d) = &self.description_source {
            if !ids.contains(d.as_str()) {
                return Err(Error::invalid(format!("description_source {d:?} is not a source")));
            }
        }
        self.embed.validate()?;
        self.corep.validate()
    }

    pub fn require_comparison(&self) -> Result<()> {
        if self.sources.len() < 2 {
            return Err(Error::invalid("comparison requires ≥2 sources"));
        }
        Ok(())
    }

    pub fn check_paths(&self) -> Result<()> {
        let mut paths: Vec<&Path> = self.sources.iter().map(|s| s.corpus_path.as_path()).collect();
        paths.push(&self.alias_path);
        paths.extend(self.axis_lexicon_paths.iter().map(PathBuf::as_path));
        paths.extend(self.parse_manifest_path.as_deref());
        for p in paths {
            if !p.exists() {
                return Err(Error::io(p, std::io::Error::from(std::io::ErrorKind::NotFound)));
            }
        }
        Ok(())
    }

    fn reference(&self) -> &str {
        &self.sources[0].source_id
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Ingest,
    Mentions,
    Charset,
    Network,
    Metrics,
    Embed,
    Align,
    Axes,
    Describe,
    Logodds,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Ingest,
        Stage::Mentions,
        Stage::Charset,
        Stage::Network,
        Stage::Metrics,
        Stage::Embed,
        Stage::Align,
        Stage::Axes,
        Stage::Describe,
        Stage::Logodds,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Mentions => "mentions",
            Stage::Charset => "charset",
            Stage::Network => "network",
            Stage::Metrics => "metrics",
            Stage::Embed => "embed",
            Stage::Align => "align",
            Stage::Axes => "axes",
            Stage::Describe => "describe",
            Stage::Logodds => "logodds",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

// --- report types ----------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub source: String,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    /// Characters forming the table rows; columns follow the source order.
    pub rows: Vec<String>,
    pub result: ChiSquareResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceRanks {
    pub source: String,
    pub ranks: RankVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRanks {
    pub metric: String,
    pub by_source: Vec<SourceRanks>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankShift {
    pub metric: String,
    pub from: String,
    pub to: String,
    pub shifts: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NameSimilarity {
    pub source: String,
    pub reference: String,
    pub shared_vocab: usize,
    pub similarities: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStability {
    pub source: String,
    pub reference: String,
    pub stability: SeedStability,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisComparison {
    pub axis: String,
    pub method: AxisMethod,
    pub model1: String,
    pub model2: String,
    pub rows: Vec<AxisReportRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescriptionReport {
    pub contexts: Vec<String>,
    pub descriptions: usize,
    pub unlabeled_sentences: usize,
    pub log_odds: Vec<LogOddsResult>,
    /// Distinctive terms per context, strongest first.
    pub distinctive: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// Resolved configuration; `output_dir` is recorded as ".".
    pub config: RunConfig,
    pub sources: Vec<String>,
    pub reference: String,
    pub character_set: Vec<String>,
    pub mention_counts: Vec<SourceCounts>,
    pub mention_chi_square: ChiSquareTest,
    pub rank_tables: Vec<MetricRanks>,
    pub rank_shifts: Vec<RankShift>,
    pub name_similarities: Vec<NameSimilarity>,
    pub seed_stability: Vec<PairStability>,
    pub axis_rankings: Vec<AxisComparison>,
    pub descriptions: Option<DescriptionReport>,
    pub axis_summaries: Vec<AxisSummary>,
    /// (context, axis, method) triples skipped for lack of scoreable terms.
    pub axis_summaries_skipped: Vec<String>,
}

impl ComparisonReport {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn ranks(&self, metric: &str) -> Option<&MetricRanks> {
        self.rank_tables.iter().find(|m| m.metric == metric)
    }
}

// --- workspace -------------------------------------------------------------

const MENTIONS_METRIC: &str = "mentions";

/// Intermediate state of a run bound to one output directory.
pub struct Workspace {
    pub config: RunConfig,
    pub out: PathBuf,
    written: BTreeSet<PathBuf>,
}

fn stage<T>(st: Stage, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: st.as_str(),
            source: Box::new(e),
        },
    })
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

impl Workspace {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let config = config.resolved();
        config.validate()?;
        let out = config.output_dir.clone();
        std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        Ok(Workspace {
            config,
            out,
            written: BTreeSet::new(),
        })
    }

    fn path(&mut self, rel: &str) -> Result<PathBuf> {
        let p = self.out.join(rel);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        self.written.insert(PathBuf::from(rel));
        Ok(p)
    }

    fn existing(&self, rel: &str, producer: Stage) -> Result<PathBuf> {
        let p = self.out.join(rel);
        if !p.exists() {
            return Err(Error::invalid(format!(
                "{} is missing; run the {producer} stage first",
                p.display()
            )));
        }
        Ok(p)
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, v: &T) -> Result<()> {
        let p = self.path(rel)?;
        let mut bytes = serde_json::to_vec_pretty(v)?;
        bytes.push(b'\n');
        std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    }

    fn source_ids(&self) -> Vec<String> {
        self.config.sources.iter().map(|s| s.source_id.clone()).collect()
    }

    pub fn aliases(&self) -> Result<AliasTable> {
        AliasTable::load(&self.config.alias_path)
    }

    /// Corpora in config order, each document relabeled with its source id
    /// and checked against the declared kind.
    pub fn corpora(&self) -> Result<Vec<Vec<Document>>> {
        self.config
            .sources
            .iter()
            .map(|s| {
                let mut docs = load_corpus(&s.corpus_path, CorpusFormat::Jsonl)?;
                if docs.is_empty() {
                    return Err(Error::Degenerate(format!("source {:?} has no documents", s.source_id)));
                }
                for d in &mut docs {
                    if d.kind != s.kind {
                        return Err(Error::invalid(format!(
                            "document {:?} is {:?} but source {:?} is declared {:?}",
                            d.id, d.kind, s.source_id, s.kind
                        )));
                    }
                    d.source_id = s.source_id.clone();
                }
                Ok(docs)
            })
            .collect()
    }

    pub fn axes(&self) -> Result<Vec<AxisLexicon>> {
        self.config.axis_lexicon_paths.iter().map(AxisLexicon::load).collect()
    }

    // ingest

    pub fn ingest(&mut self, corpora: &[Vec<Document>]) -> Result<Vec<IngestSummary>> {
        let summary: Vec<IngestSummary> = self
            .config
            .sources
            .iter()
            .zip(corpora)
            .map(|(s, docs)| IngestSummary {
                source: s.source_id.clone(),
                kind: s.kind,
                documents: docs.len(),
                units: docs.iter().map(|d| d.units().len()).sum(),
                tokens: docs
                    .iter()
                    .flat_map(|d| d.units())
                    .map(|u| crate::corpus::tokenize(u).len())
                    .sum(),
            })
            .collect();
        self.write_json("ingest.json", &summary)?;
        Ok(summary)
    }

    // mentions and character set

    pub fn mentions(&mut self, corpora: &[Vec<Document>], aliases: &AliasTable) -> Result<MentionTable> {
        let mut table = MentionTable::new();
        for (s, docs) in self.config.sources.iter().zip(corpora) {
            table.register(&s.source_id, aliases.canonical_names());
            table.merge(&count_mentions(docs, aliases));
        }
        let p = self.path("mentions.csv")?;
        table.write_csv(p)?;
        Ok(table)
    }

    pub fn load_mentions(&self) -> Result<MentionTable> {
        MentionTable::read_csv(self.existing("mentions.csv", Stage::Mentions)?)
    }

    /// Top-k union over the non-reference sources (all sources if only one).
    pub fn charset(&mut self, mentions: &MentionTable) -> Result<Vec<String>> {
        let ids = self.source_ids();
        let pool: &[String] = if ids.len() > 1 { &ids[1..] } else { &ids };
        let tables: Vec<MentionTable> = pool
            .iter()
            .map(|s| {
                let mut t = MentionTable::new();
                if let Some(counts) = mentions.source_counts(s) {
                    for (n, c) in counts {
                        t.add(s, n, *c);
                    }
                }
                t
            })
            .collect();
        let names = build_character_set(&tables, self.config.top_k);
        if names.is_empty() {
            return Err(Error::Degenerate("no character is mentioned in the community sources".into()));
        }
        let p = self.path("charset.csv")?;
        let mut w = csv::Writer::from_path(&p)?;
        w.write_record(["name", "mentions"])?;
        for n in &names {
            let total: u64 = pool.iter().map(|s| mentions.count(s, n)).sum();
            w.write_record([n.as_str(), &total.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(&p, e))?;
        Ok(names)
    }

    pub fn load_charset(&self) -> Result<Vec<String>> {
        let p = self.existing("charset.csv", Stage::Charset)?;
        let mut r = csv::Reader::from_path(&p)?;
        crate::corpus::expect_header(&mut r, &["name", "mentions"])?;
        r.records().map(|rec| Ok(rec?[0].to_string())).collect()
    }

    // networks and metrics

    pub fn networks(
        &mut self,
        corpora: &[Vec<Document>],
        charset: &[String],
        aliases: &AliasTable,
    ) -> Result<Vec<CoocNetwork>> {
        let mut nets = Vec::new();
        for (s, docs) in self.config.sources.clone().iter().zip(corpora) {
            let mut net = build_network(docs, charset, aliases)?;
            for n in charset {
                net.add_node(n);
            }
            let stem = file_stem(&s.source_id);
            let e = self.path(&format!("network_{stem}_edges.csv"))?;
            let n = self.path(&format!("network_{stem}_nodes.csv"))?;
            net.write_csv(e, n)?;
            nets.push(net);
        }
        Ok(nets)
    }

    pub fn load_networks(&self) -> Result<Vec<CoocNetwork>> {
        self.config
            .sources
            .iter()
            .map(|s| {
                let stem = file_stem(&s.source_id);
                CoocNetwork::read_csv(
                    self.existing(&format!("network_{stem}_edges.csv"), Stage::Network)?,
                    self.existing(&format!("network_{stem}_nodes.csv"), Stage::Network)?,
                )
            })
            .collect()
    }

    /// All metrics for every source, plus shifts from the reference.
    pub fn metrics(&mut self, nets: &[CoocNetwork]) -> Result<Vec<Vec<MetricVector>>> {
        let corep = self.config.corep.clone();
        let all: Vec<Vec<MetricVector>> = nets
            .iter()
            .map(|net| {
                MetricKind::ALL
                    .iter()
                    .map(|&m| compute_metric(net, m, &corep))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let ids = self.source_ids();
        for (s, ms) in ids.iter().zip(&all) {
            let p = self.path(&format!("metrics_{}.csv", file_stem(s)))?;
            write_metrics_csv(p, ms)?;
        }
        for (k, m) in MetricKind::ALL.iter().enumerate() {
            let from = all[0][k].ranks();
            for (s, ms) in ids.iter().zip(&all).skip(1) {
                let p = self.path(&format!("shifts_{}_{}_{}.csv", m.as_str(), file_stem(&ids[0]), file_stem(s)))?;
                write_shift_csv(p, &from, &ms[k].ranks())?;
            }
        }
        Ok(all)
    }

    // embeddings

    /// Training units per source: every paragraph or comment, tokenized
    /// with character mentions collapsed to one token each.
    pub fn training_units(docs: &[Document], aliases: &AliasTable) -> Vec<Vec<String>> {
        docs.iter()
            .flat_map(|d| d.units())
            .map(|u| mention_tokens(u, aliases))
            .filter(|u| !u.is_empty())
            .collect()
    }

    pub fn embed(&mut self, corpora: &[Vec<Document>], aliases: &AliasTable) -> Result<Vec<EmbeddingModel>> {
        let cfg = self.config.embed.clone();
        let models: Vec<EmbeddingModel> = corpora
            .par_iter()
            .map(|docs| train(&Self::training_units(docs, aliases), &cfg))
            .collect::<Result<_>>()?;
        for (s, m) in self.source_ids().iter().zip(&models) {
            let p = self.path(&format!("models/{}.sgns", file_stem(s)))?;
            m.save(p)?;
        }
        Ok(models)
    }

    pub fn load_models(&self) -> Result<Vec<EmbeddingModel>> {
        self.source_ids()
            .iter()
            .map(|s| EmbeddingModel::load(self.existing(&format!("models/{}.sgns", file_stem(s)), Stage::Embed)?))
            .collect()
    }

    // alignment

    pub fn align(
        &mut self,
        models: &[EmbeddingModel],
        charset: &[String],
        axes: &[AxisLexicon],
    ) -> Result<(Vec<NameSimilarity>, Vec<PairStability>)> {
        self.config.require_comparison()?;
        let ids = self.source_ids();
        let mut sims = Vec::new();
        let mut stability = Vec::new();
        for (s, m) in ids.iter().zip(models).skip(1) {
            let pair = procrustes_align(m, &models[0])?;
            let tokens: Vec<(String, String)> = charset
                .iter()
                .map(|n| (n.clone(), canonical_token(n)))
                .filter(|(_, t)| pair.is_shared(t))
                .collect();
            let tok_list: Vec<String> = tokens.iter().map(|(_, t)| t.clone()).collect();
            let by_token = cross_model_similarity(&pair, &tok_list)?;
            let similarities = tokens.iter().map(|(n, t)| (n.clone(), by_token[t])).collect();
            sims.push(NameSimilarity {
                source: s.clone(),
                reference: ids[0].clone(),
                shared_vocab: pair.shared_vocab.len(),
                similarities,
            });
            if !axes.is_empty() {
                let baseline = if self.config.baseline_words.is_empty() {
                    let shared: BTreeSet<&str> = pair.shared_vocab.iter().map(String::as_str).collect();
                    models[0]
                        .vocab()
                        .iter()
                        .filter(|(t, _)| shared.contains(t.as_str()))
                        .take(20)
                        .map(|(t, _)| t.clone())
                        .collect()
                } else {
                    self.config.baseline_words.clone()
                };
                stability.push(PairStability {
                    source: s.clone(),
                    reference: ids[0].clone(),
                    stability: seed_stability_report(&pair, axes, &baseline)?,
                });
            }
        }
        let maps: Vec<BTreeMap<String, f64>> = sims.iter().map(|s| s.similarities.clone()).collect();
        if maps.iter().all(BTreeMap::is_empty) {
            return Err(Error::Degenerate("no character name is in any shared vocabulary".into()));
        }
        let p = self.path("similarity.csv")?;
        write_similarity_csv(p, &maps)?;
        if !stability.is_empty() {
            self.write_json("seed_stability.json", &stability)?;
        }
        Ok((sims, stability))
    }

    // axes

    /// Rankings for the last two sources: per-model scores, or scores
    /// against the reference poles when `aligned_axes` is set.
    pub fn axis_rankings(
        &mut self,
        models: &[EmbeddingModel],
        charset: &[String],
        axes: &[AxisLexicon],
    ) -> Result<Vec<AxisComparison>> {
        self.config.require_comparison()?;
        let ids = self.source_ids();
        let n = models.len();
        let (m1, m2) = (&models[n - 2], &models[n - 1]);
        let names: HashMap<String, String> = charset.iter().map(|c| (canonical_token(c), c.clone())).collect();
        let words: Vec<String> = charset
            .iter()
            .map(|c| canonical_token(c))
            .filter(|t| m1.contains(t) && m2.contains(t))
            .collect();
        if words.is_empty() {
            return Err(Error::Degenerate("no character name is in both compared models".into()));
        }
        let aligned = if self.config.aligned_axes {
            let rotate = |i: usize| -> Result<EmbeddingModel> {
                if i == 0 {
                    Ok(models[0].clone())
                } else {
                    Ok(procrustes_align(&models[i], &models[0])?.source_model)
                }
            };
            Some((rotate(n - 2)?, rotate(n - 1)?))
        } else {
            None
        };
        let mut out = Vec::new();
        for ax in axes {
            for method in [AxisMethod::Semaxis, AxisMethod::Rnd] {
                let mut rows = match &aligned {
                    Some((a1, a2)) => compare_on_axis_aligned(&models[0], a1, a2, &words, ax, method)?,
                    None => compare_on_axis(m1, m2, &words, ax, method)?,
                };
                for r in &mut rows {
                    r.word = names[&r.word].clone();
                }
                rows.sort_by(|a, b| a.rank_model1.total_cmp(&b.rank_model1).then_with(|| a.word.cmp(&b.word)));
                let p = self.path(&format!("axes_{}_{}.csv", file_stem(&ax.name), method.as_str()))?;
                write_axis_report_csv(p, &rows)?;
                out.push(AxisComparison {
                    axis: ax.name.clone(),
                    method,
                    model1: ids[n - 2].clone(),
                    model2: ids[n - 1].clone(),
                    rows,
                });
            }
        }
        Ok(out)
    }

    // descriptions and log-odds

    pub fn describe(&mut self, aliases: &AliasTable) -> Result<Option<(Vec<Description>, usize)>> {
        let Some(mpath) = self.config.parse_manifest_path.clone() else {
            return Ok(None);
        };
        let (manifest, base) = ParseManifest::load(&mpath)?;
        let ex = manifest.extract(&base, aliases)?;
        let p = self.path("descriptions.csv")?;
        write_descriptions_csv(p, &ex.descriptions)?;
        let mut order: Vec<String> = Vec::new();
        for d in &manifest.documents {
            if !order.contains(&d.context) {
                order.push(d.context.clone());
            }
        }
        self.write_json("contexts.json", &order)?;
        Ok(Some((ex.descriptions, ex.unlabeled_sentences)))
    }

    /// Descriptions re-read from `descriptions.csv`, one entry per count.
    pub fn load_descriptions(&self) -> Result<Vec<Description>> {
        let p = self.existing("descriptions.csv", Stage::Describe)?;
        let mut r = csv::Reader::from_path(&p)?;
        crate::corpus::expect_header(&mut r, &["context", "character", "lemma", "cls", "count"])?;
        let mut out = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let cls: DescClass = serde_json::from_value(serde_json::Value::String(rec[3].to_string()))?;
            let n: u64 = rec[4]
                .parse()
                .map_err(|_| Error::invalid(format!("bad count {:?}", &rec[4])))?;
            for _ in 0..n {
                out.push(Description {
                    character: rec[1].to_string(),
                    lemma: rec[2].to_string(),
                    cls,
                    context_label: rec[0].to_string(),
                    doc_id: String::new(),
                });
            }
        }
        Ok(out)
    }

    fn contexts(&self, descs: &[Description]) -> Result<Vec<String>> {
        let p = self.out.join("contexts.json");
        let mut order: Vec<String> = if p.exists() {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            serde_json::from_str(&text)?
        } else {
            Vec::new()
        };
        let present: BTreeSet<&str> = descs.iter().map(|d| d.context_label.as_str()).collect();
        order.retain(|c| present.contains(c.as_str()));
        for c in present {
            if !order.iter().any(|o| o == c) {
                order.push(c.to_string());
            }
        }
        Ok(order)
    }

    pub fn logodds(&mut self, descs: &[Description], unlabeled: usize) -> Result<DescriptionReport> {
        let contexts = self.contexts(descs)?;
        if contexts.len() < 2 {
            return Err(Error::Degenerate(format!(
                "log-odds needs two description contexts, found {}",
                contexts.len()
            )));
        }
        let (ca, cb) = (&contexts[0], &contexts[1]);
        let a = context_lemma_counts(descs, ca);
        let b = context_lemma_counts(descs, cb);
        let prior = default_prior_scale(&a, &b);
        let ab = weighted_log_odds(&a, &b, prior)?;
        let ba = weighted_log_odds(&b, &a, prior)?;
        let threshold = self.config.logodds_threshold;
        let p = self.path("logodds.csv")?;
        write_logodds_csv(p, &ab, threshold)?;
        let mut distinctive = BTreeMap::new();
        distinctive.insert(ca.clone(), select_distinctive(&ab, threshold));
        distinctive.insert(cb.clone(), select_distinctive(&ba, threshold));
        Ok(DescriptionReport {
            contexts: vec![ca.clone(), cb.clone()],
            descriptions: descs.len(),
            unlabeled_sentences: unlabeled,
            log_odds: ab,
            distinctive,
        })
    }

    pub fn axis_summaries(
        &mut self,
        models: &[EmbeddingModel],
        desc: &DescriptionReport,
        axes: &[AxisLexicon],
    ) -> Result<(Vec<AxisSummary>, Vec<String>)> {
        let ids = self.source_ids();
        let idx = match &self.config.description_source {
            Some(s) => ids.iter().position(|i| i == s).expect("validated"),
            None => ids.len() - 1,
        };
        let model = &models[idx];
        let mut out = Vec::new();
        let mut skipped = Vec::new();
        for ctx in &desc.contexts {
            let terms = &desc.distinctive[ctx];
            for ax in axes {
                for method in [AxisMethod::Semaxis, AxisMethod::Rnd] {
                    match axis_summary(model, terms, ax, method, ctx) {
                        Ok(s) => out.push(s),
                        Err(Error::Degenerate(_)) => skipped.push(format!("{ctx}/{}/{}", ax.name, method)),
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        let p = self.path("axis_summary.csv")?;
        write_summary_csv(p, &out)?;
        Ok((out, skipped))
    }

    /// Run one stage on its own, reading earlier stages' files as needed.
    pub fn run_stage(&mut self, st: Stage) -> Result<()> {
        let r = (|| -> Result<()> {
            match st {
                Stage::Ingest => {
                    let c = self.corpora()?;
                    self.ingest(&c)?;
                }
                Stage::Mentions => {
                    let (c, a) = (self.corpora()?, self.aliases()?);
                    self.mentions(&c, &a)?;
                }
                Stage::Charset => {
                    let m = self.load_mentions()?;
                    self.charset(&m)?;
                }
                Stage::Network => {
                    let (c, a, cs) = (self.corpora()?, self.aliases()?, self.load_charset()?);
                    self.networks(&c, &cs, &a)?;
                }
                Stage::Metrics => {
                    let n = self.load_networks()?;
                    self.metrics(&n)?;
                }
                Stage::Embed => {
                    let (c, a) = (self.corpora()?, self.aliases()?);
                    self.embed(&c, &a)?;
                }
                Stage::Align => {
                    let (m, cs, ax) = (self.load_models()?, self.load_charset()?, self.axes()?);
                    self.align(&m, &cs, &ax)?;
                }
                Stage::Axes => {
                    let (m, cs, ax) = (self.load_models()?, self.load_charset()?, self.axes()?);
                    self.axis_rankings(&m, &cs, &ax)?;
                }
                Stage::Describe => {
                    let a = self.aliases()?;
                    if self.describe(&a)?.is_none() {
                        return Err(Error::invalid("config has no parse_manifest_path"));
                    }
                }
                Stage::Logodds => {
                    let d = self.load_descriptions()?;
                    self.logodds(&d, 0)?;
                }
            }
            Ok(())
        })();
        stage(st, r)
    }

    fn write_manifest(&self, completed: &[&str], failure: Option<&Error>) -> Result<()> {
        let mut files = Vec::new();
        for rel in &self.written {
            let p = self.out.join(rel);
            let bytes = std::fs::read(&p).map_err(|e| Error::io(&p, e))?;
            let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            files.push(ManifestFile {
                path: rel.join("/"),
                bytes: bytes.len() as u64,
                sha256: digest,
            });
        }
        let m = Manifest {
            complete: failure.is_none(),
            stages: completed.iter().map(|s| s.to_string()).collect(),
            error: failure.map(|e| e.to_string()),
            files,
        };
        let p = self.out.join("MANIFEST.json");
        let mut bytes = serde_json::to_vec_pretty(&m)?;
        bytes.push(b'\n');
        std::fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub source: String,
    pub kind: DocKind,
    pub documents: usize,
    pub units: usize,
    pub tokens: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub complete: bool,
    pub stages: Vec<String>,
    pub error: Option<String>,
    pub files: Vec<ManifestFile>,
}

/// Union of every source's top `k` mentions, restricted to the character set.
fn chi_square_rows(mentions: &MentionTable, ids: &[String], charset: &[String], k: usize) -> Vec<String> {
    let top: BTreeSet<String> = ids.iter().flat_map(|s| mentions.top_k(s, k)).collect();
    charset.iter().filter(|c| top.contains(*c)).cloned().collect()
}

/// Full run: every stage in order, then `report.json` and `MANIFEST.json`.
/// On failure the manifest lists the files written so far and is marked
/// incomplete.
pub fn run_pipeline(config: &RunConfig) -> Result<ComparisonReport> {
    let mut ws = Workspace::new(config)?;
    ws.config.require_comparison()?;
    let mut done: Vec<&str> = Vec::new();
    let result = run_all(&mut ws, &mut done);
    let failure = result.as_ref().err();
    ws.write_manifest(&done, failure)?;
    result
}

fn run_all(ws: &mut Workspace, done: &mut Vec<&'static str>) -> Result<ComparisonReport> {
    macro_rules! step {
        ($st:expr, $e:expr) => {{
            let v = stage($st, $e)?;
            done.push($st.as_str());
            v
        }};
    }
    let ids = ws.source_ids();
    let (corpora, aliases, axes) = step!(Stage::Ingest, (|| {
        let corpora = ws.corpora()?;
        ws.ingest(&corpora)?;
        Ok((corpora, ws.aliases()?, ws.axes()?))
    })());
    let mentions = step!(Stage::Mentions, ws.mentions(&corpora, &aliases));
    let charset = step!(Stage::Charset, ws.charset(&mentions));
    let nets = step!(Stage::Network, ws.networks(&corpora, &charset, &aliases));
    let metrics = step!(Stage::Metrics, ws.metrics(&nets));
    let models = step!(Stage::Embed, ws.embed(&corpora, &aliases));
    let (name_similarities, seed_stability) = step!(Stage::Align, ws.align(&models, &charset, &axes));
    let axis_rankings = step!(Stage::Axes, ws.axis_rankings(&models, &charset, &axes));
    let described = step!(Stage::Describe, ws.describe(&aliases));
    let (descriptions, axis_summaries, axis_summaries_skipped) = match described {
        Some((descs, unlabeled)) => step!(Stage::Logodds, (|| {
            let rep = ws.logodds(&descs, unlabeled)?;
            let (sums, skipped) = ws.axis_summaries(&models, &rep, &axes)?;
            Ok((Some(rep), sums, skipped))
        })()),
        None => (None, Vec::new(), Vec::new()),
    };

    let mention_counts: Vec<SourceCounts> = ids
        .iter()
        .map(|s| SourceCounts {
            source: s.clone(),
            counts: charset.iter().map(|c| (c.clone(), mentions.count(s, c))).collect(),
        })
        .collect();
    let rows = chi_square_rows(&mentions, &ids, &charset, ws.config.chi_square_top);
    let table: Vec<Vec<u64>> = rows
        .iter()
        .map(|c| ids.iter().map(|s| mentions.count(s, c)).collect())
        .collect();
    let chi = stage(Stage::Mentions, chi_square_independence(&table))?;

    let mut rank_tables = vec![MetricRanks {
        metric: MENTIONS_METRIC.to_string(),
        by_source: mention_counts
            .iter()
            .map(|sc| SourceRanks {
                source: sc.source.clone(),
                ranks: to_ranks(&sc.counts.iter().map(|(k, &v)| (k.clone(), v as f64)).collect()),
            })
            .collect(),
    }];
    for (k, m) in MetricKind::ALL.iter().enumerate() {
        rank_tables.push(MetricRanks {
            metric: m.as_str().to_string(),
            by_source: ids
                .iter()
                .zip(&metrics)
                .map(|(s, ms)| SourceRanks {
                    source: s.clone(),
                    ranks: ms[k].ranks(),
                })
                .collect(),
        });
    }
    let mut rank_shifts = Vec::new();
    for t in &rank_tables {
        let from = &t.by_source[0];
        for to in &t.by_source[1..] {
            rank_shifts.push(RankShift {
                metric: t.metric.clone(),
                from: from.source.clone(),
                to: to.source.clone(),
                shifts: rank_shift(&from.ranks, &to.ranks)?,
            });
        }
    }

    let mut config = ws.config.clone();
    config.output_dir = PathBuf::from(".");
    let report = ComparisonReport {
        config,
        reference: ws.config.reference().to_string(),
        sources: ids,
        character_set: charset,
        mention_counts,
        mention_chi_square: ChiSquareTest { rows, result: chi },
        rank_tables,
        rank_shifts,
        name_similarities,
        seed_stability,
        axis_rankings,
        descriptions,
        axis_summaries,
        axis_summaries_skipped,
    };
    ws.write_json("report.json", &report)?;
    for fig in Figure::ALL {
        let p = ws.path(&format!("plot_{}.csv", fig.as_str()))?;
        emit_plotdata(&report, fig, p)?;
    }
    Ok(report)
}

// --- plot data -------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    SlopeRanks,
    NameSimilarity,
    AxisShift,
}

impl Figure {
    pub const ALL: [Figure; 3] = [Figure::SlopeRanks, Figure::NameSimilarity, Figure::AxisShift];

    pub fn as_str(self) -> &'static str {
        match self {
            Figure::SlopeRanks => "slope_ranks",
            Figure::NameSimilarity => "name_similarity",
            Figure::AxisShift => "axis_shift",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

fn fmt_num(x: f64) -> String {
    x.to_string()
}

fn missing(section: &str) -> Error {
    Error::invalid(format!("report has no {section} section"))
}

/// Write the CSV behind one figure type.
pub fn emit_plotdata(report: &ComparisonReport, figure: Figure, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    match figure {
        Figure::SlopeRanks => {
            if report.rank_tables.is_empty() {
                return Err(missing("rank table"));
            }
            let n = report.rank_tables[0].by_source.len();
            let mut header = vec!["name".to_string(), "metric".to_string()];
            header.extend((1..=n).map(|i| format!("rank_source{i}")));
            w.write_record(&header)?;
            for t in &report.rank_tables {
                let mut names: Vec<&String> = t.by_source[0]
                    .ranks
                    .ranks
                    .keys()
                    .filter(|k| t.by_source.iter().all(|s| s.ranks.ranks.contains_key(*k)))
                    .collect();
                if names.is_empty() {
                    return Err(Error::Degenerate(format!("metric {}: no character is ranked in every source", t.metric)));
                }
                let first = &t.by_source[0].ranks.ranks;
                names.sort_by(|a, b| first[*a].total_cmp(&first[*b]).then_with(|| a.cmp(b)));
                for name in names {
                    let mut rec = vec![name.clone(), t.metric.clone()];
                    rec.extend(t.by_source.iter().map(|s| fmt_num(s.ranks.ranks[name])));
                    w.write_record(&rec)?;
                }
            }
        }
        Figure::NameSimilarity => {
            if report.name_similarities.is_empty() {
                return Err(missing("name similarity"));
            }
            let mut header = vec!["name".to_string()];
            header.extend((1..=report.name_similarities.len()).map(|i| format!("cosine_pair{i}")));
            w.write_record(&header)?;
            let mut names: Vec<&String> = report.name_similarities[0]
                .similarities
                .keys()
                .filter(|k| report.name_similarities.iter().all(|s| s.similarities.contains_key(*k)))
                .collect();
            if names.is_empty() {
                return Err(Error::Degenerate("no character has a similarity in every model pair".into()));
            }
            let order = report
                .ranks(MENTIONS_METRIC)
                .map(|t| t.by_source[0].ranks.ranks.clone())
                .unwrap_or_default();
            let key = |n: &String| order.get(n).copied().unwrap_or(f64::INFINITY);
            names.sort_by(|a, b| key(a).total_cmp(&key(b)).then_with(|| a.cmp(b)));
            for name in names {
                let mut rec = vec![name.clone()];
                rec.extend(report.name_similarities.iter().map(|s| fmt_num(s.similarities[name])));
                w.write_record(&rec)?;
            }
        }
        Figure::AxisShift => {
            if report.axis_rankings.is_empty() {
                return Err(missing("axis ranking"));
            }
            w.write_record([
                "axis", "method", "name", "score", "rank_model1", "rank_model2", "shift", "emphasized",
            ])?;
            for c in &report.axis_rankings {
                if c.rows.is_empty() {
                    return Err(Error::Degenerate(format!("axis {}: no ranked characters", c.axis)));
                }
                let mut rows: Vec<&AxisReportRow> = c.rows.iter().collect();
                rows.sort_by(|a, b| a.rank_model1.total_cmp(&b.rank_model1).then_with(|| a.word.cmp(&b.word)));
                for r in rows {
                    w.write_record([
                        c.axis.as_str(),
                        c.method.as_str(),
                        r.word.as_str(),
                        &fmt_num(r.score),
                        &fmt_num(r.rank_model1),
                        &fmt_num(r.rank_model2),
                        &fmt_num(r.shift),
                        &r.emphasized.to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io("plot data", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axes::EMPHASIS_THRESHOLD;

    fn ranks(pairs: &[(&str, f64)]) -> RankVector {
        RankVector {
            ranks: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn tiny_report() -> ComparisonReport {
        ComparisonReport {
            config: RunConfig::default(),
            sources: vec!["a".into(), "b".into()],
            reference: "a".into(),
            character_set: vec!["X".into(), "Y".into(), "Z".into()],
            mention_counts: Vec::new(),
            mention_chi_square: ChiSquareTest {
                rows: Vec::new(),
                result: ChiSquareResult { statistic: 0.0, df: 1, p_value: 1.0, cramers_v: 0.0, n: 0 },
            },
            rank_tables: vec![MetricRanks {
                metric: "betweenness".into(),
                by_source: vec![
                    SourceRanks { source: "a".into(), ranks: ranks(&[("X", 2.0), ("Y", 1.0), ("Z", 3.0)]) },
                    SourceRanks { source: "b".into(), ranks: ranks(&[("X", 1.0), ("Y", 3.0), ("Z", 2.0)]) },
                ],
            }],
            rank_shifts: Vec::new(),
            name_similarities: Vec::new(),
            seed_stability: Vec::new(),
            axis_rankings: vec![AxisComparison {
                axis: "ax".into(),
                method: AxisMethod::Semaxis,
                model1: "a".into(),
                model2: "b".into(),
                rows: [("X", 1.0, 7.0), ("Y", 8.0, 1.0)]
                    .iter()
                    .map(|&(w, r1, r2)| AxisReportRow {
                        word: w.into(),
                        axis: "ax".into(),
                        method: AxisMethod::Semaxis,
                        score: 0.0,
                        rank_model1: r1,
                        rank_model2: r2,
                        shift: r1 - r2,
                        emphasized: (r1 - r2).abs() > EMPHASIS_THRESHOLD,
                    })
                    .collect(),
            }],
            descriptions: None,
            axis_summaries: Vec::new(),
            axis_summaries_skipped: Vec::new(),
        }
    }

    #[test]
    fn slope_ranks_rows_and_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        emit_plotdata(&tiny_report(), Figure::SlopeRanks, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "name,metric,rank_source1,rank_source2");
        assert_eq!(&lines[1..], ["Y,betweenness,1,3", "X,betweenness,2,1", "Z,betweenness,3,2"]);
    }

    #[test]
    fn axis_shift_flags_and_missing_sections() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        emit_plotdata(&tiny_report(), Figure::AxisShift, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("ax,semaxis,X,0,1,7,-6,false"));
        assert!(text.contains("ax,semaxis,Y,0,8,1,7,true"));
        assert!(emit_plotdata(&tiny_report(), Figure::NameSimilarity, &p).is_err());
        let mut r = tiny_report();
        r.rank_tables[0].by_source[1].ranks = ranks(&[("Q", 1.0)]);
        assert!(emit_plotdata(&r, Figure::SlopeRanks, &p).is_err());
    }

    #[test]
    fn config_rules() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_err());
        c.sources.push(SourceSpec { source_id: "a".into(), corpus_path: "a.jsonl".into(), kind: DocKind::Longform });
        c.validate().unwrap();
        assert_eq!(c.require_comparison().unwrap_err().to_string(), "invalid input: comparison requires ≥2 sources");
        c.sources.push(c.sources[0].clone());
        assert!(c.validate().is_err());
        c.sources[1].source_id = "b".into();
        c.seed = 42;
        let r = c.resolved();
        assert_eq!((r.embed.seed, r.corep.seed), (42, 42));
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
        let minimal: RunConfig = serde_json::from_str(r#"{"sources": [], "alias_path": "x"}"#).unwrap();
        assert_eq!(minimal.top_k, 100);
        assert_eq!(minimal.logodds_threshold, 1.64);
    }

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
        }
        for f in Figure::ALL {
            assert_eq!(f.as_str().parse::<Figure>().unwrap(), f);
        }
    }
}
