//! Skip-gram word embeddings trained with negative sampling.
//!
//! Training is single-threaded and fully determined by the seed. A context
//! window never crosses the boundary of a training unit (a paragraph or a
//! comment).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub dim: usize,
    /// Maximum window radius; the radius is drawn from `1..=window` per position.
    pub window: usize,
    pub min_count: u64,
    pub negative: usize,
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    /// Frequent-word downsampling threshold; zero, negative, or infinite
    /// disables downsampling.
    pub subsample_t: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            min_count: 5,
            negative: 5,
            epochs: 5,
            lr_start: 0.025,
            lr_end: 1e-4,
            subsample_t: 1e-3,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.min_count == 0 || self.negative == 0 {
            return Err(Error::invalid("dim, window, min_count and negative must be at least 1"));
        }
        if !(self.lr_start > 0.0 && self.lr_end >= 0.0 && self.lr_end < self.lr_start) {
            return Err(Error::invalid("learning rates must satisfy 0 <= lr_end < lr_start"));
        }
        Ok(())
    }

}

/// Tokens kept after `min_count`, most frequent first, ties by token.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    pub entries: Vec<(String, u64)>,
}

impl Vocab {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.as_str(), i))
            .collect()
    }
}

pub fn build_vocab(units: &[Vec<String>], min_count: u64) -> Result<Vocab> {
    let mut freq: HashMap<&str, u64> = HashMap::new();
    for tok in units.iter().flatten() {
        *freq.entry(tok.as_str()).or_insert(0) += 1;
    }
    if freq.is_empty() {
        return Err(Error::Degenerate("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut entries: Vec<(String, u64)> = freq
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(Vocab { entries })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    vocab: Vec<(String, u64)>,
    index: HashMap<String, usize>,
    pub input_vectors: Array2<f64>,
    pub output_vectors: Array2<f64>,
}

impl EmbeddingModel {
    pub fn new(vocab: Vec<(String, u64)>, input: Array2<f64>, output: Array2<f64>) -> Result<Self> {
        if input.nrows() != vocab.len() || output.dim() != input.dim() {
            return Err(Error::invalid("embedding matrices do not match the vocabulary"));
        }
        if input.iter().chain(output.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("embedding matrices contain non-finite values"));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, (t, _)) in vocab.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(EmbeddingModel {
            vocab,
            index,
            input_vectors: input.as_standard_layout().into_owned(),
            output_vectors: output.as_standard_layout().into_owned(),
        })
    }

    pub fn dim(&self) -> usize {
        self.input_vectors.ncols()
    }

    pub fn vocab(&self) -> &[(String, u64)] {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word_index(&self, word: &str) -> Result<usize> {
        self.index
            .get(word)
            .copied()
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))
    }

    /// Input vector of `word`.
    pub fn vector(&self, word: &str) -> Result<&[f64]> {
        let i = self.word_index(word)?;
        let d = self.dim();
        Ok(&self.input_vectors.as_slice().expect("standard layout")[i * d..(i + 1) * d])
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "sgns {} {}", self.len(), self.dim()).map_err(io)?;
        let mut line = String::new();
        for m in [&self.input_vectors, &self.output_vectors] {
            for ((tok, freq), row) in self.vocab.iter().zip(m.rows()) {
                line.clear();
                write!(line, "{tok} {freq}").unwrap();
                for x in row {
                    write!(line, " {x:.16e}").unwrap();
                }
                writeln!(out, "{line}").map_err(io)?;
            }
        }
        out.flush().map_err(io)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let perr = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let (_, header) = lines.next().ok_or_else(|| perr(1, "empty model file".into()))?;
        let header = header.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (n, dim) = match fields.as_slice() {
            ["sgns", n, d] => (
                n.parse::<usize>().map_err(|e| perr(1, e.to_string()))?,
                d.parse::<usize>().map_err(|e| perr(1, e.to_string()))?,
            ),
            _ => return Err(perr(1, format!("bad header {header:?}"))),
        };
        let mut vocab = Vec::with_capacity(n);
        let mut blocks = [Array2::zeros((n, dim)), Array2::zeros((n, dim))];
        for (b, block) in blocks.iter_mut().enumerate() {
            for row in 0..n {
                let (i, line) = lines
                    .next()
                    .ok_or_else(|| perr(0, "model file is truncated".into()))?;
                let line = line.map_err(|e| Error::io(path, e))?;
                let mut parts = line.split(' ');
                let tok = parts.next().unwrap_or_default().to_string();
                let freq: u64 = parts
                    .next()
                    .ok_or_else(|| perr(i + 1, "missing frequency".into()))?
                    .parse()
                    .map_err(|e: std::num::ParseIntError| perr(i + 1, e.to_string()))?;
                let values: Vec<f64> = parts
                    .map(str::parse::<f64>)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| perr(i + 1, e.to_string()))?;
                if values.len() != dim {
                    return Err(perr(i + 1, format!("expected {dim} values, found {}", values.len())));
                }
                if b == 0 {
                    vocab.push((tok, freq));
                } else if vocab[row].0 != tok {
                    return Err(perr(i + 1, "output block does not match input vocabulary".into()));
                }
                for (k, v) in values.into_iter().enumerate() {
                    block[[row, k]] = v;
                }
            }
        }
        let [input, output] = blocks;
        EmbeddingModel::new(vocab, input, output)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Loss `-ln s(u.v) - sum ln s(-u_n.v)` for one positive pair and its
/// negatives, where `v` is the center (input) vector.
pub fn sgns_loss(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> f64 {
    softplus(-dot(context, center))
        + negatives.iter().map(|n| softplus(dot(n, center))).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradient of [`sgns_loss`] with respect to every vector.
pub fn sgns_gradient(center: &[f64], context: &[f64], negatives: &[Vec<f64>]) -> SgnsGradient {
    let g_pos = sigmoid(dot(context, center)) - 1.0;
    let mut g_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
    let mut g_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = sigmoid(dot(n, center));
        for (gc, u) in g_center.iter_mut().zip(n) {
            *gc += g * u;
        }
        g_negs.push(center.iter().map(|v| g * v).collect());
    }
    SgnsGradient {
        center: g_center,
        context: center.iter().map(|v| g_pos * v).collect(),
        negatives: g_negs,
    }
}

/// One SGD step on a single (center, context) pair. Returns the loss before
/// the update; all gradients are taken at the pre-update point.
pub fn sgns_pair_step(
    center: &mut [f64],
    context: &mut [f64],
    negatives: &mut [Vec<f64>],
    lr: f64,
) -> f64 {
    assert_eq!(center.len(), context.len(), "vector dimensions differ");
    let loss = sgns_loss(center, context, negatives);
    let grad = sgns_gradient(center, context, negatives);
    for (x, g) in center.iter_mut().zip(&grad.center) {
        *x -= lr * g;
    }
    for (x, g) in context.iter_mut().zip(&grad.context) {
        *x -= lr * g;
    }
    for (n, gn) in negatives.iter_mut().zip(&grad.negatives) {
        for (x, g) in n.iter_mut().zip(gn) {
            *x -= lr * g;
        }
    }
    loss
}

/// Draws vocabulary indices with probability proportional to `count^0.75`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
    probs: Vec<f64>,
}

impl NegativeSampler {
    pub fn new(vocab: &Vocab) -> Self {
        let weights: Vec<f64> = vocab.entries.iter().map(|e| (e.1 as f64).powf(0.75)).collect();
        let total: f64 = weights.iter().sum();
        NegativeSampler {
            dist: WeightedIndex::new(&weights).expect("non-empty vocabulary with positive counts"),
            probs: weights.iter().map(|w| w / total).collect(),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainStats {
    /// Mean per-pair loss in each epoch.
    pub epoch_loss: Vec<f64>,
    pub pairs: u64,
}

/// Keep-probability for a token with `count` occurrences among `total`.
fn keep_probability(count: u64, total: u64, t: f64) -> f64 {
    let threshold = t * total as f64;
    let c = count as f64;
    ((c / threshold).sqrt() + 1.0) * threshold / c
}

/// Per-token keep probability under frequency downsampling; values at or
/// above 1 mean the token is always kept.
pub fn keep_probabilities(vocab: &Vocab, subsample_t: f64) -> Vec<f64> {
    let total: u64 = vocab.entries.iter().map(|e| e.1).sum();
    let on = subsample_t.is_finite() && subsample_t > 0.0;
    vocab
        .entries
        .iter()
        .map(|e| if on { keep_probability(e.1, total, subsample_t) } else { f64::INFINITY })
        .collect()
}

pub fn train(units: &[Vec<String>], config: &TrainConfig) -> Result<EmbeddingModel> {
    train_with_stats(units, config).map(|(m, _)| m)
}

pub fn train_with_stats(
    units: &[Vec<String>],
    config: &TrainConfig,
) -> Result<(EmbeddingModel, TrainStats)> {
    config.validate()?;
    let vocab = build_vocab(units, config.min_count)?;
    if vocab.is_empty() {
        return Err(Error::Degenerate(format!(
            "no token reaches min_count {}",
            config.min_count
        )));
    }
    let index = vocab.index();
    let seqs: Vec<Vec<usize>> = units
        .iter()
        .map(|u| u.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let total_words: u64 = vocab.entries.iter().map(|e| e.1).sum();
    let (v, dim) = (vocab.len(), config.dim);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / dim as f64;
    let mut input: Vec<f64> = (0..v * dim).map(|_| rng.gen_range(-bound..bound)).collect();
    let mut output = vec![0.0; v * dim];

    let noise = NegativeSampler::new(&vocab);
    let keep = keep_probabilities(&vocab, config.subsample_t);

    let planned = (config.epochs as u64 * total_words).max(1) as f64;
    let mut processed = 0u64;
    let mut stats = TrainStats::default();
    let mut neu = vec![0.0; dim];
    let mut kept = Vec::new();
    let mut targets = Vec::with_capacity(config.negative + 1);
    for _ in 0..config.epochs {
        let (mut loss_sum, mut pairs) = (0.0, 0u64);
        for seq in &seqs {
            kept.clear();
            for &w in seq {
                if keep[w] >= 1.0 || rng.gen::<f64>() < keep[w] {
                    kept.push(w);
                }
            }
            let lr = config.lr_start
                - (config.lr_start - config.lr_end) * (processed as f64 / planned);
            processed += seq.len() as u64;
            for i in 0..kept.len() {
                let radius = rng.gen_range(1..=config.window);
                let lo = i.saturating_sub(radius);
                let hi = (i + radius).min(kept.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let (center, ctx) = (kept[i], kept[j]);
                    targets.clear();
                    targets.push((ctx, true));
                    for _ in 0..config.negative {
                        let n = noise.draw(&mut rng);
                        if n != ctx {
                            targets.push((n, false));
                        }
                    }
                    loss_sum += update_pair(
                        &mut input[center * dim..(center + 1) * dim],
                        &mut output,
                        dim,
                        &targets,
                        lr,
                        &mut neu,
                    );
                    pairs += 1;
                }
            }
        }
        stats.pairs += pairs;
        stats
            .epoch_loss
            .push(if pairs > 0 { loss_sum / pairs as f64 } else { 0.0 });
    }
    let model = EmbeddingModel::new(
        vocab.entries,
        Array2::from_shape_vec((v, dim), input).expect("shape"),
        Array2::from_shape_vec((v, dim), output).expect("shape"),
    )?;
    Ok((model, stats))
}

/// In-place update of one center row against its positive and negative
/// output rows. Output rows are updated as they are visited.
fn update_pair(
    center: &mut [f64],
    output: &mut [f64],
    dim: usize,
    targets: &[(usize, bool)],
    lr: f64,
    neu: &mut [f64],
) -> f64 {
    neu.iter_mut().for_each(|x| *x = 0.0);
    let mut loss = 0.0;
    for &(t, positive) in targets {
        let row = &mut output[t * dim..(t + 1) * dim];
        let f = dot(center, row);
        // descent direction scaled: (label - s(f))
        let g = if positive {
            loss += softplus(-f);
            1.0 - sigmoid(f)
        } else {
            loss += softplus(f);
            -sigmoid(f)
        };
        for k in 0..dim {
            neu[k] += g * row[k];
            row[k] += lr * g * center[k];
        }
    }
    for k in 0..dim {
        center[k] += lr * neu[k];
    }
    loss
}

/// Cosine similarity of two words' input vectors.
pub fn cosine(model: &EmbeddingModel, w1: &str, w2: &str) -> Result<f64> {
    cosine_of(model.vector(w1)?, model.vector(w2)?)
}

pub fn cosine_of(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::Degenerate("cosine of a zero vector".into()));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units(lines: &[&str]) -> Vec<Vec<String>> {
        lines
            .iter()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    }

    fn toy_model(rows: &[(&str, [f64; 2])]) -> EmbeddingModel {
        let vocab = rows.iter().map(|(t, _)| (t.to_string(), 1)).collect();
        let flat: Vec<f64> = rows.iter().flat_map(|(_, v)| *v).collect();
        let m = Array2::from_shape_vec((rows.len(), 2), flat).unwrap();
        EmbeddingModel::new(vocab, m.clone(), m).unwrap()
    }

    #[test]
    fn vocab_rules() {
        let v = build_vocab(&units(&["a a a b"]), 2).unwrap();
        assert_eq!(v.entries, vec![("a".to_string(), 3)]);
        let v = build_vocab(&units(&["c b a b"]), 1).unwrap();
        assert_eq!(
            v.entries,
            vec![("b".to_string(), 2), ("a".to_string(), 1), ("c".to_string(), 1)]
        );
        assert!(build_vocab(&[], 1).is_err());
        assert!(build_vocab(&units(&[""]), 1).is_err());
    }

    #[test]
    fn loss_at_zero_and_saturation() {
        let z = vec![0.0; 4];
        assert!((sgns_loss(&z, &z, &[]) - std::f64::consts::LN_2).abs() < 1e-15);
        let big = vec![100.0, 0.0];
        assert!(sgns_loss(&big, &big, &[]) < 1e-300);
        let mut c = z.clone();
        let mut u = z.clone();
        assert!((sgns_pair_step(&mut c, &mut u, &mut [], 0.1) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn step_moves_along_negative_gradient() {
        let center = vec![0.3, -0.2, 0.1];
        let context = vec![-0.1, 0.4, 0.2];
        let negs = vec![vec![0.05, 0.1, -0.3], vec![0.2, 0.2, 0.2]];
        let g = sgns_gradient(&center, &context, &negs);
        let (mut c, mut u, mut n) = (center.clone(), context.clone(), negs.clone());
        sgns_pair_step(&mut c, &mut u, &mut n, 0.5);
        for k in 0..3 {
            assert!((c[k] - (center[k] - 0.5 * g.center[k])).abs() < 1e-15);
            assert!((u[k] - (context[k] - 0.5 * g.context[k])).abs() < 1e-15);
            assert!((n[1][k] - (negs[1][k] - 0.5 * g.negatives[1][k])).abs() < 1e-15);
        }
        assert!(sgns_loss(&c, &u, &n) < sgns_loss(&center, &context, &negs));
    }

    #[test]
    fn in_place_update_matches_pure_step_for_distinct_targets() {
        let center = vec![0.3, -0.2];
        let out = vec![vec![-0.1, 0.4], vec![0.05, 0.1], vec![0.2, -0.3]];
        let mut flat: Vec<f64> = out.iter().flatten().copied().collect();
        let mut c1 = center.clone();
        let mut neu = vec![0.0; 2];
        let l1 = update_pair(&mut c1, &mut flat, 2, &[(0, true), (1, false), (2, false)], 0.2, &mut neu);
        let mut c2 = center.clone();
        let mut ctx = out[0].clone();
        let mut negs = vec![out[1].clone(), out[2].clone()];
        let l2 = sgns_pair_step(&mut c2, &mut ctx, &mut negs, 0.2);
        assert!((l1 - l2).abs() < 1e-15);
        for k in 0..2 {
            assert!((c1[k] - c2[k]).abs() < 1e-15);
            assert!((flat[k] - ctx[k]).abs() < 1e-15);
            assert!((flat[4 + k] - negs[1][k]).abs() < 1e-15);
        }
    }

    #[test]
    fn cosine_examples() {
        let m = toy_model(&[("a", [1.0, 0.0]), ("b", [0.0, 2.0]), ("c", [-3.0, 0.0])]);
        assert!((cosine(&m, "a", "a").unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&m, "a", "b").unwrap(), 0.0);
        assert_eq!(cosine(&m, "a", "c").unwrap(), -1.0);
        match cosine(&m, "a", "zzz") {
            Err(Error::OutOfVocabulary(w)) => assert_eq!(w, "zzz"),
            other => panic!("{other:?}"),
        }
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            dim: 8,
            min_count: 1,
            epochs: 3,
            subsample_t: 0.0,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_epochs_keeps_initialization() {
        let u = units(&["a b c a b c", "c b a"]);
        let cfg = TrainConfig { epochs: 0, ..small_config() };
        let m = train(&u, &cfg).unwrap();
        assert!(m.output_vectors.iter().all(|&x| x == 0.0));
        let bound = 0.5 / cfg.dim as f64;
        assert!(m.input_vectors.iter().all(|x| x.abs() <= bound));
        let again = train(&u, &TrainConfig { epochs: 2, ..cfg.clone() }).unwrap();
        assert_ne!(again.input_vectors, m.input_vectors);
    }

    #[test]
    fn deterministic_with_seed() {
        let u = units(&["a b c d e f", "f e d c b a", "a c e"]);
        let a = train(&u, &small_config()).unwrap();
        let b = train(&u, &small_config()).unwrap();
        assert_eq!(a, b);
        let c = train(&u, &TrainConfig { seed: 99, ..small_config() }).unwrap();
        assert_ne!(a.input_vectors, c.input_vectors);
    }

    #[test]
    fn empty_vocab_after_min_count_is_an_error() {
        let u = units(&["a b c"]);
        let err = train(&u, &TrainConfig { min_count: 2, ..small_config() }).unwrap_err();
        assert!(err.to_string().contains("min_count"), "{err}");
    }

    #[test]
    fn disabled_subsampling_keeps_everything() {
        let vocab = build_vocab(&units(&["a a a a b"]), 1).unwrap();
        for t in [f64::INFINITY, 0.0] {
            assert!(keep_probabilities(&vocab, t).iter().all(|&p| p >= 1.0));
        }
        assert!(keep_probabilities(&vocab, 1e-3)[0] < 1.0);
        // with subsampling on, a very frequent word has keep probability < 1
        assert!(keep_probability(1000, 1000, 1e-3) < 1.0);
        assert!(keep_probability(1, 1_000_000, 1e-3) > 1.0);
    }

    #[test]
    fn save_load_is_bit_exact() {
        let u = units(&["a b c d e f", "f e d c b a"]);
        let m = train(&u, &small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.sgns");
        m.save(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("sgns 6 8\n"));
        let back = EmbeddingModel::load(&p).unwrap();
        for (x, y) in m.input_vectors.iter().zip(back.input_vectors.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in m.output_vectors.iter().zip(back.output_vectors.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(back.vocab(), m.vocab());
    }

    #[test]
    fn bad_model_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.sgns");
        std::fs::write(&p, "sgns 1 2\na 1 0.5\n").unwrap();
        assert!(matches!(EmbeddingModel::load(&p), Err(Error::Parse { line: 2, .. })));
        std::fs::write(&p, "word2vec 1 2\n").unwrap();
        assert!(EmbeddingModel::load(&p).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig { lr_end: 0.5, ..TrainConfig::default() }.validate().is_err());
        assert!(TrainConfig { dim: 0, ..TrainConfig::default() }.validate().is_err());
        let d = TrainConfig::default();
        assert_eq!((d.dim, d.window, d.min_count, d.negative, d.epochs), (100, 5, 5, 5, 5));
        assert_eq!((d.lr_start, d.lr_end, d.subsample_t), (0.025, 1e-4, 1e-3));
    }
}
