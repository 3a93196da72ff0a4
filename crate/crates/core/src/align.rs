//! Orthogonal Procrustes alignment of two embedding models over their shared
//! vocabulary, and cross-model similarity of aligned words.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::axes::AxisLexicon;
use crate::embed::{cosine_of, EmbeddingModel};
use crate::linalg::svd;
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
const RANK_RTOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct AlignedPair {
    /// Orthogonal `dim × dim` map applied on the right of source row vectors.
    pub rotation: Array2<f64>,
    /// Source model with its input vectors rotated into the target space.
    pub source_model: EmbeddingModel,
    pub target_model: EmbeddingModel,
    /// Tokens present in both models, sorted.
    pub shared_vocab: Vec<String>,
}

pub fn shared_vocab(a: &EmbeddingModel, b: &EmbeddingModel) -> Vec<String> {
    let sb: BTreeSet<&str> = b.vocab().iter().map(|(t, _)| t.as_str()).collect();
    let mut out: Vec<String> = a
        .vocab()
        .iter()
        .filter(|(t, _)| sb.contains(t.as_str()))
        .map(|(t, _)| t.clone())
        .collect();
    out.sort();
    out
}

/// Rows of `words`, mean-centered and then scaled to unit length.
pub fn preprocess(model: &EmbeddingModel, words: &[String]) -> Result<Array2<f64>> {
    let dim = model.dim();
    let mut m = Array2::zeros((words.len(), dim));
    for (i, w) in words.iter().enumerate() {
        for (k, x) in model.vector(w)?.iter().enumerate() {
            m[[i, k]] = *x;
        }
    }
    if words.is_empty() {
        return Ok(m);
    }
    let mean = m.mean_axis(ndarray::Axis(0)).expect("non-empty");
    for mut row in m.rows_mut() {
        row -= &mean;
        let n = row.dot(&row).sqrt();
        if n > 0.0 {
            row /= n;
        }
    }
    Ok(m)
}

pub fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖a·w − b‖_F`.
pub fn residual(a: &Array2<f64>, b: &Array2<f64>, w: &Array2<f64>) -> f64 {
    frobenius(&(a.dot(w) - b))
}

/// Orthogonal `w` minimizing `‖a·w − b‖_F`.
pub fn orthogonal_procrustes(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::invalid("Procrustes inputs differ in shape"));
    }
    let m = a.t().dot(b);
    let d = svd(&m)?;
    let rank = d.rank(RANK_RTOL);
    if rank < m.ncols() {
        return Err(Error::Degenerate(format!(
            "cross-covariance is rank-deficient: rank {rank} < dimension {}",
            m.ncols()
        )));
    }
    Ok(d.u.dot(&d.v.t()))
}

pub fn procrustes_align(source: &EmbeddingModel, target: &EmbeddingModel) -> Result<AlignedPair> {
    if source.dim() != target.dim() {
        return Err(Error::invalid(format!(
            "models differ in dimension: {} vs {}",
            source.dim(),
            target.dim()
        )));
    }
    let shared = shared_vocab(source, target);
    if shared.len() < source.dim() {
        return Err(Error::Degenerate(format!(
            "shared vocabulary has {} tokens, need at least {}",
            shared.len(),
            source.dim()
        )));
    }
    let a = preprocess(source, &shared)?;
    let b = preprocess(target, &shared)?;
    let rotation = orthogonal_procrustes(&a, &b)?;
    let rotated = source.input_vectors.dot(&rotation);
    let source_model = EmbeddingModel::new(
        source.vocab().to_vec(),
        rotated,
        source.output_vectors.clone(),
    )?;
    Ok(AlignedPair {
        rotation,
        source_model,
        target_model: target.clone(),
        shared_vocab: shared,
    })
}

impl AlignedPair {
    pub fn is_shared(&self, word: &str) -> bool {
        self.shared_vocab.binary_search_by(|t| t.as_str().cmp(word)).is_ok()
    }

    /// Cosine between the rotated source vector and the target vector.
    pub fn similarity(&self, word: &str) -> Result<f64> {
        if !self.is_shared(word) {
            return Err(Error::OutOfVocabulary(word.to_string()));
        }
        cosine_of(self.source_model.vector(word)?, self.target_model.vector(word)?)
    }
}

pub fn cross_model_similarity(pair: &AlignedPair, names: &[String]) -> Result<BTreeMap<String, f64>> {
    names
        .iter()
        .map(|n| Ok((n.clone(), pair.similarity(n)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleStability {
    pub axis: String,
    pub pole: String,
    pub mean_similarity: f64,
    pub n_present: usize,
    pub n_skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedStability {
    pub poles: Vec<PoleStability>,
    pub baseline_mean: f64,
    pub baseline_present: usize,
    pub baseline_skipped: usize,
}

fn mean_similarity(pair: &AlignedPair, words: &[String]) -> Result<(f64, usize, usize)> {
    let mut sum = 0.0;
    let mut n = 0;
    for w in words {
        if pair.is_shared(w) {
            sum += pair.similarity(w)?;
            n += 1;
        }
    }
    Ok((if n > 0 { sum / n as f64 } else { f64::NAN }, n, words.len() - n))
}

/// Mean cross-model similarity of each pole's seed words, plus a baseline
/// word list. Words outside the shared vocabulary are skipped and counted.
pub fn seed_stability_report(
    pair: &AlignedPair,
    axes: &[AxisLexicon],
    baseline_words: &[String],
) -> Result<SeedStability> {
    if baseline_words.is_empty() {
        return Err(Error::invalid("baseline word list is empty"));
    }
    let mut poles = Vec::new();
    for ax in axes {
        for (pole, seeds) in [("left", &ax.left), ("right", &ax.right)] {
            let (mean, n, skipped) = mean_similarity(pair, seeds)?;
            if n == 0 {
                return Err(Error::Degenerate(format!(
                    "axis {:?}: no {pole} seed is in the shared vocabulary",
                    ax.name
                )));
            }
            poles.push(PoleStability {
                axis: ax.name.clone(),
                pole: pole.to_string(),
                mean_similarity: mean,
                n_present: n,
                n_skipped: skipped,
            });
        }
    }
    let (baseline_mean, baseline_present, baseline_skipped) = mean_similarity(pair, baseline_words)?;
    if baseline_present == 0 {
        return Err(Error::Degenerate("no baseline word is in the shared vocabulary".into()));
    }
    Ok(SeedStability {
        poles,
        baseline_mean,
        baseline_present,
        baseline_skipped,
    })
}

/// One row per name of the first map; one `cosine_pair{i}` column per map.
/// Missing values are left empty.
pub fn write_similarity_csv(path: impl AsRef<Path>, pairs: &[BTreeMap<String, f64>]) -> Result<()> {
    let Some(first) = pairs.first() else {
        return Err(Error::invalid("no similarity maps to write"));
    };
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["name".to_string()];
    header.extend((1..=pairs.len()).map(|i| format!("cosine_pair{i}")));
    w.write_record(&header)?;
    for name in first.keys() {
        let mut rec = vec![name.clone()];
        rec.extend(pairs.iter().map(|m| m.get(name).map(f64::to_string).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("similarity csv", e))
}
