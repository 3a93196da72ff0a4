//! Semantic axes: SemAxis and relative norm distance scoring, with a single
//! convention that higher values sit nearer the left pole.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed::{cosine_of, EmbeddingModel};
use crate::ranks::{rank_shift, to_ranks, RankVector};
use crate::{Error, Result};

/// Absolute rank shifts above this are emphasized in axis reports.
pub const EMPHASIS_THRESHOLD: f64 = 6.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisLexicon {
    pub name: String,
    pub left: Vec<String>,
    pub right: Vec<String>,
}

impl AxisLexicon {
    pub fn new(name: &str, left: &[&str], right: &[&str]) -> Result<Self> {
        let ax = AxisLexicon {
            name: name.to_string(),
            left: left.iter().map(|s| s.to_string()).collect(),
            right: right.iter().map(|s| s.to_string()).collect(),
        };
        ax.validate()?;
        Ok(ax)
    }

    pub fn validate(&self) -> Result<()> {
        if self.left.is_empty() || self.right.is_empty() {
            return Err(Error::invalid(format!("axis {:?} has an empty pole", self.name)));
        }
        if let Some(w) = self.left.iter().find(|w| self.right.contains(w)) {
            return Err(Error::invalid(format!(
                "axis {:?}: seed {w:?} appears on both poles",
                self.name
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let ax: AxisLexicon = serde_json::from_str(s)?;
        ax.validate()?;
        Ok(ax)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    /// The same axis with its poles exchanged.
    pub fn flipped(&self) -> Self {
        AxisLexicon {
            name: self.name.clone(),
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisMethod {
    Semaxis,
    Rnd,
}

impl AxisMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisMethod::Semaxis => "semaxis",
            AxisMethod::Rnd => "rnd",
        }
    }
}

impl fmt::Display for AxisMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semaxis" => Ok(AxisMethod::Semaxis),
            "rnd" => Ok(AxisMethod::Rnd),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisScore {
    pub word: String,
    pub method: AxisMethod,
    pub value: f64,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Pole means for one axis in one model, computed once and reused per word.
#[derive(Clone, Debug)]
pub struct AxisScorer<'m> {
    model: &'m EmbeddingModel,
    left: Vec<f64>,
    right: Vec<f64>,
    direction: Vec<f64>,
    /// Seeds absent from the vocabulary.
    pub skipped_seeds: usize,
}

impl<'m> AxisScorer<'m> {
    pub fn new(model: &'m EmbeddingModel, axis: &AxisLexicon) -> Result<Self> {
        axis.validate()?;
        let mut skipped = 0;
        let mut pole = |seeds: &[String], side: &str| -> Result<Vec<f64>> {
            let mut sum = vec![0.0; model.dim()];
            let mut n = 0usize;
            for s in seeds {
                let Ok(v) = model.vector(s) else {
                    skipped += 1;
                    continue;
                };
                let Some(u) = unit(v) else {
                    skipped += 1;
                    continue;
                };
                sum.iter_mut().zip(&u).for_each(|(a, b)| *a += b);
                n += 1;
            }
            if n == 0 {
                return Err(Error::Degenerate(format!(
                    "axis {:?}: no {side} seed is in the vocabulary",
                    axis.name
                )));
            }
            Ok(sum.into_iter().map(|x| x / n as f64).collect())
        };
        let left = pole(&axis.left, "left")?;
        let right = pole(&axis.right, "right")?;
        let direction: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l - r).collect();
        if direction.iter().all(|&x| x == 0.0) {
            return Err(Error::Degenerate(format!(
                "axis {:?}: pole means coincide",
                axis.name
            )));
        }
        Ok(AxisScorer {
            model,
            left,
            right,
            direction,
            skipped_seeds: skipped,
        })
    }

    pub fn semaxis(&self, word: &str) -> Result<f64> {
        cosine_of(self.model.vector(word)?, &self.direction)
    }

    /// Distance to the right pole mean minus distance to the left pole mean,
    /// on the length-normalized word vector.
    pub fn rnd(&self, word: &str) -> Result<f64> {
        self.rnd_vector(word, self.model.vector(word)?)
    }

    fn rnd_vector(&self, word: &str, v: &[f64]) -> Result<f64> {
        let w = unit(v).ok_or_else(|| Error::Degenerate(format!("zero vector for {word:?}")))?;
        Ok(distance(&w, &self.right) - distance(&w, &self.left))
    }

    pub fn score(&self, word: &str, method: AxisMethod) -> Result<AxisScore> {
        self.score_in(self.model, word, method)
    }

    /// Score a word taken from `other`, which must share this model's space
    /// (for example after alignment onto it).
    pub fn score_in(&self, other: &EmbeddingModel, word: &str, method: AxisMethod) -> Result<AxisScore> {
        if other.dim() != self.model.dim() {
            return Err(Error::InvalidInput(format!(
                "model dimension {} does not match axis space {}",
                other.dim(),
                self.model.dim()
            )));
        }
        let v = other.vector(word)?;
        let value = match method {
            AxisMethod::Semaxis => cosine_of(v, &self.direction)?,
            AxisMethod::Rnd => self.rnd_vector(word, v)?,
        };
        Ok(AxisScore {
            word: word.to_string(),
            method,
            value,
        })
    }
}

pub fn semaxis_score(model: &EmbeddingModel, word: &str, axis: &AxisLexicon) -> Result<AxisScore> {
    score_word(model, word, axis, AxisMethod::Semaxis)
}

pub fn rnd_score(model: &EmbeddingModel, word: &str, axis: &AxisLexicon) -> Result<AxisScore> {
    score_word(model, word, axis, AxisMethod::Rnd)
}

/// Out-of-vocabulary words yield [`Error::OutOfVocabulary`]; a pole with no
/// usable seed yields [`Error::Degenerate`].
pub fn score_word(
    model: &EmbeddingModel,
    word: &str,
    axis: &AxisLexicon,
    method: AxisMethod,
) -> Result<AxisScore> {
    model.word_index(word)?;
    AxisScorer::new(model, axis)?.score(word, method)
}

pub fn axis_scores(
    model: &EmbeddingModel,
    words: &[String],
    axis: &AxisLexicon,
    method: AxisMethod,
) -> Result<BTreeMap<String, f64>> {
    let scorer = AxisScorer::new(model, axis)?;
    words
        .iter()
        .map(|w| Ok((w.clone(), scorer.score(w, method)?.value)))
        .collect()
}

/// Rank 1 is the word nearest the left pole.
pub fn rank_on_axis(
    model: &EmbeddingModel,
    words: &[String],
    axis: &AxisLexicon,
    method: AxisMethod,
) -> Result<RankVector> {
    Ok(to_ranks(&axis_scores(model, words, axis, method)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisReportRow {
    pub word: String,
    pub axis: String,
    pub method: AxisMethod,
    /// Score under the first model.
    pub score: f64,
    pub rank_model1: f64,
    pub rank_model2: f64,
    pub shift: f64,
    pub emphasized: bool,
}

/// Compare the rankings of `words` on one axis between two models.
pub fn compare_on_axis(
    model1: &EmbeddingModel,
    model2: &EmbeddingModel,
    words: &[String],
    axis: &AxisLexicon,
    method: AxisMethod,
) -> Result<Vec<AxisReportRow>> {
    let s1 = axis_scores(model1, words, axis, method)?;
    let s2 = axis_scores(model2, words, axis, method)?;
    report_rows(&s1, &s2, axis, method)
}

/// Like [`compare_on_axis`], but both models are first aligned onto
/// `reference` and scored against its pole means.
pub fn compare_on_axis_aligned(
    reference: &EmbeddingModel,
    aligned1: &EmbeddingModel,
    aligned2: &EmbeddingModel,
    words: &[String],
    axis: &AxisLexicon,
    method: AxisMethod,
) -> Result<Vec<AxisReportRow>> {
    let scorer = AxisScorer::new(reference, axis)?;
    let scores = |m: &EmbeddingModel| -> Result<BTreeMap<String, f64>> {
        words
            .iter()
            .map(|w| Ok((w.clone(), scorer.score_in(m, w, method)?.value)))
            .collect()
    };
    let (s1, s2) = (scores(aligned1)?, scores(aligned2)?);
    report_rows(&s1, &s2, axis, method)
}

fn report_rows(
    s1: &BTreeMap<String, f64>,
    s2: &BTreeMap<String, f64>,
    axis: &AxisLexicon,
    method: AxisMethod,
) -> Result<Vec<AxisReportRow>> {
    let (r1, r2) = (to_ranks(s1), to_ranks(s2));
    let shifts = rank_shift(&r1, &r2)?;
    Ok(shifts
        .into_iter()
        .map(|(word, shift)| AxisReportRow {
            score: s1[&word],
            rank_model1: r1.ranks[&word],
            rank_model2: r2.ranks[&word],
            emphasized: shift.abs() > EMPHASIS_THRESHOLD,
            shift,
            axis: axis.name.clone(),
            method,
            word,
        })
        .collect())
}

pub fn write_axis_report_csv(path: impl AsRef<Path>, rows: &[AxisReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "word", "axis", "method", "score", "rank_model1", "rank_model2", "shift", "emphasized",
    ])?;
    for r in rows {
        w.write_record([
            r.word.as_str(),
            r.axis.as_str(),
            r.method.as_str(),
            &r.score.to_string(),
            &r.rank_model1.to_string(),
            &r.rank_model2.to_string(),
            &r.shift.to_string(),
            &r.emphasized.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("axis report csv", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;

    fn model(rows: &[(&str, Vec<f64>)]) -> EmbeddingModel {
        let dim = rows[0].1.len();
        let vocab = rows.iter().map(|(t, _)| (t.to_string(), 1)).collect();
        let flat: Vec<f64> = rows.iter().flat_map(|(_, v)| v.clone()).collect();
        let m = Array2::from_shape_vec((rows.len(), dim), flat).unwrap();
        EmbeddingModel::new(vocab, m.clone(), m).unwrap()
    }

    fn toy() -> (EmbeddingModel, AxisLexicon) {
        let m = model(&[
            ("l", vec![1.0, 0.0]),
            ("r", vec![-1.0, 0.0]),
            ("up", vec![0.0, 1.0]),
            ("twin", vec![-1.0, 0.0]),
        ]);
        (m, AxisLexicon::new("toy", &["l"], &["r"]).unwrap())
    }

    #[test]
    fn semaxis_examples() {
        let (m, ax) = toy();
        assert_eq!(semaxis_score(&m, "l", &ax).unwrap().value, 1.0);
        assert_eq!(semaxis_score(&m, "up", &ax).unwrap().value, 0.0);
        assert_eq!(semaxis_score(&m, "r", &ax).unwrap().value, -1.0);
    }

    #[test]
    fn rnd_examples() {
        let (m, ax) = toy();
        assert_eq!(rnd_score(&m, "l", &ax).unwrap().value, 2.0);
        assert_eq!(rnd_score(&m, "up", &ax).unwrap().value, 0.0);
        assert_eq!(rnd_score(&m, "r", &ax).unwrap().value, -2.0);
    }

    #[test]
    fn ranks_and_ties() {
        let (m, ax) = toy();
        let words: Vec<String> = ["r", "l", "up"].iter().map(|s| s.to_string()).collect();
        let r = rank_on_axis(&m, &words, &ax, AxisMethod::Semaxis).unwrap();
        assert_eq!((r.get("l"), r.get("up"), r.get("r")), (Some(1.0), Some(2.0), Some(3.0)));
        let words: Vec<String> = ["r", "twin", "l"].iter().map(|s| s.to_string()).collect();
        let r = rank_on_axis(&m, &words, &ax, AxisMethod::Rnd).unwrap();
        assert_eq!((r.get("r"), r.get("twin")), (Some(2.5), Some(2.5)));
    }

    #[test]
    fn errors() {
        let (m, ax) = toy();
        assert!(matches!(semaxis_score(&m, "nope", &ax), Err(Error::OutOfVocabulary(w)) if w == "nope"));
        let bad = AxisLexicon::new("x", &["zz"], &["r"]).unwrap();
        assert!(matches!(semaxis_score(&m, "l", &bad), Err(Error::Degenerate(_))));
        assert!(AxisLexicon::new("x", &[], &["r"]).is_err());
        assert!(AxisLexicon::new("x", &["a"], &["a"]).is_err());
        assert!(AxisLexicon::from_json_str(r#"{"name":"g","left":["he"],"right":["she"]}"#).is_ok());
        assert!(AxisLexicon::from_json_str(r#"{"name":"g","left":[],"right":["she"]}"#).is_err());
        assert_eq!("rnd".parse::<AxisMethod>().unwrap(), AxisMethod::Rnd);
        assert!("cos".parse::<AxisMethod>().is_err());
    }

    #[test]
    fn missing_seeds_are_counted() {
        let (m, _) = toy();
        let ax = AxisLexicon::new("x", &["l", "gone"], &["r"]).unwrap();
        let s = AxisScorer::new(&m, &ax).unwrap();
        assert_eq!(s.skipped_seeds, 1);
    }

    #[test]
    fn emphasis_is_strict() {
        let words: Vec<String> = (0..9).map(|i| format!("w{i}")).collect();
        let mk = |sign: f64| {
            let mut rows = vec![("l", vec![1.0, 0.0]), ("r", vec![-1.0, 0.0])];
            for (i, w) in words.iter().enumerate() {
                let t = sign * (i as f64 - 4.0) / 5.0;
                rows.push((w.as_str(), vec![t, 1.0]));
            }
            model(&rows)
        };
        let (a, b) = (mk(1.0), mk(-1.0));
        let ax = AxisLexicon::new("x", &["l"], &["r"]).unwrap();
        let rows = compare_on_axis(&a, &b, &words, &ax, AxisMethod::Semaxis).unwrap();
        let by: BTreeMap<_, _> = rows.iter().map(|r| (r.word.as_str(), r)).collect();
        // w8: rank 1 -> 9, shift -8; w1: rank 8 -> 2, shift 6 (not emphasized)
        assert_eq!(by["w8"].shift, -8.0);
        assert!(by["w8"].emphasized);
        assert_eq!(by["w1"].shift, 6.0);
        assert!(!by["w1"].emphasized);
    }

    fn vec2() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 3)
    }

    proptest! {
        #[test]
        fn flipping_poles_negates(l in vec2(), r in vec2(), w in vec2(), w2 in vec2()) {
            prop_assume!(l.iter().zip(&r).any(|(a, b)| (a - b).abs() > 1e-3));
            prop_assume!(w.iter().any(|x| x.abs() > 1e-3) && w2.iter().any(|x| x.abs() > 1e-3));
            prop_assume!(l.iter().any(|x| x.abs() > 1e-3) && r.iter().any(|x| x.abs() > 1e-3));
            let m = model(&[("l", l), ("r", r), ("w", w), ("w2", w2)]);
            let ax = AxisLexicon::new("a", &["l"], &["r"]).unwrap();
            let Ok(s) = AxisScorer::new(&m, &ax) else { return Ok(()); };
            let f = AxisScorer::new(&m, &ax.flipped()).unwrap();
            for word in ["w", "w2"] {
                prop_assert!((s.semaxis(word).unwrap() + f.semaxis(word).unwrap()).abs() < 1e-12);
                prop_assert!((s.rnd(word).unwrap() + f.rnd(word).unwrap()).abs() < 1e-12);
            }
            let words = vec!["w".to_string(), "w2".to_string()];
            let r1 = rank_on_axis(&m, &words, &ax, AxisMethod::Semaxis).unwrap();
            let r2 = rank_on_axis(&m, &words, &ax.flipped(), AxisMethod::Semaxis).unwrap();
            prop_assert_eq!(r1.get("w").unwrap() + r2.get("w").unwrap(), 3.0);
        }

        #[test]
        fn scaling_invariance(l in vec2(), r in vec2(), w in vec2(), w2 in vec2(), k in 0.01f64..100.0) {
            prop_assume!(l.iter().zip(&r).any(|(a, b)| (a - b).abs() > 1e-3));
            prop_assume!(w.iter().any(|x| x.abs() > 1e-3) && w2.iter().any(|x| x.abs() > 1e-3));
            prop_assume!(l.iter().any(|x| x.abs() > 1e-3) && r.iter().any(|x| x.abs() > 1e-3));
            let scale = |v: &Vec<f64>| v.iter().map(|x| x * k).collect::<Vec<_>>();
            let m = model(&[("l", l.clone()), ("r", r.clone()), ("w", w.clone()), ("w2", w2.clone())]);
            let ms = model(&[("l", scale(&l)), ("r", scale(&r)), ("w", scale(&w)), ("w2", scale(&w2))]);
            let ax = AxisLexicon::new("a", &["l"], &["r"]).unwrap();
            let Ok(s) = AxisScorer::new(&m, &ax) else { return Ok(()); };
            let ss = AxisScorer::new(&ms, &ax).unwrap();
            prop_assert!((s.semaxis("w").unwrap() - ss.semaxis("w").unwrap()).abs() < 1e-9);
            let words = vec!["w".to_string(), "w2".to_string()];
            for method in [AxisMethod::Semaxis, AxisMethod::Rnd] {
                prop_assert_eq!(
                    rank_on_axis(&m, &words, &ax, method).unwrap(),
                    rank_on_axis(&ms, &words, &ax, method).unwrap()
                );
            }
        }
    }

    #[test]
    fn methods_agree_on_the_pole_line() {
        // points strictly between the two pole means
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rows: Vec<(String, Vec<f64>)> = [-0.7, -0.4, -0.1, 0.2, 0.5, 0.7]
            .iter()
            .enumerate()
            .map(|(i, &t)| (format!("p{i}"), vec![t, h]))
            .collect();
        let mut all = vec![("l", vec![h, h]), ("r", vec![-h, h])];
        all.extend(rows.iter().map(|(n, v)| (n.as_str(), v.clone())));
        let m = model(&all);
        let ax = AxisLexicon::new("a", &["l"], &["r"]).unwrap();
        let words: Vec<String> = rows.iter().map(|(n, _)| n.clone()).collect();
        assert_eq!(
            rank_on_axis(&m, &words, &ax, AxisMethod::Semaxis).unwrap(),
            rank_on_axis(&m, &words, &ax, AxisMethod::Rnd).unwrap()
        );
    }
}
