//! Chi-square independence testing, weighted log-odds with an informative
//! Dirichlet prior, and summaries of axis scores.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::axes::{score_word, AxisLexicon, AxisMethod};
use crate::embed::EmbeddingModel;
use crate::{Error, Result};

/// Log-odds z-scores above this select a term; the comparison is strict.
pub const DEFAULT_LOGODDS_THRESHOLD: f64 = 1.64;

/// Default Dirichlet mass as a fraction of the pooled token count.
pub const DEFAULT_PRIOR_FRACTION: f64 = 0.01;

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..100_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    // modified Lentz
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain: a={a}, x={x}");
    if x == 0.0 {
        1.0
    } else if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

/// Upper-tail probability of the chi-square distribution.
pub fn chi_square_sf(df: u32, x: f64) -> f64 {
    gamma_q(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    pub cramers_v: f64,
    pub n: u64,
}

/// Pearson chi-square test of independence on a contingency table.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<ChiSquareResult> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 {
        return Err(Error::invalid("contingency table needs at least 2 rows and 2 columns"));
    }
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("contingency table rows have unequal lengths"));
    }
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    if let Some(i) = row_sums.iter().position(|&s| s == 0) {
        return Err(Error::Degenerate(format!("contingency row {i} sums to zero")));
    }
    if let Some(j) = col_sums.iter().position(|&s| s == 0) {
        return Err(Error::Degenerate(format!("contingency column {j} sums to zero")));
    }
    let n: u64 = row_sums.iter().sum();
    let nf = n as f64;
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / nf;
            let diff = obs as f64 - expected;
            statistic += diff * diff / expected;
        }
    }
    let df = ((rows - 1) * (cols - 1)) as u32;
    let k = (rows.min(cols) - 1) as f64;
    Ok(ChiSquareResult {
        statistic,
        df,
        p_value: chi_square_sf(df, statistic),
        cramers_v: (statistic / (nf * k)).sqrt().min(1.0),
        n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogOddsResult {
    pub term: String,
    pub count_a: u64,
    pub count_b: u64,
    pub delta: f64,
    pub variance: f64,
    pub zeta: f64,
}

/// Prior mass used when none is configured.
pub fn default_prior_scale(counts_a: &BTreeMap<String, u64>, counts_b: &BTreeMap<String, u64>) -> f64 {
    let pooled: u64 = counts_a.values().chain(counts_b.values()).sum();
    pooled as f64 * DEFAULT_PRIOR_FRACTION
}

/// Weighted log-odds ratio of every term between corpus `a` and corpus `b`,
/// with a Dirichlet prior proportional to pooled frequency and total mass
/// `prior_scale`. Positive z-scores lean toward `a`.
pub fn weighted_log_odds(
    counts_a: &BTreeMap<String, u64>,
    counts_b: &BTreeMap<String, u64>,
    prior_scale: f64,
) -> Result<Vec<LogOddsResult>> {
    if !(prior_scale > 0.0) || !prior_scale.is_finite() {
        return Err(Error::invalid(format!("prior_scale must be positive, got {prior_scale}")));
    }
    let n_a: u64 = counts_a.values().sum();
    let n_b: u64 = counts_b.values().sum();
    let pooled_total = (n_a + n_b) as f64;
    if pooled_total == 0.0 {
        return Err(Error::Degenerate("pooled corpus is empty".into()));
    }
    let terms: BTreeSet<&String> = counts_a
        .iter()
        .chain(counts_b)
        .filter(|(_, &c)| c > 0)
        .map(|(t, _)| t)
        .collect();
    if terms.len() < 2 {
        return Err(Error::Degenerate("log-odds needs at least two distinct terms".into()));
    }
    let (n_a, n_b) = (n_a as f64, n_b as f64);
    let alpha_0 = prior_scale;
    Ok(terms
        .into_iter()
        .map(|term| {
            let ya = counts_a.get(term).copied().unwrap_or(0);
            let yb = counts_b.get(term).copied().unwrap_or(0);
            let alpha = prior_scale * (ya + yb) as f64 / pooled_total;
            let (yaf, ybf) = (ya as f64, yb as f64);
            let log_odds_a = ((yaf + alpha) / (n_a + alpha_0 - yaf - alpha)).ln();
            let log_odds_b = ((ybf + alpha) / (n_b + alpha_0 - ybf - alpha)).ln();
            let delta = log_odds_a - log_odds_b;
            let variance = 1.0 / (yaf + alpha) + 1.0 / (ybf + alpha);
            LogOddsResult {
                term: term.clone(),
                count_a: ya,
                count_b: yb,
                delta,
                variance,
                zeta: delta / variance.sqrt(),
            }
        })
        .collect())
}

/// Terms with `zeta > threshold`, highest first.
pub fn select_distinctive(results: &[LogOddsResult], threshold: f64) -> Vec<String> {
    let mut hits: Vec<&LogOddsResult> = results.iter().filter(|r| r.zeta > threshold).collect();
    hits.sort_by(|a, b| b.zeta.total_cmp(&a.zeta).then_with(|| a.term.cmp(&b.term)));
    hits.into_iter().map(|r| r.term.clone()).collect()
}

pub fn write_logodds_csv(path: impl AsRef<Path>, results: &[LogOddsResult], threshold: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["term", "count_a", "count_b", "delta", "zeta", "selected"])?;
    for r in results {
        w.write_record([
            r.term.as_str(),
            &r.count_a.to_string(),
            &r.count_b.to_string(),
            &r.delta.to_string(),
            &r.zeta.to_string(),
            &(r.zeta > threshold).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("log-odds csv", e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSummary {
    pub context_label: String,
    pub axis: String,
    pub method: AxisMethod,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    pub n_terms: usize,
    /// Terms skipped because they were out of vocabulary.
    pub n_skipped: usize,
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::Degenerate(format!(
            "need at least 2 values for a standard deviation, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// Score each term on `axis` and summarize; out-of-vocabulary terms are
/// skipped and counted.
pub fn axis_summary(
    model: &EmbeddingModel,
    terms: &[String],
    axis: &AxisLexicon,
    method: AxisMethod,
    context_label: &str,
) -> Result<AxisSummary> {
    let mut scores = Vec::new();
    let mut skipped = 0;
    for t in terms {
        match score_word(model, t, axis, method) {
            Ok(s) => scores.push(s.value),
            Err(Error::OutOfVocabulary(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let (mean, sd) = mean_sd(&scores).map_err(|_| {
        Error::Degenerate(format!(
            "axis {:?} in context {context_label:?}: only {} scoreable terms",
            axis.name,
            scores.len()
        ))
    })?;
    Ok(AxisSummary {
        context_label: context_label.to_string(),
        axis: axis.name.clone(),
        method,
        mean,
        sd,
        n_terms: scores.len(),
        n_skipped: skipped,
    })
}

pub fn write_summary_csv(path: impl AsRef<Path>, summaries: &[AxisSummary]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["context", "axis", "method", "mean", "sd", "n_terms"])?;
    for s in summaries {
        w.write_record([
            s.context_label.as_str(),
            s.axis.as_str(),
            s.method.as_str(),
            &s.mean.to_string(),
            &s.sd.to_string(),
            &s.n_terms.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("summary csv", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn independent_table() {
        let r = chi_square_independence(&[vec![10, 10], vec![10, 10]]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.cramers_v, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.df, 1);
    }

    #[test]
    fn two_by_two_by_hand() {
        let r = chi_square_independence(&[vec![10, 20], vec![20, 10]]).unwrap();
        assert!((r.statistic - 20.0 / 3.0).abs() < 1e-12);
        assert!((r.cramers_v - (1.0f64 / 9.0).sqrt()).abs() < 1e-12);
        assert!((r.p_value - 0.009_823_274_507_519_235).abs() < 1e-9, "{}", r.p_value);
        assert_eq!(r.n, 60);
    }

    #[test]
    fn chi_square_rejects_bad_tables() {
        assert!(chi_square_independence(&[vec![1, 2]]).is_err());
        assert!(chi_square_independence(&[vec![1, 2], vec![0, 0]]).is_err());
        assert!(chi_square_independence(&[vec![0, 2], vec![0, 3]]).is_err());
        assert!(chi_square_independence(&[vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn log_odds_symmetry_and_errors() {
        let a = counts(&[("x", 5), ("y", 7)]);
        for r in weighted_log_odds(&a, &a, 3.0).unwrap() {
            assert_eq!(r.delta, 0.0);
            assert_eq!(r.zeta, 0.0);
        }
        assert!(weighted_log_odds(&a, &a, 0.0).is_err());
        assert!(weighted_log_odds(&a, &a, -1.0).is_err());
        assert!(weighted_log_odds(&BTreeMap::new(), &BTreeMap::new(), 1.0).is_err());
    }

    #[test]
    fn selection_is_strict() {
        let mk = |t: &str, z: f64| LogOddsResult {
            term: t.into(),
            count_a: 0,
            count_b: 0,
            delta: z,
            variance: 1.0,
            zeta: z,
        };
        let rs = vec![mk("a", 2.0), mk("b", 1.64), mk("c", 1.7)];
        assert_eq!(select_distinctive(&rs, DEFAULT_LOGODDS_THRESHOLD), vec!["a", "c"]);
        assert!(select_distinctive(&[mk("z", 0.0)], 1.64).is_empty());
        assert_eq!(DEFAULT_LOGODDS_THRESHOLD, 1.64);
    }

    #[test]
    fn mean_sd_examples() {
        let (m, s) = mean_sd(&[0.2, -0.2]).unwrap();
        assert!(m.abs() < 1e-15);
        assert!((s - 0.08f64.sqrt()).abs() < 1e-15);
        let (m, s) = mean_sd(&[0.1, 0.1]).unwrap();
        assert_eq!((m, s), (0.1, 0.0));
        assert!(mean_sd(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn log_odds_antisymmetric(a in proptest::collection::vec(0u64..50, 4), b in proptest::collection::vec(0u64..50, 4), scale in 0.1f64..100.0) {
            let names = ["w", "x", "y", "z"];
            let ca: BTreeMap<String, u64> = names.iter().zip(&a).map(|(k, v)| (k.to_string(), *v)).collect();
            let cb: BTreeMap<String, u64> = names.iter().zip(&b).map(|(k, v)| (k.to_string(), *v)).collect();
            if let (Ok(ab), Ok(ba)) = (weighted_log_odds(&ca, &cb, scale), weighted_log_odds(&cb, &ca, scale)) {
                for (x, y) in ab.iter().zip(&ba) {
                    prop_assert_eq!(x.delta, -y.delta);
                    prop_assert_eq!(x.zeta, -y.zeta);
                }
            }
        }

        #[test]
        fn shared_increment_shrinks_delta(ya in 1u64..40, yb in 1u64..40, extra in 1u64..20) {
            // equal corpus sizes, both sides gain `extra` occurrences of w
            let a = counts(&[("w", ya), ("f", 100 - ya)]);
            let b = counts(&[("w", yb), ("f", 100 - yb)]);
            let a2 = counts(&[("w", ya + extra), ("f", 100 - ya)]);
            let b2 = counts(&[("w", yb + extra), ("f", 100 - yb)]);
            let d1 = weighted_log_odds(&a, &b, 10.0).unwrap()[1].delta;
            let d2 = weighted_log_odds(&a2, &b2, 10.0).unwrap()[1].delta;
            prop_assert!(d2.abs() <= d1.abs() + 1e-12);
        }

        #[test]
        fn chi_square_permutation_invariant(t in proptest::collection::vec(proptest::collection::vec(1u64..30, 3), 3)) {
            let r = chi_square_independence(&t).unwrap();
            let mut swapped = t.clone();
            swapped.swap(0, 2);
            for row in &mut swapped { row.swap(0, 1); }
            let s = chi_square_independence(&swapped).unwrap();
            prop_assert!((r.statistic - s.statistic).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&r.cramers_v));
        }
    }
}
