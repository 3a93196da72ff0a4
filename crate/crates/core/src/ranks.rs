//! Score-to-rank conversion shared by network metrics and semantic axes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ranks with 1 as the highest scorer. Tied scores share the mean of the
/// positions they occupy, so ranks always sum to n(n+1)/2.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RankVector {
    pub ranks: BTreeMap<String, f64>,
}

impl RankVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.ranks.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

// Scores closer than this (relative) count as tied, absorbing rounding noise
// from path sums without breaking scale invariance.
const TIE_RTOL: f64 = 1e-9;

fn tied(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_RTOL * a.abs().max(b.abs())
}

/// Descending scores to ascending fractional ranks.
pub fn to_ranks(scores: &BTreeMap<String, f64>) -> RankVector {
    let mut items: Vec<(&String, f64)> = scores.iter().map(|(k, &v)| (k, v)).collect();
    items.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut ranks = BTreeMap::new();
    let mut i = 0;
    while i < items.len() {
        let mut j = i + 1;
        while j < items.len() && tied(items[i].1, items[j].1) {
            j += 1;
        }
        // positions i+1 ..= j share their mean
        let rank = (i + 1 + j) as f64 / 2.0;
        for (name, _) in &items[i..j] {
            ranks.insert((*name).clone(), rank);
        }
        i = j;
    }
    RankVector { ranks }
}

/// Restrict scores to `names` before ranking.
pub fn to_ranks_within<'a>(
    scores: &BTreeMap<String, f64>,
    names: impl IntoIterator<Item = &'a String>,
) -> RankVector {
    let subset: BTreeMap<String, f64> = names
        .into_iter()
        .filter_map(|n| scores.get(n).map(|&s| (n.clone(), s)))
        .collect();
    to_ranks(&subset)
}

/// `rank_from − rank_to` over the shared names; positive means the name moved
/// toward rank 1.
pub fn rank_shift(from: &RankVector, to: &RankVector) -> Result<BTreeMap<String, f64>> {
    let shifts: BTreeMap<String, f64> = from
        .ranks
        .iter()
        .filter_map(|(name, &rf)| to.get(name).map(|rt| (name.clone(), rf - rt)))
        .collect();
    if shifts.is_empty() {
        return Err(Error::invalid("rank vectors share no names"));
    }
    Ok(shifts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scores(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn fractional_ties() {
        let r = to_ranks(&scores(&[("a", 5.0), ("b", 5.0), ("c", 1.0)]));
        assert_eq!(r.get("a"), Some(1.5));
        assert_eq!(r.get("b"), Some(1.5));
        assert_eq!(r.get("c"), Some(3.0));
    }

    #[test]
    fn strict_order() {
        let r = to_ranks(&scores(&[("a", 3.0), ("b", 2.0), ("c", 1.0)]));
        assert_eq!((r.get("a"), r.get("b"), r.get("c")), (Some(1.0), Some(2.0), Some(3.0)));
    }

    #[test]
    fn all_equal() {
        let r = to_ranks(&scores(&[("a", 0.0), ("b", 0.0), ("c", 0.0), ("d", 0.0)]));
        assert!(r.ranks.values().all(|&v| v == 2.5));
    }

    #[test]
    fn shifts() {
        let a = to_ranks(&scores(&[("a", 3.0), ("b", 2.0)]));
        assert!(rank_shift(&a, &a).unwrap().values().all(|&s| s == 0.0));
        let from = RankVector { ranks: [("a".to_string(), 9.0)].into() };
        let to = RankVector { ranks: [("a".to_string(), 2.0)].into() };
        assert_eq!(rank_shift(&from, &to).unwrap()["a"], 7.0);
        let other = RankVector { ranks: [("z".to_string(), 1.0)].into() };
        assert!(rank_shift(&from, &other).is_err());
    }

    proptest! {
        #[test]
        fn rank_sum_and_bounds(vals in proptest::collection::vec(0i32..6, 1..20)) {
            let s: BTreeMap<String, f64> = vals.iter().enumerate()
                .map(|(i, &v)| (format!("n{i}"), v as f64)).collect();
            let r = to_ranks(&s);
            let n = vals.len() as f64;
            let sum: f64 = r.ranks.values().sum();
            prop_assert!((sum - n * (n + 1.0) / 2.0).abs() < 1e-9);
            prop_assert!(r.ranks.values().all(|&x| (1.0..=n).contains(&x)));
        }

        #[test]
        fn monotone_transform_invariance(vals in proptest::collection::vec(-50i32..50, 1..20)) {
            let s: BTreeMap<String, f64> = vals.iter().enumerate()
                .map(|(i, &v)| (format!("n{i}"), v as f64)).collect();
            let t: BTreeMap<String, f64> = s.iter()
                .map(|(k, &v)| (k.clone(), (v / 10.0).exp() + v.powi(3))).collect();
            prop_assert_eq!(to_ranks(&s), to_ranks(&t));
        }
    }
}
