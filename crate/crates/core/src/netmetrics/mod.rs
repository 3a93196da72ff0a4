//! Centrality and structure measures on co-occurrence networks.
//!
//! Path-based measures treat an edge of weight `w` as having length `1/w`:
//! characters who share many units are close. Betweenness is left
//! unnormalized and closeness is the harmonic variant so disconnected
//! networks are handled without special cases.

mod coreness;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::charnet::CoocNetwork;
use crate::ranks::to_ranks;
use crate::{Error, Result};

pub use crate::ranks::{rank_shift, to_ranks as ranks_of, RankVector};
pub use coreness::{
    core_periphery_fit, core_periphery_scores, core_vector, CorePeripheryFit,
    CorePeripheryParams, GridFit,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    WeightedDegree,
    Betweenness,
    Closeness,
    EffectiveSize,
    Coreness,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::WeightedDegree,
        MetricKind::Betweenness,
        MetricKind::Closeness,
        MetricKind::EffectiveSize,
        MetricKind::Coreness,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::WeightedDegree => "weighted_degree",
            MetricKind::Betweenness => "betweenness",
            MetricKind::Closeness => "closeness",
            MetricKind::EffectiveSize => "effective_size",
            MetricKind::Coreness => "coreness",
        }
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown metric {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricVector {
    pub metric: MetricKind,
    pub scores: BTreeMap<String, f64>,
}

impl MetricVector {
    pub fn ranks(&self) -> RankVector {
        to_ranks(&self.scores)
    }
}

/// Dense, index-addressed view of a network.
pub(crate) struct IndexedGraph {
    pub names: Vec<String>,
    pub adj: Vec<Vec<(usize, f64)>>,
    pub weights: Vec<f64>,
}

impl IndexedGraph {
    pub fn new(net: &CoocNetwork) -> Self {
        let names: Vec<String> = net.nodes().iter().cloned().collect();
        let n = names.len();
        let pos: BTreeMap<&str, usize> =
            names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut adj = vec![Vec::new(); n];
        let mut weights = vec![0.0; n * n];
        for ((a, b), &w) in net.edges() {
            let (i, j) = (pos[a.as_str()], pos[b.as_str()]);
            let w = w as f64;
            adj[i].push((j, w));
            adj[j].push((i, w));
            weights[i * n + j] = w;
            weights[j * n + i] = w;
        }
        IndexedGraph { names, adj, weights }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.len() + j]
    }

    fn to_vector(&self, metric: MetricKind, scores: Vec<f64>) -> MetricVector {
        MetricVector {
            metric,
            scores: self.names.iter().cloned().zip(scores).collect(),
        }
    }
}

pub fn weighted_degree(net: &CoocNetwork) -> MetricVector {
    let g = IndexedGraph::new(net);
    let scores = g.adj.iter().map(|nb| nb.iter().map(|&(_, w)| w).sum()).collect();
    g.to_vector(MetricKind::WeightedDegree, scores)
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then index for determinism
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Path lengths are sums of reciprocals; treat sums this close as equal.
const PATH_RTOL: f64 = 1e-10;

struct ShortestPaths {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    preds: Vec<Vec<usize>>,
    /// Vertices in non-decreasing distance order.
    order: Vec<usize>,
}

fn dijkstra(g: &IndexedGraph, source: usize) -> ShortestPaths {
    let n = g.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    sigma[source] = 1.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(d, v)) = heap.pop() {
        if settled[v] || d > dist[v] {
            continue;
        }
        settled[v] = true;
        order.push(v);
        for &(w, weight) in &g.adj[v] {
            if settled[w] {
                continue;
            }
            let alt = d + 1.0 / weight;
            let tol = PATH_RTOL * alt;
            if alt < dist[w] - tol {
                dist[w] = alt;
                sigma[w] = sigma[v];
                preds[w].clear();
                preds[w].push(v);
                heap.push(HeapItem(alt, w));
            } else if (alt - dist[w]).abs() <= tol {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    ShortestPaths {
        dist,
        sigma,
        preds,
        order,
    }
}

/// Brandes betweenness over `1/weight` distances, counting each unordered
/// pair once.
pub fn betweenness(net: &CoocNetwork) -> MetricVector {
    let g = IndexedGraph::new(net);
    let n = g.len();
    let mut bc = vec![0.0; n];
    for s in 0..n {
        let sp = dijkstra(&g, s);
        let mut delta = vec![0.0; n];
        for &w in sp.order.iter().rev() {
            for &v in &sp.preds[w] {
                delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    for b in &mut bc {
        *b /= 2.0;
    }
    g.to_vector(MetricKind::Betweenness, bc)
}

/// Harmonic closeness: the sum of reciprocal distances to every other
/// reachable node.
pub fn closeness(net: &CoocNetwork) -> MetricVector {
    let g = IndexedGraph::new(net);
    let scores = (0..g.len())
        .map(|s| {
            let sp = dijkstra(&g, s);
            sp.order
                .iter()
                .filter(|&&u| u != s)
                .map(|&u| 1.0 / sp.dist[u])
                .sum()
        })
        .collect();
    g.to_vector(MetricKind::Closeness, scores)
}

/// Burt's effective size with tie-strength weighting.
pub fn effective_size(net: &CoocNetwork) -> MetricVector {
    let g = IndexedGraph::new(net);
    let n = g.len();
    let strength: Vec<f64> = g.adj.iter().map(|nb| nb.iter().map(|&(_, w)| w).sum()).collect();
    let max_w: Vec<f64> = g
        .adj
        .iter()
        .map(|nb| nb.iter().map(|&(_, w)| w).fold(0.0, f64::max))
        .collect();
    let scores = (0..n)
        .map(|i| {
            if g.adj[i].is_empty() {
                return 0.0;
            }
            g.adj[i]
                .iter()
                .map(|&(j, _)| {
                    let redundancy: f64 = g.adj[i]
                        .iter()
                        .filter(|&&(q, _)| q != j)
                        .map(|&(q, w_iq)| (w_iq / strength[i]) * (g.w(j, q) / max_w[j]))
                        .sum();
                    1.0 - redundancy
                })
                .sum()
        })
        .collect();
    g.to_vector(MetricKind::EffectiveSize, scores)
}

pub fn compute_metric(
    net: &CoocNetwork,
    metric: MetricKind,
    params: &CorePeripheryParams,
) -> Result<MetricVector> {
    Ok(match metric {
        MetricKind::WeightedDegree => weighted_degree(net),
        MetricKind::Betweenness => betweenness(net),
        MetricKind::Closeness => closeness(net),
        MetricKind::EffectiveSize => effective_size(net),
        MetricKind::Coreness => core_periphery_scores(net, params)?,
    })
}

/// Write "name,metric,score,rank" rows, ranking each metric independently.
pub fn write_metrics_csv(path: impl AsRef<Path>, metrics: &[MetricVector]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["name", "metric", "score", "rank"])?;
    for m in metrics {
        let ranks = m.ranks();
        for (name, score) in &m.scores {
            w.write_record([
                name.as_str(),
                m.metric.as_str(),
                &score.to_string(),
                &ranks.ranks[name].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("metrics csv", e))
}

/// Write "name,rank_from,rank_to,shift" rows over the shared names.
pub fn write_shift_csv(path: impl AsRef<Path>, from: &RankVector, to: &RankVector) -> Result<()> {
    let shifts = rank_shift(from, to)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["name", "rank_from", "rank_to", "shift"])?;
    for (name, s) in &shifts {
        w.write_record([
            name.as_str(),
            &from.ranks[name].to_string(),
            &to.ranks[name].to_string(),
            &s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("shift csv", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn net(edges: &[(&str, &str, u64)]) -> CoocNetwork {
        let mut n = CoocNetwork::new();
        for &(a, b, w) in edges {
            n.add_edge(a, b, w).unwrap();
        }
        n
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn degree_examples() {
        let t = weighted_degree(&net(&[("A", "B", 1), ("B", "C", 2), ("C", "A", 3)]));
        assert_eq!(t.scores["A"], 4.0);
        assert_eq!(t.scores["B"], 3.0);
        assert_eq!(t.scores["C"], 5.0);
        let mut iso = net(&[("A", "B", 1)]);
        iso.add_node("Z");
        assert_eq!(weighted_degree(&iso).scores["Z"], 0.0);
        let star = weighted_degree(&net(&[("c", "x", 1), ("c", "y", 1), ("c", "z", 1)]));
        assert_eq!(star.scores["c"], 3.0);
        assert_eq!(star.scores["x"], 1.0);
    }

    #[test]
    fn betweenness_examples() {
        let p = betweenness(&net(&[("A", "B", 1), ("B", "C", 1)]));
        assert!(close(p.scores["B"], 1.0));
        assert_eq!(p.scores["A"], 0.0);
        assert_eq!(p.scores["C"], 0.0);
        let k4 = betweenness(&net(&[
            ("A", "B", 2),
            ("A", "C", 2),
            ("A", "D", 2),
            ("B", "C", 2),
            ("B", "D", 2),
            ("C", "D", 2),
        ]));
        assert!(k4.scores.values().all(|&v| v == 0.0));
    }

    #[test]
    fn betweenness_respects_weights() {
        // A–C direct is weak (length 1), A–B–C is strong (0.25 + 0.25)
        let b = betweenness(&net(&[("A", "C", 1), ("A", "B", 4), ("B", "C", 4)]));
        assert!(close(b.scores["B"], 1.0));
        // equal-length alternatives split the pair: 1/2 + 1/6 == 1/3 + 1/3
        let s = betweenness(&net(&[("A", "B", 2), ("B", "D", 6), ("A", "C", 3), ("C", "D", 3)]));
        assert!(close(s.scores["B"], 0.5), "{:?}", s.scores);
        assert!(close(s.scores["C"], 0.5), "{:?}", s.scores);
    }

    #[test]
    fn closeness_examples() {
        let p = closeness(&net(&[("A", "B", 1), ("B", "C", 1)]));
        assert!(close(p.scores["B"], 2.0));
        assert!(close(p.scores["A"], 1.5));
        assert!(close(p.scores["C"], 1.5));
        let d = closeness(&net(&[("A", "B", 1), ("C", "D", 1)]));
        assert!(d.scores.values().all(|&v| close(v, 1.0)));
    }

    #[test]
    fn effective_size_examples() {
        let star = effective_size(&net(&[("c", "x", 1), ("c", "y", 1), ("c", "z", 1), ("c", "w", 1)]));
        assert!(close(star.scores["c"], 4.0));
        assert!(close(star.scores["x"], 1.0));
        let tri = effective_size(&net(&[("A", "B", 3), ("B", "C", 3), ("C", "A", 3)]));
        assert!(tri.scores.values().all(|&v| close(v, 1.0)));
        let mut iso = net(&[("A", "B", 1)]);
        iso.add_node("Z");
        assert_eq!(effective_size(&iso).scores["Z"], 0.0);
    }

    #[test]
    fn csv_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let n = net(&[("A", "B", 1), ("B", "C", 2)]);
        let m = weighted_degree(&n);
        let p = dir.path().join("m.csv");
        write_metrics_csv(&p, &[m.clone()]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("name,metric,score,rank\n"));
        assert!(text.contains("B,weighted_degree,3,1\n"));
        let s = dir.path().join("s.csv");
        write_shift_csv(&s, &m.ranks(), &m.ranks()).unwrap();
        assert!(std::fs::read_to_string(&s).unwrap().starts_with("name,rank_from,rank_to,shift\n"));
    }

    #[test]
    fn metric_names_parse() {
        for m in MetricKind::ALL {
            assert_eq!(m.as_str().parse::<MetricKind>().unwrap(), m);
        }
        assert!("pagerank".parse::<MetricKind>().is_err());
    }
}
