//! Aggregate core scores from a grid of two-block core quality profiles.
//!
//! Each grid point `(alpha, beta)` defines a core vector over rank positions:
//! the lowest `floor(beta * n)` positions form the periphery, values rise
//! linearly within each block and jump by about `alpha` at the boundary. A
//! node ordering is scored by `sum_ij A_ij C_i C_j`; the best ordering found
//! by simulated annealing over position swaps contributes
//! `C_v * quality` to each node's aggregate, which is finally scaled to a
//! maximum of 1.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{IndexedGraph, MetricKind, MetricVector};
use crate::charnet::CoocNetwork;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorePeripheryParams {
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    /// Annealing steps per grid point; `None` means `10 * n^2`.
    pub anneal_steps: Option<usize>,
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub seed: u64,
}

impl Default for CorePeripheryParams {
    fn default() -> Self {
        let grid = vec![0.1, 0.3, 0.5, 0.7, 0.9];
        CorePeripheryParams {
            alpha_grid: grid.clone(),
            beta_grid: grid,
            anneal_steps: None,
            initial_temperature: 1.0,
            cooling_rate: 0.995,
            seed: 0,
        }
    }
}

impl CorePeripheryParams {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() || self.beta_grid.is_empty() {
            return Err(Error::invalid("core-periphery grids must be non-empty"));
        }
        let in_unit = |x: &f64| (0.0..=1.0).contains(x);
        if !self.alpha_grid.iter().all(in_unit) || !self.beta_grid.iter().all(in_unit) {
            return Err(Error::invalid("core-periphery grid values must lie in [0, 1]"));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(Error::invalid("cooling_rate must lie in (0, 1)"));
        }
        if !(self.initial_temperature > 0.0) {
            return Err(Error::invalid("initial_temperature must be positive"));
        }
        if self.anneal_steps == Some(0) {
            return Err(Error::invalid("anneal_steps must be positive"));
        }
        Ok(())
    }
}

/// Core-vector values for positions `1..=n` (index 0 is the most peripheral
/// position, index n-1 the most core, always 1.0).
pub fn core_vector(n: usize, alpha: f64, beta: f64) -> Vec<f64> {
    let nb = ((beta * n as f64).floor() as usize).min(n);
    (1..=n)
        .map(|k| {
            if k <= nb {
                k as f64 * (1.0 - alpha) / (2.0 * nb as f64)
            } else {
                (k - nb) as f64 * (1.0 - alpha) / (2.0 * (n - nb) as f64) + (1.0 + alpha) / 2.0
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFit {
    pub alpha: f64,
    pub beta: f64,
    /// `sum_ij A_ij C_i C_j` over ordered pairs, in raw edge weights.
    pub quality: f64,
    /// Node names from most peripheral to most core.
    pub order: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorePeripheryFit {
    pub points: Vec<GridFit>,
    pub scores: MetricVector,
}

struct Annealer<'g> {
    g: &'g IndexedGraph,
    /// Weights scaled so the heaviest edge is 1.
    scale: f64,
}

impl Annealer<'_> {
    fn w(&self, i: usize, j: usize) -> f64 {
        self.g.w(i, j) * self.scale
    }

    fn strength_at(&self, u: usize, pos: &[usize], c: &[f64]) -> f64 {
        self.g.adj[u]
            .iter()
            .map(|&(k, w)| w * self.scale * c[pos[k]])
            .sum()
    }

    /// Change in the ordered-pair quality when swapping the nodes at
    /// positions `p` and `q`.
    fn swap_delta(&self, order: &[usize], pos: &[usize], c: &[f64], p: usize, q: usize) -> f64 {
        let (u, v) = (order[p], order[q]);
        let (cu, cv) = (c[p], c[q]);
        let su = self.strength_at(u, pos, c);
        let sv = self.strength_at(v, pos, c);
        2.0 * (cv - cu) * (su - sv - self.w(u, v) * (cv - cu))
    }

    fn quality(&self, pos: &[usize], c: &[f64]) -> f64 {
        let mut q = 0.0;
        for (i, nb) in self.g.adj.iter().enumerate() {
            for &(j, w) in nb {
                q += w * c[pos[i]] * c[pos[j]];
            }
        }
        q * self.scale
    }

    fn run(
        &self,
        c: &[f64],
        steps: usize,
        t0: f64,
        cooling: f64,
        rng: &mut ChaCha8Rng,
    ) -> (Vec<usize>, f64) {
        let n = self.g.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut pos = vec![0; n];
        for (p, &u) in order.iter().enumerate() {
            pos[u] = p;
        }
        let mut energy = self.quality(&pos, c);
        let mut best = (order.clone(), energy);
        let mut temp = t0;
        if n >= 2 {
            for _ in 0..steps {
                let p = rng.gen_range(0..n);
                let mut q = rng.gen_range(0..n - 1);
                if q >= p {
                    q += 1;
                }
                let delta = self.swap_delta(&order, &pos, c, p, q);
                let accept = delta >= 0.0 || rng.gen::<f64>() < (delta / temp).exp();
                if accept {
                    order.swap(p, q);
                    pos[order[p]] = p;
                    pos[order[q]] = q;
                    energy += delta;
                    if energy > best.1 {
                        best = (order.clone(), energy);
                    }
                }
                temp *= cooling;
            }
        }
        // Polish with steepest-ascent pair swaps until no swap improves.
        let (mut order, _) = best;
        for (p, &u) in order.iter().enumerate() {
            pos[u] = p;
        }
        let mut energy = self.quality(&pos, c);
        for _ in 0..4 * n.max(1) {
            let tol = 1e-12 * energy.abs().max(1.0);
            let mut best_move = None;
            let mut best_gain = tol;
            for p in 0..n {
                for q in p + 1..n {
                    let d = self.swap_delta(&order, &pos, c, p, q);
                    if d > best_gain {
                        best_gain = d;
                        best_move = Some((p, q));
                    }
                }
            }
            let Some((p, q)) = best_move else { break };
            order.swap(p, q);
            pos[order[p]] = p;
            pos[order[q]] = q;
            energy = self.quality(&pos, c);
        }
        (order, energy)
    }

    /// Core values per node, averaged over groups of positions whose swap
    /// leaves the quality unchanged, so interchangeable nodes score equally.
    fn symmetric_values(&self, order: &[usize], c: &[f64], energy: f64) -> Vec<f64> {
        let n = order.len();
        let mut pos = vec![0; n];
        for (p, &u) in order.iter().enumerate() {
            pos[u] = p;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let tol = 1e-9 * energy.abs().max(1e-300);
        for p in 0..n {
            for q in p + 1..n {
                if self.swap_delta(order, &pos, c, p, q).abs() <= tol {
                    let (a, b) = (find(&mut parent, p), find(&mut parent, q));
                    parent[a] = b;
                }
            }
        }
        let mut sum = vec![0.0; n];
        let mut count = vec![0usize; n];
        for p in 0..n {
            let r = find(&mut parent, p);
            sum[r] += c[p];
            count[r] += 1;
        }
        let mut values = vec![0.0; n];
        for p in 0..n {
            let r = find(&mut parent, p);
            values[order[p]] = sum[r] / count[r] as f64;
        }
        values
    }
}

/// Full fit: per-grid-point best orderings plus the aggregate scores.
pub fn core_periphery_fit(
    net: &CoocNetwork,
    params: &CorePeripheryParams,
) -> Result<CorePeripheryFit> {
    params.validate()?;
    if net.is_empty() {
        return Err(Error::Degenerate("core-periphery scores of an empty network".into()));
    }
    if net.edge_count() == 0 {
        return Err(Error::Degenerate("core-periphery scores of a network without edges".into()));
    }
    let g = IndexedGraph::new(net);
    let n = g.len();
    let max_w = net.edges().values().copied().max().unwrap_or(1) as f64;
    let annealer = Annealer {
        g: &g,
        scale: 1.0 / max_w,
    };
    let steps = params.anneal_steps.unwrap_or(10 * n * n);
    let grid: Vec<(usize, f64, f64)> = params
        .alpha_grid
        .iter()
        .flat_map(|&a| params.beta_grid.iter().map(move |&b| (a, b)))
        .enumerate()
        .map(|(i, (a, b))| (i, a, b))
        .collect();

    let results: Vec<(GridFit, Vec<f64>, f64)> = grid
        .par_iter()
        .map(|&(i, alpha, beta)| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            let c = core_vector(n, alpha, beta);
            let (order, energy) = annealer.run(
                &c,
                steps,
                params.initial_temperature,
                params.cooling_rate,
                &mut rng,
            );
            let values = annealer.symmetric_values(&order, &c, energy);
            let fit = GridFit {
                alpha,
                beta,
                quality: energy * max_w,
                order: order.iter().map(|&u| g.names[u].clone()).collect(),
            };
            (fit, values, energy)
        })
        .collect();

    let mut agg = vec![0.0; n];
    for (_, values, energy) in &results {
        for (a, v) in agg.iter_mut().zip(values) {
            *a += v * energy;
        }
    }
    let top = agg.iter().copied().fold(0.0, f64::max);
    if top > 0.0 {
        for a in &mut agg {
            *a /= top;
        }
    }
    Ok(CorePeripheryFit {
        points: results.into_iter().map(|(f, _, _)| f).collect(),
        scores: MetricVector {
            metric: MetricKind::Coreness,
            scores: g.names.iter().cloned().zip(agg).collect(),
        },
    })
}

pub fn core_periphery_scores(
    net: &CoocNetwork,
    params: &CorePeripheryParams,
) -> Result<MetricVector> {
    core_periphery_fit(net, params).map(|f| f.scores)
}
