//! Deliberately naive reference computations.
//!
//! Everything here works on plain adjacency matrices, slices and closures and
//! shares no code with `charrep`. Costs are factorial or exponential; keep
//! inputs to eight nodes or fewer.

/// Symmetric weight matrix; 0.0 means no edge.
pub type Adjacency = Vec<Vec<f64>>;

const REL_TOL: f64 = 1e-10;

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.max(b)
}

fn simple_paths(adj: &Adjacency, s: usize, t: usize) -> Vec<(f64, Vec<usize>)> {
    fn walk(
        adj: &Adjacency,
        at: usize,
        t: usize,
        len: f64,
        path: &mut Vec<usize>,
        out: &mut Vec<(f64, Vec<usize>)>,
    ) {
        if at == t {
            out.push((len, path.clone()));
            return;
        }
        for next in 0..adj.len() {
            if adj[at][next] > 0.0 && !path.contains(&next) {
                path.push(next);
                walk(adj, next, t, len + 1.0 / adj[at][next], path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(adj, s, t, 0.0, &mut vec![s], &mut out);
    out
}

/// Shortest distance by enumerating every simple path; `None` if unreachable.
pub fn shortest_distance(adj: &Adjacency, s: usize, t: usize) -> Option<f64> {
    simple_paths(adj, s, t)
        .into_iter()
        .map(|(l, _)| l)
        .min_by(|a, b| a.total_cmp(b))
}

/// Unnormalized betweenness from explicit enumeration of all shortest paths,
/// each unordered pair counted once.
pub fn betweenness(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = simple_paths(adj, s, t);
            let Some(best) = paths.iter().map(|p| p.0).min_by(|a, b| a.total_cmp(b)) else {
                continue;
            };
            let shortest: Vec<&Vec<usize>> = paths
                .iter()
                .filter(|(l, _)| same_length(*l, best))
                .map(|(_, p)| p)
                .collect();
            let total = shortest.len() as f64;
            for v in 0..n {
                if v == s || v == t {
                    continue;
                }
                let through = shortest.iter().filter(|p| p.contains(&v)).count() as f64;
                bc[v] += through / total;
            }
        }
    }
    bc
}

pub fn harmonic_closeness(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v)
                .filter_map(|u| shortest_distance(adj, v, u))
                .map(|d| 1.0 / d)
                .sum()
        })
        .collect()
}

pub fn weighted_degree(adj: &Adjacency) -> Vec<f64> {
    adj.iter().map(|row| row.iter().sum()).collect()
}

/// Burt's effective size written as degree minus total redundancy.
pub fn effective_size(adj: &Adjacency) -> Vec<f64> {
    let n = adj.len();
    (0..n)
        .map(|i| {
            let neighbours: Vec<usize> = (0..n).filter(|&j| adj[i][j] > 0.0).collect();
            if neighbours.is_empty() {
                return 0.0;
            }
            let total: f64 = neighbours.iter().map(|&j| adj[i][j]).sum();
            let mut redundancy = 0.0;
            for &j in &neighbours {
                let jmax = (0..n).map(|k| adj[j][k]).fold(0.0, f64::max);
                for &q in &neighbours {
                    if q != j {
                        redundancy += adj[i][q] / total * adj[j][q] / jmax;
                    }
                }
            }
            neighbours.len() as f64 - redundancy
        })
        .collect()
}

/// Two-block core profile for 1-based position `k` of `n`.
pub fn core_value(k: usize, n: usize, alpha: f64, beta: f64) -> f64 {
    let periphery = (beta * n as f64).floor() as usize;
    if k <= periphery {
        k as f64 * (1.0 - alpha) / (2.0 * periphery as f64)
    } else {
        let core = n - periphery;
        (k - periphery) as f64 * (1.0 - alpha) / (2.0 * core as f64) + (1.0 + alpha) / 2.0
    }
}

/// Maximum of `sum_ij A_ij C_i C_j` over every assignment of nodes to
/// positions (Heap's algorithm).
pub fn best_core_quality(adj: &Adjacency, alpha: f64, beta: f64) -> f64 {
    let n = adj.len();
    let values: Vec<f64> = (1..=n).map(|k| core_value(k, n, alpha, beta)).collect();
    let quality = |perm: &[usize]| {
        let mut q = 0.0;
        for i in 0..n {
            for j in 0..n {
                q += adj[i][j] * values[perm[i]] * values[perm[j]];
            }
        }
        q
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = quality(&perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(quality(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Informative-Dirichlet log-odds z-score for one term, evaluated straight
/// from the textbook formulas.
pub fn log_odds_z(
    y_a: f64,
    n_a: f64,
    y_b: f64,
    n_b: f64,
    pooled_term: f64,
    pooled_total: f64,
    prior_scale: f64,
) -> f64 {
    let alpha_w = prior_scale * pooled_term / pooled_total;
    let alpha_0 = prior_scale;
    let odds_a = (y_a + alpha_w) / (n_a + alpha_0 - y_a - alpha_w);
    let odds_b = (y_b + alpha_w) / (n_b + alpha_0 - y_b - alpha_w);
    let delta = odds_a.ln() - odds_b.ln();
    let variance = 1.0 / (y_a + alpha_w) + 1.0 / (y_b + alpha_w);
    delta / variance.sqrt()
}

/// Central finite-difference gradient.
pub fn finite_difference_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Chi-square upper tail for even degrees of freedom, from the closed-form
/// Poisson sum `exp(-x/2) * sum_{i<df/2} (x/2)^i / i!`.
pub fn chi_square_sf_even(df: u32, x: f64) -> f64 {
    assert!(df % 2 == 0 && df > 0);
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..df / 2 {
        term *= half / i as f64;
        sum += term;
    }
    (-half).exp() * sum
}
