//! Dense singular value decomposition by one-sided Jacobi rotations.

use ndarray::Array2;

use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// `m = u · diag(s) · vᵀ` with singular values in descending order.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Array2<f64>,
    pub s: Vec<f64>,
    pub v: Array2<f64>,
}

impl Svd {
    /// Number of singular values above `rtol` times the largest.
    pub fn rank(&self, rtol: f64) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        self.s.iter().filter(|&&x| x > rtol * top && x > 0.0).count()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(a: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = a.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// SVD of an `r × c` matrix with `r ≥ c`. Columns of `u` belonging to zero
/// singular values are left as zero vectors.
pub fn svd(m: &Array2<f64>) -> Result<Svd> {
    let (rows, cols) = m.dim();
    if rows < cols {
        return Err(Error::invalid("svd needs at least as many rows as columns"));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("svd input has non-finite entries"));
    }
    let mut a: Vec<Vec<f64>> = m.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Degenerate("Jacobi SVD did not converge".into()));
    }
    let norms: Vec<f64> = a.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = Array2::zeros((rows, cols));
    let mut vm = Array2::zeros((cols, cols));
    let mut s = Vec::with_capacity(cols);
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        if norms[j] > 0.0 {
            for i in 0..rows {
                u[[i, k]] = a[j][i] / norms[j];
            }
        }
        for i in 0..cols {
            vm[[i, k]] = v[j][i];
        }
    }
    Ok(Svd { u, s, v: vm })
}
