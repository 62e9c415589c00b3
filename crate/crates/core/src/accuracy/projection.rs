//! Euclidean projection onto the convex hull of a finite vertex set by
//! Frank–Wolfe with away steps.
//!
//! The objective is `½‖x − c‖²`, so the gradient at `x` is `x − c` and exact
//! line search along any direction `d` is `−⟨g, d⟩ / ‖d‖²`. The Frank–Wolfe
//! gap `max_v ⟨g, x − v⟩` bounds the suboptimality and, for this objective,
//! also bounds how far off the per-vertex Brier comparisons can be: for every
//! vertex `v`, `‖v − x‖² − ‖v − c‖² ≤ 2·gap − ‖x − c‖²`.

use serde::{Deserialize, Serialize};

use super::AccuracyError;

/// Default distance below which a credence vector counts as coherent.
pub const DEFAULT_EPS_PROJ: f64 = 1e-7;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionOptions {
    pub eps_proj: f64,
    pub max_iterations: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            eps_proj: DEFAULT_EPS_PROJ,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl ProjectionOptions {
    /// Stopping threshold on the Frank–Wolfe gap. A quarter of `eps²` keeps
    /// the iterate within `eps/√2` of the true projection.
    pub fn gap_tolerance(&self) -> f64 {
        0.25 * self.eps_proj * self.eps_proj
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub point: Vec<f64>,
    pub hull_distance: f64,
    /// Frank–Wolfe gap at the returned iterate.
    pub gap: f64,
    pub iterations: usize,
    /// Convex weights over the vertex list at the returned iterate.
    pub weights: Vec<(usize, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn combine(vertices: &[Vec<f64>], active: &[(usize, f64)], dim: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    for &(i, w) in active {
        for (xk, vk) in x.iter_mut().zip(&vertices[i]) {
            *xk += w * vk;
        }
    }
    x
}

/// Active vertex indices with their convex weights.
type Weights = Vec<(usize, f64)>;

/// Projects `c` onto `conv(vertices)`.
///
/// When the resulting distance is at most `eps_proj` the input is returned
/// unchanged with distance 0.
pub fn project_onto_hull(
    c: &[f64],
    vertices: &[Vec<f64>],
    opts: &ProjectionOptions,
) -> Result<Projection, AccuracyError> {
    let dim = c.len();
    if vertices.is_empty() {
        return Err(AccuracyError::EmptyVectorSet);
    }
    if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
        return Err(AccuracyError::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }

    let start = (0..vertices.len())
        .min_by(|&a, &b| dist2(&vertices[a], c).total_cmp(&dist2(&vertices[b], c)))
        .expect("non-empty");
    let mut active: Vec<(usize, f64)> = vec![(start, 1.0)];
    let tol = opts.gap_tolerance();
    let mut best: Option<(f64, Vec<f64>, Weights)> = None;

    for iteration in 0..=opts.max_iterations {
        let x = combine(vertices, &active, dim);
        let g: Vec<f64> = x.iter().zip(c).map(|(xi, ci)| xi - ci).collect();
        let gx = dot(&g, &x);

        let (s, gs) = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (i, dot(&g, v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        let gap = (gx - gs).max(0.0);

        if best.as_ref().is_none_or(|(b, ..)| gap < *b) {
            best = Some((gap, x.clone(), active.clone()));
        }
        if gap <= tol {
            return Ok(finish(c, x, gap, iteration, active, opts));
        }
        if iteration == opts.max_iterations {
            break;
        }

        let (away_pos, ga) = active
            .iter()
            .enumerate()
            .map(|(k, &(i, _))| (k, dot(&g, &vertices[i])))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("active set non-empty");
        let away_gain = ga - gx;

        if gap >= away_gain {
            let d: Vec<f64> = vertices[s].iter().zip(&x).map(|(v, xi)| v - xi).collect();
            let dd = dot(&d, &d);
            let gamma = if dd > 0.0 { (gap / dd).min(1.0) } else { 0.0 };
            if gamma >= 1.0 {
                active = vec![(s, 1.0)];
            } else {
                for (_, w) in active.iter_mut() {
                    *w *= 1.0 - gamma;
                }
                match active.iter_mut().find(|(i, _)| *i == s) {
                    Some((_, w)) => *w += gamma,
                    None => active.push((s, gamma)),
                }
            }
        } else {
            let (a, alpha) = active[away_pos];
            let d: Vec<f64> = x.iter().zip(&vertices[a]).map(|(xi, v)| xi - v).collect();
            let dd = dot(&d, &d);
            let gamma_max = alpha / (1.0 - alpha);
            let gamma = if dd > 0.0 {
                (away_gain / dd).min(gamma_max)
            } else {
                0.0
            };
            for (_, w) in active.iter_mut() {
                *w *= 1.0 + gamma;
            }
            active[away_pos].1 -= gamma;
            if gamma >= gamma_max || active[away_pos].1 <= 0.0 {
                active.remove(away_pos);
            }
        }
        // Renormalize against drift.
        let total: f64 = active.iter().map(|(_, w)| w).sum();
        for (_, w) in active.iter_mut() {
            *w /= total;
        }
    }

    let (gap, point, _) = best.expect("at least one iterate");
    Err(AccuracyError::NonConvergence {
        hull_distance: dist2(&point, c).sqrt(),
        best: point,
        gap,
        iterations: opts.max_iterations,
    })
}

fn finish(
    c: &[f64],
    x: Vec<f64>,
    gap: f64,
    iterations: usize,
    mut weights: Vec<(usize, f64)>,
    opts: &ProjectionOptions,
) -> Projection {
    weights.sort_by_key(|&(i, _)| i);
    let hull_distance = dist2(&x, c).sqrt();
    if hull_distance <= opts.eps_proj {
        Projection {
            point: c.to_vec(),
            hull_distance: 0.0,
            gap,
            iterations,
            weights,
        }
    } else {
        Projection {
            point: x,
            hull_distance,
            gap,
            iterations,
            weights,
        }
    }
}
