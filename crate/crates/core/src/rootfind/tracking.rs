use num_complex::Complex64;
use serde::Serialize;

use super::theta_roots;
use crate::covariance::Covariance;
use crate::error::{Error, Result};

/// A match is accepted only when the nearest candidate is at most this
/// fraction of the distance to the second nearest.
const AMBIGUITY_RATIO: f64 = 0.5;
const MAX_REFINEMENT_DEPTH: u32 = 24;

/// Root branches of `q(r, ·)` followed along a grid of radii.
#[derive(Clone, Debug, Serialize)]
pub struct BranchTrack {
    pub r_grid: Vec<f64>,
    /// `branches[j][m]` is branch `j` at `r_grid[m]`.
    pub branches: Vec<Vec<Complex64>>,
    pub labels: Vec<BranchLabel>,
}

/// Where a branch ends up at the last grid point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BranchLabel {
    pub inside: bool,
    pub last: Complex64,
    pub distance_to_circle: f64,
}

impl BranchTrack {
    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// The branch values at grid index `m`.
    pub fn at(&self, m: usize) -> Vec<Complex64> {
        self.branches.iter().map(|b| b[m]).collect()
    }
}

/// Assigns each previous root to a distinct new root, or `None` if any
/// assignment is ambiguous.
fn match_roots(prev: &[Complex64], next: &[Complex64]) -> Option<Vec<usize>> {
    if prev.len() != next.len() {
        return None;
    }
    let mut used = vec![false; next.len()];
    let mut perm = Vec::with_capacity(prev.len());
    for &p in prev {
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        let mut best = usize::MAX;
        for (j, &q) in next.iter().enumerate() {
            let d = (p - q).norm();
            if d < d1 {
                d2 = d1;
                d1 = d;
                best = j;
            } else if d < d2 {
                d2 = d;
            }
        }
        if best == usize::MAX || used[best] || (next.len() > 1 && d1 > AMBIGUITY_RATIO * d2) {
            return None;
        }
        used[best] = true;
        perm.push(best);
    }
    Some(perm)
}

fn roots_at(cov: &Covariance, r: f64) -> Result<Vec<Complex64>> {
    Ok(theta_roots(cov, r)?.roots)
}

/// Continues `prev` (the roots at `r_from`) to `r_to`, bisecting the step when
/// the nearest-neighbour assignment is ambiguous.
fn advance(cov: &Covariance, prev: &[Complex64], r_from: f64, r_to: f64, depth: u32) -> Result<Vec<Complex64>> {
    let next = roots_at(cov, r_to)?;
    if let Some(perm) = match_roots(prev, &next) {
        return Ok(perm.into_iter().map(|j| next[j]).collect());
    }
    if depth >= MAX_REFINEMENT_DEPTH {
        return Err(Error::AmbiguousMatching { r: r_to });
    }
    let mid = 0.5 * (r_from + r_to);
    let at_mid = advance(cov, prev, r_from, mid, depth + 1)?;
    advance(cov, &at_mid, mid, r_to, depth + 1)
}

/// Tracks every root of `q(r, ·)` across `r_grid`, seeded at the smallest radius.
pub fn track_branches(cov: &Covariance, r_grid: &[f64]) -> Result<BranchTrack> {
    if r_grid.is_empty() {
        return Err(Error::Domain("empty r grid".into()));
    }
    if r_grid.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Domain("r grid must lie in (0, 1)".into()));
    }
    if r_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("r grid must be strictly increasing".into()));
    }

    let seed = roots_at(cov, r_grid[0])?;
    let mut branches: Vec<Vec<Complex64>> = seed.iter().map(|&z| vec![z]).collect();
    let mut current = seed;
    for w in r_grid.windows(2) {
        current = advance(cov, &current, w[0], w[1], 0)?;
        for (b, &z) in branches.iter_mut().zip(&current) {
            b.push(z);
        }
    }
    let labels = current
        .iter()
        .map(|&z| BranchLabel {
            inside: z.norm() < 1.0,
            last: z,
            distance_to_circle: (z.norm() - 1.0).abs(),
        })
        .collect();
    Ok(BranchTrack {
        r_grid: r_grid.to_vec(),
        branches,
        labels,
    })
}
