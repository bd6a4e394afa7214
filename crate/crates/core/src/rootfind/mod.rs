//! Complex polynomial roots and their continuation in the radius parameter.
//!
//! [`poly_roots`] runs Aberth–Ehrlich simultaneous iteration with a
//! rounding-error stopping rule, detects numerically multiple roots, and
//! polishes the rest with Newton steps. [`theta_roots`] applies it to the
//! lifted spectral polynomial `q(r, z) = z^n Θ(r, z)`, and
//! [`track_branches`] follows those roots along a grid of radii.

mod dd;
pub(crate) mod poly;
mod tracking;

pub use tracking::{track_branches, BranchLabel, BranchTrack};

use num_complex::Complex64;
use serde::Serialize;

use crate::covariance::{spectral_poly, Covariance};
use crate::error::{Error, Result};
use poly::{abs_horner, horner, horner_with_bound, taylor_coeffs};

/// Relative backward-error tolerance for roots.
pub const TOL_ROOT: f64 = 1e-12;
/// Sweep limit for the simultaneous iteration.
pub const MAX_ITER: usize = 500;
/// Final clustering radius used to report multiplicities.
pub const CLUSTER_RADIUS: f64 = 1e-6;
/// Below this root separation, Newton polishing switches to double-double evaluation.
pub const EXTENDED_PRECISION_SEPARATION: f64 = 1e-5;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
// Candidate radii for multiple-root detection, relative to max(1, |z|).
const CLUSTER_LEVELS: [f64; 10] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.2, 0.3];
const MAX_CLUSTER_SIZE: usize = 32;

/// A distinct root together with its estimated multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
}

/// All roots of a polynomial, counted with multiplicity.
#[derive(Clone, Debug, Serialize)]
pub struct RootSet {
    /// Every root, repeated according to multiplicity.
    pub roots: Vec<Complex64>,
    /// Distinct roots with multiplicities.
    pub clusters: Vec<RootCluster>,
    /// Indices into `roots` with `|z| < 1`.
    pub inside: Vec<usize>,
    /// `max_j |p(z_j)| / sum_k |a_k| |z_j|^k`.
    pub residual: f64,
    pub iterations: usize,
}

impl RootSet {
    fn empty() -> Self {
        RootSet {
            roots: vec![],
            clusters: vec![],
            inside: vec![],
            residual: 0.0,
            iterations: 0,
        }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn inside_roots(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.inside.iter().map(move |&i| self.roots[i])
    }

    /// Smallest pairwise distance between distinct entries of `roots`.
    pub fn min_separation(&self) -> f64 {
        min_separation(&self.roots)
    }
}

/// Configuration for [`RootFinder::roots`].
#[derive(Clone, Debug)]
pub struct RootFinder {
    pub tol: f64,
    pub max_iter: usize,
    /// Collapse numerically multiple roots and report multiplicities.
    pub detect_multiplicity: bool,
    pub cluster_radius: f64,
    /// Apply Newton polishing after the simultaneous iteration.
    pub polish: bool,
}

impl Default for RootFinder {
    fn default() -> Self {
        RootFinder {
            tol: TOL_ROOT,
            max_iter: MAX_ITER,
            detect_multiplicity: true,
            cluster_radius: CLUSTER_RADIUS,
            polish: true,
        }
    }
}

/// Finds all roots of `sum_k coeffs[k] z^k` with the default configuration.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<RootSet> {
    RootFinder::default().roots(coeffs)
}

impl RootFinder {
    /// A configuration for bulk counting: no multiplicity analysis.
    pub fn fast() -> Self {
        RootFinder {
            detect_multiplicity: false,
            ..Default::default()
        }
    }

    pub fn roots(&self, coeffs: &[Complex64]) -> Result<RootSet> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::DegenerateInput("non-finite coefficient".into()));
        }
        let top = coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .ok_or_else(|| Error::DegenerateInput("zero polynomial".into()))?;
        if top == 0 {
            return Err(Error::DegenerateInput("degree 0 polynomial".into()));
        }
        // Exact zero roots are factored out.
        let low = coeffs.iter().position(|c| *c != Complex64::new(0.0, 0.0)).unwrap();
        let reduced = &coeffs[low..=top];

        let mut roots = vec![Complex64::new(0.0, 0.0); low];
        let mut iterations = 0;
        if reduced.len() > 1 {
            let (found, iters) = aberth(reduced, self.max_iter)?;
            iterations = iters;
            let found = if self.detect_multiplicity {
                collapse_multiple_roots(reduced, found, self.tol)
            } else {
                found
            };
            let found = if self.polish {
                polish_roots(reduced, found)
            } else {
                found
            };
            roots.extend(found);
        }

        let full = &coeffs[..=top];
        let residual = roots.iter().map(|&z| relative_residual(full, z)).fold(0.0, f64::max);
        let clusters = if self.detect_multiplicity {
            cluster(&roots, self.cluster_radius)
        } else {
            roots
                .iter()
                .map(|&center| RootCluster {
                    center,
                    multiplicity: 1,
                })
                .collect()
        };
        let inside = (0..roots.len()).filter(|&i| roots[i].norm() < 1.0).collect();
        Ok(RootSet {
            roots,
            clusters,
            inside,
            residual,
            iterations,
        })
    }
}

/// `|p(z)| / sum_k |a_k||z|^k`, evaluated on the reversed polynomial when `|z| > 1`.
pub(crate) fn relative_residual(coeffs: &[Complex64], z: Complex64) -> f64 {
    let (p, bound) = if z.norm() <= 1.0 {
        (horner(coeffs, z), abs_horner(coeffs, z.norm()))
    } else {
        let y = z.inv();
        let rev: Vec<Complex64> = coeffs.iter().rev().copied().collect();
        (horner(&rev, y), abs_horner(&rev, y.norm()))
    };
    if bound == 0.0 {
        0.0
    } else {
        p.norm() / bound
    }
}

pub(crate) fn min_separation(roots: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let d = (roots[i] - roots[j]).norm();
            if d > 0.0 {
                best = best.min(d);
            }
        }
    }
    best
}

struct NewtonData {
    /// `p'(z) / p(z)`, or `None` when `p(z)` is within rounding of zero.
    log_derivative: Option<Complex64>,
}

fn newton_data(coeffs: &[Complex64], rev: &[Complex64], z: Complex64) -> NewtonData {
    let d = (coeffs.len() - 1) as f64;
    let slack = 2.0 * (d + 1.0) * f64::EPSILON;
    if z.norm() <= 1.0 {
        let (p, dp, bound) = horner_with_bound(coeffs, z);
        if p.norm() <= slack * bound {
            return NewtonData { log_derivative: None };
        }
        NewtonData {
            log_derivative: Some(dp / p),
        }
    } else {
        // p(z) = z^d R(1/z)  =>  p'/p = (d R - y R') / (z R) with y = 1/z.
        let y = z.inv();
        let (r, dr, bound) = horner_with_bound(rev, y);
        if r.norm() <= slack * bound {
            return NewtonData { log_derivative: None };
        }
        NewtonData {
            log_derivative: Some((r * d - y * dr) / (z * r)),
        }
    }
}

fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let radius = (coeffs[0].norm() / coeffs[d].norm()).powf(1.0 / d as f64);
    let radius = if radius.is_finite() && radius > 0.0 {
        radius
    } else {
        1.0
    };
    (0..d)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / d as f64 + GOLDEN_ANGLE / d as f64 + 0.25;
            Complex64::from_polar(radius, theta)
        })
        .collect()
}

/// Gauss–Seidel Aberth–Ehrlich iteration. `coeffs` must have nonzero first and
/// last entries.
fn aberth(coeffs: &[Complex64], max_iter: usize) -> Result<(Vec<Complex64>, usize)> {
    let d = coeffs.len() - 1;
    if d == 1 {
        return Ok((vec![-coeffs[0] / coeffs[1]], 0));
    }
    let rev: Vec<Complex64> = coeffs.iter().rev().copied().collect();
    let mut z = initial_guesses(coeffs);
    let mut done = vec![false; d];

    for sweep in 1..=max_iter {
        let mut active = false;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let Some(ld) = newton_data(coeffs, &rev, zi).log_derivative else {
                done[i] = true;
                continue;
            };
            active = true;
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    repulsion += (zi - zj).inv();
                }
            }
            let denom = ld - repulsion;
            let step = if denom.norm() > 0.0 && denom.re.is_finite() && denom.im.is_finite() {
                denom.inv()
            } else {
                // Stationary point of the correction; nudge off it.
                Complex64::new(1e-8, 1e-8) * (1.0 + zi.norm())
            };
            z[i] = zi - step;
            if step.norm() <= f64::EPSILON * zi.norm() {
                done[i] = true;
            }
        }
        if !active {
            return Ok((z, sweep));
        }
    }
    let residual = z.iter().map(|&zi| relative_residual(coeffs, zi)).fold(0.0, f64::max);
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

/// Single-linkage groups of indices within `radius * max(1, |z|)`.
fn linkage_groups(roots: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() <= radius * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![vec![]; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Refines the centroid of an m-cluster as the simple root of `p^{(m-1)}`.
fn refine_center(coeffs: &[Complex64], centroid: Complex64, m: usize, radius: f64) -> Complex64 {
    let t = taylor_coeffs(coeffs, m - 1);
    if t.len() < 2 {
        return centroid;
    }
    let mut z = centroid;
    let mut last_step = f64::INFINITY;
    for _ in 0..12 {
        let (p, dp, _) = horner_with_bound(&t, z);
        if dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        if step.norm().is_nan() || step.norm() >= last_step || (z - step - centroid).norm() > radius {
            break;
        }
        last_step = step.norm();
        z -= step;
        if last_step <= f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Whether `center` is an m-fold root of a polynomial within relative
/// backward error `tol` of `coeffs`.
fn is_multiple_root(coeffs: &[Complex64], center: Complex64, m: usize, tol: f64) -> bool {
    let cn = center.norm();
    (0..m).all(|k| {
        let t = taylor_coeffs(coeffs, k);
        let value = horner(&t, center).norm();
        let bound = abs_horner(&t, cn);
        value <= tol * bound
    })
}

fn collapse_multiple_roots(coeffs: &[Complex64], mut roots: Vec<Complex64>, tol: f64) -> Vec<Complex64> {
    // (members, center) of accepted clusters.
    let mut accepted: Vec<(Vec<usize>, Complex64)> = vec![];
    for &level in &CLUSTER_LEVELS {
        for group in linkage_groups(&roots, level) {
            let m = group.len();
            if !(2..=MAX_CLUSTER_SIZE).contains(&m) {
                continue;
            }
            if accepted.iter().any(|(g, _)| *g == group) {
                continue;
            }
            let centroid = group.iter().map(|&i| roots[i]).sum::<Complex64>() / m as f64;
            let scale = centroid.norm().max(1.0);
            let center = refine_center(coeffs, centroid, m, level * scale * 2.0);
            if is_multiple_root(coeffs, center, m, tol) {
                accepted.retain(|(g, _)| !g.iter().all(|i| group.contains(i)));
                accepted.push((group, center));
            }
        }
    }
    for (group, center) in accepted {
        for i in group {
            roots[i] = center;
        }
    }
    roots
}

fn polish_roots(coeffs: &[Complex64], mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let n = roots.len();
    for i in 0..n {
        let zi = roots[i];
        // Collapsed multiple roots share an exact value; Newton would scatter them.
        if roots.iter().enumerate().any(|(j, &zj)| j != i && zj == zi) {
            continue;
        }
        let nearest = roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &zj)| (zi - zj).norm())
            .fold(f64::INFINITY, f64::min);
        let extended = nearest < EXTENDED_PRECISION_SEPARATION;
        let mut z = zi;
        let mut best = relative_residual(coeffs, z);
        for _ in 0..3 {
            if best == 0.0 {
                break;
            }
            let (p, dp) = if extended {
                dd::horner_dd(coeffs, z)
            } else {
                let (p, dp, _) = horner_with_bound(coeffs, z);
                (p, dp)
            };
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if step.norm() > 0.5 * nearest {
                break;
            }
            let cand = z - step;
            let res = relative_residual(coeffs, cand);
            if res < best || (extended && res <= best) {
                z = cand;
                best = res;
            } else {
                break;
            }
        }
        roots[i] = z;
    }
    roots
}

fn cluster(roots: &[Complex64], radius: f64) -> Vec<RootCluster> {
    linkage_groups(roots, radius)
        .into_iter()
        .map(|g| RootCluster {
            center: g.iter().map(|&i| roots[i]).sum::<Complex64>() / g.len() as f64,
            multiplicity: g.len(),
        })
        .collect()
}

/// Roots of the lift `q(r, z)` for `0 < r <= 1` (no inside-count check).
pub(crate) fn lift_roots(cov: &Covariance, r: f64) -> Result<RootSet> {
    let cov = cov.trimmed();
    if cov.order() == 0 {
        return Ok(RootSet::empty());
    }
    let sp = spectral_poly(&cov, r)?;
    poly_roots(sp.lift())
}

/// Roots of `q(r, z) = z^n Θ(r, z)` for `0 < r < 1`.
///
/// Trailing zero covariances are trimmed first, so the i.i.d. case yields an
/// empty set. Exactly `n` roots lie inside the unit disk.
pub fn theta_roots(cov: &Covariance, r: f64) -> Result<RootSet> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("theta_roots needs 0 < r < 1, got {r}")));
    }
    let set = lift_roots(cov, r)?;
    let n = cov.trimmed().order();
    if set.inside.len() != n {
        return Err(Error::InsideCount {
            expected: n,
            found: set.inside.len(),
        });
    }
    Ok(set)
}
