//! Monte Carlo zero counts for truncated random power series.
//!
//! Coefficients come from the moving-average filter applied to i.i.d.
//! standard complex Gaussians. Trial `i` draws from ChaCha8 stream `i` of the
//! configured seed, so reports do not depend on scheduling.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covariance::{spectral_factorize, Covariance, MaFilter};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::rootfind::{poly::horner, RootFinder};

pub const MIN_TRUNCATION: usize = 50;
pub const MAX_RADIUS: f64 = 0.95;
/// Target for the truncation tail bound when choosing a default degree.
pub const TAIL_TARGET: f64 = 1e-6;
/// Roots this close to the counting circle trigger a resample.
pub const CIRCLE_TOL: f64 = 1e-12;
const MAX_ATTEMPTS: usize = 16;
const MAX_WINDING_NODES: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McConfig {
    /// Degree `N` of the truncated series.
    pub truncation: usize,
    pub trials: usize,
    pub seed: u64,
    pub r: f64,
    /// Cross-check every root count against the winding number.
    pub diagnostics: bool,
    #[serde(skip)]
    pub execution: Execution,
}

impl McConfig {
    /// Configuration with the default truncation for dependence range `order`.
    pub fn new(order: usize, r: f64, trials: usize, seed: u64) -> Self {
        McConfig {
            truncation: default_truncation(order, r),
            trials,
            seed,
            r,
            diagnostics: false,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation < MIN_TRUNCATION {
            return Err(Error::Domain(format!(
                "truncation must be at least {MIN_TRUNCATION}, got {}",
                self.truncation
            )));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be positive".into()));
        }
        if !(self.r > 0.0 && self.r <= MAX_RADIUS) {
            return Err(Error::Domain(format!(
                "Monte Carlo radius must lie in (0, {MAX_RADIUS}], got {}",
                self.r
            )));
        }
        Ok(())
    }
}

/// `r^{2N+2} (n+1) / (1-r²)`, a bound on the variance of the discarded tail on `|z| = r`.
pub fn tail_bound(order: usize, r: f64, truncation: usize) -> f64 {
    r.powi(2 * truncation as i32 + 2) * (order + 1) as f64 / (1.0 - r * r)
}

/// Smallest `N >= 50` whose tail bound is below [`TAIL_TARGET`].
pub fn default_truncation(order: usize, r: f64) -> usize {
    let mut n = MIN_TRUNCATION;
    while tail_bound(order, r, n) >= TAIL_TARGET && n < 1 << 20 {
        n += 1;
    }
    n
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard complex Gaussian: modulus `sqrt(-ln u)`, uniform phase.
fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    Complex64::from_polar((-u1.ln()).sqrt(), TAU * u2)
}

fn draw(filter: &MaFilter, count: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let taps = &filter.taps;
    let lag = taps.len() - 1;
    let zeta: Vec<Complex64> = (0..count + lag).map(|_| complex_normal(rng)).collect();
    (0..count)
        .map(|k| taps.iter().enumerate().map(|(j, t)| t * zeta[k + lag - j]).sum())
        .collect()
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` correlated coefficients `ξ_k = Σ_j taps_j ζ_{k-j}` from stream 0 of `seed`.
pub fn sample_coefficients(filter: &MaFilter, count: usize, seed: u64) -> Vec<Complex64> {
    sample_coefficients_stream(filter, count, seed, 0)
}

pub fn sample_coefficients_stream(filter: &MaFilter, count: usize, seed: u64, stream: u64) -> Vec<Complex64> {
    draw(filter, count, &mut trial_rng(seed, stream))
}

fn trim(coeffs: &[Complex64]) -> &[Complex64] {
    let top = coeffs
        .iter()
        .rposition(|c| *c != Complex64::new(0.0, 0.0))
        .map_or(0, |t| t + 1);
    &coeffs[..top]
}

/// Number of roots of `Σ coeffs[k] z^k` in `|z| < r`.
pub fn count_zeros_in_disk(coeffs: &[Complex64], r: f64) -> Result<usize> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("counting radius must lie in (0, 1), got {r}")));
    }
    let p = trim(coeffs);
    if p.len() <= 1 {
        return if p.is_empty() {
            Err(Error::DegenerateInput("zero polynomial".into()))
        } else {
            Ok(0)
        };
    }
    let set = RootFinder::fast().roots(p)?;
    if set.roots.iter().any(|z| (z.norm() - r).abs() < CIRCLE_TOL) {
        return Err(Error::ZeroOnCircle { r });
    }
    Ok(set.roots.iter().filter(|z| z.norm() < r).count())
}

/// Winding number of `f` around `|z| = r`, summing principal-argument
/// increments and doubling the nodes until every increment is below one radian.
pub fn winding_number(coeffs: &[Complex64], r: f64) -> Result<i64> {
    let p = trim(coeffs);
    if p.is_empty() {
        return Err(Error::DegenerateInput("zero polynomial".into()));
    }
    let mut nodes = (8 * p.len()).next_power_of_two();
    while nodes <= MAX_WINDING_NODES {
        let values: Vec<Complex64> = (0..nodes)
            .map(|j| horner(p, Complex64::from_polar(r, TAU * j as f64 / nodes as f64)))
            .collect();
        if values.iter().any(|v| v.norm() == 0.0) {
            return Err(Error::ZeroOnCircle { r });
        }
        let mut total = 0.0;
        let mut largest: f64 = 0.0;
        for j in 0..nodes {
            let step = (values[(j + 1) % nodes] / values[j]).arg();
            largest = largest.max(step.abs());
            total += step;
        }
        if largest < 1.0 {
            return Ok((total / TAU).round() as i64);
        }
        nodes *= 2;
    }
    Err(Error::NoConvergence {
        nodes,
        change: f64::NAN,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub truncation: usize,
    pub seed: u64,
    pub r: f64,
    pub tail_bound: f64,
    /// Set when a single trial makes the standard error meaningless.
    pub degenerate: bool,
    /// Samples redrawn because a root sat on the counting circle.
    pub resampled: usize,
    /// Trials whose root count disagreed with the winding number.
    pub winding_disagreements: usize,
}

struct TrialOutcome {
    count: u64,
    resampled: usize,
    disagreement: bool,
}

fn run_trial(filter: &MaFilter, config: &McConfig, index: usize) -> Result<TrialOutcome> {
    let mut rng = trial_rng(config.seed, index as u64);
    let mut resampled = 0;
    loop {
        let coeffs = draw(filter, config.truncation + 1, &mut rng);
        match count_zeros_in_disk(&coeffs, config.r) {
            Ok(count) => {
                let mut disagreement = false;
                if config.diagnostics {
                    let w = winding_number(&coeffs, config.r)?;
                    if w != count as i64 {
                        log::warn!(
                            "seed {} trial {index}: root count {count}, winding number {w}",
                            config.seed
                        );
                        disagreement = true;
                    }
                }
                return Ok(TrialOutcome {
                    count: count as u64,
                    resampled,
                    disagreement,
                });
            }
            Err(Error::ZeroOnCircle { .. }) if resampled + 1 < MAX_ATTEMPTS => {
                log::warn!(
                    "seed {} trial {index}: zero on the counting circle, resampling",
                    config.seed
                );
                resampled += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn empirical_expected_zeros(cov: &Covariance, config: &McConfig) -> Result<MonteCarloReport> {
    config.validate()?;
    let filter = spectral_factorize(cov)?;
    let outcomes: Vec<TrialOutcome> = map_indexed(config.trials, config.execution, |i| run_trial(&filter, config, i))
        .into_iter()
        .collect::<Result<_>>()?;

    let t = config.trials as u128;
    let sum: u128 = outcomes.iter().map(|o| o.count as u128).sum();
    let sum_sq: u128 = outcomes.iter().map(|o| (o.count as u128).pow(2)).sum();
    let mean = sum as f64 / t as f64;
    let stderr = if t > 1 {
        let var = (t * sum_sq - sum * sum) as f64 / (t * (t - 1)) as f64;
        (var / t as f64).sqrt()
    } else {
        0.0
    };
    Ok(MonteCarloReport {
        mean,
        stderr,
        trials: config.trials,
        truncation: config.truncation,
        seed: config.seed,
        r: config.r,
        tail_bound: tail_bound(cov.trimmed().order(), config.r, config.truncation),
        degenerate: t == 1,
        resampled: outcomes.iter().map(|o| o.resampled).sum(),
        winding_disagreements: outcomes.iter().filter(|o| o.disagreement).count(),
    })
}
