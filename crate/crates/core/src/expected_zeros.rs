//! Expected zero counts in the disk of radius `r`.
//!
//! The count splits as `r²/(1-r²) + J(r)`, where the baseline is the i.i.d.
//! value and `J(r) <= 0` is the correction. `J(r)` is computed three ways:
//! a residue sum over the roots of the lifted spectral polynomial, periodic
//! trapezoidal quadrature on the circle, and a tensor-product area integral.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::Covariance;
use crate::error::{Error, Result};
use crate::kernel::{g_poly, GPoly, GeneratingFunction};
use crate::par::{map_indexed, Execution};
use crate::rootfind::{lift_roots, theta_roots, RootSet};

/// Relative convergence tolerance for the quadrature routes.
pub const TOL_QUAD: f64 = 1e-10;
/// Inside roots closer than this send the residue route to quadrature.
pub const NEAR_MULTIPLE_SEPARATION: f64 = 1e-7;
const CONTOUR_START_NODES: usize = 256;
const CONTOUR_MAX_NODES: usize = 1 << 22;
const UNIT_CIRCLE_TOL: f64 = 1e-7;

pub fn baseline(r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(r * r / (1.0 - r * r))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must lie in (0, 1), got {r}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Residue,
    #[serde(rename = "contour")]
    ContourQuad,
    #[serde(rename = "area")]
    AreaQuad,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Residue, Method::ContourQuad, Method::AreaQuad];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Residue => "residue",
            Method::ContourQuad => "contour",
            Method::AreaQuad => "area",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "residue" => Ok(Method::Residue),
            "contour" => Ok(Method::ContourQuad),
            "area" => Ok(Method::AreaQuad),
            _ => Err(Error::Domain(format!("unknown method {s:?}"))),
        }
    }
}

/// Numerical side information for a correction estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Imaginary part discarded from the complex sum.
    pub imag: f64,
    /// Root-finder backward error (residue route).
    pub root_residual: f64,
    /// Smallest distance between inside roots (residue route).
    pub min_inside_separation: f64,
    /// Quadrature nodes used in the final estimate.
    pub nodes: usize,
    /// Change between the last two quadrature refinements.
    pub change: f64,
    /// Whether the residue route fell back to contour quadrature.
    pub fallback: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrectionEstimate {
    pub value: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// `r · Σ_k z_k^n G'(r z_k) / q'(z_k)` over the selected roots, with
/// `q'(z_k) = lead · Π_{j≠k} (z_k - z_j)`.
fn residue_sum(set: &RootSet, selected: &[usize], lead: Complex64, n: usize, r: f64, g: &GPoly) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &k in selected {
        let zk = set.roots[k];
        let mut dq = lead;
        for (j, &zj) in set.roots.iter().enumerate() {
            if j != k {
                dq *= zk - zj;
            }
        }
        acc += zk.powi(n as i32) * g.g_prime(zk * r) / dq;
    }
    acc * r
}

fn min_distance(points: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

/// Residue route without fallback; fails with [`Error::NearMultipleRoot`]
/// when two inside roots nearly coincide.
pub fn correction_residue_strict(cov: &Covariance, r: f64) -> Result<CorrectionEstimate> {
    check_radius(r)?;
    let cov = cov.trimmed();
    let n = cov.order();
    if n == 0 {
        return Ok(CorrectionEstimate {
            value: 0.0,
            method: Method::Residue,
            diagnostics: Diagnostics {
                min_inside_separation: f64::INFINITY,
                ..Default::default()
            },
        });
    }
    let set = theta_roots(&cov, r)?;
    let inside: Vec<Complex64> = set.inside_roots().collect();
    let sep = min_distance(&inside);
    if sep < NEAR_MULTIPLE_SEPARATION {
        return Err(Error::NearMultipleRoot { separation: sep });
    }
    let lead = cov.gamma()[n].conj() * r.powi(n as i32);
    let sum = residue_sum(&set, &set.inside, lead, n, r, &g_poly(&cov));
    Ok(CorrectionEstimate {
        value: sum.re,
        method: Method::Residue,
        diagnostics: Diagnostics {
            imag: sum.im,
            root_residual: set.residual,
            min_inside_separation: sep,
            ..Default::default()
        },
    })
}

/// Residue route, falling back to contour quadrature near multiple inside roots.
pub fn correction_residue_detailed(cov: &Covariance, r: f64) -> Result<CorrectionEstimate> {
    match correction_residue_strict(cov, r) {
        Err(Error::NearMultipleRoot { separation }) => {
            log::warn!("inside roots {separation:e} apart at r = {r}; using contour quadrature");
            let mut est = correction_contour_detailed(&g_poly(cov), r)?;
            est.method = Method::Residue;
            est.diagnostics.fallback = true;
            est.diagnostics.min_inside_separation = separation;
            Ok(est)
        }
        other => other,
    }
}

pub fn correction_residue(cov: &Covariance, r: f64) -> Result<f64> {
    Ok(correction_residue_detailed(cov, r)?.value)
}

/// Mean of `G'(w) w / (1 + 2 Re G(w))` over `count` nodes `w = r e^{iθ}`
/// with `θ = 2π (offset + stride j) / total`.
fn contour_partial<G: GeneratingFunction + ?Sized>(
    g: &G,
    r: f64,
    total: usize,
    offset: usize,
    stride: usize,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut j = offset;
    while j < total {
        let w = Complex64::from_polar(r, TAU * j as f64 / total as f64);
        let theta = 1.0 + 2.0 * g.g(w).re;
        acc += g.g_prime(w) * w / theta;
        j += stride;
    }
    acc
}

/// Trapezoidal quadrature of the circle integral of `G'/G₂` with node doubling.
pub fn correction_contour_detailed<G: GeneratingFunction + ?Sized>(g: &G, r: f64) -> Result<CorrectionEstimate> {
    check_radius(r)?;
    let mut nodes = CONTOUR_START_NODES;
    let mut sum = contour_partial(g, r, nodes, 0, 1);
    let mut estimate = sum / nodes as f64;
    let mut change = f64::INFINITY;
    while nodes < CONTOUR_MAX_NODES {
        let fresh = contour_partial(g, r, 2 * nodes, 1, 2);
        sum += fresh;
        nodes *= 2;
        let next = sum / nodes as f64;
        change = (next - estimate).norm();
        estimate = next;
        if change < TOL_QUAD * estimate.norm().max(1.0) {
            return Ok(CorrectionEstimate {
                value: estimate.re,
                method: Method::ContourQuad,
                diagnostics: Diagnostics {
                    imag: estimate.im,
                    nodes,
                    change,
                    ..Default::default()
                },
            });
        }
    }
    Err(Error::NoConvergence { nodes, change })
}

pub fn correction_contour_quad<G: GeneratingFunction + ?Sized>(g: &G, r: f64) -> Result<f64> {
    Ok(correction_contour_detailed(g, r)?.value)
}

// 20-point Gauss–Legendre rule on [-1, 1], computed once.
fn gauss_legendre_20() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order as f64;
    (0..order)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∫_0^{2π} |G'(ρe^{iθ})|² / G₂² dθ` by trapezoid with node doubling.
fn angular_integral(g: &GPoly, rho: f64) -> Result<(f64, usize)> {
    let f = |theta: f64| {
        let w = Complex64::from_polar(rho, theta);
        let g2 = 1.0 + 2.0 * g.g(w).re;
        g.g_prime(w).norm_sqr() / (g2 * g2)
    };
    let mut nodes = 64usize;
    let mut sum: f64 = (0..nodes).map(|j| f(TAU * j as f64 / nodes as f64)).sum();
    let mut est = TAU * sum / nodes as f64;
    while nodes < CONTOUR_MAX_NODES {
        sum += (0..nodes)
            .map(|j| f(TAU * (2 * j + 1) as f64 / (2 * nodes) as f64))
            .sum::<f64>();
        nodes *= 2;
        let next = TAU * sum / nodes as f64;
        let change = (next - est).abs();
        est = next;
        if change <= 1e-14 * est.abs() || est == 0.0 {
            return Ok((est, nodes));
        }
    }
    Err(Error::NoConvergence {
        nodes,
        change: f64::NAN,
    })
}

/// Radial panels graded toward `r`: `levels` dyadic panels, each split into `split` pieces.
fn area_estimate(g: &GPoly, r: f64, levels: usize, split: usize) -> Result<(f64, usize)> {
    let mut breaks = vec![0.0];
    for k in 1..=levels {
        breaks.push(r * (1.0 - 0.5f64.powi(k as i32)));
    }
    breaks.push(r);
    let rule = gauss_legendre_20();
    let mut total = 0.0;
    let mut nodes = 0;
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / split as f64;
        for s in 0..split {
            let lo = w[0] + h * s as f64;
            for &(x, wt) in rule {
                let rho = lo + 0.5 * h * (x + 1.0);
                let (inner, m) = angular_integral(g, rho)?;
                total += 0.5 * h * wt * rho * inner;
                nodes += m;
            }
        }
    }
    Ok((-total / PI, nodes))
}

/// Area integral `-(1/π) ∫_{|z|<r} |G'|² / G₂² dm` on a graded polar grid.
pub fn correction_area_detailed(cov: &Covariance, r: f64) -> Result<CorrectionEstimate> {
    check_radius(r)?;
    let g = g_poly(cov);
    if g.degree() == 0 {
        return Ok(CorrectionEstimate {
            value: 0.0,
            method: Method::AreaQuad,
            diagnostics: Diagnostics::default(),
        });
    }
    let mut levels = 4;
    let mut split = 1;
    let (mut est, _) = area_estimate(&g, r, levels, split)?;
    let mut change = f64::INFINITY;
    while split <= 64 {
        levels += 4;
        split *= 2;
        let (next, nodes) = area_estimate(&g, r, levels, split)?;
        change = (next - est).abs();
        est = next;
        if change < TOL_QUAD * est.abs().max(1.0) {
            return Ok(CorrectionEstimate {
                value: est,
                method: Method::AreaQuad,
                diagnostics: Diagnostics {
                    nodes,
                    change,
                    ..Default::default()
                },
            });
        }
    }
    Err(Error::NoConvergence { nodes: 0, change })
}

pub fn correction_area_quad(cov: &Covariance, r: f64) -> Result<f64> {
    Ok(correction_area_detailed(cov, r)?.value)
}

pub fn correction(cov: &Covariance, r: f64, method: Method) -> Result<CorrectionEstimate> {
    match method {
        Method::Residue => correction_residue_detailed(cov, r),
        Method::ContourQuad => correction_contour_detailed(&g_poly(cov), r),
        Method::AreaQuad => correction_area_detailed(cov, r),
    }
}

/// Residue sum at `r = 1`, defined when the spectral density has no zeros on
/// the circle. This is the limit of `J(r)` as `r → 1`.
pub fn correction_at_unit_radius(cov: &Covariance) -> Result<f64> {
    let cov = cov.trimmed();
    let n = cov.order();
    if n == 0 {
        return Ok(0.0);
    }
    let set = lift_roots(&cov, 1.0)?;
    if let Some(z) = set.roots.iter().find(|z| (z.norm() - 1.0).abs() < UNIT_CIRCLE_TOL) {
        return Err(Error::Domain(format!(
            "spectral density vanishes at angle {:.6}; no finite limit",
            z.arg()
        )));
    }
    if set.inside.len() != n {
        return Err(Error::InsideCount {
            expected: n,
            found: set.inside.len(),
        });
    }
    let lead = cov.gamma()[n].conj();
    Ok(residue_sum(&set, &set.inside, lead, n, 1.0, &g_poly(&cov)).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZeroCountResult {
    pub r: f64,
    pub baseline: f64,
    pub correction: f64,
    pub total: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

pub fn expected_zeros(cov: &Covariance, r: f64, method: Method) -> Result<ZeroCountResult> {
    let base = baseline(r)?;
    let est = correction(cov, r, method)?;
    Ok(ZeroCountResult {
        r,
        baseline: base,
        correction: est.value,
        total: base + est.value,
        method,
        diagnostics: est.diagnostics,
    })
}

/// Evaluates every `(r, method)` pair, ordered by `r` then by method.
pub fn sweep(cov: &Covariance, r_grid: &[f64], methods: &[Method], exec: Execution) -> Result<Vec<ZeroCountResult>> {
    let m = methods.len();
    map_indexed(r_grid.len() * m, exec, |i| {
        expected_zeros(cov, r_grid[i / m], methods[i % m])
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::{binomial_covariance, two_dependent};
    use crate::kernel::{oracle_correction, OracleModel};

    #[test]
    fn baseline_values() {
        assert!((baseline(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!((baseline(0.99).unwrap() - 49.251256281407).abs() < 1e-9);
        assert!(baseline(1e-9).unwrap() < 1e-17);
        assert!(baseline(1.0).is_err());
        assert!(baseline(0.0).is_err());
    }

    #[test]
    fn iid_corrections_vanish() {
        let cov = two_dependent(0.0, 0.0).unwrap();
        for m in Method::ALL {
            assert_eq!(correction(&cov, 0.7, m).unwrap().value, 0.0);
        }
        let z = expected_zeros(&cov, 0.5, Method::Residue).unwrap();
        assert_eq!(z.total, 1.0 / 3.0);
    }

    #[test]
    fn methods_agree_interior() {
        let cov = two_dependent(0.2, 0.05).unwrap();
        let res = correction_residue(&cov, 0.9).unwrap();
        let con = correction_contour_quad(&g_poly(&cov), 0.9).unwrap();
        let area = correction_area_quad(&cov, 0.9).unwrap();
        assert!((res - con).abs() < 1e-8, "{res} {con}");
        assert!((con - area).abs() < 1e-6, "{con} {area}");
        assert!(res < 0.0);
    }

    #[test]
    fn corner_residue_matches_contour() {
        let cov = two_dependent(2.0 / 3.0, 1.0 / 6.0).unwrap();
        let res = correction_residue(&cov, 0.9).unwrap();
        let con = correction_contour_quad(&g_poly(&cov), 0.9).unwrap();
        assert!((res - con).abs() < 1e-8, "{res} {con}");
    }

    #[test]
    fn ou_oracle() {
        let m = OracleModel::ornstein_uhlenbeck(0.5).unwrap();
        let q = correction_contour_quad(&m, 0.9).unwrap();
        assert!((q - oracle_correction(m, 0.9).unwrap()).abs() < 1e-8);
        assert!((q + 0.253918).abs() < 1e-6);
    }

    #[test]
    fn complex_covariance_methods_agree() {
        let cov = Covariance::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.2, 0.15),
            Complex64::new(-0.05, 0.1),
        ])
        .unwrap();
        let res = correction_residue_detailed(&cov, 0.8).unwrap();
        let con = correction_contour_detailed(&g_poly(&cov), 0.8).unwrap();
        assert!((res.value - con.value).abs() < 1e-8);
        assert!(res.diagnostics.imag.abs() < 1e-9);
        assert!(con.diagnostics.imag.abs() < 1e-9);
    }

    #[test]
    fn unit_radius_limit_interior() {
        let cov = two_dependent(0.2, 0.05).unwrap();
        let j1 = correction_at_unit_radius(&cov).unwrap();
        assert!((j1 + 0.042388074).abs() < 1e-8, "{j1}");
        assert!(correction_at_unit_radius(&binomial_covariance(2)).is_err());
    }

    #[test]
    fn generic_residue_needs_no_fallback() {
        let cov = two_dependent(0.4, 0.1).unwrap();
        let est = correction_residue_detailed(&cov, 0.6).unwrap();
        assert!(!est.diagnostics.fallback);
        assert!(est.diagnostics.min_inside_separation > 1e-3);
    }

    #[test]
    fn sweep_orders_rows() {
        let cov = two_dependent(0.3, 0.1).unwrap();
        let rows = sweep(
            &cov,
            &[0.3, 0.6],
            &[Method::Residue, Method::ContourQuad],
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].r, 0.3);
        assert_eq!(rows[1].method, Method::ContourQuad);
        assert_eq!(rows[2].r, 0.6);
        let par = sweep(
            &cov,
            &[0.3, 0.6],
            &[Method::Residue, Method::ContourQuad],
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(rows, par);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("foo".parse::<Method>().is_err());
    }
}
