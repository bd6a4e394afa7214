//! Finitely dependent covariance sequences and their spectral polynomials.
//!
//! A [`Covariance`] stores `γ(0..=n)` with `γ(0) = 1`; negative lags follow
//! from `γ(-k) = conj(γ(k))`. The scaled spectral density
//! `Θ(r, z) = Σ_k c_k z^k` has `c_k = conj(γ(k)) r^k` and `c_{-k} = γ(k) r^k`
//! for `k > 0`, and its polynomial lift is `q(r, z) = z^n Θ(r, z)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootfind::{lift_roots, poly::binomial, poly::from_roots};

/// Tolerance for the exact boundary conditions of the two-dependent region.
pub const TOL_REGION: f64 = 1e-12;
/// Distance from `(±2/3, 1/6)` within which a point counts as the degenerate corner.
pub const TOL_CORNER: f64 = 1e-9;
/// Number of points in the spectral-density positivity check.
pub const PSD_GRID: usize = 4096;
/// Smallest admissible spectral density value on the check grid.
pub const PSD_TOL: f64 = -1e-10;
/// Roots within this distance of the unit circle are treated as lying on it.
pub const UNIT_CIRCLE_TOL: f64 = 1e-7;
/// Angular distance within which unit-circle roots are grouped before pairing.
pub const CIRCLE_PAIR_ANGLE: f64 = 1e-2;

/// Stationary covariance `γ(k) = E[ξ_j conj(ξ_{j+k})]` vanishing for `|k| > n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CovarianceRepr", into = "CovarianceRepr")]
pub struct Covariance {
    gamma: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CovarianceRepr {
    n: usize,
    gamma: Vec<[f64; 2]>,
}

impl TryFrom<CovarianceRepr> for Covariance {
    type Error = Error;

    fn try_from(repr: CovarianceRepr) -> Result<Self> {
        if repr.gamma.len() != repr.n + 1 {
            return Err(Error::InvalidCovariance(format!(
                "n = {} but {} gamma entries",
                repr.n,
                repr.gamma.len()
            )));
        }
        Covariance::new(repr.gamma.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
    }
}

impl From<Covariance> for CovarianceRepr {
    fn from(c: Covariance) -> Self {
        CovarianceRepr {
            n: c.order(),
            gamma: c.gamma.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl Covariance {
    /// Validates `γ(0) = 1`, `|γ(k)| <= 1` and nonnegativity of the spectral
    /// density on a [`PSD_GRID`]-point grid.
    pub fn new(gamma: Vec<Complex64>) -> Result<Self> {
        let cov = Self::new_unchecked(gamma)?;
        let min = cov.min_spectral_density(PSD_GRID);
        if min < PSD_TOL {
            return Err(Error::NotPositiveDefinite(format!("spectral density reaches {min:e}")));
        }
        Ok(cov)
    }

    /// Structural checks only; positivity is the caller's responsibility.
    pub(crate) fn new_unchecked(gamma: Vec<Complex64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::InvalidCovariance("empty gamma".into()));
        }
        if gamma[0] != Complex64::new(1.0, 0.0) {
            return Err(Error::InvalidCovariance(format!(
                "gamma(0) must be exactly 1, got {}",
                gamma[0]
            )));
        }
        if let Some(k) = gamma.iter().position(|g| !g.re.is_finite() || !g.im.is_finite()) {
            return Err(Error::InvalidCovariance(format!("gamma({k}) is not finite")));
        }
        if let Some(k) = gamma.iter().position(|g| g.norm() > 1.0 + TOL_REGION) {
            return Err(Error::NotPositiveDefinite(format!(
                "|gamma({k})| = {} exceeds 1",
                gamma[k].norm()
            )));
        }
        Ok(Covariance { gamma })
    }

    pub fn from_real(gamma: &[f64]) -> Result<Self> {
        Self::new(gamma.iter().map(|&g| Complex64::new(g, 0.0)).collect())
    }

    /// The i.i.d. covariance `γ = (1)`.
    pub fn iid() -> Self {
        Covariance {
            gamma: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Dependence range `n` as stored (may include trailing zeros).
    pub fn order(&self) -> usize {
        self.gamma.len() - 1
    }

    /// `γ(0..=n)`.
    pub fn gamma(&self) -> &[Complex64] {
        &self.gamma
    }

    /// `γ(k)` for any integer lag.
    pub fn at(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        match self.gamma.get(idx) {
            None => Complex64::new(0.0, 0.0),
            Some(&g) if k < 0 => g.conj(),
            Some(&g) => g,
        }
    }

    pub fn is_real(&self) -> bool {
        self.gamma.iter().all(|g| g.im == 0.0)
    }

    pub fn is_iid(&self) -> bool {
        self.gamma[1..].iter().all(|g| *g == Complex64::new(0.0, 0.0))
    }

    /// Copy with trailing zero lags removed.
    pub fn trimmed(&self) -> Covariance {
        let last = self
            .gamma
            .iter()
            .rposition(|g| *g != Complex64::new(0.0, 0.0))
            .unwrap_or(0);
        Covariance {
            gamma: self.gamma[..=last].to_vec(),
        }
    }

    /// `Θ(r, e^{iθ}) = 1 + 2 Σ_k r^k Re(conj(γ(k)) e^{ikθ})`.
    pub fn scaled_density(&self, r: f64, theta: f64) -> f64 {
        let mut acc = 1.0;
        let mut rk = 1.0;
        for (k, g) in self.gamma.iter().enumerate().skip(1) {
            rk *= r;
            acc += 2.0 * rk * (g.conj() * Complex64::from_polar(1.0, k as f64 * theta)).re;
        }
        acc
    }

    /// The spectral density `Θ(1, e^{iθ})`.
    pub fn spectral_density(&self, theta: f64) -> f64 {
        self.scaled_density(1.0, theta)
    }

    /// Minimum of the spectral density over `points` equispaced angles.
    pub fn min_spectral_density(&self, points: usize) -> f64 {
        (0..points)
            .map(|j| self.spectral_density(TAU * j as f64 / points as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Region of the two-dependent `(a, b)` plane, split by asymptotic regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegionLabel {
    Interior,
    BoundaryEllipse,
    BoundaryLine,
    CornerDegenerate,
    Outside,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Interior => "interior",
            RegionLabel::BoundaryEllipse => "boundary_ellipse",
            RegionLabel::BoundaryLine => "boundary_line",
            RegionLabel::CornerDegenerate => "corner",
            RegionLabel::Outside => "outside",
        }
    }
}

fn ellipse_excess(a: f64, b: f64) -> f64 {
    a * a / 8.0 + (b - 0.25) * (b - 0.25) - 1.0 / 16.0
}

/// Membership of `(a, b)` in the union of the ellipse disk and the region
/// between the lines `b = |a| - 1/2` below `b = 1/6`.
pub fn in_region(a: f64, b: f64) -> bool {
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    let e = ellipse_excess(a, b);
    let in_ellipse = e <= TOL_REGION;
    let in_wedge = e >= -TOL_REGION && a.abs() - 0.5 <= b + TOL_REGION && b <= 1.0 / 6.0 + TOL_REGION;
    in_ellipse || in_wedge
}

pub fn classify_region(a: f64, b: f64) -> RegionLabel {
    if !in_region(a, b) {
        return RegionLabel::Outside;
    }
    if (a.abs() - 2.0 / 3.0).abs() < TOL_CORNER && (b - 1.0 / 6.0).abs() < TOL_CORNER {
        return RegionLabel::CornerDegenerate;
    }
    if ellipse_excess(a, b).abs() < TOL_REGION && b > 1.0 / 6.0 && b <= 0.5 + TOL_REGION {
        return RegionLabel::BoundaryEllipse;
    }
    if (b - (a.abs() - 0.5)).abs() < TOL_REGION && (-0.5 - TOL_REGION..1.0 / 6.0).contains(&b) {
        return RegionLabel::BoundaryLine;
    }
    RegionLabel::Interior
}

/// The two-dependent covariance `γ = (1, a, b)`.
pub fn two_dependent(a: f64, b: f64) -> Result<Covariance> {
    if !in_region(a, b) {
        return Err(Error::NotPositiveDefinite(format!(
            "(a, b) = ({a}, {b}) is outside the positive-definite region"
        )));
    }
    Covariance::new_unchecked(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(a, 0.0),
        Complex64::new(b, 0.0),
    ])
}

/// `γ_n(k) = C(2n, n+k) / C(2n, n)`, whose spectral density is `(z+1)^{2n}` up to scale.
pub fn binomial_covariance(n: usize) -> Covariance {
    assert!(n >= 1, "binomial covariance needs n >= 1");
    let mut gamma = Vec::with_capacity(n + 1);
    let mut g = 1.0f64;
    gamma.push(Complex64::new(1.0, 0.0));
    for k in 1..=n {
        // C(2n, n+k) / C(2n, n+k-1) = (n-k+1) / (n+k)
        g *= (n - k + 1) as f64 / (n + k) as f64;
        gamma.push(Complex64::new(g, 0.0));
    }
    Covariance { gamma }
}

/// Laurent coefficients of `Θ(r, ·)` and the lift `q(r, ·)`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralPoly {
    pub r: f64,
    pub order: usize,
    /// `coeffs[n + k] = c_k` for `-n <= k <= n`; doubles as the ascending
    /// coefficients of `q(r, z)`.
    coeffs: Vec<Complex64>,
}

impl SpectralPoly {
    /// `c_k` for `-n <= k <= n`.
    pub fn laurent(&self, k: i64) -> Complex64 {
        let idx = self.order as i64 + k;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    pub fn laurent_coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Ascending coefficients of `q(r, z) = z^n Θ(r, z)`.
    pub fn lift(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `Θ(r, z)` for `z != 0`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let q = crate::rootfind::poly::horner(&self.coeffs, z);
        q / z.powi(self.order as i32)
    }
}

pub fn spectral_poly(cov: &Covariance, r: f64) -> Result<SpectralPoly> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("spectral_poly needs 0 < r <= 1, got {r}")));
    }
    let n = cov.order();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut rk = 1.0;
    for k in 1..=n {
        rk *= r;
        let g = cov.gamma[k];
        coeffs[n + k] = g.conj() * rk;
        coeffs[n - k] = g * rk;
    }
    Ok(SpectralPoly { r, order: n, coeffs })
}

/// Moving-average filter `ξ_k = Σ_j taps[j] ζ_{k-j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaFilter {
    pub taps: Vec<Complex64>,
}

impl MaFilter {
    pub fn identity() -> Self {
        MaFilter {
            taps: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// `Σ_j taps[j] conj(taps[j+k])` for `0 <= k < taps.len()`.
    pub fn autocovariance(&self) -> Vec<Complex64> {
        let h = &self.taps;
        (0..h.len())
            .map(|k| (0..h.len() - k).map(|j| h[j] * h[j + k].conj()).sum())
            .collect()
    }

    /// Largest deviation of the filter's autocovariance from `cov`.
    pub fn roundtrip_residual(&self, cov: &Covariance) -> f64 {
        let acv = self.autocovariance();
        let len = acv.len().max(cov.order() + 1);
        (0..len)
            .map(|k| {
                let a = acv.get(k).copied().unwrap_or_default();
                (a - cov.at(k as i64)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Fejér–Riesz factorization of the spectral density into a moving-average filter.
///
/// Roots of the lift of `Θ(1, ·)` come in pairs `{w, 1/conj(w)}`; the filter
/// keeps the member with `|w| <= 1`. Roots on the unit circle must have even
/// multiplicity and contribute half of it.
pub fn spectral_factorize(cov: &Covariance) -> Result<MaFilter> {
    let cov = cov.trimmed();
    let n = cov.order();
    if n == 0 {
        return Ok(MaFilter::identity());
    }
    let min = cov.min_spectral_density(PSD_GRID);
    if min < PSD_TOL {
        return Err(Error::NotPositiveDefinite(format!("spectral density reaches {min:e}")));
    }
    let set = lift_roots(&cov, 1.0)?;

    let mut selected = Vec::with_capacity(n);
    let mut circle = Vec::new();
    for &w in &set.roots {
        let m = w.norm();
        if (m - 1.0).abs() < UNIT_CIRCLE_TOL {
            circle.push(w.arg());
        } else if m < 1.0 {
            selected.push(w);
        }
    }
    for group in angle_groups(circle, CIRCLE_PAIR_ANGLE) {
        if group.len() % 2 == 1 {
            return Err(Error::Factorization(format!(
                "unit-circle root at angle {:.6} has odd multiplicity {}",
                group[0],
                group.len()
            )));
        }
        let dir: Complex64 = group.iter().map(|&t| Complex64::from_polar(1.0, t)).sum();
        let w = dir / dir.norm();
        selected.extend(std::iter::repeat_n(w, group.len() / 2));
    }
    if selected.len() != n {
        return Err(Error::Factorization(format!(
            "selected {} roots for a filter of order {n}",
            selected.len()
        )));
    }

    let monic = from_roots(&selected);
    let norm = monic.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let filter = MaFilter {
        taps: monic.iter().map(|c| c / norm).collect(),
    };
    let residual = filter.roundtrip_residual(&cov);
    if residual > 1e-6 {
        return Err(Error::Factorization(format!("round-trip residual {residual:e}")));
    }
    Ok(filter)
}

/// Groups angles whose circular gap is below `tol`.
fn angle_groups(mut angles: Vec<f64>, tol: f64) -> Vec<Vec<f64>> {
    if angles.is_empty() {
        return vec![];
    }
    angles.sort_by(f64::total_cmp);
    let mut groups: Vec<Vec<f64>> = vec![vec![angles[0]]];
    for w in angles.windows(2) {
        if w[1] - w[0] < tol {
            groups.last_mut().unwrap().push(w[1]);
        } else {
            groups.push(vec![w[1]]);
        }
    }
    // Merge across the ±π cut.
    if groups.len() > 1 {
        let first = groups[0][0];
        let last = *groups.last().unwrap().last().unwrap();
        if first + TAU - last < tol {
            let head = groups.remove(0);
            groups.last_mut().unwrap().extend(head);
        }
    }
    groups
}

/// Binomial coefficient as `f64`, exposed for the binomial family.
pub fn choose(n: u64, k: u64) -> f64 {
    binomial(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dependent_examples() {
        assert!(two_dependent(0.0, 0.0).is_ok());
        assert!(two_dependent(2.0 / 3.0, 1.0 / 6.0).is_ok());
        assert!(matches!(two_dependent(0.7, 0.5), Err(Error::NotPositiveDefinite(_))));
        assert!(matches!(two_dependent(0.9, 0.9), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_region(0.0, 0.0), RegionLabel::Interior);
        assert_eq!(classify_region(2.0 / 3.0, 1.0 / 6.0), RegionLabel::CornerDegenerate);
        assert_eq!(classify_region(-2.0 / 3.0, 1.0 / 6.0), RegionLabel::CornerDegenerate);
        let a = 2.0 * (0.3f64 * 0.4).sqrt();
        assert_eq!(classify_region(a, 0.3), RegionLabel::BoundaryEllipse);
        assert_eq!(classify_region(-a, 0.3), RegionLabel::BoundaryEllipse);
        assert_eq!(classify_region(0.3, -0.2), RegionLabel::BoundaryLine);
        assert_eq!(classify_region(0.0, -0.5), RegionLabel::BoundaryLine);
        assert_eq!(classify_region(0.0, 0.5), RegionLabel::BoundaryEllipse);
        assert_eq!(classify_region(0.7, 0.5), RegionLabel::Outside);
        // Rounded corner coordinates still land on the corner.
        assert_eq!(
            classify_region(0.6666666667, 0.1666666667),
            RegionLabel::CornerDegenerate
        );
    }

    #[test]
    fn binomial_examples() {
        let c2 = binomial_covariance(2);
        assert_eq!(c2.gamma()[1].re, 2.0 / 3.0);
        assert_eq!(c2.gamma()[2].re, 1.0 / 6.0);
        let c1 = binomial_covariance(1);
        assert_eq!(c1.gamma()[1].re, 0.5);
        for n in 1..=10u64 {
            let c = binomial_covariance(n as usize);
            let last = c.gamma()[n as usize].re;
            assert!((last - 1.0 / choose(2 * n, n)).abs() < 1e-15 * last.max(1e-300) * 10.0);
        }
    }

    #[test]
    fn spectral_poly_two_dependent_coeffs() {
        let (a, b, r) = (0.3, 0.1, 0.7);
        let sp = spectral_poly(&two_dependent(a, b).unwrap(), r).unwrap();
        let expect = [b * r * r, a * r, 1.0, a * r, b * r * r];
        for (c, e) in sp.laurent_coeffs().iter().zip(expect) {
            assert!((c - e).norm() < 1e-15);
        }
    }

    #[test]
    fn binomial_lift_at_unit_radius_is_power_of_z_plus_one() {
        for n in 1..=6u64 {
            let sp = spectral_poly(&binomial_covariance(n as usize), 1.0).unwrap();
            let norm = choose(2 * n, n);
            for (k, c) in sp.lift().iter().enumerate() {
                let expect = choose(2 * n, k as u64) / norm;
                assert!((c.re - expect).abs() < 1e-15, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn iid_theta_is_one() {
        let sp = spectral_poly(&Covariance::iid(), 0.4).unwrap();
        assert_eq!(sp.lift(), &[Complex64::new(1.0, 0.0)]);
        assert_eq!(sp.eval(Complex64::new(0.3, 0.2)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn spectral_poly_domain() {
        let cov = binomial_covariance(2);
        assert!(matches!(spectral_poly(&cov, 0.0), Err(Error::Domain(_))));
        assert!(matches!(spectral_poly(&cov, 1.1), Err(Error::Domain(_))));
    }

    #[test]
    fn complex_theta_is_real_on_circle() {
        let cov = Covariance::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.2, 0.15),
            Complex64::new(-0.05, 0.1),
        ])
        .unwrap();
        let sp = spectral_poly(&cov, 0.8).unwrap();
        for j in 0..16 {
            let t = TAU * j as f64 / 16.0;
            let v = sp.eval(Complex64::from_polar(1.0, t));
            assert!(v.im.abs() < 1e-14);
            assert!((v.re - cov.scaled_density(0.8, t)).abs() < 1e-14);
        }
    }

    #[test]
    fn covariance_validation() {
        assert!(matches!(
            Covariance::from_real(&[0.9, 0.1]),
            Err(Error::InvalidCovariance(_))
        ));
        assert!(matches!(
            Covariance::from_real(&[1.0, 1.5]),
            Err(Error::NotPositiveDefinite(_))
        ));
        // |γ(1)| < 1 but spectral density negative.
        assert!(matches!(
            Covariance::from_real(&[1.0, 0.9, 0.9]),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(Covariance::from_real(&[1.0, 0.5]).is_ok());
    }

    #[test]
    fn json_shape() {
        let cov = binomial_covariance(1);
        let text = serde_json::to_string(&cov).unwrap();
        assert_eq!(text, r#"{"n":1,"gamma":[[1.0,0.0],[0.5,0.0]]}"#);
        let back: Covariance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cov);
        assert!(serde_json::from_str::<Covariance>(r#"{"n":2,"gamma":[[1.0,0.0]]}"#).is_err());
        assert!(serde_json::from_str::<Covariance>(r#"{"n":1,"gamma":[[1.0,0.0],[0.9,0.9]]}"#).is_err());
    }

    #[test]
    fn factorize_examples() {
        let f = spectral_factorize(&Covariance::iid()).unwrap();
        assert_eq!(f.taps, vec![Complex64::new(1.0, 0.0)]);

        for n in 1..=6u64 {
            let f = spectral_factorize(&binomial_covariance(n as usize)).unwrap();
            let norm = choose(2 * n, n).sqrt();
            for (j, t) in f.taps.iter().enumerate() {
                let expect = choose(n, j as u64) / norm;
                assert!((t - expect).norm() < 1e-12, "n={n} j={j}: {t}");
            }
        }

        let cov = two_dependent(0.2, 0.05).unwrap();
        let f = spectral_factorize(&cov).unwrap();
        assert!(f.roundtrip_residual(&cov) < 1e-10);
        let unit: f64 = f.taps.iter().map(|t| t.norm_sqr()).sum();
        assert!((unit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factorize_boundary_cases() {
        let b: f64 = 0.3;
        let a = 2.0 * (b * (1.0 - 2.0 * b)).sqrt();
        for cov in [
            two_dependent(a, b).unwrap(),
            two_dependent(0.3, -0.2).unwrap(),
            two_dependent(2.0 / 3.0, 1.0 / 6.0).unwrap(),
        ] {
            let f = spectral_factorize(&cov).unwrap();
            assert!(f.roundtrip_residual(&cov) < 1e-10, "{cov:?}");
        }
    }

    #[test]
    fn angle_groups_wrap() {
        let g = angle_groups(
            vec![std::f64::consts::PI - 1e-5, 1e-5 - std::f64::consts::PI, 0.5],
            1e-2,
        );
        assert_eq!(g.len(), 2);
        assert!(g.iter().any(|x| x.len() == 2));
    }
}
