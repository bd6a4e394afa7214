//! Fractional-power expansions of the roots of `q(r, ·)` near `z = -1` for
//! the binomial family, and the asymptotic predictions for `J(r)` as `r → 1`.
//!
//! Predictions are stated in `s = 1 - r²`: `J(r) ≈ -constant · s^{-α}`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::covariance::{binomial_covariance, classify_region, two_dependent, Covariance, RegionLabel};
use crate::error::{Error, Result};
use crate::expected_zeros::{correction_at_unit_radius, correction_residue};
use crate::fit::{power_law_fit, richardson, PowerLawFit};
use crate::rootfind::{lift_roots, poly::binomial, track_branches};

/// Radius for grouping unit-circle roots of the `r = 1` lift.
pub const CIRCLE_CLUSTER_RADIUS: f64 = 1e-5;

/// First two coefficients of one root branch in powers of `(1-r)^{1/(2n)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PuiseuxBranch {
    pub n: usize,
    pub j: usize,
    pub b: Complex64,
    /// Coefficient of `(1-r)^{1/n}`, equal to `-b²/2`.
    pub second: Complex64,
}

impl PuiseuxBranch {
    /// Branches with `Re b > 0` enter the unit disk.
    pub fn is_inside(&self) -> bool {
        self.b.re > 0.0
    }
}

/// Unit phase `exp((2j - n + 1)πi / (2n))`.
pub fn unit_phase(n: usize, j: usize) -> Complex64 {
    let angle = (2.0 * j as f64 - n as f64 + 1.0) * PI / (2.0 * n as f64);
    Complex64::from_polar(1.0, angle)
}

fn central(n: usize) -> f64 {
    binomial(2 * (n as u64 - 1), n as u64 - 1)
}

pub fn puiseux_branches(n: usize) -> Vec<PuiseuxBranch> {
    assert!(n >= 1, "puiseux branches need n >= 1");
    let modulus = (2.0 * central(n)).powf(1.0 / (2 * n) as f64);
    (0..2 * n)
        .map(|j| {
            let b = unit_phase(n, j) * modulus;
            PuiseuxBranch {
                n,
                j,
                b,
                second: -0.5 * b * b,
            }
        })
        .collect()
}

/// `-1 + b t - b² t² / 2` with `t = (1-r)^{1/(2n)}`.
pub fn predicted_root(n: usize, j: usize, r: f64) -> Complex64 {
    let br = puiseux_branches(n)[j];
    let t = (1.0 - r).powf(1.0 / (2 * n) as f64);
    -1.0 + br.b * t + br.second * t * t
}

/// Leading constant of `-J(r) (1-r²)^{(2n-1)/(2n)}` for the binomial family.
pub fn dn_constant(n: usize) -> f64 {
    assert!(n >= 1, "dn_constant needs n >= 1");
    central(n).powf(1.0 / (2 * n) as f64) / (2.0 * n as f64 * (PI / (2 * n) as f64).sin())
}

/// Non-negative rational exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exponent {
    pub num: u64,
    pub den: u64,
}

impl Exponent {
    pub const ZERO: Exponent = Exponent { num: 0, den: 1 };

    /// `(2k-1)/(2k)`, or zero for `k = 0`.
    pub fn from_half_multiplicity(k: usize) -> Self {
        if k == 0 {
            Self::ZERO
        } else {
            Exponent {
                num: 2 * k as u64 - 1,
                den: 2 * k as u64,
            }
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseLabel {
    /// Ellipse boundary of the two-dependent region.
    I,
    /// Line boundary.
    II,
    /// The corners `(±2/3, 1/6)`.
    III,
    /// Interior; the correction has a finite limit.
    IV,
    BinomialN(usize),
    /// Circle zeros of maximal multiplicity `2k`.
    GeneralMultiplicity(usize),
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseLabel::I => write!(f, "I"),
            CaseLabel::II => write!(f, "II"),
            CaseLabel::III => write!(f, "III"),
            CaseLabel::IV => write!(f, "IV"),
            CaseLabel::BinomialN(n) => write!(f, "binomial_{n}"),
            CaseLabel::GeneralMultiplicity(k) => write!(f, "multiplicity_{}", 2 * k),
        }
    }
}

impl Serialize for CaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `J(r) ≈ -constant · (1-r²)^{-exponent}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticPrediction {
    pub case_label: CaseLabel,
    pub exponent: Exponent,
    pub alpha: f64,
    /// `None` when no closed form is known for the covariance.
    pub constant: Option<f64>,
}

impl AsymptoticPrediction {
    fn new(case_label: CaseLabel, exponent: Exponent, constant: Option<f64>) -> Self {
        AsymptoticPrediction {
            case_label,
            exponent,
            alpha: exponent.value(),
            constant,
        }
    }

    /// Exponent of the leading relative correction in `s = 1 - r²`.
    pub fn correction_gap(&self) -> f64 {
        match self.case_label {
            _ if self.exponent.num == 0 => 1.0,
            CaseLabel::BinomialN(n) if n >= 2 => 1.0 / n as f64,
            CaseLabel::GeneralMultiplicity(k) => 1.0 / (2 * k) as f64,
            _ => 0.5,
        }
    }
}

/// `C(a, b)` in the form valid on the open ellipse disk, where
/// `4b - 8b² - a² > 0`. Returns `None` elsewhere.
pub fn interior_constant_closed_form(a: f64, b: f64) -> Option<f64> {
    let lambda_sq = 4.0 * b - 8.0 * b * b - a * a;
    let mu_sq = (1.0 + 2.0 * b).powi(2) - 4.0 * a * a;
    if !(lambda_sq > 0.0 && mu_sq > 0.0) {
        return None;
    }
    let lambda = lambda_sq.sqrt();
    let mu = mu_sq.sqrt();
    let inner = 4.0 * b * b + 2.0 * b - a * a + 2.0 * b * mu;
    Some((mu - (2.0 * b - 1.0)) * inner.sqrt() / (2.0 * lambda * mu) - 1.0)
}

pub fn case_prediction(a: f64, b: f64) -> Result<AsymptoticPrediction> {
    let half = Exponent { num: 1, den: 2 };
    Ok(match classify_region(a, b) {
        RegionLabel::Outside => return Err(Error::OutsideRegion { a, b }),
        RegionLabel::CornerDegenerate => {
            AsymptoticPrediction::new(CaseLabel::III, Exponent { num: 3, den: 4 }, Some(2f64.powf(-1.25)))
        }
        RegionLabel::BoundaryEllipse => {
            AsymptoticPrediction::new(CaseLabel::I, half, Some((2.0 * b / (6.0 * b - 1.0)).sqrt()))
        }
        RegionLabel::BoundaryLine => AsymptoticPrediction::new(
            CaseLabel::II,
            half,
            Some(0.5 * ((1.0 - 2.0 * b) / (1.0 - 6.0 * b)).sqrt()),
        ),
        RegionLabel::Interior => {
            let constant = if a == 0.0 && b == 0.0 {
                0.0
            } else if let Some(c) = interior_constant_closed_form(a, b) {
                c
            } else {
                -correction_at_unit_radius(&two_dependent(a, b)?)?
            };
            AsymptoticPrediction::new(CaseLabel::IV, Exponent::ZERO, Some(constant))
        }
    })
}

/// Distinct zeros of the spectral density on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CircleZero {
    pub angle: f64,
    pub multiplicity: usize,
}

/// Zeros of `Θ(1, e^{iθ})` with multiplicities, from the roots of the `r = 1` lift.
pub fn circle_zeros(cov: &Covariance) -> Result<Vec<CircleZero>> {
    let cov = cov.trimmed();
    if cov.order() == 0 {
        return Ok(vec![]);
    }
    let set = lift_roots(&cov, 1.0)?;
    let on_circle: Vec<Complex64> = set
        .roots
        .iter()
        .copied()
        .filter(|z| (z.norm() - 1.0).abs() < CIRCLE_CLUSTER_RADIUS)
        .collect();
    let mut used = vec![false; on_circle.len()];
    let mut zeros = Vec::new();
    for i in 0..on_circle.len() {
        if used[i] {
            continue;
        }
        // Single-linkage growth from root i.
        let mut members = vec![i];
        used[i] = true;
        let mut head = 0;
        while head < members.len() {
            let c = on_circle[members[head]];
            for j in 0..on_circle.len() {
                if !used[j] && (on_circle[j] - c).norm() < CIRCLE_CLUSTER_RADIUS {
                    used[j] = true;
                    members.push(j);
                }
            }
            head += 1;
        }
        let center: Complex64 = members.iter().map(|&j| on_circle[j]).sum::<Complex64>() / members.len() as f64;
        zeros.push(CircleZero {
            angle: center.arg(),
            multiplicity: members.len(),
        });
    }
    zeros.sort_by(|x, y| x.angle.total_cmp(&y.angle));
    Ok(zeros)
}

fn matches_binomial(cov: &Covariance) -> Option<usize> {
    let n = cov.order();
    if n == 0 {
        return None;
    }
    let reference = binomial_covariance(n);
    cov.gamma()
        .iter()
        .zip(reference.gamma())
        .all(|(x, y)| (x - y).norm() < 1e-14)
        .then_some(n)
}

/// Exponent from the largest circle-zero multiplicity; the constant is filled
/// in for the binomial family, two-dependent covariances and the interior case.
pub fn general_exponent(cov: &Covariance) -> Result<AsymptoticPrediction> {
    let cov = cov.trimmed();
    if cov.order() == 0 {
        return Ok(AsymptoticPrediction::new(CaseLabel::IV, Exponent::ZERO, Some(0.0)));
    }
    let zeros = circle_zeros(&cov)?;
    if let Some(z) = zeros.iter().find(|z| z.multiplicity % 2 == 1) {
        return Err(Error::OddMultiplicity {
            multiplicity: z.multiplicity,
            angle: z.angle,
        });
    }
    let k = zeros.iter().map(|z| z.multiplicity / 2).max().unwrap_or(0);
    let exponent = Exponent::from_half_multiplicity(k);

    if let Some(n) = matches_binomial(&cov) {
        return Ok(AsymptoticPrediction::new(
            CaseLabel::BinomialN(n),
            exponent,
            Some(dn_constant(n)),
        ));
    }
    if cov.order() <= 2 && cov.is_real() {
        let a = cov.at(1).re;
        let b = cov.at(2).re;
        if let Ok(pred) = case_prediction(a, b) {
            if pred.exponent == exponent {
                return Ok(pred);
            }
            log::warn!(
                "region label for ({a}, {b}) gives exponent {} but circle zeros give {exponent}",
                pred.exponent
            );
        }
    }
    if k == 0 {
        let c = -correction_at_unit_radius(&cov)?;
        return Ok(AsymptoticPrediction::new(CaseLabel::IV, exponent, Some(c)));
    }
    Ok(AsymptoticPrediction::new(
        CaseLabel::GeneralMultiplicity(k),
        exponent,
        None,
    ))
}

/// Residuals of the phase identities used in the binomial asymptotics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    /// `|Σ_{k<n} e_k - 1/sin(π/2n)|`.
    pub sum: f64,
    /// `|Σ_{k<n} e_k²|`.
    pub square_sum: f64,
    /// `max_k |Π_{j≠k} (e_k - e_j) - 2n (-1)^{n-1} / e_k|`, product over all `2n` phases.
    pub product: f64,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.sum.max(self.square_sum).max(self.product)
    }
}

pub fn identity_checks(n: usize) -> IdentityReport {
    assert!(n >= 1, "identity checks need n >= 1");
    let e: Vec<Complex64> = (0..2 * n).map(|j| unit_phase(n, j)).collect();
    let inside = &e[..n];
    let sum: Complex64 = inside.iter().sum();
    let sq: Complex64 = inside.iter().map(|x| x * x).sum();
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let product = (0..2 * n)
        .map(|k| {
            let p: Complex64 = (0..2 * n).filter(|&j| j != k).map(|j| e[k] - e[j]).product();
            (p - sign * 2.0 * n as f64 / e[k]).norm()
        })
        .fold(0.0, f64::max);
    IdentityReport {
        n,
        sum: (sum - 1.0 / (FRAC_PI_2 / n as f64).sin()).norm(),
        square_sum: sq.norm(),
        product,
    }
}

/// `-J(r)` sampled at `1 - r² = s` and the fitted asymptotic parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalAsymptotics {
    pub s: Vec<f64>,
    pub neg_correction: Vec<f64>,
    /// Three-parameter fit `K s^{-α} (1 + D s^gap)`; `None` for `α = 0`.
    pub fit: Option<PowerLawFit>,
    /// Richardson limit of `-J s^{α}` with the predicted `α`.
    pub extrapolated_constant: f64,
    pub gap: f64,
}

/// Evaluates `-J` at `r = sqrt(1 - s)` by the residue route and fits the
/// predicted power law.
pub fn empirical_asymptotics(
    cov: &Covariance,
    s_grid: &[f64],
    prediction: &AsymptoticPrediction,
) -> Result<EmpiricalAsymptotics> {
    if s_grid.iter().any(|&s| !(s > 0.0 && s < 1.0)) {
        return Err(Error::Domain("1 - r² must lie in (0, 1)".into()));
    }
    let neg: Vec<f64> = s_grid
        .iter()
        .map(|&s| correction_residue(cov, (1.0 - s).sqrt()).map(|j| -j))
        .collect::<Result<_>>()?;
    let gap = prediction.correction_gap();
    let scaled: Vec<f64> = s_grid
        .iter()
        .zip(&neg)
        .map(|(s, y)| y * s.powf(prediction.alpha))
        .collect();
    let fit = if prediction.alpha > 0.0 {
        power_law_fit(s_grid, &neg, gap)
    } else {
        None
    };
    Ok(EmpiricalAsymptotics {
        s: s_grid.to_vec(),
        neg_correction: neg,
        fit,
        extrapolated_constant: richardson(s_grid, &scaled, gap),
        gap,
    })
}

/// Tracked versus predicted roots of the binomial lift at one radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchErrorRow {
    pub r: f64,
    pub max_error: f64,
    /// Error of the branch whose prediction has index `j`.
    pub errors: Vec<f64>,
}

/// Follows the `2n` roots of the binomial lift along `r_grid` and compares
/// them with [`predicted_root`].
pub fn branch_errors(n: usize, r_grid: &[f64]) -> Result<Vec<BranchErrorRow>> {
    let cov = binomial_covariance(n);
    let track = track_branches(&cov, r_grid)?;
    let mut rows = Vec::with_capacity(r_grid.len());
    for (m, &r) in r_grid.iter().enumerate() {
        let tracked = track.at(m);
        let predicted: Vec<Complex64> = (0..2 * n).map(|j| predicted_root(n, j, r)).collect();
        let mut errors = vec![f64::NAN; 2 * n];
        let mut taken = vec![false; tracked.len()];
        for (j, p) in predicted.iter().enumerate() {
            let (best, d) = tracked
                .iter()
                .enumerate()
                .map(|(i, z)| (i, (z - p).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("binomial lift has roots");
            if taken[best] {
                return Err(Error::AmbiguousMatching { r });
            }
            taken[best] = true;
            errors[j] = d;
        }
        rows.push(BranchErrorRow {
            r,
            max_error: errors.iter().copied().fold(0.0, f64::max),
            errors,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_coefficients() {
        for n in 1..=8 {
            let br = puiseux_branches(n);
            assert_eq!(br.len(), 2 * n);
            let target = -2.0 * (-1f64).powi(n as i32) * central(n);
            for b in &br {
                let p = b.b.powi(2 * n as i32);
                assert!((p - target).norm() < 1e-12 * target.abs().max(1.0), "n={n}");
                assert_eq!(b.second, -0.5 * b.b * b.b);
            }
            assert_eq!(br.iter().filter(|b| b.is_inside()).count(), n);
            let total: Complex64 = br.iter().map(|b| b.b).sum();
            assert!(total.norm() < 1e-12);
        }
        let br = puiseux_branches(1);
        assert!((br[0].b - 2f64.sqrt()).norm() < 1e-15);
        assert!((br[1].b + 2f64.sqrt()).norm() < 1e-15);
        for b in puiseux_branches(2) {
            assert!((b.b.norm() - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn predicted_root_n1_matches_quadratic() {
        for &t in &[1e-2f64, 1e-3, 1e-4] {
            let r = 1.0 - t;
            let exact = (-1.0 + (1.0 - r * r).sqrt()) / r;
            let err = (predicted_root(1, 0, r) - exact).norm();
            assert!(err < 3.0 * t.powf(1.5), "t={t} err={err}");
        }
        assert!((predicted_root(3, 2, 1.0 - 1e-15) + 1.0).norm() < 1e-2);
    }

    #[test]
    fn dn_values() {
        assert!((dn_constant(2) - 2f64.powf(-1.25)).abs() < 1e-15);
        assert!((dn_constant(1) - 0.5).abs() < 1e-15);
        assert!((dn_constant(3) - 6f64.powf(1.0 / 6.0) / 3.0).abs() < 1e-15);
        assert!((dn_constant(3) - 0.449335).abs() < 1e-6);
    }

    #[test]
    fn case_predictions() {
        let p = case_prediction(2.0 / 3.0, 1.0 / 6.0).unwrap();
        assert_eq!(p.case_label, CaseLabel::III);
        assert_eq!(p.exponent, Exponent { num: 3, den: 4 });
        assert!((p.constant.unwrap() - dn_constant(2)).abs() < 1e-16);
        assert!((dn_constant(2) - 0.420448).abs() < 1e-6);

        let b: f64 = 0.3;
        let p = case_prediction(2.0 * (b * (1.0 - 2.0 * b)).sqrt(), b).unwrap();
        assert_eq!(p.case_label, CaseLabel::I);
        assert!((p.constant.unwrap() - 0.75f64.sqrt()).abs() < 1e-15);

        let p = case_prediction(0.3, -0.2).unwrap();
        assert_eq!(p.case_label, CaseLabel::II);
        assert!((p.constant.unwrap() - 0.398862).abs() < 1e-6);

        let p = case_prediction(0.0, 0.0).unwrap();
        assert_eq!((p.alpha, p.constant), (0.0, Some(0.0)));

        assert!(matches!(case_prediction(0.9, 0.9), Err(Error::OutsideRegion { .. })));
    }

    #[test]
    fn interior_constant_routes_agree() {
        for &(a, b) in &[
            (0.2, 0.05),
            (0.0, 0.3),
            (0.1, 0.2),
            (-0.3, 0.05),
            (-0.2, 0.05),
            (0.4, 0.1),
        ] {
            let closed = interior_constant_closed_form(a, b).unwrap();
            let residue = -correction_at_unit_radius(&two_dependent(a, b).unwrap()).unwrap();
            assert!((closed - residue).abs() < 1e-10, "({a}, {b}): {closed} vs {residue}");
        }
        assert!((interior_constant_closed_form(0.0, 0.3).unwrap() - 0.25).abs() < 1e-14);
        assert!((interior_constant_closed_form(0.2, 0.05).unwrap() - 0.042388074).abs() < 1e-8);
    }

    #[test]
    fn interior_outside_ellipse_uses_residue_route() {
        // Between the ellipse and the lines.
        let (a, b) = (0.55, 0.06);
        assert!(interior_constant_closed_form(a, b).is_none());
        let p = case_prediction(a, b).unwrap();
        assert_eq!(p.case_label, CaseLabel::IV);
        let c = p.constant.unwrap();
        assert!(c > 0.0);
        let near = -correction_residue(&two_dependent(a, b).unwrap(), 1.0 - 1e-7).unwrap();
        assert!((near - c).abs() < 1e-4 * c, "{near} {c}");
    }

    #[test]
    fn general_exponents() {
        for n in 1..=5 {
            let p = general_exponent(&binomial_covariance(n)).unwrap();
            assert_eq!(p.case_label, CaseLabel::BinomialN(n));
            assert_eq!(p.exponent, Exponent::from_half_multiplicity(n));
            assert_eq!(p.constant, Some(dn_constant(n)));
        }
        let p = general_exponent(&two_dependent(0.2, 0.05).unwrap()).unwrap();
        assert_eq!(p.alpha, 0.0);
        let b: f64 = 0.3;
        let p = general_exponent(&two_dependent(2.0 * (b * (1.0 - 2.0 * b)).sqrt(), b).unwrap()).unwrap();
        assert_eq!(p.exponent, Exponent { num: 1, den: 2 });
        assert_eq!(p.case_label, CaseLabel::I);
        let p = general_exponent(&two_dependent(0.3, -0.2).unwrap()).unwrap();
        assert_eq!(p.case_label, CaseLabel::II);
    }

    #[test]
    fn ellipse_boundary_has_conjugate_double_zeros() {
        let b: f64 = 0.3;
        let cov = two_dependent(2.0 * (b * (1.0 - 2.0 * b)).sqrt(), b).unwrap();
        let zeros = circle_zeros(&cov).unwrap();
        assert_eq!(zeros.len(), 2);
        assert!(zeros.iter().all(|z| z.multiplicity == 2));
        assert!((zeros[0].angle + zeros[1].angle).abs() < 1e-8);
    }

    #[test]
    fn identities() {
        let r2 = identity_checks(2);
        assert!(r2.max_residual() < 1e-12);
        let r1 = identity_checks(1);
        assert!(r1.sum < 1e-15 && r1.product < 1e-15);
        // A single phase e_0 = 1 has square sum 1.
        assert!((r1.square_sum - 1.0).abs() < 1e-15);
        for n in 2..=8 {
            assert!(identity_checks(n).max_residual() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn exponent_display() {
        assert_eq!(Exponent::from_half_multiplicity(3).to_string(), "5/6");
        assert_eq!(Exponent::ZERO.to_string(), "0");
        assert_eq!(CaseLabel::BinomialN(3).to_string(), "binomial_3");
    }

    #[test]
    fn binomial_two_branch_errors_shrink() {
        let grid: Vec<f64> = [1e-3, 1e-4, 1e-5].iter().map(|t| 1.0 - t).collect();
        let rows = branch_errors(2, &grid).unwrap();
        assert!(rows.windows(2).all(|w| w[1].max_error < w[0].max_error));
    }
}
