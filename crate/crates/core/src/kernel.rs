//! The covariance kernel of the random power series and two closed-form
//! non-finitely-dependent models used as quadrature oracles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::Covariance;
use crate::error::{Error, Result};

/// Analytic function `G` with `G(0) = 0` whose derivative drives the correction term.
pub trait GeneratingFunction {
    fn g(&self, z: Complex64) -> Complex64;
    fn g_prime(&self, z: Complex64) -> Complex64;

    /// `G₂(z, w) = 1 + G(z) + conj(G(w))`.
    fn g2(&self, z: Complex64, w: Complex64) -> Complex64 {
        1.0 + self.g(z) + self.g(w).conj()
    }
}

/// `G(z) = Σ_{k=1}^n conj(γ(k)) z^k`; `coeffs[0]` is the zero constant term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GPoly {
    pub coeffs: Vec<Complex64>,
}

impl GPoly {
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0)
    }

    /// Coefficients of `G'`.
    pub fn derivative(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect()
    }
}

impl GeneratingFunction for GPoly {
    fn g(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn g_prime(&self, z: Complex64) -> Complex64 {
        let n = self.coeffs.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for k in (1..n).rev() {
            acc = acc * z + self.coeffs[k] * k as f64;
        }
        acc
    }
}

pub fn g_poly(cov: &Covariance) -> GPoly {
    let mut coeffs: Vec<Complex64> = cov.gamma().iter().map(|g| g.conj()).collect();
    coeffs[0] = Complex64::new(0.0, 0.0);
    GPoly { coeffs }
}

impl GeneratingFunction for Covariance {
    fn g(&self, z: Complex64) -> Complex64 {
        g_poly(self).g(z)
    }

    fn g_prime(&self, z: Complex64) -> Complex64 {
        g_poly(self).g_prime(z)
    }
}

/// `K_f(z, w) = G₂(z, w) / (1 - z conj(w))` for `|z|, |w| < 1`.
pub fn kernel_value(cov: &Covariance, z: Complex64, w: Complex64) -> Result<Complex64> {
    if !(z.norm() < 1.0 && w.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "kernel needs |z|, |w| < 1, got |z| = {}, |w| = {}",
            z.norm(),
            w.norm()
        )));
    }
    let g = g_poly(cov);
    Ok(g.g2(z, w) / (1.0 - z * w.conj()))
}

/// Stationary models with infinite-range covariance and a closed-form correction term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleModel {
    /// `γ(k) = ρ^{|k|}`.
    OrnsteinUhlenbeck { rho: f64 },
    /// `ξ_k = √ρ ζ + √(1-ρ) η_k`, so `γ(k) = ρ` for `k != 0`.
    CommonShock { rho: f64 },
}

impl OracleModel {
    pub fn ornstein_uhlenbeck(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(OracleModel::OrnsteinUhlenbeck { rho })
    }

    pub fn common_shock(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(OracleModel::CommonShock { rho })
    }

    pub fn rho(&self) -> f64 {
        match *self {
            OracleModel::OrnsteinUhlenbeck { rho } | OracleModel::CommonShock { rho } => rho,
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho must lie in (0, 1), got {rho}")))
    }
}

impl GeneratingFunction for OracleModel {
    fn g(&self, z: Complex64) -> Complex64 {
        match *self {
            OracleModel::OrnsteinUhlenbeck { rho } => rho * z / (1.0 - rho * z),
            OracleModel::CommonShock { rho } => rho * z / (1.0 - z),
        }
    }

    fn g_prime(&self, z: Complex64) -> Complex64 {
        match *self {
            OracleModel::OrnsteinUhlenbeck { rho } => {
                let d = 1.0 - rho * z;
                rho / (d * d)
            }
            OracleModel::CommonShock { rho } => {
                let d = 1.0 - z;
                rho / (d * d)
            }
        }
    }
}

/// Closed-form correction term for an [`OracleModel`] on the disk of radius `r`.
pub fn oracle_correction(model: OracleModel, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("oracle correction needs 0 < r < 1, got {r}")));
    }
    check_rho(model.rho())?;
    Ok(match model {
        OracleModel::OrnsteinUhlenbeck { rho } => {
            let x = rho * rho * r * r;
            -x / (1.0 - x)
        }
        OracleModel::CommonShock { rho } => {
            let delta = (1.0 + (1.0 - 2.0 * rho) * r * r) / ((1.0 - rho) * r);
            let nu = (delta - (delta * delta - 4.0).sqrt()) / 2.0;
            -(rho / (1.0 - rho)) * (nu - r) / ((nu - 1.0 / nu) * (1.0 - nu * r))
        }
    })
}
