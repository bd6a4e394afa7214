//! Expected zero counts of random power series with finitely dependent
//! stationary Gaussian coefficients.
//!
//! The expected number of zeros in the disk of radius `r` equals the i.i.d.
//! value `r²/(1-r²)` plus a non-positive correction determined by the
//! covariance. This crate computes the correction by residues and by two
//! quadratures, predicts its growth as `r → 1` from the zeros of the spectral
//! density, and checks everything against Monte Carlo zero counts.
//!
//! ```
//! use gaf_zeros::{covariance::two_dependent, expected_zeros::{expected_zeros, Method}};
//!
//! let cov = two_dependent(0.2, 0.05).unwrap();
//! let res = expected_zeros(&cov, 0.9, Method::Residue).unwrap();
//! assert!(res.correction < 0.0 && res.total < res.baseline);
//! ```

pub mod covariance;
pub mod error;
pub mod expected_zeros;
pub mod fit;
pub mod kernel;
pub mod montecarlo;
pub mod par;
pub mod puiseux;
pub mod rootfind;

pub use covariance::{binomial_covariance, classify_region, two_dependent, Covariance, MaFilter, RegionLabel};
pub use error::{Error, Result};
pub use expected_zeros::{expected_zeros, Method, ZeroCountResult};
pub use par::Execution;
pub use puiseux::{case_prediction, general_exponent, AsymptoticPrediction, CaseLabel};
