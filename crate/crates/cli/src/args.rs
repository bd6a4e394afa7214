//! Command-line arguments and the JSON config file that can stand in for them.

use crate::grid::{Descriptor, RadiusGrid};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gaf_zeros::{Error, Result};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "gaf-zeros",
    version,
    about = "Expected zeros of random power series with finitely dependent Gaussian coefficients"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// Write to this file (atomically) instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Monte Carlo seed (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the parallel pool.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON file whose keys supply defaults for any flag not given.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Default)]
#[group(multiple = false)]
pub struct CovArgs {
    /// Two-dependent covariance with gamma(1) = A, gamma(2) = B.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub two_dependent: Option<Vec<f64>>,
    /// Binomial covariance of dependence range N.
    #[arg(long, value_name = "N")]
    pub binomial: Option<usize>,
    /// Comma-separated gamma(0), gamma(1), ... with gamma(0) = 1, e.g. `1,0.3-0.1i`.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct RadiusArgs {
    /// Radii, comma-separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "r_grid")]
    pub r: Option<Vec<f64>>,
    /// `linear:START,STOP,COUNT` in r or `log1m:START,STOP,COUNT` in 1 - r².
    #[arg(long)]
    pub r_grid: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Expected number of zeros in the disk of radius r.
    ExpectedZeros {
        #[command(flatten)]
        cov: CovArgs,
        #[command(flatten)]
        radius: RadiusArgs,
        /// residue, contour, area or montecarlo; comma-separated (default residue).
        #[arg(long, value_delimiter = ',')]
        method: Option<Vec<String>>,
        /// Trials for the montecarlo method.
        #[arg(long)]
        trials: Option<usize>,
        /// Series truncation for the montecarlo method.
        #[arg(long)]
        truncation: Option<usize>,
    },
    /// Predicted growth of the correction as r approaches 1.
    Asymptotics {
        #[command(flatten)]
        cov: CovArgs,
        /// Attach an empirical fit over this grid (log1m recommended).
        #[arg(long)]
        r_grid: Option<String>,
    },
    /// Empirical mean zero count from simulated series.
    Montecarlo {
        #[command(flatten)]
        cov: CovArgs,
        #[command(flatten)]
        radius: RadiusArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        truncation: Option<usize>,
        /// Cross-check every count against the winding number.
        #[arg(long)]
        diagnostics: bool,
    },
    /// Tracked roots of the binomial lift against their predicted expansions.
    Puiseux {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        radius: RadiusArgs,
    },
    /// Membership grid of the two-dependent positive-definite region.
    Region {
        /// START:STOP:COUNT
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        /// START:STOP:COUNT
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
}

/// Keys accepted in the `--config` file; each mirrors the flag of the same name.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub two_dependent: Option<[f64; 2]>,
    pub binomial: Option<usize>,
    pub gamma: Option<String>,
    pub r: Option<Vec<f64>>,
    pub r_grid: Option<String>,
    pub method: Option<Vec<String>>,
    pub trials: Option<usize>,
    pub truncation: Option<usize>,
    pub diagnostics: Option<bool>,
    pub n: Option<usize>,
    pub a: Option<String>,
    pub b: Option<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Domain(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub struct Globals {
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
    pub threads: Option<usize>,
}

pub fn resolve_globals(g: &GlobalArgs, cfg: &ConfigFile) -> Globals {
    Globals {
        output: g.output.clone().or_else(|| cfg.output.clone()),
        format: g.format.or(cfg.format),
        seed: g.seed.or(cfg.seed).unwrap_or(0),
        threads: g.threads.or(cfg.threads),
    }
}

/// The descriptor from the flags if any is given, else from the config.
pub fn resolve_descriptor(cov: &CovArgs, cfg: &ConfigFile) -> Result<Descriptor> {
    let from_flags = descriptor_from(cov.two_dependent.as_deref(), cov.binomial, cov.gamma.as_deref())?;
    if let Some(d) = from_flags {
        return Ok(d);
    }
    let pair = cfg.two_dependent.as_ref().map(|p| &p[..]);
    descriptor_from(pair, cfg.binomial, cfg.gamma.as_deref())?
        .ok_or_else(|| Error::Domain("one of --two-dependent, --binomial or --gamma is required".into()))
}

fn descriptor_from(pair: Option<&[f64]>, binomial: Option<usize>, gamma: Option<&str>) -> Result<Option<Descriptor>> {
    let given = pair.is_some() as u8 + binomial.is_some() as u8 + gamma.is_some() as u8;
    if given > 1 {
        return Err(Error::Domain("give only one covariance descriptor".into()));
    }
    if let Some(p) = pair {
        if p.len() != 2 || p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("--two-dependent needs two finite numbers".into()));
        }
        return Ok(Some(Descriptor::TwoDependent { a: p[0], b: p[1] }));
    }
    if let Some(n) = binomial {
        return Ok(Some(Descriptor::Binomial(n)));
    }
    gamma.map(Descriptor::parse_gamma).transpose()
}

/// Radii from `--r` or `--r-grid`, flags first, then the config.
pub fn resolve_radii(radius: &RadiusArgs, cfg: &ConfigFile) -> Result<Vec<f64>> {
    let radii = if radius.r.is_some() || radius.r_grid.is_some() {
        radii_from(radius.r.as_deref(), radius.r_grid.as_deref())?
    } else {
        radii_from(cfg.r.as_deref(), cfg.r_grid.as_deref())?
    };
    radii.ok_or_else(|| Error::Domain("one of --r or --r-grid is required".into()))
}

fn radii_from(r: Option<&[f64]>, grid: Option<&str>) -> Result<Option<Vec<f64>>> {
    match (r, grid) {
        (Some(_), Some(_)) => Err(Error::Domain("give either --r or --r-grid, not both".into())),
        (Some(r), None) => {
            if r.is_empty() || r.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
                return Err(Error::Domain("radii must lie in (0, 1)".into()));
            }
            Ok(Some(r.to_vec()))
        }
        (None, Some(g)) => Ok(Some(g.parse::<RadiusGrid>()?.radii())),
        (None, None) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_config() {
        let cfg: ConfigFile = serde_json::from_str(r#"{"binomial": 3, "seed": 9, "r": [0.5]}"#).unwrap();
        let cov = CovArgs {
            two_dependent: Some(vec![0.1, 0.0]),
            ..Default::default()
        };
        assert_eq!(
            resolve_descriptor(&cov, &cfg).unwrap(),
            Descriptor::TwoDependent { a: 0.1, b: 0.0 }
        );
        assert_eq!(
            resolve_descriptor(&CovArgs::default(), &cfg).unwrap(),
            Descriptor::Binomial(3)
        );
        let g = GlobalArgs {
            seed: Some(1),
            ..Default::default()
        };
        assert_eq!(resolve_globals(&g, &cfg).seed, 1);
        assert_eq!(resolve_globals(&GlobalArgs::default(), &cfg).seed, 9);
        let radius = RadiusArgs {
            r_grid: Some("linear:0.1,0.2,2".into()),
            ..Default::default()
        };
        assert_eq!(resolve_radii(&radius, &cfg).unwrap(), vec![0.1, 0.2]);
        assert_eq!(resolve_radii(&RadiusArgs::default(), &cfg).unwrap(), vec![0.5]);
    }

    #[test]
    fn conflicting_config_rejected() {
        let cfg: ConfigFile = serde_json::from_str(r#"{"binomial": 3, "gamma": "1,0.5"}"#).unwrap();
        assert!(resolve_descriptor(&CovArgs::default(), &cfg).is_err());
        assert!(serde_json::from_str::<ConfigFile>(r#"{"bogus": 1}"#).is_err());
    }
}
