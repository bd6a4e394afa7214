//! Parsing of radius grids, axis ranges and covariance descriptors.

use gaf_zeros::covariance::{binomial_covariance, two_dependent, Covariance};
use gaf_zeros::{Error, Result};
use num_complex::Complex64;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    /// Uniform in `log(1 - r²)`.
    Log1m,
}

/// `linear:start,stop,count` in `r`, or `log1m:start,stop,count` in `1 - r²`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusGrid {
    pub spacing: Spacing,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for RadiusGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Domain(format!("grid {s:?} must look like linear:START,STOP,COUNT")))?;
        let spacing = match kind {
            "linear" => Spacing::Linear,
            "log1m" => Spacing::Log1m,
            _ => return Err(Error::Domain(format!("unknown grid spacing {kind:?}"))),
        };
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Domain(format!("grid {s:?} needs START,STOP,COUNT")));
        }
        let start = parse_f64(parts[0])?;
        let stop = parse_f64(parts[1])?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::Domain(format!("bad grid count {:?}", parts[2])))?;
        if count == 0 {
            return Err(Error::Domain("grid count must be positive".into()));
        }
        if count == 1 && start != stop {
            return Err(Error::Domain("a one-point grid needs START = STOP".into()));
        }
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if !open_unit(start) || !open_unit(stop) {
            return Err(Error::Domain(format!("grid endpoints of {s:?} must lie in (0, 1)")));
        }
        Ok(RadiusGrid {
            spacing,
            start,
            stop,
            count,
        })
    }
}

impl RadiusGrid {
    /// Radii in grid order.
    pub fn radii(&self) -> Vec<f64> {
        let t = |k: usize| {
            if self.count == 1 {
                0.0
            } else {
                k as f64 / (self.count - 1) as f64
            }
        };
        (0..self.count)
            .map(|k| match self.spacing {
                Spacing::Linear => self.start + (self.stop - self.start) * t(k),
                Spacing::Log1m => {
                    let (l0, l1) = (self.start.ln(), self.stop.ln());
                    (1.0 - (l0 + (l1 - l0) * t(k)).exp()).sqrt()
                }
            })
            .collect()
    }
}

/// `start:stop:count`, endpoints included.
pub fn parse_axis(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::Domain(format!("axis {s:?} must look like START:STOP:COUNT")));
    }
    let start = parse_f64(parts[0])?;
    let stop = parse_f64(parts[1])?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::Domain(format!("bad axis count {:?}", parts[2])))?;
    match count {
        0 => Err(Error::Domain("axis count must be positive".into())),
        1 => Ok(vec![start]),
        _ => Ok((0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect()),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::Domain(format!("not a number: {s:?}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("not finite: {s:?}")))
    }
}

/// Covariance as named on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    TwoDependent {
        a: f64,
        b: f64,
    },
    Binomial(usize),
    /// `γ(0), γ(1), ...` with `γ(0) = 1`.
    Gamma(Vec<Complex64>),
}

impl Descriptor {
    /// Comma-separated complex entries such as `1,0.3-0.1i,0.05`.
    pub fn parse_gamma(s: &str) -> Result<Self> {
        let gamma = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                Complex64::from_str(t).map_err(|_| Error::Domain(format!("bad gamma entry {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Descriptor::Gamma(gamma))
    }

    pub fn covariance(&self) -> Result<Covariance> {
        match self {
            Descriptor::TwoDependent { a, b } => two_dependent(*a, *b),
            Descriptor::Binomial(0) => Err(Error::Domain("binomial order must be at least 1".into())),
            Descriptor::Binomial(n) => Ok(binomial_covariance(*n)),
            Descriptor::Gamma(g) => Covariance::new(g.clone()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Descriptor::TwoDependent { .. } => "two_dependent".into(),
            Descriptor::Binomial(n) => format!("binomial:{n}"),
            Descriptor::Gamma(g) => {
                let parts: Vec<String> = g.iter().map(|z| z.to_string()).collect();
                format!("gamma:{}", parts.join(","))
            }
        }
    }

    pub fn ab(&self) -> Option<(f64, f64)> {
        match self {
            Descriptor::TwoDependent { a, b } => Some((*a, *b)),
            _ => None,
        }
    }
}
