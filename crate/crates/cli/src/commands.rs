//! Subcommand bodies. Each returns the rendered output bytes so nothing is
//! written unless the whole computation succeeds.

use crate::args::Format;
use crate::grid::{parse_axis, Descriptor, RadiusGrid};
use crate::output::{Field, Table};
use gaf_zeros::covariance::classify_region;
use gaf_zeros::expected_zeros::{baseline, sweep};
use gaf_zeros::fit::loglog_slope;
use gaf_zeros::montecarlo::{default_truncation, empirical_expected_zeros, McConfig, MonteCarloReport};
use gaf_zeros::puiseux::{branch_errors, empirical_asymptotics};
use gaf_zeros::{
    case_prediction, expected_zeros, general_exponent, AsymptoticPrediction, Covariance, Error, Execution, Method,
    Result,
};
use serde_json::{json, Value};

pub const DEFAULT_TRIALS: usize = 2000;

/// A correction method as accepted by `expected-zeros`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMethod {
    Analytic(Method),
    MonteCarlo,
}

pub fn parse_methods(names: &[String]) -> Result<Vec<SweepMethod>> {
    if names.is_empty() {
        return Err(Error::Domain("at least one method is required".into()));
    }
    names
        .iter()
        .map(|s| match s.trim() {
            "montecarlo" => Ok(SweepMethod::MonteCarlo),
            other => other.parse().map(SweepMethod::Analytic),
        })
        .collect()
}

pub struct Rendered {
    pub table: Table,
    /// Replaces the row array in JSON output when set.
    pub json: Option<Value>,
}

impl Rendered {
    pub fn bytes(&self, format: Format) -> std::io::Result<Vec<u8>> {
        match format {
            Format::Csv => self.table.to_csv(),
            Format::Json => {
                let v = self.json.clone().unwrap_or_else(|| self.table.to_json_rows());
                let mut s = serde_json::to_string_pretty(&v).map_err(std::io::Error::other)?;
                s.push('\n');
                Ok(s.into_bytes())
            }
        }
    }
}

fn descriptor_fields(d: &Descriptor) -> [Field; 3] {
    let (a, b) = d.ab().map_or((None, None), |(a, b)| (Some(a), Some(b)));
    [d.label().into(), a.into(), b.into()]
}

fn prediction(d: &Descriptor, cov: &Covariance) -> Result<AsymptoticPrediction> {
    match d {
        Descriptor::TwoDependent { a, b } => case_prediction(*a, *b),
        _ => general_exponent(cov),
    }
}

fn monte_carlo(
    cov: &Covariance,
    r: f64,
    trials: usize,
    truncation: Option<usize>,
    seed: u64,
    diagnostics: bool,
    execution: Execution,
) -> Result<MonteCarloReport> {
    let config = McConfig {
        truncation: truncation.unwrap_or_else(|| default_truncation(cov.order(), r)),
        trials,
        seed,
        r,
        diagnostics,
        execution,
    };
    config.validate()?;
    empirical_expected_zeros(cov, &config)
}

pub struct SweepRequest<'a> {
    pub descriptor: &'a Descriptor,
    pub radii: &'a [f64],
    pub methods: &'a [SweepMethod],
    pub trials: usize,
    pub truncation: Option<usize>,
    pub seed: u64,
    pub execution: Execution,
}

pub fn expected_zeros_cmd(req: &SweepRequest) -> Result<Rendered> {
    let cov = req.descriptor.covariance()?;
    let pred = match prediction(req.descriptor, &cov) {
        Ok(p) => Some(p),
        Err(e) => {
            log::warn!("no asymptotic prediction: {e}");
            None
        }
    };
    let analytic: Vec<Method> = req
        .methods
        .iter()
        .filter_map(|m| match m {
            SweepMethod::Analytic(m) => Some(*m),
            SweepMethod::MonteCarlo => None,
        })
        .collect();
    let results = sweep(&cov, req.radii, &analytic, req.execution)?;

    let mut table = Table::new(&[
        "covariance",
        "a",
        "b",
        "r",
        "baseline",
        "correction",
        "total",
        "method",
        "residual",
        "case_label",
        "alpha",
        "constant",
    ]);
    let pred_fields = |p: &Option<AsymptoticPrediction>| -> [Field; 3] {
        match p {
            Some(p) => [p.case_label.to_string().into(), p.alpha.into(), p.constant.into()],
            None => [Field::Empty, Field::Empty, Field::Empty],
        }
    };
    let mut next = results.iter();
    for &r in req.radii {
        for m in req.methods {
            let (base, corr, total, label, residual) = match m {
                SweepMethod::Analytic(_) => {
                    let res = next.next().expect("sweep returns one row per (r, method)");
                    let d = res.diagnostics;
                    let residual = if res.method == Method::Residue && !d.fallback {
                        d.root_residual
                    } else {
                        d.change
                    };
                    (res.baseline, res.correction, res.total, res.method.as_str(), residual)
                }
                SweepMethod::MonteCarlo => {
                    let rep = monte_carlo(&cov, r, req.trials, req.truncation, req.seed, false, req.execution)?;
                    let base = baseline(r)?;
                    (base, rep.mean - base, rep.mean, "montecarlo", rep.stderr)
                }
            };
            let mut row: Vec<Field> = descriptor_fields(req.descriptor).into();
            row.extend([
                r.into(),
                base.into(),
                corr.into(),
                total.into(),
                label.into(),
                residual.into(),
            ]);
            row.extend(pred_fields(&pred));
            table.push(row);
        }
    }
    Ok(Rendered { table, json: None })
}

fn rel_error(estimate: f64, target: f64) -> Option<f64> {
    (target != 0.0).then(|| (estimate - target).abs() / target.abs())
}

pub fn asymptotics_cmd(descriptor: &Descriptor, r_grid: Option<&str>) -> Result<Rendered> {
    let pred = match descriptor {
        Descriptor::TwoDependent { a, b } => case_prediction(*a, *b)?,
        _ => general_exponent(&descriptor.covariance()?)?,
    };
    let mut json = json!({
        "covariance": descriptor.label(),
        "case_label": pred.case_label,
        "exponent": pred.exponent,
        "alpha": pred.alpha,
        "constant": pred.constant,
    });
    if let Some((a, b)) = descriptor.ab() {
        json["a"] = a.into();
        json["b"] = b.into();
    }
    let mut header = vec!["covariance", "a", "b", "case_label", "exponent", "alpha", "constant"];
    let mut row: Vec<Field> = descriptor_fields(descriptor).into();
    row.extend([
        pred.case_label.to_string().into(),
        pred.exponent.to_string().into(),
        pred.alpha.into(),
        pred.constant.into(),
    ]);

    if let Some(spec) = r_grid {
        let grid: RadiusGrid = spec.parse()?;
        let s: Vec<f64> = grid.radii().iter().map(|r| 1.0 - r * r).collect();
        let cov = descriptor.covariance()?;
        let emp = empirical_asymptotics(&cov, &s, &pred)?;
        let alpha = emp.fit.map_or(0.0, |f| f.exponent);
        let alpha_err = if pred.alpha > 0.0 {
            rel_error(alpha, pred.alpha)
        } else {
            Some(alpha.abs())
        };
        let const_err = pred.constant.and_then(|c| rel_error(emp.extrapolated_constant, c));
        json["empirical"] = json!({
            "s": emp.s,
            "neg_correction": emp.neg_correction,
            "alpha": alpha,
            "fit_constant": emp.fit.map(|f| f.constant),
            "constant": emp.extrapolated_constant,
            "correction_gap": emp.gap,
            "alpha_error": alpha_err,
            "constant_rel_error": const_err,
        });
        header.extend([
            "empirical_alpha",
            "empirical_constant",
            "alpha_error",
            "constant_rel_error",
        ]);
        row.extend([
            alpha.into(),
            emp.extrapolated_constant.into(),
            alpha_err.into(),
            const_err.into(),
        ]);
    }
    let mut table = Table::new(&header);
    table.push(row);
    Ok(Rendered {
        table,
        json: Some(json),
    })
}

pub struct McRequest<'a> {
    pub descriptor: &'a Descriptor,
    pub radii: &'a [f64],
    pub trials: usize,
    pub truncation: Option<usize>,
    pub seed: u64,
    pub diagnostics: bool,
    pub execution: Execution,
}

pub fn montecarlo_cmd(req: &McRequest) -> Result<Rendered> {
    let cov = req.descriptor.covariance()?;
    let mut table = Table::new(&[
        "covariance",
        "a",
        "b",
        "r",
        "truncation",
        "trials",
        "seed",
        "mean",
        "stderr",
        "analytic",
        "z_score",
        "tail_bound",
        "resampled",
        "winding_disagreements",
    ]);
    for &r in req.radii {
        let rep = monte_carlo(
            &cov,
            r,
            req.trials,
            req.truncation,
            req.seed,
            req.diagnostics,
            req.execution,
        )?;
        let analytic = expected_zeros(&cov, r, Method::Residue)?.total;
        let z = (rep.stderr > 0.0).then(|| (rep.mean - analytic) / rep.stderr);
        let mut row: Vec<Field> = descriptor_fields(req.descriptor).into();
        row.extend([
            r.into(),
            rep.truncation.into(),
            rep.trials.into(),
            rep.seed.into(),
            rep.mean.into(),
            rep.stderr.into(),
            analytic.into(),
            z.into(),
            rep.tail_bound.into(),
            rep.resampled.into(),
            rep.winding_disagreements.into(),
        ]);
        table.push(row);
    }
    Ok(Rendered { table, json: None })
}

pub fn puiseux_cmd(n: usize, radii: &[f64]) -> Result<Rendered> {
    if n == 0 {
        return Err(Error::Domain("--n must be at least 1".into()));
    }
    let rows = branch_errors(n, radii)?;
    let mut header: Vec<String> = ["r", "one_minus_r", "max_error", "predicted_order"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..2 * n).map(|j| format!("error_{j}")));
    let mut table = Table::new(&header);
    let order = 3.0 / (2 * n) as f64;
    for row in &rows {
        let gap = 1.0 - row.r;
        let mut fields: Vec<Field> = vec![row.r.into(), gap.into(), row.max_error.into(), gap.powf(order).into()];
        fields.extend(row.errors.iter().map(|&e| Field::from(e)));
        table.push(fields);
    }
    if rows.len() >= 2 && rows.iter().all(|row| row.max_error > 0.0) {
        let x: Vec<f64> = rows.iter().map(|row| 1.0 - row.r).collect();
        let y: Vec<f64> = rows.iter().map(|row| row.max_error).collect();
        let (slope, _) = loglog_slope(&x, &y);
        eprintln!("max_error ~ (1-r)^{slope:.4} (predicted order {order:.4})");
    }
    Ok(Rendered { table, json: None })
}

pub fn region_cmd(a_axis: &str, b_axis: &str) -> Result<Rendered> {
    let a_grid = parse_axis(a_axis)?;
    let b_grid = parse_axis(b_axis)?;
    let mut table = Table::new(&["a", "b", "label", "in_region"]);
    for &b in &b_grid {
        for &a in &a_grid {
            let label = classify_region(a, b);
            table.push(vec![
                a.into(),
                b.into(),
                label.as_str().into(),
                (label != gaf_zeros::RegionLabel::Outside).into(),
            ]);
        }
    }
    Ok(Rendered { table, json: None })
}
