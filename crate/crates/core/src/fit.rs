//! Small fitting helpers for extracting asymptotic exponents and constants.

/// Value at `t = 0` of the polynomial interpolating `(t_i, y_i)` (Neville).
pub fn extrapolate_to_zero(t: &[f64], y: &[f64]) -> f64 {
    assert_eq!(t.len(), y.len());
    assert!(!t.is_empty());
    let mut p = y.to_vec();
    let n = t.len();
    for level in 1..n {
        for i in 0..n - level {
            let (ti, tj) = (t[i], t[i + level]);
            p[i] = (tj * p[i] - ti * p[i + 1]) / (tj - ti);
        }
    }
    p[0]
}

/// Richardson extrapolation of `y(s) = L + c1 s^gap + c2 s^{2 gap} + ...` to `s = 0`.
pub fn richardson(s: &[f64], y: &[f64], gap: f64) -> f64 {
    let t: Vec<f64> = s.iter().map(|v| v.powf(gap)).collect();
    extrapolate_to_zero(&t, y)
}

/// Least-squares solution of `a x = b` by Householder QR; `a` has at least
/// as many rows as columns.
pub fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = a.len();
    if m == 0 || m != b.len() {
        return None;
    }
    let k = a[0].len();
    if m < k || a.iter().any(|row| row.len() != k) {
        return None;
    }
    let mut q: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..k {
        let norm = (col..m).map(|i| q[i][col] * q[i][col]).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let alpha = if q[col][col] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (col..m).map(|i| q[i][col]).collect();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv == 0.0 {
            continue;
        }
        for c in col..k {
            let dot: f64 = (col..m).map(|i| v[i - col] * q[i][c]).sum();
            let f = 2.0 * dot / vv;
            for (row, vi) in q[col..].iter_mut().zip(&v) {
                row[c] -= f * vi;
            }
        }
        let dot: f64 = (col..m).map(|i| v[i - col] * rhs[i]).sum();
        let f = 2.0 * dot / vv;
        for i in col..m {
            rhs[i] -= f * v[i - col];
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| q[i][j] * x[j]).sum();
        if q[i][i].abs() < 1e-300 {
            return None;
        }
        x[i] = (rhs[i] - s) / q[i][i];
    }
    Some(x)
}

/// Slope and intercept of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let rows: Vec<Vec<f64>> = x.iter().map(|v| vec![v.ln(), 1.0]).collect();
    let rhs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let sol = least_squares(&rows, &rhs).expect("degenerate log-log fit");
    (sol[0], sol[1])
}

/// Result of fitting `y(s) ≈ K s^{-α} (1 + D s^gap)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub constant: f64,
    pub correction: f64,
}

/// Fits `ln y = ln K - α ln s + D s^gap` by least squares (exact for three points).
pub fn power_law_fit(s: &[f64], y: &[f64], gap: f64) -> Option<PowerLawFit> {
    if s.len() < 3 || s.len() != y.len() || y.iter().any(|v| v.is_nan() || *v <= 0.0) {
        return None;
    }
    let rows: Vec<Vec<f64>> = s.iter().map(|v| vec![1.0, -v.ln(), v.powf(gap)]).collect();
    let rhs: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let sol = least_squares(&rows, &rhs)?;
    Some(PowerLawFit {
        exponent: sol[1],
        constant: sol[0].exp(),
        correction: sol[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_leading_terms() {
        let s = [1e-2, 1e-3, 1e-4];
        let y: Vec<f64> = s.iter().map(|v: &f64| 2.0 + 3.0 * v.sqrt() - 5.0 * v).collect();
        assert!((richardson(&s, &y, 0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_law_recovers_parameters() {
        let s = [1e-3, 1e-4, 1e-5, 1e-6];
        let y: Vec<f64> = s
            .iter()
            .map(|v: &f64| 0.7 * v.powf(-0.75) * (0.4 * v.powf(0.5)).exp())
            .collect();
        let fit = power_law_fit(&s, &y, 0.5).unwrap();
        assert!((fit.exponent - 0.75).abs() < 1e-9);
        assert!((fit.constant - 0.7).abs() < 1e-9);
        assert!((fit.correction - 0.4).abs() < 1e-7);
    }

    #[test]
    fn loglog_line() {
        let x = [1e-3, 1e-4, 1e-5];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.75)).collect();
        let (slope, icpt) = loglog_slope(&x, &y);
        assert!((slope - 0.75).abs() < 1e-12);
        assert!((icpt.exp() - 3.0).abs() < 1e-10);
    }
}
