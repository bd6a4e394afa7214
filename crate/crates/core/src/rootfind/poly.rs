//! Dense polynomial helpers. Coefficients are stored in ascending order.

use num_complex::Complex64;

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Returns `(p(z), p'(z), sum_k |a_k| |z|^k)`.
pub(crate) fn horner_with_bound(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let zn = z.norm();
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut bound = 0.0;
    for &a in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
        bound = bound * zn + a.norm();
    }
    (p, dp, bound)
}

/// `sum_k |a_k| x^k`.
pub(crate) fn abs_horner(coeffs: &[Complex64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, a| acc * x + a.norm())
}

/// Coefficients of `p^{(k)}(z) / k!`.
pub(crate) fn taylor_coeffs(coeffs: &[Complex64], k: usize) -> Vec<Complex64> {
    if k >= coeffs.len() {
        return vec![];
    }
    (k..coeffs.len())
        .map(|j| coeffs[j] * binomial(j as u64, k as u64))
        .collect()
}

pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        // acc * (n - i) is divisible by i + 1, so this stays exact below 2^53.
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Monic polynomial with the given roots, ascending coefficients.
pub(crate) fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &w in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * w;
        }
        c = next;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn from_roots_expands_product() {
        let c = from_roots(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert!((c[0] + 1.0).norm() < 1e-15);
        assert!(c[1].norm() < 1e-15);
        assert!((c[2] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn taylor_coeffs_of_cube() {
        // z^3: p''/2! = 3z
        let c = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        let t = taylor_coeffs(&c, 2);
        assert_eq!(t.len(), 2);
        assert_eq!(t[1], Complex64::new(3.0, 0.0));
        assert_eq!(t[0], Complex64::new(0.0, 0.0));
    }
}
