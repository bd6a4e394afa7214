//! Double-double complex Horner evaluation.
//!
//! Used to polish roots that sit in tight clusters, where plain Horner
//! loses most of its significant digits to cancellation.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct DdComplex {
    re: Dd,
    im: Dd,
}

impl DdComplex {
    fn mul_c(self, z: Complex64) -> DdComplex {
        let re = self.re.mul_f64(z.re).add(self.im.mul_f64(z.im).neg());
        let im = self.re.mul_f64(z.im).add(self.im.mul_f64(z.re));
        DdComplex { re, im }
    }

    fn add_c(self, a: Complex64) -> DdComplex {
        DdComplex {
            re: self.re.add(Dd::from_f64(a.re)),
            im: self.im.add(Dd::from_f64(a.im)),
        }
    }

    fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// Evaluates `p(z)` and `p'(z)` for ascending coefficients with double-double
/// accumulation.
pub(crate) fn horner_dd(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = DdComplex::default();
    let mut dp = DdComplex::default();
    for &a in coeffs.iter().rev() {
        dp = dp.mul_c(z).add(p);
        p = p.mul_c(z).add_c(a);
    }
    (p.to_c64(), dp.to_c64())
}
