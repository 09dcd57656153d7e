//! Exponential polynomials on [0, L] with closed-form integration.
//!
//! A term is `c * s^p * exp(z (s - a))` with the anchor `a` in {0, L} picked so
//! the exponential stays bounded by one on the interval. Hyperbolic profiles and
//! cosines are both written this way, so every 1-D integral needed by the
//! separable extensions reduces to [`ExpPoly::integral`].

use crate::quadrature::gauss_interval;
use nalgebra::Complex;

type C = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub c: C,
    pub p: u32,
    pub z: C,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub len: f64,
    pub terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero(len: f64) -> Self {
        ExpPoly { len, terms: vec![] }
    }

    /// `c * exp(r (s - a))` with `a = L` for growing rates and `a = 0` otherwise.
    pub fn exp(len: f64, c: f64, r: f64) -> Self {
        let a = if r > 0.0 { len } else { 0.0 };
        ExpPoly {
            len,
            terms: vec![Term {
                c: C::new(c, 0.0),
                p: 0,
                z: C::new(r, 0.0),
                a,
            }],
        }
    }

    /// `c0 + c1 s + c2 s^2`.
    pub fn poly(len: f64, coefs: &[f64]) -> Self {
        let terms = coefs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(p, c)| Term {
                c: C::new(*c, 0.0),
                p: p as u32,
                z: C::new(0.0, 0.0),
                a: 0.0,
            })
            .collect();
        ExpPoly { len, terms }
    }

    /// `u cos(k s) + v sin(k s)`.
    pub fn trig(len: f64, k: f64, u: f64, v: f64) -> Self {
        if k == 0.0 {
            return Self::poly(len, &[u]);
        }
        // cos = (e^{iks} + e^{-iks})/2, sin = (e^{iks} - e^{-iks})/(2i)
        let cp = C::new(0.5 * u, -0.5 * v);
        let cm = C::new(0.5 * u, 0.5 * v);
        ExpPoly {
            len,
            terms: vec![
                Term { c: cp, p: 0, z: C::new(0.0, k), a: 0.0 },
                Term { c: cm, p: 0, z: C::new(0.0, -k), a: 0.0 },
            ],
        }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        ExpPoly { len: self.len, terms }
    }

    pub fn scale(&self, s: f64) -> ExpPoly {
        ExpPoly {
            len: self.len,
            terms: self.terms.iter().map(|t| Term { c: t.c * s, ..*t }).collect(),
        }
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let len = self.len;
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for t in &self.terms {
            for u in &other.terms {
                let z = t.z + u.z;
                let a = if z.re > 0.0 { len } else { 0.0 };
                let shift = t.z * (a - t.a) + u.z * (a - u.a);
                terms.push(Term {
                    c: t.c * u.c * shift.exp(),
                    p: t.p + u.p,
                    z,
                    a,
                });
            }
        }
        ExpPoly { len, terms }
    }

    pub fn deriv(&self) -> ExpPoly {
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.p > 0 {
                terms.push(Term { c: t.c * t.p as f64, p: t.p - 1, ..*t });
            }
            if t.z != C::new(0.0, 0.0) {
                terms.push(Term { c: t.c * t.z, ..*t });
            }
        }
        ExpPoly { len: self.len, terms }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| (t.c * s.powi(t.p as i32) * (t.z * (s - t.a)).exp()).re)
            .sum()
    }

    /// Exact `∫_0^L` (real part).
    pub fn integral(&self) -> f64 {
        self.terms.iter().map(|t| term_integral(t, self.len).re).sum()
    }
}

fn term_integral(t: &Term, len: f64) -> C {
    let z = t.z;
    if z.norm() * len < 0.5 {
        // entire integrand of small exponent: a Gauss rule is exact to rounding
        let (x, w) = gauss_interval(24, 0.0, len);
        let mut acc = C::new(0.0, 0.0);
        for (x, w) in x.iter().zip(&w) {
            acc += (z * (x - t.a)).exp() * (w * x.powi(t.p as i32));
        }
        return t.c * acc;
    }
    let e_hi = (z * (len - t.a)).exp();
    let e_lo = (z * (0.0 - t.a)).exp();
    // I_p = [s^p e^{z(s-a)}/z]_0^L - p/z I_{p-1}
    let mut i = (e_hi - e_lo) / z;
    for p in 1..=t.p {
        i = (e_hi * len.powi(p as i32)) / z - i * (p as f64) / z;
    }
    t.c * i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(f: &ExpPoly) -> f64 {
        // composite rule, fine enough for moderate rates
        let n = 400;
        let h = f.len / n as f64;
        let mut acc = 0.0;
        for k in 0..n {
            let (x, w) = gauss_interval(10, k as f64 * h, (k + 1) as f64 * h);
            acc += x.iter().zip(&w).map(|(x, w)| w * f.eval(*x)).sum::<f64>();
        }
        acc
    }

    #[test]
    fn products_integrate_exactly() {
        let len = 1.7;
        let a = ExpPoly::exp(len, 1.0, -30.0).add(&ExpPoly::exp(len, 0.3, 30.0));
        let b = ExpPoly::trig(len, 4.5, 1.0, -0.7);
        let c = ExpPoly::poly(len, &[0.2, -1.0, 0.5]);
        for f in [a.mul(&b), a.mul(&a), b.mul(&c), c.mul(&c).mul(&b), a.deriv().mul(&b.deriv())] {
            let (q, e) = (quad(&f), f.integral());
            assert!((q - e).abs() < 1e-12 * (1.0 + q.abs()), "{q} vs {e}");
        }
    }

    #[test]
    fn large_rates_stay_finite() {
        let len = 1.0;
        let a = ExpPoly::exp(len, 1.0, -1e6).add(&ExpPoly::exp(len, 1.0, 1e6));
        let v = a.mul(&a).integral();
        // e^{-2e6 s} and e^{2e6 (s-1)} each integrate to 1/(2e6); the cross term is negligible
        assert!(v.is_finite() && (v - 2.0 / 2e6).abs() < 1e-15);
    }
}
