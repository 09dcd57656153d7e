//! One-dimensional trigonometric eigenfamilies on [0, L].

use crate::geometry::Label;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// Boundary type seen by the eigenfamily at one end of an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Neumann,
    Dirichlet,
}

impl From<Label> for End {
    fn from(l: Label) -> Self {
        if l.is_dirichlet() {
            End::Dirichlet
        } else {
            End::Neumann
        }
    }
}

/// Laplace eigenfamily of an interval with given end conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    pub lo: End,
    pub hi: End,
    pub len: f64,
}

impl Family {
    pub fn new(lo: End, hi: End, len: f64) -> Self {
        Family { lo, hi, len }
    }

    /// Smallest admissible mode number.
    pub fn first(&self) -> usize {
        match (self.lo, self.hi) {
            (End::Dirichlet, End::Dirichlet) => 1,
            _ => 0,
        }
    }

    /// Mode with number `m` (cosines and sines count from 0 or 1 as usual,
    /// mixed families count quarter waves from 0).
    pub fn mode(&self, m: usize) -> Factor {
        let l = self.len;
        let (trig, k) = match (self.lo, self.hi) {
            (End::Neumann, End::Neumann) => (Trig::Cos, m as f64 * PI / l),
            (End::Dirichlet, End::Dirichlet) => {
                assert!(m >= 1, "sine family starts at 1");
                (Trig::Sin, m as f64 * PI / l)
            }
            (End::Neumann, End::Dirichlet) => (Trig::Cos, (m as f64 + 0.5) * PI / l),
            (End::Dirichlet, End::Neumann) => (Trig::Sin, (m as f64 + 0.5) * PI / l),
        };
        let norm = if trig == Trig::Cos && k == 0.0 {
            (1.0 / l).sqrt()
        } else {
            (2.0 / l).sqrt()
        };
        Factor { trig, k, norm }
    }

    /// Squared wavenumber of mode `m`.
    pub fn eigenvalue(&self, m: usize) -> f64 {
        let k = self.mode(m).k;
        k * k
    }
}

/// `norm * trig(k x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub trig: Trig,
    pub k: f64,
    pub norm: f64,
}

impl Factor {
    pub fn sine(k: f64, norm: f64) -> Self {
        Factor { trig: Trig::Sin, k, norm }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.trig {
            Trig::Cos => self.norm * (self.k * x).cos(),
            Trig::Sin => self.norm * (self.k * x).sin(),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self.trig {
            Trig::Cos => -self.norm * self.k * (self.k * x).sin(),
            Trig::Sin => self.norm * self.k * (self.k * x).cos(),
        }
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        -self.k * self.k * self.value(x)
    }

    /// Closed-form `∫_0^L self * other dx`.
    pub fn overlap(&self, other: &Factor, len: f64) -> f64 {
        let (a, b) = (self.k, other.k);
        let s = self.norm * other.norm * 0.5;
        match (self.trig, other.trig) {
            (Trig::Cos, Trig::Cos) => s * (cos_int(a - b, len) + cos_int(a + b, len)),
            (Trig::Sin, Trig::Sin) => s * (cos_int(a - b, len) - cos_int(a + b, len)),
            (Trig::Sin, Trig::Cos) => s * (sin_int(a + b, len) + sin_int(a - b, len)),
            (Trig::Cos, Trig::Sin) => s * (sin_int(a + b, len) + sin_int(b - a, len)),
        }
    }
}

/// `∫_0^L cos(q x) dx`.
fn cos_int(q: f64, len: f64) -> f64 {
    if q == 0.0 {
        len
    } else {
        (q * len).sin() / q
    }
}

/// `∫_0^L sin(q x) dx`.
fn sin_int(q: f64, len: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else {
        let h = (0.5 * q * len).sin();
        2.0 * h * h / q
    }
}
