//! Manufactured solutions: closed-form fields whose sources are injected so that
//! they solve the continuous problem exactly, for convergence studies.

use crate::assembly::{Assembler, Mode};
use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::fields::{CoefficientField, Loads};
use crate::geometry::{BoxGeometry, Label};
use crate::linear::{integrate, InitialData};
use crate::params::Params;
use crate::signals::Temporal;
use crate::trajectory::Trajectory;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

/// The named catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MmsField {
    /// Separable analytic profile times `cos(2t + π/3)`; the plate stays at rest.
    TrigProduct,
    /// Same profile times `t² + t³`, starting from rest.
    PolynomialRamp,
    /// `(1 + t)(φ₁ + ½φ₃) + (1 − t/2) φ̃₁`, inside the Galerkin space.
    InSpan,
}

impl MmsField {
    pub fn name(self) -> &'static str {
        match self {
            MmsField::TrigProduct => "trig_product",
            MmsField::PolynomialRamp => "polynomial_ramp",
            MmsField::InSpan => "in_span",
        }
    }

    /// Smallest `(n_acoustic, n_plate)` containing the field.
    pub fn span(self) -> Option<(usize, usize)> {
        match self {
            MmsField::InSpan => Some((3, 1)),
            _ => None,
        }
    }
}

impl FromStr for MmsField {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trig_product" => Ok(MmsField::TrigProduct),
            "polynomial_ramp" => Ok(MmsField::PolynomialRamp),
            "in_span" => Ok(MmsField::InSpan),
            other => Err(Error::constraint("/mms/field", &format!("unknown manufactured field {other}"))),
        }
    }
}

/// Sharpness of the profile: coefficients decay like `(a + √(a²−1))^{-m}`.
const PROFILE_A: f64 = 6.0;

/// `g(x) / (a − σ cos(ωx))` with `g` chosen so the reflections across both ends
/// reproduce the boundary conditions of the axis.
#[derive(Debug, Clone, Copy)]
struct AxisProfile {
    g: Shape,
    k: f64,
    sigma: f64,
    omega: f64,
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    One,
    Cos,
    Sin,
}

impl AxisProfile {
    fn new(labels: [Label; 2], len: f64) -> Result<Self> {
        let natural = |l: Label| matches!(l, Label::Neumann | Label::Plate);
        let (lo, hi) = (labels[0], labels[1]);
        if lo == Label::Absorbing || hi == Label::Absorbing {
            return Err(Error::UnsupportedSignal("manufactured fields need Dirichlet or Neumann faces".into()));
        }
        let w = PI / len;
        Ok(match (natural(lo), natural(hi)) {
            (true, true) => AxisProfile { g: Shape::One, k: 0.0, sigma: -1.0, omega: w },
            (true, false) => AxisProfile { g: Shape::Cos, k: w / 2.0, sigma: 1.0, omega: w },
            (false, true) => AxisProfile { g: Shape::Sin, k: w / 2.0, sigma: -1.0, omega: w },
            (false, false) => AxisProfile { g: Shape::Sin, k: w, sigma: 1.0, omega: 2.0 * w },
        })
    }

    /// Value and second derivative.
    fn eval(&self, x: f64) -> (f64, f64) {
        let (g, g1, g2) = match self.g {
            Shape::One => (1.0, 0.0, 0.0),
            Shape::Cos => {
                let (s, c) = (self.k * x).sin_cos();
                (c, -self.k * s, -self.k * self.k * c)
            }
            Shape::Sin => {
                let (s, c) = (self.k * x).sin_cos();
                (s, self.k * c, -self.k * self.k * s)
            }
        };
        let (s, c) = (self.omega * x).sin_cos();
        let d = PROFILE_A - self.sigma * c;
        let d1 = self.sigma * self.omega * s;
        let d2 = self.sigma * self.omega * self.omega * c;
        let v = g / d;
        let v2 = g2 / d - 2.0 * g1 * d1 / (d * d) - g * d2 / (d * d) + 2.0 * g * d1 * d1 / (d * d * d);
        (v, v2)
    }
}

/// Product profile `P(x)` with its Laplacian.
#[derive(Debug, Clone)]
pub struct Profile {
    axes: Vec<AxisProfile>,
}

impl Profile {
    pub fn new(geom: &BoxGeometry) -> Result<Self> {
        let axes = (0..geom.dim()).map(|a| AxisProfile::new(geom.labels(a), geom.side(a))).collect::<Result<_>>()?;
        Ok(Profile { axes })
    }

    /// `(P, ΔP)` at `x`.
    pub fn eval(&self, x: &[f64]) -> (f64, f64) {
        let parts: Vec<(f64, f64)> = self.axes.iter().zip(x).map(|(a, x)| a.eval(*x)).collect();
        let value: f64 = parts.iter().map(|p| p.0).product();
        let lap = (0..parts.len())
            .map(|i| parts.iter().enumerate().map(|(j, p)| if i == j { p.1 } else { p.0 }).product::<f64>())
            .sum();
        (value, lap)
    }
}

/// A manufactured solution bound to a basis and parameters.
#[derive(Debug, Clone)]
pub struct Manufactured<'a> {
    pub field: MmsField,
    pub basis: &'a BasisSet,
    pub params: Params,
    pub mode: Mode,
    profile: Option<Profile>,
    /// Acoustic coefficients of the profile and the squared norm of the rest.
    projection: DVector<f64>,
    tail: f64,
    mass: DMatrix<f64>,
}

const IN_SPAN_ACOUSTIC: [(usize, f64); 2] = [(0, 1.0), (2, 0.5)];

impl<'a> Manufactured<'a> {
    pub fn new(field: MmsField, basis: &'a BasisSet, params: Params, mode: Mode) -> Result<Self> {
        params.validate()?;
        if params.k != 0.0 {
            return Err(Error::constraint("/params/k", "manufactured solutions use the linear problem"));
        }
        let n = basis.dim();
        let mass = basis.grams.mass.clone();
        if let Some((na, np)) = field.span() {
            if basis.n_acoustic() < na || basis.n_plate() < np {
                return Err(Error::constraint("/basis", &format!("the in-span field needs at least {na} + {np} modes")));
            }
            return Ok(Manufactured { field, basis, params, mode, profile: None, projection: DVector::zeros(n), tail: 0.0, mass });
        }
        let profile = Profile::new(&basis.geometry)?;
        let g = &basis.grid.volume;
        let pv: Vec<f64> = g.points.iter().map(|x| profile.eval(x).0).collect();
        // the lifted coefficients are the plate displacement, which is zero here, so
        // the exact coefficients are the acoustic projections alone
        let na = basis.n_acoustic();
        let projection = DVector::from_fn(n, |j, _| {
            if j >= na {
                return 0.0;
            }
            g.weights.iter().zip(&pv).zip(&basis.nodes.value[j]).map(|((w, p), v)| w * p * v).sum()
        });
        let norm2: f64 = g.weights.iter().zip(&pv).map(|(w, p)| w * p * p).sum();
        let tail = (norm2 - projection.norm_squared()).max(0.0);
        Ok(Manufactured { field, basis, params, mode, profile: Some(profile), projection, tail, mass })
    }

    pub fn temporal(&self) -> Temporal {
        match self.field {
            MmsField::TrigProduct => Temporal::Sine { amp: 1.0, omega: 2.0, phase: PI / 3.0 },
            MmsField::PolynomialRamp => Temporal::Polynomial { coefs: vec![0.0, 0.0, 1.0, 1.0] },
            MmsField::InSpan => Temporal::Polynomial { coefs: vec![1.0, 1.0] },
        }
    }

    fn plate_temporal(&self) -> Temporal {
        match self.field {
            MmsField::InSpan => Temporal::Polynomial { coefs: vec![1.0, -0.5] },
            _ => Temporal::Zero,
        }
    }

    /// Exact modal coefficients; for profiles, the L² projection onto the span.
    pub fn coefficients(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let (s, sp) = {
            let j = self.temporal().jet(t);
            (j[0], j[1])
        };
        let n = self.basis.dim();
        if self.profile.is_some() {
            return (&self.projection * s, &self.projection * sp);
        }
        let (mut u, mut v) = (DVector::zeros(n), DVector::zeros(n));
        for (j, a) in IN_SPAN_ACOUSTIC {
            u[j] = a * s;
            v[j] = a * sp;
        }
        let w = self.plate_temporal().jet(t);
        let na = self.basis.n_acoustic();
        u[na] = w[0];
        v[na] = w[1];
        (u, v)
    }

    pub fn initial(&self) -> InitialData {
        let (u, v) = self.coefficients(0.0);
        let na = self.basis.n_acoustic();
        let np = self.basis.n_plate();
        InitialData {
            p0: u.rows(0, na).iter().copied().collect(),
            p1: v.rows(0, na).iter().copied().collect(),
            w0: u.rows(na, np).iter().copied().collect(),
            w1: v.rows(na, np).iter().copied().collect(),
        }
    }

    /// Interior source and plate load from the strong equations with α ≡ 1.
    pub fn loads(&self) -> Loads {
        let b = self.basis;
        let p = self.params;
        let (c2, damp) = (p.c * p.c, p.b);
        let ts = self.temporal();
        let tw = self.plate_temporal();
        let na = b.n_acoustic();
        let face = b.geometry.plate_face();
        let fpts = b.grid.face(face).points.clone();
        // (P, ΔP) at the volume nodes and P on the plate
        let (vol, vlap, plate): (Vec<f64>, Vec<f64>, Vec<f64>) = match &self.profile {
            Some(pr) => {
                let (v, l) = b.grid.volume.points.iter().map(|x| pr.eval(x)).unzip();
                (v, l, fpts.iter().map(|x| pr.eval(x).0).collect())
            }
            None => {
                let nq = b.grid.volume.len();
                let (mut v, mut l) = (vec![0.0; nq], vec![0.0; nq]);
                let mut pl = vec![0.0; fpts.len()];
                for (j, a) in IN_SPAN_ACOUSTIC {
                    let lam = b.acoustic[j].lambda;
                    for q in 0..nq {
                        v[q] += a * b.nodes.value[j][q];
                        l[q] -= a * lam * b.nodes.value[j][q];
                    }
                    for (o, x) in pl.iter_mut().zip(&fpts) {
                        *o += a * b.acoustic[j].value(x);
                    }
                }
                (v, l, pl)
            }
        };
        // the lifted column is harmonic, so it only enters through p_tt
        let lifted: Option<Vec<f64>> = (self.profile.is_none()).then(|| b.nodes.value[na].clone());
        let mut loads = Loads::default();
        let (ts1, tw1) = (ts.clone(), tw.clone());
        loads.f.push(Arc::new(move |t| {
            let j = ts1.jet(t);
            let w = tw1.jet(t);
            let mut out: Vec<f64> =
                vol.iter().zip(&vlap).map(|(v, l)| j[2] * v - (c2 * j[0] + damp * j[1]) * l).collect();
            if let Some(h) = &lifted {
                for (o, h) in out.iter_mut().zip(h) {
                    *o += w[2] * h;
                }
            }
            out
        }));
        let mu = b.mu(0);
        let psi = b.plate_nodes.first().cloned().unwrap_or_default();
        let (rho, kappa, delta, beta, gamma) = (p.rho, p.kappa, p.delta, p.beta, p.gamma);
        let mode = self.mode;
        let in_span = self.profile.is_none();
        loads.h.push(Arc::new(move |t| {
            let j = ts.jet(t);
            let w = tw.jet(t);
            let plate_op = |q: usize| -> f64 {
                if !in_span {
                    return 0.0;
                }
                (rho * w[2] + beta * mu.powf(gamma) * w[1] + delta * mu * mu * w[0]) * psi[q]
            };
            (0..plate.len())
                .map(|q| match mode {
                    // p_tt of the lifted column is not included: the in-span field is linear in time
                    Mode::Full => plate_op(q) - kappa * j[2] * plate[q],
                    Mode::PaperTriangular => plate_op(q) / rho,
                })
                .collect()
        }));
        loads
    }

    pub fn solve(&self, dt: f64, steps: usize) -> Result<Trajectory> {
        let asm = Assembler::new(self.basis, self.params, self.mode, CoefficientField::Unit)?;
        let init = self.initial();
        integrate(&asm, &self.loads(), init.u0(), init.v0(), dt, steps)
    }

    /// `‖p − p*‖_{L²} + ‖w̃ − w̃*‖` at sample `i`, with the projection tail included.
    pub fn error_at(&self, tr: &Trajectory, i: usize) -> f64 {
        let t = tr.times[i];
        let (u, _) = self.coefficients(t);
        let d = &tr.u[i] - &u;
        let s = self.temporal().value(t);
        let ep = (d.dot(&(&self.mass * &d)) + s * s * self.tail).max(0.0);
        let na = tr.n_acoustic;
        let ew = d.rows(na, tr.n_plate).norm_squared();
        ep.sqrt() + ew.sqrt()
    }

    /// Sup over the stored samples of [`Self::error_at`].
    pub fn max_error(&self, tr: &Trajectory) -> f64 {
        (0..tr.len()).map(|i| self.error_at(tr, i)).fold(0.0, f64::max)
    }

    /// `p_tt(0)` as modal acoustic coefficients, for the compatibility check.
    pub fn second_derivative_at_zero(&self) -> DVector<f64> {
        let j = self.temporal().jet(0.0);
        let na = self.basis.n_acoustic();
        if self.profile.is_some() {
            return self.projection.rows(0, na) * j[2];
        }
        let mut out = DVector::zeros(na);
        for (k, a) in IN_SPAN_ACOUSTIC {
            out[k] = a * j[2];
        }
        out
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub n_acoustic: usize,
    pub n_plate: usize,
    /// Sup-in-time error against the manufactured field.
    pub error: f64,
    /// Sup-in-time distance to the next finer run, for Richardson slopes.
    pub step_change: Option<f64>,
}

/// Halves `dt0` `levels` times at fixed basis; orders come from successive differences.
pub fn temporal_study(m: &Manufactured<'_>, dt0: f64, t_end: f64, levels: usize) -> Result<(Vec<ConvergenceRow>, Vec<f64>)> {
    let runs = (0..=levels)
        .map(|l| {
            let dt = dt0 / f64::powi(2.0, l as i32);
            let steps = (t_end / dt).round() as usize;
            m.solve(dt, steps).map(|tr| (dt, tr))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (l, (dt, tr)) in runs.iter().enumerate() {
        let change = runs.get(l + 1).map(|(_, fine)| {
            let stride = 2;
            (0..tr.len()).map(|i| m.error_between(tr, i, fine, i * stride)).fold(0.0, f64::max)
        });
        rows.push(ConvergenceRow {
            dt: *dt,
            n_acoustic: m.basis.n_acoustic(),
            n_plate: m.basis.n_plate(),
            error: m.max_error(tr),
            step_change: change,
        });
    }
    let changes: Vec<f64> = rows.iter().filter_map(|r| r.step_change).collect();
    let orders = changes.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok((rows, orders))
}

impl Manufactured<'_> {
    fn error_between(&self, a: &Trajectory, i: usize, b: &Trajectory, j: usize) -> f64 {
        let d = &a.u[i] - &b.u[j];
        d.dot(&(&self.mass * &d)).max(0.0).sqrt()
    }
}

/// Errors at fixed `dt` over a list of bases.
pub fn spatial_study(
    field: MmsField,
    bases: &[&BasisSet],
    params: Params,
    mode: Mode,
    dt: f64,
    t_end: f64,
) -> Result<Vec<ConvergenceRow>> {
    bases
        .iter()
        .map(|b| {
            let m = Manufactured::new(field, b, params, mode)?;
            let tr = m.solve(dt, (t_end / dt).round() as usize)?;
            Ok(ConvergenceRow { dt, n_acoustic: b.n_acoustic(), n_plate: b.n_plate(), error: m.max_error(&tr), step_change: None })
        })
        .collect()
}
