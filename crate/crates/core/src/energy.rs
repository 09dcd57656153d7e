//! Energies, data norms, estimate audits, identity residuals and decay fits.

use crate::assembly::{Assembler, Mode};
use crate::basis::{BasisSet, Kind, Weight};
use crate::error::{Error, Result};
use crate::fields::Loads;
use crate::params::Params;
use crate::quadrature::gauss_interval;
use crate::signals::{ResolvedSignal, SignalKind};
use crate::trajectory::Trajectory;
use crate::trig::{End, Family};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Energy terms per sample. Cumulative terms use the trapezoid rule on the trajectory grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// `‖p_t‖²_{H¹}`.
    pub p_kinetic: Vec<f64>,
    /// `‖Δp‖²`.
    pub p_laplacian: Vec<f64>,
    /// `b ∫₀ᵗ ‖Δp_t‖²`.
    pub p_damping: Vec<f64>,
    /// `∫₀ᵗ ‖∂_ν p_t‖²_{Γ_a}`.
    pub p_absorbing: Vec<f64>,
    /// `‖w̃_t‖²`.
    pub w_kinetic: Vec<f64>,
    /// `‖Δ_pl w̃‖²`.
    pub w_bending: Vec<f64>,
    /// `β ∫₀ᵗ ‖(−Δ_pl)^{γ/2} w̃_t‖²`.
    pub w_damping: Vec<f64>,
    /// `b‖Δp₀‖² + ‖∂_ν p₀‖²_{Γ_a} + β‖(−Δ_pl)^{γ/2} w̃₀‖²`.
    pub initial_extra: f64,
    /// Report of the time-differentiated fields, when accelerations are stored.
    pub derived: Option<Box<EnergyReport>>,
}

impl EnergyReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn ep(&self, i: usize) -> f64 {
        self.p_kinetic[i] + self.p_laplacian[i] + self.p_damping[i] + self.p_absorbing[i]
    }

    pub fn ew(&self, i: usize) -> f64 {
        self.w_kinetic[i] + self.w_bending[i] + self.w_damping[i]
    }

    pub fn total(&self, i: usize) -> f64 {
        self.ep(i) + self.ew(i)
    }

    /// Instantaneous part only: no cumulative damping integrals.
    pub fn instantaneous(&self, i: usize) -> f64 {
        self.p_kinetic[i] + self.p_laplacian[i] + self.w_kinetic[i] + self.w_bending[i]
    }

    pub fn instantaneous_series(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.instantaneous(i)).collect()
    }

    /// `𝓔₁` without the accumulated damping integrals, which never decay.
    pub fn e1_instantaneous(&self) -> Result<Vec<f64>> {
        let d = self
            .derived
            .as_ref()
            .ok_or_else(|| Error::MissingDerivative("higher energy needs stored accelerations".into()))?;
        Ok((0..self.len()).map(|i| self.instantaneous(i) + d.instantaneous(i)).collect())
    }

    pub fn totals(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.total(i)).collect()
    }

    /// `𝓔₁ = 𝓔[p, w̃] + 𝓔[p_t, w̃_t]`.
    pub fn e1(&self) -> Result<Vec<f64>> {
        let d = self
            .derived
            .as_ref()
            .ok_or_else(|| Error::MissingDerivative("higher energy needs stored accelerations".into()))?;
        Ok((0..self.len()).map(|i| self.total(i) + d.total(i)).collect())
    }

    /// Column names and rows for export.
    pub fn table(&self) -> (Vec<&'static str>, Vec<Vec<f64>>) {
        let mut names = vec![
            "t",
            "p_kinetic",
            "p_laplacian",
            "p_damping",
            "p_absorbing",
            "w_kinetic",
            "w_bending",
            "w_damping",
            "E_p",
            "E_w",
            "E",
        ];
        let e1 = self.e1().ok();
        if e1.is_some() {
            names.push("E1");
        }
        let rows = (0..self.len())
            .map(|i| {
                let mut r = vec![
                    self.times[i],
                    self.p_kinetic[i],
                    self.p_laplacian[i],
                    self.p_damping[i],
                    self.p_absorbing[i],
                    self.w_kinetic[i],
                    self.w_bending[i],
                    self.w_damping[i],
                    self.ep(i),
                    self.ew(i),
                    self.total(i),
                ];
                if let Some(e) = &e1 {
                    r.push(e[i]);
                }
                r
            })
            .collect();
        (names, rows)
    }
}

fn quad(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(m * x)).max(0.0)
}

fn cumulative(dt: f64, g: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    for (i, v) in g.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * dt * (g[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

/// Gram-type data shared by the energy evaluations.
struct Forms {
    h1: DMatrix<f64>,
    lap: DMatrix<f64>,
    absorbing: Option<DMatrix<f64>>,
    mu: Vec<f64>,
}

impl Forms {
    fn new(basis: &BasisSet) -> Result<Self> {
        let g = &basis.grams;
        let absorbing = if basis.geometry.has(crate::geometry::Label::Absorbing) {
            Some(basis.inner_products(Weight::One, Kind::BoundaryNormal)?)
        } else {
            None
        };
        Ok(Forms {
            h1: &g.mass + &g.grad,
            lap: g.lap.clone(),
            absorbing,
            mu: (0..basis.n_plate()).map(|i| basis.mu(i)).collect(),
        })
    }
}

fn series(tr: &Trajectory, f: &Forms, p: &Params) -> Result<EnergyReport> {
    let n = f.h1.nrows();
    if tr.dim() != n {
        return Err(Error::ShapeMismatch(format!("trajectory of dimension {} for a basis of {n}", tr.dim())));
    }
    let na = tr.n_acoustic;
    let plate = |x: &DVector<f64>, w: &dyn Fn(f64) -> f64| -> f64 {
        f.mu.iter().enumerate().map(|(i, m)| w(*m) * x[na + i] * x[na + i]).sum()
    };
    let frac = |m: f64| m.powf(p.gamma);
    let mut r = EnergyReport {
        times: tr.times.clone(),
        p_kinetic: tr.v.iter().map(|v| quad(&f.h1, v)).collect(),
        p_laplacian: tr.u.iter().map(|u| quad(&f.lap, u)).collect(),
        p_damping: vec![],
        p_absorbing: vec![],
        w_kinetic: tr.v.iter().map(|v| plate(v, &|_| 1.0)).collect(),
        w_bending: tr.u.iter().map(|u| plate(u, &|m| m * m)).collect(),
        w_damping: vec![],
        initial_extra: 0.0,
        derived: None,
    };
    let lap_v: Vec<f64> = tr.v.iter().map(|v| p.b * quad(&f.lap, v)).collect();
    r.p_damping = cumulative(tr.dt, &lap_v);
    let abs_v: Vec<f64> = match &f.absorbing {
        Some(m) => tr.v.iter().map(|v| quad(m, v)).collect(),
        None => vec![0.0; tr.len()],
    };
    r.p_absorbing = cumulative(tr.dt, &abs_v);
    let frac_v: Vec<f64> = tr.v.iter().map(|v| p.beta * plate(v, &frac)).collect();
    r.w_damping = cumulative(tr.dt, &frac_v);
    if let Some(u0) = tr.u.first() {
        r.initial_extra = p.b * quad(&f.lap, u0)
            + f.absorbing.as_ref().map_or(0.0, |m| quad(m, u0))
            + p.beta * plate(u0, &frac);
    }
    Ok(r)
}

/// Energy terms of a trajectory, with the report of `(p_t, w̃_t)` attached when
/// accelerations are stored.
pub fn energy_series(tr: &Trajectory, basis: &BasisSet, params: &Params) -> Result<EnergyReport> {
    let f = Forms::new(basis)?;
    let mut r = series(tr, &f, params)?;
    if tr.has_acceleration() {
        r.derived = Some(Box::new(series(&tr.derivative()?, &f, params)?));
    }
    Ok(r)
}

/// `‖Δp‖²` by volume quadrature of the expansion, as a cross-check of the spectral form.
pub fn laplacian_norm_quadrature(basis: &BasisSet, c: &DVector<f64>) -> f64 {
    let w = &basis.grid.volume.weights;
    (0..w.len())
        .map(|q| {
            let v: f64 = c.iter().enumerate().map(|(j, cj)| cj * basis.nodes.laplacian[j][q]).sum();
            w[q] * v * v
        })
        .sum()
}

/// `‖∇p‖²` by volume quadrature.
pub fn gradient_norm_quadrature(basis: &BasisSet, c: &DVector<f64>) -> f64 {
    let w = &basis.grid.volume.weights;
    let g = crate::fields::node_gradients(basis, c);
    g.iter().zip(w).map(|(g, w)| w * g.iter().map(|x| x * x).sum::<f64>()).sum()
}

/// `F[f, h̃]` and the related boundary-data norms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DataNorms {
    /// `F[f, h̃]`.
    pub f: f64,
    /// `F[f_t, h̃_t]`.
    pub f_t: f64,
    /// `G[a, g_D, g_N]`.
    pub g: f64,
    /// `G[a_t, g_{D,t}, g_{N,t}]`.
    pub g_t: f64,
}

/// Gauss nodes per panel for time integrals.
const TIME_NODES: usize = 6;
/// Face eigenmodes per axis kept in the boundary Sobolev norms.
const FACE_MODES_1D: usize = 4096;
const FACE_MODES_2D: usize = 256;

fn time_rule(t_end: f64, panel: f64) -> (Vec<f64>, Vec<f64>) {
    let panels = ((t_end / panel).round() as usize).max(1);
    let h = t_end / panels as f64;
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for k in 0..panels {
        let (t, w) = gauss_interval(TIME_NODES, k as f64 * h, (k + 1) as f64 * h);
        ts.extend(t);
        ws.extend(w);
    }
    (ts, ws)
}

fn l2_nodes(weights: &[f64], v: &[f64]) -> f64 {
    weights.iter().zip(v).map(|(w, x)| w * x * x).sum::<f64>().sqrt()
}

/// Boundary Sobolev norm `Σ μ^s g²` of a separable profile through the Dirichlet
/// eigenfamily of the face; `s = 0` gives the L² norm in closed form.
pub fn face_norm_sq(basis: &BasisSet, sig: &ResolvedSignal, s: f64) -> f64 {
    let geom = &basis.geometry;
    let axes = geom.tangential_axes(sig.face);
    if s == 0.0 {
        return sig.amp
            * sig.amp
            * sig.factors.iter().zip(&axes).map(|(f, a)| f.overlap(f, geom.side(*a))).product::<f64>();
    }
    let cap = if axes.len() == 1 { FACE_MODES_1D } else { FACE_MODES_2D };
    let coefs: Vec<Vec<(f64, f64)>> = axes
        .iter()
        .zip(&sig.factors)
        .map(|(a, f)| {
            let fam = Family::new(End::Dirichlet, End::Dirichlet, geom.side(*a));
            (1..=cap).map(|m| (fam.eigenvalue(m), f.overlap(&fam.mode(m), fam.len))).collect()
        })
        .collect();
    let amp2 = sig.amp * sig.amp;
    match coefs.len() {
        1 => amp2 * coefs[0].iter().map(|(mu, c)| mu.powf(s) * c * c).sum::<f64>(),
        _ => {
            let mut acc = 0.0;
            for (m1, c1) in &coefs[0] {
                for (m2, c2) in &coefs[1] {
                    acc += (m1 + m2).powf(s) * c1 * c1 * c2 * c2;
                }
            }
            amp2 * acc
        }
    }
}

/// `F` and `G` over `[0, t_end]`; time integrals use Gauss panels of width `panel`.
/// Time derivatives of the interior and plate loads use central differences.
pub fn source_norms(
    basis: &BasisSet,
    signals: &[ResolvedSignal],
    loads: &Loads,
    t_end: f64,
    panel: f64,
) -> Result<DataNorms> {
    let (ts, ws) = time_rule(t_end, panel);
    let vw = &basis.grid.volume.weights;
    let pw = &basis.grid.face(basis.geometry.plate_face()).weights;
    let eps = 1e-5 * t_end.max(1.0);
    let diff = |g: &dyn Fn(f64) -> Option<Vec<f64>>, t: f64| -> Option<Vec<f64>> {
        let (a, b) = (g(t + eps)?, g(t - eps)?);
        Some(a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * eps)).collect())
    };
    let fa = |t: f64| loads.f_at(t);
    let ha = |t: f64| loads.h_at(t);
    let (mut fi, mut hi, mut fti, mut hti) = (0.0, 0.0, 0.0, 0.0);
    for (t, w) in ts.iter().zip(&ws) {
        if let Some(f) = fa(*t) {
            fi += w * l2_nodes(vw, &f);
            fti += w * l2_nodes(vw, &diff(&fa, *t).unwrap_or_default());
        }
        if let Some(h) = ha(*t) {
            hi += w * l2_nodes(pw, &h);
            hti += w * l2_nodes(pw, &diff(&ha, *t).unwrap_or_default());
        }
    }
    let mut norms = DataNorms { f: fi * fi + hi * hi, f_t: fti * fti + hti * hti, g: 0.0, g_t: 0.0 };
    for sig in signals {
        let (shift_norm, order) = match sig.kind {
            SignalKind::Plate => continue,
            SignalKind::Absorbing => (face_norm_sq(basis, sig, 0.0), 1),
            SignalKind::Dirichlet => (face_norm_sq(basis, sig, 0.5), 2),
            SignalKind::Neumann => (face_norm_sq(basis, sig, -0.5), 1),
        };
        for (shift, slot) in [(0usize, &mut norms.g), (1, &mut norms.g_t)] {
            let d = order + shift;
            let time = if sig.kind == SignalKind::Neumann {
                let l1: f64 = ts
                    .iter()
                    .zip(&ws)
                    .map(|(t, w)| {
                        let j = sig.temporal.jet(*t);
                        w * (j[d].abs() + j[d + 1].abs())
                    })
                    .sum();
                l1 * l1
            } else {
                ts.iter().zip(&ws).map(|(t, w)| w * sig.temporal.jet(*t)[d].powi(2)).sum()
            };
            *slot += shift_norm * time;
        }
    }
    Ok(norms)
}

/// The audited inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// `𝓔(t) ≤ C (𝓔(0) + F)`.
    Enest,
    /// `𝓔(t) + ∫₀ᵗ 𝓔 ≤ C (𝓔(0) + extra initial terms + F)`.
    EnestEqpE,
    /// `𝓔₁(t) ≤ C (𝓔₁(0) + F + F_t)`.
    EnestPrime,
    /// `𝓔₁(t) ≤ C (𝓔₁(0) + F + F_t + G + G_t)`.
    EnestPrimeInhom,
}

impl Estimate {
    pub fn name(self) -> &'static str {
        match self {
            Estimate::Enest => "enest",
            Estimate::EnestEqpE => "enest_eqp_E",
            Estimate::EnestPrime => "enest_prime",
            Estimate::EnestPrimeInhom => "enest_prime_inhom",
        }
    }
}

/// Empirical constant of one inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Audit {
    pub which: Estimate,
    /// `sup_t LHS / RHS`; infinite when RHS vanishes and LHS does not.
    pub c_hat: f64,
    pub t_argmax: f64,
    pub rhs: f64,
}

pub fn check_estimate(report: &EnergyReport, norms: &DataNorms, which: Estimate) -> Result<Audit> {
    if report.is_empty() {
        return Err(Error::ShapeMismatch("empty energy report".into()));
    }
    let e = report.totals();
    let (lhs, rhs): (Vec<f64>, f64) = match which {
        Estimate::Enest => (e.clone(), e[0] + norms.f),
        Estimate::EnestEqpE => {
            let int = cumulative(report.times.get(1).map_or(0.0, |t| t - report.times[0]), &e);
            (e.iter().zip(&int).map(|(a, b)| a + b).collect(), e[0] + report.initial_extra + norms.f)
        }
        Estimate::EnestPrime | Estimate::EnestPrimeInhom => {
            let e1 = report.e1()?;
            let mut rhs = e1[0] + norms.f + norms.f_t;
            if which == Estimate::EnestPrimeInhom {
                rhs += norms.g + norms.g_t;
            }
            (e1, rhs)
        }
    };
    let mut best = (0.0, report.times[0]);
    for (l, t) in lhs.iter().zip(&report.times) {
        let c = if rhs > 0.0 {
            l / rhs
        } else if *l > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if c > best.0 {
            best = (c, *t);
        }
    }
    Ok(Audit { which, c_hat: best.0, t_argmax: best.1, rhs })
}

/// Which identity to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// Testing with the velocity.
    Enid,
    /// Testing with the state.
    Equipartition,
    /// `½‖p_t‖² + c²/2 ‖∇p‖²` balance, constant coefficients only.
    L2,
}

/// Per-step and accumulated residuals of an identity, relative to `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResidual {
    pub kind: Identity,
    /// `|r_n| / scale` for each step.
    pub per_step: Vec<f64>,
    /// `|Σ_{m<n} r_m| / scale` after each step.
    pub accumulated: Vec<f64>,
    pub scale: f64,
}

impl IdentityResidual {
    pub fn max_step(&self) -> f64 {
        self.per_step.iter().copied().fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.accumulated.iter().copied().fold(0.0, f64::max)
    }
}

/// Observed order from residual maxima at `Δt` and `Δt/2`.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Residual of the continuous identity along the trajectory, with every time
/// integral taken by the trapezoid rule on the trajectory grid. The error of that
/// rule makes the accumulated residual O(Δt²).
pub fn identity_residual(
    tr: &Trajectory,
    asm: &Assembler<'_>,
    loads: &Loads,
    kind: Identity,
) -> Result<IdentityResidual> {
    if asm.mode != Mode::Full {
        return Err(Error::constraint("/solver/mode", "identity residuals use the full assembly"));
    }
    if !tr.has_acceleration() {
        return Err(Error::MissingDerivative("identity residuals need stored accelerations".into()));
    }
    let n = tr.len();
    // e: the balanced quantity; g: its claimed time derivative
    let mut e = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    match kind {
        Identity::Enid | Identity::Equipartition => {
            for i in 0..n {
                let t = tr.times[i];
                let s = asm.sample(t)?;
                let m = asm.matrices(&s)?;
                let r = asm.rates(&s)?;
                let l = asm.load_with(&s, loads)?;
                let (u, v) = (&tr.u[i], &tr.v[i]);
                if kind == Identity::Enid {
                    e.push(0.5 * v.dot(&(&m.a * v)) + 0.5 * u.dot(&(&m.k * u)));
                    g.push(-v.dot(&(&m.b * v)) + v.dot(&l) + 0.5 * v.dot(&(&r.a * v)) + 0.5 * u.dot(&(&r.k * u)));
                } else {
                    e.push(u.dot(&(&m.a * v)));
                    g.push(v.dot(&(&m.a * v)) - u.dot(&(&m.b * v)) - u.dot(&(&m.k * u)) + u.dot(&l) + u.dot(&(&r.a * v)));
                }
            }
        }
        Identity::L2 => {
            if !asm.alpha.is_constant() {
                return Err(Error::constraint("/params/k", "the L2 identity is checked for k = 0"));
            }
            let basis = asm.basis;
            let p = &asm.params;
            let gm = &basis.grams;
            let na = tr.n_acoustic;
            let w = &basis.grid.volume.weights;
            for i in 0..n {
                let (u, v) = (&tr.u[i], &tr.v[i]);
                e.push(0.5 * v.dot(&(&gm.mass * v)) + 0.5 * p.c * p.c * u.dot(&(&gm.grad * u)));
                let mut rhs = -p.b * v.dot(&(&gm.grad * v));
                if let Some(f) = loads.f_at(tr.times[i]) {
                    let pv = crate::fields::node_values(basis, v);
                    rhs += w.iter().zip(&f).zip(&pv).map(|((w, f), x)| w * f * x).sum::<f64>();
                }
                // ∂_ν p = −ρ w̃ on the plate
                for k in 0..tr.n_plate {
                    let trace: f64 = (0..tr.dim()).map(|j| gm.trace[(k, j)] * v[j]).sum();
                    rhs -= p.rho * (p.c * p.c * u[na + k] + p.b * v[na + k]) * trace;
                }
                g.push(rhs);
            }
        }
    }
    let scale = e.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut per_step = Vec::with_capacity(n.saturating_sub(1));
    let mut accumulated = Vec::with_capacity(n.saturating_sub(1));
    let mut acc = 0.0;
    for i in 1..n {
        let dt = tr.times[i] - tr.times[i - 1];
        let r = e[i] - e[i - 1] - 0.5 * dt * (g[i] + g[i - 1]);
        acc += r;
        per_step.push(r.abs() / scale);
        accumulated.push(acc.abs() / scale);
    }
    Ok(IdentityResidual { kind, per_step, accumulated, scale })
}

/// Time averages over `[t0, t1]` of `vᵀAv` and `uᵀKu` for the matrices at `t0`,
/// integrated on the Hermite interpolant with Gauss nodes per step.
pub fn equipartition_averages(tr: &Trajectory, asm: &Assembler<'_>, t0: f64, t1: f64) -> Result<(f64, f64)> {
    if !(t1 > t0) || t1 > tr.end_time() + 1e-12 {
        return Err(Error::constraint("/window", "must lie inside the trajectory"));
    }
    let s = asm.snapshot(t0)?;
    let (mut kin, mut pot) = (0.0, 0.0);
    let mut a = t0;
    while a < t1 {
        let b = ((a / tr.dt).floor() + 1.0) * tr.dt;
        let b = if b - a < 1e-12 * tr.dt { a + tr.dt } else { b }.min(t1);
        let (ts, ws) = gauss_interval(4, a, b);
        for (t, w) in ts.iter().zip(&ws) {
            let (u, v) = tr.state_at(*t);
            kin += w * v.dot(&(&s.a * &v));
            pot += w * u.dot(&(&s.k * &u));
        }
        a = b;
    }
    let len = t1 - t0;
    Ok((kin / len, pot / len))
}

/// `‖g‖²_{H^{−1/2}(Γ_pl)} = Σ μ_i^{−1/2} g_i²` for plate-mode coefficients.
pub fn trace_norm_neg_half(g: &[f64], basis: &BasisSet) -> f64 {
    g.iter().enumerate().map(|(i, v)| v * v / basis.mu(i).sqrt()).sum()
}

/// `sup_t ‖∂_ν p‖_{H^{−1/2}(Γ_pl)} / (‖∇p‖ + ‖Δp‖)`. Acoustic modes have zero normal
/// derivative on the plate, so `∂_ν p = −ρ w̃` there.
pub fn trace_ratio(tr: &Trajectory, basis: &BasisSet) -> f64 {
    let na = tr.n_acoustic;
    let g = &basis.grams;
    let mut best: f64 = 0.0;
    for u in &tr.u {
        let w: Vec<f64> = (0..tr.n_plate).map(|k| -basis.rho * u[na + k]).collect();
        let num = trace_norm_neg_half(&w, basis).sqrt();
        let den = quad(&g.grad, u).sqrt() + quad(&g.lap, u).sqrt();
        if den > 0.0 {
            best = best.max(num / den);
        }
    }
    best
}

/// Least-squares slope of `ln E` on `[t0, t1]` and the coefficient of determination.
/// A constant series has rate 0 and goodness 0.
pub fn fit_decay(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= t0 - 1e-12 && **t <= t1 + 1e-12)
        .map(|(t, v)| (*t, *v))
        .collect();
    if let Some((t, _)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonpositiveEnergy { t: *t });
    }
    if pts.len() < 2 {
        return Err(Error::constraint("/window", "needs at least two samples"));
    }
    let n = pts.len() as f64;
    let ys: Vec<f64> = pts.iter().map(|(_, v)| v.ln()).collect();
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for ((t, _), y) in pts.iter().zip(&ys) {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    let rate = sty / stt;
    if syy <= 1e-24 * n * (1.0 + ym * ym) {
        return Ok((0.0, 0.0));
    }
    let res: f64 = pts.iter().zip(&ys).map(|((t, _), y)| (y - ym - rate * (t - tm)).powi(2)).sum();
    Ok((rate, 1.0 - res / syy))
}
