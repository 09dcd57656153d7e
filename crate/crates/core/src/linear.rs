//! Newmark time integration of the semi-discrete system, the boundary lifting and
//! compatibility data.
//!
//! Each step uses the average-acceleration scheme in midpoint form: with
//! `ā = (u''_n + u''_{n+1}) / 2`,
//!
//! ```text
//! (A + Δt/2 B + Δt²/4 K) ā = L − B v − K (u + Δt/2 v)      all at t + Δt/2
//! u₁ = u + Δt v + Δt²/2 ā,   v₁ = v + Δt ā
//! ```
//!
//! and the stored acceleration solves the point equation at `t + Δt`.

use crate::assembly::{Assembler, Mode, Snapshot};
use crate::basis::{BasisSet, SeparableLift, Source, Truncation, EXTENSION_CAP, EXTENSION_TOL};
use crate::error::{Error, Result};
use crate::fields::{CoefficientField, Loads, NodeOffset};
use crate::geometry::Label;
use crate::params::Params;
use crate::signals::{ResolvedSignal, SignalKind};
use crate::trajectory::Trajectory;
use nalgebra::{DMatrix, DVector, Dyn, LU};
use std::sync::Arc;

/// Modal initial data. The lifted part of `p0`, `p1` is `w0`, `w1` by construction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InitialData {
    pub p0: Vec<f64>,
    pub p1: Vec<f64>,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
}

impl InitialData {
    pub fn zeros(na: usize, np: usize) -> Self {
        InitialData { p0: vec![0.0; na], p1: vec![0.0; na], w0: vec![0.0; np], w1: vec![0.0; np] }
    }

    /// Pad to the basis sizes; longer lists are rejected.
    pub fn fitted(&self, na: usize, np: usize) -> Result<Self> {
        let fit = |v: &[f64], n: usize, name: &str| {
            if v.len() > n {
                return Err(Error::constraint(
                    &format!("/initial/{name}"),
                    format!("{} coefficients for a basis of {n}", v.len()),
                ));
            }
            let mut w = v.to_vec();
            w.resize(n, 0.0);
            Ok(w)
        };
        Ok(InitialData {
            p0: fit(&self.p0, na, "p0")?,
            p1: fit(&self.p1, na, "p1")?,
            w0: fit(&self.w0, np, "wtil0")?,
            w1: fit(&self.w1, np, "wtil1")?,
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &[f64]| v.iter().map(|x| x * s).collect();
        InitialData { p0: f(&self.p0), p1: f(&self.p1), w0: f(&self.w0), w1: f(&self.w1) }
    }

    pub fn u0(&self) -> DVector<f64> {
        DVector::from_iterator(self.p0.len() + self.w0.len(), self.p0.iter().chain(&self.w0).copied())
    }

    pub fn v0(&self) -> DVector<f64> {
        DVector::from_iterator(self.p1.len() + self.w1.len(), self.p1.iter().chain(&self.w1).copied())
    }

    pub fn is_zero(&self) -> bool {
        [&self.p0, &self.p1, &self.w0, &self.w1].iter().all(|v| v.iter().all(|x| *x == 0.0))
    }
}

/// One stored sample.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub a: DVector<f64>,
}

fn factor(m: DMatrix<f64>, what: &str, t: f64) -> Result<LU<f64, Dyn, Dyn>> {
    let lu = m.lu();
    if !lu.is_invertible() {
        return Err(Error::SolveFailure(format!("singular {what} at t = {t}")));
    }
    Ok(lu)
}

fn solve(lu: &LU<f64, Dyn, Dyn>, rhs: &DVector<f64>, what: &str, t: f64) -> Result<DVector<f64>> {
    match lu.solve(rhs) {
        Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x),
        _ => Err(Error::SolveFailure(format!("{what} at t = {t}"))),
    }
}

fn effective(s: &Snapshot, dt: f64) -> DMatrix<f64> {
    &s.a + &s.b * (0.5 * dt) + &s.k * (0.25 * dt * dt)
}

/// Time stepper bound to an assembler, loads and step size. Factorizations are reused
/// when the coefficients are constant.
pub struct Integrator<'a> {
    asm: &'a Assembler<'a>,
    loads: &'a Loads,
    dt: f64,
    fixed: Option<(Arc<Snapshot>, LU<f64, Dyn, Dyn>, LU<f64, Dyn, Dyn>)>,
}

impl<'a> Integrator<'a> {
    pub fn new(asm: &'a Assembler<'a>, loads: &'a Loads, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::constraint("/time/dt", "must be positive"));
        }
        let fixed = if asm.alpha.is_constant() {
            let s = asm.snapshot(0.0)?;
            let a = factor(s.a.clone(), "mass matrix", 0.0)?;
            let e = factor(effective(&s, dt), "effective matrix", 0.0)?;
            Some((s, a, e))
        } else {
            None
        };
        Ok(Integrator { asm, loads, dt, fixed })
    }

    /// `ü` from the point equation at `t`.
    pub fn acceleration(&self, t: f64, u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let (s, l) = self.asm.system(t, self.loads)?;
        let rhs = l - &s.b * v - &s.k * u;
        match &self.fixed {
            Some((_, a, _)) => solve(a, &rhs, "acceleration solve", t),
            None => solve(&factor(s.a.clone(), "mass matrix", t)?, &rhs, "acceleration solve", t),
        }
    }

    pub fn step(&self, t: f64, x: &State) -> Result<State> {
        let dt = self.dt;
        let tm = t + 0.5 * dt;
        let (s, l) = self.asm.system(tm, self.loads)?;
        let rhs = l - &s.b * &x.v - &s.k * (&x.u + &x.v * (0.5 * dt));
        let abar = match &self.fixed {
            Some((_, _, e)) => solve(e, &rhs, "step solve", tm)?,
            None => solve(&factor(effective(&s, dt), "effective matrix", tm)?, &rhs, "step solve", tm)?,
        };
        let u = &x.u + &x.v * dt + &abar * (0.5 * dt * dt);
        let v = &x.v + &abar * dt;
        let a = self.acceleration(t + dt, &u, &v)?;
        Ok(State { u, v, a })
    }

    /// `steps` steps from `(u0, v0)` at t = 0; the initial acceleration is computed.
    pub fn run(&self, u0: DVector<f64>, v0: DVector<f64>, steps: usize) -> Result<Trajectory> {
        let n = self.asm.dim();
        if u0.len() != n || v0.len() != n {
            return Err(Error::ShapeMismatch(format!("initial data of length {} for dimension {n}", u0.len())));
        }
        let na = self.asm.basis.n_acoustic().min(n);
        let mut tr = Trajectory {
            dt: self.dt,
            times: Vec::with_capacity(steps + 1),
            u: Vec::with_capacity(steps + 1),
            v: Vec::with_capacity(steps + 1),
            a: Vec::with_capacity(steps + 1),
            n_acoustic: na,
            n_plate: n - na,
        };
        if self.fixed.is_some() && self.loads.is_zero() && u0.iter().chain(v0.iter()).all(|x| *x == 0.0) {
            return Ok(Trajectory::zeros(self.dt, steps, na, n - na));
        }
        let a0 = self.acceleration(0.0, &u0, &v0)?;
        let mut x = State { u: u0, v: v0, a: a0 };
        for i in 0..=steps {
            let t = i as f64 * self.dt;
            tr.times.push(t);
            tr.u.push(x.u.clone());
            tr.v.push(x.v.clone());
            tr.a.push(x.a.clone());
            if i < steps {
                x = self.step(t, &x)?;
            }
        }
        Ok(tr)
    }
}

/// Integrate `A u'' + B u' + K u = L` from `(u0, v0)`.
pub fn integrate(
    asm: &Assembler<'_>,
    loads: &Loads,
    u0: DVector<f64>,
    v0: DVector<f64>,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    Integrator::new(asm, loads, dt)?.run(u0, v0, steps)
}

/// Plate loads `h̃ = h_tt` from the plate signals.
pub fn plate_loads(basis: &BasisSet, signals: &[ResolvedSignal]) -> Result<Loads> {
    let mut loads = Loads::default();
    let face = basis.geometry.plate_face();
    let axes = basis.geometry.tangential_axes(face);
    let pts = basis.grid.face(face).points.clone();
    for s in signals.iter().filter(|s| s.kind == SignalKind::Plate) {
        if s.temporal.is_zero() || s.amp == 0.0 {
            continue;
        }
        let profile: Vec<f64> = match s.plate_index {
            Some(k) => {
                let col = basis.plate_nodes.get(k).ok_or_else(|| {
                    Error::constraint("/signals", format!("plate mode {} outside a basis of {}", k + 1, basis.n_plate()))
                })?;
                col.iter().map(|v| s.amp * v).collect()
            }
            None => pts.iter().map(|x| s.profile(x, &axes)).collect(),
        };
        let temporal = s.temporal.clone();
        loads.h.push(Arc::new(move |t| {
            let h2 = temporal.jet(t)[2];
            profile.iter().map(|p| p * h2).collect()
        }));
    }
    Ok(loads)
}

/// Spatial liftings `H_o` of the Dirichlet and Neumann data, sampled at the nodes.
pub fn build_offsets(basis: &BasisSet, signals: &[ResolvedSignal]) -> Result<Vec<Arc<NodeOffset>>> {
    let geom = &basis.geometry;
    let mut out = Vec::new();
    for s in signals {
        let source = match s.kind {
            SignalKind::Plate => continue,
            SignalKind::Absorbing => {
                if s.temporal.is_zero() || s.amp == 0.0 {
                    continue;
                }
                return Err(Error::UnsupportedSignal(format!(
                    "absorbing data on {} has no separable lifting",
                    s.face.name()
                )));
            }
            SignalKind::Dirichlet => Source::Dirichlet,
            SignalKind::Neumann => Source::Neumann,
        };
        if s.temporal.is_zero() || s.amp == 0.0 {
            continue;
        }
        if geom.has(Label::Absorbing) {
            return Err(Error::UnsupportedSignal("liftings next to an absorbing face".into()));
        }
        let lift = SeparableLift::new(
            geom,
            s.face,
            source,
            s.factors.clone(),
            s.amp,
            Truncation::Auto { tol: EXTENSION_TOL, cap: EXTENSION_CAP },
        )?;
        let vol = &basis.grid.volume.points;
        let plate = &basis.grid.face(geom.plate_face()).points;
        out.push(Arc::new(NodeOffset {
            volume: vol.iter().map(|x| lift.value(x)).collect(),
            volume_grad: vol.iter().map(|x| lift.grad(x)).collect(),
            laplacian: lift.laplacian(),
            plate: plate.iter().map(|x| lift.value(x)).collect(),
            projection: basis.acoustic.iter().map(|m| lift.mass_with_acoustic(m)).collect(),
            temporal: s.temporal.clone(),
        }));
    }
    Ok(out)
}

/// The lifting `p̄ = p̂ + Σ H_o s_o(t)` with `p̂` in the acoustic span.
#[derive(Debug, Clone)]
pub struct Lifting {
    pub offsets: Vec<Arc<NodeOffset>>,
    /// `p̂`, padded with zero plate coefficients.
    pub hat: Trajectory,
}

impl Lifting {
    pub fn is_zero(&self) -> bool {
        self.offsets.is_empty()
    }

    /// `p̄` as acoustic coefficients: `p̂` plus the L² projections of the liftings.
    pub fn projected(&self) -> Trajectory {
        let mut t = self.hat.clone();
        for o in &self.offsets {
            let proj = DVector::from_fn(t.dim(), |j, _| o.projection.get(j).copied().unwrap_or(0.0));
            for (i, time) in self.hat.times.iter().enumerate() {
                let j = o.temporal.jet(*time);
                t.u[i] += &proj * j[0];
                t.v[i] += &proj * j[1];
                if let Some(a) = t.a.get_mut(i) {
                    *a += &proj * j[2];
                }
            }
        }
        t
    }

    /// `κ p̄_tt` on the plate face, from the stored accelerations of `p̂`.
    pub fn plate_forcing(&self, basis: &BasisSet, kappa: f64) -> Loads {
        if self.is_zero() {
            return Loads::default();
        }
        let face = basis.geometry.plate_face();
        let pts = &basis.grid.face(face).points;
        let table: Vec<Vec<f64>> = basis.acoustic.iter().map(|m| pts.iter().map(|x| m.value(x)).collect()).collect();
        let hat = self.hat.clone();
        let offsets = self.offsets.clone();
        let mut loads = Loads::default();
        loads.h.push(Arc::new(move |t| {
            let a = hat.accel_at(t);
            let mut out = vec![0.0; table.first().map_or(0, Vec::len)];
            for (j, col) in table.iter().enumerate() {
                for (o, v) in out.iter_mut().zip(col) {
                    *o += a[j] * v;
                }
            }
            for off in &offsets {
                let s2 = off.temporal.jet(t)[2];
                for (o, v) in out.iter_mut().zip(&off.plate) {
                    *o += s2 * v;
                }
            }
            out.iter().map(|v| kappa * v).collect()
        }));
        loads
    }
}

/// Interior source of `p̂`: `-H s'' + ΔH (c² s + b s') / α` for every lifting.
fn lifting_loads(offsets: &[Arc<NodeOffset>], params: &Params) -> Loads {
    let mut loads = Loads::default();
    for o in offsets {
        let (h, t1) = (o.volume.clone(), o.temporal.clone());
        loads.f_over_alpha.push(Arc::new(move |t| {
            let s2 = t1.jet(t)[2];
            h.iter().map(|v| -v * s2).collect()
        }));
        if o.laplacian != 0.0 {
            let (lap, t2, n) = (o.laplacian, o.temporal.clone(), o.volume.len());
            let (c2, b) = (params.c * params.c, params.b);
            loads.f.push(Arc::new(move |t| {
                let j = t2.jet(t);
                vec![lap * (c2 * j[0] + b * j[1]); n]
            }));
        }
    }
    loads
}

/// Solve the lifting problem with coefficient α and zero initial data.
pub fn solve_lifting(
    basis: &BasisSet,
    params: Params,
    alpha: CoefficientField,
    offsets: Vec<Arc<NodeOffset>>,
    dt: f64,
    steps: usize,
) -> Result<Lifting> {
    let (na, np) = (basis.n_acoustic(), basis.n_plate());
    if offsets.is_empty() {
        return Ok(Lifting { offsets, hat: Trajectory::zeros(dt, steps, na, np) });
    }
    let asm = Assembler::acoustic(basis, params, alpha)?;
    let loads = lifting_loads(&offsets, &params);
    let mut u0 = DVector::zeros(na);
    let mut v0 = DVector::zeros(na);
    for o in &offsets {
        let j = o.temporal.jet(0.0);
        let proj = DVector::from_column_slice(&o.projection);
        u0 -= &proj * j[0];
        v0 -= &proj * j[1];
    }
    let hat = integrate(&asm, &loads, u0, v0, dt, steps)?;
    Ok(Lifting { offsets, hat: hat.padded(np) })
}

/// Coefficientwise `p̄ + p̃`; the plate block comes from `p̃`.
pub fn compose_solution(pbar: &Trajectory, ptilde: &Trajectory) -> Result<Trajectory> {
    ptilde.check_same_grid(pbar)?;
    let mut out = ptilde.clone();
    let na = ptilde.n_acoustic;
    let add = |dst: &mut Vec<DVector<f64>>, src: &Vec<DVector<f64>>| {
        for (d, s) in dst.iter_mut().zip(src) {
            let mut top = d.rows_mut(0, na);
            top += s.rows(0, na);
        }
    };
    add(&mut out.u, &pbar.u);
    add(&mut out.v, &pbar.v);
    if out.has_acceleration() && pbar.has_acceleration() {
        add(&mut out.a, &pbar.a);
    } else {
        out.a.clear();
    }
    Ok(out)
}

/// Everything needed for one linear solve of the coupled problem.
#[derive(Debug, Clone)]
pub struct Setup<'a> {
    pub basis: &'a BasisSet,
    pub params: Params,
    pub mode: Mode,
    pub signals: Vec<ResolvedSignal>,
    /// User loads: interior `f` and `h̃` from the plate signals.
    pub loads: Loads,
    pub initial: InitialData,
    pub offsets: Vec<Arc<NodeOffset>>,
    pub dt: f64,
    pub steps: usize,
}

impl<'a> Setup<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        basis: &'a BasisSet,
        params: Params,
        mode: Mode,
        signals: Vec<ResolvedSignal>,
        loads: Loads,
        initial: InitialData,
        dt: f64,
        steps: usize,
    ) -> Result<Self> {
        params.validate()?;
        let initial = initial.fitted(basis.n_acoustic(), basis.n_plate())?;
        let offsets = build_offsets(basis, &signals)?;
        let loads = loads.extend(plate_loads(basis, &signals)?);
        Ok(Setup { basis, params, mode, signals, loads, initial, offsets, dt, steps })
    }

    pub fn with_initial(&self, initial: InitialData) -> Result<Self> {
        Ok(Setup { initial: initial.fitted(self.basis.n_acoustic(), self.basis.n_plate())?, ..self.clone() })
    }
}

/// Result of one linear solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub ptilde: Trajectory,
    pub lifting: Lifting,
    /// `p̄ + p̃` with `p̄` projected onto the acoustic span.
    pub p: Trajectory,
}

/// Lifting, homogeneous solve and composition for a given α and extra interior loads.
pub fn solve_linear(setup: &Setup<'_>, alpha: CoefficientField, extra: Loads) -> Result<Solution> {
    let basis = setup.basis;
    let lifting = solve_lifting(basis, setup.params, alpha.clone(), setup.offsets.clone(), setup.dt, setup.steps)?;
    let loads = setup.loads.clone().extend(extra).extend(lifting.plate_forcing(basis, setup.params.kappa));
    let asm = Assembler::new(basis, setup.params, setup.mode, alpha)?;
    let ptilde = integrate(&asm, &loads, setup.initial.u0(), setup.initial.v0(), setup.dt, setup.steps)?;
    let p = compose_solution(&lifting.projected(), &ptilde)?;
    Ok(Solution { ptilde, lifting, p })
}

/// One condition of the compatibility report.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub name: String,
    pub residual: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compatibility {
    /// Acoustic coefficients of `p₂`.
    pub p2: DVector<f64>,
    pub w2: DVector<f64>,
    pub clauses: Vec<Clause>,
}

impl Compatibility {
    pub fn all_hold(&self) -> bool {
        self.clauses.iter().all(|c| c.holds)
    }
}

/// Tolerance of the compatibility report.
pub const COMPAT_TOL: f64 = 1e-8;

/// `p₂ = (c²Δp₀ + bΔp₁ + f(0)) / α(0)` projected onto the acoustic modes, and
/// `w̃₂ = (−δμ²w̃₀ − βμ^γ w̃₁ + κ p₂|Γ + h̃(0)) / ρ`, with a report of the
/// boundary conditions at t = 0.
///
/// Every basis function has zero normal derivative on the plate, so the
/// plate clause `∂_ν p₂ = −ρ w̃₂` reduces to `w̃₂ = 0` for the projected `p₂`.
pub fn compute_compatibility(
    basis: &BasisSet,
    params: &Params,
    alpha: &CoefficientField,
    initial: &InitialData,
    loads: &Loads,
    signals: &[ResolvedSignal],
) -> Result<Compatibility> {
    let (na, np) = (basis.n_acoustic(), basis.n_plate());
    let init = initial.fitted(na, np)?;
    let s = alpha.sample(basis, 0.0, 0.0)?;
    let w = &basis.grid.volume.weights;
    let nodes = &basis.nodes;
    let (u0, v0) = (init.u0(), init.v0());
    let f0 = loads.f_at(0.0);
    let g0 = loads.f_over_alpha_at(0.0);
    let mut p2 = DVector::zeros(na);
    for q in 0..w.len() {
        let (mut lp0, mut lp1) = (0.0, 0.0);
        for j in 0..u0.len() {
            lp0 += u0[j] * nodes.laplacian[j][q];
            lp1 += v0[j] * nodes.laplacian[j][q];
        }
        let mut val = params.c * params.c * lp0 + params.b * lp1;
        if let Some(f) = &f0 {
            val += f[q];
        }
        val /= s.alpha[q];
        if let Some(g) = &g0 {
            val += g[q];
        }
        for j in 0..na {
            p2[j] += w[q] * val * nodes.value[j][q];
        }
    }
    let pf = basis.grid.face(basis.geometry.plate_face());
    let h0 = loads.h_at(0.0);
    let mut w2 = DVector::zeros(np);
    for k in 0..np {
        let mu = basis.mu(k);
        let trace: f64 = (0..na).map(|j| basis.grams.trace[(k, j)] * p2[j]).sum();
        let h: f64 = h0
            .as_ref()
            .map_or(0.0, |h| pf.weights.iter().zip(h).zip(&basis.plate_nodes[k]).map(|((w, h), y)| w * h * y).sum());
        w2[k] = (-params.delta * mu * mu * init.w0[k] - params.beta * mu.powf(params.gamma) * init.w1[k]
            + params.kappa * trace
            + h)
            / params.rho;
    }
    let mut clauses = vec![Clause {
        name: "plate: normal derivative of p2 equals -rho w2".into(),
        residual: params.rho * w2.norm(),
        holds: false,
    }];
    for sig in signals {
        let j = sig.temporal.jet(0.0);
        let name = match sig.kind {
            SignalKind::Dirichlet => "dirichlet: p0, p1, p2 match g_D and its derivatives",
            SignalKind::Neumann => "neumann: normal derivatives of p0, p1, p2 match g_N",
            SignalKind::Absorbing => "absorbing: p1 + c dp0/dn = a(0), p2 + c dp1/dn = a_t(0)",
            SignalKind::Plate => continue,
        };
        let r = match sig.kind {
            // basis values vanish on Dirichlet faces and normal derivatives vanish elsewhere
            SignalKind::Dirichlet | SignalKind::Neumann => sig.amp.abs() * j[..3].iter().fold(0.0_f64, |m, v| m.max(v.abs())),
            _ => {
                let g = basis.grid.face(sig.face);
                let axes = basis.geometry.tangential_axes(sig.face);
                let mut r: f64 = 0.0;
                for x in &g.points {
                    let (mut p1, mut pp2) = (0.0, 0.0);
                    for jj in 0..na {
                        let phi = basis.value(jj, x);
                        p1 += v0[jj] * phi;
                        pp2 += p2[jj] * phi;
                    }
                    for i in 0..np {
                        p1 += v0[na + i] * basis.value(na + i, x);
                    }
                    let a = sig.profile(x, &axes);
                    r = r.max((p1 - a * j[0]).abs()).max((pp2 - a * j[1]).abs());
                }
                r
            }
        };
        clauses.push(Clause { name: name.into(), residual: r, holds: false });
    }
    for c in &mut clauses {
        c.holds = c.residual <= COMPAT_TOL;
    }
    Ok(Compatibility { p2, w2, clauses })
}
