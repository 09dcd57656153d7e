//! Fixed-point iteration for the quasilinear problem: freeze `α = 1 − 2kq` and
//! `f = 2k q_t²` from the previous iterate, solve the linear problem, repeat.

use crate::basis::BasisSet;
use crate::energy::{energy_series, EnergyReport};
use crate::error::{Error, Result};
use crate::fields::{frozen_q, CoefficientField, Loads, NodeOffset};
use crate::linear::{compose_solution, solve_linear, Clause, Setup, Solution};
use crate::params::Params;
use crate::trajectory::Trajectory;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

pub const DEFAULT_FLOOR: f64 = 0.25;

/// Bounds defining the admissible set of iterates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WSetParams {
    /// Sup-norm bound on `q`; requires `2k M1 < 1`.
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
}

impl WSetParams {
    pub fn new(m1: f64, m2: f64, m3: f64, k: f64) -> Result<Self> {
        for (name, v) in [("M1", m1), ("M2", m2), ("M3", m3)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::constraint(&format!("/solver/picard/{name}"), "must be positive"));
            }
        }
        if 2.0 * k * m1 >= 1.0 {
            return Err(Error::constraint(
                "/solver/picard/M1",
                &format!("W guard 2k*M1 < 1 fails: 2*{k}*{m1} = {}", 2.0 * k * m1),
            ));
        }
        Ok(WSetParams { m1, m2, m3 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub floor: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig { tol: 1e-10, max_iter: 20, floor: DEFAULT_FLOOR }
    }
}

/// One row of the iteration log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardStep {
    pub iter: usize,
    pub d: f64,
    /// `d_m / d_{m−1}`, from the second iteration on.
    pub ratio: Option<f64>,
    /// Grid-sampled sup of `|q|` for the frozen iterate.
    pub sup_q: f64,
    pub alpha_bar: f64,
    pub alpha_t2: f64,
    pub alpha_tinf: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PicardLog {
    pub steps: Vec<PicardStep>,
    pub converged: bool,
    /// Distance between the fixed point and one more application of the map.
    pub self_consistency: Option<f64>,
}

impl PicardLog {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn max_ratio(&self) -> Option<f64> {
        self.steps.iter().filter_map(|s| s.ratio).reduce(f64::max)
    }

    pub fn last_distance(&self) -> f64 {
        self.steps.last().map_or(f64::INFINITY, |s| s.d)
    }
}

/// Result of the fixed-point iteration, converged or not.
#[derive(Debug, Clone)]
pub struct Picard {
    pub solution: Solution,
    /// The last iterate as a frozen-coefficient source: `p̂ + p̃` with the liftings as offsets.
    pub q: Arc<Trajectory>,
    pub log: PicardLog,
}

/// `α = 1 − 2kq`, `f = 2k q_t²` from an iterate; fails if `α ≤ floor` at any stored time.
pub fn freeze_coefficients(
    basis: &BasisSet,
    k: f64,
    q: Arc<Trajectory>,
    offsets: Vec<Arc<NodeOffset>>,
    floor: f64,
) -> Result<(CoefficientField, Loads)> {
    if k == 0.0 {
        return Ok((CoefficientField::Unit, Loads::default()));
    }
    let alpha = CoefficientField::Frozen { k, q: q.clone(), offsets: offsets.clone() };
    for t in &q.times {
        alpha.sample(basis, *t, floor)?;
    }
    let loads = Loads::default().with_frozen_f(basis, k, q, offsets);
    Ok((alpha, loads))
}

/// Iterate as a frozen-coefficient source.
fn as_source(sol: &Solution) -> Result<Arc<Trajectory>> {
    Ok(Arc::new(compose_solution(&sol.lifting.hat, &sol.ptilde)?))
}

fn sup_abs(basis: &BasisSet, q: &Trajectory, offsets: &[Arc<NodeOffset>]) -> f64 {
    let table = &basis.nodes.value;
    q.times
        .iter()
        .map(|t| frozen_q(table, q, offsets, *t).0.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
        .fold(0.0, f64::max)
}

/// `sup_t √(𝓔ᵖ + 𝓔ʷ)` of the difference, instantaneous terms only.
pub fn u_distance(a: &Trajectory, b: &Trajectory, basis: &BasisSet, params: &Params) -> Result<f64> {
    let mut diff = a.minus(b)?;
    diff.a.clear();
    let r = energy_series(&diff, basis, params)?;
    Ok((0..r.len()).map(|i| r.instantaneous(i)).fold(0.0, f64::max).sqrt())
}

/// α(0) from the initial data, checked before any time step.
fn check_initial_alpha(setup: &Setup<'_>, floor: f64) -> Result<()> {
    let k = setup.params.k;
    if k == 0.0 {
        return Ok(());
    }
    let q = Trajectory {
        dt: setup.dt,
        times: vec![0.0],
        u: vec![setup.initial.u0()],
        v: vec![setup.initial.v0()],
        a: vec![],
        n_acoustic: setup.basis.n_acoustic(),
        n_plate: setup.basis.n_plate(),
    };
    let alpha = CoefficientField::Frozen { k, q: Arc::new(q), offsets: setup.offsets.clone() };
    alpha.sample(setup.basis, 0.0, floor).map(|_| ())
}

/// Runs the iteration from the `k = 0` solution until `d ≤ tol` or `max_iter`.
pub fn picard_run(setup: &Setup<'_>, cfg: &PicardConfig) -> Result<Picard> {
    if !(cfg.tol > 0.0) {
        return Err(Error::constraint("/solver/picard/tol", "must be positive"));
    }
    if cfg.max_iter == 0 {
        return Err(Error::constraint("/solver/picard/max_iter", "must be positive"));
    }
    check_initial_alpha(setup, cfg.floor)?;
    let basis = setup.basis;
    let p = setup.params;
    let mut sol = solve_linear(setup, CoefficientField::Unit, Loads::default())?;
    let mut q = as_source(&sol)?;
    let mut log = PicardLog::default();
    let times = q.times.clone();
    for iter in 1..=cfg.max_iter {
        let clock = Instant::now();
        let (alpha, extra) = freeze_coefficients(basis, p.k, q.clone(), setup.offsets.clone(), cfg.floor)?;
        let stats = alpha_admissibility(&alpha, basis, &times)?;
        let next = solve_linear(setup, alpha, extra)?;
        let d = u_distance(&next.p, &sol.p, basis, &p)?;
        let ratio = log.steps.last().map(|s: &PicardStep| if s.d > 0.0 { d / s.d } else { 0.0 });
        log.steps.push(PicardStep {
            iter,
            d,
            ratio,
            sup_q: sup_abs(basis, &q, &setup.offsets),
            alpha_bar: stats.alpha_bar,
            alpha_t2: stats.alpha_t2,
            alpha_tinf: stats.alpha_tinf,
            seconds: clock.elapsed().as_secs_f64(),
        });
        q = as_source(&next)?;
        sol = next;
        if d <= cfg.tol {
            log.converged = true;
            break;
        }
    }
    if log.converged {
        let (alpha, extra) = freeze_coefficients(basis, p.k, q.clone(), setup.offsets.clone(), cfg.floor)?;
        let again = solve_linear(setup, alpha, extra)?;
        log.self_consistency = Some(u_distance(&again.p, &sol.p, basis, &p)?);
    }
    Ok(Picard { solution: sol, q, log })
}

/// [`picard_run`], with non-convergence as an error.
pub fn picard_solve(setup: &Setup<'_>, cfg: &PicardConfig) -> Result<Picard> {
    let r = picard_run(setup, cfg)?;
    if !r.log.converged {
        return Err(Error::NoConvergence { iterations: r.log.iterations(), last: r.log.last_distance() });
    }
    Ok(r)
}

/// Coefficient statistics: `ᾱ = ‖α_t/α‖_{L¹(L∞)}`, `α̃₂ = ‖α^{−3/2}∇α‖_{L²(L³)}`,
/// `α̃∞ = ‖α^{−3/2}∇α‖_{L∞(L³)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaStats {
    pub min: f64,
    pub max: f64,
    pub alpha_bar: f64,
    pub alpha_t2: f64,
    pub alpha_tinf: f64,
    /// `ᾱ < 1/4`.
    pub bar_quarter: bool,
    /// `ᾱ < 1/2`.
    pub bar_half: bool,
    /// `α̃₂, α̃∞ < 1/4`.
    pub tilde_quarter: bool,
}

/// Space integrals by quadrature, time integrals by the trapezoid rule on `times`.
pub fn alpha_admissibility(alpha: &CoefficientField, basis: &BasisSet, times: &[f64]) -> Result<AlphaStats> {
    if times.is_empty() {
        return Err(Error::constraint("/time", "needs at least one sample"));
    }
    let w = &basis.grid.volume.weights;
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut rate = Vec::with_capacity(times.len());
    let mut l3 = Vec::with_capacity(times.len());
    for t in times {
        let s = alpha.sample(basis, *t, 0.0)?;
        for a in &s.alpha {
            min = min.min(*a);
            max = max.max(*a);
        }
        rate.push(s.alpha.iter().zip(&s.alpha_t).map(|(a, at)| (at / a).abs()).fold(0.0, f64::max));
        if alpha.is_constant() {
            l3.push(0.0);
            continue;
        }
        let g = alpha.gradient(basis, *t);
        let cube: f64 = g
            .iter()
            .zip(&s.alpha)
            .zip(w)
            .map(|((g, a), w)| w * (g.iter().map(|x| x * x).sum::<f64>().sqrt() * a.powf(-1.5)).powi(3))
            .sum();
        l3.push(cube.cbrt());
    }
    let trap = |f: &[f64]| -> f64 { (1..times.len()).map(|i| 0.5 * (times[i] - times[i - 1]) * (f[i] + f[i - 1])).sum() };
    let alpha_bar = trap(&rate);
    let sq: Vec<f64> = l3.iter().map(|x| x * x).collect();
    let alpha_t2 = trap(&sq).sqrt();
    let alpha_tinf = l3.iter().copied().fold(0.0, f64::max);
    Ok(AlphaStats {
        min,
        max,
        alpha_bar,
        alpha_t2,
        alpha_tinf,
        bar_quarter: alpha_bar < 0.25,
        bar_half: alpha_bar < 0.5,
        tilde_quarter: alpha_t2 < 0.25 && alpha_tinf < 0.25,
    })
}

/// Membership of an iterate in the admissible set.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub sup_q: f64,
    pub sup_energy: f64,
    pub sup_energy_t: f64,
    pub clauses: Vec<Clause>,
}

impl Membership {
    pub fn all_hold(&self) -> bool {
        self.clauses.iter().all(|c| c.holds)
    }
}

/// Sup-norm of `q` on the quadrature grid plus the two energy bounds. The boundary
/// conditions hold by construction of the Galerkin space and are not re-checked.
pub fn check_w_membership(
    p: &Trajectory,
    offsets: &[Arc<NodeOffset>],
    w: &WSetParams,
    basis: &BasisSet,
    params: &Params,
) -> Result<Membership> {
    let r: EnergyReport = energy_series(p, basis, params)?;
    let sup_q = sup_abs(basis, p, offsets);
    let sup_energy = r.totals().into_iter().fold(0.0, f64::max);
    let sup_energy_t = match &r.derived {
        Some(d) => d.totals().into_iter().fold(0.0, f64::max),
        None => return Err(Error::MissingDerivative("membership needs stored accelerations".into())),
    };
    let clause = |name: &str, v: f64, m: f64| Clause { name: name.into(), residual: v - m, holds: v <= m };
    Ok(Membership {
        sup_q,
        sup_energy,
        sup_energy_t,
        clauses: vec![
            clause("sup_q <= M1", sup_q, w.m1),
            clause("sup E[q] <= M2", sup_energy, w.m2),
            clause("sup E[q_t] <= M3", sup_energy_t, w.m3),
        ],
    })
}
