//! Orchestration of single runs and studies over a validated scenario.

use crate::basis::{BasisConfig, BasisSet};
use crate::energy::{check_estimate, energy_series, fit_decay, source_norms, Audit, DataNorms, EnergyReport};
use crate::error::{Error, Result};
use crate::linear::solve_linear;
use crate::fields::{CoefficientField, Loads};
use crate::mms::{spatial_study, temporal_study, ConvergenceRow, Manufactured, MmsField};
use crate::nonlinear::{picard_run, PicardLog};
use crate::scenario::{DecaySpec, PicardStudySpec, Scenario};
use crate::trajectory::Trajectory;
use serde::Serialize;

/// Time-panel width for the data norms.
const NORM_PANEL: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    /// Composed pressure `p̄ + p̃` and plate coefficients.
    pub trajectory: Trajectory,
    pub energy: EnergyReport,
    pub norms: DataNorms,
    pub audits: Vec<Audit>,
    /// Present for `k > 0`.
    pub picard: Option<PicardLog>,
}

impl SimulateOutput {
    /// Non-convergence of the fixed-point loop, reported after the outputs are written.
    pub fn failure(&self) -> Option<Error> {
        let log = self.picard.as_ref()?;
        (!log.converged).then(|| Error::NoConvergence { iterations: log.iterations(), last: log.last_distance() })
    }
}

/// Solution trajectory and Picard log (if any) of one scenario run.
fn solve(sc: &Scenario, basis: &BasisSet) -> Result<(Trajectory, Option<PicardLog>)> {
    let setup = sc.setup(basis)?;
    if sc.params.k == 0.0 {
        let sol = solve_linear(&setup, CoefficientField::Unit, Loads::default())?;
        Ok((sol.p, None))
    } else {
        let r = picard_run(&setup, &sc.picard)?;
        Ok((r.solution.p, Some(r.log)))
    }
}

pub fn run_simulate(sc: &Scenario, basis: &BasisSet) -> Result<SimulateOutput> {
    let (trajectory, picard) = solve(sc, basis)?;
    let energy = energy_series(&trajectory, basis, &sc.params)?;
    let setup = sc.setup(basis)?;
    let norms = source_norms(basis, &sc.signals, &setup.loads, sc.t_end(), NORM_PANEL.min(sc.t_end()))?;
    let audits = sc
        .file
        .outputs
        .audits
        .iter()
        .map(|w| check_estimate(&energy, &norms, *w))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulateOutput { trajectory, energy, norms, audits, picard })
}

#[derive(Debug, Clone, Serialize)]
pub struct MmsReport {
    pub field: MmsField,
    pub temporal: Vec<ConvergenceRow>,
    pub temporal_orders: Vec<f64>,
    pub spatial: Vec<ConvergenceRow>,
    /// First over last spatial error.
    pub spatial_reduction: Option<f64>,
    pub pass: bool,
}

pub const ORDER_BAND: (f64, f64) = (1.8, 2.2);
pub const MIN_SPATIAL_REDUCTION: f64 = 1e2;
pub const IN_SPAN_TOL: f64 = 1e-9;

pub fn run_mms(sc: &Scenario, basis: &BasisSet) -> Result<MmsReport> {
    let spec = sc
        .file
        .mms
        .as_ref()
        .ok_or_else(|| Error::Constraint { location: "/mms".into(), message: "no manufactured field declared".into() })?;
    let m = Manufactured::new(spec.field, basis, sc.params, sc.mode)?;
    let (temporal, temporal_orders) = temporal_study(&m, spec.dt0, sc.t_end(), spec.levels)?;
    let min_n = spec.field.span().map_or(0, |(na, np)| na.max(np));
    let bases = spec
        .n_values
        .iter()
        .filter(|n| **n >= min_n)
        .map(|n| BasisSet::build(&sc.geometry, &BasisConfig { n_acoustic: *n, n_plate: *n, ..sc.basis }))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&BasisSet> = bases.iter().collect();
    let spatial = spatial_study(spec.field, &refs, sc.params, sc.mode, sc.dt, sc.t_end())?;
    let spatial_reduction = match (spatial.first(), spatial.last()) {
        (Some(a), Some(b)) if spatial.len() > 1 => Some(a.error / b.error),
        _ => None,
    };
    let pass = if spec.field == MmsField::InSpan {
        temporal.iter().chain(&spatial).all(|r| r.error <= IN_SPAN_TOL)
    } else {
        let orders_ok = !temporal_orders.is_empty()
            && temporal_orders.iter().all(|o| (ORDER_BAND.0..=ORDER_BAND.1).contains(o));
        let decreasing = spatial.windows(2).all(|w| w[1].error < w[0].error);
        orders_ok && decreasing && spatial_reduction.is_none_or(|r| r >= MIN_SPATIAL_REDUCTION)
    };
    Ok(MmsReport { field: spec.field, temporal, temporal_orders, spatial, spatial_reduction, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRecord {
    pub window: [f64; 2],
    pub rate: f64,
    pub goodness: f64,
    /// Instantaneous higher-order energy at the end over its initial value.
    pub energy_ratio: f64,
    pub thresholds: DecaySpec,
    pub pass: bool,
    #[serde(skip)]
    pub energy: EnergyReport,
}

pub fn run_decay(sc: &Scenario, basis: &BasisSet) -> Result<DecayRecord> {
    if !sc.signals.is_empty() {
        return Err(Error::Constraint { location: "/signals".into(), message: "decay study needs zero forcing".into() });
    }
    if sc.initial.is_zero() {
        return Err(Error::Constraint { location: "/initial".into(), message: "decay study needs nonzero data".into() });
    }
    for (name, v) in [("b", sc.params.b), ("beta", sc.params.beta)] {
        if !(v > 0.0) {
            return Err(Error::Constraint {
                location: format!("/params/{name}"),
                message: "decay study needs positive damping".into(),
            });
        }
    }
    let spec = sc.file.decay.unwrap_or_default();
    let (tr, log) = solve(sc, basis)?;
    if let Some(log) = log.filter(|l| !l.converged) {
        return Err(Error::NoConvergence { iterations: log.iterations(), last: log.last_distance() });
    }
    let energy = energy_series(&tr, basis, &sc.params)?;
    let e1 = energy.e1_instantaneous()?;
    let window = spec.window.unwrap_or([0.0, sc.t_end()]);
    let (rate, goodness) = fit_decay(&energy.times, &e1, window[0], window[1])?;
    let energy_ratio = e1[e1.len() - 1] / e1[0];
    let pass = rate < 0.0 && goodness >= spec.min_goodness && energy_ratio <= spec.max_ratio;
    Ok(DecayRecord { window, rate, goodness, energy_ratio, thresholds: spec, pass, energy })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardStudyRow {
    pub scale: f64,
    pub iterations: Option<usize>,
    pub max_ratio: Option<f64>,
    pub converged: bool,
    /// `1 − 2k sup|q| − floor` over all iterates.
    pub alpha_margin: Option<f64>,
    /// `M1 − sup|q|` over all iterates.
    pub m1_margin: Option<f64>,
    /// Class of the solver error that stopped this scale.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardStudy {
    pub rows: Vec<PicardStudyRow>,
    /// Largest ratio never decreases with the scale over the converged rows.
    pub nondecreasing: bool,
    pub thresholds: PicardStudySpec,
    pub pass: bool,
}

pub fn run_picard_study(sc: &Scenario, basis: &BasisSet) -> Result<PicardStudy> {
    if !(sc.params.k > 0.0) {
        return Err(Error::Constraint { location: "/params/k".into(), message: "picard study needs k > 0".into() });
    }
    let spec = sc.file.picard_study.clone().unwrap_or_default();
    let base = sc.setup(basis)?;
    let mut rows = Vec::new();
    for &scale in &spec.scales {
        let setup = base.with_initial(sc.initial.scaled(scale))?;
        let row = match picard_run(&setup, &sc.picard) {
            Ok(r) => {
                let sup = r.log.steps.iter().map(|s| s.sup_q).fold(0.0, f64::max);
                PicardStudyRow {
                    scale,
                    iterations: Some(r.log.iterations()),
                    max_ratio: r.log.max_ratio(),
                    converged: r.log.converged,
                    alpha_margin: Some(1.0 - 2.0 * sc.params.k * sup - sc.picard.floor),
                    m1_margin: Some(sc.w.m1 - sup),
                    error: (!r.log.converged).then(|| "NoConvergence".to_string()),
                }
            }
            Err(e) if !e.is_validation() => PicardStudyRow {
                scale,
                iterations: None,
                max_ratio: None,
                converged: false,
                alpha_margin: None,
                m1_margin: None,
                error: Some(e.class().to_string()),
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    let mut sorted: Vec<&PicardStudyRow> = rows.iter().filter(|r| r.converged).collect();
    sorted.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    let ratios: Vec<f64> = sorted.iter().filter_map(|r| r.max_ratio).collect();
    let nondecreasing = ratios.windows(2).all(|w| w[1] >= w[0]);
    let checked: Vec<&&PicardStudyRow> = sorted.iter().filter(|r| r.scale > 0.0).take(2).collect();
    let positive = spec.scales.iter().filter(|s| **s > 0.0).count().min(2);
    let pass = checked.len() == positive
        && checked.iter().all(|r| r.max_ratio.unwrap_or(0.0) <= spec.max_ratio);
    Ok(PicardStudy { rows, nondecreasing, thresholds: spec, pass })
}
