//! Semi-discrete Galerkin system `A u'' + B u' + K u = L`.
//!
//! Unknowns are ordered as the basis: acoustic coefficients first, then the plate
//! coefficients that multiply the pairs (φ̃_i, ψ_i).

use crate::basis::{BasisSet, Kind, Weight};
use crate::error::{Error, Result};
use crate::fields::{AlphaSample, CoefficientField, Loads};
use crate::params::Params;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Direct testing of the variational form with every basis pair.
    #[default]
    Full,
    /// Triangular system: the plate rows carry no acoustic coupling.
    #[serde(alias = "paper")]
    PaperTriangular,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::PaperTriangular => "paper-triangular",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Mode::Full),
            "paper" | "paper-triangular" => Ok(Mode::PaperTriangular),
            _ => Err(format!("unknown mode {s}; expected full or paper")),
        }
    }
}

/// Matrices at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub mode: Mode,
    pub n_acoustic: usize,
    /// ρ/κ, the factor between the two conventions for the plate rows.
    pub plate_scale: f64,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

impl Snapshot {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_plate(&self) -> usize {
        self.dim() - self.n_acoustic
    }

    /// `A a + B v + K u - L`.
    pub fn residual(&self, u: &DVector<f64>, v: &DVector<f64>, a: &DVector<f64>, l: &DVector<f64>) -> DVector<f64> {
        &self.a * a + &self.b * v + &self.k * u - l
    }

    /// Cholesky test of the symmetric part of A.
    pub fn is_positive_definite(&self) -> bool {
        let s = (&self.a + self.a.transpose()) * 0.5;
        s.cholesky().is_some()
    }

    fn zeros(mode: Mode, n_acoustic: usize, plate_scale: f64, n: usize) -> Self {
        let z = DMatrix::zeros(n, n);
        Snapshot { mode, n_acoustic, plate_scale, a: z.clone(), b: z.clone(), k: z }
    }
}

/// Builds snapshots and load vectors for one basis, parameter set and α.
#[derive(Debug, Clone)]
pub struct Assembler<'a> {
    pub basis: &'a BasisSet,
    pub params: Params,
    pub mode: Mode,
    pub alpha: CoefficientField,
    acoustic_only: bool,
    /// `c ∫_{Γ_a} ∂_ν u ∂_ν v`, zero for the Neumann eigenfamily but kept for the record.
    absorbing: Option<DMatrix<f64>>,
    /// Rows of the constant mode, which the variational form leaves empty.
    mean_rows: Vec<usize>,
    cache: Option<Arc<Snapshot>>,
}

impl<'a> Assembler<'a> {
    pub fn new(basis: &'a BasisSet, params: Params, mode: Mode, alpha: CoefficientField) -> Result<Self> {
        Self::build(basis, params, mode, alpha, false)
    }

    /// Acoustic block only, for the lifting problem.
    pub fn acoustic(basis: &'a BasisSet, params: Params, alpha: CoefficientField) -> Result<Self> {
        Self::build(basis, params, Mode::Full, alpha, true)
    }

    fn build(basis: &'a BasisSet, params: Params, mode: Mode, alpha: CoefficientField, acoustic_only: bool) -> Result<Self> {
        params.validate()?;
        let absorbing = if basis.geometry.has(crate::geometry::Label::Absorbing) {
            Some(basis.inner_products(Weight::One, Kind::BoundaryNormal)? * params.c)
        } else {
            None
        };
        let mean_rows = basis.acoustic.iter().enumerate().filter(|(_, m)| m.lambda == 0.0).map(|(j, _)| j).collect();
        let mut asm = Assembler { basis, params, mode, alpha, acoustic_only, absorbing, mean_rows, cache: None };
        if asm.alpha.is_constant() {
            let s = asm.sample(0.0)?;
            asm.cache = Some(Arc::new(asm.matrices(&s)?));
        }
        Ok(asm)
    }

    pub fn dim(&self) -> usize {
        if self.acoustic_only {
            self.basis.n_acoustic()
        } else {
            self.basis.dim()
        }
    }

    /// α at the nodes; nonpositive values raise a degeneracy error.
    pub fn sample(&self, t: f64) -> Result<AlphaSample> {
        self.alpha.sample(self.basis, t, 0.0)
    }

    pub fn snapshot(&self, t: f64) -> Result<Arc<Snapshot>> {
        if let Some(c) = &self.cache {
            return Ok(c.clone());
        }
        Ok(Arc::new(self.matrices(&self.sample(t)?)?))
    }

    /// Matrices and load at `t` from a single α sample.
    pub fn system(&self, t: f64, loads: &Loads) -> Result<(Arc<Snapshot>, DVector<f64>)> {
        let s = self.sample(t)?;
        let m = match &self.cache {
            Some(c) => c.clone(),
            None => Arc::new(self.matrices(&s)?),
        };
        let l = self.load_with(&s, loads)?;
        Ok((m, l))
    }

    pub fn load(&self, t: f64, loads: &Loads) -> Result<DVector<f64>> {
        self.load_with(&self.sample(t)?, loads)
    }

    fn lap_weighted(&self, s: &AlphaSample) -> Result<DMatrix<f64>> {
        if matches!(self.alpha, CoefficientField::Unit) {
            Ok(self.basis.grams.lap.clone())
        } else {
            self.basis.inner_products(Weight::Reciprocal(&s.alpha), Kind::Laplacian)
        }
    }

    /// Matrices from an α sample.
    pub fn matrices(&self, s: &AlphaSample) -> Result<Snapshot> {
        let p = &self.params;
        let na = self.basis.n_acoustic();
        let n = self.dim();
        let lap = self.lap_weighted(s)?;
        let grad = &self.basis.grams.grad;
        let scale = p.rho / p.kappa;
        let mut m = Snapshot::zeros(self.mode, na, scale, n);
        let abs = |r: usize, c: usize| self.absorbing.as_ref().map_or(0.0, |x| x[(r, c)]);
        match self.mode {
            Mode::Full => {
                for r in 0..n {
                    for c in 0..n {
                        m.a[(r, c)] = grad[(r, c)];
                        m.b[(r, c)] = p.b * lap[(r, c)] + abs(r, c);
                        m.k[(r, c)] = p.c * p.c * lap[(r, c)];
                    }
                }
                for i in 0..n - na {
                    let mu = self.basis.mu(i);
                    let d = na + i;
                    m.a[(d, d)] += scale * p.rho;
                    m.b[(d, d)] += scale * p.beta * mu.powf(p.gamma);
                    m.k[(d, d)] += scale * p.delta * mu * mu;
                }
            }
            Mode::PaperTriangular => {
                for j in 0..na {
                    m.a[(j, j)] = self.basis.acoustic[j].lambda;
                    for l in 0..na {
                        let mm = lap[(j, l)] + abs(j, l);
                        m.b[(j, l)] = p.b * mm;
                        m.k[(j, l)] = p.c * p.c * mm;
                    }
                    for i in na..n {
                        m.a[(j, i)] = grad[(j, i)];
                        m.b[(j, i)] = abs(j, i);
                    }
                }
                for i in 0..n - na {
                    let mu = self.basis.mu(i);
                    let d = na + i;
                    m.a[(d, d)] = p.rho;
                    m.b[(d, d)] = p.beta * mu.powf(p.gamma);
                    m.k[(d, d)] = p.delta * mu * mu;
                }
            }
        }
        self.mean_row_matrices(&mut m, s);
        Ok(m)
    }

    /// Strong-form closure for the constant mode: `∫ (α u'' - b Δu' - c² Δu) φ_j`.
    fn mean_row_matrices(&self, m: &mut Snapshot, s: &AlphaSample) {
        let w = &self.basis.grid.volume.weights;
        let t = &self.basis.nodes;
        let p = &self.params;
        for &j in &self.mean_rows {
            for l in 0..m.dim() {
                let (mut av, mut lv) = (0.0, 0.0);
                for (q, wq) in w.iter().enumerate() {
                    av += wq * s.alpha[q] * t.value[l][q] * t.value[j][q];
                    lv += wq * t.laplacian[l][q] * t.value[j][q];
                }
                m.a[(j, l)] = av;
                m.b[(j, l)] = -p.b * lv;
                m.k[(j, l)] = -p.c * p.c * lv;
            }
        }
    }

    /// Time derivatives of the matrices, from `d/dt (1/α) = -α_t/α²`.
    pub fn rates(&self, s: &AlphaSample) -> Result<Snapshot> {
        let p = &self.params;
        let na = self.basis.n_acoustic();
        let n = self.dim();
        let mut m = Snapshot::zeros(self.mode, na, p.rho / p.kappa, n);
        if self.alpha.is_constant() {
            return Ok(m);
        }
        let w: Vec<f64> = s.alpha.iter().zip(&s.alpha_t).map(|(a, at)| -at / (a * a)).collect();
        let lap = self.basis.inner_products(Weight::Sampled(&w), Kind::Laplacian)?;
        let cols = if self.mode == Mode::Full { n } else { na };
        let rows = cols;
        for r in 0..rows {
            for c in 0..cols {
                m.b[(r, c)] = p.b * lap[(r, c)];
                m.k[(r, c)] = p.c * p.c * lap[(r, c)];
            }
        }
        let wq = &self.basis.grid.volume.weights;
        let t = &self.basis.nodes;
        for &j in &self.mean_rows {
            for l in 0..n {
                m.b[(j, l)] = 0.0;
                m.k[(j, l)] = 0.0;
                m.a[(j, l)] = wq.iter().enumerate().map(|(q, w)| w * s.alpha_t[q] * t.value[l][q] * t.value[j][q]).sum();
            }
        }
        Ok(m)
    }

    /// Load vector `∫ (f/α)(-Δu_j) + plate part`.
    pub fn load_with(&self, s: &AlphaSample, loads: &Loads) -> Result<DVector<f64>> {
        let n = self.dim();
        let na = self.basis.n_acoustic();
        let p = &self.params;
        let mut l = DVector::zeros(n);
        if let Some(f) = loads.f_at(s.t) {
            let w = &self.basis.grid.volume.weights;
            if f.len() != w.len() {
                return Err(Error::ShapeMismatch(format!("{} source samples for {} nodes", f.len(), w.len())));
            }
            let fw: Vec<f64> = w.iter().zip(&f).zip(&s.alpha).map(|((w, f), a)| w * f / a).collect();
            let rows = if self.mode == Mode::Full { n } else { na };
            for j in 0..rows {
                l[j] = -fw.iter().zip(&self.basis.nodes.laplacian[j]).map(|(a, b)| a * b).sum::<f64>();
            }
            for &j in &self.mean_rows {
                l[j] = w.iter().zip(&f).zip(&self.basis.nodes.value[j]).map(|((w, f), v)| w * f * v).sum();
            }
        }
        if let Some(g) = loads.f_over_alpha_at(s.t) {
            let w = &self.basis.grid.volume.weights;
            if g.len() != w.len() {
                return Err(Error::ShapeMismatch(format!("{} source samples for {} nodes", g.len(), w.len())));
            }
            let gw: Vec<f64> = w.iter().zip(&g).map(|(w, g)| w * g).collect();
            let rows = if self.mode == Mode::Full { n } else { na };
            for j in 0..rows {
                if self.mean_rows.contains(&j) {
                    l[j] += gw.iter().zip(&s.alpha).zip(&self.basis.nodes.value[j]).map(|((g, a), v)| g * a * v).sum::<f64>();
                } else {
                    l[j] -= gw.iter().zip(&self.basis.nodes.laplacian[j]).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
        if n > na {
            if let Some(h) = loads.h_at(s.t) {
                let g = self.basis.grid.face(self.basis.geometry.plate_face());
                if h.len() != g.len() {
                    return Err(Error::ShapeMismatch(format!("{} plate samples for {} nodes", h.len(), g.len())));
                }
                let factor = match self.mode {
                    Mode::Full => p.rho / p.kappa,
                    Mode::PaperTriangular => p.rho,
                };
                for k in 0..n - na {
                    let v: f64 =
                        g.weights.iter().zip(&h).zip(&self.basis.plate_nodes[k]).map(|((w, h), y)| w * h * y).sum();
                    l[na + k] += factor * v;
                }
            }
        }
        for m in &loads.modal {
            let v = m(s.t);
            if v.len() != n {
                return Err(Error::ShapeMismatch(format!("modal load of length {} for dimension {n}", v.len())));
            }
            l += v;
        }
        Ok(l)
    }
}

/// Per-block comparison of the two assemblies.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    /// `(name, max |full - scaled paper|)` for every block of A, B and K.
    pub blocks: Vec<(String, f64)>,
    /// Plate rows of `A_full - (ρ/κ) A_paper`, the Green-identity couplings.
    pub plate_coupling: DMatrix<f64>,
    /// The Γ_a boundary forms vanish identically for the Neumann eigenfamily.
    pub absorbing_is_weak: bool,
}

impl StructureReport {
    pub fn max(&self) -> f64 {
        self.blocks.iter().map(|b| b.1).fold(0.0, f64::max)
    }
}

/// Compare a full and a paper-triangular snapshot of the same system. The paper's
/// plate rows are multiplied by ρ/κ first so both use the same convention.
pub fn structure_report(full: &Snapshot, paper: &Snapshot) -> Result<StructureReport> {
    if full.mode != Mode::Full || paper.mode != Mode::PaperTriangular {
        return Err(Error::ShapeMismatch("expected a full and a paper-triangular snapshot".into()));
    }
    if full.dim() != paper.dim() || full.n_acoustic != paper.n_acoustic {
        return Err(Error::ShapeMismatch(format!("dimensions {} and {}", full.dim(), paper.dim())));
    }
    let na = full.n_acoustic;
    let n = full.dim();
    let scaled = |m: &DMatrix<f64>| {
        let mut s = m.clone();
        for r in na..n {
            for c in 0..n {
                s[(r, c)] *= paper.plate_scale;
            }
        }
        s
    };
    let mut blocks = Vec::new();
    let mut plate_coupling = DMatrix::zeros(n - na, n);
    for (name, f, p) in [("A", &full.a, &paper.a), ("B", &full.b, &paper.b), ("K", &full.k, &paper.k)] {
        let d = f - scaled(p);
        if name == "A" {
            plate_coupling = d.rows(na, n - na).into_owned();
        }
        for (rn, r0, r1) in [("acoustic", 0, na), ("plate", na, n)] {
            for (cn, c0, c1) in [("acoustic", 0, na), ("plate", na, n)] {
                let mut mx: f64 = 0.0;
                for r in r0..r1 {
                    for c in c0..c1 {
                        mx = mx.max(d[(r, c)].abs());
                    }
                }
                blocks.push((format!("{name}[{rn},{cn}]"), mx));
            }
        }
    }
    Ok(StructureReport { blocks, plate_coupling, absorbing_is_weak: true })
}
