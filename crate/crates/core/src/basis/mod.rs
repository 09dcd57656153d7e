//! Galerkin space: acoustic eigenmodes, plate modes and their harmonic extensions.
//!
//! Functions of the pressure space are indexed `0..n_acoustic` for `φ_j` followed by
//! `n_acoustic..n` for the extensions `φ̃_i`; the plate part of the unknown lives on
//! the same trailing indices.

pub mod acoustic;
pub mod lift;
pub mod plate;

pub use acoustic::{axis_family, build_acoustic_basis, AcousticMode};
pub use lift::{Profile, SeparableLift, Source, Truncation};
pub use plate::{build_plate_basis, PlateMode};

use crate::error::{Error, Result};
use crate::geometry::{BoxGeometry, Face, Label};
use crate::quadrature::TensorGrid;
use nalgebra::DMatrix;

/// Boundary residual tolerance for extensions, relative to ρ.
pub const EXTENSION_TOL: f64 = 1e-8;
/// Per-axis term cap for automatic extension truncation.
pub const EXTENSION_CAP: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMode {
    /// Position of the plate mode in the plate basis.
    pub plate_index: usize,
    pub lift: SeparableLift,
}

impl LiftedMode {
    pub fn solvability_correction(&self) -> f64 {
        self.lift.correction
    }

    pub fn truncation(&self) -> &[usize] {
        &self.lift.trunc
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.lift.value(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        self.lift.grad(x)
    }
}

/// Harmonic extension of `-ρ ψ` from the plate into the box.
pub fn build_harmonic_extension(
    mode: &PlateMode,
    plate_index: usize,
    geom: &BoxGeometry,
    rho: f64,
    truncation: Truncation,
) -> Result<LiftedMode> {
    if let Truncation::Fixed(m) = truncation {
        let need = mode.index.iter().max().copied().unwrap_or(0) + 8;
        if m < need {
            return Err(Error::constraint(
                "/basis/extension_truncation",
                format!("must be at least plate index + 8 = {need}"),
            ));
        }
    }
    let tol = match truncation {
        Truncation::Auto { tol, .. } => tol,
        Truncation::Fixed(_) => EXTENSION_TOL,
    };
    let cap = match truncation {
        Truncation::Auto { cap, .. } => {
            if geom.dim() == 3 {
                // terms multiply across the two transverse axes
                cap.min(2_000)
            } else {
                cap
            }
        }
        Truncation::Fixed(_) => 0,
    };
    let tr = match truncation {
        Truncation::Auto { .. } => Truncation::Auto { tol, cap },
        t => t,
    };
    let lift = SeparableLift::new(geom, geom.plate_face(), Source::Neumann, mode.factors.clone(), -rho, tr)?;
    if lift.residual > tol * rho {
        return Err(Error::TruncationTooSmall { index: plate_index + 1, residual: lift.residual });
    }
    Ok(LiftedMode { plate_index, lift })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisConfig {
    pub n_acoustic: usize,
    pub n_plate: usize,
    pub rho: f64,
    pub truncation: Truncation,
    /// Per-axis Gauss order; default `2 * max mode number + 8`.
    pub quadrature_order: Option<usize>,
}

impl BasisConfig {
    pub fn new(n_acoustic: usize, n_plate: usize, rho: f64) -> Self {
        BasisConfig {
            n_acoustic,
            n_plate,
            rho,
            truncation: Truncation::Auto { tol: EXTENSION_TOL, cap: EXTENSION_CAP },
            quadrature_order: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub orders: Vec<usize>,
    pub volume: TensorGrid,
    pub faces: Vec<(Face, TensorGrid)>,
}

impl QuadratureGrid {
    pub fn face(&self, face: Face) -> &TensorGrid {
        &self.faces.iter().find(|(f, _)| *f == face).expect("every face has a grid").1
    }
}

/// Basis functions sampled at the volume nodes.
#[derive(Debug, Clone)]
pub struct NodeTable {
    /// `value[j][q]`.
    pub value: Vec<Vec<f64>>,
    /// `grad[j][q][axis]`.
    pub grad: Vec<Vec<Vec<f64>>>,
    pub laplacian: Vec<Vec<f64>>,
}

/// Exact Gram matrices of the pressure functions.
#[derive(Debug, Clone)]
pub struct Grams {
    /// `∫ u v`.
    pub mass: DMatrix<f64>,
    /// `∫ ∇u · ∇v`.
    pub grad: DMatrix<f64>,
    /// `trace[(k, j)] = ∫_{Γ_pl} ψ_k u_j dS`.
    pub trace: DMatrix<f64>,
    /// `∫ Δu Δv`.
    pub lap: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct BasisSet {
    pub geometry: BoxGeometry,
    pub rho: f64,
    pub acoustic: Vec<AcousticMode>,
    pub plate: Vec<PlateMode>,
    pub lifted: Vec<LiftedMode>,
    pub grid: QuadratureGrid,
    pub nodes: NodeTable,
    /// ψ_k at the plate-face nodes.
    pub plate_nodes: Vec<Vec<f64>>,
    pub grams: Grams,
}

impl BasisSet {
    pub fn build(geom: &BoxGeometry, cfg: &BasisConfig) -> Result<Self> {
        // n_acoustic = 0 leaves a plate-only system
        let acoustic = if cfg.n_acoustic == 0 { vec![] } else { build_acoustic_basis(geom, cfg.n_acoustic)? };
        let plate = if cfg.n_plate == 0 { vec![] } else { build_plate_basis(geom, cfg.n_plate)? };
        let lifted = plate
            .iter()
            .enumerate()
            .map(|(i, m)| build_harmonic_extension(m, i, geom, cfg.rho, cfg.truncation))
            .collect::<Result<Vec<_>>>()?;
        let orders = default_orders(geom, &acoustic, &plate, cfg.quadrature_order);
        Self::assemble(geom.clone(), cfg.rho, acoustic, plate, lifted, orders)
    }

    /// Same modes, different quadrature orders.
    pub fn with_orders(&self, orders: Vec<usize>) -> Result<Self> {
        Self::assemble(
            self.geometry.clone(),
            self.rho,
            self.acoustic.clone(),
            self.plate.clone(),
            self.lifted.clone(),
            orders,
        )
    }

    fn assemble(
        geometry: BoxGeometry,
        rho: f64,
        acoustic: Vec<AcousticMode>,
        plate: Vec<PlateMode>,
        lifted: Vec<LiftedMode>,
        orders: Vec<usize>,
    ) -> Result<Self> {
        let volume = TensorGrid::volume(&geometry, &orders);
        let faces = geometry.faces().map(|f| (f, TensorGrid::face(&geometry, f, &orders))).collect();
        let grid = QuadratureGrid { orders, volume, faces };
        let mut b = BasisSet {
            geometry,
            rho,
            acoustic,
            plate,
            lifted,
            grid,
            nodes: NodeTable { value: vec![], grad: vec![], laplacian: vec![] },
            plate_nodes: vec![],
            grams: Grams {
                mass: DMatrix::zeros(0, 0),
                grad: DMatrix::zeros(0, 0),
                trace: DMatrix::zeros(0, 0),
                lap: DMatrix::zeros(0, 0),
            },
        };
        b.nodes = b.tabulate();
        let pf = b.grid.face(b.geometry.plate_face()).clone();
        b.plate_nodes = b.plate.iter().map(|m| pf.points.iter().map(|x| m.value(x)).collect()).collect();
        b.grams = b.exact_grams()?;
        Ok(b)
    }

    pub fn n_acoustic(&self) -> usize {
        self.acoustic.len()
    }

    pub fn n_plate(&self) -> usize {
        self.plate.len()
    }

    /// Dimension of the Galerkin space.
    pub fn dim(&self) -> usize {
        self.acoustic.len() + self.plate.len()
    }

    pub fn value(&self, j: usize, x: &[f64]) -> f64 {
        let na = self.n_acoustic();
        if j < na {
            self.acoustic[j].value(x)
        } else {
            self.lifted[j - na].value(x)
        }
    }

    pub fn grad(&self, j: usize, x: &[f64]) -> Vec<f64> {
        let na = self.n_acoustic();
        if j < na {
            self.acoustic[j].grad(x)
        } else {
            self.lifted[j - na].grad(x)
        }
    }

    pub fn laplacian(&self, j: usize, x: &[f64]) -> f64 {
        let na = self.n_acoustic();
        if j < na {
            -self.acoustic[j].lambda * self.acoustic[j].value(x)
        } else {
            self.lifted[j - na].lift.laplacian()
        }
    }

    /// Eigenvalue λ_j of an acoustic index, or `None` for lifted indices.
    pub fn lambda(&self, j: usize) -> Option<f64> {
        self.acoustic.get(j).map(|m| m.lambda)
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.plate[i].mu
    }

    fn tabulate(&self) -> NodeTable {
        let pts = &self.grid.volume.points;
        let n = self.dim();
        let mut value = Vec::with_capacity(n);
        let mut grad = Vec::with_capacity(n);
        let mut laplacian = Vec::with_capacity(n);
        for j in 0..n {
            value.push(pts.iter().map(|x| self.value(j, x)).collect());
            grad.push(pts.iter().map(|x| self.grad(j, x)).collect());
            laplacian.push(pts.iter().map(|x| self.laplacian(j, x)).collect());
        }
        NodeTable { value, grad, laplacian }
    }

    /// Closed-form and semi-analytic Grams.
    fn exact_grams(&self) -> Result<Grams> {
        let (na, np) = (self.n_acoustic(), self.n_plate());
        let n = na + np;
        let mut mass = DMatrix::zeros(n, n);
        let mut grad = DMatrix::zeros(n, n);
        let mut lap = DMatrix::zeros(n, n);
        let vol = self.geometry.volume();
        for (j, m) in self.acoustic.iter().enumerate() {
            mass[(j, j)] = 1.0;
            grad[(j, j)] = m.lambda;
            lap[(j, j)] = m.lambda * m.lambda;
        }
        for (i, l) in self.lifted.iter().enumerate() {
            for (j, m) in self.acoustic.iter().enumerate() {
                let (ms, gs) = (l.lift.mass_with_acoustic(m), l.lift.grad_with_acoustic(m));
                mass[(j, na + i)] = ms;
                mass[(na + i, j)] = ms;
                grad[(j, na + i)] = gs;
                grad[(na + i, j)] = gs;
                // Δφ_j = -λ φ_j, Δφ̃_i = -γ_i
                let v = m.lambda * l.lift.correction * self.acoustic_integral(m);
                lap[(j, na + i)] = v;
                lap[(na + i, j)] = v;
            }
        }
        let lifts: Vec<&SeparableLift> = self.lifted.iter().map(|l| &l.lift).collect();
        let [lm, lg, lt] = lift::pair_tables(&lifts)?;
        for (i, li) in self.lifted.iter().enumerate() {
            for (k, lk) in self.lifted.iter().enumerate() {
                mass[(na + i, na + k)] = lm[i][k];
                grad[(na + i, na + k)] = lg[i][k];
                lap[(na + i, na + k)] = li.lift.correction * lk.lift.correction * vol;
            }
        }
        let mut trace = DMatrix::zeros(np, n);
        let pf = self.geometry.plate_face();
        for (k, psi) in self.plate.iter().enumerate() {
            for (j, m) in self.acoustic.iter().enumerate() {
                trace[(k, j)] = self.acoustic_plate_overlap(psi, m, pf);
            }
            for i in 0..np {
                trace[(k, na + i)] = lt[i][k];
            }
        }
        Ok(Grams { mass, grad, trace, lap })
    }

    /// `∫_Ω φ`.
    pub fn acoustic_integral(&self, m: &AcousticMode) -> f64 {
        m.factors
            .iter()
            .enumerate()
            .map(|(a, f)| {
                let len = self.geometry.side(a);
                let one = crate::trig::Factor { trig: crate::trig::Trig::Cos, k: 0.0, norm: 1.0 };
                f.overlap(&one, len)
            })
            .product()
    }

    /// `∫_{Γ_pl} ψ φ dS` in closed form.
    pub fn acoustic_plate_overlap(&self, psi: &PlateMode, m: &AcousticMode, pf: Face) -> f64 {
        let normal = m.factors[pf.axis].value(if pf.high { self.geometry.side(pf.axis) } else { 0.0 });
        let tang: f64 = psi
            .axes
            .iter()
            .zip(&psi.factors)
            .map(|(a, f)| f.overlap(&m.factors[*a], self.geometry.side(*a)))
            .product();
        normal * tang
    }

    /// Gram-type matrix of a bilinear form by quadrature (see [`Kind`]).
    pub fn inner_products(&self, weight: Weight<'_>, kind: Kind) -> Result<DMatrix<f64>> {
        match kind {
            Kind::Gradient | Kind::Laplacian | Kind::Mass => {
                let w = weight.resolve(&self.grid.volume)?;
                let n = self.dim();
                let t = &self.nodes;
                let d = self.geometry.dim();
                let mut m = DMatrix::zeros(n, n);
                for r in 0..n {
                    for c in r..n {
                        let mut acc = 0.0;
                        for (q, wq) in w.iter().enumerate() {
                            let v = match kind {
                                Kind::Mass => t.value[r][q] * t.value[c][q],
                                Kind::Laplacian => t.laplacian[r][q] * t.laplacian[c][q],
                                _ => (0..d).map(|a| t.grad[r][q][a] * t.grad[c][q][a]).sum(),
                            };
                            acc += wq * v;
                        }
                        m[(r, c)] = acc;
                        m[(c, r)] = acc;
                    }
                }
                Ok(m)
            }
            Kind::BoundaryNormal => {
                let n = self.dim();
                let mut m = DMatrix::zeros(n, n);
                for face in self.geometry.faces_with(Label::Absorbing) {
                    let g = self.grid.face(face);
                    let w = weight.resolve(g)?;
                    let dn: Vec<Vec<f64>> = (0..n)
                        .map(|j| g.points.iter().map(|x| face.normal_sign() * self.grad(j, x)[face.axis]).collect())
                        .collect();
                    for r in 0..n {
                        for c in 0..n {
                            m[(r, c)] += w.iter().enumerate().map(|(q, wq)| wq * dn[r][q] * dn[c][q]).sum::<f64>();
                        }
                    }
                }
                Ok(m)
            }
            Kind::PlateValue | Kind::PlateLaplacian => {
                let g = self.grid.face(self.geometry.plate_face());
                let w = weight.resolve(g)?;
                let np = self.n_plate();
                let vals: Vec<Vec<f64>> = match kind {
                    Kind::PlateValue => self.plate_nodes.clone(),
                    _ => self.plate.iter().map(|p| g.points.iter().map(|x| p.laplacian(x)).collect()).collect(),
                };
                Ok(DMatrix::from_fn(np, np, |r, c| {
                    w.iter().enumerate().map(|(q, wq)| wq * vals[r][q] * vals[c][q]).sum()
                }))
            }
        }
    }
}

fn default_orders(
    geom: &BoxGeometry,
    acoustic: &[AcousticMode],
    plate: &[PlateMode],
    fixed: Option<usize>,
) -> Vec<usize> {
    // one order for every axis, from the largest mode number anywhere; quarter-wave
    // families count one more
    let quarter = |m: &AcousticMode, a: usize| {
        let f = axis_family(geom, a);
        m.index[a] + usize::from(f.lo != f.hi)
    };
    let mut mx = 0;
    for m in acoustic {
        for a in 0..geom.dim() {
            mx = mx.max(quarter(m, a));
        }
    }
    for p in plate {
        mx = mx.max(p.index.iter().copied().max().unwrap_or(0));
    }
    vec![fixed.unwrap_or(2 * mx + 8); geom.dim()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Mass,
    Gradient,
    Laplacian,
    /// `∫_{Γ_a} w ∂_ν u ∂_ν v`.
    BoundaryNormal,
    /// `∫_{Γ_pl} w ψ_k ψ_l`.
    PlateValue,
    /// `∫_{Γ_pl} w Δψ_k Δψ_l`.
    PlateLaplacian,
}

/// Weight of a quadrature form, sampled on the grid the form lives on.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    One,
    Sampled(&'a [f64]),
    /// Reciprocal of the samples; they must be positive.
    Reciprocal(&'a [f64]),
}

impl Weight<'_> {
    fn resolve(&self, grid: &TensorGrid) -> Result<Vec<f64>> {
        let check = |s: &[f64]| {
            if s.len() != grid.len() {
                Err(Error::ShapeMismatch(format!("{} weight samples for {} nodes", s.len(), grid.len())))
            } else {
                Ok(())
            }
        };
        match self {
            Weight::One => Ok(grid.weights.clone()),
            Weight::Sampled(s) => {
                check(s)?;
                Ok(s.iter().zip(&grid.weights).map(|(v, w)| v * w).collect())
            }
            Weight::Reciprocal(s) => {
                check(s)?;
                if let Some((node, v)) = s.iter().enumerate().find(|(_, v)| **v <= 0.0) {
                    return Err(Error::NonpositiveWeight { node, value: *v });
                }
                Ok(s.iter().zip(&grid.weights).map(|(v, w)| w / v).collect())
            }
        }
    }
}
