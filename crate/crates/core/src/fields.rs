//! Coefficient and load fields sampled at quadrature nodes.

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::signals::Temporal;
use crate::trajectory::Trajectory;
use nalgebra::DVector;
use std::fmt;
use std::sync::Arc;

/// Pointwise field `(t, x) -> value`.
pub type SpaceTime = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
/// Field already sampled on a fixed node set: `t -> values`.
pub type NodeFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;
/// Extra load added directly to the assembled right-hand side.
pub type ModalFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// α and α_t at the volume nodes at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSample {
    pub t: f64,
    pub alpha: Vec<f64>,
    pub alpha_t: Vec<f64>,
}

/// The coefficient α of the linearized acoustic equation.
#[derive(Clone)]
pub enum CoefficientField {
    /// α ≡ 1.
    Unit,
    Closed { alpha: SpaceTime, alpha_t: SpaceTime },
    /// α = 1 - 2k q with q a modal trajectory in the same basis, plus any
    /// harmonic liftings of boundary data.
    Frozen { k: f64, q: Arc<Trajectory>, offsets: Vec<Arc<NodeOffset>> },
}

/// A fixed spatial field times a temporal signal, sampled at the volume and plate nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeOffset {
    pub volume: Vec<f64>,
    pub volume_grad: Vec<Vec<f64>>,
    /// Its Laplacian, constant in space.
    pub laplacian: f64,
    pub plate: Vec<f64>,
    /// `∫ H φ_j` for the acoustic modes.
    pub projection: Vec<f64>,
    pub temporal: Temporal,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientField::Unit => write!(f, "Unit"),
            CoefficientField::Closed { .. } => write!(f, "Closed"),
            CoefficientField::Frozen { k, q, offsets } => {
                write!(f, "Frozen {{ k: {k}, steps: {}, offsets: {} }}", q.len(), offsets.len())
            }
        }
    }
}

/// Pressure expansion `Σ c_j u_j` at the volume nodes.
pub fn node_values(basis: &BasisSet, c: &DVector<f64>) -> Vec<f64> {
    expand(&basis.nodes.value, c)
}

fn expand(table: &[Vec<f64>], c: &DVector<f64>) -> Vec<f64> {
    let nq = table.first().map_or(0, Vec::len);
    let mut out = vec![0.0; nq];
    for (j, cj) in c.iter().enumerate() {
        if *cj == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(&table[j]) {
            *o += cj * v;
        }
    }
    out
}

/// Gradient of the expansion at the volume nodes, `[q][axis]`.
pub fn node_gradients(basis: &BasisSet, c: &DVector<f64>) -> Vec<Vec<f64>> {
    let d = basis.geometry.dim();
    let mut out = vec![vec![0.0; d]; basis.grid.volume.len()];
    for (j, cj) in c.iter().enumerate() {
        for (o, g) in out.iter_mut().zip(&basis.nodes.grad[j]) {
            for a in 0..d {
                o[a] += cj * g[a];
            }
        }
    }
    out
}

impl CoefficientField {
    pub fn closed(
        alpha: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        alpha_t: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CoefficientField::Closed { alpha: Arc::new(alpha), alpha_t: Arc::new(alpha_t) }
    }

    /// Constant in time and space, so assembled matrices can be cached.
    pub fn is_constant(&self) -> bool {
        match self {
            CoefficientField::Unit => true,
            CoefficientField::Frozen { k, .. } => *k == 0.0,
            CoefficientField::Closed { .. } => false,
        }
    }

    /// α and α_t at the volume nodes; fails if min α ≤ `floor`.
    pub fn sample(&self, basis: &BasisSet, t: f64, floor: f64) -> Result<AlphaSample> {
        let pts = &basis.grid.volume.points;
        let (alpha, alpha_t) = match self {
            CoefficientField::Unit => (vec![1.0; pts.len()], vec![0.0; pts.len()]),
            CoefficientField::Closed { alpha, alpha_t } => {
                (pts.iter().map(|x| alpha(t, x)).collect(), pts.iter().map(|x| alpha_t(t, x)).collect())
            }
            CoefficientField::Frozen { k, q, offsets } => {
                let (qv, qt) = frozen_q(&basis.nodes.value, q, offsets, t);
                (qv.iter().map(|x| 1.0 - 2.0 * k * x).collect(), qt.iter().map(|x| -2.0 * k * x).collect())
            }
        };
        check_floor(basis, t, &alpha, floor)?;
        Ok(AlphaSample { t, alpha, alpha_t })
    }

    /// ∇α at the volume nodes, `[q][axis]`.
    pub fn gradient(&self, basis: &BasisSet, t: f64) -> Vec<Vec<f64>> {
        let pts = &basis.grid.volume.points;
        let d = basis.geometry.dim();
        match self {
            CoefficientField::Unit => vec![vec![0.0; d]; pts.len()],
            CoefficientField::Closed { alpha, .. } => pts
                .iter()
                .map(|x| {
                    (0..d)
                        .map(|a| {
                            let h = 1e-6 * basis.geometry.side(a);
                            let (mut xp, mut xm) = (x.clone(), x.clone());
                            xp[a] += h;
                            xm[a] -= h;
                            (alpha(t, &xp) - alpha(t, &xm)) / (2.0 * h)
                        })
                        .collect()
                })
                .collect(),
            CoefficientField::Frozen { k, q, offsets } => {
                let (u, _) = q.state_at(t);
                let mut g = node_gradients(basis, &u);
                for o in offsets {
                    let s = o.temporal.value(t);
                    for (gq, oq) in g.iter_mut().zip(&o.volume_grad) {
                        for (a, b) in gq.iter_mut().zip(oq) {
                            *a += s * b;
                        }
                    }
                }
                g.into_iter().map(|g| g.iter().map(|v| -2.0 * k * v).collect()).collect()
            }
        }
    }
}

/// q and q_t at the volume nodes, Hermite-interpolated in time.
pub fn frozen_q(table: &[Vec<f64>], q: &Trajectory, offsets: &[Arc<NodeOffset>], t: f64) -> (Vec<f64>, Vec<f64>) {
    let (u, v) = q.state_at(t);
    let mut qv = expand(table, &u);
    let mut qt = expand(table, &v);
    for o in offsets {
        let j = o.temporal.jet(t);
        for ((a, b), h) in qv.iter_mut().zip(qt.iter_mut()).zip(&o.volume) {
            *a += j[0] * h;
            *b += j[1] * h;
        }
    }
    (qv, qt)
}

fn check_floor(basis: &BasisSet, t: f64, alpha: &[f64], floor: f64) -> Result<()> {
    let (q, a) = alpha
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bq, ba), (q, &a)| if a < ba || a.is_nan() { (q, a) } else { (bq, ba) });
    if !(a > floor) {
        return Err(Error::Degeneracy { t, x: basis.grid.volume.points[q].clone(), alpha: a });
    }
    Ok(())
}

/// Interior source f, plate load h̃ and an optional modal hook.
#[derive(Clone, Default)]
pub struct Loads {
    /// f at the volume nodes.
    pub f: Vec<NodeFn>,
    /// Interior terms already divided by α, at the volume nodes.
    pub f_over_alpha: Vec<NodeFn>,
    /// h̃ at the plate-face nodes.
    pub h: Vec<NodeFn>,
    pub modal: Vec<ModalFn>,
}

impl fmt::Debug for Loads {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Loads {{ f: {}, f_over_alpha: {}, h: {}, modal: {} }}",
            self.f.len(),
            self.f_over_alpha.len(),
            self.h.len(),
            self.modal.len()
        )
    }
}

impl Loads {
    pub fn is_zero(&self) -> bool {
        self.f.is_empty() && self.f_over_alpha.is_empty() && self.h.is_empty() && self.modal.is_empty()
    }

    pub fn with_f(mut self, basis: &BasisSet, f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let pts = basis.grid.volume.points.clone();
        self.f.push(Arc::new(move |t| pts.iter().map(|x| f(t, x)).collect()));
        self
    }

    pub fn with_h(mut self, basis: &BasisSet, h: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        let pts = basis.grid.face(basis.geometry.plate_face()).points.clone();
        self.h.push(Arc::new(move |t| pts.iter().map(|x| h(t, x)).collect()));
        self
    }

    /// f = 2k q_t² from a modal trajectory and its liftings.
    pub fn with_frozen_f(mut self, basis: &BasisSet, k: f64, q: Arc<Trajectory>, offsets: Vec<Arc<NodeOffset>>) -> Self {
        if k == 0.0 {
            return self;
        }
        let table = Arc::new(basis.nodes.value.clone());
        self.f.push(Arc::new(move |t| {
            let (_, qt) = frozen_q(&table, &q, &offsets, t);
            qt.into_iter().map(|x| 2.0 * k * x * x).collect()
        }));
        self
    }

    pub fn with_modal(mut self, m: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static) -> Self {
        self.modal.push(Arc::new(m));
        self
    }

    pub fn extend(mut self, other: Loads) -> Self {
        self.f.extend(other.f);
        self.f_over_alpha.extend(other.f_over_alpha);
        self.h.extend(other.h);
        self.modal.extend(other.modal);
        self
    }

    /// Sum of the interior sources at the volume nodes, or `None` if there are none.
    pub fn f_at(&self, t: f64) -> Option<Vec<f64>> {
        sum_nodes(&self.f, t)
    }

    pub fn f_over_alpha_at(&self, t: f64) -> Option<Vec<f64>> {
        sum_nodes(&self.f_over_alpha, t)
    }

    pub fn h_at(&self, t: f64) -> Option<Vec<f64>> {
        sum_nodes(&self.h, t)
    }
}

fn sum_nodes(fs: &[NodeFn], t: f64) -> Option<Vec<f64>> {
    let mut it = fs.iter();
    let mut acc = it.next()?(t);
    for g in it {
        for (a, v) in acc.iter_mut().zip(g(t)) {
            *a += v;
        }
    }
    Some(acc)
}
