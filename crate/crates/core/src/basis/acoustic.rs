use crate::error::{Error, Result};
use crate::geometry::{BoxGeometry, Face, Label};
use crate::trig::{End, Factor, Family};
use std::cmp::Ordering;

/// Separable eigenfunction of the negative Laplacian on the box.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticMode {
    /// Mode number per axis.
    pub index: Vec<usize>,
    pub lambda: f64,
    pub factors: Vec<Factor>,
}

impl AcousticMode {
    pub fn value(&self, x: &[f64]) -> f64 {
        self.factors.iter().zip(x).map(|(f, x)| f.value(*x)).product()
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (0..self.factors.len())
            .map(|d| {
                self.factors
                    .iter()
                    .zip(x)
                    .enumerate()
                    .map(|(a, (f, x))| if a == d { f.deriv(*x) } else { f.value(*x) })
                    .product()
            })
            .collect()
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        (0..self.factors.len())
            .map(|d| {
                self.factors
                    .iter()
                    .zip(x)
                    .enumerate()
                    .map(|(a, (f, x))| if a == d { f.deriv2(*x) } else { f.value(*x) })
                    .product::<f64>()
            })
            .sum()
    }

    /// Outward normal derivative on `face` at a point of that face.
    pub fn normal_deriv(&self, face: Face, x: &[f64]) -> f64 {
        face.normal_sign() * self.grad(x)[face.axis]
    }

    pub fn max_index(&self) -> usize {
        self.index.iter().copied().max().unwrap_or(0)
    }
}

/// End conditions of the acoustic eigenfamily along `axis`: Dirichlet on Γ_D,
/// Neumann on plate, Neumann and absorbing faces.
pub fn axis_family(geom: &BoxGeometry, axis: usize) -> Family {
    let [lo, hi] = geom.labels(axis);
    Family::new(End::from(lo), End::from(hi), geom.side(axis))
}

fn cmp_modes(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> Ordering {
    let tol = 1e-12 * a.0.abs().max(b.0.abs()).max(1.0);
    if (a.0 - b.0).abs() <= tol {
        a.1.cmp(&b.1)
    } else {
        a.0.partial_cmp(&b.0).unwrap()
    }
}

/// The `n` modes of smallest eigenvalue, ties broken by index tuple.
pub fn build_acoustic_basis(geom: &BoxGeometry, n: usize) -> Result<Vec<AcousticMode>> {
    if n == 0 {
        return Err(Error::constraint("/basis/n_acoustic", "must be at least 1"));
    }
    if !geom.has(Label::Plate) {
        return Err(Error::UnsupportedPartition("no plate face".into()));
    }
    let fams: Vec<Family> = (0..geom.dim()).map(|a| axis_family(geom, a)).collect();
    // the n smallest have every index below first + n on each axis
    let ranges: Vec<Vec<usize>> = fams.iter().map(|f| (f.first()..f.first() + n).collect()).collect();
    let mut cands: Vec<(f64, Vec<usize>)> = vec![(0.0, vec![])];
    for (fam, r) in fams.iter().zip(&ranges) {
        let mut next = Vec::with_capacity(cands.len() * r.len());
        for (lam, idx) in &cands {
            for &m in r {
                let mut i = idx.clone();
                i.push(m);
                next.push((lam + fam.eigenvalue(m), i));
            }
        }
        cands = next;
    }
    cands.sort_by(cmp_modes);
    Ok(cands
        .into_iter()
        .take(n)
        .map(|(lambda, index)| AcousticMode {
            factors: index.iter().zip(&fams).map(|(m, f)| f.mode(*m)).collect(),
            index,
            lambda,
        })
        .collect())
}
