use crate::error::Result;
use crate::geometry::BoxGeometry;
use crate::trig::{End, Factor, Family};

/// Hinged (Dirichlet) eigenfunction of the Laplace–Beltrami operator on the plate face.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateMode {
    /// Mode number (>= 1) per tangential axis.
    pub index: Vec<usize>,
    pub mu: f64,
    /// Tangential axes of the plate, in box coordinates.
    pub axes: Vec<usize>,
    pub factors: Vec<Factor>,
}

impl PlateMode {
    /// Value at a point given in full box coordinates.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.axes
            .iter()
            .zip(&self.factors)
            .map(|(a, f)| f.value(x[*a]))
            .product()
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        (0..self.axes.len())
            .map(|d| {
                self.axes
                    .iter()
                    .zip(&self.factors)
                    .enumerate()
                    .map(|(j, (a, f))| if j == d { f.deriv2(x[*a]) } else { f.value(x[*a]) })
                    .product::<f64>()
            })
            .sum()
    }
}

pub fn plate_families(geom: &BoxGeometry) -> (Vec<usize>, Vec<Family>) {
    let axes = geom.tangential_axes(geom.plate_face());
    let fams = axes
        .iter()
        .map(|&a| Family::new(End::Dirichlet, End::Dirichlet, geom.side(a)))
        .collect();
    (axes, fams)
}

/// The `n` plate modes of smallest eigenvalue, ties broken by index tuple.
pub fn build_plate_basis(geom: &BoxGeometry, n: usize) -> Result<Vec<PlateMode>> {
    let (axes, fams) = plate_families(geom);
    let mut cands: Vec<(f64, Vec<usize>)> = vec![(0.0, vec![])];
    for fam in &fams {
        let mut next = Vec::new();
        for (mu, idx) in &cands {
            for m in 1..=n.max(1) {
                let mut i = idx.clone();
                i.push(m);
                next.push((mu + fam.eigenvalue(m), i));
            }
        }
        cands = next;
    }
    cands.sort_by(|a, b| {
        let tol = 1e-12 * a.0.max(b.0);
        if (a.0 - b.0).abs() <= tol {
            a.1.cmp(&b.1)
        } else {
            a.0.partial_cmp(&b.0).unwrap()
        }
    });
    Ok(cands
        .into_iter()
        .take(n)
        .map(|(mu, index)| PlateMode {
            factors: index.iter().zip(&fams).map(|(m, f)| f.mode(*m)).collect(),
            axes: axes.clone(),
            index,
            mu,
        })
        .collect())
}
