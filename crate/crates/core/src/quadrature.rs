//! Gauss–Legendre rules and tensor grids on boxes and faces.

use crate::geometry::{BoxGeometry, Face};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Newton iteration on the three-term recurrence; accurate to a few ulps for n up to several hundred.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// Gauss rule mapped to [a, b].
pub fn gauss_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let h = 0.5 * (b - a);
    (
        x.iter().map(|t| a + h * (t + 1.0)).collect(),
        w.iter().map(|v| v * h).collect(),
    )
}

/// Tensor-product nodes over a set of axes.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    /// Points in full box coordinates (dimension of the box).
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TensorGrid {
    /// Volume grid with `orders[a]` nodes on axis `a`.
    pub fn volume(geom: &BoxGeometry, orders: &[usize]) -> Self {
        let rules: Vec<_> = (0..geom.dim())
            .map(|a| gauss_interval(orders[a], 0.0, geom.side(a)))
            .collect();
        Self::product(&rules, geom.dim(), &[])
    }

    /// Grid on a face, with the normal coordinate fixed.
    pub fn face(geom: &BoxGeometry, face: Face, orders: &[usize]) -> Self {
        let dim = geom.dim();
        let mut rules = Vec::with_capacity(dim);
        for a in 0..dim {
            if a == face.axis {
                let v = if face.high { geom.side(a) } else { 0.0 };
                rules.push((vec![v], vec![1.0]));
            } else {
                rules.push(gauss_interval(orders[a], 0.0, geom.side(a)));
            }
        }
        Self::product(&rules, dim, &[face.axis])
    }

    fn product(rules: &[(Vec<f64>, Vec<f64>)], dim: usize, _fixed: &[usize]) -> Self {
        let mut points = vec![Vec::with_capacity(dim)];
        let mut weights = vec![1.0];
        for (xs, ws) in rules {
            let mut np = Vec::with_capacity(points.len() * xs.len());
            let mut nw = Vec::with_capacity(points.len() * xs.len());
            for (p, w) in points.iter().zip(&weights) {
                for (x, wx) in xs.iter().zip(ws) {
                    let mut q = p.clone();
                    q.push(*x);
                    np.push(q);
                    nw.push(w * wx);
                }
            }
            points = np;
            weights = nw;
        }
        TensorGrid { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weighted sum of `f` over the nodes.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }
}
