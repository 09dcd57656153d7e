//! Separable harmonic liftings of face data on the box.
//!
//! A datum `scale * Π_a d_a(x_a)` on one face is expanded in the eigenfamilies of
//! the transverse axes; each coefficient is carried into the interior by a 1-D
//! profile in the distance `s` from the face. With Neumann data the profile has
//! slope -1 at `s = 0`, with Dirichlet data it has value 1. The far face keeps the
//! homogeneous condition of its label.

use crate::basis::acoustic::{axis_family, AcousticMode};
use crate::error::{Error, Result};
use crate::expoly::ExpPoly;
use crate::geometry::{BoxGeometry, Face};
use crate::trig::{End, Factor, Family, Trig};

/// Terms with `kappa * s` beyond this are below rounding at an interior point.
const CUTOFF: f64 = 40.0;
/// Geometric growth of the tail-estimation windows.
const WINDOW: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Grow per-axis truncation until the boundary residual meets the tolerance.
    Auto { tol: f64, cap: usize },
    /// Largest retained mode number per transverse axis.
    Fixed(usize),
}

/// `a e^{-κs} + b e^{κ(s-L)}`, or a quadratic when κ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub kappa: f64,
    pub len: f64,
    exp: Option<(f64, f64)>,
    poly: [f64; 3],
}

impl Profile {
    pub fn new(kappa: f64, len: f64, source: Source, far: End) -> Self {
        if kappa == 0.0 {
            let poly = match (source, far) {
                (Source::Neumann, End::Neumann) => [len / 3.0, -1.0, 0.5 / len],
                (Source::Neumann, End::Dirichlet) => [len, -1.0, 0.0],
                (Source::Dirichlet, End::Neumann) => [1.0, 0.0, 0.0],
                (Source::Dirichlet, End::Dirichlet) => [1.0, -1.0 / len, 0.0],
            };
            return Profile { kappa, len, exp: None, poly };
        }
        let e = (-kappa * len).exp();
        let e2 = e * e;
        let (a, b) = match (source, far) {
            (Source::Neumann, End::Neumann) => {
                let d = kappa * (1.0 - e2);
                (1.0 / d, e / d)
            }
            (Source::Neumann, End::Dirichlet) => {
                let d = kappa * (1.0 + e2);
                (1.0 / d, -e / d)
            }
            (Source::Dirichlet, End::Neumann) => (1.0 / (1.0 + e2), e / (1.0 + e2)),
            (Source::Dirichlet, End::Dirichlet) => (1.0 / (1.0 - e2), -e / (1.0 - e2)),
        };
        Profile { kappa, len, exp: Some((a, b)), poly: [0.0; 3] }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self.exp {
            Some((a, b)) => a * (-self.kappa * s).exp() + b * (self.kappa * (s - self.len)).exp(),
            None => self.poly[0] + s * (self.poly[1] + s * self.poly[2]),
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        let k = self.kappa;
        match self.exp {
            Some((a, b)) => k * (-a * (-k * s).exp() + b * (k * (s - self.len)).exp()),
            None => self.poly[1] + 2.0 * s * self.poly[2],
        }
    }

    pub fn deriv2(&self, s: f64) -> f64 {
        let k = self.kappa;
        match self.exp {
            Some((a, b)) => k * k * (a * (-k * s).exp() + b * (k * (s - self.len)).exp()),
            None => 2.0 * self.poly[2],
        }
    }

    /// `∫ P^2`.
    pub fn l2(&self) -> f64 {
        match self.exp {
            Some((a, b)) => {
                let (k, l) = (self.kappa, self.len);
                let one_e2 = -(-2.0 * k * l).exp_m1();
                (a * a + b * b) * one_e2 / (2.0 * k) + 2.0 * a * b * l * (-k * l).exp()
            }
            None => self.expoly().mul(&self.expoly()).integral(),
        }
    }

    /// `∫ κ² P² + P'²`.
    pub fn energy(&self) -> f64 {
        match self.exp {
            Some((a, b)) => {
                let k = self.kappa;
                k * (a * a + b * b) * -(-2.0 * k * self.len).exp_m1()
            }
            None => {
                let d = self.expoly().deriv();
                d.mul(&d).integral()
            }
        }
    }

    pub fn expoly(&self) -> ExpPoly {
        match self.exp {
            Some((a, b)) => ExpPoly::exp(self.len, a, -self.kappa).add(&ExpPoly::exp(self.len, b, self.kappa)),
            None => ExpPoly::poly(self.len, &self.poly),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparableLift {
    pub face: Face,
    pub len: f64,
    pub source: Source,
    pub far: End,
    /// Transverse axes, ascending.
    pub axes: Vec<usize>,
    pub families: Vec<Family>,
    pub datum: Vec<Factor>,
    pub scale: f64,
    /// Datum overlaps with transverse modes `first..=trunc` per axis (without `scale`).
    pub coefs: Vec<Vec<f64>>,
    pub trunc: Vec<usize>,
    /// Constant `-ΔH`; nonzero only for Neumann data with no Dirichlet part anywhere.
    pub correction: f64,
    /// L² norm of the truncation error of the face condition.
    pub residual: f64,
}

fn overlaps(fam: &Family, d: &Factor, from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|m| d.overlap(&fam.mode(m), fam.len)).collect()
}

/// `Σ_{lo < m <= hi} c_m²`, sampled in blocks of four consecutive modes when the window is wide.
fn window_sum(fam: &Family, d: &Factor, lo: usize, hi: usize) -> f64 {
    let c2 = |m: usize| {
        let c = d.overlap(&fam.mode(m), fam.len);
        c * c
    };
    let width = hi - lo;
    if width <= 8192 {
        return (lo + 1..=hi).map(c2).sum();
    }
    // coefficients are smooth in m up to a pattern of period at most four
    let stride = 4 * (width / 8192);
    let mut acc = 0.0;
    let mut count = 0;
    let mut m = lo + 1;
    while m + 4 <= hi + 1 {
        acc += (m..m + 4).map(c2).sum::<f64>();
        count += 4;
        m += stride;
    }
    acc * width as f64 / count as f64
}

/// Estimated `Σ_{m > M} c_m²` and the per-window decay ratio.
fn tail(fam: &Family, d: &Factor, m: usize) -> (f64, f64) {
    let w1 = ((m as f64) * WINDOW).ceil() as usize;
    let w2 = ((w1 as f64) * WINDOW).ceil() as usize;
    let s1 = window_sum(fam, d, m, w1);
    if s1 == 0.0 {
        return (0.0, 0.0);
    }
    let s2 = window_sum(fam, d, w1, w2);
    let r = (s2 / s1).min(0.999);
    (s1 / (1.0 - r), r)
}

/// Datum factor coincides with a family member: index of that member.
fn exact_member(fam: &Family, d: &Factor) -> Option<usize> {
    let m0 = fam.first();
    let kd = d.k * fam.len / std::f64::consts::PI;
    let guess = kd.round() as isize;
    for m in [guess - 1, guess, guess + 1] {
        if m < m0 as isize {
            continue;
        }
        let f = fam.mode(m as usize);
        if f.trig == d.trig && (f.k - d.k).abs() <= 1e-13 * (1.0 + d.k) {
            return Some(m as usize);
        }
    }
    None
}

fn choose_trunc(fam: &Family, d: &Factor, target: f64, cap: usize) -> usize {
    if let Some(m) = exact_member(fam, d) {
        return m;
    }
    let mut m = fam.first().max((d.k * fam.len / std::f64::consts::PI).ceil() as usize + 8).max(256).min(cap);
    let mut best: Option<usize> = None;
    for _ in 0..10 {
        let (t, r) = tail(fam, d, m);
        if t <= target {
            best = Some(best.map_or(m, |b| b.min(m)));
        }
        if r <= 0.0 || r >= 0.999 {
            if t <= target || m >= cap {
                break;
            }
            m = (2 * m).min(cap);
            continue;
        }
        let q = -r.ln() / WINDOW.ln();
        let pred = ((m as f64) * (t / target).powf(1.0 / q) * 1.01).ceil() as usize;
        let pred = pred.clamp(fam.first() + 1, cap);
        if best.is_some() && pred as f64 >= 0.97 * m as f64 {
            break;
        }
        if pred == m {
            break;
        }
        m = pred;
    }
    best.unwrap_or(m)
}

/// Pairwise semi-analytic integrals of liftings that share face and families:
/// `(∫ H_i H_k, ∫ ∇H_i·∇H_k, ∫_face H_i d_k)` where `d_k` is the unscaled datum of `k`.
pub fn pair_tables(lifts: &[&SeparableLift]) -> Result<[Vec<Vec<f64>>; 3]> {
    let n = lifts.len();
    let mut mass = vec![vec![0.0; n]; n];
    let mut grad = vec![vec![0.0; n]; n];
    let mut trace = vec![vec![0.0; n]; n];
    let Some(first) = lifts.first() else {
        return Ok([mass, grad, trace]);
    };
    for l in lifts {
        first.check_compatible(l)?;
    }
    let dims = first.axes.len();
    let fams = &first.families;
    let maxes: Vec<usize> = (0..dims).map(|a| lifts.iter().map(|l| l.trunc[a]).max().unwrap()).collect();
    let mut idx: Vec<usize> = fams.iter().map(|f| f.first()).collect();
    let mut c = vec![0.0; n];
    'outer: loop {
        let mut k2 = 0.0;
        for (a, f) in fams.iter().enumerate() {
            let k = f.mode(idx[a]).k;
            k2 += k * k;
        }
        let mut any = false;
        for (i, l) in lifts.iter().enumerate() {
            let mut v = 1.0;
            for a in 0..dims {
                v *= l.coefs[a].get(idx[a] - fams[a].first()).copied().unwrap_or(0.0);
            }
            c[i] = v;
            any |= v != 0.0;
        }
        if any {
            let p = first.profile(k2.sqrt());
            let (l2, en, p0) = (p.l2(), p.energy(), p.value(0.0));
            for i in 0..n {
                if c[i] == 0.0 {
                    continue;
                }
                let ci = c[i] * lifts[i].scale;
                for k in 0..n {
                    if c[k] == 0.0 {
                        continue;
                    }
                    trace[i][k] += ci * c[k] * p0;
                    if k >= i {
                        let ck = c[k] * lifts[k].scale;
                        mass[i][k] += ci * ck * l2;
                        grad[i][k] += ci * ck * en;
                    }
                }
            }
        }
        // odometer over the multi-index
        let mut a = dims;
        loop {
            if a == 0 {
                break 'outer;
            }
            a -= 1;
            if idx[a] < maxes[a] {
                idx[a] += 1;
                for b in a + 1..dims {
                    idx[b] = fams[b].first();
                }
                break;
            }
        }
    }
    for i in 0..n {
        for k in 0..i {
            mass[i][k] = mass[k][i];
            grad[i][k] = grad[k][i];
        }
    }
    Ok([mass, grad, trace])
}

impl SeparableLift {
    /// Lifting of `scale * Π datum` on `face`; `datum[a]` is the factor along the a-th
    /// tangential axis of the face.
    pub fn new(
        geom: &BoxGeometry,
        face: Face,
        source: Source,
        datum: Vec<Factor>,
        scale: f64,
        trunc: Truncation,
    ) -> Result<Self> {
        let axes = geom.tangential_axes(face);
        if datum.len() != axes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} datum factors for {} tangential axes",
                datum.len(),
                axes.len()
            )));
        }
        let families: Vec<Family> = axes.iter().map(|&a| axis_family(geom, a)).collect();
        let far = End::from(geom.label(Face::new(face.axis, !face.high)));
        let norms: Vec<f64> = datum.iter().zip(&families).map(|(d, f)| d.overlap(d, f.len)).collect();
        let per_axis = |tol: f64| 0.25 * tol * tol / axes.len().max(1) as f64;
        let tr: Vec<usize> = match trunc {
            Truncation::Fixed(m) => families.iter().map(|f| m.max(f.first())).collect(),
            Truncation::Auto { tol, cap } => datum
                .iter()
                .zip(&families)
                .zip(&norms)
                .map(|((d, f), n)| choose_trunc(f, d, per_axis(tol) * n, cap))
                .collect(),
        };
        let coefs: Vec<Vec<f64>> = families
            .iter()
            .zip(&datum)
            .zip(&tr)
            .map(|((f, d), m)| {
                let mut c = overlaps(f, d, f.first(), *m);
                if let Some(e) = exact_member(f, d) {
                    // orthogonality is exact; drop rounding noise
                    for (j, v) in c.iter_mut().enumerate() {
                        if j + f.first() != e {
                            *v = 0.0;
                        }
                    }
                }
                c
            })
            .collect();
        // relative residual² = 1 - Π(1 - t_a/n_a)
        let mut rel2: f64 = 0.0;
        for (((f, d), m), n) in families.iter().zip(&datum).zip(&tr).zip(&norms) {
            let t = if exact_member(f, d).is_some_and(|e| e <= *m) { 0.0 } else { tail(f, d, *m).0 };
            let x = if *n > 0.0 { (t / n).min(1.0) } else { 0.0 };
            rel2 = rel2 + x - rel2 * x;
        }
        let total_norm = norms.iter().product::<f64>().sqrt();
        let residual = rel2.sqrt() * scale.abs() * total_norm;
        let mut lift = SeparableLift {
            face,
            len: geom.side(face.axis),
            source,
            far,
            axes,
            families,
            datum,
            scale,
            coefs,
            trunc: tr,
            correction: 0.0,
            residual,
        };
        if source == Source::Neumann && far == End::Neumann && lift.families.iter().all(|f| f.first() == 0 && f.mode(0).k == 0.0) {
            let x0: f64 = lift.families.iter().map(|f| f.mode(0).norm).product();
            let d0: f64 = lift.scale * lift.coefs.iter().map(|c| c[0]).product::<f64>();
            // the constant mode's profile has curvature 1/L
            lift.correction = -d0 * x0 / lift.len;
        }
        Ok(lift)
    }

    fn profile(&self, kappa: f64) -> Profile {
        Profile::new(kappa, self.len, self.source, self.far)
    }

    /// Normal coordinate measured from the source face.
    pub fn s_of(&self, x: &[f64]) -> f64 {
        let v = x[self.face.axis];
        if self.face.high {
            self.len - v
        } else {
            v
        }
    }

    /// `d/dx_axis = sign * d/ds`.
    fn s_sign(&self) -> f64 {
        if self.face.high {
            -1.0
        } else {
            1.0
        }
    }

    /// Visit every retained term: (mode numbers, wavenumbers, coefficient including scale).
    fn for_each_term(&self, kappa_s_limit: Option<f64>, mut f: impl FnMut(&[usize], &[f64], f64)) {
        let d = self.axes.len();
        let mut idx = vec![0usize; d];
        let mut ks = vec![0.0; d];
        self.rec(0, 1.0, 0.0, kappa_s_limit, &mut idx, &mut ks, &mut f);
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        &self,
        a: usize,
        coef: f64,
        k2: f64,
        limit: Option<f64>,
        idx: &mut Vec<usize>,
        ks: &mut Vec<f64>,
        f: &mut impl FnMut(&[usize], &[f64], f64),
    ) {
        if a == self.axes.len() {
            f(idx, ks, self.scale * coef);
            return;
        }
        let fam = &self.families[a];
        for (j, c) in self.coefs[a].iter().enumerate() {
            let m = fam.first() + j;
            let k = fam.mode(m).k;
            if let Some(lim) = limit {
                if (k2 + k * k).sqrt() > lim {
                    break;
                }
            }
            if *c == 0.0 {
                continue;
            }
            idx[a] = m;
            ks[a] = k;
            self.rec(a + 1, coef * c, k2 + k * k, limit, idx, ks, f);
        }
    }

    fn limit_at(&self, s: f64) -> Option<f64> {
        if s > 0.0 {
            Some(CUTOFF / s)
        } else {
            None
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let s = self.s_of(x);
        let mut acc = 0.0;
        self.for_each_term(self.limit_at(s), |idx, ks, c| {
            let kappa = ks.iter().map(|k| k * k).sum::<f64>().sqrt();
            let tr: f64 = self
                .axes
                .iter()
                .zip(&self.families)
                .zip(idx)
                .map(|((a, fam), m)| fam.mode(*m).value(x[*a]))
                .product();
            acc += c * tr * self.profile(kappa).value(s);
        });
        acc
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let s = self.s_of(x);
        let mut g = vec![0.0; x.len()];
        let d = self.axes.len();
        let mut vals = [0.0f64; 2];
        let mut ders = [0.0f64; 2];
        self.for_each_term(self.limit_at(s), |idx, ks, c| {
            let kappa = ks.iter().map(|k| k * k).sum::<f64>().sqrt();
            let p = self.profile(kappa);
            let (pv, pd) = (p.value(s), p.deriv(s));
            for j in 0..d {
                let f = self.families[j].mode(idx[j]);
                vals[j] = f.value(x[self.axes[j]]);
                ders[j] = f.deriv(x[self.axes[j]]);
            }
            let tr: f64 = vals[..d].iter().product();
            g[self.face.axis] += c * tr * pd * self.s_sign();
            for j in 0..d {
                let other: f64 = (0..d).filter(|l| *l != j).map(|l| vals[l]).product();
                g[self.axes[j]] += c * pv * ders[j] * other;
            }
        });
        g
    }

    /// Termwise Laplacian of the truncated series at an interior point.
    pub fn laplacian_at(&self, x: &[f64]) -> f64 {
        let s = self.s_of(x);
        let mut acc = 0.0;
        self.for_each_term(self.limit_at(s), |idx, ks, c| {
            let k2: f64 = ks.iter().map(|k| k * k).sum();
            let p = self.profile(k2.sqrt());
            let tr: f64 = self
                .axes
                .iter()
                .zip(&self.families)
                .zip(idx)
                .map(|((a, fam), m)| fam.mode(*m).value(x[*a]))
                .product();
            acc += c * tr * (p.deriv2(s) - k2 * p.value(s));
        });
        acc
    }

    pub fn laplacian(&self) -> f64 {
        -self.correction
    }

    /// `∫_face H Π_a w_a dS` for weights given by overlap tables on the same families.
    pub fn face_inner(&self, weights: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        self.for_each_term(None, |idx, ks, c| {
            let w: f64 = weights
                .iter()
                .zip(&self.families)
                .zip(idx)
                .map(|((w, f), m)| w.get(m - f.first()).copied().unwrap_or(0.0))
                .product();
            if w != 0.0 {
                let kappa = ks.iter().map(|k| k * k).sum::<f64>().sqrt();
                acc += c * w * self.profile(kappa).value(0.0);
            }
        });
        acc
    }

    /// Acoustic factor along the normal axis written in `s`.
    fn normal_factor(&self, mode: &AcousticMode) -> ExpPoly {
        let f = mode.factors[self.face.axis];
        let (c, s) = if self.face.high {
            let kl = f.k * self.len;
            match f.trig {
                Trig::Cos => (kl.cos(), kl.sin()),
                Trig::Sin => (kl.sin(), -kl.cos()),
            }
        } else {
            match f.trig {
                Trig::Cos => (1.0, 0.0),
                Trig::Sin => (0.0, 1.0),
            }
        };
        ExpPoly::trig(self.len, f.k, f.norm * c, f.norm * s)
    }

    /// Coefficient of the term whose transverse modes match `mode`, with its κ.
    fn matching(&self, mode: &AcousticMode) -> Option<(f64, f64)> {
        let mut coef = self.scale;
        let mut k2 = 0.0;
        for ((a, fam), c) in self.axes.iter().zip(&self.families).zip(&self.coefs) {
            let m = mode.index[*a];
            let j = m.checked_sub(fam.first())?;
            coef *= *c.get(j)?;
            let k = fam.mode(m).k;
            k2 += k * k;
        }
        Some((coef, k2.sqrt()))
    }

    /// `∫_Ω H φ`.
    pub fn mass_with_acoustic(&self, mode: &AcousticMode) -> f64 {
        match self.matching(mode) {
            Some((c, kappa)) => c * self.profile(kappa).expoly().mul(&self.normal_factor(mode)).integral(),
            None => 0.0,
        }
    }

    /// `∫_Ω ∇H · ∇φ`.
    pub fn grad_with_acoustic(&self, mode: &AcousticMode) -> f64 {
        match self.matching(mode) {
            Some((c, kappa)) => {
                let p = self.profile(kappa).expoly();
                let y = self.normal_factor(mode);
                let t = p.mul(&y).integral() * kappa * kappa + p.deriv().mul(&y.deriv()).integral();
                c * t
            }
            None => 0.0,
        }
    }

    fn check_compatible(&self, other: &SeparableLift) -> Result<()> {
        if self.face != other.face || self.families != other.families || self.source != other.source {
            return Err(Error::ShapeMismatch("liftings from different faces or families".into()));
        }
        Ok(())
    }

    fn pair_sum(&self, other: &SeparableLift, f: impl Fn(&Profile) -> f64) -> Result<f64> {
        self.check_compatible(other)?;
        let mut acc = 0.0;
        self.for_each_term(None, |idx, ks, c| {
            let mut w = other.scale;
            for ((co, fam), m) in other.coefs.iter().zip(&other.families).zip(idx) {
                w *= co.get(m - fam.first()).copied().unwrap_or(0.0);
            }
            if w != 0.0 {
                let kappa = ks.iter().map(|k| k * k).sum::<f64>().sqrt();
                acc += c * w * f(&self.profile(kappa));
            }
        });
        Ok(acc)
    }

    /// `∫_Ω H G` for another lifting from the same face.
    pub fn mass_with(&self, other: &SeparableLift) -> Result<f64> {
        self.pair_sum(other, |p| p.l2())
    }

    /// `∫_Ω ∇H · ∇G` for another lifting from the same face.
    pub fn grad_with(&self, other: &SeparableLift) -> Result<f64> {
        self.pair_sum(other, |p| p.energy())
    }

    /// Number of retained terms.
    pub fn term_count(&self) -> usize {
        self.coefs.iter().map(|c| c.iter().filter(|v| **v != 0.0).count()).product()
    }
}
