use nalgebra::DVector;
use std::f64::consts::PI;
use westplate::assembly::{Assembler, Mode};
use westplate::basis::{BasisConfig, BasisSet, SeparableLift, Source, Truncation};
use westplate::fields::{CoefficientField, Loads};
use westplate::geometry::{BoxGeometry, Face};
use westplate::linear::*;
use westplate::params::Params;
use westplate::signals::{resolve, FaceSignal, ProfileFactor, SignalKind, Spatial, Temporal, TrigName};
use westplate::trajectory::Trajectory;

fn undamped() -> Params {
    Params { c: 1.0, b: 0.0, k: 0.0, rho: 1.0, delta: 1.0, beta: 0.0, gamma: 1.0, kappa: 1.0 }
}

fn plate_only() -> BasisSet {
    BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(0, 1, 1.0)).unwrap()
}

fn oscillator_error(dt: f64) -> f64 {
    let b = plate_only();
    let asm = Assembler::new(&b, undamped(), Mode::PaperTriangular, CoefficientField::Unit).unwrap();
    let steps = (1.0 / dt).round() as usize;
    let tr = integrate(&asm, &Loads::default(), DVector::from_element(1, 1.0), DVector::zeros(1), dt, steps).unwrap();
    let w = PI * PI;
    tr.times.iter().zip(&tr.u).map(|(t, u)| (u[0] - (w * t).cos()).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_data_stays_zero() {
    let b = BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(6, 3, 1.0)).unwrap();
    let asm = Assembler::new(&b, Params::reference(), Mode::Full, CoefficientField::Unit).unwrap();
    let tr = integrate(&asm, &Loads::default(), DVector::zeros(9), DVector::zeros(9), 1e-2, 20).unwrap();
    assert!(tr.u.iter().chain(&tr.v).chain(&tr.a).all(|x| x.iter().all(|v| *v == 0.0)));
}

#[test]
fn plate_oscillator_matches_cosine() {
    let e1 = oscillator_error(1e-3);
    assert!(e1 <= 1e-4, "max error {e1:e}");
    let e2 = oscillator_error(5e-4);
    let r = e1 / e2;
    assert!((r - 4.0).abs() <= 0.8, "refinement ratio {r}");
}

#[test]
fn stored_accelerations_satisfy_the_point_equation() {
    let b = BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(6, 3, 1.0)).unwrap();
    let alpha = CoefficientField::closed(|t, x| 1.0 + 0.1 * (t + x[0]).sin(), |t, x| 0.1 * (t + x[0]).cos());
    let asm = Assembler::new(&b, Params::reference(), Mode::Full, alpha).unwrap();
    let loads = Loads::default().with_f(&b, |t, x| t * x[1]);
    let mut u0 = DVector::zeros(9);
    u0[0] = 0.3;
    u0[7] = -0.2;
    let tr = integrate(&asm, &loads, u0, DVector::zeros(9), 1e-2, 30).unwrap();
    for i in 0..tr.len() {
        let (s, l) = asm.system(tr.times[i], &loads).unwrap();
        let r = s.residual(&tr.u[i], &tr.v[i], &tr.a[i], &l).norm();
        let scale = l.norm() + s.k.norm() * tr.u[i].norm();
        assert!(r <= 1e-9 * scale, "step {i}: {r:e}");
    }
}

fn driven_closed_form(t: f64, mu: f64, beta: f64) -> f64 {
    let om2 = mu * mu;
    let c = beta * mu;
    let a = (om2 - 1.0) / ((om2 - 1.0).powi(2) + c * c);
    let bb = -c * a / (om2 - 1.0);
    let wd = (om2 - c * c / 4.0).sqrt();
    let c1 = -bb;
    let c2 = (0.5 * c * c1 - a) / wd;
    a * t.sin() + bb * t.cos() + (-0.5 * c * t).exp() * (c1 * (wd * t).cos() + c2 * (wd * t).sin())
}

#[test]
fn plate_forcing_gives_the_driven_oscillator() {
    let geom = BoxGeometry::reference(2);
    let b = BasisSet::build(&geom, &BasisConfig::new(8, 2, 1.0)).unwrap();
    let p = Params { c: 1.0, b: 0.1, k: 0.0, rho: 1.0, delta: 1.0, beta: 0.1, gamma: 1.0, kappa: 1.0 };
    // h = -ψ₁ sin t, so h̃ = h_tt = ψ₁ sin t
    let sig = FaceSignal {
        face: "y0".into(),
        kind: SignalKind::Plate,
        spatial: Spatial::PlateMode { amp: 1.0, index: 1 },
        temporal: Temporal::Sine { amp: -1.0, omega: 1.0, phase: 0.0 },
    };
    let signals = vec![resolve(&geom, &sig, "/signals/0").unwrap()];
    let setup = Setup::new(&b, p, Mode::PaperTriangular, signals, Loads::default(), InitialData::default(), 1e-3, 2000)
        .unwrap();
    let sol = solve_linear(&setup, CoefficientField::Unit, Loads::default()).unwrap();
    let na = b.n_acoustic();
    let mu = b.mu(0);
    let mut worst: f64 = 0.0;
    for (t, u) in sol.p.times.iter().zip(&sol.p.u) {
        worst = worst.max((u[na] - driven_closed_form(*t, mu, p.beta)).abs());
        assert!(u[na + 1].abs() < 1e-14);
    }
    assert!(worst <= 1e-6, "plate error {worst:e}");
    // the acoustic block is driven through the coupling
    assert!(sol.p.u.last().unwrap().rows(0, na).amax() > 1e-6);
}

#[test]
fn paper_plate_block_ignores_acoustic_initial_data() {
    let b = BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(6, 3, 1.0)).unwrap();
    let asm = Assembler::new(&b, Params::reference(), Mode::PaperTriangular, CoefficientField::Unit).unwrap();
    let mut u0 = DVector::zeros(9);
    u0[6] = 0.5;
    u0[8] = -0.1;
    let a = integrate(&asm, &Loads::default(), u0.clone(), DVector::zeros(9), 1e-2, 50).unwrap();
    u0[0] = 3.0;
    u0[2] = -1.0;
    let mut v0 = DVector::zeros(9);
    v0[1] = 2.0;
    let b2 = integrate(&asm, &Loads::default(), u0, v0, 1e-2, 50).unwrap();
    for (x, y) in a.u.iter().zip(&b2.u) {
        assert_eq!(x.rows(6, 3), y.rows(6, 3));
    }
}

fn system_energy(asm: &Assembler<'_>, tr: &Trajectory) -> Vec<f64> {
    let s = asm.snapshot(0.0).unwrap();
    tr.u.iter().zip(&tr.v).map(|(u, v)| 0.5 * v.dot(&(&s.a * v)) + 0.5 * u.dot(&(&s.k * u))).collect()
}

#[test]
fn damped_runs_dissipate_and_undamped_runs_conserve() {
    let b = BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(8, 4, 1.0)).unwrap();
    let mut u0 = DVector::zeros(12);
    u0[0] = 1.0;
    u0[3] = -0.4;
    u0[8] = 0.2;
    let mut v0 = DVector::zeros(12);
    v0[1] = 0.7;
    v0[9] = -0.3;
    for (p, conservative) in [(Params::reference(), false), (undamped(), true)] {
        let asm = Assembler::new(&b, Params { k: 0.0, ..p }, Mode::Full, CoefficientField::Unit).unwrap();
        let tr = integrate(&asm, &Loads::default(), u0.clone(), v0.clone(), 1e-3, 1000).unwrap();
        let e = system_energy(&asm, &tr);
        for w in e.windows(2) {
            if conservative {
                assert!((w[1] - w[0]).abs() <= 1e-10 * w[0]);
            } else {
                assert!(w[1] <= w[0] * (1.0 + 1e-10));
            }
        }
        if !conservative {
            assert!(e[1000] < 0.99 * e[0]);
        }
    }
}

#[test]
fn linear_solves_are_additive() {
    let b = BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(6, 2, 1.0)).unwrap();
    let asm = Assembler::new(&b, Params::reference(), Mode::Full, CoefficientField::Unit).unwrap();
    let l1 = Loads::default().with_f(&b, |t, x| t.sin() * x[0]);
    let l2 = Loads::default().with_h(&b, |t, x| (PI * x[0]).sin() * t);
    let l12 = l1.clone().extend(l2.clone());
    let mut u1 = DVector::zeros(8);
    u1[2] = 0.4;
    let mut v2 = DVector::zeros(8);
    v2[6] = 1.0;
    let a = integrate(&asm, &l1, u1.clone(), DVector::zeros(8), 1e-2, 100).unwrap();
    let c = integrate(&asm, &l2, DVector::zeros(8), v2.clone(), 1e-2, 100).unwrap();
    let s = integrate(&asm, &l12, u1, v2, 1e-2, 100).unwrap();
    let sum = a.plus(&c).unwrap();
    let scale = s.u.iter().map(|x| x.amax()).fold(0.0, f64::max);
    for (x, y) in sum.u.iter().zip(&s.u) {
        assert!((x - y).amax() <= 1e-10 * scale);
    }
}

#[test]
fn compatibility_closed_forms() {
    let b = BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(6, 3, 1.0)).unwrap();
    let p = undamped();
    let none = Loads::default();
    let z = compute_compatibility(&b, &p, &CoefficientField::Unit, &InitialData::default(), &none, &[]).unwrap();
    assert!(z.p2.iter().chain(z.w2.iter()).all(|v| *v == 0.0));
    assert!(z.all_hold());

    let init = InitialData { p0: vec![1.0], ..Default::default() };
    let c = compute_compatibility(&b, &Params { c: 1.5, ..p }, &CoefficientField::Unit, &init, &none, &[]).unwrap();
    assert!((c.p2[0] + 2.25 * PI * PI / 4.0).abs() <= 1e-10);
    assert!(c.p2.rows(1, 5).amax() <= 1e-10);

    let init = InitialData { w0: vec![1.0], ..Default::default() };
    let c = compute_compatibility(&b, &p, &CoefficientField::Unit, &init, &none, &[]).unwrap();
    assert!(c.p2.amax() <= 1e-10);
    assert!((c.w2[0] + PI.powi(4)).abs() <= 1e-10 * PI.powi(4));
    assert!(!c.all_hold(), "w2 ≠ 0 breaks the plate clause");
}

#[test]
fn compose_and_zero_lifting() {
    let b = BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(4, 2, 1.0)).unwrap();
    let l = solve_lifting(&b, Params::reference(), CoefficientField::Unit, vec![], 1e-2, 10).unwrap();
    assert!(l.is_zero());
    let mut p = Trajectory::zeros(1e-2, 10, 4, 2);
    p.u[3][1] = 2.0;
    p.u[3][5] = 1.0;
    let c = compose_solution(&l.projected(), &p).unwrap();
    assert_eq!(c, p);
    let c = compose_solution(&p, &Trajectory::zeros(1e-2, 10, 4, 2)).unwrap();
    assert_eq!(c.u[3][1], 2.0);
    assert_eq!(c.u[3][5], 0.0);
    assert!(compose_solution(&p, &Trajectory::zeros(1e-2, 11, 4, 2)).is_err());
}

fn neumann_signal(amp: f64) -> FaceSignal {
    FaceSignal {
        face: "x0".into(),
        kind: SignalKind::Neumann,
        spatial: Spatial::Separable { amp, factors: vec![ProfileFactor { trig: TrigName::Cos, n: 1.0 }] },
        temporal: Temporal::RampSine { amp: 1.0, omega: 3.0, tau: 0.3 },
    }
}

/// Explicit RK4 on a 65² five-point grid: p_tt = Δp + b Δp_t, -p_x = g on x = 0,
/// p_x = 0 on x = 1, p_y = 0 on y = 0, p = 0 on y = 1.
fn fd_lifting(b: f64, times: &[f64]) -> Vec<Vec<f64>> {
    let n = 64;
    let h = 1.0 / n as f64;
    let sig = Temporal::RampSine { amp: 1.0, omega: 3.0, tau: 0.3 };
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let lap = |p: &[f64], g: f64, out: &mut [f64]| {
        for j in 0..n {
            for i in 0..=n {
                let c = p[idx(i, j)];
                let xm = if i == 0 { p[idx(1, j)] + 2.0 * h * g * (PI * j as f64 * h).cos() } else { p[idx(i - 1, j)] };
                let xp = if i == n { p[idx(n - 1, j)] } else { p[idx(i + 1, j)] };
                let ym = if j == 0 { p[idx(i, 1)] } else { p[idx(i, j - 1)] };
                let yp = p[idx(i, j + 1)];
                out[idx(i, j)] = (xm + xp + ym + yp - 4.0 * c) / (h * h);
            }
        }
    };
    let size = (n + 1) * (n + 1);
    let rhs = |t: f64, p: &[f64], v: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let jt = sig.jet(t);
        let mut lp = vec![0.0; size];
        let mut lv = vec![0.0; size];
        lap(p, jt[0], &mut lp);
        lap(v, jt[1], &mut lv);
        (v.to_vec(), lp.iter().zip(&lv).map(|(a, c)| a + b * c).collect())
    };
    let dt = 2.5e-4;
    let (mut p, mut v) = (vec![0.0; size], vec![0.0; size]);
    let mut out = Vec::new();
    let mut t = 0.0;
    let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(x, y)| x + a * y).collect() };
    for &target in times {
        while t < target - 1e-12 {
            let (k1p, k1v) = rhs(t, &p, &v);
            let (k2p, k2v) = rhs(t + dt / 2.0, &axpy(&p, dt / 2.0, &k1p), &axpy(&v, dt / 2.0, &k1v));
            let (k3p, k3v) = rhs(t + dt / 2.0, &axpy(&p, dt / 2.0, &k2p), &axpy(&v, dt / 2.0, &k2v));
            let (k4p, k4v) = rhs(t + dt, &axpy(&p, dt, &k3p), &axpy(&v, dt, &k3v));
            for q in 0..size {
                p[q] += dt / 6.0 * (k1p[q] + 2.0 * k2p[q] + 2.0 * k3p[q] + k4p[q]);
                v[q] += dt / 6.0 * (k1v[q] + 2.0 * k2v[q] + 2.0 * k3v[q] + k4v[q]);
            }
            t += dt;
        }
        out.push(p.clone());
    }
    out
}

#[test]
fn neumann_lifting_matches_finite_differences() {
    let geom = BoxGeometry::reference(2);
    let basis = BasisSet::build(&geom, &BasisConfig::new(60, 0, 1.0)).unwrap();
    let p = Params { k: 0.0, ..Params::reference() };
    let signals = vec![resolve(&geom, &neumann_signal(1.0), "/signals/0").unwrap()];
    let offsets = build_offsets(&basis, &signals).unwrap();
    let dt = 1e-3;
    let lift = solve_lifting(&basis, p, CoefficientField::Unit, offsets, dt, 1000).unwrap();
    let times = [0.25, 0.5, 0.75, 1.0];
    let fd = fd_lifting(p.b, &times);
    let h_fn = SeparableLift::new(
        &geom,
        Face::new(0, false),
        Source::Neumann,
        signals[0].factors.clone(),
        1.0,
        Truncation::Auto { tol: 1e-8, cap: 2_000_000 },
    )
    .unwrap();
    let n = 64;
    let h = 1.0 / n as f64;
    let pts: Vec<[f64; 2]> = (0..=n).flat_map(|j| (0..=n).map(move |i| [i as f64 * h, j as f64 * h])).collect();
    let hv: Vec<f64> = pts.iter().map(|x| h_fn.value(x)).collect();
    let wt = |x: &[f64; 2]| {
        let e = |v: f64| if v == 0.0 || v == 1.0 { 0.5 } else { 1.0 };
        h * h * e(x[0]) * e(x[1])
    };
    let sig = Temporal::RampSine { amp: 1.0, omega: 3.0, tau: 0.3 };
    let (mut err, mut size): (f64, f64) = (0.0, 0.0);
    for (k, t) in times.iter().enumerate() {
        let step = (t / dt).round() as usize;
        let c = &lift.hat.u[step];
        let s = sig.value(*t);
        let (mut e2, mut n2) = (0.0, 0.0);
        for (q, x) in pts.iter().enumerate() {
            let spec: f64 = (0..basis.n_acoustic()).map(|j| c[j] * basis.acoustic[j].value(x)).sum::<f64>() + s * hv[q];
            e2 += wt(x) * (spec - fd[k][q]).powi(2);
            n2 += wt(x) * fd[k][q].powi(2);
        }
        err = err.max(e2.sqrt());
        size = size.max(n2.sqrt());
    }
    assert!(size > 1e-3);
    assert!(err <= 1e-3 * size, "relative error {:e}", err / size);
}

#[test]
fn lifting_is_linear_in_the_data() {
    let geom = BoxGeometry::reference(2);
    let basis = BasisSet::build(&geom, &BasisConfig::new(10, 0, 1.0)).unwrap();
    let p = Params { k: 0.0, ..Params::reference() };
    let run = |amp: f64| {
        let s = vec![resolve(&geom, &neumann_signal(amp), "/signals/0").unwrap()];
        let o = build_offsets(&basis, &s).unwrap();
        solve_lifting(&basis, p, CoefficientField::Unit, o, 1e-2, 50).unwrap().projected()
    };
    let (a, b) = (run(1.0), run(2.0));
    for (x, y) in a.u.iter().zip(&b.u) {
        assert!((x * 2.0 - y).amax() <= 1e-12 * (1.0 + y.amax()));
    }
}
