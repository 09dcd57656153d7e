//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use nalgebra::DVector;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use westplate::assembly::{structure_report, Assembler, Mode};
use westplate::basis::*;
use westplate::energy::{energy_series, identity_residual, trace_ratio, Estimate, Identity};
use westplate::error::Error;
use westplate::fields::{CoefficientField, Loads};
use westplate::geometry::BoxGeometry;
use westplate::linear::{compute_compatibility, integrate, InitialData};
use westplate::mms::{Manufactured, MmsField};
use westplate::nonlinear::{picard_run, PicardConfig};
use westplate::params::Params;
use westplate::quadrature::TensorGrid;
use westplate::scenario::{MmsSpec, Scenario, ScenarioFile};
use westplate::signals::{FaceSignal, SignalKind, Spatial, Temporal};
use westplate::study::{run_decay, run_mms, run_simulate};
use westplate::trajectory::Trajectory;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn load(name: &str) -> Scenario {
    Scenario::load(&scenarios().join(name)).expect("bundled scenario parses")
}

fn undamped() -> Params {
    Params { c: 1.0, b: 0.0, k: 0.0, rho: 1.0, delta: 1.0, beta: 0.0, gamma: 1.0, kappa: 1.0 }
}

fn build(na: usize, np: usize) -> BasisSet {
    BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(na, np, 1.0)).unwrap()
}

/// Five-point Laplace solve on the unit square with the reference labels and the
/// Neumann datum √2 sin(πx) on y = 0; returns rows j = 0..n-1.
fn fd_extension(n: usize) -> Vec<Vec<f64>> {
    let h = 1.0 / n as f64;
    let (nx, ny) = (n + 1, n);
    let size = nx * ny;
    let bw = nx;
    let width = 2 * bw + 1;
    let mut a = vec![0.0; size * width];
    let mut rhs = vec![0.0; size];
    let id = |i: usize, j: usize| j * nx + i;
    let set = |a: &mut Vec<f64>, r: usize, c: usize, v: f64| a[r * width + (c + bw - r)] += v;
    for j in 0..ny {
        for i in 0..nx {
            let r = id(i, j);
            set(&mut a, r, r, 4.0);
            let left = if i == 0 { 1 } else { i - 1 };
            let right = if i == n { n - 1 } else { i + 1 };
            set(&mut a, r, id(left, j), -1.0);
            set(&mut a, r, id(right, j), -1.0);
            if j + 1 < ny {
                set(&mut a, r, id(i, j + 1), -1.0);
            }
            if j == 0 {
                set(&mut a, r, id(i, 1), -1.0);
                rhs[r] -= 2.0 * h * 2f64.sqrt() * (PI * i as f64 * h).sin();
            } else {
                set(&mut a, r, id(i, j - 1), -1.0);
            }
        }
    }
    for k in 0..size {
        let piv = a[k * width + bw];
        for r in k + 1..(k + bw + 1).min(size) {
            let f = a[r * width + (k + bw - r)] / piv;
            if f != 0.0 {
                for c in k..(k + bw + 1).min(size) {
                    a[r * width + (c + bw - r)] -= f * a[k * width + (c + bw - k)];
                }
                rhs[r] -= f * rhs[k];
            }
        }
    }
    let mut u = vec![0.0; size];
    for k in (0..size).rev() {
        let mut s = rhs[k];
        for c in k + 1..(k + bw + 1).min(size) {
            s -= a[k * width + (c + bw - k)] * u[c];
        }
        u[k] = s / a[k * width + bw];
    }
    (0..ny).map(|j| (0..nx).map(|i| u[id(i, j)]).collect()).collect()
}

fn basis_fidelity() -> Outcome {
    let mut worst_eig: f64 = 0.0;
    let mut worst_gram: f64 = 0.0;
    for geom in [BoxGeometry::reference(2), BoxGeometry::reference(3)] {
        let n = if geom.dim() == 2 { 12 } else { 8 };
        let modes = build_acoustic_basis(&geom, n).unwrap();
        let maxi = modes.iter().map(|m| m.max_index()).max().unwrap();
        let grid = TensorGrid::volume(&geom, &vec![2 * maxi + 8; geom.dim()]);
        for (a, ma) in modes.iter().enumerate() {
            for (b, mb) in modes.iter().enumerate() {
                let q = grid.integrate(|x| ma.value(x) * mb.value(x));
                worst_gram = worst_gram.max((q - if a == b { 1.0 } else { 0.0 }).abs());
            }
            for x in grid.points.iter().step_by(5) {
                worst_eig = worst_eig.max((ma.laplacian(x) + ma.lambda * ma.value(x)).abs() / ma.lambda.max(1.0));
            }
        }
        let plate = build_plate_basis(&geom, 6).unwrap();
        let face = TensorGrid::face(&geom, geom.plate_face(), &vec![24; geom.dim()]);
        for (a, pa) in plate.iter().enumerate() {
            for (b, pb) in plate.iter().enumerate() {
                let q = face.integrate(|x| pa.value(x) * pb.value(x));
                worst_gram = worst_gram.max((q - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    ensure(worst_eig <= 1e-10, || format!("eigen-residual {worst_eig:e}"))?;
    ensure(worst_gram <= 1e-10, || format!("Gram deviation {worst_gram:e}"))?;

    let b = build(4, 8);
    let mut worst_ext: f64 = 0.0;
    for l in &b.lifted {
        worst_ext = worst_ext.max(l.lift.residual);
        for &x in &[0.05, 0.37, 0.5, 0.81] {
            worst_ext = worst_ext.max(l.value(&[x, 1.0]).abs());
            worst_ext = worst_ext.max(l.grad(&[0.0, x])[0].abs()).max(l.grad(&[1.0, x])[0].abs());
            worst_ext = worst_ext.max(l.lift.laplacian_at(&[x, 0.4]).abs());
        }
    }
    ensure(worst_ext <= 1e-8, || format!("extension residual {worst_ext:e}"))?;

    let (coarse, fine) = (fd_extension(64), fd_extension(128));
    let l = &b.lifted[0];
    let mut worst_fd: f64 = 0.0;
    for (v, fd) in [
        (l.value(&[0.5, 0.0]), (4.0 * fine[0][64] - coarse[0][32]) / 3.0),
        (l.value(&[0.5, 0.5]), (4.0 * fine[64][64] - coarse[32][32]) / 3.0),
    ] {
        worst_fd = worst_fd.max(((v - fd) / fd).abs());
    }
    ensure(worst_fd <= 1e-4, || format!("finite-difference oracle {worst_fd:e}"))?;
    Ok(format!("eig {worst_eig:.1e}, gram {worst_gram:.1e}, ext {worst_ext:.1e}, fd {worst_fd:.1e}"))
}

fn assembly_identities() -> Outcome {
    let b = build(8, 4);
    let na = b.n_acoustic();
    let alpha = CoefficientField::closed(|t, x| 1.0 + 0.2 * (PI * x[0]).cos() * (1.0 + t), |_, x| 0.2 * (PI * x[0]).cos());
    let asm = Assembler::new(&b, Params::reference(), Mode::Full, alpha.clone()).unwrap();
    let s = asm.sample(0.4).unwrap();
    let lap = b.inner_products(Weight::Reciprocal(&s.alpha), Kind::Laplacian).unwrap();
    let grad = b.inner_products(Weight::One, Kind::Gradient).unwrap();
    let face = TensorGrid::face(&b.geometry, b.geometry.plate_face(), &[40, 40]);
    let mut worst: f64 = 0.0;
    for j in 0..na {
        for l in 0..na {
            worst = worst.max((grad[(j, l)] - if j == l { b.acoustic[j].lambda } else { 0.0 }).abs());
        }
    }
    for (i, psi) in b.plate.iter().enumerate() {
        for (l, m) in b.acoustic.iter().enumerate() {
            let direct = face.integrate(|x| psi.value(x) * m.value(x));
            worst = worst.max((b.grams.grad[(l, na + i)] + direct).abs());
            worst = worst.max(lap[(l, na + i)].abs());
        }
    }
    ensure(worst <= 1e-10, || format!("identity residual {worst:e}"))?;

    let paper = Assembler::new(&b, Params::reference(), Mode::PaperTriangular, alpha).unwrap().snapshot(0.3).unwrap();
    for r in na..b.dim() {
        for c in (0..b.dim()).filter(|c| *c != r) {
            ensure(paper.a[(r, c)] == 0.0 && paper.b[(r, c)] == 0.0 && paper.k[(r, c)] == 0.0, || {
                format!("paper plate row {r} couples to column {c}")
            })?;
        }
    }

    let p = Params { kappa: 1.7, ..Params::reference() };
    let full = Assembler::new(&b, p, Mode::Full, CoefficientField::Unit).unwrap().snapshot(0.0).unwrap();
    let tri = Assembler::new(&b, p, Mode::PaperTriangular, CoefficientField::Unit).unwrap().snapshot(0.0).unwrap();
    let rep = structure_report(&full, &tri).unwrap();
    let mut worst_rep: f64 = 0.0;
    for (i, psi) in b.plate.iter().enumerate() {
        for (l, m) in b.acoustic.iter().enumerate() {
            let want = -face.integrate(|x| psi.value(x) * m.value(x));
            worst_rep = worst_rep.max((rep.plate_coupling[(i, l)] - want).abs());
        }
    }
    ensure(worst_rep <= 1e-10, || format!("structure report deviation {worst_rep:e}"))?;
    Ok(format!("identities {worst:.1e}, paper rows uncoupled, report {worst_rep:.1e}"))
}

fn oscillator() -> Outcome {
    let b = build(0, 1);
    let asm = Assembler::new(&b, undamped(), Mode::PaperTriangular, CoefficientField::Unit).unwrap();
    let tr = integrate(&asm, &Loads::default(), DVector::from_element(1, 1.0), DVector::zeros(1), 1e-3, 1000).unwrap();
    let w = PI * PI;
    let err = tr.times.iter().zip(&tr.u).map(|(t, u)| (u[0] - (w * t).cos()).abs()).fold(0.0, f64::max);
    let r = energy_series(&tr, &b, &undamped()).unwrap();
    let dev = (0..r.len()).map(|i| (r.ew(i) - PI.powi(4)).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-4, || format!("cosine error {err:e}"))?;
    ensure(dev <= 1e-6, || format!("energy deviation {dev:e}"))?;
    Ok(format!("max error {err:.2e}, energy deviation {dev:.1e}"))
}

fn convergence() -> Outcome {
    let sc = load("mms_trig.json");
    let b = sc.build_basis().unwrap();
    let r = run_mms(&sc, &b).map_err(|e| e.to_string())?;
    let orders = r.temporal_orders.clone();
    ensure(orders.len() == 2 && orders.iter().all(|o| (1.8..=2.2).contains(o)), || format!("orders {orders:?}"))?;
    let red = r.spatial_reduction.unwrap_or(0.0);
    ensure(red >= 1e2, || format!("spatial reduction {red}"))?;

    let mut f = sc.file.clone();
    f.mms = Some(MmsSpec { field: MmsField::InSpan, dt0: 1e-2, levels: 1, n_values: vec![3, 4, 8] });
    let sc = Scenario::validate(f).unwrap();
    let r = run_mms(&sc, &sc.build_basis().unwrap()).map_err(|e| e.to_string())?;
    let in_span = r.temporal.iter().chain(&r.spatial).map(|r| r.error).fold(0.0, f64::max);
    ensure(in_span <= 1e-9, || format!("in-span error {in_span:e}"))?;
    Ok(format!("orders {:.3}/{:.3}, reduction {red:.0}, in-span {in_span:.1e}", orders[0], orders[1]))
}

fn system_energy(asm: &Assembler<'_>, tr: &Trajectory) -> Vec<f64> {
    let s = asm.snapshot(0.0).unwrap();
    tr.u.iter().zip(&tr.v).map(|(u, v)| 0.5 * v.dot(&(&s.a * v)) + 0.5 * u.dot(&(&s.k * u))).collect()
}

fn enid(dt: f64) -> f64 {
    let b = build(6, 3);
    let alpha = CoefficientField::closed(|t, x| 1.0 + 0.2 * (t + x[0]).sin(), |t, x| 0.2 * (t + x[0]).cos());
    let asm = Assembler::new(&b, Params::reference(), Mode::Full, alpha).unwrap();
    let loads = Loads::default().with_f(&b, |t, x| (2.0 * t).sin() * x[1]);
    let mut u0 = DVector::zeros(9);
    u0[0] = 0.3;
    u0[2] = 0.1;
    u0[7] = -0.2;
    let tr = integrate(&asm, &loads, u0, DVector::zeros(9), dt, (0.5 / dt).round() as usize).unwrap();
    identity_residual(&tr, &asm, &loads, Identity::Enid).unwrap().max()
}

fn dissipation() -> Outcome {
    let b = build(8, 4);
    let mut u0 = DVector::zeros(12);
    u0[0] = 1.0;
    u0[3] = -0.4;
    u0[8] = 0.2;
    let mut v0 = DVector::zeros(12);
    v0[1] = 0.7;
    v0[9] = -0.3;
    let mut growth = f64::NEG_INFINITY;
    let mut drift: f64 = 0.0;
    for (p, conservative) in [(Params { k: 0.0, ..Params::reference() }, false), (undamped(), true)] {
        let asm = Assembler::new(&b, p, Mode::Full, CoefficientField::Unit).unwrap();
        let tr = integrate(&asm, &Loads::default(), u0.clone(), v0.clone(), 1e-3, 1000).unwrap();
        for w in system_energy(&asm, &tr).windows(2) {
            let rel = (w[1] - w[0]) / w[0];
            if conservative {
                drift = drift.max(rel.abs());
            } else {
                growth = growth.max(rel);
            }
        }
    }
    ensure(growth <= 1e-10, || format!("per-step growth {growth:e}"))?;
    ensure(drift <= 1e-10, || format!("conservative residual {drift:e}"))?;
    let ratio = enid(1e-2) / enid(5e-3);
    ensure((ratio - 4.0).abs() <= 1.0, || format!("enid halving ratio {ratio}"))?;
    Ok(format!("max growth {growth:.1e}, conservative {drift:.1e}, enid ratio {ratio:.3}"))
}

fn run_cli(cmd: &str, scenario: &str, out: &std::path::Path) -> (i32, serde_json::Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_westplate"))
        .args([cmd, "--scenario"])
        .arg(scenarios().join(scenario))
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let manifest = std::fs::read_to_string(out.join("manifest.json")).expect("manifest written");
    (status.status.code().unwrap_or(-1), serde_json::from_str(&manifest).unwrap())
}

fn degeneracy() -> Outcome {
    let sc = load("degenerate.json");
    let b = sc.build_basis().unwrap();
    match picard_run(&sc.setup(&b).unwrap(), &sc.picard) {
        Err(Error::Degeneracy { t, .. }) => ensure(t == 0.0, || format!("raised at t = {t}"))?,
        other => return Err(format!("expected a degeneracy, got {:?}", other.map(|r| r.log))),
    }
    let dir = tempfile::tempdir().unwrap();
    let (code, m) = run_cli("simulate", "degenerate.json", dir.path());
    ensure(code == 3, || format!("exit code {code}"))?;
    ensure(m["error"]["class"] == "DegeneracyError", || format!("manifest error {}", m["error"]))?;
    Ok(format!("raised at t = 0, exit {code}, site {}", m["error"]["location"]))
}

fn picard() -> Outcome {
    let sc = load("reference.json");
    let b = sc.build_basis().unwrap();
    let mut lin = sc.file.clone();
    lin.params.k = 0.0;
    let lin = Scenario::validate(lin).unwrap();
    let r0 = picard_run(&lin.setup(&b).unwrap(), &PicardConfig::default()).map_err(|e| e.to_string())?;
    ensure(r0.log.converged && r0.log.iterations() == 1, || format!("k = 0 took {} iterations", r0.log.iterations()))?;

    let e1 = energy_series(&run_simulate(&lin, &b).unwrap().trajectory, &b, &sc.params).unwrap().e1_instantaneous().unwrap();
    ensure(e1[0] <= 1e-4, || format!("initial higher energy {:e}", e1[0]))?;
    let out = run_simulate(&sc, &b).map_err(|e| e.to_string())?;
    let log = out.picard.unwrap();
    let ratios: Vec<f64> = log.steps.iter().filter_map(|s| s.ratio).collect();
    ensure(log.converged && log.iterations() <= 10, || format!("{} iterations", log.iterations()))?;
    ensure(sc.picard.tol == 1e-10, || "tolerance".into())?;
    ensure(ratios.iter().all(|r| *r <= 0.5), || format!("ratios {ratios:?}"))?;
    let sc_res = log.self_consistency.unwrap_or(f64::INFINITY);
    ensure(sc_res <= 10.0 * sc.picard.tol, || format!("self-consistency {sc_res:e}"))?;
    Ok(format!(
        "k = 0: 1 iteration; small data: {} iterations, max ratio {:.1e}, self-consistency {sc_res:.1e}",
        log.iterations(),
        ratios.iter().cloned().fold(0.0, f64::max)
    ))
}

fn decay() -> Outcome {
    let sc = load("decay.json");
    ensure(sc.params.k > 0.0 && sc.t_end() == 10.0, || "decay scenario shape".into())?;
    let r = run_decay(&sc, &sc.build_basis().unwrap()).map_err(|e| e.to_string())?;
    ensure(r.rate < 0.0 && r.goodness >= 0.95 && r.energy_ratio <= 1e-2, || {
        format!("rate {}, goodness {}, E(10)/E(0) {:e}", r.rate, r.goodness, r.energy_ratio)
    })?;
    Ok(format!("rate {:.3}, goodness {:.4}, E(10)/E(0) {:.1e}", r.rate, r.goodness, r.energy_ratio))
}

/// Member `j` of the audit family: distinct modal data and a plate load. Boundary data
/// is left out because the basic estimate only controls interior and plate forcing.
fn family_member(j: usize, n: usize, scale: f64) -> ScenarioFile {
    let mut f = ScenarioFile::reference();
    f.params.k = 0.0;
    f.basis.n_acoustic = n;
    f.basis.n_plate = n;
    f.time.dt = 2e-3;
    let amp = scale * 1e-3 * (1.0 + j as f64);
    let mut p0 = vec![0.0; j % 6 + 1];
    p0[j % 6] = amp;
    let mut w0 = vec![0.0; j % 3 + 1];
    w0[j % 3] = 0.5 * amp;
    f.initial.p0 = p0;
    f.initial.wtil0 = w0;
    f.signals = vec![FaceSignal {
        face: "y0".into(),
        kind: SignalKind::Plate,
        spatial: Spatial::PlateMode { amp: scale * 1e-4, index: j % 4 + 1 },
        temporal: Temporal::RampSine { amp: 1.0, omega: 1.0 + j as f64, tau: 0.2 },
    }];
    f.outputs.audits = vec![Estimate::Enest];
    f
}

fn audits() -> Outcome {
    let mut c_hat = vec![];
    let mut trace = [0.0f64; 2];
    for (level, n) in [8usize, 16].iter().enumerate() {
        for j in 0..10 {
            let sc = Scenario::validate(family_member(j, *n, 1.0)).unwrap();
            let b = sc.build_basis().unwrap();
            let out = run_simulate(&sc, &b).map_err(|e| e.to_string())?;
            if level == 0 {
                c_hat.push(out.audits[0].c_hat);
            }
            trace[level] = trace[level].max(trace_ratio(&out.trajectory, &b));
        }
    }
    let (lo, hi) = c_hat.iter().fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(*c), b.max(*c)));
    ensure(c_hat.iter().all(|c| c.is_finite() && *c > 0.0), || format!("C_hat {c_hat:?}"))?;
    ensure(hi / lo <= 5.0, || format!("C_hat spread {} over {c_hat:?}", hi / lo))?;
    let stab = trace[1] / trace[0];
    ensure((1.0 / 3.0..=3.0).contains(&stab), || format!("trace constant {} -> {}", trace[0], trace[1]))?;

    let mut worst: f64 = 0.0;
    for s in [1e-3, 7.0] {
        let sc = Scenario::validate(family_member(3, 8, s)).unwrap();
        let out = run_simulate(&sc, &sc.build_basis().unwrap()).map_err(|e| e.to_string())?;
        worst = worst.max((out.audits[0].c_hat - c_hat[3]).abs() / c_hat[3]);
    }
    ensure(worst <= 1e-10, || format!("homogeneity {worst:e}"))?;
    Ok(format!(
        "C_hat in [{lo:.3}, {hi:.3}], trace constant {:.4} -> {:.4}, homogeneity {worst:.1e}",
        trace[0], trace[1]
    ))
}

fn compatibility() -> Outcome {
    let b = build(6, 3);
    let none = Loads::default();
    let p = undamped();
    let init = InitialData { p0: vec![1.0], ..Default::default() };
    let c = compute_compatibility(&b, &Params { c: 1.5, ..p }, &CoefficientField::Unit, &init, &none, &[]).unwrap();
    let mut worst = (c.p2[0] + 2.25 * PI * PI / 4.0).abs().max(c.p2.rows(1, 5).amax());
    let init = InitialData { w0: vec![1.0], ..Default::default() };
    let c = compute_compatibility(&b, &p, &CoefficientField::Unit, &init, &none, &[]).unwrap();
    worst = worst.max(c.p2.amax()).max((c.w2[0] + PI.powi(4)).abs() / PI.powi(4));
    ensure(worst <= 1e-10, || format!("closed forms {worst:e}"))?;

    let b = build(8, 8);
    let lin = Params { k: 0.0, ..Params::reference() };
    let mut mms: f64 = 0.0;
    for field in [MmsField::TrigProduct, MmsField::PolynomialRamp, MmsField::InSpan] {
        let m = Manufactured::new(field, &b, lin, Mode::Full).unwrap();
        let c = compute_compatibility(&b, &lin, &CoefficientField::Unit, &m.initial(), &m.loads(), &[]).unwrap();
        mms = mms.max((&c.p2 - &m.second_derivative_at_zero()).amax());
    }
    ensure(mms <= 1e-6, || format!("MMS second derivative {mms:e}"))?;
    Ok(format!("closed forms {worst:.1e}, MMS {mms:.1e}"))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let (code, _) = run_cli("simulate", "reference.json", d.path());
        ensure(code == 0, || format!("exit code {code}"))?;
    }
    for name in ["trajectory.csv", "energy.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        ensure(a == b, || format!("{name} differs"))?;
    }
    Ok("trajectory.csv and energy.csv identical".into())
}

fn main() {
    let checks: Vec<(&str, fn() -> Outcome)> = vec![
        ("basis fidelity", basis_fidelity),
        ("assembly identities", assembly_identities),
        ("oscillator ground truth", oscillator),
        ("convergence", convergence),
        ("dissipation and identities", dissipation),
        ("degeneracy guard", degeneracy),
        ("Picard behavior", picard),
        ("exponential decay", decay),
        ("estimate audits", audits),
        ("compatibility", compatibility),
        ("determinism", determinism),
    ];
    let results: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = checks
            .iter()
            .map(|(_, f)| s.spawn(move || std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()))))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), r)) in checks.iter().zip(&results).enumerate() {
        match r {
            Ok(detail) => println!("AC{:<2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("AC{:<2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
