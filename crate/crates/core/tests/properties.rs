use nalgebra::DVector;
use proptest::prelude::*;
use std::sync::OnceLock;
use westplate::assembly::{Assembler, Mode};
use westplate::basis::{BasisConfig, BasisSet};
use westplate::energy::{energy_series, fit_decay, trace_norm_neg_half};
use westplate::fields::{CoefficientField, Loads};
use westplate::geometry::{BoxGeometry, Label};
use westplate::linear::{integrate, InitialData};
use westplate::params::Params;
use westplate::report::{num, trajectory_csv};
use westplate::trajectory::Trajectory;

const NA: usize = 3;
const NP: usize = 2;

fn basis() -> &'static BasisSet {
    static B: OnceLock<BasisSet> = OnceLock::new();
    B.get_or_init(|| BasisSet::build(&BoxGeometry::reference(2), &BasisConfig::new(NA, NP, 1.0)).unwrap())
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, NA + NP)
}

fn random_trajectory(rows: Vec<Vec<f64>>) -> Trajectory {
    let steps = rows.len() / 3 - 1;
    let mut tr = Trajectory::zeros(0.1, steps, NA, NP);
    for i in 0..=steps {
        tr.u[i] = DVector::from_vec(rows[3 * i].clone());
        tr.v[i] = DVector::from_vec(rows[3 * i + 1].clone());
        tr.a[i] = DVector::from_vec(rows[3 * i + 2].clone());
    }
    tr
}

fn run(mode: Mode, init: &InitialData, steps: usize) -> Trajectory {
    let p = Params { k: 0.0, ..Params::reference() };
    let asm = Assembler::new(basis(), p, mode, CoefficientField::Unit).unwrap();
    let init = init.fitted(NA, NP).unwrap();
    integrate(&asm, &Loads::default(), init.u0(), init.v0(), 0.01, steps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn csv_numbers_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn energy_terms_are_nonnegative_and_quadratic(
        rows in prop::collection::vec(coeffs(), 6..=12).prop_filter("whole samples", |r| r.len() % 3 == 0),
        s in -3.0..3.0f64,
    ) {
        let tr = random_trajectory(rows);
        let p = Params::reference();
        let e = energy_series(&tr, basis(), &p).unwrap();
        let es = energy_series(&tr.scaled(s), basis(), &p).unwrap();
        for i in 0..e.len() {
            prop_assert!(e.instantaneous(i) >= 0.0);
            prop_assert!(e.total(i) >= 0.0);
            prop_assert!((es.total(i) - s * s * e.total(i)).abs() <= 1e-10 * (1.0 + e.total(i)) * (1.0 + s * s));
        }
        let e1 = e.e1_instantaneous().unwrap();
        prop_assert!(e1.iter().zip(e.instantaneous_series()).all(|(a, b)| *a >= b - 1e-14));
    }

    #[test]
    fn linear_solves_superpose(
        x in coeffs(), y in coeffs(), a in -2.0..2.0f64, b in -2.0..2.0f64, paper in any::<bool>(),
    ) {
        let mode = if paper { Mode::PaperTriangular } else { Mode::Full };
        let ix = InitialData { p0: x[..NA].to_vec(), w0: x[NA..].to_vec(), ..Default::default() };
        let iy = InitialData { p1: y[..NA].to_vec(), w1: y[NA..].to_vec(), ..Default::default() };
        let combined = InitialData {
            p0: ix.p0.iter().map(|v| a * v).collect(),
            w0: ix.w0.iter().map(|v| a * v).collect(),
            p1: iy.p1.iter().map(|v| b * v).collect(),
            w1: iy.w1.iter().map(|v| b * v).collect(),
        };
        let lhs = run(mode, &combined, 20);
        let rhs = run(mode, &ix, 20).scaled(a).plus(&run(mode, &iy, 20).scaled(b)).unwrap();
        let d = lhs.minus(&rhs).unwrap();
        let worst = d.u.iter().chain(&d.v).map(|v| v.amax()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-10, "{}", worst);
    }

    #[test]
    fn decay_fit_recovers_exponentials(rate in -3.0..-0.01f64, amp in 1e-6..1e3f64) {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let values: Vec<f64> = times.iter().map(|t| amp * (rate * t).exp()).collect();
        let (r, g) = fit_decay(&times, &values, 0.0, 10.0).unwrap();
        prop_assert!((r - rate).abs() <= 1e-9 * rate.abs().max(1.0));
        prop_assert!(g >= 1.0 - 1e-9);
    }

    #[test]
    fn trace_norm_is_homogeneous(g in prop::collection::vec(-1.0..1.0f64, NP), s in -5.0..5.0f64) {
        let n = trace_norm_neg_half(&g, basis());
        let gs: Vec<f64> = g.iter().map(|v| s * v).collect();
        prop_assert!((trace_norm_neg_half(&gs, basis()) - s * s * n).abs() <= 1e-12 * (1.0 + n) * (1.0 + s * s));
    }

    #[test]
    fn trajectory_csv_has_one_row_per_coefficient(
        rows in prop::collection::vec(coeffs(), 3..=9).prop_filter("whole samples", |r| r.len() % 3 == 0),
    ) {
        let tr = random_trajectory(rows);
        let body = trajectory_csv(&tr);
        prop_assert_eq!(body.lines().count(), 1 + tr.len() * tr.dim());
        let first = body.lines().nth(1).unwrap();
        let u: f64 = first.split(',').nth(3).unwrap().parse().unwrap();
        prop_assert_eq!(u, tr.u[0][0]);
    }

    #[test]
    fn boxes_tile_their_faces(sides in prop::collection::vec(0.1..5.0f64, 2..=3)) {
        let mut labels = vec![[Label::Neumann, Label::Neumann]; sides.len()];
        labels[1] = [Label::Plate, Label::Dirichlet];
        let g = BoxGeometry::new(sides.clone(), labels).unwrap();
        for f in g.faces() {
            let v = g.face_area(f) * g.side(f.axis);
            prop_assert!((v - g.volume()).abs() <= 1e-12 * g.volume());
        }
    }

    #[test]
    fn initial_data_pads_or_rejects(n in 0usize..6) {
        let init = InitialData { p0: vec![1.0; n], ..Default::default() };
        let r = init.fitted(NA, NP);
        prop_assert_eq!(r.is_ok(), n <= NA);
        if let Ok(f) = r {
            prop_assert_eq!(f.p0.len(), NA);
            prop_assert_eq!(f.w1.len(), NP);
        }
    }
}
