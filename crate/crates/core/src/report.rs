//! CSV rendering. Numbers use the shortest decimal string that parses back to the same
//! `f64`, so identical runs give identical bytes.

use crate::assembly::Snapshot;
use crate::basis::BasisSet;
use crate::energy::EnergyReport;
use crate::mms::ConvergenceRow;
use crate::nonlinear::PicardLog;
use crate::study::PicardStudyRow;
use crate::trajectory::Trajectory;
use nalgebra::DMatrix;

pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn render<I: IntoIterator<Item = Vec<String>>>(header: &[&str], rows: I) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// One row per (sample, coefficient); `uddot` is empty when accelerations are absent.
pub fn trajectory_csv(tr: &Trajectory) -> String {
    let accel = tr.has_acceleration();
    let rows = tr.times.iter().enumerate().flat_map(move |(i, t)| {
        (0..tr.dim()).map(move |j| {
            let (block, index) = if j < tr.n_acoustic { ("acoustic", j) } else { ("plate", j - tr.n_acoustic) };
            vec![
                num(*t),
                block.to_string(),
                index.to_string(),
                num(tr.u[i][j]),
                num(tr.v[i][j]),
                if accel { num(tr.a[i][j]) } else { String::new() },
            ]
        })
    });
    render(&["t", "block", "index", "u", "udot", "uddot"], rows)
}

pub fn energy_csv(report: &EnergyReport) -> String {
    let (names, rows) = report.table();
    render(&names, rows.into_iter().map(|r| r.into_iter().map(num).collect()))
}

pub fn picard_log_csv(log: &PicardLog) -> String {
    let rows = log.steps.iter().map(|s| {
        vec![
            s.iter.to_string(),
            num(s.d),
            opt(s.ratio),
            num(s.sup_q),
            num(s.alpha_bar),
            num(s.alpha_t2),
            num(s.alpha_tinf),
            num(s.seconds),
        ]
    });
    render(&["iter", "d", "ratio", "sup_q", "alpha_bar", "alpha_t2", "alpha_tinf", "seconds"], rows)
}

/// Eigenvalues, 1-based within each family.
pub fn basis_info_csv(basis: &BasisSet) -> String {
    let acoustic = basis.acoustic.iter().enumerate().map(|(i, m)| vec![(i + 1).to_string(), num(m.lambda), "acoustic".into()]);
    let plate = basis.plate.iter().enumerate().map(|(i, m)| vec![(i + 1).to_string(), num(m.mu), "plate".into()]);
    render(&["index", "lambda_or_mu", "family"], acoustic.chain(plate))
}

pub fn convergence_csv(study: &str, rows: &[ConvergenceRow]) -> String {
    let rows = rows.iter().map(|r| {
        vec![
            study.to_string(),
            num(r.dt),
            r.n_acoustic.to_string(),
            r.n_plate.to_string(),
            num(r.error),
            opt(r.step_change),
        ]
    });
    render(&["study", "dt", "n_acoustic", "n_plate", "error", "step_change"], rows)
}

pub fn picard_study_csv(rows: &[PicardStudyRow]) -> String {
    let rows = rows.iter().map(|r| {
        vec![
            num(r.scale),
            r.iterations.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.max_ratio),
            r.converged.to_string(),
            opt(r.alpha_margin),
            opt(r.m1_margin),
            r.error.clone().unwrap_or_default(),
        ]
    });
    render(&["scale", "iterations", "max_ratio", "converged", "alpha_margin", "m1_margin", "error"], rows)
}

pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(vec![]);
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|x| num(*x))).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// Mass, damping and stiffness split into acoustic/plate blocks, named `A_pp`, `A_pw`, ...
pub fn system_blocks(s: &Snapshot) -> Vec<(String, DMatrix<f64>)> {
    let na = s.n_acoustic;
    let np = s.dim() - na;
    let mut out = vec![];
    for (name, m) in [("A", &s.a), ("B", &s.b), ("K", &s.k)] {
        for (tag, r0, nr, c0, nc) in [("pp", 0, na, 0, na), ("pw", 0, na, na, np), ("wp", na, np, 0, na), ("ww", na, np, na, np)] {
            out.push((format!("{name}_{tag}"), m.view((r0, c0), (nr, nc)).into_owned()));
        }
    }
    out
}
