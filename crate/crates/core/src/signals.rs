//! Boundary signals: separable products of a spatial profile and a temporal signal
//! carrying exact derivatives up to fourth order.

use crate::error::{Error, Result};
use crate::geometry::{BoxGeometry, Face, Label};
use crate::trig::{Factor, Trig};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Value and derivatives 0..=4 at one time.
pub type Jet = [f64; 5];

fn leibniz(a: &Jet, b: &Jet) -> Jet {
    const BIN: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];
    let mut r = [0.0; 5];
    for n in 0..5 {
        for k in 0..=n {
            r[n] += BIN[n][k] * a[k] * b[n - k];
        }
    }
    r
}

/// `exp(-((t - t0)/w)²)` and its derivatives (Hermite polynomials).
fn gauss_jet(t: f64, t0: f64, w: f64) -> Jet {
    let u = (t - t0) / w;
    let e = (-u * u).exp();
    let (w1, w2, w3, w4) = (w, w * w, w * w * w, w * w * w * w);
    [
        e,
        -2.0 * u * e / w1,
        (4.0 * u * u - 2.0) * e / w2,
        (-8.0 * u * u * u + 12.0 * u) * e / w3,
        (16.0 * u.powi(4) - 48.0 * u * u + 12.0) * e / w4,
    ]
}

fn sin_jet(t: f64, om: f64) -> Jet {
    let (s, c) = (om * t).sin_cos();
    [s, om * c, -om * om * s, -om.powi(3) * c, om.powi(4) * s]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Temporal {
    Zero,
    /// `amp (1 - exp(-t²/tau²)) sin(omega t)`.
    RampSine { amp: f64, omega: f64, tau: f64 },
    /// `amp exp(-((t - t0)/width)²)`.
    Gaussian { amp: f64, t0: f64, width: f64 },
    /// `Σ c_i t^i`.
    Polynomial { coefs: Vec<f64> },
    /// `amp sin(omega t + phase)`.
    Sine { amp: f64, omega: f64, phase: f64 },
}

impl Temporal {
    pub fn jet(&self, t: f64) -> Jet {
        match self {
            Temporal::Zero => [0.0; 5],
            Temporal::RampSine { amp, omega, tau } => {
                let g = gauss_jet(t, 0.0, *tau);
                let ramp = [1.0 - g[0], -g[1], -g[2], -g[3], -g[4]];
                leibniz(&ramp, &sin_jet(t, *omega)).map(|v| amp * v)
            }
            Temporal::Gaussian { amp, t0, width } => gauss_jet(t, *t0, *width).map(|v| amp * v),
            Temporal::Polynomial { coefs } => {
                let mut r = [0.0; 5];
                for (d, slot) in r.iter_mut().enumerate() {
                    // Horner over the differentiated coefficients
                    let mut h = 0.0;
                    for i in (d..coefs.len()).rev() {
                        let fall: f64 = (0..d).map(|j| (i - j) as f64).product();
                        h = h * t + coefs[i] * fall;
                    }
                    *slot = h;
                }
                r
            }
            Temporal::Sine { amp, omega, phase } => {
                let (s, c) = (omega * t + phase).sin_cos();
                let om = *omega;
                [s, om * c, -om * om * s, -om.powi(3) * c, om.powi(4) * s].map(|v| amp * v)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.jet(t)[0]
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Temporal::Zero => true,
            Temporal::RampSine { amp, .. } | Temporal::Gaussian { amp, .. } | Temporal::Sine { amp, .. } => *amp == 0.0,
            Temporal::Polynomial { coefs } => coefs.iter().all(|c| *c == 0.0),
        }
    }

    /// Multiply the signal by `s`.
    pub fn scaled(&self, s: f64) -> Temporal {
        match self.clone() {
            Temporal::Zero => Temporal::Zero,
            Temporal::RampSine { amp, omega, tau } => Temporal::RampSine { amp: amp * s, omega, tau },
            Temporal::Gaussian { amp, t0, width } => Temporal::Gaussian { amp: amp * s, t0, width },
            Temporal::Polynomial { coefs } => Temporal::Polynomial { coefs: coefs.iter().map(|c| c * s).collect() },
            Temporal::Sine { amp, omega, phase } => Temporal::Sine { amp: amp * s, omega, phase },
        }
    }
}

/// One factor `cos(n π x / L)` or `sin(n π x / L)` of a separable face profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFactor {
    pub trig: TrigName,
    /// Wavenumber in units of π / side length.
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigName {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Spatial {
    Constant { amp: f64 },
    /// `amp Π factors`, one factor per tangential axis of the face (ascending axis order).
    Separable { amp: f64, factors: Vec<ProfileFactor> },
    /// Plate eigenmode (1-based position in the plate basis order); plate face only.
    PlateMode { amp: f64, index: usize },
    /// Sampled values; accepted by the schema, rejected by the solver.
    Tabulated { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    /// `a` on an absorbing face.
    Absorbing,
    /// `g_D` on a Dirichlet face.
    Dirichlet,
    /// `g_N` on a Neumann face.
    Neumann,
    /// Plate load `h`; the solver uses `h̃ = h_tt`.
    Plate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSignal {
    /// Face name such as `x0` or `y1`.
    pub face: String,
    pub kind: SignalKind,
    pub spatial: Spatial,
    pub temporal: Temporal,
}

/// Face data resolved against a geometry: amplitude and one factor per tangential axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSignal {
    pub face: Face,
    pub kind: SignalKind,
    pub amp: f64,
    pub factors: Vec<Factor>,
    pub plate_index: Option<usize>,
    pub temporal: Temporal,
}

impl ResolvedSignal {
    /// Spatial profile at a point of the face (plate-mode profiles need the plate basis).
    pub fn profile(&self, x: &[f64], axes: &[usize]) -> f64 {
        self.amp * axes.iter().zip(&self.factors).map(|(a, f)| f.value(x[*a])).product::<f64>()
    }
}

pub fn parse_face(geom: &BoxGeometry, name: &str, location: &str) -> Result<Face> {
    geom.faces()
        .find(|f| f.name() == name)
        .ok_or_else(|| Error::constraint(location, format!("no face named {name}")))
}

pub fn resolve(geom: &BoxGeometry, sig: &FaceSignal, location: &str) -> Result<ResolvedSignal> {
    let face = parse_face(geom, &sig.face, &format!("{location}/face"))?;
    let label = geom.label(face);
    let want = match sig.kind {
        SignalKind::Absorbing => Label::Absorbing,
        SignalKind::Dirichlet => Label::Dirichlet,
        SignalKind::Neumann => Label::Neumann,
        SignalKind::Plate => Label::Plate,
    };
    if label != want {
        return Err(Error::constraint(
            &format!("{location}/kind"),
            format!("face {} is labeled {label:?}", sig.face),
        ));
    }
    let axes = geom.tangential_axes(face);
    let unit = Factor { trig: Trig::Cos, k: 0.0, norm: 1.0 };
    let (amp, factors, plate_index) = match &sig.spatial {
        Spatial::Constant { amp } => (*amp, vec![unit; axes.len()], None),
        Spatial::Separable { amp, factors } => {
            if factors.len() != axes.len() {
                return Err(Error::constraint(
                    &format!("{location}/spatial/factors"),
                    format!("expected {} factors", axes.len()),
                ));
            }
            let f = factors
                .iter()
                .zip(&axes)
                .map(|(p, a)| Factor {
                    trig: match p.trig {
                        TrigName::Cos => Trig::Cos,
                        TrigName::Sin => Trig::Sin,
                    },
                    k: p.n * PI / geom.side(*a),
                    norm: 1.0,
                })
                .collect();
            (*amp, f, None)
        }
        Spatial::PlateMode { amp, index } => {
            if sig.kind != SignalKind::Plate || *index == 0 {
                return Err(Error::constraint(
                    &format!("{location}/spatial"),
                    "plate_mode profiles need a plate signal and a 1-based index",
                ));
            }
            (*amp, vec![], Some(index - 1))
        }
        Spatial::Tabulated { .. } => {
            return Err(Error::UnsupportedSignal(format!(
                "{location}: tabulated profiles are not separable"
            )))
        }
    };
    Ok(ResolvedSignal { face, kind: sig.kind, amp, factors, plate_index, temporal: sig.temporal.clone() })
}
