//! Scenario files: a JSON document describing one run, validated into solver inputs.

use crate::assembly::Mode;
use crate::basis::{BasisConfig, BasisSet, Truncation};
use crate::energy::Estimate;
use crate::error::{Error, Result};
use crate::fields::Loads;
use crate::geometry::{BoxGeometry, Label};
use crate::linear::{InitialData, Setup};
use crate::mms::MmsField;
use crate::nonlinear::{PicardConfig, WSetParams, DEFAULT_FLOOR};
use crate::params::Params;
use crate::signals::{resolve, FaceSignal, ResolvedSignal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    pub dimension: usize,
    pub sides: Vec<f64>,
    /// Face name (`x0`, `x1`, `y0`, ...) to label.
    pub faces: BTreeMap<String, Label>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

/// `"auto"` or the largest retained transverse mode number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TruncationSpec {
    Fixed(usize),
    Auto(AutoTag),
}

impl Default for TruncationSpec {
    fn default() -> Self {
        TruncationSpec::Auto(AutoTag::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub n_acoustic: usize,
    pub n_plate: usize,
    #[serde(default)]
    pub extension_truncation: TruncationSpec,
    #[serde(default)]
    pub quadrature_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub p0: Vec<f64>,
    #[serde(default)]
    pub p1: Vec<f64>,
    #[serde(default)]
    pub wtil0: Vec<f64>,
    #[serde(default)]
    pub wtil1: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSpec {
    #[serde(default = "PicardSpec::tol")]
    pub tol: f64,
    #[serde(default = "PicardSpec::max_iter")]
    pub max_iter: usize,
    #[serde(rename = "M1", default = "PicardSpec::bound")]
    pub m1: f64,
    #[serde(rename = "M2", default = "PicardSpec::bound")]
    pub m2: f64,
    #[serde(rename = "M3", default = "PicardSpec::bound")]
    pub m3: f64,
    #[serde(default = "PicardSpec::floor")]
    pub degeneracy_floor: f64,
}

impl PicardSpec {
    fn tol() -> f64 {
        1e-10
    }
    fn max_iter() -> usize {
        20
    }
    fn bound() -> f64 {
        1.0
    }
    fn floor() -> f64 {
        DEFAULT_FLOOR
    }
}

impl Default for PicardSpec {
    fn default() -> Self {
        PicardSpec {
            tol: Self::tol(),
            max_iter: Self::max_iter(),
            m1: Self::bound(),
            m2: Self::bound(),
            m3: Self::bound(),
            degeneracy_floor: Self::floor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub picard: PicardSpec,
}

/// Output file names inside the output directory; `null` disables a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "OutputSpec::trajectory")]
    pub trajectory: Option<String>,
    #[serde(default = "OutputSpec::energy")]
    pub energy: Option<String>,
    #[serde(default = "OutputSpec::audit")]
    pub audit: Option<String>,
    #[serde(default = "OutputSpec::picard_log")]
    pub picard_log: Option<String>,
    /// Inequalities audited by `simulate`.
    #[serde(default = "OutputSpec::audits")]
    pub audits: Vec<Estimate>,
}

impl OutputSpec {
    fn trajectory() -> Option<String> {
        Some("trajectory.csv".into())
    }
    fn energy() -> Option<String> {
        Some("energy.csv".into())
    }
    fn audit() -> Option<String> {
        Some("audit.json".into())
    }
    fn picard_log() -> Option<String> {
        Some("picard_log.csv".into())
    }
    fn audits() -> Vec<Estimate> {
        vec![Estimate::Enest]
    }
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            trajectory: Self::trajectory(),
            energy: Self::energy(),
            audit: Self::audit(),
            picard_log: Self::picard_log(),
            audits: Self::audits(),
        }
    }
}

/// Settings of the `mms` study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmsSpec {
    pub field: MmsField,
    /// Coarsest step of the temporal study; halved `levels` times.
    #[serde(default = "MmsSpec::dt0")]
    pub dt0: f64,
    #[serde(default = "MmsSpec::levels")]
    pub levels: usize,
    /// Basis sizes (acoustic = plate) of the spatial study.
    #[serde(default = "MmsSpec::n_values")]
    pub n_values: Vec<usize>,
}

impl MmsSpec {
    fn dt0() -> f64 {
        4e-3
    }
    fn levels() -> usize {
        3
    }
    fn n_values() -> Vec<usize> {
        vec![4, 8, 16]
    }
}

/// Settings and thresholds of the `decay` study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    /// Fit window; defaults to the whole run.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default = "DecaySpec::min_goodness")]
    pub min_goodness: f64,
    /// Upper bound on `E(T)/E(0)`.
    #[serde(default = "DecaySpec::max_ratio")]
    pub max_ratio: f64,
}

impl DecaySpec {
    fn min_goodness() -> f64 {
        0.95
    }
    fn max_ratio() -> f64 {
        1e-2
    }
}

impl Default for DecaySpec {
    fn default() -> Self {
        DecaySpec { window: None, min_goodness: Self::min_goodness(), max_ratio: Self::max_ratio() }
    }
}

/// Settings and thresholds of the `picard` study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardStudySpec {
    #[serde(default = "PicardStudySpec::scales")]
    pub scales: Vec<f64>,
    /// Bound on the largest ratio at the two smallest positive scales.
    #[serde(default = "PicardStudySpec::max_ratio")]
    pub max_ratio: f64,
}

impl PicardStudySpec {
    fn scales() -> Vec<f64> {
        vec![0.0, 1e-3, 1e-2, 1e-1]
    }
    fn max_ratio() -> f64 {
        0.9
    }
}

impl Default for PicardStudySpec {
    fn default() -> Self {
        PicardStudySpec { scales: Self::scales(), max_ratio: Self::max_ratio() }
    }
}

/// The document as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub geometry: GeometrySpec,
    pub params: Params,
    pub basis: BasisSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub signals: Vec<FaceSignal>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub mms: Option<MmsSpec>,
    #[serde(default)]
    pub decay: Option<DecaySpec>,
    #[serde(default)]
    pub picard_study: Option<PicardStudySpec>,
}

impl ScenarioFile {
    /// Unit square, plate at the bottom, Dirichlet on top, Neumann on the sides,
    /// `n = 8 + 8`, `dt = 1e-3`, `T = 1`, zero data.
    pub fn reference() -> Self {
        let faces = [("x0", Label::Neumann), ("x1", Label::Neumann), ("y0", Label::Plate), ("y1", Label::Dirichlet)]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        ScenarioFile {
            geometry: GeometrySpec { dimension: 2, sides: vec![1.0, 1.0], faces },
            params: Params::reference(),
            basis: BasisSpec {
                n_acoustic: 8,
                n_plate: 8,
                extension_truncation: TruncationSpec::default(),
                quadrature_order: None,
            },
            time: TimeSpec { t_end: 1.0, dt: 1e-3 },
            initial: InitialSpec::default(),
            signals: vec![],
            solver: SolverSpec::default(),
            outputs: OutputSpec::default(),
            mms: None,
            decay: None,
            picard_study: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub geometry: BoxGeometry,
    pub params: Params,
    pub basis: BasisConfig,
    pub mode: Mode,
    pub dt: f64,
    pub steps: usize,
    pub initial: InitialData,
    pub signals: Vec<ResolvedSignal>,
    pub w: WSetParams,
    pub picard: PicardConfig,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut s = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => s.push_str(&format!("/{index}")),
            Segment::Map { key } => s.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => s.push_str(&format!("/{variant}")),
            Segment::Unknown => s.push_str("/?"),
        }
    }
    if s.is_empty() {
        s.push('/');
    }
    s
}

/// Deserialize a document; syntax errors are `Parse`, shape errors are `Schema`.
pub fn parse_file(text: &str) -> Result<ScenarioFile> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let location = pointer(e.path());
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => Error::Schema { location, message: inner.to_string() },
            _ => Error::Parse {
                location: format!("line {} column {}", inner.line(), inner.column()),
                message: inner.to_string(),
            },
        }
    })?;
    de.end().map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    Ok(file)
}

fn labels(g: &GeometrySpec) -> Result<Vec<[Label; 2]>> {
    if g.sides.len() != g.dimension {
        return Err(Error::constraint(
            "/geometry/sides",
            format!("{} sides for dimension {}", g.sides.len(), g.dimension),
        ));
    }
    if !(2..=3).contains(&g.dimension) {
        return Err(Error::constraint("/geometry/dimension", "must be 2 or 3"));
    }
    let names: Vec<[String; 2]> = (0..g.dimension)
        .map(|a| {
            let x = ["x", "y", "z"][a];
            [format!("{x}0"), format!("{x}1")]
        })
        .collect();
    if let Some(k) = g.faces.keys().find(|k| !names.iter().flatten().any(|n| n == *k)) {
        return Err(Error::constraint(&format!("/geometry/faces/{k}"), "no such face"));
    }
    names
        .iter()
        .map(|[lo, hi]| {
            let get = |n: &String| {
                g.faces
                    .get(n)
                    .copied()
                    .ok_or_else(|| Error::constraint(&format!("/geometry/faces/{n}"), "face label missing"))
            };
            Ok([get(lo)?, get(hi)?])
        })
        .collect()
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            location: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::validate(parse_file(text)?)
    }

    pub fn validate(file: ScenarioFile) -> Result<Self> {
        let geometry = BoxGeometry::new(file.geometry.sides.clone(), labels(&file.geometry)?)?;
        let params = file.params;
        params.validate()?;

        let b = &file.basis;
        let truncation = match b.extension_truncation {
            TruncationSpec::Auto(_) => BasisConfig::new(0, 0, 1.0).truncation,
            TruncationSpec::Fixed(m) => Truncation::Fixed(m),
        };
        if b.quadrature_order == Some(0) {
            return Err(Error::constraint("/basis/quadrature_order", "must be positive"));
        }
        let basis = BasisConfig {
            n_acoustic: b.n_acoustic,
            n_plate: b.n_plate,
            rho: params.rho,
            truncation,
            quadrature_order: b.quadrature_order,
        };

        let TimeSpec { t_end, dt } = file.time;
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::constraint("/time/T", "must be positive"));
        }
        if !(dt > 0.0 && dt <= t_end) {
            return Err(Error::constraint("/time/dt", "must lie in (0, T]"));
        }
        let steps = (t_end / dt).round() as usize;
        if (steps as f64 * dt - t_end).abs() > 1e-9 * t_end {
            return Err(Error::constraint("/time/dt", format!("does not divide T = {t_end}")));
        }

        let i = &file.initial;
        let initial = InitialData { p0: i.p0.clone(), p1: i.p1.clone(), w0: i.wtil0.clone(), w1: i.wtil1.clone() }
            .fitted(b.n_acoustic, b.n_plate)?;
        let signals = file
            .signals
            .iter()
            .enumerate()
            .map(|(n, s)| resolve(&geometry, s, &format!("/signals/{n}")))
            .collect::<Result<Vec<_>>>()?;

        let ps = file.solver.picard;
        let w = WSetParams::new(ps.m1, ps.m2, ps.m3, params.k)?;
        if !(ps.tol > 0.0) {
            return Err(Error::constraint("/solver/picard/tol", "must be positive"));
        }
        if ps.max_iter == 0 {
            return Err(Error::constraint("/solver/picard/max_iter", "must be positive"));
        }
        if !(ps.degeneracy_floor > 0.0 && ps.degeneracy_floor < 1.0) {
            return Err(Error::constraint("/solver/picard/degeneracy_floor", "must lie in (0, 1)"));
        }
        let picard = PicardConfig { tol: ps.tol, max_iter: ps.max_iter, floor: ps.degeneracy_floor };

        if let Some(m) = &file.mms {
            if !(m.dt0 > 0.0) {
                return Err(Error::constraint("/mms/dt0", "must be positive"));
            }
            if m.n_values.is_empty() {
                return Err(Error::constraint("/mms/n_values", "needs at least one size"));
            }
        }
        if let Some(d) = &file.decay {
            if let Some([t0, t1]) = d.window {
                if !(0.0 <= t0 && t0 < t1 && t1 <= t_end + 1e-12) {
                    return Err(Error::constraint("/decay/window", "needs 0 <= t0 < t1 <= T"));
                }
            }
        }

        Ok(Scenario { mode: file.solver.mode, file, geometry, params, basis, dt, steps, initial, signals, w, picard })
    }

    pub fn t_end(&self) -> f64 {
        self.file.time.t_end
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn build_basis(&self) -> Result<BasisSet> {
        BasisSet::build(&self.geometry, &self.basis)
    }

    /// Linear setup over a basis built from this scenario (or a refinement of it).
    pub fn setup<'a>(&self, basis: &'a BasisSet) -> Result<Setup<'a>> {
        Setup::new(
            basis,
            self.params,
            self.mode,
            self.signals.clone(),
            Loads::default(),
            self.initial.clone(),
            self.dt,
            self.steps,
        )
    }
}
