//! Scenario files: sectioned `key = value` text.
//!
//! ```text
//! # comment
//! [material]
//! preset = nu0245
//! horizon = 0.008
//!
//! [collar]          # repeatable
//! box = 0 0 0.05 0.008
//! components = x
//! kind = prescribed_velocity
//! value = -1
//! ```
//!
//! Every key is checked against the section's vocabulary; anything unknown
//! or malformed is reported with its line number.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::CrackTip;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryMode, DomainSpec, Segment, Vec2};
use crate::integrator::{Collar, CollarKind};
use crate::potentials::{
    convex_concave_companion, DilatationalPotential, InfluenceFunction, MaterialModel,
    MaterialPreset, TensilePotential, PRESET_DENSITY, PRESET_FRACTURE_TOUGHNESS,
};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

const SECTIONS: &[(&str, bool)] = &[
    ("scenario", false),
    ("material", false),
    ("domain", false),
    ("mesh", false),
    ("time", false),
    ("collar", true),
    ("load", false),
    ("initial", false),
    ("output", false),
    ("study", false),
];

fn vocabulary(section: &str) -> &'static [&'static str] {
    match section {
        "scenario" => &["name"],
        "material" => &[
            "preset",
            "horizon",
            "g_kind",
            "influence",
            "boundary_weight",
            "taper_width",
            "c",
            "beta",
            "c_bar",
            "cg",
            "beta_g",
            "rho",
            "fracture_toughness",
        ],
        "domain" => &["x0", "x1", "y0", "y1", "crack"],
        "mesh" => &["h", "h_ratio", "exterior"],
        "time" => &["dt", "t_final"],
        "collar" => &["box", "components", "kind", "value", "rate"],
        "load" => &[
            "kind",
            "value",
            "f_max",
            "line",
            "thickness",
            "direction",
            "amplitude",
            "frequency",
            "box",
        ],
        "initial" => &[
            "kind",
            "amplitude",
            "center",
            "sigma",
            "direction",
            "velocity",
        ],
        "output" => &[
            "dir",
            "diag_stride",
            "snapshot_stride",
            "csv",
            "vtk",
            "crack_tip",
            "crack_length",
            "crack_direction",
            "crack_window",
        ],
        "study" => &["times", "h_ratios", "dt_list", "dt_ref"],
        _ => &[],
    }
}

/// Keys that may appear more than once in a section.
fn repeatable(section: &str, key: &str) -> bool {
    section == "domain" && key == "crack"
}

fn located(path: &str, line: usize, key: &str, message: impl Into<String>) -> Error {
    Error::ConfigAt {
        path: path.to_string(),
        line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn tokenize(text: &str, path: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find(['#', ';']) {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| located(path, line, content, "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            let known = SECTIONS.iter().find(|(s, _)| *s == name);
            match known {
                None => return Err(located(path, line, &name, "unknown section")),
                Some((_, multi)) => {
                    if !multi && sections.iter().any(|s| s.name == name) {
                        return Err(located(path, line, &name, "section appears twice"));
                    }
                }
            }
            sections.push(Section {
                name,
                line,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| located(path, line, content, "expected `key = value`"))?;
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        let section = sections
            .last_mut()
            .ok_or_else(|| located(path, line, &key, "key outside of any section"))?;
        let full = format!("{}.{}", section.name, key);
        if !vocabulary(&section.name).contains(&key.as_str()) {
            return Err(located(path, line, &full, "unknown key"));
        }
        if !repeatable(&section.name, &key) && section.entries.iter().any(|e| e.key == key) {
            return Err(located(path, line, &full, "key appears twice"));
        }
        if value.is_empty() {
            return Err(located(path, line, &full, "empty value"));
        }
        section.entries.push(Entry { key, value, line });
    }
    Ok(sections)
}

/// Typed accessors over one section with location-aware errors.
struct View<'a> {
    path: &'a str,
    section: &'a Section,
}

impl<'a> View<'a> {
    fn entry(&self, key: &str) -> Option<&'a Entry> {
        self.section.entries.iter().find(|e| e.key == key)
    }

    fn all(&self, key: &str) -> Vec<&'a Entry> {
        self.section
            .entries
            .iter()
            .filter(|e| e.key == key)
            .collect()
    }

    fn name(&self, key: &str) -> String {
        format!("{}.{}", self.section.name, key)
    }

    fn err(&self, e: &Entry, msg: impl Into<String>) -> Error {
        located(self.path, e.line, &self.name(&e.key), msg)
    }

    fn missing(&self, key: &str) -> Error {
        located(
            self.path,
            self.section.line,
            &self.name(key),
            "missing required key",
        )
    }

    fn has(&self, key: &str) -> bool {
        self.entry(key).is_some()
    }

    fn float_of(&self, e: &Entry) -> Result<f64> {
        let v: f64 = e
            .value
            .parse()
            .map_err(|_| self.err(e, format!("`{}` is not a number", e.value)))?;
        if !v.is_finite() {
            return Err(self.err(e, "value must be finite"));
        }
        Ok(v)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.entry(key).map(|e| self.float_of(e)).transpose()
    }

    fn req_float(&self, key: &str) -> Result<f64> {
        self.float(key)?.ok_or_else(|| self.missing(key))
    }

    fn positive(&self, key: &str) -> Result<Option<f64>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => {
                let v = self.float_of(e)?;
                if v > 0.0 {
                    Ok(Some(v))
                } else {
                    Err(self.err(e, "value must be positive"))
                }
            }
        }
    }

    fn req_positive(&self, key: &str) -> Result<f64> {
        self.positive(key)?.ok_or_else(|| self.missing(key))
    }

    fn floats_of(&self, e: &Entry, n: Option<usize>) -> Result<Vec<f64>> {
        let vals = e
            .value
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(e, format!("`{s}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(n) = n {
            if vals.len() != n {
                return Err(self.err(e, format!("expected {n} numbers, found {}", vals.len())));
            }
        }
        if vals.is_empty() {
            return Err(self.err(e, "expected at least one number"));
        }
        Ok(vals)
    }

    fn vec2(&self, key: &str) -> Result<Option<Vec2>> {
        self.entry(key)
            .map(|e| self.floats_of(e, Some(2)).map(|v| [v[0], v[1]]))
            .transpose()
    }

    fn req_vec2(&self, key: &str) -> Result<Vec2> {
        self.vec2(key)?.ok_or_else(|| self.missing(key))
    }

    fn quad(&self, key: &str) -> Result<Option<[f64; 4]>> {
        self.entry(key)
            .map(|e| self.floats_of(e, Some(4)).map(|v| [v[0], v[1], v[2], v[3]]))
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.entry(key).map(|e| self.floats_of(e, None)).transpose()
    }

    fn word(&self, key: &str) -> Option<(String, &'a Entry)> {
        self.entry(key).map(|e| (e.value.to_ascii_lowercase(), e))
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.word(key) {
            None => Ok(None),
            Some((w, e)) => match w.as_str() {
                "true" | "yes" | "1" | "on" => Ok(Some(true)),
                "false" | "no" | "0" | "off" => Ok(Some(false)),
                _ => Err(self.err(e, format!("`{w}` is not a boolean"))),
            },
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => {
                e.value.parse::<usize>().map(Some).map_err(|_| {
                    self.err(e, format!("`{}` is not a non-negative integer", e.value))
                })
            }
        }
    }

    fn forbid(&self, keys: &[&str], why: &str) -> Result<()> {
        for k in keys {
            if let Some(e) = self.entry(k) {
                return Err(self.err(e, why.to_string()));
            }
        }
        Ok(())
    }

    fn unit(&self, key: &str, default: Vec2) -> Result<Vec2> {
        match self.entry(key) {
            None => Ok(default),
            Some(e) => {
                let v = self.floats_of(e, Some(2))?;
                let n = v[0].hypot(v[1]);
                if n == 0.0 {
                    return Err(self.err(e, "direction must be non-zero"));
                }
                Ok([v[0] / n, v[1] / n])
            }
        }
    }
}

/// Potential `g` family selected in the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GKind {
    Quadratic,
    ConvexConcave,
}

/// Where the material constants come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialSource {
    Preset(MaterialPreset),
    Custom {
        c: f64,
        beta: f64,
        g: DilatationalPotential,
        rho: f64,
        fracture_toughness: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialConfig {
    pub source: MaterialSource,
    pub g_kind: GKind,
    pub horizon: f64,
    pub influence: InfluenceFunction,
    pub boundary: BoundaryMode,
}

impl MaterialConfig {
    pub fn build(&self) -> Result<MaterialModel> {
        let m = match &self.source {
            MaterialSource::Preset(p) => match self.g_kind {
                GKind::Quadratic => MaterialModel::preset(*p, self.horizon)?,
                GKind::ConvexConcave => MaterialModel::preset_convex_concave(*p, self.horizon)?,
            },
            MaterialSource::Custom {
                c,
                beta,
                g,
                rho,
                fracture_toughness,
            } => MaterialModel::new(
                *rho,
                self.horizon,
                InfluenceFunction::LinearDecay,
                TensilePotential::new(*c, *beta)?,
                *g,
                2,
                *fracture_toughness,
            )?,
        };
        if self.influence != InfluenceFunction::LinearDecay {
            m.with_influence(self.influence.clone())
        } else {
            Ok(m)
        }
    }
}

/// Mesh size, absolute or as a fraction of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSize {
    Absolute(f64),
    /// `h = horizon / ratio`.
    Ratio(f64),
}

impl MeshSize {
    pub fn resolve(&self, horizon: f64) -> f64 {
        match *self {
            MeshSize::Absolute(h) => h,
            MeshSize::Ratio(r) => horizon / r,
        }
    }
}

/// External body force.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadSpec {
    None,
    Constant(Vec2),
    /// Triangular profile along the segment `a -> b`: `f_max t` at the
    /// midpoint, zero at the ends, acting along `direction`, on the nodes
    /// within `thickness / 2` of the segment (default `h / 2`).
    RampLine {
        f_max: f64,
        a: Vec2,
        b: Vec2,
        direction: Vec2,
        thickness: Option<f64>,
    },
    /// Discrete manufactured solution on `[lo, hi]` (default: the domain).
    Manufactured {
        amplitude: f64,
        frequency: f64,
        direction: Vec2,
        region: Option<[f64; 4]>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Zero,
    /// `u = A exp(-|x - c|^2 / (2 sigma^2)) d`, `v = 0`.
    Bump {
        amplitude: f64,
        center: Vec2,
        sigma: f64,
        direction: Vec2,
    },
    /// State of the manufactured solution at `t = 0`.
    Manufactured,
    UniformVelocity(Vec2),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputPlan {
    pub dir: Option<PathBuf>,
    pub diag_stride: usize,
    /// Snapshot every this many steps; 0 disables snapshots.
    pub snapshot_stride: usize,
    pub csv: bool,
    pub vtk: bool,
    pub crack: Option<CrackTip>,
}

impl Default for OutputPlan {
    fn default() -> Self {
        Self {
            dir: None,
            diag_stride: 1,
            snapshot_stride: 0,
            csv: true,
            vtk: false,
            crack: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub times: Vec<f64>,
    pub h_ratios: Vec<f64>,
    pub dt_list: Vec<f64>,
    pub dt_ref: Option<f64>,
}

impl Default for StudyPlan {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            h_ratios: vec![2.0, 4.0, 8.0],
            dt_list: Vec::new(),
            dt_ref: None,
        }
    }
}

/// Fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub material: MaterialConfig,
    pub domain: DomainSpec,
    pub mesh: MeshSize,
    /// Width of the ghost layer around the domain (default: the horizon).
    pub exterior: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub collars: Vec<Collar>,
    pub load: LoadSpec,
    pub initial: InitialSpec,
    pub output: OutputPlan,
    pub study: StudyPlan,
}

impl ScenarioConfig {
    pub fn h(&self) -> f64 {
        self.mesh.resolve(self.material.horizon)
    }

    pub fn exterior_width(&self) -> f64 {
        self.exterior.unwrap_or(self.material.horizon)
    }

    /// Same scenario with a different mesh size.
    pub fn with_h(&self, h: f64) -> Self {
        Self {
            mesh: MeshSize::Absolute(h),
            ..self.clone()
        }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }

    pub fn with_t_final(&self, t_final: f64) -> Self {
        Self {
            t_final,
            ..self.clone()
        }
    }

    /// Checks cross-field constraints that a single section cannot.
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        let h = self.h();
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!(
                "mesh size must be positive (got {h})"
            )));
        }
        if h >= self.material.horizon {
            log::warn!(
                "mesh size {h} is not below the horizon {}",
                self.material.horizon
            );
        }
        if !(self.dt > 0.0) || !(self.t_final >= 0.0) {
            return Err(Error::Config(
                "dt must be positive and t_final non-negative".into(),
            ));
        }
        let d = &self.domain;
        for c in &self.collars {
            if c.hi[0] < d.x0 || c.lo[0] > d.x1 || c.hi[1] < d.y0 || c.lo[1] > d.y1 {
                return Err(Error::Config(format!(
                    "collar box {:?}..{:?} does not intersect the domain",
                    c.lo, c.hi
                )));
            }
        }
        if self.output.diag_stride == 0 {
            return Err(Error::Config("diag_stride must be at least 1".into()));
        }
        if self.initial == InitialSpec::Manufactured
            && !matches!(self.load, LoadSpec::Manufactured { .. })
        {
            return Err(Error::Config(
                "manufactured initial state needs a manufactured load".into(),
            ));
        }
        Ok(())
    }

    /// Serializes to the text format accepted by [`parse_config_str`].
    pub fn to_ini(&self) -> String {
        let mut s = String::new();
        let f = |x: f64| format!("{x:e}");
        let v2 = |v: Vec2| format!("{:e} {:e}", v[0], v[1]);
        let _ = writeln!(s, "[scenario]\nname = {}\n", self.name);

        let m = &self.material;
        let _ = writeln!(s, "[material]");
        match &m.source {
            MaterialSource::Preset(p) => {
                let _ = writeln!(s, "preset = {}", p.name());
            }
            MaterialSource::Custom {
                c,
                beta,
                g,
                rho,
                fracture_toughness,
            } => {
                let _ = writeln!(s, "c = {}\nbeta = {}", f(*c), f(*beta));
                match g {
                    DilatationalPotential::Quadratic { c_bar } => {
                        let _ = writeln!(s, "c_bar = {}", f(*c_bar));
                    }
                    DilatationalPotential::ConvexConcave { c, beta } => {
                        let _ = writeln!(s, "cg = {}\nbeta_g = {}", f(*c), f(*beta));
                    }
                }
                let _ = writeln!(
                    s,
                    "rho = {}\nfracture_toughness = {}",
                    f(*rho),
                    f(*fracture_toughness)
                );
            }
        }
        let _ = writeln!(s, "horizon = {}", f(m.horizon));
        let g_kind = match m.g_kind {
            GKind::Quadratic => "quadratic",
            GKind::ConvexConcave => "convex_concave",
        };
        let _ = writeln!(s, "g_kind = {g_kind}");
        if m.influence == InfluenceFunction::Constant {
            let _ = writeln!(s, "influence = constant");
        }
        match m.boundary {
            BoundaryMode::Indicator => {
                let _ = writeln!(s, "boundary_weight = indicator");
            }
            BoundaryMode::LinearTaper { width } => {
                let _ = writeln!(s, "boundary_weight = taper\ntaper_width = {}", f(width));
            }
        }

        let d = &self.domain;
        let _ = writeln!(
            s,
            "\n[domain]\nx0 = {}\nx1 = {}\ny0 = {}\ny1 = {}",
            f(d.x0),
            f(d.x1),
            f(d.y0),
            f(d.y1)
        );
        for c in &d.cracks {
            let _ = writeln!(s, "crack = {} {}", v2(c.a), v2(c.b));
        }

        let _ = writeln!(s, "\n[mesh]");
        match self.mesh {
            MeshSize::Absolute(h) => {
                let _ = writeln!(s, "h = {}", f(h));
            }
            MeshSize::Ratio(r) => {
                let _ = writeln!(s, "h_ratio = {}", f(r));
            }
        }
        if let Some(e) = self.exterior {
            let _ = writeln!(s, "exterior = {}", f(e));
        }
        let _ = writeln!(
            s,
            "\n[time]\ndt = {}\nt_final = {}",
            f(self.dt),
            f(self.t_final)
        );

        for c in &self.collars {
            let comps = match c.components {
                [true, true] => "xy",
                [true, false] => "x",
                _ => "y",
            };
            let kind = match c.kind {
                CollarKind::FixedDisplacement => "fixed_displacement",
                CollarKind::PrescribedVelocity => "prescribed_velocity",
                CollarKind::FixedVelocityZero => "fixed_velocity_zero",
            };
            let _ = writeln!(
                s,
                "\n[collar]\nbox = {} {}\ncomponents = {comps}\nkind = {kind}\nvalue = {}\nrate = {}",
                v2(c.lo),
                v2(c.hi),
                f(c.value),
                f(c.rate)
            );
        }

        let _ = writeln!(s, "\n[load]");
        match &self.load {
            LoadSpec::None => {
                let _ = writeln!(s, "kind = none");
            }
            LoadSpec::Constant(b) => {
                let _ = writeln!(s, "kind = constant\nvalue = {}", v2(*b));
            }
            LoadSpec::RampLine {
                f_max,
                a,
                b,
                direction,
                thickness,
            } => {
                let _ = writeln!(
                    s,
                    "kind = ramp_line\nf_max = {}\nline = {} {}\ndirection = {}",
                    f(*f_max),
                    v2(*a),
                    v2(*b),
                    v2(*direction)
                );
                if let Some(t) = thickness {
                    let _ = writeln!(s, "thickness = {}", f(*t));
                }
            }
            LoadSpec::Manufactured {
                amplitude,
                frequency,
                direction,
                region,
            } => {
                let _ = writeln!(
                    s,
                    "kind = manufactured\namplitude = {}\nfrequency = {}\ndirection = {}",
                    f(*amplitude),
                    f(*frequency),
                    v2(*direction)
                );
                if let Some(r) = region {
                    let _ = writeln!(s, "box = {} {} {} {}", f(r[0]), f(r[1]), f(r[2]), f(r[3]));
                }
            }
        }

        let _ = writeln!(s, "\n[initial]");
        match &self.initial {
            InitialSpec::Zero => {
                let _ = writeln!(s, "kind = zero");
            }
            InitialSpec::Bump {
                amplitude,
                center,
                sigma,
                direction,
            } => {
                let _ = writeln!(
                    s,
                    "kind = bump\namplitude = {}\ncenter = {}\nsigma = {}\ndirection = {}",
                    f(*amplitude),
                    v2(*center),
                    f(*sigma),
                    v2(*direction)
                );
            }
            InitialSpec::Manufactured => {
                let _ = writeln!(s, "kind = manufactured");
            }
            InitialSpec::UniformVelocity(v) => {
                let _ = writeln!(s, "kind = uniform_velocity\nvelocity = {}", v2(*v));
            }
        }

        let o = &self.output;
        let _ = writeln!(s, "\n[output]");
        if let Some(dir) = &o.dir {
            let _ = writeln!(s, "dir = {}", dir.display());
        }
        let _ = writeln!(
            s,
            "diag_stride = {}\nsnapshot_stride = {}\ncsv = {}\nvtk = {}",
            o.diag_stride, o.snapshot_stride, o.csv, o.vtk
        );
        if let Some(c) = &o.crack {
            let _ = writeln!(
                s,
                "crack_tip = {}\ncrack_length = {}\ncrack_direction = {}",
                v2(c.tip),
                f(c.initial_length),
                v2(c.direction)
            );
            if let Some(w) = c.window {
                let _ = writeln!(s, "crack_window = {}", f(w));
            }
        }

        let st = &self.study;
        let list = |v: &[f64]| v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "\n[study]\nh_ratios = {}", list(&st.h_ratios));
        if !st.times.is_empty() {
            let _ = writeln!(s, "times = {}", list(&st.times));
        }
        if !st.dt_list.is_empty() {
            let _ = writeln!(s, "dt_list = {}", list(&st.dt_list));
        }
        if let Some(r) = st.dt_ref {
            let _ = writeln!(s, "dt_ref = {}", f(r));
        }
        s
    }
}

fn parse_material(v: &View<'_>) -> Result<MaterialConfig> {
    let horizon = v.req_positive("horizon")?;
    let g_kind = match v.word("g_kind") {
        None => GKind::Quadratic,
        Some((w, e)) => match w.as_str() {
            "quadratic" => GKind::Quadratic,
            "convex_concave" => GKind::ConvexConcave,
            _ => {
                return Err(v.err(
                    e,
                    format!("unknown g kind `{w}` (quadratic, convex_concave)"),
                ))
            }
        },
    };
    let influence = match v.word("influence") {
        None => InfluenceFunction::LinearDecay,
        Some((w, e)) => match w.as_str() {
            "linear" | "linear_decay" => InfluenceFunction::LinearDecay,
            "constant" => InfluenceFunction::Constant,
            _ => return Err(v.err(e, format!("unknown influence `{w}` (linear, constant)"))),
        },
    };
    let boundary = match v.word("boundary_weight") {
        None => {
            v.forbid(
                &["taper_width"],
                "taper_width needs boundary_weight = taper",
            )?;
            BoundaryMode::Indicator
        }
        Some((w, e)) => match w.as_str() {
            "indicator" => {
                v.forbid(
                    &["taper_width"],
                    "taper_width needs boundary_weight = taper",
                )?;
                BoundaryMode::Indicator
            }
            "taper" | "linear_taper" => BoundaryMode::LinearTaper {
                width: v.positive("taper_width")?.unwrap_or(horizon),
            },
            _ => {
                return Err(v.err(
                    e,
                    format!("unknown boundary weight `{w}` (indicator, taper)"),
                ))
            }
        },
    };
    let source = match v.word("preset") {
        Some((w, e)) => {
            let p = MaterialPreset::from_name(&w)
                .ok_or_else(|| v.err(e, format!("unknown preset `{w}` (nu022, nu0245)")))?;
            v.forbid(
                &[
                    "c",
                    "beta",
                    "c_bar",
                    "cg",
                    "beta_g",
                    "rho",
                    "fracture_toughness",
                ],
                "explicit material constants cannot be combined with a preset",
            )?;
            MaterialSource::Preset(p)
        }
        None => {
            let c = v.req_positive("c")?;
            let beta = v.req_positive("beta")?;
            let g = match g_kind {
                GKind::Quadratic => {
                    v.forbid(
                        &["cg", "beta_g"],
                        "cg/beta_g belong to g_kind = convex_concave",
                    )?;
                    DilatationalPotential::Quadratic {
                        c_bar: v.req_float("c_bar")?,
                    }
                }
                GKind::ConvexConcave => {
                    if v.has("c_bar") && !v.has("cg") {
                        convex_concave_companion(v.req_float("c_bar")?)
                    } else {
                        v.forbid(&["c_bar"], "give either c_bar or cg/beta_g")?;
                        DilatationalPotential::ConvexConcave {
                            c: v.req_float("cg")?,
                            beta: v.req_positive("beta_g")?,
                        }
                    }
                }
            };
            MaterialSource::Custom {
                c,
                beta,
                g,
                rho: v.positive("rho")?.unwrap_or(PRESET_DENSITY),
                fracture_toughness: v
                    .positive("fracture_toughness")?
                    .unwrap_or(PRESET_FRACTURE_TOUGHNESS),
            }
        }
    };
    Ok(MaterialConfig {
        source,
        g_kind,
        horizon,
        influence,
        boundary,
    })
}

fn parse_domain(v: &View<'_>) -> Result<DomainSpec> {
    let mut d = DomainSpec::rectangle(
        v.req_float("x0")?,
        v.req_float("x1")?,
        v.req_float("y0")?,
        v.req_float("y1")?,
    );
    if !(d.x0 < d.x1 && d.y0 < d.y1) {
        return Err(v
            .missing("x0")
            .clone_with_message("extents must satisfy x0 < x1 and y0 < y1"));
    }
    for e in v.all("crack") {
        let q = v.floats_of(e, Some(4))?;
        let seg = Segment::new([q[0], q[1]], [q[2], q[3]]);
        let tol = 1e-12 * (d.x1 - d.x0).max(d.y1 - d.y0);
        for p in [seg.a, seg.b] {
            if !d.contains(p, tol) {
                return Err(v.err(e, "crack endpoint lies outside the domain"));
            }
        }
        if seg.a == seg.b {
            return Err(v.err(e, "crack segment has zero length"));
        }
        d.cracks.push(seg);
    }
    Ok(d)
}

impl Error {
    fn clone_with_message(self, message: &str) -> Error {
        match self {
            Error::ConfigAt {
                path, line, key, ..
            } => Error::ConfigAt {
                path,
                line,
                key,
                message: message.to_string(),
            },
            other => other,
        }
    }
}

fn parse_collar(v: &View<'_>) -> Result<Collar> {
    let b = v.quad("box")?.ok_or_else(|| v.missing("box"))?;
    let comps = v
        .word("components")
        .ok_or_else(|| v.missing("components"))?;
    let components = match comps.0.as_str() {
        "x" => [true, false],
        "y" => [false, true],
        "xy" | "yx" | "both" => [true, true],
        w => return Err(v.err(comps.1, format!("unknown components `{w}` (x, y, xy)"))),
    };
    let kind = v.word("kind").ok_or_else(|| v.missing("kind"))?;
    let k = match kind.0.as_str() {
        "fixed_displacement" => CollarKind::FixedDisplacement,
        "prescribed_velocity" => CollarKind::PrescribedVelocity,
        "fixed_velocity_zero" => CollarKind::FixedVelocityZero,
        w => {
            return Err(v.err(
                kind.1,
                format!("unknown collar kind `{w}` (fixed_displacement, prescribed_velocity, fixed_velocity_zero)"),
            ))
        }
    };
    let value = v.float("value")?.unwrap_or(0.0);
    let rate = v.float("rate")?.unwrap_or(0.0);
    let boxed = v.entry("box").expect("checked above");
    Collar::new([b[0], b[1]], [b[2], b[3]], components, k, value)
        .map(|c| c.with_rate(rate))
        .map_err(|e| v.err(boxed, e.to_string()))
}

fn parse_load(v: &View<'_>) -> Result<LoadSpec> {
    let (kind, e) = match v.word("kind") {
        None => return Ok(LoadSpec::None),
        Some(k) => k,
    };
    let only = |allowed: &[&str]| -> Result<()> {
        for entry in &v.section.entries {
            if entry.key != "kind" && !allowed.contains(&entry.key.as_str()) {
                return Err(v.err(entry, format!("not used by load kind `{kind}`")));
            }
        }
        Ok(())
    };
    match kind.as_str() {
        "none" => {
            only(&[])?;
            Ok(LoadSpec::None)
        }
        "constant" => {
            only(&["value"])?;
            Ok(LoadSpec::Constant(v.req_vec2("value")?))
        }
        "ramp_line" => {
            only(&["f_max", "line", "direction", "thickness"])?;
            let l = v.quad("line")?.ok_or_else(|| v.missing("line"))?;
            Ok(LoadSpec::RampLine {
                f_max: v.req_float("f_max")?,
                a: [l[0], l[1]],
                b: [l[2], l[3]],
                direction: v.unit("direction", [0.0, 1.0])?,
                thickness: v.positive("thickness")?,
            })
        }
        "manufactured" => {
            only(&["amplitude", "frequency", "direction", "box"])?;
            Ok(LoadSpec::Manufactured {
                amplitude: v.req_float("amplitude")?,
                frequency: v.req_float("frequency")?,
                direction: v.unit("direction", [1.0, 0.0])?,
                region: v.quad("box")?,
            })
        }
        w => Err(v.err(
            e,
            format!("unknown load kind `{w}` (none, constant, ramp_line, manufactured)"),
        )),
    }
}

fn parse_initial(v: &View<'_>) -> Result<InitialSpec> {
    let (kind, e) = match v.word("kind") {
        None => return Ok(InitialSpec::Zero),
        Some(k) => k,
    };
    let only = |allowed: &[&str]| -> Result<()> {
        for entry in &v.section.entries {
            if entry.key != "kind" && !allowed.contains(&entry.key.as_str()) {
                return Err(v.err(entry, format!("not used by initial kind `{kind}`")));
            }
        }
        Ok(())
    };
    match kind.as_str() {
        "zero" => {
            only(&[])?;
            Ok(InitialSpec::Zero)
        }
        "bump" => {
            only(&["amplitude", "center", "sigma", "direction"])?;
            Ok(InitialSpec::Bump {
                amplitude: v.req_float("amplitude")?,
                center: v.req_vec2("center")?,
                sigma: v.req_positive("sigma")?,
                direction: v.unit("direction", [1.0, 0.0])?,
            })
        }
        "manufactured" => {
            only(&[])?;
            Ok(InitialSpec::Manufactured)
        }
        "uniform_velocity" => {
            only(&["velocity"])?;
            Ok(InitialSpec::UniformVelocity(v.req_vec2("velocity")?))
        }
        w => Err(v.err(
            e,
            format!("unknown initial kind `{w}` (zero, bump, manufactured, uniform_velocity)"),
        )),
    }
}

fn parse_output(v: &View<'_>) -> Result<OutputPlan> {
    let mut o = OutputPlan {
        dir: v.entry("dir").map(|e| PathBuf::from(&e.value)),
        ..OutputPlan::default()
    };
    if let Some(s) = v.count("diag_stride")? {
        if s == 0 {
            return Err(v.err(
                v.entry("diag_stride").expect("present"),
                "stride must be at least 1",
            ));
        }
        o.diag_stride = s;
    }
    if let Some(s) = v.count("snapshot_stride")? {
        o.snapshot_stride = s;
    }
    if let Some(b) = v.boolean("csv")? {
        o.csv = b;
    }
    if let Some(b) = v.boolean("vtk")? {
        o.vtk = b;
    }
    match v.vec2("crack_tip")? {
        Some(tip) => {
            o.crack = Some(CrackTip {
                tip,
                direction: v.unit("crack_direction", [0.0, 1.0])?,
                initial_length: v.float("crack_length")?.unwrap_or(0.0),
                window: v.positive("crack_window")?,
            });
        }
        None => v.forbid(
            &["crack_length", "crack_direction", "crack_window"],
            "crack settings need crack_tip",
        )?,
    }
    Ok(o)
}

fn parse_study(v: &View<'_>) -> Result<StudyPlan> {
    let mut s = StudyPlan::default();
    if let Some(t) = v.list("times")? {
        s.times = t;
    }
    if let Some(r) = v.list("h_ratios")? {
        if r.iter().any(|&x| x <= 0.0) {
            return Err(v.err(
                v.entry("h_ratios").expect("present"),
                "ratios must be positive",
            ));
        }
        s.h_ratios = r;
    }
    if let Some(d) = v.list("dt_list")? {
        if d.iter().any(|&x| x <= 0.0) {
            return Err(v.err(
                v.entry("dt_list").expect("present"),
                "time steps must be positive",
            ));
        }
        s.dt_list = d;
    }
    s.dt_ref = v.positive("dt_ref")?;
    Ok(s)
}

/// Parses configuration text; `origin` names the source in diagnostics.
pub fn parse_config_str(text: &str, origin: &str) -> Result<ScenarioConfig> {
    let sections = tokenize(text, origin)?;
    let by_name: BTreeMap<&str, &Section> = sections
        .iter()
        .filter(|s| s.name != "collar")
        .map(|s| (s.name.as_str(), s))
        .collect();
    let view = |name: &str| {
        by_name.get(name).map(|s| View {
            path: origin,
            section: s,
        })
    };
    let need =
        |name: &str| view(name).ok_or_else(|| located(origin, 0, name, "missing required section"));

    let material = parse_material(&need("material")?)?;
    let domain = parse_domain(&need("domain")?)?;
    let mesh_view = need("mesh")?;
    let mesh = match (mesh_view.positive("h")?, mesh_view.positive("h_ratio")?) {
        (Some(h), None) => MeshSize::Absolute(h),
        (None, Some(r)) => MeshSize::Ratio(r),
        (Some(_), Some(_)) => {
            return Err(mesh_view.err(
                mesh_view.entry("h_ratio").expect("present"),
                "give either h or h_ratio",
            ))
        }
        (None, None) => return Err(mesh_view.missing("h")),
    };
    let exterior = match mesh_view.entry("exterior") {
        None => None,
        Some(e) => {
            let x = mesh_view.float_of(e)?;
            if x < 0.0 {
                return Err(mesh_view.err(e, "exterior width must be non-negative"));
            }
            Some(x)
        }
    };
    let time = need("time")?;
    let dt = time.req_positive("dt")?;
    let t_final = time.req_float("t_final")?;
    if t_final < 0.0 {
        return Err(time.err(
            time.entry("t_final").expect("present"),
            "must be non-negative",
        ));
    }
    let collars = sections
        .iter()
        .filter(|s| s.name == "collar")
        .map(|s| {
            parse_collar(&View {
                path: origin,
                section: s,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let load = view("load")
        .map(|v| parse_load(&v))
        .transpose()?
        .unwrap_or(LoadSpec::None);
    let initial = view("initial")
        .map(|v| parse_initial(&v))
        .transpose()?
        .unwrap_or(InitialSpec::Zero);
    let output = view("output")
        .map(|v| parse_output(&v))
        .transpose()?
        .unwrap_or_default();
    let study = view("study")
        .map(|v| parse_study(&v))
        .transpose()?
        .unwrap_or_default();
    let name = view("scenario")
        .and_then(|v| v.entry("name").map(|e| e.value.clone()))
        .unwrap_or_else(|| "scenario".to_string());

    let cfg = ScenarioConfig {
        name,
        material,
        domain,
        mesh,
        exterior,
        dt,
        t_final,
        collars,
        load,
        initial,
        output,
        study,
    };
    cfg.validate().map_err(|e| match e {
        Error::Config(m) => located(origin, 0, "scenario", m),
        other => other,
    })?;
    Ok(cfg)
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let text = String::from_utf8(bytes).map_err(|e| {
        located(
            &origin,
            0,
            "file",
            format!("not valid UTF-8 (byte {})", e.utf8_error().valid_up_to()),
        )
    })?;
    parse_config_str(&text, &origin)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "
[material]
preset = nu0245
horizon = 0.008
[domain]
x0 = 0
x1 = 0.1
y0 = 0
y1 = 0.1
[mesh]
h = 0.004
[time]
dt = 4e-9
t_final = 3.4e-5
";

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse_config_str(MINIMAL, "mem").unwrap();
        assert_eq!(
            c.material.source,
            MaterialSource::Preset(MaterialPreset::Nu0245)
        );
        assert_eq!(c.material.boundary, BoundaryMode::Indicator);
        assert_eq!(c.h(), 0.004);
        assert_eq!(c.exterior_width(), 0.008);
        assert_eq!(c.load, LoadSpec::None);
        assert_eq!(c.initial, InitialSpec::Zero);
        assert_eq!(c.output, OutputPlan::default());
        assert!(c.collars.is_empty());
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let text = MINIMAL.replace("horizon = 0.008", "horizon = 0.008\nepsilonn = 0.008");
        match parse_config_str(&text, "mem") {
            Err(Error::ConfigAt {
                line, key, message, ..
            }) => {
                assert_eq!(line, 5);
                assert_eq!(key, "material.epsilonn");
                assert!(message.contains("unknown"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_values_are_located() {
        let text = MINIMAL.replace("dt = 4e-9", "dt = fast");
        assert!(matches!(
            parse_config_str(&text, "mem"),
            Err(Error::ConfigAt { line: 13, .. })
        ));
        let text = MINIMAL.replace("h = 0.004", "h = -1");
        assert!(matches!(
            parse_config_str(&text, "mem"),
            Err(Error::ConfigAt { .. })
        ));
        let text = MINIMAL.replace("[time]", "[time]\n[time]");
        assert!(parse_config_str(&text, "mem").is_err());
        let text = MINIMAL.replace("[mesh]\nh = 0.004", "");
        assert!(parse_config_str(&text, "mem").is_err());
    }

    #[test]
    fn collar_outside_domain_is_rejected() {
        let text = format!(
            "{MINIMAL}[collar]\nbox = 1 1 2 2\ncomponents = x\nkind = fixed_displacement\n"
        );
        assert!(parse_config_str(&text, "mem").is_err());
    }

    #[test]
    fn preset_and_custom_constants_do_not_mix() {
        let text = MINIMAL.replace("horizon = 0.008", "horizon = 0.008\nc = 1");
        assert!(parse_config_str(&text, "mem").is_err());
    }

    #[test]
    fn full_roundtrip() {
        let text = format!(
            "{}[collar]\nbox = 0 0 0.05 0.008\ncomponents = x\nkind = prescribed_velocity\nvalue = -1\n\
             [load]\nkind = ramp_line\nf_max = -1e13\nline = 0.04 0.1 0.06 0.1\n\
             [initial]\nkind = bump\namplitude = 1e-6\ncenter = 0.05 0.05\nsigma = 0.004\n\
             [output]\ncrack_tip = 0.05 0.02\ncrack_length = 0.02\nvtk = true\nsnapshot_stride = 10\n\
             [study]\ntimes = 5e-6 1e-5\n",
            MINIMAL.replace("[domain]", "[domain]\ncrack = 0.05 0 0.05 0.02")
        );
        let c = parse_config_str(&text, "mem").unwrap();
        let again = parse_config_str(&c.to_ini(), "mem").unwrap();
        assert_eq!(c, again);
    }
}
