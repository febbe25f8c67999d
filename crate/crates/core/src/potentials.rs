//! Influence function, bond and dilatational potentials, material presets,
//! and the scalar constants derived from them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature;

/// Density shared by the tabulated presets, kg/m^3.
pub const PRESET_DENSITY: f64 = 1200.0;
/// Critical energy release rate shared by the presets, J/m^2.
pub const PRESET_FRACTURE_TOUGHNESS: f64 = 500.0;

/// Number of samples used when bounding potential derivatives.
const BOUND_SAMPLES: usize = 100_001;
/// Half-width of the sampling window, in units of the inflection point.
const BOUND_WINDOW: f64 = 20.0;

/// Volume of the unit ball in dimension `dim` (2 or 3).
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

/// Radial influence function `J` on the unit ball, zero for `r >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum InfluenceFunction {
    /// `J(r) = 1 - r`.
    LinearDecay,
    /// `J(r) = 1`.
    Constant,
    /// Piecewise-linear interpolation of `(r, J)` samples covering `[0, 1]`.
    Tabulated { r: Vec<f64>, values: Vec<f64> },
}

impl InfluenceFunction {
    pub fn tabulated(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || r.len() != values.len() {
            return Err(Error::Config(
                "tabulated influence needs >= 2 matching samples".into(),
            ));
        }
        if r[0] != 0.0 || *r.last().unwrap() != 1.0 || r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "tabulated influence abscissae must increase from 0 to 1".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(
                "tabulated influence values must be finite and >= 0".into(),
            ));
        }
        Ok(InfluenceFunction::Tabulated { r, values })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if !(0.0..1.0).contains(&r) {
            return 0.0;
        }
        match self {
            InfluenceFunction::LinearDecay => 1.0 - r,
            InfluenceFunction::Constant => 1.0,
            InfluenceFunction::Tabulated { r: rs, values } => {
                let k = match rs.binary_search_by(|p| p.partial_cmp(&r).unwrap()) {
                    Ok(k) => return values[k],
                    Err(k) => k,
                };
                let (r0, r1) = (rs[k - 1], rs[k]);
                let s = (r - r0) / (r1 - r0);
                values[k - 1] * (1.0 - s) + values[k] * s
            }
        }
    }

    /// Supremum `M` of `J` on `[0, 1)`.
    pub fn bound(&self) -> f64 {
        match self {
            InfluenceFunction::LinearDecay | InfluenceFunction::Constant => 1.0,
            InfluenceFunction::Tabulated { values, .. } => {
                values.iter().cloned().fold(0.0, f64::max)
            }
        }
    }
}

/// Kernel moment `(1/omega_d) * integral over the unit ball of J(|xi|) |xi|^-alpha`.
///
/// The integrand is radial, so this reduces to `d * int_0^1 J(r) r^(d-1-alpha) dr`,
/// evaluated by adaptive Gauss-Kronrod to relative tolerance 1e-10. A power
/// substitution `r = s^m` removes the endpoint singularity when `alpha > d - 1`.
pub fn influence_moment(j: &InfluenceFunction, alpha: f64, dim: usize) -> Result<f64> {
    if dim != 2 && dim != 3 {
        return Err(Error::Domain(format!("dimension {dim} not in {{2, 3}}")));
    }
    let d = dim as f64;
    if !(alpha < d) || !alpha.is_finite() {
        return Err(Error::Domain(format!(
            "moment order {alpha} is not integrable in dimension {dim}"
        )));
    }
    let p = d - 1.0 - alpha;
    let m = if p >= 0.0 {
        1.0
    } else {
        (2.0 / (p + 1.0)).ceil()
    };
    let integrand = |s: f64| {
        let r = s.powf(m);
        j.eval(r) * m * s.powf(m * (p + 1.0) - 1.0)
    };
    // kinks of a tabulated J sit at the breakpoints; split there so every piece is smooth
    let mut breaks = vec![0.0, 1.0];
    if let InfluenceFunction::Tabulated { r, .. } = j {
        breaks = r.iter().map(|x| x.powf(1.0 / m)).collect();
    }
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += quadrature::integrate(integrand, w[0], w[1], 1e-12, 1e-300)?;
    }
    Ok(d * total)
}

/// Bond potential `f(r) = c (1 - exp(-beta r^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensilePotential {
    pub c: f64,
    pub beta: f64,
}

impl TensilePotential {
    pub fn new(c: f64, beta: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!(
                "tensile potential needs c > 0, beta > 0 (got {c}, {beta})"
            )));
        }
        Ok(Self { c, beta })
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        self.c * (1.0 - (-self.beta * r * r).exp())
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        2.0 * self.c * self.beta * r * (-self.beta * r * r).exp()
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        let br2 = self.beta * r * r;
        2.0 * self.c * self.beta * (1.0 - 2.0 * br2) * (-br2).exp()
    }

    #[inline]
    pub fn d3(&self, r: f64) -> f64 {
        let b = self.beta;
        2.0 * self.c * b * (4.0 * b * b * r * r * r - 6.0 * b * r) * (-b * r * r).exp()
    }

    /// Inflection point `r_bar = 1/sqrt(2 beta)`, where the bond force starts softening.
    pub fn r_bar(&self) -> f64 {
        1.0 / (2.0 * self.beta).sqrt()
    }

    /// Asymptote `C+` of `f` at infinite strain.
    pub fn asymptote(&self) -> f64 {
        self.c
    }

    /// Bounds `[C0, C1, C2, C3]` on `|f|, |f'|, |f''|, |f'''|`.
    pub fn bounds(&self) -> [f64; 4] {
        let mut b = sampled_bounds(
            |r| [self.value(r), self.d1(r), self.d2(r), self.d3(r)],
            self.r_bar(),
        );
        // known asymptotics: sup f = c at infinity, sup |f''| = f''(0)
        b[0] = b[0].max(self.c);
        b[2] = b[2].max(2.0 * self.c * self.beta);
        b
    }
}

/// Critical bond strain `S_c = r_bar / sqrt(|y - x|)`.
pub fn critical_bond_strain(f: &TensilePotential, bond_length: f64) -> Result<f64> {
    if !(bond_length > 0.0) || !bond_length.is_finite() {
        return Err(Error::Domain(format!(
            "bond length must be positive (got {bond_length})"
        )));
    }
    Ok(f.r_bar() / bond_length.sqrt())
}

/// Potential `g` of the hydrostatic strain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DilatationalPotential {
    /// `g(r) = c_bar r^2 / 2`.
    Quadratic { c_bar: f64 },
    /// `g(r) = c (1 - exp(-beta r^2))`: convex near zero, concave past `1/sqrt(2 beta)`.
    ConvexConcave { c: f64, beta: f64 },
}

impl DilatationalPotential {
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { c_bar } => 0.5 * c_bar * r * r,
            Self::ConvexConcave { c, beta } => c * (1.0 - (-beta * r * r).exp()),
        }
    }

    #[inline]
    pub fn d1(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { c_bar } => c_bar * r,
            Self::ConvexConcave { c, beta } => 2.0 * c * beta * r * (-beta * r * r).exp(),
        }
    }

    #[inline]
    pub fn d2(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { c_bar } => c_bar,
            Self::ConvexConcave { c, beta } => {
                let br2 = beta * r * r;
                2.0 * c * beta * (1.0 - 2.0 * br2) * (-br2).exp()
            }
        }
    }

    #[inline]
    pub fn d3(&self, r: f64) -> f64 {
        match *self {
            Self::Quadratic { .. } => 0.0,
            Self::ConvexConcave { c, beta } => {
                2.0 * c
                    * beta
                    * (4.0 * beta * beta * r * r * r - 6.0 * beta * r)
                    * (-beta * r * r).exp()
            }
        }
    }

    /// Inflection points `(r+, r-)` of a convex-concave `g`.
    pub fn inflection_points(&self) -> Option<(f64, f64)> {
        match *self {
            Self::Quadratic { .. } => None,
            Self::ConvexConcave { beta, .. } => {
                let r = 1.0 / (2.0 * beta).sqrt();
                Some((r, -r))
            }
        }
    }

    /// Bound on `|g''|` used by the Lipschitz constant: `C^g_2` for a
    /// convex-concave `g`, `|g''(0)|` for a quadratic one.
    pub fn second_derivative_bound(&self) -> f64 {
        match *self {
            Self::Quadratic { c_bar } => c_bar.abs(),
            Self::ConvexConcave { .. } => self.bounds().expect("convex-concave g is bounded")[2],
        }
    }

    /// Bounds `[C0, C1, C2, C3]`; `None` for the (unbounded) quadratic potential.
    pub fn bounds(&self) -> Option<[f64; 4]> {
        match *self {
            Self::Quadratic { .. } => None,
            Self::ConvexConcave { c, beta } => {
                let scale = 1.0 / (2.0 * beta).sqrt();
                let mut b = sampled_bounds(
                    |r| [self.value(r), self.d1(r), self.d2(r), self.d3(r)],
                    scale,
                );
                b[0] = b[0].max(c.abs());
                b[2] = b[2].max((2.0 * c * beta).abs());
                Some(b)
            }
        }
    }
}

fn sampled_bounds<F: Fn(f64) -> [f64; 4]>(eval: F, scale: f64) -> [f64; 4] {
    let half = (BOUND_SAMPLES - 1) / 2;
    let step = BOUND_WINDOW * scale / half as f64;
    let mut b = [0.0f64; 4];
    for k in 0..BOUND_SAMPLES {
        let r = (k as f64 - half as f64) * step;
        let vals = eval(r);
        for (bi, vi) in b.iter_mut().zip(vals.iter()) {
            *bi = bi.max(vi.abs());
        }
    }
    b
}

/// Named material presets (bulk modulus 25 GPa, G_c = 500 J/m^2, rho = 1200 kg/m^3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaterialPreset {
    /// Poisson ratio 0.22.
    Nu022,
    /// Poisson ratio 0.245.
    Nu0245,
}

impl MaterialPreset {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "nu022" => Some(Self::Nu022),
            "nu0245" => Some(Self::Nu0245),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Nu022 => "nu022",
            Self::Nu0245 => "nu0245",
        }
    }

    /// `(c, beta, c_bar)`.
    pub fn parameters(self) -> (f64, f64, f64) {
        match self {
            Self::Nu022 => (4712.4, 1.7533e8, -1.0623e12),
            Self::Nu0245 => (4712.4, 1.5647e8, -1.7349e11),
        }
    }

    /// Reference `r_bar` listed alongside the parameters.
    pub fn listed_r_bar(self) -> f64 {
        match self {
            Self::Nu022 => 5.3402e-5,
            Self::Nu0245 => 5.6529e-5,
        }
    }
}

/// Convex-concave stand-in for the preset's quadratic `g`: same curvature at
/// zero (`|c_bar|`) and inflection at `theta = CONVEX_CONCAVE_THETA_C`.
pub const CONVEX_CONCAVE_THETA_C: f64 = 2.0e-6;

pub fn convex_concave_companion(c_bar: f64) -> DilatationalPotential {
    let beta = 1.0 / (2.0 * CONVEX_CONCAVE_THETA_C * CONVEX_CONCAVE_THETA_C);
    DilatationalPotential::ConvexConcave {
        c: c_bar.abs() / (2.0 * beta),
        beta,
    }
}

/// Complete constitutive description plus its derived constants.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialModel {
    pub rho: f64,
    pub horizon: f64,
    pub influence: InfluenceFunction,
    pub f: TensilePotential,
    pub g: DilatationalPotential,
    pub dim: usize,
    /// Critical energy release rate used for the Griffith energy, J/m^2.
    pub fracture_toughness: f64,
    derived: Derived,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Derived {
    j0: f64,
    j1: f64,
    f_bounds: [f64; 4],
    g2: f64,
}

impl MaterialModel {
    pub fn new(
        rho: f64,
        horizon: f64,
        influence: InfluenceFunction,
        f: TensilePotential,
        g: DilatationalPotential,
        dim: usize,
        fracture_toughness: f64,
    ) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Config(format!(
                "density must be positive (got {rho})"
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Config(format!(
                "horizon must be positive (got {horizon})"
            )));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::Config(format!(
                "dimension must be 2 or 3 (got {dim})"
            )));
        }
        match g {
            DilatationalPotential::Quadratic { c_bar } if !c_bar.is_finite() => {
                return Err(Error::Config("c_bar must be finite".into()))
            }
            DilatationalPotential::ConvexConcave { c, beta } if !(c.is_finite() && beta > 0.0) => {
                return Err(Error::Config(
                    "convex-concave g needs finite c and beta > 0".into(),
                ))
            }
            _ => {}
        }
        let derived = Derived {
            j0: influence_moment(&influence, 0.0, dim)?,
            j1: influence_moment(&influence, 1.0, dim)?,
            f_bounds: f.bounds(),
            g2: g.second_derivative_bound(),
        };
        Ok(Self {
            rho,
            horizon,
            influence,
            f,
            g,
            dim,
            fracture_toughness,
            derived,
        })
    }

    /// Preset material with `J(r) = 1 - r` and quadratic `g`, in two dimensions.
    pub fn preset(preset: MaterialPreset, horizon: f64) -> Result<Self> {
        let (c, beta, c_bar) = preset.parameters();
        Self::new(
            PRESET_DENSITY,
            horizon,
            InfluenceFunction::LinearDecay,
            TensilePotential::new(c, beta)?,
            DilatationalPotential::Quadratic { c_bar },
            2,
            PRESET_FRACTURE_TOUGHNESS,
        )
    }

    /// Same as [`MaterialModel::preset`] but with the convex-concave companion `g`.
    pub fn preset_convex_concave(preset: MaterialPreset, horizon: f64) -> Result<Self> {
        let mut m = Self::preset(preset, horizon)?;
        let (_, _, c_bar) = preset.parameters();
        m.g = convex_concave_companion(c_bar);
        m.derived.g2 = m.g.second_derivative_bound();
        Ok(m)
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(
            self.rho,
            horizon,
            self.influence.clone(),
            self.f,
            self.g,
            self.dim,
            self.fracture_toughness,
        )
    }

    pub fn with_influence(&self, influence: InfluenceFunction) -> Result<Self> {
        Self::new(
            self.rho,
            self.horizon,
            influence,
            self.f,
            self.g,
            self.dim,
            self.fracture_toughness,
        )
    }

    pub fn with_dilatational(&self, g: DilatationalPotential) -> Result<Self> {
        Self::new(
            self.rho,
            self.horizon,
            self.influence.clone(),
            self.f,
            g,
            self.dim,
            self.fracture_toughness,
        )
    }

    /// `J-bar_0`.
    pub fn j0(&self) -> f64 {
        self.derived.j0
    }

    /// `J-bar_1`.
    pub fn j1(&self) -> f64 {
        self.derived.j1
    }

    pub fn f_bounds(&self) -> [f64; 4] {
        self.derived.f_bounds
    }

    /// Normalisation `epsilon^d * omega_d` of the horizon integrals.
    pub fn horizon_volume(&self) -> f64 {
        self.horizon.powi(self.dim as i32) * unit_ball_volume(self.dim)
    }

    /// Scaled influence `J(|xi| / epsilon)`.
    #[inline]
    pub fn influence_at(&self, length: f64) -> f64 {
        self.influence.eval(length / self.horizon)
    }

    pub fn critical_strain(&self, bond_length: f64) -> Result<f64> {
        critical_bond_strain(&self.f, bond_length)
    }

    /// Lipschitz constant of the force in L2 (the force difference is bounded
    /// by `L3 / epsilon^2` times the field difference).
    pub fn lipschitz_l3(&self) -> f64 {
        lipschitz_l3(
            self.derived.f_bounds[2],
            self.derived.j1,
            self.derived.g2,
            self.derived.j0,
        )
    }
}

/// `4 (C^f_2 J1 + G2 J0^2)` where `G2` is `C^g_2` or `|g''(0)|`.
pub fn lipschitz_l3(cf2: f64, j1: f64, g2: f64, j0: f64) -> f64 {
    4.0 * (cf2 * j1 + g2.abs() * j0 * j0)
}
