//! Turns a [`ScenarioConfig`] into a discretization, loads and a time loop.

use crate::diagnostics::{self, CrackTip, DiagnosticRecord};
use crate::error::{Error, Result};
use crate::geometry::{boundary_weight, build_grid, dot, norm, sub, Grid, Vec2};
use crate::integrator::{BoundCollar, Integrator, TimePlan};
use crate::neighbors::build_neighbors;
use crate::operators::{BodyForce, ConstantBodyForce, Discretization, FieldState, NoBodyForce};
use crate::verification::manufactured::Manufactured;

use super::config::{InitialSpec, LoadSpec, ScenarioConfig};

/// Line load growing linearly in time: `f_max t` at the midpoint of the
/// segment, tapering linearly to zero at its ends, along `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct RampLineForce {
    pub f_max: f64,
    pub direction: Vec2,
    /// `(node, profile weight in [0, 1])` for every loaded node.
    pub nodes: Vec<(usize, f64)>,
}

impl RampLineForce {
    /// Loads the interior nodes within `thickness / 2` of the segment `a -> b`.
    pub fn new(
        grid: &Grid,
        f_max: f64,
        a: Vec2,
        b: Vec2,
        direction: Vec2,
        thickness: f64,
    ) -> Result<Self> {
        let ab = sub(b, a);
        let len2 = dot(ab, ab);
        if len2 == 0.0 {
            return Err(Error::Config("load line has zero length".into()));
        }
        let half = 0.5 * thickness + 1e-9 * grid.h;
        let nodes: Vec<(usize, f64)> = grid
            .coords
            .iter()
            .enumerate()
            .filter(|&(n, _)| grid.interior[n])
            .filter_map(|(n, &p)| {
                let s = dot(sub(p, a), ab) / len2;
                if !(-1e-12..=1.0 + 1e-12).contains(&s) {
                    return None;
                }
                let s = s.clamp(0.0, 1.0);
                let foot = [a[0] + s * ab[0], a[1] + s * ab[1]];
                (norm(sub(p, foot)) <= half).then(|| (n, 1.0 - (2.0 * s - 1.0).abs()))
            })
            .collect();
        if nodes.is_empty() {
            return Err(Error::Config(
                "load line does not touch any grid node".into(),
            ));
        }
        Ok(Self {
            f_max,
            direction,
            nodes,
        })
    }
}

impl BodyForce for RampLineForce {
    fn fill(&self, _: &Discretization, t: f64, out: &mut [Vec2]) -> Result<()> {
        out.iter_mut().for_each(|o| *o = [0.0; 2]);
        let peak = self.f_max * t;
        for &(n, w) in &self.nodes {
            out[n] = [peak * w * self.direction[0], peak * w * self.direction[1]];
        }
        Ok(())
    }
}

/// Everything needed to run one scenario.
pub struct Simulation {
    pub config: ScenarioConfig,
    pub disc: Discretization,
    pub body: Box<dyn BodyForce>,
    pub collars: Vec<BoundCollar>,
    pub plan: TimePlan,
    pub initial: FieldState,
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("name", &self.config.name)
            .field("nodes", &self.disc.len())
            .field("bonds", &self.disc.active_bond_count())
            .field("plan", &self.plan)
            .finish()
    }
}

fn manufactured_of(cfg: &ScenarioConfig) -> Option<Manufactured> {
    match cfg.load {
        LoadSpec::Manufactured {
            amplitude,
            frequency,
            direction,
            region,
        } => {
            let d = &cfg.domain;
            let r = region.unwrap_or([d.x0, d.y0, d.x1, d.y1]);
            Some(Manufactured {
                amplitude,
                frequency,
                direction,
                lo: [r[0], r[1]],
                hi: [r[2], r[3]],
            })
        }
        _ => None,
    }
}

impl Simulation {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let h = config.h();
        let material = config.material.build()?;
        let eps = material.horizon;
        let grid = build_grid(&config.domain, h, config.exterior_width())?;
        let table = build_neighbors(&grid, eps, &config.domain.cracks)?;
        let omega = boundary_weight(&grid, config.material.boundary);
        let disc = Discretization::new(grid, table, omega, config.material.boundary, material)?;

        let body: Box<dyn BodyForce> = match &config.load {
            LoadSpec::None => Box::new(NoBodyForce),
            LoadSpec::Constant(b) => Box::new(ConstantBodyForce(*b)),
            LoadSpec::RampLine {
                f_max,
                a,
                b,
                direction,
                thickness,
            } => Box::new(RampLineForce::new(
                &disc.grid,
                *f_max,
                *a,
                *b,
                *direction,
                thickness.unwrap_or(h),
            )?),
            LoadSpec::Manufactured { .. } => {
                Box::new(manufactured_of(config).expect("manufactured load"))
            }
        };

        let collars = config
            .collars
            .iter()
            .map(|c| BoundCollar::bind(c.clone(), &disc.grid))
            .collect::<Result<Vec<_>>>()?;
        let plan = TimePlan::new(config.dt, config.t_final)?;
        let initial = initial_state(config, &disc.grid)?;
        Ok(Self {
            config: config.clone(),
            disc,
            body,
            collars,
            plan,
            initial,
        })
    }

    pub fn crack_tip(&self) -> Option<&CrackTip> {
        self.config.output.crack.as_ref()
    }

    pub fn integrator(&self) -> Result<Integrator<'_>> {
        Integrator::new(
            &self.disc,
            self.body.as_ref(),
            self.collars.clone(),
            self.plan,
            self.initial.clone(),
        )
    }

    /// Runs to the final time; `observe` sees the initial state and every
    /// step. Returns the final state.
    pub fn run<F>(&self, observe: F) -> Result<FieldState>
    where
        F: FnMut(usize, &FieldState) -> Result<()>,
    {
        let mut it = self.integrator()?;
        it.run(observe)?;
        Ok(it.into_state())
    }

    /// Diagnostics every `stride` steps plus the final step.
    pub fn run_diagnostics(&self, stride: usize) -> Result<(Vec<DiagnosticRecord>, FieldState)> {
        let stride = stride.max(1);
        let last = self.plan.steps;
        let mut out = Vec::new();
        let tip = self.crack_tip().copied();
        let fin = self.run(|k, s| {
            if k % stride == 0 || k == last {
                out.push(diagnostics::record(&self.disc, s, tip.as_ref())?);
            }
            Ok(())
        })?;
        Ok((out, fin))
    }

    /// States at the steps nearest to `times` (which must lie in `[0, t_final]`).
    pub fn capture_at(&self, times: &[f64]) -> Result<Vec<FieldState>> {
        let steps = times
            .iter()
            .map(|&t| {
                let k = (t / self.plan.dt).round();
                if !(t >= 0.0) || k as usize > self.plan.steps {
                    Err(Error::Config(format!(
                        "capture time {t} lies outside [0, {}]",
                        self.plan.t_final
                    )))
                } else {
                    Ok(k as usize)
                }
            })
            .collect::<Result<Vec<usize>>>()?;
        let mut out: Vec<Option<FieldState>> = vec![None; times.len()];
        let last = steps.iter().copied().max().unwrap_or(0);
        let mut it = self.integrator()?;
        loop {
            let k = it.step_index();
            for (slot, &want) in out.iter_mut().zip(steps.iter()) {
                if want == k {
                    *slot = Some(it.state().clone());
                }
            }
            if k >= last {
                break;
            }
            it.step()?;
        }
        Ok(out
            .into_iter()
            .map(|s| s.expect("every step visited"))
            .collect())
    }

    /// `||b(t)||` in L2 over the domain.
    pub fn body_l2(&self, t: f64) -> Result<f64> {
        if self.body.is_zero() {
            return Ok(0.0);
        }
        let mut b = vec![[0.0; 2]; self.disc.len()];
        self.body.fill(&self.disc, t, &mut b)?;
        Ok(diagnostics::l2_norm(&self.disc.grid, &b))
    }
}

fn initial_state(cfg: &ScenarioConfig, grid: &Grid) -> Result<FieldState> {
    let n = grid.len();
    let mut s = FieldState::zeros(n);
    match &cfg.initial {
        InitialSpec::Zero => {}
        InitialSpec::Bump {
            amplitude,
            center,
            sigma,
            direction,
        } => {
            for (k, p) in grid.coords.iter().enumerate() {
                if grid.interior[k] {
                    let d = sub(*p, *center);
                    let a = amplitude * (-dot(d, d) / (2.0 * sigma * sigma)).exp();
                    s.u[k] = [a * direction[0], a * direction[1]];
                }
            }
        }
        InitialSpec::Manufactured => {
            let m = manufactured_of(cfg).ok_or_else(|| {
                Error::Config("manufactured initial state needs a manufactured load".into())
            })?;
            s = m.initial_state(grid);
        }
        InitialSpec::UniformVelocity(v) => {
            for (k, &inside) in grid.interior.iter().enumerate() {
                if inside {
                    s.v[k] = *v;
                }
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainSpec;

    #[test]
    fn ramp_profile_peaks_at_the_midpoint() {
        let d = DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0);
        let g = build_grid(&d, 0.125, 0.0).unwrap();
        let f = RampLineForce::new(&g, -2.0, [0.25, 1.0], [0.75, 1.0], [0.0, 1.0], 0.125).unwrap();
        assert_eq!(f.nodes.len(), 5);
        let peak = f.nodes.iter().map(|&(_, w)| w).fold(0.0, f64::max);
        assert_eq!(peak, 1.0);
        let ends: Vec<f64> = f
            .nodes
            .iter()
            .map(|&(_, w)| w)
            .filter(|&w| w == 0.0)
            .collect();
        assert_eq!(ends.len(), 2);
        let mut out = vec![[0.0; 2]; g.len()];
        let mid = f.nodes.iter().find(|&&(_, w)| w == 1.0).unwrap().0;
        f.fill(&dummy_disc(), 3.0, &mut out).unwrap();
        assert_eq!(out[mid], [0.0, -6.0]);
    }

    fn dummy_disc() -> Discretization {
        use crate::geometry::BoundaryMode;
        use crate::potentials::{MaterialModel, MaterialPreset};
        let d = DomainSpec::rectangle(0.0, 0.004, 0.0, 0.004);
        let g = build_grid(&d, 1e-3, 0.0).unwrap();
        let t = build_neighbors(&g, 2e-3, &[]).unwrap();
        let w = boundary_weight(&g, BoundaryMode::Indicator);
        let m = MaterialModel::preset(MaterialPreset::Nu0245, 2e-3).unwrap();
        Discretization::new(g, t, w, BoundaryMode::Indicator, m).unwrap()
    }

    #[test]
    fn missing_load_line_is_an_error() {
        let d = DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0);
        let g = build_grid(&d, 0.125, 0.0).unwrap();
        assert!(RampLineForce::new(&g, 1.0, [0.3, 2.0], [0.7, 2.0], [0.0, 1.0], 0.1).is_err());
    }
}
