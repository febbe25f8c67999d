//! Discrete manufactured solutions: for a chosen `u*(x, t)` the body force
//! `b = rho u*'' - L_h(u*)` makes `u*` the exact semi-discrete solution on
//! whatever grid it is sampled on.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{Grid, Vec2};
use crate::operators::{BodyForce, Discretization, FieldState};

/// `u*(x, t) = A phi(x) cos(W t) d` with
/// `phi = sin^2(pi (x - x0) / Lx) sin^2(pi (y - y0) / Ly)` on the box and 0
/// outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub amplitude: f64,
    pub frequency: f64,
    pub direction: Vec2,
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Manufactured {
    pub fn profile(&self, p: Vec2) -> f64 {
        let sx = (p[0] - self.lo[0]) / (self.hi[0] - self.lo[0]);
        let sy = (p[1] - self.lo[1]) / (self.hi[1] - self.lo[1]);
        if !(0.0..=1.0).contains(&sx) || !(0.0..=1.0).contains(&sy) {
            return 0.0;
        }
        (PI * sx).sin().powi(2) * (PI * sy).sin().powi(2)
    }

    fn sample(&self, grid: &Grid, scale: f64) -> Vec<Vec2> {
        grid.coords
            .iter()
            .zip(grid.interior.iter())
            .map(|(&p, &inside)| {
                if !inside {
                    return [0.0; 2];
                }
                let s = scale * self.profile(p);
                [s * self.direction[0], s * self.direction[1]]
            })
            .collect()
    }

    pub fn displacement(&self, grid: &Grid, t: f64) -> Vec<Vec2> {
        self.sample(grid, self.amplitude * (self.frequency * t).cos())
    }

    pub fn velocity(&self, grid: &Grid, t: f64) -> Vec<Vec2> {
        self.sample(
            grid,
            -self.amplitude * self.frequency * (self.frequency * t).sin(),
        )
    }

    /// Exact state at `t = 0`.
    pub fn initial_state(&self, grid: &Grid) -> FieldState {
        FieldState {
            t: 0.0,
            u: self.displacement(grid, 0.0),
            v: self.velocity(grid, 0.0),
        }
    }
}

impl BodyForce for Manufactured {
    fn fill(&self, disc: &Discretization, t: f64, out: &mut [Vec2]) -> Result<()> {
        let u = self.displacement(&disc.grid, t);
        let l = disc.internal_force(&u)?;
        let w2 = self.frequency * self.frequency;
        let rho = disc.material.rho;
        for (k, o) in out.iter_mut().enumerate() {
            *o = if disc.grid.interior[k] {
                [-rho * w2 * u[k][0] - l[k][0], -rho * w2 * u[k][1] - l[k][1]]
            } else {
                [0.0; 2]
            };
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_weight, build_grid, BoundaryMode, DomainSpec};
    use crate::integrator::{Integrator, TimePlan};
    use crate::neighbors::build_neighbors;
    use crate::potentials::{MaterialModel, MaterialPreset};

    #[test]
    fn profile_vanishes_on_the_box_boundary() {
        let m = Manufactured {
            amplitude: 1.0,
            frequency: 1.0,
            direction: [1.0, 0.0],
            lo: [0.0, 0.0],
            hi: [1.0, 2.0],
        };
        assert!(m.profile([0.0, 1.0]).abs() < 1e-30);
        assert!(m.profile([0.5, 2.0]).abs() < 1e-30);
        assert!((m.profile([0.5, 1.0]) - 1.0).abs() < 1e-15);
        assert_eq!(m.profile([1.5, 1.0]), 0.0);
    }

    #[test]
    fn scheme_tracks_the_manufactured_solution() {
        let eps = 8e-3;
        let spec = DomainSpec::rectangle(0.0, 0.032, 0.0, 0.032);
        let g = build_grid(&spec, eps / 4.0, eps).unwrap();
        let t = build_neighbors(&g, eps, &[]).unwrap();
        let w = boundary_weight(&g, BoundaryMode::Indicator);
        let mat = MaterialModel::preset(MaterialPreset::Nu0245, eps).unwrap();
        let disc = Discretization::new(g, t, w, BoundaryMode::Indicator, mat).unwrap();
        let m = Manufactured {
            amplitude: 1e-6,
            frequency: 2.0 * PI / 2e-6,
            direction: [0.6, 0.8],
            lo: [0.0, 0.0],
            hi: [0.032, 0.032],
        };
        let mut errs = Vec::new();
        for dt in [4e-9, 2e-9] {
            let plan = TimePlan::new(dt, 4e-7).unwrap();
            let mut it =
                Integrator::new(&disc, &m, vec![], plan, m.initial_state(&disc.grid)).unwrap();
            it.run(|_, _| Ok(())).unwrap();
            let s = it.into_state();
            let exact = m.displacement(&disc.grid, s.t);
            let err =
                s.u.iter()
                    .zip(&exact)
                    .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
                    .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] < 0.05 * m.amplitude, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!(ratio > 1.7 && ratio < 2.3, "{errs:?}");
    }
}
