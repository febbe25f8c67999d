//! Forward Euler in velocity, then displacement from the new velocity:
//!
//! ```text
//! v^{k+1} = v^k + dt (L(u^k) + b^k) / rho
//! u^{k+1} = u^k + dt v^{k+1}
//! ```
//!
//! Eliminating `v` gives the central difference scheme for `u`. Collars are
//! imposed after the update.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Grid, Vec2};
use crate::operators::{BodyForce, Discretization, FieldState};

/// How a collar constrains its nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollarKind {
    /// Sets `u` to the collar value and zeroes `v`.
    FixedDisplacement,
    /// Sets `v` to the collar value; `u` advances with that `v`.
    PrescribedVelocity,
    /// Holds `v = 0` and leaves `u` where it is.
    FixedVelocityZero,
}

/// Dirichlet-type constraint on the interior nodes of an axis-aligned box.
/// The prescribed component value at time `t` is `value + rate * t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Collar {
    pub lo: Vec2,
    pub hi: Vec2,
    pub components: [bool; 2],
    pub kind: CollarKind,
    pub value: f64,
    pub rate: f64,
}

impl Collar {
    pub fn new(
        lo: Vec2,
        hi: Vec2,
        components: [bool; 2],
        kind: CollarKind,
        value: f64,
    ) -> Result<Self> {
        if !(lo[0] <= hi[0] && lo[1] <= hi[1]) {
            return Err(Error::Config(format!(
                "collar box {lo:?}..{hi:?} is inverted"
            )));
        }
        if !components.iter().any(|&c| c) {
            return Err(Error::Config("collar constrains no component".into()));
        }
        if !value.is_finite() {
            return Err(Error::Config("collar value is not finite".into()));
        }
        Ok(Self {
            lo,
            hi,
            components,
            kind,
            value,
            rate: 0.0,
        })
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.value + self.rate * t
    }

    /// Interior nodes inside the closed box (with a relative slack of 1e-9 h).
    pub fn nodes(&self, grid: &Grid) -> Vec<usize> {
        let tol = 1e-9 * grid.h;
        grid.coords
            .iter()
            .enumerate()
            .filter(|&(n, p)| {
                grid.interior[n]
                    && p[0] >= self.lo[0] - tol
                    && p[0] <= self.hi[0] + tol
                    && p[1] >= self.lo[1] - tol
                    && p[1] <= self.hi[1] + tol
            })
            .map(|(n, _)| n)
            .collect()
    }
}

/// A collar resolved against a grid.
#[derive(Debug, Clone)]
pub struct BoundCollar {
    pub collar: Collar,
    pub nodes: Vec<usize>,
}

impl BoundCollar {
    pub fn bind(collar: Collar, grid: &Grid) -> Result<Self> {
        let nodes = collar.nodes(grid);
        if nodes.is_empty() {
            return Err(Error::Config(format!(
                "collar box {:?}..{:?} contains no grid node",
                collar.lo, collar.hi
            )));
        }
        Ok(Self { collar, nodes })
    }

    /// Imposes the constraint at time `t`. `dt` is the step that led to `t`
    /// (used to advance `u` under a prescribed velocity); pass 0 for the
    /// initial state.
    pub fn apply(&self, state: &mut FieldState, t: f64, dt: f64) {
        let c = &self.collar;
        let val = c.value_at(t);
        for &n in &self.nodes {
            for k in 0..2 {
                if !c.components[k] {
                    continue;
                }
                match c.kind {
                    CollarKind::FixedDisplacement => {
                        state.u[n][k] = val;
                        state.v[n][k] = 0.0;
                    }
                    CollarKind::PrescribedVelocity => {
                        if dt > 0.0 {
                            state.u[n][k] += dt * (val - state.v[n][k]);
                        }
                        state.v[n][k] = val;
                    }
                    CollarKind::FixedVelocityZero => {
                        if dt > 0.0 {
                            state.u[n][k] -= dt * state.v[n][k];
                        }
                        state.v[n][k] = 0.0;
                    }
                }
            }
        }
    }
}

/// Time step, final time and the derived step count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePlan {
    pub dt: f64,
    pub t_final: f64,
    pub steps: usize,
}

impl TimePlan {
    pub fn new(dt: f64, t_final: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!(
                "time step must be positive, got {dt}"
            )));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::Config(format!(
                "final time must be non-negative, got {t_final}"
            )));
        }
        let steps = (t_final / dt).round() as usize;
        Ok(Self { dt, t_final, steps })
    }

    /// Time at step `k`, computed without accumulating rounding.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// One step of the scheme on raw arrays: `force` must hold `L(u^k) + b^k`.
/// Nodes with `active[n] == false` are held at zero. Collars are applied at
/// `state.t + dt` afterwards.
pub fn advance(
    state: &mut FieldState,
    force: &[Vec2],
    dt: f64,
    rho: f64,
    active: &[bool],
    collars: &[BoundCollar],
) {
    let scale = dt / rho;
    state
        .u
        .par_iter_mut()
        .zip(state.v.par_iter_mut())
        .zip(force.par_iter().zip(active.par_iter()))
        .for_each(|((u, v), (f, &on))| {
            if on {
                v[0] += scale * f[0];
                v[1] += scale * f[1];
                u[0] += dt * v[0];
                u[1] += dt * v[1];
            } else {
                *u = [0.0; 2];
                *v = [0.0; 2];
            }
        });
    state.t += dt;
    for c in collars {
        c.apply(state, state.t, dt);
    }
}

fn first_non_finite(state: &FieldState) -> Option<usize> {
    state.u.iter().zip(state.v.iter()).position(|(u, v)| {
        !(u[0].is_finite() && u[1].is_finite() && v[0].is_finite() && v[1].is_finite())
    })
}

/// Heuristic upper bound of the linearized angular frequency, from a
/// Gershgorin row sum of the operator linearized about `u = 0`.
pub fn max_frequency_estimate(disc: &Discretization) -> f64 {
    let m = &disc.material;
    let f2 = m.f.d2(0.0).abs();
    let g2 = m.g.d2(0.0).abs();
    let eps = m.horizon;
    let vol = disc.grid.cell_volume();
    let norm = m.horizon_volume();
    let mut worst: f64 = 0.0;
    for i in 0..disc.len() {
        let wi = disc.omega[i];
        if wi == 0.0 {
            continue;
        }
        let mut tens = 0.0;
        let mut theta = 0.0;
        for b in disc.neighbors.of(i) {
            if !b.visible {
                continue;
            }
            let w = wi * disc.omega[b.j as usize] * m.influence_at(b.length) * vol * b.vcorr / norm;
            tens += 2.0 * w * f2 / (eps * b.length);
            theta += w;
        }
        // each theta is a weighted sum of the same size; L_D couples two of them
        let dil = 4.0 * g2 * theta * theta / (eps * eps);
        worst = worst.max(2.0 * (tens + dil));
    }
    (worst / m.rho).sqrt()
}

/// Step size above which the linearized scheme is expected to be unstable.
pub fn stable_dt_estimate(disc: &Discretization) -> f64 {
    let w = max_frequency_estimate(disc);
    if w > 0.0 {
        2.0 / w
    } else {
        f64::INFINITY
    }
}

/// Owns the state and scratch buffers of a time loop.
pub struct Integrator<'a> {
    disc: &'a Discretization,
    body: &'a dyn BodyForce,
    collars: Vec<BoundCollar>,
    plan: TimePlan,
    state: FieldState,
    step: usize,
    theta: Vec<f64>,
    force: Vec<Vec2>,
}

impl<'a> Integrator<'a> {
    /// Starts at `initial` (its `t` is reset to 0); collars are imposed on
    /// the initial state and exterior nodes are zeroed.
    pub fn new(
        disc: &'a Discretization,
        body: &'a dyn BodyForce,
        collars: Vec<BoundCollar>,
        plan: TimePlan,
        mut initial: FieldState,
    ) -> Result<Self> {
        let n = disc.len();
        if initial.u.len() != n || initial.v.len() != n {
            return Err(Error::Config(
                "initial state does not match the grid".into(),
            ));
        }
        initial.t = 0.0;
        for (k, &inside) in disc.grid.interior.iter().enumerate() {
            if !inside {
                initial.u[k] = [0.0; 2];
                initial.v[k] = [0.0; 2];
            }
        }
        for c in &collars {
            c.apply(&mut initial, 0.0, 0.0);
        }
        if let Some(node) = first_non_finite(&initial) {
            return Err(Error::NonFiniteState { step: 0, node });
        }
        let dt_est = stable_dt_estimate(disc);
        if plan.dt > dt_est {
            log::warn!(
                "time step {:.3e} s exceeds the heuristic stability estimate {:.3e} s",
                plan.dt,
                dt_est
            );
        }
        Ok(Self {
            disc,
            body,
            collars,
            plan,
            state: initial,
            step: 0,
            theta: vec![0.0; n],
            force: vec![[0.0; 2]; n],
        })
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn into_state(self) -> FieldState {
        self.state
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn plan(&self) -> &TimePlan {
        &self.plan
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.plan.steps
    }

    /// Hydrostatic strain of the current state.
    pub fn theta(&self) -> Vec<f64> {
        self.disc.hydrostatic_strain_field(&self.state.u)
    }

    /// Advances one step.
    pub fn step(&mut self) -> Result<()> {
        let t = self.plan.time(self.step);
        self.state.t = t;
        self.disc.assemble_into(
            &self.state.u,
            t,
            self.body,
            &mut self.theta,
            &mut self.force,
        )?;
        advance(
            &mut self.state,
            &self.force,
            self.plan.dt,
            self.disc.material.rho,
            &self.disc.grid.interior,
            &self.collars,
        );
        self.step += 1;
        self.state.t = self.plan.time(self.step);
        if let Some(node) = first_non_finite(&self.state) {
            return Err(Error::NonFiniteState {
                step: self.step,
                node,
            });
        }
        Ok(())
    }

    /// Runs to the end of the plan, calling `observe` on the initial state
    /// and after every step.
    pub fn run<F>(&mut self, mut observe: F) -> Result<()>
    where
        F: FnMut(usize, &FieldState) -> Result<()>,
    {
        if self.step == 0 {
            observe(0, &self.state)?;
        }
        while !self.is_done() {
            self.step()?;
            observe(self.step, &self.state)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_weight, build_grid, BoundaryMode, DomainSpec};
    use crate::neighbors::build_neighbors;
    use crate::operators::{ConstantBodyForce, NoBodyForce};
    use crate::potentials::{MaterialModel, MaterialPreset};

    fn small_disc() -> Discretization {
        let eps = 4e-3;
        let d = DomainSpec::rectangle(0.0, 0.012, 0.0, 0.012);
        let g = build_grid(&d, 1e-3, eps).unwrap();
        let t = build_neighbors(&g, eps, &[]).unwrap();
        let w = boundary_weight(&g, BoundaryMode::Indicator);
        let m = MaterialModel::preset(MaterialPreset::Nu0245, eps).unwrap();
        Discretization::new(g, t, w, BoundaryMode::Indicator, m).unwrap()
    }

    #[test]
    fn free_motion_is_linear() {
        let mut s = FieldState::zeros(1);
        s.v[0] = [0.5, -0.25];
        for _ in 0..8 {
            advance(&mut s, &[[0.0; 2]], 0.25, 1.0, &[true], &[]);
        }
        assert_eq!(s.u[0], [1.0, -0.5]);
        assert_eq!(s.t, 2.0);
    }

    #[test]
    fn constant_force_telescopes() {
        let (dt, rho, f) = (1e-3, 4.0, 2.0);
        let mut s = FieldState::zeros(1);
        for k in 1..=10 {
            advance(&mut s, &[[f, 0.0]], dt, rho, &[true], &[]);
            let expected = k as f64 * dt * f / rho;
            assert!((s.v[0][0] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn central_difference_identity() {
        let disc = small_disc();
        let n = disc.len();
        let mut s = FieldState::zeros(n);
        for (k, p) in disc.grid.coords.iter().enumerate() {
            if disc.grid.interior[k] {
                s.u[k] = [1e-6 * (p[0] * 300.0).sin(), 1e-6 * (p[1] * 200.0).cos()];
            }
        }
        let dt = 1e-8;
        let rho = disc.material.rho;
        let mut trace = vec![s.u.clone()];
        let mut forces = Vec::new();
        for _ in 0..3 {
            let f = disc.internal_force(&s.u).unwrap();
            advance(&mut s, &f, dt, rho, &disc.grid.interior, &[]);
            forces.push(f);
            trace.push(s.u.clone());
        }
        for k in 1..3 {
            for n in 0..n {
                for c in 0..2 {
                    let lhs = (trace[k + 1][n][c] - 2.0 * trace[k][n][c] + trace[k - 1][n][c])
                        / (dt * dt);
                    let rhs = forces[k][n][c] / rho;
                    assert!(
                        (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0) + 1e-6 * rhs.abs(),
                        "{lhs} {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn collars_overwrite_components() {
        let mut s = FieldState::zeros(2);
        s.v = vec![[1.0, 1.0], [1.0, 1.0]];
        let grid_free = BoundCollar {
            collar: Collar::new(
                [0.0; 2],
                [1.0; 2],
                [true, false],
                CollarKind::PrescribedVelocity,
                -1.0,
            )
            .unwrap(),
            nodes: vec![0],
        };
        advance(
            &mut s,
            &[[0.0; 2]; 2],
            0.5,
            1.0,
            &[true, true],
            &[grid_free],
        );
        assert_eq!(s.v[0], [-1.0, 1.0]);
        assert_eq!(s.u[0], [-0.5, 0.5]);
        assert_eq!(s.u[1], [0.5, 0.5]);
        let fixed = BoundCollar {
            collar: Collar::new(
                [0.0; 2],
                [1.0; 2],
                [false, true],
                CollarKind::FixedDisplacement,
                0.0,
            )
            .unwrap()
            .with_rate(2.0),
            nodes: vec![1],
        };
        advance(&mut s, &[[0.0; 2]; 2], 0.5, 1.0, &[true, true], &[fixed]);
        assert_eq!(s.u[1], [1.0, 2.0]);
        assert_eq!(s.v[1], [1.0, 0.0]);
    }

    #[test]
    fn zero_steps_and_zero_state() {
        let disc = small_disc();
        let plan = TimePlan::new(1e-8, 0.0).unwrap();
        let mut it = Integrator::new(
            &disc,
            &NoBodyForce,
            vec![],
            plan,
            FieldState::zeros(disc.len()),
        )
        .unwrap();
        let mut seen = 0;
        it.run(|_, _| {
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(seen, 1);

        let plan = TimePlan::new(1e-8, 1e-7).unwrap();
        assert_eq!(plan.steps, 10);
        let mut it = Integrator::new(
            &disc,
            &NoBodyForce,
            vec![],
            plan,
            FieldState::zeros(disc.len()),
        )
        .unwrap();
        it.run(|_, _| Ok(())).unwrap();
        let s = it.into_state();
        assert!(s.u.iter().chain(s.v.iter()).all(|x| x == &[0.0, 0.0]));
        assert!((s.t - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn ghosts_stay_zero_under_body_force() {
        let disc = small_disc();
        let plan = TimePlan::new(1e-8, 5e-8).unwrap();
        let body = ConstantBodyForce([1e6, 0.0]);
        let mut it =
            Integrator::new(&disc, &body, vec![], plan, FieldState::zeros(disc.len())).unwrap();
        it.run(|_, _| Ok(())).unwrap();
        let s = it.state();
        for (k, &inside) in disc.grid.interior.iter().enumerate() {
            if !inside {
                assert_eq!(s.u[k], [0.0; 2]);
            }
        }
    }

    #[test]
    fn invalid_plans_are_rejected() {
        assert!(TimePlan::new(0.0, 1.0).is_err());
        assert!(TimePlan::new(1.0, -1.0).is_err());
        assert!(Collar::new(
            [0.0; 2],
            [1.0; 2],
            [false, false],
            CollarKind::FixedDisplacement,
            0.0
        )
        .is_err());
    }

    #[test]
    fn stable_step_estimate_is_positive() {
        let disc = small_disc();
        let dt = stable_dt_estimate(&disc);
        assert!(dt.is_finite() && dt > 0.0);
    }
}
