//! Bond strain, hydrostatic strain and the nonlocal force densities,
//! evaluated by one-point quadrature over the neighbor cells.
//!
//! For node `i` and a visible neighbor `j` at distance `|xi|` with unit
//! vector `e`, volume `V_j` and partial-volume weight `Vbar`, define the pair
//! weight `w = omega_i omega_j J(|xi|/eps) V_j Vbar / (eps^d omega_d)`. Then
//!
//! ```text
//! theta_i = sum_j omega_j J V_j Vbar / (eps^d omega_d) * (u_j - u_i).e
//! L_T(i)  = sum_j 2 w / (eps sqrt|xi|) * f'((u_j - u_i).e / sqrt|xi|) e
//! L_D(i)  = sum_j w / eps^2 * (g'(theta_j) + g'(theta_i)) e
//! ```
//!
//! which is exactly minus the gradient (per unit cell volume) of the discrete
//! potential energy computed by [`Discretization::bond_energy_density`] and
//! [`Discretization::dilatational_energy_density`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dot, sub, BoundaryMode, Grid, Vec2};
use crate::neighbors::NeighborTable;
use crate::potentials::MaterialModel;

/// Displacement and velocity at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<Vec2>,
    pub v: Vec<Vec2>,
}

impl FieldState {
    pub fn zeros(n: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![[0.0; 2]; n],
            v: vec![[0.0; 2]; n],
        }
    }
}

/// Per-node force density.
pub type ForceField = Vec<Vec2>;

/// External body force `b(x, t)` sampled at the nodes.
pub trait BodyForce: Send + Sync {
    fn fill(&self, disc: &Discretization, t: f64, out: &mut [Vec2]) -> Result<()>;

    /// Whether `b` vanishes identically (lets the time loop skip it).
    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoBodyForce;

impl BodyForce for NoBodyForce {
    fn fill(&self, _: &Discretization, _: f64, out: &mut [Vec2]) -> Result<()> {
        out.iter_mut().for_each(|b| *b = [0.0; 2]);
        Ok(())
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Spatially and temporally constant body force.
#[derive(Debug, Clone, Copy)]
pub struct ConstantBodyForce(pub Vec2);

impl BodyForce for ConstantBodyForce {
    fn fill(&self, disc: &Discretization, _: f64, out: &mut [Vec2]) -> Result<()> {
        for (b, &inside) in out.iter_mut().zip(disc.grid.interior.iter()) {
            *b = if inside { self.0 } else { [0.0; 2] };
        }
        Ok(())
    }
}

/// Strain `S = (u_j - u_i).e / |x_j - x_i|` of a listed bond.
pub fn bond_strain(u: &[Vec2], table: &NeighborTable, i: usize, j: usize) -> Result<f64> {
    let b = table
        .find(i, j)
        .ok_or_else(|| Error::Domain(format!("node {j} is not a neighbor of {i}")))?;
    Ok(dot(sub(u[j], u[i]), b.dir) / b.length)
}

#[derive(Debug, Clone, Copy)]
struct ActiveBond {
    j: u32,
    dir: Vec2,
    inv_sqrt_len: f64,
    theta_w: f64,
    tensile_w: f64,
    dil_w: f64,
    energy_w: f64,
}

/// Grid, neighbor table, boundary weight and material bound together with
/// the per-bond quadrature weights of every bond that can carry force.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub grid: Grid,
    pub neighbors: NeighborTable,
    pub omega: Vec<f64>,
    pub boundary_mode: BoundaryMode,
    pub material: MaterialModel,
    offsets: Vec<usize>,
    active: Vec<ActiveBond>,
}

impl Discretization {
    pub fn new(
        grid: Grid,
        neighbors: NeighborTable,
        omega: Vec<f64>,
        boundary_mode: BoundaryMode,
        material: MaterialModel,
    ) -> Result<Self> {
        if material.dim != 2 {
            return Err(Error::Unsupported(
                "only two-dimensional grids are implemented".into(),
            ));
        }
        if neighbors.len() != grid.len() || omega.len() != grid.len() {
            return Err(Error::Config(
                "grid, neighbor table and boundary weight sizes differ".into(),
            ));
        }
        if neighbors.horizon != material.horizon || neighbors.h != grid.h {
            return Err(Error::Config(
                "neighbor table was built for another horizon or mesh".into(),
            ));
        }
        let eps = material.horizon;
        let norm = material.horizon_volume();
        let vol = grid.cell_volume();
        let mut offsets = Vec::with_capacity(grid.len() + 1);
        offsets.push(0);
        let mut active = Vec::new();
        for i in 0..grid.len() {
            let wi = omega[i];
            if wi > 0.0 {
                for b in neighbors.of(i) {
                    let wj = omega[b.j as usize];
                    let jw = material.influence_at(b.length);
                    if !b.visible || wj == 0.0 || jw == 0.0 || b.vcorr == 0.0 {
                        continue;
                    }
                    let theta_w = wj * jw * vol * b.vcorr / norm;
                    let pair_w = wi * theta_w;
                    let sqrt_len = b.length.sqrt();
                    active.push(ActiveBond {
                        j: b.j,
                        dir: b.dir,
                        inv_sqrt_len: 1.0 / sqrt_len,
                        theta_w,
                        tensile_w: 2.0 * pair_w / (eps * sqrt_len),
                        dil_w: pair_w / (eps * eps),
                        energy_w: pair_w / eps,
                    });
                }
            }
            offsets.push(active.len());
        }
        Ok(Self {
            grid,
            neighbors,
            omega,
            boundary_mode,
            material,
            offsets,
            active,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn active_bond_count(&self) -> usize {
        self.active.len()
    }

    #[inline]
    fn bonds(&self, i: usize) -> &[ActiveBond] {
        &self.active[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Hydrostatic strain at node `i`.
    pub fn hydrostatic_strain(&self, u: &[Vec2], i: usize) -> f64 {
        let ui = u[i];
        let mut acc = 0.0;
        for b in self.bonds(i) {
            acc += b.theta_w * dot(sub(u[b.j as usize], ui), b.dir);
        }
        acc
    }

    /// Hydrostatic strain at every node.
    pub fn hydrostatic_strain_field(&self, u: &[Vec2]) -> Vec<f64> {
        let mut theta = vec![0.0; self.len()];
        self.fill_theta(u, &mut theta);
        theta
    }

    fn fill_theta(&self, u: &[Vec2], theta: &mut [f64]) {
        theta
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, t)| *t = self.hydrostatic_strain(u, i));
    }

    /// Force density due to bond (tensile) strain at node `i`.
    pub fn tensile_force(&self, u: &[Vec2], i: usize) -> Vec2 {
        let f = &self.material.f;
        let ui = u[i];
        let mut acc = [0.0; 2];
        for b in self.bonds(i) {
            let r = dot(sub(u[b.j as usize], ui), b.dir) * b.inv_sqrt_len;
            let s = b.tensile_w * f.d1(r);
            acc[0] += s * b.dir[0];
            acc[1] += s * b.dir[1];
        }
        acc
    }

    /// Force density due to hydrostatic strain at node `i`; `theta` must hold
    /// the hydrostatic strain of every node.
    pub fn dilatational_force(&self, i: usize, theta: &[f64]) -> Result<Vec2> {
        if theta.len() != self.len() {
            return Err(Error::Domain(format!(
                "hydrostatic strain cache has {} entries for {} nodes",
                theta.len(),
                self.len()
            )));
        }
        Ok(self.dilatational_force_unchecked(i, theta))
    }

    #[inline]
    fn dilatational_force_unchecked(&self, i: usize, theta: &[f64]) -> Vec2 {
        let g = &self.material.g;
        let gi = g.d1(theta[i]);
        let mut acc = [0.0; 2];
        for b in self.bonds(i) {
            let s = b.dil_w * (g.d1(theta[b.j as usize]) + gi);
            acc[0] += s * b.dir[0];
            acc[1] += s * b.dir[1];
        }
        acc
    }

    #[inline]
    fn internal_force_at(&self, u: &[Vec2], theta: &[f64], i: usize) -> Vec2 {
        let f = &self.material.f;
        let g = &self.material.g;
        let ui = u[i];
        let gi = g.d1(theta[i]);
        let mut acc = [0.0; 2];
        for b in self.bonds(i) {
            let j = b.j as usize;
            let r = dot(sub(u[j], ui), b.dir) * b.inv_sqrt_len;
            let s = b.tensile_w * f.d1(r) + b.dil_w * (g.d1(theta[j]) + gi);
            acc[0] += s * b.dir[0];
            acc[1] += s * b.dir[1];
        }
        acc
    }

    /// Total force density `L_T + L_D + b` into `out`, using `theta` as
    /// scratch for the hydrostatic strain field (filled on return).
    pub fn assemble_into(
        &self,
        u: &[Vec2],
        t: f64,
        body: &dyn BodyForce,
        theta: &mut [f64],
        out: &mut [Vec2],
    ) -> Result<()> {
        if u.len() != self.len() || theta.len() != self.len() || out.len() != self.len() {
            return Err(Error::Domain("field length does not match the grid".into()));
        }
        self.fill_theta(u, theta);
        body.fill(self, t, out)?;
        let theta: &[f64] = theta;
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let fi = self.internal_force_at(u, theta, i);
            o[0] += fi[0];
            o[1] += fi[1];
        });
        if let Some(node) = out
            .iter()
            .position(|f| !(f[0].is_finite() && f[1].is_finite()))
        {
            return Err(Error::NonFiniteForce { node });
        }
        Ok(())
    }

    /// Total force density `L_T + L_D + b` at time `t`.
    pub fn assemble_total_force(
        &self,
        u: &[Vec2],
        t: f64,
        body: &dyn BodyForce,
    ) -> Result<ForceField> {
        let mut theta = vec![0.0; self.len()];
        let mut out = vec![[0.0; 2]; self.len()];
        self.assemble_into(u, t, body, &mut theta, &mut out)?;
        Ok(out)
    }

    /// Internal force `L_T + L_D` without body force.
    pub fn internal_force(&self, u: &[Vec2]) -> Result<ForceField> {
        self.assemble_total_force(u, 0.0, &NoBodyForce)
    }

    /// Bond-potential energy density at node `i`:
    /// `sum_j omega_i omega_j J V_j Vbar f(sqrt|xi| S) / (eps^(d+1) omega_d)`.
    pub fn bond_energy_density(&self, u: &[Vec2], i: usize) -> f64 {
        let f = &self.material.f;
        let ui = u[i];
        let mut acc = 0.0;
        for b in self.bonds(i) {
            let r = dot(sub(u[b.j as usize], ui), b.dir) * b.inv_sqrt_len;
            acc += b.energy_w * f.value(r);
        }
        acc
    }

    /// Bond potential density at node `i` summed over every geometric bond in
    /// the horizon, including bonds a crack has made invisible.
    pub fn ball_bond_energy_density(&self, u: &[Vec2], i: usize) -> f64 {
        let wi = self.omega[i];
        if wi == 0.0 {
            return 0.0;
        }
        let f = &self.material.f;
        let eps = self.material.horizon;
        let scale = wi * self.grid.cell_volume() / (self.material.horizon_volume() * eps);
        let ui = u[i];
        let mut acc = 0.0;
        for b in self.neighbors.of(i) {
            let wj = self.omega[b.j as usize];
            let jw = self.material.influence_at(b.length);
            if wj == 0.0 || jw == 0.0 || b.vcorr == 0.0 {
                continue;
            }
            let r = dot(sub(u[b.j as usize], ui), b.dir) / b.length.sqrt();
            acc += scale * wj * jw * b.vcorr * f.value(r);
        }
        acc
    }

    /// Hydrostatic potential density `omega_i g(theta_i) / eps^2`.
    pub fn dilatational_energy_density(&self, theta_i: f64, i: usize) -> f64 {
        let eps = self.material.horizon;
        self.omega[i] * self.material.g.value(theta_i) / (eps * eps)
    }
}
