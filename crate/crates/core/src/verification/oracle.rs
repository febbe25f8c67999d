//! All-pairs reference evaluation of the discrete force and energy.
//!
//! Shares no code with the production kernel beyond the potentials and the
//! crack test: no neighbor table, no binning, no precomputed weights, and
//! compensated accumulation throughout.

use crate::error::{Error, Result};
use crate::geometry::{bond_is_cut, Grid, Segment, Vec2};
use crate::potentials::MaterialModel;
use crate::quadrature::CompensatedSum;

/// Largest node count the quadratic oracle accepts.
pub const ORACLE_MAX_NODES: usize = 4096;

/// Inputs of the oracle: the lattice, boundary weight, material and cracks.
pub struct OracleProblem<'a> {
    pub grid: &'a Grid,
    pub omega: &'a [f64],
    pub material: &'a MaterialModel,
    pub cracks: &'a [Segment],
}

struct Pair {
    j: usize,
    len: f64,
    e: Vec2,
    weight: f64,
}

impl OracleProblem<'_> {
    fn check(&self, u: &[Vec2]) -> Result<()> {
        let n = self.grid.len();
        if n > ORACLE_MAX_NODES {
            return Err(Error::Unsupported(format!(
                "brute-force oracle refuses {n} nodes (limit {ORACLE_MAX_NODES})"
            )));
        }
        if u.len() != n || self.omega.len() != n {
            return Err(Error::Domain("oracle inputs do not match the grid".into()));
        }
        Ok(())
    }

    /// Every visible pair `(i, j)` within `eps + h/2`, with the combined
    /// weight `J(|xi|/eps) V_j Vbar / (eps^d omega_d)` (boundary weights not
    /// included).
    fn pairs(&self, i: usize) -> Vec<Pair> {
        let m = self.material;
        let eps = m.horizon;
        let h = self.grid.h;
        let scale = m.horizon_volume();
        let xi = self.grid.coords[i];
        let mut out = Vec::new();
        for (j, &xj) in self.grid.coords.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = [xj[0] - xi[0], xj[1] - xi[1]];
            let len = d[0].hypot(d[1]);
            if len > eps + 0.5 * h {
                continue;
            }
            if bond_is_cut(self.cracks, xi, xj) {
                continue;
            }
            let vbar = if len <= eps - 0.5 * h {
                1.0
            } else {
                (eps + 0.5 * h - len) / h
            };
            let r = len / eps;
            let jr = m.influence.eval(r);
            out.push(Pair {
                j,
                len,
                e: [d[0] / len, d[1] / len],
                weight: jr * h * h * vbar / scale,
            });
        }
        out
    }

    fn strain(u: &[Vec2], i: usize, p: &Pair) -> f64 {
        ((u[p.j][0] - u[i][0]) * p.e[0] + (u[p.j][1] - u[i][1]) * p.e[1]) / p.len
    }

    /// `theta_i = sum_j omega_j J S |xi| V_j Vbar / (eps^d omega_d)`.
    pub fn hydrostatic_strain(&self, u: &[Vec2]) -> Result<Vec<f64>> {
        self.check(u)?;
        Ok((0..self.grid.len())
            .map(|i| {
                let mut acc = CompensatedSum::default();
                for p in self.pairs(i) {
                    acc.add(self.omega[p.j] * p.weight * Self::strain(u, i, &p) * p.len);
                }
                acc.value()
            })
            .collect())
    }

    /// `L_T + L_D` at every node.
    pub fn force(&self, u: &[Vec2]) -> Result<Vec<Vec2>> {
        let theta = self.hydrostatic_strain(u)?;
        let m = self.material;
        let eps = m.horizon;
        Ok((0..self.grid.len())
            .map(|i| {
                let mut fx = CompensatedSum::default();
                let mut fy = CompensatedSum::default();
                for p in self.pairs(i) {
                    let ww = self.omega[i] * self.omega[p.j] * p.weight;
                    let s = Self::strain(u, i, &p);
                    let root = p.len.sqrt();
                    // 2 (J / (eps |xi|)) f'(sqrt|xi| S) sqrt|xi|
                    let tensile = 2.0 * ww / (eps * p.len) * m.f.d1(root * s) * root;
                    let dil = ww / (eps * eps) * (m.g.d1(theta[p.j]) + m.g.d1(theta[i]));
                    fx.add(tensile * p.e[0]);
                    fx.add(dil * p.e[0]);
                    fy.add(tensile * p.e[1]);
                    fy.add(dil * p.e[1]);
                }
                [fx.value(), fy.value()]
            })
            .collect())
    }

    /// Discrete potential energy
    /// `sum_i V_i [sum_j omega_i omega_j J f(sqrt|xi| S) V_j Vbar / (eps^(d+1) omega_d)
    ///  + omega_i g(theta_i) / eps^2]`.
    pub fn potential_energy(&self, u: &[Vec2]) -> Result<f64> {
        let theta = self.hydrostatic_strain(u)?;
        let m = self.material;
        let eps = m.horizon;
        let vol = self.grid.h * self.grid.h;
        let mut total = CompensatedSum::default();
        for i in 0..self.grid.len() {
            for p in self.pairs(i) {
                let s = Self::strain(u, i, &p);
                total.add(
                    vol * self.omega[i] * self.omega[p.j] * p.weight * m.f.value(p.len.sqrt() * s)
                        / eps,
                );
            }
            total.add(vol * self.omega[i] * m.g.value(theta[i]) / (eps * eps));
        }
        Ok(total.value())
    }
}

/// Brute-force force density for a field `u`.
pub fn brute_force_force(problem: &OracleProblem<'_>, u: &[Vec2]) -> Result<Vec<Vec2>> {
    problem.force(u)
}

/// Largest componentwise deviation of `a` from `b`, relative to the largest
/// component of `b`.
pub fn max_relative_deviation(a: &[Vec2], b: &[Vec2]) -> f64 {
    let scale = b
        .iter()
        .flat_map(|x| x.iter())
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    let diff = a
        .iter()
        .zip(b.iter())
        .flat_map(|(x, y)| [(x[0] - y[0]).abs(), (x[1] - y[1]).abs()])
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_grid, DomainSpec};

    #[test]
    fn guard_refuses_large_grids() {
        let spec = DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0);
        let g = build_grid(&spec, 1.0 / 70.0, 0.0).unwrap();
        let m = MaterialModel::preset(crate::potentials::MaterialPreset::Nu022, 0.05).unwrap();
        let w = vec![1.0; g.len()];
        let p = OracleProblem {
            grid: &g,
            omega: &w,
            material: &m,
            cracks: &[],
        };
        assert!(p.force(&vec![[0.0; 2]; g.len()]).is_err());
    }

    #[test]
    fn deviation_measure() {
        assert_eq!(max_relative_deviation(&[[1.0, 2.0]], &[[1.0, 2.0]]), 0.0);
        assert_eq!(max_relative_deviation(&[[1.0, 3.0]], &[[1.0, 2.0]]), 0.5);
    }
}
