//! Damage, crack length, energies, norms and stability checks.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dot, sub, Grid, Vec2};
use crate::operators::{Discretization, FieldState};

/// Damage `Z(x_i) = max_j S_ij / S_c(|x_j - x_i|)` over every bond to a
/// material (non-ghost) neighbor, crack-cut bonds included, floored at 0.
/// Ghost nodes get 0.
pub fn damage_field(disc: &Discretization, u: &[Vec2]) -> Vec<f64> {
    let r_bar = disc.material.f.r_bar();
    let grid = &disc.grid;
    (0..disc.len())
        .into_par_iter()
        .map(|i| {
            if !grid.interior[i] {
                return 0.0;
            }
            let ui = u[i];
            let mut z: f64 = 0.0;
            for b in disc.neighbors.of(i) {
                let j = b.j as usize;
                if !grid.interior[j] {
                    continue;
                }
                // S / S_c = (du.e / |xi|) * sqrt|xi| / r_bar
                let s = dot(sub(u[j], ui), b.dir) / (b.length.sqrt() * r_bar);
                z = z.max(s);
            }
            z
        })
        .collect()
}

/// Where the crack starts and which way it is expected to grow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrackTip {
    pub tip: Vec2,
    /// Unit axis direction (`[0, 1]` for an upward crack).
    pub direction: Vec2,
    pub initial_length: f64,
    /// Only nodes within this lateral distance of the tip count, if set.
    pub window: Option<f64>,
}

impl CrackTip {
    pub fn upward(tip: Vec2, initial_length: f64) -> Self {
        Self {
            tip,
            direction: [0.0, 1.0],
            initial_length,
            window: None,
        }
    }
}

/// Initial length plus `h` times the number of contiguous grid rows, starting
/// with the first row strictly beyond the tip, that contain a node with
/// `Z >= 1`.
pub fn crack_length(z: &[f64], grid: &Grid, tip: &CrackTip) -> Result<f64> {
    let d = tip.direction;
    let (axis, sign) = match (d[0], d[1]) {
        (x, y) if y == 0.0 && x.abs() == 1.0 => (0usize, x),
        (x, y) if x == 0.0 && y.abs() == 1.0 => (1usize, y),
        _ => {
            return Err(Error::Unsupported(format!(
                "crack direction {d:?} is not a coordinate axis"
            )))
        }
    };
    if z.len() != grid.len() {
        return Err(Error::Domain("damage field does not match the grid".into()));
    }
    let lat = 1 - axis;
    let counts = [grid.nx, grid.ny];
    let along = tip.tip[axis] / grid.h;
    let mut k = if sign > 0.0 {
        (along + 1e-9).floor() as i64 + 1
    } else {
        (along - 1e-9).ceil() as i64 - 1
    };
    let step = if sign > 0.0 { 1 } else { -1 };
    let mut rows = 0usize;
    loop {
        let row_pos = k - grid.origin[axis];
        if row_pos < 0 || row_pos as usize >= counts[axis] {
            break;
        }
        let mut hit = false;
        for m in 0..counts[lat] {
            let mut idx = [0i64; 2];
            idx[axis] = k;
            idx[lat] = grid.origin[lat] + m as i64;
            let n = match grid.node_at(idx) {
                Some(n) => n,
                None => continue,
            };
            if !grid.interior[n] || z[n] < 1.0 {
                continue;
            }
            if let Some(w) = tip.window {
                if (grid.coords[n][lat] - tip.tip[lat]).abs() > w {
                    continue;
                }
            }
            hit = true;
            break;
        }
        if !hit {
            break;
        }
        rows += 1;
        k += step;
    }
    Ok(tip.initial_length + rows as f64 * grid.h)
}

/// Kinetic, potential, total and augmented energy of one state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Energies {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub augmented: f64,
}

/// Sums per-node values in index order so the result does not depend on the
/// thread count.
fn ordered_sum(values: Vec<f64>) -> f64 {
    values.into_iter().sum()
}

pub fn energies(disc: &Discretization, state: &FieldState, theta: &[f64]) -> Energies {
    let vol = disc.grid.cell_volume();
    let rho = disc.material.rho;
    let kinetic = 0.5 * rho * vol * ordered_sum(state.v.iter().map(|v| dot(*v, *v)).collect());
    let per_node: Vec<f64> = (0..disc.len())
        .into_par_iter()
        .map(|i| {
            disc.bond_energy_density(&state.u, i) + disc.dilatational_energy_density(theta[i], i)
        })
        .collect();
    let potential = vol * ordered_sum(per_node);
    let u2 = vol * ordered_sum(state.u.iter().map(|u| dot(*u, *u)).collect());
    let total = kinetic + potential;
    Energies {
        kinetic,
        potential,
        total,
        augmented: total + 0.5 * u2,
    }
}

/// Peridynamic fracture energy (bond potential over the whole horizon, crack-cut
/// bonds included, at nodes with `Z >= 1`) and Griffith energy `G_c l`.
pub fn fracture_energies(
    disc: &Discretization,
    u: &[Vec2],
    z: &[f64],
    crack_len: f64,
) -> (f64, f64) {
    let vol = disc.grid.cell_volume();
    let per_node: Vec<f64> = (0..disc.len())
        .into_par_iter()
        .map(|i| {
            if z[i] >= 1.0 {
                disc.ball_bond_energy_density(u, i)
            } else {
                0.0
            }
        })
        .collect();
    (
        vol * ordered_sum(per_node),
        disc.material.fracture_toughness * crack_len,
    )
}

/// L2 norm of the cellwise-constant extension of `a` over the domain.
pub fn l2_norm(grid: &Grid, a: &[Vec2]) -> f64 {
    let mut acc = 0.0;
    for n in 0..grid.len() {
        let (lo, hi) = grid.clipped_cell(n);
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        if area > 0.0 {
            acc += area * dot(a[n], a[n]);
        }
    }
    acc.sqrt()
}

fn integer_ratio(a: f64, b: f64) -> bool {
    let r = a.max(b) / a.min(b);
    (r - r.round()).abs() <= 1e-9 * r
}

/// Pieces of the common refinement of both cell partitions along one axis:
/// `(length, lattice index on grid a, lattice index on grid b)`.
fn overlay_axis(lo: f64, hi: f64, ha: f64, hb: f64) -> Vec<(f64, i64, i64)> {
    let mut cuts = vec![lo, hi];
    for h in [ha, hb] {
        let first = (lo / h - 0.5).floor() as i64;
        let last = (hi / h - 0.5).ceil() as i64;
        for k in first..=last {
            let x = h * (k as f64 + 0.5);
            if x > lo && x < hi {
                cuts.push(x);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let tol = 1e-12 * ha.min(hb);
    cuts.dedup_by(|b, a| (*b - *a).abs() <= tol);
    cuts.windows(2)
        .filter(|w| w[1] - w[0] > tol)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            (
                w[1] - w[0],
                (m / ha).round() as i64,
                (m / hb).round() as i64,
            )
        })
        .collect()
}

/// Exact L2 distance between the cellwise-constant extensions of two fields
/// on grids over the same domain whose spacings have an integer ratio.
pub fn l2_difference(ga: &Grid, a: &[Vec2], gb: &Grid, b: &[Vec2]) -> Result<f64> {
    if a.len() != ga.len() || b.len() != gb.len() {
        return Err(Error::Domain("field length does not match its grid".into()));
    }
    let (da, db) = (&ga.domain, &gb.domain);
    let tol = 1e-9 * ga.h.min(gb.h);
    if (da.x0 - db.x0).abs() > tol
        || (da.x1 - db.x1).abs() > tol
        || (da.y0 - db.y0).abs() > tol
        || (da.y1 - db.y1).abs() > tol
    {
        return Err(Error::Unsupported(
            "fields live on different domains".into(),
        ));
    }
    if !integer_ratio(ga.h, gb.h) {
        return Err(Error::Unsupported(format!(
            "mesh sizes {} and {} are not nested",
            ga.h, gb.h
        )));
    }
    let xs = overlay_axis(da.x0, da.x1, ga.h, gb.h);
    let ys = overlay_axis(da.y0, da.y1, ga.h, gb.h);
    let lookup = |g: &Grid, f: &[Vec2], ix: i64, iy: i64| -> Result<Vec2> {
        g.node_at([ix, iy])
            .map(|n| f[n])
            .ok_or_else(|| Error::Domain(format!("no node at lattice index ({ix}, {iy})")))
    };
    let mut acc = 0.0;
    for &(ly, ay, by) in &ys {
        for &(lx, ax, bx) in &xs {
            let d = sub(lookup(ga, a, ax, ay)?, lookup(gb, b, bx, by)?);
            acc += lx * ly * dot(d, d);
        }
    }
    Ok(acc.sqrt())
}

/// Observed order `(log e12 - log e23) / log r`.
pub fn convergence_rate(e12: f64, e23: f64, r: f64) -> Result<f64> {
    if !(e12 > 0.0 && e23 > 0.0) {
        return Err(Error::Domain(format!(
            "errors must be positive (got {e12}, {e23})"
        )));
    }
    if !(r > 1.0) {
        return Err(Error::Domain(format!(
            "refinement ratio must exceed 1 (got {r})"
        )));
    }
    Ok((e12.ln() - e23.ln()) / r.ln())
}

/// One row of the diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub kinetic: f64,
    pub pd: f64,
    pub total: f64,
    pub augmented: f64,
    pub pe: f64,
    pub ge: f64,
    pub crack_length: f64,
    pub max_z: f64,
    pub u_l2: f64,
    pub v_l2: f64,
}

pub const CSV_HEADER: &str = "t,kinetic,pd,total,augmented,pe,ge,crack_length,max_z,u_l2,v_l2";

impl DiagnosticRecord {
    pub fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.kinetic,
            self.pd,
            self.total,
            self.augmented,
            self.pe,
            self.ge,
            self.crack_length,
            self.max_z,
            self.u_l2,
            self.v_l2,
        ]
    }

    pub fn from_values(v: [f64; 11]) -> Self {
        Self {
            t: v[0],
            kinetic: v[1],
            pd: v[2],
            total: v[3],
            augmented: v[4],
            pe: v[5],
            ge: v[6],
            crack_length: v[7],
            max_z: v[8],
            u_l2: v[9],
            v_l2: v[10],
        }
    }
}

/// Full diagnostics of one state. Without a crack tip the crack length is 0.
pub fn record(
    disc: &Discretization,
    state: &FieldState,
    tip: Option<&CrackTip>,
) -> Result<DiagnosticRecord> {
    let theta = disc.hydrostatic_strain_field(&state.u);
    let e = energies(disc, state, &theta);
    let z = damage_field(disc, &state.u);
    let len = match tip {
        Some(t) => crack_length(&z, &disc.grid, t)?,
        None => 0.0,
    };
    let (pe, ge) = fracture_energies(disc, &state.u, &z, len);
    let max_z = z.iter().copied().fold(0.0, f64::max);
    Ok(DiagnosticRecord {
        t: state.t,
        kinetic: e.kinetic,
        pd: e.potential,
        total: e.total,
        augmented: e.augmented,
        pe,
        ge,
        crack_length: len,
        max_z,
        u_l2: l2_norm(&disc.grid, &state.u),
        v_l2: l2_norm(&disc.grid, &state.v),
    })
}

/// Fitted energy-envelope constants for a recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `E(t) / E(0)` per sample.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// Smallest `C` with `sqrt E(t) <= sqrt E(0) + t C / eps^2 + int |b|`.
    pub c: f64,
    /// Smallest `C_2` (with `C_1 = 0`) satisfying the exponential envelope
    /// on the augmented energy.
    pub c2: f64,
    /// Smallest `C_1` (with `C_2 = 0`) satisfying the same envelope.
    pub c1: f64,
    pub finite: bool,
    pub unstable: bool,
}

/// Relative growth of `E` above `E(0)` that flags a force-free run unstable.
pub const ENERGY_GROWTH_TOLERANCE: f64 = 0.01;

fn cumulative_trapezoid(t: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    for k in 1..t.len() {
        out[k] = out[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
    }
    out
}

impl StabilityReport {
    /// `b_l2` holds `||b(t)||_{L2}` at the same sample times (zeros when
    /// unforced). Growth above [`ENERGY_GROWTH_TOLERANCE`] only flags
    /// instability when `b` vanishes.
    pub fn fit(
        t: &[f64],
        total: &[f64],
        augmented: &[f64],
        b_l2: &[f64],
        eps: f64,
    ) -> Result<Self> {
        let n = t.len();
        if n == 0 || total.len() != n || augmented.len() != n || b_l2.len() != n {
            return Err(Error::Domain(
                "stability series lengths differ or are empty".into(),
            ));
        }
        let finite = total.iter().chain(augmented.iter()).all(|x| x.is_finite());
        let e0 = total[0];
        let ratios: Vec<f64> = total
            .iter()
            .map(|&e| {
                if e0 != 0.0 {
                    e / e0
                } else if e == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let forced = b_l2.iter().any(|&b| b != 0.0);

        let b_int = cumulative_trapezoid(t, b_l2);
        let eps2 = eps * eps;
        let mut c: f64 = 0.0;
        for k in 1..n {
            if t[k] > 0.0 {
                let slack = total[k].max(0.0).sqrt() - e0.max(0.0).sqrt() - b_int[k];
                c = c.max(slack * eps2 / t[k]);
            }
        }

        let a0 = augmented[0];
        let t_end = t[n - 1];
        let b2: Vec<f64> = b_l2.iter().map(|b| b * b).collect();
        let envelope_holds = |c2: f64, c1: f64| -> bool {
            let a = 3.0 * (c2 / eps2 + 1.0);
            let weighted: Vec<f64> = t
                .iter()
                .zip(b2.iter())
                .map(|(&s, &b)| (c1 * c1 / (eps2 * eps2) + b) * (-a * s).exp())
                .collect();
            let forcing = *cumulative_trapezoid(t, &weighted).last().unwrap_or(&0.0);
            t.iter()
                .zip(augmented.iter())
                .all(|(&s, &e)| e <= (a * s).exp() * (a0 + forcing) * (1.0 + 1e-12) + 1e-300)
        };
        let fit = |holds: &dyn Fn(f64) -> bool| -> f64 {
            if !finite {
                return f64::INFINITY;
            }
            if holds(0.0) {
                return 0.0;
            }
            let mut hi = 1e-12;
            while !holds(hi) {
                hi *= 2.0;
                if hi > 1e300 {
                    return f64::INFINITY;
                }
            }
            let mut lo = hi / 2.0;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if holds(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let c2 = fit(&|x| envelope_holds(x, 0.0));
        let c1 = if t_end > 0.0 {
            fit(&|x| envelope_holds(0.0, x))
        } else {
            0.0
        };

        let unstable = !finite || (!forced && max_ratio > 1.0 + ENERGY_GROWTH_TOLERANCE);
        Ok(Self {
            ratios,
            max_ratio,
            c: if finite { c } else { f64::INFINITY },
            c2,
            c1,
            finite,
            unstable,
        })
    }
}
