//! Rectangular domains, crack segments, the uniform lattice `D_h`, the
//! boundary weight and projection onto cellwise-constant fields.

use crate::error::{Error, Result};
use crate::quadrature;

pub type Vec2 = [f64; 2];

#[inline]
pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

/// Relative slack used when deciding whether a lattice point lies on a boundary.
const LATTICE_TOL: f64 = 1e-9;

/// Closed line segment (a crack).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment {
    pub fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    /// Side of `p` relative to the oriented line `a -> b`. Points exactly on
    /// the line count as the positive (left) side, so a crack drawn through a
    /// column of nodes assigns that column to one face.
    #[inline]
    fn side(&self, p: Vec2) -> bool {
        cross(sub(self.b, self.a), sub(p, self.a)) >= 0.0
    }

    /// Whether the bond from `p` to `q` is cut by this crack.
    ///
    /// The endpoints must fall on different sides (ties resolved by
    /// [`Segment::side`]) and the bond line must meet the closed segment.
    pub fn cuts(&self, p: Vec2, q: Vec2) -> bool {
        if self.side(p) == self.side(q) {
            return false;
        }
        let d = sub(self.b, self.a);
        let bond = sub(q, p);
        let denom = cross(d, bond);
        if denom == 0.0 {
            return false;
        }
        // crossing point a + s d
        let s = cross(sub(p, self.a), bond) / denom;
        (0.0..=1.0).contains(&s)
    }
}

/// Whether any crack cuts the bond between `p` and `q`. Evaluated on a
/// canonical ordering of the endpoints so the answer is symmetric bitwise.
pub fn bond_is_cut(cracks: &[Segment], p: Vec2, q: Vec2) -> bool {
    let (p, q) = if (p[0], p[1]) <= (q[0], q[1]) {
        (p, q)
    } else {
        (q, p)
    };
    cracks.iter().any(|c| c.cuts(p, q))
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` with optional crack segments.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub cracks: Vec<Segment>,
}

impl DomainSpec {
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self {
            x0,
            x1,
            y0,
            y1,
            cracks: Vec::new(),
        }
    }

    pub fn with_crack(mut self, crack: Segment) -> Self {
        self.cracks.push(crack);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x0, self.x1, self.y0, self.y1]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x0 < self.x1) || !(self.y0 < self.y1) {
            return Err(Error::Config(format!(
                "domain extents must be finite and strictly ordered: [{}, {}] x [{}, {}]",
                self.x0, self.x1, self.y0, self.y1
            )));
        }
        for (k, c) in self.cracks.iter().enumerate() {
            if !self.contains(c.a, 0.0) || !self.contains(c.b, 0.0) {
                return Err(Error::Config(format!("crack {k} leaves the domain")));
            }
            if c.a == c.b {
                return Err(Error::Config(format!("crack {k} has zero length")));
            }
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Whether `p` lies in the rectangle grown by `slack` on every side.
    pub fn contains(&self, p: Vec2, slack: f64) -> bool {
        p[0] >= self.x0 - slack
            && p[0] <= self.x1 + slack
            && p[1] >= self.y0 - slack
            && p[1] <= self.y1 + slack
    }

    /// Distance from an interior point to the rectangle boundary; 0 outside.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        let d = (p[0] - self.x0)
            .min(self.x1 - p[0])
            .min(p[1] - self.y0)
            .min(self.y1 - p[1]);
        d.max(0.0)
    }
}

/// Uniform lattice `x_i = h i` covering the domain plus an exterior layer.
///
/// Nodes are stored row-major (x fastest). Exterior ("ghost") nodes carry the
/// zero extension of the displacement and never move.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub h: f64,
    pub domain: DomainSpec,
    /// Lattice index of the first column and row.
    pub origin: [i64; 2],
    pub nx: usize,
    pub ny: usize,
    pub coords: Vec<Vec2>,
    pub interior: Vec<bool>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn interior_count(&self) -> usize {
        self.interior.iter().filter(|&&b| b).count()
    }

    /// Cell volume `h^2` (unit thickness).
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h
    }

    /// Lattice index `(i, j)` of node `n`.
    pub fn lattice_index(&self, n: usize) -> [i64; 2] {
        [
            self.origin[0] + (n % self.nx) as i64,
            self.origin[1] + (n / self.nx) as i64,
        ]
    }

    /// Node at lattice index `(i, j)` if it is part of the grid.
    pub fn node_at(&self, idx: [i64; 2]) -> Option<usize> {
        let cx = idx[0] - self.origin[0];
        let cy = idx[1] - self.origin[1];
        if cx < 0 || cy < 0 || cx as usize >= self.nx || cy as usize >= self.ny {
            return None;
        }
        Some(cy as usize * self.nx + cx as usize)
    }

    /// Cell `U_i` of node `n` clipped to the domain, as `(lo, hi)`. Empty
    /// (lo == hi on some axis) for exterior nodes.
    pub fn clipped_cell(&self, n: usize) -> (Vec2, Vec2) {
        let x = self.coords[n];
        let hh = 0.5 * self.h;
        let d = &self.domain;
        let lo = [(x[0] - hh).clamp(d.x0, d.x1), (x[1] - hh).clamp(d.y0, d.y1)];
        let hi = [(x[0] + hh).clamp(d.x0, d.x1), (x[1] + hh).clamp(d.y0, d.y1)];
        (lo, hi)
    }
}

/// Lattice points of `spec` grown by `exterior` on every side, spacing `h`.
pub fn build_grid(spec: &DomainSpec, h: f64, exterior: f64) -> Result<Grid> {
    spec.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!(
            "mesh size must be positive (got {h})"
        )));
    }
    if !(exterior >= 0.0 && exterior.is_finite()) {
        return Err(Error::Config(format!(
            "exterior layer must be >= 0 (got {exterior})"
        )));
    }
    let lo_idx = |v: f64| ((v / h) - LATTICE_TOL).ceil() as i64;
    let hi_idx = |v: f64| ((v / h) + LATTICE_TOL).floor() as i64;
    let (i0, i1) = (lo_idx(spec.x0 - exterior), hi_idx(spec.x1 + exterior));
    let (j0, j1) = (lo_idx(spec.y0 - exterior), hi_idx(spec.y1 + exterior));
    if i1 < i0 || j1 < j0 {
        return Err(Error::Config("grid has no nodes".into()));
    }
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    let slack = LATTICE_TOL * h;
    let mut coords = Vec::with_capacity(nx * ny);
    let mut interior = Vec::with_capacity(nx * ny);
    for j in j0..=j1 {
        for i in i0..=i1 {
            let p = [h * i as f64, h * j as f64];
            interior.push(spec.contains(p, slack));
            coords.push(p);
        }
    }
    if !interior.iter().any(|&b| b) {
        return Err(Error::Config("grid has no nodes inside the domain".into()));
    }
    if let Some(last) = coords.last() {
        log::debug!("grid h={h} nodes={} last={last:?}", coords.len());
    }
    Ok(Grid {
        h,
        domain: spec.clone(),
        origin: [i0, j0],
        nx,
        ny,
        coords,
        interior,
    })
}

/// How the boundary weight decays towards the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryMode {
    /// `omega = 1` on the domain, 0 outside.
    Indicator,
    /// `omega = min(1, dist(x, boundary) / width)`.
    LinearTaper { width: f64 },
}

/// Per-node boundary weight `omega(x_i)` in `[0, 1]`.
pub fn boundary_weight(grid: &Grid, mode: BoundaryMode) -> Vec<f64> {
    grid.coords
        .iter()
        .zip(grid.interior.iter())
        .map(|(&p, &inside)| {
            if !inside {
                return 0.0;
            }
            match mode {
                BoundaryMode::Indicator => 1.0,
                BoundaryMode::LinearTaper { width } => {
                    (grid.domain.boundary_distance(p) / width).clamp(0.0, 1.0)
                }
            }
        })
        .collect()
}

/// Average of `field` over the rectangle `[lo, hi]` (3x3 Gauss).
pub fn cell_average<F: Fn(Vec2) -> f64>(field: &F, lo: Vec2, hi: Vec2) -> f64 {
    quadrature::rect_average_gauss3(field, lo, hi)
}

/// Cellwise-constant L2 projection of `field`: the average over each clipped
/// cell. Exterior nodes get 0.
pub fn project_to_cells<F: Fn(Vec2) -> f64>(field: &F, grid: &Grid) -> Vec<f64> {
    (0..grid.len())
        .map(|n| {
            if !grid.interior[n] {
                return 0.0;
            }
            let (lo, hi) = grid.clipped_cell(n);
            cell_average(field, lo, hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_grid_has_four_nodes() {
        let h = 0.25;
        let g = build_grid(&DomainSpec::rectangle(0.0, h, 0.0, h), h, 0.0).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.interior_count(), 4);
        assert_eq!(g.cell_volume(), h * h);
    }

    #[test]
    fn node_counts_with_exterior_layer() {
        let d = DomainSpec::rectangle(0.0, 0.1, 0.0, 0.1);
        let g = build_grid(&d, 4e-3, 8e-3).unwrap();
        assert_eq!(g.len(), 900);
        assert_eq!(g.interior_count(), 26 * 26);
        let g = build_grid(&d, 1e-3, 8e-3).unwrap();
        assert_eq!(g.len(), 117 * 117);
    }

    #[test]
    fn lattice_roundtrip() {
        let g = build_grid(&DomainSpec::rectangle(0.0, 1.0, 0.0, 0.5), 0.1, 0.2).unwrap();
        for n in 0..g.len() {
            assert_eq!(g.node_at(g.lattice_index(n)), Some(n));
        }
        assert_eq!(g.node_at([1000, 0]), None);
    }

    #[test]
    fn empty_and_invalid_domains() {
        assert!(build_grid(&DomainSpec::rectangle(0.0, 0.0, 0.0, 1.0), 0.1, 0.0).is_err());
        assert!(build_grid(&DomainSpec::rectangle(0.1, 0.15, 0.1, 0.15), 1.0, 0.0).is_err());
        let out = DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0)
            .with_crack(Segment::new([0.5, 0.0], [0.5, 2.0]));
        assert!(out.validate().is_err());
    }

    #[test]
    fn taper_weights() {
        let eps = 0.2;
        let g = build_grid(&DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 0.1, 0.0).unwrap();
        let w = boundary_weight(&g, BoundaryMode::LinearTaper { width: eps });
        let center = g.node_at([5, 5]).unwrap();
        assert_eq!(w[center], 1.0);
        let edge = g.node_at([0, 5]).unwrap();
        assert_eq!(w[edge], 0.0);
        let half = g.node_at([1, 5]).unwrap(); // distance 0.1 = eps / 2
        assert!((w[half] - 0.5).abs() < 1e-12);
        let ind = boundary_weight(&g, BoundaryMode::Indicator);
        assert!(ind.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn exterior_weight_is_zero() {
        let g = build_grid(&DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), 0.1, 0.2).unwrap();
        let w = boundary_weight(&g, BoundaryMode::Indicator);
        for n in 0..g.len() {
            assert_eq!(w[n] == 1.0, g.interior[n]);
        }
    }

    #[test]
    fn projection_examples() {
        let h = 0.125;
        assert!((cell_average(&|p: Vec2| p[0], [0.0, 0.0], [h, h]) - h / 2.0).abs() < 1e-15);
        let g = build_grid(&DomainSpec::rectangle(0.0, 1.0, 0.0, 1.0), h, 0.0).unwrap();
        let c = project_to_cells(&|_| 3.5, &g);
        assert!(c.iter().all(|&v| (v - 3.5).abs() < 1e-14));
    }

    #[test]
    fn crack_cuts_crossing_bonds_only() {
        let c = Segment::new([0.5, 0.0], [0.5, 0.4]);
        assert!(c.cuts([0.4, 0.2], [0.6, 0.2]));
        assert!(c.cuts([0.6, 0.2], [0.4, 0.2]));
        assert!(!c.cuts([0.4, 0.5], [0.6, 0.5]));
        assert!(!c.cuts([0.1, 0.2], [0.3, 0.2]));
        // through the tip counts as cut
        assert!(c.cuts([0.4, 0.4], [0.6, 0.4]));
        // nodes on the crack line belong to the left face
        assert!(!c.cuts([0.5, 0.2], [0.4, 0.2]));
        assert!(c.cuts([0.5, 0.2], [0.6, 0.2]));
        assert!(!c.cuts([0.5, 0.1], [0.5, 0.3]));
    }
}
