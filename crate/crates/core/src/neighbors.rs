//! Horizon neighbor lists with per-bond distance, direction, partial-volume
//! correction and crack visibility.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{bond_is_cut, norm, sub, Grid, Segment, Vec2};

/// One entry of a node's neighbor list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub j: u32,
    pub length: f64,
    /// Unit vector from the owning node towards `j`.
    pub dir: Vec2,
    /// Fraction of the neighbor's cell inside the horizon ball.
    pub vcorr: f64,
    /// False when a crack separates the two nodes.
    pub visible: bool,
}

/// Compressed neighbor lists; the neighbors of node `i` are
/// `bonds[offsets[i]..offsets[i + 1]]`, sorted by index.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborTable {
    pub horizon: f64,
    pub h: f64,
    pub offsets: Vec<usize>,
    pub bonds: Vec<Bond>,
}

/// Partial-volume weight for a neighbor at distance `r`: 1 inside `eps - h/2`,
/// linear down to 0 at `eps + h/2`.
#[inline]
pub fn volume_correction(r: f64, eps: f64, h: f64) -> f64 {
    if r <= eps - 0.5 * h {
        1.0
    } else if r <= eps + 0.5 * h {
        (eps + 0.5 * h - r) / h
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn make_bond(
    xi: Vec2,
    xj: Vec2,
    j: usize,
    eps: f64,
    h: f64,
    cracks: &[Segment],
) -> Bond {
    let d = sub(xj, xi);
    let length = norm(d);
    Bond {
        j: j as u32,
        length,
        dir: [d[0] / length, d[1] / length],
        vcorr: volume_correction(length, eps, h),
        visible: !bond_is_cut(cracks, xi, xj),
    }
}

impl NeighborTable {
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn of(&self, i: usize) -> &[Bond] {
        &self.bonds[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn find(&self, i: usize, j: usize) -> Option<&Bond> {
        let list = self.of(i);
        list.binary_search_by_key(&(j as u32), |b| b.j)
            .ok()
            .map(|k| &list[k])
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    /// Check the pairwise symmetry invariants.
    pub fn check_symmetry(&self) -> Result<()> {
        for i in 0..self.len() {
            for b in self.of(i) {
                let back = self.find(b.j as usize, i).ok_or_else(|| {
                    Error::PropertyViolation(format!("bond {i}->{} has no reverse", b.j))
                })?;
                let same = back.length == b.length
                    && back.vcorr == b.vcorr
                    && back.visible == b.visible
                    && back.dir[0] == -b.dir[0]
                    && back.dir[1] == -b.dir[1];
                if !same {
                    return Err(Error::PropertyViolation(format!(
                        "bond {i}<->{} is asymmetric",
                        b.j
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Neighbor search radius `eps + h/2`.
pub fn search_radius(eps: f64, h: f64) -> f64 {
    eps + 0.5 * h
}

/// Build neighbor lists with a uniform bin grid (bin width = search radius).
pub fn build_neighbors(grid: &Grid, eps: f64, cracks: &[Segment]) -> Result<NeighborTable> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!(
            "horizon must be positive (got {eps})"
        )));
    }
    let h = grid.h;
    let radius = search_radius(eps, h);
    let n = grid.len();
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for p in &grid.coords {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let bins_x = (((hi[0] - lo[0]) / radius).floor() as usize) + 1;
    let bins_y = (((hi[1] - lo[1]) / radius).floor() as usize) + 1;
    let bin_of = |p: Vec2| -> (usize, usize) {
        let bx = (((p[0] - lo[0]) / radius).floor() as usize).min(bins_x - 1);
        let by = (((p[1] - lo[1]) / radius).floor() as usize).min(bins_y - 1);
        (bx, by)
    };
    // counting sort of nodes into bins; nodes keep ascending order within a bin
    let mut bin_start = vec![0usize; bins_x * bins_y + 1];
    for &p in &grid.coords {
        let (bx, by) = bin_of(p);
        bin_start[by * bins_x + bx + 1] += 1;
    }
    for k in 0..bins_x * bins_y {
        bin_start[k + 1] += bin_start[k];
    }
    let mut fill = bin_start.clone();
    let mut members = vec![0usize; n];
    for (i, &p) in grid.coords.iter().enumerate() {
        let (bx, by) = bin_of(p);
        members[fill[by * bins_x + bx]] = i;
        fill[by * bins_x + bx] += 1;
    }

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut bonds = Vec::new();
    let mut scratch: Vec<usize> = Vec::new();
    for (i, &xi) in grid.coords.iter().enumerate() {
        let (bx, by) = bin_of(xi);
        scratch.clear();
        for ny in by.saturating_sub(1)..=(by + 1).min(bins_y - 1) {
            for nx in bx.saturating_sub(1)..=(bx + 1).min(bins_x - 1) {
                let b = ny * bins_x + nx;
                for &j in &members[bin_start[b]..bin_start[b + 1]] {
                    if j != i && norm(sub(grid.coords[j], xi)) <= radius {
                        scratch.push(j);
                    }
                }
            }
        }
        scratch.sort_unstable();
        bonds.extend(
            scratch
                .iter()
                .map(|&j| make_bond(xi, grid.coords[j], j, eps, h, cracks)),
        );
        offsets.push(bonds.len());
    }
    Ok(NeighborTable {
        horizon: eps,
        h,
        offsets,
        bonds,
    })
}

/// All-pairs neighbor construction, used as the reference for the binned search.
pub fn build_neighbors_brute_force(
    grid: &Grid,
    eps: f64,
    cracks: &[Segment],
) -> Result<NeighborTable> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!(
            "horizon must be positive (got {eps})"
        )));
    }
    let radius = search_radius(eps, grid.h);
    let mut offsets = vec![0];
    let mut bonds = Vec::new();
    for (i, &xi) in grid.coords.iter().enumerate() {
        for (j, &xj) in grid.coords.iter().enumerate() {
            if j != i && norm(sub(xj, xi)) <= radius {
                bonds.push(make_bond(xi, xj, j, eps, grid.h, cracks));
            }
        }
        offsets.push(bonds.len());
    }
    Ok(NeighborTable {
        horizon: eps,
        h: grid.h,
        offsets,
        bonds,
    })
}

const CACHE_MAGIC: &[u8; 8] = b"NLFNBR01";

/// Cache key over everything the table depends on.
pub fn cache_key(grid: &Grid, eps: f64) -> u64 {
    // FNV-1a over the bit patterns
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |v: u64| {
        for byte in v.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    let d = &grid.domain;
    for v in [d.x0, d.x1, d.y0, d.y1, grid.h, eps] {
        feed(v.to_bits());
    }
    feed(grid.origin[0] as u64);
    feed(grid.origin[1] as u64);
    feed(grid.nx as u64);
    feed(grid.ny as u64);
    for c in &d.cracks {
        for v in [c.a[0], c.a[1], c.b[0], c.b[1]] {
            feed(v.to_bits());
        }
    }
    hash
}

impl NeighborTable {
    /// Serialize to a little-endian binary cache file tagged with `key`.
    pub fn write_cache(&self, path: &Path, key: u64) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let mut out = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
        out(CACHE_MAGIC)?;
        out(&key.to_le_bytes())?;
        out(&self.horizon.to_le_bytes())?;
        out(&self.h.to_le_bytes())?;
        out(&(self.offsets.len() as u64).to_le_bytes())?;
        for &o in &self.offsets {
            out(&(o as u64).to_le_bytes())?;
        }
        for b in &self.bonds {
            out(&b.j.to_le_bytes())?;
            out(&b.length.to_le_bytes())?;
            out(&b.dir[0].to_le_bytes())?;
            out(&b.dir[1].to_le_bytes())?;
            out(&b.vcorr.to_le_bytes())?;
            out(&[b.visible as u8])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Load a cache file; `Ok(None)` when the key does not match.
    pub fn read_cache(path: &Path, key: u64) -> Result<Option<Self>> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let corrupt = || Error::Config(format!("corrupt neighbor cache {}", path.display()));
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let s = bytes.get(pos..pos + n).ok_or_else(corrupt)?;
            pos += n;
            Ok(s)
        };
        if take(8)? != CACHE_MAGIC {
            return Err(corrupt());
        }
        let u64_of = |s: &[u8]| u64::from_le_bytes(s.try_into().unwrap());
        let f64_of = |s: &[u8]| f64::from_le_bytes(s.try_into().unwrap());
        if u64_of(take(8)?) != key {
            return Ok(None);
        }
        let horizon = f64_of(take(8)?);
        let h = f64_of(take(8)?);
        let n_off = u64_of(take(8)?) as usize;
        if n_off == 0 || n_off > bytes.len() / 8 {
            return Err(corrupt());
        }
        let mut offsets = Vec::with_capacity(n_off);
        for _ in 0..n_off {
            offsets.push(u64_of(take(8)?) as usize);
        }
        let n_bonds = *offsets.last().unwrap();
        if offsets.windows(2).any(|w| w[1] < w[0]) || n_bonds > bytes.len() {
            return Err(corrupt());
        }
        let mut bonds = Vec::with_capacity(n_bonds);
        for _ in 0..n_bonds {
            let j = u32::from_le_bytes(take(4)?.try_into().unwrap());
            let length = f64_of(take(8)?);
            let dir = [f64_of(take(8)?), f64_of(take(8)?)];
            let vcorr = f64_of(take(8)?);
            let visible = take(1)?[0] != 0;
            bonds.push(Bond {
                j,
                length,
                dir,
                vcorr,
                visible,
            });
        }
        Ok(Some(Self {
            horizon,
            h,
            offsets,
            bonds,
        }))
    }
}
