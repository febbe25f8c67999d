//! Random-pair check of `||L(u) - L(v)|| <= (L3 / eps^2) ||u - v||` in L2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::l2_norm;
use crate::error::Result;
use crate::geometry::Vec2;
use crate::operators::Discretization;

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub trials: usize,
    /// Largest `||L(u) - L(v)|| eps^2 / (L3 ||u - v||)` seen.
    pub max_ratio: f64,
    /// The pair attaining `max_ratio`.
    pub worst: Option<(Vec<Vec2>, Vec<Vec2>)>,
}

impl LipschitzReport {
    pub fn holds(&self) -> bool {
        self.max_ratio <= 1.0
    }
}

/// White-noise field with amplitude `amp` on material nodes.
pub fn random_field(disc: &Discretization, amp: f64, rng: &mut impl Rng) -> Vec<Vec2> {
    disc.grid
        .interior
        .iter()
        .map(|&inside| {
            if inside {
                [
                    amp * rng.gen_range(-1.0..1.0),
                    amp * rng.gen_range(-1.0..1.0),
                ]
            } else {
                [0.0; 2]
            }
        })
        .collect()
}

/// Ratio for one pair; `None` when `u == v`.
pub fn lipschitz_ratio(disc: &Discretization, u: &[Vec2], v: &[Vec2]) -> Result<Option<f64>> {
    let m = &disc.material;
    let du: Vec<Vec2> = u
        .iter()
        .zip(v)
        .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
        .collect();
    let denom = l2_norm(&disc.grid, &du);
    let lu = disc.internal_force(u)?;
    let lv = disc.internal_force(v)?;
    let dl: Vec<Vec2> = lu
        .iter()
        .zip(&lv)
        .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
        .collect();
    let num = l2_norm(&disc.grid, &dl);
    if denom == 0.0 {
        return Ok(if num == 0.0 {
            None
        } else {
            Some(f64::INFINITY)
        });
    }
    Ok(Some(
        num * m.horizon * m.horizon / (m.lipschitz_l3() * denom),
    ))
}

/// Draws `trials` pairs. Amplitudes are log-uniform between `1e-2` and `1e2`
/// times `r_bar sqrt(eps)`, covering both the elastic and softening ranges;
/// half the pairs are small perturbations of each other.
pub fn lipschitz_suite(disc: &Discretization, trials: usize, seed: u64) -> Result<LipschitzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = disc.material.f.r_bar() * disc.material.horizon.sqrt();
    let mut max_ratio: f64 = 0.0;
    let mut worst = None;
    for k in 0..trials {
        let amp = scale * 10f64.powf(rng.gen_range(-2.0..2.0));
        let u = random_field(disc, amp, &mut rng);
        let v = if k % 2 == 0 {
            random_field(disc, amp, &mut rng)
        } else {
            let d = random_field(disc, 1e-3 * amp, &mut rng);
            u.iter()
                .zip(&d)
                .map(|(a, b)| [a[0] + b[0], a[1] + b[1]])
                .collect()
        };
        if let Some(r) = lipschitz_ratio(disc, &u, &v)? {
            if r > max_ratio || worst.is_none() {
                max_ratio = max_ratio.max(r);
                worst = Some((u, v));
            }
        }
    }
    Ok(LipschitzReport {
        trials,
        max_ratio,
        worst,
    })
}
