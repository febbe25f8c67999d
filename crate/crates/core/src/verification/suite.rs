//! Fixed-size property checks shared by the command line and the test suite.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{boundary_weight, build_grid, BoundaryMode, DomainSpec};
use crate::neighbors::build_neighbors;
use crate::operators::Discretization;
use crate::potentials::{MaterialModel, MaterialPreset};

use super::lipschitz::{lipschitz_suite, random_field, LipschitzReport};
use super::oracle::{max_relative_deviation, OracleProblem};
use super::projection::{projection_suite, ProjectionReport};

pub const ORACLE_TOLERANCE: f64 = 1e-12;
pub const PROJECTION_EXPONENT_TOLERANCE: f64 = 0.1;

/// `n x n` material nodes with spacing 1 mm and horizon `4h`, preset
/// `nu0245`, with the given `g` family and boundary weight.
pub fn square_disc(n: usize, convex_concave: bool, mode: BoundaryMode) -> Result<Discretization> {
    let h = 1e-3;
    let eps = 4.0 * h;
    let side = (n - 1) as f64 * h;
    let spec = DomainSpec::rectangle(0.0, side, 0.0, side);
    let g = build_grid(&spec, h, eps)?;
    let t = build_neighbors(&g, eps, &[])?;
    let w = boundary_weight(&g, mode);
    let m = if convex_concave {
        MaterialModel::preset_convex_concave(MaterialPreset::Nu0245, eps)?
    } else {
        MaterialModel::preset(MaterialPreset::Nu0245, eps)?
    };
    Discretization::new(g, t, w, mode, m)
}

/// Worst relative deviation between production assembly and the all-pairs
/// oracle over `fields` random fields on a 16 x 16 grid.
pub fn oracle_check(convex_concave: bool, fields: usize, seed: u64) -> Result<f64> {
    let d = square_disc(16, convex_concave, BoundaryMode::Indicator)?;
    let oracle = OracleProblem {
        grid: &d.grid,
        omega: &d.omega,
        material: &d.material,
        cracks: &[],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = d.material.f.r_bar() * d.material.horizon.sqrt();
    let mut worst: f64 = 0.0;
    for k in 0..fields {
        // sweep from the elastic range well into softening
        let amp = base * 10f64.powf(-1.0 + 3.0 * k as f64 / fields.max(1) as f64);
        let u = random_field(&d, amp, &mut rng);
        let a = d.internal_force(&u)?;
        let b = oracle.force(&u)?;
        worst = worst.max(max_relative_deviation(&a, &b));
    }
    Ok(worst)
}

/// Random-pair Lipschitz ratio on a 24 x 24 grid with the tapered boundary
/// weight.
pub fn lipschitz_check(trials: usize, seed: u64) -> Result<LipschitzReport> {
    let d = square_disc(24, false, BoundaryMode::LinearTaper { width: 4e-3 })?;
    lipschitz_suite(&d, trials, seed)
}

pub const PROJECTION_MESHES: [f64; 3] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];

pub fn projection_check() -> Result<Vec<ProjectionReport>> {
    [0.5, 1.0]
        .iter()
        .map(|&g| projection_suite(g, &PROJECTION_MESHES))
        .collect()
}

/// One line per check; `Err(PropertyViolation)` if any fails.
pub fn run_all(seed: u64) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for cc in [false, true] {
        let dev = oracle_check(cc, 20, seed)?;
        let ok = dev <= ORACLE_TOLERANCE;
        let g = if cc { "convex-concave" } else { "quadratic" };
        lines.push(format!(
            "oracle ({g} g): max relative deviation {dev:.3e} [{}]",
            verdict(ok)
        ));
        if !ok {
            failed.push("oracle");
        }
    }
    let lip = lipschitz_check(50, seed)?;
    lines.push(format!(
        "lipschitz: max ratio {:.4} over {} pairs [{}]",
        lip.max_ratio,
        lip.trials,
        verdict(lip.holds())
    ));
    if !lip.holds() {
        failed.push("lipschitz");
    }
    for r in projection_check()? {
        let ok = r.bound_holds() && (r.exponent - r.gamma).abs() <= PROJECTION_EXPONENT_TOLERANCE;
        lines.push(format!(
            "projection (gamma {}): exponent {:.3}, bound {} [{}]",
            r.gamma,
            r.exponent,
            if r.bound_holds() { "holds" } else { "violated" },
            verdict(ok)
        ));
        if !ok {
            failed.push("projection");
        }
    }
    if failed.is_empty() {
        Ok(lines)
    } else {
        Err(Error::PropertyViolation(format!(
            "{}\nfailed: {}",
            lines.join("\n"),
            failed.join(", ")
        )))
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}
