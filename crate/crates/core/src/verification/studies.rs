//! Mesh and time-step convergence studies and the energy stability run.

use rayon::prelude::*;

use crate::diagnostics::{self, l2_difference, l2_norm, StabilityReport};
use crate::error::{Error, Result};
use crate::geometry::sub;
use crate::operators::FieldState;
use crate::scenario::{ScenarioConfig, Simulation};

/// Errors and observed order at one comparison time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialRow {
    pub t: f64,
    pub e12: f64,
    pub e23: f64,
    /// NaN when either error vanishes (see `degenerate`).
    pub alpha: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialStudy {
    pub hs: [f64; 3],
    pub nodes: [usize; 3],
    pub ratio: f64,
    pub rows: Vec<SpatialRow>,
}

impl SpatialStudy {
    pub fn min_alpha(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.alpha)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `||u_a - u_b|| + ||v_a - v_b||` between states on nested grids.
fn state_distance(a: &Simulation, sa: &FieldState, b: &Simulation, sb: &FieldState) -> Result<f64> {
    Ok(l2_difference(&a.disc.grid, &sa.u, &b.disc.grid, &sb.u)?
        + l2_difference(&a.disc.grid, &sa.v, &b.disc.grid, &sb.v)?)
}

/// Runs the scenario at `h = eps / r_k` for the three study ratios and
/// compares consecutive levels at each requested time. Levels run in
/// parallel.
pub fn spatial_study(cfg: &ScenarioConfig, times: &[f64]) -> Result<SpatialStudy> {
    let ratios = &cfg.study.h_ratios;
    if ratios.len() != 3 {
        return Err(Error::Config(format!(
            "spatial study needs three h ratios, got {}",
            ratios.len()
        )));
    }
    let r = ratios[1] / ratios[0];
    if !(r > 1.0) || ((ratios[2] / ratios[1]) - r).abs() > 1e-12 * r {
        return Err(Error::Config("h ratios must grow geometrically".into()));
    }
    if times.is_empty() {
        return Err(Error::Config(
            "spatial study needs at least one comparison time".into(),
        ));
    }
    let eps = cfg.material.horizon;
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let levels: Vec<(Simulation, Vec<FieldState>)> = ratios
        .par_iter()
        .map(|&k| {
            let sim = Simulation::build(&cfg.with_h(eps / k).with_t_final(t_end))?;
            let states = sim.capture_at(times)?;
            Ok((sim, states))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let e12 = state_distance(&levels[0].0, &levels[0].1[i], &levels[1].0, &levels[1].1[i])?;
        let e23 = state_distance(&levels[1].0, &levels[1].1[i], &levels[2].0, &levels[2].1[i])?;
        let (alpha, degenerate) = match diagnostics::convergence_rate(e12, e23, r) {
            Ok(a) => (a, false),
            Err(_) => (f64::NAN, true),
        };
        rows.push(SpatialRow {
            t,
            e12,
            e23,
            alpha,
            degenerate,
        });
    }
    Ok(SpatialStudy {
        hs: [
            levels[0].0.disc.grid.h,
            levels[1].0.disc.grid.h,
            levels[2].0.disc.grid.h,
        ],
        nodes: [
            levels[0].0.disc.len(),
            levels[1].0.disc.len(),
            levels[2].0.disc.len(),
        ],
        ratio: r,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalRow {
    pub dt: f64,
    pub error: f64,
    /// Order against the previous (coarser) row; NaN on the first row.
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalStudy {
    pub dt_ref: f64,
    pub rows: Vec<TemporalRow>,
    /// Least-squares slope of `log error` against `log dt`.
    pub fitted_order: f64,
}

fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Final-time error of each `dt` against a run at `dt_ref` on the same grid.
pub fn temporal_study(cfg: &ScenarioConfig, dts: &[f64], dt_ref: f64) -> Result<TemporalStudy> {
    if dts.len() < 2 {
        return Err(Error::Config(
            "temporal study needs at least two time steps".into(),
        ));
    }
    let t_end = cfg.t_final;
    for &dt in dts.iter().chain(std::iter::once(&dt_ref)) {
        let k = t_end / dt;
        if (k - k.round()).abs() > 1e-9 * k.max(1.0) {
            return Err(Error::Config(format!(
                "t_final {t_end} is not a multiple of dt {dt}"
            )));
        }
    }
    if dts.iter().any(|&dt| dt <= dt_ref) {
        return Err(Error::Config(
            "reference step must be finer than every study step".into(),
        ));
    }
    let all: Vec<f64> = dts.iter().copied().chain(std::iter::once(dt_ref)).collect();
    let finals: Vec<(Simulation, FieldState)> = all
        .par_iter()
        .map(|&dt| {
            let sim = Simulation::build(&cfg.with_dt(dt))?;
            let s = sim.run(|_, _| Ok(()))?;
            Ok((sim, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let (ref_sim, ref_state) = finals.last().expect("reference run");
    let grid = &ref_sim.disc.grid;
    let mut rows: Vec<TemporalRow> = Vec::with_capacity(dts.len());
    for (k, (_, s)) in finals[..dts.len()].iter().enumerate() {
        let du: Vec<_> =
            s.u.iter()
                .zip(&ref_state.u)
                .map(|(a, b)| sub(*a, *b))
                .collect();
        let dv: Vec<_> =
            s.v.iter()
                .zip(&ref_state.v)
                .map(|(a, b)| sub(*a, *b))
                .collect();
        let error = l2_norm(grid, &du) + l2_norm(grid, &dv);
        let order = match rows.last() {
            Some(prev) => (prev.error / error).ln() / (prev.dt / dts[k]).ln(),
            None => f64::NAN,
        };
        rows.push(TemporalRow {
            dt: dts[k],
            error,
            order,
        });
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.dt.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
    Ok(TemporalStudy {
        dt_ref,
        fitted_order: least_squares_slope(&lx, &ly),
        rows,
    })
}

/// Energy series of a run plus the fitted envelope. A run that produces
/// non-finite values is reported as unstable rather than as an error.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityStudy {
    pub steps_completed: usize,
    pub blew_up: bool,
    pub report: StabilityReport,
}

pub fn stability_study(cfg: &ScenarioConfig, stride: usize) -> Result<StabilityStudy> {
    let sim = Simulation::build(cfg)?;
    let stride = stride.max(1);
    let last = sim.plan.steps;
    let (mut t, mut total, mut aug, mut b) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut done = 0;
    let outcome = sim.run(|k, s| {
        done = k;
        if k % stride == 0 || k == last {
            let theta = sim.disc.hydrostatic_strain_field(&s.u);
            let e = diagnostics::energies(&sim.disc, s, &theta);
            t.push(s.t);
            total.push(e.total);
            aug.push(e.augmented);
            b.push(sim.body_l2(s.t)?);
        }
        Ok(())
    });
    let blew_up = match outcome {
        Ok(_) => false,
        Err(Error::NonFiniteState { .. }) | Err(Error::NonFiniteForce { .. }) => {
            t.push(f64::NAN);
            total.push(f64::INFINITY);
            aug.push(f64::INFINITY);
            b.push(0.0);
            true
        }
        Err(e) => return Err(e),
    };
    let report = StabilityReport::fit(&t, &total, &aug, &b, cfg.material.horizon)?;
    Ok(StabilityStudy {
        steps_completed: done,
        blew_up,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::presets;

    #[test]
    fn slope_of_exact_power_law() {
        let x: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = [3.0f64, 12.0, 48.0].iter().map(|v| v.ln()).collect();
        assert!((least_squares_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn blow_up_is_reported_not_raised() {
        let c = presets::relaxation();
        let s =
            stability_study(&c.with_dt(10.0 * c.dt).with_t_final(1e3 * c.t_final), 100).unwrap();
        assert!(s.blew_up);
        assert!(s.report.unstable);
        assert!(!s.report.finite);
    }

    #[test]
    fn study_inputs_are_checked() {
        let c = presets::manufactured();
        assert!(temporal_study(&c, &[4e-9], 1e-9).is_err());
        assert!(temporal_study(&c, &[4e-9, 2e-9], 4e-9).is_err());
        assert!(temporal_study(&c, &[3e-9, 2e-9], 1e-9).is_err());
        let mut c = presets::crack(8, 2).unwrap();
        c.study.h_ratios = vec![2.0, 4.0, 9.0];
        assert!(spatial_study(&c, &[1e-6]).is_err());
    }
}
