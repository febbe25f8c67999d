//! Cellwise-constant projection error against the Hölder bound
//! `||u~ - u||_{L2} <= c^gamma sqrt|D| ||u||_{C^{0,gamma}} h^gamma`, `c = sqrt 2`,
//! on `D = [0, 1]^2` with vertex-centred cells clipped to `D`.
//!
//! The test fields depend on `x` only, so every integral factors into an
//! exact one-dimensional computation.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A function of `x` on `[0, 1]` with closed-form cell integrals.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileField {
    Constant(f64),
    /// `u(x) = x`.
    Linear,
    /// `u(x) = sum_k a_k cos(w_k x)`.
    Cosines(Vec<(f64, f64)>),
}

impl ProfileField {
    /// Lacunary cosine series `sum_{k<terms} 2^(-k gamma) cos(2^k pi x)`,
    /// Hölder continuous with exponent `gamma` and no better.
    pub fn weierstrass(gamma: f64, terms: usize) -> Self {
        Self::Cosines(
            (0..terms)
                .map(|k| ((-(k as f64) * gamma).exp2(), (k as f64).exp2() * PI))
                .collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Linear => x,
            Self::Cosines(t) => t.iter().map(|&(a, w)| a * (w * x).cos()).sum(),
        }
    }

    /// `int_a^b u`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Self::Constant(c) => c * (b - a),
            Self::Linear => 0.5 * (b * b - a * a),
            Self::Cosines(t) => t
                .iter()
                .map(|&(c, w)| c * ((w * b).sin() - (w * a).sin()) / w)
                .sum(),
        }
    }

    /// `int_a^b (u - mean)^2` where `mean` is the average over `[a, b]`.
    pub fn variance_integral(&self, a: f64, b: f64) -> f64 {
        let len = b - a;
        match self {
            Self::Constant(_) => 0.0,
            Self::Linear => len * len * len / 12.0,
            Self::Cosines(t) => {
                // int cos(p x) cos(q x) = [sin((p-q)x)/(2(p-q)) + sin((p+q)x)/(2(p+q))]
                let prim = |w: f64, x: f64| if w == 0.0 { x } else { (w * x).sin() / w };
                let mut sq = 0.0;
                for &(ak, wk) in t {
                    for &(al, wl) in t {
                        let d = prim(wk - wl, b) - prim(wk - wl, a);
                        let s = prim(wk + wl, b) - prim(wk + wl, a);
                        sq += ak * al * 0.5 * (d + s);
                    }
                }
                let m = self.integral(a, b);
                (sq - m * m / len).max(0.0)
            }
        }
    }

    /// `sup |u|` on `[0, 1]`.
    pub fn sup_norm(&self) -> f64 {
        match self {
            Self::Constant(c) => c.abs(),
            Self::Linear => 1.0,
            // every term peaks at x = 0
            Self::Cosines(t) => t.iter().map(|&(a, _)| a.abs()).sum(),
        }
    }

    /// Upper bound of the Hölder seminorm with exponent `gamma`.
    pub fn holder_seminorm_bound(&self, gamma: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Linear => 1.0,
            Self::Cosines(t) => {
                // |cos(w x) - cos(w y)| <= min(2, w d); maximize the sum over d
                let total = |d: f64| -> f64 {
                    t.iter()
                        .map(|&(a, w)| a.abs() * (w * d).min(2.0))
                        .sum::<f64>()
                        / d.powf(gamma)
                };
                let mut best: f64 = 0.0;
                let samples = 20_000;
                for k in 0..=samples {
                    let d = (-(40.0 * k as f64 / samples as f64)).exp2();
                    best = best.max(total(d));
                }
                // the bound is smooth between samples; pad for the grid spacing
                best * 1.01
            }
        }
    }
}

/// Measured projection error and the Hölder bound at one mesh size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionSample {
    pub h: f64,
    pub error: f64,
    pub bound: f64,
}

/// Projection of `field(x)` (constant in `y`) on the grid `h Z^2 ∩ [0,1]^2`.
pub fn projection_error(field: &ProfileField, gamma: f64, h: f64) -> Result<ProjectionSample> {
    let n = (1.0 / h).round();
    if !(h > 0.0) || ((n * h) - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "mesh size {h} does not divide the unit square"
        )));
    }
    let n = n as usize;
    let mut sq = 0.0;
    for i in 0..=n {
        let a = ((i as f64 - 0.5) * h).max(0.0);
        let b = ((i as f64 + 0.5) * h).min(1.0);
        sq += field.variance_integral(a, b);
    }
    // y extent is 1
    let error = sq.sqrt();
    let norm = field.sup_norm() + field.holder_seminorm_bound(gamma);
    let bound = 2f64.sqrt().powf(gamma) * norm * h.powf(gamma);
    Ok(ProjectionSample { h, error, bound })
}

/// Least-squares slope of `log error` against `log h`.
pub fn decay_exponent(samples: &[ProjectionSample]) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.h.ln(), s.error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Outcome of the projection suite for one Hölder exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub gamma: f64,
    pub samples: Vec<ProjectionSample>,
    pub exponent: f64,
}

impl ProjectionReport {
    pub fn bound_holds(&self) -> bool {
        self.samples.iter().all(|s| s.error <= s.bound)
    }
}

/// Runs the suite for `gamma` in {0.5, 1} (any other exponent uses the
/// lacunary series) over the given mesh sizes.
pub fn projection_suite(gamma: f64, hs: &[f64]) -> Result<ProjectionReport> {
    let field = if gamma == 1.0 {
        ProfileField::Linear
    } else {
        ProfileField::weierstrass(gamma, 24)
    };
    let samples = hs
        .iter()
        .map(|&h| projection_error(&field, gamma, h))
        .collect::<Result<Vec<_>>>()?;
    let exponent = decay_exponent(&samples);
    Ok(ProjectionReport {
        gamma,
        samples,
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    #[test]
    fn constant_field_projects_exactly() {
        let s = projection_error(&ProfileField::Constant(3.0), 1.0, 0.125).unwrap();
        assert_eq!(s.error, 0.0);
    }

    #[test]
    fn linear_field_error_is_h_over_sqrt12() {
        let h = 1.0 / 32.0;
        let s = projection_error(&ProfileField::Linear, 1.0, h).unwrap();
        // interior cells give h^2/12 each; the two half cells give (h/2)^3/12
        let expected = ((32.0 - 1.0) * h.powi(3) / 12.0 + 2.0 * (0.5 * h).powi(3) / 12.0).sqrt();
        assert!((s.error - expected).abs() < 1e-15);
        assert!(s.error <= s.bound);
    }

    #[test]
    fn cosine_variance_matches_quadrature() {
        let f = ProfileField::weierstrass(0.5, 6);
        let (a, b) = (0.1, 0.37);
        let mean = f.integral(a, b) / (b - a);
        let num = integrate(|x| (f.eval(x) - mean).powi(2), a, b, 1e-12, 1e-15).unwrap();
        assert!((f.variance_integral(a, b) - num).abs() < 1e-10 * num.max(1e-12));
        let avg_num = integrate(|x| f.eval(x), a, b, 1e-13, 1e-15).unwrap();
        assert!((f.integral(a, b) - avg_num).abs() < 1e-12);
    }

    #[test]
    fn seminorm_bound_dominates_sampled_quotients() {
        let f = ProfileField::weierstrass(0.5, 12);
        let m = f.holder_seminorm_bound(0.5);
        let mut worst: f64 = 0.0;
        for i in 0..400 {
            for j in (i + 1)..400 {
                let (x, y) = (i as f64 / 399.0, j as f64 / 399.0);
                worst = worst.max((f.eval(x) - f.eval(y)).abs() / (y - x).sqrt());
            }
        }
        assert!(worst <= m, "{worst} > {m}");
    }
}
