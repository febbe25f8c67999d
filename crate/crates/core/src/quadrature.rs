//! One-dimensional adaptive quadrature and tensor-product Gauss rules.

use crate::error::{Error, Result};

// Kronrod 15-point abscissae and weights, Gauss 7-point weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subdivides by bisection until the summed error estimate satisfies
/// `err <= max(abs_tol, rel_tol * |I|)`. Integrable endpoint singularities
/// are tolerated since no endpoint is ever evaluated.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    const MAX_INTERVALS: usize = 20_000;
    let (v0, e0) = kronrod15(&f, a, b);
    let mut intervals = vec![(a, b, v0, e0)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() {
            return Err(Error::Domain(
                "integrand produced a non-finite value".into(),
            ));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Domain(format!(
                "adaptive quadrature did not converge (estimated error {err:e})"
            )));
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (k, iv)| if iv.3 > acc.1 { (k, iv.3) } else { acc },
            );
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (vl, el) = kronrod15(&f, lo, mid);
        let (vr, er) = kronrod15(&f, mid, hi);
        intervals.push((lo, mid, vl, el));
        intervals.push((mid, hi, vr, er));
    }
}

/// Three-point Gauss-Legendre rule on `[-1, 1]`.
pub const GAUSS3_POINTS: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
pub const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Average of `f` over the rectangle `[lo, hi]` with a 3x3 tensor Gauss rule.
pub fn rect_average_gauss3<F: Fn([f64; 2]) -> f64>(f: &F, lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let c = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let r = [0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1])];
    let mut acc = 0.0;
    for (&px, &wx) in GAUSS3_POINTS.iter().zip(GAUSS3_WEIGHTS.iter()) {
        for (&py, &wy) in GAUSS3_POINTS.iter().zip(GAUSS3_WEIGHTS.iter()) {
            acc += wx * wy * f([c[0] + r[0] * px, c[1] + r[1] * py]);
        }
    }
    acc / 4.0
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}
