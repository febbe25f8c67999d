//! Built-in scenarios.
//!
//! Placement assumptions (read off figures, not stated numerically):
//! - notched plate: the crack sits on `x = 0.05`, the bottom collar splits
//!   there, and nodes on the split line move with the left half;
//! - three-point bending: supports are collars `2 eps` wide, `eps` tall,
//!   centred 0.02 m from each bottom corner, and the load line spans the
//!   top edge between the two double-crack abscissae.

use crate::diagnostics::CrackTip;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryMode, DomainSpec, Segment};
use crate::integrator::{Collar, CollarKind};
use crate::potentials::{InfluenceFunction, MaterialPreset};

use super::config::{
    GKind, InitialSpec, LoadSpec, MaterialConfig, MaterialSource, MeshSize, OutputPlan,
    ScenarioConfig, StudyPlan,
};

fn preset_material(p: MaterialPreset, horizon: f64) -> MaterialConfig {
    MaterialConfig {
        source: MaterialSource::Preset(p),
        g_kind: GKind::Quadratic,
        horizon,
        influence: InfluenceFunction::LinearDecay,
        boundary: BoundaryMode::Indicator,
    }
}

fn collar(
    lo: [f64; 2],
    hi: [f64; 2],
    components: [bool; 2],
    kind: CollarKind,
    value: f64,
) -> Collar {
    Collar::new(lo, hi, components, kind, value).expect("preset collar is well formed")
}

pub const CRACK_HORIZONS_MM: [u32; 4] = [8, 4, 2, 1];
pub const CRACK_RATIOS: [u32; 3] = [2, 4, 8];

/// Notched square pulled apart at the bottom: `eps` in mm, `h = eps / ratio`.
pub fn crack(eps_mm: u32, ratio: u32) -> Result<ScenarioConfig> {
    if !CRACK_HORIZONS_MM.contains(&eps_mm) || !CRACK_RATIOS.contains(&ratio) {
        return Err(Error::Config(format!(
            "no crack preset eps{eps_mm}_h{ratio} (eps in {CRACK_HORIZONS_MM:?} mm, ratio in {CRACK_RATIOS:?})"
        )));
    }
    let eps = eps_mm as f64 * 1e-3;
    let side = 0.1;
    let mid = 0.05;
    let l0 = 0.02;
    let domain =
        DomainSpec::rectangle(0.0, side, 0.0, side).with_crack(Segment::new([mid, 0.0], [mid, l0]));
    let collars = vec![
        collar(
            [0.0, side - eps],
            [side, side],
            [true, false],
            CollarKind::FixedDisplacement,
            0.0,
        ),
        collar(
            [0.0, 0.0],
            [mid, eps],
            [true, false],
            CollarKind::PrescribedVelocity,
            -1.0,
        ),
        collar(
            [mid + 1e-9, 0.0],
            [side, eps],
            [true, false],
            CollarKind::PrescribedVelocity,
            1.0,
        ),
    ];
    Ok(ScenarioConfig {
        name: format!("crack_eps{eps_mm}_h{ratio}"),
        material: preset_material(MaterialPreset::Nu0245, eps),
        domain,
        mesh: MeshSize::Ratio(ratio as f64),
        exterior: None,
        dt: 4e-9,
        t_final: 3.4e-5,
        collars,
        load: LoadSpec::None,
        initial: InitialSpec::Zero,
        output: OutputPlan {
            diag_stride: 25,
            crack: Some(CrackTip::upward([mid, l0], l0)),
            ..OutputPlan::default()
        },
        study: StudyPlan {
            times: vec![5e-6, 1e-5],
            ..StudyPlan::default()
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BendingCracks {
    Single,
    Double,
}

/// Three-point bending of a notched beam under a ramped line load.
pub fn bending(cracks: BendingCracks) -> ScenarioConfig {
    let eps = 0.010;
    let (lx, ly) = (0.25, 0.05);
    let mid = 0.125;
    let l0 = 0.015;
    let mut domain = DomainSpec::rectangle(0.0, lx, 0.0, ly);
    let xs: Vec<f64> = match cracks {
        BendingCracks::Single => vec![mid],
        BendingCracks::Double => vec![mid - 0.02, mid + 0.02],
    };
    for &x in &xs {
        domain = domain.with_crack(Segment::new([x, 0.0], [x, l0]));
    }
    let support = |xc: f64| {
        collar(
            [xc - eps, 0.0],
            [xc + eps, eps],
            [false, true],
            CollarKind::FixedDisplacement,
            0.0,
        )
    };
    let name = match cracks {
        BendingCracks::Single => "bending_single",
        BendingCracks::Double => "bending_double",
    };
    ScenarioConfig {
        name: name.into(),
        material: preset_material(MaterialPreset::Nu022, eps),
        domain,
        mesh: MeshSize::Ratio(4.0),
        exterior: None,
        dt: 1.4e-9,
        t_final: 3.5e-4,
        collars: vec![support(0.02), support(lx - 0.02)],
        load: LoadSpec::RampLine {
            f_max: -1.0e13,
            a: [mid - 0.02, ly],
            b: [mid + 0.02, ly],
            direction: [0.0, 1.0],
            thickness: None,
        },
        initial: InitialSpec::Zero,
        output: OutputPlan {
            diag_stride: 500,
            crack: Some(CrackTip {
                window: Some(eps),
                ..CrackTip::upward([xs[0], l0], l0)
            }),
            ..OutputPlan::default()
        },
        study: StudyPlan::default(),
    }
}

/// Free relaxation of a smooth displacement bump; no loads, no collars.
pub fn relaxation() -> ScenarioConfig {
    let eps = 5e-4;
    let side = 0.02;
    ScenarioConfig {
        name: "relaxation".into(),
        material: preset_material(MaterialPreset::Nu0245, eps),
        domain: DomainSpec::rectangle(0.0, side, 0.0, side),
        mesh: MeshSize::Ratio(2.0),
        exterior: None,
        dt: 4e-9,
        t_final: 4e-5,
        collars: Vec::new(),
        load: LoadSpec::None,
        initial: InitialSpec::Bump {
            amplitude: 1e-6,
            center: [0.5 * side, 0.5 * side],
            sigma: 4e-3,
            direction: [1.0, 0.0],
        },
        output: OutputPlan {
            diag_stride: 100,
            ..OutputPlan::default()
        },
        study: StudyPlan::default(),
    }
}

/// Smooth oscillation driven by its discrete manufactured body force.
pub fn manufactured() -> ScenarioConfig {
    let eps = 8e-3;
    let side = 0.032;
    ScenarioConfig {
        name: "manufactured".into(),
        material: preset_material(MaterialPreset::Nu0245, eps),
        domain: DomainSpec::rectangle(0.0, side, 0.0, side),
        mesh: MeshSize::Ratio(4.0),
        exterior: None,
        dt: 1e-9,
        t_final: 2e-6,
        collars: Vec::new(),
        load: LoadSpec::Manufactured {
            amplitude: 1e-6,
            frequency: 2.0 * std::f64::consts::PI / 2e-6,
            direction: [0.6, 0.8],
            region: None,
        },
        initial: InitialSpec::Manufactured,
        output: OutputPlan {
            diag_stride: 100,
            ..OutputPlan::default()
        },
        study: StudyPlan {
            dt_list: vec![4e-9, 2e-9, 1e-9],
            dt_ref: Some(1.25e-10),
            ..StudyPlan::default()
        },
    }
}

/// Every built-in scenario by name.
pub fn catalog() -> Vec<(String, ScenarioConfig)> {
    let mut out = Vec::new();
    for eps in CRACK_HORIZONS_MM {
        for r in CRACK_RATIOS {
            let c = crack(eps, r).expect("listed preset");
            out.push((c.name.clone(), c));
        }
    }
    for c in [
        bending(BendingCracks::Single),
        bending(BendingCracks::Double),
        relaxation(),
        manufactured(),
    ] {
        out.push((c.name.clone(), c));
    }
    out
}

pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    catalog()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::config::parse_config_str;

    #[test]
    fn every_preset_validates_and_roundtrips() {
        for (name, c) in catalog() {
            c.validate().unwrap();
            let back = parse_config_str(&c.to_ini(), &name).unwrap();
            assert_eq!(back, c, "{name}");
        }
    }

    #[test]
    fn crack_desk_preset_matches_the_stated_plan() {
        let c = crack(8, 2).unwrap();
        assert_eq!(c.material.horizon, 8e-3);
        assert_eq!(c.h(), 4e-3);
        assert_eq!(c.dt, 4e-9);
        assert_eq!(c.t_final, 3.4e-5);
        assert!(crack(3, 2).is_err());
    }

    #[test]
    fn builders_are_pure() {
        assert_eq!(crack(4, 4).unwrap(), crack(4, 4).unwrap());
        assert_eq!(
            bending(BendingCracks::Double),
            bending(BendingCracks::Double)
        );
    }
}
