//! Scenario description, construction and output.

pub mod config;
pub mod output;
pub mod presets;
pub mod simulation;

use std::path::{Path, PathBuf};

use crate::diagnostics::{self, DiagnosticRecord};
use crate::error::Result;

pub use config::{parse_config, parse_config_str, ScenarioConfig};
pub use simulation::Simulation;

/// What a file-producing run wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub records: Vec<DiagnosticRecord>,
    pub csv: Option<PathBuf>,
    pub snapshots: Vec<PathBuf>,
}

/// Runs `sim`, collecting diagnostics every `diag_stride` steps and writing
/// the CSV and VTK snapshots requested by its output plan into `dir`.
pub fn run_to_dir(sim: &Simulation, dir: Option<&Path>) -> Result<RunSummary> {
    let plan = &sim.config.output;
    if let Some(d) = dir {
        output::ensure_writable_dir(d)?;
    }
    let stride = plan.diag_stride.max(1);
    let last = sim.plan.steps;
    let tip = sim.crack_tip().copied();
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    sim.run(|k, s| {
        if k % stride == 0 || k == last {
            records.push(diagnostics::record(&sim.disc, s, tip.as_ref())?);
        }
        if let Some(d) = dir {
            if plan.vtk && plan.snapshot_stride > 0 && (k % plan.snapshot_stride == 0 || k == last)
            {
                let damage = diagnostics::damage_field(&sim.disc, &s.u);
                let theta = sim.disc.hydrostatic_strain_field(&s.u);
                let snap = output::Snapshot {
                    grid: &sim.disc.grid,
                    t: s.t,
                    u: &s.u,
                    v: &s.v,
                    damage: &damage,
                    theta: &theta,
                };
                snapshots.push(output::write_vtk_file(d, k, &snap)?);
            }
        }
        Ok(())
    })?;
    let csv = match dir {
        Some(d) if plan.csv => {
            let p = d.join("diagnostics.csv");
            output::write_csv_file(&p, &records)?;
            Some(p)
        }
        _ => None,
    };
    Ok(RunSummary {
        steps: last,
        records,
        csv,
        snapshots,
    })
}
