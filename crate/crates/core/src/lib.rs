//! State-based peridynamic fracture simulation on uniform grids.
//!
//! The crate is layered bottom-up: [`potentials`] defines the material
//! model, [`geometry`] and [`neighbors`] build the grid and bond lists,
//! [`operators`] evaluates the nonlocal forces, [`integrator`] advances the
//! state, [`diagnostics`] measures it, and [`scenario`] wires everything to
//! configuration files and output writers. [`verification`] holds the
//! independent oracles and convergence studies.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod neighbors;
pub mod operators;
pub mod potentials;
pub mod quadrature;
pub mod scenario;
pub mod verification;

pub use error::{Error, Result};
pub use geometry::{BoundaryMode, DomainSpec, Grid, Segment, Vec2};
pub use neighbors::NeighborTable;
pub use operators::{BodyForce, Discretization, FieldState, ForceField};
pub use potentials::{
    DilatationalPotential, InfluenceFunction, MaterialModel, MaterialPreset, TensilePotential,
};
