//! Independent oracles, property suites and convergence studies.

pub mod lipschitz;
pub mod manufactured;
pub mod oracle;
pub mod projection;
pub mod studies;
pub mod suite;
