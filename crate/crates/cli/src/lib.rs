//! Scenario runner and verification suite behind the `phasewig` binary.

pub mod checks;
pub mod corpus;
pub mod runner;
pub mod scenario;
pub mod summary;
