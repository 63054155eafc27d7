//! Scenario runner and certificate reports for shiftlab.

pub mod report;
pub mod run;
pub mod scenario;
