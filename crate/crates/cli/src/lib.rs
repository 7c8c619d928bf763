//! Library surface of the command-line harness, exposed so integration tests
//! can drive the pipelines directly.

pub mod report;
pub mod runners;
pub mod scenario;
