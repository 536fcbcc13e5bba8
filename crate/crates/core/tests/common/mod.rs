//! Helpers shared by the integration tests and the acceptance report.
#![allow(dead_code)]

pub mod numerics;
pub mod oracle;
pub mod ranking;
