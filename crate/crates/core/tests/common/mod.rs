//! Shared fixtures and reference implementations for the integration
//! tests. Each test binary pulls in only what it needs.
#![allow(dead_code)]

pub mod oracle;
pub mod synth;
pub mod verify;
