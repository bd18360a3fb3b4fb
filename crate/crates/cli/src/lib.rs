//! Library surface of the polyvox CLI: run configuration, wire formats, and
//! the HTTP service router, reused by the binary and by integration tests.

pub mod config;
pub mod error;
pub mod service;
pub mod wire;
