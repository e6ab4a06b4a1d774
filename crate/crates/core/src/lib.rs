pub mod benchmarks;
pub mod gp;
pub mod network;
pub mod safe_bo;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
