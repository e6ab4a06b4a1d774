//! Safe Bayesian optimization over a discretized parameter domain.
//!
//! Three acquisition loops share the same machinery: safeOpt picks the most
//! uncertain point among potential minimizers and expanders, stageOpt switches
//! to the minimum lower confidence bound after `N_s` iterations, and
//! shrinkAlgo adds an objective threshold to the safe set after `N_s`.

mod acquisition;
mod campaign;
mod config;
mod context;
pub mod export;
mod grid;
mod sets;

pub use acquisition::{next_point_safeopt, next_point_shrink, next_point_stageopt};
pub use campaign::{
    best_feasible, run_campaign, Campaign, CampaignAbort, CampaignOutcome, CampaignSetup,
    CampaignState, Evaluation, Measurement, Plant, PlantError, PriorMean, PriorPolicy, StepReport,
};
pub use config::{AlgoConfig, Algorithm};
pub use context::{transfer_context, transfer_report, TransferEntry, TransferReport};
pub use grid::{AxisSpec, ParameterGrid};
pub use sets::{
    compute_expander_set, compute_minimizer_set, compute_safe_set, confidence_bounds,
    expander_counts, Bounds,
};

use thiserror::Error;

use crate::gp::GpError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CampaignError {
    #[error("invalid campaign input: {0}")]
    Input(String),
    #[error("no safe set at iteration {iteration}: {hint}")]
    NoSafeSet { iteration: usize, hint: &'static str },
    #[error("no minimizer or expander candidates at iteration {iteration}")]
    NoCandidates { iteration: usize },
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Plant(#[from] PlantError),
}
