//! Analytic demo plants, hyperparameter presets and the external-process plant.

mod demo;
mod external;
mod presets;

pub use demo::{demo1_eval, demo2_eval, demo_objective, AnalyticPlant, DemoFunction, CONTEXT_REFERENCE};
pub use external::{format_request, parse_request, parse_response, ExternalPlant, ExternalPlantSpec};
pub use presets::*;
