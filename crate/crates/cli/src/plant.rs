//! Builds the plant named by a resolved config.

use safeopt_core::benchmarks::{AnalyticPlant, DemoFunction, ExternalPlant, ExternalPlantSpec, DEMO_CONTEXT_SHIFT};
use safeopt_core::network::{NetworkConfig, NetworkPlant};
use safeopt_core::safe_bo::Plant;

use crate::config::{PlantSelector, ResolvedConfig};
use crate::error::CliError;

pub struct BuiltPlant {
    pub plant: Box<dyn Plant>,
    /// Noise-free closed form, when the plant has one.
    pub truth: Option<DemoFunction>,
}

pub fn network_config(selector: &PlantSelector) -> Result<NetworkConfig, CliError> {
    match selector {
        PlantSelector::TaNetwork { config: Some(path) } => Ok(NetworkConfig::load(path)?),
        _ => Ok(NetworkConfig::shipped()),
    }
}

pub fn build(config: &ResolvedConfig) -> Result<BuiltPlant, CliError> {
    let analytic = |function: DemoFunction| BuiltPlant {
        plant: Box::new(AnalyticPlant::new(function, config.noise.objective_std, config.noise.constraint_std, config.seed)),
        truth: Some(function),
    };
    Ok(match &config.plant {
        PlantSelector::Demo1 => analytic(DemoFunction::Demo1),
        PlantSelector::Demo2 => analytic(DemoFunction::Demo2),
        PlantSelector::DemoContext => analytic(DemoFunction::ContextShift { shift_per_unit: DEMO_CONTEXT_SHIFT }),
        selector @ PlantSelector::TaNetwork { .. } => {
            let mut plant = NetworkPlant::new(network_config(selector)?, config.fixed_delay_ms, config.seed)?;
            if let Some(d) = config.duration {
                plant.duration = d;
            }
            BuiltPlant { plant: Box::new(plant), truth: None }
        }
        PlantSelector::External { command } => {
            let mut spec = ExternalPlantSpec::parse(command);
            if let Some(t) = config.timeout_ms {
                spec.timeout_ms = t;
            }
            BuiltPlant { plant: Box::new(ExternalPlant::spawn(spec)?), truth: None }
        }
    })
}
