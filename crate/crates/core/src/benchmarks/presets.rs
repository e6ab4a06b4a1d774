//! Named hyperparameter bundles for the demo plants, the thermoacoustic
//! simulator, the experimental rigs and the plasma-actuated combustor.

use serde::Serialize;

use crate::gp::KernelSpec;
use crate::safe_bo::{AxisSpec, CampaignError};

/// Context length scale used by every contextual preset (equivalence ratio).
pub const CONTEXT_LENGTH_SCALE: f64 = 0.1;

/// Objective/constraint kernels, thresholds and grid of one setup.
///
/// Prior means in the kernels are placeholders; campaigns normally replace
/// them with the initializer mean (objective) and the safety threshold
/// (constraint).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperparameterPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub objective: KernelSpec,
    pub constraint: KernelSpec,
    pub safety_threshold: f64,
    pub objective_threshold: Option<f64>,
    pub axis_names: Vec<&'static str>,
    pub axes: Vec<AxisSpec>,
    /// Parameters held fixed while the grid varies, e.g. the delay of 1-D gain scans.
    pub fixed: Vec<(&'static str, f64)>,
}

impl HyperparameterPreset {
    /// Copy with contextual kernels of length scale [`CONTEXT_LENGTH_SCALE`].
    pub fn with_context(mut self) -> Self {
        self.objective = self.objective.with_context(vec![CONTEXT_LENGTH_SCALE]).expect("positive scale");
        self.constraint = self.constraint.with_context(vec![CONTEXT_LENGTH_SCALE]).expect("positive scale");
        self
    }
}

pub const PRESET_NAMES: [&str; 9] = [
    "demo1",
    "demo2",
    "demo-context",
    "sim-1d",
    "sim-2d",
    "sim-2d-table",
    "exp-1d",
    "exp-2d",
    "nrpd-2d",
];

/// Demo kernels. Noise std is 1 % of the prior standard deviation.
pub const DEMO_OBJECTIVE_AMPLITUDE: f64 = 250_000.0;
pub const DEMO_OBJECTIVE_LENGTH: f64 = 0.6;
pub const DEMO_CONSTRAINT_AMPLITUDE: f64 = 2.25;
pub const DEMO_CONSTRAINT_LENGTH: f64 = 1.5;
pub const DEMO_THRESHOLD: f64 = 4.0;

/// Default constraint shift of the context demo plant per unit context.
pub const DEMO_CONTEXT_SHIFT: f64 = 10.0;

fn kernel(amplitude: f64, lengths: &[f64], noise: f64) -> KernelSpec {
    KernelSpec::new(0.0, amplitude, lengths.to_vec(), noise).expect("preset kernels are valid")
}

fn demo_kernels() -> (KernelSpec, KernelSpec) {
    let o = kernel(DEMO_OBJECTIVE_AMPLITUDE, &[DEMO_OBJECTIVE_LENGTH], 0.01 * DEMO_OBJECTIVE_AMPLITUDE.sqrt());
    let c = kernel(DEMO_CONSTRAINT_AMPLITUDE, &[DEMO_CONSTRAINT_LENGTH], 0.01 * DEMO_CONSTRAINT_AMPLITUDE.sqrt());
    (o, c.with_prior_mean(DEMO_THRESHOLD))
}

pub fn load_preset(name: &str) -> Result<HyperparameterPreset, CampaignError> {
    let preset = match name {
        "demo1" | "demo2" | "demo-context" => {
            let (objective, constraint) = demo_kernels();
            let upper = if name == "demo2" { 16.0 } else { 10.0 };
            let count = if name == "demo2" { 320 } else { 200 };
            let p = HyperparameterPreset {
                name: PRESET_NAMES.iter().find(|n| **n == name).expect("listed"),
                description: match name {
                    "demo1" => "analytic demo with one safe region",
                    "demo2" => "analytic demo with two disjoint safe regions",
                    _ => "analytic demo with a context-shifted constraint",
                },
                objective,
                constraint,
                safety_threshold: DEMO_THRESHOLD,
                objective_threshold: None,
                axis_names: vec!["p"],
                axes: vec![AxisSpec::new(0.0, upper, count)],
                fixed: vec![],
            };
            if name == "demo-context" {
                p.with_context()
            } else {
                p
            }
        }
        "sim-1d" => HyperparameterPreset {
            name: "sim-1d",
            description: "simulated combustor, controller gain only",
            objective: kernel(450.0, &[0.2], 15.0),
            constraint: kernel(0.65, &[0.4], 0.05).with_prior_mean(1.0),
            safety_threshold: 1.0,
            objective_threshold: Some(450.0),
            axis_names: vec!["n"],
            axes: vec![AxisSpec::new(-1.5, 4.0, 100)],
            fixed: vec![("tau_ms", 1.55)],
        },
        "sim-2d" => HyperparameterPreset {
            name: "sim-2d",
            description: "simulated combustor, gain and delay (delay length scales 0.4 ms / 1 ms)",
            objective: kernel(450.0, &[0.2, 0.4], 30.0),
            constraint: kernel(0.65, &[0.4, 1.0], 0.05).with_prior_mean(1.0),
            safety_threshold: 1.0,
            objective_threshold: Some(450.0),
            axis_names: vec!["n", "tau_ms"],
            axes: vec![AxisSpec::new(0.0, 2.5, 50), AxisSpec::new(0.5, 7.0, 50)],
            fixed: vec![],
        },
        "sim-2d-table" => HyperparameterPreset {
            name: "sim-2d-table",
            description: "simulated combustor, gain and delay (delay length scale 0.75 ms for both)",
            objective: kernel(450.0, &[0.2, 0.75], 30.0),
            constraint: kernel(0.65, &[0.4, 0.75], 0.05).with_prior_mean(1.0),
            safety_threshold: 1.0,
            objective_threshold: Some(450.0),
            axis_names: vec!["n", "tau_ms"],
            axes: vec![AxisSpec::new(0.0, 2.5, 50), AxisSpec::new(0.5, 7.0, 50)],
            fixed: vec![],
        },
        "exp-1d" => HyperparameterPreset {
            name: "exp-1d",
            description: "laboratory combustor, controller gain only",
            objective: kernel(450.0, &[0.2], 15.0),
            constraint: kernel(0.65, &[0.4], 0.05).with_prior_mean(1.0),
            safety_threshold: 1.0,
            objective_threshold: Some(450.0),
            axis_names: vec!["n"],
            axes: vec![AxisSpec::new(-1.5, 4.0, 100)],
            fixed: vec![("tau_ms", 1.5)],
        },
        "exp-2d" => HyperparameterPreset {
            name: "exp-2d",
            description: "laboratory combustor, gain and delay",
            objective: kernel(450.0, &[0.2, 0.3], 30.0),
            constraint: kernel(0.65, &[0.4, 1.0], 0.075).with_prior_mean(1.0),
            safety_threshold: 1.0,
            objective_threshold: Some(450.0),
            axis_names: vec!["n", "tau_ms"],
            axes: vec![AxisSpec::new(0.0, 3.5, 50), AxisSpec::new(0.5, 6.0, 50)],
            fixed: vec![],
        },
        "nrpd-2d" => HyperparameterPreset {
            name: "nrpd-2d",
            description: "plasma-actuated combustor: NO emissions (ppmvd) under a pulsation limit (Pa)",
            objective: kernel(15.0, &[0.5, 2.0], 1.2),
            constraint: kernel(300.0, &[0.5, 2.0], 20.0).with_prior_mean(500.0),
            safety_threshold: 500.0,
            objective_threshold: None,
            axis_names: vec!["voltage_kv", "pulse_share_pct"],
            axes: vec![AxisSpec::new(7.5, 9.0, 100), AxisSpec::new(40.0, 56.0, 9)],
            fixed: vec![],
        },
        other => {
            return Err(CampaignError::Input(format!(
                "unknown preset {other:?}; known presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(preset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_name_loads() {
        for name in PRESET_NAMES {
            let p = load_preset(name).unwrap();
            assert_eq!(p.name, name);
            assert_eq!(p.objective.param_dim(), p.axes.len());
            assert_eq!(p.constraint.param_dim(), p.axes.len());
            assert_eq!(p.axis_names.len(), p.axes.len());
        }
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(load_preset("sim-3d").is_err());
    }

    #[test]
    fn demo_noise_is_one_percent_of_prior_std() {
        let p = load_preset("demo1").unwrap();
        assert!((p.objective.noise_std - 0.01 * p.objective.amplitude.sqrt()).abs() < 1e-12);
        assert!((p.constraint.noise_std - 0.01 * p.constraint.amplitude.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn context_preset_is_contextual() {
        let p = load_preset("demo-context").unwrap();
        assert_eq!(p.objective.context_length_scales, Some(vec![0.1]));
        assert_eq!(p.constraint.context_length_scales, Some(vec![0.1]));
    }
}
