//! Campaign config file: raw TOML schema, defaults from presets, validation.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use safeopt_core::benchmarks::{load_preset, HyperparameterPreset, CONTEXT_LENGTH_SCALE};
use safeopt_core::gp::KernelSpec;
use safeopt_core::safe_bo::{AlgoConfig, Algorithm, AxisSpec, ParameterGrid, PriorPolicy};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub plant: String,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub initializers: Vec<Vec<f64>>,
    /// Initializers may lie outside the grid; they only inform the initial safe set.
    #[serde(default)]
    pub allow_initializers_outside_grid: bool,
    pub context: Option<Vec<f64>>,
    #[serde(default)]
    pub algorithm: RawAlgorithm,
    pub grid: Option<RawGrid>,
    pub objective: Option<KernelSpec>,
    pub constraint: Option<KernelSpec>,
    pub prior: Option<PriorPolicy>,
    #[serde(default)]
    pub noise: NoiseSettings,
    #[serde(default)]
    pub network: RawNetwork,
    #[serde(default)]
    pub external: RawExternal,
    #[serde(default)]
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAlgorithm {
    pub name: Option<String>,
    pub safety_threshold: Option<f64>,
    pub objective_threshold: Option<f64>,
    pub switch_iteration: Option<usize>,
    pub max_iterations: Option<usize>,
    pub confidence_multiplier: Option<f64>,
    pub use_expander: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub axes: Vec<AxisSpec>,
}

/// Measurement noise of the analytic plants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    #[serde(default)]
    pub objective_std: f64,
    #[serde(default)]
    pub constraint_std: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNetwork {
    pub fixed_delay_ms: Option<f64>,
    pub duration: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExternal {
    pub timeout_ms: Option<u64>,
}

/// One operating point of a context chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub context: Vec<f64>,
    pub iterations: usize,
}

/// Which plant answers the campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PlantSelector {
    Demo1,
    Demo2,
    DemoContext,
    TaNetwork { config: Option<PathBuf> },
    External { command: String },
}

impl PlantSelector {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(a.trim())),
            None => (text, None),
        };
        match (kind.trim(), arg) {
            ("demo1", None) => Ok(Self::Demo1),
            ("demo2", None) => Ok(Self::Demo2),
            ("demo-context", None) => Ok(Self::DemoContext),
            ("ta-network", None) => Ok(Self::TaNetwork { config: None }),
            ("ta-network", Some(path)) => {
                let path = base_dir.join(path);
                if !path.is_file() {
                    return Err(CliError::Config(format!("network config {} does not exist", path.display())));
                }
                Ok(Self::TaNetwork { config: Some(path) })
            }
            ("external", Some(cmd)) if !cmd.is_empty() => Ok(Self::External { command: cmd.to_string() }),
            _ => Err(CliError::Config(format!(
                "unknown plant `{text}`; expected demo1, demo2, demo-context, ta-network[:<path>] or external:<command>"
            ))),
        }
    }

    fn default_preset(&self) -> Option<&'static str> {
        match self {
            Self::Demo1 => Some("demo1"),
            Self::Demo2 => Some("demo2"),
            Self::DemoContext => Some("demo-context"),
            Self::TaNetwork { .. } | Self::External { .. } => None,
        }
    }
}

/// Fully resolved campaign: every default filled in. Dumped into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub plant: PlantSelector,
    pub preset: Option<String>,
    pub seed: u64,
    pub axes: Vec<AxisSpec>,
    pub objective: KernelSpec,
    pub constraint: KernelSpec,
    pub algorithm: AlgoConfig,
    pub prior: PriorPolicy,
    pub initializers: Vec<Vec<f64>>,
    pub context: Option<Vec<f64>>,
    pub noise: NoiseSettings,
    pub fixed_delay_ms: Option<f64>,
    pub duration: Option<f64>,
    pub timeout_ms: Option<u64>,
    pub stages: Vec<Stage>,
}

impl ResolvedConfig {
    pub fn grid(&self) -> Result<ParameterGrid, CliError> {
        Ok(ParameterGrid::uniform(&self.axes)?.with_context(self.context.clone()))
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub algorithm: Option<String>,
    pub iterations: Option<usize>,
}

pub fn load(path: &Path) -> Result<(RawConfig, PathBuf), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((raw, dir))
}

pub fn resolve(raw: &RawConfig, base_dir: &Path, ov: &Overrides) -> Result<ResolvedConfig, CliError> {
    let plant = PlantSelector::parse(&raw.plant, base_dir)?;
    let preset_name = raw.preset.clone().or_else(|| plant.default_preset().map(String::from));
    let preset: Option<HyperparameterPreset> = match &preset_name {
        Some(name) => Some(load_preset(name)?),
        None => None,
    };

    let axes = match (&raw.grid, &preset) {
        (Some(g), _) => g.axes.clone(),
        (None, Some(p)) => p.axes.clone(),
        (None, None) => return Err(CliError::Config("no [grid] and no preset to take it from".into())),
    };
    let mut objective = raw
        .objective
        .clone()
        .or_else(|| preset.as_ref().map(|p| p.objective.clone()))
        .ok_or_else(|| CliError::Config("no [objective] kernel and no preset".into()))?;
    let mut constraint = raw
        .constraint
        .clone()
        .or_else(|| preset.as_ref().map(|p| p.constraint.clone()))
        .ok_or_else(|| CliError::Config("no [constraint] kernel and no preset".into()))?;

    let contextual = raw.context.is_some() || !raw.stages.is_empty();
    if contextual {
        // context campaigns need a context factor in both kernels
        if objective.context_length_scales.is_none() {
            objective = objective.with_context(vec![CONTEXT_LENGTH_SCALE])?;
        }
        if constraint.context_length_scales.is_none() {
            constraint = constraint.with_context(vec![CONTEXT_LENGTH_SCALE])?;
        }
    }
    let context = raw.context.clone().or_else(|| raw.stages.first().map(|s| s.context.clone()));
    if matches!(plant, PlantSelector::DemoContext) && context.is_none() {
        return Err(CliError::Config("plant demo-context needs `context` or [[stages]]".into()));
    }

    let algorithm = resolve_algorithm(&raw.algorithm, preset.as_ref(), ov)?;
    let fixed_delay_ms = raw
        .network
        .fixed_delay_ms
        .or_else(|| preset.as_ref().and_then(|p| p.fixed.iter().find(|(k, _)| *k == "tau_ms").map(|(_, v)| *v)));

    let initializers = raw.initializers.clone();
    if initializers.is_empty() && raw.stages.len() <= 1 {
        return Err(CliError::Config("at least one initializer point is required".into()));
    }
    for p in &initializers {
        if p.len() != axes.len() {
            return Err(CliError::Config(format!("initializer {p:?} has {} coordinates, grid has {}", p.len(), axes.len())));
        }
        let inside = p.iter().zip(&axes).all(|(v, a)| *v >= a.lower && *v <= a.upper);
        if !inside && !raw.allow_initializers_outside_grid {
            return Err(CliError::Config(format!(
                "initializer {p:?} lies outside the grid; set allow_initializers_outside_grid = true to permit it"
            )));
        }
    }
    if raw.noise.objective_std < 0.0 || raw.noise.constraint_std < 0.0 {
        return Err(CliError::Config("noise standard deviations must be non-negative".into()));
    }
    let mut stages = raw.stages.clone();
    if let Some(n) = ov.iterations {
        for s in &mut stages {
            s.iterations = n;
        }
    }
    let resolved = ResolvedConfig {
        plant,
        preset: preset_name,
        seed: ov.seed.or(raw.seed).unwrap_or(0),
        axes,
        objective,
        constraint,
        algorithm,
        prior: raw.prior.unwrap_or_default(),
        initializers,
        context,
        noise: raw.noise,
        fixed_delay_ms,
        duration: raw.network.duration,
        timeout_ms: raw.external.timeout_ms,
        stages,
    };
    // grid construction validates the axes
    resolved.grid()?;
    Ok(resolved)
}

fn resolve_algorithm(raw: &RawAlgorithm, preset: Option<&HyperparameterPreset>, ov: &Overrides) -> Result<AlgoConfig, CliError> {
    let name = ov.algorithm.as_deref().or(raw.name.as_deref()).unwrap_or("safeOpt");
    let algorithm = Algorithm::from_str(name).map_err(|e| CliError::Config(e.to_string()))?;
    let safety_threshold = raw
        .safety_threshold
        .or_else(|| preset.map(|p| p.safety_threshold))
        .ok_or_else(|| CliError::Config("algorithm.safety_threshold is required without a preset".into()))?;
    let max_iterations = ov.iterations.or(raw.max_iterations).unwrap_or(30);
    let objective_threshold = match algorithm {
        Algorithm::ShrinkAlgo => raw.objective_threshold.or_else(|| preset.and_then(|p| p.objective_threshold)),
        _ => None,
    };
    let switch_iteration = match algorithm {
        Algorithm::SafeOpt => 0,
        _ => raw.switch_iteration.unwrap_or(max_iterations / 2),
    };
    let config = AlgoConfig {
        algorithm,
        safety_threshold,
        objective_threshold,
        switch_iteration,
        max_iterations,
        confidence_multiplier: raw.confidence_multiplier.unwrap_or(2.0),
        use_expander: raw.use_expander.unwrap_or(algorithm != Algorithm::ShrinkAlgo),
    };
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn demo_preset_fills_defaults() {
        let r = resolve(&raw("plant = \"demo1\"\ninitializers = [[2.0]]"), Path::new("."), &Overrides::default()).unwrap();
        assert_eq!(r.axes, vec![AxisSpec::new(0.0, 10.0, 200)]);
        assert_eq!(r.algorithm.safety_threshold, 4.0);
        assert_eq!(r.algorithm.max_iterations, 30);
        assert_eq!(r.algorithm.confidence_multiplier, 2.0);
        assert_eq!(r.seed, 0);
    }

    #[test]
    fn overrides_win() {
        let ov = Overrides { seed: Some(9), algorithm: Some("stageOpt".into()), iterations: Some(12) };
        let r = resolve(&raw("plant = \"demo1\"\nseed = 1\ninitializers = [[2.0]]"), Path::new("."), &ov).unwrap();
        assert_eq!(r.seed, 9);
        assert_eq!(r.algorithm.algorithm, Algorithm::StageOpt);
        assert_eq!(r.algorithm.max_iterations, 12);
        assert_eq!(r.algorithm.switch_iteration, 6);
    }

    #[test]
    fn unknown_algorithm_is_a_config_error() {
        let r = resolve(
            &raw("plant = \"demo1\"\ninitializers = [[2.0]]\n[algorithm]\nname = \"greedy\""),
            Path::new("."),
            &Overrides::default(),
        );
        assert!(matches!(r, Err(CliError::Config(_))));
    }

    #[test]
    fn outside_initializers_need_opt_in() {
        let text = "plant = \"demo1\"\ninitializers = [[12.0]]";
        assert!(matches!(resolve(&raw(text), Path::new("."), &Overrides::default()), Err(CliError::Config(_))));
        let text = "plant = \"demo1\"\ninitializers = [[12.0]]\nallow_initializers_outside_grid = true";
        assert!(resolve(&raw(text), Path::new("."), &Overrides::default()).is_ok());
    }

    #[test]
    fn plant_selectors_parse() {
        let d = Path::new(".");
        assert_eq!(PlantSelector::parse("demo2", d).unwrap(), PlantSelector::Demo2);
        assert_eq!(PlantSelector::parse("ta-network", d).unwrap(), PlantSelector::TaNetwork { config: None });
        assert_eq!(
            PlantSelector::parse("external:python3 rig.py", d).unwrap(),
            PlantSelector::External { command: "python3 rig.py".into() }
        );
        assert!(PlantSelector::parse("ta-network:/nonexistent.toml", d).is_err());
        assert!(PlantSelector::parse("rig", d).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RawConfig>("plant = \"demo1\"\nsed = 3").is_err());
    }

    #[test]
    fn stages_make_kernels_contextual() {
        let text = "plant = \"demo1\"\ninitializers = [[2.0]]\n[[stages]]\ncontext = [0.753]\niterations = 5\n[[stages]]\ncontext = [0.684]\niterations = 5";
        let r = resolve(&raw(text), Path::new("."), &Overrides::default()).unwrap();
        assert_eq!(r.objective.context_length_scales, Some(vec![0.1]));
        assert_eq!(r.context, Some(vec![0.753]));
    }
}
