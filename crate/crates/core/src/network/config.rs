use serde::{Deserialize, Serialize};

use super::NetworkError;

/// Shipped single-stage combustor network.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../configs/single_stage.toml");

/// Text description of a network: an alternating chain of ducts and compact
/// junctions, closed by two reflecting boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Sampling rate in Hz.
    pub fs: f64,
    /// Reflection coefficient `f = R_u g` at the inlet.
    pub upstream_reflection: f64,
    /// Reflection coefficient `g = R_d f` at the outlet.
    pub downstream_reflection: f64,
    /// Corner frequency (Hz) of a first-order low-pass on the inlet reflection.
    #[serde(default)]
    pub upstream_cutoff: Option<f64>,
    /// Corner frequency (Hz) of a first-order low-pass on the outlet reflection.
    #[serde(default)]
    pub downstream_cutoff: Option<f64>,
    /// Ducts and junctions from inlet to outlet; must start and end with a duct.
    pub elements: Vec<ElementConfig>,
    #[serde(default)]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub simulation: SimulationSettings,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    /// Converts the normalized probe signal to Pa. Defaults to the probe duct's `ρc`.
    #[serde(default)]
    pub pressure_scale: Option<f64>,
    /// Upper bound on the linear state dimension for eigen analysis.
    #[serde(default = "default_max_state_dim")]
    pub max_state_dim: usize,
    /// Highest mode frequency of interest; `fs` must be at least 20 times this.
    #[serde(default = "default_max_frequency")]
    pub max_frequency: f64,
    /// Optional mapping from a scalar context (equivalence ratio) to the flame temperature.
    #[serde(default)]
    pub context: Option<ContextMapping>,
}

fn default_max_state_dim() -> usize {
    2000
}

fn default_max_frequency() -> f64 {
    500.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementConfig {
    Duct {
        /// m
        length: f64,
        /// m/s
        sound_speed: f64,
        /// kg/m³
        density: f64,
    },
    AreaJump {
        /// m²
        area_upstream: f64,
        area_downstream: f64,
        area_orifice: f64,
        /// Equivalent length `L_eq` in m.
        equivalent_length: f64,
        /// Loss coefficient `ζ`.
        loss_coefficient: f64,
        /// Mean orifice velocity `Ū_n` in m/s.
        mean_orifice_velocity: f64,
    },
    Flame {
        /// K
        temperature_upstream: f64,
        temperature_downstream: f64,
        /// `(ρc)_d/(ρc)_u`; taken from the adjacent ducts when omitted.
        #[serde(default)]
        rho_c_ratio: Option<f64>,
        /// FTF delay `τ_f` in s.
        ftf_delay: f64,
        /// FTF low-pass bandwidth `ω_b` in rad/s.
        ftf_bandwidth: f64,
        /// Velocity scale of the tanh limiter in m/s.
        saturation_scale: f64,
    },
    Loudspeaker {
        /// `K_LS` in (m/s)/V.
        #[serde(default = "default_ls_gain")]
        gain: f64,
        /// Voltage clip in V.
        #[serde(default = "default_clip")]
        clip_limit: f64,
    },
}

fn default_ls_gain() -> f64 {
    -0.6
}

fn default_clip() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// Gain `n`.
    #[serde(default)]
    pub gain: f64,
    /// Delay `τ` in s.
    #[serde(default)]
    pub delay: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self { gain: 0.0, delay: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSettings {
    /// s
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Leading part of the run excluded from rms values, s.
    #[serde(default = "default_warmup")]
    pub warmup: f64,
    /// Std of the random initial wave amplitudes (m/s).
    #[serde(default = "default_excitation")]
    pub excitation: f64,
    /// Std of white velocity forcing injected at the flame every sample (m/s).
    #[serde(default)]
    pub forcing: f64,
    /// Disables the tanh limiter and the voltage clip.
    #[serde(default)]
    pub linear: bool,
}

fn default_duration() -> f64 {
    5.0
}

fn default_warmup() -> f64 {
    1.0
}

fn default_excitation() -> f64 {
    1e-3
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self {
            duration: default_duration(),
            warmup: default_warmup(),
            excitation: default_excitation(),
            forcing: 0.0,
            linear: false,
        }
    }
}

/// Where the controller reads `p'/(ρc)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// Index into `elements` of the junction next to the probe.
    pub element: usize,
    pub side: ProbeSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeSide {
    Upstream,
    Downstream,
}

/// `T_d(z) = T_d + slope · (z − reference)` for every flame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextMapping {
    pub reference: f64,
    /// K per unit context.
    pub flame_temperature_slope: f64,
}

impl NetworkConfig {
    pub fn from_toml(text: &str) -> Result<Self, NetworkError> {
        toml::from_str(text).map_err(|e| NetworkError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, NetworkError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NetworkError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("network config serializes")
    }

    /// The shipped single-stage combustor.
    pub fn shipped() -> Self {
        Self::from_toml(DEFAULT_CONFIG_TOML).expect("shipped config parses")
    }

    pub fn with_controller(mut self, gain: f64, delay: f64) -> Self {
        self.controller = ControllerConfig { gain, delay };
        self
    }

    pub fn with_linear(mut self, linear: bool) -> Self {
        self.simulation.linear = linear;
        self
    }

    /// Applies the context mapping (if configured) to every flame.
    pub fn at_context(mut self, z: f64) -> Self {
        if let Some(map) = self.context {
            for e in &mut self.elements {
                if let ElementConfig::Flame { temperature_downstream, .. } = e {
                    *temperature_downstream += map.flame_temperature_slope * (z - map.reference);
                }
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_round_trips() {
        let c = NetworkConfig::shipped();
        let again = NetworkConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = DEFAULT_CONFIG_TOML.replace("fs =", "sampling = 1\nfs =");
        assert!(NetworkConfig::from_toml(&text).is_err());
    }

    #[test]
    fn context_moves_flame_temperature() {
        let mut c = NetworkConfig::shipped();
        c.context = Some(ContextMapping { reference: 0.7, flame_temperature_slope: 1000.0 });
        let shifted = c.clone().at_context(0.8);
        let temps = |c: &NetworkConfig| -> Vec<f64> {
            c.elements
                .iter()
                .filter_map(|e| match e {
                    ElementConfig::Flame { temperature_downstream, .. } => Some(*temperature_downstream),
                    _ => None,
                })
                .collect()
        };
        for (a, b) in temps(&c).iter().zip(temps(&shifted)) {
            assert!((b - a - 100.0).abs() < 1e-9);
        }
    }
}
