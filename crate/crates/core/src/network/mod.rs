//! Low-order thermoacoustic network: delay-line ducts, compact junctions
//! (area jump, flame, loudspeaker), gain-delay feedback, eigen analysis and
//! signal metrics.

mod config;
mod eigen;
mod model;
mod signal;
mod sim;

pub use config::{
    ContextMapping, ControllerConfig, ElementConfig, NetworkConfig, ProbeConfig, ProbeSide, SimulationSettings,
    DEFAULT_CONFIG_TOML,
};
pub use eigen::{dominant_mode_in, eigenmodes, eigenvalue_map, state_matrix, write_eigenmap_csv, EigenMapEntry, Mode};
pub use model::{assemble_network, Duct, Junction, NetworkModel, NetworkState, Probe, StepOutput};
pub use signal::{bandpass, bandpass_histogram, psd, rms, Histogram, PsdSettings, Spectrum, Window};
pub use sim::{measure_plant, simulate, write_sim_csv, NetworkPlant, SimResult};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network configuration error: {0}")]
    Config(String),
    #[error("non-finite state at sample {sample}: {detail}")]
    Numerical { sample: u64, detail: String },
    #[error("state dimension {dim} exceeds the cap of {cap}")]
    StateTooLarge { dim: usize, cap: usize },
    #[error("invalid input: {0}")]
    Input(String),
}
