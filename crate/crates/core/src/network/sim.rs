use std::collections::HashMap;
use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use super::signal::rms;
use super::{assemble_network, NetworkConfig, NetworkError, NetworkModel};
use crate::safe_bo::{Measurement, Plant, PlantError};

/// Traces and rms metrics of one time-domain run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub fs: f64,
    /// `p'/(ρc)` at the probe, one value per sample.
    pub pressure_trace: Vec<f64>,
    /// Controller voltage per sample.
    pub voltage_trace: Vec<f64>,
    /// First sample of the rms window.
    pub window_start: usize,
    /// `pressure_scale · rms(pressure_trace[window_start..])`, Pa.
    pub rms_pressure: f64,
    /// `rms(voltage_trace[window_start..])`, V.
    pub rms_voltage: f64,
    /// s
    pub duration: f64,
}

/// Runs the model for `duration` seconds from a seeded random initial wave field.
pub fn simulate(model: &NetworkModel, duration: f64, seed: u64) -> Result<SimResult, NetworkError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(NetworkError::Input(format!("duration must be positive, got {duration}")));
    }
    let samples = (duration * model.fs).round() as usize;
    let window_start = (model.warmup * model.fs).round() as usize;
    if window_start >= samples {
        return Err(NetworkError::Input(format!(
            "warmup {} s leaves no samples in a {duration} s run",
            model.warmup
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = model.zero_state();
    if model.excitation > 0.0 {
        let kick = Normal::new(0.0, model.excitation).expect("finite excitation");
        state.excite_waves(|| kick.sample(&mut rng));
    }
    let forcing = (model.forcing > 0.0).then(|| Normal::new(0.0, model.forcing).expect("finite forcing"));
    let mut pressure_trace = Vec::with_capacity(samples);
    let mut voltage_trace = Vec::with_capacity(samples);
    for _ in 0..samples {
        let w = forcing.as_ref().map_or(0.0, |d| d.sample(&mut rng));
        let out = model.step(&mut state, w)?;
        pressure_trace.push(out.probe);
        voltage_trace.push(out.voltage);
    }
    let rms_pressure = model.pressure_scale * rms(&pressure_trace[window_start..]);
    let rms_voltage = rms(&voltage_trace[window_start..]);
    Ok(SimResult {
        fs: model.fs,
        pressure_trace,
        voltage_trace,
        window_start,
        rms_pressure,
        rms_voltage,
        duration: samples as f64 / model.fs,
    })
}

/// `(O, C) = (rms pressure in Pa, rms voltage in V)` for controller `(n, τ)`, τ in s.
pub fn measure_plant(
    model: &NetworkModel,
    n: f64,
    tau: f64,
    duration: f64,
    seed: u64,
) -> Result<(f64, f64), NetworkError> {
    let r = simulate(&model.with_controller(n, tau)?, duration, seed)?;
    Ok((r.rms_pressure, r.rms_voltage))
}

/// CSV `t, p_norm, V`.
pub fn write_sim_csv<W: Write>(mut out: W, result: &SimResult) -> io::Result<()> {
    writeln!(out, "t,p_norm,V")?;
    for (i, (p, v)) in result.pressure_trace.iter().zip(&result.voltage_trace).enumerate() {
        writeln!(out, "{:?},{:?},{:?}", i as f64 / result.fs, p, v)?;
    }
    Ok(())
}

/// Binds the simulator to the optimizer. Points are `[n]` (with a fixed
/// delay) or `[n, τ_ms]`; an optional scalar context moves the flame
/// temperature through the config's context mapping.
#[derive(Debug, Clone)]
pub struct NetworkPlant {
    config: NetworkConfig,
    base: NetworkModel,
    at_context: HashMap<u64, NetworkModel>,
    /// Delay in ms used for 1-D points.
    pub fixed_delay_ms: Option<f64>,
    pub duration: f64,
    seed: u64,
    calls: u64,
}

impl NetworkPlant {
    pub fn new(config: NetworkConfig, fixed_delay_ms: Option<f64>, seed: u64) -> Result<Self, NetworkError> {
        let base = assemble_network(&config)?;
        Ok(Self {
            duration: base.duration,
            config,
            base,
            at_context: HashMap::new(),
            fixed_delay_ms,
            seed,
            calls: 0,
        })
    }

    pub fn model(&self) -> &NetworkModel {
        &self.base
    }

    fn model_at(&mut self, context: Option<&[f64]>) -> Result<&NetworkModel, PlantError> {
        match (context, self.config.context) {
            (Some(&[z]), Some(_)) => {
                if !self.at_context.contains_key(&z.to_bits()) {
                    let m = assemble_network(&self.config.clone().at_context(z))
                        .map_err(|e| PlantError::Simulation(e.to_string()))?;
                    self.at_context.insert(z.to_bits(), m);
                }
                Ok(&self.at_context[&z.to_bits()])
            }
            (Some(z), Some(_)) => Err(PlantError::Domain(format!("expected one context coordinate, got {z:?}"))),
            _ => Ok(&self.base),
        }
    }
}

impl Plant for NetworkPlant {
    fn evaluate(&mut self, point: &[f64], context: Option<&[f64]>) -> Result<Measurement, PlantError> {
        let (n, tau_ms) = match (point, self.fixed_delay_ms) {
            (&[n], Some(t)) => (n, t),
            (&[n, t], _) => (n, t),
            _ => {
                return Err(PlantError::Domain(format!(
                    "expected [n] with a fixed delay or [n, τ_ms], got {point:?}"
                )))
            }
        };
        if !(tau_ms >= 0.0 && n.is_finite()) {
            return Err(PlantError::Domain(format!("invalid controller n = {n}, τ = {tau_ms} ms")));
        }
        // every call gets its own excitation so repeated points differ like measurements
        let seed = self.seed ^ self.calls.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        self.calls += 1;
        let duration = self.duration;
        let model = self.model_at(context)?;
        let (o, c) = measure_plant(model, n, tau_ms * 1e-3, duration, seed)
            .map_err(|e| PlantError::Simulation(e.to_string()))?;
        Ok(Measurement { objective: o, constraint: c })
    }

    fn description(&self) -> String {
        format!("thermoacoustic network simulator (seed {})", self.seed)
    }
}
