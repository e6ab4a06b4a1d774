use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{NetworkError, NetworkModel};

/// One discrete-time eigenvalue expressed as a continuous mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    /// Hz, in `[0, fs/2]`.
    pub frequency: f64,
    /// 1/s; positive means unstable.
    pub growth_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenMapEntry {
    pub n: f64,
    /// s
    pub tau: f64,
    /// Sorted by decreasing growth rate.
    pub modes: Vec<Mode>,
}

impl EigenMapEntry {
    pub fn max_growth(&self) -> f64 {
        self.modes.first().map_or(f64::NEG_INFINITY, |m| m.growth_rate)
    }

    pub fn is_stable(&self) -> bool {
        self.max_growth() <= 0.0
    }
}

/// Exact one-step matrix of the linearized network over the canonical state vector.
pub fn state_matrix(model: &NetworkModel) -> Result<DMatrix<f64>, NetworkError> {
    let dim = model.state_dim();
    if dim > model.max_state_dim {
        return Err(NetworkError::StateTooLarge { dim, cap: model.max_state_dim });
    }
    let linear = model.linearized();
    let mut a = DMatrix::zeros(dim, dim);
    let mut basis = vec![0.0; dim];
    let mut state = linear.zero_state();
    for j in 0..dim {
        basis[j] = 1.0;
        state.load_vector(&basis)?;
        basis[j] = 0.0;
        linear.step(&mut state, 0.0)?;
        for (i, v) in state.to_vector().into_iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    Ok(a)
}

/// All modes of the linearized network with non-negative frequency, most
/// unstable first. Eigenvalues at the origin (pure delays) are dropped.
pub fn eigenmodes(model: &NetworkModel) -> Result<Vec<Mode>, NetworkError> {
    let a = state_matrix(model)?;
    let fs = model.fs;
    let mut modes: Vec<Mode> = a
        .complex_eigenvalues()
        .iter()
        .filter(|l| l.im >= 0.0 && l.norm() > 1e-9)
        .map(|l| Mode { frequency: l.arg() * fs / std::f64::consts::TAU, growth_rate: l.norm().ln() * fs })
        .collect();
    modes.sort_by(|x, y| y.growth_rate.total_cmp(&x.growth_rate).then(x.frequency.total_cmp(&y.frequency)));
    Ok(modes)
}

/// The mode with the largest growth rate whose frequency lies in `[lo, hi]` Hz.
pub fn dominant_mode_in(modes: &[Mode], lo: f64, hi: f64) -> Option<Mode> {
    modes.iter().copied().find(|m| (lo..=hi).contains(&m.frequency))
}

/// Eigen-analysis over a gain × delay grid (delays in s); keeps the
/// `max_modes` least damped modes per point. Row-major with τ fastest.
pub fn eigenvalue_map(
    model: &NetworkModel,
    n_values: &[f64],
    tau_values: &[f64],
    max_modes: usize,
) -> Result<Vec<EigenMapEntry>, NetworkError> {
    if n_values.is_empty() || tau_values.is_empty() {
        return Err(NetworkError::Input("eigenvalue map needs at least one n and one τ".into()));
    }
    let pairs: Vec<(f64, f64)> = n_values.iter().flat_map(|&n| tau_values.iter().map(move |&t| (n, t))).collect();
    pairs
        .par_iter()
        .map(|&(n, tau)| {
            let m = model.with_controller(n, tau)?;
            let mut modes = eigenmodes(&m)?;
            modes.truncate(max_modes);
            Ok(EigenMapEntry { n, tau, modes })
        })
        .collect()
}

/// CSV with one row per mode: `n, tau, frequency, growth_rate`.
pub fn write_eigenmap_csv<W: Write>(mut out: W, entries: &[EigenMapEntry]) -> io::Result<()> {
    writeln!(out, "n,tau,frequency,growth_rate")?;
    for e in entries {
        for m in &e.modes {
            writeln!(out, "{:?},{:?},{:?},{:?}", e.n, e.tau, m.frequency, m.growth_rate)?;
        }
    }
    Ok(())
}
