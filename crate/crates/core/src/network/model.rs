use log::info;

use super::config::{ElementConfig, NetworkConfig, ProbeSide};
use super::NetworkError;

/// Integer-sample delay line; the front is the value pushed `len` steps ago.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DelayLine {
    buf: Vec<f64>,
    head: usize,
}

impl DelayLine {
    fn new(len: usize) -> Self {
        Self { buf: vec![0.0; len], head: 0 }
    }

    fn len(&self) -> usize {
        self.buf.len()
    }

    #[inline]
    fn front(&self) -> f64 {
        self.buf[self.head]
    }

    #[inline]
    fn push(&mut self, v: f64) {
        self.buf[self.head] = v;
        self.head += 1;
        if self.head == self.buf.len() {
            self.head = 0;
        }
    }

    /// Oldest value first.
    fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let (new, old) = self.buf.split_at(self.head);
        old.iter().chain(new).copied()
    }

    fn load(&mut self, values: &[f64]) {
        self.buf.copy_from_slice(values);
        self.head = 0;
    }
}

/// Duct snapped to an integer number of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Duct {
    pub length: f64,
    pub sound_speed: f64,
    pub density: f64,
    pub delay_samples: usize,
}

impl Duct {
    pub fn rho_c(&self) -> f64 {
        self.density * self.sound_speed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Junction {
    /// Compact area change with inertia and loss (L–ζ model), trapezoidal in time.
    AreaJump {
        /// `A_n/A_u`
        alpha: f64,
        /// `A_n/A_d`
        gamma: f64,
        /// `Ū_n ζ / c`
        loss: f64,
        /// `L_eq/c · fs`
        inertia: f64,
    },
    /// Compact flame: pressure scaled by `ratio`, velocity jump driven by the
    /// delayed low-passed saturated upstream velocity.
    Flame {
        /// `(p'/ρc)_d / (p'/ρc)_u`
        pressure_ratio: f64,
        /// `T_d/T_u − 1`
        expansion: f64,
        saturation_scale: f64,
        delay_samples: usize,
        /// `y[k] = a (x[k] + x[k−1]) + b y[k−1]`
        filter_a: f64,
        filter_b: f64,
    },
    /// Velocity source with pressure continuity.
    Loudspeaker { gain: f64, clip_limit: f64 },
}

/// First-order bilinear low-pass `y[k] = a (x[k] + x[k−1]) + b y[k−1]`, unit DC gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowPass {
    pub a: f64,
    pub b: f64,
}

impl LowPass {
    /// From a corner angular frequency in rad/s.
    pub fn new(omega: f64, fs: f64) -> Self {
        let den = 2.0 * fs + omega;
        Self { a: omega / den, b: (2.0 * fs - omega) / den }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct LowPassState {
    x_prev: f64,
    y_prev: f64,
}

impl LowPassState {
    #[inline]
    fn apply(&mut self, lp: &LowPass, x: f64) -> f64 {
        let y = lp.a * (x + self.x_prev) + lp.b * self.y_prev;
        self.x_prev = x;
        self.y_prev = y;
        y
    }
}

#[derive(Debug, Clone, PartialEq)]
enum JunctionState {
    AreaJump { u: f64, drive: f64 },
    Flame { line: DelayLine, x_prev: f64, y_prev: f64 },
    Loudspeaker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub junction: usize,
    pub side: ProbeSide,
}

/// Assembled, immutable network ready for time stepping.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub fs: f64,
    pub ducts: Vec<Duct>,
    /// Junction `j` joins duct `j` and duct `j + 1`.
    pub junctions: Vec<Junction>,
    pub upstream_reflection: f64,
    pub downstream_reflection: f64,
    /// Optional frequency dependence of the boundary reflections.
    pub upstream_filter: Option<LowPass>,
    pub downstream_filter: Option<LowPass>,
    pub probe: Probe,
    pub controller_gain: f64,
    pub controller_delay_samples: usize,
    pub nonlinear: bool,
    /// Velocity forcing std at the flames.
    pub forcing: f64,
    pub pressure_scale: f64,
    pub max_state_dim: usize,
    /// Std of the random initial wave amplitudes.
    pub excitation: f64,
    /// Run length and the excluded leading part used by [`super::simulate`], s.
    pub duration: f64,
    pub warmup: f64,
    /// Human-readable notes about snapped delays.
    pub adjustments: Vec<String>,
}

/// Per-sample output of [`NetworkModel::step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    /// `p'/(ρc)` at the probe.
    pub probe: f64,
    /// Controller voltage.
    pub voltage: f64,
}

/// Mutable buffers of a running network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    f: Vec<DelayLine>,
    g: Vec<DelayLine>,
    junctions: Vec<JunctionState>,
    boundaries: [Option<LowPassState>; 2],
    controller: Option<DelayLine>,
    sample: u64,
    scratch_f: Vec<f64>,
    scratch_g: Vec<f64>,
}

fn cutoff_filter(cutoff: Option<f64>, fs: f64) -> Result<Option<LowPass>, NetworkError> {
    match cutoff {
        None => Ok(None),
        Some(f) if f > 0.0 && f < 0.5 * fs => Ok(Some(LowPass::new(std::f64::consts::TAU * f, fs))),
        Some(f) => Err(NetworkError::Config(format!("boundary cutoff {f} Hz must lie in (0, fs/2)"))),
    }
}

fn snap(seconds: f64, fs: f64) -> usize {
    (seconds * fs).round().max(0.0) as usize
}

pub fn assemble_network(config: &NetworkConfig) -> Result<NetworkModel, NetworkError> {
    let fs = config.fs;
    let bad = |m: String| Err(NetworkError::Config(m));
    if !(fs.is_finite() && fs > 0.0) {
        return bad(format!("sampling rate must be positive, got {fs}"));
    }
    if fs < 20.0 * config.max_frequency {
        return bad(format!(
            "sampling rate {fs} Hz is below 20 × the highest frequency of interest ({} Hz)",
            config.max_frequency
        ));
    }
    if config.elements.is_empty() {
        return bad("network has no elements".into());
    }
    let mut adjustments = Vec::new();
    let mut ducts = Vec::new();
    let mut pending = Vec::new();
    for (i, e) in config.elements.iter().enumerate() {
        let expect_duct = i % 2 == 0;
        match (e, expect_duct) {
            (ElementConfig::Duct { length, sound_speed, density }, true) => {
                if !(*length > 0.0 && *sound_speed > 0.0 && *density > 0.0) {
                    return bad(format!("element {i}: duct length, sound speed and density must be positive"));
                }
                let n = snap(length / sound_speed, fs).max(1);
                let snapped = n as f64 * sound_speed / fs;
                if (snapped - length).abs() > 1e-12 {
                    let note = format!("element {i}: duct length {length} m snapped to {snapped:.6} m ({n} samples)");
                    info!("{note}");
                    adjustments.push(note);
                }
                ducts.push(Duct { length: snapped, sound_speed: *sound_speed, density: *density, delay_samples: n });
            }
            (ElementConfig::Duct { .. }, false) => {
                return bad(format!("element {i}: two consecutive ducts; join them with a junction"))
            }
            (_, true) => return bad(format!("element {i}: expected a duct between junctions")),
            (_, false) => pending.push((i, e)),
        }
    }
    if config.elements.len().is_multiple_of(2) {
        return bad("the chain must end with a duct".into());
    }
    let mut junctions = Vec::new();
    for (j, (i, e)) in pending.into_iter().enumerate() {
        let (up, down) = (&ducts[j], &ducts[j + 1]);
        let same_medium = ((up.rho_c() - down.rho_c()) / up.rho_c()).abs() < 1e-9;
        let junction = match *e {
            ElementConfig::AreaJump {
                area_upstream,
                area_downstream,
                area_orifice,
                equivalent_length,
                loss_coefficient,
                mean_orifice_velocity,
            } => {
                if !(area_upstream > 0.0 && area_downstream > 0.0 && area_orifice > 0.0) {
                    return bad(format!("element {i}: areas must be positive"));
                }
                if !(equivalent_length >= 0.0 && loss_coefficient >= 0.0 && mean_orifice_velocity >= 0.0) {
                    return bad(format!("element {i}: L_eq, ζ and Ū_n must be non-negative"));
                }
                if !same_medium {
                    return bad(format!("element {i}: ducts around an area jump must share ρc"));
                }
                let c = up.sound_speed;
                Junction::AreaJump {
                    alpha: area_orifice / area_upstream,
                    gamma: area_orifice / area_downstream,
                    loss: mean_orifice_velocity * loss_coefficient / c,
                    inertia: equivalent_length / c * fs,
                }
            }
            ElementConfig::Flame {
                temperature_upstream,
                temperature_downstream,
                rho_c_ratio,
                ftf_delay,
                ftf_bandwidth,
                saturation_scale,
            } => {
                if !(temperature_upstream > 0.0 && temperature_downstream >= temperature_upstream) {
                    return bad(format!("element {i}: flame needs T_d ≥ T_u > 0"));
                }
                if !(ftf_bandwidth > 0.0 && ftf_delay >= 0.0 && saturation_scale > 0.0) {
                    return bad(format!("element {i}: flame needs ω_b > 0, τ_f ≥ 0, saturation scale > 0"));
                }
                let ratio = rho_c_ratio.unwrap_or(down.rho_c() / up.rho_c());
                if ratio.is_nan() || ratio <= 0.0 {
                    return bad(format!("element {i}: ρc ratio must be positive"));
                }
                let mut delay = snap(ftf_delay, fs);
                if delay == 0 {
                    // the recursion needs at least one sample of delay
                    let note = format!("element {i}: flame delay {ftf_delay} s raised to one sample");
                    info!("{note}");
                    adjustments.push(note);
                    delay = 1;
                } else if (delay as f64 / fs - ftf_delay).abs() > 1e-12 {
                    let note = format!("element {i}: flame delay {ftf_delay} s snapped to {delay} samples");
                    info!("{note}");
                    adjustments.push(note);
                }
                let den = 2.0 * fs + ftf_bandwidth;
                Junction::Flame {
                    pressure_ratio: 1.0 / ratio,
                    expansion: temperature_downstream / temperature_upstream - 1.0,
                    saturation_scale,
                    delay_samples: delay,
                    filter_a: ftf_bandwidth / den,
                    filter_b: (2.0 * fs - ftf_bandwidth) / den,
                }
            }
            ElementConfig::Loudspeaker { gain, clip_limit } => {
                if clip_limit.is_nan() || clip_limit <= 0.0 {
                    return bad(format!("element {i}: clip limit must be positive"));
                }
                if !same_medium {
                    return bad(format!("element {i}: ducts around a loudspeaker must share ρc"));
                }
                Junction::Loudspeaker { gain, clip_limit }
            }
            ElementConfig::Duct { .. } => unreachable!("ducts were filtered above"),
        };
        junctions.push(junction);
    }

    let probe = match config.probe {
        Some(p) => {
            if p.element % 2 == 0 || p.element >= config.elements.len() {
                return bad(format!("probe element {} is not a junction", p.element));
            }
            Probe { junction: p.element / 2, side: p.side }
        }
        None => {
            let j = junctions
                .iter()
                .position(|j| matches!(j, Junction::Flame { .. }))
                .ok_or_else(|| NetworkError::Config("no flame and no probe location given".into()))?;
            Probe { junction: j, side: ProbeSide::Downstream }
        }
    };
    if matches!(junctions[probe.junction], Junction::Loudspeaker { .. }) {
        return bad("the probe cannot sit on a loudspeaker junction".into());
    }
    let probe_duct = match probe.side {
        ProbeSide::Upstream => &ducts[probe.junction],
        ProbeSide::Downstream => &ducts[probe.junction + 1],
    };
    let pressure_scale = config.pressure_scale.unwrap_or(probe_duct.rho_c());

    let ctl = config.controller;
    if !(ctl.delay >= 0.0 && ctl.delay.is_finite() && ctl.gain.is_finite()) {
        return bad(format!("controller needs finite gain and τ ≥ 0, got n = {}, τ = {}", ctl.gain, ctl.delay));
    }
    let sim = config.simulation;
    if !(sim.excitation >= 0.0 && sim.forcing >= 0.0 && sim.duration > 0.0 && sim.warmup >= 0.0) {
        return bad("simulation needs duration > 0 and non-negative warmup, excitation and forcing".into());
    }
    let model = NetworkModel {
        fs,
        ducts,
        junctions,
        upstream_reflection: config.upstream_reflection,
        downstream_reflection: config.downstream_reflection,
        upstream_filter: cutoff_filter(config.upstream_cutoff, fs)?,
        downstream_filter: cutoff_filter(config.downstream_cutoff, fs)?,
        probe,
        controller_gain: ctl.gain,
        controller_delay_samples: snap(ctl.delay, fs),
        nonlinear: !sim.linear,
        forcing: sim.forcing,
        pressure_scale,
        max_state_dim: config.max_state_dim,
        excitation: sim.excitation,
        duration: sim.duration,
        warmup: sim.warmup,
        adjustments,
    };
    Ok(model)
}

impl NetworkModel {
    /// Same network with another controller setting (delay in s).
    pub fn with_controller(&self, gain: f64, delay: f64) -> Result<Self, NetworkError> {
        if !(delay >= 0.0 && delay.is_finite() && gain.is_finite()) {
            return Err(NetworkError::Config(format!("controller needs finite gain and τ ≥ 0, got n = {gain}, τ = {delay}")));
        }
        let mut m = self.clone();
        m.controller_gain = gain;
        m.controller_delay_samples = snap(delay, self.fs);
        Ok(m)
    }

    pub fn linearized(&self) -> Self {
        let mut m = self.clone();
        m.nonlinear = false;
        m
    }

    pub fn zero_state(&self) -> NetworkState {
        let junctions = self
            .junctions
            .iter()
            .map(|j| match j {
                Junction::AreaJump { .. } => JunctionState::AreaJump { u: 0.0, drive: 0.0 },
                Junction::Flame { delay_samples, .. } => JunctionState::Flame {
                    line: DelayLine::new(*delay_samples),
                    x_prev: 0.0,
                    y_prev: 0.0,
                },
                Junction::Loudspeaker { .. } => JunctionState::Loudspeaker,
            })
            .collect();
        let n = self.ducts.len();
        NetworkState {
            f: self.ducts.iter().map(|d| DelayLine::new(d.delay_samples)).collect(),
            g: self.ducts.iter().map(|d| DelayLine::new(d.delay_samples)).collect(),
            junctions,
            boundaries: [
                self.upstream_filter.map(|_| LowPassState::default()),
                self.downstream_filter.map(|_| LowPassState::default()),
            ],
            controller: (self.controller_delay_samples > 0).then(|| DelayLine::new(self.controller_delay_samples)),
            sample: 0,
            scratch_f: vec![0.0; n],
            scratch_g: vec![0.0; n],
        }
    }

    /// Length of the canonical state vector.
    pub fn state_dim(&self) -> usize {
        let ducts: usize = self.ducts.iter().map(|d| 2 * d.delay_samples).sum();
        let junctions: usize = self
            .junctions
            .iter()
            .map(|j| match j {
                Junction::AreaJump { .. } => 2,
                Junction::Flame { delay_samples, .. } => delay_samples + 2,
                Junction::Loudspeaker { .. } => 0,
            })
            .sum();
        let boundaries = 2 * (self.upstream_filter.is_some() as usize + self.downstream_filter.is_some() as usize);
        ducts + junctions + boundaries + self.controller_delay_samples
    }

    /// Advances the network by one sample. `forcing` is the velocity source
    /// injected at the flames for this sample.
    pub fn step(&self, state: &mut NetworkState, forcing: f64) -> Result<StepOutput, NetworkError> {
        let nd = self.ducts.len();
        let NetworkState { f, g, junctions, boundaries, controller, sample, scratch_f, scratch_g } = state;
        // waves arriving at each duct end
        let fa = |d: usize| f[d].front();
        let ga = |d: usize| g[d].front();
        let [bu, bd] = boundaries;
        scratch_f[0] = self.upstream_reflection
            * match (&self.upstream_filter, bu) {
                (Some(lp), Some(st)) => st.apply(lp, ga(0)),
                _ => ga(0),
            };
        scratch_g[nd - 1] = self.downstream_reflection
            * match (&self.downstream_filter, bd) {
                (Some(lp), Some(st)) => st.apply(lp, fa(nd - 1)),
                _ => fa(nd - 1),
            };

        let mut probe = f64::NAN;
        for (j, (junction, js)) in self.junctions.iter().zip(junctions.iter_mut()).enumerate() {
            let (f_in, g_in) = (fa(j), ga(j + 1));
            let (f_out, g_out) = match (junction, js) {
                (&Junction::AreaJump { alpha, gamma, loss, inertia }, JunctionState::AreaJump { u, drive }) => {
                    let d = f_in - g_in;
                    let un = if inertia > 0.0 {
                        (inertia * *u + d + 0.5 * *drive) / (inertia + 0.5 * (alpha + gamma + loss))
                    } else {
                        2.0 * d / (alpha + gamma + loss)
                    };
                    *u = un;
                    *drive = 2.0 * d - (alpha + gamma + loss) * un;
                    (gamma * un + g_in, f_in - alpha * un)
                }
                (
                    &Junction::Flame { pressure_ratio: r, expansion, saturation_scale, filter_a, filter_b, .. },
                    JunctionState::Flame { line, x_prev, y_prev },
                ) => {
                    let x = line.front();
                    let q = filter_a * (x + *x_prev) + filter_b * *y_prev;
                    *x_prev = x;
                    *y_prev = q;
                    let g_out = (2.0 * g_in + (1.0 - r) * f_in + expansion * q + forcing) / (1.0 + r);
                    let f_out = r * (f_in + g_out) - g_in;
                    let u_up = f_in - g_out;
                    let driven = if self.nonlinear {
                        saturation_scale * (u_up / saturation_scale).tanh()
                    } else {
                        u_up
                    };
                    line.push(driven);
                    (f_out, g_out)
                }
                (Junction::Loudspeaker { .. }, _) => continue,
                _ => unreachable!("junction state matches its junction"),
            };
            if j == self.probe.junction {
                probe = match self.probe.side {
                    ProbeSide::Upstream => f_in + g_out,
                    ProbeSide::Downstream => f_out + g_in,
                };
            }
            scratch_f[j + 1] = f_out;
            scratch_g[j] = g_out;
        }

        let delayed = match controller {
            Some(line) => {
                let v = line.front();
                line.push(probe);
                v
            }
            None => probe,
        };
        let mut voltage = self.controller_gain * delayed;

        for (j, junction) in self.junctions.iter().enumerate() {
            if let &Junction::Loudspeaker { gain, clip_limit } = junction {
                if self.nonlinear {
                    voltage = voltage.clamp(-clip_limit, clip_limit);
                }
                let u_ls = gain * voltage;
                scratch_f[j + 1] = fa(j) - 0.5 * u_ls;
                scratch_g[j] = ga(j + 1) - 0.5 * u_ls;
            }
        }

        for d in 0..nd {
            f[d].push(scratch_f[d]);
            g[d].push(scratch_g[d]);
        }
        *sample += 1;
        if !(probe.is_finite() && voltage.is_finite()) {
            return Err(NetworkError::Numerical {
                sample: *sample,
                detail: format!("probe = {probe}, voltage = {voltage}"),
            });
        }
        Ok(StepOutput { probe, voltage })
    }
}

impl NetworkState {
    pub fn sample(&self) -> u64 {
        self.sample
    }

    /// Canonical state vector: duct lines (forward then backward, oldest
    /// first), junction states, filtered-boundary states, controller buffer.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::new();
        for (f, g) in self.f.iter().zip(&self.g) {
            v.extend(f.iter());
            v.extend(g.iter());
        }
        for js in &self.junctions {
            match js {
                JunctionState::AreaJump { u, drive } => v.extend([*u, *drive]),
                JunctionState::Flame { line, x_prev, y_prev } => {
                    v.extend(line.iter());
                    v.extend([*x_prev, *y_prev]);
                }
                JunctionState::Loudspeaker => {}
            }
        }
        for b in self.boundaries.iter().flatten() {
            v.extend([b.x_prev, b.y_prev]);
        }
        if let Some(c) = &self.controller {
            v.extend(c.iter());
        }
        v
    }

    /// Inverse of [`NetworkState::to_vector`].
    pub fn load_vector(&mut self, v: &[f64]) -> Result<(), NetworkError> {
        let expected = self.to_vector().len();
        if v.len() != expected {
            return Err(NetworkError::Input(format!("state vector has {} entries, expected {expected}", v.len())));
        }
        let mut at = 0;
        let mut take = |n: usize| {
            let s = &v[at..at + n];
            at += n;
            s
        };
        for (f, g) in self.f.iter_mut().zip(self.g.iter_mut()) {
            f.load(take(f.len()));
            g.load(take(g.len()));
        }
        for js in &mut self.junctions {
            match js {
                JunctionState::AreaJump { u, drive } => {
                    let s = take(2);
                    (*u, *drive) = (s[0], s[1]);
                }
                JunctionState::Flame { line, x_prev, y_prev } => {
                    let n = line.len();
                    line.load(take(n));
                    let s = take(2);
                    (*x_prev, *y_prev) = (s[0], s[1]);
                }
                JunctionState::Loudspeaker => {}
            }
        }
        for b in self.boundaries.iter_mut().flatten() {
            let s = take(2);
            (b.x_prev, b.y_prev) = (s[0], s[1]);
        }
        if let Some(c) = &mut self.controller {
            let n = c.len();
            c.load(take(n));
        }
        Ok(())
    }

    /// Adds one drawn value to every slot of every duct delay line, in canonical order.
    pub(crate) fn excite_waves(&mut self, mut next: impl FnMut() -> f64) {
        for line in self.f.iter_mut().chain(self.g.iter_mut()) {
            for slot in line.buf.iter_mut() {
                *slot += next();
            }
        }
    }

    /// Sum of squared wave amplitudes in all duct lines.
    pub fn wave_energy(&self) -> f64 {
        self.f
            .iter()
            .chain(&self.g)
            .flat_map(|l| l.buf.iter())
            .map(|x| x * x)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::config::{ControllerConfig, SimulationSettings};

    fn duct(length: f64) -> ElementConfig {
        ElementConfig::Duct { length, sound_speed: 340.0, density: 1.2 }
    }

    fn pipe(r_u: f64, r_d: f64) -> NetworkConfig {
        NetworkConfig {
            fs: 10_000.0,
            upstream_reflection: r_u,
            downstream_reflection: r_d,
            upstream_cutoff: None,
            downstream_cutoff: None,
            elements: vec![
                duct(0.34),
                ElementConfig::AreaJump {
                    area_upstream: 1.0,
                    area_downstream: 1.0,
                    area_orifice: 1.0,
                    equivalent_length: 0.0,
                    loss_coefficient: 0.0,
                    mean_orifice_velocity: 0.0,
                },
                duct(0.51),
            ],
            controller: ControllerConfig::default(),
            simulation: SimulationSettings::default(),
            probe: Some(crate::network::ProbeConfig { element: 1, side: ProbeSide::Downstream }),
            pressure_scale: None,
            max_state_dim: 2000,
            max_frequency: 500.0,
            context: None,
        }
    }

    #[test]
    fn ducts_snap_to_samples() {
        let mut c = pipe(1.0, 1.0);
        c.elements[0] = duct(0.3412);
        let m = assemble_network(&c).unwrap();
        assert_eq!(m.ducts[0].delay_samples, 10);
        assert!((m.ducts[0].length - 0.34).abs() < 1e-12);
        assert_eq!(m.adjustments.len(), 1);
        assert_eq!(m.ducts[1].delay_samples, 15);
    }

    #[test]
    fn consecutive_ducts_are_rejected() {
        let mut c = pipe(1.0, 1.0);
        c.elements.insert(1, duct(0.1));
        assert!(matches!(assemble_network(&c), Err(NetworkError::Config(_))));
    }

    #[test]
    fn low_sampling_rate_is_rejected() {
        let mut c = pipe(1.0, 1.0);
        c.fs = 5_000.0;
        assert!(assemble_network(&c).is_err());
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let m = assemble_network(&NetworkConfig::shipped().with_controller(1.5, 0.002)).unwrap();
        let mut s = m.zero_state();
        for _ in 0..1000 {
            let out = m.step(&mut s, 0.0).unwrap();
            assert_eq!(out.probe, 0.0);
            assert_eq!(out.voltage, 0.0);
        }
        assert!(s.to_vector().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn state_vector_round_trips() {
        let m = assemble_network(&NetworkConfig::shipped().with_controller(1.0, 0.0013)).unwrap();
        let mut s = m.zero_state();
        let v: Vec<f64> = (0..m.state_dim()).map(|i| i as f64 * 0.01 - 1.0).collect();
        s.load_vector(&v).unwrap();
        assert_eq!(s.to_vector(), v);
        // stepping then reloading still round-trips (ring heads move)
        m.step(&mut s, 0.0).unwrap();
        let w = s.to_vector();
        let mut t = m.zero_state();
        t.load_vector(&w).unwrap();
        assert_eq!(t.to_vector(), w);
        assert_eq!(m.state_dim(), w.len());
    }

    #[test]
    fn rigid_pipe_conserves_wave_energy() {
        let m = assemble_network(&pipe(1.0, 1.0)).unwrap();
        let mut s = m.zero_state();
        let mut k = 0;
        s.excite_waves(|| {
            k += 1;
            (k as f64 * 0.37).sin()
        });
        let e0 = s.wave_energy();
        for _ in 0..500 {
            m.step(&mut s, 0.0).unwrap();
        }
        assert!((s.wave_energy() - e0).abs() < 1e-9 * e0);
    }

    #[test]
    fn lossy_outlet_dissipates() {
        let m = assemble_network(&pipe(1.0, 0.5)).unwrap();
        let mut s = m.zero_state();
        s.excite_waves(|| 1.0);
        let e0 = s.wave_energy();
        for _ in 0..2000 {
            m.step(&mut s, 0.0).unwrap();
        }
        assert!(s.wave_energy() < 1e-6 * e0);
    }
}
