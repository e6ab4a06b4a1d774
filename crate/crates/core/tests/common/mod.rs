//! Oracles shared by the integration test targets.
#![allow(dead_code)]

use safeopt_core::network::{NetworkModel, NetworkState};
use nalgebra::{DMatrix, DVector};
use safeopt_core::gp::KernelSpec;
use safeopt_core::safe_bo::{AlgoConfig, Algorithm, CampaignState, Measurement, Plant, PlantError};

/// Growth rate (1/s) from a least-squares line through log chunk-rms of a
/// linear run started from `state`, over `[fit_start, duration]` seconds.
pub fn envelope_growth(model: &NetworkModel, state: &mut NetworkState, duration: f64, fit_start: f64) -> f64 {
    let fs = model.fs;
    let chunk = (0.05 * fs) as usize;
    let total = (duration * fs) as usize;
    let mut trace = Vec::with_capacity(total);
    for _ in 0..total {
        trace.push(model.step(state, 0.0).expect("linear run stays finite").probe);
    }
    let first = (fit_start * fs) as usize / chunk;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for c in first..total / chunk {
        let w = &trace[c * chunk..(c + 1) * chunk];
        // scaled by the chunk peak so fast-growing runs do not overflow the square
        let peak = w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let energy = w.iter().map(|x| (x / peak).powi(2)).sum::<f64>() / chunk as f64;
        xs.push((c as f64 + 0.5) * chunk as f64 / fs);
        ys.push(peak.ln() + 0.5 * energy.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Deterministic pseudo-random start vector for a model's linear state.
pub fn random_state(model: &NetworkModel, seed: u64) -> NetworkState {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut state = model.zero_state();
    let v: Vec<f64> = (0..model.state_dim()).map(|_| rng.random_range(-1e-3..1e-3)).collect();
    state.load_vector(&v).expect("dimension matches");
    state
}

/// Squared-exponential covariance written out directly from the kernel formula.
pub fn se_covariance(spec: &KernelSpec, a: &[f64], b: &[f64]) -> f64 {
    let d = spec.length_scales.len();
    let mut r2 = 0.0;
    for k in 0..d {
        r2 += ((a[k] - b[k]) / spec.length_scales[k]).powi(2);
    }
    let mut ctx = 1.0;
    if let Some(ls) = &spec.context_length_scales {
        let mut z2 = 0.0;
        for (k, l) in ls.iter().enumerate() {
            z2 += ((a[d + k] - b[d + k]) / l).powi(2);
        }
        ctx = (-0.5 * z2).exp();
    }
    spec.amplitude * (-0.5 * r2).exp() * ctx
}

/// GP posterior by explicit inversion of the noisy Gram matrix.
pub struct DenseGp {
    spec: KernelSpec,
    inputs: Vec<Vec<f64>>,
    inverse: DMatrix<f64>,
    alpha: DVector<f64>,
}

impl DenseGp {
    pub fn new(spec: &KernelSpec, data: &[(Vec<f64>, f64)]) -> Self {
        let n = data.len();
        let noise = (spec.noise_std * spec.noise_std).max(1e-10);
        let gram = DMatrix::from_fn(n, n, |i, j| {
            se_covariance(spec, &data[i].0, &data[j].0) + if i == j { noise } else { 0.0 }
        });
        let inverse = if n == 0 { gram } else { gram.try_inverse().expect("invertible Gram matrix") };
        let centred = DVector::from_iterator(n, data.iter().map(|(_, y)| y - spec.prior_mean));
        let alpha = &inverse * centred;
        Self { spec: spec.clone(), inputs: data.iter().map(|(x, _)| x.clone()).collect(), inverse, alpha }
    }

    /// `(mean, variance)` at a flat input.
    pub fn posterior(&self, x: &[f64]) -> (f64, f64) {
        let k = DVector::from_iterator(self.inputs.len(), self.inputs.iter().map(|xi| se_covariance(&self.spec, xi, x)));
        let mean = self.spec.prior_mean + k.dot(&self.alpha);
        let var = se_covariance(&self.spec, x, x) - k.dot(&(&self.inverse * &k));
        (mean, var)
    }
}

fn data_of(model: &safeopt_core::gp::GpModel) -> Vec<(Vec<f64>, f64)> {
    model.observations().iter().map(|o| (o.input(), o.value)).collect()
}

/// Sets and bounds recomputed from scratch for the iteration being planned.
pub struct OracleSets {
    pub safe: Vec<bool>,
    pub minimizer: Vec<bool>,
    pub expander: Vec<bool>,
    pub objective_lower: Vec<f64>,
    pub objective_width: Vec<f64>,
}

pub fn oracle_sets(state: &CampaignState, config: &AlgoConfig) -> OracleSets {
    let beta = config.confidence_multiplier;
    let t = config.safety_threshold;
    let inputs = state.grid.inputs();
    let obj = DenseGp::new(state.objective_model.spec(), &data_of(&state.objective_model));
    let con_data = data_of(&state.constraint_model);
    let con = DenseGp::new(state.constraint_model.spec(), &con_data);
    let bound = |gp: &DenseGp, x: &[f64]| {
        let (m, v) = gp.posterior(x);
        let s = v.max(0.0).sqrt();
        (m - beta * s, m + beta * s)
    };
    let ob: Vec<(f64, f64)> = inputs.iter().map(|x| bound(&obj, x)).collect();
    let cb: Vec<(f64, f64)> = inputs.iter().map(|x| bound(&con, x)).collect();
    let shrinking = config.algorithm == Algorithm::ShrinkAlgo && state.iteration > config.switch_iteration;
    let safe: Vec<bool> = (0..inputs.len())
        .map(|i| {
            if shrinking {
                cb[i].1 < t && ob[i].1 < config.objective_threshold.unwrap()
            } else {
                state.initial_safe_mask[i] || cb[i].1 < t
            }
        })
        .collect();
    let best_upper = (0..inputs.len()).filter(|&i| safe[i]).map(|i| ob[i].1).fold(f64::INFINITY, f64::min);
    let minimizer: Vec<bool> = (0..inputs.len()).map(|i| safe[i] && ob[i].0 < best_upper).collect();
    let needs_expander = !shrinking || config.use_expander;
    let mut expander = vec![false; inputs.len()];
    if needs_expander {
        for i in (0..inputs.len()).filter(|&i| safe[i]) {
            let mut data = con_data.clone();
            data.push((inputs[i].clone(), cb[i].0));
            let what_if = DenseGp::new(state.constraint_model.spec(), &data);
            expander[i] = (0..inputs.len()).filter(|&j| !safe[j]).any(|j| bound(&what_if, &inputs[j]).1 < t);
        }
    }
    OracleSets {
        safe,
        minimizer,
        expander,
        objective_lower: ob.iter().map(|b| b.0).collect(),
        objective_width: ob.iter().map(|b| b.1 - b.0).collect(),
    }
}

/// Exhaustive scan for the next point; ties go to the lowest index.
pub fn oracle_next_point(state: &CampaignState, config: &AlgoConfig) -> Option<usize> {
    let sets = oracle_sets(state, config);
    let post_switch = config.algorithm != Algorithm::SafeOpt && state.iteration > config.switch_iteration;
    let scan = |score: &dyn Fn(usize) -> f64, allowed: &dyn Fn(usize) -> bool| {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..sets.safe.len() {
            if allowed(i) && best.is_none_or(|(_, b)| score(i) > b) {
                best = Some((i, score(i)));
            }
        }
        best.map(|(i, _)| i)
    };
    let width = |i: usize| sets.objective_width[i];
    let safeopt = |i: usize| sets.safe[i] && (sets.minimizer[i] || sets.expander[i]);
    match config.algorithm {
        Algorithm::StageOpt if post_switch => scan(&|i| -sets.objective_lower[i], &|i| sets.safe[i]),
        Algorithm::ShrinkAlgo if post_switch && !config.use_expander => scan(&width, &|i| sets.safe[i]),
        _ => scan(&width, &safeopt),
    }
}

/// Plant backed by a closure `p -> (O, C)`.
pub struct FnPlant<F>(pub F);

impl<F: FnMut(&[f64]) -> (f64, f64)> Plant for FnPlant<F> {
    fn evaluate(&mut self, point: &[f64], _context: Option<&[f64]>) -> Result<Measurement, PlantError> {
        let (objective, constraint) = (self.0)(point);
        Ok(Measurement { objective, constraint })
    }
}

/// Campaign on a random smooth 1-D or 2-D plant, advanced a random number
/// of iterations with a random acquisition rule. Not yet planned.
pub fn random_mid_campaign(seed: u64) -> safeopt_core::safe_bo::Campaign {
    use rand::{Rng, SeedableRng};
    use safeopt_core::safe_bo::{AxisSpec, Campaign, CampaignSetup, ParameterGrid, PriorPolicy};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dim = rng.random_range(1..=2);
    let axes: Vec<AxisSpec> = if dim == 1 {
        vec![AxisSpec::new(0.0, 1.0, rng.random_range(20..=400))]
    } else {
        (0..2).map(|_| AxisSpec::new(0.0, 1.0, rng.random_range(5..=50))).collect()
    };
    let grid = ParameterGrid::uniform(&axes).unwrap();
    let centre: Vec<f64> = (0..dim).map(|_| rng.random_range(0.3..0.7)).collect();
    let bumps: Vec<(Vec<f64>, f64)> = (0..4)
        .map(|_| ((0..dim).map(|_| rng.random_range(0.0..1.0)).collect(), rng.random_range(-1.0..1.0)))
        .collect();
    let curvature = rng.random_range(2.0..6.0);
    let c0 = centre.clone();
    let plant_fn = move |p: &[f64]| {
        let r2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
        let o = bumps.iter().map(|(m, a)| a * (-r2(p, m) / 0.02).exp()).sum::<f64>() + 0.3 * p[0];
        let c = -0.5 + curvature * r2(p, &c0) + 0.2 * (7.0 * p[0]).sin();
        (o, c)
    };
    let ls = |r: &mut rand_chacha::ChaCha8Rng| (0..dim).map(|_| r.random_range(0.15..0.4)).collect::<Vec<f64>>();
    let objective_spec = KernelSpec::new(0.0, 1.0, ls(&mut rng), 0.05).unwrap();
    let constraint_spec = KernelSpec::new(0.0, 1.0, ls(&mut rng), 0.02).unwrap();
    let iterations = rng.random_range(0..15);
    let config = match rng.random_range(0..3) {
        0 => AlgoConfig::safe_opt(0.0, 40),
        1 => AlgoConfig::stage_opt(0.0, rng.random_range(0..10), 40),
        _ => AlgoConfig::shrink_algo(0.0, 1.5, rng.random_range(0..10), 40, rng.random_bool(0.5)),
    };
    let init_points: Vec<Vec<f64>> = (0..rng.random_range(2..=4))
        .map(|_| centre.iter().map(|c| c + rng.random_range(-0.05..0.05)).collect())
        .collect();
    let mut plant = FnPlant(plant_fn);
    let setup = CampaignSetup { grid, objective_spec, constraint_spec, config, init_points, prior: PriorPolicy::default() };
    let mut campaign = Campaign::initialize(&mut plant, setup).expect("centre initializers are safe");
    for _ in 0..iterations {
        if campaign.step(&mut plant).is_err() {
            break;
        }
    }
    campaign
}
