use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::acquisition::{next_point_safeopt, next_point_shrink, next_point_stageopt};
use super::sets::{
    compute_expander_set, compute_minimizer_set, compute_safe_set, confidence_bounds, Bounds,
};
use super::{AlgoConfig, Algorithm, CampaignError, ParameterGrid};
use crate::gp::{GpError, GpModel, KernelSpec, Observation};

/// One plant measurement `(Ô, Ĉ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub objective: f64,
    pub constraint: f64,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PlantError {
    #[error("point outside the plant domain: {0}")]
    Domain(String),
    #[error("plant did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("malformed plant response {payload:?}: {reason}")]
    Malformed { payload: String, reason: String },
    #[error("plant reported an error: {0}")]
    Reported(String),
    #[error("plant I/O failure: {0}")]
    Io(String),
    #[error("plant simulation failed: {0}")]
    Simulation(String),
}

/// Anything that answers `(point, context) -> (Ô, Ĉ)`.
pub trait Plant {
    fn evaluate(&mut self, point: &[f64], context: Option<&[f64]>) -> Result<Measurement, PlantError>;

    fn description(&self) -> String {
        String::from("plant")
    }
}

impl<P: Plant + ?Sized> Plant for &mut P {
    fn evaluate(&mut self, point: &[f64], context: Option<&[f64]>) -> Result<Measurement, PlantError> {
        (**self).evaluate(point, context)
    }

    fn description(&self) -> String {
        (**self).description()
    }
}

impl<P: Plant + ?Sized> Plant for Box<P> {
    fn evaluate(&mut self, point: &[f64], context: Option<&[f64]>) -> Result<Measurement, PlantError> {
        (**self).evaluate(point, context)
    }

    fn description(&self) -> String {
        (**self).description()
    }
}

/// One row of the campaign history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// 0 for initializer evaluations.
    pub iteration: usize,
    pub point: Vec<f64>,
    pub context: Option<Vec<f64>>,
    pub grid_index: Option<usize>,
    pub objective: f64,
    pub constraint: f64,
    pub was_initializer: bool,
    /// Size of the safe set the point was selected from (S_i for initializers).
    pub safe_set_size: usize,
    /// Best feasible measured objective including this evaluation.
    pub best_so_far: Option<f64>,
}

/// How the constant prior means are chosen when the campaign starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum PriorMean {
    /// Keep the value stored in the kernel spec.
    #[default]
    FromSpec,
    /// Mean of the initializer measurements.
    InitializerMean,
    /// The safety threshold `T`.
    SafetyThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorPolicy {
    pub objective: PriorMean,
    pub constraint: PriorMean,
}

impl Default for PriorPolicy {
    fn default() -> Self {
        Self { objective: PriorMean::InitializerMean, constraint: PriorMean::SafetyThreshold }
    }
}

/// Models, sets and history of a running campaign.
#[derive(Debug, Clone)]
pub struct CampaignState {
    pub grid: ParameterGrid,
    pub objective_model: GpModel,
    pub constraint_model: GpModel,
    pub initial_safe_mask: Vec<bool>,
    pub safe_mask: Vec<bool>,
    pub minimizer_mask: Vec<bool>,
    pub expander_mask: Vec<bool>,
    /// Iteration currently being planned (1-based); 0 before the first one.
    pub iteration: usize,
    pub history: Vec<Evaluation>,
    pub objective_bounds: Bounds,
    pub constraint_bounds: Bounds,
}

impl CampaignState {
    pub fn new(
        grid: ParameterGrid,
        objective_model: GpModel,
        constraint_model: GpModel,
        initial_safe_mask: Vec<bool>,
    ) -> Self {
        let n = grid.len();
        Self {
            grid,
            objective_model,
            constraint_model,
            safe_mask: initial_safe_mask.clone(),
            initial_safe_mask,
            minimizer_mask: vec![false; n],
            expander_mask: vec![false; n],
            iteration: 0,
            history: Vec::new(),
            objective_bounds: Bounds::default(),
            constraint_bounds: Bounds::default(),
        }
    }

    pub fn refresh_bounds(&mut self, beta: f64) -> Result<(), GpError> {
        self.objective_bounds = confidence_bounds(&self.objective_model, &self.grid, beta)?;
        self.constraint_bounds = confidence_bounds(&self.constraint_model, &self.grid, beta)?;
        Ok(())
    }

    pub fn safe_set_size(&self) -> usize {
        self.safe_mask.iter().filter(|&&b| b).count()
    }

    /// Best feasible evaluation: minimal measured objective among
    /// evaluations whose measured constraint is at most `threshold`.
    pub fn best(&self, threshold: f64) -> Option<&Evaluation> {
        best_feasible(&self.history, threshold)
    }
}

pub fn best_feasible(history: &[Evaluation], threshold: f64) -> Option<&Evaluation> {
    history
        .iter()
        .filter(|e| e.constraint <= threshold)
        .fold(None, |best: Option<&Evaluation>, e| match best {
            Some(b) if b.objective <= e.objective => Some(b),
            _ => Some(e),
        })
}

/// What one iteration did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub iteration: usize,
    pub selected: usize,
    pub measurement: Measurement,
    pub safe_set_size: usize,
    pub minimizer_size: usize,
    pub expander_size: usize,
}

/// Final result of a campaign.
#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub history: Vec<Evaluation>,
    pub best: Option<Evaluation>,
    pub state: CampaignState,
}

/// Campaign failure with everything evaluated so far.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct CampaignAbort {
    pub error: CampaignError,
    pub history: Vec<Evaluation>,
}

/// Inputs of [`run_campaign`].
#[derive(Debug, Clone)]
pub struct CampaignSetup {
    pub grid: ParameterGrid,
    pub objective_spec: KernelSpec,
    pub constraint_spec: KernelSpec,
    pub config: AlgoConfig,
    pub init_points: Vec<Vec<f64>>,
    pub prior: PriorPolicy,
}

/// Sequential safe optimization loop over a fixed grid.
#[derive(Debug, Clone)]
pub struct Campaign {
    state: CampaignState,
    config: AlgoConfig,
}

impl Campaign {
    /// Evaluates the initializers, fits both models and derives `S_i`.
    pub fn initialize<P: Plant + ?Sized>(plant: &mut P, setup: CampaignSetup) -> Result<Self, CampaignAbort> {
        let mut history = Vec::new();
        Self::initialize_inner(plant, setup, &mut history)
            .map_err(|error| CampaignAbort { error, history })
    }

    fn initialize_inner<P: Plant + ?Sized>(
        plant: &mut P,
        setup: CampaignSetup,
        history: &mut Vec<Evaluation>,
    ) -> Result<Self, CampaignError> {
        let CampaignSetup { grid, objective_spec, constraint_spec, config, init_points, prior } = setup;
        config.validate()?;
        if init_points.is_empty() {
            return Err(CampaignError::Input("at least one initial point is required".into()));
        }
        check_specs(&grid, &objective_spec, &constraint_spec)?;
        let context = grid.context().map(<[f64]>::to_vec);
        for p in &init_points {
            if p.len() != grid.dim() {
                return Err(CampaignError::Input(format!(
                    "initial point {p:?} has dimension {}, grid has {}",
                    p.len(),
                    grid.dim()
                )));
            }
            let m = plant.evaluate(p, context.as_deref())?;
            check_measurement(&m)?;
            history.push(Evaluation {
                iteration: 0,
                point: p.clone(),
                context: context.clone(),
                grid_index: grid.contains(p).then(|| grid.nearest_index(p)).flatten(),
                objective: m.objective,
                constraint: m.constraint,
                was_initializer: true,
                safe_set_size: 0,
                best_so_far: None,
            });
        }
        let n = history.len() as f64;
        let init_mean = history.iter().map(|e| e.objective).sum::<f64>() / n;
        let init_con_mean = history.iter().map(|e| e.constraint).sum::<f64>() / n;
        let resolve = |policy: PriorMean, spec: &KernelSpec, init: f64| match policy {
            PriorMean::FromSpec => spec.prior_mean,
            PriorMean::InitializerMean => init,
            PriorMean::SafetyThreshold => config.safety_threshold,
        };
        let objective_spec = objective_spec.clone().with_prior_mean(resolve(prior.objective, &objective_spec, init_mean));
        let constraint_spec = constraint_spec
            .clone()
            .with_prior_mean(resolve(prior.constraint, &constraint_spec, init_con_mean));
        if !objective_spec.prior_mean.is_finite() || !constraint_spec.prior_mean.is_finite() {
            return Err(CampaignError::Input("prior mean resolved to a non-finite value".into()));
        }
        let obj_obs: Vec<Observation> = history.iter().map(|e| observation(e, e.objective)).collect();
        let con_obs: Vec<Observation> = history.iter().map(|e| observation(e, e.constraint)).collect();
        let objective_model = GpModel::from_observations(objective_spec, &obj_obs)?;
        let constraint_model = GpModel::from_observations(constraint_spec, &con_obs)?;

        let con = confidence_bounds(&constraint_model, &grid, config.confidence_multiplier)?;
        let mut initial: Vec<bool> = con.upper.iter().map(|&u| u < config.safety_threshold).collect();
        if !initial.iter().any(|&b| b) {
            // fall back to the grid cells of initializers measured safe
            for e in history.iter().filter(|e| e.constraint < config.safety_threshold) {
                if let Some(i) = e.grid_index {
                    initial[i] = true;
                }
            }
        }
        let s_i = initial.iter().filter(|&&b| b).count();
        if s_i == 0 {
            return Err(CampaignError::NoSafeSet {
                iteration: 0,
                hint: "initial points do not certify any grid point; add safe initial points",
            });
        }
        let mut best: Option<f64> = None;
        for e in history.iter_mut() {
            e.safe_set_size = s_i;
            if e.constraint <= config.safety_threshold {
                best = Some(best.map_or(e.objective, |b: f64| b.min(e.objective)));
            }
            e.best_so_far = best;
        }
        info!("initial safe set has {s_i} of {} grid points", grid.len());
        let mut state = CampaignState::new(grid, objective_model, constraint_model, initial);
        state.history = std::mem::take(history);
        Ok(Self { state, config })
    }

    /// Continues from previous evaluations recorded at other contexts; the
    /// grid carries the new context. No initializers are evaluated.
    pub fn from_transfer(
        previous: &[Evaluation],
        grid: ParameterGrid,
        objective_spec: KernelSpec,
        constraint_spec: KernelSpec,
        config: AlgoConfig,
    ) -> Result<Self, CampaignError> {
        config.validate()?;
        if grid.context().is_none() {
            return Err(CampaignError::Input("transfer target grid needs a context".into()));
        }
        if !objective_spec.is_contextual() || !constraint_spec.is_contextual() {
            return Err(CampaignError::Input("transfer requires contextual kernels".into()));
        }
        check_specs(&grid, &objective_spec, &constraint_spec)?;
        if let Some(e) = previous.iter().find(|e| e.context.is_none()) {
            return Err(CampaignError::Input(format!(
                "previous evaluation at {:?} carries no context tag",
                e.point
            )));
        }
        let obj_obs: Vec<Observation> = previous.iter().map(|e| observation(e, e.objective)).collect();
        let con_obs: Vec<Observation> = previous.iter().map(|e| observation(e, e.constraint)).collect();
        let objective_model = GpModel::from_observations(objective_spec, &obj_obs)?;
        let constraint_model = GpModel::from_observations(constraint_spec, &con_obs)?;
        let con = confidence_bounds(&constraint_model, &grid, config.confidence_multiplier)?;
        let initial: Vec<bool> = con.upper.iter().map(|&u| u < config.safety_threshold).collect();
        if !initial.iter().any(|&b| b) {
            return Err(CampaignError::NoSafeSet {
                iteration: 0,
                hint: "transferred data certifies no grid point at the new context",
            });
        }
        Ok(Self {
            state: CampaignState::new(grid, objective_model, constraint_model, initial),
            config,
        })
    }

    pub fn state(&self) -> &CampaignState {
        &self.state
    }

    pub fn config(&self) -> &AlgoConfig {
        &self.config
    }

    pub fn history(&self) -> &[Evaluation] {
        &self.state.history
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.config.max_iterations
    }

    /// Computes bounds and sets for the next iteration without evaluating.
    pub fn plan(&mut self) -> Result<usize, CampaignError> {
        let config = &self.config;
        let state = &mut self.state;
        state.iteration += 1;
        state.refresh_bounds(config.confidence_multiplier)?;
        state.safe_mask = compute_safe_set(state, config)?;
        state.minimizer_mask = compute_minimizer_set(state);
        let needs_expander = match config.algorithm {
            Algorithm::SafeOpt | Algorithm::StageOpt => true,
            Algorithm::ShrinkAlgo => !config.shrink_active(state.iteration) || config.use_expander,
        };
        state.expander_mask = if needs_expander {
            compute_expander_set(state, config)?
        } else {
            vec![false; state.grid.len()]
        };
        let selected = match config.algorithm {
            Algorithm::SafeOpt => next_point_safeopt(state)?,
            Algorithm::StageOpt if config.after_switch(state.iteration) => next_point_stageopt(state)?,
            Algorithm::StageOpt => next_point_safeopt(state)?,
            Algorithm::ShrinkAlgo if config.shrink_active(state.iteration) => next_point_shrink(state, config)?,
            Algorithm::ShrinkAlgo => next_point_safeopt(state)?,
        };
        assert!(state.safe_mask[selected], "selected point {selected} is outside the safe set");
        Ok(selected)
    }

    /// Evaluates grid point `selected` and conditions both models on it.
    pub fn commit<P: Plant + ?Sized>(&mut self, plant: &mut P, selected: usize) -> Result<StepReport, CampaignError> {
        let state = &mut self.state;
        let point = state.grid.point(selected).to_vec();
        let context = state.grid.context().map(<[f64]>::to_vec);
        let m = plant.evaluate(&point, context.as_deref())?;
        check_measurement(&m)?;
        let prev_best = state.history.last().and_then(|e| e.best_so_far);
        let best_so_far = if m.constraint <= self.config.safety_threshold {
            Some(prev_best.map_or(m.objective, |b| b.min(m.objective)))
        } else {
            prev_best
        };
        let eval = Evaluation {
            iteration: state.iteration,
            point,
            context,
            grid_index: Some(selected),
            objective: m.objective,
            constraint: m.constraint,
            was_initializer: false,
            safe_set_size: state.safe_set_size(),
            best_so_far,
        };
        state.objective_model.add_observation(observation(&eval, m.objective))?;
        state.constraint_model.add_observation(observation(&eval, m.constraint))?;
        debug!(
            "iteration {}: point {:?} -> O = {:.4}, C = {:.4}",
            eval.iteration, eval.point, m.objective, m.constraint
        );
        state.history.push(eval);
        Ok(StepReport {
            iteration: state.iteration,
            selected,
            measurement: m,
            safe_set_size: state.safe_set_size(),
            minimizer_size: state.minimizer_mask.iter().filter(|&&b| b).count(),
            expander_size: state.expander_mask.iter().filter(|&&b| b).count(),
        })
    }

    pub fn step<P: Plant + ?Sized>(&mut self, plant: &mut P) -> Result<StepReport, CampaignError> {
        let selected = self.plan()?;
        self.commit(plant, selected)
    }

    pub fn run<P: Plant + ?Sized>(mut self, plant: &mut P) -> Result<CampaignOutcome, CampaignAbort> {
        while !self.is_finished() {
            if let Err(error) = self.step(plant) {
                return Err(CampaignAbort { error, history: self.state.history });
            }
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> CampaignOutcome {
        let best = self.state.best(self.config.safety_threshold).cloned();
        CampaignOutcome { history: self.state.history.clone(), best, state: self.state }
    }
}

/// Initializes and runs a campaign to `max_iterations`.
pub fn run_campaign<P: Plant + ?Sized>(plant: &mut P, setup: CampaignSetup) -> Result<CampaignOutcome, CampaignAbort> {
    Campaign::initialize(plant, setup)?.run(plant)
}

fn observation(e: &Evaluation, value: f64) -> Observation {
    Observation { point: e.point.clone(), context: e.context.clone(), value }
}

fn check_measurement(m: &Measurement) -> Result<(), CampaignError> {
    if m.objective.is_finite() && m.constraint.is_finite() {
        Ok(())
    } else {
        Err(PlantError::Malformed {
            payload: format!("{} {}", m.objective, m.constraint),
            reason: "non-finite measurement".into(),
        }
        .into())
    }
}

fn check_specs(grid: &ParameterGrid, objective: &KernelSpec, constraint: &KernelSpec) -> Result<(), CampaignError> {
    let ctx_dim = grid.context().map_or(0, <[f64]>::len);
    for (name, spec) in [("objective", objective), ("constraint", constraint)] {
        spec.validate()?;
        if spec.param_dim() != grid.dim() {
            return Err(CampaignError::Input(format!(
                "{name} kernel has {} length scales, grid has {} axes",
                spec.param_dim(),
                grid.dim()
            )));
        }
        if spec.context_dim() != ctx_dim {
            return Err(CampaignError::Input(format!(
                "{name} kernel expects {} context coordinate(s), grid provides {ctx_dim}",
                spec.context_dim()
            )));
        }
    }
    Ok(())
}
