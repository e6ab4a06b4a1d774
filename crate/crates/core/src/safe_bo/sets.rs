//! Confidence bounds and the safe, minimizer and expander sets over the grid.

use rayon::prelude::*;

use super::{AlgoConfig, CampaignError, CampaignState, ParameterGrid};
use crate::gp::{GpError, GpModel};

/// Pointwise confidence interval `μ ± βσ` over a grid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bounds {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl Bounds {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// `U − L` at grid index `i`.
    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }
}

pub fn confidence_bounds(model: &GpModel, grid: &ParameterGrid, beta: f64) -> Result<Bounds, GpError> {
    let post = model.posterior(grid.inputs())?;
    let mean: Vec<f64> = post.iter().map(|p| p.mean).collect();
    let std: Vec<f64> = post.iter().map(|p| p.std()).collect();
    let upper = mean.iter().zip(&std).map(|(m, s)| m + beta * s).collect();
    let lower = mean.iter().zip(&std).map(|(m, s)| m - beta * s).collect();
    Ok(Bounds { mean, std, upper, lower })
}

/// Safe set for the iteration currently being planned.
///
/// Before the shrinkAlgo switch this is `S_i ∪ {U^c < T}`; afterwards it is
/// `{U^c < T and U^o < T_o}` without the initial set.
pub fn compute_safe_set(state: &CampaignState, config: &AlgoConfig) -> Result<Vec<bool>, CampaignError> {
    let t = config.safety_threshold;
    let uc = &state.constraint_bounds.upper;
    let mask: Vec<bool> = if config.shrink_active(state.iteration) {
        let t_o = config
            .objective_threshold
            .ok_or_else(|| CampaignError::Input("shrinkAlgo requires an objective threshold".into()))?;
        let uo = &state.objective_bounds.upper;
        uc.iter().zip(uo).map(|(&c, &o)| c < t && o < t_o).collect()
    } else {
        uc.iter()
            .zip(&state.initial_safe_mask)
            .map(|(&c, &init)| init || c < t)
            .collect()
    };
    if !mask.iter().any(|&b| b) {
        let hint = if config.shrink_active(state.iteration) {
            "no point satisfies both thresholds; raise the objective threshold or the switch iteration"
        } else {
            "initial points do not certify any grid point; add safe initial points"
        };
        return Err(CampaignError::NoSafeSet { iteration: state.iteration, hint });
    }
    Ok(mask)
}

/// Safe points whose objective lower bound undercuts the best safe upper bound.
pub fn compute_minimizer_set(state: &CampaignState) -> Vec<bool> {
    let b = &state.objective_bounds;
    let best_upper = state
        .safe_mask
        .iter()
        .zip(&b.upper)
        .filter(|(&s, _)| s)
        .map(|(_, &u)| u)
        .fold(f64::INFINITY, f64::min);
    state
        .safe_mask
        .iter()
        .zip(&b.lower)
        .map(|(&s, &l)| s && l < best_upper)
        .collect()
}

/// Number of currently unsafe points that a hypothetical constraint
/// measurement `L^c(p)` at each safe point `p` would certify as safe.
/// Entries for unsafe points are zero.
pub fn expander_counts(state: &CampaignState, config: &AlgoConfig) -> Result<Vec<usize>, CampaignError> {
    expander_scan(state, config, false)
}

pub fn compute_expander_set(state: &CampaignState, config: &AlgoConfig) -> Result<Vec<bool>, CampaignError> {
    Ok(expander_scan(state, config, true)?.into_iter().map(|c| c > 0).collect())
}

fn expander_scan(
    state: &CampaignState,
    config: &AlgoConfig,
    stop_at_first: bool,
) -> Result<Vec<usize>, CampaignError> {
    let beta = config.confidence_multiplier;
    let t = config.safety_threshold;
    let unsafe_idx: Vec<usize> = (0..state.grid.len()).filter(|&j| !state.safe_mask[j]).collect();
    if unsafe_idx.is_empty() {
        return Ok(vec![0; state.grid.len()]);
    }
    let batch = state.constraint_model.batch_posterior(state.grid.inputs())?;
    let counts = (0..state.grid.len())
        .into_par_iter()
        .map(|i| {
            if !state.safe_mask[i] {
                return 0;
            }
            let pi = batch.get(i);
            let optimistic = pi.mean - beta * pi.std();
            let mut count = 0;
            for &j in &unsafe_idx {
                let post = batch.conditioned(i, optimistic, j);
                if post.mean + beta * post.std() < t {
                    count += 1;
                    if stop_at_first {
                        break;
                    }
                }
            }
            count
        })
        .collect();
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelSpec, Observation};
    use crate::safe_bo::{AxisSpec, ParameterGrid};

    fn state_with(
        grid: ParameterGrid,
        obj: GpModel,
        con: GpModel,
        initial: Vec<bool>,
        beta: f64,
    ) -> CampaignState {
        let mut s = CampaignState::new(grid, obj, con, initial);
        s.refresh_bounds(beta).unwrap();
        s
    }

    fn grid(n: usize) -> ParameterGrid {
        ParameterGrid::uniform(&[AxisSpec::new(0.0, 10.0, n)]).unwrap()
    }

    #[test]
    fn prior_bounds() {
        let spec = KernelSpec::new(4.0, 0.25, vec![1.0], 0.01).unwrap();
        let m = GpModel::new(spec).unwrap();
        let b = confidence_bounds(&m, &grid(11), 2.0).unwrap();
        for i in 0..11 {
            assert!((b.upper[i] - 5.0).abs() < 1e-12);
            assert!((b.lower[i] - 3.0).abs() < 1e-12);
            assert!((b.width(i) - 4.0 * 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn infinite_threshold_makes_everything_safe() {
        let spec = KernelSpec::new(4.0, 1.0, vec![1.0], 0.01).unwrap();
        let g = grid(21);
        let s = state_with(g, GpModel::new(spec.clone()).unwrap(), GpModel::new(spec).unwrap(), vec![false; 21], 2.0);
        let cfg = AlgoConfig::safe_opt(f64::INFINITY, 10);
        assert!(compute_safe_set(&s, &cfg).unwrap().iter().all(|&b| b));
    }

    #[test]
    fn uncertain_prior_leaves_only_initial_set() {
        let spec = KernelSpec::new(4.0, 1.0, vec![1.0], 0.01).unwrap();
        let mut initial = vec![false; 21];
        initial[3] = true;
        let s = state_with(grid(21), GpModel::new(spec.clone()).unwrap(), GpModel::new(spec).unwrap(), initial.clone(), 2.0);
        let mask = compute_safe_set(&s, &AlgoConfig::safe_opt(4.0, 10)).unwrap();
        assert_eq!(mask, initial);
    }

    #[test]
    fn empty_safe_set_is_an_error() {
        let spec = KernelSpec::new(4.0, 1.0, vec![1.0], 0.01).unwrap();
        let s = state_with(grid(5), GpModel::new(spec.clone()).unwrap(), GpModel::new(spec).unwrap(), vec![false; 5], 2.0);
        assert!(matches!(
            compute_safe_set(&s, &AlgoConfig::safe_opt(4.0, 10)),
            Err(CampaignError::NoSafeSet { .. })
        ));
    }

    #[test]
    fn single_safe_point_is_a_minimizer() {
        let spec = KernelSpec::new(0.0, 1.0, vec![1.0], 0.01).unwrap();
        let mut s = state_with(grid(5), GpModel::new(spec.clone()).unwrap(), GpModel::new(spec).unwrap(), vec![false; 5], 2.0);
        s.safe_mask = vec![false, false, true, false, false];
        assert_eq!(compute_minimizer_set(&s), s.safe_mask);
    }

    #[test]
    fn no_expanders_when_all_safe() {
        let spec = KernelSpec::new(0.0, 1.0, vec![1.0], 0.01).unwrap();
        let mut s = state_with(grid(9), GpModel::new(spec.clone()).unwrap(), GpModel::new(spec).unwrap(), vec![true; 9], 2.0);
        s.safe_mask = vec![true; 9];
        let e = compute_expander_set(&s, &AlgoConfig::safe_opt(0.5, 10)).unwrap();
        assert!(e.iter().all(|&b| !b));
    }

    #[test]
    fn no_expanders_when_decorrelated() {
        // constraint length scale far below the gap between safe and unsafe points
        let spec = KernelSpec::new(4.0, 1.0, vec![0.01], 0.01).unwrap();
        let g = grid(11);
        let mut con = GpModel::new(spec.clone()).unwrap();
        for i in 4..7 {
            con.add_observation(Observation::new(g.point(i).to_vec(), 1.0)).unwrap();
        }
        let mut s = state_with(g, GpModel::new(spec.clone()).unwrap(), con, vec![false; 11], 2.0);
        let cfg = AlgoConfig::safe_opt(4.0, 10);
        s.safe_mask = compute_safe_set(&s, &cfg).unwrap();
        assert_eq!(s.safe_mask.iter().filter(|&&b| b).count(), 3);
        let e = compute_expander_set(&s, &cfg).unwrap();
        assert!(e.iter().all(|&b| !b));
    }
}
