//! Next-point selection rules. Ties resolve to the lowest grid index.

use super::{AlgoConfig, CampaignError, CampaignState};

fn argmax_by<F: Fn(usize) -> f64>(candidates: impl Iterator<Item = usize>, score: F) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in candidates {
        let s = score(i);
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

/// Maximum objective uncertainty over `M_n ∪ E_n`.
pub fn next_point_safeopt(state: &CampaignState) -> Result<usize, CampaignError> {
    let b = &state.objective_bounds;
    let candidates = (0..state.grid.len())
        .filter(|&i| (state.minimizer_mask[i] || state.expander_mask[i]) && state.safe_mask[i]);
    argmax_by(candidates, |i| b.width(i)).ok_or(CampaignError::NoCandidates {
        iteration: state.iteration,
    })
}

/// Minimum objective lower confidence bound over the current safe set.
pub fn next_point_stageopt(state: &CampaignState) -> Result<usize, CampaignError> {
    let b = &state.objective_bounds;
    let candidates = (0..state.grid.len()).filter(|&i| state.safe_mask[i]);
    argmax_by(candidates, |i| -b.lower[i]).ok_or(CampaignError::NoSafeSet {
        iteration: state.iteration,
        hint: "stageOpt has no safe point to exploit",
    })
}

/// shrinkAlgo rule: maximum uncertainty over the shrunk safe set, or the
/// safeOpt rule when expanders are kept.
pub fn next_point_shrink(state: &CampaignState, config: &AlgoConfig) -> Result<usize, CampaignError> {
    if config.use_expander {
        return next_point_safeopt(state);
    }
    let b = &state.objective_bounds;
    let candidates = (0..state.grid.len()).filter(|&i| state.safe_mask[i]);
    argmax_by(candidates, |i| b.width(i)).ok_or(CampaignError::NoSafeSet {
        iteration: state.iteration,
        hint: "shrunk safe set is empty; raise the objective threshold or the switch iteration",
    })
}
