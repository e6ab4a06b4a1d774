use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CampaignError;

/// Acquisition loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Algorithm {
    SafeOpt,
    StageOpt,
    ShrinkAlgo,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::SafeOpt => "safeOpt",
            Algorithm::StageOpt => "stageOpt",
            Algorithm::ShrinkAlgo => "shrinkAlgo",
        })
    }
}

impl FromStr for Algorithm {
    type Err = CampaignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "safeopt" => Ok(Algorithm::SafeOpt),
            "stageopt" => Ok(Algorithm::StageOpt),
            "shrinkalgo" | "shrink" | "shrinking" => Ok(Algorithm::ShrinkAlgo),
            _ => Err(CampaignError::Input(format!("unknown algorithm `{s}`"))),
        }
    }
}

fn default_beta() -> f64 {
    2.0
}

/// Settings of one acquisition campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub algorithm: Algorithm,
    /// Constraint threshold `T`.
    pub safety_threshold: f64,
    /// Objective threshold `T_o`; shrinkAlgo only.
    #[serde(default)]
    pub objective_threshold: Option<f64>,
    /// Last iteration run with the safeOpt rule (`N_s`).
    #[serde(default)]
    pub switch_iteration: usize,
    pub max_iterations: usize,
    #[serde(default = "default_beta")]
    pub confidence_multiplier: f64,
    /// shrinkAlgo: keep computing expanders after the switch.
    #[serde(default)]
    pub use_expander: bool,
}

impl AlgoConfig {
    pub fn safe_opt(safety_threshold: f64, max_iterations: usize) -> Self {
        Self {
            algorithm: Algorithm::SafeOpt,
            safety_threshold,
            objective_threshold: None,
            switch_iteration: 0,
            max_iterations,
            confidence_multiplier: 2.0,
            use_expander: true,
        }
    }

    pub fn stage_opt(safety_threshold: f64, switch_iteration: usize, max_iterations: usize) -> Self {
        Self {
            algorithm: Algorithm::StageOpt,
            switch_iteration,
            ..Self::safe_opt(safety_threshold, max_iterations)
        }
    }

    pub fn shrink_algo(
        safety_threshold: f64,
        objective_threshold: f64,
        switch_iteration: usize,
        max_iterations: usize,
        use_expander: bool,
    ) -> Self {
        Self {
            algorithm: Algorithm::ShrinkAlgo,
            objective_threshold: Some(objective_threshold),
            switch_iteration,
            use_expander,
            ..Self::safe_opt(safety_threshold, max_iterations)
        }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        let bad = |msg: String| Err(CampaignError::Input(msg));
        if self.safety_threshold.is_nan() {
            return bad("safety threshold is NaN".into());
        }
        if !(self.confidence_multiplier.is_finite() && self.confidence_multiplier > 0.0) {
            return bad(format!(
                "confidence multiplier must be positive, got {}",
                self.confidence_multiplier
            ));
        }
        if self.algorithm != Algorithm::SafeOpt
            && self.max_iterations > 0
            && self.switch_iteration >= self.max_iterations
        {
            return bad(format!(
                "switch iteration {} must be below max iterations {}",
                self.switch_iteration, self.max_iterations
            ));
        }
        match (self.algorithm, self.objective_threshold) {
            (Algorithm::ShrinkAlgo, None) => bad("shrinkAlgo requires an objective threshold".into()),
            (Algorithm::ShrinkAlgo, Some(t)) if t.is_nan() => bad("objective threshold is NaN".into()),
            (Algorithm::SafeOpt | Algorithm::StageOpt, Some(_)) => {
                bad(format!("objective threshold is only used by shrinkAlgo, not {}", self.algorithm))
            }
            _ => Ok(()),
        }
    }

    /// True when iteration `iteration` (1-based) runs the post-switch rule.
    pub fn after_switch(&self, iteration: usize) -> bool {
        self.algorithm != Algorithm::SafeOpt && iteration > self.switch_iteration
    }

    pub fn shrink_active(&self, iteration: usize) -> bool {
        self.algorithm == Algorithm::ShrinkAlgo && iteration > self.switch_iteration
    }
}
