use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::safe_bo::{Measurement, Plant, PlantError};

/// Objective shared by both demos: two minima on `[0, 10]`, the deeper one
/// near `p = 7.42`.
pub fn demo_objective(p: f64) -> f64 {
    100.0 * (3.0 * (2.0 * (p + 1.0).powf(0.8)).sin() - 0.4 * p + 7.0)
}

fn demo1_constraint(p: f64) -> f64 {
    10.0 / (p + 2.0).powf(0.4) + 0.1 * (p - 3.0).powi(2) - 4.0
}

fn demo2_constraint(p: f64) -> f64 {
    10.0 / (p + 2.0).powf(0.4) + 0.1 * (p - 4.0).powi(2) * (1.0 - 0.7 * (0.55 * p).sin()) - 4.0
}

fn check_domain(p: f64, lo: f64, hi: f64) -> Result<(), PlantError> {
    if p.is_finite() && (lo..=hi).contains(&p) {
        Ok(())
    } else {
        Err(PlantError::Domain(format!("p = {p} outside [{lo}, {hi}]")))
    }
}

/// Noise-free `(O, C)` of the single-safe-region demo on `[0, 10]`.
pub fn demo1_eval(p: f64) -> Result<(f64, f64), PlantError> {
    check_domain(p, 0.0, 10.0)?;
    Ok((demo_objective(p), demo1_constraint(p)))
}

/// Noise-free `(O, C)` of the two-safe-region demo on `[0, 16]`.
pub fn demo2_eval(p: f64) -> Result<(f64, f64), PlantError> {
    check_domain(p, 0.0, 16.0)?;
    Ok((demo_objective(p), demo2_constraint(p)))
}

/// Reference context of [`DemoFunction::ContextShift`].
pub const CONTEXT_REFERENCE: f64 = 0.753;

/// Closed-form benchmark functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoFunction {
    Demo1,
    Demo2,
    /// demo_1 objective with a constraint whose bowl moves with the context:
    /// `C(p, z) = 10/(p+2)^0.4 + 0.1 (p − 3 − s (z − 0.753))² − 4`.
    ContextShift { shift_per_unit: f64 },
}

impl DemoFunction {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            DemoFunction::Demo1 | DemoFunction::ContextShift { .. } => (0.0, 10.0),
            DemoFunction::Demo2 => (0.0, 16.0),
        }
    }

    pub fn eval(&self, p: f64, context: Option<f64>) -> Result<(f64, f64), PlantError> {
        match *self {
            DemoFunction::Demo1 => demo1_eval(p),
            DemoFunction::Demo2 => demo2_eval(p),
            DemoFunction::ContextShift { shift_per_unit } => {
                check_domain(p, 0.0, 10.0)?;
                let z = context.ok_or_else(|| PlantError::Domain("context plant needs a context".into()))?;
                let center = 3.0 + shift_per_unit * (z - CONTEXT_REFERENCE);
                let c = 10.0 / (p + 2.0).powf(0.4) + 0.1 * (p - center).powi(2) - 4.0;
                Ok((demo_objective(p), c))
            }
        }
    }
}

/// Analytic plant with seeded Gaussian measurement noise. The noise sequence
/// depends only on the seed and the call index.
#[derive(Debug, Clone)]
pub struct AnalyticPlant {
    pub function: DemoFunction,
    pub noise_std_o: f64,
    pub noise_std_c: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl AnalyticPlant {
    pub fn new(function: DemoFunction, noise_std_o: f64, noise_std_c: f64, seed: u64) -> Self {
        assert!(noise_std_o >= 0.0 && noise_std_c >= 0.0, "noise must be non-negative");
        Self {
            function,
            noise_std_o,
            noise_std_c,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn noise_free(function: DemoFunction) -> Self {
        Self::new(function, 0.0, 0.0, 0)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn noise(&mut self, std: f64) -> f64 {
        if std == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, std).expect("finite std").sample(&mut self.rng)
    }
}

impl Plant for AnalyticPlant {
    fn evaluate(&mut self, point: &[f64], context: Option<&[f64]>) -> Result<Measurement, PlantError> {
        let [p] = point else {
            return Err(PlantError::Domain(format!("expected a 1-D point, got {point:?}")));
        };
        let z = context.and_then(|c| c.first().copied());
        let (o, c) = self.function.eval(*p, z)?;
        // draw both noises on every call so the sequence is call-indexed
        let eo = self.noise(self.noise_std_o);
        let ec = self.noise(self.noise_std_c);
        Ok(Measurement { objective: o + eo, constraint: c + ec })
    }

    fn description(&self) -> String {
        format!(
            "{:?} (noise σ_o = {}, σ_c = {}, seed {})",
            self.function, self.noise_std_o, self.noise_std_c, self.seed
        )
    }
}
