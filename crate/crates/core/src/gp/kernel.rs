use serde::{Deserialize, Serialize};

use super::GpError;

/// Smallest noise variance handed to the solver.
pub const NOISE_VARIANCE_FLOOR: f64 = 1e-10;

/// Hyperparameters of a squared-exponential kernel with an optional
/// multiplicative context factor.
///
/// Inputs handed to the kernel are flat slices: the control parameters first,
/// followed by the context coordinates when the kernel is contextual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Constant prior mean `K`.
    pub prior_mean: f64,
    /// Signal variance `θ`; `k(p, p) = θ`.
    pub amplitude: f64,
    /// Diagonal of the length-scale matrix, one entry per parameter.
    pub length_scales: Vec<f64>,
    /// Length scales of the unit-amplitude context kernel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_length_scales: Option<Vec<f64>>,
    /// Standard deviation of the measurement noise.
    pub noise_std: f64,
}

impl KernelSpec {
    pub fn new(
        prior_mean: f64,
        amplitude: f64,
        length_scales: Vec<f64>,
        noise_std: f64,
    ) -> Result<Self, GpError> {
        let spec = Self {
            prior_mean,
            amplitude,
            length_scales,
            context_length_scales: None,
            noise_std,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Turns the kernel into a contextual product kernel.
    pub fn with_context(mut self, context_length_scales: Vec<f64>) -> Result<Self, GpError> {
        self.context_length_scales = Some(context_length_scales);
        self.validate()?;
        Ok(self)
    }

    pub fn with_prior_mean(mut self, prior_mean: f64) -> Self {
        self.prior_mean = prior_mean;
        self
    }

    pub fn validate(&self) -> Result<(), GpError> {
        if self.length_scales.is_empty() {
            return Err(GpError::InvalidSpec("at least one length scale is required".into()));
        }
        if self.length_scales.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(GpError::InvalidSpec(format!(
                "length scales must be positive, got {:?}",
                self.length_scales
            )));
        }
        if let Some(ctx) = &self.context_length_scales {
            if ctx.is_empty() || ctx.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                return Err(GpError::InvalidSpec(format!(
                    "context length scales must be positive, got {ctx:?}"
                )));
            }
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(GpError::InvalidSpec(format!(
                "amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(GpError::InvalidSpec(format!(
                "noise_std must be >= 0, got {}",
                self.noise_std
            )));
        }
        if !self.prior_mean.is_finite() {
            return Err(GpError::InvalidSpec("prior mean must be finite".into()));
        }
        Ok(())
    }

    pub fn param_dim(&self) -> usize {
        self.length_scales.len()
    }

    pub fn context_dim(&self) -> usize {
        self.context_length_scales.as_ref().map_or(0, Vec::len)
    }

    /// Length of the flat input vectors this kernel accepts.
    pub fn input_dim(&self) -> usize {
        self.param_dim() + self.context_dim()
    }

    pub fn is_contextual(&self) -> bool {
        self.context_length_scales.is_some()
    }

    /// Noise variance used by the solver, floored at [`NOISE_VARIANCE_FLOOR`].
    pub fn noise_variance(&self) -> f64 {
        (self.noise_std * self.noise_std).max(NOISE_VARIANCE_FLOOR)
    }

    /// Covariance between two flat inputs. Dimensions are not checked.
    #[inline]
    pub fn covariance(&self, a: &[f64], b: &[f64]) -> f64 {
        let d = self.param_dim();
        let mut d2 = scaled_sq_dist(&a[..d], &b[..d], &self.length_scales);
        if let Some(ctx) = &self.context_length_scales {
            d2 += scaled_sq_dist(&a[d..], &b[d..], ctx);
        }
        self.amplitude * (-0.5 * d2).exp()
    }

    /// Unit-amplitude context factor `k_φ(z, z')`.
    pub fn context_factor(&self, z: &[f64], z_other: &[f64]) -> Result<f64, GpError> {
        let ctx = self
            .context_length_scales
            .as_ref()
            .ok_or_else(|| GpError::InvalidSpec("kernel has no context dimension".into()))?;
        if z.len() != ctx.len() || z_other.len() != ctx.len() {
            return Err(GpError::DimensionMismatch {
                expected: ctx.len(),
                got: if z.len() != ctx.len() { z.len() } else { z_other.len() },
            });
        }
        Ok((-0.5 * scaled_sq_dist(z, z_other, ctx)).exp())
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<(), GpError> {
        if x.len() != self.input_dim() {
            return Err(GpError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(GpError::NonFinite("input coordinate"));
        }
        Ok(())
    }
}

#[inline]
fn scaled_sq_dist(a: &[f64], b: &[f64], scales: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(scales)
        .map(|((x, y), l)| {
            let r = (x - y) / l;
            r * r
        })
        .sum()
}

/// Checked kernel evaluation `k([p, z], [p', z'])`.
pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64, GpError> {
    spec.check_input(a)?;
    spec.check_input(b)?;
    Ok(spec.covariance(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(theta: f64, l: f64) -> KernelSpec {
        KernelSpec::new(0.0, theta, vec![l], 0.0).unwrap()
    }

    #[test]
    fn zero_distance_returns_amplitude() {
        let s = spec(450.0, 0.2);
        assert_eq!(kernel_eval(&s, &[1.3], &[1.3]).unwrap(), 450.0);
    }

    #[test]
    fn one_length_scale_apart() {
        let s = spec(450.0, 0.2);
        let k = kernel_eval(&s, &[0.0], &[0.2]).unwrap();
        assert!((k - 450.0 * (-0.5f64).exp()).abs() < 1e-12);
        assert!((k - 272.939).abs() < 1e-3);
    }

    #[test]
    fn context_factor_multiplies_without_extra_amplitude() {
        let s = spec(450.0, 0.2).with_context(vec![0.1]).unwrap();
        let k = kernel_eval(&s, &[0.0, 0.5], &[0.2, 0.6]).unwrap();
        assert!((k - 450.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!((k - 165.546).abs() < 1e-3);
    }

    #[test]
    fn context_factor_for_equivalence_ratio_gap() {
        let s = spec(1.0, 1.0).with_context(vec![0.1]).unwrap();
        let f = s.context_factor(&[0.753], &[0.684]).unwrap();
        assert!((f - (-(0.069f64).powi(2) / (2.0 * 0.01)).exp()).abs() < 1e-15);
        assert!((f - 0.788).abs() < 5e-4);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let s = spec(1.0, 1.0);
        assert!(matches!(
            kernel_eval(&s, &[0.0, 1.0], &[0.0]),
            Err(GpError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn invalid_hyperparameters_are_rejected() {
        assert!(KernelSpec::new(0.0, 1.0, vec![0.0], 0.1).is_err());
        assert!(KernelSpec::new(0.0, -1.0, vec![1.0], 0.1).is_err());
        assert!(KernelSpec::new(0.0, 1.0, vec![1.0], -0.1).is_err());
        assert!(spec(1.0, 1.0).with_context(vec![-0.1]).is_err());
    }

    #[test]
    fn symmetric() {
        let s = KernelSpec::new(0.0, 2.0, vec![0.3, 1.7], 0.0).unwrap();
        let a = [0.12, -3.4];
        let b = [1.9, 0.25];
        assert_eq!(s.covariance(&a, &b), s.covariance(&b, &a));
    }
}
