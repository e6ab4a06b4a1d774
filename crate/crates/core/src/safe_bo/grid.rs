use serde::{Deserialize, Serialize};

use super::CampaignError;
use crate::gp::join_input;

/// Uniform axis description: `count` points from `lower` to `upper` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn new(lower: f64, upper: f64, count: usize) -> Self {
        Self { lower, upper, count }
    }

    fn values(&self) -> Result<Vec<f64>, CampaignError> {
        if self.count == 0 || !(self.lower.is_finite() && self.upper.is_finite()) {
            return Err(CampaignError::Input(format!("invalid axis {self:?}")));
        }
        if self.count == 1 {
            return Ok(vec![self.lower]);
        }
        if self.upper <= self.lower {
            return Err(CampaignError::Input(format!(
                "axis upper bound {} must exceed lower bound {}",
                self.upper, self.lower
            )));
        }
        let step = (self.upper - self.lower) / (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| if i + 1 == self.count { self.upper } else { self.lower + step * i as f64 })
            .collect())
    }
}

/// Finite Cartesian discretization of the parameter domain.
///
/// Points are stored in row-major order: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    axes: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
    context: Option<Vec<f64>>,
    inputs: Vec<Vec<f64>>,
}

impl ParameterGrid {
    pub fn from_axes(axes: Vec<Vec<f64>>) -> Result<Self, CampaignError> {
        if axes.is_empty() {
            return Err(CampaignError::Input("grid needs at least one axis".into()));
        }
        for (d, axis) in axes.iter().enumerate() {
            if axis.is_empty() {
                return Err(CampaignError::Input(format!("axis {d} is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) || axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CampaignError::Input(format!("axis {d} must be strictly increasing")));
            }
        }
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        let inputs = points.clone();
        Ok(Self { axes, points, context: None, inputs })
    }

    pub fn uniform(axes: &[AxisSpec]) -> Result<Self, CampaignError> {
        Self::from_axes(axes.iter().map(AxisSpec::values).collect::<Result<_, _>>()?)
    }

    /// Attaches a fixed context vector to every grid point.
    pub fn with_context(mut self, context: Option<Vec<f64>>) -> Self {
        self.inputs = self
            .points
            .iter()
            .map(|p| join_input(p, context.as_deref()))
            .collect();
        self.context = context;
        self
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn context(&self) -> Option<&[f64]> {
        self.context.as_deref()
    }

    /// Flat kernel inputs `[p, z]` for every grid point.
    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a[0], a[a.len() - 1])).collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && self.bounds().iter().zip(point).all(|(&(lo, hi), &v)| v >= lo && v <= hi)
    }

    /// Index of the grid point closest to `point` along every axis.
    pub fn nearest_index(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim() {
            return None;
        }
        let mut index = 0;
        for (axis, &v) in self.axes.iter().zip(point) {
            let k = match axis.binary_search_by(|a| a.total_cmp(&v)) {
                Ok(k) => k,
                Err(0) => 0,
                Err(k) if k == axis.len() => axis.len() - 1,
                Err(k) => {
                    if (v - axis[k - 1]) <= (axis[k] - v) {
                        k - 1
                    } else {
                        k
                    }
                }
            };
            index = index * axis.len() + k;
        }
        Some(index)
    }

    /// Per-axis spacing of the first two points (zero for singleton axes).
    pub fn spacing(&self) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| if a.len() > 1 { a[1] - a[0] } else { 0.0 })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cartesian_product_is_row_major() {
        let g = ParameterGrid::from_axes(vec![vec![0.0, 1.0], vec![10.0, 20.0, 30.0]]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(0), &[0.0, 10.0]);
        assert_eq!(g.point(1), &[0.0, 20.0]);
        assert_eq!(g.point(3), &[1.0, 10.0]);
        assert_eq!(g.nearest_index(&[0.9, 24.0]), Some(4));
    }

    #[test]
    fn uniform_axes_hit_endpoints() {
        let g = ParameterGrid::uniform(&[AxisSpec::new(0.0, 10.0, 200)]).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g.point(0)[0], 0.0);
        assert_eq!(g.point(199)[0], 10.0);
        assert!((g.spacing()[0] - 10.0 / 199.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsorted_axes() {
        assert!(ParameterGrid::from_axes(vec![vec![0.0, 0.0]]).is_err());
        assert!(ParameterGrid::from_axes(vec![vec![]]).is_err());
        assert!(ParameterGrid::uniform(&[AxisSpec::new(1.0, 0.0, 5)]).is_err());
    }

    #[test]
    fn context_is_appended_to_inputs() {
        let g = ParameterGrid::from_axes(vec![vec![0.0, 1.0]])
            .unwrap()
            .with_context(Some(vec![0.684]));
        assert_eq!(g.inputs()[1], vec![1.0, 0.684]);
        assert_eq!(g.point(1), &[1.0]);
    }

    #[test]
    fn nearest_index_clamps_outside_points() {
        let g = ParameterGrid::uniform(&[AxisSpec::new(-1.5, 4.0, 100)]).unwrap();
        assert_eq!(g.nearest_index(&[4.5]), Some(99));
        assert!(!g.contains(&[4.5]));
    }
}
