use serde::{Deserialize, Serialize};

use crate::formation::{angle_diff, FormationState};

/// Weights of the formation-space distance
/// `‖Δp‖² + w_yaw·Δφ² + w_d·Δd² + w_θ·Δθ²` (yaw difference wrapped).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricWeights {
    pub w_yaw: f64,
    pub w_d: f64,
    pub w_theta: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        Self {
            w_yaw: 0.5,
            w_d: 1.0,
            w_theta: 0.5,
        }
    }
}

impl MetricWeights {
    pub fn distance_sq(&self, a: &FormationState, b: &FormationState) -> f64 {
        let dyaw = angle_diff(a.phi_yaw, b.phi_yaw);
        (b.p - a.p).norm_squared()
            + self.w_yaw * dyaw * dyaw
            + self.w_d * (b.d - a.d).powi(2)
            + self.w_theta * (b.theta_form - a.theta_form).powi(2)
    }

    pub fn distance(&self, a: &FormationState, b: &FormationState) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    pub fn path_length(&self, states: &[FormationState]) -> f64 {
        states.windows(2).map(|w| self.distance(&w[0], &w[1])).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn state() -> impl Strategy<Value = FormationState> {
        (
            -3.0..3.0f64,
            -3.0..3.0f64,
            0.0..3.0f64,
            -PI..PI,
            0.2..2.0f64,
            -1.0..1.0f64,
        )
            .prop_map(|(x, y, z, yaw, d, th)| FormationState::new(Point3::new(x, y, z), yaw, d, th))
    }

    #[test]
    fn yaw_wraps() {
        let m = MetricWeights::default();
        let a = FormationState::new(Point3::origin(), 3.1, 1.0, 0.0);
        let b = FormationState::new(Point3::origin(), -3.1, 1.0, 0.0);
        let expected = (0.5f64).sqrt() * (2.0 * PI - 6.2);
        assert!((m.distance(&a, &b) - expected).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn symmetric_and_triangle(a in state(), b in state(), c in state()) {
            let m = MetricWeights::default();
            prop_assert!((m.distance(&a, &b) - m.distance(&b, &a)).abs() < 1e-12);
            prop_assert!(m.distance(&a, &c) <= m.distance(&a, &b) + m.distance(&b, &c) + 1e-12);
        }
    }
}
