//! Two-vehicle formation state and the compose/decompose transforms.

use std::f64::consts::{FRAC_PI_3, PI, TAU};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catenary::PlaneFrame;

/// Horizontal separation below which the formation plane is undefined.
pub const EPS_HORIZONTAL: f64 = 1e-9;

/// Elevation-angle bound of the line joining the vehicles.
pub const THETA_FORM_MAX: f64 = FRAC_PI_3;

// Rounding allowance so states exactly at the bound survive a round trip.
const ANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormationError {
    #[error("vehicles are vertically stacked (horizontal separation {0:e} m)")]
    DegenerateVertical(f64),
    #[error("formation angle {0} rad is outside ±60°")]
    AngleOutOfRange(f64),
}

/// Planning state `[x, y, z, φ_yaw, d, θ_form]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationState {
    pub p: Point3<f64>,
    pub phi_yaw: f64,
    pub d: f64,
    pub theta_form: f64,
}

/// Positions of the two vehicles. Vehicle 1 is the one `delta = p1 − p2`
/// points toward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehiclePair {
    pub p1: Point3<f64>,
    pub p2: Point3<f64>,
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

/// Signed shortest-arc difference `b − a` in `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(b - a)
}

impl FormationState {
    pub fn new(p: Point3<f64>, phi_yaw: f64, d: f64, theta_form: f64) -> Self {
        Self {
            p,
            phi_yaw,
            d,
            theta_form,
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.p.x,
            self.p.y,
            self.p.z,
            self.phi_yaw,
            self.d,
            self.theta_form,
        ]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self::new(Point3::new(v[0], v[1], v[2]), v[3], v[4], v[5])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Finite, positive separation, angle within bounds and `d < rope_length`.
    pub fn is_well_formed(&self, rope_length: f64) -> bool {
        self.is_finite()
            && self.d > 0.0
            && self.d < rope_length
            && self.theta_form.abs() <= THETA_FORM_MAX + ANGLE_SLACK
    }

    /// The vertical plane containing both vehicles.
    pub fn plane(&self) -> PlaneFrame {
        PlaneFrame::new(self.p, self.phi_yaw)
    }

    /// In-plane `(u, w)` offsets of vehicle 1 from the midpoint; vehicle 2
    /// sits at the negation.
    pub fn half_offset(&self) -> (f64, f64) {
        let r = 0.5 * self.d;
        let (s, c) = self.theta_form.sin_cos();
        (r * c, r * s)
    }
}

/// Collapses two vehicle positions into a formation state.
pub fn compose(pair: &VehiclePair) -> Result<FormationState, FormationError> {
    let delta: Vector3<f64> = pair.p1 - pair.p2;
    let horizontal = delta.x.hypot(delta.y);
    if horizontal <= EPS_HORIZONTAL {
        return Err(FormationError::DegenerateVertical(horizontal));
    }
    let theta_form = delta.z.atan2(horizontal);
    if theta_form.abs() > THETA_FORM_MAX + ANGLE_SLACK {
        return Err(FormationError::AngleOutOfRange(theta_form));
    }
    Ok(FormationState {
        p: nalgebra::center(&pair.p1, &pair.p2),
        phi_yaw: delta.y.atan2(delta.x),
        d: delta.norm(),
        theta_form,
    })
}

/// Expands a formation state into the two vehicle positions.
pub fn decompose(state: &FormationState) -> VehiclePair {
    let frame = state.plane();
    let (u, w) = state.half_offset();
    VehiclePair {
        p1: frame.to_world(&Vector3::new(u, 0.0, w)),
        p2: frame.to_world(&Vector3::new(-u, 0.0, -w)),
    }
}

/// Linear blend on position, separation and angle; shortest arc on yaw.
pub fn interpolate(a: &FormationState, b: &FormationState, t: f64) -> FormationState {
    if t <= 0.0 {
        return *a;
    }
    if t >= 1.0 {
        return *b;
    }
    let lerp = |x: f64, y: f64| x + (y - x) * t;
    FormationState {
        p: a.p + (b.p - a.p) * t,
        phi_yaw: wrap_angle(a.phi_yaw + angle_diff(a.phi_yaw, b.phi_yaw) * t),
        d: lerp(a.d, b.d),
        theta_form: lerp(a.theta_form, b.theta_form),
    }
}
