use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::Isometry3;

use super::{MetricWeights, StateSpaceBounds};
use crate::exec::Execution;
use crate::formation::{interpolate, FormationState};
use crate::geometry::{meshes_intersect, Collider, TriMesh, DEFAULT_MAX_LEAF};
use crate::vbody::{body_for_state, VBodyConfig};

/// Static obstacles, each with its own hierarchy. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    pub obstacles: Vec<Collider>,
}

impl Environment {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_meshes(meshes: Vec<TriMesh>) -> Result<Self, crate::geometry::GeometryError> {
        let obstacles = meshes
            .into_iter()
            .map(|m| Collider::new(m, DEFAULT_MAX_LEAF))
            .collect::<Result<_, _>>()?;
        Ok(Self { obstacles })
    }

    pub fn triangle_count(&self) -> usize {
        self.obstacles.iter().map(|c| c.mesh.triangles.len()).sum()
    }
}

/// True if `state` is well formed, its body can be built and the body
/// touches no obstacle. Bounds are not checked here.
pub fn is_state_valid(
    state: &FormationState,
    env: &Environment,
    rope_length: f64,
    cfg: &VBodyConfig,
) -> bool {
    if !state.is_well_formed(rope_length) {
        return false;
    }
    let Ok(body) = body_for_state(state, rope_length, cfg) else {
        return false;
    };
    if env.obstacles.is_empty() {
        return true;
    }
    let body_box = body.mesh.aabb();
    let mut collider = None;
    for obstacle in &env.obstacles {
        if !obstacle.aabb().overlaps(&body_box, 1e-9) {
            continue;
        }
        let body = collider.get_or_insert_with(|| {
            Collider::new(body.mesh.clone(), DEFAULT_MAX_LEAF).expect("body mesh is never empty")
        });
        if meshes_intersect(obstacle, body, &Isometry3::identity()) {
            return false;
        }
    }
    true
}

/// Bounds plus body checks for one planning problem, with a check counter.
#[derive(Debug)]
pub struct StateValidator<'a> {
    pub env: &'a Environment,
    pub bounds: StateSpaceBounds,
    pub rope_length: f64,
    pub cfg: VBodyConfig,
    pub weights: MetricWeights,
    pub exec: Execution,
    checks: AtomicUsize,
}

impl<'a> StateValidator<'a> {
    pub fn new(
        env: &'a Environment,
        bounds: StateSpaceBounds,
        rope_length: f64,
        cfg: VBodyConfig,
        weights: MetricWeights,
        exec: Execution,
    ) -> Self {
        Self {
            env,
            bounds,
            rope_length,
            cfg,
            weights,
            exec,
            checks: AtomicUsize::new(0),
        }
    }

    pub fn checks(&self) -> usize {
        self.checks.load(Ordering::Relaxed)
    }

    pub fn is_valid(&self, s: &FormationState) -> bool {
        self.checks.fetch_add(1, Ordering::Relaxed);
        self.bounds.contains(s) && is_state_valid(s, self.env, self.rope_length, &self.cfg)
    }

    /// Checks the states strictly after `a` up to and including `b`, spaced
    /// at most `resolution` apart in the metric. `a` is assumed checked.
    pub fn edge_valid(&self, a: &FormationState, b: &FormationState, resolution: f64) -> bool {
        let n = (self.weights.distance(a, b) / resolution).ceil().max(1.0) as usize;
        let steps: Vec<usize> = (1..=n).collect();
        self.exec
            .all(&steps, |&i| self.is_valid(&interpolate(a, b, i as f64 / n as f64)))
    }

    /// Every state and every edge of `states`.
    pub fn path_valid(&self, states: &[FormationState], resolution: f64) -> bool {
        self.first_invalid_edge(states, resolution).is_none()
            && states.first().is_none_or(|s| self.is_valid(s))
    }

    /// Index `k` of the first edge `states[k] → states[k+1]` that fails.
    pub fn first_invalid_edge(&self, states: &[FormationState], resolution: f64) -> Option<usize> {
        states
            .windows(2)
            .position(|w| !self.edge_valid(&w[0], &w[1], resolution))
    }
}
