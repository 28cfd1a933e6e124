use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Environment, FormationPath, MetricWeights, NearestIndex, PlanError, StateSpaceBounds,
    StateValidator,
};
use crate::exec::Execution;
use crate::formation::{interpolate, FormationState};
use crate::vbody::VBodyConfig;

/// Tunables of [`plan`] and of the simplification pass that follows it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    pub max_time: f64,
    /// Hard cap on RRT iterations, so failures are reproducible too.
    pub max_iterations: usize,
    pub goal_bias: f64,
    pub step_size: f64,
    pub edge_resolution: f64,
    /// Candidate paths are re-checked at `edge_resolution / certify_factor`
    /// before being returned.
    pub certify_factor: f64,
    pub weights: MetricWeights,
    pub shortcut_iterations: usize,
    pub collapse_distance: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            max_time: 30.0,
            max_iterations: 2_000_000,
            goal_bias: 0.05,
            step_size: 0.3,
            edge_resolution: 0.05,
            certify_factor: 10.0,
            weights: MetricWeights::default(),
            shortcut_iterations: 200,
            collapse_distance: 0.02,
        }
    }
}

impl PlannerParams {
    pub fn fine_resolution(&self) -> f64 {
        self.edge_resolution / self.certify_factor.max(1.0)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: &str| Err(PlanError::InvalidBounds(m.to_string()));
        if !(self.step_size > 0.0 && self.edge_resolution > 0.0) {
            return bad("step_size and edge_resolution must be positive");
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return bad("goal_bias must lie in [0, 1]");
        }
        if !(self.max_time > 0.0) || self.max_iterations == 0 {
            return bad("max_time and max_iterations must be positive");
        }
        if !(self.certify_factor >= 1.0) {
            return bad("certify_factor must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PlanRequest<'a> {
    pub start: FormationState,
    pub goal: FormationState,
    pub bounds: StateSpaceBounds,
    pub environment: &'a Environment,
    pub vbody_cfg: VBodyConfig,
    pub rope_length: f64,
    pub rng_seed: u64,
    pub params: PlannerParams,
}

impl PlanRequest<'_> {
    pub fn validator(&self, exec: Execution) -> StateValidator<'_> {
        StateValidator::new(
            self.environment,
            self.bounds,
            self.rope_length,
            self.vbody_cfg,
            self.params.weights,
            exec,
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub nodes: usize,
    pub iterations: usize,
    /// Nodes discarded because a candidate path through them failed the
    /// fine-resolution re-check.
    pub pruned: usize,
    pub raw_states: usize,
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub path: FormationPath,
    pub stats: TreeStats,
    pub validity_checks: usize,
}

struct Tree {
    states: Vec<FormationState>,
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    dead: Vec<bool>,
    index: NearestIndex,
    pruned: usize,
}

impl Tree {
    fn new(root: FormationState, weights: MetricWeights, cell: f64) -> Self {
        Self {
            states: vec![root],
            parent: vec![usize::MAX],
            children: vec![Vec::new()],
            dead: vec![false],
            index: NearestIndex::new(weights, cell),
            pruned: 0,
        }
    }

    fn push(&mut self, s: FormationState, parent: usize) -> usize {
        let i = self.states.len();
        self.states.push(s);
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.children[parent].push(i);
        self.dead.push(false);
        self.index.inserted(i, &self.states);
        i
    }

    fn branch(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![i];
        while self.parent[i] != usize::MAX {
            i = self.parent[i];
            out.push(i);
        }
        out.reverse();
        out
    }

    fn prune(&mut self, root: usize) {
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            if !self.dead[i] {
                self.dead[i] = true;
                self.pruned += 1;
            }
            stack.extend(self.children[i].iter().copied());
        }
    }
}

/// Grows an RRT from `start` until it connects to `goal`. The returned path
/// has passed edge checks at `edge_resolution` and a second pass at the fine
/// resolution; a candidate that fails the second pass loses the offending
/// branch and the search continues.
pub fn plan(req: &PlanRequest, exec: Execution) -> Result<PlanResult, PlanError> {
    let p = &req.params;
    p.validate()?;
    req.bounds.validate(req.rope_length)?;
    let v = req.validator(exec);
    let w = p.weights;
    if !v.is_valid(&req.start) {
        return Err(PlanError::InvalidStart);
    }
    if !v.is_valid(&req.goal) {
        return Err(PlanError::InvalidGoal);
    }
    if req.start == req.goal {
        return Ok(PlanResult {
            path: FormationPath {
                states: vec![req.start],
            },
            stats: TreeStats {
                nodes: 1,
                raw_states: 1,
                ..Default::default()
            },
            validity_checks: v.checks(),
        });
    }

    let fine = p.fine_resolution();
    let deadline = Instant::now() + Duration::from_secs_f64(p.max_time);
    let mut rng = ChaCha8Rng::seed_from_u64(req.rng_seed);
    let mut tree = Tree::new(req.start, w, p.step_size.max(0.1));
    let mut iterations = 0;

    while iterations < p.max_iterations {
        if Instant::now() > deadline {
            break;
        }
        iterations += 1;
        let target = if rng.gen::<f64>() < p.goal_bias {
            req.goal
        } else {
            req.bounds.sample(&mut rng)
        };
        let Some(near) = tree.index.nearest(&target, &tree.states, &tree.dead) else {
            break;
        };
        let from = tree.states[near];
        let dist = w.distance(&from, &target);
        if dist == 0.0 {
            continue;
        }
        let new = if dist <= p.step_size {
            target
        } else {
            interpolate(&from, &target, p.step_size / dist)
        };
        if !v.is_valid(&new) || !v.edge_valid(&from, &new, p.edge_resolution) {
            continue;
        }
        let mut last = tree.push(new, near);
        if w.distance(&new, &req.goal) > p.step_size {
            continue;
        }
        if new != req.goal {
            if !v.edge_valid(&new, &req.goal, p.edge_resolution) {
                continue;
            }
            last = tree.push(req.goal, last);
        }

        let branch = tree.branch(last);
        let states: Vec<FormationState> = branch.iter().map(|&i| tree.states[i]).collect();
        match v.first_invalid_edge(&states, fine) {
            None => {
                let stats = TreeStats {
                    nodes: tree.states.len(),
                    iterations,
                    pruned: tree.pruned,
                    raw_states: states.len(),
                };
                return Ok(PlanResult {
                    path: FormationPath { states },
                    stats,
                    validity_checks: v.checks(),
                });
            }
            Some(k) => tree.prune(branch[k + 1]),
        }
    }
    Err(PlanError::NoPathFound {
        nodes: tree.states.len(),
        iterations,
    })
}
