use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FormationPath, PlannerParams, StateValidator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplifyParams {
    pub shortcut_iterations: usize,
    pub collapse_distance: f64,
    /// Spacing of the edge checks for every new edge.
    pub resolution: f64,
}

impl From<&PlannerParams> for SimplifyParams {
    fn from(p: &PlannerParams) -> Self {
        Self {
            shortcut_iterations: p.shortcut_iterations,
            collapse_distance: p.collapse_distance,
            resolution: p.fine_resolution(),
        }
    }
}

/// Shortcutting, then vertex reduction, then collapsing of near-duplicate
/// vertices. Only ever replaces a sub-path with a checked direct edge, so
/// the result keeps both endpoints and is never longer.
pub fn simplify(
    path: &FormationPath,
    v: &StateValidator,
    params: &SimplifyParams,
    seed: u64,
) -> FormationPath {
    let mut s = path.states.clone();
    let res = params.resolution;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..params.shortcut_iterations {
        if s.len() < 3 {
            break;
        }
        let a = rng.gen_range(0..s.len());
        let b = rng.gen_range(0..s.len());
        let (i, j) = (a.min(b), a.max(b));
        if j < i + 2 {
            continue;
        }
        if v.edge_valid(&s[i], &s[j], res) {
            s.drain(i + 1..j);
        }
    }

    let mut i = 0;
    while i + 2 < s.len() {
        if v.edge_valid(&s[i], &s[i + 2], res) {
            s.remove(i + 1);
        } else {
            i += 1;
        }
    }

    let w = &v.weights;
    let mut i = 0;
    while i + 1 < s.len() && s.len() > 2 {
        if w.distance(&s[i], &s[i + 1]) >= params.collapse_distance {
            i += 1;
            continue;
        }
        // drop whichever of the pair is interior
        let drop = if i + 1 == s.len() - 1 { i } else { i + 1 };
        if drop > 0 && v.edge_valid(&s[drop - 1], &s[drop + 1], res) {
            s.remove(drop);
        } else {
            i += 1;
        }
    }
    FormationPath { states: s }
}
