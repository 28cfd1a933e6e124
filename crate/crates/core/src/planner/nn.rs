//! Exact nearest-neighbour lookup over tree nodes.
//!
//! Linear scan while the tree is small; past [`GRID_THRESHOLD`] nodes a
//! uniform position grid answers the same query. The weighted distance is
//! never below the position distance, so ring-by-ring grid search can stop
//! once the best candidate beats the ring's lower bound. Ties resolve to the
//! lowest node index in both modes.

use std::collections::HashMap;

use super::metric::MetricWeights;
use crate::formation::FormationState;

pub const GRID_THRESHOLD: usize = 10_000;

type Cell = [i64; 3];

#[derive(Debug, Clone)]
pub struct NearestIndex {
    weights: MetricWeights,
    cell_size: f64,
    grid: Option<HashMap<Cell, Vec<usize>>>,
    lo: Cell,
    hi: Cell,
}

impl NearestIndex {
    pub fn new(weights: MetricWeights, cell_size: f64) -> Self {
        Self {
            weights,
            cell_size,
            grid: None,
            lo: [i64::MAX; 3],
            hi: [i64::MIN; 3],
        }
    }

    fn cell(&self, s: &FormationState) -> Cell {
        [0, 1, 2].map(|i| (s.p[i] / self.cell_size).floor() as i64)
    }

    fn grid_insert(&mut self, idx: usize, s: &FormationState) {
        let c = self.cell(s);
        for i in 0..3 {
            self.lo[i] = self.lo[i].min(c[i]);
            self.hi[i] = self.hi[i].max(c[i]);
        }
        self.grid.as_mut().unwrap().entry(c).or_default().push(idx);
    }

    /// Call after pushing `nodes[idx]`.
    pub fn inserted(&mut self, idx: usize, nodes: &[FormationState]) {
        if self.grid.is_some() {
            self.grid_insert(idx, &nodes[idx]);
        } else if nodes.len() > GRID_THRESHOLD {
            self.grid = Some(HashMap::new());
            for (i, s) in nodes.iter().enumerate() {
                self.grid_insert(i, s);
            }
        }
    }

    /// Nearest live node to `q`; `None` if every node is excluded.
    pub fn nearest(
        &self,
        q: &FormationState,
        nodes: &[FormationState],
        dead: &[bool],
    ) -> Option<usize> {
        let better = |best: Option<(f64, usize)>, cand: (f64, usize)| match best {
            None => true,
            Some(b) => cand.0 < b.0 || (cand.0 == b.0 && cand.1 < b.1),
        };
        let Some(grid) = &self.grid else {
            let mut best: Option<(f64, usize)> = None;
            for (i, s) in nodes.iter().enumerate() {
                if dead[i] {
                    continue;
                }
                let cand = (self.weights.distance_sq(q, s), i);
                if better(best, cand) {
                    best = Some(cand);
                }
            }
            return best.map(|b| b.1);
        };

        let qc = self.cell(q);
        let max_ring = (0..3)
            .map(|i| (qc[i] - self.lo[i]).abs().max((self.hi[i] - qc[i]).abs()))
            .max()
            .unwrap_or(0);
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=max_ring {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != ring {
                            continue;
                        }
                        let Some(bucket) = grid.get(&[qc[0] + dx, qc[1] + dy, qc[2] + dz]) else {
                            continue;
                        };
                        for &i in bucket {
                            if dead[i] {
                                continue;
                            }
                            let cand = (self.weights.distance_sq(q, &nodes[i]), i);
                            if better(best, cand) {
                                best = Some(cand);
                            }
                        }
                    }
                }
            }
            if let Some((d2, _)) = best {
                // everything beyond this ring is at least ring·cell away
                let bound = ring as f64 * self.cell_size;
                if d2 < bound * bound {
                    break;
                }
            }
        }
        best.map(|b| b.1)
    }
}
