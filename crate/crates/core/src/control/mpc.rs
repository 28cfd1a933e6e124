use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{step_jacobians, step_vec, ControlInput, MpcConfig, QuadState, StateVec};

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const STEP_MIN: f64 = 1e-14;
const STEP_MAX: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpcSolution {
    /// First input of the optimised sequence; the one to apply.
    pub input: ControlInput,
    pub inputs: Vec<ControlInput>,
    /// Predicted states `x_0 … x_N`.
    pub predicted: Vec<QuadState>,
    pub cost: f64,
    /// Cost of the warm-start sequence after projection.
    pub initial_cost: f64,
    pub iterations: usize,
    /// Budget ran out while the cost was still dropping.
    pub stalled: bool,
}

fn reference(refs: &[QuadState], k: usize) -> StateVec {
    refs[(k - 1).min(refs.len() - 1)].to_vec()
}

fn rollout(x0: &StateVec, u: &[Vector3<f64>], cfg: &MpcConfig) -> Vec<StateVec> {
    let mut xs = Vec::with_capacity(u.len() + 1);
    xs.push(*x0);
    for uk in u {
        let next = step_vec(xs.last().unwrap(), uk, cfg.dt, cfg);
        xs.push(next);
    }
    xs
}

fn cost_of(xs: &[StateVec], u: &[Vector3<f64>], refs: &[QuadState], u_prev: &Vector3<f64>, cfg: &MpcConfig) -> f64 {
    let q = cfg.q_state();
    let (qu, qdu) = (Vector3::from(cfg.q_u), Vector3::from(cfg.q_du));
    let hover = cfg.hover().to_vec();
    let mut j = 0.0;
    for k in 1..xs.len() {
        let e = xs[k] - reference(refs, k);
        j += e.component_mul(&e).dot(&q);
    }
    let mut prev = *u_prev;
    for uk in u {
        let du = uk - hover;
        let dd = uk - prev;
        j += du.component_mul(&du).dot(&qu) + dd.component_mul(&dd).dot(&qdu);
        prev = *uk;
    }
    j
}

/// Gradient with respect to every input via the adjoint recursion.
fn gradient(xs: &[StateVec], u: &[Vector3<f64>], refs: &[QuadState], u_prev: &Vector3<f64>, cfg: &MpcConfig) -> Vec<Vector3<f64>> {
    let n = u.len();
    let q = cfg.q_state();
    let (qu, qdu) = (Vector3::from(cfg.q_u), Vector3::from(cfg.q_du));
    let hover = cfg.hover().to_vec();
    let mut grad = vec![Vector3::zeros(); n];
    let mut lambda = 2.0 * (xs[n] - reference(refs, n)).component_mul(&q);
    for k in (0..n).rev() {
        let (fx, fu) = step_jacobians(&xs[k], &u[k], cfg.dt, cfg);
        let prev = if k == 0 { *u_prev } else { u[k - 1] };
        let mut g = fu.transpose() * lambda
            + 2.0 * (u[k] - hover).component_mul(&qu)
            + 2.0 * (u[k] - prev).component_mul(&qdu);
        if k + 1 < n {
            g -= 2.0 * (u[k + 1] - u[k]).component_mul(&qdu);
        }
        grad[k] = g;
        if k > 0 {
            lambda = 2.0 * (xs[k] - reference(refs, k)).component_mul(&q) + fx.transpose() * lambda;
        }
    }
    grad
}

fn check_refs(refs: &[QuadState], cfg: &MpcConfig) {
    assert!(
        refs.len() == 1 || refs.len() == cfg.horizon,
        "reference must hold 1 or {} states, got {}",
        cfg.horizon,
        refs.len()
    );
}

/// Tracking cost of an input sequence. `refs` holds the references for
/// steps `1..=N`, or a single state used at every step.
pub fn mpc_cost(x0: &QuadState, refs: &[QuadState], u_prev: &ControlInput, inputs: &[ControlInput], cfg: &MpcConfig) -> f64 {
    mpc_cost_and_gradient(x0, refs, u_prev, inputs, cfg).0
}

/// Cost and its gradient with respect to each input of the sequence.
pub fn mpc_cost_and_gradient(
    x0: &QuadState,
    refs: &[QuadState],
    u_prev: &ControlInput,
    inputs: &[ControlInput],
    cfg: &MpcConfig,
) -> (f64, Vec<ControlInput>) {
    check_refs(refs, cfg);
    let u: Vec<Vector3<f64>> = inputs.iter().map(|c| c.to_vec()).collect();
    let xs = rollout(&x0.to_vec(), &u, cfg);
    let up = u_prev.to_vec();
    let j = cost_of(&xs, &u, refs, &up, cfg);
    let g = gradient(&xs, &u, refs, &up, cfg);
    (j, g.iter().map(ControlInput::from_vec).collect())
}

/// Minimises the tracking cost over the `N`-step input sequence by projected
/// gradient descent: Barzilai–Borwein trial steps, Armijo backtracking, box
/// projection. Angles are scaled by `1/g` relative to thrust, which roughly
/// equalises their effect on acceleration. `warm` defaults to holding
/// `u_prev` over the horizon.
pub fn solve_mpc(
    x0: &QuadState,
    refs: &[QuadState],
    u_prev: &ControlInput,
    warm: Option<&[ControlInput]>,
    cfg: &MpcConfig,
) -> MpcSolution {
    check_refs(refs, cfg);
    let n = cfg.horizon;
    let x0v = x0.to_vec();
    let up = u_prev.to_vec();
    let scale = Vector3::new(1.0, cfg.g.powi(-2), cfg.g.powi(-2));

    let mut u: Vec<Vector3<f64>> = match warm {
        Some(w) if w.len() == n => w.iter().map(|c| cfg.project(&c.to_vec())).collect(),
        _ => vec![cfg.project(&up); n],
    };
    let mut xs = rollout(&x0v, &u, cfg);
    let mut j = cost_of(&xs, &u, refs, &up, cfg);
    let initial_cost = j;
    let mut g = gradient(&xs, &u, refs, &up, cfg);

    let mut alpha = 1.0;
    let mut iterations = 0;
    let mut last_rel = f64::INFINITY;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut accepted = None;
        while alpha >= STEP_MIN {
            let trial: Vec<Vector3<f64>> = u
                .iter()
                .zip(&g)
                .map(|(uk, gk)| cfg.project(&(uk - alpha * gk.component_mul(&scale))))
                .collect();
            // squared step length in the scaled metric
            let moved: f64 = trial
                .iter()
                .zip(&u)
                .map(|(a, b)| (a - b).component_div(&scale).dot(&(a - b)))
                .sum();
            if moved == 0.0 {
                break;
            }
            let txs = rollout(&x0v, &trial, cfg);
            let tj = cost_of(&txs, &trial, refs, &up, cfg);
            if tj <= j - ARMIJO / alpha * moved {
                accepted = Some((trial, txs, tj));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, txs, tj)) = accepted else {
            converged = true;
            break;
        };
        debug_assert!(tj <= j);
        let tg = gradient(&txs, &trial, refs, &up, cfg);
        let (mut ss, mut sy) = (0.0, 0.0);
        for k in 0..n {
            let s = trial[k] - u[k];
            let y = tg[k] - g[k];
            ss += s.component_div(&scale).dot(&s);
            sy += s.dot(&y);
        }
        alpha = if sy > 0.0 { (ss / sy).clamp(STEP_MIN, STEP_MAX) } else { (2.0 * alpha).min(STEP_MAX) };
        last_rel = (j - tj) / j.max(f64::MIN_POSITIVE);
        u = trial;
        xs = txs;
        j = tj;
        g = tg;
        if last_rel < cfg.rel_tol {
            converged = true;
            break;
        }
    }

    let inputs: Vec<ControlInput> = u.iter().map(ControlInput::from_vec).collect();
    MpcSolution {
        input: inputs[0],
        predicted: xs.iter().map(QuadState::from_vec).collect(),
        inputs,
        cost: j,
        initial_cost,
        iterations,
        stalled: !converged && last_rel >= cfg.rel_tol,
    }
}

/// Receding-horizon wrapper: keeps the last input and the shifted previous
/// solution as the next warm start.
#[derive(Debug, Clone)]
pub struct MpcController {
    pub cfg: MpcConfig,
    pub last_input: ControlInput,
    warm: Option<Vec<ControlInput>>,
}

impl MpcController {
    pub fn new(cfg: MpcConfig) -> Self {
        Self {
            cfg,
            last_input: cfg.hover(),
            warm: None,
        }
    }

    pub fn step(&mut self, x0: &QuadState, refs: &[QuadState]) -> MpcSolution {
        let sol = solve_mpc(x0, refs, &self.last_input, self.warm.as_deref(), &self.cfg);
        let mut next = sol.inputs[1..].to_vec();
        next.push(*sol.inputs.last().unwrap());
        self.warm = Some(next);
        self.last_input = sol.input;
        sol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hover_at_reference_stays_put() {
        let cfg = MpcConfig::default();
        let x = QuadState::hover_at(Point3::new(0.0, 0.0, 1.0));
        let sol = solve_mpc(&x, &[x], &cfg.hover(), None, &cfg);
        assert!(sol.cost < 1e-20);
        assert!((sol.input.to_vec() - cfg.hover().to_vec()).norm() < 1e-9);
        assert!(!sol.stalled);
    }

    #[test]
    fn climbs_toward_higher_reference() {
        let cfg = MpcConfig::default();
        let x = QuadState::hover_at(Point3::new(0.0, 0.0, 1.0));
        let r = QuadState::hover_at(Point3::new(0.0, 0.0, 2.0));
        let sol = solve_mpc(&x, &[r], &cfg.hover(), None, &cfg);
        assert!(sol.input.thrust > cfg.g);
        assert!(sol.cost < sol.initial_cost);
    }

    #[test]
    fn lateral_reference_tilts_the_right_way() {
        let cfg = MpcConfig::default();
        let x = QuadState::hover_at(Point3::new(0.0, 0.0, 1.0));
        let sol = solve_mpc(&x, &[QuadState::hover_at(Point3::new(1.0, 1.0, 1.0))], &cfg.hover(), None, &cfg);
        // +x needs positive pitch, +y needs negative roll
        assert!(sol.input.theta_ref > 0.0);
        assert!(sol.input.phi_ref < 0.0);
        for u in &sol.inputs {
            assert!(u.phi_ref.abs() <= cfg.attitude_max && u.theta_ref.abs() <= cfg.attitude_max);
            assert!((0.0..=cfg.thrust_max).contains(&u.thrust));
        }
    }

    fn random_state(rng: &mut ChaCha8Rng) -> QuadState {
        QuadState {
            p: Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0)),
            v: Vector3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
            phi: rng.gen_range(-0.3..0.3),
            theta: rng.gen_range(-0.3..0.3),
        }
    }

    fn random_input(rng: &mut ChaCha8Rng) -> ControlInput {
        ControlInput {
            thrust: rng.gen_range(5.0..15.0),
            phi_ref: rng.gen_range(-0.4..0.4),
            theta_ref: rng.gen_range(-0.4..0.4),
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let cfg = MpcConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x0 = random_state(&mut rng);
            let refs: Vec<QuadState> = (0..cfg.horizon).map(|_| random_state(&mut rng)).collect();
            let u_prev = random_input(&mut rng);
            let u: Vec<ControlInput> = (0..cfg.horizon).map(|_| random_input(&mut rng)).collect();
            let (_, grad) = mpc_cost_and_gradient(&x0, &refs, &u_prev, &u, &cfg);
            let mut analytic = Vec::new();
            let mut numeric = Vec::new();
            for k in 0..cfg.horizon {
                for c in 0..3 {
                    let h = 1e-6;
                    let bump = |sign: f64| {
                        let mut w = u.clone();
                        let mut v = w[k].to_vec();
                        v[c] += sign * h;
                        w[k] = ControlInput::from_vec(&v);
                        mpc_cost(&x0, &refs, &u_prev, &w, &cfg)
                    };
                    numeric.push((bump(1.0) - bump(-1.0)) / (2.0 * h));
                    analytic.push(grad[k].to_vec()[c]);
                }
            }
            let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(diff <= 1e-5 * norm, "relative error {}", diff / norm);
        }
    }

    #[test]
    fn cost_never_increases_over_warm_start() {
        let cfg = MpcConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let x0 = random_state(&mut rng);
            let r = random_state(&mut rng);
            let warm: Vec<ControlInput> = (0..cfg.horizon).map(|_| random_input(&mut rng)).collect();
            let sol = solve_mpc(&x0, &[r], &random_input(&mut rng), Some(&warm), &cfg);
            assert!(sol.cost <= sol.initial_cost);
        }
    }

    #[test]
    fn tiny_budget_reports_stall() {
        let cfg = MpcConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let x = QuadState::hover_at(Point3::origin());
        let sol = solve_mpc(&x, &[QuadState::hover_at(Point3::new(2.0, 0.0, 1.0))], &cfg.hover(), None, &cfg);
        assert!(sol.stalled);
    }
}
