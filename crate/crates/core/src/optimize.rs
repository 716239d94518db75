//! Gradient descent of K along adjoint moves `A -> exp(-eta M) A exp(eta M)`,
//! with Armijo backtracking, a hard floor on the distance to Z, and
//! independent random restarts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kfun::{gradient_parts, k_parts};
use crate::matrix::{matrix_exp, ComplexMatrix};
use crate::sample::{random_conjugate, rng_for};
use crate::tol::Tolerances;

const ARMIJO: f64 = 1e-4;
/// Relative change in K treated as rounding.
pub const ROUNDING_SLACK: f64 = 1e-13;
const WOLFE_CURVATURE: f64 = 0.9;
const WOLFE_OVERSHOOT: f64 = 0.8;
const MIN_STEP: f64 = 1e-14;
const MAX_TRIALS: usize = 80;
/// Largest `eta |M|` tried in one move.
const MAX_MOVE: f64 = 0.5;
const START_ATTEMPTS: usize = 8;
const DIVERGENCE_FACTOR: f64 = 1e3;
const DIVERGENCE_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Stop when the K-gradient `4|G| / denominator^2` drops below this.
    pub grad_tol: f64,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Steps with `denominator < z_floor * |A|^4` are rejected.
    pub z_floor: f64,
    pub sample_spread: f64,
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iters: 5000,
            grad_tol: 1e-9,
            step_init: 1e-2,
            backtrack_factor: 0.5,
            restarts: 5,
            seed: 20_240_601,
            z_floor: 1e-8,
            sample_spread: 1.0,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.max_iters == 0 || self.restarts == 0 {
            return bad("max_iters and restarts must be positive");
        }
        if !(self.grad_tol > 0.0 && self.step_init > 0.0 && self.sample_spread > 0.0) {
            return bad("grad_tol, step_init and sample_spread must be positive");
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return bad("backtrack_factor must lie in (0, 1)");
        }
        if !(self.z_floor > 0.0 && self.z_floor < 1.0) {
            return bad("z_floor must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub best_k: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diverging: bool,
    pub floor_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizationReport {
    pub best_k: f64,
    pub best_matrix: ComplexMatrix,
    pub grad_residual_at_best: f64,
    pub iterations_used: usize,
    /// K after each accepted step of the winning restart, starting point first.
    pub k_trajectory: Vec<f64>,
    pub iterate_norm_trajectory: Vec<f64>,
    /// Some restart grew past `1e3 |A_0|` while K was still decreasing.
    pub diverging: bool,
    pub converged: bool,
    /// The Z floor rejected a step in some restart.
    pub floor_bound: bool,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
}

impl MinimizationReport {
    /// Keeps every `stride`-th trajectory point plus the last one.
    pub fn thinned(mut self, stride: usize) -> Self {
        let thin = |v: &mut Vec<f64>| {
            if stride > 1 && !v.is_empty() {
                let last = *v.last().unwrap();
                let mut out: Vec<f64> = v.iter().step_by(stride).copied().collect();
                if !(v.len() - 1).is_multiple_of(stride) {
                    out.push(last);
                }
                *v = out;
            }
        };
        thin(&mut self.k_trajectory);
        thin(&mut self.iterate_norm_trajectory);
        self
    }
}

struct Run {
    matrix: ComplexMatrix,
    k: f64,
    residual: f64,
    iterations: usize,
    k_traj: Vec<f64>,
    norm_traj: Vec<f64>,
    converged: bool,
    diverging: bool,
    floor_bound: bool,
}

fn conjugate_step(a: &ComplexMatrix, m: &ComplexMatrix, eta: f64) -> Option<ComplexMatrix> {
    let left = matrix_exp(&m.scale_real(-eta)).ok()?;
    let right = matrix_exp(&m.scale_real(eta)).ok()?;
    let out = left.matmul(a).matmul(&right);
    out.is_finite().then_some(out)
}

fn z_ratio(a: &ComplexMatrix) -> f64 {
    let (_, den, n2, _) = k_parts(a);
    den / (n2 * n2)
}

type Trial = (ComplexMatrix, (f64, ComplexMatrix, f64), f64);

/// Backtracking Armijo search. When the change in K is at rounding level
/// the step is instead bracketed on the slope at the trial point
/// (approximate Wolfe test), which may also lengthen it; K may then rise by
/// at most `ROUNDING_SLACK` relative.
#[allow(clippy::too_many_arguments)]
fn line_search(
    a: &ComplexMatrix,
    m: &ComplexMatrix,
    k: f64,
    slope: f64,
    mut eta: f64,
    cap: f64,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
    floor_bound: &mut bool,
) -> Option<Trial> {
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..MAX_TRIALS {
        if eta < MIN_STEP {
            return None;
        }
        let parts = conjugate_step(a, m, eta).and_then(|trial| {
            if z_ratio(&trial) < cfg.z_floor {
                *floor_bound = true;
                return None;
            }
            gradient_parts(&trial, tol).ok().map(|p| (trial, p))
        });
        let verdict = match &parts {
            None => Verdict::Shorten,
            Some((_, p)) if k - p.0 > ROUNDING_SLACK * k.abs() => {
                if p.0 <= k + ARMIJO * eta * slope {
                    Verdict::Accept
                } else {
                    Verdict::Shorten
                }
            }
            Some((_, p)) => {
                let end_slope = 4.0 * m.inner_with(&p.1).re / (p.2 * p.2);
                if end_slope > -WOLFE_OVERSHOOT * slope {
                    Verdict::Shorten
                } else if end_slope < WOLFE_CURVATURE * slope && eta < cap {
                    Verdict::Lengthen
                } else if p.0 <= k + ROUNDING_SLACK * k.abs() {
                    Verdict::Accept
                } else {
                    Verdict::Shorten
                }
            }
        };
        match verdict {
            Verdict::Accept => {
                let (trial, p) = parts.unwrap();
                return Some((trial, p, eta));
            }
            Verdict::Shorten => {
                hi = eta;
                eta = if lo > 0.0 { 0.5 * (lo + hi) } else { eta * cfg.backtrack_factor };
            }
            Verdict::Lengthen => {
                lo = eta;
                eta = if hi.is_finite() { 0.5 * (lo + hi) } else { (2.0 * eta).min(cap) };
            }
        }
    }
    None
}

enum Verdict {
    Accept,
    Shorten,
    Lengthen,
}

fn descend(start: ComplexMatrix, cfg: &OptimizerConfig, tol: &Tolerances) -> Result<Run> {
    let norm0 = start.norm();
    let mut a = start;
    let (mut k, mut g, mut den) = gradient_parts(&a, tol)?;
    let mut k_traj = vec![k];
    let mut norm_traj = vec![norm0];
    let mut step = cfg.step_init;
    let mut floor_bound = false;
    let mut converged = false;
    let mut iterations = 0;
    // gradient of K with respect to M under Re<.,.>, dimensionless
    let mut grad = g.scale_real(4.0 / (den * den));
    let mut prev: Option<(ComplexMatrix, ComplexMatrix)> = None;
    let residual = |g: &ComplexMatrix, a: &ComplexMatrix| g.norm() / a.norm().powi(8);

    while iterations < cfg.max_iters {
        if grad.norm() <= cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        // Polak-Ribiere+ conjugate direction, reset when not a descent direction
        let mut m = -grad.clone();
        if let Some((old_grad, old_dir)) = &prev {
            let beta = (grad.inner_with(&(&grad - old_grad)).re / old_grad.norm_sqr()).max(0.0);
            let cand = &m + &old_dir.scale_real(beta);
            if cand.inner_with(&grad).re < 0.0 {
                m = cand;
            }
        }
        let slope = m.inner_with(&grad).re;
        let cap = MAX_MOVE / m.norm();
        let accepted = line_search(&a, &m, k, slope, step.min(cap), cap, cfg, tol, &mut floor_bound);
        let Some((trial, parts, eta)) = accepted else {
            if prev.take().is_some() {
                // retry once along plain steepest descent
                continue;
            }
            break;
        };
        a = trial;
        (k, g, den) = parts;
        let new_grad = g.scale_real(4.0 / (den * den));
        prev = Some((std::mem::replace(&mut grad, new_grad), m));
        k_traj.push(k);
        norm_traj.push(a.norm());
        step = 2.0 * eta;
    }

    let last = norm_traj.len() - 1;
    let back = last.saturating_sub(DIVERGENCE_WINDOW);
    let diverging = norm_traj[last] > DIVERGENCE_FACTOR * norm0 && k_traj[last] < k_traj[back];
    Ok(Run {
        residual: residual(&g, &a),
        matrix: a,
        k,
        iterations,
        k_traj,
        norm_traj,
        converged,
        diverging,
        floor_bound,
    })
}

fn restart_start(a: &ComplexMatrix, cfg: &OptimizerConfig, restart: usize) -> Result<ComplexMatrix> {
    let mut rng = rng_for(cfg.seed, restart as u64);
    let mut ratio = 0.0;
    for _ in 0..START_ATTEMPTS {
        let start = random_conjugate(&mut rng, a, cfg.sample_spread);
        ratio = z_ratio(&start);
        if ratio >= cfg.z_floor {
            return Ok(start);
        }
    }
    Err(Error::InZ { ratio })
}

/// Multi-restart descent of K over the orbit of `a`. Results depend only on
/// the config, not on the execution mode.
pub fn minimize_over_orbit(a: &ComplexMatrix, cfg: &OptimizerConfig) -> Result<MinimizationReport> {
    minimize_over_orbit_with(a, cfg, &Tolerances::default())
}

pub fn minimize_over_orbit_with(
    a: &ComplexMatrix,
    cfg: &OptimizerConfig,
    tol: &Tolerances,
) -> Result<MinimizationReport> {
    cfg.validate()?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    a.check_trace_free(tol)?;
    if a.is_scalar() {
        return Err(Error::ScalarMatrix);
    }
    let runs: Vec<Result<Run>> = cfg.execution.map(cfg.restarts, |r| {
        let start = restart_start(a, cfg, r)?;
        descend(start, cfg, tol)
    });
    let runs: Vec<Run> = runs.into_iter().collect::<Result<_>>()?;
    let best_restart = runs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.k.partial_cmp(&y.1.k).unwrap().then(x.0.cmp(&y.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let restarts = runs
        .iter()
        .map(|r| RestartSummary {
            best_k: r.k,
            iterations: r.iterations,
            converged: r.converged,
            diverging: r.diverging,
            floor_bound: r.floor_bound,
        })
        .collect();
    let diverging = runs.iter().any(|r| r.diverging);
    let floor_bound = runs.iter().any(|r| r.floor_bound);
    let best = runs.into_iter().nth(best_restart).unwrap();
    Ok(MinimizationReport {
        best_k: best.k,
        best_matrix: best.matrix,
        grad_residual_at_best: best.residual,
        iterations_used: best.iterations,
        k_trajectory: best.k_traj,
        iterate_norm_trajectory: best.norm_traj,
        diverging,
        converged: best.converged,
        floor_bound,
        best_restart,
        restarts,
    })
}

/// Largest relative change among characteristic polynomial coefficients.
pub fn char_poly_drift(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let scale = a.norm().max(1.0);
    a.char_poly()
        .iter()
        .zip(b.char_poly())
        .enumerate()
        .map(|(k, (x, y))| (x - y).norm() / scale.powi(k as i32))
        .fold(0.0, f64::max)
}
