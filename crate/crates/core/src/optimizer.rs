//! Critical torus orbits of the volume functional.
//!
//! Maximizing `Vol` is minimizing `φ(x) = −log Vol(x)`. When the Ricci form
//! is positive, `φ` is strictly convex and damped Newton converges to the
//! unique critical orbit; for Ricci ≤ 0 there is no interior maximum and
//! the solver reports that instead of returning a point.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::fd::{self, StepRule};
use crate::potential::ToricPotential;
use crate::toric::{orbit_log_volume, sorted_eigenvalues};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Newton steps longer than this are shortened.
    pub max_step: f64,
    /// Iterates beyond this radius are reported as divergent.
    pub divergence_radius: f64,
    pub armijo_c1: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: defaults::NEWTON_TOL,
            max_iter: defaults::NEWTON_MAX_ITER,
            max_step: defaults::NEWTON_MAX_STEP,
            divergence_radius: defaults::DIVERGENCE_RADIUS,
            armijo_c1: defaults::ARMIJO_C1,
            backtrack: defaults::BACKTRACK,
            max_backtracks: defaults::MAX_BACKTRACKS,
            fd_step: defaults::FD_STEP_BASE,
        }
    }
}

impl NewtonOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    /// Gradient rule; Richardson keeps the finite-difference bias of the
    /// critical point at O(h⁴).
    fn gradient_rule(&self) -> StepRule {
        StepRule::with_base(self.fd_step).richardson()
    }

    fn hessian_rule(&self) -> StepRule {
        StepRule::with_base(self.fd_step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Gradient below tolerance and `Hess φ` positive definite: a strict local maximum of Vol.
    Converged,
    /// Gradient below tolerance with `Hess φ` numerically zero: every nearby orbit is critical.
    DegenerateCritical,
    /// Gradient below tolerance but `Hess φ` has a nonpositive direction.
    NotMaximum,
    /// Iterates left the divergence radius; `φ` is unbounded below along the path.
    Diverged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalOrbitResult {
    pub x_star: Vec<f64>,
    pub grad_norm: f64,
    pub newton_iterations: usize,
    /// `Hess φ` at `x_star`, symmetrized.
    pub hessian_at_solution: DMatrix<f64>,
    pub hessian_eigenvalues: Vec<f64>,
    pub converged: bool,
    pub status: SolveStatus,
    /// `φ` at every accepted iterate, starting with `x0`.
    pub phi_history: Vec<f64>,
}

fn phi(p: &ToricPotential, x: &[f64]) -> Result<f64> {
    orbit_log_volume(p, x).map(|v| -v)
}

/// Gradient of `φ = −log Vol` by central differences.
pub fn phi_gradient(p: &ToricPotential, x: &[f64], rule: &StepRule) -> Result<DVector<f64>> {
    fd::gradient(|y| phi(p, y), x, rule)
}

pub fn phi_hessian(p: &ToricPotential, x: &[f64], rule: &StepRule) -> Result<DMatrix<f64>> {
    let h = fd::hessian(|y| phi(p, y), x, rule)?;
    Ok((&h + h.transpose()) * 0.5)
}

/// Damped Newton on `φ = −log Vol` with Armijo backtracking.
///
/// Indefinite Hessians are replaced by their absolute spectrum so every step
/// is a descent step; a saddle or minimum of `Vol` is never returned as
/// converged.
pub fn find_critical_orbit(p: &ToricPotential, x0: &[f64], opts: &NewtonOptions) -> Result<CriticalOrbitResult> {
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: x0.len() });
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::invalid("tol must be positive and max_iter nonzero"));
    }
    let (grule, hrule) = (opts.gradient_rule(), opts.hessian_rule());
    let n = p.dim();
    let mut x = x0.to_vec();
    let mut value = phi(p, &x)?;
    let mut history = vec![value];
    let mut status = SolveStatus::MaxIterations;
    let mut iterations = 0;

    let mut g = phi_gradient(p, &x, &grule)?;
    let mut hess = phi_hessian(p, &x, &hrule)?;
    while iterations < opts.max_iter {
        if g.norm() < opts.tol {
            status = SolveStatus::Converged;
            break;
        }
        let eig = hess.clone().symmetric_eigen();
        let spread = eig.eigenvalues.amax().max(1.0);
        let floor = 1e-8 * spread;
        let inv = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.abs().max(floor)));
        let mut step = -(&eig.eigenvectors * inv * eig.eigenvectors.transpose() * &g);
        let len = step.norm();
        if len > opts.max_step {
            step *= opts.max_step / len;
        }
        let slope = g.dot(&step);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + alpha * d).collect();
            if let Ok(v) = phi(p, &trial) {
                if v <= value + opts.armijo_c1 * alpha * slope {
                    accepted = Some((trial, v));
                    break;
                }
            }
            alpha *= opts.backtrack;
        }
        let Some((next, v)) = accepted else {
            status = SolveStatus::LineSearchFailed;
            break;
        };
        x = next;
        value = v;
        history.push(v);
        iterations += 1;

        if x.iter().map(|v| v * v).sum::<f64>().sqrt() > opts.divergence_radius {
            status = SolveStatus::Diverged;
            break;
        }
        match (phi_gradient(p, &x, &grule), phi_hessian(p, &x, &hrule)) {
            (Ok(ng), Ok(nh)) => {
                g = ng;
                hess = nh;
            }
            _ => {
                // the stencil left the Kähler domain: treat as escape to the boundary
                status = SolveStatus::Diverged;
                break;
            }
        }
        if iterations == opts.max_iter && g.norm() < opts.tol {
            status = SolveStatus::Converged;
        }
    }

    let hessian_eigenvalues = sorted_eigenvalues(&hess);
    if matches!(status, SolveStatus::Converged | SolveStatus::LineSearchFailed) && g.norm() < opts.tol {
        let top = hessian_eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let threshold = defaults::RICCI_TAU * (1.0 + top);
        status = if hessian_eigenvalues[0] > threshold {
            SolveStatus::Converged
        } else if top <= threshold {
            SolveStatus::DegenerateCritical
        } else {
            SolveStatus::NotMaximum
        };
    }
    debug_assert_eq!(hess.nrows(), n);
    Ok(CriticalOrbitResult {
        grad_norm: g.norm(),
        x_star: x,
        newton_iterations: iterations,
        hessian_at_solution: hess,
        hessian_eigenvalues,
        converged: status == SolveStatus::Converged,
        status,
        phi_history: history,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartReport {
    pub unique: bool,
    /// Largest pairwise distance between returned points.
    pub spread: f64,
    pub results: Vec<CriticalOrbitResult>,
}

/// Runs [`find_critical_orbit`] from every start.
///
/// `unique` holds when every run converged and all solutions lie within
/// `10·tol` of each other.
pub fn multistart_uniqueness(p: &ToricPotential, starts: &[Vec<f64>], opts: &NewtonOptions) -> Result<MultistartReport> {
    if starts.len() < 2 {
        return Err(Error::invalid("multistart needs at least two starts"));
    }
    let results: Vec<CriticalOrbitResult> = starts
        .par_iter()
        .map(|x0| find_critical_orbit(p, x0, opts))
        .collect::<Result<_>>()?;
    let mut spread: f64 = 0.0;
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            let d = a.x_star.iter().zip(&b.x_star).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            spread = spread.max(d);
        }
    }
    let unique = results.iter().all(|r| r.converged) && spread < 10.0 * opts.tol;
    Ok(MultistartReport { unique, spread, results })
}

/// `count` seeded uniform starts in `[lo, hi]^n`.
pub fn random_starts(n: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub decays_to_zero: bool,
    /// `(radius, sup of Vol on the sphere)`.
    pub sup_profile: Vec<(f64, f64)>,
    /// Sups strictly decrease over the second half of the radii.
    pub tail_decreasing: bool,
    /// Absolute floor the final sup must undercut.
    pub floor: f64,
    pub floor_rel: f64,
}

/// Deterministic points on the unit sphere of `R^n`.
///
/// Circle: equally spaced angles. Higher dimensions: the coordinate axes,
/// the two main diagonals, then seeded Gaussian directions.
pub fn sphere_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / count.max(4) as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            let mut dirs = Vec::new();
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; n];
                    e[i] = s;
                    dirs.push(e);
                }
            }
            let diag = 1.0 / (n as f64).sqrt();
            dirs.push(vec![diag; n]);
            dirs.push(vec![-diag; n]);
            let mut rng = ChaCha8Rng::seed_from_u64(defaults::SEED);
            while dirs.len() < count {
                let d: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    dirs.push(d.iter().map(|v| v / norm).collect());
                }
            }
            dirs
        }
    }
}

/// Sup of `Vol` over spheres `‖x‖ = R`.
///
/// `decays_to_zero` requires strictly decreasing sups over the tail (second
/// half of `radii`) and a final sup below `floor_rel × sup at the smallest
/// radius` (default [`defaults::DECAY_FLOOR_REL`]).
pub fn boundary_decay_check(
    p: &ToricPotential,
    radii: &[f64],
    samples_per_sphere: usize,
    floor_rel: Option<f64>,
) -> Result<DecayReport> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("radii must be positive and strictly increasing"));
    }
    let floor_rel = floor_rel.unwrap_or(defaults::DECAY_FLOOR_REL);
    let dirs = sphere_directions(p.dim(), samples_per_sphere);
    let mut sup_profile = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut sup: f64 = 0.0;
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|v| r * v).collect();
            sup = sup.max(orbit_log_volume(p, &x)?.exp());
        }
        sup_profile.push((r, sup));
    }
    let tail_start = radii.len() / 2;
    let tail_decreasing = radii.len() >= 2
        && sup_profile[tail_start.saturating_sub(1)..].windows(2).all(|w| w[1].1 < w[0].1);
    let floor = floor_rel * sup_profile[0].1;
    let decays_to_zero = tail_decreasing && sup_profile.last().unwrap().1 < floor;
    Ok(DecayReport { decays_to_zero, sup_profile, tail_decreasing, floor, floor_rel })
}
