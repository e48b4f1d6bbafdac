//! Numerical search over the reduced problem, used to check the closed form.
//!
//! The objective `f(V) = ||q + V† u||²` is convex, so its maximum over the
//! ball `tr(V V†) <= ê_t` sits on the boundary. Projected gradient ascent
//! with backtracking, started from several random points, has to land on the
//! closed-form value if that value is the global maximum.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::detection::limit_factor;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::waveform::{ReducedProblem, Scenario};
use crate::C64;

/// Relative objective change below which a restart counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub best_value: f64,
    /// Closed-form maximum of `f`.
    pub closed_form_value: f64,
    /// `(closed - best) / closed`; negative means the search beat the formula.
    pub relative_gap: f64,
    pub restarts: usize,
    pub iterations_total: usize,
    /// Every restart met the convergence criterion before `max_iters`.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartOutcome {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl OracleReport {
    /// Merges restart outcomes in the order given.
    pub fn from_restarts(closed_form_value: f64, outcomes: &[RestartOutcome]) -> Self {
        let best_value = outcomes.iter().map(|o| o.value).fold(f64::NEG_INFINITY, f64::max);
        let relative_gap = if closed_form_value > 0.0 {
            (closed_form_value - best_value) / closed_form_value
        } else {
            closed_form_value - best_value
        };
        Self {
            best_value,
            closed_form_value,
            relative_gap,
            restarts: outcomes.len(),
            iterations_total: outcomes.iter().map(|o| o.iterations).sum(),
            converged: outcomes.iter().all(|o| o.converged),
        }
    }
}

/// Closed-form maximum of the reduced objective,
/// `( sqrt(ê_t N_T (1 - G²)) + G ||d_c|| )²`.
pub fn reduced_closed_form(scenario: &Scenario) -> Result<f64> {
    let problem_energy = crate::waveform::residual_energy(scenario);
    if problem_energy < 0.0 {
        return Err(Error::Infeasible { deficit: -problem_energy });
    }
    Ok(limit_factor(scenario.gain(), problem_energy, scenario.array().n_tx(), scenario.comm_energy()))
}

/// Best of `restarts` projected-gradient runs against the closed form.
pub fn oracle_maximize(scenario: &Scenario, restarts: usize, max_iters: usize, seed: u64) -> Result<OracleReport> {
    if restarts == 0 {
        return Err(Error::Domain { name: "restarts", value: 0.0 });
    }
    let problem = ReducedProblem::new(scenario)?;
    let closed = reduced_closed_form(scenario)?;
    let outcomes: Vec<RestartOutcome> =
        (0..restarts as u64).map(|r| oracle_restart(&problem, max_iters, seed, r)).collect();
    Ok(OracleReport::from_restarts(closed, &outcomes))
}

fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Scales `v` back onto the ball `||v||_F <= radius` if it left it.
fn project(v: &mut CMatrix, radius: f64) {
    let norm = libm::sqrt(v.frobenius_norm_sqr());
    if norm > radius {
        if radius == 0.0 {
            v.scale(0.0);
        } else {
            v.scale(radius / norm);
        }
    }
}

/// One projected-gradient ascent run from a random interior point. Restart
/// `restart` draws from its own ChaCha8 stream of `seed`, so runs are
/// independent of evaluation order.
pub fn oracle_restart(problem: &ReducedProblem, max_iters: usize, seed: u64, restart: u64) -> RestartOutcome {
    let radius = libm::sqrt(problem.residual_energy);
    let (rows, cols) = problem.v_shape();
    let mut rng = restart_rng(seed, restart);

    let mut v = random_matrix(&mut rng, rows, cols);
    let norm = libm::sqrt(v.frobenius_norm_sqr());
    let start_radius: f64 = radius * rng.random::<f64>();
    if norm > 0.0 {
        v.scale(start_radius / norm);
    }
    let mut value = problem.objective(&v);

    let u_norm2: f64 = problem.u.iter().map(|z| z.norm_sqr()).sum();
    if radius == 0.0 || u_norm2 == 0.0 {
        return RestartOutcome { value, iterations: 0, converged: true };
    }
    // The gradient is 2 ||u||²-Lipschitz.
    let mut step = 1.0 / u_norm2;

    for iter in 1..=max_iters {
        let grad = problem.gradient(&v);
        let mut accepted = None;
        for _ in 0..60 {
            let mut candidate = v.clone();
            for (c, g) in candidate.as_mut_slice().iter_mut().zip(grad.as_slice()) {
                *c += g * step;
            }
            project(&mut candidate, radius);
            let candidate_value = problem.objective(&candidate);
            if candidate_value >= value {
                accepted = Some((candidate, candidate_value));
                break;
            }
            step *= 0.5;
        }
        let Some((candidate, candidate_value)) = accepted else {
            return RestartOutcome { value, iterations: iter, converged: true };
        };
        let change = (candidate_value - value) / candidate_value.abs().max(f64::MIN_POSITIVE);
        v = candidate;
        value = candidate_value;
        step *= 2.0;
        if change < CONVERGENCE_TOL {
            return RestartOutcome { value, iterations: iter, converged: true };
        }
    }
    RestartOutcome { value, iterations: max_iters, converged: false }
}

/// Largest relative disagreement between the analytic gradient of `f` and
/// central finite differences (step `1e-6`) over random entries of a random
/// `V`.
pub fn gradient_check(scenario: &Scenario, seed: u64) -> Result<f64> {
    let problem = ReducedProblem::new(scenario)?;
    let (rows, cols) = problem.v_shape();
    let mut rng = restart_rng(seed, u64::MAX);
    let v = random_matrix(&mut rng, rows, cols);
    Ok(gradient_error(&problem, &v, &mut rng, 16))
}

pub(crate) fn gradient_error(problem: &ReducedProblem, v: &CMatrix, rng: &mut impl Rng, probes: usize) -> f64 {
    const H: f64 = 1e-6;
    let (rows, cols) = problem.v_shape();
    let grad = problem.gradient(v);
    let scale = grad.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = 1e-8 * (1.0 + scale);

    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let (i, j) = (rng.random_range(0..rows), rng.random_range(0..cols));
        for (unit, analytic) in [(C64::new(1.0, 0.0), grad[(i, j)].re), (C64::new(0.0, 1.0), grad[(i, j)].im)] {
            let mut plus = v.clone();
            plus[(i, j)] += unit * H;
            let mut minus = v.clone();
            minus[(i, j)] -= unit * H;
            let fd = (problem.objective(&plus) - problem.objective(&minus)) / (2.0 * H);
            let err = (fd - analytic).abs() / analytic.abs().max(fd.abs()).max(floor);
            worst = worst.max(err);
        }
    }
    worst
}
