//! One-step schemes: RK4, DOP853 and PIRK.

mod dop853;
mod pirk;
mod rk4;

use std::time::Duration;

pub use dop853::{dop853_step, dop853_tableau, Dop853, Dop853Workspace};
pub use pirk::{pirk_step, Pirk, PirkConfig};
pub use rk4::{rk4_integrate, rk4_step, Rk4};

use crate::clock::Stopwatch;
use crate::error::{Aborted, IntegrateError, StepError};
use crate::system::{Observer, OdeSystem, Solution};

/// Result of one step: the proposed state and its local error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub y_next: Vec<f64>,
    /// Embedded local error estimate; zero for methods without one.
    pub epsilon: f64,
    pub rhs_evals: u64,
}

/// A stateless one-step method. Every call is a cold step from `(t, y)`.
///
/// This is what parallel probes run, so implementations must be shareable
/// across threads.
pub trait StepMethod: Sync {
    fn name(&self) -> &'static str;

    /// Order `p` used by the step-size controller exponent.
    fn order(&self) -> u32;

    fn step(
        &self,
        sys: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<StepOutcome, StepError>;
}

/// A stepper driven by a serial adaptive loop; it may keep state between
/// attempts (e.g. a first-same-as-last cache).
pub trait AdaptiveStepper {
    fn order(&self) -> u32;

    fn attempt(
        &mut self,
        sys: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<StepOutcome, StepError>;
}

/// Counters for a serial run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunStats {
    /// Controller invocations, i.e. accepted plus rejected attempts.
    pub corrections: u64,
    pub accepted_steps: u64,
    pub rhs_evals: u64,
    pub wall_time: Duration,
}

/// Computes `y + h * sum_j w_j k_j` with `j` in increasing order.
pub(crate) fn combine(y: &[f64], h: f64, weights: &[f64], k: &[Vec<f64>], out: &mut [f64]) {
    out.copy_from_slice(y);
    for (w, kj) in weights.iter().zip(k) {
        if *w == 0.0 {
            continue;
        }
        let hw = h * w;
        for (o, v) in out.iter_mut().zip(kj) {
            *o += hw * v;
        }
    }
}

/// Step count and boundaries for a fixed-step sweep of `[t0, t_end]`.
///
/// The last step is shortened when `h` does not divide the interval.
pub(crate) fn fixed_grid(t0: f64, t_end: f64, h: f64) -> usize {
    let ratio = (t_end - t0) / h;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Integrates with constant step `h`, ignoring any error estimate.
pub fn fixed_integrate(
    method: &dyn StepMethod,
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    h: f64,
    obs: &mut dyn Observer,
) -> Result<Solution<RunStats>, Aborted<RunStats>> {
    let clock = Stopwatch::start();
    let mut stats = RunStats::default();
    let mut sol = Solution { t: t0, y: y0.to_vec(), stats };

    let bad = |msg: String, sol: Solution<RunStats>| Err(Aborted::new(IntegrateError::InvalidInput(msg), sol));
    if y0.len() != sys.dim() {
        return bad(format!("initial state has dimension {}, system has {}", y0.len(), sys.dim()), sol);
    }
    if !(h > 0.0 && h.is_finite()) {
        return bad(format!("step size must be positive, got {h}"), sol);
    }
    if !(t_end >= t0) {
        return bad(format!("t_end = {t_end} precedes t0 = {t0}"), sol);
    }

    obs.observe(t0, y0);
    let n = if t_end > t0 { fixed_grid(t0, t_end, h) } else { 0 };
    let mut y = y0.to_vec();
    let mut t = t0;
    for k in 0..n {
        let t_next = if k + 1 == n { t_end } else { t0 + (k + 1) as f64 * h };
        match method.step(sys, t, &y, t_next - t) {
            Ok(out) => {
                stats.rhs_evals += out.rhs_evals;
                stats.accepted_steps += 1;
                y = out.y_next;
                t = t_next;
                obs.observe(t, &y);
            }
            Err(e) => {
                stats.rhs_evals += e.rhs_evals();
                stats.wall_time = clock.elapsed();
                sol = Solution { t, y, stats };
                return Err(Aborted::new(e.into(), sol));
            }
        }
    }
    stats.wall_time = clock.elapsed();
    Ok(Solution { t, y, stats })
}
