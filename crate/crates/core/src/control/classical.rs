//! Per-step controller and the serial adaptive loop.

use super::super::integrators::{AdaptiveStepper, Dop853, Pirk, PirkConfig, RunStats};
use crate::clock::Stopwatch;
use crate::error::{Aborted, IntegrateError};
use crate::system::{Observer, OdeSystem, Solution};

/// `h_opt = safety * h * (tol / eps)^(1/p)`, with the ratio clamped to
/// `[min_ratio, max_ratio]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller {
    pub safety: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl Default for Controller {
    fn default() -> Self {
        Controller {
            safety: 0.9,
            min_ratio: 0.2,
            max_ratio: 5.0,
        }
    }
}

impl Controller {
    /// The bare formula: no safety factor, no clamps.
    pub fn raw() -> Self {
        Controller {
            safety: 1.0,
            min_ratio: 0.0,
            max_ratio: f64::INFINITY,
        }
    }

    pub fn next_step(&self, h: f64, epsilon: f64, tol: f64, p: u32) -> f64 {
        assert!(p >= 1, "controller order must be at least 1");
        let ratio = if epsilon == 0.0 {
            self.max_ratio
        } else {
            (self.safety * (tol / epsilon).powf(1.0 / p as f64)).clamp(self.min_ratio, self.max_ratio)
        };
        h * ratio
    }
}

/// Next step from the default controller (safety 0.9, ratio in `[0.2, 5]`).
pub fn classical_next_step(h: f64, epsilon: f64, tol: f64, p: u32) -> f64 {
    Controller::default().next_step(h, epsilon, tol, p)
}

/// Settings for [`adaptive_integrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveConfig {
    /// Absolute tolerance on the embedded error estimate.
    pub tol: f64,
    /// First attempted step; defaults to the whole interval.
    pub h_init: Option<f64>,
    /// Underflow guard; defaults to `1e-14 * (t_end - t0)`.
    pub h_min: Option<f64>,
    /// Cap on step attempts.
    pub max_steps: u64,
    pub controller: Controller,
}

impl AdaptiveConfig {
    pub fn new(tol: f64) -> Self {
        AdaptiveConfig {
            tol,
            h_init: None,
            h_min: None,
            max_steps: 50_000_000,
            controller: Controller::default(),
        }
    }
}

pub(crate) fn check_inputs(sys: &dyn OdeSystem, t0: f64, y0: &[f64], t_end: f64, tol: f64) -> Result<(), IntegrateError> {
    let bad = |m: String| Err(IntegrateError::InvalidInput(m));
    if y0.len() != sys.dim() {
        return bad(format!("initial state has dimension {}, system has {}", y0.len(), sys.dim()));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return bad("initial state is not finite".into());
    }
    if !(t0.is_finite() && t_end.is_finite() && t_end >= t0) {
        return bad(format!("invalid interval [{t0}, {t_end}]"));
    }
    if !(tol > 0.0) {
        return bad(format!("tolerance must be positive, got {tol}"));
    }
    Ok(())
}

/// Serial adaptive integration: a step is accepted iff its error estimate
/// is at most `tol`; every attempt counts as one correction.
pub fn adaptive_integrate(
    sys: &dyn OdeSystem,
    stepper: &mut dyn AdaptiveStepper,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    cfg: &AdaptiveConfig,
    obs: &mut dyn Observer,
) -> Result<Solution<RunStats>, Aborted<RunStats>> {
    let clock = Stopwatch::start();
    let mut stats = RunStats::default();
    let mut t = t0;
    let mut y = y0.to_vec();

    macro_rules! abort {
        ($err:expr) => {{
            stats.wall_time = clock.elapsed();
            return Err(Aborted::new($err, Solution { t, y, stats }));
        }};
    }

    if let Err(e) = check_inputs(sys, t0, y0, t_end, cfg.tol) {
        abort!(e);
    }
    obs.observe(t0, y0);

    let span = t_end - t0;
    let h_min = cfg.h_min.unwrap_or(1e-14 * span);
    let p = stepper.order();
    let ctrl = cfg.controller;
    let mut h = cfg.h_init.unwrap_or(span).min(span);

    while t < t_end {
        if stats.corrections >= cfg.max_steps {
            abort!(IntegrateError::MaxSteps(cfg.max_steps));
        }
        if h < h_min {
            abort!(IntegrateError::StepUnderflow { t, h, h_min });
        }
        let remaining = t_end - t;
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };

        stats.corrections += 1;
        h = match stepper.attempt(sys, t, &y, h_try) {
            Ok(out) if !out.epsilon.is_nan() => {
                stats.rhs_evals += out.rhs_evals;
                if out.epsilon <= cfg.tol {
                    t = if last { t_end } else { t + h_try };
                    y = out.y_next;
                    stats.accepted_steps += 1;
                    obs.observe(t, &y);
                }
                ctrl.next_step(h_try, out.epsilon, cfg.tol, p)
            }
            Ok(out) => {
                stats.rhs_evals += out.rhs_evals;
                h_try * ctrl.min_ratio
            }
            Err(e) => {
                stats.rhs_evals += e.rhs_evals();
                h_try * ctrl.min_ratio
            }
        };
    }

    stats.wall_time = clock.elapsed();
    Ok(Solution { t, y, stats })
}

/// Serial adaptive DOP853 (exponent order 8).
pub fn dop853_integrate(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    cfg: &AdaptiveConfig,
    obs: &mut dyn Observer,
) -> Result<Solution<RunStats>, Aborted<RunStats>> {
    adaptive_integrate(sys, &mut Dop853::new(), t0, y0, t_end, cfg, obs)
}

/// Adaptive PIRK with controller order `min(p0, m + 1)`.
pub fn pirk_integrate(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    cfg: &AdaptiveConfig,
    pirk: &PirkConfig,
    obs: &mut dyn Observer,
) -> Result<Solution<RunStats>, Aborted<RunStats>> {
    adaptive_integrate(sys, &mut Pirk::new(pirk.clone()), t0, y0, t_end, cfg, obs)
}
