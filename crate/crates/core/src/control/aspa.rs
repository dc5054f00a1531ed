//! Parallel step-size search.
//!
//! Each iteration runs `N` probes from the current point `(t_n, y_n)`; probe
//! `i` takes one embedded step of span `i * h_n`. With `m` the largest index
//! whose error meets the tolerance (0 if none), the point advances to probe
//! `m`'s result and the step is updated by
//!
//! ```text
//! h_{n+1} = [ (2N - 1) / (N + 1)^2 * m  +  N / ((2N - 1)(N + 1)) ] * h_n
//! ```
//!
//! The ratio lies in `(0, 1/2)` at `m = 0` and in `(3/4, 2)` at `m = N`,
//! and for `N >= 3` it never equals 1, so `h_n` keeps oscillating around the
//! step at which about half the probes succeed.

use std::time::Duration;

use super::classical::{check_inputs, Controller};
use crate::clock::Stopwatch;
use crate::error::{Aborted, IntegrateError};
use crate::exec::{probe_batch, Executor, ProbeTask};
use crate::integrators::{RunStats, StepMethod};
use crate::system::{Observer, OdeSystem, Solution};

/// Step ratio `h_{n+1} / h_n` for `m` successes out of `n` probes.
pub fn aspa_ratio(m: usize, n: usize) -> f64 {
    assert!(n >= 1, "need at least one probe");
    assert!(m <= n, "m = {m} exceeds the probe count {n}");
    let nf = n as f64;
    let two_n_minus_1 = 2.0 * nf - 1.0;
    two_n_minus_1 / ((nf + 1.0) * (nf + 1.0)) * m as f64 + nf / (two_n_minus_1 * (nf + 1.0))
}

/// Applies the step recurrence.
///
/// # Panics
///
/// If `m > n` or `n == 0`.
pub fn aspa_next_step(h: f64, m: usize, n: usize) -> f64 {
    aspa_ratio(m, n) * h
}

/// The real `m` at which the ratio would equal 1:
/// `(N + 1)(2N^2 - 1) / (2N - 1)^2`.
pub fn growth_threshold(n: usize) -> f64 {
    let nf = n as f64;
    (nf + 1.0) * (2.0 * nf * nf - 1.0) / ((2.0 * nf - 1.0) * (2.0 * nf - 1.0))
}

/// True iff no integer `m` in `0..=n` makes the recurrence a fixed point,
/// i.e. `m (2N-1)^2 + N (N+1) != (N+1)^2 (2N-1)` for all `m`. Exact
/// integer arithmetic.
pub fn aspa_fixed_point_free(n: u64) -> Result<bool, IntegrateError> {
    if n < 3 {
        return Err(IntegrateError::InvalidInput(format!(
            "fixed-point freeness is only defined for N >= 3, got {n}"
        )));
    }
    let n = n as u128;
    let lhs_step = (2 * n - 1) * (2 * n - 1);
    let offset = n * (n + 1);
    let rhs = (n + 1) * (n + 1) * (2 * n - 1);
    Ok((0..=n).all(|m| m * lhs_step + offset != rhs))
}

/// Largest 1-based index with `errors[i-1] <= tol`, or 0.
///
/// Earlier failures do not matter: only the largest success counts.
pub fn select_m(errors: &[f64], tol: f64) -> usize {
    errors
        .iter()
        .rposition(|&e| e <= tol)
        .map_or(0, |i| i + 1)
}

/// How the first step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialStep {
    /// `(t_end - t0) / N`: the first batch covers the whole interval.
    SpanOverProbes,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspaConfig {
    /// Logical probe count `N`.
    pub n_cpu: usize,
    pub tol: f64,
    pub h0: InitialStep,
    /// Underflow guard; defaults to `1e-14 * (t_end - t0)`.
    pub h_min: Option<f64>,
    /// Cap on iterations.
    pub max_steps: u64,
}

impl AspaConfig {
    pub fn new(n_cpu: usize, tol: f64) -> Self {
        AspaConfig {
            n_cpu,
            tol,
            h0: InitialStep::SpanOverProbes,
            h_min: None,
            max_steps: 50_000_000,
        }
    }

    /// False for `N < 3`, where the recurrence cannot grow the step and the
    /// driver falls back to the classical controller.
    pub fn uses_recurrence(&self) -> bool {
        self.n_cpu >= 3
    }
}

/// Per-run trace.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AspaStats {
    /// `h_0, h_1, ...`; entry `n` is the step actually probed at iteration
    /// `n` (after end-of-interval truncation), the last entry is the step
    /// that would be used next.
    pub h_history: Vec<f64>,
    /// Successful probe count per iteration.
    pub m_history: Vec<usize>,
    /// Probe batches run; always `h_history.len() - 1`.
    pub corrections: u64,
    /// Iterations with `m > 0`.
    pub accepted_steps: u64,
    pub total_rhs_evals: u64,
    pub wall_time: Duration,
}

impl AspaStats {
    pub fn run_stats(&self) -> RunStats {
        RunStats {
            corrections: self.corrections,
            accepted_steps: self.accepted_steps,
            rhs_evals: self.total_rhs_evals,
            wall_time: self.wall_time,
        }
    }

    /// Mean of `m` over iterations `from..`.
    pub fn mean_m(&self, from: usize) -> f64 {
        let tail = &self.m_history[from.min(self.m_history.len())..];
        tail.iter().sum::<usize>() as f64 / tail.len().max(1) as f64
    }
}

/// Integrates with `cfg.n_cpu` speculative probes per iteration.
///
/// `inner` supplies the embedded step; `exec` decides how many probes run at
/// once, which never changes the result.
///
/// For `N < 3` the recurrence shrinks the step for every `m`, so the run
/// could never finish. In that case the next step is chosen by the
/// classical controller applied to probe `N`'s error:
/// `h_{n+1} = controller(N h_n, eps_N) / N`. With `N = 1` this is exactly a
/// serial adaptive run of `inner` without first-stage reuse.
pub fn aspa_integrate(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    cfg: &AspaConfig,
    inner: &dyn StepMethod,
    exec: &Executor,
    obs: &mut dyn Observer,
) -> Result<Solution<AspaStats>, Aborted<AspaStats>> {
    let clock = Stopwatch::start();
    let mut stats = AspaStats::default();
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
    if cfg.n_cpu == 0 {
        abort!(IntegrateError::InvalidInput("n_cpu must be at least 1".into()));
    }

    let n = cfg.n_cpu;
    let span = t_end - t0;
    let h_min = cfg.h_min.unwrap_or(1e-14 * span);
    let fallback = Controller::default();
    let order = inner.order();
    let mut h = match cfg.h0 {
        InitialStep::SpanOverProbes => span / n as f64,
        InitialStep::Fixed(h) => h,
    };
    stats.h_history.push(h);
    obs.observe(t0, y0);

    while t < t_end {
        if stats.corrections >= cfg.max_steps {
            abort!(IntegrateError::MaxSteps(cfg.max_steps));
        }
        if !(h >= h_min) {
            abort!(IntegrateError::StepUnderflow { t, h, h_min });
        }

        let remaining = t_end - t;
        let truncated = n as f64 * h >= remaining;
        let tasks = if truncated {
            h = remaining / n as f64;
            *stats.h_history.last_mut().expect("history starts non-empty") = h;
            let mut tasks = ProbeTask::batch(h, n);
            tasks[n - 1].span = remaining;
            tasks
        } else {
            ProbeTask::batch(h, n)
        };

        let results = match probe_batch(&tasks, t, &y, inner, sys, cfg.tol, exec) {
            Ok(r) => r,
            Err(e) => abort!(e),
        };
        stats.total_rhs_evals += results.iter().map(|r| r.rhs_evals).sum::<u64>();
        let errors: Vec<f64> = results.iter().map(|r| r.epsilon).collect();
        let m = select_m(&errors, cfg.tol);
        debug_assert!(m == 0 || results[m - 1].success);

        stats.corrections += 1;
        stats.m_history.push(m);

        let h_next = if cfg.uses_recurrence() {
            aspa_next_step(h, m, n)
        } else {
            let widest = tasks[n - 1].span;
            fallback.next_step(widest, errors[n - 1], cfg.tol, order) / n as f64
        };

        if m > 0 {
            t = if truncated && m == n { t_end } else { t + tasks[m - 1].span };
            y = results.into_iter().nth(m - 1).expect("m indexes a probe").y_probe;
            stats.accepted_steps += 1;
            obs.observe(t, &y);
        }

        h = h_next;
        stats.h_history.push(h);
    }

    stats.wall_time = clock.elapsed();
    Ok(Solution { t, y, stats })
}
