//! Parallel iterated Runge-Kutta.
//!
//! The stage equations of an implicit base tableau are solved by `m` rounds
//! of fixed-point iteration started from `k_i = f(t, y)`. Within one round
//! the `s` stage evaluations are independent and run on the executor; the
//! rounds themselves are sequential. With `m` rounds the scheme is an
//! explicit method of order `min(p0, m + 1)`.
//!
//! The error estimate compares the solutions built from the last two
//! iterates.

use super::{combine, AdaptiveStepper, StepMethod, StepOutcome};
use crate::error::StepError;
use crate::exec::Executor;
use crate::norm::error_norm;
use crate::system::{OdeSystem, Rhs};
use crate::tableau::{gauss10, ButcherTableau};

#[derive(Debug, Clone, PartialEq)]
pub struct PirkConfig {
    pub base: ButcherTableau,
    /// Fixed-point iterations, at least 1.
    pub m: usize,
    /// Threads used for the stage evaluations of one iteration.
    pub workers: usize,
}

impl PirkConfig {
    /// Gauss order-10 base with one worker per stage.
    pub fn pirk10(m: usize) -> Self {
        PirkConfig {
            base: gauss10(),
            m,
            workers: 5,
        }
    }

    /// `min(p0, m + 1)`.
    pub fn effective_order(&self) -> u32 {
        self.base.order().min(self.m as u32 + 1)
    }
}

/// One PIRK step. Costs `1 + m * s` evaluations.
pub fn pirk_step(
    sys: &dyn OdeSystem,
    t: f64,
    y: &[f64],
    h: f64,
    cfg: &PirkConfig,
    exec: &Executor,
) -> Result<StepOutcome, StepError> {
    assert!(cfg.m >= 1, "PIRK needs at least one iteration");
    let base = &cfg.base;
    let s = base.stages();
    let d = y.len();

    let mut k0 = vec![0.0; d];
    let mut rhs = Rhs::new(sys, t);
    rhs.eval(0, t, y, &mut k0)?;
    let mut evals = rhs.evals;

    let mut current = vec![k0; s];
    let mut previous = current.clone();
    for _ in 0..cfg.m {
        let next = exec.map(s, |i| {
            let mut arg = vec![0.0; d];
            combine(y, h, base.a_row(i), &current, &mut arg);
            let mut k = vec![0.0; d];
            Rhs::new(sys, t)
                .eval(i, t + base.c()[i] * h, &arg, &mut k)
                .map(|_| k)
        });
        evals += s as u64;
        let next = next
            .into_iter()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| match e {
                StepError::NonFinite { t, stage, .. } => StepError::NonFinite {
                    t,
                    stage,
                    rhs_evals: evals,
                },
            })?;
        previous = std::mem::replace(&mut current, next);
    }

    let mut y_next = vec![0.0; d];
    combine(y, h, base.b(), &current, &mut y_next);
    let mut y_bar = vec![0.0; d];
    combine(y, h, base.b(), &previous, &mut y_bar);

    Ok(StepOutcome {
        epsilon: error_norm(&y_next, &y_bar),
        y_next,
        rhs_evals: evals,
    })
}

/// A PIRK stepper with its own stage executor.
#[derive(Debug, Clone)]
pub struct Pirk {
    cfg: PirkConfig,
    exec: Executor,
}

impl Pirk {
    pub fn new(cfg: PirkConfig) -> Self {
        let exec = Executor::new(cfg.workers);
        Pirk { cfg, exec }
    }

    pub fn with_executor(cfg: PirkConfig, exec: Executor) -> Self {
        Pirk { cfg, exec }
    }

    pub fn config(&self) -> &PirkConfig {
        &self.cfg
    }
}

impl StepMethod for Pirk {
    fn name(&self) -> &'static str {
        "pirk"
    }

    fn order(&self) -> u32 {
        self.cfg.effective_order()
    }

    fn step(
        &self,
        sys: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<StepOutcome, StepError> {
        pirk_step(sys, t, y, h, &self.cfg, &self.exec)
    }
}

impl AdaptiveStepper for Pirk {
    fn order(&self) -> u32 {
        self.cfg.effective_order()
    }

    fn attempt(
        &mut self,
        sys: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<StepOutcome, StepError> {
        pirk_step(sys, t, y, h, &self.cfg, &self.exec)
    }
}
