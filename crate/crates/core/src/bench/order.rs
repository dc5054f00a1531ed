//! Convergence order measured from fixed-step runs.

use serde::Serialize;

use super::{BenchError, Method};
use crate::exec::Executor;
use crate::integrators::{fixed_integrate, Dop853, Pirk, PirkConfig, Rk4, StepMethod};
use crate::norm::error_norm;
use crate::system::OdeSystem;

/// Errors below this are roundoff, not truncation, and are left out of the
/// fit.
pub const SATURATION_FLOOR: f64 = 1e-14;

/// Global error at `t_end` for one step size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderPoint {
    pub h: f64,
    pub error: f64,
    pub saturated: bool,
}

/// Least-squares slope of `log(error)` against `log(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub points: Vec<OrderPoint>,
    /// Points that entered the fit.
    pub used: usize,
}

/// Measures the order of `method` on `sys` by integrating `[0, t_end]` at
/// each step in `h_list` with the error estimate ignored. `m` is the PIRK
/// iteration count and is ignored by other methods.
pub fn convergence_order(
    method: Method,
    sys: &dyn OdeSystem,
    h_list: &[f64],
    t_end: f64,
    m: usize,
) -> Result<OrderFit, BenchError> {
    if h_list.len() < 2 {
        return Err(BenchError::Usage("need at least two step sizes".into()));
    }
    if sys.analytic(0.0).is_none() {
        return Err(BenchError::Usage(format!("system {} has no analytic solution", sys.name())));
    }
    if !(t_end > 0.0) {
        return Err(BenchError::Usage(format!("t_end must be positive, got {t_end}")));
    }
    let stepper: Box<dyn StepMethod> = match method {
        Method::Rk4 => Box::new(Rk4),
        Method::Dop853 => Box::new(Dop853::new()),
        Method::Pirk10 => {
            if m == 0 {
                return Err(BenchError::Usage("--m must be at least 1".into()));
            }
            Box::new(Pirk::with_executor(PirkConfig::pirk10(m), Executor::serial()))
        }
        Method::Dop853Aspa => {
            return Err(BenchError::Usage("order is measured on fixed-step methods only".into()))
        }
    };

    let y0 = sys.initial_state();
    let exact = sys.analytic(t_end).expect("checked above");
    let mut points = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let sol = fixed_integrate(stepper.as_ref(), sys, 0.0, &y0, t_end, h, &mut ())?;
        let error = error_norm(&sol.y, &exact);
        points.push(OrderPoint { h, error, saturated: !(error >= SATURATION_FLOOR) });
    }

    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.saturated && p.error.is_finite())
        .map(|p| (p.h.ln(), p.error.ln()))
        .collect();
    if usable.len() < 2 {
        return Err(BenchError::Numeric(format!(
            "only {} of {} errors lie above the roundoff floor",
            usable.len(),
            points.len()
        )));
    }
    Ok(OrderFit { slope: least_squares_slope(&usable), points, used: usable.len() })
}

fn least_squares_slope(xy: &[(f64, f64)]) -> f64 {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xy.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
