use super::{combine, fixed_integrate, RunStats, StepMethod, StepOutcome};
use crate::error::{Aborted, StepError};
use crate::system::{Observer, OdeSystem, Rhs, Solution};

/// Classical fourth-order Runge-Kutta. No error estimate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Rk4;

impl StepMethod for Rk4 {
    fn name(&self) -> &'static str {
        "rk4"
    }

    fn order(&self) -> u32 {
        4
    }

    fn step(
        &self,
        sys: &dyn OdeSystem,
        t: f64,
        y: &[f64],
        h: f64,
    ) -> Result<StepOutcome, StepError> {
        rk4_step(sys, t, y, h)
    }
}

pub fn rk4_step(sys: &dyn OdeSystem, t: f64, y: &[f64], h: f64) -> Result<StepOutcome, StepError> {
    let d = y.len();
    let mut rhs = Rhs::new(sys, t);
    let mut k = vec![vec![0.0; d]; 4];
    let mut arg = vec![0.0; d];

    rhs.eval(0, t, y, &mut k[0])?;
    combine(y, 0.5 * h, &[1.0], &k[0..1], &mut arg);
    rhs.eval(1, t + 0.5 * h, &arg, &mut k[1])?;
    combine(y, 0.5 * h, &[1.0], &k[1..2], &mut arg);
    rhs.eval(2, t + 0.5 * h, &arg, &mut k[2])?;
    combine(y, h, &[1.0], &k[2..3], &mut arg);
    rhs.eval(3, t + h, &arg, &mut k[3])?;

    let mut y_next = vec![0.0; d];
    combine(y, h, &[1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0], &k, &mut y_next);
    Ok(StepOutcome {
        y_next,
        epsilon: 0.0,
        rhs_evals: rhs.evals,
    })
}

/// Fixed-step RK4 over `[t0, t_end]`.
pub fn rk4_integrate(
    sys: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    h: f64,
    obs: &mut dyn Observer,
) -> Result<Solution<RunStats>, Aborted<RunStats>> {
    fixed_integrate(&Rk4, sys, t0, y0, t_end, h, obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{FnSystem, Trajectory};
    use crate::systems::HarmonicOscillator;

    fn growth() -> FnSystem<impl Fn(f64, &[f64], &mut [f64]) + Sync> {
        FnSystem::new("exp", vec![1.0], |_, y, dy| dy[0] = y[0])
    }

    #[test]
    fn exponential_gives_taylor_polynomial() {
        let out = rk4_step(&growth(), 0.0, &[1.0], 0.1).unwrap();
        let h: f64 = 0.1;
        let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((out.y_next[0] - taylor).abs() < 1e-15);
        assert!((out.y_next[0] - 1.105_170_833_333_333).abs() < 1e-15);
        assert_eq!(out.rhs_evals, 4);
        assert_eq!(out.epsilon, 0.0);
    }

    #[test]
    fn constant_field() {
        let sys = FnSystem::new("zero", vec![3.0, -1.0], |_, _, dy| dy.fill(0.0));
        let out = rk4_step(&sys, 0.0, &[3.0, -1.0], 0.5).unwrap();
        assert_eq!(out.y_next, vec![3.0, -1.0]);
        assert_eq!(out.epsilon, 0.0);
    }

    #[test]
    fn oscillator_local_error_is_fifth_order() {
        let sys = HarmonicOscillator;
        let mut prev = f64::NAN;
        for h in [0.2, 0.1, 0.05] {
            let out = rk4_step(&sys, 0.0, &[0.0, 1.0], h).unwrap();
            let err = crate::norm::error_norm(&out.y_next, &[f64::sin(h), f64::cos(h)]);
            assert!(err < 0.01 * h.powi(5), "h = {h}: {err}");
            if prev.is_finite() {
                // local error ratio ~ 2^5
                assert!((prev / err - 32.0).abs() < 3.0, "ratio {}", prev / err);
            }
            prev = err;
        }
    }

    #[test]
    fn full_period_of_oscillator() {
        let sys = HarmonicOscillator;
        let sol = rk4_integrate(&sys, 0.0, &[0.0, 1.0], 2.0 * std::f64::consts::PI, 0.01, &mut ()).unwrap();
        assert!(crate::norm::error_norm(&sol.y, &[0.0, 1.0]) < 1e-8);
        assert_eq!(sol.stats.rhs_evals, 4 * sol.stats.accepted_steps);
    }

    #[test]
    fn empty_interval() {
        let mut traj = Trajectory::new();
        let sol = rk4_integrate(&growth(), 0.0, &[1.0], 0.0, 0.1, &mut traj).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(sol.stats.rhs_evals, 0);
        assert_eq!(sol.y, vec![1.0]);
    }

    #[test]
    fn polynomial_is_exact() {
        let sys = FnSystem::new("unit", vec![0.0], |_, _, dy| dy[0] = 1.0);
        let mut traj = Trajectory::new();
        let sol = rk4_integrate(&sys, 0.0, &[0.0], 1.0, 0.25, &mut traj).unwrap();
        assert_eq!(sol.y, vec![1.0]);
        assert_eq!(sol.stats.accepted_steps, 4);
        assert_eq!(sol.stats.rhs_evals, 16);
        assert_eq!(traj.len(), 5);
    }

    #[test]
    fn cubic_rhs_is_exact() {
        // y' = 4t^3 - 3t^2 + 1  =>  y = t^4 - t^3 + t
        let sys = FnSystem::new("cubic", vec![0.0], |t, _, dy| {
            dy[0] = 4.0 * t * t * t - 3.0 * t * t + 1.0
        });
        let sol = rk4_integrate(&sys, 0.0, &[0.0], 2.0, 0.5, &mut ()).unwrap();
        assert!((sol.y[0] - (16.0 - 8.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn non_finite_rhs_aborts_with_time() {
        let sys = FnSystem::new("blowup", vec![1.0], |t, _, dy| {
            dy[0] = if t > 0.6 { f64::NAN } else { 1.0 }
        });
        let err = rk4_integrate(&sys, 0.0, &[1.0], 1.0, 0.25, &mut ()).unwrap_err();
        assert_eq!(err.partial.t, 0.5);
        assert!(matches!(err.error, crate::IntegrateError::Step(_)));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(rk4_integrate(&growth(), 0.0, &[1.0], 1.0, 0.0, &mut ()).is_err());
        assert!(rk4_integrate(&growth(), 1.0, &[1.0], 0.0, 0.1, &mut ()).is_err());
        assert!(rk4_integrate(&growth(), 0.0, &[1.0, 2.0], 1.0, 0.1, &mut ()).is_err());
    }
}
