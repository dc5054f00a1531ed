//! Parallel explicit Runge-Kutta integration.
//!
//! The crate provides three steppers:
//!
//! * classical fixed-step RK4,
//! * the embedded Dormand-Prince 8(5,3) pair (`DOP853`) with its combined
//!   fifth/third order error estimate,
//! * a parallel iterated Runge-Kutta scheme (`PIRK`) built on the 5-stage,
//!   order-10 Gauss collocation tableau, whose stage evaluations within one
//!   iteration level run concurrently,
//!
//! and two adaptive drivers: the classical per-step controller and a
//! parallel step-size search in which `N` workers speculatively try spans
//! `h, 2h, ..., Nh` and the largest successful span is accepted
//! ([`control::aspa_integrate`]).
//!
//! All parallel work goes through [`exec::Executor`], which always joins in
//! index order, so results are bitwise identical for any worker count.
//!
//! ```
//! use odepar::control::{AdaptiveConfig, adaptive_integrate};
//! use odepar::integrators::Dop853;
//! use odepar::systems::HarmonicOscillator;
//! use odepar::OdeSystem;
//!
//! let sys = HarmonicOscillator;
//! let cfg = AdaptiveConfig::new(1e-12);
//! let sol = adaptive_integrate(&sys, &mut Dop853::new(), 0.0, &sys.initial_state(), 10.0, &cfg, &mut ())
//!     .unwrap();
//! assert!((sol.y[0] - 10f64.sin()).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments, clippy::result_large_err)]

pub mod bench;
pub mod control;
pub mod error;
pub mod exec;
pub mod integrators;
pub mod norm;
pub mod system;
pub mod systems;
pub mod tableau;

mod clock;

pub use error::{Aborted, IntegrateError, StepError};
pub use norm::error_norm;
pub use system::{FnSystem, Observer, OdeSystem, Solution, Trajectory};
pub use tableau::ButcherTableau;
