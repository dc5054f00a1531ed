//! Step-size control: the classical per-step controller and the parallel
//! probe search.

mod aspa;
mod classical;

pub use aspa::{
    aspa_fixed_point_free, aspa_integrate, aspa_next_step, aspa_ratio, growth_threshold,
    select_m, AspaConfig, AspaStats, InitialStep,
};
pub use classical::{
    adaptive_integrate, classical_next_step, dop853_integrate, pirk_integrate, AdaptiveConfig,
    Controller,
};
