//! Browser bindings for the odepar demo page.
//!
//! Three operations are exposed: a step-size trace of the parallel probe
//! search, a Henon-Heiles orbit with its energy error, and a convergence
//! order measurement. Everything runs on the page's thread.

use odepar::bench::{convergence_order, Method};
use odepar::control::{aspa_integrate, dop853_integrate, AdaptiveConfig, AspaConfig};
use odepar::exec::Executor;
use odepar::integrators::Dop853;
use odepar::systems::{by_name, hh_hamiltonian, HarmonicOscillator, HenonHeiles};
use odepar::{OdeSystem, Trajectory};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Per-iteration step sizes and success counts of one probe-search run.
#[wasm_bindgen]
pub struct StepTrace {
    h: Vec<f64>,
    m: Vec<u32>,
    accepted: u64,
    rhs_evals: u64,
}

#[wasm_bindgen]
impl StepTrace {
    /// `h_0, h_1, ...`; one longer than `m`.
    #[wasm_bindgen(getter)]
    pub fn h(&self) -> Vec<f64> {
        self.h.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn m(&self) -> Vec<u32> {
        self.m.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn corrections(&self) -> f64 {
        self.m.len() as f64
    }

    #[wasm_bindgen(getter)]
    pub fn accepted(&self) -> f64 {
        self.accepted as f64
    }

    #[wasm_bindgen(getter, js_name = rhsEvals)]
    pub fn rhs_evals(&self) -> f64 {
        self.rhs_evals as f64
    }
}

/// Runs the probe search with `n_cpu` probes on a named system.
#[wasm_bindgen(js_name = stepTrace)]
pub fn step_trace(system: &str, t_end: f64, tol: f64, n_cpu: usize) -> Result<StepTrace, JsError> {
    let sys = by_name(system).map_err(js_err)?;
    let cfg = AspaConfig::new(n_cpu, tol);
    let sol = aspa_integrate(&sys, 0.0, &sys.initial_state(), t_end, &cfg, &Dop853::new(), &Executor::serial(), &mut ())
        .map_err(|a| js_err(a.error))?;
    let s = sol.stats;
    Ok(StepTrace {
        h: s.h_history,
        m: s.m_history.iter().map(|&m| m as u32).collect(),
        accepted: s.accepted_steps,
        rhs_evals: s.total_rhs_evals,
    })
}

/// Accepted points of a Henon-Heiles orbit.
#[wasm_bindgen]
pub struct Orbit {
    t: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    energy_error: Vec<f64>,
}

#[wasm_bindgen]
impl Orbit {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    /// First position coordinate.
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    /// Second position coordinate.
    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }

    /// `H(t) - H(0)` at every point.
    #[wasm_bindgen(getter, js_name = energyError)]
    pub fn energy_error(&self) -> Vec<f64> {
        self.energy_error.clone()
    }
}

/// Integrates Henon-Heiles with serial DOP853 (`n_cpu == 0`) or the probe
/// search with `n_cpu` probes.
#[wasm_bindgen(js_name = henonHeilesOrbit)]
pub fn henon_heiles_orbit(t_end: f64, tol: f64, n_cpu: usize) -> Result<Orbit, JsError> {
    let sys = HenonHeiles;
    let y0 = sys.initial_state();
    let mut traj = Trajectory::new();
    if n_cpu == 0 {
        dop853_integrate(&sys, 0.0, &y0, t_end, &AdaptiveConfig::new(tol), &mut traj).map_err(|a| js_err(a.error))?;
    } else {
        let cfg = AspaConfig::new(n_cpu, tol);
        aspa_integrate(&sys, 0.0, &y0, t_end, &cfg, &Dop853::new(), &Executor::serial(), &mut traj)
            .map_err(|a| js_err(a.error))?;
    }
    let h0 = hh_hamiltonian(&y0);
    let mut orbit = Orbit { t: Vec::new(), x: Vec::new(), y: Vec::new(), energy_error: Vec::new() };
    for (t, y) in traj.iter() {
        orbit.t.push(t);
        orbit.x.push(y[0]);
        orbit.y.push(y[2]);
        orbit.energy_error.push(hh_hamiltonian(y) - h0);
    }
    Ok(orbit)
}

/// Fixed-step errors on the harmonic oscillator and the fitted slope.
#[wasm_bindgen]
pub struct OrderResult {
    h: Vec<f64>,
    error: Vec<f64>,
    slope: f64,
    used: u32,
}

#[wasm_bindgen]
impl OrderResult {
    #[wasm_bindgen(getter)]
    pub fn h(&self) -> Vec<f64> {
        self.h.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn error(&self) -> Vec<f64> {
        self.error.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// Points above the roundoff floor.
    #[wasm_bindgen(getter)]
    pub fn used(&self) -> u32 {
        self.used
    }
}

/// Measures the order of `rk4`, `dop853` or `pirk10` (with `m` iterations)
/// over `[0, t_end]` at each step in `hs`.
#[wasm_bindgen(js_name = convergenceOrder)]
pub fn convergence(method: &str, m: usize, hs: Vec<f64>, t_end: f64) -> Result<OrderResult, JsError> {
    let method: Method = method.parse().map_err(js_err)?;
    let fit = convergence_order(method, &HarmonicOscillator, &hs, t_end, m).map_err(js_err)?;
    Ok(OrderResult {
        h: fit.points.iter().map(|p| p.h).collect(),
        error: fit.points.iter().map(|p| p.error).collect(),
        slope: fit.slope,
        used: fit.used as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_has_one_more_step_than_iterations() {
        let t = step_trace("hh", 50.0, 1e-10, 6).unwrap();
        assert_eq!(t.h().len(), t.m().len() + 1);
        assert!(t.accepted() <= t.corrections());
    }

    #[test]
    fn orbit_conserves_energy() {
        let o = henon_heiles_orbit(100.0, 1e-12, 4).unwrap();
        assert_eq!(o.t().len(), o.x().len());
        assert!(o.energy_error().iter().all(|e| e.abs() < 1e-10));
        let serial = henon_heiles_orbit(100.0, 1e-12, 0).unwrap();
        assert_eq!(serial.t()[0], 0.0);
    }

    #[test]
    fn rk4_order() {
        let r = convergence("rk4", 1, vec![0.4, 0.2, 0.1], 10.0).unwrap();
        assert!((3.5..=4.5).contains(&r.slope()));
        assert_eq!(r.used(), 3);
    }
}
