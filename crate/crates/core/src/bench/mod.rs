//! Benchmark harness behind the `odepar` command line tool.
//!
//! Every table is written as CSV with a fixed header; only the `wall_ms`
//! column varies between identical runs.

mod order;

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

pub use order::{convergence_order, OrderFit, OrderPoint, SATURATION_FLOOR};

use crate::control::{aspa_integrate, dop853_integrate, pirk_integrate, AdaptiveConfig, AspaConfig, AspaStats};
use crate::error::{Aborted, IntegrateError};
use crate::exec::Executor;
use crate::integrators::{rk4_integrate, Dop853, PirkConfig, RunStats};
use crate::norm::error_norm;
use crate::system::{Observer, OdeSystem, Solution};
use crate::systems;

#[derive(Debug, Error)]
pub enum BenchError {
    /// Bad names or parameter ranges (exit status 2).
    #[error("usage: {0}")]
    Usage(String),
    /// Underflow, divergence, iteration cap (exit status 3).
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Usage(_) => 2,
            BenchError::Numeric(_) => 3,
            BenchError::Io(_) | BenchError::Csv(_) => 1,
        }
    }
}

impl<S> From<Aborted<S>> for BenchError {
    fn from(a: Aborted<S>) -> Self {
        match a.error {
            IntegrateError::InvalidInput(msg) => BenchError::Usage(msg),
            other => BenchError::Numeric(format!("{other} (stopped at t = {})", a.partial.t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    Dop853,
    Pirk10,
    Dop853Aspa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Rk4, Method::Dop853, Method::Pirk10, Method::Dop853Aspa];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Dop853 => "dop853",
            Method::Pirk10 => "pirk10",
            Method::Dop853Aspa => "dop853-aspa",
        }
    }

    pub fn is_adaptive(self) -> bool {
        self != Method::Rk4
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| BenchError::Usage(format!("unknown method `{s}` (expected rk4, dop853, pirk10, dop853-aspa)")))
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub method: Method,
    pub system: String,
    pub t0: f64,
    pub t_end: f64,
    /// Required by adaptive methods.
    pub tol: Option<f64>,
    /// Required by RK4.
    pub h: Option<f64>,
    /// Probe count for `dop853-aspa`.
    pub n_cpu: usize,
    /// PIRK iterations.
    pub m: usize,
    /// Threads for probes (ASPA) or stages (PIRK).
    pub workers: usize,
    /// Overrides the initial state when set.
    pub y0: Option<Vec<f64>>,
}

impl RunParams {
    pub fn new(method: Method, system: impl Into<String>, t_end: f64) -> Self {
        RunParams {
            method,
            system: system.into(),
            t0: 0.0,
            t_end,
            tol: None,
            h: None,
            n_cpu: 1,
            m: 9,
            workers: 1,
            y0: None,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn step(mut self, h: f64) -> Self {
        self.h = Some(h);
        self
    }

    pub fn n_cpu(mut self, n: usize) -> Self {
        self.n_cpu = n;
        self
    }

    pub fn workers(mut self, w: usize) -> Self {
        self.workers = w;
        self
    }

    fn checked_tol(&self) -> Result<f64, BenchError> {
        match self.tol {
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(BenchError::Usage(format!("--tol must be positive, got {t}"))),
            None => Err(BenchError::Usage(format!("method {} needs --tol", self.method))),
        }
    }
}

/// One row of the run table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub method: String,
    pub system: String,
    pub tol: Option<f64>,
    pub h: Option<f64>,
    pub n_cpu: usize,
    pub corrections: u64,
    pub accepted: u64,
    pub rhs_evals: u64,
    pub wall_ms: f64,
    /// Max error against the analytic solution, else max drift of the
    /// conserved quantity, over every accepted point.
    pub final_error: Option<f64>,
}

/// Header of [`RunRecord`] tables.
pub const RUN_HEADER: &str = "method,system,tol,h,n_cpu,corrections,accepted,rhs_evals,wall_ms,final_error";
/// Header of step-size traces.
pub const TRACE_HEADER: &str = "n,h_n,m_n";

/// Tracks the worst deviation from the system's oracle.
struct OracleTracker<'a> {
    sys: &'a dyn OdeSystem,
    reference: Option<f64>,
    worst: Option<f64>,
    inner: &'a mut dyn Observer,
}

impl<'a> OracleTracker<'a> {
    fn new(sys: &'a dyn OdeSystem, y0: &[f64], inner: &'a mut dyn Observer) -> Self {
        let has_analytic = sys.analytic(0.0).is_some();
        let reference = if has_analytic { None } else { sys.invariant(y0) };
        let worst = (has_analytic || reference.is_some()).then_some(0.0);
        OracleTracker { sys, reference, worst, inner }
    }
}

impl Observer for OracleTracker<'_> {
    fn observe(&mut self, t: f64, y: &[f64]) {
        self.inner.observe(t, y);
        let Some(worst) = self.worst.as_mut() else { return };
        let err = if let Some(exact) = self.sys.analytic(t) {
            error_norm(y, &exact)
        } else if let (Some(r), Some(v)) = (self.reference, self.sys.invariant(y)) {
            (v - r).abs()
        } else {
            return;
        };
        *worst = worst.max(err);
    }
}

/// Result of [`run_integrate`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub t: f64,
    pub y: Vec<f64>,
    /// Present for `dop853-aspa` runs.
    pub aspa: Option<AspaStats>,
}

/// Runs one integration and summarizes it. `obs` sees every accepted point.
pub fn run_integrate(p: &RunParams, obs: &mut dyn Observer) -> Result<RunOutput, BenchError> {
    let sys = systems::by_name(&p.system).map_err(|e| BenchError::Usage(e.to_string()))?;
    let sys: &dyn OdeSystem = &sys;
    let y0 = p.y0.clone().unwrap_or_else(|| sys.initial_state());
    if p.workers == 0 {
        return Err(BenchError::Usage("--workers must be at least 1".into()));
    }
    if sys.analytic(0.0).is_some() && p.t0 != 0.0 {
        return Err(BenchError::Usage("systems with an analytic solution start at t0 = 0".into()));
    }

    let mut tracker = OracleTracker::new(sys, &y0, obs);
    let mut aspa = None;
    let sol: Solution<RunStats> = match p.method {
        Method::Rk4 => {
            let h = p.h.ok_or_else(|| BenchError::Usage("rk4 needs --h".into()))?;
            rk4_integrate(sys, p.t0, &y0, p.t_end, h, &mut tracker)?
        }
        Method::Dop853 => {
            dop853_integrate(sys, p.t0, &y0, p.t_end, &AdaptiveConfig::new(p.checked_tol()?), &mut tracker)?
        }
        Method::Pirk10 => {
            if p.m == 0 {
                return Err(BenchError::Usage("--m must be at least 1".into()));
            }
            let cfg = PirkConfig { workers: p.workers, ..PirkConfig::pirk10(p.m) };
            pirk_integrate(sys, p.t0, &y0, p.t_end, &AdaptiveConfig::new(p.checked_tol()?), &cfg, &mut tracker)?
        }
        Method::Dop853Aspa => {
            if p.n_cpu == 0 {
                return Err(BenchError::Usage("--n-cpu must be at least 1".into()));
            }
            let cfg = AspaConfig::new(p.n_cpu, p.checked_tol()?);
            let exec = Executor::new(p.workers);
            let sol = aspa_integrate(sys, p.t0, &y0, p.t_end, &cfg, &Dop853::new(), &exec, &mut tracker)?;
            let stats = sol.stats.run_stats();
            aspa = Some(sol.stats);
            Solution { t: sol.t, y: sol.y, stats }
        }
    };

    let record = RunRecord {
        method: p.method.to_string(),
        system: sys.name(),
        tol: if p.method.is_adaptive() { p.tol } else { None },
        h: if p.method.is_adaptive() { None } else { p.h },
        n_cpu: if p.method == Method::Dop853Aspa { p.n_cpu } else { 1 },
        corrections: sol.stats.corrections,
        accepted: sol.stats.accepted_steps,
        rhs_evals: sol.stats.rhs_evals,
        wall_ms: sol.stats.wall_time.as_secs_f64() * 1e3,
        final_error: tracker.worst,
    };
    Ok(RunOutput { record, t: sol.t, y: sol.y, aspa })
}

/// Row of a tolerance sweep; `T = -log10(tol)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TolRow {
    pub method: String,
    #[serde(rename = "T")]
    pub t_exp: u32,
    pub corrections: u64,
    pub accepted: u64,
    pub rhs_evals: u64,
    pub wall_ms: f64,
}

pub const TOL_HEADER: &str = "method,T,corrections,accepted,rhs_evals,wall_ms";

/// Runs `base` at `tol = 10^-T` for each `T`. With `baseline`, serial
/// DOP853 rows follow each row of `base.method`.
pub fn sweep_tolerance(base: &RunParams, exponents: &[u32], baseline: bool) -> Result<Vec<TolRow>, BenchError> {
    if !base.method.is_adaptive() {
        return Err(BenchError::Usage("tolerance sweeps need an adaptive method".into()));
    }
    let mut rows = Vec::new();
    for &t_exp in exponents {
        let tol = 10f64.powi(-(t_exp as i32));
        let mut methods = vec![base.method];
        if baseline && base.method != Method::Dop853 {
            methods.push(Method::Dop853);
        }
        for method in methods {
            let p = RunParams { method, tol: Some(tol), ..base.clone() };
            let r = run_integrate(&p, &mut ())?.record;
            rows.push(TolRow {
                method: r.method,
                t_exp,
                corrections: r.corrections,
                accepted: r.accepted,
                rhs_evals: r.rhs_evals,
                wall_ms: r.wall_ms,
            });
        }
    }
    Ok(rows)
}

/// Row of a probe-count sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpuRow {
    pub method: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub corrections: u64,
    pub accepted: u64,
    pub rhs_evals: u64,
    pub wall_ms: f64,
}

pub const CPU_HEADER: &str = "method,N,corrections,accepted,rhs_evals,wall_ms";

/// Serial DOP853 baseline row followed by one `dop853-aspa` row per `N`.
/// Unless `base.workers` is above 1, each run uses `min(N, cores)` threads.
pub fn sweep_cpus(base: &RunParams, counts: &[usize]) -> Result<Vec<CpuRow>, BenchError> {
    let tol = base.checked_tol()?;
    if counts.iter().any(|&n| n == 0 || n > 64) {
        return Err(BenchError::Usage("probe counts must lie in 1..=64".into()));
    }
    let mut rows = Vec::with_capacity(counts.len() + 1);
    let serial = run_integrate(&RunParams { method: Method::Dop853, tol: Some(tol), ..base.clone() }, &mut ())?.record;
    rows.push(CpuRow {
        method: serial.method,
        n: 1,
        corrections: serial.corrections,
        accepted: serial.accepted,
        rhs_evals: serial.rhs_evals,
        wall_ms: serial.wall_ms,
    });
    for &n in counts {
        let workers = if base.workers > 1 {
            base.workers
        } else {
            crate::exec::worker_pool_size(n, crate::exec::available_workers())
        };
        let p = RunParams { method: Method::Dop853Aspa, tol: Some(tol), n_cpu: n, workers, ..base.clone() };
        let r = run_integrate(&p, &mut ())?.record;
        rows.push(CpuRow {
            method: r.method,
            n,
            corrections: r.corrections,
            accepted: r.accepted,
            rhs_evals: r.rhs_evals,
            wall_ms: r.wall_ms,
        });
    }
    Ok(rows)
}

/// Row of a step-size trace. `m_n` is empty on the final row, whose step
/// was never probed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub h_n: f64,
    pub m_n: Option<usize>,
}

/// Per-iteration `(n, h_n, m_n)` of an ASPA run: `corrections + 1` rows.
pub fn stepsize_trace(stats: &AspaStats) -> Vec<TraceRow> {
    stats
        .h_history
        .iter()
        .enumerate()
        .map(|(n, &h_n)| TraceRow { n, h_n, m_n: stats.m_history.get(n).copied() })
        .collect()
}

/// Runs `p` (which must be `dop853-aspa`) and returns its trace.
pub fn emit_stepsize_trace(p: &RunParams) -> Result<(RunRecord, Vec<TraceRow>), BenchError> {
    if p.method != Method::Dop853Aspa {
        return Err(BenchError::Usage(format!("trace needs method dop853-aspa, got {}", p.method)));
    }
    let out = run_integrate(p, &mut ())?;
    let stats = out.aspa.expect("aspa runs carry stats");
    Ok((out.record, stepsize_trace(&stats)))
}

/// Writes rows with a header line.
pub fn write_csv<T: Serialize, W: io::Write>(rows: &[T], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes only a header; used when a table has no rows.
pub fn write_header<W: io::Write>(header: &str, mut out: W) -> Result<(), BenchError> {
    writeln!(out, "{header}")?;
    Ok(())
}

/// Writes a trajectory as `t,y1,...,yd`.
pub fn write_trajectory<W: io::Write>(traj: &crate::system::Trajectory, out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=traj.dim()).map(|i| format!("y{i}")));
    w.write_record(&header)?;
    for (t, y) in traj.iter() {
        let mut rec = vec![t.to_string()];
        rec.extend(y.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_of<T: Serialize>(rows: &[T]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert_eq!("euler".parse::<Method>().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn run_record_header_is_exact() {
        let r = run_integrate(&RunParams::new(Method::Rk4, "ho", 1.0).step(0.1), &mut ()).unwrap();
        let text = csv_of(&[r.record]);
        assert_eq!(text.lines().next().unwrap(), RUN_HEADER);
        assert!(text.lines().nth(1).unwrap().starts_with("rk4,ho,,0.1,1,0,10,40,"));
    }

    #[test]
    fn trace_header_is_exact() {
        let rows = vec![TraceRow { n: 0, h_n: 0.5, m_n: Some(3) }, TraceRow { n: 1, h_n: 0.25, m_n: None }];
        assert_eq!(csv_of(&rows), "n,h_n,m_n\n0,0.5,3\n1,0.25,\n");
    }

    #[test]
    fn sweep_headers_are_exact() {
        let row = TolRow { method: "dop853".into(), t_exp: 5, corrections: 1, accepted: 1, rhs_evals: 12, wall_ms: 0.0 };
        assert_eq!(csv_of(&[row]).lines().next().unwrap(), TOL_HEADER);
        let row = CpuRow { method: "dop853".into(), n: 1, corrections: 1, accepted: 1, rhs_evals: 12, wall_ms: 0.0 };
        assert_eq!(csv_of(&[row]).lines().next().unwrap(), CPU_HEADER);
    }

    #[test]
    fn oracle_error_for_oscillator() {
        let r = run_integrate(&RunParams::new(Method::Dop853, "ho", 100.0).tol(1e-13), &mut ()).unwrap();
        let err = r.record.final_error.unwrap();
        assert!(err > 0.0 && err < 1e-10);
    }

    #[test]
    fn invariant_drift_for_henon_heiles() {
        let r = run_integrate(&RunParams::new(Method::Rk4, "hh", 100.0).step(0.01), &mut ()).unwrap();
        assert!(r.record.final_error.unwrap() < 1e-9);
    }

    #[test]
    fn empty_aspa_run() {
        let r = run_integrate(&RunParams::new(Method::Dop853Aspa, "ho", 0.0).tol(1e-10).n_cpu(4), &mut ()).unwrap();
        assert_eq!(r.record.corrections, 0);
        assert_eq!(r.record.accepted, 0);
        assert_eq!(r.record.final_error, Some(0.0));
    }

    #[test]
    fn usage_errors() {
        let cases = [
            RunParams::new(Method::Dop853, "ho", 1.0),
            RunParams::new(Method::Rk4, "ho", 1.0),
            RunParams::new(Method::Dop853, "nope", 1.0).tol(1e-6),
            RunParams::new(Method::Dop853, "ho", 1.0).tol(-1.0),
            RunParams::new(Method::Dop853Aspa, "ho", 1.0).tol(1e-6).n_cpu(0),
            RunParams::new(Method::Dop853, "ho", -1.0).tol(1e-6),
        ];
        for p in cases {
            let e = run_integrate(&p, &mut ()).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{p:?}: {e}");
        }
    }

    #[test]
    fn numeric_failure_exit_code() {
        let mut p = RunParams::new(Method::Dop853, "ho", 1e6).tol(1e-15);
        p.y0 = Some(vec![f64::MAX, 0.0]);
        let e = run_integrate(&p, &mut ()).unwrap_err();
        assert_eq!(e.exit_code(), 3, "{e}");
    }

    #[test]
    fn trace_requires_aspa() {
        let e = emit_stepsize_trace(&RunParams::new(Method::Dop853, "ho", 1.0).tol(1e-8)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn trace_length() {
        let p = RunParams::new(Method::Dop853Aspa, "hh", 200.0).tol(1e-12).n_cpu(10);
        let (record, rows) = emit_stepsize_trace(&p).unwrap();
        assert_eq!(rows.len() as u64, record.corrections + 1);
        assert!(rows.last().unwrap().m_n.is_none());
    }
}
