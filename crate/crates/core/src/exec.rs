//! Deterministic fork-join execution.
//!
//! Every parallel computation in the crate is "run `n` independent closures,
//! collect the results in index order". Logical tasks are decoupled from
//! physical workers, so results never depend on the worker count.

#[cfg(feature = "parallel")]
use std::sync::Arc;

use crate::error::IntegrateError;
use crate::integrators::StepMethod;
use crate::system::OdeSystem;

/// Number of workers to actually spawn.
pub fn worker_pool_size(requested: usize, available: usize) -> usize {
    requested.max(1).min(available.max(1))
}

/// Hardware threads on this host (1 if unknown).
pub fn available_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// A fixed-size pool that maps index ranges and joins in index order.
#[derive(Clone)]
pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::serial()
    }
}

impl Executor {
    /// Runs everything on the calling thread.
    pub fn serial() -> Self {
        Executor {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// A pool of exactly `workers` threads, regardless of the host's core
    /// count. Without the `parallel` feature this is always serial.
    pub fn new(workers: usize) -> Self {
        let workers = workers.max(1);
        #[cfg(feature = "parallel")]
        {
            if workers > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(|i| format!("odepar-worker-{i}"))
                    .build()
                    .expect("failed to spawn worker threads");
                return Executor {
                    workers,
                    pool: Some(Arc::new(pool)),
                };
            }
        }
        let _ = workers;
        Self::serial()
    }

    /// `min(requested, cores)` workers.
    pub fn for_host(requested: usize) -> Self {
        Self::new(worker_pool_size(requested, available_workers()))
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// `(0..n).map(f)`, possibly concurrently; output is in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            if n > 1 {
                use rayon::prelude::*;
                return pool.install(|| (0..n).into_par_iter().map(&f).collect());
            }
        }
        (0..n).map(f).collect()
    }
}

/// One speculative step: span `index * h` from a shared start point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeTask {
    /// 1-based.
    pub index: usize,
    pub span: f64,
}

impl ProbeTask {
    /// Tasks `1..=n` with spans `i * h`, each computed by one multiplication.
    pub fn batch(h: f64, n: usize) -> Vec<ProbeTask> {
        (1..=n)
            .map(|index| ProbeTask {
                index,
                span: index as f64 * h,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub index: usize,
    /// Empty when the probe failed numerically.
    pub y_probe: Vec<f64>,
    /// `+inf` when the probe failed numerically.
    pub epsilon: f64,
    pub rhs_evals: u64,
    /// `epsilon <= tol`.
    pub success: bool,
}

/// Runs every probe from `(t, y)` and returns results ordered by index.
///
/// A probe that hits non-finite arithmetic is reported as a failure with
/// infinite error; it does not abort the batch.
pub fn probe_batch(
    tasks: &[ProbeTask],
    t: f64,
    y: &[f64],
    method: &dyn StepMethod,
    sys: &dyn OdeSystem,
    tol: f64,
    exec: &Executor,
) -> Result<Vec<ProbeResult>, IntegrateError> {
    for (k, task) in tasks.iter().enumerate() {
        if task.index != k + 1 {
            return Err(IntegrateError::InvalidInput(format!(
                "probe tasks must be indexed 1..N without gaps, found {} at position {k}",
                task.index
            )));
        }
    }
    Ok(exec.map(tasks.len(), |k| {
        let task = tasks[k];
        match method.step(sys, t, y, task.span) {
            Ok(out) if !out.epsilon.is_nan() => ProbeResult {
                index: task.index,
                success: out.epsilon <= tol,
                y_probe: out.y_next,
                epsilon: out.epsilon,
                rhs_evals: out.rhs_evals,
            },
            Ok(out) => ProbeResult {
                index: task.index,
                y_probe: Vec::new(),
                epsilon: f64::INFINITY,
                rhs_evals: out.rhs_evals,
                success: false,
            },
            Err(e) => ProbeResult {
                index: task.index,
                y_probe: Vec::new(),
                epsilon: f64::INFINITY,
                rhs_evals: e.rhs_evals(),
                success: false,
            },
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::Dop853;
    use crate::system::FnSystem;
    use crate::systems::HarmonicOscillator;

    #[test]
    fn pool_sizing() {
        assert_eq!(worker_pool_size(20, 4), 4);
        assert_eq!(worker_pool_size(1, 64), 1);
        assert_eq!(worker_pool_size(10, 12), 10);
        assert_eq!(worker_pool_size(0, 8), 1);
    }

    #[test]
    fn map_preserves_order() {
        for workers in [1, 2, 5] {
            let exec = Executor::new(workers);
            assert_eq!(exec.workers(), if cfg!(feature = "parallel") { workers } else { 1 });
            let out = exec.map(100, |i| i * i);
            assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn spans_are_multiples() {
        let tasks = ProbeTask::batch(0.1, 7);
        assert_eq!(tasks.len(), 7);
        assert_eq!(tasks[6].span, 7.0 * 0.1);
        assert_eq!(tasks[2].index, 3);
    }

    #[test]
    fn single_probe_matches_one_step() {
        let sys = HarmonicOscillator;
        let r = probe_batch(&ProbeTask::batch(0.3, 1), 0.0, &[0.0, 1.0], &Dop853::new(), &sys, 1e-10, &Executor::serial())
            .unwrap();
        let direct = Dop853::new().step(&sys, 0.0, &[0.0, 1.0], 0.3).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].y_probe, direct.y_next);
        assert_eq!(r[0].epsilon, direct.epsilon);
        assert_eq!(r[0].rhs_evals, 12);
    }

    #[test]
    fn constant_field_all_succeed() {
        let sys = FnSystem::new("zero", vec![1.0], |_, _, dy| dy.fill(0.0));
        let r = probe_batch(&ProbeTask::batch(1.0, 5), 0.0, &[1.0], &Dop853::new(), &sys, 1e-15, &Executor::new(2))
            .unwrap();
        assert!(r.iter().all(|p| p.success && p.epsilon == 0.0));
        assert_eq!(r.iter().map(|p| p.index).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn results_independent_of_workers() {
        let sys = HarmonicOscillator;
        let tasks = ProbeTask::batch(0.3, 4);
        let run = |w| probe_batch(&tasks, 0.0, &[0.0, 1.0], &Dop853::new(), &sys, 1e-10, &Executor::new(w)).unwrap();
        let serial = run(1);
        assert_eq!(serial, run(4));
        // spans 0.3 .. 1.2 straddle the tolerance
        let pattern: Vec<bool> = serial.iter().map(|p| p.success).collect();
        assert!(pattern[0]);
        assert!(!pattern[3]);
    }

    #[test]
    fn failing_probe_is_isolated() {
        // blows up once y exceeds 2, i.e. for long spans only
        let sys = FnSystem::new("pole", vec![1.0], |_, y, dy| dy[0] = 1.0 / (2.0 - y[0]).max(0.0));
        let r = probe_batch(&ProbeTask::batch(0.05, 40), 0.0, &[1.0], &Dop853::new(), &sys, 1e-3, &Executor::new(3))
            .unwrap();
        assert!(r[0].success);
        let last = r.last().unwrap();
        assert!(!last.success);
        assert_eq!(last.epsilon, f64::INFINITY);
        assert!(last.y_probe.is_empty());
    }

    #[test]
    fn gaps_are_rejected() {
        let sys = HarmonicOscillator;
        let tasks = [ProbeTask { index: 1, span: 0.1 }, ProbeTask { index: 3, span: 0.3 }];
        assert!(probe_batch(&tasks, 0.0, &[0.0, 1.0], &Dop853::new(), &sys, 1e-10, &Executor::serial()).is_err());
    }
}
