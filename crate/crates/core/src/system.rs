use crate::error::StepError;

/// A vector field `dy/dt = f(t, y)`.
///
/// Implementations must be pure functions of `(t, y)`: probes and stages
/// evaluate the same system concurrently from several threads.
pub trait OdeSystem: Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// Writes `f(t, y)` into `dy`. Both slices have length [`dim`](Self::dim).
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Designated initial condition at `t = 0`.
    fn initial_state(&self) -> Vec<f64>;

    /// Exact solution through [`initial_state`](Self::initial_state), if known.
    fn analytic(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }

    /// A scalar conserved along exact trajectories, if any.
    fn invariant(&self, _y: &[f64]) -> Option<f64> {
        None
    }

    /// Artificial work units burned per evaluation.
    fn cost_padding(&self) -> u64 {
        0
    }
}

impl<S: OdeSystem + ?Sized> OdeSystem for &S {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (**self).rhs(t, y, dy)
    }
    fn initial_state(&self) -> Vec<f64> {
        (**self).initial_state()
    }
    fn analytic(&self, t: f64) -> Option<Vec<f64>> {
        (**self).analytic(t)
    }
    fn invariant(&self, y: &[f64]) -> Option<f64> {
        (**self).invariant(y)
    }
    fn cost_padding(&self) -> u64 {
        (**self).cost_padding()
    }
}

impl<S: OdeSystem + ?Sized> OdeSystem for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (**self).rhs(t, y, dy)
    }
    fn initial_state(&self) -> Vec<f64> {
        (**self).initial_state()
    }
    fn analytic(&self, t: f64) -> Option<Vec<f64>> {
        (**self).analytic(t)
    }
    fn invariant(&self, y: &[f64]) -> Option<f64> {
        (**self).invariant(y)
    }
    fn cost_padding(&self) -> u64 {
        (**self).cost_padding()
    }
}

/// A system defined by a closure, mostly for tests and small experiments.
pub struct FnSystem<F> {
    name: String,
    y0: Vec<f64>,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    pub fn new(name: impl Into<String>, y0: Vec<f64>, f: F) -> Self {
        assert!(!y0.is_empty(), "system dimension must be at least 1");
        FnSystem { name: name.into(), y0, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }
    fn dim(&self) -> usize {
        self.y0.len()
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.f)(t, y, dy)
    }
    fn initial_state(&self) -> Vec<f64> {
        self.y0.clone()
    }
}

/// Counts evaluations and rejects non-finite output.
pub(crate) struct Rhs<'a, S: ?Sized> {
    sys: &'a S,
    t0: f64,
    pub(crate) evals: u64,
}

impl<'a, S: OdeSystem + ?Sized> Rhs<'a, S> {
    pub(crate) fn new(sys: &'a S, t0: f64) -> Self {
        Rhs { sys, t0, evals: 0 }
    }

    pub(crate) fn eval(
        &mut self,
        stage: usize,
        t: f64,
        y: &[f64],
        dy: &mut [f64],
    ) -> Result<(), StepError> {
        self.sys.rhs(t, y, dy);
        self.evals += 1;
        if dy.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(StepError::NonFinite {
                t: self.t0,
                stage,
                rhs_evals: self.evals,
            })
        }
    }
}

/// Receives the initial point and every accepted point of a run.
pub trait Observer {
    fn observe(&mut self, t: f64, y: &[f64]);
}

impl Observer for () {
    fn observe(&mut self, _t: f64, _y: &[f64]) {}
}

impl<F: FnMut(f64, &[f64])> Observer for F {
    fn observe(&mut self, t: f64, y: &[f64]) {
        self(t, y)
    }
}

/// Accepted points of a run, stored flat.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<f64>,
    dim: usize,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times
            .iter()
            .enumerate()
            .map(move |(i, &t)| (t, self.state(i)))
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        let n = self.len();
        (n > 0).then(|| (self.times[n - 1], self.state(n - 1)))
    }
}

impl Observer for Trajectory {
    fn observe(&mut self, t: f64, y: &[f64]) {
        if self.times.is_empty() {
            self.dim = y.len();
        }
        debug_assert_eq!(y.len(), self.dim);
        self.times.push(t);
        self.states.extend_from_slice(y);
    }
}

/// Final point of a run plus its statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S> {
    pub t: f64,
    pub y: Vec<f64>,
    pub stats: S,
}
