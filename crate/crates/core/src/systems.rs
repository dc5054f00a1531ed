//! Test problems.
//!
//! | name           | dim  | oracle                      |
//! |----------------|------|-----------------------------|
//! | `ho`           | 2    | `(sin t, cos t)`            |
//! | `hh`           | 4    | Hénon-Heiles energy         |
//! | `hh-rep:k`     | 4k   | sum of block energies       |
//! | `heavy:d:cost` | d    | `|y|^2 / 2`                 |

use std::fmt;
use std::hint::black_box;

use crate::system::OdeSystem;

/// `y1' = y2, y2' = -y1` with `y(0) = (0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HarmonicOscillator;

impl OdeSystem for HarmonicOscillator {
    fn name(&self) -> String {
        "ho".into()
    }

    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    fn initial_state(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }

    fn analytic(&self, t: f64) -> Option<Vec<f64>> {
        Some(vec![t.sin(), t.cos()])
    }
}

/// Hénon-Heiles energy with `y = (x, x', y, y')`.
///
/// # Panics
///
/// If `y` does not have exactly four components.
pub fn hh_hamiltonian(y: &[f64]) -> f64 {
    assert_eq!(y.len(), 4, "Hénon-Heiles state has 4 components");
    block_energy(y)
}

fn block_energy(y: &[f64]) -> f64 {
    let (x, px, q, py) = (y[0], y[1], y[2], y[3]);
    0.5 * (px * px + py * py) + 0.5 * (x * x + q * q) + x * x * q - q * q * q / 3.0
}

fn hh_block(y: &[f64], dy: &mut [f64]) {
    dy[0] = y[1];
    dy[1] = -y[0] - 2.0 * y[0] * y[2];
    dy[2] = y[3];
    dy[3] = -y[2] - y[0] * y[0] + y[2] * y[2];
}

/// Initial state on the chaotic energy shell `H = 1/6`.
pub fn hh_initial_state() -> [f64; 4] {
    [0.0, (1.0f64 / 3.0).sqrt(), 0.0, 0.0]
}

/// The Hénon-Heiles system.
#[derive(Debug, Clone, Copy, Default)]
pub struct HenonHeiles;

impl OdeSystem for HenonHeiles {
    fn name(&self) -> String {
        "hh".into()
    }

    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        hh_block(y, dy)
    }

    fn initial_state(&self) -> Vec<f64> {
        hh_initial_state().to_vec()
    }

    fn invariant(&self, y: &[f64]) -> Option<f64> {
        Some(hh_hamiltonian(y))
    }
}

/// `k` uncoupled copies of Hénon-Heiles; block `i` occupies `4i..4i+4`.
#[derive(Debug, Clone, Copy)]
pub struct ReplicatedHenonHeiles {
    k: usize,
}

impl ReplicatedHenonHeiles {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "need at least one block");
        ReplicatedHenonHeiles { k }
    }

    pub fn blocks(&self) -> usize {
        self.k
    }

    /// Energy of each block.
    pub fn block_energies(&self, y: &[f64]) -> Vec<f64> {
        y.chunks_exact(4).map(block_energy).collect()
    }
}

impl OdeSystem for ReplicatedHenonHeiles {
    fn name(&self) -> String {
        format!("hh-rep:{}", self.k)
    }

    fn dim(&self) -> usize {
        4 * self.k
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        for (yb, db) in y.chunks_exact(4).zip(dy.chunks_exact_mut(4)) {
            hh_block(yb, db);
        }
    }

    fn initial_state(&self) -> Vec<f64> {
        hh_initial_state().repeat(self.k)
    }

    fn invariant(&self, y: &[f64]) -> Option<f64> {
        Some(y.chunks_exact(4).map(block_energy).sum())
    }
}

/// A cheap, bounded field with an adjustable amount of dead work per
/// evaluation, for measuring parallel speedup on expensive right-hand sides.
///
/// The field is a cyclic chain with amplitude-dependent couplings,
/// `y_i' = w_i y_{i+1} - w_{i-1} y_{i-1}` with `w_i = ω_i (1 + β y_i^2)`.
/// Its generator is skew-symmetric, so `|y|` is conserved.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticHeavy {
    dim: usize,
    cost: u64,
}

const HEAVY_BETA: f64 = 0.5;

impl SyntheticHeavy {
    pub fn new(dim: usize, cost: u64) -> Self {
        assert!(dim >= 2, "synthetic system needs d >= 2");
        SyntheticHeavy { dim, cost }
    }

    fn coupling(&self, i: usize, yi: f64) -> f64 {
        (1.0 + 0.1 * (i % 5) as f64) * (1.0 + HEAVY_BETA * yi * yi)
    }
}

/// Burns `cost` dependent transcendental evaluations.
pub fn padding_work(cost: u64, seed: f64) -> f64 {
    let mut acc = black_box(seed);
    for k in 0..black_box(cost) {
        acc = (acc * 0.999 + k as f64 * 1e-3).sin();
    }
    black_box(acc)
}

impl OdeSystem for SyntheticHeavy {
    fn name(&self) -> String {
        format!("heavy:{}:{}", self.dim, self.cost)
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let next = (i + 1) % d;
            let prev = (i + d - 1) % d;
            dy[i] = self.coupling(i, y[i]) * y[next] - self.coupling(prev, y[prev]) * y[prev];
        }
        if self.cost > 0 {
            padding_work(self.cost, t + y[0]);
        }
    }

    fn initial_state(&self) -> Vec<f64> {
        let raw: Vec<f64> = (0..self.dim).map(|i| (1.3 * i as f64 + 0.4).cos()).collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        raw.into_iter().map(|v| v / norm).collect()
    }

    fn invariant(&self, y: &[f64]) -> Option<f64> {
        Some(0.5 * y.iter().map(|v| v * v).sum::<f64>())
    }

    fn cost_padding(&self) -> u64 {
        self.cost
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSystem(pub String);

impl fmt::Display for UnknownSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown system `{}` (expected ho, hh, hh-rep:<k>, heavy:<d>:<cost>)",
            self.0
        )
    }
}

impl std::error::Error for UnknownSystem {}

/// Looks a system up by its CLI name.
pub fn by_name(name: &str) -> Result<Box<dyn OdeSystem + Send>, UnknownSystem> {
    let err = || UnknownSystem(name.to_string());
    let parts: Vec<&str> = name.split(':').collect();
    match parts.as_slice() {
        ["ho"] => Ok(Box::new(HarmonicOscillator)),
        ["hh"] => Ok(Box::new(HenonHeiles)),
        ["hh-rep", k] => match k.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(Box::new(ReplicatedHenonHeiles::new(k))),
            _ => Err(err()),
        },
        ["heavy", d, cost] => match (d.parse::<usize>(), cost.parse::<u64>()) {
            (Ok(d), Ok(cost)) if d >= 2 => Ok(Box::new(SyntheticHeavy::new(d, cost))),
            _ => Err(err()),
        },
        _ => Err(err()),
    }
}
