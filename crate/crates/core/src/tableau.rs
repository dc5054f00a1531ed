//! Butcher tableaux and their consistency checks.

use std::fmt;

/// Coefficients `(A, b, c)` of an `s`-stage Runge-Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    order: u32,
    explicit: bool,
}

impl ButcherTableau {
    /// Builds a tableau from row-major `a` (`s * s` entries).
    ///
    /// # Panics
    ///
    /// If the array lengths are inconsistent.
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, order: u32, explicit: bool) -> Self {
        let s = b.len();
        assert!(s > 0, "tableau needs at least one stage");
        assert_eq!(c.len(), s, "c must have s entries");
        assert_eq!(a.len(), s * s, "A must be s x s");
        ButcherTableau { a, b, c, order, explicit }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stages() + j]
    }

    pub fn a_row(&self, i: usize) -> &[f64] {
        let s = self.stages();
        &self.a[i * s..(i + 1) * s]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// Classical order `p0`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_explicit(&self) -> bool {
        self.explicit
    }

    /// Checks structural consistency and the quadrature conditions
    /// `sum_i b_i c_i^(k-1) = 1/k` for `k = 1..=order`.
    pub fn validate(&self) -> ValidationReport {
        validate_tableau(self, VALIDATION_TOL)
    }
}

/// Residual threshold used by [`ButcherTableau::validate`].
pub const VALIDATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Explicit tableau with `c_1 != 0` or a nonzero entry on or above the diagonal.
    NotExplicit { row: usize, col: usize },
    /// `c_i != sum_j a_ij`.
    RowSum { row: usize, residual: f64 },
    /// `sum_i b_i != 1`.
    WeightSum { residual: f64 },
    /// Quadrature condition `B(k)` fails.
    Quadrature { k: u32, residual: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotExplicit { row, col } => {
                write!(f, "explicit tableau has nonzero a[{row}][{col}] on or above the diagonal")
            }
            Violation::RowSum { row, residual } => {
                write!(f, "c[{row}] != row sum of A (residual {residual:e})")
            }
            Violation::WeightSum { residual } => write!(f, "Σb ≠ 1 (residual {residual:e})"),
            Violation::Quadrature { k, residual } => {
                write!(f, "B({k}) fails: Σ b c^{} ≠ 1/{k} (residual {residual:e})", k - 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Largest residual over all checked conditions.
    pub max_residual: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Validates `t` with residual threshold `tol`.
pub fn validate_tableau(t: &ButcherTableau, tol: f64) -> ValidationReport {
    let s = t.stages();
    let mut violations = Vec::new();
    let mut max_residual: f64 = 0.0;

    if t.explicit {
        if t.c[0] != 0.0 {
            violations.push(Violation::NotExplicit { row: 0, col: 0 });
        }
        for i in 0..s {
            for j in i..s {
                if t.a(i, j) != 0.0 {
                    violations.push(Violation::NotExplicit { row: i, col: j });
                }
            }
        }
    }

    for i in 0..s {
        let residual = (t.a_row(i).iter().sum::<f64>() - t.c[i]).abs();
        max_residual = max_residual.max(residual);
        if residual > tol {
            violations.push(Violation::RowSum { row: i, residual });
        }
    }

    let residual = (t.b.iter().sum::<f64>() - 1.0).abs();
    max_residual = max_residual.max(residual);
    if residual > tol {
        violations.push(Violation::WeightSum { residual });
    }

    for k in 1..=t.order {
        let lhs: f64 = t
            .b
            .iter()
            .zip(&t.c)
            .map(|(b, c)| b * c.powi(k as i32 - 1))
            .sum();
        let residual = (lhs - 1.0 / k as f64).abs();
        max_residual = max_residual.max(residual);
        if residual > tol {
            violations.push(Violation::Quadrature { k, residual });
        }
    }

    ValidationReport { violations, max_residual }
}

/// The classical fourth order method.
pub fn rk4() -> ButcherTableau {
    #[rustfmt::skip]
    let a = vec![
        0.0, 0.0, 0.0, 0.0,
        0.5, 0.0, 0.0, 0.0,
        0.0, 0.5, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
    ];
    ButcherTableau::new(
        a,
        vec![1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0],
        vec![0.0, 0.5, 0.5, 1.0],
        4,
        true,
    )
}

/// Five-stage Gauss collocation method of order 10 (implicit).
///
/// Built from Butcher's closed forms in terms of `√70`; the primed
/// quantities are the conjugates under `√70 -> -√70`.
pub fn gauss10() -> ButcherTableau {
    let r = 70f64.sqrt();

    let w1 = (322.0 - 13.0 * r) / 3600.0;
    let w1p = (322.0 + 13.0 * r) / 3600.0;
    let w2 = 0.5 * ((35.0 + 2.0 * r) / 63.0).sqrt();
    let w2p = 0.5 * ((35.0 - 2.0 * r) / 63.0).sqrt();
    let w3 = w2 * (452.0 + 59.0 * r) / 3240.0;
    let w3p = w2p * (452.0 - 59.0 * r) / 3240.0;
    let w4 = w2 * (64.0 + 11.0 * r) / 1080.0;
    let w4p = w2p * (64.0 - 11.0 * r) / 1080.0;
    let w5 = 8.0 * w2 * (23.0 - r) / 405.0;
    let w5p = 8.0 * w2p * (23.0 + r) / 405.0;
    let w6 = w2 - 2.0 * w3 - w5;
    let w6p = w2p - 2.0 * w3p - w5p;
    let w7 = w2 * (308.0 - 23.0 * r) / 960.0;
    let w7p = w2p * (308.0 + 23.0 * r) / 960.0;

    let q = 32.0 / 225.0;

    #[rustfmt::skip]
    let a = vec![
        w1,             w1p - w3 + w4p, q - w5,   w1p - w3 - w4p, w1 - w6,
        w1 - w3p + w4,  w1p,            q - w5p,  w1p - w6p,      w1 - w3p - w4,
        w1 + w7,        w1p + w7p,      q,        w1p - w7p,      w1 - w7,
        w1 + w3p + w4,  w1p + w6p,      q + w5p,  w1p,            w1 + w3p - w4,
        w1 + w6,        w1p + w3 + w4p, q + w5,   w1p + w3 - w4p, w1,
    ];
    let b = vec![2.0 * w1, 2.0 * w1p, 64.0 / 225.0, 2.0 * w1p, 2.0 * w1];
    let c = vec![0.5 - w2, 0.5 - w2p, 0.5, 0.5 + w2p, 0.5 + w2];

    ButcherTableau::new(a, b, c, 10, false)
}
