//! Error norms for comparing two approximations of the same state.

/// Componentwise maximum of `|y_i - y_bar_i|`.
///
/// Tolerances throughout the crate are absolute and compared against this
/// norm.
///
/// # Panics
///
/// If the two vectors differ in length.
pub fn error_norm(y: &[f64], y_bar: &[f64]) -> f64 {
    assert_eq!(y.len(), y_bar.len(), "error_norm: dimension mismatch");
    y.iter()
        .zip(y_bar)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Opt-in mixed norm: `max_i |y_i - y_bar_i| / (atol + rtol * max(|y_i|, |y_bar_i|))`.
///
/// A step passes when this is `<= 1`.
pub fn scaled_error_norm(y: &[f64], y_bar: &[f64], atol: f64, rtol: f64) -> f64 {
    assert_eq!(y.len(), y_bar.len(), "scaled_error_norm: dimension mismatch");
    y.iter()
        .zip(y_bar)
        .map(|(a, b)| (a - b).abs() / (atol + rtol * a.abs().max(b.abs())))
        .fold(0.0, f64::max)
}

/// Infinity norm of a single vector.
pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_vectors() {
        assert_eq!(error_norm(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn unit_difference() {
        assert_eq!(error_norm(&[1.0, 0.0], &[0.0, 0.0]), 1.0);
    }

    #[test]
    fn picks_largest_component() {
        assert_eq!(error_norm(&[0.5, -0.25, 3.0], &[0.5, 0.75, 3.0]), 1.0);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn mismatched_dimensions() {
        error_norm(&[1.0], &[1.0, 2.0]);
    }

    #[test]
    fn scaled_norm_reduces_to_absolute() {
        let a = [1.0, -4.0];
        let b = [1.5, -4.25];
        assert_eq!(scaled_error_norm(&a, &b, 1.0, 0.0), error_norm(&a, &b));
        // rtol only: 0.5 / 1.5 vs 0.25 / 4.25
        assert!((scaled_error_norm(&a, &b, 0.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3..1e3f64, 3)
    }

    proptest! {
        #[test]
        fn metric_axioms(a in vec3(), b in vec3(), c in vec3()) {
            prop_assert_eq!(error_norm(&a, &a), 0.0);
            prop_assert_eq!(error_norm(&a, &b), error_norm(&b, &a));
            let direct = error_norm(&a, &c);
            let via = error_norm(&a, &b) + error_norm(&b, &c);
            prop_assert!(direct <= via * (1.0 + 1e-15));
        }
    }
}
