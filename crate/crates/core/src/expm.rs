//! Matrix exponential of small dense real matrices by scaling and squaring
//! with a truncated Taylor kernel.

use nalgebra::SMatrix;

/// Scaled 1-norm bound for the Taylor kernel.
const SCALED_NORM: f64 = 0.5;
const MAX_TERMS: usize = 40;

pub fn norm1<const N: usize>(a: &SMatrix<f64, N, N>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)`. Non-finite input yields non-finite output; callers check.
pub fn expm<const N: usize>(a: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let norm = norm1(a);
    if !norm.is_finite() || a.iter().any(|v| !v.is_finite()) {
        return SMatrix::from_element(f64::NAN);
    }
    let squarings = if norm > SCALED_NORM {
        (norm / SCALED_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * 2f64.powi(-squarings);

    let mut sum = SMatrix::<f64, N, N>::identity();
    let mut term = SMatrix::<f64, N, N>::identity();
    for k in 1..=MAX_TERMS {
        term = term * scaled / k as f64;
        sum += term;
        // ‖A‖ ≤ 1/2 so the remainder is bounded by the current term.
        if norm1(&term) <= f64::EPSILON * 0.25 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Matrix4};

    #[test]
    fn zero_is_identity() {
        assert_eq!(expm(&Matrix4::<f64>::zeros()), Matrix4::identity());
    }

    #[test]
    fn rotation_generator() {
        let theta = 7.3_f64;
        let a = Matrix2::new(0.0, -theta, theta, 0.0);
        let e = expm(&a);
        let expected = Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos());
        assert!((e - expected).amax() < 1e-13);
    }

    #[test]
    fn diagonal_and_jordan_block() {
        let a = Matrix2::new(-3.0, 1.0, 0.0, -3.0);
        let t = 2.5;
        let e = expm(&(a * t));
        let d = (-3.0 * t).exp();
        assert!((e[(0, 0)] - d).abs() < 1e-15);
        assert!((e[(0, 1)] - t * d).abs() < 1e-15);
        assert!(e[(1, 0)].abs() < 1e-18);
    }

    #[test]
    fn nan_propagates() {
        let a = Matrix2::new(f64::NAN, 0.0, 0.0, 0.0);
        assert!(expm(&a).iter().all(|v| v.is_nan()));
    }
}
