//! Explicit Runge–Kutta integrators for autonomous linear systems `y' = A y`.
//!
//! Two schemes: classical fixed-step RK4, and the Dormand–Prince 5(4) pair
//! with absolute error control and local extrapolation.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

/// Advance `y` from `t0` to `t1` with equal RK4 substeps no longer than `max_step`.
pub fn rk4_span<const N: usize>(
    a: &SMatrix<f64, N, N>,
    y: &SVector<f64, N>,
    t0: f64,
    t1: f64,
    max_step: f64,
) -> SVector<f64, N> {
    let span = t1 - t0;
    if span <= 0.0 {
        return *y;
    }
    let n = (span / max_step).ceil().max(1.0) as usize;
    let h = span / n as f64;
    let mut y = *y;
    for _ in 0..n {
        let k1 = a * y;
        let k2 = a * (y + k1 * (0.5 * h));
        let k3 = a * (y + k2 * (0.5 * h));
        let k4 = a * (y + k3 * h);
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    y
}

// Dormand–Prince 5(4) tableau. The system is autonomous, so the nodes are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth minus fourth order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 10_000_000;

/// Adaptive integrator state; the accepted step size carries over between
/// output points.
#[derive(Debug, Clone)]
pub struct DormandPrince<const N: usize> {
    pub atol: f64,
    h: f64,
}

impl<const N: usize> DormandPrince<N> {
    pub fn new(atol: f64, initial_step: f64) -> Self {
        DormandPrince {
            atol,
            h: initial_step,
        }
    }

    /// Advance from `t0` to exactly `t1`.
    pub fn advance(
        &mut self,
        a: &SMatrix<f64, N, N>,
        y: &SVector<f64, N>,
        t0: f64,
        t1: f64,
    ) -> Result<SVector<f64, N>> {
        let mut t = t0;
        let mut y = *y;
        let mut k1 = a * y;
        let mut steps = 0usize;
        while t < t1 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::NumericFailure {
                    time: t,
                    reason: "step budget exhausted".into(),
                });
            }
            let mut h = self.h.min(t1 - t);
            let floor = 1e-14 * t.abs().max(1.0);
            if h < floor && t1 - t > floor {
                return Err(Error::NumericFailure {
                    time: t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            if h <= 0.0 {
                break;
            }
            let k2 = a * (y + k1 * (h * A21));
            let k3 = a * (y + (k1 * A31 + k2 * A32) * h);
            let k4 = a * (y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
            let k5 = a * (y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
            let k6 = a * (y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
            let y_new = y + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
            let k7 = a * y_new;
            let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
            let err = err_vec.amax();
            if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
                return Err(Error::NumericFailure {
                    time: t,
                    reason: "non-finite state".into(),
                });
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * (self.atol / err).powf(0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= self.atol {
                let reached_end = h >= t1 - t;
                t = if reached_end { t1 } else { t + h };
                y = y_new;
                k1 = k7;
                // Don't let a short final step shrink the carried step size.
                if !reached_end || h * factor > self.h {
                    self.h = h * factor;
                }
            } else {
                h *= factor;
                self.h = h;
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix2, Vector2};

    fn oscillator() -> Matrix2<f64> {
        Matrix2::new(-0.1, -2.0, 2.0, -0.1)
    }

    fn exact(t: f64) -> Vector2<f64> {
        let d = (-0.1 * t).exp();
        Vector2::new(d * (2.0 * t).cos(), d * (2.0 * t).sin())
    }

    #[test]
    fn rk4_matches_exact() {
        let y = rk4_span(&oscillator(), &Vector2::new(1.0, 0.0), 0.0, 5.0, 0.005);
        assert!((y - exact(5.0)).amax() < 1e-9);
    }

    #[test]
    fn dopri_matches_exact() {
        let mut dp = DormandPrince::new(1e-12, 0.01);
        let mut y = Vector2::new(1.0, 0.0);
        let mut t = 0.0;
        for k in 1..=20 {
            let t1 = 0.5 * k as f64;
            y = dp.advance(&oscillator(), &y, t, t1).unwrap();
            t = t1;
            assert!((y - exact(t)).amax() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn dopri_underflow_reports_time() {
        let mut dp = DormandPrince::new(1e-300, 0.1);
        let err = dp
            .advance(&oscillator(), &Vector2::new(1.0, 0.0), 0.0, 1.0)
            .unwrap_err();
        assert!(matches!(err, Error::NumericFailure { .. }));
    }
}
