//! Closed-form solution of the reduced dynamics and derived quantities.
//!
//! The system coherence factor is
//!
//! ```text
//! c_t = e^{−κt/4} [cosh(u) + (κt/4)·sinh(u)/u],   u² = (κ² − 64ξ²) t² / 16
//! ```
//!
//! which covers the overdamped (`u` real), underdamped (`u` imaginary) and
//! critical (`u = 0`) regimes with one expression. Both `cosh(u)` and
//! `sinh(u)/u` are even in `u` and are evaluated as functions of `u²`, so
//! nothing divides by `√(κ² − 64ξ²)` near the boundary. Its derivative is
//! `ċ_t = −4ξ² t e^{−κt/4} sinh(u)/u`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lindblad::ModelParams;

/// Relative band around `κ² = 64ξ²` classified as critical by default.
pub const CRITICAL_BAND: f64 = 1e-8;

/// `|c_t e^{κt/4}|` below which `c_t` is treated as a zero.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

/// Critical iff `|κ² − 64ξ²| ≤ tol·max(κ², 64ξ², 1)`.
pub fn classify_regime(params: ModelParams, tol: f64) -> Regime {
    let k2 = params.kappa() * params.kappa();
    let x2 = 64.0 * params.xi() * params.xi();
    let d = k2 - x2;
    if d.abs() <= tol * k2.max(x2).max(1.0) {
        Regime::Critical
    } else if d < 0.0 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    }
}

/// `(cosh √q, sinh(√q)/√q)`, continued to `q < 0` as `(cos √−q, sin(√−q)/√−q)`.
fn cosh_sinhc(q: f64) -> (f64, f64) {
    if q.abs() < 1e-3 {
        // Σ q^k/(2k)! and Σ q^k/(2k+1)!
        let mut ch = 1.0;
        let mut shc = 1.0;
        let mut term_c = 1.0;
        let mut term_s = 1.0;
        for k in 1..8 {
            let k = k as f64;
            term_c *= q / ((2.0 * k - 1.0) * (2.0 * k));
            term_s *= q / ((2.0 * k) * (2.0 * k + 1.0));
            ch += term_c;
            shc += term_s;
        }
        (ch, shc)
    } else if q > 0.0 {
        let u = q.sqrt();
        (u.cosh(), u.sinh() / u)
    } else {
        let u = (-q).sqrt();
        (u.cos(), u.sin() / u)
    }
}

/// Beyond this `u²` the overdamped branch is evaluated in exponential form.
const LARGE_Q: f64 = 1.0;

fn q_of(params: ModelParams, t: f64) -> f64 {
    params.discriminant() * t * t / 16.0
}

/// `c_t e^{κt/4}` for `u² ≤ LARGE_Q`.
fn scaled_c(params: ModelParams, t: f64) -> f64 {
    let (ch, shc) = cosh_sinhc(q_of(params, t));
    ch + 0.25 * params.kappa() * t * shc
}

/// Coherence factor multiplying the `y` and `z` Bloch components.
pub fn c_t(params: ModelParams, t: f64) -> f64 {
    let a = 0.25 * params.kappa();
    let q = q_of(params, t);
    if q > LARGE_Q {
        let w = params.discriminant().sqrt() / 4.0;
        0.5 * ((w - a) * t).exp() * (1.0 + a / w) + 0.5 * (-(w + a) * t).exp() * (1.0 - a / w)
    } else {
        (-a * t).exp() * scaled_c(params, t)
    }
}

/// `dc_t/dt`.
pub fn c_dot(params: ModelParams, t: f64) -> f64 {
    let a = 0.25 * params.kappa();
    let xi2 = params.xi() * params.xi();
    let q = q_of(params, t);
    if q > LARGE_Q {
        let w = params.discriminant().sqrt() / 4.0;
        -4.0 * xi2 * (((w - a) * t).exp() - (-(w + a) * t).exp()) / (2.0 * w)
    } else {
        let (_, shc) = cosh_sinhc(q);
        -4.0 * xi2 * t * (-a * t).exp() * shc
    }
}

/// `(sgn c_t, ln|c_t|)`, free of underflow at long times.
pub(crate) fn c_polar(params: ModelParams, t: f64) -> (f64, f64) {
    let a = 0.25 * params.kappa();
    if q_of(params, t) > LARGE_Q {
        let w = params.discriminant().sqrt() / 4.0;
        let h = 0.5 * ((1.0 + a / w) + (1.0 - a / w) * (-2.0 * w * t).exp());
        (1.0, (w - a) * t + h.ln())
    } else {
        let g = scaled_c(params, t);
        (g.signum(), -a * t + g.abs().ln())
    }
}

/// True where `c_t` is numerically zero relative to its envelope.
pub(crate) fn is_zero_of_c(params: ModelParams, t: f64) -> bool {
    q_of(params, t) <= LARGE_Q && scaled_c(params, t).abs() < POLE_TOL
}

/// Sign of `c_t ċ_t`, i.e. of `∂_t |c_t|`, evaluated without the decaying
/// envelope. Zero at `t = 0` and for `ξ = 0`.
pub(crate) fn abs_c_trend(params: ModelParams, t: f64) -> f64 {
    if params.xi() == 0.0 || t == 0.0 {
        return 0.0;
    }
    let q = q_of(params, t);
    if q > LARGE_Q {
        return -1.0;
    }
    let (ch, shc) = cosh_sinhc(q);
    let g = ch + 0.25 * params.kappa() * t * shc;
    let s = -(g * t * shc);
    if s == 0.0 {
        0.0
    } else {
        s.signum()
    }
}

/// Zero of `c_t` closest to `t`, if the dynamics has any (underdamped only).
pub fn nearest_zero(params: ModelParams, t: f64) -> Option<f64> {
    let d = params.discriminant();
    if d >= 0.0 {
        return None;
    }
    let s = (-d).sqrt() / 4.0;
    let phase = s.atan2(0.25 * params.kappa());
    let n = ((t * s + phase) / PI).round().max(1.0);
    Some((n * PI - phase) / s)
}

fn pole_check(params: ModelParams, t: f64) -> Result<()> {
    if q_of(params, t) <= LARGE_Q && scaled_c(params, t).abs() < POLE_TOL {
        return Err(Error::Pole {
            t,
            nearest_zero: nearest_zero(params, t).unwrap_or(t),
        });
    }
    Ok(())
}

/// `ċ_t / c_t`. The master-equation dephasing rate is `−ċ/(2c)`.
///
/// Fails with [`Error::Pole`] at zeros of `c_t` (underdamped regime only).
/// The ratio is evaluated without the common `e^{−κt/4}` factor, so it stays
/// finite long after `c_t` itself underflows.
pub fn c_dot_over_c(params: ModelParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let xi2 = params.xi() * params.xi();
    let a = 0.25 * params.kappa();
    let q = q_of(params, t);
    if q > LARGE_Q {
        let w = params.discriminant().sqrt() / 4.0;
        let th = (w * t).tanh();
        return Ok(-4.0 * xi2 * th / (w + a * th));
    }
    pole_check(params, t)?;
    let (ch, shc) = cosh_sinhc(q);
    Ok(-4.0 * xi2 * t * shc / (ch + a * t * shc))
}

/// Coefficient `−ċ/(2c)` of `𝒟[σ_x]` in the time-local system master equation.
pub fn time_local_rate(params: ModelParams, t: f64) -> Result<f64> {
    Ok(-0.5 * c_dot_over_c(params, t)?)
}

/// `∂_t |c_t| = sgn(c_t) ċ_t`; has the sign of `ċ/c`.
pub fn d_abs_c_dt(params: ModelParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    pole_check(params, t)?;
    Ok(c_t(params, t).signum() * c_dot(params, t))
}

/// Window `(t_n − δ, t_n)` during which `|c_t|` grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncreaseInterval {
    pub n: usize,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl IncreaseInterval {
    pub fn width(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_lo < t && t < self.t_hi
    }
}

/// `√(64ξ² − κ²)`, `t₁` spacing and `δ` for the underdamped regime.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Oscillation {
    pub spacing: f64,
    pub delta: f64,
}

pub(crate) fn oscillation(params: ModelParams) -> Option<Oscillation> {
    let d = params.discriminant();
    if d >= 0.0 {
        return None;
    }
    let root = (-d).sqrt();
    Some(Oscillation {
        spacing: 4.0 * PI / root,
        delta: 4.0 * root.atan2(params.kappa()) / root,
    })
}

/// `t_n = 4nπ/√(64ξ² − κ²)`, `δ = 4 arctan(√(64ξ² − κ²)/κ)/√(64ξ² − κ²)` for
/// `n = 1..=n_max`.
pub fn increase_intervals(params: ModelParams, n_max: usize) -> Result<Vec<IncreaseInterval>> {
    let regime = classify_regime(params, CRITICAL_BAND);
    if regime != Regime::Underdamped {
        return Err(Error::WrongRegime {
            expected: Regime::Underdamped,
            found: regime,
        });
    }
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let osc = oscillation(params).expect("underdamped");
    Ok((1..=n_max)
        .map(|n| {
            let t_hi = n as f64 * osc.spacing;
            IncreaseInterval {
                n,
                t_lo: t_hi - osc.delta,
                t_hi,
            }
        })
        .collect())
}

/// Value of the trace-distance backflow measure; `Infinite` without cooling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlpValue {
    Finite(f64),
    Infinite,
}

impl BlpValue {
    pub fn as_f64(self) -> f64 {
        match self {
            BlpValue::Finite(v) => v,
            BlpValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, BlpValue::Infinite)
    }
}

impl Serialize for BlpValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BlpValue::Finite(v) => s.serialize_f64(*v),
            BlpValue::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// `𝒩 = 1/(exp(κπ/√(64ξ² − κ²)) − 1)` below threshold, 0 at or above it.
pub fn blp_analytic(params: ModelParams) -> Result<BlpValue> {
    let (xi, kappa) = (params.xi(), params.kappa());
    if xi == 0.0 && kappa == 0.0 {
        return Err(Error::DegenerateModel);
    }
    if kappa == 0.0 {
        return Ok(BlpValue::Infinite);
    }
    let d = params.discriminant();
    if d >= 0.0 {
        return Ok(BlpValue::Finite(0.0));
    }
    Ok(BlpValue::Finite(1.0 / (kappa * PI / (-d).sqrt()).exp_m1()))
}

/// Ratio of consecutive backflow increments, `e^{−κπ/√(64ξ² − κ²)}`.
pub fn backflow_ratio(params: ModelParams) -> Option<f64> {
    let d = params.discriminant();
    (d < 0.0).then(|| (-params.kappa() * PI / (-d).sqrt()).exp())
}

/// `f_B(τ) = e^{−κτ/2}`.
pub fn bath_correlation(kappa: f64, tau: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !(tau >= 0.0) || !kappa.is_finite() || !tau.is_finite() {
        return Err(Error::invalid(format!(
            "kappa and tau must be finite and >= 0, got {kappa}, {tau}"
        )));
    }
    Ok((-0.5 * kappa * tau).exp())
}

/// A time at which the dephasing rate `−ċ/(2c)` is negative, if one exists.
///
/// Below threshold the rate is negative throughout `(t₁ − δ, t₁)`; the
/// midpoint is returned after confirming the sign. At or above threshold the
/// rate is `4ξ² tanh(u)/(2(w + (κ/4) tanh u))` with `w ≥ 0`, never negative.
pub fn negative_rate_time(params: ModelParams) -> Option<f64> {
    let osc = oscillation(params)?;
    let t = osc.spacing - 0.5 * osc.delta;
    match time_local_rate(params, t) {
        Ok(rate) if rate < 0.0 => Some(t),
        _ => None,
    }
}

/// Sign predicate behind the threshold scan: does the rate ever go negative?
pub fn rate_turns_negative(params: ModelParams) -> bool {
    negative_rate_time(params).is_some()
}
