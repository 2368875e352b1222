//! Acceptance checks: each reproduces one published result from the generic
//! machinery and reports pass/fail with timing.

use std::time::{Duration, Instant};

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{blp_analytic, c_t, d_abs_c_dt, increase_intervals, rate_turns_negative};
use crate::error::{Error, Result};
use crate::lindblad::{
    bath_correlation_via_generator, bath_correlation_via_propagator, build_generator, evolve_expm,
    evolve_ode, propagator, system_bloch, GeneratorMatrix, Matrix16, ModelParams, OdeMethod,
    TimeGrid, DEFAULT_ATOL,
};
use crate::markovianity::{
    blp_numeric, cp_divisibility_witness, default_witness_grid, threshold_scan, BlpOptions,
    CpVerdict, CHOI_TOL,
};
use crate::operator_space::{
    min_eigenvalue, sandwich_superop_rep, BlochVector, CoherenceVector16, Pauli,
};

pub type GeneratorFn = fn(ModelParams) -> Result<GeneratorMatrix>;

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    /// Absolute tolerance of the adaptive integrator used by the ODE check.
    pub ode_tol: f64,
    pub generator: GeneratorFn,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            ode_tol: DEFAULT_ATOL,
            generator: build_generator,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
    pub budget_secs: Option<f64>,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let budget = self
            .budget_secs
            .map_or(String::new(), |b| format!(" / {b:.0} s"));
        format!(
            "[{}] {:>2} {:<28} {:>8.3} s{}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_secs,
            budget,
            self.detail
        )
    }
}

/// Numbered checks. 1–9 are the acceptance criteria; 10 is supplementary.
pub const CHECKS: [(u32, &str); 10] = [
    (1, "generator fidelity"),
    (2, "analytic-numeric oracle"),
    (3, "threshold reproduction"),
    (4, "blp closed form"),
    (5, "criteria agreement"),
    (6, "bath correlation"),
    (7, "contour sign structure"),
    (8, "conservation properties"),
    (9, "sandwich superoperators"),
    (10, "ode vs propagator"),
];

fn budget(id: u32) -> Option<Duration> {
    let secs = match id {
        1 | 6 | 9 => 1,
        2 | 7 => 10,
        3 => 5,
        4 => 30,
        5 => 60,
        _ => return None,
    };
    Some(Duration::from_secs(secs))
}

struct Verdict {
    passed: bool,
    detail: String,
}

fn outcome(id: u32, elapsed: Duration, v: Result<Verdict>) -> CheckOutcome {
    let name = CHECKS.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    let limit = budget(id);
    let (mut passed, mut detail) = match v {
        Ok(v) => (v.passed, v.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = limit {
        if elapsed > b {
            passed = false;
            detail.push_str("; over time budget");
        }
    }
    CheckOutcome {
        id,
        name,
        passed,
        detail,
        elapsed_secs: elapsed.as_secs_f64(),
        budget_secs: limit.map(|b| b.as_secs_f64()),
    }
}

/// Run one check by id.
pub fn run_check(id: u32, config: &VerifyConfig) -> Result<CheckOutcome> {
    let start = Instant::now();
    let v = match id {
        1 => generator_fidelity(config),
        2 => trajectories(config).map(|s| s.oracle()),
        3 => threshold_reproduction(),
        4 => blp_closed_form(config),
        5 => criteria_agreement(config),
        6 => bath_correlation(),
        7 => contour_signs(),
        8 => trajectories(config).map(|s| s.conservation()),
        9 => sandwich_table(),
        10 => ode_agreement(config),
        _ => return Err(Error::invalid(format!("no check with id {id}"))),
    };
    Ok(outcome(id, start.elapsed(), v))
}

/// Run all checks in order. Criteria 2 and 8 share one set of trajectories;
/// both are charged the shared time.
pub fn run_all(config: &VerifyConfig) -> Vec<CheckOutcome> {
    let mut out = Vec::with_capacity(CHECKS.len());
    let mut shared: Option<(Duration, Result<TrajectoryStats>)> = None;
    for (id, _) in CHECKS {
        if id == 2 || id == 8 {
            let (elapsed, stats) = shared.get_or_insert_with(|| {
                let start = Instant::now();
                let s = trajectories(config);
                (start.elapsed(), s)
            });
            let v = match stats {
                Ok(s) if id == 2 => Ok(s.oracle()),
                Ok(s) => Ok(s.conservation()),
                Err(e) => Err(e.clone()),
            };
            out.push(outcome(id, *elapsed, v));
        } else {
            out.push(run_check(id, config).expect("known id"));
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum Sym {
    HalfKappa,
    Kappa,
    TwoXi,
    MinusTwoXi,
}

/// Non-zero entries of the tabulated generator, as (row, column, value).
const REFERENCE_ENTRIES: [(usize, usize, Sym); 24] = [
    (1, 1, Sym::HalfKappa),
    (2, 2, Sym::HalfKappa),
    (2, 7, Sym::MinusTwoXi),
    (3, 0, Sym::Kappa),
    (3, 3, Sym::Kappa),
    (3, 6, Sym::TwoXi),
    (5, 5, Sym::HalfKappa),
    (6, 3, Sym::MinusTwoXi),
    (6, 6, Sym::HalfKappa),
    (7, 2, Sym::TwoXi),
    (7, 4, Sym::Kappa),
    (7, 7, Sym::Kappa),
    (8, 13, Sym::MinusTwoXi),
    (9, 9, Sym::HalfKappa),
    (9, 12, Sym::MinusTwoXi),
    (10, 10, Sym::HalfKappa),
    (11, 8, Sym::Kappa),
    (11, 11, Sym::Kappa),
    (12, 9, Sym::TwoXi),
    (13, 8, Sym::TwoXi),
    (13, 13, Sym::HalfKappa),
    (14, 14, Sym::HalfKappa),
    (15, 12, Sym::Kappa),
    (15, 15, Sym::Kappa),
];

/// The tabulated 16×16 generator, entry by entry.
pub fn reference_generator(params: ModelParams) -> Matrix16 {
    let (xi, kappa) = (params.xi(), params.kappa());
    let mut m = Matrix16::zeros();
    for &(r, c, sym) in REFERENCE_ENTRIES.iter() {
        m[(r, c)] = match sym {
            Sym::HalfKappa => -kappa / 2.0,
            Sym::Kappa => -kappa,
            Sym::TwoXi => 2.0 * xi,
            Sym::MinusTwoXi => -2.0 * xi,
        };
    }
    m
}

/// A generator with one sign flipped, for exercising the failure path.
pub fn faulty_generator(params: ModelParams) -> Result<GeneratorMatrix> {
    let mut m = *build_generator(params)?.matrix();
    m[(3, 6)] = -m[(3, 6)];
    Ok(GeneratorMatrix::from_raw(m, params))
}

fn generator_fidelity(config: &VerifyConfig) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut worst = 0.0f64;
    let mut mismatches = 0;
    for _ in 0..5 {
        let params = ModelParams::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..20.0))?;
        let built = (config.generator)(params)?;
        let reference = reference_generator(params);
        let scale = params.xi().abs().max(params.kappa()).max(1.0);
        for (a, b) in built.matrix().iter().zip(reference.iter()) {
            let diff = (a - b).abs();
            worst = worst.max(diff / scale);
            if diff > 4.0 * f64::EPSILON * scale {
                mismatches += 1;
            }
        }
    }
    Ok(Verdict {
        passed: mismatches == 0,
        detail: format!(
            "5 random (xi, kappa), {mismatches} mismatched entries, max rel diff {worst:.1e}"
        ),
    })
}

struct TrajectoryStats {
    max_c_err: f64,
    max_trace_dev: f64,
    min_eig: f64,
    max_x_drift: f64,
}

impl TrajectoryStats {
    fn oracle(&self) -> Verdict {
        Verdict {
            passed: self.max_c_err <= 1e-8,
            detail: format!("max |c_closed - c_numeric| = {:.2e}", self.max_c_err),
        }
    }

    fn conservation(&self) -> Verdict {
        Verdict {
            passed: self.max_trace_dev <= 1e-12
                && self.min_eig >= -1e-10
                && self.max_x_drift <= 1e-10,
            detail: format!(
                "trace dev {:.1e}, min eigenvalue {:.1e}, x drift {:.1e}",
                self.max_trace_dev, self.min_eig, self.max_x_drift
            ),
        }
    }
}

pub const ORACLE_PARAMS: [(f64, f64); 5] =
    [(1.0, 16.0), (1.0, 8.0), (1.0, 4.0), (1.0, 0.0), (0.5, 3.0)];

fn trajectories(config: &VerifyConfig) -> Result<TrajectoryStats> {
    let initials = [
        BlochVector::new(0.0, 0.0, 1.0),
        BlochVector::new(0.48, 0.36, 0.6),
    ];
    let grid = TimeGrid::new(0.0, 20.0, 2000)?;
    let per_param: Vec<Result<TrajectoryStats>> = ORACLE_PARAMS
        .par_iter()
        .map(|&(xi, kappa)| {
            let params = ModelParams::new(xi, kappa)?;
            let gen = (config.generator)(params)?;
            let mut s = TrajectoryStats {
                max_c_err: 0.0,
                max_trace_dev: 0.0,
                min_eig: f64::INFINITY,
                max_x_drift: 0.0,
            };
            for t in grid.times() {
                let u = propagator(&gen, t)?;
                let c = c_t(params, t);
                for b in &initials {
                    let v = CoherenceVector16(u * CoherenceVector16::initial(*b).0);
                    let r = system_bloch(&v);
                    s.max_c_err = s
                        .max_c_err
                        .max((r.y - c * b.y).abs())
                        .max((r.z - c * b.z).abs());
                    s.max_trace_dev = s
                        .max_trace_dev
                        .max((4.0 * v.get(Pauli::I, Pauli::I) - 1.0).abs());
                    s.min_eig = s.min_eig.min(min_eigenvalue(&v));
                    s.max_x_drift = s.max_x_drift.max((r.x - b.x).abs());
                }
            }
            Ok(s)
        })
        .collect();
    let mut total = TrajectoryStats {
        max_c_err: 0.0,
        max_trace_dev: 0.0,
        min_eig: f64::INFINITY,
        max_x_drift: 0.0,
    };
    for s in per_param {
        let s = s?;
        total.max_c_err = total.max_c_err.max(s.max_c_err);
        total.max_trace_dev = total.max_trace_dev.max(s.max_trace_dev);
        total.min_eig = total.min_eig.min(s.min_eig);
        total.max_x_drift = total.max_x_drift.max(s.max_x_drift);
    }
    Ok(total)
}

fn threshold_reproduction() -> Result<Verdict> {
    let mut worst = 0.0f64;
    for xi in [0.25, 0.5, 1.0, 2.0] {
        let r = threshold_scan(xi, 1.0, 20.0, 1e-6)?;
        worst = worst.max(r.error);
    }
    Ok(Verdict {
        passed: worst <= 1e-6,
        detail: format!("max |kappa* - 8|xi|| = {worst:.2e}"),
    })
}

fn blp_closed_form(config: &VerifyConfig) -> Result<Verdict> {
    let params: Vec<ModelParams> = [2.0, 4.0, 6.0, 7.5]
        .iter()
        .map(|&k| ModelParams::new(1.0, k))
        .collect::<Result<_>>()?;
    let opts = BlpOptions {
        n_pairs: 16,
        seed: config.seed,
        ..Default::default()
    };
    let results: Vec<Result<(f64, bool)>> = params
        .par_iter()
        .map(|&p| {
            let est = blp_numeric(p, &opts)?;
            let exact = blp_analytic(p)?.as_f64();
            let tail = exact - est.optimal_pair_value;
            Ok((
                (est.value - exact).abs(),
                tail >= -1e-9 && tail <= est.tail_bound + 1e-9,
            ))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut tails_ok = true;
    for r in results {
        let (gap, ok) = r?;
        worst = worst.max(gap);
        tails_ok &= ok;
    }
    let critical = ModelParams::new(1.0, 8.0)?;
    let at_threshold = blp_numeric(critical, &opts)?
        .value
        .max(blp_analytic(critical)?.as_f64().abs());
    Ok(Verdict {
        passed: worst <= 1e-3 && tails_ok && at_threshold <= 1e-9,
        detail: format!(
            "max gap {worst:.2e}, tail bounds {}, value at threshold {at_threshold:.1e}",
            if tails_ok { "hold" } else { "violated" }
        ),
    })
}

/// 20×20 grid of `(ξ, κ = 8ξ·r)` used for the criteria-agreement check.
///
/// Just below threshold (`r` above about 0.975) the backflow is smaller than
/// 1e−6 although the dynamics is non-Markovian, so `blp < 1e−6` cannot agree
/// with the other witnesses there. The ratios `r` are spread uniformly over
/// (0, 2) at cell centres, which keeps every point out of that band.
pub fn agreement_grid() -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(400);
    for i in 0..20 {
        let xi = 0.1 * (i + 1) as f64;
        for j in 0..20 {
            let r = 0.05 + 0.1 * j as f64;
            out.push((xi, 8.0 * xi * r));
        }
    }
    out
}

/// Verdicts of the three witnesses at one point: (cp, rate, blp).
pub fn witness_verdicts(params: ModelParams, seed: u64) -> Result<(bool, bool, bool)> {
    let cp = cp_divisibility_witness(params, &default_witness_grid(params)?, CHOI_TOL)?;
    let blp = blp_numeric(
        params,
        &BlpOptions {
            n_pairs: 4,
            seed,
            ..Default::default()
        },
    )?;
    Ok((
        cp.verdict == CpVerdict::Divisible,
        !rate_turns_negative(params),
        !blp.divergent && blp.value < 1e-6,
    ))
}

fn criteria_agreement(config: &VerifyConfig) -> Result<Verdict> {
    let grid = agreement_grid();
    let results: Vec<Result<Option<(f64, f64)>>> = grid
        .par_iter()
        .map(|&(xi, kappa)| {
            let params = ModelParams::new(xi, kappa)?;
            let expected = kappa >= 8.0 * xi.abs();
            let (cp, rate, blp) = witness_verdicts(params, config.seed)?;
            Ok((cp != expected || rate != expected || blp != expected).then_some((xi, kappa)))
        })
        .collect();
    let mut disagreements = Vec::new();
    for r in results {
        if let Some(p) = r? {
            disagreements.push(p);
        }
    }
    let detail = match disagreements.first() {
        None => format!("{} points, all witnesses agree", grid.len()),
        Some((xi, k)) => format!(
            "{} disagreements, first at xi = {xi}, kappa = {k}",
            disagreements.len()
        ),
    };
    Ok(Verdict {
        passed: disagreements.is_empty(),
        detail,
    })
}

fn bath_correlation() -> Result<Verdict> {
    let mut worst = 0.0f64;
    for kappa in [0.5, 2.0, 8.0] {
        for k in 0..=1000 {
            let tau = 0.01 * k as f64;
            let exact = (-0.5 * kappa * tau).exp();
            worst = worst
                .max((bath_correlation_via_propagator(kappa, tau)? - exact).abs())
                .max((bath_correlation_via_generator(kappa, tau)? - exact).abs());
        }
    }
    Ok(Verdict {
        passed: worst <= 1e-10,
        detail: format!("max deviation from exp(-kappa tau/2) = {worst:.1e}"),
    })
}

/// Rows `κ = 0, 0.25, …, 14` of the `∂_t|c_t|` contour at `ξ = 1`, `t ∈ [0, 10]`.
fn contour_signs() -> Result<Verdict> {
    let times = TimeGrid::with_step(0.0, 10.0, 0.01)?.times();
    let rows: Vec<Result<(bool, usize, usize)>> = (0..=56)
        .into_par_iter()
        .map(|k| {
            let kappa = 0.25 * k as f64;
            let params = ModelParams::new(1.0, kappa)?;
            let values: Vec<(f64, f64)> = times
                .iter()
                .filter_map(|&t| d_abs_c_dt(params, t).ok().map(|v| (t, v)))
                .collect();
            if kappa >= 8.0 {
                return Ok((values.iter().all(|&(_, v)| v <= 1e-12), 0, 0));
            }
            let intervals = increase_intervals(params, 64)?;
            let inside: Vec<_> = intervals.iter().filter(|iv| iv.t_hi <= 10.0).collect();
            let hit = inside
                .iter()
                .filter(|iv| values.iter().any(|&(t, v)| iv.contains(t) && v > 0.0))
                .count();
            Ok((hit == inside.len(), inside.len(), hit))
        })
        .collect();
    let mut bad_rows = 0;
    let mut windows = 0;
    for r in rows {
        let (ok, n, _) = r?;
        windows += n;
        if !ok {
            bad_rows += 1;
        }
    }
    Ok(Verdict {
        passed: bad_rows == 0,
        detail: format!(
            "57 rows, {windows} predicted windows, {bad_rows} rows violate the sign pattern"
        ),
    })
}

/// Tabulated `s_ab`, one string per row: `1`, `-` = −1, `i`, `j` = −i, `0`.
const SANDWICH_TABLE: [[&str; 4]; 16] = [
    ["1000", "0100", "0010", "0001"],
    ["0100", "1000", "000i", "00j0"],
    ["0010", "000j", "1000", "0i00"],
    ["0001", "00i0", "0j00", "1000"],
    ["0100", "1000", "000j", "00i0"],
    ["1000", "0100", "00-0", "000-"],
    ["000j", "0010", "0100", "i000"],
    ["00i0", "0001", "j000", "0100"],
    ["0010", "000i", "1000", "0j00"],
    ["000i", "0010", "0100", "j000"],
    ["1000", "0-00", "0010", "000-"],
    ["0j00", "i000", "0001", "0010"],
    ["0001", "00j0", "0i00", "1000"],
    ["00j0", "0001", "i000", "0100"],
    ["0i00", "j000", "0001", "0010"],
    ["1000", "0-00", "00-0", "0001"],
];

/// The tabulated matrix of `ρ ↦ σ_a ρ σ_b`.
pub fn reference_sandwich(a: Pauli, b: Pauli) -> Matrix4<C64> {
    let rows = SANDWICH_TABLE[4 * a.index() + b.index()];
    Matrix4::from_fn(|r, c| match rows[r].as_bytes()[c] {
        b'1' => C64::new(1.0, 0.0),
        b'-' => C64::new(-1.0, 0.0),
        b'i' => C64::new(0.0, 1.0),
        b'j' => C64::new(0.0, -1.0),
        _ => C64::new(0.0, 0.0),
    })
}

fn sandwich_table() -> Result<Verdict> {
    let mut wrong = Vec::new();
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            if sandwich_superop_rep(a, b) != reference_sandwich(a, b) {
                wrong.push(format!("s_{a:?}{b:?}"));
            }
        }
    }
    Ok(Verdict {
        passed: wrong.is_empty(),
        detail: if wrong.is_empty() {
            "16/16 match".into()
        } else {
            format!("mismatch: {}", wrong.join(", "))
        },
    })
}

fn ode_agreement(config: &VerifyConfig) -> Result<Verdict> {
    let limit = (100.0 * config.ode_tol).max(1e-8);
    let grid = TimeGrid::new(0.0, 20.0, 201)?;
    let mut worst = 0.0f64;
    for (xi, kappa) in [(1.0, 4.0), (1.0, 8.0), (1.0, 16.0)] {
        let params = ModelParams::new(xi, kappa)?;
        let gen = (config.generator)(params)?;
        let v0 = CoherenceVector16::initial(BlochVector::new(0.48, 0.36, 0.6));
        let states = evolve_ode(
            &gen,
            &v0,
            &grid,
            OdeMethod::Adaptive {
                atol: config.ode_tol,
            },
        )?;
        for (t, v) in grid.times().into_iter().zip(&states) {
            worst = worst.max(v.max_abs_diff(&evolve_expm(&gen, &v0, t)?));
        }
    }
    Ok(Verdict {
        passed: worst <= limit,
        detail: format!("max |ode - expm| = {worst:.1e} (limit {limit:.0e})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_has_expected_sparsity() {
        let m = reference_generator(ModelParams::new(1.0, 2.0).unwrap());
        assert_eq!(m.iter().filter(|x| **x != 0.0).count(), 24);
        assert!(m.row(0).iter().all(|x| *x == 0.0) && m.row(4).iter().all(|x| *x == 0.0));
    }

    #[test]
    fn reference_sandwich_is_unitary_conjugation() {
        // Every s_ab is a signed permutation with unit-modulus entries.
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let s = reference_sandwich(a, b);
                let p = s.adjoint() * s;
                assert_eq!(p, Matrix4::identity(), "s_{a:?}{b:?}");
            }
        }
    }

    #[test]
    fn cheap_checks_pass() {
        let cfg = VerifyConfig::default();
        for id in [1, 3, 6, 9] {
            let o = run_check(id, &cfg).unwrap();
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn fault_is_detected() {
        let cfg = VerifyConfig {
            generator: faulty_generator,
            ..Default::default()
        };
        let o = run_check(1, &cfg).unwrap();
        assert!(!o.passed);
        assert!(o.detail.contains("mismatched"));
    }

    #[test]
    fn agreement_grid_avoids_the_band() {
        let g = agreement_grid();
        assert_eq!(g.len(), 400);
        for (xi, k) in g {
            let r = k / (8.0 * xi);
            assert!(!(0.975..1.0).contains(&r));
        }
    }

    #[test]
    fn unknown_check() {
        assert!(run_check(42, &VerifyConfig::default()).is_err());
    }
}
