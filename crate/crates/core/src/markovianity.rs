//! Markovianity witnesses for the reduced system dynamics.
//!
//! The reduced map is `Q_t = diag(1, 1, c_t, c_t)` on `(w, x, y, z)`. Two
//! criteria are implemented independently of the closed-form threshold:
//! CP-divisibility (Choi spectrum of the intermediate maps `Q_t Q_s⁻¹`) and
//! the trace-distance backflow measure, integrated over detected windows of
//! increasing distance.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    self, abs_c_trend, backflow_ratio, blp_analytic, c_polar, c_t, classify_regime, is_zero_of_c,
    oscillation, BlpValue, Regime, CRITICAL_BAND,
};
use crate::error::{Error, Result};
use crate::lindblad::{ModelParams, TimeGrid};
use crate::operator_space::{
    compose1q, decompose1q, hermitian_eigenvalues2, hermitian_eigenvalues4, BlochVector,
    CoherenceVector4, Mat2, Mat4,
};

/// Slack allowed on the Bloch-ball constraint.
pub const STATE_TOL: f64 = 1e-12;

/// Default threshold below which a Choi eigenvalue counts as negative.
pub const CHOI_TOL: f64 = 1e-10;

/// Accuracy of the crossing refinement in [`blp_numeric`].
pub const CROSSING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitState {
    bloch: BlochVector,
}

impl QubitState {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let bloch = BlochVector::new(x, y, z);
        if !bloch.is_finite() || bloch.norm() > 1.0 + STATE_TOL {
            return Err(Error::invalid(format!(
                "Bloch vector ({x}, {y}, {z}) lies outside the unit ball"
            )));
        }
        Ok(QubitState { bloch })
    }

    pub fn from_bloch(b: BlochVector) -> Result<Self> {
        Self::new(b.x, b.y, b.z)
    }

    pub fn bloch(&self) -> BlochVector {
        self.bloch
    }

    pub fn density_matrix(&self) -> Mat2 {
        self.bloch.density_matrix()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatePair {
    pub first: QubitState,
    pub second: QubitState,
}

impl StatePair {
    pub fn new(first: QubitState, second: QubitState) -> Self {
        StatePair { first, second }
    }

    /// Antipodal pure states on the `z` axis: `Δx = 0`, `|Δ| = 2`. No pair
    /// has more backflow.
    pub fn optimal() -> Self {
        StatePair {
            first: QubitState::new(0.0, 0.0, 1.0).unwrap(),
            second: QubitState::new(0.0, 0.0, -1.0).unwrap(),
        }
    }

    /// `(Δx, Δy, Δz)` of the Bloch vectors.
    pub fn deltas(&self) -> [f64; 3] {
        let (a, b) = (self.first.bloch, self.second.bloch);
        [a.x - b.x, a.y - b.y, a.z - b.z]
    }
}

/// Real 4×4 matrix acting on `(w, x, y, z)` coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTransferMap(pub Matrix4<f64>);

impl PauliTransferMap {
    pub fn identity() -> Self {
        PauliTransferMap(Matrix4::identity())
    }

    pub fn diagonal(d: [f64; 4]) -> Self {
        PauliTransferMap(Matrix4::from_diagonal(&d.into()))
    }

    pub fn apply(&self, v: CoherenceVector4) -> CoherenceVector4 {
        CoherenceVector4::from_array((self.0 * nalgebra::Vector4::from(v.to_array())).into())
    }

    pub fn apply_bloch(&self, b: BlochVector) -> BlochVector {
        self.apply(CoherenceVector4::from_bloch(b)).to_bloch()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &PauliTransferMap) -> PauliTransferMap {
        PauliTransferMap(self.0 * first.0)
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let row = self.0.row(0);
        (row[0] - 1.0).abs() <= tol && row.iter().skip(1).all(|x| x.abs() <= tol)
    }
}

/// `Q_t = diag(1, 1, c_t, c_t)`.
pub fn system_map(params: ModelParams, t: f64) -> PauliTransferMap {
    let c = c_t(params, t);
    PauliTransferMap::diagonal([1.0, 1.0, c, c])
}

/// `c_t / c_s`, computed from logarithms so long horizons do not underflow.
pub fn coherence_ratio(params: ModelParams, s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0) || !(t >= s) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "need 0 <= s <= t, got s = {s}, t = {t}"
        )));
    }
    if s == t {
        return Ok(1.0);
    }
    if is_zero_of_c(params, s) {
        return Err(Error::SingularMap { s });
    }
    let (sign_s, ln_s) = c_polar(params, s);
    let (sign_t, ln_t) = c_polar(params, t);
    Ok(sign_s * sign_t * (ln_t - ln_s).exp())
}

/// `Λ_{s→t} = Q_t Q_s⁻¹ = diag(1, 1, c_t/c_s, c_t/c_s)`.
pub fn intermediate_map(params: ModelParams, s: f64, t: f64) -> Result<PauliTransferMap> {
    let r = coherence_ratio(params, s, t)?;
    Ok(PauliTransferMap::diagonal([1.0, 1.0, r, r]))
}

/// Choi operator `½ Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`, normalized to unit trace for
/// trace-preserving maps.
pub fn choi_matrix(map: &PauliTransferMap) -> Mat4 {
    let ptm = map.0.map(|x| C64::new(x, 0.0));
    let mut choi = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let mut e = Mat2::zeros();
            e[(i, j)] = C64::new(1.0, 0.0);
            let coeffs = nalgebra::Vector4::from(decompose1q(&e));
            let image = compose1q(&(ptm * coeffs).into());
            choi.fixed_view_mut::<2, 2>(2 * i, 2 * j)
                .copy_from(&(image * C64::new(0.5, 0.0)));
        }
    }
    choi
}

/// Smallest eigenvalue of the Choi operator; non-negative iff the map is CP.
pub fn choi_min_eigenvalue(map: &PauliTransferMap) -> f64 {
    hermitian_eigenvalues4(&choi_matrix(map))[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CpVerdict {
    Divisible,
    NotDivisible,
    /// No violation seen, but the horizon ends before the first window in
    /// which one could occur.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpWitness {
    pub verdict: CpVerdict,
    pub min_eigenvalue: f64,
    /// Sub-interval `(s, t)` with the most negative Choi eigenvalue.
    pub worst_interval: Option<(f64, f64)>,
    /// Grid times at which `c` vanishes; sub-intervals starting there are
    /// skipped.
    pub skipped: Vec<f64>,
    pub tolerance: f64,
}

/// Test every consecutive sub-interval map of `grid` for complete positivity.
///
/// Sub-intervals whose left endpoint is a zero of `c_t` have no intermediate
/// map and are skipped; the neighbouring sub-intervals decide.
pub fn cp_divisibility_witness(
    params: ModelParams,
    grid: &TimeGrid,
    tol: f64,
) -> Result<CpWitness> {
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("tolerance must be >= 0, got {tol}")));
    }
    let times = grid.times();
    let mut min_eigenvalue = f64::INFINITY;
    let mut worst_interval = None;
    let mut skipped = Vec::new();
    for w in times.windows(2) {
        let (s, t) = (w[0], w[1]);
        let map = match intermediate_map(params, s, t) {
            Ok(m) => m,
            Err(Error::SingularMap { .. }) => {
                skipped.push(s);
                continue;
            }
            Err(e) => return Err(e),
        };
        let ev = choi_min_eigenvalue(&map);
        if ev < min_eigenvalue {
            min_eigenvalue = ev;
            worst_interval = Some((s, t));
        }
    }
    let verdict = if min_eigenvalue < -tol {
        CpVerdict::NotDivisible
    } else {
        match oscillation(params) {
            Some(osc) if grid.end() < osc.spacing => CpVerdict::Inconclusive,
            _ => CpVerdict::Divisible,
        }
    };
    Ok(CpWitness {
        verdict,
        min_eigenvalue,
        worst_interval,
        skipped,
        tolerance: tol,
    })
}

/// Grid that resolves the first increase window: horizon `1.5·t₁` below
/// threshold (10 otherwise), step at most `min(0.01, δ/50)`.
pub fn default_witness_grid(params: ModelParams) -> Result<TimeGrid> {
    match oscillation(params) {
        Some(osc) => TimeGrid::with_step(0.0, 1.5 * osc.spacing, (osc.delta / 50.0).min(0.01)),
        None => TimeGrid::with_step(0.0, 10.0, 0.01),
    }
}

/// `½ |r₁ − r₂|`.
pub fn trace_distance(a: &QubitState, b: &QubitState) -> f64 {
    let (p, q) = (a.bloch, b.bloch);
    0.5 * BlochVector::new(p.x - q.x, p.y - q.y, p.z - q.z).norm()
}

/// `½ Tr|ρ₁ − ρ₂|` from the eigenvalues of the difference.
pub fn trace_distance_eig(a: &QubitState, b: &QubitState) -> f64 {
    let ev = hermitian_eigenvalues2(&(a.density_matrix() - b.density_matrix()));
    0.5 * (ev[0].abs() + ev[1].abs())
}

/// `½ √(Δx² + c_t²(Δy² + Δz²))`.
pub fn evolved_trace_distance(params: ModelParams, pair: &StatePair, t: f64) -> f64 {
    let [dx, dy, dz] = pair.deltas();
    let c = c_t(params, t);
    0.5 * (dx * dx + c * c * (dy * dy + dz * dz)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlpOptions {
    /// Integration horizon; `None` picks one from the geometric tail.
    pub horizon: Option<f64>,
    pub n_pairs: usize,
    pub seed: u64,
    /// Sign-detection grid step; `None` uses `min(0.01, period/200)`.
    pub step: Option<f64>,
}

impl Default for BlpOptions {
    fn default() -> Self {
        BlpOptions {
            horizon: None,
            n_pairs: 32,
            seed: 0,
            step: None,
        }
    }
}

/// Horizon used without cooling, where the measure diverges.
pub const DIVERGENT_HORIZON: f64 = 10.0;

/// Relative size of the neglected geometric tail for the default horizon.
pub const TAIL_TARGET: f64 = 1e-6;

/// Window `[t_lo, t_hi]` on which the trace distance grew by `increase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncreaseWindow {
    pub t_lo: f64,
    pub t_hi: f64,
    pub increase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlpEstimate {
    /// Largest backflow found; the optimal pair's unless a random pair beat it.
    pub value: f64,
    pub optimal_pair_value: f64,
    /// Best value among the random pairs (0 when none were drawn).
    pub max_random_value: f64,
    pub best_pair: StatePair,
    pub horizon: f64,
    pub step: f64,
    pub seed: u64,
    /// Number of predicted increase windows inside the horizon.
    pub intervals_counted: usize,
    /// Upper bound on the backflow beyond the horizon (0 if none, ∞ at κ = 0).
    pub tail_bound: f64,
    pub divergent: bool,
    /// Backflow of the optimal pair in its first window.
    pub per_period_increment: f64,
    /// Windows detected for the optimal pair.
    pub increase_windows: Vec<IncreaseWindow>,
}

/// Numerically integrate the positive part of `∂_t d` over `[0, horizon]` for
/// the optimal pair and `n_pairs` random pairs.
///
/// Sign changes of `∂_t d` are located on a uniform grid and refined by
/// bisection; each increase is then the exact difference `d(t_hi) − d(t_lo)`.
pub fn blp_numeric(params: ModelParams, opts: &BlpOptions) -> Result<BlpEstimate> {
    if params.xi() == 0.0 && params.kappa() == 0.0 {
        return Err(Error::DegenerateModel);
    }
    let osc = oscillation(params);
    let ratio = backflow_ratio(params);
    let divergent = params.kappa() == 0.0 && params.xi() != 0.0;

    let horizon = match (opts.horizon, osc, ratio) {
        (Some(h), _, _) => h,
        (None, _, _) if divergent => DIVERGENT_HORIZON,
        (None, Some(osc), Some(r)) => {
            let n = (TAIL_TARGET.ln() / r.ln()).ceil().max(1.0);
            n * osc.spacing + 0.5 * osc.spacing
        }
        _ => DIVERGENT_HORIZON,
    };
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::invalid(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let step = match (opts.step, osc) {
        (Some(s), _) => s,
        (None, Some(osc)) => (osc.spacing / 200.0).min(0.01),
        (None, None) => 0.01,
    };
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!("step must be positive, got {step}")));
    }
    let n_steps = (horizon / step).ceil();
    if n_steps > 1e8 {
        return Err(Error::invalid("horizon / step is too large"));
    }

    let windows = increase_windows(params, horizon, n_steps as usize);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pairs: Vec<StatePair> = (0..opts.n_pairs)
        .map(|_| StatePair::new(random_state(&mut rng), random_state(&mut rng)))
        .collect();

    let optimal = StatePair::optimal();
    let optimal_windows = measure_windows(params, &optimal, &windows);
    let optimal_pair_value: f64 = optimal_windows.iter().map(|w| w.increase).sum();
    let random_values: Vec<f64> = pairs
        .par_iter()
        .map(|p| {
            measure_windows(params, p, &windows)
                .iter()
                .map(|w| w.increase)
                .sum()
        })
        .collect();

    let mut value = optimal_pair_value;
    let mut best_pair = optimal;
    let mut max_random_value = 0.0f64;
    for (p, &v) in pairs.iter().zip(&random_values) {
        max_random_value = max_random_value.max(v);
        if v > value {
            value = v;
            best_pair = *p;
        }
    }

    let intervals_counted = match osc {
        Some(osc) => (horizon / osc.spacing).floor() as usize,
        None => 0,
    };
    let tail_bound = match (ratio, osc) {
        _ if divergent => f64::INFINITY,
        (Some(r), Some(_)) => r.powi(intervals_counted as i32 + 1) / (1.0 - r),
        _ => 0.0,
    };
    let per_period_increment = optimal_windows.first().map_or(0.0, |w| w.increase);

    Ok(BlpEstimate {
        value,
        optimal_pair_value,
        max_random_value,
        best_pair,
        horizon,
        step,
        seed: opts.seed,
        intervals_counted,
        tail_bound,
        divergent,
        per_period_increment,
        increase_windows: optimal_windows,
    })
}

/// Uniform sample from the Bloch ball by rejection from the cube.
fn random_state(rng: &mut ChaCha8Rng) -> QubitState {
    loop {
        let v: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 {
            return QubitState::new(v[0], v[1], v[2]).expect("inside the ball");
        }
    }
}

/// Windows on which `|c_t|` grows. For any pair with `Δy² + Δz² > 0`,
/// `∂_t d = c ċ (Δy² + Δz²)/(4d)` has the sign of `∂_t |c_t|`, so the windows
/// are shared by every pair.
fn increase_windows(params: ModelParams, horizon: f64, n_steps: usize) -> Vec<(f64, f64)> {
    let sign = |t: f64| abs_c_trend(params, t) > 0.0;
    let at = |k: usize| {
        if k == n_steps {
            horizon
        } else {
            horizon * k as f64 / n_steps as f64
        }
    };
    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    let mut prev_t = 0.0;
    let mut prev = sign(0.0);
    if prev {
        open = Some(0.0);
    }
    for k in 1..=n_steps {
        let t = at(k);
        let cur = sign(t);
        if cur != prev {
            let crossing = bisect_sign(&sign, prev_t, t, prev);
            if cur {
                open = Some(crossing);
            } else if let Some(lo) = open.take() {
                out.push((lo, crossing));
            }
        }
        prev = cur;
        prev_t = t;
    }
    if let Some(lo) = open {
        out.push((lo, horizon));
    }
    out
}

fn bisect_sign(f: &impl Fn(f64) -> bool, mut lo: f64, mut hi: f64, at_lo: bool) -> f64 {
    while hi - lo > CROSSING_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn measure_windows(
    params: ModelParams,
    pair: &StatePair,
    windows: &[(f64, f64)],
) -> Vec<IncreaseWindow> {
    windows
        .iter()
        .map(|&(t_lo, t_hi)| {
            let increase = evolved_trace_distance(params, pair, t_hi)
                - evolved_trace_distance(params, pair, t_lo);
            IncreaseWindow {
                t_lo,
                t_hi,
                increase: increase.max(0.0),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub kappa_star: f64,
    /// `|κ* − 8|ξ||`.
    pub error: f64,
    pub witness: &'static str,
}

/// Name of the predicate bisected by [`threshold_scan`].
pub const THRESHOLD_WITNESS: &str = "rate_sign";

/// Bisect the rate-sign predicate (does `−ċ/2c` ever go negative?) for the
/// cooling rate at which it switches off.
pub fn threshold_scan(xi: f64, kappa_lo: f64, kappa_hi: f64, tol: f64) -> Result<ThresholdResult> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !(kappa_lo < kappa_hi) {
        return Err(Error::InvalidBracket {
            lo: kappa_lo,
            hi: kappa_hi,
        });
    }
    let pred =
        |k: f64| -> Result<bool> { Ok(analytic::rate_turns_negative(ModelParams::new(xi, k)?)) };
    if !pred(kappa_lo)? || pred(kappa_hi)? {
        return Err(Error::InvalidBracket {
            lo: kappa_lo,
            hi: kappa_hi,
        });
    }
    let (mut lo, mut hi) = (kappa_lo, kappa_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa_star = 0.5 * (lo + hi);
    Ok(ThresholdResult {
        kappa_star,
        error: (kappa_star - 8.0 * xi.abs()).abs(),
        witness: THRESHOLD_WITNESS,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovianityReport {
    pub params: ModelParams,
    pub regime: Regime,
    pub cp: CpWitness,
    pub rate_turns_negative: bool,
    pub blp_numeric: BlpEstimate,
    pub blp_analytic: BlpValue,
    pub increase_windows: Vec<IncreaseWindow>,
}

impl MarkovianityReport {
    /// Markovian according to the closed-form threshold `κ ≥ 8|ξ|`.
    pub fn markovian_by_threshold(&self) -> bool {
        self.params.kappa() >= self.params.critical_kappa()
    }

    pub fn markovian_by_cp(&self) -> bool {
        self.cp.verdict == CpVerdict::Divisible
    }

    pub fn markovian_by_rate(&self) -> bool {
        !self.rate_turns_negative
    }

    pub fn markovian_by_blp(&self, tol: f64) -> bool {
        !self.blp_numeric.divergent && self.blp_numeric.value < tol
    }

    /// All witnesses agree with the threshold.
    pub fn consistent(&self, blp_tol: f64) -> bool {
        let m = self.markovian_by_threshold();
        self.cp.verdict != CpVerdict::Inconclusive
            && self.markovian_by_cp() == m
            && self.markovian_by_rate() == m
            && self.markovian_by_blp(blp_tol) == m
    }
}

/// Run every witness with default grids.
pub fn assess(params: ModelParams, blp: &BlpOptions) -> Result<MarkovianityReport> {
    let grid = default_witness_grid(params)?;
    let cp = cp_divisibility_witness(params, &grid, CHOI_TOL)?;
    let blp_numeric = blp_numeric(params, blp)?;
    Ok(MarkovianityReport {
        params,
        regime: classify_regime(params, CRITICAL_BAND),
        cp,
        rate_turns_negative: analytic::rate_turns_negative(params),
        increase_windows: blp_numeric.increase_windows.clone(),
        blp_numeric,
        blp_analytic: blp_analytic(params)?,
    })
}

/// Oscillation period `4π/√(64ξ² − κ²)` below threshold.
pub fn period(params: ModelParams) -> Option<f64> {
    let d = params.discriminant();
    (d < 0.0).then(|| 4.0 * PI / (-d).sqrt())
}
