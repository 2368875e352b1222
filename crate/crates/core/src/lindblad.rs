//! Joint system–bath master equation in the 16-dimensional Pauli coefficient
//! space.
//!
//! The generator is assembled generically: the Lindbladian
//! `ρ ↦ −iξ[σ_x⊗σ_x, ρ] + κ 𝒟[σ₋ᴮ]ρ` is applied to each basis operator
//! `σ_i⊗σ_j` and the image is decomposed back onto the basis. Nothing about
//! the matrix layout is hard-coded here.

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::ode::{rk4_span, DormandPrince};
use crate::operator_space::{
    decompose1q, decompose2q, devectorize1q, devectorize2q, kron, partial_trace_bath, pauli_matrix,
    pauli_product, sandwich_superop_rep, vectorize1q, CoherenceVector16, CoherenceVector4, Mat2,
    Mat4, Pauli,
};

pub type Matrix16 = SMatrix<f64, 16, 16>;

/// Default absolute tolerance of the adaptive integrator.
pub const DEFAULT_ATOL: f64 = 1e-10;

/// Coupling `ξ` of the `σ_x⊗σ_x` interaction and cooling rate `κ` of the bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    xi: f64,
    kappa: f64,
}

impl ModelParams {
    pub fn new(xi: f64, kappa: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::invalid(format!("xi must be finite, got {xi}")));
        }
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::invalid(format!(
                "kappa must be finite and >= 0, got {kappa}"
            )));
        }
        Ok(ModelParams { xi, kappa })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `κ² − 64ξ²`: positive overdamped, negative underdamped.
    pub fn discriminant(&self) -> f64 {
        self.kappa * self.kappa - 64.0 * self.xi * self.xi
    }

    /// The cooling rate `8|ξ|` at which the dynamics turns Markovian.
    pub fn critical_kappa(&self) -> f64 {
        8.0 * self.xi.abs()
    }
}

/// The 16×16 real generator `M` of `∂_t v = M v`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    matrix: Matrix16,
    params: ModelParams,
}

impl GeneratorMatrix {
    /// Wrap an arbitrary matrix. Used to inject faulty generators into the
    /// verification checks.
    pub fn from_raw(matrix: Matrix16, params: ModelParams) -> Self {
        GeneratorMatrix { matrix, params }
    }

    pub fn matrix(&self) -> &Matrix16 {
        &self.matrix
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn apply(&self, v: &CoherenceVector16) -> CoherenceVector16 {
        CoherenceVector16(self.matrix * v.0)
    }
}

/// Output times for trajectory integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    start: f64,
    end: f64,
    samples: usize,
}

impl TimeGrid {
    /// `samples` equally spaced points including both ends.
    pub fn new(start: f64, end: f64, samples: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() || start < 0.0 {
            return Err(Error::invalid(format!(
                "time grid bounds must be finite with start >= 0, got [{start}, {end}]"
            )));
        }
        if end <= start {
            return Err(Error::invalid(format!(
                "time grid end {end} must exceed start {start}"
            )));
        }
        if samples < 2 {
            return Err(Error::invalid("time grid needs at least two samples"));
        }
        Ok(TimeGrid {
            start,
            end,
            samples,
        })
    }

    /// Points spaced by (at most) `dt`, always including `end`.
    pub fn with_step(start: f64, end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let intervals = ((end - start) / dt - 1e-9).ceil().max(1.0);
        if intervals > 1e8 {
            return Err(Error::invalid("time grid is too fine"));
        }
        TimeGrid::new(start, end, intervals as usize + 1)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.samples
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / (self.samples - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.samples {
            self.end
        } else {
            self.start + k as f64 * self.step()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|k| self.time(k)).collect()
    }
}

/// `σ₋ᴮ = |0ᴮ⟩⟨1ᴮ|` with `|0ᴮ⟩` the `σ_z = −1` eigenstate.
pub fn sigma_minus() -> Mat2 {
    let o = C64::new(0.0, 0.0);
    Mat2::new(o, o, C64::new(1.0, 0.0), o)
}

fn dissipate(l: &Mat4, rho: &Mat4) -> Mat4 {
    let ld = l.adjoint();
    let ldl = ld * l;
    l * rho * ld - (ldl * rho + rho * ldl) * C64::new(0.5, 0.0)
}

fn lindbladian(params: ModelParams, rho: &Mat4) -> Mat4 {
    let h = pauli_product(Pauli::X, Pauli::X) * C64::new(params.xi, 0.0);
    let jump = kron(&Mat2::identity(), &sigma_minus());
    let unitary = (h * rho - rho * h) * C64::new(0.0, -1.0);
    if params.kappa == 0.0 {
        unitary
    } else {
        unitary + dissipate(&jump, rho) * C64::new(params.kappa, 0.0)
    }
}

fn superoperator_matrix(map: impl Fn(&Mat4) -> Mat4) -> Matrix16 {
    let mut m = Matrix16::zeros();
    for i in Pauli::ALL {
        for j in Pauli::ALL {
            let col = 4 * i.index() + j.index();
            let image = decompose2q(&map(&pauli_product(i, j)));
            for (row, c) in image.iter().enumerate() {
                debug_assert!(
                    c.im.abs() < 1e-12,
                    "Hermiticity-preserving map produced imaginary coefficient"
                );
                m[(row, col)] = c.re;
            }
        }
    }
    m
}

pub fn build_generator(params: ModelParams) -> Result<GeneratorMatrix> {
    let params = ModelParams::new(params.xi, params.kappa)?;
    let matrix = superoperator_matrix(|b| lindbladian(params, b));
    Ok(GeneratorMatrix { matrix, params })
}

/// Unit-rate bath dissipator `𝒟[σ₋ᴮ]` applied to a joint operator.
pub fn dissipator_action(v: &CoherenceVector16) -> CoherenceVector16 {
    let jump = kron(&Mat2::identity(), &sigma_minus());
    let image = decompose2q(&dissipate(&jump, &devectorize2q(v)));
    CoherenceVector16::from_array(image.map(|c| c.re))
}

/// Matrix of [`dissipator_action`] on the 16-dimensional coefficient space.
pub fn dissipator_matrix() -> Matrix16 {
    let mut m = Matrix16::zeros();
    for col in 0..16 {
        let mut e = CoherenceVector16::zeros();
        e.0[col] = 1.0;
        m.set_column(col, &dissipator_action(&e).0);
    }
    m
}

/// `exp(M t)`.
pub fn propagator(gen: &GeneratorMatrix, t: f64) -> Result<Matrix16> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(Matrix16::identity());
    }
    let p = expm(&(gen.matrix * t));
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure {
            time: t,
            reason: "non-finite matrix exponential".into(),
        });
    }
    Ok(p)
}

/// `v(t) = exp(M t) v₀`.
pub fn evolve_expm(
    gen: &GeneratorMatrix,
    v0: &CoherenceVector16,
    t: f64,
) -> Result<CoherenceVector16> {
    if t == 0.0 {
        return Ok(*v0);
    }
    let v = propagator(gen, t)? * v0.0;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericFailure {
            time: t,
            reason: "non-finite state".into(),
        });
    }
    Ok(CoherenceVector16(v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeMethod {
    /// Classical RK4; `None` picks `min(0.01, 0.1 / max(|ξ|, κ, 1))`.
    Rk4 { step: Option<f64> },
    /// Dormand–Prince 5(4) with absolute tolerance `atol`.
    Adaptive { atol: f64 },
}

impl Default for OdeMethod {
    fn default() -> Self {
        OdeMethod::Adaptive { atol: DEFAULT_ATOL }
    }
}

pub fn default_rk4_step(params: ModelParams) -> f64 {
    let fastest = params.xi.abs().max(params.kappa).max(1.0);
    (0.1 / fastest).min(0.01)
}

/// Integrate `∂_t v = M v` from `t = 0` and return the state at every grid time.
pub fn evolve_ode(
    gen: &GeneratorMatrix,
    v0: &CoherenceVector16,
    grid: &TimeGrid,
    method: OdeMethod,
) -> Result<Vec<CoherenceVector16>> {
    let m = &gen.matrix;
    let mut out = Vec::with_capacity(grid.len());
    let mut t = 0.0;
    let mut y = v0.0;
    match method {
        OdeMethod::Rk4 { step } => {
            let h = step.unwrap_or_else(|| default_rk4_step(gen.params));
            if !(h > 0.0) {
                return Err(Error::invalid(format!(
                    "RK4 step must be positive, got {h}"
                )));
            }
            for t1 in grid.times() {
                y = rk4_span(m, &y, t, t1, h);
                t = t1;
                if y.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NumericFailure {
                        time: t,
                        reason: "non-finite state".into(),
                    });
                }
                out.push(CoherenceVector16(y));
            }
        }
        OdeMethod::Adaptive { atol } => {
            if !(atol > 0.0) {
                return Err(Error::invalid(format!(
                    "tolerance must be positive, got {atol}"
                )));
            }
            let mut dp = DormandPrince::new(atol, default_rk4_step(gen.params));
            for t1 in grid.times() {
                y = dp.advance(m, &y, t, t1)?;
                t = t1;
                out.push(CoherenceVector16(y));
            }
        }
    }
    Ok(out)
}

/// Reduced system Bloch vector of a joint state.
pub fn system_bloch(v: &CoherenceVector16) -> crate::operator_space::BlochVector {
    partial_trace_bath(v).to_bloch()
}

/// Closed-form action of `exp(κτ 𝒟[σ₋])` on a single bath-qubit operator:
/// transverse components decay at `κ/2`, the `(w, z)` pair relaxes to the
/// ground state at rate `κ`.
pub fn bath_propagator(kappa: f64, tau: f64, b: CoherenceVector4) -> Result<CoherenceVector4> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!(
            "kappa must be finite and >= 0, got {kappa}"
        )));
    }
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::invalid(format!(
            "tau must be finite and >= 0, got {tau}"
        )));
    }
    let transverse = (-0.5 * kappa * tau).exp();
    let longitudinal = (-kappa * tau).exp();
    Ok(CoherenceVector4::new(
        b.w,
        b.x * transverse,
        b.y * transverse,
        -b.w + (b.z + b.w) * longitudinal,
    ))
}

/// `κ 𝒟[σ₋]` on the single-qubit coefficient space, assembled from the
/// sandwich representations `s_ab`.
pub fn bath_generator(kappa: f64) -> Matrix4<f64> {
    let l = decompose1q(&sigma_minus());
    let ldl = decompose1q(&(sigma_minus().adjoint() * sigma_minus()));
    let mut m = Matrix4::<C64>::zeros();
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            m += sandwich_superop_rep(a, b) * (l[a.index()] * l[b.index()].conj());
        }
    }
    for c in Pauli::ALL {
        let anti = sandwich_superop_rep(c, Pauli::I) + sandwich_superop_rep(Pauli::I, c);
        m -= anti * (ldl[c.index()] * 0.5);
    }
    m.map(|z| z.re * kappa)
}

fn bath_correlation_operator() -> Result<CoherenceVector4> {
    // σ_x ρ₀ + ρ₀ σ_x with ρ₀ = |0ᴮ⟩⟨0ᴮ|.
    let rho0 = devectorize1q(&crate::operator_space::bath_ground_state());
    let x = pauli_matrix(Pauli::X);
    vectorize1q(&(x * rho0 + rho0 * x))
}

/// `½ Tr(σ_x b)`; the factor makes `f_B(0) = 1`.
fn pair_with_sigma_x(b: &CoherenceVector4) -> f64 {
    0.5 * (pauli_matrix(Pauli::X) * devectorize1q(b)).trace().re
}

/// `f_B(τ) = ½ Tr_B[σ_x e^{κτ𝒟}(σ_x ρ₀ + ρ₀ σ_x)]` using [`bath_propagator`].
pub fn bath_correlation_via_propagator(kappa: f64, tau: f64) -> Result<f64> {
    let op = bath_correlation_operator()?;
    Ok(pair_with_sigma_x(&bath_propagator(kappa, tau, op)?))
}

/// Same correlation, propagating with `exp(τ · bath_generator(κ))`.
pub fn bath_correlation_via_generator(kappa: f64, tau: f64) -> Result<f64> {
    if !(kappa >= 0.0) || !(tau >= 0.0) {
        return Err(Error::invalid("kappa and tau must be >= 0"));
    }
    let op = bath_correlation_operator()?;
    let prop = expm(&(bath_generator(kappa) * tau));
    let out = prop * nalgebra::Vector4::from(op.to_array());
    Ok(pair_with_sigma_x(&CoherenceVector4::new(
        out[0], out[1], out[2], out[3],
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_space::{
        bath_excited_state, bath_ground_state, min_eigenvalue, BlochVector,
    };

    fn params(xi: f64, kappa: f64) -> ModelParams {
        ModelParams::new(xi, kappa).unwrap()
    }

    fn idx(i: Pauli, j: Pauli) -> usize {
        4 * i.index() + j.index()
    }

    // Closed forms written out independently of the analytic module.
    fn c_under(xi: f64, k: f64, t: f64) -> f64 {
        let s = (64.0 * xi * xi - k * k).sqrt();
        (-k * t / 4.0).exp() * (k * (t * s / 4.0).sin() / s + (t * s / 4.0).cos())
    }

    #[test]
    fn rejects_negative_kappa() {
        assert!(matches!(
            ModelParams::new(1.0, -0.1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(ModelParams::new(f64::NAN, 1.0).is_err());
        assert!(ModelParams::new(-1.0, 0.0).is_ok());
    }

    #[test]
    fn generator_rows() {
        let (xi, k) = (1.7, 0.9);
        let m = *build_generator(params(xi, k)).unwrap().matrix();
        assert_eq!(m[(1, 1)], -k / 2.0);
        let r = idx(Pauli::I, Pauli::Z);
        assert_eq!(m[(r, idx(Pauli::I, Pauli::I))], -k);
        assert_eq!(m[(r, idx(Pauli::I, Pauli::Z))], -k);
        assert_eq!(m[(r, idx(Pauli::X, Pauli::Y))], 2.0 * xi);
        assert!(m.row(0).iter().all(|&e| e == 0.0));
        let allowed = [0.0, 2.0 * xi, -2.0 * xi, -k / 2.0, -k];
        assert!(m.iter().all(|e| allowed.contains(e)));
    }

    #[test]
    fn free_generator_is_zero() {
        assert_eq!(
            *build_generator(params(0.0, 0.0)).unwrap().matrix(),
            Matrix16::zeros()
        );
    }

    #[test]
    fn generator_splits_into_hamiltonian_and_dissipator() {
        for &(xi, k) in &[(1.0, 3.0), (-0.7, 12.5), (2.25, 0.125)] {
            let full = *build_generator(params(xi, k)).unwrap().matrix();
            let ham = *build_generator(params(xi, 0.0)).unwrap().matrix();
            assert_eq!(full, ham + dissipator_matrix() * k);
        }
    }

    #[test]
    fn dissipator_fixed_point_and_decay() {
        let rho_s = CoherenceVector4::from_bloch(BlochVector::new(0.2, -0.5, 0.4));
        let ground = CoherenceVector16::product(rho_s, bath_ground_state());
        assert!(dissipator_action(&ground).0.amax() < 1e-16);

        let sx = CoherenceVector4::new(0.0, 1.0, 0.0, 0.0);
        let v = CoherenceVector16::product(rho_s, sx);
        assert!((dissipator_action(&v).0 + v.0 * 0.5).amax() < 1e-16);

        let excited = CoherenceVector16::product(rho_s, bath_excited_state());
        // |0⟩⟨0| − |1⟩⟨1| = −σ_z
        let target = CoherenceVector16::product(rho_s, CoherenceVector4::new(0.0, 0.0, 0.0, -1.0));
        assert!((dissipator_action(&excited).0 - target.0).amax() < 1e-16);
    }

    #[test]
    fn expm_identity_at_zero() {
        let gen = build_generator(params(1.0, 16.0)).unwrap();
        let v0 = CoherenceVector16::initial(BlochVector::new(0.1, 0.2, 0.3));
        assert_eq!(evolve_expm(&gen, &v0, 0.0).unwrap(), v0);
        assert!(matches!(
            evolve_expm(&gen, &v0, -1.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn expm_overdamped_point() {
        // Frozen from e^{-4}(16 sinh(√192/4)/√192 + cosh(√192/4)).
        let gen = build_generator(params(1.0, 16.0)).unwrap();
        let v = evolve_expm(
            &gen,
            &CoherenceVector16::initial(BlochVector::new(0.0, 0.0, 1.0)),
            1.0,
        )
        .unwrap();
        assert!((system_bloch(&v).z - 0.630_360_022_278_017_7).abs() < 1e-12);
        assert!((v.get(Pauli::I, Pauli::I) - 0.25).abs() < 1e-15);
        assert!(min_eigenvalue(&v) > -1e-10);
    }

    #[test]
    fn expm_no_cooling_is_cosine() {
        let gen = build_generator(params(1.0, 0.0)).unwrap();
        let v0 = CoherenceVector16::initial(BlochVector::new(0.0, 0.0, 1.0));
        for &t in &[0.3, 1.0, 4.7, 13.0] {
            let z = system_bloch(&evolve_expm(&gen, &v0, t).unwrap()).z;
            assert!((z - (2.0 * t).cos()).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn ode_critical_matches_closed_form() {
        let gen = build_generator(params(1.0, 8.0)).unwrap();
        let v0 = CoherenceVector16::initial(BlochVector::new(0.0, 0.0, 1.0));
        let grid = TimeGrid::new(0.0, 10.0, 201).unwrap();
        let traj = evolve_ode(&gen, &v0, &grid, OdeMethod::default()).unwrap();
        for (t, v) in grid.times().into_iter().zip(&traj) {
            let expected = (-2.0 * t).exp() * (1.0 + 2.0 * t);
            assert!((system_bloch(v).z - expected).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn ode_underdamped_both_schemes() {
        let gen = build_generator(params(1.0, 4.0)).unwrap();
        let v0 = CoherenceVector16::initial(BlochVector::new(0.0, 0.0, 1.0));
        let grid = TimeGrid::new(0.0, 10.0, 101).unwrap();
        let adaptive = evolve_ode(&gen, &v0, &grid, OdeMethod::default()).unwrap();
        let rk4 = evolve_ode(&gen, &v0, &grid, OdeMethod::Rk4 { step: None }).unwrap();
        for (k, t) in grid.times().into_iter().enumerate() {
            let expected = c_under(1.0, 4.0, t);
            assert!(
                (system_bloch(&adaptive[k]).z - expected).abs() < 1e-8,
                "adaptive t = {t}"
            );
            assert!(
                (system_bloch(&rk4[k]).z - expected).abs() < 1e-7,
                "rk4 t = {t}"
            );
        }
    }

    #[test]
    fn ode_zero_generator_is_constant() {
        let gen = build_generator(params(0.0, 0.0)).unwrap();
        let v0 = CoherenceVector16::initial(BlochVector::new(0.3, 0.3, 0.3));
        let grid = TimeGrid::new(0.0, 5.0, 11).unwrap();
        for method in [OdeMethod::default(), OdeMethod::Rk4 { step: None }] {
            for v in evolve_ode(&gen, &v0, &grid, method).unwrap() {
                assert_eq!(v, v0);
            }
        }
    }

    #[test]
    fn ode_underflow_is_numeric_failure() {
        let gen = build_generator(params(1.0, 4.0)).unwrap();
        let v0 = CoherenceVector16::initial(BlochVector::new(0.0, 0.0, 1.0));
        let grid = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let err = evolve_ode(&gen, &v0, &grid, OdeMethod::Adaptive { atol: 1e-300 }).unwrap_err();
        assert!(matches!(err, Error::NumericFailure { time, .. } if (0.0..1.0).contains(&time)));
    }

    #[test]
    fn bath_propagator_cases() {
        let sx = CoherenceVector4::new(0.0, 1.0, 0.0, 0.0);
        let out = bath_propagator(3.0, 0.7, sx).unwrap();
        assert!((out.x - (-1.05f64).exp()).abs() < 1e-15);
        assert_eq!((out.w, out.y, out.z), (0.0, 0.0, 0.0));

        assert_eq!(
            bath_propagator(5.0, 2.0, bath_ground_state()).unwrap(),
            bath_ground_state()
        );

        let (k, tau) = (2.0, 0.4);
        let out = bath_propagator(k, tau, bath_excited_state()).unwrap();
        let p = (-k * tau).exp();
        // Populations of |0⟩ (σz = −1) and |1⟩.
        assert!(((out.w - out.z) - (1.0 - p)).abs() < 1e-15);
        assert!(((out.w + out.z) - p).abs() < 1e-15);

        assert!(bath_propagator(-1.0, 1.0, sx).is_err());
        assert!(bath_propagator(1.0, -1.0, sx).is_err());
    }

    #[test]
    fn bath_generator_matches_closed_form_propagator() {
        let b = CoherenceVector4::new(0.5, 0.1, -0.2, 0.3);
        for &(k, tau) in &[(0.5, 3.0), (2.0, 1.0), (8.0, 0.25)] {
            let p = expm(&(bath_generator(k) * tau)) * nalgebra::Vector4::from(b.to_array());
            let q = bath_propagator(k, tau, b).unwrap().to_array();
            for i in 0..4 {
                assert!((p[i] - q[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(0.0, 0.0, 3).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 3).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        let g = TimeGrid::with_step(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.time(10), 1.0);
        let g = TimeGrid::with_step(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn bath_correlation_decays_at_half_kappa() {
        for kappa in [0.0f64, 0.5, 3.0] {
            for tau in [0.0, 0.4, 2.0, 9.0] {
                let exact = (-0.5 * kappa * tau).exp();
                assert!(
                    (bath_correlation_via_propagator(kappa, tau).unwrap() - exact).abs() < 1e-14
                );
                assert!(
                    (bath_correlation_via_generator(kappa, tau).unwrap() - exact).abs() < 1e-12
                );
            }
        }
        assert!(bath_correlation_via_generator(1.0, -1.0).is_err());
    }
}
