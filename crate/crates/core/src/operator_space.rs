//! Pauli-basis algebra for one and two qubits.
//!
//! Operators are stored as dense complex matrices (2×2 or 4×4) and converted
//! to and from their real Pauli coefficient vectors. Superoperators of the
//! form `ρ ↦ σ_a ρ σ_b` are represented as 4×4 matrices acting on
//! [`CoherenceVector4`], built by applying the map to each basis element.

use nalgebra::{Matrix2, Matrix4, SVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Largest imaginary Pauli coefficient tolerated by [`vectorize2q`].
pub const HERMITICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Pauli> {
        Pauli::ALL.get(i).copied()
    }

    pub fn matrix(self) -> Mat2 {
        pauli_matrix(self)
    }
}

/// The standard Pauli matrix; `σ₀` is the identity.
pub fn pauli_matrix(label: Pauli) -> Mat2 {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match label {
        Pauli::I => Matrix2::new(l, o, o, l),
        Pauli::X => Matrix2::new(o, l, l, o),
        Pauli::Y => Matrix2::new(o, -i, i, o),
        Pauli::Z => Matrix2::new(l, o, o, -l),
    }
}

/// `a ⊗ b` with `a` acting on the first (system) factor.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `σ_i ⊗ σ_j`.
pub fn pauli_product(i: Pauli, j: Pauli) -> Mat4 {
    kron(&pauli_matrix(i), &pauli_matrix(j))
}

/// Bloch vector `(x, y, z)` of a single qubit, `ρ = (I + x σ_x + y σ_y + z σ_z)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn density_matrix(&self) -> Mat2 {
        devectorize1q(&CoherenceVector4::from_bloch(*self))
    }
}

/// Raw Pauli coefficients of a single-qubit operator:
/// `ρ = w I + x σ_x + y σ_y + z σ_z`. States have `w = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoherenceVector4 {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CoherenceVector4 {
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        CoherenceVector4 { w, x, y, z }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        CoherenceVector4::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn from_bloch(b: BlochVector) -> Self {
        CoherenceVector4::new(0.5, 0.5 * b.x, 0.5 * b.y, 0.5 * b.z)
    }

    /// Bloch components `2·(x, y, z)`; meaningful for states (`w = 1/2`).
    pub fn to_bloch(self) -> BlochVector {
        BlochVector::new(2.0 * self.x, 2.0 * self.y, 2.0 * self.z)
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.w
    }
}

/// Real Pauli coefficients `v_ij` of a two-qubit operator,
/// `ρ_SB = Σ v_ij σ_i ⊗ σ_j`, stored at index `4·i + j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceVector16(pub SVector<f64, 16>);

impl CoherenceVector16 {
    pub fn zeros() -> Self {
        CoherenceVector16(SVector::zeros())
    }

    pub fn from_array(a: [f64; 16]) -> Self {
        CoherenceVector16(SVector::from(a))
    }

    pub fn get(&self, i: Pauli, j: Pauli) -> f64 {
        self.0[4 * i.index() + j.index()]
    }

    pub fn set(&mut self, i: Pauli, j: Pauli, value: f64) {
        self.0[4 * i.index() + j.index()] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `ρ_S ⊗ ρ_B` for two single-qubit coefficient vectors.
    pub fn product(system: CoherenceVector4, bath: CoherenceVector4) -> Self {
        let s = system.to_array();
        let b = bath.to_array();
        let mut v = SVector::zeros();
        for i in 0..4 {
            for j in 0..4 {
                v[4 * i + j] = s[i] * b[j];
            }
        }
        CoherenceVector16(v)
    }

    /// The initial joint state with the bath in `|0ᴮ⟩`.
    pub fn initial(system: BlochVector) -> Self {
        Self::product(CoherenceVector4::from_bloch(system), bath_ground_state())
    }

    pub fn max_abs_diff(&self, other: &CoherenceVector16) -> f64 {
        (self.0 - other.0).amax()
    }
}

/// Coefficients of `|0ᴮ⟩⟨0ᴮ| = (I − σ_z)/2`.
pub fn bath_ground_state() -> CoherenceVector4 {
    CoherenceVector4::new(0.5, 0.0, 0.0, -0.5)
}

/// Coefficients of `|1ᴮ⟩⟨1ᴮ| = (I + σ_z)/2`.
pub fn bath_excited_state() -> CoherenceVector4 {
    CoherenceVector4::new(0.5, 0.0, 0.0, 0.5)
}

/// Complex Pauli coefficients `Tr(σ_i m)/2` of an arbitrary 2×2 operator.
pub fn decompose1q(m: &Mat2) -> [C64; 4] {
    Pauli::ALL.map(|p| (pauli_matrix(p) * m).trace() * 0.5)
}

/// Complex Pauli coefficients `Tr((σ_i⊗σ_j) m)/4` of an arbitrary 4×4 operator.
pub fn decompose2q(m: &Mat4) -> [C64; 16] {
    let mut out = [C64::new(0.0, 0.0); 16];
    for i in Pauli::ALL {
        for j in Pauli::ALL {
            out[4 * i.index() + j.index()] = (pauli_product(i, j) * m).trace() * 0.25;
        }
    }
    out
}

pub fn compose1q(coeffs: &[C64; 4]) -> Mat2 {
    Pauli::ALL.iter().fold(Mat2::zeros(), |acc, &p| {
        acc + pauli_matrix(p) * coeffs[p.index()]
    })
}

pub fn vectorize1q(rho: &Mat2) -> Result<CoherenceVector4> {
    let c = decompose1q(rho);
    check_real(&c)?;
    Ok(CoherenceVector4::new(c[0].re, c[1].re, c[2].re, c[3].re))
}

pub fn devectorize1q(v: &CoherenceVector4) -> Mat2 {
    let a = v.to_array().map(|x| C64::new(x, 0.0));
    compose1q(&a)
}

/// `v_ij = Tr(ρ σ_i⊗σ_j)/4`. Rejects operators whose coefficients carry an
/// imaginary part above [`HERMITICITY_TOL`].
pub fn vectorize2q(rho: &Mat4) -> Result<CoherenceVector16> {
    let c = decompose2q(rho);
    check_real(&c)?;
    Ok(CoherenceVector16(SVector::from_fn(|k, _| c[k].re)))
}

pub fn devectorize2q(v: &CoherenceVector16) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in Pauli::ALL {
        for j in Pauli::ALL {
            let c = v.get(i, j);
            if c != 0.0 {
                m += pauli_product(i, j) * C64::new(c, 0.0);
            }
        }
    }
    m
}

fn check_real(c: &[C64]) -> Result<()> {
    if let Some(bad) = c.iter().find(|z| !z.im.is_finite()) {
        return Err(Error::HermiticityViolation {
            max_imag: bad.im,
            tol: HERMITICITY_TOL,
        });
    }
    let max_imag = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_imag > HERMITICITY_TOL {
        return Err(Error::HermiticityViolation {
            max_imag,
            tol: HERMITICITY_TOL,
        });
    }
    Ok(())
}

/// Matrix `s_ab` of the superoperator `ρ ↦ σ_a ρ σ_b` on the coefficient
/// basis `{I, σ_x, σ_y, σ_z}`: column `c` holds the coefficients of
/// `σ_a σ_c σ_b`.
pub fn sandwich_superop_rep(a: Pauli, b: Pauli) -> Matrix4<C64> {
    let left = pauli_matrix(a);
    let right = pauli_matrix(b);
    let mut s = Matrix4::zeros();
    for col in Pauli::ALL {
        let image = left * pauli_matrix(col) * right;
        let coeffs = decompose1q(&image);
        for row in 0..4 {
            s[(row, col.index())] = coeffs[row];
        }
    }
    s
}

/// Reduced system coefficients: `Tr_B(σ_i⊗σ_j) = 2 σ_i δ_j0`.
pub fn partial_trace_bath(v: &CoherenceVector16) -> CoherenceVector4 {
    CoherenceVector4::from_array(Pauli::ALL.map(|i| 2.0 * v.get(i, Pauli::I)))
}

pub fn partial_trace_system(v: &CoherenceVector16) -> CoherenceVector4 {
    CoherenceVector4::from_array(Pauli::ALL.map(|j| 2.0 * v.get(Pauli::I, j)))
}

/// Ascending eigenvalues of a Hermitian 4×4 matrix (the anti-Hermitian part
/// is discarded).
pub fn hermitian_eigenvalues4(m: &Mat4) -> [f64; 4] {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let ev = h.symmetric_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(f64::total_cmp);
    out
}

/// Ascending eigenvalues of a Hermitian 2×2 matrix.
pub fn hermitian_eigenvalues2(m: &Mat2) -> [f64; 2] {
    let c = decompose1q(m);
    let w = c[0].re;
    let r = (c[1].re.powi(2) + c[2].re.powi(2) + c[3].re.powi(2)).sqrt();
    [w - r, w + r]
}

pub fn min_eigenvalue(v: &CoherenceVector16) -> f64 {
    hermitian_eigenvalues4(&devectorize2q(v))[0]
}
