//! Dense complex linear algebra shared across the crate: Pauli matrices,
//! tensor products, and a spectral propagator for Hermitian generators.
//!
//! All Hilbert spaces here are small (qubit registers up to 3 qubits, or a
//! qubit register tensored with a truncated phonon ladder), so everything is
//! dense `DMatrix<Complex64>` and exact diagonalization is the workhorse.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// 2x2 identity.
pub fn id2() -> CMatrix {
    CMatrix::identity(2, 2)
}

/// Pauli x in a given two-level ordering: swaps the two basis states.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)])
}

/// Pauli y: off-diagonal with ∓i, +1 eigenvector (1, i)/√2.
pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

/// Pauli z: +1 on the first basis state, -1 on the second.
pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)])
}

/// Kronecker product of a list of factors, first factor slowest (leftmost).
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Max entrywise |H - H†|.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max entrywise |a - b|.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Squared two-norm of a state vector.
pub fn norm_sq(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Spectral decomposition of a Hermitian matrix, reused to evaluate
/// exp(-i 2π H t) ψ exactly at arbitrary times.
///
/// Energies are plain frequencies (kHz) and times are milliseconds, so the
/// accumulated phase of an eigenstate is e^{-i 2π E t}.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
}

impl Propagator {
    /// Diagonalize `h`. Fails if `h` is not Hermitian to `tol`.
    pub fn new(h: &CMatrix, tol: f64) -> Result<Self> {
        let dev = hermiticity_deviation(h);
        if dev > tol {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let n = h.nrows();
        let mut a = faer::Mat::<C64>::zeros(n, n);
        for j in 0..n {
            for i in 0..n {
                a[(i, j)] = h[(i, j)];
            }
        }
        let eig = a
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|_| Error::NotHermitian { deviation: dev })?;
        let eigenvalues = DVector::from_fn(n, |i, _| eig.S()[i].re);
        let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.U()[(i, j)]);
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// exp(-i 2π H t) ψ via the stored eigenbasis.
    pub fn apply(&self, psi: &CVector, t: f64) -> CVector {
        let mut coeffs = self.eigenvectors.adjoint() * psi;
        for (k, a) in coeffs.iter_mut().enumerate() {
            let phase = -2.0 * std::f64::consts::PI * self.eigenvalues[k] * t;
            *a *= C64::from_polar(1.0, phase);
        }
        &self.eigenvectors * coeffs
    }
}
