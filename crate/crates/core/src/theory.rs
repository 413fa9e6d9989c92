//! Analytic flavor-oscillation model: mixing matrices, relativistic
//! dispersion, and exact / ultrarelativistic transition probabilities.
//!
//! Conventions used throughout the crate:
//! - energies and couplings are plain frequencies in kHz (an energy E means
//!   an angular frequency 2π·E),
//! - times are in milliseconds, so a stationary state accumulates the phase
//!   e^{-i 2π E t},
//! - a flavor state relates to the mass basis as |ν_α⟩ = Σ_k U*_{αk} |ν_k⟩.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cr, CMatrix, C64};

const UNITARITY_TOL: f64 = 1e-12;

/// Unitary flavor ↔ mass change of basis U_{αk} (α = flavor row, k = mass
/// column), dimension 2 or 3.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    entries: CMatrix,
}

impl MixingMatrix {
    /// Validate dimension and unitarity and wrap the matrix.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let dim = entries.nrows();
        if !(dim == 2 || dim == 3) || entries.ncols() != dim {
            return Err(Error::BadDimension { dim });
        }
        let gram = entries.adjoint() * &entries;
        let dev = (gram - CMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { entries })
    }

    /// The real orthogonal tribimaximal matrix with electron row
    /// (√(2/3), -1/√3, 0).
    ///
    /// Only the electron row is physically pinned here; the µ/τ rows are the
    /// conventional completion (second column sign chosen to match the
    /// electron row above). Any unitary completion gives the same electron
    /// survival probability; pass a custom matrix to `new` for a different
    /// convention.
    pub fn tribimaximal() -> Self {
        let s6 = 6.0_f64.sqrt();
        let s3 = 3.0_f64.sqrt();
        let s2 = 2.0_f64.sqrt();
        let rows = [
            [(2.0f64 / 3.0).sqrt(), -1.0 / s3, 0.0],
            [1.0 / s6, 1.0 / s3, 1.0 / s2],
            [1.0 / s6, 1.0 / s3, -1.0 / s2],
        ];
        let entries = CMatrix::from_fn(3, 3, |i, j| cr(rows[i][j]));
        Self::new(entries).expect("tribimaximal matrix is unitary")
    }

    /// 2x2 real rotation [[cosθ, sinθ], [-sinθ, cosθ]].
    pub fn rotation2(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let entries = CMatrix::from_row_slice(2, 2, &[cr(c), cr(s), cr(-s), cr(c)]);
        Self::new(entries).expect("rotation matrix is unitary")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, alpha: usize, k: usize) -> C64 {
        self.entries[(alpha, k)]
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.entries
    }

    /// Entrywise complex conjugate (also unitary).
    pub fn conjugated(&self) -> Self {
        Self {
            entries: self.entries.map(|z| z.conj()),
        }
    }

    fn check_flavor(&self, index: usize) -> Result<()> {
        if index >= self.dim() {
            return Err(Error::FlavorIndex {
                index,
                dim: self.dim(),
            });
        }
        Ok(())
    }
}

/// Rest-mass energies m_k c², in kHz. Entries may be negative (the drive
/// parameter maps can produce negative values; the dispersion only uses m²).
#[derive(Debug, Clone, PartialEq)]
pub struct MassSpectrum {
    masses: Vec<f64>,
}

impl MassSpectrum {
    pub fn new(masses: Vec<f64>) -> Self {
        Self { masses }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn get(&self, k: usize) -> f64 {
        self.masses[k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.masses
    }

    /// Squared-mass difference m_k² - m_j², in kHz².
    pub fn delta_m2(&self, k: usize, j: usize) -> f64 {
        self.masses[k] * self.masses[k] - self.masses[j] * self.masses[j]
    }

    /// Squared-mass differences relative to the first mass, `[0, Δm²_21, ...]`.
    pub fn delta_m2_from_first(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.delta_m2(k, 0)).collect()
    }
}

/// Kinetic scale c|p| of a momentum eigenstate, in kHz. May be negative for
/// left-movers; the dispersion only uses its square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub cp: f64,
}

impl Kinematics {
    pub fn new(cp: f64) -> Self {
        Self { cp }
    }

    /// Positive-branch energies for every mass in the spectrum.
    pub fn energies(&self, masses: &MassSpectrum) -> Vec<f64> {
        masses
            .as_slice()
            .iter()
            .map(|&m| dispersion(self.cp, m))
            .collect()
    }
}

/// Positive-branch relativistic dispersion √(cp² + (mc²)²), in kHz.
pub fn dispersion(cp: f64, mc2: f64) -> f64 {
    cp.hypot(mc2)
}

/// Flavor amplitudes A_β(t) = Σ_k U*_{αk} e^{-i 2π E_k t} U_{βk} for a state
/// created as flavor α, with E_k = dispersion(cp, m_k).
pub fn flavor_amplitudes(
    mixing: &MixingMatrix,
    masses: &MassSpectrum,
    cp: f64,
    alpha: usize,
    t: f64,
) -> Result<Vec<C64>> {
    if masses.len() != mixing.dim() {
        return Err(Error::DimensionMismatch {
            expected: mixing.dim(),
            got: masses.len(),
        });
    }
    let energies = Kinematics::new(cp).energies(masses);
    flavor_amplitudes_with_energies(mixing, &energies, alpha, t)
}

/// Same as `flavor_amplitudes` but with caller-supplied mass-state energies,
/// useful for testing phase-convention invariances.
pub fn flavor_amplitudes_with_energies(
    mixing: &MixingMatrix,
    energies: &[f64],
    alpha: usize,
    t: f64,
) -> Result<Vec<C64>> {
    mixing.check_flavor(alpha)?;
    if energies.len() != mixing.dim() {
        return Err(Error::DimensionMismatch {
            expected: mixing.dim(),
            got: energies.len(),
        });
    }
    let dim = mixing.dim();
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    for (k, energy) in energies.iter().enumerate() {
        let phase = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * energy * t);
        let source = mixing.entry(alpha, k).conj() * phase;
        for (beta, amp) in amps.iter_mut().enumerate() {
            *amp += source * mixing.entry(beta, k);
        }
    }
    Ok(amps)
}

/// Exact transition probability P(α → β; t) = |A_β(t)|² with relativistic
/// energies.
pub fn probability_exact(
    mixing: &MixingMatrix,
    masses: &MassSpectrum,
    cp: f64,
    alpha: usize,
    beta: usize,
    t: f64,
) -> Result<f64> {
    mixing.check_flavor(beta)?;
    let amps = flavor_amplitudes(mixing, masses, cp, alpha, t)?;
    Ok(amps[beta].norm_sqr())
}

/// Ultrarelativistic transition probability
/// Σ_{k,j} U*_{αk} U_{βk} U_{αj} U*_{βj} e^{-i 2π (Δm²_{kj} / 2E) L}.
///
/// `delta_m2` holds squared masses relative to the first mass state,
/// `[0, m_2²-m_1², ...]` in kHz² (see `MassSpectrum::delta_m2_from_first`);
/// `energy` is E = c|p| in kHz and `l_over_c` is the travel time L/c in ms.
pub fn probability_ultra(
    mixing: &MixingMatrix,
    delta_m2: &[f64],
    energy: f64,
    alpha: usize,
    beta: usize,
    l_over_c: f64,
) -> Result<f64> {
    mixing.check_flavor(alpha)?;
    mixing.check_flavor(beta)?;
    if delta_m2.len() != mixing.dim() {
        return Err(Error::DimensionMismatch {
            expected: mixing.dim(),
            got: delta_m2.len(),
        });
    }
    if energy <= 0.0 {
        return Err(Error::NonPositiveEnergy);
    }
    // Σ_k U*_{αk} U_{βk} e^{-i 2π (Δm²_k1 / 2E) L} up to a global phase that
    // cancels in the modulus, since Δm²_{kj} = Δm²_k1 - Δm²_j1.
    let mut amp = Complex64::new(0.0, 0.0);
    for (k, dm2) in delta_m2.iter().enumerate() {
        let freq = dm2 / (2.0 * energy);
        let phase = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * freq * l_over_c);
        amp += mixing.entry(alpha, k).conj() * mixing.entry(beta, k) * phase;
    }
    Ok(amp.norm_sqr())
}
