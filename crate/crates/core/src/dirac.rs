//! Single-particle 1+1D Dirac physics at fixed momentum: the 2x2
//! Hamiltonian, its energy eigenspinors, and Gaussian momentum packets.

use crate::error::{Error, Result};
use crate::linalg::{cr, pauli_x, pauli_z, CMatrix, C64};

/// Two-component spinor in the {upper, lower} basis. The components mix
/// positive- and negative-energy content; they are not the energy basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor {
    pub upper: C64,
    pub lower: C64,
}

impl Spinor {
    pub fn new(upper: C64, lower: C64) -> Self {
        Self { upper, lower }
    }

    /// The symmetric spinor (1, 1)/√2, the ultrarelativistic limit of the
    /// positive-energy eigenspinor.
    pub fn symmetric() -> Self {
        let a = cr(std::f64::consts::FRAC_1_SQRT_2);
        Self::new(a, a)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        Ok(Self::new(self.upper / n, self.lower / n))
    }

    /// ⟨self | other⟩.
    pub fn dot(&self, other: &Spinor) -> C64 {
        self.upper.conj() * other.upper + self.lower.conj() * other.lower
    }
}

/// Effective Dirac parameters: speed `c` (kHz per momentum unit, positive)
/// and rest-mass energy `mc2` (kHz, any sign).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracParams {
    pub c: f64,
    pub mc2: f64,
}

impl DiracParams {
    pub fn new(c: f64, mc2: f64) -> Result<Self> {
        if c <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "effective speed must be positive, got {c}"
            )));
        }
        Ok(Self { c, mc2 })
    }
}

/// The 1+1D Dirac Hamiltonian c·p·σx + mc²·σz at momentum `p`, in the
/// {upper, lower} basis.
pub fn dirac_h(p: f64, params: &DiracParams) -> CMatrix {
    pauli_x() * cr(params.c * p) + pauli_z() * cr(params.mc2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyBranch {
    Positive,
    Negative,
}

/// Energy eigenpair of `dirac_h(p, params)`: E = ±√((cp)² + (mc²)²) with a
/// normalized eigenspinor.
///
/// Phase convention: the upper component is real and ≥ 0; when it vanishes
/// the lower component is real and positive. Fails for the massless
/// zero-momentum state, whose eigenbasis is not unique.
pub fn energy_spinor(p: f64, params: &DiracParams, branch: EnergyBranch) -> Result<(f64, Spinor)> {
    let cp = params.c * p;
    let m = params.mc2;
    let d = cp.hypot(m);
    if d == 0.0 {
        return Err(Error::DegenerateSpinor);
    }
    // Two algebraically equivalent eigenvector forms; pick the one whose
    // norm is bounded away from zero for the given sign of m.
    let (upper, lower) = match branch {
        EnergyBranch::Positive => {
            if m >= 0.0 {
                (d + m, cp)
            } else {
                (cp, d - m)
            }
        }
        EnergyBranch::Negative => {
            if m >= 0.0 {
                (-cp, d + m)
            } else {
                (d - m, -cp)
            }
        }
    };
    let norm = upper.hypot(lower);
    let mut u = upper / norm;
    let mut l = lower / norm;
    // real input, so the phase convention reduces to a sign choice
    if u < 0.0 || (u == 0.0 && l < 0.0) {
        u = -u;
        l = -l;
    }
    let energy = match branch {
        EnergyBranch::Positive => d,
        EnergyBranch::Negative => -d,
    };
    Ok((energy, Spinor::new(cr(u), cr(l))))
}

/// Discretized momentum wavepacket: grid points p_i with normalized complex
/// amplitudes, Σ_i |ψ(p_i)|² = 1.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    points: Vec<f64>,
    amplitudes: Vec<C64>,
    spacing: f64,
}

impl MomentumGrid {
    /// Wrap raw samples, renormalizing the discrete weights to one.
    pub fn new(points: Vec<f64>, amplitudes: Vec<C64>, spacing: f64) -> Result<Self> {
        if points.is_empty() || points.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: amplitudes.len(),
            });
        }
        let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if total <= 0.0 {
            return Err(Error::NotNormalized { norm_sq: total });
        }
        let scale = cr(1.0 / total.sqrt());
        Ok(Self {
            points,
            amplitudes: amplitudes.into_iter().map(|a| a * scale).collect(),
            spacing,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Per-point probability weights |ψ(p_i)|².
    pub fn weights(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Weighted mean momentum Σ p_i |ψ(p_i)|².
    pub fn mean_momentum(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.amplitudes)
            .map(|(p, a)| p * a.norm_sqr())
            .sum()
    }
}

/// Default number of grid points for `gaussian_packet`: odd, so the grid is
/// centered exactly on p0.
pub const DEFAULT_PACKET_POINTS: usize = 129;

/// Default packet half-width in units of sigma.
pub const DEFAULT_PACKET_HALF_WIDTH_SIGMAS: f64 = 5.0;

/// Discrete Gaussian momentum packet ψ(p) ∝ exp(-(p-p0)²/(2σ²)) on a
/// uniform grid of `n_points` over [p0 - half_width, p0 + half_width].
///
/// `sigma` is the amplitude width in momentum units, so the probability
/// density |ψ|² has standard deviation σ/√2. The grid must cover at least
/// ±4σ; resolution errors enter quadratically in the spacing.
pub fn gaussian_packet(
    p0: f64,
    sigma: f64,
    n_points: usize,
    half_width: f64,
) -> Result<MomentumGrid> {
    if sigma <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "packet width must be positive, got {sigma}"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidConfig(format!(
            "momentum grid needs at least 2 points, got {n_points}"
        )));
    }
    let min = 4.0 * sigma;
    if half_width < min {
        return Err(Error::GridTooNarrow { half_width, min });
    }
    let spacing = 2.0 * half_width / (n_points - 1) as f64;
    let mut points = Vec::with_capacity(n_points);
    let mut amplitudes = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let p = p0 - half_width + spacing * i as f64;
        points.push(p);
        let x = (p - p0) / sigma;
        amplitudes.push(cr((-0.5 * x * x).exp()));
    }
    MomentumGrid::new(points, amplitudes, spacing)
}
