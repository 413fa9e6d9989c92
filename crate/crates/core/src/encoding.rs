//! Multi-qubit ion Hamiltonians whose mass blocks realize 1+1D Dirac
//! dynamics, the basis encodings that define those blocks, and the
//! invertible map between drive strengths and effective rest masses.
//!
//! Two three-generation constructions are provided, plus a two-generation
//! one:
//! - scheme A: σz-type spin-spin couplings in the {|g⟩, |e⟩} basis, kinetic
//!   term c·σx on the middle ion;
//! - scheme B: σx-type couplings written directly in the x eigenbasis
//!   {|0⟩, |1⟩} (where they are diagonal), kinetic term c·σy on the first
//!   ion, and an overall -J₁ identity offset inside every block;
//! - two generations: one spin-spin coupling and one single-qubit term on
//!   two qubits.
//!
//! Basis-index convention: qubit 1 is the leftmost tensor factor (most
//! significant bit) and the states {|g⟩, |e⟩} / {|0⟩, |1⟩} map to bits
//! {0, 1}. Operator conventions (fixed so the drive-to-mass formulas come
//! out with the signs used throughout): σz|e⟩ = +|e⟩, σz|g⟩ = -|g⟩ for the
//! z-basis schemes, and σx|1⟩ = +|1⟩, σx|0⟩ = -|0⟩ for scheme B.

use crate::error::{Error, Result};
use crate::linalg::{c, cr, id2, kron_all, pauli_x, CMatrix, C64};
use crate::theory::MassSpectrum;

/// σz with |e⟩ (bit 1) as the +1 eigenstate, in the {|g⟩, |e⟩} ordering.
fn sz_ion() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(-1.0), cr(0.0), cr(0.0), cr(1.0)])
}

/// σx of scheme B, diagonal in its own eigenbasis ordering {|0⟩, |1⟩}.
fn sx_diag() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(-1.0), cr(0.0), cr(0.0), cr(1.0)])
}

/// σy-type kinetic operator in the {|0⟩, |1⟩} ordering; equals the σx form
/// conjugated by diag(1, i).
fn sy_kinetic() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)])
}

/// Map from mass index to the computational basis indices carrying the
/// upper and lower spinor components, plus the unassigned leftovers.
#[derive(Debug, Clone, PartialEq)]
pub struct NeutrinoEncoding {
    n_qubits: usize,
    pairs: Vec<(usize, usize)>,
    leftover: Vec<usize>,
    lower_phase: C64,
}

impl NeutrinoEncoding {
    fn new(
        n_qubits: usize,
        pairs: Vec<(usize, usize)>,
        leftover: Vec<usize>,
        lower_phase: C64,
    ) -> Self {
        let dim = 1 << n_qubits;
        let mut seen = vec![false; dim];
        for &(u, l) in &pairs {
            assert!(
                !seen[u] && !seen[l] && u != l,
                "encoding indices must be distinct"
            );
            seen[u] = true;
            seen[l] = true;
        }
        for &x in &leftover {
            assert!(!seen[x], "leftover overlaps encoded indices");
            seen[x] = true;
        }
        assert!(seen.iter().all(|&s| s), "encoding must cover the register");
        Self {
            n_qubits,
            pairs,
            leftover,
            lower_phase,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Dimension of the qubit register, 2^n.
    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Number of encoded mass states.
    pub fn generations(&self) -> usize {
        self.pairs.len()
    }

    /// Basis indices (upper, lower) of mass state k.
    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    pub fn upper(&self, k: usize) -> usize {
        self.pairs[k].0
    }

    pub fn lower(&self, k: usize) -> usize {
        self.pairs[k].1
    }

    pub fn leftover(&self) -> &[usize] {
        &self.leftover
    }

    /// Phase attached to the lower spinor component when embedding a
    /// canonical {upper, lower} spinor into this encoding's blocks. It is 1
    /// for the σx-kinetic schemes and i for the σy-kinetic scheme, which is
    /// the σx form conjugated by diag(1, i); using it keeps identically
    /// prepared states physically identical across schemes.
    pub fn lower_phase(&self) -> C64 {
        self.lower_phase
    }
}

/// Scheme A drive strengths, kHz: detuning term Ω plus the two spin-spin
/// couplings Ω₁ (ions 1,2) and Ω₂ (ions 2,3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeAParams {
    pub c: f64,
    pub omega: f64,
    pub omega1: f64,
    pub omega2: f64,
}

/// Scheme B coupling strengths, kHz: single-qubit term J and the
/// simultaneous spin-spin couplings J₁ (nearest pairs) and J₂ (outer pair).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeBParams {
    pub c: f64,
    pub j: f64,
    pub j1: f64,
    pub j2: f64,
}

/// Two-generation drive strengths, kHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoGenParams {
    pub c: f64,
    pub omega: f64,
    pub omega1: f64,
}

/// Kinetic and mass operators of an engineered register Hamiltonian
/// H(p) = p·K + M. Within every encoded block, M acts as
/// m_k·σz + constant_shift·I in that block's {upper, lower} coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianPair {
    pub kinetic: CMatrix,
    pub mass: CMatrix,
    pub constant_shift: f64,
}

impl HamiltonianPair {
    pub fn dim(&self) -> usize {
        self.kinetic.nrows()
    }

    /// Full register Hamiltonian at momentum p.
    pub fn h_at(&self, p: f64) -> CMatrix {
        &self.kinetic * cr(p) + &self.mass
    }

    /// H(p) restricted to the 2-dim block of mass state k, in that block's
    /// {upper, lower} coordinates.
    pub fn block_h(&self, encoding: &NeutrinoEncoding, k: usize, p: f64) -> CMatrix {
        let (u, l) = encoding.pair(k);
        let h = self.h_at(p);
        CMatrix::from_row_slice(2, 2, &[h[(u, u)], h[(u, l)], h[(l, u)], h[(l, l)]])
    }
}

fn check_speed(c: f64) -> Result<()> {
    if c <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "effective speed must be positive, got {c}"
        )));
    }
    Ok(())
}

/// Scheme A register Hamiltonian:
/// K = c·(1 ⊗ σx ⊗ 1),
/// M = -Ω·(1 ⊗ σz ⊗ 1) + Ω₁·(σz ⊗ σz ⊗ 1) + Ω₂·(1 ⊗ σz ⊗ σz).
///
/// Block masses: m₁ = Ω + Ω₁ + Ω₂, m₂ = Ω + Ω₁ - Ω₂, m₃ = Ω - Ω₁ + Ω₂.
pub fn build_scheme_a(params: &SchemeAParams) -> Result<(HamiltonianPair, NeutrinoEncoding)> {
    check_speed(params.c)?;
    let (i2, sx, sz) = (id2(), pauli_x(), sz_ion());
    let kinetic = kron_all(&[&i2, &sx, &i2]) * cr(params.c);
    let mass = kron_all(&[&i2, &sz, &i2]) * cr(-params.omega)
        + kron_all(&[&sz, &sz, &i2]) * cr(params.omega1)
        + kron_all(&[&i2, &sz, &sz]) * cr(params.omega2);
    // ν₁ = (|ggg⟩, |geg⟩), ν₂ = (|gge⟩, |gee⟩), ν₃ = (|egg⟩, |eeg⟩);
    // the middle qubit carries the spinor.
    let encoding = NeutrinoEncoding::new(
        3,
        vec![(0b000, 0b010), (0b001, 0b011), (0b100, 0b110)],
        vec![0b101, 0b111],
        cr(1.0),
    );
    Ok((
        HamiltonianPair {
            kinetic,
            mass,
            constant_shift: 0.0,
        },
        encoding,
    ))
}

/// Scheme B register Hamiltonian, written in the x eigenbasis where the
/// spin-spin couplings are diagonal:
/// K = c·(σy ⊗ 1 ⊗ 1),
/// M = J₁·(σx ⊗ σx ⊗ 1 + 1 ⊗ σx ⊗ σx) + J₂·(σx ⊗ 1 ⊗ σx)
///   + J₁·(1 ⊗ σx ⊗ 1) + J₁·(1 ⊗ 1 ⊗ σx) - J·(σx ⊗ 1 ⊗ 1).
///
/// Every block carries an identity offset of -J₁ on top of m_k·σz, recorded
/// as `constant_shift`. Block masses: m₁ = J + J₁ + J₂, m₂ = J + J₁ - J₂,
/// m₃ = J - J₁ + J₂.
pub fn build_scheme_b(params: &SchemeBParams) -> Result<(HamiltonianPair, NeutrinoEncoding)> {
    check_speed(params.c)?;
    let (i2, sx, sy) = (id2(), sx_diag(), sy_kinetic());
    let kinetic = kron_all(&[&sy, &i2, &i2]) * cr(params.c);
    let mass = (kron_all(&[&sx, &sx, &i2]) + kron_all(&[&i2, &sx, &sx])) * cr(params.j1)
        + kron_all(&[&sx, &i2, &sx]) * cr(params.j2)
        + kron_all(&[&i2, &sx, &i2]) * cr(params.j1)
        + kron_all(&[&i2, &i2, &sx]) * cr(params.j1)
        + kron_all(&[&sx, &i2, &i2]) * cr(-params.j);
    // ν₁ = (|000⟩, |100⟩), ν₂ = (|001⟩, |101⟩), ν₃ = (|010⟩, |110⟩);
    // the first qubit carries the spinor.
    let encoding = NeutrinoEncoding::new(
        3,
        vec![(0b000, 0b100), (0b001, 0b101), (0b010, 0b110)],
        vec![0b011, 0b111],
        c(0.0, 1.0),
    );
    Ok((
        HamiltonianPair {
            kinetic,
            mass,
            constant_shift: -params.j1,
        },
        encoding,
    ))
}

/// Two-generation register Hamiltonian on two qubits:
/// K = c·(σx ⊗ 1), M = -Ω·(σz ⊗ 1) + Ω₁·(σz ⊗ σz).
///
/// Block masses: m₁ = Ω + Ω₁, m₂ = Ω - Ω₁; no leftover states.
pub fn build_two_generation(
    c: f64,
    omega: f64,
    omega1: f64,
) -> Result<(HamiltonianPair, NeutrinoEncoding)> {
    check_speed(c)?;
    let (i2, sx, sz) = (id2(), pauli_x(), sz_ion());
    let kinetic = kron_all(&[&sx, &i2]) * cr(c);
    let mass = kron_all(&[&sz, &i2]) * cr(-omega) + kron_all(&[&sz, &sz]) * cr(omega1);
    // ν₁ = (|gg⟩, |eg⟩), ν₂ = (|ge⟩, |ee⟩); the first qubit is the spinor.
    let encoding = NeutrinoEncoding::new(2, vec![(0b00, 0b10), (0b01, 0b11)], vec![], cr(1.0));
    Ok((
        HamiltonianPair {
            kinetic,
            mass,
            constant_shift: 0.0,
        },
        encoding,
    ))
}

const BLOCK_TOL: f64 = 1e-10;

/// Extract the effective rest masses from the mass operator: within each
/// encoded block, M = m_k·σz + constant_shift·I, so
/// m_k = (M_uu - M_ll)/2 with the sign fixed by the upper component.
///
/// Fails with an encoding mismatch if M couples a block to anything outside
/// it, has off-diagonal terms inside a block, or disagrees with the
/// recorded constant shift.
pub fn mass_spectrum_of(
    pair: &HamiltonianPair,
    encoding: &NeutrinoEncoding,
) -> Result<MassSpectrum> {
    let m = &pair.mass;
    if m.nrows() != encoding.dim() {
        return Err(Error::DimensionMismatch {
            expected: encoding.dim(),
            got: m.nrows(),
        });
    }
    let mut masses = Vec::with_capacity(encoding.generations());
    for k in 0..encoding.generations() {
        let (u, l) = encoding.pair(k);
        for col in 0..m.ncols() {
            let in_block = col == u || col == l;
            if !in_block && (m[(u, col)].norm() > BLOCK_TOL || m[(l, col)].norm() > BLOCK_TOL) {
                return Err(Error::EncodingMismatch);
            }
        }
        if m[(u, l)].norm() > BLOCK_TOL || m[(l, u)].norm() > BLOCK_TOL {
            return Err(Error::EncodingMismatch);
        }
        let shift = 0.5 * (m[(u, u)] + m[(l, l)]).re;
        if (shift - pair.constant_shift).abs() > BLOCK_TOL {
            return Err(Error::EncodingMismatch);
        }
        masses.push(0.5 * (m[(u, u)] - m[(l, l)]).re);
    }
    Ok(MassSpectrum::new(masses))
}

/// Which three-generation construction to target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    A,
    B,
}

/// Resolved drive strengths for either scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchemeParams {
    A(SchemeAParams),
    B(SchemeBParams),
}

impl SchemeParams {
    pub fn build(&self) -> Result<(HamiltonianPair, NeutrinoEncoding)> {
        match self {
            SchemeParams::A(p) => build_scheme_a(p),
            SchemeParams::B(p) => build_scheme_b(p),
        }
    }
}

/// Invert the three linear mass formulas: given target rest masses
/// (m₁, m₂, m₃), return the drive strengths that realize them. The system
/// is linear and square, so it is always solvable:
/// (Ω or J) = (m₂+m₃)/2, (Ω₁ or J₁) = (m₁-m₃)/2, (Ω₂ or J₂) = (m₁-m₂)/2.
pub fn params_for_masses(scheme: Scheme, target: &MassSpectrum, c: f64) -> Result<SchemeParams> {
    if target.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: target.len(),
        });
    }
    let (m1, m2, m3) = (target.get(0), target.get(1), target.get(2));
    let base = 0.5 * (m2 + m3);
    let first = 0.5 * (m1 - m3);
    let second = 0.5 * (m1 - m2);
    Ok(match scheme {
        Scheme::A => SchemeParams::A(SchemeAParams {
            c,
            omega: base,
            omega1: first,
            omega2: second,
        }),
        Scheme::B => SchemeParams::B(SchemeBParams {
            c,
            j: base,
            j1: first,
            j2: second,
        }),
    })
}

/// Two-generation analogue of `params_for_masses`:
/// Ω = (m₁+m₂)/2, Ω₁ = (m₁-m₂)/2.
pub fn two_generation_params_for_masses(target: &MassSpectrum, c: f64) -> Result<TwoGenParams> {
    if target.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: target.len(),
        });
    }
    Ok(TwoGenParams {
        c,
        omega: 0.5 * (target.get(0) + target.get(1)),
        omega1: 0.5 * (target.get(0) - target.get(1)),
    })
}

/// Eigenvalues of H(p) restricted to block k; for an intact encoding these
/// are constant_shift ± dispersion(c·p, m_k).
pub fn block_eigenvalues(
    pair: &HamiltonianPair,
    encoding: &NeutrinoEncoding,
    k: usize,
    p: f64,
) -> (f64, f64) {
    let block = pair.block_h(encoding, k, p);
    let eig = block.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (vals[0], vals[1])
}
