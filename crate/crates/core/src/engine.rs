//! Time evolution of register states under H(p) = p·K + M.
//!
//! The primary path evolves one momentum sector at a time: H(p) is a small
//! Hermitian matrix, diagonalized once and evaluated exactly at every
//! requested time. Momentum packets evolve as independent sectors because
//! every Hamiltonian term commutes with the momentum operator.
//!
//! The truncated Fock-space propagator keeps the phonon ladder explicit
//! instead (H = K ⊗ p̂ + M ⊗ 1 on 2^n · n_cut dimensions) and serves as an
//! independent cross-check of the sector decomposition.

use rayon::prelude::*;

use crate::dirac::MomentumGrid;
use crate::encoding::HamiltonianPair;
use crate::error::{Error, Result};
use crate::linalg::{c, cr, norm_sq, CMatrix, CVector, Propagator, C64};

const HERMITICITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-8;

/// Register state within one momentum sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub p: f64,
    pub amplitudes: CVector,
}

impl SectorState {
    pub fn new(p: f64, amplitudes: CVector) -> Result<Self> {
        let n = norm_sq(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq: n });
        }
        Ok(Self { p, amplitudes })
    }
}

/// Initial phonon state for the Fock-space engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhononInit {
    /// Motional ground state |0⟩.
    Vacuum,
    /// Coherent state displaced in momentum so that ⟨p̂⟩ equals the given
    /// mean momentum (α = i·Δ̃·p).
    CoherentMomentum(f64),
}

/// Truncated-Fock-space configuration: phonon cutoff (number states
/// 0..n_cut-1), ground-state width Δ̃ entering p̂ = i(a† - a)/(2Δ̃), the
/// initial phonon state, and whether to auto-extend the cutoff until
/// reported probabilities stop changing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    pub n_cut: usize,
    pub delta: f64,
    pub phonon: PhononInit,
    pub auto_extend: bool,
}

impl FockConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cut < 2 {
            return Err(Error::InvalidConfig(format!(
                "phonon cutoff must be at least 2, got {}",
                self.n_cut
            )));
        }
        if self.delta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "ground-state width must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// The matching Gaussian momentum-packet amplitude width 1/(√2·Δ̃): a
    /// coherent state's momentum distribution is a Gaussian of exactly this
    /// amplitude width.
    pub fn packet_sigma(&self) -> f64 {
        1.0 / (std::f64::consts::SQRT_2 * self.delta)
    }
}

/// Time series of states under a fixed Hamiltonian.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CVector>,
    pub norms: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest |‖ψ(t)‖² - 1| along the trajectory.
    pub fn max_norm_drift(&self) -> f64 {
        self.norms
            .iter()
            .map(|n| (n - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

fn evolve_with(prop: &Propagator, psi0: &CVector, times: &[f64]) -> Trajectory {
    let mut states = Vec::with_capacity(times.len());
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let psi = prop.apply(psi0, t);
        norms.push(norm_sq(&psi));
        states.push(psi);
    }
    Trajectory {
        times: times.to_vec(),
        states,
        norms,
    }
}

/// Evolve one momentum sector: ψ(t) = exp(-i 2π H(p) t) ψ0 via spectral
/// decomposition of H(p), diagonalized once for all times.
pub fn evolve_sector(
    pair: &HamiltonianPair,
    state: &SectorState,
    times: &[f64],
) -> Result<Trajectory> {
    if state.amplitudes.len() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            got: state.amplitudes.len(),
        });
    }
    let prop = Propagator::new(&pair.h_at(state.p), HERMITICITY_TOL)?;
    Ok(evolve_with(&prop, &state.amplitudes, times))
}

/// Phonon momentum operator p̂ = i(a† - a)/(2Δ̃) on the truncated ladder.
pub fn fock_momentum_operator(n_cut: usize, delta: f64) -> CMatrix {
    let mut p = CMatrix::zeros(n_cut, n_cut);
    let scale = 1.0 / (2.0 * delta);
    for n in 0..n_cut - 1 {
        let amp = ((n + 1) as f64).sqrt() * scale;
        // i·a†: row n+1, col n; -i·a: row n, col n+1
        p[(n + 1, n)] = c(0.0, amp);
        p[(n, n + 1)] = c(0.0, -amp);
    }
    p
}

/// Full qubit ⊗ phonon Hamiltonian H = K ⊗ p̂ + M ⊗ 1 on the truncated
/// Fock space. The qubit index is the slow (leftmost) tensor factor.
pub fn build_fock_h(pair: &HamiltonianPair, cfg: &FockConfig) -> Result<CMatrix> {
    cfg.validate()?;
    let p_op = fock_momentum_operator(cfg.n_cut, cfg.delta);
    let id_fock = CMatrix::identity(cfg.n_cut, cfg.n_cut);
    Ok(pair.kinetic.kronecker(&p_op) + pair.mass.kronecker(&id_fock))
}

/// Normalized truncated coherent state Σ_n e^{-|α|²/2} αⁿ/√n! |n⟩.
pub fn coherent_state(n_cut: usize, alpha: C64) -> CVector {
    let mut amps = Vec::with_capacity(n_cut);
    let mut a = cr((-0.5 * alpha.norm_sqr()).exp());
    for n in 0..n_cut {
        amps.push(a);
        a *= alpha / cr(((n + 1) as f64).sqrt());
    }
    let mut v = CVector::from_vec(amps);
    let n = norm_sq(&v).sqrt();
    v /= cr(n);
    v
}

/// Phonon state vector for the configured initial condition.
pub fn phonon_state(cfg: &FockConfig) -> CVector {
    match cfg.phonon {
        PhononInit::Vacuum => {
            let mut v = CVector::zeros(cfg.n_cut);
            v[0] = cr(1.0);
            v
        }
        PhononInit::CoherentMomentum(p0) => coherent_state(cfg.n_cut, c(0.0, cfg.delta * p0)),
    }
}

/// Product state (qubit amplitudes) ⊗ (configured phonon state).
pub fn fock_initial_state(qubit_amps: &CVector, cfg: &FockConfig) -> CVector {
    let phonon = phonon_state(cfg);
    let mut out = CVector::zeros(qubit_amps.len() * cfg.n_cut);
    for (q, qa) in qubit_amps.iter().enumerate() {
        for (n, pa) in phonon.iter().enumerate() {
            out[q * cfg.n_cut + n] = qa * pa;
        }
    }
    out
}

/// Spectral-decomposition evolution on the Fock-space Hamiltonian.
pub fn evolve_fock(h: &CMatrix, psi0: &CVector, times: &[f64]) -> Result<Trajectory> {
    if psi0.len() != h.nrows() {
        return Err(Error::DimensionMismatch {
            expected: h.nrows(),
            got: psi0.len(),
        });
    }
    let n = norm_sq(psi0);
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm_sq: n });
    }
    let prop = Propagator::new(h, HERMITICITY_TOL)?;
    Ok(evolve_with(&prop, psi0, times))
}

/// Per-sector trajectories of a momentum packet with their probability
/// weights.
#[derive(Debug, Clone)]
pub struct PacketTrajectory {
    pub weights: Vec<f64>,
    pub momenta: Vec<f64>,
    pub sectors: Vec<Trajectory>,
    pub times: Vec<f64>,
}

impl PacketTrajectory {
    /// Weighted sum of a per-sector scalar observable, reduced in grid
    /// order so the result does not depend on the degree of parallelism.
    pub fn combine<F>(&self, observable: F) -> Vec<f64>
    where
        F: Fn(f64, &CVector) -> f64,
    {
        let n_times = self.times.len();
        let mut out = vec![0.0; n_times];
        for (i, traj) in self.sectors.iter().enumerate() {
            let w = self.weights[i];
            let p = self.momenta[i];
            for (j, value) in out.iter_mut().enumerate() {
                *value += w * observable(p, &traj.states[j]);
            }
        }
        out
    }

    /// Weighted norm² per time.
    pub fn norms(&self) -> Vec<f64> {
        let n_times = self.times.len();
        let mut out = vec![0.0; n_times];
        for (i, traj) in self.sectors.iter().enumerate() {
            for (j, value) in out.iter_mut().enumerate() {
                *value += self.weights[i] * traj.norms[j];
            }
        }
        out
    }
}

/// Evolve every momentum sector of a packet independently. The closure
/// provides the (normalized) register state for each grid momentum.
/// Sectors are evaluated in parallel; results are assembled and reduced in
/// grid order, so outputs are bitwise independent of the thread count.
pub fn packet_evolve<F>(
    pair: &HamiltonianPair,
    grid: &MomentumGrid,
    initial: F,
    times: &[f64],
) -> Result<PacketTrajectory>
where
    F: Fn(f64) -> Result<CVector> + Sync,
{
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty momentum grid".into()));
    }
    let sectors: Vec<Result<Trajectory>> = grid
        .points()
        .par_iter()
        .map(|&p| {
            let amps = initial(p)?;
            let state = SectorState::new(p, amps)?;
            evolve_sector(pair, &state, times)
        })
        .collect();
    let sectors: Vec<Trajectory> = sectors.into_iter().collect::<Result<_>>()?;
    Ok(PacketTrajectory {
        weights: grid.weights(),
        momenta: grid.points().to_vec(),
        sectors,
        times: times.to_vec(),
    })
}
