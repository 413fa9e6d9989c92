//! Shared helpers for the integration suites: an independent adaptive RK4
//! integrator used as an evolution oracle, random draws, and small signal
//! analysis utilities.

#![allow(dead_code)]

use ionosc::linalg::{cr, CMatrix, CVector, C64};
use ionosc::theory::MixingMatrix;
use rand::Rng;

/// One classic RK4 step of dψ/dt = -i 2π H ψ.
fn rk4_step(h: &CMatrix, y: &CVector, dt: f64) -> CVector {
    let f = |v: &CVector| -> CVector { (h * v) * C64::new(0.0, -2.0 * std::f64::consts::PI) };
    let k1 = f(y);
    let k2 = f(&(y + &k1 * cr(dt / 2.0)));
    let k3 = f(&(y + &k2 * cr(dt / 2.0)));
    let k4 = f(&(y + &k3 * cr(dt)));
    y + (k1 + k2 * cr(2.0) + k3 * cr(2.0) + k4) * cr(dt / 6.0)
}

/// Adaptive step-doubling RK4 from t = 0 to `t_end`, with the accumulated
/// error budgeted to roughly `tol` over the whole interval. Completely
/// independent of the spectral propagator under test.
pub fn rk4_evolve(h: &CMatrix, psi0: &CVector, t_end: f64, tol: f64) -> CVector {
    if t_end == 0.0 {
        return psi0.clone();
    }
    // initial step from the operator scale
    let hnorm: f64 = (0..h.nrows())
        .map(|i| (0..h.ncols()).map(|j| h[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let mut dt = 0.02 / hnorm;
    let mut t = 0.0;
    let mut y = psi0.clone();
    while t < t_end {
        dt = dt.min(t_end - t);
        let full = rk4_step(h, &y, dt);
        let mid = rk4_step(h, &y, dt / 2.0);
        let half = rk4_step(h, &mid, dt / 2.0);
        let err = (&full - &half).norm() / 15.0;
        let budget = tol * dt / t_end;
        if err <= budget {
            t += dt;
            y = half;
            if err < 0.1 * budget {
                dt *= 1.6;
            }
        } else {
            dt *= 0.5 * (budget / err).powf(0.2).max(0.2);
        }
    }
    y
}

/// Evolve through an ascending time grid, reusing the integrator state.
pub fn rk4_evolve_times(h: &CMatrix, psi0: &CVector, times: &[f64], tol: f64) -> Vec<CVector> {
    let mut out = Vec::with_capacity(times.len());
    let mut y = psi0.clone();
    let mut t = 0.0;
    for &target in times {
        assert!(target >= t, "time grid must be ascending");
        y = rk4_evolve(h, &y, target - t, tol);
        t = target;
        out.push(y.clone());
    }
    out
}

/// Haar-ish random unitary via QR of a complex Gaussian-ish matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> MixingMatrix {
    let raw = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    MixingMatrix::new(raw.qr().q()).expect("QR factor is unitary")
}

/// Random normalized two-component spinor.
pub fn random_spinor(rng: &mut impl Rng) -> ionosc::dirac::Spinor {
    loop {
        let s = ionosc::dirac::Spinor::new(
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        if s.norm_sqr() > 1e-3 {
            return s.normalized().unwrap();
        }
    }
}

/// Hann-windowed power spectrum of a mean-subtracted real series; returns
/// per-bin normalized magnitudes for bins 0..n/2.
pub fn hann_spectrum(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mean: f64 = values.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<rustfft::num_complex::Complex64> = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos();
            rustfft::num_complex::Complex64::new((v - mean) * w, 0.0)
        })
        .collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    buf[..n / 2].iter().map(|z| z.norm() / n as f64).collect()
}

/// Bin indices that are local maxima above `threshold` times the largest
/// non-DC magnitude.
pub fn spectral_peaks(spectrum: &[f64], threshold: f64) -> Vec<usize> {
    let max = spectrum[1..].iter().cloned().fold(0.0, f64::max);
    let mut peaks = Vec::new();
    for i in 1..spectrum.len() - 1 {
        if spectrum[i] >= threshold * max
            && spectrum[i] >= spectrum[i - 1]
            && spectrum[i] >= spectrum[i + 1]
        {
            peaks.push(i);
        }
    }
    peaks
}

/// Largest absolute residual of a least-squares fit of `values` onto
/// {1, cos(2π f t), sin(2π f t)} over the given frequencies.
pub fn trig_fit_residual(times: &[f64], values: &[f64], freqs: &[f64]) -> f64 {
    let n = times.len();
    let cols = 1 + 2 * freqs.len();
    let design = nalgebra::DMatrix::<f64>::from_fn(n, cols, |i, j| {
        if j == 0 {
            1.0
        } else {
            let f = freqs[(j - 1) / 2];
            let phase = 2.0 * std::f64::consts::PI * f * times[i];
            if (j - 1) % 2 == 0 {
                phase.cos()
            } else {
                phase.sin()
            }
        }
    });
    let rhs = nalgebra::DVector::<f64>::from_row_slice(values);
    let coeffs = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .expect("least squares solve");
    let fit = design * coeffs;
    (fit - rhs).iter().map(|r| r.abs()).fold(0.0, f64::max)
}
