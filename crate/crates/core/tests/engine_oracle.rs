//! The spectral sector propagator checked against an independent adaptive
//! RK4 integration of the Schrödinger equation, plus conservation-law
//! sweeps.

mod common;

use common::{random_spinor, random_unitary, rk4_evolve_times};
use ionosc::encoding::{build_scheme_a, build_scheme_b, SchemeAParams, SchemeBParams};
use ionosc::engine::{evolve_sector, SectorState};
use ionosc::linalg::{cr, norm_sq, CVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn max_state_dev(a: &CVector, b: &CVector) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn sector_propagator_matches_integrator_over_ten_ms() {
    let (pair, _) = build_scheme_a(&SchemeAParams {
        c: 1.0,
        omega: 6.5,
        omega1: -1.0,
        omega2: -0.5,
    })
    .unwrap();
    let p = 10.0;
    // generic superposition touching every basis state
    let raw: Vec<f64> = vec![0.31, -0.12, 0.44, 0.20, -0.35, 0.28, 0.17, -0.52];
    let mut psi0 = CVector::from_iterator(8, raw.iter().map(|&x| cr(x)));
    let n = norm_sq(&psi0).sqrt();
    psi0 /= cr(n);

    let times = [2.5, 7.0, 10.0];
    let traj = evolve_sector(&pair, &SectorState::new(p, psi0.clone()).unwrap(), &times).unwrap();
    let oracle = rk4_evolve_times(&pair.h_at(p), &psi0, &times, 1e-10);
    for (s, o) in traj.states.iter().zip(&oracle) {
        let dev = max_state_dev(s, o);
        assert!(dev < 1e-8, "state deviation {dev}");
    }
}

#[test]
fn sector_propagator_matches_integrator_on_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for draw in 0..50 {
        let c_eff = rng.gen_range(0.3..2.0);
        let couplings: Vec<f64> = (0..3).map(|_| rng.gen_range(-6.0..6.0)).collect();
        let (pair, enc) = if rng.gen_bool(0.5) {
            build_scheme_a(&SchemeAParams {
                c: c_eff,
                omega: couplings[0],
                omega1: couplings[1],
                omega2: couplings[2],
            })
            .unwrap()
        } else {
            build_scheme_b(&SchemeBParams {
                c: c_eff,
                j: couplings[0],
                j1: couplings[1],
                j2: couplings[2],
            })
            .unwrap()
        };
        let p: f64 = rng.gen_range(-15.0..15.0);

        // random normalized state over the full register
        let mut psi0 = CVector::from_fn(enc.dim(), |_, _| {
            ionosc::linalg::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let n = norm_sq(&psi0).sqrt();
        psi0 /= cr(n);

        let times = [0.3, 1.0];
        let traj =
            evolve_sector(&pair, &SectorState::new(p, psi0.clone()).unwrap(), &times).unwrap();
        let oracle = rk4_evolve_times(&pair.h_at(p), &psi0, &times, 1e-10);
        for (s, o) in traj.states.iter().zip(&oracle) {
            let dev = max_state_dev(s, o);
            assert!(dev < 1e-8, "draw {draw}: deviation {dev}");
        }
    }
}

#[test]
fn norm_and_energy_are_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let (pair, enc) = build_scheme_a(&SchemeAParams {
            c: rng.gen_range(0.3..2.0),
            omega: rng.gen_range(-6.0..6.0),
            omega1: rng.gen_range(-4.0..4.0),
            omega2: rng.gen_range(-4.0..4.0),
        })
        .unwrap();
        let p: f64 = rng.gen_range(-20.0..20.0);
        let mut psi0 = CVector::from_fn(enc.dim(), |_, _| {
            ionosc::linalg::c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let n = norm_sq(&psi0).sqrt();
        psi0 /= cr(n);

        let h = pair.h_at(p);
        let e0 = psi0.dotc(&(&h * &psi0)).re;
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let traj = evolve_sector(&pair, &SectorState::new(p, psi0).unwrap(), &times).unwrap();
        assert!(traj.max_norm_drift() < 1e-10);
        for s in &traj.states {
            let e = s.dotc(&(&h * s)).re;
            assert!((e - e0).abs() < 1e-10, "energy drift {}", (e - e0).abs());
        }
    }
}

#[test]
fn encoded_states_never_leak() {
    // block closure: evolution from an encoded state keeps leftover
    // population at numerical zero, including with degenerate blocks
    let mut rng = ChaCha8Rng::seed_from_u64(4096);
    for draw in 0..20 {
        let degenerate = draw % 4 == 0;
        let (pair, enc) = build_scheme_a(&SchemeAParams {
            c: 1.0,
            omega: rng.gen_range(-6.0..6.0),
            omega1: if degenerate {
                0.0
            } else {
                rng.gen_range(-4.0..4.0)
            },
            omega2: if degenerate {
                0.0
            } else {
                rng.gen_range(-4.0..4.0)
            },
        })
        .unwrap();
        let p: f64 = rng.gen_range(-20.0..20.0);

        let mut psi0 = CVector::zeros(enc.dim());
        let mut mixing_rng = rng.clone();
        let u = random_unitary(3, &mut mixing_rng);
        let spin = random_spinor(&mut rng);
        for k in 0..3 {
            let w = u.entry(0, k).conj();
            psi0[enc.upper(k)] = w * spin.upper;
            psi0[enc.lower(k)] = w * spin.lower;
        }

        let times: Vec<f64> = (0..30).map(|i| i as f64 * 0.33).collect();
        let traj = evolve_sector(&pair, &SectorState::new(p, psi0).unwrap(), &times).unwrap();
        for s in &traj.states {
            let leak: f64 = enc.leftover().iter().map(|&i| s[i].norm_sqr()).sum();
            assert!(leak < 1e-12, "draw {draw}: leakage {leak}");
        }
    }
}
