//! Spin-1/2 precessing about a cone: composite generators and an independent
//! discrete-overlap phase oracle.

use std::f64::consts::PI;

use effham_core::geometric::{propagate_invariant, InvariantTrajectory};
use effham_core::lindblad::{build_effective_hamiltonian, LindbladModel};
use effham_core::numerics::{inner, kron, ops, re, CMatrix, C64};
use effham_core::trajectory::GeneratorTrajectory;

pub const OMEGA0: f64 = 1.0;

pub fn spin_hamiltonian(theta: f64, omega: f64, t: f64) -> CMatrix {
    let (sx, sy, sz) = (ops::sigma_x(), ops::sigma_y(), ops::sigma_z());
    let field = &(&sz.scale_real(theta.cos()) + &sx.scale_real(theta.sin() * (omega * t).cos()))
        + &sy.scale_real(theta.sin() * (omega * t).sin());
    field.scale_real(OMEGA0 / 2.0)
}

pub fn composite_generator(theta: f64, omega: f64, t: f64) -> CMatrix {
    let model = LindbladModel::new(spin_hamiltonian(theta, omega, t), vec![]).unwrap();
    build_effective_hamiltonian(&model).matrix
}

/// `H ⊗ I + 2 I ⊗ H^A`: commutes with the composite generator of a closed
/// system and separates the two population directions.
pub fn lifted_invariant(theta: f64, omega: f64, t: f64) -> CMatrix {
    let h = spin_hamiltonian(theta, omega, t);
    let id = CMatrix::identity(2);
    &kron(&h, &id) + &kron(&id, &h.conj()).scale_real(2.0)
}

pub fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// Spinor `|±n>` for the field direction at polar angle `theta`, azimuth `phi`.
pub fn spinor(theta: f64, phi: f64, up: bool) -> Vec<C64> {
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    if up {
        vec![re(ch), C64::from_polar(sh, phi)]
    } else {
        vec![re(sh), -C64::from_polar(ch, phi)]
    }
}

/// `-arg prod <v_i|v_{i+1}>` around the closed loop of composite vectors
/// `|a> ⊗ conj|b>`, independent of any eigen-solver.
pub fn pancharatnam(theta: f64, a_up: bool, b_up: bool, samples: usize) -> f64 {
    let vecs: Vec<Vec<C64>> = (0..samples)
        .map(|i| {
            let phi = 2.0 * PI * i as f64 / samples as f64;
            let a = spinor(theta, phi, a_up);
            let b: Vec<C64> = spinor(theta, phi, b_up).iter().map(|z| z.conj()).collect();
            let am = CMatrix::from_vec(2, 1, a).unwrap();
            let bm = CMatrix::from_vec(2, 1, b).unwrap();
            kron(&am, &bm).column(0)
        })
        .collect();
    let mut prod = re(1.0);
    for i in 0..samples {
        prod *= inner(&vecs[i], &vecs[(i + 1) % samples]);
    }
    -prod.arg()
}

pub fn slow_trajectory(theta: f64, invariant0: CMatrix) -> InvariantTrajectory {
    let omega = 1e-3 * OMEGA0;
    let period = 2.0 * PI / omega;
    let steps = 100_000;
    let gen =
        GeneratorTrajectory::from_fn(0.0, period, steps, |t| composite_generator(theta, omega, t))
            .unwrap();
    propagate_invariant(&gen, &invariant0).unwrap()
}

pub fn track_with_value(traj: &InvariantTrajectory, value: C64) -> usize {
    traj.eigen_tracks
        .iter()
        .position(|t| (t.values[0] - value).norm() < 1e-9)
        .expect("track present")
}
