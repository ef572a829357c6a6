//! Random model and state generators shared by the integration tests.
#![allow(dead_code)]

pub mod spin;

use effham_core::generalized::GeneralizedLindbladModel;
use effham_core::lindblad::LindbladModel;
use effham_core::numerics::{CMatrix, C64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> CMatrix {
    random_matrix(rng, n, scale).hermitian_part()
}

/// `A A^† / Tr(A A^†)`, full rank almost surely.
pub fn random_state(rng: &mut impl Rng, n: usize) -> CMatrix {
    let a = random_matrix(rng, n, 1.0);
    let p = &a * &a.adjoint();
    let tr = p.trace().re;
    p.scale_real(1.0 / tr)
}

/// Pure state `|psi><psi|` with a random unit vector.
pub fn random_pure_state(rng: &mut impl Rng, n: usize) -> CMatrix {
    let v: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / (nrm * nrm))
}

/// N in {2,3,4}, zero to three jump operators.
pub fn random_model(rng: &mut impl Rng) -> LindbladModel {
    let n = rng.gen_range(2..=4);
    let k = rng.gen_range(0..=3);
    let h = random_hermitian(rng, n, 1.0);
    let ops = (0..k).map(|_| random_matrix(rng, n, 0.6)).collect();
    LindbladModel::new(h, ops).unwrap()
}

/// N in {1,2,3}, K in {1,2,3}, each `(k, j, lambda)` with `lambda < 2` present with probability 1/2.
pub fn random_generalized(rng: &mut impl Rng) -> GeneralizedLindbladModel {
    let n = rng.gen_range(1..=3);
    let kk = rng.gen_range(1..=3);
    random_generalized_with(rng, n, kk)
}

pub fn random_generalized_with(
    rng: &mut impl Rng,
    n: usize,
    kk: usize,
) -> GeneralizedLindbladModel {
    let hs = (0..kk).map(|_| random_hermitian(rng, n, 1.0)).collect();
    let mut ts = Vec::new();
    for k in 0..kk {
        for j in 0..kk {
            for l in 0..2 {
                if rng.gen_bool(0.5) {
                    ts.push(((k, j, l), random_matrix(rng, n, 0.6)));
                }
            }
        }
    }
    GeneralizedLindbladModel::new(hs, ts).unwrap()
}

/// `K` PSD components with random weights summing to one.
pub fn random_components(rng: &mut impl Rng, n: usize, kk: usize) -> Vec<CMatrix> {
    let w: Vec<f64> = (0..kk).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter()
        .map(|wi| random_state(rng, n).scale_real(wi / s))
        .collect()
}

pub fn min_eigenvalue(rho: &CMatrix) -> f64 {
    effham_core::numerics::eigh(&rho.hermitian_part())
        .unwrap()
        .values[0]
}
