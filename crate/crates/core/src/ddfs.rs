//! Verification of dynamically stable decoherence-free subspaces.
//!
//! A span of Hermitian-symmetric composite vectors `Phi_l` is decoherence free
//! when every jump operator acts on it with a common eigenvalue `beta`
//! (`(L ⊗ I) Phi_l = beta Phi_l`) and the span is invariant under the reduced
//! effective Hamiltonian obtained by substituting `beta` into `H_T`:
//!
//! `H_D = H ⊗ I - I ⊗ H^A - (i/2) sum_k beta_k L_k^† ⊗ I
//!        - (i/2) sum_k beta_k^* I ⊗ L_k^T + i sum_k beta_k I ⊗ L_k^A`.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generalized::{generalized_oracle, GeneralizedLindbladModel};
use crate::lindblad::{
    superoperator_oracle, unvectorize_slice, vectorize, CompositeState, LindbladModel,
};
use crate::numerics::{inner, kron, norm, CMatrix, I};

/// Relative threshold below which a basis vector counts as linearly dependent.
const DEPENDENCE_TOL: f64 = 1e-8;

/// Common-eigenvalue fit for one jump channel.
#[derive(Clone, Debug, Serialize)]
pub struct BetaFit {
    /// Target component `k` (always 0 for Markovian models).
    pub component: usize,
    /// Operator index `k` (Markovian) or `lambda` (generalized).
    pub channel: usize,
    pub beta: C64,
    /// `max_{l,j} ‖(R ⊗ I) Phi_l - beta Phi_l‖` over unit-norm basis vectors.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DdfsReport {
    pub betas: Vec<BetaFit>,
    pub max_eigen_residual: f64,
    /// `max_l ‖(I - P) H_D Phi_l‖` with `P` the projector onto the span.
    pub invariance_defect: f64,
    /// `d/dt Tr rho^2` for each unit-norm basis vector.
    pub purity_derivatives: Vec<f64>,
    pub verdict: bool,
}

struct Basis {
    /// Unit-norm input vectors.
    unit: Vec<Vec<C64>>,
    /// Orthonormal basis of their span.
    ortho: Vec<Vec<C64>>,
}

impl Basis {
    fn new(basis: &[CompositeState], n: usize, tol: f64) -> Result<Basis> {
        if basis.is_empty() {
            return Err(Error::Precondition("basis is empty".into()));
        }
        let mut unit = Vec::with_capacity(basis.len());
        let mut ortho: Vec<Vec<C64>> = Vec::with_capacity(basis.len());
        for (i, phi) in basis.iter().enumerate() {
            if phi.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "basis vector {i} has system dimension {}, model has {n}",
                    phi.dim()
                )));
            }
            let nrm = norm(phi.amplitudes());
            if nrm == 0.0 {
                return Err(Error::DependentBasis(i));
            }
            let u: Vec<C64> = phi.amplitudes().iter().map(|z| z / nrm).collect();
            let rho = unvectorize_slice(&u)?;
            if rho.hermitian_defect() > tol {
                return Err(Error::NotHermitianSymmetric(i));
            }
            let mut v = u.clone();
            for _ in 0..2 {
                for q in &ortho {
                    let c = inner(q, &v);
                    for (x, y) in v.iter_mut().zip(q) {
                        *x -= c * y;
                    }
                }
            }
            let vn = norm(&v);
            if vn < DEPENDENCE_TOL {
                return Err(Error::DependentBasis(i));
            }
            ortho.push(v.into_iter().map(|z| z / vn).collect());
            unit.push(u);
        }
        Ok(Basis { unit, ortho })
    }

    /// `‖(I - P) v‖`.
    fn outside(&self, v: &[C64]) -> f64 {
        let mut w = v.to_vec();
        for q in &self.ortho {
            let c = inner(q, &w);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
        norm(&w)
    }
}

/// `vec(A rho)` for `psi = vec(rho)`, i.e. `(A ⊗ I) psi`.
fn left_apply(a: &CMatrix, psi: &[C64]) -> Vec<C64> {
    let rho = unvectorize_slice(psi).expect("square length checked");
    vectorize(&(a * &rho)).expect("square").into_amplitudes()
}

fn eigen_residual(a: &CMatrix, beta: C64, psi: &[C64]) -> f64 {
    let v = left_apply(a, psi);
    let d: Vec<C64> = v.iter().zip(psi).map(|(x, y)| x - beta * y).collect();
    norm(&d)
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

/// Checks the decoherence-free conditions for a Markovian model.
///
/// `beta_k` is the Rayleigh quotient of `L_k ⊗ I` on the first basis vector;
/// residuals are measured against it. The verdict requires every residual,
/// the invariance defect and every purity derivative to be at most `tol`.
pub fn ddfs_check(model: &LindbladModel, basis: &[CompositeState], tol: f64) -> Result<DdfsReport> {
    let n = model.dim();
    let b = Basis::new(basis, n, tol)?;
    let id = CMatrix::identity(n);

    let mut betas = Vec::new();
    for (k, l) in model.lindblad_ops().iter().enumerate() {
        let beta = inner(&b.unit[0], &left_apply(l, &b.unit[0]));
        let residual = max_of(b.unit.iter().map(|p| eigen_residual(l, beta, p)));
        betas.push(BetaFit {
            component: 0,
            channel: k,
            beta,
            residual,
        });
    }

    let h = model.hamiltonian();
    let mut hd = &kron(h, &id) - &kron(&id, &h.conj());
    for (fit, l) in betas.iter().zip(model.lindblad_ops()) {
        hd -= &kron(&l.adjoint(), &id).scale(I * 0.5 * fit.beta);
        hd -= &kron(&id, &l.transpose()).scale(I * 0.5 * fit.beta.conj());
        hd += &kron(&id, &l.conj()).scale(I * fit.beta);
    }
    let invariance_defect = max_of(b.unit.iter().map(|p| b.outside(&hd.mul_vec(p))));

    let purity_derivatives = b
        .unit
        .iter()
        .map(|p| {
            let rho = unvectorize_slice(p).expect("square");
            let comm = (&(h * &rho) - &(&rho * h)).scale(-I);
            let dissipator = &superoperator_oracle(model, &rho) - &comm;
            2.0 * (&rho * &dissipator).trace().re
        })
        .collect();

    Ok(finish(betas, invariance_defect, purity_derivatives, tol))
}

/// Checks the decoherence-free conditions for a generalized model.
///
/// For each `(k, lambda)` the eigenvalue `beta_k^lambda` is fitted from the
/// first basis vector and the first source component `j` that carries a
/// transition `R_kj^lambda`; residuals cover every stored `j` and every basis
/// vector. The span is `C^K ⊗ span{Phi_l}`.
pub fn ddfs_check_generalized(
    model: &GeneralizedLindbladModel,
    basis: &[CompositeState],
    tol: f64,
) -> Result<DdfsReport> {
    let n = model.dim();
    let kk = model.components();
    let b = Basis::new(basis, n, tol)?;
    let id = CMatrix::identity(n);

    let mut groups: BTreeMap<(usize, usize), Vec<&CMatrix>> = BTreeMap::new();
    for (&(k, _, lambda), r) in model.transitions() {
        groups.entry((k, lambda)).or_default().push(r);
    }
    let mut betas = Vec::new();
    let mut beta_of = BTreeMap::new();
    for (&(k, lambda), ops) in &groups {
        let beta = inner(&b.unit[0], &left_apply(ops[0], &b.unit[0]));
        let residual = max_of(
            ops.iter()
                .flat_map(|r| b.unit.iter().map(move |p| eigen_residual(r, beta, p))),
        );
        beta_of.insert((k, lambda), beta);
        betas.push(BetaFit {
            component: k,
            channel: lambda,
            beta,
            residual,
        });
    }

    // Blocks of the reduced block Hamiltonian.
    let mut blocks = vec![vec![CMatrix::zeros(n * n, n * n); kk]; kk];
    for (k, hk) in model.hamiltonians().iter().enumerate() {
        blocks[k][k] = &kron(hk, &id) - &kron(&id, &hk.conj());
    }
    for (&(p, k, lambda), r) in model.transitions() {
        let beta = beta_of[&(p, lambda)];
        blocks[k][k] -= &kron(&r.adjoint(), &id).scale(I * 0.5 * beta);
        blocks[k][k] -= &kron(&id, &r.transpose()).scale(I * 0.5 * beta.conj());
        blocks[p][k] += &kron(&id, &r.conj()).scale(I * beta);
    }
    let mut invariance_defect: f64 = 0.0;
    for col in 0..kk {
        for phi in &b.unit {
            let d2: f64 = (0..kk)
                .map(|row| b.outside(&blocks[row][col].mul_vec(phi)).powi(2))
                .sum();
            invariance_defect = invariance_defect.max(d2.sqrt());
        }
    }

    let mut purity_derivatives = Vec::with_capacity(b.unit.len());
    for phi in &b.unit {
        let rho = unvectorize_slice(phi)?;
        let mut worst: f64 = 0.0;
        for k in 0..kk {
            let mut rhos = vec![CMatrix::zeros(n, n); kk];
            rhos[k] = rho.clone();
            let rates = generalized_oracle(model, &rhos)?;
            let total = rates.iter().fold(CMatrix::zeros(n, n), |acc, r| &acc + r);
            let d = 2.0 * (&rho * &total).trace().re;
            if d.abs() > worst.abs() {
                worst = d;
            }
        }
        purity_derivatives.push(worst);
    }

    Ok(finish(betas, invariance_defect, purity_derivatives, tol))
}

fn finish(
    betas: Vec<BetaFit>,
    invariance_defect: f64,
    purity_derivatives: Vec<f64>,
    tol: f64,
) -> DdfsReport {
    let max_eigen_residual = max_of(betas.iter().map(|f| f.residual));
    let verdict = max_eigen_residual <= tol
        && invariance_defect <= tol
        && purity_derivatives.iter().all(|d| d.abs() <= tol);
    DdfsReport {
        betas,
        max_eigen_residual,
        invariance_defect,
        purity_derivatives,
        verdict,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, ops, re};
    use crate::two_band::{build_model, TwoBandParams};

    fn ket(n: usize, i: usize) -> Vec<C64> {
        let mut v = vec![re(0.0); n];
        v[i] = re(1.0);
        v
    }

    fn ketbra(a: &[C64], b: &[C64]) -> CMatrix {
        let bc: Vec<C64> = b.iter().map(|z| z.conj()).collect();
        CMatrix::outer(a, &bc)
    }

    fn state(a: &[C64], b: &[C64]) -> CompositeState {
        vectorize(&ketbra(a, b)).unwrap()
    }

    fn hermitian_state(m: CMatrix) -> CompositeState {
        vectorize(&m.hermitian_part()).unwrap()
    }

    fn collective_dephasing() -> LindbladModel {
        let z = ops::sigma_z();
        let id = CMatrix::identity(2);
        let l = (&kron(&z, &id) + &kron(&id, &z)).scale_real(0.3_f64.sqrt());
        // Exchange coupling preserves the zero-magnetization sector.
        let h = (&kron(&ops::sigma_x(), &ops::sigma_x()) + &kron(&ops::sigma_y(), &ops::sigma_y()))
            .scale_real(0.7);
        LindbladModel::new(h, vec![l]).unwrap()
    }

    fn zero_magnetization_basis() -> Vec<CompositeState> {
        let (k01, k10) = (ket(4, 1), ket(4, 2));
        let x = &CMatrix::outer(&k01, &k10) + &CMatrix::outer(&k10, &k01);
        let y = (&CMatrix::outer(&k01, &k10) - &CMatrix::outer(&k10, &k01)).scale(I);
        vec![
            state(&k01, &k01),
            state(&k10, &k10),
            vectorize(&x).unwrap(),
            vectorize(&y).unwrap(),
        ]
    }

    #[test]
    fn collective_dephasing_sector_is_decoherence_free() {
        let r = ddfs_check(&collective_dephasing(), &zero_magnetization_basis(), 1e-10).unwrap();
        assert!(r.verdict, "{r:?}");
        assert!(r.betas[0].beta.norm() < 1e-12);
    }

    #[test]
    fn fully_polarized_state_breaks_the_common_eigenvalue() {
        let mut basis = zero_magnetization_basis();
        basis.push(state(&ket(4, 0), &ket(4, 0)));
        let r = ddfs_check(&collective_dephasing(), &basis, 1e-10).unwrap();
        assert!(!r.verdict);
        assert!(r.max_eigen_residual > 0.1);
    }

    #[test]
    fn no_jump_operators_give_zero_beta() {
        let h = ops::sigma_z();
        let m = LindbladModel::new(h, vec![CMatrix::zeros(2, 2)]).unwrap();
        let basis = vec![state(&ket(2, 0), &ket(2, 0)), state(&ket(2, 1), &ket(2, 1))];
        let r = ddfs_check(&m, &basis, 1e-12).unwrap();
        assert_eq!(r.betas[0].beta, re(0.0));
        assert_eq!(r.max_eigen_residual, 0.0);
    }

    #[test]
    fn rejects_non_hermitian_and_dependent_bases() {
        let m = collective_dephasing();
        let bad = vec![state(&ket(4, 1), &ket(4, 2))];
        assert!(matches!(
            ddfs_check(&m, &bad, 1e-10),
            Err(Error::NotHermitianSymmetric(0))
        ));
        let p = state(&ket(4, 1), &ket(4, 1));
        let dup = vec![p.clone(), p];
        assert!(matches!(
            ddfs_check(&m, &dup, 1e-10),
            Err(Error::DependentBasis(1))
        ));
    }

    #[test]
    fn identity_proportional_transitions_pass_for_any_basis() {
        let id = CMatrix::identity(2);
        let model = GeneralizedLindbladModel::new(
            vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)],
            vec![
                ((0, 1, 0), id.scale(c(0.6, 0.2))),
                ((1, 0, 0), id.scale_real(0.9)),
                ((1, 1, 1), id.scale_real(0.4)),
            ],
        )
        .unwrap();
        let a = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let bv = vec![c(0.8, 0.0), c(0.0, -0.6)];
        let basis = vec![state(&a, &a), hermitian_state(ketbra(&a, &bv))];
        let r = ddfs_check_generalized(&model, &basis, 1e-10).unwrap();
        assert!(r.verdict, "{r:?}");
    }

    #[test]
    fn two_band_ground_state_is_not_protected() {
        let model = build_model(TwoBandParams::new(1.0, 1.0).unwrap());
        let g = ket(2, 1);
        let r = ddfs_check_generalized(&model, &[state(&g, &g)], 1e-10).unwrap();
        assert!(!r.verdict);
    }
}
