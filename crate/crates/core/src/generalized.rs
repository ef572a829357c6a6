//! Generalized Lindblad equations: `K` coupled unnormalized components `rho_k`
//! whose sum is the physical state,
//!
//! `d rho_k/dt = -i[H_k, rho_k] + sum_{j,l} R_kj rho_j R_kj^† - 1/2 {R_jk^† R_jk, rho_k}`.
//!
//! The stacked amplitudes `(Psi_0, ..., Psi_{K-1})` obey `i dPsi/dt = H Psi` with
//! `H_kj = delta_kj (Heff_k ⊗ I - I ⊗ Heff_k^A) + i sum_l R_kj ⊗ R_kj^A` and
//! `Heff_k = H_k - (i/2) sum_{j,l} R_jk^† R_jk`.

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lindblad::{
    ancilla_conjugate, unvectorize_slice, vectorize, CompositeState, LindbladModel,
};
use crate::numerics::{eig_full, expm, kron, norm, CMatrix, I};

const HERMITIAN_TOL: f64 = 1e-10;
const STATE_TOL: f64 = 1e-8;

/// Key `(to_k, from_j, lambda)` of a transition operator `R_kj^lambda`.
pub type TransitionKey = (usize, usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedLindbladModel {
    dim: usize,
    components: usize,
    hamiltonians: Vec<CMatrix>,
    transitions: BTreeMap<TransitionKey, CMatrix>,
}

impl GeneralizedLindbladModel {
    pub fn new(
        hamiltonians: Vec<CMatrix>,
        transitions: impl IntoIterator<Item = (TransitionKey, CMatrix)>,
    ) -> Result<Self> {
        let components = hamiltonians.len();
        if components == 0 {
            return Err(Error::invalid(
                "hamiltonians",
                "at least one component required",
            ));
        }
        let dim = hamiltonians[0].rows();
        if dim == 0 {
            return Err(Error::invalid(
                "hamiltonians[0]",
                "dimension must be positive",
            ));
        }
        for (k, h) in hamiltonians.iter().enumerate() {
            let field = format!("hamiltonians[{k}]");
            if h.rows() != dim || h.cols() != dim {
                return Err(Error::invalid(
                    field,
                    format!("expected {dim}x{dim}, got {}x{}", h.rows(), h.cols()),
                ));
            }
            if !h.is_finite() {
                return Err(Error::invalid(field, "non-finite entry"));
            }
            let d = h.hermitian_defect();
            if d > HERMITIAN_TOL {
                return Err(Error::invalid(
                    field,
                    format!("not Hermitian (defect {d:.3e})"),
                ));
            }
        }
        let mut map = BTreeMap::new();
        for ((k, j, l), m) in transitions {
            let field = format!("transitions[{k},{j},{l}]");
            if k >= components || j >= components {
                return Err(Error::invalid(
                    field,
                    format!("component index out of range for K = {components}"),
                ));
            }
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::invalid(
                    field,
                    format!("expected {dim}x{dim}, got {}x{}", m.rows(), m.cols()),
                ));
            }
            if !m.is_finite() {
                return Err(Error::invalid(field, "non-finite entry"));
            }
            if map.insert((k, j, l), m).is_some() {
                return Err(Error::invalid(field, "duplicate transition"));
            }
        }
        Ok(GeneralizedLindbladModel {
            dim,
            components,
            hamiltonians,
            transitions: map,
        })
    }

    /// Single-component model with `R_00^l = L_l`.
    pub fn from_markovian(model: &LindbladModel) -> Self {
        let transitions = model
            .lindblad_ops()
            .iter()
            .enumerate()
            .map(|(l, op)| ((0, 0, l), op.clone()));
        GeneralizedLindbladModel::new(vec![model.hamiltonian().clone()], transitions)
            .expect("a valid Markovian model is a valid single-component model")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn hamiltonians(&self) -> &[CMatrix] {
        &self.hamiltonians
    }

    pub fn transitions(&self) -> &BTreeMap<TransitionKey, CMatrix> {
        &self.transitions
    }

    /// All `R_kj^l` for fixed `(k, j)`.
    pub fn transitions_between(&self, k: usize, j: usize) -> impl Iterator<Item = &CMatrix> {
        self.transitions
            .range((k, j, 0)..=(k, j, usize::MAX))
            .map(|(_, m)| m)
    }

    /// `sum_{j,l} R_jk^† R_jk`, the population leaving component `k`.
    pub fn sink(&self, k: usize) -> CMatrix {
        let mut s = CMatrix::zeros(self.dim, self.dim);
        for (&(_, j, _), r) in &self.transitions {
            if j == k {
                s += &(&r.adjoint() * r);
            }
        }
        s
    }

    /// `H_k - (i/2) sum_{j,l} R_jk^† R_jk`.
    pub fn non_hermitian_hamiltonian(&self, k: usize) -> CMatrix {
        &self.hamiltonians[k] - &self.sink(k).scale(I * 0.5)
    }
}

/// Stacked component amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunctionVector {
    pub components: Vec<CompositeState>,
}

impl WaveFunctionVector {
    pub fn from_density_matrices(rhos: &[CMatrix]) -> Result<Self> {
        let components = rhos.iter().map(vectorize).collect::<Result<Vec<_>>>()?;
        if let Some(first) = components.first() {
            if components.iter().any(|c| c.dim() != first.dim()) {
                return Err(Error::DimensionMismatch(
                    "components differ in dimension".into(),
                ));
            }
        }
        Ok(WaveFunctionVector { components })
    }

    /// Splits a flat vector of length `K N^2` into `K` components.
    pub fn from_stacked(stacked: &[C64], k: usize) -> Result<Self> {
        if k == 0 || stacked.len() % k != 0 {
            return Err(Error::BadLength(stacked.len()));
        }
        let len = stacked.len() / k;
        let components = stacked
            .chunks(len)
            .map(|c| CompositeState::new(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(WaveFunctionVector { components })
    }

    pub fn stacked(&self) -> Vec<C64> {
        self.components
            .iter()
            .flat_map(|c| c.amplitudes().iter().copied())
            .collect()
    }

    pub fn density_matrices(&self) -> Vec<CMatrix> {
        self.components
            .iter()
            .map(crate::lindblad::unvectorize)
            .collect()
    }

    /// `sum_k rho_k`.
    pub fn reduced_state(&self) -> CMatrix {
        let rhos = self.density_matrices();
        let n = rhos[0].rows();
        rhos.iter().fold(CMatrix::zeros(n, n), |acc, r| &acc + r)
    }

    pub fn total_trace(&self) -> C64 {
        self.density_matrices().iter().map(CMatrix::trace).sum()
    }
}

#[derive(Clone, Debug)]
pub struct EffectiveHamiltonianMatrix {
    /// `blocks[k][j]`, each `N^2 x N^2`.
    pub blocks: Vec<Vec<CMatrix>>,
    pub flattened: CMatrix,
}

pub fn build_block_hamiltonian(model: &GeneralizedLindbladModel) -> EffectiveHamiltonianMatrix {
    let n = model.dim;
    let kk = model.components;
    let n2 = n * n;
    let id = CMatrix::identity(n);
    let mut blocks = vec![vec![CMatrix::zeros(n2, n2); kk]; kk];
    for (k, row) in blocks.iter_mut().enumerate() {
        let heff = model.non_hermitian_hamiltonian(k);
        row[k] = &kron(&heff, &id) - &kron(&id, &ancilla_conjugate(&heff));
    }
    for (&(k, j, _), r) in &model.transitions {
        blocks[k][j] += &kron(r, &ancilla_conjugate(r)).scale(I);
    }
    let mut flattened = CMatrix::zeros(kk * n2, kk * n2);
    for (k, row) in blocks.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            flattened.set_block(k * n2, j * n2, b);
        }
    }
    EffectiveHamiltonianMatrix { blocks, flattened }
}

fn check_components(model: &GeneralizedLindbladModel, rhos: &[CMatrix]) -> Result<()> {
    if rhos.len() != model.components {
        return Err(Error::DimensionMismatch(format!(
            "{} components supplied, model has {}",
            rhos.len(),
            model.components
        )));
    }
    for r in rhos {
        if r.rows() != model.dim || r.cols() != model.dim {
            return Err(Error::DimensionMismatch(format!(
                "component is {}x{}, model dimension {}",
                r.rows(),
                r.cols(),
                model.dim
            )));
        }
    }
    Ok(())
}

/// Right-hand side of the generalized equation by direct matrix products.
pub fn generalized_oracle(
    model: &GeneralizedLindbladModel,
    rhos: &[CMatrix],
) -> Result<Vec<CMatrix>> {
    check_components(model, rhos)?;
    let mut out: Vec<CMatrix> = (0..model.components)
        .map(|k| {
            let h = &model.hamiltonians[k];
            let rho = &rhos[k];
            let sink = model.sink(k);
            let comm = (&(h * rho) - &(rho * h)).scale(-I);
            let anti = (&(&sink * rho) + &(rho * &sink)).scale_real(0.5);
            &comm - &anti
        })
        .collect();
    for (&(k, j, _), r) in &model.transitions {
        out[k] += &(&(r * &rhos[j]) * &r.adjoint());
    }
    Ok(out)
}

/// `‖-i H stack(vec rho) - stack(vec oracle)‖ / (1 + ‖oracle‖)`.
pub fn oracle_mismatch(model: &GeneralizedLindbladModel, rhos: &[CMatrix]) -> Result<f64> {
    let h = build_block_hamiltonian(model);
    let psi = WaveFunctionVector::from_density_matrices(rhos)?.stacked();
    let lhs = h.flattened.scale(-I).mul_vec(&psi);
    let rhs =
        WaveFunctionVector::from_density_matrices(&generalized_oracle(model, rhos)?)?.stacked();
    let diff: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    Ok(norm(&diff) / (1.0 + norm(&rhs)))
}

fn check_initial(model: &GeneralizedLindbladModel, rhos0: &[CMatrix]) -> Result<()> {
    check_components(model, rhos0)?;
    let mut total = C64::new(0.0, 0.0);
    for (k, r) in rhos0.iter().enumerate() {
        let d = r.hermitian_defect();
        if d > STATE_TOL {
            return Err(Error::Precondition(format!(
                "component {k} not Hermitian (defect {d:.3e})"
            )));
        }
        total += r.trace();
    }
    if (total - C64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::Precondition(format!(
            "total trace is {total}, expected 1"
        )));
    }
    Ok(())
}

/// `exp(-i H t)` applied to the stacked initial components.
pub fn propagate_blocks(
    model: &GeneralizedLindbladModel,
    rhos0: &[CMatrix],
    t: f64,
) -> Result<Vec<CMatrix>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    check_initial(model, rhos0)?;
    let h = build_block_hamiltonian(model);
    let u = expm(&h.flattened.scale(-I * t))?;
    let psi = WaveFunctionVector::from_density_matrices(rhos0)?.stacked();
    Ok(WaveFunctionVector::from_stacked(&u.mul_vec(&psi), model.components)?.density_matrices())
}

/// Components on the uniform grid `t_i = i t1 / steps`.
pub fn propagate_blocks_trajectory(
    model: &GeneralizedLindbladModel,
    rhos0: &[CMatrix],
    t1: f64,
    steps: usize,
) -> Result<Vec<(f64, Vec<CMatrix>)>> {
    if steps == 0 {
        return Err(Error::Precondition("steps must be >= 1".into()));
    }
    if !(t1 >= 0.0) || !t1.is_finite() {
        return Err(Error::Precondition(format!(
            "time must be finite and >= 0, got {t1}"
        )));
    }
    check_initial(model, rhos0)?;
    let h = build_block_hamiltonian(model);
    let u = expm(&h.flattened.scale(-I * (t1 / steps as f64)))?;
    let mut psi = WaveFunctionVector::from_density_matrices(rhos0)?.stacked();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, rhos0.to_vec()));
    for i in 1..=steps {
        psi = u.mul_vec(&psi);
        let comps = WaveFunctionVector::from_stacked(&psi, model.components)?.density_matrices();
        out.push((t1 * i as f64 / steps as f64, comps));
    }
    Ok(out)
}

/// Damping basis of the block generator. `right_ops[nu][k] = A_k^nu`,
/// `left_ops[nu][k] = B_k^nu`, with `sum_k Tr(A_k^mu B_k^nu) = delta`.
#[derive(Clone, Debug)]
pub struct GeneralizedDampingBasis {
    /// Eigenvalues of `-i H`.
    pub eigenvalues: Vec<C64>,
    pub right_ops: Vec<Vec<CMatrix>>,
    pub left_ops: Vec<Vec<CMatrix>>,
    pub clusters: Vec<Range<usize>>,
}

impl GeneralizedDampingBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `sum_k Tr(A_k^mu B_k^nu)`.
    pub fn pairing(&self, mu: usize, nu: usize) -> C64 {
        self.right_ops[mu]
            .iter()
            .zip(&self.left_ops[nu])
            .map(|(a, b)| (a * b).trace())
            .sum()
    }

    /// Spectral evolution `sum_nu exp(lambda_nu t) <B^nu, rho0> A^nu`.
    pub fn evolve(&self, rhos0: &[CMatrix], t: f64) -> Vec<CMatrix> {
        let n = rhos0[0].rows();
        let mut out = vec![CMatrix::zeros(n, n); rhos0.len()];
        for nu in 0..self.len() {
            let coeff: C64 = self.left_ops[nu]
                .iter()
                .zip(rhos0)
                .map(|(b, r)| (b * r).trace())
                .sum::<C64>()
                * (self.eigenvalues[nu] * t).exp();
            for (o, a) in out.iter_mut().zip(&self.right_ops[nu]) {
                *o += &a.scale(coeff);
            }
        }
        out
    }
}

pub fn generalized_damping_basis(
    model: &GeneralizedLindbladModel,
) -> Result<GeneralizedDampingBasis> {
    let h = build_block_hamiltonian(model);
    let es = eig_full(&h.flattened.scale(-I))?;
    let n2 = model.dim * model.dim;
    let split = |v: &[C64], transpose: bool| -> Result<Vec<CMatrix>> {
        v.chunks(n2)
            .map(|c| {
                let m = unvectorize_slice(c)?;
                Ok(if transpose { m.transpose() } else { m })
            })
            .collect()
    };
    let mut right_ops = Vec::with_capacity(es.len());
    let mut left_ops = Vec::with_capacity(es.len());
    for i in 0..es.len() {
        right_ops.push(split(&es.right(i), false)?);
        left_ops.push(split(&es.left(i), true)?);
    }
    Ok(GeneralizedDampingBasis {
        eigenvalues: es.eigenvalues,
        right_ops,
        left_ops,
        clusters: es.clusters,
    })
}
