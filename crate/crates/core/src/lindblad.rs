//! Markovian Lindblad dynamics in the doubled (system ⊗ ancilla) space.
//!
//! A density matrix `rho` maps to the amplitude vector `psi[m*N + n] = rho[m][n]`.
//! With this row-major convention `vec(A rho B) = (A ⊗ B^T) vec(rho)`, and the
//! ancilla copy of an operator is its elementwise complex conjugate.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{eig_full, expm, kron, norm, null_space, CMatrix, I};

const HERMITIAN_TOL: f64 = 1e-10;
const STATE_TOL: f64 = 1e-8;
/// Relative singular-value threshold for the null space of the effective Hamiltonian.
pub const NULL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    dim: usize,
    hamiltonian: CMatrix,
    lindblad_ops: Vec<CMatrix>,
}

impl LindbladModel {
    pub fn new(hamiltonian: CMatrix, lindblad_ops: Vec<CMatrix>) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(Error::invalid(
                "hamiltonian",
                format!(
                    "{}x{} is not square",
                    hamiltonian.rows(),
                    hamiltonian.cols()
                ),
            ));
        }
        let dim = hamiltonian.rows();
        if dim == 0 {
            return Err(Error::invalid("hamiltonian", "dimension must be positive"));
        }
        if !hamiltonian.is_finite() {
            return Err(Error::invalid("hamiltonian", "non-finite entry"));
        }
        let defect = hamiltonian.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::invalid(
                "hamiltonian",
                format!("not Hermitian (defect {defect:.3e})"),
            ));
        }
        for (k, l) in lindblad_ops.iter().enumerate() {
            if l.rows() != dim || l.cols() != dim {
                return Err(Error::invalid(
                    format!("lindblad_ops[{k}]"),
                    format!("expected {dim}x{dim}, got {}x{}", l.rows(), l.cols()),
                ));
            }
            if !l.is_finite() {
                return Err(Error::invalid(
                    format!("lindblad_ops[{k}]"),
                    "non-finite entry",
                ));
            }
        }
        Ok(LindbladModel {
            dim,
            hamiltonian,
            lindblad_ops,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn lindblad_ops(&self) -> &[CMatrix] {
        &self.lindblad_ops
    }

    /// `H - (i/2) sum_k L_k^dagger L_k`.
    pub fn non_hermitian_hamiltonian(&self) -> CMatrix {
        let mut sink = CMatrix::zeros(self.dim, self.dim);
        for l in &self.lindblad_ops {
            sink += &(&l.adjoint() * l);
        }
        &self.hamiltonian - &sink.scale(I * 0.5)
    }
}

/// Amplitudes of `rho` in the doubled space, system index slow.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeState {
    dim: usize,
    amplitudes: Vec<C64>,
}

impl CompositeState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        let dim = (len as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != len {
            return Err(Error::BadLength(len));
        }
        Ok(CompositeState { dim, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `<Psi|Psi>`, equal to `Tr(rho^2)` for Hermitian `rho`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn vectorize(rho: &CMatrix) -> Result<CompositeState> {
    if !rho.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot vectorize a {}x{} matrix",
            rho.rows(),
            rho.cols()
        )));
    }
    CompositeState::new(rho.data().to_vec())
}

pub fn unvectorize(psi: &CompositeState) -> CMatrix {
    CMatrix::from_vec(psi.dim, psi.dim, psi.amplitudes.clone()).expect("square by construction")
}

/// Reshapes a raw amplitude vector of length `N^2` into an `N x N` matrix.
pub fn unvectorize_slice(amps: &[C64]) -> Result<CMatrix> {
    let psi = CompositeState::new(amps.to_vec())?;
    Ok(unvectorize(&psi))
}

/// Ancilla copy `O^A` with `(O^A)_{mn} = (O^dagger)_{nm}`, i.e. `conj(O)`.
pub fn ancilla_conjugate(op: &CMatrix) -> CMatrix {
    op.conj()
}

#[derive(Clone, Debug)]
pub struct EffectiveHamiltonian {
    pub matrix: CMatrix,
    pub model: LindbladModel,
}

/// `H_T = Heff ⊗ I - I ⊗ Heff^A + i sum_k L_k ⊗ L_k^A`, so that
/// `i d/dt vec(rho) = H_T vec(rho)` reproduces the Lindblad equation.
pub fn build_effective_hamiltonian(model: &LindbladModel) -> EffectiveHamiltonian {
    let n = model.dim;
    let id = CMatrix::identity(n);
    let heff = model.non_hermitian_hamiltonian();
    let mut m = &kron(&heff, &id) - &kron(&id, &ancilla_conjugate(&heff));
    for l in &model.lindblad_ops {
        m += &kron(l, &ancilla_conjugate(l)).scale(I);
    }
    EffectiveHamiltonian {
        matrix: m,
        model: model.clone(),
    }
}

/// Lindblad right-hand side evaluated by plain matrix products.
pub fn superoperator_oracle(model: &LindbladModel, rho: &CMatrix) -> CMatrix {
    let h = &model.hamiltonian;
    let mut out = (&(h * rho) - &(rho * h)).scale(-I);
    for l in &model.lindblad_ops {
        let ld = l.adjoint();
        let ldl = &ld * l;
        let jump = &(l * rho) * &ld;
        let anti = &(&ldl * rho) + &(rho * &ldl);
        out += &(&jump - &anti.scale_real(0.5));
    }
    out
}

fn check_state_like(rho: &CMatrix, n: usize) -> Result<()> {
    if rho.rows() != n || rho.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, model dimension {n}",
            rho.rows(),
            rho.cols()
        )));
    }
    let defect = rho.hermitian_defect();
    if defect > STATE_TOL {
        return Err(Error::Precondition(format!(
            "initial state not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
        return Err(Error::Precondition(format!("initial state has trace {tr}")));
    }
    Ok(())
}

/// `rho(t) = unvec(exp(-i H_T t) vec(rho0))`.
pub fn propagate(model: &LindbladModel, rho0: &CMatrix, t: f64) -> Result<CMatrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Precondition(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    check_state_like(rho0, model.dim)?;
    let ht = build_effective_hamiltonian(model);
    let u = expm(&ht.matrix.scale(-I * t))?;
    let psi = vectorize(rho0)?;
    unvectorize_slice(&u.mul_vec(psi.amplitudes()))
}

/// Propagates along a uniform grid `t_i = i * t1 / steps`, reusing one step propagator.
pub fn propagate_trajectory(
    model: &LindbladModel,
    rho0: &CMatrix,
    t1: f64,
    steps: usize,
) -> Result<Vec<(f64, CMatrix)>> {
    if steps == 0 {
        return Err(Error::Precondition("steps must be >= 1".into()));
    }
    if !(t1 >= 0.0) || !t1.is_finite() {
        return Err(Error::Precondition(format!(
            "time must be finite and >= 0, got {t1}"
        )));
    }
    check_state_like(rho0, model.dim)?;
    let ht = build_effective_hamiltonian(model);
    let h = t1 / steps as f64;
    let u = expm(&ht.matrix.scale(-I * h))?;
    let mut psi = vectorize(rho0)?.into_amplitudes();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, rho0.clone()));
    for i in 1..=steps {
        psi = u.mul_vec(&psi);
        out.push((t1 * i as f64 / steps as f64, unvectorize_slice(&psi)?));
    }
    Ok(out)
}

/// Right/left eigenoperators of the Lindblad generator.
#[derive(Clone, Debug)]
pub struct DampingBasis {
    /// Eigenvalues of `-i H_T` (decay rates).
    pub eigenvalues: Vec<C64>,
    pub right_ops: Vec<CMatrix>,
    pub left_ops: Vec<CMatrix>,
    /// Index ranges of degenerate eigenvalue clusters.
    pub clusters: Vec<std::ops::Range<usize>>,
}

impl DampingBasis {
    /// `Tr(A_mu B_nu)`.
    pub fn pairing(&self, mu: usize, nu: usize) -> C64 {
        (&self.right_ops[mu] * &self.left_ops[nu]).trace()
    }

    /// `rho(t) = sum_nu exp(lambda_nu t) Tr(B_nu rho0) A_nu`.
    pub fn evolve(&self, rho0: &CMatrix, t: f64) -> CMatrix {
        let n = rho0.rows();
        let mut out = CMatrix::zeros(n, n);
        for ((lam, a), b) in self
            .eigenvalues
            .iter()
            .zip(&self.right_ops)
            .zip(&self.left_ops)
        {
            let coeff = (b * rho0).trace() * (lam * t).exp();
            out += &a.scale(coeff);
        }
        out
    }
}

/// Damping basis from `eig_full(-i H_T)`: `A_nu = unvec(r_nu)`, `B_nu = unvec(l_nu)^T`,
/// so that `Tr(A_mu B_nu) = l_nu . r_mu = delta`.
pub fn damping_basis(model: &LindbladModel) -> Result<DampingBasis> {
    let ht = build_effective_hamiltonian(model);
    let es = eig_full(&ht.matrix.scale(-I))?;
    let mut right_ops = Vec::with_capacity(es.len());
    let mut left_ops = Vec::with_capacity(es.len());
    for i in 0..es.len() {
        right_ops.push(unvectorize_slice(&es.right(i))?);
        left_ops.push(unvectorize_slice(&es.left(i))?.transpose());
    }
    Ok(DampingBasis {
        eigenvalues: es.eigenvalues,
        right_ops,
        left_ops,
        clusters: es.clusters,
    })
}

/// A zero mode of the generator. Trace-carrying modes are normalized to unit trace;
/// traceless modes keep unit Frobenius norm and are flagged.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: CMatrix,
    pub traceless: bool,
}

/// Null space of `H_T` as Hermitian operators. The basis is rotated so that at most
/// one member carries trace; the rest are traceless.
pub fn steady_states(model: &LindbladModel) -> Vec<SteadyState> {
    let ht = build_effective_hamiltonian(model);
    hermitian_zero_modes(&ht.matrix, model.dim)
}

pub(crate) fn hermitian_zero_modes(matrix: &CMatrix, n: usize) -> Vec<SteadyState> {
    let ns = null_space(matrix, NULL_TOL);
    if ns.is_empty() {
        return vec![];
    }
    let target = ns.len();
    // Hermitian and anti-Hermitian parts of each null vector stay in the null space
    // because the generator preserves Hermiticity.
    let mut candidates: Vec<CMatrix> = Vec::with_capacity(2 * target);
    for v in &ns {
        let x = unvectorize_slice(v).expect("square");
        let xd = x.adjoint();
        candidates.push((&x + &xd).scale_real(0.5));
        candidates.push((&x - &xd).scale(C64::new(0.0, -0.5)));
    }
    let herm_basis = real_gram_schmidt(candidates, target);
    split_trace(herm_basis, n)
}

fn frob_real(a: &CMatrix, b: &CMatrix) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x.conj() * y).re)
        .sum()
}

fn real_gram_schmidt(candidates: Vec<CMatrix>, target: usize) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::with_capacity(target);
    for mut c in candidates {
        if basis.len() == target {
            break;
        }
        for _ in 0..2 {
            for b in &basis {
                let p = frob_real(b, &c);
                c -= &b.scale_real(p);
            }
        }
        let nrm = c.norm_fro();
        if nrm > 1e-6 {
            basis.push(c.scale_real(1.0 / nrm));
        }
    }
    basis
}

fn split_trace(basis: Vec<CMatrix>, n: usize) -> Vec<SteadyState> {
    let m = basis.len();
    let traces: Vec<f64> = basis.iter().map(|b| b.trace().re).collect();
    let tnorm = traces.iter().map(|t| t * t).sum::<f64>().sqrt();
    let scale = 1e-8 * (n as f64).sqrt();
    if tnorm <= scale {
        return basis
            .into_iter()
            .map(|rho| SteadyState {
                rho,
                traceless: true,
            })
            .collect();
    }
    // Orthonormal coefficient frame whose first vector is parallel to the traces.
    let mut frame: Vec<Vec<f64>> = vec![traces.iter().map(|t| t / tnorm).collect()];
    for e in 0..m {
        if frame.len() == m {
            break;
        }
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        for _ in 0..2 {
            for f in &frame {
                let p: f64 = f.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, fi) in v.iter_mut().zip(f) {
                    *vi -= p * fi;
                }
            }
        }
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-6 {
            frame.push(v.iter().map(|x| x / nv).collect());
        }
    }
    frame
        .iter()
        .enumerate()
        .map(|(k, coeffs)| {
            let mut rho = CMatrix::zeros(n, n);
            for (c, b) in coeffs.iter().zip(&basis) {
                rho += &b.scale_real(*c);
            }
            if k == 0 {
                let tr = rho.trace().re;
                SteadyState {
                    rho: rho.scale_real(1.0 / tr),
                    traceless: false,
                }
            } else {
                SteadyState {
                    rho,
                    traceless: true,
                }
            }
        })
        .collect()
}

/// `‖-i H_T vec(rho) - vec(L rho)‖` relative to `1 + ‖L rho‖`.
pub fn oracle_mismatch(model: &LindbladModel, rho: &CMatrix) -> f64 {
    let ht = build_effective_hamiltonian(model);
    let lhs = ht.matrix.scale(-I).mul_vec(rho.data());
    let rhs = superoperator_oracle(model, rho);
    let diff: Vec<C64> = lhs.iter().zip(rhs.data()).map(|(a, b)| a - b).collect();
    norm(&diff) / (1.0 + rhs.norm_fro())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, ops, re};

    fn amp_damp(gamma: f64) -> LindbladModel {
        LindbladModel::new(
            CMatrix::zeros(2, 2),
            vec![ops::sigma_minus().scale_real(gamma.sqrt())],
        )
        .unwrap()
    }

    #[test]
    fn vectorize_examples() {
        let half = CMatrix::identity(2).scale_real(0.5);
        let v = vectorize(&half).unwrap();
        assert_eq!(v.amplitudes(), &[re(0.5), re(0.0), re(0.0), re(0.5)]);
        assert!((v.norm_sqr() - 0.5).abs() < 1e-15);
        let e = vectorize(&ops::proj_e()).unwrap();
        assert_eq!(e.amplitudes(), &[re(1.0), re(0.0), re(0.0), re(0.0)]);
        assert!((e.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unvectorize_rejects_non_square_length() {
        assert!(matches!(
            CompositeState::new(vec![re(1.0); 3]),
            Err(Error::BadLength(3))
        ));
        assert!(matches!(
            unvectorize_slice(&[re(0.0); 5]),
            Err(Error::BadLength(5))
        ));
    }

    #[test]
    fn ancilla_conjugate_examples() {
        let real = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(ancilla_conjugate(&real), real);
        let o = CMatrix::from_vec(2, 2, vec![re(0.0), c(0.0, 1.0), re(0.0), re(0.0)]).unwrap();
        let oa = ancilla_conjugate(&o);
        assert_eq!(oa[(0, 1)], c(0.0, -1.0));
    }

    #[test]
    fn empty_model_gives_zero_generator() {
        let m = LindbladModel::new(CMatrix::zeros(2, 2), vec![]).unwrap();
        assert_eq!(build_effective_hamiltonian(&m).matrix, CMatrix::zeros(4, 4));
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let g = 0.8;
        let db = damping_basis(&amp_damp(g)).unwrap();
        let expect = [0.0, -g / 2.0, -g / 2.0, -g];
        for (l, e) in db.eigenvalues.iter().zip(expect) {
            assert!((l - re(e)).norm() < 1e-12, "{l} vs {e}");
        }
        // Zero mode is |g><g| up to scale.
        let a0 = &db.right_ops[0];
        let a0 = a0.scale(re(1.0) / a0.trace());
        assert!((&a0 - &ops::proj_g()).norm_fro() < 1e-12);
        for mu in 0..4 {
            for nu in 0..4 {
                let d = if mu == nu { 1.0 } else { 0.0 };
                assert!((db.pairing(mu, nu) - re(d)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn amplitude_damping_closed_form() {
        let g = 0.7;
        let m = amp_damp(g);
        let rho0 =
            CMatrix::from_vec(2, 2, vec![re(0.6), c(0.2, 0.3), c(0.2, -0.3), re(0.4)]).unwrap();
        for &t in &[0.0, 0.3, 1.0, 5.0] {
            let r = propagate(&m, &rho0, t).unwrap();
            assert!((r[(0, 0)].re - 0.6 * (-g * t).exp()).abs() < 1e-12);
            assert!((r[(0, 1)] - c(0.2, 0.3) * (-g * t / 2.0).exp()).norm() < 1e-12);
        }
        assert_eq!(propagate(&m, &rho0, 0.0).unwrap(), rho0);
    }

    #[test]
    fn amplitude_damping_steady_state() {
        let ss = steady_states(&amp_damp(1.3));
        assert_eq!(ss.len(), 1);
        assert!(!ss[0].traceless);
        assert!((&ss[0].rho - &ops::proj_g()).norm_fro() < 1e-10);
        let l = superoperator_oracle(&amp_damp(1.3), &ops::proj_g());
        assert!(l.norm_fro() < 1e-15);
    }

    #[test]
    fn dephasing_steady_manifold() {
        let m =
            LindbladModel::new(CMatrix::zeros(2, 2), vec![ops::sigma_z().scale_real(0.5)]).unwrap();
        let ss = steady_states(&m);
        assert_eq!(ss.len(), 2);
        assert_eq!(ss.iter().filter(|s| s.traceless).count(), 1);
        for s in &ss {
            // Diagonal: spanned by |e><e| and |g><g|.
            assert!(s.rho[(0, 1)].norm() < 1e-10 && s.rho[(1, 0)].norm() < 1e-10);
        }
        let tracefull = ss.iter().find(|s| !s.traceless).unwrap();
        assert!((tracefull.rho.trace() - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn unitary_steady_states_form_commutant() {
        let h = CMatrix::diag(&[re(1.0), re(1.0), re(-0.5)]);
        let m = LindbladModel::new(h.clone(), vec![]).unwrap();
        let ss = steady_states(&m);
        // Degeneracies (2, 1) give a commutant of dimension 4 + 1.
        assert_eq!(ss.len(), 5);
        for s in &ss {
            assert!(h.commutator(&s.rho).norm_fro() < 1e-10);
        }
    }

    #[test]
    fn model_validation() {
        let bad = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            LindbladModel::new(bad, vec![]),
            Err(Error::InvalidModel { .. })
        ));
        let e = LindbladModel::new(CMatrix::zeros(2, 2), vec![CMatrix::zeros(3, 3)]).unwrap_err();
        assert_eq!(e.field(), Some("lindblad_ops[0]"));
    }

    #[test]
    fn propagate_rejects_bad_input() {
        let m = amp_damp(1.0);
        assert!(propagate(&m, &ops::proj_e(), -1.0).is_err());
        assert!(propagate(&m, &CMatrix::identity(2), 1.0).is_err());
    }
}
