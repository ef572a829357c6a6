//! Adiabaticity diagnostics for sampled non-Hermitian generators.
//!
//! The generator samples are block Hamiltonians `H(t)` with `i dPsi/dt = H Psi`.
//! Eigenvalue clusters are treated as blocks throughout, so degenerate
//! manifolds such as a multi-dimensional steady-state space are admissible.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::generalized::WaveFunctionVector;
use crate::numerics::{
    axpy, eig_full, expm, inner, norm, singular_values, CMatrix, EigenSystem, I,
};
use crate::trajectory::GeneratorTrajectory;

/// `Gamma = max_{m,n} |<L_m | dR_n/dt> / (lambda_m - lambda_n)|` at grid index `t_index`.
///
/// First-order perturbation theory gives `<L_m|dR_n> = L_m H' R_n / (lambda_n - lambda_m)`
/// for unit-norm `R_n` and `L_m . R_m = 1`, so each pair contributes
/// `|L_m H' R_n| / |lambda_m - lambda_n|^2`, with `H'` the three-point finite
/// difference of the samples. For clusters the pair value is the largest
/// singular value of the block `L_a H' R_b`; pairs inside one cluster are skipped.
pub fn adiabatic_gamma(gen: &GeneratorTrajectory, t_index: usize) -> Result<f64> {
    if t_index >= gen.len() {
        return Err(Error::Precondition(format!(
            "time index {t_index} outside grid of {} samples",
            gen.len()
        )));
    }
    if gen.len() < 2 {
        return Err(Error::Precondition(
            "Gamma needs at least two samples".into(),
        ));
    }
    let es = eig_full(&gen.matrices()[t_index])?;
    gamma_from_eigensystem(&es, &gen.derivative(t_index))
}

/// Gamma from an eigensystem of `H` and the derivative `dH/dt`.
///
/// Each cluster's right vectors are replaced by an orthonormal basis of their
/// span, with the left vectors transformed to stay dual. The result is then
/// independent of rescaling or mixing of eigenvectors inside a cluster.
pub fn gamma_from_eigensystem(es: &EigenSystem, dh: &CMatrix) -> Result<f64> {
    let nc = es.clusters.len();
    if nc < 2 {
        return Err(Error::AllDegenerate);
    }
    let (rights, lefts) = normalized_cluster_bases(es);
    let mut gamma: f64 = 0.0;
    for a in 0..nc {
        let la_dh = &lefts[a] * dh;
        for b in 0..nc {
            if a == b {
                continue;
            }
            let gap = (es.cluster_value(a) - es.cluster_value(b)).norm();
            let coupling = singular_values(&(&la_dh * &rights[b]))[0];
            gamma = gamma.max(coupling / (gap * gap));
        }
    }
    Ok(gamma)
}

/// Orthonormal right bases `Q_c` of each cluster with matching left blocks:
/// `R_c = Q_c T` gives `L'_c = T L_c`, so `L'_c Q_c = I`.
fn normalized_cluster_bases(es: &EigenSystem) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let mut rights = Vec::with_capacity(es.clusters.len());
    let mut lefts = Vec::with_capacity(es.clusters.len());
    for c in 0..es.clusters.len() {
        let r = es.cluster_right(c);
        let m = r.cols();
        let mut q: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut t = CMatrix::zeros(m, m);
        for j in 0..m {
            let mut v = r.column(j);
            for (i, qi) in q.iter().enumerate() {
                let p = inner(qi, &v);
                t[(i, j)] = p;
                axpy(-p, qi, &mut v);
            }
            let nrm = norm(&v);
            t[(j, j)] = C64::new(nrm, 0.0);
            q.push(v.into_iter().map(|z| z / nrm).collect());
        }
        rights.push(CMatrix::from_columns(r.rows(), &q));
        lefts.push(&t * &es.cluster_left(c));
    }
    (rights, lefts)
}

/// Kato generator `sum_{a != b} P_b H' P_a / (lambda_a - lambda_b)`.
///
/// Adding it to `-i H` transports every spectral subspace parallel to itself,
/// which is the adiabatic evolution without inter-cluster transitions.
pub fn kato_generator(es: &EigenSystem, dh: &CMatrix) -> CMatrix {
    let n = es.len();
    let nc = es.clusters.len();
    let rights: Vec<CMatrix> = (0..nc).map(|c| es.cluster_right(c)).collect();
    let lefts: Vec<CMatrix> = (0..nc).map(|c| es.cluster_left(c)).collect();
    let mut k = CMatrix::zeros(n, n);
    for a in 0..nc {
        let dh_ra = dh * &rights[a];
        for b in 0..nc {
            if a == b {
                continue;
            }
            let gap = es.cluster_value(a) - es.cluster_value(b);
            let inner = (&lefts[b] * &dh_ra).scale(C64::new(1.0, 0.0) / gap);
            k += &(&(&rights[b] * &inner) * &lefts[a]);
        }
    }
    k
}

/// Sampled evolution of a stacked wave-function vector.
#[derive(Clone, Debug)]
pub struct WaveFunctionTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveFunctionVector>,
    /// `max_i |Tr(t_i) - Tr(0)|` of the total trace `sum_k Tr rho_k`; not renormalized.
    pub trace_drift: f64,
}

impl WaveFunctionTrajectory {
    pub fn last(&self) -> &WaveFunctionVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

fn check_dims(gen: &GeneratorTrajectory, psi0: &WaveFunctionVector) -> Result<usize> {
    let k = psi0.components.len();
    let len: usize = psi0.components.iter().map(|c| c.amplitudes().len()).sum();
    if k == 0 || len != gen.dim() {
        return Err(Error::DimensionMismatch(format!(
            "wave-function vector of length {len} against generator of dimension {}",
            gen.dim()
        )));
    }
    Ok(k)
}

fn run(
    gen: &GeneratorTrajectory,
    psi0: &WaveFunctionVector,
    mut step: impl FnMut(usize) -> Result<CMatrix>,
) -> Result<WaveFunctionTrajectory> {
    let k = check_dims(gen, psi0)?;
    let tr0 = psi0.total_trace();
    let mut psi = psi0.stacked();
    let mut states = Vec::with_capacity(gen.len());
    states.push(psi0.clone());
    let mut drift: f64 = 0.0;
    for i in 0..gen.len() - 1 {
        psi = step(i)?.mul_vec(&psi);
        let w = WaveFunctionVector::from_stacked(&psi, k)?;
        drift = drift.max((w.total_trace() - tr0).norm());
        states.push(w);
    }
    Ok(WaveFunctionTrajectory {
        times: gen.times().to_vec(),
        states,
        trace_drift: drift,
    })
}

/// Reference evolution: each step applies `exp(-i h H_mid)` with the midpoint sample.
pub fn exact_propagate(
    gen: &GeneratorTrajectory,
    psi0: &WaveFunctionVector,
) -> Result<WaveFunctionTrajectory> {
    let times = gen.times();
    run(gen, psi0, |i| {
        let h = times[i + 1] - times[i];
        expm(&gen.midpoint(i).scale(-I * h))
    })
}

/// Adiabatic evolution: each step applies `exp(h (-i H_mid + K_mid))`, where
/// `K_mid` is the Kato generator at the midpoint with `H' = (H_{i+1} - H_i) / h`.
///
/// Each right-eigenvector coefficient then evolves by
/// `exp(-i int lambda) exp(-int <L|dR>)`, and coefficients inside a cluster
/// evolve jointly. The total trace is not renormalized; its drift is reported.
pub fn adiabatic_propagate(
    gen: &GeneratorTrajectory,
    psi0: &WaveFunctionVector,
) -> Result<WaveFunctionTrajectory> {
    let times = gen.times();
    let mats = gen.matrices();
    run(gen, psi0, |i| {
        let h = times[i + 1] - times[i];
        let mid = gen.midpoint(i);
        let dh = (&mats[i + 1] - &mats[i]).scale_real(1.0 / h);
        let es = eig_full(&mid)?;
        let gen_mid = &mid.scale(-I) + &kato_generator(&es, &dh);
        expm(&gen_mid.scale_real(h))
    })
}
