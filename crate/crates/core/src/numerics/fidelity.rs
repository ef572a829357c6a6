use super::{eigh, sqrtm_psd, CMatrix};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-8;
const POSITIVITY_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-8;

/// Checks that `rho` is a density matrix up to the fidelity tolerances.
pub fn validate_state(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::NotAState(format!(
            "{}x{} is not square",
            rho.rows(),
            rho.cols()
        )));
    }
    if !rho.is_finite() {
        return Err(Error::NotAState("non-finite entries".into()));
    }
    let herm = rho.hermitian_defect();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotAState(format!("Hermiticity defect {herm:.3e}")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::NotAState(format!("trace {tr}")));
    }
    let min = eigh(rho)?.values[0];
    if min < -POSITIVITY_TOL {
        return Err(Error::NotAState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    validate_state(rho)?;
    validate_state(sigma)?;
    if rho.rows() != sigma.rows() {
        return Err(Error::DimensionMismatch(
            "fidelity of differently sized states".into(),
        ));
    }
    let sr = sqrtm_psd(rho)?;
    let inner = &(&sr * sigma) * &sr;
    let f: f64 = eigh(&inner)?
        .values
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum();
    Ok(f.min(1.0 + 1e-9))
}
