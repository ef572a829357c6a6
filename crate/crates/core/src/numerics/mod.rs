//! Dense complex linear algebra for small matrices.

mod eig;
mod expm;
mod fidelity;
mod hermitian;
mod lu;
mod matrix;
mod svd;

pub use eig::{eig_full, EigenSystem};
pub use expm::expm;
pub use fidelity::{fidelity, validate_state};
pub use hermitian::{eigh, sqrtm_psd, HermitianEigen};
pub use lu::{inverse, solve, Lu};
pub use matrix::{kron, CMatrix};
pub use svd::{null_space, singular_values, svd_jacobi, Svd};

pub use num_complex::Complex64 as C64;

/// Complex unit `i`.
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Bilinear product `sum a_i b_i` (no conjugation).
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Sesquilinear product `sum conj(a_i) b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale_vec(v: &[C64], s: C64) -> Vec<C64> {
    v.iter().map(|z| z * s).collect()
}

pub fn sub_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Pauli-type operators in the basis `|e> = 0`, `|g> = 1`.
pub mod ops {
    use super::CMatrix;

    /// `|e><g|`
    pub fn sigma_plus() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0])
    }

    /// `|g><e|`
    pub fn sigma_minus() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0])
    }

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn sigma_y() -> CMatrix {
        CMatrix::from_vec(
            2,
            2,
            vec![
                super::re(0.0),
                super::c(0.0, -1.0),
                super::c(0.0, 1.0),
                super::re(0.0),
            ],
        )
        .expect("2x2")
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    /// `|e><e|`
    pub fn proj_e() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0])
    }

    /// `|g><g|`
    pub fn proj_g() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0])
    }
}
