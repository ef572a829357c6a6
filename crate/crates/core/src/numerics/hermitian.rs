//! Cyclic complex Jacobi for Hermitian matrices.

use num_complex::Complex64 as C64;

use super::CMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues with orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Eigen-decomposition of the Hermitian part of `a`.
pub fn eigh(a: &CMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(
            "eigh needs a square matrix".into(),
        ));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.norm_fro();
    let mut converged = n < 2 || scale == 0.0;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g <= 1e-300 {
                    continue;
                }
                let e = apq / g; // e^{i phi}
                let ec = e.conj();
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // Columns: p' = c p - s e^{-i phi} q, q' = s p + c e^{-i phi} q
                for i in 0..n {
                    let xp = m[(i, p)];
                    let xq = m[(i, q)];
                    m[(i, p)] = xp * c - xq * ec * s;
                    m[(i, q)] = xp * s + xq * ec * c;
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * ec * s;
                    v[(i, q)] = vp * s + vq * ec * c;
                }
                for j in 0..n {
                    let xp = m[(p, j)];
                    let xq = m[(q, j)];
                    m[(p, j)] = xp * c - xq * e * s;
                    m[(q, j)] = xp * s + xq * e * c;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(x, x)].re.total_cmp(&m[(y, y)].re));
    let values = order.iter().map(|&k| m[(k, k)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Principal square root of a Hermitian PSD matrix, negative eigenvalues clamped to zero.
pub fn sqrtm_psd(a: &CMatrix) -> Result<CMatrix> {
    let HermitianEigen { values, vectors } = eigh(a)?;
    let n = a.rows();
    let roots: Vec<f64> = values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    Ok(CMatrix::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| vectors[(i, k)] * roots[k] * vectors[(j, k)].conj())
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, re};

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        g.hermitian_part()
    }

    #[test]
    fn reconstructs_random_hermitian() {
        for n in 1..8 {
            let a = random_hermitian(n, n as u64 + 3);
            let HermitianEigen { values, vectors } = eigh(&a).unwrap();
            let d = CMatrix::diag(&values.iter().map(|&x| re(x)).collect::<Vec<_>>());
            let rec = &(&vectors * &d) * &vectors.adjoint();
            assert!((&rec - &a).norm_fro() < 1e-12, "n={n}");
            let orth = &vectors.adjoint() * &vectors;
            assert!((&orth - &CMatrix::identity(n)).norm_fro() < 1e-12);
            assert!(values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn pauli_y_spectrum() {
        let sy =
            CMatrix::from_vec(2, 2, vec![re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)]).unwrap();
        let e = eigh(&sy).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sqrt_squares_back() {
        let g = random_hermitian(4, 11);
        let psd = &g * &g;
        let r = sqrtm_psd(&psd).unwrap();
        assert!((&(&r * &r) - &psd).norm_fro() < 1e-12);
    }
}
