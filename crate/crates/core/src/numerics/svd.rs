//! One-sided complex Jacobi SVD.

use num_complex::Complex64 as C64;

use super::{inner, norm, CMatrix};

const MAX_SWEEPS: usize = 80;

/// `A V = U diag(sigma)` with orthonormal `V`; columns unsorted.
#[derive(Clone, Debug)]
pub struct Svd {
    pub sigma: Vec<f64>,
    /// `A V`, column `j` has norm `sigma[j]`.
    pub w: CMatrix,
    pub v: CMatrix,
}

pub fn svd_jacobi(a: &CMatrix) -> Svd {
    let n = a.cols();
    let m = a.rows();
    let mut w: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = w[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&w[p], &w[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                for z in w[q].iter_mut() {
                    *z *= phase;
                }
                for z in v[q].iter_mut() {
                    *z *= phase;
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate(&mut w, p, q, cs, sn);
                rotate(&mut v, p, q, cs, sn);
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = w.iter().map(|col| norm(col)).collect();
    Svd {
        sigma,
        w: CMatrix::from_columns(m, &w),
        v: CMatrix::from_columns(n, &v),
    }
}

fn rotate(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(q);
    for (xp, xq) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let a = *xp;
        let b = *xq;
        *xp = a * c - b * s;
        *xq = a * s + b * c;
    }
}

/// Singular values in descending order.
pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s = svd_jacobi(a).sigma;
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Orthonormal basis of `{v : |A v| <= tol |A|_F}`. Vectors are ordered by
/// increasing singular value and phase-fixed so their largest entry is real
/// and positive.
pub fn null_space(a: &CMatrix, tol: f64) -> Vec<Vec<C64>> {
    let svd = svd_jacobi(a);
    let thresh = tol * a.norm_fro();
    let mut picked: Vec<(f64, Vec<C64>)> = svd
        .sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= thresh)
        .map(|(j, &s)| (s, svd.v.column(j)))
        .collect();
    picked.sort_by(|x, y| x.0.total_cmp(&y.0));
    picked
        .into_iter()
        .map(|(_, mut v)| {
            fix_phase(&mut v);
            v
        })
        .collect()
}

/// Rotates `v` so that its largest-magnitude entry (first on ties) is real positive.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut bmax = -1.0;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm();
        if m > bmax * (1.0 + 1e-12) {
            bmax = m;
            best = i;
        }
    }
    if bmax > 0.0 {
        let ph = (v[best] / bmax).conj();
        for z in v.iter_mut() {
            *z *= ph;
        }
        v[best] = C64::new(v[best].norm(), 0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, re};

    #[test]
    fn identity_has_trivial_null_space() {
        assert!(null_space(&CMatrix::identity(4), 1e-10).is_empty());
    }

    #[test]
    fn diag_zero_one_null_space_is_first_axis() {
        let ns = null_space(&CMatrix::diag(&[re(0.0), re(1.0)]), 1e-10);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0] - re(1.0)).norm() < 1e-14);
        assert!(ns[0][1].norm() < 1e-14);
    }

    #[test]
    fn singular_values_of_known_matrix() {
        let a = CMatrix::from_vec(2, 2, vec![re(3.0), c(0.0, 0.0), c(0.0, 4.0), re(5.0)]).unwrap();
        let s = singular_values(&a);
        // sigma1 * sigma2 = |det| = 15, sigma1^2 + sigma2^2 = 50
        assert!((s[0] * s[1] - 15.0).abs() < 1e-12);
        assert!((s[0] * s[0] + s[1] * s[1] - 50.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_complex() {
        let u = vec![c(1.0, 1.0), c(0.0, 2.0), re(-1.0)];
        let w = vec![re(2.0), c(1.0, -1.0), c(0.5, 0.5)];
        let a = CMatrix::outer(&u, &w);
        let ns = null_space(&a, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(norm(&a.mul_vec(v)) <= 1e-10 * a.norm_fro());
        }
        assert!(inner(&ns[0], &ns[1]).norm() < 1e-12);
    }
}
