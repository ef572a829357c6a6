//! Non-Hermitian eigendecomposition with biorthonormal left eigenvectors.
//!
//! Eigenvalues come from Householder reduction to Hessenberg form followed by
//! single-shift complex QR. Eigenvalues closer than `1e-8 |A|_F` are grouped
//! into clusters; each cluster's right and left eigenspaces are null spaces of
//! `A - mu I` and its transpose, found by complete-pivoting elimination.

use std::cmp::Ordering;
use std::ops::Range;

use num_complex::Complex64 as C64;

use super::svd::fix_phase;
use super::{dot, inner, norm, singular_values, solve, CMatrix};
use crate::error::{Error, Result};

/// Relative tolerance for grouping eigenvalues into degenerate clusters.
pub const TOL_CLUSTER: f64 = 1e-8;
/// Largest trailing pivot (relative) accepted as rank deficiency.
const TOL_RANK: f64 = 1e-6;
/// Smallest accepted cosine between a cluster's left and right spaces.
const TOL_GRAM: f64 = 1e-7;
const QR_ITERS_PER_EIGENVALUE: usize = 60;

#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<C64>,
    /// Unit-norm right eigenvectors as columns.
    pub right_vectors: CMatrix,
    /// Left eigenvectors as rows, scaled so that `L R = I`.
    pub left_vectors: CMatrix,
    /// Largest relative residual over all right and left pairs.
    pub residual_norm: f64,
    /// Index ranges of degenerate clusters, in eigenvalue order.
    pub clusters: Vec<Range<usize>>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn right(&self, i: usize) -> Vec<C64> {
        self.right_vectors.column(i)
    }

    pub fn left(&self, i: usize) -> Vec<C64> {
        self.left_vectors.row(i)
    }

    pub fn cluster_of(&self, i: usize) -> usize {
        self.clusters
            .iter()
            .position(|r| r.contains(&i))
            .expect("index inside some cluster")
    }

    /// Mean eigenvalue of a cluster.
    pub fn cluster_value(&self, c: usize) -> C64 {
        let r = self.clusters[c].clone();
        let m = r.len() as f64;
        self.eigenvalues[r].iter().sum::<C64>() / m
    }

    /// Right vectors of cluster `c` as columns.
    pub fn cluster_right(&self, c: usize) -> CMatrix {
        let r = self.clusters[c].clone();
        self.right_vectors
            .block(0, r.start, self.right_vectors.rows(), r.len())
    }

    /// Left vectors of cluster `c` as rows.
    pub fn cluster_left(&self, c: usize) -> CMatrix {
        let r = self.clusters[c].clone();
        self.left_vectors
            .block(r.start, 0, r.len(), self.left_vectors.cols())
    }

    /// Spectral projector `R_c L_c` of cluster `c`.
    pub fn projector(&self, c: usize) -> CMatrix {
        &self.cluster_right(c) * &self.cluster_left(c)
    }

    /// `sum_nu lambda_nu r_nu l_nu`.
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::diag(&self.eigenvalues);
        &(&self.right_vectors * &d) * &self.left_vectors
    }

    /// `max |l_nu . r_mu - delta|`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let g = &self.left_vectors * &self.right_vectors;
        (&g - &CMatrix::identity(g.rows())).max_abs()
    }
}

pub fn eig_full(a: &CMatrix) -> Result<EigenSystem> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenSystem {
            eigenvalues: vec![],
            right_vectors: CMatrix::zeros(0, 0),
            left_vectors: CMatrix::zeros(0, 0),
            residual_norm: 0.0,
            clusters: vec![],
        });
    }
    let anorm = a.norm_fro();
    let values = hessenberg_qr_eigenvalues(hessenberg(a))?;
    let groups = cluster_values(&values, TOL_CLUSTER * anorm);

    let at = a.transpose();
    let mut blocks: Vec<ClusterBlock> = Vec::with_capacity(groups.len());
    for g in &groups {
        let m = g.len();
        let mu = g.iter().map(|&i| values[i]).sum::<C64>() / m as f64;
        let mut shifted = a.clone();
        shifted.add_identity(-mu);
        let mut right = eigenspace(&shifted, m, anorm)?;
        let mut shifted_t = at.clone();
        shifted_t.add_identity(-mu);
        let left = eigenspace(&shifted_t, m, anorm)?;
        for r in right.iter_mut() {
            fix_phase(r);
        }

        let gram = CMatrix::from_fn(m, m, |i, j| dot(&left[i], &right[j]));
        let smin = singular_values(&gram).last().copied().unwrap_or(0.0);
        if smin < TOL_GRAM {
            return Err(Error::NonDiagonalizable(format!(
                "left/right eigenspaces nearly orthogonal near {mu} (cosine {smin:.2e})"
            )));
        }
        let lmat = CMatrix::from_rows(&left)?;
        let lmat = solve(&gram, &lmat)?;
        let left: Vec<Vec<C64>> = (0..m).map(|i| lmat.row(i)).collect();

        let mut pairs: Vec<(C64, Vec<C64>, Vec<C64>)> = right
            .into_iter()
            .zip(left)
            .map(|(r, l)| {
                let lam = dot(&l, &a.mul_vec(&r));
                (lam, r, l)
            })
            .collect();
        pairs.sort_by(|x, y| cmp_vectors(&x.1, &y.1));
        blocks.push(ClusterBlock { mu, pairs });
    }

    order_clusters(&mut blocks, TOL_CLUSTER * anorm);

    let mut eigenvalues = Vec::with_capacity(n);
    let mut rcols = Vec::with_capacity(n);
    let mut lrows = Vec::with_capacity(n);
    let mut clusters = Vec::with_capacity(blocks.len());
    for b in blocks {
        let start = eigenvalues.len();
        for (lam, r, l) in b.pairs {
            eigenvalues.push(lam);
            rcols.push(r);
            lrows.push(l);
        }
        clusters.push(start..eigenvalues.len());
    }
    let right_vectors = CMatrix::from_columns(n, &rcols);
    let left_raw = CMatrix::from_rows(&lrows)?;
    // Global correction so that L R = I to working precision across clusters.
    let g = &left_raw * &right_vectors;
    let left_vectors = solve(&g, &left_raw).map_err(|_| {
        Error::NonDiagonalizable("eigenvector matrix is numerically singular".into())
    })?;

    let mut residual: f64 = 0.0;
    for i in 0..n {
        let r = right_vectors.column(i);
        let l = left_vectors.row(i);
        let lam = eigenvalues[i];
        let ar = a.mul_vec(&r);
        let rr: Vec<C64> = ar.iter().zip(&r).map(|(x, y)| x - lam * y).collect();
        let la = a.vec_mul(&l);
        let rl: Vec<C64> = la.iter().zip(&l).map(|(x, y)| x - lam * y).collect();
        residual = residual
            .max(norm(&rr) / norm(&r).max(f64::MIN_POSITIVE))
            .max(norm(&rl) / norm(&l).max(f64::MIN_POSITIVE));
    }

    Ok(EigenSystem {
        eigenvalues,
        right_vectors,
        left_vectors,
        residual_norm: residual,
        clusters,
    })
}

struct ClusterBlock {
    mu: C64,
    pairs: Vec<(C64, Vec<C64>, Vec<C64>)>,
}

fn cmp_vectors(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Real part descending; clusters whose real parts chain within `tol` form a
/// band that is then ordered by imaginary part descending.
fn order_clusters(blocks: &mut [ClusterBlock], tol: f64) {
    blocks.sort_by(|x, y| y.mu.re.total_cmp(&x.mu.re));
    let mut start = 0;
    while start < blocks.len() {
        let mut end = start + 1;
        while end < blocks.len() && blocks[end - 1].mu.re - blocks[end].mu.re <= tol {
            end += 1;
        }
        blocks[start..end].sort_by(|x, y| y.mu.im.total_cmp(&x.mu.im));
        start = end;
    }
}

/// Single-linkage grouping; groups are returned as sorted index lists.
fn cluster_values(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let next = p[j];
            p[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_to_group[r] == usize::MAX {
            root_to_group[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_to_group[r]].push(i);
    }
    groups
}

/// Orthonormal basis of the `m`-dimensional null space of `b`, or
/// `NonDiagonalizable` if the numerical nullity is smaller than `m`.
fn eigenspace(b: &CMatrix, m: usize, anorm: f64) -> Result<Vec<Vec<C64>>> {
    let n = b.rows();
    let mut u = b.clone();
    let mut colperm: Vec<usize> = (0..n).collect();
    let rank = n - m;
    let thresh = TOL_RANK * anorm;
    for k in 0..rank {
        let (mut pi, mut pj, mut pmax) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = u[(i, j)].norm();
                if v > pmax {
                    pmax = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        if pmax <= f64::EPSILON * anorm {
            return Err(Error::NonDiagonalizable(format!(
                "null space larger than eigenvalue multiplicity {m}"
            )));
        }
        if pi != k {
            for j in 0..n {
                let t = u[(k, j)];
                u[(k, j)] = u[(pi, j)];
                u[(pi, j)] = t;
            }
        }
        if pj != k {
            for i in 0..n {
                let t = u[(i, k)];
                u[(i, k)] = u[(i, pj)];
                u[(i, pj)] = t;
            }
            colperm.swap(k, pj);
        }
        let piv = u[(k, k)];
        for i in k + 1..n {
            let f = u[(i, k)] / piv;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            u[(i, k)] = C64::new(0.0, 0.0);
            for j in k + 1..n {
                let t = u[(k, j)];
                u[(i, j)] -= f * t;
            }
        }
    }
    let mut trailing: f64 = 0.0;
    for i in rank..n {
        for j in rank..n {
            trailing = trailing.max(u[(i, j)].norm());
        }
    }
    if trailing > thresh {
        return Err(Error::NonDiagonalizable(format!(
            "geometric multiplicity below algebraic multiplicity {m} (residual pivot {trailing:.2e})"
        )));
    }

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
    for f in rank..n {
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[f] = C64::new(1.0, 0.0);
        for k in (0..rank).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in k + 1..n {
                s += u[(k, j)] * x[j];
            }
            x[k] = -s / u[(k, k)];
        }
        let mut v = vec![C64::new(0.0, 0.0); n];
        for (pos, &orig) in colperm.iter().enumerate() {
            v[orig] = x[pos];
        }
        basis.push(v);
    }
    for _ in 0..2 {
        for i in 0..basis.len() {
            for j in 0..i {
                let p = inner(&basis[j], &basis[i]);
                let bj = basis[j].clone();
                for (x, y) in basis[i].iter_mut().zip(&bj) {
                    *x -= p * y;
                }
            }
            let nv = norm(&basis[i]);
            for x in basis[i].iter_mut() {
                *x /= nv;
            }
        }
    }
    Ok(basis)
}

/// Householder reduction to upper Hessenberg form (similarity only).
fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xn = norm(&x);
        if xn == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * xn;
        let mut v = x;
        v[0] -= alpha;
        let vn = norm(&v);
        if vn == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vn;
        }
        // Left: rows k+1.. of H  <- (I - 2 v v^H) H
        for j in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + idx, j)];
            }
            for (idx, vi) in v.iter().enumerate() {
                h[(k + 1 + idx, j)] -= vi * s * 2.0;
            }
        }
        // Right: columns k+1.. of H  <- H (I - 2 v v^H)
        for i in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for (idx, vi) in v.iter().enumerate() {
                s += h[(i, k + 1 + idx)] * vi;
            }
            for (idx, vi) in v.iter().enumerate() {
                h[(i, k + 1 + idx)] -= s * vi.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    h
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, C64::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn hessenberg_qr_eigenvalues(mut h: CMatrix) -> Result<Vec<C64>> {
    let n = h.rows();
    let eps = f64::EPSILON;
    let hnorm = h.norm_fro();
    let max_iter = QR_ITERS_PER_EIGENVALUE * n.max(1);
    let mut total = 0usize;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut rots: Vec<(f64, C64)> = Vec::with_capacity(n);
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter {
            return Err(Error::NoConvergence(total));
        }

        let mu = if iter % 11 == 0 {
            h[(hi, hi)] + h[(hi, hi - 1)].norm() * 1.5
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let m1 = (a + d) * 0.5 + disc;
            let m2 = (a + d) * 0.5 - disc;
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        rots.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = C64::new(0.0, 0.0);
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = l + idx;
            let top = (k + 2).min(hi);
            for i in l..=top {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok((0..n).map(|i| h[(i, i)]).collect())
}
