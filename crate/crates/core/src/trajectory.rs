//! Sampled time-dependent generators and gauge-fixed eigen-tracks.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{dot, eig_full, norm, CMatrix};

/// Generator samples `M(t_i)` on a strictly increasing time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorTrajectory {
    times: Vec<f64>,
    matrices: Vec<CMatrix>,
    uniform_step: Option<f64>,
}

impl GeneratorTrajectory {
    pub fn new(times: Vec<f64>, matrices: Vec<CMatrix>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if times.len() != matrices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} matrices",
                times.len(),
                matrices.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("times", "non-finite time"));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "times",
                format!("not strictly increasing at index {}", i + 1),
            ));
        }
        let n = matrices[0].rows();
        for (i, m) in matrices.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::invalid(
                    format!("matrices[{i}]"),
                    format!("expected {n}x{n}, got {}x{}", m.rows(), m.cols()),
                ));
            }
            if !m.is_finite() {
                return Err(Error::invalid(format!("matrices[{i}]"), "non-finite entry"));
            }
        }
        let uniform_step = uniform_step(&times);
        Ok(GeneratorTrajectory {
            times,
            matrices,
            uniform_step,
        })
    }

    /// Samples `f` on `t_i = t0 + i (t1 - t0) / steps`, `i = 0..=steps`.
    pub fn from_fn(
        t0: f64,
        t1: f64,
        steps: usize,
        mut f: impl FnMut(f64) -> CMatrix,
    ) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Precondition("steps must be >= 1".into()));
        }
        let times = uniform_grid(t0, t1, steps);
        let matrices = times.iter().map(|&t| f(t)).collect();
        GeneratorTrajectory::new(times, matrices)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].rows()
    }

    pub fn uniform_step(&self) -> Option<f64> {
        self.uniform_step
    }

    /// Midpoint sample `(M_i + M_{i+1}) / 2` for step `i`.
    pub fn midpoint(&self, i: usize) -> CMatrix {
        (&self.matrices[i] + &self.matrices[i + 1]).scale_real(0.5)
    }

    /// Three-point finite-difference estimate of `dM/dt` at grid index `i`.
    pub fn derivative(&self, i: usize) -> CMatrix {
        // The weights sum to zero, so differences against M_i give an exact
        // zero for constant samples.
        let w = derivative_weights(&self.times, i);
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for (idx, c) in w {
            if idx != i {
                out += &(&self.matrices[idx] - &self.matrices[i]).scale_real(c);
            }
        }
        out
    }
}

pub(crate) fn uniform_grid(t0: f64, t1: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| t0 + (t1 - t0) * i as f64 / steps as f64)
        .collect()
}

fn uniform_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let h = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let ok = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
    ok.then_some(h)
}

/// Weights of the three-point Lagrange derivative at `times[i]`: central in the
/// interior, one-sided second order at the ends, two-point for two samples.
pub(crate) fn derivative_weights(times: &[f64], i: usize) -> Vec<(usize, f64)> {
    let n = times.len();
    match n {
        0 | 1 => vec![],
        2 => {
            let h = times[1] - times[0];
            vec![(0, -1.0 / h), (1, 1.0 / h)]
        }
        _ => {
            let (a, centre) = if i == 0 {
                (0, 0)
            } else if i == n - 1 {
                (n - 3, 2)
            } else {
                (i - 1, 1)
            };
            let h1 = times[a + 1] - times[a];
            let h2 = times[a + 2] - times[a + 1];
            let s = h1 + h2;
            let w = match centre {
                0 => [-(2.0 * h1 + h2) / (h1 * s), s / (h1 * h2), -h1 / (h2 * s)],
                1 => [-h2 / (h1 * s), (h2 - h1) / (h1 * h2), h1 / (h2 * s)],
                _ => [h2 / (h1 * s), -s / (h1 * h2), (h1 + 2.0 * h2) / (h2 * s)],
            };
            vec![(a, w[0]), (a + 1, w[1]), (a + 2, w[2])]
        }
    }
}

/// Trapezoid rule.
pub(crate) fn trapezoid(times: &[f64], values: &[C64]) -> C64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (v[0] + v[1]) * (0.5 * (t[1] - t[0])))
        .sum()
}

/// One eigenvalue branch followed across the grid.
#[derive(Clone, Debug)]
pub struct EigenTrack {
    pub values: Vec<C64>,
    /// Right vectors `r_j(t_i)`.
    pub right: Vec<Vec<C64>>,
    /// Left vectors `l_j(t_i)` with `l . r = 1`.
    pub left: Vec<Vec<C64>>,
    /// True if the branch shares its eigenvalue cluster at any grid point.
    pub degenerate: bool,
}

/// Eigen-decomposes every sample and links eigenvectors across neighbouring
/// samples by largest expansion coefficient, then applies [`continuity_gauge`].
pub fn track_eigensystems(matrices: &[CMatrix]) -> Result<Vec<EigenTrack>> {
    if matrices.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let first = eig_full(&matrices[0])?;
    let n = first.len();
    let mut tracks: Vec<EigenTrack> = (0..n)
        .map(|j| EigenTrack {
            values: vec![first.eigenvalues[j]],
            right: vec![first.right(j)],
            left: vec![first.left(j)],
            degenerate: first.clusters[first.cluster_of(j)].len() > 1,
        })
        .collect();
    for m in &matrices[1..] {
        let es = eig_full(m)?;
        let mut scores: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
        for (j, tr) in tracks.iter().enumerate() {
            let prev = tr.right.last().expect("nonempty");
            for k in 0..n {
                scores.push((dot(&es.left(k), prev).norm(), j, k));
            }
        }
        scores.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut assigned = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for (_, j, k) in scores {
            if assigned[j] == usize::MAX && !used[k] {
                assigned[j] = k;
                used[k] = true;
            }
        }
        for (j, tr) in tracks.iter_mut().enumerate() {
            let k = assigned[j];
            tr.values.push(es.eigenvalues[k]);
            tr.right.push(es.right(k));
            tr.left.push(es.left(k));
            tr.degenerate |= es.clusters[es.cluster_of(k)].len() > 1;
        }
    }
    for tr in tracks.iter_mut() {
        // Vectors inside a degenerate cluster are not uniquely linked; such
        // tracks are flagged and left ungauged when the gauge is undefined.
        match continuity_gauge(&mut tr.right, &mut tr.left) {
            Err(_) if tr.degenerate => {}
            other => other?,
        }
    }
    Ok(tracks)
}

/// Rescales each pair so that `‖r_i‖ = 1`, `l_i . r_i = 1` and
/// `l_{i-1} . r_i` is real positive.
pub fn continuity_gauge(right: &mut [Vec<C64>], left: &mut [Vec<C64>]) -> Result<()> {
    for (i, (r, l)) in right.iter_mut().zip(left.iter_mut()).enumerate() {
        let rn = norm(r);
        if rn == 0.0 {
            return Err(Error::ZeroOverlap(i));
        }
        for z in r.iter_mut() {
            *z /= rn;
        }
        let p = dot(l, r);
        if p.norm() == 0.0 {
            return Err(Error::ZeroOverlap(i));
        }
        for z in l.iter_mut() {
            *z /= p;
        }
    }
    for i in 1..right.len() {
        let ov = dot(&left[i - 1], &right[i]);
        if ov.norm() == 0.0 {
            return Err(Error::ZeroOverlap(i));
        }
        let ph = ov.conj() / ov.norm();
        for z in right[i].iter_mut() {
            *z *= ph;
        }
        for z in left[i].iter_mut() {
            *z /= ph;
        }
    }
    Ok(())
}
