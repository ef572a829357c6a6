//! Dynamical invariants and geometric phases for time-dependent effective
//! Hamiltonians.
//!
//! An invariant obeys `i dI/dt = [H_T, I]`. Its eigenvectors `r_j(t)` carry the
//! coefficients of the state without mixing, and each coefficient picks up a
//! dynamical factor `exp(-i ∫ <l_j|H_T|r_j>)` and a geometric factor
//! `exp(i gamma_j)` with `gamma_j = i ∫ <l_j|d r_j>`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dot, norm, CMatrix, I};
use crate::trajectory::{continuity_gauge, derivative_weights, track_eigensystems, trapezoid};
use crate::trajectory::{EigenTrack, GeneratorTrajectory};

/// Largest accepted `‖H_T‖_F * h` for invariant propagation.
pub const MAX_STEP_PRODUCT: f64 = 0.1;
const CLOSURE_TOL: f64 = 1e-8;
const ZERO_OVERLAP_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct InvariantTrajectory {
    pub generator: GeneratorTrajectory,
    pub invariants: Vec<CMatrix>,
    pub eigen_tracks: Vec<EigenTrack>,
    /// Largest interior defect of the invariant equation, relative to
    /// `max‖H_T‖ * max‖I‖`.
    pub defect: f64,
}

impl InvariantTrajectory {
    pub fn times(&self) -> &[f64] {
        self.generator.times()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub track_index: usize,
    /// `i ∫ <l|d r>`; complex in general for open systems.
    pub geometric: C64,
    /// Exponent `-i ∫ <l|H_T|r> dt` of the dynamical factor.
    pub dynamical: C64,
    /// `arg <l(0)|r(T)>` in the gauge used for `geometric`.
    pub noncyclic_correction: f64,
}

impl PhaseResult {
    /// `geometric + noncyclic_correction`.
    pub fn total_geometric(&self) -> C64 {
        self.geometric + self.noncyclic_correction
    }
}

/// `I(0) = H_T(0)`.
pub fn default_initial_invariant(gen: &GeneratorTrajectory) -> CMatrix {
    gen.matrices()[0].clone()
}

fn commutator_rhs(h: &CMatrix, inv: &CMatrix) -> CMatrix {
    h.commutator(inv).scale(-I)
}

/// Integrates `dI/dt = -i[H_T(t), I]` with classical RK4 on the generator grid,
/// using `(H_i + H_{i+1}) / 2` at the step midpoint.
pub fn propagate_invariant(gen: &GeneratorTrajectory, i0: &CMatrix) -> Result<InvariantTrajectory> {
    let n = gen.dim();
    if i0.rows() != n || i0.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "initial invariant is {}x{}, generator is {n}x{n}",
            i0.rows(),
            i0.cols()
        )));
    }
    if !i0.is_finite() {
        return Err(Error::NonFinite);
    }
    let times = gen.times();
    let mats = gen.matrices();
    for i in 0..times.len().saturating_sub(1) {
        let h = times[i + 1] - times[i];
        let product = mats[i].norm_fro().max(mats[i + 1].norm_fro()) * h;
        if product > MAX_STEP_PRODUCT {
            return Err(Error::StepTooCoarse {
                product,
                limit: MAX_STEP_PRODUCT,
            });
        }
    }
    let mut invariants = Vec::with_capacity(times.len());
    invariants.push(i0.clone());
    for i in 0..times.len().saturating_sub(1) {
        let h = times[i + 1] - times[i];
        let cur = &invariants[i];
        let hm = gen.midpoint(i);
        let k1 = commutator_rhs(&mats[i], cur);
        let k2 = commutator_rhs(&hm, &(cur + &k1.scale_real(h / 2.0)));
        let k3 = commutator_rhs(&hm, &(cur + &k2.scale_real(h / 2.0)));
        let k4 = commutator_rhs(&mats[i + 1], &(cur + &k3.scale_real(h)));
        let incr = &(&(&k1 + &k2.scale_real(2.0)) + &k3.scale_real(2.0)) + &k4;
        invariants.push(cur + &incr.scale_real(h / 6.0));
    }
    let defect = invariant_defect(gen, &invariants);
    let eigen_tracks = track_eigensystems(&invariants)?;
    Ok(InvariantTrajectory {
        generator: gen.clone(),
        invariants,
        eigen_tracks,
        defect,
    })
}

/// `max_i ‖i (I_{i+1} - I_{i-1}) - ∫ [H_T, I] dt‖ / (t_{i+1} - t_{i-1})` over interior
/// points, the integral by Simpson's rule on the three samples.
pub fn invariant_defect(gen: &GeneratorTrajectory, invariants: &[CMatrix]) -> f64 {
    let t = gen.times();
    let h = gen.matrices();
    if t.len() < 3 {
        return 0.0;
    }
    let hmax = h.iter().map(CMatrix::norm_fro).fold(0.0, f64::max);
    let imax = invariants.iter().map(CMatrix::norm_fro).fold(0.0, f64::max);
    let scale = (hmax * imax).max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 1..t.len() - 1 {
        let h1 = t[i] - t[i - 1];
        let h2 = t[i + 1] - t[i];
        let s = h1 + h2;
        let w0 = s / 6.0 * (2.0 - h2 / h1);
        let w1 = s / 6.0 * s * s / (h1 * h2);
        let w2 = s / 6.0 * (2.0 - h1 / h2);
        let integral = &(&h[i - 1].commutator(&invariants[i - 1]).scale_real(w0)
            + &h[i].commutator(&invariants[i]).scale_real(w1))
            + &h[i + 1].commutator(&invariants[i + 1]).scale_real(w2);
        let lhs = (&invariants[i + 1] - &invariants[i - 1]).scale(I);
        worst = worst.max((&lhs - &integral).norm_fro() / s / scale);
    }
    worst
}

fn track<'a>(tracks: &'a [EigenTrack], j: usize) -> Result<&'a EigenTrack> {
    let tr = tracks.get(j).ok_or(Error::TrackOutOfRange(j))?;
    if tr.degenerate {
        return Err(Error::DegenerateTrack(j));
    }
    Ok(tr)
}

/// `∫ <l|d r/dt> dt` by three-point differences and the trapezoid rule.
fn connection_integral(times: &[f64], right: &[Vec<C64>], left: &[Vec<C64>]) -> C64 {
    let n = right[0].len();
    let integrand: Vec<C64> = (0..times.len())
        .map(|i| {
            let mut d = vec![C64::new(0.0, 0.0); n];
            for (k, w) in derivative_weights(times, i) {
                for (dz, rz) in d.iter_mut().zip(&right[k]) {
                    *dz += rz * w;
                }
            }
            dot(&left[i], &d)
        })
        .collect();
    trapezoid(times, &integrand)
}

/// `-i ∫ <l|M|r> dt`.
fn dynamical_exponent(
    times: &[f64],
    mats: &[CMatrix],
    right: &[Vec<C64>],
    left: &[Vec<C64>],
) -> C64 {
    let vals: Vec<C64> = (0..times.len())
        .map(|i| dot(&left[i], &mats[i].mul_vec(&right[i])))
        .collect();
    -I * trapezoid(times, &vals)
}

struct Gauged {
    right: Vec<Vec<C64>>,
    left: Vec<Vec<C64>>,
    /// `arg <l(0)|r(T)>` in the continuity gauge.
    chi: f64,
    closes: bool,
}

fn gauge_fix(tr: &EigenTrack) -> Result<Gauged> {
    let mut right = tr.right.clone();
    let mut left = tr.left.clone();
    continuity_gauge(&mut right, &mut left)?;
    let last = right.len() - 1;
    let ov = dot(&left[0], &right[last]);
    let rel = ov.norm() / (norm(&left[0]) * norm(&right[last]));
    if rel < ZERO_OVERLAP_TOL {
        return Err(Error::ZeroOverlap(last));
    }
    let proj = crate::numerics::inner(&right[0], &right[last]);
    let resid: f64 = right[last]
        .iter()
        .zip(&right[0])
        .map(|(a, b)| (a - proj * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(Gauged {
        right,
        left,
        chi: ov.arg(),
        closes: resid <= CLOSURE_TOL,
    })
}

fn phase_on_track(
    times: &[f64],
    mats: &[CMatrix],
    tr: &EigenTrack,
    j: usize,
    cyclic: bool,
) -> Result<PhaseResult> {
    let g = gauge_fix(tr)?;
    let integral = I * connection_integral(times, &g.right, &g.left);
    let dynamical = dynamical_exponent(times, mats, &g.right, &g.left);
    // Unwinding the closure phase linearly in time gives a single-valued gauge
    // whose connection integral is shifted by exactly chi.
    let (geometric, noncyclic_correction) = if cyclic || g.closes {
        (integral + g.chi, 0.0)
    } else {
        (integral, g.chi)
    };
    Ok(PhaseResult {
        track_index: j,
        geometric,
        dynamical,
        noncyclic_correction,
    })
}

/// Geometric phase `i ∫ <l_j|d r_j>` of a closed invariant track, evaluated in
/// the single-valued gauge obtained by unwinding the closure phase.
pub fn geometric_phase_cyclic(traj: &InvariantTrajectory, j: usize) -> Result<PhaseResult> {
    let tr = track(&traj.eigen_tracks, j)?;
    phase_on_track(traj.times(), traj.generator.matrices(), tr, j, true)
}

/// Open-path phase: the connection integral plus `arg <l_j(0)|r_j(T)>`.
pub fn geometric_phase_noncyclic(traj: &InvariantTrajectory, j: usize) -> Result<PhaseResult> {
    let tr = track(&traj.eigen_tracks, j)?;
    phase_on_track(traj.times(), traj.generator.matrices(), tr, j, false)
}

/// Phase along the instantaneous eigen-tracks of the generator itself.
pub fn geometric_phase_adiabatic(gen: &GeneratorTrajectory, j: usize) -> Result<PhaseResult> {
    let tracks = track_eigensystems(gen.matrices())?;
    let tr = track(&tracks, j)?;
    phase_on_track(gen.times(), gen.matrices(), tr, j, true)
}

/// Phase from user-supplied tracks on a time grid.
pub fn geometric_phase_of_track(
    times: &[f64],
    mats: &[CMatrix],
    tr: &EigenTrack,
    cyclic: bool,
) -> Result<PhaseResult> {
    if tr.degenerate {
        return Err(Error::DegenerateTrack(0));
    }
    phase_on_track(times, mats, tr, 0, cyclic)
}
