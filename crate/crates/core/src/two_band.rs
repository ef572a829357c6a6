//! Dissipative qubit coupled to an environment with two energy bands.
//!
//! Component 0 holds the qubit while the environment sits in the lower band,
//! component 1 while it sits in the upper band. Transfers are
//! `R_01 = sqrt(gamma1) sigma+` and `R_10 = sqrt(gamma2) sigma-`, with no
//! coherent Hamiltonian. Basis order is `|e> = 0`, `|g> = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generalized::{build_block_hamiltonian, GeneralizedLindbladModel};
use crate::numerics::{ops, CMatrix, C64};
use crate::trajectory::GeneratorTrajectory;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoBandParams {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl TwoBandParams {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(gamma1 > 0.0 && gamma1.is_finite()) {
            return Err(Error::invalid(
                "gamma1",
                format!("must be positive, got {gamma1}"),
            ));
        }
        if !(gamma2 > 0.0 && gamma2.is_finite()) {
            return Err(Error::invalid(
                "gamma2",
                format!("must be positive, got {gamma2}"),
            ));
        }
        Ok(TwoBandParams { gamma1, gamma2 })
    }

    pub fn total(&self) -> f64 {
        self.gamma1 + self.gamma2
    }
}

pub fn build_model(p: TwoBandParams) -> GeneralizedLindbladModel {
    build_model_unchecked(p.gamma1, p.gamma2)
}

/// Same operator content as [`build_model`] for any nonnegative rates.
pub(crate) fn build_model_unchecked(gamma1: f64, gamma2: f64) -> GeneralizedLindbladModel {
    GeneralizedLindbladModel::new(
        vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)],
        vec![
            ((0, 1, 0), ops::sigma_plus().scale_real(gamma1.sqrt())),
            ((1, 0, 0), ops::sigma_minus().scale_real(gamma2.sqrt())),
        ],
    )
    .expect("two-band operators are well formed")
}

/// Exact solution of the two-band equations from initial components `(rho1, rho2)`.
pub fn closed_form_solution(
    p: TwoBandParams,
    rho1: &CMatrix,
    rho2: &CMatrix,
    t: f64,
) -> (CMatrix, CMatrix) {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let s = g1 + g2;
    let e = (-s * t).exp();
    let a = rho1[(0, 0)];
    let b = rho2[(1, 1)];
    let r1_ee = (a * (g1 + g2 * e) + b * g1 * (1.0 - e)) / s;
    let r2_gg = (a * g2 * (1.0 - e) + b * (g2 + g1 * e)) / s;
    let d1 = (-g2 * t / 2.0).exp();
    let d2 = (-g1 * t / 2.0).exp();
    let out1 = CMatrix::from_vec(
        2,
        2,
        vec![r1_ee, rho1[(0, 1)] * d1, rho1[(1, 0)] * d1, rho1[(1, 1)]],
    )
    .expect("2x2");
    let out2 = CMatrix::from_vec(
        2,
        2,
        vec![rho2[(0, 0)], rho2[(0, 1)] * d2, rho2[(1, 0)] * d2, r2_gg],
    )
    .expect("2x2");
    (out1, out2)
}

/// Component pair `(X_0, X_1)` of a two-band operator.
pub type Pair = (CMatrix, CMatrix);

/// The three stationary pairs `A01 = (0, |e><e|)`, `A02 = (|g><g|, 0)`,
/// `A03 = (gamma1/s |e><e|, gamma2/s |g><g|)`.
pub fn steady_state_set(p: TwoBandParams) -> [Pair; 3] {
    let s = p.total();
    let z = CMatrix::zeros(2, 2);
    [
        (z.clone(), ops::proj_e()),
        (ops::proj_g(), z),
        (
            ops::proj_e().scale_real(p.gamma1 / s),
            ops::proj_g().scale_real(p.gamma2 / s),
        ),
    ]
}

/// Closed-form right and left eigenoperators of the block generator.
#[derive(Clone, Debug)]
pub struct AppendixFixtures {
    pub labels: Vec<&'static str>,
    /// Eigenvalues of `-i H`.
    pub decay_rates: Vec<f64>,
    pub right: Vec<Pair>,
    pub left: Vec<Pair>,
}

impl AppendixFixtures {
    /// `sum_k Tr(A_k^mu B_k^nu)`.
    pub fn pairing(&self, mu: usize, nu: usize) -> C64 {
        (&self.right[mu].0 * &self.left[nu].0).trace()
            + (&self.right[mu].1 * &self.left[nu].1).trace()
    }

    /// Coordinates `[vec(X_0), vec(X_1)]` in the basis `ee, eg, ge, gg`.
    pub fn coordinates(pair: &Pair) -> [Vec<C64>; 2] {
        [pair.0.data().to_vec(), pair.1.data().to_vec()]
    }
}

pub fn appendix_fixtures(p: TwoBandParams) -> AppendixFixtures {
    let (g1, g2) = (p.gamma1, p.gamma2);
    let s = p.total();
    let z = || CMatrix::zeros(2, 2);
    let ee = ops::proj_e;
    let gg = ops::proj_g;
    // |g><e| and |e><g|
    let ge = ops::sigma_minus;
    let eg = ops::sigma_plus;
    let [a01, a02, a03] = steady_state_set(p);
    let right = vec![
        a01,
        a02,
        a03,
        (z(), ge()),
        (z(), eg()),
        (ge(), z()),
        (eg(), z()),
        (ee(), gg().scale_real(-1.0)),
    ];
    let left = vec![
        (z(), ee()),
        (gg(), z()),
        (ee(), gg()),
        (z(), eg()),
        (z(), ge()),
        (eg(), z()),
        (ge(), z()),
        (ee().scale_real(g2 / s), gg().scale_real(-g1 / s)),
    ];
    AppendixFixtures {
        labels: vec!["A01", "A02", "A03", "A11", "A12", "A21", "A22", "A3"],
        decay_rates: vec![
            0.0,
            0.0,
            0.0,
            -g1 / 2.0,
            -g1 / 2.0,
            -g2 / 2.0,
            -g2 / 2.0,
            -s,
        ],
        right,
        left,
    }
}

/// Linear rate ramp reaching `value_at_t` with slope `slope_at_t` at the final time,
/// clamped below by `floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub value_at_t: f64,
    pub slope_at_t: f64,
    pub t_final: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

pub const DEFAULT_FLOOR: f64 = 1e-3;

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

impl RampSpec {
    pub fn new(value_at_t: f64, slope_at_t: f64, t_final: f64) -> Self {
        RampSpec {
            value_at_t,
            slope_at_t,
            t_final,
            floor: DEFAULT_FLOOR,
        }
    }
}

pub fn ramp(r: &RampSpec, t: f64) -> f64 {
    (r.value_at_t + r.slope_at_t * (t - r.t_final)).max(r.floor)
}

/// Block Hamiltonian of the two-band model sampled on `steps` uniform steps of
/// `[0, T]` with rates `gamma1 = ramp(r1, t)`, `gamma2 = ramp(r2, t)`.
pub fn ramp_generator(r1: &RampSpec, r2: &RampSpec, steps: usize) -> Result<GeneratorTrajectory> {
    let t_final = r1.t_final;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::invalid(
            "T",
            format!("final time must be positive, got {t_final}"),
        ));
    }
    if r2.t_final != t_final {
        return Err(Error::invalid("T", "both ramps must share the final time"));
    }
    for (name, r) in [("gamma1", r1), ("gamma2", r2)] {
        if !(r.floor > 0.0) {
            return Err(Error::invalid(
                name,
                format!("floor must be positive, got {}", r.floor),
            ));
        }
        if !r.value_at_t.is_finite() || !r.slope_at_t.is_finite() {
            return Err(Error::invalid(name, "non-finite ramp parameter"));
        }
    }
    GeneratorTrajectory::from_fn(0.0, t_final, steps, |t| {
        build_block_hamiltonian(&build_model_unchecked(ramp(r1, t), ramp(r2, t))).flattened
    })
}
