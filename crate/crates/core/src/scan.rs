//! Adiabaticity scans of the two-band model over final rate and final slope of
//! the `gamma1` ramp.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{adiabatic_gamma, adiabatic_propagate, exact_propagate};
use crate::error::{Error, Result};
use crate::generalized::WaveFunctionVector;
use crate::io::{square_from_json, MatrixJson};
use crate::numerics::{eigh, fidelity, CMatrix, C64};
use crate::two_band::{
    ramp, ramp_generator, steady_state_set, RampSpec, TwoBandParams, DEFAULT_FLOOR,
};

pub const MIN_STEPS: usize = 100;
pub const DEFAULT_STEPS: usize = 2000;

/// Axis values, either listed or as `count` evenly spaced points in `[min, max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range { min: f64, max: f64, count: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Values(ref v) => v.clone(),
            Axis::Range { min, max, count } => match count {
                0 => vec![],
                1 => vec![min],
                _ => (0..count)
                    .map(|i| min + (max - min) * i as f64 / (count - 1) as f64)
                    .collect(),
            },
        }
    }
}

/// Initial state: the tag `"A03"` (the mixed steady state at the rates of
/// `t = 0`) or explicit component density matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Tag(String),
    Matrices(Vec<MatrixJson>),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Tag("A03".into())
    }
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}
fn default_one() -> f64 {
    1.0
}
fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    #[serde(alias = "gamma1_T")]
    pub gamma1_t: Axis,
    #[serde(alias = "dgamma1_T")]
    pub dgamma1_t: Axis,
    #[serde(rename = "T", alias = "t_final", default = "default_one")]
    pub t_final: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(alias = "gamma2_T", default = "default_one")]
    pub gamma2_t: f64,
    #[serde(alias = "dgamma2_T", default = "default_one")]
    pub dgamma2_t: f64,
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub initial: InitialSpec,
}

impl ScanConfig {
    /// The 20 x 20 grid `gamma1(T) in [0.2, 3]`, `dgamma1(T) in [0, 3]`,
    /// `gamma2(T) = dgamma2(T) = 1`, `T = 1`, initial state A03.
    pub fn reference_grid() -> Self {
        ScanConfig {
            gamma1_t: Axis::Range {
                min: 0.2,
                max: 3.0,
                count: 20,
            },
            dgamma1_t: Axis::Range {
                min: 0.0,
                max: 3.0,
                count: 20,
            },
            t_final: 1.0,
            steps: DEFAULT_STEPS,
            gamma2_t: 1.0,
            dgamma2_t: 1.0,
            floor: DEFAULT_FLOOR,
            initial: InitialSpec::default(),
        }
    }

    fn validate(&self) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<CMatrix>>)> {
        let g1 = self.gamma1_t.values();
        let d1 = self.dgamma1_t.values();
        if g1.is_empty() || d1.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if g1.iter().chain(&d1).any(|x| !x.is_finite()) {
            return Err(Error::invalid("gamma1_T", "axis values must be finite"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid(
                "T",
                format!("must be positive, got {}", self.t_final),
            ));
        }
        if self.steps < MIN_STEPS {
            return Err(Error::invalid(
                "steps",
                format!("must be at least {MIN_STEPS}, got {}", self.steps),
            ));
        }
        if !(self.floor > 0.0) {
            return Err(Error::invalid(
                "floor",
                format!("must be positive, got {}", self.floor),
            ));
        }
        let explicit = match &self.initial {
            InitialSpec::Tag(t) if t == "A03" => None,
            InitialSpec::Tag(t) => {
                return Err(Error::invalid(
                    "initial",
                    format!("unknown initial-state tag `{t}`"),
                ))
            }
            InitialSpec::Matrices(ms) => {
                if ms.len() != 2 {
                    return Err(Error::invalid(
                        "initial",
                        format!("expected 2 components, found {}", ms.len()),
                    ));
                }
                let rhos = ms
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let r = square_from_json(m, &format!("initial[{k}]"))?;
                        if r.rows() != 2 {
                            return Err(Error::invalid(
                                format!("initial[{k}]"),
                                "expected a 2x2 matrix",
                            ));
                        }
                        Ok(r)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let total: C64 = rhos.iter().map(CMatrix::trace).sum();
                if (total - C64::new(1.0, 0.0)).norm() > 1e-8
                    || rhos.iter().any(|r| r.hermitian_defect() > 1e-8)
                {
                    return Err(Error::invalid(
                        "initial",
                        "components must be Hermitian with total trace 1",
                    ));
                }
                Some(rhos)
            }
        };
        Ok((g1, d1, explicit))
    }
}

/// Failure of one grid cell; the cell values are NaN.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellError {
    pub gamma1_index: usize,
    pub dgamma1_index: usize,
    pub code: String,
    pub message: String,
}

/// Scan results, stored row-major with `gamma1_T` as the slow index.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanGrid {
    pub gamma1_t: Vec<f64>,
    pub dgamma1_t: Vec<f64>,
    pub gamma_cap: Vec<f64>,
    pub infidelity: Vec<f64>,
    pub config: ScanConfig,
    pub errors: Vec<CellError>,
    /// Largest total-trace drift of the adiabatic reference over all cells.
    pub max_trace_drift: f64,
    /// Conservation along the exact trajectories of all successful cells.
    pub exact_conservation: Conservation,
    /// Conservation along the adiabatic reference trajectories.
    pub adiabatic_conservation: Conservation,
}

impl ScanGrid {
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.dgamma1_t.len() + j
    }

    pub fn len(&self) -> usize {
        self.gamma_cap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma_cap.is_empty()
    }

    /// CSV with header `gamma1_T,dgamma1_T,Gamma,one_minus_F`, 17 significant
    /// digits, NaN written as `NaN`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "gamma1_T,dgamma1_T,Gamma,one_minus_F")?;
        for (i, &g1) in self.gamma1_t.iter().enumerate() {
            for (j, &d1) in self.dgamma1_t.iter().enumerate() {
                let k = self.index(i, j);
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt_f64(g1),
                    fmt_f64(d1),
                    fmt_f64(self.gamma_cap[k]),
                    fmt_f64(self.infidelity[k])
                )?;
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ASCII output")
    }
}

/// Scientific notation with 17 significant digits; `NaN` for NaN.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

/// Worst conservation figures along a set of trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Conservation {
    /// `max |sum_k Tr rho_k - 1|`.
    pub max_trace_error: f64,
    /// Largest Frobenius norm of `rho_k - rho_k^†`.
    pub max_hermitian_defect: f64,
    /// Smallest eigenvalue of any component.
    pub min_eigenvalue: f64,
}

impl Default for Conservation {
    fn default() -> Self {
        Conservation {
            max_trace_error: 0.0,
            max_hermitian_defect: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

impl Conservation {
    pub fn of_states(states: &[WaveFunctionVector]) -> Result<Self> {
        let mut c = Conservation::default();
        for w in states {
            let mut total = C64::new(0.0, 0.0);
            for rho in w.density_matrices() {
                total += rho.trace();
                c.max_hermitian_defect = c.max_hermitian_defect.max(rho.hermitian_defect());
                c.min_eigenvalue = c.min_eigenvalue.min(eigh(&rho)?.values[0]);
            }
            c.max_trace_error = c.max_trace_error.max((total - C64::new(1.0, 0.0)).norm());
        }
        Ok(c)
    }

    pub fn merge(self, o: Conservation) -> Conservation {
        Conservation {
            max_trace_error: self.max_trace_error.max(o.max_trace_error),
            max_hermitian_defect: self.max_hermitian_defect.max(o.max_hermitian_defect),
            min_eigenvalue: self.min_eigenvalue.min(o.min_eigenvalue),
        }
    }
}

/// Values of one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellResult {
    pub gamma_cap: f64,
    pub infidelity: f64,
    pub trace_drift: f64,
    pub exact: Conservation,
    pub adiabatic: Conservation,
}

/// Gamma at `T` and `1 - F` between exact and adiabatic reduced states at `T`.
pub fn scan_cell(config: &ScanConfig, gamma1_t: f64, dgamma1_t: f64) -> Result<CellResult> {
    let (_, _, explicit) = config.validate()?;
    cell(config, gamma1_t, dgamma1_t, explicit.as_deref())
}

fn cell(
    config: &ScanConfig,
    gamma1_t: f64,
    dgamma1_t: f64,
    explicit: Option<&[CMatrix]>,
) -> Result<CellResult> {
    let r1 = RampSpec {
        value_at_t: gamma1_t,
        slope_at_t: dgamma1_t,
        t_final: config.t_final,
        floor: config.floor,
    };
    let r2 = RampSpec {
        value_at_t: config.gamma2_t,
        slope_at_t: config.dgamma2_t,
        t_final: config.t_final,
        floor: config.floor,
    };
    let gen = ramp_generator(&r1, &r2, config.steps)?;
    let gamma_cap = adiabatic_gamma(&gen, gen.len() - 1)?;
    let rhos0 = match explicit {
        Some(r) => r.to_vec(),
        None => {
            let [_, _, a03] = steady_state_set(TwoBandParams::new(ramp(&r1, 0.0), ramp(&r2, 0.0))?);
            vec![a03.0, a03.1]
        }
    };
    let psi0 = WaveFunctionVector::from_density_matrices(&rhos0)?;
    let exact = exact_propagate(&gen, &psi0)?;
    let adiabatic = adiabatic_propagate(&gen, &psi0)?;
    let f = fidelity(
        &exact.last().reduced_state(),
        &adiabatic.last().reduced_state(),
    )?;
    Ok(CellResult {
        gamma_cap,
        infidelity: (1.0 - f).max(0.0),
        trace_drift: adiabatic.trace_drift,
        exact: Conservation::of_states(&exact.states)?,
        adiabatic: Conservation::of_states(&adiabatic.states)?,
    })
}

/// Runs the scan on the current rayon pool. Cells are independent and are
/// assembled by index, so the result does not depend on the thread count.
pub fn scan(config: &ScanConfig) -> Result<ScanGrid> {
    let (g1, d1, explicit) = config.validate()?;
    let cells: Vec<(usize, usize)> = (0..g1.len())
        .flat_map(|i| (0..d1.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<CellResult>> = cells
        .par_iter()
        .map(|&(i, j)| cell(config, g1[i], d1[j], explicit.as_deref()))
        .collect();
    let mut grid = ScanGrid {
        gamma1_t: g1,
        dgamma1_t: d1,
        gamma_cap: Vec::with_capacity(cells.len()),
        infidelity: Vec::with_capacity(cells.len()),
        config: config.clone(),
        errors: vec![],
        max_trace_drift: 0.0,
        exact_conservation: Conservation::default(),
        adiabatic_conservation: Conservation::default(),
    };
    for (&(i, j), r) in cells.iter().zip(results) {
        match r {
            Ok(c) => {
                grid.gamma_cap.push(c.gamma_cap);
                grid.infidelity.push(c.infidelity);
                grid.max_trace_drift = grid.max_trace_drift.max(c.trace_drift);
                grid.exact_conservation = grid.exact_conservation.merge(c.exact);
                grid.adiabatic_conservation = grid.adiabatic_conservation.merge(c.adiabatic);
            }
            Err(e) => {
                grid.gamma_cap.push(f64::NAN);
                grid.infidelity.push(f64::NAN);
                grid.errors.push(CellError {
                    gamma1_index: i,
                    dgamma1_index: j,
                    code: e.code().into(),
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(grid)
}

/// Runs the scan on a dedicated pool of `jobs` threads.
pub fn scan_with_jobs(config: &ScanConfig, jobs: usize) -> Result<ScanGrid> {
    if jobs == 0 {
        return Err(Error::invalid("jobs", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| scan(config))
}

/// Ranks starting at 1, ties receiving their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s + 1;
        while e < idx.len() && x[idx[e]] == x[idx[s]] {
            e += 1;
        }
        let r = (s + e + 1) as f64 / 2.0;
        for &k in &idx[s..e] {
            ranks[k] = r;
        }
        s = e;
    }
    ranks
}

/// Spearman rank correlation over pairs where both values are finite.
/// Returns NaN with fewer than two pairs or a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .unzip();
    if xs.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (average_ranks(&xs), average_ranks(&ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_forms() {
        assert_eq!(
            Axis::Range {
                min: 0.0,
                max: 1.0,
                count: 3
            }
            .values(),
            vec![0.0, 0.5, 1.0]
        );
        let a: Axis = serde_json::from_str("[0.5, 2]").unwrap();
        assert_eq!(a.values(), vec![0.5, 2.0]);
        let b: Axis = serde_json::from_str(r#"{"min": 1, "max": 2, "count": 2}"#).unwrap();
        assert_eq!(b.values(), vec![1.0, 2.0]);
    }

    #[test]
    fn config_defaults() {
        let c: ScanConfig =
            serde_json::from_str(r#"{"gamma1_t": [1.0], "dgamma1_t": [0.0]}"#).unwrap();
        assert_eq!(c.steps, DEFAULT_STEPS);
        assert_eq!(c.t_final, 1.0);
        assert_eq!(c.initial, InitialSpec::Tag("A03".into()));
    }

    #[test]
    fn static_cell_is_adiabatic() {
        let mut c = ScanConfig::reference_grid();
        c.gamma1_t = Axis::Values(vec![1.3]);
        c.dgamma1_t = Axis::Values(vec![0.0]);
        c.dgamma2_t = 0.0;
        c.steps = 200;
        let g = scan(&c).unwrap();
        assert_eq!(g.gamma_cap, vec![0.0]);
        assert!(g.infidelity[0] <= 1e-6, "{}", g.infidelity[0]);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = ScanConfig::reference_grid();
        c.steps = 10;
        assert_eq!(scan(&c).unwrap_err().field(), Some("steps"));
        let mut c = ScanConfig::reference_grid();
        c.gamma1_t = Axis::Values(vec![]);
        assert!(matches!(scan(&c), Err(Error::EmptyGrid)));
        let mut c = ScanConfig::reference_grid();
        c.initial = InitialSpec::Tag("B7".into());
        assert_eq!(scan(&c).unwrap_err().field(), Some("initial"));
    }

    #[test]
    fn spearman_reference_values() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]) - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        // Ties: ranks (1.5, 1.5, 3) against (1, 2, 3) give 0.8660254...
        assert!((spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]) - 0.75f64.sqrt()).abs() < 1e-12);
        assert!(spearman(&[1.0, f64::NAN], &[1.0, 2.0]).is_nan());
    }

    #[test]
    fn csv_format() {
        let g = ScanGrid {
            gamma1_t: vec![0.5],
            dgamma1_t: vec![0.0, 1.0],
            gamma_cap: vec![0.0, f64::NAN],
            infidelity: vec![1e-3, f64::NAN],
            config: ScanConfig::reference_grid(),
            errors: vec![],
            max_trace_drift: 0.0,
            exact_conservation: Conservation::default(),
            adiabatic_conservation: Conservation::default(),
        };
        let csv = g.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "gamma1_T,dgamma1_T,Gamma,one_minus_F");
        assert_eq!(
            lines[1],
            "5.0000000000000000e-1,0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e-3"
        );
        assert_eq!(
            lines[2],
            "5.0000000000000000e-1,1.0000000000000000e0,NaN,NaN"
        );
    }
}
