//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Tolerances are the constants below.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::spin::*;
use common::*;
use effham_core::ddfs::ddfs_check;
use effham_core::generalized::{
    generalized_damping_basis, oracle_mismatch as block_mismatch, propagate_blocks_trajectory,
};
use effham_core::geometric::geometric_phase_cyclic;
use effham_core::lindblad::{
    oracle_mismatch, propagate_trajectory, vectorize, CompositeState, LindbladModel,
};
use effham_core::numerics::{kron, ops, re, CMatrix, C64};
use effham_core::scan::{scan_with_jobs, spearman, ScanConfig, ScanGrid};
use effham_core::two_band::{
    appendix_fixtures, build_model, closed_form_solution, Pair, TwoBandParams,
};
use rand::Rng;

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_CASES: usize = 60;
const ORACLE_RUNTIME: Duration = Duration::from_secs(5);
const CLOSED_FORM_TOL: f64 = 1e-10;
const CLOSED_FORM_CASES: usize = 100;
const PROJECTOR_TOL: f64 = 1e-8;
const SPECTRUM_TOL: f64 = 1e-9;
const PAIRING_TOL: f64 = 1e-9;
const COHERENCE_PHASE_TOL: f64 = 1e-2;
const POPULATION_PHASE_TOL: f64 = 1e-3;
const DDFS_TOL: f64 = 1e-10;
const DDFS_PERTURBED_CASES: usize = 20;
const PURITY_TOL: f64 = 1e-7;
const EDGE_INFIDELITY_TOL: f64 = 1e-6;
const SPEARMAN_MIN: f64 = 0.8;
const SCAN_RUNTIME: Duration = Duration::from_secs(120);
const CONSERVATION_TOL: f64 = 1e-9;
const PSD_TOL: f64 = -1e-8;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let mut dims = [0usize; 5];
    for _ in 0..ORACLE_CASES {
        let m = random_model(&mut r);
        dims[m.dim()] += 1;
        let rho = random_state(&mut r, m.dim());
        worst = worst.max(oracle_mismatch(&m, &rho));
    }
    let elapsed = start.elapsed();
    check(
        worst <= ORACLE_TOL && elapsed < ORACLE_RUNTIME && dims[2..].iter().all(|&d| d > 0),
        format!(
            "{ORACLE_CASES} Markovian models (N=2/3/4: {}/{}/{}), worst relative mismatch {worst:.2e}, {elapsed:.2?}",
            dims[2], dims[3], dims[4]
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..ORACLE_CASES {
        let m = random_generalized(&mut r);
        let rhos = random_components(&mut r, m.dim(), m.components());
        worst = worst.max(block_mismatch(&m, &rhos).map_err(|e| e.to_string())?);
    }
    let elapsed = start.elapsed();
    check(
        worst <= ORACLE_TOL && elapsed < ORACLE_RUNTIME,
        format!("{ORACLE_CASES} generalized models (N<=3, K<=3), worst relative mismatch {worst:.2e}, {elapsed:.2?}"),
    )
}

/// Conservation along one component trajectory: (trace error, Hermitian defect, min eigenvalue).
fn conservation(traj: &[(f64, Vec<CMatrix>)]) -> (f64, f64, f64) {
    let (mut tr, mut herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for (_, comps) in traj {
        let total: C64 = comps.iter().map(CMatrix::trace).sum();
        tr = tr.max((total - re(1.0)).norm());
        for c in comps {
            herm = herm.max(c.hermitian_defect());
            min_eig = min_eig.min(min_eigenvalue(c));
        }
    }
    (tr, herm, min_eig)
}

/// Runs the criterion-3 trajectories; returns (worst closed-form error, worst unit-rate error, conservation).
fn two_band_runs() -> Result<(f64, f64, (f64, f64, f64)), String> {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let mut cons = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..CLOSED_FORM_CASES {
        let p = TwoBandParams::new(r.gen_range(0.01..=2.0), r.gen_range(0.01..=2.0)).unwrap();
        let t1 = r.gen_range(0.0..=10.0);
        let rhos0 = random_components(&mut r, 2, 2);
        let traj = propagate_blocks_trajectory(&build_model(p), &rhos0, t1, 10)
            .map_err(|e| e.to_string())?;
        for (t, comps) in &traj {
            let (c1, c2) = closed_form_solution(p, &rhos0[0], &rhos0[1], *t);
            worst = worst
                .max((&comps[0] - &c1).max_abs())
                .max((&comps[1] - &c2).max_abs());
        }
        let c = conservation(&traj);
        cons = (cons.0.max(c.0), cons.1.max(c.1), cons.2.min(c.2));
    }
    let p = TwoBandParams::new(1.0, 1.0).unwrap();
    let rhos0 = [ops::proj_e(), CMatrix::zeros(2, 2)];
    let traj =
        propagate_blocks_trajectory(&build_model(p), &rhos0, 5.0, 50).map_err(|e| e.to_string())?;
    let mut unit: f64 = 0.0;
    for (t, comps) in &traj {
        let e = (-2.0 * t).exp();
        unit = unit
            .max((comps[0][(0, 0)] - re((1.0 + e) / 2.0)).norm())
            .max((comps[1][(1, 1)] - re((1.0 - e) / 2.0)).norm());
    }
    let c = conservation(&traj);
    cons = (cons.0.max(c.0), cons.1.max(c.1), cons.2.min(c.2));
    Ok((worst, unit, cons))
}

fn criterion_3() -> Outcome {
    let (worst, unit, _) = two_band_runs()?;
    check(
        worst <= CLOSED_FORM_TOL && unit <= CLOSED_FORM_TOL,
        format!(
            "{CLOSED_FORM_CASES} random cases, worst |numeric - closed form| {worst:.2e}; unit-rate populations off by {unit:.2e}"
        ),
    )
}

fn stacked(p: &Pair) -> Vec<C64> {
    p.0.data().iter().chain(p.1.data()).copied().collect()
}

fn stacked_dual(p: &Pair) -> Vec<C64> {
    stacked(&(p.0.transpose(), p.1.transpose()))
}

fn projector(rights: &[Vec<C64>], lefts: &[Vec<C64>]) -> CMatrix {
    let n = rights[0].len();
    let mut out = CMatrix::zeros(n, n);
    for (r, l) in rights.iter().zip(lefts) {
        out += &CMatrix::outer(r, l);
    }
    out
}

fn criterion_4() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (g1, g2) in [(1.0, 1.0), (0.3, 1.7), (2.0, 0.5)] {
        let p = TwoBandParams::new(g1, g2).unwrap();
        let db = generalized_damping_basis(&build_model(p)).map_err(|e| e.to_string())?;
        let fx = appendix_fixtures(p);
        let zero = db
            .clusters
            .iter()
            .find(|c| {
                (*c).clone()
                    .all(|i| db.eigenvalues[i].norm() < SPECTRUM_TOL)
            })
            .cloned()
            .ok_or("no zero cluster")?;
        let num_p = projector(
            &zero
                .clone()
                .map(|i| stacked(&(db.right_ops[i][0].clone(), db.right_ops[i][1].clone())))
                .collect::<Vec<_>>(),
            &zero
                .clone()
                .map(|i| stacked_dual(&(db.left_ops[i][0].clone(), db.left_ops[i][1].clone())))
                .collect::<Vec<_>>(),
        );
        let fx_p = projector(
            &fx.right[..3].iter().map(stacked).collect::<Vec<_>>(),
            &fx.left[..3].iter().map(stacked_dual).collect::<Vec<_>>(),
        );
        let proj_err = (&num_p - &fx_p).max_abs();

        let mut got: Vec<C64> = db.eigenvalues.clone();
        let mut want: Vec<C64> = fx.decay_rates.iter().map(|&x| re(x)).collect();
        let key = |a: &C64, b: &C64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
        got.sort_by(key);
        want.sort_by(key);
        let spec_err = got
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);

        let mut pair_err: f64 = 0.0;
        let mut fx_pair_err: f64 = 0.0;
        for mu in 0..8 {
            for nu in 0..8 {
                let d = if mu == nu { re(1.0) } else { re(0.0) };
                pair_err = pair_err.max((db.pairing(mu, nu) - d).norm());
                fx_pair_err = fx_pair_err.max((fx.pairing(mu, nu) - d).norm());
            }
        }
        ok &= zero.len() == 3
            && proj_err <= PROJECTOR_TOL
            && spec_err <= SPECTRUM_TOL
            && pair_err <= PAIRING_TOL
            && fx_pair_err <= PAIRING_TOL;
        lines.push(format!(
            "(g1,g2)=({g1},{g2}): zero cluster x{}, projector err {proj_err:.1e}, rates err {spec_err:.1e}, pairing err {pair_err:.1e}/{fx_pair_err:.1e}",
            zero.len()
        ));
    }
    check(ok, lines.join("; "))
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for theta in [PI / 6.0, PI / 3.0, PI / 2.0] {
        let expected = -2.0 * PI * (1.0 - theta.cos());
        let oracle = pancharatnam(theta, true, false, 4000);
        let traj = slow_trajectory(theta, composite_generator(theta, 0.0, 0.0));
        let coh = geometric_phase_cyclic(&traj, track_with_value(&traj, re(OMEGA0)))
            .map_err(|e| e.to_string())?;
        let d_closed = wrap(coh.geometric.re - expected).abs();
        let d_oracle = wrap(coh.geometric.re - oracle).abs();

        let lifted = slow_trajectory(theta, lifted_invariant(theta, 0.0, 0.0));
        let mut pop: f64 = 0.0;
        for e in [1.5 * OMEGA0, -1.5 * OMEGA0] {
            let p = geometric_phase_cyclic(&lifted, track_with_value(&lifted, re(e)))
                .map_err(|e| e.to_string())?;
            pop = pop.max(wrap(p.geometric.re).abs());
        }
        ok &= d_closed <= COHERENCE_PHASE_TOL
            && d_oracle <= COHERENCE_PHASE_TOL
            && pop <= POPULATION_PHASE_TOL;
        lines.push(format!(
            "theta={theta:.4}: coherence {:.5} (closed form {expected:.5}, overlap oracle {oracle:.5}), population max |gamma| {pop:.1e}",
            coh.geometric.re
        ));
    }
    check(ok, lines.join("; "))
}

fn dephasing_pair() -> LindbladModel {
    let (z, id) = (ops::sigma_z(), CMatrix::identity(2));
    let l = (&kron(&z, &id) + &kron(&id, &z)).scale_real(0.5f64.sqrt());
    let h = (&kron(&ops::sigma_x(), &ops::sigma_x()) + &kron(&ops::sigma_y(), &ops::sigma_y()))
        .scale_real(0.8);
    LindbladModel::new(h, vec![l]).unwrap()
}

/// `|psi><psi|` for `psi = a|01> + b|10>`.
fn sector_state(a: C64, b: C64) -> CMatrix {
    let mut v = vec![re(0.0); 4];
    v[1] = a;
    v[2] = b;
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    CMatrix::from_fn(4, 4, |i, k| v[i] * v[k].conj() / n2)
}

fn criterion_6() -> Outcome {
    let m = dephasing_pair();
    let states = [
        sector_state(re(1.0), re(0.0)),
        sector_state(re(0.0), re(1.0)),
        sector_state(re(1.0), re(1.0)),
        sector_state(re(1.0), C64::new(0.0, 1.0)),
    ];
    let basis: Vec<CompositeState> = states.iter().map(|s| vectorize(s).unwrap()).collect();
    let rep = ddfs_check(&m, &basis, DDFS_TOL).map_err(|e| e.to_string())?;
    let beta = rep.betas[0].beta.norm();
    let worst_purity = rep
        .purity_derivatives
        .iter()
        .fold(0.0f64, |a, d| a.max(d.abs()));
    let positive = rep.verdict
        && beta <= DDFS_TOL
        && rep.max_eigen_residual <= DDFS_TOL
        && rep.invariance_defect <= DDFS_TOL
        && worst_purity <= DDFS_TOL;

    let mut r = rng(6);
    let mut rejected = 0;
    for _ in 0..DDFS_PERTURBED_CASES {
        let eps = r.gen_range(1e-3..0.2);
        let perturbed: Vec<CompositeState> = states
            .iter()
            .map(|s| {
                let noise = random_hermitian(&mut r, 4, eps);
                vectorize(&(s + &noise)).unwrap()
            })
            .collect();
        match ddfs_check(&m, &perturbed, DDFS_TOL) {
            Ok(rep) if !rep.verdict => rejected += 1,
            _ => {}
        }
    }

    let mut drift: f64 = 0.0;
    for s in &states {
        for (_, rho) in propagate_trajectory(&m, s, 10.0, 100).map_err(|e| e.to_string())? {
            drift = drift.max(((&rho * &rho).trace().re - 1.0).abs());
        }
    }
    check(
        positive && rejected == DDFS_PERTURBED_CASES && drift <= PURITY_TOL,
        format!(
            "collective dephasing: verdict {}, |beta| {beta:.1e}, eigen residual {:.1e}, invariance defect {:.1e}; \
             perturbed bases rejected {rejected}/{DDFS_PERTURBED_CASES}; purity drift over [0,10] {drift:.1e}",
            rep.verdict, rep.max_eigen_residual, rep.invariance_defect
        ),
    )
}

fn reference_scan() -> Result<(ScanGrid, Duration), String> {
    let start = Instant::now();
    let grid = scan_with_jobs(&ScanConfig::reference_grid(), 1).map_err(|e| e.to_string())?;
    Ok((grid, start.elapsed()))
}

fn criterion_7(grid: &ScanGrid, elapsed: Duration) -> Outcome {
    let mut edge_gamma: f64 = 0.0;
    let mut edge_inf: f64 = 0.0;
    let j0 = grid
        .dgamma1_t
        .iter()
        .position(|&d| d == 0.0)
        .ok_or("grid lacks the dgamma1 = 0 edge")?;
    for i in 0..grid.gamma1_t.len() {
        let k = grid.index(i, j0);
        edge_gamma = edge_gamma.max(grid.gamma_cap[k]);
        edge_inf = edge_inf.max(grid.infidelity[k]);
    }
    let rho = spearman(&grid.gamma_cap, &grid.infidelity);
    check(
        grid.errors.is_empty()
            && edge_gamma == 0.0
            && edge_inf <= EDGE_INFIDELITY_TOL
            && rho >= SPEARMAN_MIN
            && elapsed < SCAN_RUNTIME,
        format!(
            "20x20 grid, {} failed cells; dgamma1=0 edge: max Gamma {edge_gamma:.3e}, max 1-F {edge_inf:.3e}; \
             Spearman {rho:.3}; {elapsed:.1?} single-threaded",
            grid.errors.len()
        ),
    )
}

fn criterion_8(grid: &ScanGrid) -> Outcome {
    let (_, _, (tr, herm, min_eig)) = two_band_runs()?;
    let (ex, ad) = (&grid.exact_conservation, &grid.adiabatic_conservation);
    let ok = [tr, ex.max_trace_error, ad.max_trace_error]
        .iter()
        .all(|&x| x <= CONSERVATION_TOL)
        && [herm, ex.max_hermitian_defect, ad.max_hermitian_defect]
            .iter()
            .all(|&x| x <= CONSERVATION_TOL)
        && [min_eig, ex.min_eigenvalue, ad.min_eigenvalue]
            .iter()
            .all(|&x| x >= PSD_TOL);
    check(
        ok,
        format!(
            "closed-form runs: trace err {tr:.1e}, Hermitian defect {herm:.1e}, min eig {min_eig:.1e}; \
             scan exact: {:.1e}/{:.1e}/{:.1e}; scan adiabatic: {:.1e}/{:.1e}/{:.1e}",
            ex.max_trace_error,
            ex.max_hermitian_defect,
            ex.min_eigenvalue,
            ad.max_trace_error,
            ad.max_hermitian_defect,
            ad.min_eigenvalue
        ),
    )
}

fn report(n: usize, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(d) => {
            println!("PASS criterion {n}: {d}");
            true
        }
        Err(d) => {
            println!("FAIL criterion {n}: {d}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report(1, criterion_1);
    all &= report(2, criterion_2);
    all &= report(3, criterion_3);
    all &= report(4, criterion_4);
    all &= report(5, criterion_5);
    all &= report(6, criterion_6);
    match reference_scan() {
        Ok((grid, elapsed)) => {
            all &= report(7, || criterion_7(&grid, elapsed));
            all &= report(8, || criterion_8(&grid));
        }
        Err(e) => {
            all &= report(7, || Err(format!("scan failed: {e}")));
            all &= report(8, || Err(format!("scan failed: {e}")));
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
