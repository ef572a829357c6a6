//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (Higham 2005 order selection on the 1-norm).

use super::{solve, CMatrix};
use crate::error::{Error, Result};

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

pub fn expm(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expm of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let ident = CMatrix::identity(n);
    let norm = a.norm_one();
    if norm == 0.0 {
        return Ok(ident);
    }

    for &(m, theta) in &THETA {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            return pade_low(a, coeffs, &ident);
        }
    }

    let s = ((norm / THETA13).log2().ceil()).max(0.0) as i32;
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut r = pade13(&scaled, &ident)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_low(a: &CMatrix, b: &[f64], ident: &CMatrix) -> Result<CMatrix> {
    let a2 = a * a;
    let mut pow = ident.clone();
    let mut u_inner = ident.scale_real(b[1]);
    let mut v = ident.scale_real(b[0]);
    let mut k = 2;
    while k < b.len() {
        pow = &pow * &a2;
        v += &pow.scale_real(b[k]);
        u_inner += &pow.scale_real(b[k + 1]);
        k += 2;
    }
    let u = a * &u_inner;
    finish(&u, &v)
}

fn pade13(a: &CMatrix, ident: &CMatrix) -> Result<CMatrix> {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let w1 = &(&a6.scale_real(b[13]) + &a4.scale_real(b[11])) + &a2.scale_real(b[9]);
    let w2 = &(&(&a6.scale_real(b[7]) + &a4.scale_real(b[5])) + &a2.scale_real(b[3]))
        + &ident.scale_real(b[1]);
    let u = a * &(&(&a6 * &w1) + &w2);
    let z1 = &(&a6.scale_real(b[12]) + &a4.scale_real(b[10])) + &a2.scale_real(b[8]);
    let z2 = &(&(&a6.scale_real(b[6]) + &a4.scale_real(b[4])) + &a2.scale_real(b[2]))
        + &ident.scale_real(b[0]);
    let v = &(&a6 * &z1) + &z2;
    finish(&u, &v)
}

fn finish(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    let p = v + u;
    let q = v - u;
    solve(&q, &p)
}
