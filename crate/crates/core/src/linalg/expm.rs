use num_complex::Complex64 as C64;

use super::ComplexMatrix;

const SCALED_NORM_BOUND: f64 = 0.5;
const TAYLOR_TOL: f64 = 1e-16;
const MAX_TAYLOR_TERMS: usize = 60;

/// exp(m·t) by scaling and squaring.
///
/// `m·t` is scaled by `2^-s` until its 1-norm is at most 0.5, the Taylor
/// series is summed until a term falls below `1e-16` relative to the partial
/// sum, and the result is squared `s` times.
pub fn expm(m: &ComplexMatrix, t: f64) -> ComplexMatrix {
    assert!(m.is_square(), "expm needs a square matrix");
    let n = m.rows();
    let a = m.scale_real(t);
    let norm = a.norm_one();
    let mut squarings = 0u32;
    if norm > SCALED_NORM_BOUND {
        squarings = (norm / SCALED_NORM_BOUND).log2().ceil() as u32;
        while norm / 2f64.powi(squarings as i32) > SCALED_NORM_BOUND {
            squarings += 1;
        }
    }
    let b = a.scale_real(0.5f64.powi(squarings as i32));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=MAX_TAYLOR_TERMS {
        term = term.matmul(&b).scale(C64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.norm_one() <= TAYLOR_TOL * sum.norm_one() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    sum
}

/// exp(m·t)·v.
pub fn matexp_apply(m: &ComplexMatrix, v: &[C64], t: f64) -> Vec<C64> {
    assert_eq!(m.rows(), v.len(), "matexp_apply dimension mismatch");
    assert!(t >= 0.0, "matexp_apply needs t >= 0");
    expm(m, t).matvec(v)
}
