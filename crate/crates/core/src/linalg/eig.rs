use num_complex::Complex64 as C64;

use super::{vec_norm, ComplexMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const HERMITIAN_TOL: f64 = 1e-8;
const PSD_FLOOR: f64 = -1e-8;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigResult {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigResult {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Q·f(Λ)·Q†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let q = &self.eigenvectors;
        let n = q.rows();
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| q[(i, k)] * w[k] * q[(j, k)].conj()).sum()
        })
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a[p][q]` with a
/// diagonal unitary, then applies the real symmetric Jacobi rotation that
/// zeroes it. Sweeps stop once the off-diagonal Frobenius mass drops below
/// `1e-14·‖h‖_F`.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigResult> {
    let n = h.require_square("hermitian_eig input")?;
    h.check_finite()?;
    let norm = h.frobenius_norm();
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * norm.max(1.0) {
        return Err(Error::NotHermitian { defect });
    }

    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let target = OFF_DIAGONAL_TOL * norm;

    let mut converged = false;
    for _ in 0..=MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Jacobi eigensolver exceeded {MAX_SWEEPS} sweeps (off-diagonal {:.3e}, target {:.3e})",
            off_diagonal_norm(&a),
            target
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigResult { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * g_qp;
        a[(k, q)] = akp * s + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * g_qp.conj();
        a[(q, k)] = apk * s + aqk * g_qq.conj();
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * s + vkq * g_qq;
    }

    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * r, 0.0);
    a[(q, q)] = C64::new(aqq + t * r, 0.0);
}

/// Principal square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-1e-8, 0)` are treated as zero.
pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    psd_sqrt_clamped(h, PSD_FLOOR)
}

/// As [`psd_sqrt`] with a caller-chosen floor (`floor <= 0`) below which a
/// negative eigenvalue is an error rather than rounding.
pub fn psd_sqrt_clamped(h: &ComplexMatrix, floor: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let min = eig.min_eigenvalue();
    if min < floor {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    // below the solver's resolution an eigenvalue is indistinguishable from 0
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let noise = eig.eigenvalues.len() as f64 * f64::EPSILON * scale;
    Ok(eig
        .reconstruct_with(|l| if l <= noise { 0.0 } else { l.sqrt() })
        .hermitian_part())
}

/// Orthonormal basis of the numerical kernel of a square matrix.
///
/// A unit vector belongs to the kernel when `‖m·v‖₂ ≤ tol·‖m‖_F`. The
/// candidates are the eigenvectors of `m†m`; each one is accepted on its
/// directly evaluated residual, since the small eigenvalues of `m†m` are
/// polluted by rounding at the `eps·‖m‖²` level.
pub fn kernel_basis(m: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<C64>>> {
    m.require_square("kernel_basis input")?;
    null_space(m, tol)
}

/// [`kernel_basis`] without the squareness requirement.
pub fn null_space(m: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<C64>>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("rank tolerance must be positive, got {tol}")));
    }
    m.check_finite()?;
    let n = m.cols();
    let norm = m.frobenius_norm();
    if norm == 0.0 {
        return Ok((0..n)
            .map(|k| (0..n).map(|i| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect());
    }
    let gram = m.adjoint().matmul(m).hermitian_part();
    let eig = hermitian_eig(&gram)?;
    let threshold = tol * norm;
    let mut basis = Vec::new();
    for k in 0..n {
        let v = eig.eigenvectors.column(k);
        if vec_norm(&m.matvec(&v)) <= threshold {
            basis.push(v);
        }
    }
    Ok(basis)
}
