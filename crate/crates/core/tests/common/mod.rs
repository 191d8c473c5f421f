//! Test-only reference implementations built on nalgebra, independent of
//! the crate's own linear algebra and generator assembly.
#![allow(dead_code)]

use dissipchain::ComplexMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

pub type NaMatrix = DMatrix<C64>;

pub fn to_na(m: &ComplexMatrix) -> NaMatrix {
    NaMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn from_na(m: &NaMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn max_abs_diff(a: &NaMatrix, b: &NaMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `|g⟩⟨e|` in the `(e, g)` basis.
pub fn sigma_minus() -> NaMatrix {
    NaMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
}

/// σ⁻ on `site` (1-based) of an `n`-qubit register, site 1 leftmost.
pub fn site_lowering(site: usize, n: usize) -> NaMatrix {
    let mut out = NaMatrix::identity(1, 1);
    for k in 1..=n {
        let factor = if k == site { sigma_minus() } else { NaMatrix::identity(2, 2) };
        out = out.kronecker(&factor);
    }
    out
}

/// Link operators `σ⁻_a + σ⁻_b` with their rates.
pub fn chain_links(n: usize, closed: bool, rates: &[f64]) -> Vec<(NaMatrix, f64)> {
    let n_links = if closed { n } else { n - 1 };
    assert_eq!(rates.len(), n_links);
    (0..n_links)
        .map(|k| {
            let a = k + 1;
            let b = if a == n { 1 } else { a + 1 };
            (site_lowering(a, n) + site_lowering(b, n), rates[k])
        })
        .collect()
}

/// `Σ r·(2 L ρ L† − L†L ρ − ρ L†L)`.
pub fn lindblad_rhs(links: &[(NaMatrix, f64)], rho: &NaMatrix) -> NaMatrix {
    let mut out = NaMatrix::zeros(rho.nrows(), rho.ncols());
    for (l, r) in links {
        let ld = l.adjoint();
        let ldl = &ld * l;
        out += (l * rho * &ld * c(2.0) - &ldl * rho - rho * &ldl) * c(*r);
    }
    out
}

/// Fixed-step classical Runge–Kutta on the density matrix.
pub fn rk4(links: &[(NaMatrix, f64)], rho0: &NaMatrix, t: f64, h: f64) -> NaMatrix {
    let steps = (t / h).round() as usize;
    assert!((steps as f64 * h - t).abs() < 1e-9, "t must be a multiple of h");
    let hc = c(h);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = lindblad_rhs(links, &rho);
        let k2 = lindblad_rhs(links, &(&rho + &k1 * (hc * 0.5)));
        let k3 = lindblad_rhs(links, &(&rho + &k2 * (hc * 0.5)));
        let k4 = lindblad_rhs(links, &(&rho + &k3 * hc));
        rho += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * (hc / 6.0);
    }
    rho
}

/// Row-stacking generator assembled term by term from the Lindblad form:
/// `vec(A ρ B) = (A ⊗ Bᵀ) vec(ρ)`.
pub fn assembled_generator(links: &[(NaMatrix, f64)]) -> NaMatrix {
    let d = links[0].0.nrows();
    let id = NaMatrix::identity(d, d);
    let mut m = NaMatrix::zeros(d * d, d * d);
    for (l, r) in links {
        let ld = l.adjoint();
        let ldl = &ld * l;
        let jump = l.kronecker(&ld.transpose()) * c(2.0);
        let left = ldl.kronecker(&id);
        let right = id.kronecker(&ldl.transpose());
        m += (jump - left - right) * c(*r);
    }
    m
}

/// `(σy⊗σy) ρ* (σy⊗σy)`, with σy written out by hand.
pub fn spin_flipped(rho: &NaMatrix) -> NaMatrix {
    let i = C64::new(0.0, 1.0);
    let sy = NaMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)]);
    let yy = sy.kronecker(&sy);
    &yy * rho.conjugate() * &yy
}

/// Concurrence from the eigenvalues of the non-Hermitian product `ρ ρ̃`,
/// found by a complex Schur decomposition.
pub fn brute_force_concurrence(rho: &NaMatrix) -> f64 {
    let product = rho * spin_flipped(rho);
    let eig = product
        .clone()
        .schur()
        .eigenvalues()
        .expect("triangular Schur form");
    let mut lambdas: Vec<f64> = eig.iter().map(|z| z.re.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// `ρ` restricted to the two given sites (1-based, `i < j`) by explicit
/// summation over the traced-out bits.
pub fn reduce_to_pair(rho: &NaMatrix, (i, j): (usize, usize), n: usize) -> NaMatrix {
    let bit = |idx: usize, site: usize| (idx >> (n - site)) & 1;
    let mut out = NaMatrix::zeros(4, 4);
    let d = 1 << n;
    for a in 0..d {
        for b in 0..d {
            let others_equal = (1..=n)
                .filter(|&s| s != i && s != j)
                .all(|s| bit(a, s) == bit(b, s));
            if others_equal {
                let ra = 2 * bit(a, i) + bit(a, j);
                let rb = 2 * bit(b, i) + bit(b, j);
                out[(ra, rb)] += rho[(a, b)];
            }
        }
    }
    out
}

/// Tensor product of independent random pure qubit states.
pub fn random_product_state<R: Rng>(rng: &mut R, n: usize) -> NaMatrix {
    let mut psi = NaMatrix::identity(1, 1);
    for _ in 0..n {
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let q = NaMatrix::from_column_slice(
            2,
            1,
            &[c((theta / 2.0).cos()), C64::from_polar((theta / 2.0).sin(), phi)],
        );
        psi = psi.kronecker(&q);
    }
    &psi * psi.adjoint()
}

/// Werner state `p |Ψ⁻⟩⟨Ψ⁻| + (1 − p) I/4`.
pub fn werner(p: f64) -> NaMatrix {
    let h = 0.5f64.sqrt();
    let psi = NaMatrix::from_column_slice(4, 1, &[c(0.0), c(h), c(-h), c(0.0)]);
    &psi * psi.adjoint() * c(p) + NaMatrix::identity(4, 4) * c((1.0 - p) / 4.0)
}

/// `(|ee⟩ + |gg⟩)/√2`.
pub fn bell_phi_plus() -> NaMatrix {
    let h = 0.5f64.sqrt();
    let psi = NaMatrix::from_column_slice(4, 1, &[c(h), c(0.0), c(0.0), c(h)]);
    &psi * psi.adjoint()
}
