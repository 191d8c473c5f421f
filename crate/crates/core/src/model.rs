//! Qubit-chain operators and the vectorized Liouvillian.
//!
//! Basis ordering: each qubit is `{|e⟩, |g⟩}` with `|e⟩` first, and site 1
//! is the leftmost (most significant) tensor factor. So `|g…g⟩` is the last
//! basis vector. Density matrices are vectorized by row stacking,
//! `ρ[i][j] ↦ v[D·i + j]` (0-based), and the generator acts as `v̇ = M·v`.
//!
//! Sites and links are 1-based in every public function.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{kron, kron_all, ComplexMatrix};

/// Largest chain the dense builder accepts (D² = 1024).
pub const MAX_SITES: usize = 5;

/// Single-qubit constants in the `{|e⟩, |g⟩}` basis.
#[derive(Debug, Clone)]
pub struct QubitOperators {
    pub sigma_plus: ComplexMatrix,
    pub sigma_minus: ComplexMatrix,
    pub sigma_y: ComplexMatrix,
    pub sigma_z: ComplexMatrix,
    pub identity2: ComplexMatrix,
}

impl QubitOperators {
    pub fn new() -> Self {
        let sigma_plus = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let sigma_minus = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let sigma_y = (&sigma_minus - &sigma_plus).scale(C64::new(0.0, 1.0));
        let sigma_z = sigma_plus.commutator(&sigma_minus);
        Self { sigma_plus, sigma_minus, sigma_y, sigma_z, identity2: ComplexMatrix::identity(2) }
    }
}

impl Default for QubitOperators {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Closed,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Closed => "closed",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "closed" | "periodic" => Ok(Boundary::Closed),
            other => Err(Error::InvalidArgument(format!("unknown boundary {other:?}"))),
        }
    }
}

/// Chain geometry and per-link decay rates.
///
/// Link `k` couples sites `k` and `k+1`; on a closed chain link `n` couples
/// site `n` back to site 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    n_sites: usize,
    boundary: Boundary,
    link_rates: Vec<f64>,
}

impl ChainSpec {
    pub fn new(n_sites: usize, boundary: Boundary, link_rates: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_SITES).contains(&n_sites) {
            return Err(Error::InvalidChain(format!(
                "chain length must be in 2..={MAX_SITES}, got {n_sites}"
            )));
        }
        let expected = match boundary {
            Boundary::Open => n_sites - 1,
            Boundary::Closed => n_sites,
        };
        if link_rates.len() != expected {
            return Err(Error::InvalidChain(format!(
                "{boundary} chain of {n_sites} sites needs {expected} rates, got {}",
                link_rates.len()
            )));
        }
        if let Some(r) = link_rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidChain(format!("rates must be finite and nonnegative, got {r}")));
        }
        if !link_rates.iter().any(|&r| r > 0.0) {
            return Err(Error::InvalidChain("at least one rate must be positive".into()));
        }
        Ok(Self { n_sites, boundary, link_rates })
    }

    /// Three-site open chain with rates `(γ, 1−γ)`.
    pub fn open_three(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        Self::new(3, Boundary::Open, vec![gamma, 1.0 - gamma])
    }

    /// Three-site closed chain with rates `(γ, μ, ν)` on links 1–2, 2–3, 3–1.
    pub fn closed_three(gamma: f64, mu: f64, nu: f64) -> Result<Self> {
        Self::new(3, Boundary::Closed, vec![gamma, mu, nu])
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn link_rates(&self) -> &[f64] {
        &self.link_rates
    }

    pub fn n_links(&self) -> usize {
        self.link_rates.len()
    }

    /// Hilbert-space dimension `2^n`.
    pub fn hilbert_dim(&self) -> usize {
        1 << self.n_sites
    }

    /// The two (1-based) sites joined by `link`.
    pub fn link_sites(&self, link: usize) -> Result<(usize, usize)> {
        if link == 0 || link > self.n_links() {
            return Err(Error::LinkOutOfRange { link, links: self.n_links() });
        }
        let second = if link == self.n_sites { 1 } else { link + 1 };
        Ok((link, second))
    }
}

/// Row-stacked density matrix, `ρ[i][j] = v[D·i + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<C64>);

impl StateVector {
    pub fn new(data: Vec<C64>) -> Result<Self> {
        let d = (data.len() as f64).sqrt().round() as usize;
        if d == 0 || d * d != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "state vector length {} is not a perfect square",
                data.len()
            )));
        }
        Ok(Self(data))
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<C64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Side `D` of the matrix this vector represents.
    pub fn hilbert_dim(&self) -> usize {
        (self.0.len() as f64).sqrt().round() as usize
    }
}

pub fn vectorize(rho: &ComplexMatrix) -> Result<StateVector> {
    rho.require_square("density matrix")?;
    Ok(StateVector(rho.as_slice().to_vec()))
}

pub fn devectorize(v: &StateVector) -> Result<ComplexMatrix> {
    let d = v.hilbert_dim();
    ComplexMatrix::from_vec(d, d, v.0.clone())
}

/// `I₂^{⊗(site−1)} ⊗ σ⁻ ⊗ I₂^{⊗(n−site)}`.
pub fn lowering_operator(site: usize, n: usize) -> Result<ComplexMatrix> {
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    let ops = QubitOperators::new();
    let factors: Vec<&ComplexMatrix> = (1..=n)
        .map(|k| if k == site { &ops.sigma_minus } else { &ops.identity2 })
        .collect();
    Ok(kron_all(factors))
}

/// Collective jump operator `σ⁻_a + σ⁻_b` of the sites joined by `link`.
pub fn link_operator(link: usize, spec: &ChainSpec) -> Result<ComplexMatrix> {
    let (a, b) = spec.link_sites(link)?;
    let n = spec.n_sites();
    Ok(&lowering_operator(a, n)? + &lowering_operator(b, n)?)
}

/// Row-stacked superoperator of `ρ ↦ rate·(2LρL† − L†Lρ − ρL†L)`.
pub fn link_dissipator(l: &ComplexMatrix, rate: f64) -> ComplexMatrix {
    let d = l.rows();
    let id = ComplexMatrix::identity(d);
    let ldl = l.adjoint().matmul(l);
    let jump = kron(l, &l.conj()).scale_real(2.0);
    let left = kron(&ldl, &id);
    let right = kron(&id, &ldl.transpose());
    (&(&jump - &left) - &right).scale_real(rate)
}

/// The D²×D² generator of the chain.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    matrix: ComplexMatrix,
    spec: ChainSpec,
}

impl Liouvillian {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn hilbert_dim(&self) -> usize {
        self.spec.hilbert_dim()
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if v.len() != self.matrix.cols() {
            return Err(Error::DimensionMismatch(format!(
                "state of length {} for a generator of size {}",
                v.len(),
                self.matrix.cols()
            )));
        }
        Ok(StateVector(self.matrix.matvec(v.as_slice())))
    }
}

pub fn liouvillian(spec: &ChainSpec) -> Result<Liouvillian> {
    let d = spec.hilbert_dim();
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for (k, &rate) in spec.link_rates().iter().enumerate() {
        if rate == 0.0 {
            continue;
        }
        let l = link_operator(k + 1, spec)?;
        m = &m + &link_dissipator(&l, rate);
    }
    Ok(Liouvillian { matrix: m, spec: spec.clone() })
}

/// Row vector `w` with `w·vec(ρ) = tr ρ`.
pub fn trace_functional(d: usize) -> Vec<C64> {
    let mut w = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        w[d * i + i] = C64::new(1.0, 0.0);
    }
    w
}

fn qubit_count(d: usize) -> Result<usize> {
    if d == 0 || !d.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!("dimension {d} is not a power of two")));
    }
    Ok(d.trailing_zeros() as usize)
}

/// `Re tr(ρ·Σᵢ σ⁺ᵢσ⁻ᵢ)`, the mean number of excited qubits.
pub fn total_excitation(rho: &ComplexMatrix) -> Result<f64> {
    let d = rho.require_square("density matrix")?;
    let n = qubit_count(d)?;
    // Σ σ⁺σ⁻ is diagonal; a 0 bit marks an excited qubit
    Ok((0..d)
        .map(|k| rho[(k, k)].re * (n - k.count_ones() as usize) as f64)
        .sum())
}

/// Index of a product basis state such as `"eeg"`.
pub fn basis_index(label: &str) -> Result<usize> {
    if label.is_empty() || label.len() > 63 {
        return Err(Error::UnknownLabel(label.to_string()));
    }
    label.chars().try_fold(0usize, |acc, ch| match ch {
        'e' => Ok(acc << 1),
        'g' => Ok((acc << 1) | 1),
        _ => Err(Error::UnknownLabel(label.to_string())),
    })
}

/// Inverse of [`basis_index`].
pub fn basis_label(index: usize, n: usize) -> String {
    (0..n)
        .map(|k| if index >> (n - 1 - k) & 1 == 0 { 'e' } else { 'g' })
        .collect()
}

/// All `2^n` product labels in basis order.
pub fn all_basis_labels(n: usize) -> Vec<String> {
    (0..1usize << n).map(|k| basis_label(k, n)).collect()
}

/// `|label⟩⟨label|`.
pub fn basis_projector(label: &str) -> Result<ComplexMatrix> {
    let idx = basis_index(label)?;
    let d = 1usize << label.len();
    let mut rho = ComplexMatrix::zeros(d, d);
    rho[(idx, idx)] = C64::new(1.0, 0.0);
    Ok(rho)
}
