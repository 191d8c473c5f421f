//! Pairwise reduced states and Wootters concurrence.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{validate_density_matrix, Trajectory, MIN_EIGENVALUE_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, psd_sqrt_clamped, ComplexMatrix};
use crate::model::QubitOperators;

/// Negative eigenvalues of `√ρ·ρ̃·√ρ` down to this value are rounding.
pub const SPECTRUM_CLAMP: f64 = -1e-10;
/// Default threshold above which concurrence counts as nonzero.
pub const DEFAULT_BIRTH_TOL: f64 = 1e-6;
/// Default number of grid points after `t = 0` inspected for immediate onset.
pub const DEFAULT_BIRTH_WINDOW: usize = 5;

/// Orders a site pair as `(i, j)` with `i < j`.
pub fn normalize_pair(pair: (usize, usize)) -> Result<(usize, usize)> {
    if pair.0 == pair.1 {
        return Err(Error::UnknownPair(pair.0, pair.1));
    }
    Ok((pair.0.min(pair.1), pair.0.max(pair.1)))
}

/// Reduced state of sites `keep.0` and `keep.1` (1-based) of an `n`-qubit
/// density matrix. The first kept site becomes the first tensor factor.
pub fn partial_trace(rho: &ComplexMatrix, keep: (usize, usize), n: usize) -> Result<ComplexMatrix> {
    let d = 1usize << n;
    if rho.dims() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for {n} qubits",
            rho.rows(),
            rho.cols()
        )));
    }
    for site in [keep.0, keep.1] {
        if site == 0 || site > n {
            return Err(Error::SiteOutOfRange { site, n });
        }
    }
    if keep.0 == keep.1 {
        return Err(Error::UnknownPair(keep.0, keep.1));
    }
    let shift_a = n - keep.0;
    let shift_b = n - keep.1;
    let env_mask = !((1usize << shift_a) | (1usize << shift_b));
    let local = |k: usize| (((k >> shift_a) & 1) << 1) | ((k >> shift_b) & 1);

    let mut out = ComplexMatrix::zeros(4, 4);
    for r in 0..d {
        for c in 0..d {
            if r & env_mask == c & env_mask {
                out[(local(r), local(c))] += rho[(r, c)];
            }
        }
    }
    Ok(out)
}

/// `(σ_y⊗σ_y)·ρ*·(σ_y⊗σ_y)`.
pub fn spin_flip(rho4: &ComplexMatrix) -> ComplexMatrix {
    let ops = QubitOperators::new();
    let yy = kron(&ops.sigma_y, &ops.sigma_y);
    yy.matmul(&rho4.conj()).matmul(&yy)
}

/// Square roots of the eigenvalues of `ρ·ρ̃`, descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WoottersSpectrum {
    pub lambdas: [f64; 4],
}

impl WoottersSpectrum {
    pub fn concurrence(&self) -> f64 {
        let [l1, l2, l3, l4] = self.lambdas;
        (l1 - l2 - l3 - l4).clamp(0.0, 1.0)
    }
}

/// Spectrum of `ρ·ρ̃`, descending square roots.
///
/// The λ's are the singular values of `A = √ρ·√ρ̃` (since `A·A† = √ρ·ρ̃·√ρ`),
/// read off as the top half of the spectrum of the Hermitian dilation
/// `[[0, A], [A†, 0]]`. Going through `eig(√ρ·ρ̃·√ρ)` and then square roots
/// turns rounding-level zero eigenvalues into errors of order 1e-8.
pub fn wootters_spectrum(rho4: &ComplexMatrix) -> Result<WoottersSpectrum> {
    if rho4.dims() != (4, 4) {
        return Err(Error::DimensionMismatch(format!(
            "concurrence needs a 4x4 matrix, got {}x{}",
            rho4.rows(),
            rho4.cols()
        )));
    }
    validate_density_matrix(rho4)?;
    let rho = rho4.hermitian_part();
    let root = psd_sqrt_clamped(&rho, MIN_EIGENVALUE_FLOOR)?;
    // √ρ̃ = (σy⊗σy)·(√ρ)*·(σy⊗σy) because σy⊗σy is a real symmetric involution
    let a = root.matmul(&spin_flip(&root));
    let a_dag = a.adjoint();
    let dilation = ComplexMatrix::from_fn(8, 8, |i, j| match (i < 4, j < 4) {
        (true, false) => a[(i, j - 4)],
        (false, true) => a_dag[(i - 4, j)],
        _ => C64::new(0.0, 0.0),
    });
    let eig = hermitian_eig(&dilation)?;

    let mut lambdas = [0.0; 4];
    for (slot, &sigma) in lambdas.iter_mut().zip(eig.eigenvalues.iter().rev()) {
        if sigma < SPECTRUM_CLAMP {
            return Err(Error::NotPsd { min_eigenvalue: sigma });
        }
        *slot = sigma.max(0.0);
    }
    Ok(WoottersSpectrum { lambdas })
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho4: &ComplexMatrix) -> Result<f64> {
    Ok(wootters_spectrum(rho4)?.concurrence())
}

/// Concurrence of selected site pairs along a trajectory.
#[derive(Debug, Clone)]
pub struct ConcurrenceSeries {
    pub times: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// `values[t][p]`.
    pub values: Vec<Vec<f64>>,
}

impl ConcurrenceSeries {
    pub fn pair_index(&self, pair: (usize, usize)) -> Result<usize> {
        let key = normalize_pair(pair)?;
        self.pairs
            .iter()
            .position(|&p| p == key)
            .ok_or(Error::UnknownPair(pair.0, pair.1))
    }

    /// The time series of one pair.
    pub fn series(&self, pair: (usize, usize)) -> Result<Vec<f64>> {
        let p = self.pair_index(pair)?;
        Ok(self.values.iter().map(|row| row[p]).collect())
    }
}

pub fn concurrence_series(traj: &Trajectory, pairs: &[(usize, usize)]) -> Result<ConcurrenceSeries> {
    let n = traj.spec.n_sites();
    let pairs: Vec<(usize, usize)> = pairs.iter().map(|&p| normalize_pair(p)).collect::<Result<_>>()?;
    let values = (0..traj.len())
        .into_par_iter()
        .map(|k| {
            let rho = traj.density_matrix(k);
            pairs
                .iter()
                .map(|&p| concurrence(&partial_trace(&rho, p, n)?))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcurrenceSeries { times: traj.times.clone(), pairs, values })
}

/// Onset of entanglement for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BirthClass {
    /// Nonzero within the first `window` steps.
    Immediate,
    /// Zero up to the window, first nonzero at the given time.
    Sudden(f64),
    /// Never above the threshold on the grid.
    Never,
}

impl BirthClass {
    pub fn name(&self) -> &'static str {
        match self {
            BirthClass::Immediate => "immediate",
            BirthClass::Sudden(_) => "sudden",
            BirthClass::Never => "never",
        }
    }
}

/// Grid-based sudden-birth classification.
///
/// `Never` if every value is at most `tol`; `Immediate` if the initial value
/// or one of the `window` values after it exceeds `tol`; otherwise
/// `Sudden(t*)` with `t*` the first grid time whose value exceeds `tol`.
pub fn sudden_birth(
    series: &ConcurrenceSeries,
    pair: (usize, usize),
    tol: f64,
    window: usize,
) -> Result<BirthClass> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let values = series.series(pair)?;
    let times = &series.times;
    if window == 0 || times.len() < 2 * window {
        return Err(Error::GridTooCoarse(format!(
            "{} points for a window of {window}",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    let slack = 1e-9 * dt.max(f64::MIN_POSITIVE);
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > slack) {
        return Err(Error::GridTooCoarse("time grid is not uniform".into()));
    }

    let Some(first) = values.iter().position(|&c| c > tol) else {
        return Ok(BirthClass::Never);
    };
    Ok(if first <= window { BirthClass::Immediate } else { BirthClass::Sudden(times[first]) })
}
