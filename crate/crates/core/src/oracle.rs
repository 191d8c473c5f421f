//! Closed-form steady-state results for the three-site open chain with
//! rates `(γ, 1−γ)`.
//!
//! The stationary states reached from product initial states form the
//! one-parameter family `ρ_s(f)`: weight `3f` on the dark state
//! `(|egg⟩ − |geg⟩ + |gge⟩)/√3` and `1−3f` on `|ggg⟩`. These functions are
//! the analytic reference the numerical pipeline is checked against.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// The eight product initial states of the three-site chain, basis order.
pub const THREE_SITE_LABELS: [&str; 8] = ["eee", "eeg", "ege", "egg", "gee", "geg", "gge", "ggg"];

/// Upper end of the admissible `f` range.
pub const F_MAX: f64 = 1.0 / 3.0;

const F_SLACK: f64 = 1e-12;

/// Basis indices of `|egg⟩, |geg⟩, |gge⟩` and the dark-state signs.
const DARK_SUPPORT: [(usize, f64); 3] = [(3, 1.0), (5, -1.0), (6, 1.0)];
const GROUND: usize = 7;

/// Stationary `f` reached from `|label⟩` at asymmetry `gamma`.
pub fn f_closed_form(label: &str, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    let g = gamma;
    let g2 = g * g;
    let den = 27.0 * (8.0 + 3.0 * g - 3.0 * g2);
    let f = match label {
        "eee" => (24.0 - 19.0 * g + 19.0 * g2) / (216.0 + 81.0 * g - 81.0 * g2),
        "eeg" => 4.0 * (4.0 - 5.0 * g + g2) / den,
        "ege" => 4.0 * (4.0 + 5.0 * g - 5.0 * g2) / den,
        "egg" | "geg" | "gge" => 1.0 / 9.0,
        "gee" => 4.0 * g * (3.0 + g) / den,
        "ggg" => 0.0,
        _ => return Err(Error::UnknownLabel(label.to_string())),
    };
    Ok(f)
}

/// A labelled closed-form value.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleF {
    pub state_label: String,
    pub gamma: f64,
    pub f: f64,
}

impl OracleF {
    pub fn new(state_label: &str, gamma: f64) -> Result<Self> {
        let f = f_closed_form(state_label, gamma)?;
        Ok(Self { state_label: state_label.to_string(), gamma, f })
    }
}

fn check_f(f: f64) -> Result<()> {
    if f.is_finite() && (-F_SLACK..=F_MAX + F_SLACK).contains(&f) {
        Ok(())
    } else {
        Err(Error::FOutOfRange(f))
    }
}

/// The 8×8 stationary state `ρ_s(f)`.
pub fn steady_state_matrix(f: f64) -> Result<ComplexMatrix> {
    check_f(f)?;
    let mut rho = ComplexMatrix::zeros(8, 8);
    for &(i, si) in &DARK_SUPPORT {
        for &(j, sj) in &DARK_SUPPORT {
            rho[(i, j)] = C64::new(si * sj * f, 0.0);
        }
    }
    rho[(GROUND, GROUND)] = C64::new(1.0 - 3.0 * f, 0.0);
    Ok(rho)
}

/// Two-site reduction of `ρ_s(f)` in the `{ee, eg, ge, gg}` basis.
///
/// Adjacent pairs carry coherence `−f`, the end pair `(1,3)` carries `+f`.
pub fn reduced_pair_matrix(f: f64, pair: (usize, usize)) -> Result<ComplexMatrix> {
    check_f(f)?;
    let key = (pair.0.min(pair.1), pair.0.max(pair.1));
    let coherence = match key {
        (1, 2) | (2, 3) => -f,
        (1, 3) => f,
        _ => return Err(Error::UnknownPair(pair.0, pair.1)),
    };
    let mut rho = ComplexMatrix::from_real_diag(&[0.0, f, f, 1.0 - 2.0 * f]);
    rho[(1, 2)] = C64::new(coherence, 0.0);
    rho[(2, 1)] = C64::new(coherence, 0.0);
    Ok(rho)
}

/// Pairwise stationary concurrence, identical for all three pairs.
pub fn steady_concurrence(f: f64) -> Result<f64> {
    check_f(f)?;
    Ok(2.0 * f)
}
