//! Time evolution under a [`Liouvillian`], steady states and kernel
//! structure.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    expm, hermitian_eig, kernel_basis, null_space, vec_max_abs, ComplexMatrix, DEFAULT_RANK_TOL,
};
use crate::model::{devectorize, total_excitation, vectorize, Boundary, ChainSpec, Liouvillian, StateVector};
use crate::oracle;

/// `|tr ρ − 1|` allowed for a valid state.
pub const TRACE_TOL: f64 = 1e-9;
/// `‖ρ − ρ†‖_F` allowed for a valid state.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Most negative eigenvalue allowed for a valid state.
pub const MIN_EIGENVALUE_FLOOR: f64 = -1e-7;
/// Allowed increase of the excitation number between successive states.
pub const EXCITATION_SLACK: f64 = 1e-9;
/// `‖M·v‖∞` below which a state counts as stationary.
pub const STEADY_RESIDUAL_TOL: f64 = 1e-10;
/// Largest horizon tried is `2^MAX_HORIZON_DOUBLINGS`.
pub const MAX_HORIZON_DOUBLINGS: u32 = 20;
/// Agreement required between every entry of `ρ_∞` and `ρ_s(f)`.
pub const F_CONSISTENCY_TOL: f64 = 1e-8;

/// Physicality figures of one density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDiagnostics {
    pub trace_err: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub excitation: f64,
}

impl DensityDiagnostics {
    pub fn is_physical(&self) -> bool {
        self.trace_err <= TRACE_TOL
            && self.hermiticity_defect <= HERMITICITY_TOL
            && self.min_eigenvalue >= MIN_EIGENVALUE_FLOOR
    }
}

/// Trace error, Hermiticity defect, smallest eigenvalue and excitation of `rho`.
pub fn diagnose(rho: &ComplexMatrix) -> Result<DensityDiagnostics> {
    rho.require_square("density matrix")?;
    rho.check_finite()?;
    let trace_err = (rho.trace() - C64::new(1.0, 0.0)).norm();
    let hermiticity_defect = rho.hermiticity_defect();
    let min_eigenvalue = hermitian_eig(&rho.hermitian_part())?.min_eigenvalue();
    let excitation = total_excitation(rho)?;
    Ok(DensityDiagnostics { trace_err, hermiticity_defect, min_eigenvalue, excitation })
}

/// Diagnoses `rho` and fails with `InvalidState` if it is not a density matrix.
pub fn validate_density_matrix(rho: &ComplexMatrix) -> Result<DensityDiagnostics> {
    let diag = diagnose(rho)?;
    if !diag.is_physical() {
        return Err(Error::InvalidState(format!(
            "trace error {:.3e}, Hermiticity defect {:.3e}, minimum eigenvalue {:.3e}",
            diag.trace_err, diag.hermiticity_defect, diag.min_eigenvalue
        )));
    }
    Ok(diag)
}

/// Evolved states on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub spec: ChainSpec,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn density_matrix(&self, k: usize) -> ComplexMatrix {
        devectorize(&self.states[k]).expect("trajectory states are square")
    }

    pub fn diagnostics(&self) -> Result<Vec<DensityDiagnostics>> {
        (0..self.len()).map(|k| diagnose(&self.density_matrix(k))).collect()
    }

    /// Checks every state for physicality and the excitation number for
    /// monotone decay.
    pub fn check_physicality(&self) -> Result<()> {
        let diags = self.diagnostics()?;
        for (k, d) in diags.iter().enumerate() {
            if !d.is_physical() {
                return Err(Error::InvalidState(format!(
                    "t = {}: trace error {:.3e}, Hermiticity defect {:.3e}, minimum eigenvalue {:.3e}",
                    self.times[k], d.trace_err, d.hermiticity_defect, d.min_eigenvalue
                )));
            }
        }
        for (k, w) in diags.windows(2).enumerate() {
            if w[1].excitation > w[0].excitation + EXCITATION_SLACK {
                return Err(Error::InvalidState(format!(
                    "excitation grows from {} to {} at t = {}",
                    w[0].excitation,
                    w[1].excitation,
                    self.times[k + 1]
                )));
            }
        }
        Ok(())
    }
}

fn check_initial_state(gen: &Liouvillian, rho0: &ComplexMatrix) -> Result<()> {
    let d = gen.hilbert_dim();
    if rho0.dims() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "initial state is {}x{}, chain needs {d}x{d}",
            rho0.rows(),
            rho0.cols()
        )));
    }
    validate_density_matrix(rho0).map(|_| ())
}

fn is_uniform(times: &[f64]) -> bool {
    if times.len() < 3 {
        return true;
    }
    let dt = times[1] - times[0];
    let slack = 1e-12 * times.last().unwrap().abs().max(1.0);
    times
        .iter()
        .enumerate()
        .all(|(k, &t)| (t - k as f64 * dt).abs() <= slack)
}

/// `states[k] = exp(M·times[k])·vec(rho0)`.
///
/// On a uniform grid a single step operator `exp(M·dt)` is reused.
pub fn propagate(gen: &Liouvillian, rho0: &ComplexMatrix, times: &[f64]) -> Result<Trajectory> {
    check_initial_state(gen, rho0)?;
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidArgument("time grid must start at 0".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("time grid must be finite and ascending".into()));
    }

    let m = gen.matrix();
    let mut states = Vec::with_capacity(times.len());
    let mut current = vectorize(rho0)?.into_inner();
    states.push(StateVector::new(current.clone())?);

    if is_uniform(times) && times.len() > 1 {
        let step = expm(m, times[1]);
        for _ in 1..times.len() {
            current = step.matvec(&current);
            states.push(StateVector::new(current.clone())?);
        }
    } else {
        for w in times.windows(2) {
            let dt = w[1] - w[0];
            if dt > 0.0 {
                current = expm(m, dt).matvec(&current);
            }
            states.push(StateVector::new(current.clone())?);
        }
    }
    Ok(Trajectory { times: times.to_vec(), states, spec: gen.spec().clone() })
}

/// Outcome of a steady-state solve.
#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    pub kernel_dimension: usize,
    pub steady_state: ComplexMatrix,
    /// `‖M·vec(ρ_∞)‖∞`.
    pub residual: f64,
    /// Horizon of the returned state.
    pub elapsed_t: f64,
    /// `f` of the three-site open chain, when `ρ_∞` has the `ρ_s(f)` form.
    pub f_fit: Option<f64>,
}

/// Evolves `rho0` over horizons `T = 1, 2, 4, …` until `‖M·v‖∞ ≤ 1e-10`,
/// then keeps doubling while the residual still halves.
///
/// The extra doublings matter for concurrence: a decaying population of
/// size ε shifts `C` by about `√ε`, so a state that merely meets the
/// residual tolerance can leave pair concurrences 1e-7 apart.
pub fn steady_state_from(gen: &Liouvillian, rho0: &ComplexMatrix) -> Result<SteadyStateReport> {
    check_initial_state(gen, rho0)?;
    let m = gen.matrix();
    let v0 = vectorize(rho0)?.into_inner();

    let mut horizon = 1.0;
    let mut propagator = expm(m, horizon);
    let mut doublings = 0;
    let mut v = propagator.matvec(&v0);
    let mut residual = vec_max_abs(&m.matvec(&v));
    while residual > STEADY_RESIDUAL_TOL {
        if doublings == MAX_HORIZON_DOUBLINGS {
            return Err(Error::NoConvergence(format!(
                "residual {residual:.3e} still above {STEADY_RESIDUAL_TOL:e} at T = {horizon}"
            )));
        }
        propagator = propagator.matmul(&propagator);
        horizon *= 2.0;
        doublings += 1;
        v = propagator.matvec(&v0);
        residual = vec_max_abs(&m.matvec(&v));
    }
    while residual > 0.0 && doublings < MAX_HORIZON_DOUBLINGS {
        let next_propagator = propagator.matmul(&propagator);
        let next_v = next_propagator.matvec(&v0);
        let next_residual = vec_max_abs(&m.matvec(&next_v));
        if next_residual > 0.5 * residual {
            break;
        }
        propagator = next_propagator;
        v = next_v;
        residual = next_residual;
        horizon *= 2.0;
        doublings += 1;
    }

    let steady_state = devectorize(&StateVector::new(v)?)?;
    let f_fit = fit_f(gen.spec(), &steady_state);
    let kernel_dimension = kernel_report(gen)?.dimension;
    Ok(SteadyStateReport { kernel_dimension, steady_state, residual, elapsed_t: horizon, f_fit })
}

/// Reads `f` from entry (4,4) of a three-site open-chain state and accepts
/// it only if the whole matrix matches `ρ_s(f)`.
pub fn fit_f(spec: &ChainSpec, rho: &ComplexMatrix) -> Option<f64> {
    if spec.n_sites() != 3 || spec.boundary() != Boundary::Open || rho.dims() != (8, 8) {
        return None;
    }
    let f = rho[(3, 3)].re;
    let model = oracle::steady_state_matrix(f).ok()?;
    ((rho - &model).max_abs() <= F_CONSISTENCY_TOL).then_some(f)
}

/// Numerical kernel of a generator.
#[derive(Debug, Clone)]
pub struct KernelReport {
    pub dimension: usize,
    pub basis: Vec<StateVector>,
}

pub fn kernel_report(gen: &Liouvillian) -> Result<KernelReport> {
    let basis = kernel_basis(gen.matrix(), DEFAULT_RANK_TOL)?
        .into_iter()
        .map(StateVector::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelReport { dimension: basis.len(), basis })
}

/// Dimension of `{X : [X, L_k] = 0 for every k}`.
///
/// Solved as the kernel of the stacked row-stacking superoperators
/// `I⊗L_kᵀ − L_k⊗I`.
pub fn commutant_dimension(links: &[ComplexMatrix]) -> Result<usize> {
    let Some(first) = links.first() else {
        return Err(Error::InvalidArgument("no operators given".into()));
    };
    let d = first.require_square("jump operator")?;
    if links.iter().any(|l| l.dims() != (d, d)) {
        return Err(Error::DimensionMismatch("jump operators differ in dimension".into()));
    }
    let id = ComplexMatrix::identity(d);
    let blocks: Vec<ComplexMatrix> = links
        .iter()
        .map(|l| &crate::linalg::kron(&id, &l.transpose()) - &crate::linalg::kron(l, &id))
        .collect();
    let stacked = ComplexMatrix::vstack(&blocks)?;
    Ok(null_space(&stacked, DEFAULT_RANK_TOL)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{basis_projector, liouvillian, link_operator, lowering_operator, QubitOperators};

    fn open(gamma: f64) -> Liouvillian {
        liouvillian(&ChainSpec::open_three(gamma).unwrap()).unwrap()
    }

    #[test]
    fn zero_time_returns_initial_state() {
        let rho = basis_projector("eeg").unwrap();
        let traj = propagate(&open(0.5), &rho, &[0.0]).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj.density_matrix(0), rho);
    }

    #[test]
    fn ground_state_never_moves() {
        let rho = basis_projector("ggg").unwrap();
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.37).collect();
        let traj = propagate(&open(0.3), &rho, &times).unwrap();
        for k in 0..traj.len() {
            assert!((&traj.density_matrix(k) - &rho).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn uniform_and_irregular_grids_agree() {
        let gen = open(0.4);
        let rho = basis_projector("eee").unwrap();
        let uniform = propagate(&gen, &rho, &[0.0, 0.5, 1.0, 1.5]).unwrap();
        let irregular = propagate(&gen, &rho, &[0.0, 0.2, 1.5]).unwrap();
        let a = uniform.density_matrix(3);
        let b = irregular.density_matrix(2);
        assert!((&a - &b).max_abs() <= 1e-12);
    }

    #[test]
    fn propagate_rejects_bad_input() {
        let gen = open(0.5);
        assert!(matches!(
            propagate(&gen, &basis_projector("ee").unwrap(), &[0.0]),
            Err(Error::DimensionMismatch(_))
        ));
        let not_a_state = basis_projector("eee").unwrap().scale_real(2.0);
        assert!(matches!(propagate(&gen, &not_a_state, &[0.0]), Err(Error::InvalidState(_))));
        let rho = basis_projector("eee").unwrap();
        assert!(propagate(&gen, &rho, &[0.1, 0.2]).is_err());
        assert!(propagate(&gen, &rho, &[0.0, 0.2, 0.1]).is_err());
    }

    #[test]
    fn single_excitation_steady_state() {
        for &g in &[0.1, 0.5, 0.9] {
            let report = steady_state_from(&open(g), &basis_projector("egg").unwrap()).unwrap();
            let expected = oracle::steady_state_matrix(1.0 / 9.0).unwrap();
            assert!((&report.steady_state - &expected).max_abs() <= 1e-8);
            assert!((report.f_fit.unwrap() - 1.0 / 9.0).abs() <= 1e-8);
            assert!(report.residual <= STEADY_RESIDUAL_TOL);
        }
    }

    #[test]
    fn fully_excited_steady_state() {
        let report = steady_state_from(&open(0.5), &basis_projector("eee").unwrap()).unwrap();
        assert!((report.f_fit.unwrap() - 11.0 / 135.0).abs() <= 1e-6);
        assert_eq!(report.kernel_dimension, 4);
        validate_density_matrix(&report.steady_state).unwrap();
    }

    #[test]
    fn closed_chain_relaxes_to_ground() {
        let gen = liouvillian(&ChainSpec::closed_three(0.3, 0.5, 0.2).unwrap()).unwrap();
        let ground = basis_projector("ggg").unwrap();
        for label in oracle::THREE_SITE_LABELS {
            let report = steady_state_from(&gen, &basis_projector(label).unwrap()).unwrap();
            assert!((&report.steady_state - &ground).max_abs() <= 1e-9, "{label}");
            assert_eq!(report.kernel_dimension, 1);
            assert_eq!(report.f_fit, None);
        }
    }

    #[test]
    fn kernel_states_are_fixed() {
        let gen = open(0.35);
        for &f in &[0.0, 0.05, 1.0 / 9.0, 0.25, 1.0 / 3.0] {
            let rho = oracle::steady_state_matrix(f).unwrap();
            let report = steady_state_from(&gen, &rho).unwrap();
            assert_eq!(report.elapsed_t, 1.0);
            assert!(report.residual <= STEADY_RESIDUAL_TOL);
            assert!((&report.steady_state - &rho).max_abs() <= 1e-10);
        }
    }

    #[test]
    fn kernel_dimensions() {
        let closed = liouvillian(&ChainSpec::closed_three(0.3, 0.5, 0.2).unwrap()).unwrap();
        let k = kernel_report(&closed).unwrap();
        assert_eq!(k.dimension, 1);
        let v = k.basis[0].as_slice();
        assert!((v[63].norm() - 1.0).abs() <= 1e-10);

        let k = kernel_report(&open(0.5)).unwrap();
        assert!(k.dimension >= 2);
    }

    #[test]
    fn two_site_singlet_is_dark() {
        let spec = ChainSpec::new(2, Boundary::Open, vec![1.0]).unwrap();
        let l = link_operator(1, &spec).unwrap();
        let h = 0.5f64.sqrt();
        let singlet = [C64::new(0.0, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(0.0, 0.0)];
        assert!(vec_max_abs(&l.matvec(&singlet)) == 0.0);
        let gen = liouvillian(&spec).unwrap();
        let proj = vectorize(&ComplexMatrix::outer(&singlet, &singlet)).unwrap();
        assert!(vec_max_abs(gen.apply(&proj).unwrap().as_slice()) <= 1e-15);
        assert_eq!(kernel_report(&gen).unwrap().dimension, 4);
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(commutant_dimension(&[ComplexMatrix::identity(4)]).unwrap(), 16);
        let ops = QubitOperators::new();
        assert_eq!(commutant_dimension(std::slice::from_ref(&ops.sigma_minus)).unwrap(), 2);
        let spec = ChainSpec::open_three(0.5).unwrap();
        let links = [link_operator(1, &spec).unwrap(), link_operator(2, &spec).unwrap()];
        assert!(commutant_dimension(&links).unwrap() >= 4);
        // each single-site lowering operator lies in the commutant
        for site in 1..=3 {
            let s = lowering_operator(site, 3).unwrap();
            for l in &links {
                assert_eq!(s.commutator(l).max_abs(), 0.0);
            }
        }
        assert!(commutant_dimension(&[]).is_err());
        assert!(commutant_dimension(&[ComplexMatrix::identity(2), ComplexMatrix::identity(4)]).is_err());
    }

    #[test]
    fn excitation_decays() {
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
        let traj = propagate(&open(0.7), &basis_projector("eee").unwrap(), &times).unwrap();
        traj.check_physicality().unwrap();
    }
}
