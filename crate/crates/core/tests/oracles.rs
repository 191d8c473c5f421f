mod common;

use dissipchain::dynamics::{commutant_dimension, kernel_report, propagate};
use dissipchain::entanglement::{concurrence, concurrence_series, partial_trace, sudden_birth, BirthClass};
use dissipchain::linalg::{expm, hermitian_eig};
use dissipchain::model::{basis_projector, link_operator, liouvillian, Boundary, ChainSpec};
use dissipchain::oracle::steady_state_matrix;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{from_na, to_na};

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> common::NaMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

#[test]
fn generator_matches_term_by_term_assembly() {
    let cases = [
        ChainSpec::open_three(0.3).unwrap(),
        ChainSpec::closed_three(0.3, 0.5, 0.2).unwrap(),
        ChainSpec::new(2, Boundary::Open, vec![0.7]).unwrap(),
        ChainSpec::new(4, Boundary::Open, vec![0.2, 0.5, 0.3]).unwrap(),
    ];
    for spec in cases {
        let links = common::chain_links(spec.n_sites(), spec.boundary() == Boundary::Closed, spec.link_rates());
        let reference = common::assembled_generator(&links);
        let m = to_na(liouvillian(&spec).unwrap().matrix());
        assert!(common::max_abs_diff(&m, &reference) < 1e-14, "{spec:?}");
    }
}

#[test]
fn link_operators_match_hand_built() {
    let spec = ChainSpec::closed_three(0.2, 0.3, 0.5).unwrap();
    let links = common::chain_links(3, true, spec.link_rates());
    for (k, (l, _)) in links.iter().enumerate() {
        let ours = to_na(&link_operator(k + 1, &spec).unwrap());
        assert_eq!(common::max_abs_diff(&ours, l), 0.0, "link {}", k + 1);
    }
}

#[test]
fn hermitian_eig_agrees_with_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [4, 8, 16] {
        for _ in 0..5 {
            let h = random_hermitian(&mut rng, n);
            let mut reference: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().cloned().collect();
            reference.sort_by(f64::total_cmp);
            let ours = hermitian_eig(&from_na(&h)).unwrap();
            for (a, b) in ours.eigenvalues.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn expm_agrees_with_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for gamma in [0.1, 0.5, 0.9] {
        let m = liouvillian(&ChainSpec::open_three(gamma).unwrap()).unwrap();
        for t in [0.01, 0.7, 3.0] {
            let ours = to_na(&expm(m.matrix(), t));
            let reference = (to_na(m.matrix()) * C64::new(t, 0.0)).exp();
            assert!(common::max_abs_diff(&ours, &reference) < 1e-11, "γ={gamma} t={t}");
        }
    }
    let a = DMatrix::from_fn(6, 6, |_, _| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
    let ours = to_na(&expm(&from_na(&a), 1.5));
    let reference = (&a * C64::new(1.5, 0.0)).exp();
    let scale = reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(common::max_abs_diff(&ours, &reference) < 1e-12 * scale);
}

#[test]
fn steady_family_spectrum_brute_force() {
    // ρ_s(f) has eigenvalues 3f and 1 − 3f
    let rho = to_na(&steady_state_matrix(1.0 / 9.0).unwrap());
    let mut eig: Vec<f64> = rho.symmetric_eigen().eigenvalues.iter().cloned().collect();
    eig.sort_by(f64::total_cmp);
    assert!(eig[..6].iter().all(|x| x.abs() < 1e-14));
    assert!((eig[6] - 1.0 / 3.0).abs() < 1e-14);
    assert!((eig[7] - 2.0 / 3.0).abs() < 1e-14);
}

#[test]
fn concurrence_matches_brute_force_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let a = DMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        // rank-deficient mixtures exercise the √ρ route hardest
        let rank = rng.gen_range(1..=4);
        let a = a.columns(0, rank).into_owned();
        let rho = &a * a.adjoint();
        let rho = &rho / rho.trace();
        let brute = common::brute_force_concurrence(&rho);
        let ours = concurrence(&from_na(&rho)).unwrap();
        assert!((ours - brute).abs() < 1e-7, "rank {rank}: {ours} vs {brute}");
    }
}

#[test]
fn partial_trace_matches_explicit_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = DMatrix::from_fn(8, 8, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let rho = &a * a.adjoint();
    let rho = &rho / rho.trace();
    for pair in [(1, 2), (2, 3), (1, 3)] {
        let ours = to_na(&partial_trace(&from_na(&rho), pair, 3).unwrap());
        assert!(common::max_abs_diff(&ours, &common::reduce_to_pair(&rho, pair, 3)) < 1e-15);
    }
}

/// Pair concurrences along |eee⟩, |eeg⟩ and |ege⟩ trajectories against
/// RK4 followed by the brute-force spectrum.
#[test]
fn transient_concurrence_against_rk4() {
    let spec = ChainSpec::open_three(0.5).unwrap();
    let gen = liouvillian(&spec).unwrap();
    let links = common::chain_links(3, false, &[0.5, 0.5]);
    let times = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0];
    for label in ["eee", "eeg", "ege"] {
        let rho0 = basis_projector(label).unwrap();
        let traj = propagate(&gen, &rho0, &times).unwrap();
        let mut rho = to_na(&rho0);
        let mut t_prev = 0.0;
        for (k, &t) in times.iter().enumerate() {
            if t > t_prev {
                rho = common::rk4(&links, &rho, t - t_prev, 1e-3);
                t_prev = t;
            }
            let ours = traj.density_matrix(k);
            for pair in [(1, 2), (2, 3), (1, 3)] {
                let c = concurrence(&partial_trace(&ours, pair, 3).unwrap()).unwrap();
                let c_ref = common::brute_force_concurrence(&common::reduce_to_pair(&rho, pair, 3));
                assert!((c - c_ref).abs() < 1e-6, "{label} t={t} {pair:?}: {c} vs {c_ref}");
            }
        }
    }
}

/// Onset times at γ = 0.5, dt = 0.01, tol = 1e-6, window = 5, computed once
/// with an independent scipy `expm` pipeline.
#[test]
fn sudden_birth_onsets() {
    let spec = ChainSpec::open_three(0.5).unwrap();
    let gen = liouvillian(&spec).unwrap();
    let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.01).collect();
    let golden: [(&str, [Option<f64>; 3]); 5] = [
        ("eee", [Some(1.64), Some(1.64), Some(2.84)]),
        ("eeg", [Some(3.35), None, Some(5.00)]),
        ("ege", [None, None, Some(4.19)]),
        ("gee", [None, Some(3.35), Some(5.00)]),
        ("egg", [None, None, None]),
    ];
    let pairs = [(1, 2), (2, 3), (1, 3)];
    for (label, expected) in golden {
        let traj = propagate(&gen, &basis_projector(label).unwrap(), &times).unwrap();
        let series = concurrence_series(&traj, &pairs).unwrap();
        for (pair, want) in pairs.into_iter().zip(expected) {
            let class = sudden_birth(&series, pair, 1e-6, 5).unwrap();
            match (class, want) {
                (BirthClass::Sudden(t), Some(w)) => assert!((t - w).abs() < 1e-9, "{label} {pair:?}: {t}"),
                (BirthClass::Immediate, None) => {}
                other => panic!("{label} {pair:?}: {other:?}"),
            }
        }
    }
}

#[test]
fn commutant_and_kernel_are_reported_independently() {
    // all link operators commute with each other, so the commutant is never
    // just the scalars here; uniqueness cannot be read off from it
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, boundary) in [(2, Boundary::Open), (3, Boundary::Open), (3, Boundary::Closed), (4, Boundary::Closed)] {
        let links_n = if boundary == Boundary::Closed { n } else { n - 1 };
        let rates: Vec<f64> = (0..links_n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let spec = ChainSpec::new(n, boundary, rates).unwrap();
        let links: Vec<_> = (1..=links_n).map(|k| link_operator(k, &spec).unwrap()).collect();
        let commutant = commutant_dimension(&links).unwrap();
        let kernel = kernel_report(&liouvillian(&spec).unwrap()).unwrap().dimension;
        if commutant == 1 {
            assert_eq!(kernel, 1);
        }
        assert!(commutant > 1, "{spec:?}");
        if boundary == Boundary::Closed && n == 3 {
            assert_eq!(kernel, 1);
        }
    }
}
