use blocktri::linalg::Block;
use blocktri::sim::{self, random_spd, random_system};
use blocktri::spectral::{self, KappaMethod, ProcessOnlySystem};
use blocktri::Error;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar(x: f64) -> Block {
    DMatrix::from_element(1, 1, x)
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &m + m.transpose()
}

#[test]
fn jacobi_agrees_with_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..12 {
        let m = random_symmetric(&mut rng, n);
        let ours = spectral::sym_eigenvalues(&m).unwrap();
        let mut theirs: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-12 * m.norm().max(1.0), "n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn eigenvectors_reconstruct_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = random_symmetric(&mut rng, 9);
    let e = spectral::sym_eig(&m).unwrap();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone()));
    let back = &e.vectors * d * e.vectors.transpose();
    assert!((back - &m).norm() < 1e-12 * m.norm());
    let gram = e.vectors.transpose() * &e.vectors;
    assert!((gram - DMatrix::identity(9, 9)).norm() < 1e-12);
}

#[test]
fn bounds_sandwich_random_process_systems() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..60 {
        let n = 1 + i % 3;
        let big_n = 2 + i % 7;
        let q = (0..big_n).map(|_| random_spd(&mut rng, n, 0.2, 5.0)).collect();
        let g = (1..big_n)
            .map(|_| DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0)))
            .collect();
        let pos = ProcessOnlySystem::new(q, g, None).unwrap();
        let e = spectral::sym_eig(&pos.assemble_e().unwrap()).unwrap();
        let (lo, hi) = spectral::theorem1_bounds(&pos).unwrap();
        assert!(lo <= e.min() * (1.0 + 1e-10) && e.max() <= hi * (1.0 + 1e-10));
        let gram = spectral::sym_eig(&pos.gram().unwrap()).unwrap();
        let (lo2, hi2) = spectral::theorem2_bounds(&pos.g).unwrap();
        assert!(lo2 <= gram.min() + 1e-10 && gram.max() <= hi2 + 1e-10);
        if let Ok(cb) = spectral::condition_bound(&pos) {
            assert!(cb >= e.cond() * (1.0 - 1e-10));
        }
    }
}

#[test]
fn decoupled_preset_has_unit_bounds() {
    let model = sim::decoupled_preset(2, 4).model.unwrap();
    let rep = spectral::spectral_report(&ProcessOnlySystem::from_model(&model).unwrap()).unwrap();
    assert_eq!((rep.bound_lower, rep.bound_upper), (Some(1.0), Some(1.0)));
    assert_eq!((rep.sv_bound_lower, rep.sv_bound_upper), (Some(1.0), Some(1.0)));
    assert!((rep.lambda_min - 1.0).abs() < 1e-15 && (rep.lambda_max - 1.0).abs() < 1e-15);
}

#[test]
fn toy_model_flags_the_last_block() {
    let pos = ProcessOnlySystem::from_model(&sim::toy_section6_model()).unwrap();
    let rep = spectral::spectral_report(&pos).unwrap();
    assert_eq!(rep.weakest_link_suspect, Some(true));
    assert_eq!(rep.weakest_link_bound, Some(-119.0));
    assert_eq!(rep.argmax_block, Some(3));
    assert!(rep.lambda_min < 1e-8);
}

#[test]
fn contractive_chain_is_not_suspected() {
    let pos = ProcessOnlySystem::new(vec![scalar(1.0); 4], vec![scalar(0.9); 3], None).unwrap();
    let wl = spectral::weakest_link(&pos.g).unwrap();
    assert!(!wl.suspect_last_block);
    assert!((wl.bound - 0.1).abs() < 1e-15);
    let e = spectral::sym_eig(&pos.gram().unwrap()).unwrap();
    assert!(e.min() >= wl.bound * wl.bound - 1e-12);
}

#[test]
fn huge_couplings_make_the_condition_bound_vacuous() {
    let pos = ProcessOnlySystem::new(vec![scalar(1.0); 4], vec![scalar(1e9); 3], None).unwrap();
    assert!(matches!(spectral::condition_bound(&pos), Err(Error::VacuousBound)));
}

#[test]
fn empty_coupling_sequences_are_rejected() {
    assert!(matches!(spectral::theorem2_bounds(&[]), Err(Error::EmptySequence)));
    assert!(matches!(spectral::weakest_link(&[]), Err(Error::EmptySequence)));
}

#[test]
fn condition_estimates_enclose_the_spectrum() {
    for (seed, big_n) in [(1, 5), (2, 40)] {
        let sys = random_system(seed, 3, big_n, 1, 0.3).unwrap();
        let dense = spectral::sym_eig(&sys.assemble_dense().unwrap()).unwrap();
        let (lo, hi) = spectral::gershgorin_interval(&sys).unwrap();
        assert!(lo <= dense.min() + 1e-12 && dense.max() <= hi + 1e-12);
        let est = spectral::condition_estimate(&sys).unwrap();
        assert_eq!(est.method, KappaMethod::Dense);
        assert!((est.kappa - dense.cond()).abs() <= 1e-12 * dense.cond());
    }
    let big = random_system(3, 4, 200, 1, 0.3).unwrap();
    let est = spectral::condition_estimate(&big).unwrap();
    assert_eq!(est.method, KappaMethod::Gershgorin);
    assert!(est.kappa.is_finite() && est.lambda_min > 0.0);
}
