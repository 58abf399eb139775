mod common;

use blocktri::linalg::{relative_diff, split_blocks};
use blocktri::sim::random_system;
use blocktri::{
    bbt_solve, fbt_solve, hybrid_solve, post_exchange_dense, twofilter_solve, Algorithm,
    BlockTriSystem, Error, Stage,
};
use nalgebra::DMatrix;

use common::{dense_solve, kappa};

const DIMS: [usize; 4] = [1, 2, 3, 5];
const LENGTHS: [usize; 5] = [1, 2, 3, 10, 50];

#[test]
fn every_solver_matches_dense_lu() {
    let mut seed = 0;
    for n in DIMS {
        for big_n in LENGTHS {
            for ell in [1, 3] {
                seed += 1;
                let sys = random_system(seed, n, big_n, ell, 0.1).unwrap();
                let want = dense_solve(&sys);
                let tol = 1e-8 * kappa(&sys);
                for alg in Algorithm::ALL {
                    for parallel in [false, true] {
                        let got = alg.solve(&sys, parallel).unwrap();
                        let d = relative_diff(&got.e, &want);
                        assert!(d <= tol, "{} n={n} N={big_n} ell={ell}: {d:e}", alg.name());
                        assert!(got.residual_norm <= tol * sys.rhs_norm());
                    }
                }
            }
        }
    }
}

#[test]
fn post_exchange_system_is_split_bidiagonal() {
    let n = 2;
    let big_n = 6;
    let sys = random_system(17, n, big_n, 1, 0.5).unwrap();
    let sol = hybrid_solve(&sys, false).unwrap();
    let (a, rhs) = post_exchange_dense(&sys, &sol.trace).unwrap();
    let m = sol.trace.exchange.as_ref().unwrap().m;
    assert_eq!(m, 3);
    let block = |i: usize, j: usize| a.view((i * n, j * n), (n, n)).into_owned();
    for i in 0..big_n {
        for j in 0..big_n {
            let nonzero_allowed = if i < m {
                // forward half: diagonal and super-diagonal inside the half
                j == i || (j == i + 1 && j < m)
            } else {
                j == i || (j + 1 == i && j >= m)
            };
            if !nonzero_allowed {
                assert_eq!(block(i, j).norm(), 0.0, "block ({i}, {j}) should vanish");
            }
        }
    }
    let x = a.lu().solve(&rhs).unwrap();
    assert!(relative_diff(&split_blocks(&x, n), &sol.e) < 1e-12);
}

#[test]
fn hybrid_parallel_is_bitwise_sequential() {
    for (seed, n, big_n) in [(1, 1, 2), (2, 3, 7), (3, 4, 1000), (4, 2, 51)] {
        let sys = random_system(seed, n, big_n, 2, 0.2).unwrap();
        for _ in 0..5 {
            let a = hybrid_solve(&sys, true).unwrap();
            let b = hybrid_solve(&sys, false).unwrap();
            assert_eq!(a.e, b.e);
        }
    }
}

#[test]
fn twofilter_parallel_is_bitwise_sequential() {
    let sys = random_system(5, 3, 40, 1, 0.2).unwrap();
    assert_eq!(
        twofilter_solve(&sys, true).unwrap().e,
        twofilter_solve(&sys, false).unwrap().e
    );
}

fn scalar(x: f64) -> DMatrix<f64> {
    DMatrix::from_element(1, 1, x)
}

#[test]
fn single_block_is_a_plain_solve() {
    let sys = BlockTriSystem::new(vec![scalar(4.0)], vec![], vec![scalar(2.0)]).unwrap();
    for alg in Algorithm::ALL {
        assert_eq!(alg.solve(&sys, true).unwrap().e[0][(0, 0)], 0.5);
    }
}

#[test]
fn indefinite_matrix_reports_failing_block() {
    // [[1, 2], [2, 1]] has eigenvalues 3 and -1
    let sys = BlockTriSystem::new(
        vec![scalar(1.0), scalar(1.0)],
        vec![scalar(2.0)],
        vec![scalar(1.0), scalar(1.0)],
    )
    .unwrap();
    match fbt_solve(&sys) {
        Err(Error::PivotNotPositiveDefinite { k: 2, stage: Stage::Forward, lambda_min }) => {
            assert!((lambda_min + 3.0).abs() < 1e-12)
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        bbt_solve(&sys),
        Err(Error::PivotNotPositiveDefinite { k: 1, stage: Stage::Backward, .. })
    ));
    for parallel in [false, true] {
        assert!(matches!(
            hybrid_solve(&sys, parallel),
            Err(Error::PivotNotPositiveDefinite { .. })
        ));
        assert!(twofilter_solve(&sys, parallel).is_err());
    }
}

#[test]
fn zero_couplings_decouple_blocks() {
    let sys = BlockTriSystem::new(
        vec![scalar(2.0), scalar(4.0), scalar(8.0)],
        vec![scalar(0.0), scalar(0.0)],
        vec![scalar(1.0); 3],
    )
    .unwrap();
    for alg in Algorithm::ALL {
        let e: Vec<f64> = alg.solve(&sys, false).unwrap().e.iter().map(|b| b[(0, 0)]).collect();
        for (got, want) in e.iter().zip([0.5, 0.25, 0.125]) {
            assert!((got - want).abs() <= 1e-15 * want, "{}: {e:?}", alg.name());
        }
    }
}

#[test]
fn shape_errors_are_rejected() {
    assert!(matches!(
        BlockTriSystem::new(vec![scalar(1.0), scalar(1.0)], vec![], vec![scalar(1.0); 2]),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(matches!(
        BlockTriSystem::new(
            vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0])],
            vec![],
            vec![DMatrix::zeros(2, 1)]
        ),
        Err(Error::NotSymmetric { .. })
    ));
}

#[test]
fn system_json_round_trips_bitwise() {
    let sys = random_system(8, 3, 5, 2, 0.1).unwrap();
    let back = BlockTriSystem::from_json(&sys.to_json().unwrap()).unwrap();
    assert_eq!(back, sys);
}
