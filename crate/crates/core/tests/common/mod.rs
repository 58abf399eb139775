#![allow(dead_code)]

use blocktri::kalman::LinearGaussianModel;
use blocktri::linalg::{split_blocks, Block};
use blocktri::sim::{random_model, Conditioning, MeasPattern, ModelParams};
use blocktri::spectral;
use blocktri::BlockTriSystem;
use nalgebra::DMatrix;

pub const DIMS: [usize; 3] = [1, 2, 3];
pub const LENGTHS: [usize; 5] = [1, 2, 3, 10, 50];
pub const PATTERNS: [MeasPattern; 4] = [
    MeasPattern::None,
    MeasPattern::One,
    MeasPattern::Full,
    MeasPattern::Mixed,
];

/// 100 seeded well-conditioned models spanning every (n, N, pattern)
/// combination; every seventh case has rank-deficient transitions.
pub fn kalman_corpus() -> Vec<LinearGaussianModel> {
    (0..100)
        .map(|i| {
            let params = ModelParams {
                seed: 1000 + i as u64,
                n: DIMS[i % 3],
                big_n: LENGTHS[(i / 3) % 5],
                meas: PATTERNS[(i / 15) % 4],
                conditioning: Conditioning::Well,
                singular_process: i % 7 == 3,
            };
            random_model(params).unwrap().model.unwrap()
        })
        .collect()
}

/// Models whose final transition has norm 120 on top of large interior
/// process noise.
pub fn ill_corpus() -> Vec<LinearGaussianModel> {
    let mut out = Vec::new();
    for (i, &n) in DIMS.iter().enumerate() {
        for (j, &big_n) in [3usize, 10, 50].iter().enumerate() {
            for s in 0..2u64 {
                let params = ModelParams {
                    seed: 5000 + 100 * i as u64 + 10 * j as u64 + s,
                    n,
                    big_n,
                    meas: MeasPattern::Mixed,
                    conditioning: Conditioning::IllLastBlock,
                    singular_process: false,
                };
                out.push(random_model(params).unwrap().model.unwrap());
            }
        }
    }
    out
}

pub fn full_rank_meas(model: &LinearGaussianModel) -> bool {
    let n = model.state_dim();
    (0..model.num_steps()).all(|k| model.meas_dim(k) >= n && model.h(k).clone().svd(false, false).rank(1e-10) == n)
}

/// LU on the assembled dense matrix.
pub fn dense_solve(sys: &BlockTriSystem) -> Vec<Block> {
    let a = sys.assemble_dense().unwrap();
    let x = a.lu().solve(&sys.stacked_rhs()).expect("nonsingular");
    split_blocks(&x, sys.block_dim())
}

pub fn kappa(sys: &BlockTriSystem) -> f64 {
    spectral::condition_estimate(sys).unwrap().kappa
}

fn block_diag(blocks: &[Block]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Unit lower block bidiagonal matrix with `-G_k` below the diagonal.
pub fn stacked_transition(model: &LinearGaussianModel) -> DMatrix<f64> {
    let n = model.state_dim();
    let big_n = model.num_steps();
    let mut g = DMatrix::<f64>::identity(n * big_n, n * big_n);
    for k in 1..big_n {
        g.view_mut((k * n, (k - 1) * n), (n, n)).copy_from(&-model.g(k));
    }
    g
}

pub fn stacked_process_cov(model: &LinearGaussianModel) -> DMatrix<f64> {
    let q: Vec<Block> = (0..model.num_steps()).map(|k| model.q(k).clone()).collect();
    block_diag(&q)
}

pub fn stacked_meas_info(model: &LinearGaussianModel) -> DMatrix<f64> {
    let u: Vec<Block> = (0..model.num_steps()).map(|k| model.meas_info(k)).collect();
    block_diag(&u)
}

/// Normal equations built from the stacked operators
/// `G^T Q^{-1} G + H^T R^{-1} H` and `G^T Q^{-1} zeta + H^T R^{-1} z`.
pub fn stacked_normal_equations(model: &LinearGaussianModel) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = model.state_dim();
    let big_n = model.num_steps();
    let g = stacked_transition(model);
    let q_inv = stacked_process_cov(model).try_inverse().unwrap();
    let h: Vec<Block> = (0..big_n).map(|k| model.h(k).clone()).collect();
    let r: Vec<Block> = (0..big_n).map(|k| model.r(k).clone()).collect();
    let h = {
        let m: usize = h.iter().map(|b| b.nrows()).sum();
        let mut out = DMatrix::zeros(m, n * big_n);
        let mut row = 0;
        for (k, b) in h.iter().enumerate() {
            out.view_mut((row, k * n), b.shape()).copy_from(b);
            row += b.nrows();
        }
        out
    };
    let r_inv = if h.nrows() == 0 {
        DMatrix::zeros(0, 0)
    } else {
        block_diag(&r).try_inverse().unwrap()
    };
    let z = {
        let parts: Vec<f64> = (0..big_n).flat_map(|k| model.z(k).iter().copied().collect::<Vec<_>>()).collect();
        DMatrix::from_column_slice(parts.len(), 1, &parts)
    };
    let mut zeta = DMatrix::zeros(n * big_n, 1);
    zeta.view_mut((0, 0), (n, 1)).copy_from(model.x0());
    let a = g.transpose() * &q_inv * &g + h.transpose() * &r_inv * &h;
    let rhs = g.transpose() * &q_inv * zeta + h.transpose() * &r_inv * z;
    (a, rhs)
}

/// Central differences of the objective along every coordinate.
pub fn fd_gradient(model: &LinearGaussianModel, x: &[Block], step: f64) -> Vec<Block> {
    let mut out: Vec<Block> = x.iter().map(|b| DMatrix::zeros(b.nrows(), 1)).collect();
    let mut probe = x.to_vec();
    for k in 0..x.len() {
        for i in 0..x[k].nrows() {
            let h = step * x[k][(i, 0)].abs().max(1.0);
            let orig = probe[k][(i, 0)];
            probe[k][(i, 0)] = orig + h;
            let fp = blocktri::kalman::objective(model, &probe).unwrap();
            probe[k][(i, 0)] = orig - h;
            let fm = blocktri::kalman::objective(model, &probe).unwrap();
            probe[k][(i, 0)] = orig;
            out[k][(i, 0)] = (fp - fm) / (2.0 * h);
        }
    }
    out
}
