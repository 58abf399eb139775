//! Seeded scenario generation.
//!
//! Random draws use `ChaCha8Rng::seed_from_u64(seed)`; the same seed always
//! reproduces the same scenario. The toy presets are literal constants.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kalman::{LinearGaussianModel, ModelDoc};
use crate::linalg::{self, Block};
use crate::spectral::eig;
use crate::system::{BlockTriSystem, SystemDoc};

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Printed in the reference publication.
    Published,
    /// Follows from the construction without computation.
    ClosedForm,
    /// Computed by an independent method.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub values: Vec<f64>,
    pub source: Source,
    /// Relative tolerance the values are quoted to.
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub model: Option<LinearGaussianModel>,
    pub system: Option<BlockTriSystem>,
    pub expected: BTreeMap<String, Expected>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDoc {
    pub name: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemDoc>,
    #[serde(default)]
    pub expected: BTreeMap<String, Expected>,
}

impl Scenario {
    /// The system to solve: the stored one, or the normal equations of the model.
    pub fn system(&self) -> Result<BlockTriSystem> {
        match (&self.system, &self.model) {
            (Some(sys), _) => Ok(sys.clone()),
            (None, Some(model)) => crate::kalman::assemble_system(model),
            (None, None) => Err(Error::BadParameters(format!(
                "scenario `{}` has neither a model nor a system",
                self.name
            ))),
        }
    }

    pub fn to_doc(&self) -> ScenarioDoc {
        ScenarioDoc {
            name: self.name.clone(),
            seed: self.seed,
            model: self.model.as_ref().map(|m| m.to_doc()),
            system: self.system.as_ref().map(|s| s.to_doc()),
            expected: self.expected.clone(),
        }
    }

    pub fn from_doc(doc: &ScenarioDoc) -> Result<Self> {
        Ok(Self {
            name: doc.name.clone(),
            seed: doc.seed,
            model: doc.model.as_ref().map(LinearGaussianModel::from_doc).transpose()?,
            system: doc.system.as_ref().map(BlockTriSystem::from_doc).transpose()?,
            expected: doc.expected.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

fn scalar(x: f64) -> Block {
    DMatrix::from_element(1, 1, x)
}

fn expected(values: &[f64], source: Source, rel_tol: f64) -> Expected {
    Expected {
        values: values.to_vec(),
        source,
        rel_tol,
    }
}

/// The three-block scalar example with coupling 120:
///
/// ```text
/// [14401   120     0]
/// [  120 14401   120]
/// [    0   120     1]
/// ```
///
/// With `stabilized`, the coupling into the last block is 0.9 instead.
/// The unstabilized scenario also carries the process model it comes from
/// (`Q_k = 1`, `G_k = 120`, no measurements).
pub fn toy_section6(stabilized: bool) -> Scenario {
    let last = if stabilized { 0.9 } else { 120.0 };
    let system = BlockTriSystem::new(
        vec![scalar(14401.0), scalar(14401.0), scalar(1.0)],
        vec![scalar(120.0), scalar(last)],
        vec![scalar(1.0); 3],
    )
    .expect("toy system is well formed");
    let mut exp = BTreeMap::new();
    let (name, model) = if stabilized {
        exp.insert("lambda_min".into(), expected(&[1.0], Source::Published, 1e-8));
        ("toy6-stabilized", None)
    } else {
        exp.insert("lambda_min".into(), expected(&[4.8e-9], Source::Published, 0.05));
        exp.insert(
            "forward_pivots".into(),
            expected(&[14401.0, 14400.0, 4.8222e-9], Source::Published, 1e-3),
        );
        exp.insert("backward_pivots".into(), expected(&[1.0, 1.0, 1.0], Source::Published, 1e-10));
        exp.insert(
            "min_eigenvector".into(),
            expected(&[0.001, -0.008, 1.0], Source::Published, 0.25),
        );
        exp.insert("argmax_block".into(), expected(&[3.0], Source::Published, 0.0));
        (
            "toy6",
            Some(toy_section6_model()),
        )
    };
    Scenario {
        name: name.into(),
        seed: 0,
        model,
        system: Some(system),
        expected: exp,
    }
}

/// Process model behind the toy system: `Q_k = 1`, `G_k = 120`, `x_0 = 0`,
/// no measurements. Its normal equations are the toy matrix with the sign of
/// the coupling flipped.
pub fn toy_section6_model() -> LinearGaussianModel {
    let none = || DMatrix::zeros(0, 1);
    LinearGaussianModel::new(
        scalar(0.0),
        vec![scalar(120.0), scalar(120.0)],
        vec![scalar(1.0); 3],
        vec![none(), none(), none()],
        vec![DMatrix::zeros(0, 0); 3],
        vec![none(), none(), none()],
    )
    .expect("toy model is well formed")
}

/// Process-only model with `G_k = 0` and `Q_k = I`: the normal equations are
/// the identity.
pub fn decoupled_preset(n: usize, big_n: usize) -> Scenario {
    let model = LinearGaussianModel::new(
        DMatrix::zeros(n, 1),
        vec![DMatrix::zeros(n, n); big_n - 1],
        vec![DMatrix::identity(n, n); big_n],
        vec![DMatrix::zeros(0, n); big_n],
        vec![DMatrix::zeros(0, 0); big_n],
        vec![DMatrix::zeros(0, 1); big_n],
    )
    .expect("decoupled model is well formed");
    let mut exp = BTreeMap::new();
    exp.insert("bounds".into(), expected(&[1.0, 1.0], Source::ClosedForm, 0.0));
    Scenario {
        name: "decoupled".into(),
        seed: 0,
        model: Some(model),
        system: None,
        expected: exp,
    }
}

/// Named presets accepted by [`preset`].
pub const PRESETS: [(&str, &str); 3] = [
    ("toy6", "three-block scalar system with coupling 120 (lambda_min ~ 4.8e-9)"),
    ("toy6-stabilized", "toy6 with the last coupling reduced to 0.9"),
    ("decoupled", "process-only model with G = 0, Q = I (n = 2, N = 4)"),
];

pub fn preset(name: &str) -> Result<Scenario> {
    match name {
        "toy6" => Ok(toy_section6(false)),
        "toy6-stabilized" => Ok(toy_section6(true)),
        "decoupled" => Ok(decoupled_preset(2, 4)),
        other => Err(Error::BadParameters(format!("unknown preset `{other}`"))),
    }
}

/// Which steps carry a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasPattern {
    /// `m(k) = 0` everywhere.
    None,
    /// One scalar measurement per step.
    One,
    /// `m(k) = n` everywhere.
    Full,
    /// Cycles through `0, 1, n`.
    Mixed,
}

impl MeasPattern {
    pub fn dim(self, k: usize, n: usize) -> usize {
        match self {
            MeasPattern::None => 0,
            MeasPattern::One => 1,
            MeasPattern::Full => n,
            MeasPattern::Mixed => [0, 1, n][k % 3],
        }
    }
}

impl FromStr for MeasPattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(MeasPattern::None),
            "one" => Ok(MeasPattern::One),
            "full" => Ok(MeasPattern::Full),
            "mixed" => Ok(MeasPattern::Mixed),
            other => Err(format!("unknown measurement pattern `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    Well,
    /// Well-behaved interior blocks with a large rank-one final process
    /// matrix (spectral norm 120), so the normal equations are nearly singular.
    IllLastBlock,
}

impl FromStr for Conditioning {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "well" => Ok(Conditioning::Well),
            "ill-last-block" => Ok(Conditioning::IllLastBlock),
            other => Err(format!("unknown conditioning `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub seed: u64,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub meas: MeasPattern,
    pub conditioning: Conditioning,
    /// Make every `G_k` (k >= 2) rank deficient.
    pub singular_process: bool,
}

impl ModelParams {
    pub fn well(seed: u64, n: usize, big_n: usize, meas: MeasPattern) -> Self {
        Self {
            seed,
            n,
            big_n,
            meas,
            conditioning: Conditioning::Well,
            singular_process: false,
        }
    }
}

/// Size of the final process matrix in the ill-conditioned family.
pub const ILL_LAST_NORM: f64 = 120.0;
/// Scale of the interior process covariances in the ill-conditioned family.
const ILL_INTERIOR_Q_SCALE: f64 = 1000.0;

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Block {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Block {
    loop {
        let v = gaussian(rng, n, 1);
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// `O diag(U(lo, hi)) O^T` with a random orthogonal `O`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Block {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let o = gaussian(rng, n, n).qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(lo..hi)));
    linalg::symmetrized(&o * d * o.transpose())
}

/// Random `n x n` matrix with spectral norm drawn from `U(lo, hi)`.
fn random_contraction(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, rank_deficient: bool) -> Block {
    let mut m = gaussian(rng, n, n);
    if rank_deficient {
        m.column_mut(n - 1).fill(0.0);
        if n == 1 {
            return m;
        }
    }
    let target = rng.random_range(lo..hi);
    let norm = eig::operator_norm(&m).expect("small dense block");
    if norm == 0.0 {
        m
    } else {
        m * (target / norm)
    }
}

/// Random model drawn from its own generative process.
pub fn random_model(params: ModelParams) -> Result<Scenario> {
    let ModelParams {
        seed,
        n,
        big_n,
        meas,
        conditioning,
        singular_process,
    } = params;
    if n == 0 || big_n == 0 {
        return Err(Error::BadParameters("n and N must be positive".into()));
    }
    if n > 64 {
        return Err(Error::BadParameters(format!("block size {n} is above 64")));
    }
    let ill = conditioning == Conditioning::IllLastBlock;
    if ill && big_n < 2 {
        return Err(Error::BadParameters("ill-last-block needs N >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut g = Vec::with_capacity(big_n - 1);
    for k in 1..big_n {
        if ill && k + 1 == big_n {
            let last = if n == 1 {
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                scalar(sign * ILL_LAST_NORM)
            } else {
                let u = unit_vector(&mut rng, n);
                let v = unit_vector(&mut rng, n);
                u * v.transpose() * ILL_LAST_NORM
            };
            g.push(last);
        } else {
            g.push(random_contraction(&mut rng, n, 0.2, 0.8, singular_process));
        }
    }
    let q: Vec<Block> = (0..big_n)
        .map(|k| {
            let base = random_spd(&mut rng, n, 0.5, 2.0);
            if ill && k + 1 < big_n {
                base * ILL_INTERIOR_Q_SCALE
            } else {
                base
            }
        })
        .collect();
    let mut h = Vec::with_capacity(big_n);
    let mut r = Vec::with_capacity(big_n);
    for k in 0..big_n {
        // the last two steps stay unobserved so the final coupling dominates
        let m = if ill && k + 2 >= big_n { 0 } else { meas.dim(k, n) };
        h.push(gaussian(&mut rng, m, n));
        r.push(random_spd(&mut rng, m, 0.5, 2.0));
    }

    let x0 = gaussian(&mut rng, n, 1);
    let mut z = Vec::with_capacity(big_n);
    let mut x = x0.clone();
    for k in 0..big_n {
        let step = if k == 0 { x.clone() } else { &g[k - 1] * &x };
        let qf = q[k].clone().cholesky().expect("generated SPD");
        x = step + qf.l() * gaussian(&mut rng, n, 1);
        let m = h[k].nrows();
        let noise = if m == 0 {
            DMatrix::zeros(0, 1)
        } else {
            r[k].clone().cholesky().expect("generated SPD").l() * gaussian(&mut rng, m, 1)
        };
        z.push(&h[k] * &x + noise);
    }
    let model = LinearGaussianModel::new(x0, g, q, h, r, z)?;
    let tag = match conditioning {
        Conditioning::Well => "well",
        Conditioning::IllLastBlock => "ill-last-block",
    };
    Ok(Scenario {
        name: format!("random-{tag}-n{n}-N{big_n}-s{seed}"),
        seed,
        model: Some(model),
        system: None,
        expected: BTreeMap::new(),
    })
}

/// Random SPD block tridiagonal system, block diagonally dominant by `margin`.
pub fn random_system(seed: u64, n: usize, big_n: usize, ell: usize, margin: f64) -> Result<BlockTriSystem> {
    if n == 0 || big_n == 0 || ell == 0 {
        return Err(Error::BadParameters("n, N and ell must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sub: Vec<Block> = (1..big_n).map(|_| gaussian(&mut rng, n, n)).collect();
    let norms: Vec<f64> = sub
        .iter()
        .map(|c| eig::operator_norm(c).expect("small dense block"))
        .collect();
    let diag = (0..big_n)
        .map(|j| {
            let below = if j > 0 { norms[j - 1] } else { 0.0 };
            let above = norms.get(j).copied().unwrap_or(0.0);
            random_spd(&mut rng, n, 0.5, 2.0) + DMatrix::identity(n, n) * (below + above + margin)
        })
        .map(linalg::symmetrized)
        .collect();
    let rhs = (0..big_n).map(|_| gaussian(&mut rng, n, ell)).collect();
    BlockTriSystem::new(diag, sub, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_matrix_is_literal() {
        let a = toy_section6(false).system.unwrap().assemble_dense().unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[14401.0, 120.0, 0.0, 120.0, 14401.0, 120.0, 0.0, 120.0, 1.0],
        );
        assert_eq!(a, expected);
    }

    #[test]
    fn toy_model_reproduces_system_up_to_sign() {
        let sys = crate::kalman::assemble_system(&toy_section6_model()).unwrap();
        let a = sys.assemble_dense().unwrap();
        let lit = toy_section6(false).system.unwrap().assemble_dense().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let sign = if i == j { 1.0 } else { -1.0 };
                assert_eq!(a[(i, j)], sign * lit[(i, j)]);
            }
        }
    }

    #[test]
    fn same_seed_same_scenario() {
        let p = ModelParams::well(7, 2, 10, MeasPattern::Mixed);
        assert_eq!(random_model(p).unwrap(), random_model(p).unwrap());
        let other = ModelParams { seed: 8, ..p };
        assert_ne!(random_model(p).unwrap(), random_model(other).unwrap());
    }

    #[test]
    fn no_measurement_pattern() {
        let s = random_model(ModelParams::well(1, 3, 5, MeasPattern::None)).unwrap();
        let m = s.model.unwrap();
        assert!((0..5).all(|k| m.meas_dim(k) == 0));
    }

    #[test]
    fn bad_parameters() {
        assert!(random_model(ModelParams::well(1, 0, 5, MeasPattern::One)).is_err());
        let p = ModelParams {
            conditioning: Conditioning::IllLastBlock,
            ..ModelParams::well(1, 2, 1, MeasPattern::One)
        };
        assert!(matches!(random_model(p), Err(Error::BadParameters(_))));
    }

    #[test]
    fn scenario_json_round_trip() {
        let s = random_model(ModelParams::well(3, 2, 4, MeasPattern::Full)).unwrap();
        assert_eq!(Scenario::from_json(&s.to_json().unwrap()).unwrap(), s);
        let t = toy_section6(false);
        assert_eq!(Scenario::from_json(&t.to_json().unwrap()).unwrap(), t);
    }
}
