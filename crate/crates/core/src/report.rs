//! Run reports, the solver/oracle comparison harness and the toy-example
//! regression suite behind the CLI.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;
use crate::kalman::{self, LinearGaussianModel};
use crate::linalg::{self, Block};
use crate::sim::{self, Scenario};
use crate::solve::{Algorithm, BlockSolution};
use crate::spectral::{self, ConditionEstimate};
use crate::system::BlockTriSystem;
use crate::tolerances;
use crate::trace::{BlockSpectrum, SolveTrace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckResult {
    /// Passes when `value <= limit`.
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= limit,
            value,
            limit,
            detail: String::new(),
        }
    }

    /// Passes when `value >= limit`.
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= limit,
            value,
            limit,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: false,
            value: f64::NAN,
            limit: f64::NAN,
            detail: detail.into(),
        }
    }
}

fn checks_table(out: &mut String, checks: &[CheckResult]) {
    for c in checks {
        let _ = writeln!(
            out,
            "  {:<4} {:<52} {:>24} {:>24}  {}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            fmt_num(c.value),
            fmt_num(c.limit),
            c.detail
        );
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else {
        crate::linalg::fmt_shortest(x)
    }
}

/// Largest amount by which any recorded pivot eigenvalue leaves
/// `[lambda_min(A), lambda_max(A)]`, relative to `max(1, lambda_max(A))`.
pub fn containment_excess(trace: &SolveTrace, lo: f64, hi: f64) -> Result<f64> {
    let scale = hi.max(1.0);
    let mut worst: f64 = 0.0;
    for s in trace.block_spectra()? {
        worst = worst.max((lo - s.lambda_min) / scale).max((s.lambda_max - hi) / scale);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub algorithm: Algorithm,
    pub parallel: bool,
    pub wall_time_s: f64,
    pub residual_norm: f64,
    pub rhs_norm: f64,
    pub condition: ConditionEstimate,
    pub pivots: Vec<BlockSpectrum>,
    pub checks: Vec<CheckResult>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} / {}{}: residual {} (|r| {}), kappa {} ({:?}), {} s",
            self.scenario,
            self.algorithm.name(),
            if self.parallel { " (parallel)" } else { "" },
            fmt_num(self.residual_norm),
            fmt_num(self.rhs_norm),
            fmt_num(self.condition.kappa),
            self.condition.method,
            fmt_num(self.wall_time_s)
        );
        let _ = writeln!(out, "  {:>5} {:<9} {:>24} {:>24} {:>24}", "k", "pivot", "lambda_min", "lambda_max", "cond");
        for p in &self.pivots {
            let _ = writeln!(
                out,
                "  {:>5} {:<9} {:>24} {:>24} {:>24}",
                p.k,
                p.direction.as_str(),
                fmt_num(p.lambda_min),
                fmt_num(p.lambda_max),
                fmt_num(p.cond)
            );
        }
        checks_table(&mut out, &self.checks);
        out
    }
}

/// Solve a system and collect residual, pivot spectra and stability checks.
pub fn run_solve(
    name: &str,
    sys: &BlockTriSystem,
    algorithm: Algorithm,
    parallel: bool,
) -> Result<(BlockSolution, RunReport)> {
    let start = Instant::now();
    let sol = algorithm.solve(sys, parallel)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let condition = spectral::condition_estimate(sys)?;
    let rhs_norm = sys.rhs_norm();
    let mut checks = vec![CheckResult::at_most(
        "residual",
        sol.residual_norm,
        tolerances::RESIDUAL * condition.kappa * rhs_norm,
    )];
    if condition.method == spectral::KappaMethod::Dense {
        checks.push(CheckResult::at_most(
            "pivot eigenvalue containment",
            containment_excess(&sol.trace, condition.lambda_min, condition.lambda_max)?,
            tolerances::EIG_CONTAINMENT,
        ));
    }
    let asym = sol
        .trace
        .pivots()
        .iter()
        .map(|(_, _, d)| linalg::asymmetry(d))
        .fold(0.0, f64::max);
    checks.push(CheckResult::at_most("pivot symmetry", asym, 0.0));
    let pivots = sol.trace.block_spectra()?;
    let report = RunReport {
        scenario: name.to_string(),
        algorithm,
        parallel,
        wall_time_s,
        residual_norm: sol.residual_norm,
        rhs_norm,
        condition,
        pivots,
        checks,
    };
    Ok((sol, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDelta {
    pub a: String,
    pub b: String,
    pub rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub scenario: String,
    pub condition: ConditionEstimate,
    pub methods: Vec<String>,
    pub tolerance: f64,
    pub deltas: Vec<PairDelta>,
    pub max_delta: f64,
    pub max_forward_pivot_cond: Option<f64>,
    pub max_backward_pivot_cond: Option<f64>,
    pub checks: Vec<CheckResult>,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: kappa {} ({:?}), agreement tolerance {}",
            self.scenario,
            fmt_num(self.condition.kappa),
            self.condition.method,
            fmt_num(self.tolerance)
        );
        let width = self.methods.iter().map(|m| m.len()).max().unwrap_or(0).max(23);
        let _ = write!(out, "  {:>width$}", "");
        for m in &self.methods {
            let _ = write!(out, " {m:>width$}");
        }
        out.push('\n');
        for a in &self.methods {
            let _ = write!(out, "  {a:>width$}");
            for b in &self.methods {
                let cell = if a == b {
                    "-".to_string()
                } else {
                    self.deltas
                        .iter()
                        .find(|d| (&d.a == a && &d.b == b) || (&d.a == b && &d.b == a))
                        .map_or("?".into(), |d| fmt_num(d.rel))
                };
                let _ = write!(out, " {cell:>width$}");
            }
            out.push('\n');
        }
        if let (Some(f), Some(b)) = (self.max_forward_pivot_cond, self.max_backward_pivot_cond) {
            let _ = writeln!(out, "  max pivot cond: forward {}, backward {}", fmt_num(f), fmt_num(b));
        }
        checks_table(&mut out, &self.checks);
        out
    }
}

fn max_cond(trace: &SolveTrace) -> Result<f64> {
    Ok(trace.block_spectra()?.iter().map(|s| s.cond).fold(1.0, f64::max))
}

/// Run all four solvers and, for model scenarios, every classical recursion;
/// report pairwise relative differences and the identity checks.
pub fn compare(scenario: &Scenario, parallel: bool) -> Result<CompareReport> {
    let sys = scenario.system()?;
    let condition = spectral::condition_estimate(&sys)?;
    let tolerance = tolerances::AGREEMENT * condition.kappa;
    let mut results: Vec<(String, Vec<Block>)> = Vec::new();
    let mut checks = Vec::new();
    let mut traces = Vec::new();
    for alg in Algorithm::ALL {
        match alg.solve(&sys, parallel) {
            Ok(sol) => {
                results.push((alg.name().to_string(), sol.e.clone()));
                traces.push((alg, sol));
            }
            Err(e) => checks.push(CheckResult::failed(alg.name(), e.to_string())),
        }
    }

    if condition.method == spectral::KappaMethod::Dense {
        let mut worst: f64 = 0.0;
        for (_, sol) in &traces {
            worst = worst.max(containment_excess(&sol.trace, condition.lambda_min, condition.lambda_max)?);
        }
        checks.push(CheckResult::at_most("pivot eigenvalue containment", worst, tolerances::EIG_CONTAINMENT));
    }
    if let Some((_, tf)) = traces.iter().find(|(a, _)| *a == Algorithm::TwoFilter) {
        checks.extend(end_block_checks(&tf.trace));
    }
    let max_forward_pivot_cond = traces
        .iter()
        .find(|(a, _)| *a == Algorithm::Fbt)
        .map(|(_, s)| max_cond(&s.trace))
        .transpose()?;
    let max_backward_pivot_cond = traces
        .iter()
        .find(|(a, _)| *a == Algorithm::Bbt)
        .map(|(_, s)| max_cond(&s.trace))
        .transpose()?;

    if let Some(model) = &scenario.model {
        model_checks(model, &mut results, &mut checks);
    }

    let mut deltas = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            deltas.push(PairDelta {
                a: results[i].0.clone(),
                b: results[j].0.clone(),
                rel: linalg::relative_diff(&results[i].1, &results[j].1),
            });
        }
    }
    let max_delta = deltas.iter().map(|d| d.rel).fold(0.0, f64::max);
    checks.insert(0, CheckResult::at_most("pairwise agreement", max_delta, tolerance));
    Ok(CompareReport {
        scenario: scenario.name.clone(),
        condition,
        methods: results.into_iter().map(|(m, _)| m).collect(),
        tolerance,
        deltas,
        max_delta,
        max_forward_pivot_cond,
        max_backward_pivot_cond,
        checks,
    })
}

/// The combined two-filter block equals `d_1^b` at the first block and
/// `d_N^f` at the last.
fn end_block_checks(trace: &SolveTrace) -> Vec<CheckResult> {
    let (Some(c), Some(f), Some(b)) = (&trace.combined, &trace.forward, &trace.backward) else {
        return Vec::new();
    };
    let last = c.len() - 1;
    vec![
        CheckResult::at_most(
            "combined block 1 = d_1 backward",
            linalg::relative_block_diff(&c[0], &b.d[0]),
            tolerances::END_BLOCK,
        ),
        CheckResult::at_most(
            "combined block N = d_N forward",
            linalg::relative_block_diff(&c[last], &f.d[last]),
            tolerances::END_BLOCK,
        ),
    ]
}

fn model_checks(
    model: &LinearGaussianModel,
    results: &mut Vec<(String, Vec<Block>)>,
    checks: &mut Vec<CheckResult>,
) {
    let mut push = |name: &str, r: Result<Vec<Block>>| match r {
        Ok(x) => results.push((name.to_string(), x)),
        Err(e) => checks.push(CheckResult::failed(name, e.to_string())),
    };
    push("rts", kalman::rts_smoother(model).map(|(x, _)| x));
    push("mayne", kalman::mayne_a_smoother(model).map(|(x, _)| x));
    push("mf-oracle", kalman::mf_smoother(model));
    match kalman::woodbury_solve(model) {
        Ok(w) => results.push(("woodbury".into(), w.estimates)),
        Err(crate::Error::MeasurementInfoSingular { .. }) => {}
        Err(e) => checks.push(CheckResult::failed("woodbury", e.to_string())),
    }

    match kalman::measure_rts_identities(model) {
        Ok(r) => checks.push(CheckResult::at_most("forward pivots vs filter", r.max_rel(), tolerances::IDENTITY)),
        Err(e) => checks.push(CheckResult::failed("forward pivots vs filter", e.to_string())),
    }
    match kalman::measure_mayne_identities(model) {
        Ok(r) => checks.push(CheckResult::at_most("backward pivots vs Mayne", r.max_rel(), tolerances::IDENTITY)),
        Err(e) => checks.push(CheckResult::failed("backward pivots vs Mayne", e.to_string())),
    }
    match kalman::theorem8_check(model) {
        Ok(t) => {
            checks.push(CheckResult::at_least("d_b - Q^-1 psd", t.min_psd_abs, -tolerances::PSD));
            checks.push(
                CheckResult::at_most("backward pivot cond bound", t.max_backward_cond, t.cond_bound)
                    .with_detail(format!("alpha {}", fmt_num(t.alpha))),
            );
        }
        Err(e) => checks.push(CheckResult::failed("backward pivot conditioning", e.to_string())),
    }
    if let Ok(sys) = kalman::assemble_system(model) {
        let rhs = sys.rhs_norm();
        let mut worst: f64 = 0.0;
        for (_, x) in results.iter() {
            if let Ok(g) = kalman::objective_gradient(model, x) {
                worst = worst.max(linalg::stacked_norm(&g) / rhs.max(f64::MIN_POSITIVE));
            }
        }
        checks.push(CheckResult::at_most("gradient at estimates / |rhs|", worst, tolerances::STATIONARITY));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaperCheckReport {
    pub checks: Vec<CheckResult>,
}

impl PaperCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        checks_table(&mut out, &self.checks);
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Toy-example regression plus the solver/oracle comparison on a handful of
/// seeded models.
pub fn paper_check() -> Result<PaperCheckReport> {
    let mut checks = Vec::new();
    let toy = sim::toy_section6(false);
    let sys = toy.system()?;
    let a = sys.assemble_dense()?;
    let literal = nalgebra::DMatrix::from_row_slice(
        3,
        3,
        &[14401.0, 120.0, 0.0, 120.0, 14401.0, 120.0, 0.0, 120.0, 1.0],
    );
    checks.push(CheckResult::at_most("toy matrix literal", (&a - literal).amax(), 0.0));
    let eig = spectral::sym_eig(&a)?;
    checks.push(CheckResult::at_most("toy lambda_min ~ 4.8e-9", rel(eig.min(), 4.8e-9), 0.05));
    let fwd = crate::fbt_solve(&sys)?;
    let fd = &fwd.trace.forward.as_ref().expect("forward").d;
    for (k, want) in [14401.0, 14400.0, 4.8222e-9].into_iter().enumerate() {
        checks.push(CheckResult::at_most(format!("toy forward pivot {}", k + 1), rel(fd[k][(0, 0)], want), 1e-3));
    }
    let bwd = crate::bbt_solve(&sys)?;
    let bd = &bwd.trace.backward.as_ref().expect("backward").d;
    let worst = bd.iter().map(|d| (d[(0, 0)] - 1.0).abs()).fold(0.0, f64::max);
    checks.push(CheckResult::at_most("toy backward pivots = 1", worst, 1e-10));
    let v: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
    checks.push(CheckResult::at_most(
        "toy argmax block = 3",
        (spectral::argmax_block(&v, 1) as f64 - 3.0).abs(),
        0.0,
    ));
    let wl = spectral::weakest_link(&vec![nalgebra::DMatrix::from_element(1, 1, 120.0); 2])?;
    checks.push(
        CheckResult::at_least("toy weakest link flagged", f64::from(u8::from(wl.suspect_last_block)), 1.0)
            .with_detail(format!("bound {}", wl.bound)),
    );
    let model_bwd = crate::bbt_solve(&kalman::assemble_system(&sim::toy_section6_model())?)?;
    let worst = model_bwd.trace.backward.as_ref().expect("backward").d.iter().map(|d| (d[(0, 0)] - 1.0).abs()).fold(0.0, f64::max);
    checks.push(CheckResult::at_most("toy model backward pivots = 1", worst, 1e-10));
    let stab = sim::toy_section6(true).system()?;
    let (lo, _) = spectral::extreme_eigenvalues(&stab.assemble_dense()?)?;
    checks.push(
        CheckResult::at_most("stabilized lambda_min = 1", (lo - 1.0).abs(), 1e-8)
            .with_detail(format!("measured {lo}")),
    );

    for (seed, n, big_n, meas) in [
        (1, 1, 3, sim::MeasPattern::One),
        (2, 2, 10, sim::MeasPattern::Mixed),
        (3, 3, 10, sim::MeasPattern::Full),
    ] {
        let sc = sim::random_model(sim::ModelParams::well(seed, n, big_n, meas))?;
        let rep = compare(&sc, true)?;
        for c in rep.checks {
            checks.push(CheckResult {
                name: format!("{}: {}", sc.name, c.name),
                ..c
            });
        }
    }
    Ok(PaperCheckReport { checks })
}
