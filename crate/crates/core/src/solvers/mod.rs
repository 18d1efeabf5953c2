//! Iterative scaling solvers.
//!
//! Every algorithm is a [`ScalingIteration`]: a stateful object that advances
//! the plan by one full (row then column) update. [`run`] drives any of them
//! with the common stopping rule and records a [`TraceRecord`] stream.

mod alg1;
mod alg2;
mod chizat;
mod sinkhorn;
mod trace;

use std::fmt;
use std::str::FromStr;

pub use alg1::Alg1Iteration;
pub use alg2::Alg2Iteration;
pub use chizat::ChizatIteration;
pub use sinkhorn::SinkhornIteration;
pub use trace::{write_trace_csv, TraceRecord, TRACE_COLUMNS};

use crate::error::{Error, Result};
use crate::problem::{Kernel, ProblemInstance, TransportPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// Multiplicative row/column scaling of the plan with a relaxed column marginal.
    #[default]
    Alg1,
    /// The same iterates, written in terms of cumulative scalings of the kernel.
    Alg2,
    /// Classical Sinkhorn-Knopp with both marginals enforced.
    Sk,
    /// Both marginals relaxed; no zero pattern.
    Chizat,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Alg1 => "alg1",
            Algorithm::Alg2 => "alg2",
            Algorithm::Sk => "sk",
            Algorithm::Chizat => "chizat",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alg1" => Ok(Algorithm::Alg1),
            "alg2" => Ok(Algorithm::Alg2),
            "sk" => Ok(Algorithm::Sk),
            "chizat" => Ok(Algorithm::Chizat),
            other => Err(Error::Format(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Bound on `max |c - 1|` for both scaling vectors.
    pub tol_scaling: f64,
    /// Bound on `sum |T(l) - T(l-1)| / sum T(l)`.
    pub tol_delta: f64,
    pub max_iter: usize,
    /// Row relaxation constant for the Chizat iteration (instance `gamma` when unset).
    pub gamma1: Option<f64>,
    /// Column relaxation constant for the Chizat iteration (instance `gamma` when unset).
    pub gamma2: Option<f64>,
    /// Record a trace line every this many iterations; 0 disables the trace.
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Alg1,
            tol_scaling: 1e-9,
            tol_delta: 1e-12,
            max_iter: 100_000,
            gamma1: None,
            gamma2: None,
            trace_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.tol_scaling) || !positive(self.tol_delta) {
            return Err(Error::Domain("SolverConfig: tolerances must be positive"));
        }
        if self.gamma1.is_some_and(|g| !positive(g)) || self.gamma2.is_some_and(|g| !positive(g)) {
            return Err(Error::Domain(
                "SolverConfig: gamma1 and gamma2 must be positive",
            ));
        }
        Ok(())
    }
}

/// The per-iteration state shared by all algorithms.
///
/// `c1`, `c2` are the scalings applied in the latest update and `d1`, `d2`
/// their running products, so `T(l) = diag(d1) K diag(d2)` and
/// `d(l+1) = c(l+1) * d(l)`.
#[derive(Debug, Clone)]
pub struct ScalingState {
    pub t: TransportPlan,
    pub v: Vec<f64>,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub l: usize,
    /// `sum |t_ij(l) - t_ij(l-1)|` over the allowed entries.
    pub sum_abs_delta: f64,
    /// `sum t_ij(l)`.
    pub mass: f64,
}

impl ScalingState {
    pub(crate) fn initial(kernel: &Kernel, v: Vec<f64>) -> Self {
        let (m, n) = (kernel.rows(), kernel.cols());
        Self {
            t: TransportPlan(kernel.as_matrix().clone()),
            v,
            c1: vec![1.0; m],
            c2: vec![1.0; n],
            d1: vec![1.0; m],
            d2: vec![1.0; n],
            l: 0,
            sum_abs_delta: 0.0,
            mass: kernel.total(),
        }
    }

    pub fn max_c1_dev(&self) -> f64 {
        max_dev(&self.c1)
    }

    pub fn max_c2_dev(&self) -> f64 {
        max_dev(&self.c2)
    }

    pub(crate) fn is_finite(&self) -> bool {
        self.c1
            .iter()
            .chain(&self.c2)
            .chain(&self.v)
            .all(|x| x.is_finite())
            && self.sum_abs_delta.is_finite()
            && self.mass.is_finite()
    }
}

fn max_dev(c: &[f64]) -> f64 {
    c.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)
}

/// `x^p` for `x > 0`, evaluated as `exp(p ln x)`.
#[inline]
pub(crate) fn pow_pos(x: f64, p: f64) -> f64 {
    (p * x.ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Converged,
}

/// Converged iff both scaling vectors are within `tol_scaling` of one and
/// the last update moved less than `tol_delta` of the plan's mass.
pub fn stopping_check(state: &ScalingState, cfg: &SolverConfig) -> StopDecision {
    if state.l >= 1
        && state.max_c1_dev() < cfg.tol_scaling
        && state.max_c2_dev() < cfg.tol_scaling
        && state.sum_abs_delta < cfg.tol_delta * state.mass
    {
        StopDecision::Converged
    } else {
        StopDecision::Continue
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// Iteration budget exhausted while the half-step column residuals
    /// alternate between two limits (Sinkhorn-Knopp only).
    SuspectedInfeasible,
    NumericalFailure,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::SuspectedInfeasible => "suspected_infeasible",
            Termination::NumericalFailure => "numerical_failure",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Residuals of the final iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub max_c1_dev: f64,
    pub max_c2_dev: f64,
    pub sum_abs_delta: f64,
    /// `sum_abs_delta / sum T`.
    pub relative_delta: f64,
    /// `max_i |sum_j t_ij - u~_i| / u~_i`.
    pub row_residual: f64,
    /// `max_j |sum_i t_ij - target_j| / target_j` against the algorithm's column target.
    pub col_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub algorithm: Algorithm,
    pub plan: TransportPlan,
    pub v_star: Vec<f64>,
    /// Cumulative row scaling `d1`.
    pub row_scaling: Vec<f64>,
    /// Cumulative column scaling `d2`.
    pub col_scaling: Vec<f64>,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRecord>,
    pub residuals: Residuals,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// One algorithm, advanced one full update at a time.
pub trait ScalingIteration {
    fn algorithm(&self) -> Algorithm;

    fn state(&self) -> &ScalingState;

    /// Performs update `l -> l + 1`. Fails when an intermediate is not finite.
    fn step(&mut self) -> Result<(), NumericalFailure>;

    /// The column marginal the plan is being driven towards right now.
    fn column_target(&self) -> &[f64];

    fn objective(&self) -> f64;

    fn suspected_infeasible(&self) -> bool {
        false
    }
}

/// A non-finite value appeared during an update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumericalFailure;

pub(crate) fn relative_residual(actual: &[f64], target: &[f64]) -> f64 {
    actual
        .iter()
        .zip(target)
        .map(|(a, t)| ((a - t) / t).abs())
        .fold(0.0, f64::max)
}

/// Runs an iteration to termination under `cfg`'s stopping rule.
pub fn run<I: ScalingIteration>(
    mut iter: I,
    u_tilde: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let mut trace = Vec::new();
    let mut first_delta = f64::NAN;
    let mut termination = None;

    let record = |iter: &I, first_delta: f64| {
        let s = iter.state();
        TraceRecord {
            iter: s.l,
            sum_abs_delta: s.sum_abs_delta,
            log_delta_normalized: s.sum_abs_delta.ln() / first_delta.ln(),
            max_c1_dev: s.max_c1_dev(),
            max_c2_dev: s.max_c2_dev(),
            objective_total: iter.objective(),
            row_residual: relative_residual(&s.t.row_sums(), u_tilde),
            col_residual: relative_residual(&s.t.col_sums(), iter.column_target()),
            mass: s.mass,
        }
    };

    for l in 1..=cfg.max_iter {
        if iter.step().is_err() || !iter.state().is_finite() {
            termination = Some(Termination::NumericalFailure);
            break;
        }
        let state = iter.state();
        if l == 1 {
            first_delta = state.sum_abs_delta;
        }
        let converged = stopping_check(state, cfg) == StopDecision::Converged;
        if cfg.trace_every > 0 && (l == 1 || l % cfg.trace_every == 0 || converged) {
            trace.push(record(&iter, first_delta));
        }
        if converged {
            termination = Some(Termination::Converged);
            break;
        }
    }

    let termination = termination.unwrap_or(if iter.suspected_infeasible() {
        Termination::SuspectedInfeasible
    } else {
        Termination::MaxIterations
    });
    if cfg.trace_every > 0
        && trace.last().is_none_or(|r| r.iter != iter.state().l)
        && iter.state().l > 0
    {
        trace.push(record(&iter, first_delta));
    }

    let state = iter.state();
    let residuals = Residuals {
        max_c1_dev: state.max_c1_dev(),
        max_c2_dev: state.max_c2_dev(),
        sum_abs_delta: state.sum_abs_delta,
        relative_delta: state.sum_abs_delta / state.mass,
        row_residual: relative_residual(&state.t.row_sums(), u_tilde),
        col_residual: relative_residual(&state.t.col_sums(), iter.column_target()),
    };
    Ok(SolveReport {
        algorithm: iter.algorithm(),
        plan: state.t.clone(),
        v_star: state.v.clone(),
        row_scaling: state.d1.clone(),
        col_scaling: state.d2.clone(),
        iterations: state.l,
        termination,
        trace,
        residuals,
    })
}

pub fn solve_alg1(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    run(Alg1Iteration::new(inst)?, inst.u_tilde(), cfg)
}

pub fn solve_alg2(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    run(Alg2Iteration::new(inst)?, inst.u_tilde(), cfg)
}

pub fn solve_sk(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    run(SinkhornIteration::new(inst)?, inst.u_tilde(), cfg)
}

pub fn solve_chizat(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    let gamma1 = cfg.gamma1.unwrap_or(inst.gamma());
    let gamma2 = cfg.gamma2.unwrap_or(inst.gamma());
    run(
        ChizatIteration::new(inst, gamma1, gamma2)?,
        inst.u_tilde(),
        cfg,
    )
}

/// Dispatches on `cfg.algorithm`.
pub fn solve(inst: &ProblemInstance, cfg: &SolverConfig) -> Result<SolveReport> {
    match cfg.algorithm {
        Algorithm::Alg1 => solve_alg1(inst, cfg),
        Algorithm::Alg2 => solve_alg2(inst, cfg),
        Algorithm::Sk => solve_sk(inst, cfg),
        Algorithm::Chizat => solve_chizat(inst, cfg),
    }
}
