use std::collections::VecDeque;

use crate::divergence::kl_matrix;
use crate::error::Result;
use crate::problem::{Kernel, ProblemInstance, TransportPlan};

use super::{Algorithm, NumericalFailure, ScalingIteration, ScalingState};

/// Iterations inspected by the oscillation diagnostic.
pub const OSCILLATION_WINDOW: usize = 50;
/// Half-step residuals two apart must agree to this (max-norm).
pub const OSCILLATION_LAG2_TOL: f64 = 1e-10;
/// Adjacent half-step residuals must differ by more than this (max-norm).
pub const OSCILLATION_LAG1_MIN: f64 = 1e-6;

/// Classical Sinkhorn-Knopp scaling (unit exponent on the column update).
///
/// The updates are applied multiplicatively to the plan, which is
/// algebraically the same as rescaling the kernel but keeps the plan bounded
/// when the scalings themselves diverge, as they do on infeasible instances.
/// The relative column residual is recorded after each half-step so that a
/// period-two alternation can be reported as suspected infeasibility.
#[derive(Debug, Clone)]
pub struct SinkhornIteration {
    kernel: Kernel,
    u_tilde: Vec<f64>,
    v_tilde: Vec<f64>,
    state: ScalingState,
    half_steps: VecDeque<Vec<f64>>,
}

impl SinkhornIteration {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let kernel = inst.kernel()?;
        let state = ScalingState::initial(&kernel, inst.v_tilde().to_vec());
        Ok(Self {
            kernel,
            u_tilde: inst.u_tilde().to_vec(),
            v_tilde: inst.v_tilde().to_vec(),
            state,
            half_steps: VecDeque::with_capacity(2 * OSCILLATION_WINDOW + 2),
        })
    }

    fn push_residual(&mut self, col_sums: &[f64]) {
        if self.half_steps.len() == 2 * OSCILLATION_WINDOW + 2 {
            self.half_steps.pop_front();
        }
        let r = col_sums
            .iter()
            .zip(&self.v_tilde)
            .map(|(s, v)| s / v - 1.0)
            .collect();
        self.half_steps.push_back(r);
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl ScalingIteration for SinkhornIteration {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Sk
    }

    fn state(&self) -> &ScalingState {
        &self.state
    }

    fn step(&mut self) -> Result<(), NumericalFailure> {
        let t = &self.state.t;
        let c1: Vec<f64> = t
            .row_sums()
            .iter()
            .zip(&self.u_tilde)
            .map(|(r, u)| u / r)
            .collect();
        let half = t.col_sums_weighted(&c1);
        let c2: Vec<f64> = half
            .iter()
            .zip(&self.v_tilde)
            .map(|(cs, v)| v / cs)
            .collect();
        if !c1.iter().chain(&c2).all(|x| x.is_finite() && *x > 0.0) {
            return Err(NumericalFailure);
        }
        let next = TransportPlan(t.scaled(&c1, &c2));
        self.push_residual(&half);
        self.push_residual(&next.col_sums());

        let s = &mut self.state;
        s.sum_abs_delta = next.sum_abs_diff(&s.t);
        s.mass = next.total();
        s.t = next;
        for (d, c) in s.d1.iter_mut().zip(&c1) {
            *d *= c;
        }
        for (d, c) in s.d2.iter_mut().zip(&c2) {
            *d *= c;
        }
        s.c1 = c1;
        s.c2 = c2;
        s.l += 1;
        Ok(())
    }

    fn column_target(&self) -> &[f64] {
        &self.v_tilde
    }

    fn objective(&self) -> f64 {
        kl_matrix(&self.state.t, &self.kernel).unwrap_or(f64::NAN)
    }

    fn suspected_infeasible(&self) -> bool {
        let r = &self.half_steps;
        if r.len() < 2 * OSCILLATION_WINDOW + 2 {
            return false;
        }
        (2..r.len()).all(|k| {
            distance(&r[k], &r[k - 2]) < OSCILLATION_LAG2_TOL
                && distance(&r[k], &r[k - 1]) > OSCILLATION_LAG1_MIN
        })
    }
}
