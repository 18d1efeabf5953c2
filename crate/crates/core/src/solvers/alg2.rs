use crate::divergence::objective_with_kernel;
use crate::error::Result;
use crate::problem::{Kernel, ProblemInstance, TransportPlan};

use super::{pow_pos, Algorithm, NumericalFailure, ScalingIteration, ScalingState};

/// Rescales the kernel with cumulative scalings:
///
/// ```text
/// d1_i = u~_i / sum_j k_ij d2_j
/// d2_j = (v~_j / sum_i d1_i k_ij)^(gamma / (1 + gamma))
/// t_ij = d1_i k_ij d2_j
/// ```
///
/// starting from `d2 = 1`. Produces the same plans as [`super::Alg1Iteration`];
/// the relaxed marginal is recovered as `v_j = d2_j^(-1 / gamma) v~_j`.
#[derive(Debug, Clone)]
pub struct Alg2Iteration {
    kernel: Kernel,
    u_tilde: Vec<f64>,
    v_tilde: Vec<f64>,
    gamma: f64,
    exponent: f64,
    state: ScalingState,
}

impl Alg2Iteration {
    pub fn new(inst: &ProblemInstance) -> Result<Self> {
        let kernel = inst.kernel()?;
        let state = ScalingState::initial(&kernel, inst.v_tilde().to_vec());
        let gamma = inst.gamma();
        Ok(Self {
            kernel,
            u_tilde: inst.u_tilde().to_vec(),
            v_tilde: inst.v_tilde().to_vec(),
            gamma,
            exponent: gamma / (1.0 + gamma),
            state,
        })
    }
}

impl ScalingIteration for Alg2Iteration {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Alg2
    }

    fn state(&self) -> &ScalingState {
        &self.state
    }

    fn step(&mut self) -> Result<(), NumericalFailure> {
        let s = &mut self.state;
        let d1: Vec<f64> = self
            .kernel
            .row_sums_weighted(&s.d2)
            .iter()
            .zip(&self.u_tilde)
            .map(|(r, u)| u / r)
            .collect();
        let d2: Vec<f64> = self
            .kernel
            .col_sums_weighted(&d1)
            .iter()
            .zip(&self.v_tilde)
            .map(|(cs, v)| pow_pos(v / cs, self.exponent))
            .collect();
        if !d1.iter().chain(&d2).all(|x| x.is_finite() && *x > 0.0) {
            return Err(NumericalFailure);
        }
        let next = TransportPlan(self.kernel.scaled(&d1, &d2));
        s.sum_abs_delta = next.sum_abs_diff(&s.t);
        s.mass = next.total();
        s.t = next;
        s.c1 = d1.iter().zip(&s.d1).map(|(new, old)| new / old).collect();
        s.c2 = d2.iter().zip(&s.d2).map(|(new, old)| new / old).collect();
        s.v = d2
            .iter()
            .zip(&self.v_tilde)
            .map(|(d, v)| pow_pos(*d, -1.0 / self.gamma) * v)
            .collect();
        s.d1 = d1;
        s.d2 = d2;
        s.l += 1;
        Ok(())
    }

    fn column_target(&self) -> &[f64] {
        &self.state.v
    }

    fn objective(&self) -> f64 {
        objective_with_kernel(&self.kernel, &self.v_tilde, self.gamma, &self.state.t)
            .map_or(f64::NAN, |o| o.total)
    }
}
