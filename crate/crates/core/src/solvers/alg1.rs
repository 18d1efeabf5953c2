use crate::divergence::objective_with_kernel;
use crate::error::Result;
use crate::problem::{Kernel, ProblemInstance, TransportPlan};

use super::{pow_pos, Algorithm, NumericalFailure, ScalingIteration, ScalingState};

/// Scales the current plan directly:
///
/// ```text
/// c1_i = u~_i / sum_j t_ij
/// c2_j = (v_j / sum_i c1_i t_ij)^(gamma / (1 + gamma))
/// t_ij <- c1_i t_ij c2_j
/// v_j  <- c2_j^(-1 / gamma) v_j
/// ```
///
/// starting from `T = K`, `v = v~`.
#[derive(Debug, Clone)]
pub struct Alg1Iteration {
    kernel: Kernel,
    u_tilde: Vec<f64>,
    v_tilde: Vec<f64>,
    gamma: f64,
    exponent: f64,
    state: ScalingState,
}

impl Alg1Iteration {
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

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }
}

impl ScalingIteration for Alg1Iteration {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Alg1
    }

    fn state(&self) -> &ScalingState {
        &self.state
    }

    fn step(&mut self) -> Result<(), NumericalFailure> {
        let s = &mut self.state;
        let c1: Vec<f64> =
            s.t.row_sums()
                .iter()
                .zip(&self.u_tilde)
                .map(|(r, u)| u / r)
                .collect();
        let c2: Vec<f64> =
            s.t.col_sums_weighted(&c1)
                .iter()
                .zip(&s.v)
                .map(|(cs, v)| pow_pos(v / cs, self.exponent))
                .collect();
        if !c1.iter().chain(&c2).all(|x| x.is_finite() && *x > 0.0) {
            return Err(NumericalFailure);
        }
        let next = TransportPlan(s.t.scaled(&c1, &c2));
        s.sum_abs_delta = next.sum_abs_diff(&s.t);
        s.mass = next.total();
        s.t = next;
        for (v, c) in s.v.iter_mut().zip(&c2) {
            *v *= pow_pos(*c, -1.0 / self.gamma);
        }
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
        &self.state.v
    }

    fn objective(&self) -> f64 {
        objective_with_kernel(&self.kernel, &self.v_tilde, self.gamma, &self.state.t)
            .map_or(f64::NAN, |o| o.total)
    }
}
