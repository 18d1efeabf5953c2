use crate::divergence::{kl_matrix, kl_vector};
use crate::error::{Error, Result};
use crate::problem::{Kernel, ProblemInstance, TransportPlan};

use super::{pow_pos, Algorithm, NumericalFailure, ScalingIteration, ScalingState};

/// Scaling for the doubly relaxed problem
/// `KL(T | K) + gamma1 KL(u_T | u~) + gamma2 KL(v_T | v~)`:
///
/// ```text
/// d1_i = (u~_i / sum_j k_ij d2_j)^(gamma1 / (1 + gamma1))
/// d2_j = (v~_j / sum_i d1_i k_ij)^(gamma2 / (1 + gamma2))
/// ```
///
/// Only defined here without a zero pattern and with a unit ideal plan.
#[derive(Debug, Clone)]
pub struct ChizatIteration {
    kernel: Kernel,
    u_tilde: Vec<f64>,
    v_tilde: Vec<f64>,
    gamma1: f64,
    gamma2: f64,
    state: ScalingState,
}

impl ChizatIteration {
    pub fn new(inst: &ProblemInstance, gamma1: f64, gamma2: f64) -> Result<Self> {
        if !inst.pattern().is_empty() {
            return Err(Error::UnsupportedPattern);
        }
        if !inst.has_unit_ideal() {
            return Err(Error::UnsupportedIdeal);
        }
        if !(gamma1.is_finite() && gamma1 > 0.0 && gamma2.is_finite() && gamma2 > 0.0) {
            return Err(Error::Domain(
                "ChizatIteration: gamma1 and gamma2 must be positive",
            ));
        }
        let kernel = inst.kernel()?;
        let state = ScalingState::initial(&kernel, inst.v_tilde().to_vec());
        Ok(Self {
            kernel,
            u_tilde: inst.u_tilde().to_vec(),
            v_tilde: inst.v_tilde().to_vec(),
            gamma1,
            gamma2,
            state,
        })
    }
}

impl ScalingIteration for ChizatIteration {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Chizat
    }

    fn state(&self) -> &ScalingState {
        &self.state
    }

    fn step(&mut self) -> Result<(), NumericalFailure> {
        let p1 = self.gamma1 / (1.0 + self.gamma1);
        let p2 = self.gamma2 / (1.0 + self.gamma2);
        let s = &mut self.state;
        let d1: Vec<f64> = self
            .kernel
            .row_sums_weighted(&s.d2)
            .iter()
            .zip(&self.u_tilde)
            .map(|(r, u)| pow_pos(u / r, p1))
            .collect();
        let d2: Vec<f64> = self
            .kernel
            .col_sums_weighted(&d1)
            .iter()
            .zip(&self.v_tilde)
            .map(|(cs, v)| pow_pos(v / cs, p2))
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
            .map(|(d, v)| pow_pos(*d, -1.0 / self.gamma2) * v)
            .collect();
        s.d1 = d1;
        s.d2 = d2;
        s.l += 1;
        Ok(())
    }

    fn column_target(&self) -> &[f64] {
        &self.v_tilde
    }

    fn objective(&self) -> f64 {
        let t = &self.state.t;
        let parts = kl_matrix(t, &self.kernel).and_then(|plan| {
            Ok(plan
                + self.gamma1 * kl_vector(&t.row_sums(), &self.u_tilde)?
                + self.gamma2 * kl_vector(&t.col_sums(), &self.v_tilde)?)
        });
        parts.unwrap_or(f64::NAN)
    }
}
