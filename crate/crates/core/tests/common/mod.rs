#![allow(dead_code)]

use constrained_ot::prelude::*;
use ndarray::{array, Array2};

/// 2x2 with `u~ = v~ = (1, 2)` and the bottom-right route forbidden: no plan
/// matches both marginals.
pub fn infeasible_2x2() -> ProblemInstance {
    validate_instance(&RawInstance {
        m: 2,
        n: 2,
        u_tilde: vec![1.0, 2.0],
        v_tilde: vec![1.0, 2.0],
        cost: array![[0.3, 0.7], [0.5, 0.0]],
        zero_pattern: vec![(1, 1)],
        ideal_plan: None,
        gamma0: 1.0,
        gamma: 1.0,
    })
    .unwrap()
}

/// Same instance with the target marginal rescaled so that `sum u~ = ratio * sum v~`.
pub fn with_mass_ratio(inst: &ProblemInstance, ratio: f64) -> ProblemInstance {
    let mut raw = inst.to_raw();
    let su: f64 = raw.u_tilde.iter().sum();
    let sv: f64 = raw.v_tilde.iter().sum();
    let scale = su / (ratio * sv);
    raw.v_tilde.iter_mut().for_each(|v| *v *= scale);
    validate_instance(&raw).unwrap()
}

pub fn instance(
    u: Vec<f64>,
    v: Vec<f64>,
    cost: Array2<f64>,
    zero_pattern: Vec<(usize, usize)>,
    gamma0: f64,
    gamma: f64,
) -> ProblemInstance {
    let (m, n) = cost.dim();
    validate_instance(&RawInstance {
        m,
        n,
        u_tilde: u,
        v_tilde: v,
        cost,
        zero_pattern,
        ideal_plan: None,
        gamma0,
        gamma,
    })
    .unwrap()
}

/// Largest `|a - b| / |b|` over the allowed entries of two plans on the same pattern.
pub fn max_rel_diff(a: &MaskedMatrix, b: &MaskedMatrix) -> f64 {
    assert!(a.same_support(b));
    (0..a.nnz())
        .map(|e| ((a.value(e) - b.value(e)) / b.value(e)).abs())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &MaskedMatrix, b: &MaskedMatrix) -> f64 {
    assert!(a.same_support(b));
    (0..a.nnz())
        .map(|e| (a.value(e) - b.value(e)).abs())
        .fold(0.0, f64::max)
}
