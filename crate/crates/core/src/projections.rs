//! KL (Bregman) projections onto the row and column constraint sets.
//!
//! Points are pairs `(T, v)` with `T` positive off the pattern and `v > 0`.
//! The divergence between two points is `KL(T | S) + gamma KL(v | w)`, which
//! is the plain KL divergence of the stacked vectors `(T, gamma v)`.
//!
//! * Rows: `{ T 1 = u~ }`. Projection scales row `i` by `u~_i / sum_j s_ij`
//!   and leaves `v` untouched.
//! * Columns: `{ T' 1 = v }`. Projection scales column `j` by
//!   `c_j = (w_j / sum_i s_ij)^(gamma / (1 + gamma))` and sets
//!   `v_j = c_j^(-1 / gamma) w_j`, after which column sums equal `v`.
//!
//! Alternating the two from `(K, v~)` reproduces the relaxed scaling
//! iteration step for step.

use crate::divergence::{kl_matrix, kl_unchecked, kl_vector};
use crate::error::{Error, Result};
use crate::problem::{ProblemInstance, TransportPlan};
use crate::solvers::pow_pos;

/// A point `(T, v)` with strictly positive allowed entries and `v > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPoint {
    t: TransportPlan,
    v: Vec<f64>,
}

impl AugmentedPoint {
    pub fn new(t: TransportPlan, v: Vec<f64>) -> Result<Self> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if v.len() != t.cols() {
            return Err(Error::PatternMismatch);
        }
        if !(t.min_support() > 0.0 && t.all_finite() && v.iter().all(|&x| positive(x))) {
            return Err(Error::Domain("AugmentedPoint::new"));
        }
        Ok(Self { t, v })
    }

    /// The starting point `(K, v~)`.
    pub fn start(inst: &ProblemInstance) -> Result<Self> {
        let k = inst.kernel()?;
        Self::new(TransportPlan(k.into_inner()), inst.v_tilde().to_vec())
    }

    pub fn plan(&self) -> &TransportPlan {
        &self.t
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn into_parts(self) -> (TransportPlan, Vec<f64>) {
        (self.t, self.v)
    }
}

/// Projection onto `{ T 1 = u~ }`.
pub fn project_rows(point: &AugmentedPoint, u_tilde: &[f64]) -> Result<AugmentedPoint> {
    if u_tilde.len() != point.t.rows() {
        return Err(Error::PatternMismatch);
    }
    let c1: Vec<f64> = point
        .t
        .row_sums()
        .iter()
        .zip(u_tilde)
        .map(|(s, u)| u / s)
        .collect();
    Ok(AugmentedPoint {
        t: TransportPlan(point.t.map(|i, _, x| c1[i] * x)),
        v: point.v.clone(),
    })
}

/// Projection onto `{ T' 1 = v }`.
pub fn project_columns(point: &AugmentedPoint, gamma: f64) -> Result<AugmentedPoint> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::Domain("project_columns"));
    }
    let exponent = gamma / (1.0 + gamma);
    let c2: Vec<f64> = point
        .t
        .col_sums()
        .iter()
        .zip(&point.v)
        .map(|(s, w)| pow_pos(w / s, exponent))
        .collect();
    let v = point
        .v
        .iter()
        .zip(&c2)
        .map(|(w, c)| w * pow_pos(*c, -1.0 / gamma))
        .collect();
    Ok(AugmentedPoint {
        t: TransportPlan(point.t.map(|_, j, x| x * c2[j])),
        v,
    })
}

/// Rows then columns, `iterations` times, from `(K, v~)`. The returned
/// sequence starts with the initial point and has `iterations + 1` entries.
pub fn alternate(inst: &ProblemInstance, iterations: usize) -> Result<Vec<AugmentedPoint>> {
    let mut points = Vec::with_capacity(iterations + 1);
    let mut x = AugmentedPoint::start(inst)?;
    points.push(x.clone());
    for _ in 0..iterations {
        x = project_columns(&project_rows(&x, inst.u_tilde())?, inst.gamma())?;
        points.push(x.clone());
    }
    Ok(points)
}

/// `KL(T | S) + gamma KL(v | w)`.
pub fn bregman_divergence(x: &AugmentedPoint, from: &AugmentedPoint, gamma: f64) -> Result<f64> {
    Ok(kl_matrix(&x.t, &from.t)? + gamma * kl_vector(&x.v, &from.v)?)
}

/// Central finite-difference gradient of `f(x) = KL(x | x~)` at `point`,
/// in the stacked coordinates `x = (allowed entries of T, gamma v)` with
/// `x~ = (K, gamma v~)`.
pub fn finite_difference_gradient(
    inst: &ProblemInstance,
    point: &AugmentedPoint,
    step: f64,
) -> Result<Vec<f64>> {
    let k = inst.kernel()?;
    let gamma = inst.gamma();
    if !point.t.same_support(&k) {
        return Err(Error::PatternMismatch);
    }
    let mut x: Vec<f64> = point.t.support_values();
    x.extend(point.v.iter().map(|v| gamma * v));
    let mut reference: Vec<f64> = k.support_values();
    reference.extend(inst.v_tilde().iter().map(|v| gamma * v));

    let f = |x: &[f64]| -> f64 {
        x.iter()
            .zip(&reference)
            .map(|(a, r)| kl_unchecked(*a, *r))
            .sum()
    };
    let mut grad = Vec::with_capacity(x.len());
    for q in 0..x.len() {
        let orig = x[q];
        x[q] = orig + step;
        let up = f(&x);
        x[q] = orig - step;
        let down = f(&x);
        x[q] = orig;
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}
