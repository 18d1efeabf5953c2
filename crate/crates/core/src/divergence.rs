//! Generalized Kullback-Leibler divergences and the relaxed objective.

use crate::error::{Error, Result};
use crate::matrix::MaskedMatrix;
use crate::problem::{Kernel, ProblemInstance, TransportPlan};
use crate::sum::pairwise_sum_by;

/// `kl(t | r) = t log(t / r) - t + r`, with `kl(0 | r) = r`.
///
/// Close to `t = r` the value is taken from the Taylor series of
/// `(1 + d) log(1 + d) - d` in `d = (t - r) / r`, which keeps the result
/// strictly positive for every `t != r`.
pub fn kl_scalar(t: f64, t_ref: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite() && t_ref > 0.0 && t_ref.is_finite()) {
        return Err(Error::Domain("kl_scalar"));
    }
    Ok(kl_unchecked(t, t_ref))
}

const SERIES: [f64; 8] = [
    1.0 / 2.0,
    -1.0 / 6.0,
    1.0 / 12.0,
    -1.0 / 20.0,
    1.0 / 30.0,
    -1.0 / 42.0,
    1.0 / 56.0,
    -1.0 / 72.0,
];

#[inline]
pub(crate) fn kl_unchecked(t: f64, r: f64) -> f64 {
    if t == 0.0 {
        return r;
    }
    let d = (t - r) / r;
    if d.abs() < 1e-2 {
        // (1 + d) ln(1 + d) - d = sum_{k >= 2} (-1)^k d^k / (k (k - 1))
        let series = SERIES.iter().rev().fold(0.0, |acc, c| c + d * acc);
        r * d * d * series
    } else {
        t * (t / r).ln() - t + r
    }
}

/// `sum kl(t_ij | r_ij)` over the allowed entries of two matrices on the same pattern.
pub fn kl_matrix(t: &MaskedMatrix, reference: &MaskedMatrix) -> Result<f64> {
    if !t.same_support(reference) {
        return Err(Error::PatternMismatch);
    }
    for e in 0..t.nnz() {
        let (x, r) = (t.value(e), reference.value(e));
        if !(x >= 0.0 && x.is_finite() && r > 0.0 && r.is_finite()) {
            return Err(Error::Domain("kl_matrix"));
        }
    }
    Ok(pairwise_sum_by(t.nnz(), |e| {
        kl_unchecked(t.value(e), reference.value(e))
    }))
}

/// `sum kl(a_j | b_j)` over two vectors of equal length.
pub fn kl_vector(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::PatternMismatch);
    }
    for (&x, &r) in a.iter().zip(b) {
        if !(x >= 0.0 && x.is_finite() && r > 0.0 && r.is_finite()) {
            return Err(Error::Domain("kl_vector"));
        }
    }
    Ok(pairwise_sum_by(a.len(), |k| kl_unchecked(a[k], b[k])))
}

/// The two parts of the relaxed objective `KL(T | K) + gamma * KL(v_T | v~)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveValue {
    pub kl_plan: f64,
    pub kl_marginal: f64,
    pub total: f64,
}

pub fn objective(inst: &ProblemInstance, t: &TransportPlan) -> Result<ObjectiveValue> {
    let kernel = inst.kernel()?;
    objective_with_kernel(&kernel, inst.v_tilde(), inst.gamma(), t)
}

/// [`objective`] against a kernel that has already been built.
pub fn objective_with_kernel(
    kernel: &Kernel,
    v_tilde: &[f64],
    gamma: f64,
    t: &MaskedMatrix,
) -> Result<ObjectiveValue> {
    let kl_plan = kl_matrix(t, kernel)?;
    let kl_marginal = kl_vector(&t.col_sums(), v_tilde)?;
    Ok(ObjectiveValue {
        kl_plan,
        kl_marginal,
        total: kl_plan + gamma * kl_marginal,
    })
}

/// `[c t + g0 kl(t | t~)] - [g0 kl(t | k) + g0 t~ - g0 k]` with `k = t~ exp(-c / g0)`.
///
/// The two brackets are the entrywise regularized cost and its rewriting
/// against the kernel, so the result is zero up to rounding.
pub fn regularization_identity_residual(c: f64, t: f64, t_tilde: f64, gamma0: f64) -> Result<f64> {
    if !(c.is_finite() && gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::Domain("regularization_identity_residual"));
    }
    let k = t_tilde * (-c / gamma0).exp();
    let lhs = c * t + gamma0 * kl_scalar(t, t_tilde)?;
    let rhs = gamma0 * kl_scalar(t, k)? + gamma0 * t_tilde - gamma0 * k;
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Layout;
    use crate::pattern::ZeroPattern;

    #[test]
    fn scalar_values() {
        assert_eq!(kl_scalar(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(kl_scalar(0.0, 3.5).unwrap(), 3.5);
        // 2 ln 2 - 1 = 0.38629436111989061883...
        assert!((kl_scalar(2.0, 1.0).unwrap() - 0.386_294_361_119_890_6).abs() < 1e-15);
    }

    #[test]
    fn scalar_domain() {
        assert!(kl_scalar(-1e-300, 1.0).is_err());
        assert!(kl_scalar(1.0, 0.0).is_err());
        assert!(kl_scalar(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn series_branch_matches_long_series() {
        for &d0 in &[9.9e-3_f64, -9.9e-3, 5e-4, -3e-7] {
            let (t, r): (f64, f64) = (1.3 * (1.0 + d0), 1.3);
            let d = (t - r) / r;
            let reference: f64 = r
                * (2..40)
                    .map(|k| (-d).powi(k) / (k * (k - 1)) as f64)
                    .sum::<f64>();
            let got = kl_scalar(t, r).unwrap();
            assert!(
                (got - reference).abs() <= 1e-14 * reference,
                "{got} vs {reference}"
            );
        }
    }

    #[test]
    fn branches_meet_continuously() {
        let r = 0.9_f64;
        for &d in &[1e-2_f64, -1e-2] {
            let below = kl_scalar(r * (1.0 + d * (1.0 - 1e-12)), r).unwrap();
            let above = kl_scalar(r * (1.0 + d * (1.0 + 1e-12)), r).unwrap();
            assert!((below - above).abs() <= 1e-10 * below);
        }
    }

    #[test]
    fn adjacent_floats_are_positive() {
        let r = 0.37_f64;
        let t = f64::from_bits(r.to_bits() + 1);
        assert!(kl_scalar(t, r).unwrap() > 0.0);
        assert!(kl_scalar(r, t).unwrap() > 0.0);
    }

    #[test]
    fn matrix_is_sum_of_scalars() {
        let z = ZeroPattern::new(2, 2, [(0, 1)]).unwrap();
        let s = z.support();
        let t = MaskedMatrix::from_entries(s.clone(), Layout::Masked, &[0.2, 1.5, 0.0]);
        let r = MaskedMatrix::from_entries(s, Layout::Dense, &[0.4, 1.0, 0.3]);
        let manual = kl_scalar(0.2, 0.4).unwrap() + kl_scalar(1.5, 1.0).unwrap() + 0.3;
        assert!((kl_matrix(&t, &r).unwrap() - manual).abs() < 1e-15);
        assert_eq!(kl_matrix(&r, &r).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_patterns_are_rejected() {
        let a = MaskedMatrix::from_fn(ZeroPattern::empty(2, 2).support(), Layout::Dense, |_, _| {
            1.0
        });
        let b = MaskedMatrix::from_fn(
            ZeroPattern::new(2, 2, [(0, 0)]).unwrap().support(),
            Layout::Dense,
            |_, _| 1.0,
        );
        assert!(matches!(kl_matrix(&a, &b), Err(Error::PatternMismatch)));
    }

    #[test]
    fn identity_special_cases() {
        assert!(
            regularization_identity_residual(0.8, 0.0, 1.3, 0.5)
                .unwrap()
                .abs()
                < 1e-15
        );
        assert_eq!(
            regularization_identity_residual(0.0, 1.0, 1.0, 2.0).unwrap(),
            0.0
        );
    }
}
