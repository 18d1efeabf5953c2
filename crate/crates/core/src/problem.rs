//! Problem instances, validation, and the Gibbs kernel.

use std::ops::Deref;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, InvalidInstance, Result, Side, ValidationIssue};
use crate::matrix::{Layout, MaskedMatrix};
use crate::pattern::{Support, ZeroPattern};
use crate::sum::pairwise_sum;

macro_rules! masked_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(pub(crate) MaskedMatrix);

        impl $name {
            pub fn into_inner(self) -> MaskedMatrix {
                self.0
            }

            pub fn as_matrix(&self) -> &MaskedMatrix {
                &self.0
            }
        }

        impl Deref for $name {
            type Target = MaskedMatrix;

            fn deref(&self) -> &MaskedMatrix {
                &self.0
            }
        }
    };
}

masked_newtype!(
    /// Cost per unit mass on the allowed entries. Negative costs are legal.
    CostMatrix
);
masked_newtype!(
    /// The desired plan `T~`: strictly positive off the pattern.
    IdealPlan
);
masked_newtype!(
    /// `k_ij = t~_ij * exp(-c_ij / gamma0)` off the pattern, structurally zero on it.
    Kernel
);
masked_newtype!(
    /// A nonnegative plan that is zero on the pattern.
    TransportPlan
);

impl Kernel {
    /// Wraps a matrix whose allowed entries are already strictly positive.
    pub fn from_matrix(k: MaskedMatrix) -> Result<Self> {
        if k.min_support() > 0.0 && k.all_finite() {
            Ok(Self(k))
        } else {
            Err(Error::Domain("Kernel::from_matrix"))
        }
    }
}

impl TransportPlan {
    /// Wraps a matrix after checking that its allowed entries are finite and nonnegative.
    pub fn from_matrix(t: MaskedMatrix) -> Result<Self> {
        if t.min_support() >= 0.0 && t.all_finite() {
            Ok(Self(t))
        } else {
            Err(Error::Domain("TransportPlan::from_matrix"))
        }
    }

    /// Reads the allowed entries of a dense matrix; forbidden slots are ignored.
    pub fn from_dense(support: Arc<Support>, layout: Layout, dense: &Array2<f64>) -> Result<Self> {
        if dense.dim() != (support.rows(), support.cols()) {
            return Err(Error::PatternMismatch);
        }
        Self::from_matrix(MaskedMatrix::from_fn(support, layout, |i, j| dense[[i, j]]))
    }

    /// The rank-one plan `u v' / sum(v)`, restricted to the allowed entries.
    pub fn product(support: Arc<Support>, layout: Layout, u: &[f64], v: &[f64]) -> Self {
        let mass = pairwise_sum(v);
        Self(MaskedMatrix::from_fn(support, layout, |i, j| {
            u[i] * v[j] / mass
        }))
    }
}

/// Source masses `u~` and desired target masses `v~`.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals {
    pub u_tilde: Vec<f64>,
    pub v_tilde: Vec<f64>,
}

impl Marginals {
    pub fn source_mass(&self) -> f64 {
        pairwise_sum(&self.u_tilde)
    }

    pub fn target_mass(&self) -> f64 {
        pairwise_sum(&self.v_tilde)
    }

    /// `|sum(u) - sum(v)| <= rel_tol * max(sum(u), sum(v))`.
    pub fn is_balanced(&self, rel_tol: f64) -> bool {
        let (a, b) = (self.source_mass(), self.target_mass());
        (a - b).abs() <= rel_tol * a.max(b)
    }
}

/// Unvalidated instance data, as read from a file or assembled by hand.
///
/// Cost and ideal-plan entries on forbidden pairs are ignored. A missing
/// ideal plan means all ones off the pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub m: usize,
    pub n: usize,
    pub u_tilde: Vec<f64>,
    pub v_tilde: Vec<f64>,
    pub cost: Array2<f64>,
    pub zero_pattern: Vec<(usize, usize)>,
    pub ideal_plan: Option<Array2<f64>>,
    pub gamma0: f64,
    pub gamma: f64,
}

/// A validated instance: the full input to any solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    marginals: Marginals,
    cost: CostMatrix,
    pattern: ZeroPattern,
    ideal: IdealPlan,
    unit_ideal: bool,
    gamma0: f64,
    gamma: f64,
    layout: Layout,
}

impl ProblemInstance {
    pub fn rows(&self) -> usize {
        self.pattern.rows()
    }

    pub fn cols(&self) -> usize {
        self.pattern.cols()
    }

    pub fn marginals(&self) -> &Marginals {
        &self.marginals
    }

    pub fn u_tilde(&self) -> &[f64] {
        &self.marginals.u_tilde
    }

    pub fn v_tilde(&self) -> &[f64] {
        &self.marginals.v_tilde
    }

    pub fn cost(&self) -> &CostMatrix {
        &self.cost
    }

    pub fn pattern(&self) -> &ZeroPattern {
        &self.pattern
    }

    pub fn support(&self) -> &Arc<Support> {
        self.cost.support()
    }

    pub fn ideal(&self) -> &IdealPlan {
        &self.ideal
    }

    /// True when every allowed ideal-plan entry equals one.
    pub fn has_unit_ideal(&self) -> bool {
        self.unit_ideal
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Storage layout used for the kernel and every plan derived from it.
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn with_layout(mut self, layout: Layout) -> Self {
        self.cost = CostMatrix(self.cost.with_layout(layout));
        self.ideal = IdealPlan(self.ideal.with_layout(layout));
        self.layout = layout;
        self
    }

    /// Same instance with a different marginal-relaxation constant.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Domain("ProblemInstance::with_gamma"));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn kernel(&self) -> Result<Kernel> {
        build_kernel(&self.cost, &self.ideal, self.gamma0, &self.pattern)
    }

    /// Back to plain data (dense cost and ideal plan, zeros on the pattern).
    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            m: self.rows(),
            n: self.cols(),
            u_tilde: self.marginals.u_tilde.clone(),
            v_tilde: self.marginals.v_tilde.clone(),
            cost: self.cost.to_dense(),
            zero_pattern: self.pattern.forbidden().to_vec(),
            ideal_plan: (!self.unit_ideal).then(|| self.ideal.to_dense()),
            gamma0: self.gamma0,
            gamma: self.gamma,
        }
    }
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Checks every invariant of `raw` and, if all hold, returns the instance.
///
/// The storage layout is chosen with [`Layout::DEFAULT_DENSE_THRESHOLD`].
pub fn validate_instance(raw: &RawInstance) -> Result<ProblemInstance, InvalidInstance> {
    validate_instance_with(raw, Layout::DEFAULT_DENSE_THRESHOLD)
}

/// As [`validate_instance`], with an explicit dense-storage threshold.
pub fn validate_instance_with(
    raw: &RawInstance,
    dense_threshold: f64,
) -> Result<ProblemInstance, InvalidInstance> {
    let (m, n) = (raw.m, raw.n);
    let mut issues = Vec::new();

    if raw.u_tilde.len() != m {
        issues.push(ValidationIssue::DimensionMismatch {
            field: "u_tilde",
            expected: m,
            found: raw.u_tilde.len(),
        });
    }
    if raw.v_tilde.len() != n {
        issues.push(ValidationIssue::DimensionMismatch {
            field: "v_tilde",
            expected: n,
            found: raw.v_tilde.len(),
        });
    }
    let cost_ok = raw.cost.dim() == (m, n);
    if !cost_ok {
        issues.push(ValidationIssue::DimensionMismatch {
            field: "cost",
            expected: m * n,
            found: raw.cost.len(),
        });
    }
    let ideal_ok = match &raw.ideal_plan {
        Some(t) if t.dim() != (m, n) => {
            issues.push(ValidationIssue::DimensionMismatch {
                field: "ideal_plan",
                expected: m * n,
                found: t.len(),
            });
            false
        }
        _ => true,
    };

    for (side, values) in [(Side::Source, &raw.u_tilde), (Side::Target, &raw.v_tilde)] {
        for (index, &value) in values.iter().enumerate() {
            if !positive_finite(value) {
                issues.push(ValidationIssue::NonpositiveMarginal { side, index, value });
            }
        }
    }
    for (name, value) in [("gamma0", raw.gamma0), ("gamma", raw.gamma)] {
        if !positive_finite(value) {
            issues.push(ValidationIssue::NonpositiveConstant { name, value });
        }
    }

    let pattern = match ZeroPattern::new(m, n, raw.zero_pattern.iter().copied()) {
        Ok(p) => Some(p),
        Err(InvalidInstance(found)) => {
            issues.extend(found);
            None
        }
    };

    if let Some(pattern) = &pattern {
        for i in 0..m {
            for j in 0..n {
                if pattern.is_forbidden(i, j) {
                    continue;
                }
                if cost_ok && !raw.cost[[i, j]].is_finite() {
                    issues.push(ValidationIssue::NonfiniteCost { i, j });
                }
                if let (true, Some(t)) = (ideal_ok, &raw.ideal_plan) {
                    let value = t[[i, j]];
                    if !positive_finite(value) {
                        issues.push(ValidationIssue::NonpositiveIdealEntry { i, j, value });
                    }
                }
            }
        }
    }

    if !issues.is_empty() {
        return Err(InvalidInstance(issues));
    }
    let pattern = pattern.expect("pattern issues were reported above");
    let layout = Layout::for_pattern(&pattern, dense_threshold);
    let support = pattern.support();
    let cost = CostMatrix(MaskedMatrix::from_fn(support.clone(), layout, |i, j| {
        raw.cost[[i, j]]
    }));
    let (ideal, unit_ideal) = match &raw.ideal_plan {
        Some(t) => {
            let ideal = MaskedMatrix::from_fn(support, layout, |i, j| t[[i, j]]);
            let unit = ideal.entries().all(|(_, _, x)| x == 1.0);
            (IdealPlan(ideal), unit)
        }
        None => (
            IdealPlan(MaskedMatrix::from_fn(support, layout, |_, _| 1.0)),
            true,
        ),
    };

    Ok(ProblemInstance {
        marginals: Marginals {
            u_tilde: raw.u_tilde.clone(),
            v_tilde: raw.v_tilde.clone(),
        },
        cost,
        pattern,
        ideal,
        unit_ideal,
        gamma0: raw.gamma0,
        gamma: raw.gamma,
        layout,
    })
}

/// `k_ij = t~_ij * exp(-c_ij / gamma0)` on the allowed entries.
///
/// An allowed entry that underflows (below the smallest normal double) is an
/// error: a silent extra zero would change the effective pattern.
pub fn build_kernel(
    cost: &CostMatrix,
    ideal: &IdealPlan,
    gamma0: f64,
    pattern: &ZeroPattern,
) -> Result<Kernel> {
    if !positive_finite(gamma0) {
        return Err(Error::Domain("build_kernel"));
    }
    if !cost.same_support(ideal)
        || cost.rows() != pattern.rows()
        || cost.cols() != pattern.cols()
        || cost.nnz() != pattern.rows() * pattern.cols() - pattern.len()
    {
        return Err(Error::PatternMismatch);
    }
    let k = cost.map(|i, j, c| ideal.get(i, j) * (-c / gamma0).exp());
    for (i, j, x) in k.entries() {
        if x < f64::MIN_POSITIVE {
            return Err(Error::KernelUnderflow { i, j });
        }
        if !x.is_finite() {
            return Err(Error::Domain("build_kernel: kernel entry overflows"));
        }
    }
    Ok(Kernel(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn raw_2x2() -> RawInstance {
        RawInstance {
            m: 2,
            n: 2,
            u_tilde: vec![1.0, 2.0],
            v_tilde: vec![1.0, 2.0],
            cost: array![[0.5, 0.2], [0.1, 0.0]],
            zero_pattern: vec![(1, 1)],
            ideal_plan: None,
            gamma0: 1.0,
            gamma: 1.0,
        }
    }

    #[test]
    fn accepts_the_two_by_two_example() {
        let inst = validate_instance(&raw_2x2()).unwrap();
        assert_eq!(inst.pattern().len(), 1);
        assert!(inst.has_unit_ideal());
    }

    #[test]
    fn rejects_fully_forbidden_row() {
        let mut raw = raw_2x2();
        raw.zero_pattern = vec![(0, 0), (0, 1)];
        let err = validate_instance(&raw).unwrap_err();
        assert_eq!(err.0, vec![ValidationIssue::ZeroRowInPattern(0)]);
    }

    #[test]
    fn rejects_zero_marginal() {
        let mut raw = raw_2x2();
        raw.u_tilde[1] = 0.0;
        let err = validate_instance(&raw).unwrap_err();
        assert!(matches!(
            err.0[..],
            [ValidationIssue::NonpositiveMarginal {
                side: Side::Source,
                index: 1,
                ..
            }]
        ));
    }

    #[test]
    fn collects_all_violations() {
        let mut raw = raw_2x2();
        raw.v_tilde = vec![1.0];
        raw.gamma = -1.0;
        raw.ideal_plan = Some(array![[1.0, -2.0], [1.0, 0.0]]);
        let err = validate_instance(&raw).unwrap_err();
        assert!(err.0.contains(&ValidationIssue::DimensionMismatch {
            field: "v_tilde",
            expected: 2,
            found: 1
        }));
        assert!(err.0.contains(&ValidationIssue::NonpositiveConstant {
            name: "gamma",
            value: -1.0
        }));
        // (1, 1) is forbidden, so its zero ideal entry is fine.
        assert!(err.0.contains(&ValidationIssue::NonpositiveIdealEntry {
            i: 0,
            j: 1,
            value: -2.0
        }));
        assert_eq!(err.0.len(), 3);
    }

    #[test]
    fn kernel_entries() {
        let mut raw = raw_2x2();
        raw.cost = array![[0.0, 1.99], [1.0, 7.0]];
        raw.gamma0 = 1.99;
        let inst = validate_instance(&raw).unwrap();
        let k = inst.kernel().unwrap();
        assert_eq!(k.get(0, 0), 1.0);
        assert_eq!(k.get(1, 1), 0.0);
        // exp(-1) = 0.36787944117144233...
        assert!((k.get(0, 1) - 0.367_879_441_171_442_33).abs() < 1e-16);
    }

    #[test]
    fn kernel_underflow_is_an_error() {
        let mut raw = raw_2x2();
        raw.cost[[1, 0]] = 1.0e4;
        raw.gamma0 = 1.0;
        let inst = validate_instance(&raw).unwrap();
        assert!(matches!(
            inst.kernel(),
            Err(Error::KernelUnderflow { i: 1, j: 0 })
        ));
    }

    #[test]
    fn raw_round_trip() {
        let inst = validate_instance(&raw_2x2()).unwrap();
        assert_eq!(validate_instance(&inst.to_raw()).unwrap(), inst);
    }
}
