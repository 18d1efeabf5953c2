//! Executable optimality conditions and an independent brute-force oracle.

mod kkt;
mod oracle;

pub use kkt::{check_kkt, recover_scalings, RecoveredScalings};
pub use oracle::{oracle_minimize, ORACLE_GRID_POINTS};

use crate::error::Result;
use crate::pattern::ZeroPattern;
use crate::problem::{ProblemInstance, TransportPlan};
use crate::solvers::SolveReport;

/// Residuals of a candidate optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    /// Largest relative violation of `t = d1 k d2` and of the two
    /// fixed-point equations for `d1` and `d2`, with the scalings recovered
    /// from the plan.
    pub fixed_point_residual: f64,
    /// `max_i |sum_j t_ij - u~_i| / u~_i`.
    pub row_residual: f64,
    /// `max_j |sum_i t_ij - v*_j| / v*_j`.
    pub column_residual: f64,
    /// `|sum v* - sum u~| / sum u~`.
    pub balance_residual: f64,
    /// Smallest allowed entry of the plan.
    pub min_support_entry: f64,
    /// Smallest entry of `v*`.
    pub min_v_star: f64,
    pub positivity_ok: bool,
    /// Connected components of the support graph; scalings are fitted per component.
    pub components: usize,
}

impl OptimalityReport {
    /// Human-readable list of every check that fails at tolerance `tol`.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |name: &str, value: f64| {
            if value.is_nan() || value >= tol {
                out.push(format!("{name} = {value:e} is not below {tol:e}"));
            }
        };
        check("fixed_point_residual", self.fixed_point_residual);
        check("row_residual", self.row_residual);
        check("column_residual", self.column_residual);
        check("balance_residual", self.balance_residual);
        if !self.positivity_ok {
            out.push(format!(
                "positivity_ok = false (min_support_entry = {:e})",
                self.min_support_entry
            ));
        }
        if self.min_v_star.is_nan() || self.min_v_star <= 0.0 {
            out.push(format!(
                "min_v_star = {:e} is not positive",
                self.min_v_star
            ));
        }
        out
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.violations(tol).is_empty()
    }
}

/// True iff every allowed entry of `plan` is strictly positive and every
/// forbidden pair of `pattern` holds exactly zero.
///
/// `plan` may live on a larger support than `pattern`'s complement (for
/// instance a plan read from a dense file), in which case forbidden entries
/// are checked explicitly.
pub fn check_positivity(plan: &TransportPlan, pattern: &ZeroPattern) -> bool {
    if plan.rows() != pattern.rows() || plan.cols() != pattern.cols() {
        return false;
    }
    (0..pattern.rows()).all(|i| {
        (0..pattern.cols()).all(|j| {
            let x = plan.get(i, j);
            if pattern.is_forbidden(i, j) {
                x == 0.0
            } else {
                x > 0.0
            }
        })
    })
}

/// The limit properties of a converged relaxed solve: rows match `u~`,
/// `v*` carries the same total mass as `u~`, `v* > 0`, and the plan is
/// strictly positive off the pattern. Use [`OptimalityReport::violations`]
/// to list failures.
pub fn check_limit_properties(
    report: &SolveReport,
    inst: &ProblemInstance,
) -> Result<OptimalityReport> {
    let mut out = check_kkt(inst, &report.plan, &report.v_star)?;
    out.positivity_ok = out.positivity_ok && check_positivity(&report.plan, inst.pattern());
    Ok(out)
}
