use crate::error::{Error, Result};
use crate::pattern::Support;
use crate::problem::{Kernel, ProblemInstance, TransportPlan};
use crate::sum::{pairwise_sum, pairwise_sum_by};

use super::OptimalityReport;

/// Row and column scalings fitted to a plan, `t_ij ~ d1_i k_ij d2_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecoveredScalings {
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub components: usize,
}

/// Fits `ln t_ij - ln k_ij = a_i + b_j` in least squares over the allowed
/// entries, then fixes the per-component gauge `(a + s, b - s)` so that the
/// column equation `d2 = (v~ / sum_i d1_i k_ij)^(g / (1 + g))` holds in the
/// least-squares sense on each component. The row equation is invariant
/// under the gauge and cannot fix it.
///
/// The gauge moves by `(1 + g)` times the mean column misfit, so for large
/// `g` and a plan far from optimal the scalings can leave the range of `f64`.
pub fn recover_scalings(
    inst: &ProblemInstance,
    kernel: &Kernel,
    plan: &TransportPlan,
) -> Result<RecoveredScalings> {
    let fit = fit_log_scalings(inst, kernel, plan)?;
    Ok(RecoveredScalings {
        d1: fit.a.iter().map(|x| x.exp()).collect(),
        d2: fit.b.iter().map(|x| x.exp()).collect(),
        components: fit.components,
    })
}

struct LogFit {
    a: Vec<f64>,
    b: Vec<f64>,
    log_k: Vec<f64>,
    components: usize,
}

/// `ln sum_e exp(x_e)` over `len` terms.
fn log_sum_exp(len: usize, x: impl Fn(usize) -> f64) -> f64 {
    let top = (0..len).map(&x).fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + pairwise_sum_by(len, |k| (x(k) - top).exp()).ln()
}

/// `ln sum_i exp(a_i) k_ij` for every column.
fn log_col_sums(support: &Support, log_k: &[f64], a: &[f64]) -> Vec<f64> {
    (0..support.cols())
        .map(|j| {
            let es = support.col_entries(j);
            log_sum_exp(es.len(), |k| a[support.row_of(es[k])] + log_k[es[k]])
        })
        .collect()
}

/// `ln sum_j k_ij exp(b_j)` for every row.
fn log_row_sums(support: &Support, log_k: &[f64], b: &[f64]) -> Vec<f64> {
    (0..support.rows())
        .map(|i| {
            let r = support.row_range(i);
            log_sum_exp(r.len(), |k| {
                log_k[r.start + k] + b[support.col_of(r.start + k)]
            })
        })
        .collect()
}

fn fit_log_scalings(
    inst: &ProblemInstance,
    kernel: &Kernel,
    plan: &TransportPlan,
) -> Result<LogFit> {
    if !plan.same_support(kernel) {
        return Err(Error::PatternMismatch);
    }
    if plan.min_support().is_nan() || plan.min_support() <= 0.0 {
        return Err(Error::Domain(
            "recover_scalings: plan must be positive off the pattern",
        ));
    }
    let support = kernel.support();
    let (m, n) = (support.rows(), support.cols());
    let log_k: Vec<f64> = (0..support.len()).map(|e| kernel.value(e).ln()).collect();
    let x: Vec<f64> = (0..support.len())
        .map(|e| plan.value(e).ln() - log_k[e])
        .collect();
    let (mut a, mut b) = least_squares_two_way(support, &x);

    let gamma = inst.gamma();
    let p = gamma / (1.0 + gamma);
    let log_s1 = log_col_sums(support, &log_k, &a);
    let r: Vec<f64> = (0..n)
        .map(|j| b[j] - p * (inst.v_tilde()[j].ln() - log_s1[j]))
        .collect();

    let (components, row_comp, col_comp) = support.components();
    let mut sum = vec![0.0; components];
    let mut count = vec![0usize; components];
    for j in 0..n {
        sum[col_comp[j]] += r[j];
        count[col_comp[j]] += 1;
    }
    let shift: Vec<f64> = (0..components)
        .map(|c| (1.0 + gamma) * sum[c] / count[c] as f64)
        .collect();
    for i in 0..m {
        a[i] += shift[row_comp[i]];
    }
    for j in 0..n {
        b[j] -= shift[col_comp[j]];
    }
    Ok(LogFit {
        a,
        b,
        log_k,
        components,
    })
}

/// Least-squares `a_i + b_j ~ x_e` over the support graph by conjugate
/// gradients on the normal equations, with a degree (Jacobi) preconditioner.
/// The system is singular along `(1, -1)` on each component; CG started at
/// zero stays in the range and converges to one solution.
fn least_squares_two_way(support: &Support, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (support.rows(), support.cols());
    let apply = |z: &[f64]| -> Vec<f64> {
        let (za, zb) = z.split_at(m);
        let mut out = vec![0.0; m + n];
        for i in 0..m {
            let r = support.row_range(i);
            out[i] = pairwise_sum_by(r.len(), |k| za[i] + zb[support.col_of(r.start + k)]);
        }
        for j in 0..n {
            let es = support.col_entries(j);
            out[m + j] = pairwise_sum_by(es.len(), |k| za[support.row_of(es[k])] + zb[j]);
        }
        out
    };
    let rhs: Vec<f64> = (0..m)
        .map(|i| pairwise_sum(&x[support.row_range(i)]))
        .chain((0..n).map(|j| {
            let es = support.col_entries(j);
            pairwise_sum_by(es.len(), |k| x[es[k]])
        }))
        .collect();
    let degree: Vec<f64> = (0..m)
        .map(|i| support.row_range(i).len() as f64)
        .chain((0..n).map(|j| support.col_entries(j).len() as f64))
        .collect();
    let dot = |u: &[f64], v: &[f64]| pairwise_sum_by(u.len(), |k| u[k] * v[k]);

    let mut z = vec![0.0; m + n];
    let mut r = rhs.clone();
    let mut s: Vec<f64> = r.iter().zip(&degree).map(|(r, d)| r / d).collect();
    let mut p = s.clone();
    let mut rs = dot(&r, &s);
    let stop = 1e-30 * dot(&rhs, &rhs).max(f64::MIN_POSITIVE);
    for _ in 0..10 * (m + n) + 100 {
        if dot(&r, &r) <= stop {
            break;
        }
        let q = apply(&p);
        let pq = dot(&p, &q);
        if pq.is_nan() || pq <= 0.0 {
            break;
        }
        let alpha = rs / pq;
        for k in 0..m + n {
            z[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        s = r.iter().zip(&degree).map(|(r, d)| r / d).collect();
        let rs_next = dot(&r, &s);
        let beta = rs_next / rs;
        rs = rs_next;
        for k in 0..m + n {
            p[k] = s[k] + beta * p[k];
        }
    }
    let b = z.split_off(m);
    (z, b)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `|exp(x - y) - 1|`: the relative gap between `exp(x)` and `exp(y)`.
fn log_rel(x: f64, y: f64) -> f64 {
    (x - y).exp_m1().abs()
}

/// Largest value, with NaN counted as infinite.
fn worst(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |acc, x| {
        if x.is_nan() {
            f64::INFINITY
        } else {
            acc.max(x)
        }
    })
}

/// Checks the fixed-point characterization of the relaxed optimum:
/// positive scalings with `t = d1 k d2`,
/// `d1_i = u~_i / sum_j k_ij d2_j` and
/// `d2_j = (v~_j / sum_i d1_i k_ij)^(g / (1 + g))`.
///
/// Only the allowed entries are constrained. A plan with a non-positive
/// allowed entry cannot satisfy the conditions and gets an infinite
/// `fixed_point_residual`.
pub fn check_kkt(
    inst: &ProblemInstance,
    plan: &TransportPlan,
    v_star: &[f64],
) -> Result<OptimalityReport> {
    let kernel = inst.kernel()?;
    if !plan.same_support(&kernel) || v_star.len() != inst.cols() {
        return Err(Error::PatternMismatch);
    }
    let u = inst.u_tilde();
    let row_sums = plan.row_sums();
    let col_sums = plan.col_sums();
    let row_residual = worst(row_sums.iter().zip(u).map(|(s, u)| rel(*s, *u)));
    let column_residual = worst(col_sums.iter().zip(v_star).map(|(s, v)| rel(*s, *v)));
    let source_mass = pairwise_sum(u);
    let balance_residual = rel(pairwise_sum(v_star), source_mass);
    let min_support_entry = plan.min_support();
    let min_v_star = v_star.iter().copied().fold(f64::INFINITY, f64::min);
    let positivity_ok = min_support_entry > 0.0;
    let (components, _, _) = kernel.support().components();

    let fixed_point_residual = if positivity_ok {
        let fit = fit_log_scalings(inst, &kernel, plan)?;
        let support = kernel.support();
        let p = inst.gamma() / (1.0 + inst.gamma());
        let product = worst((0..plan.nnz()).map(|e| {
            let (i, j) = support.coords(e);
            log_rel(fit.a[i] + fit.log_k[e] + fit.b[j], plan.value(e).ln())
        }));
        let rows = worst(
            log_row_sums(support, &fit.log_k, &fit.b)
                .iter()
                .enumerate()
                .map(|(i, s)| log_rel(u[i].ln() - s, fit.a[i])),
        );
        let cols = worst(
            log_col_sums(support, &fit.log_k, &fit.a)
                .iter()
                .enumerate()
                .map(|(j, s)| log_rel(p * (inst.v_tilde()[j].ln() - s), fit.b[j])),
        );
        product.max(rows).max(cols)
    } else {
        f64::INFINITY
    };

    Ok(OptimalityReport {
        fixed_point_residual,
        row_residual,
        column_residual,
        balance_residual,
        min_support_entry,
        min_v_star,
        positivity_ok,
        components,
    })
}
