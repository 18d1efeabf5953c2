use crate::divergence::kl_unchecked;
use crate::error::{Error, Result};
use crate::matrix::MaskedMatrix;
use crate::problem::{ProblemInstance, TransportPlan};

/// Grid resolution per free coordinate for the initial search.
pub const ORACLE_GRID_POINTS: usize = 64;

const MAX_CELLS: usize = 12;
const MAX_FREE: usize = 4;
const MAX_SWEEPS: usize = 10_000;
const SWEEP_TOL: f64 = 1e-14;

struct Problem<'a> {
    k: Vec<f64>,
    col: Vec<usize>,
    row_entries: Vec<Vec<usize>>,
    u: &'a [f64],
    v_tilde: &'a [f64],
    gamma: f64,
}

impl Problem<'_> {
    fn objective(&self, t: &[f64]) -> f64 {
        let mut v = vec![0.0; self.v_tilde.len()];
        let mut total = 0.0;
        for (e, &x) in t.iter().enumerate() {
            total += kl_unchecked(x, self.k[e]);
            v[self.col[e]] += x;
        }
        for (vj, vt) in v.iter().zip(self.v_tilde) {
            total += self.gamma * kl_unchecked(*vj, *vt);
        }
        total
    }

    /// Derivative of the objective when mass moves from entry `last` to
    /// entry `e` in the same row.
    fn slope(&self, t: &[f64], e: usize, last: usize) -> f64 {
        let mut v = vec![0.0; self.v_tilde.len()];
        for (e, &x) in t.iter().enumerate() {
            v[self.col[e]] += x;
        }
        let (j, jl) = (self.col[e], self.col[last]);
        (t[e] / self.k[e]).ln() - (t[last] / self.k[last]).ln()
            + self.gamma * ((v[j] / self.v_tilde[j]).ln() - (v[jl] / self.v_tilde[jl]).ln())
    }
}

/// Brute-force minimizer of the relaxed objective over plans with row sums
/// `u~`, for instances with at most 12 cells and at most 4 free coordinates
/// (allowed entries minus rows).
///
/// The last allowed entry of each row is eliminated. A grid of
/// [`ORACLE_GRID_POINTS`] values per free coordinate picks the starting
/// point; coordinate sweeps then solve each one-dimensional problem by
/// bisection on the sign of its derivative, which is strictly increasing.
/// Function-value comparisons cannot resolve the minimizer below about
/// `sqrt(eps)`; the derivative can.
///
/// This shares no code with the scaling solvers.
pub fn oracle_minimize(inst: &ProblemInstance) -> Result<TransportPlan> {
    let (m, n) = (inst.rows(), inst.cols());
    let kernel = inst.kernel()?;
    let support = kernel.support().clone();
    let free = support.len() - m;
    if m * n > MAX_CELLS || free > MAX_FREE {
        return Err(Error::TooLarge(format!(
            "{m}x{n} with {free} free coordinates; the limits are {MAX_CELLS} cells and {MAX_FREE} free coordinates"
        )));
    }
    let problem = Problem {
        k: kernel.support_values(),
        col: (0..support.len()).map(|e| support.col_of(e)).collect(),
        row_entries: (0..m).map(|i| support.row_range(i).collect()).collect(),
        u: inst.u_tilde(),
        v_tilde: inst.v_tilde(),
        gamma: inst.gamma(),
    };
    // (free entry, eliminated entry, row)
    let coords: Vec<(usize, usize, usize)> = problem
        .row_entries
        .iter()
        .enumerate()
        .flat_map(|(i, es)| {
            let last = *es.last().expect("pattern covers every row");
            es[..es.len() - 1].iter().map(move |&e| (e, last, i))
        })
        .collect();

    let mut t = grid_start(&problem, &coords);
    for _ in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for &(e, last, i) in &coords {
            let before = t[e];
            line_minimize(&problem, &mut t, e, last);
            change = change.max((t[e] - before).abs() / problem.u[i]);
        }
        if change < SWEEP_TOL {
            break;
        }
    }
    let plan = MaskedMatrix::from_entries(support, inst.layout(), &t);
    Ok(TransportPlan(plan))
}

fn fill_rows(problem: &Problem, coords: &[(usize, usize, usize)], t: &mut [f64]) -> bool {
    for (i, es) in problem.row_entries.iter().enumerate() {
        let last = *es.last().unwrap();
        let used: f64 = coords.iter().filter(|c| c.2 == i).map(|c| t[c.0]).sum();
        t[last] = problem.u[i] - used;
        if t[last].is_nan() || t[last] <= 0.0 {
            return false;
        }
    }
    true
}

fn grid_start(problem: &Problem, coords: &[(usize, usize, usize)]) -> Vec<f64> {
    let nnz = problem.k.len();
    let g = ORACLE_GRID_POINTS;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut index = vec![0usize; coords.len()];
    let mut t = vec![0.0; nnz];
    loop {
        for (c, &(e, _, i)) in coords.iter().enumerate() {
            t[e] = problem.u[i] * (index[c] + 1) as f64 / (g + 1) as f64;
        }
        if fill_rows(problem, coords, &mut t) {
            let f = problem.objective(&t);
            if best.as_ref().is_none_or(|(b, _)| f < *b) {
                best = Some((f, t.clone()));
            }
        }
        let mut c = 0;
        loop {
            if c == index.len() {
                let (_, t) = best.expect("the grid has an interior point");
                return t;
            }
            index[c] += 1;
            if index[c] < g {
                break;
            }
            index[c] = 0;
            c += 1;
        }
    }
}

fn line_minimize(problem: &Problem, t: &mut [f64], e: usize, last: usize) {
    let room = t[e] + t[last];
    let (mut lo, mut hi) = (0.0, room);
    let mut trial = t.to_vec();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        trial[e] = mid;
        trial[last] = room - mid;
        if problem.slope(&trial, e, last) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    t[e] = x;
    t[last] = room - x;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::objective;
    use crate::problem::{validate_instance, RawInstance};
    use ndarray::Array2;

    fn one_by_two() -> ProblemInstance {
        // gamma0 = 1 with cost -ln k gives k = (0.8, 0.2).
        validate_instance(&RawInstance {
            m: 1,
            n: 2,
            u_tilde: vec![1.0],
            v_tilde: vec![0.5, 0.5],
            cost: Array2::from_shape_vec((1, 2), vec![-(0.8_f64).ln(), -(0.2_f64).ln()]).unwrap(),
            zero_pattern: vec![],
            ideal_plan: None,
            gamma0: 1.0,
            gamma: 1.0,
        })
        .unwrap()
    }

    /// Golden-section search on the one free coordinate, written out
    /// directly from the objective.
    fn golden_section_1x2() -> f64 {
        let f = |x: f64| {
            let (a, b) = (x, 1.0 - x);
            a * (a / 0.8).ln() - a + 0.8 + b * (b / 0.2).ln() - b + 0.2 + a * (a / 0.5).ln() - a
                + 0.5
                + b * (b / 0.5).ln()
                - b
                + 0.5
        };
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
        while hi - lo > 1e-12 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn one_free_coordinate() {
        let inst = one_by_two();
        let plan = oracle_minimize(&inst).unwrap();
        // Stationarity: ln(x / 0.8) - ln((1 - x) / 0.2) + ln(x / 0.5) - ln((1 - x) / 0.5) = 0
        // gives x^2 / (1 - x)^2 = 4, so x = 2/3.
        assert!((plan.get(0, 0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((plan.get(0, 0) - golden_section_1x2()).abs() < 1e-7);
        assert!((plan.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_already_optimal() {
        let inst = validate_instance(&RawInstance {
            m: 2,
            n: 2,
            u_tilde: vec![1.0, 1.0],
            v_tilde: vec![1.0, 1.0],
            cost: Array2::zeros((2, 2)),
            zero_pattern: vec![],
            ideal_plan: Some(Array2::from_elem((2, 2), 0.5)),
            gamma0: 1.0,
            gamma: 2.0,
        })
        .unwrap();
        let plan = oracle_minimize(&inst).unwrap();
        for (_, _, x) in plan.entries() {
            assert!((x - 0.5).abs() < 1e-12);
        }
        assert!(objective(&inst, &plan).unwrap().total < 1e-20);
    }

    #[test]
    fn rejects_large_instances() {
        let inst = validate_instance(&RawInstance {
            m: 2,
            n: 4,
            u_tilde: vec![1.0; 2],
            v_tilde: vec![0.5; 4],
            cost: Array2::zeros((2, 4)),
            zero_pattern: vec![],
            ideal_plan: None,
            gamma0: 1.0,
            gamma: 1.0,
        })
        .unwrap();
        assert!(matches!(oracle_minimize(&inst), Err(Error::TooLarge(_))));
    }
}
