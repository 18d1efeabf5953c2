mod common;

use constrained_ot::divergence::{kl_matrix, regularization_identity_residual};
use constrained_ot::io::{read_instance, read_plan, write_instance, write_plan, PlanFormat};
use constrained_ot::prelude::*;
use constrained_ot::projections::{
    alternate, bregman_divergence, project_columns, project_rows, AugmentedPoint,
};
use constrained_ot::scenarios::{generate_ev_instance, generate_random_instance, EvScenarioConfig};
use constrained_ot::solvers::{Alg1Iteration, ScalingIteration};
use ndarray::Array2;
use proptest::prelude::*;

use common::{instance, max_rel_diff};

fn small_instance() -> impl Strategy<Value = ProblemInstance> {
    (1usize..6, 1usize..6, 0.0..0.4f64, any::<u64>())
        .prop_filter_map("pattern must cover", |(m, n, d, seed)| {
            generate_random_instance(m, n, d, seed).ok()
        })
}

/// Every way of splitting `total` integer units over `slots` slots.
fn compositions(total: u32, slots: usize) -> Vec<Vec<u32>> {
    if slots == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, slots - 1)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// Exhaustive search over integer plans on the allowed pairs.
fn integer_plan_exists(u: &[u32], v: &[u32], z: &ZeroPattern) -> bool {
    let allowed: Vec<Vec<usize>> = (0..u.len())
        .map(|i| (0..v.len()).filter(|&j| !z.is_forbidden(i, j)).collect())
        .collect();
    fn go(i: usize, u: &[u32], allowed: &[Vec<usize>], left: &mut Vec<i64>) -> bool {
        if i == u.len() {
            return left.iter().all(|&x| x == 0);
        }
        for split in compositions(u[i], allowed[i].len()) {
            for (k, &j) in allowed[i].iter().enumerate() {
                left[j] -= split[k] as i64;
            }
            let ok = left.iter().all(|&x| x >= 0) && go(i + 1, u, allowed, left);
            for (k, &j) in allowed[i].iter().enumerate() {
                left[j] += split[k] as i64;
            }
            if ok {
                return true;
            }
        }
        false
    }
    let mut left: Vec<i64> = v.iter().map(|&x| x as i64).collect();
    go(0, u, &allowed, &mut left)
}

fn balanced_integer_3x3() -> impl Strategy<Value = (Vec<u32>, Vec<u32>, Vec<(usize, usize)>)> {
    (
        prop::collection::vec(1u32..=3, 3),
        prop::collection::vec(1u32..=3, 3),
        prop::sample::subsequence((0..9).collect::<Vec<usize>>(), 0..=4),
    )
        .prop_filter("balanced", |(u, v, _)| {
            u.iter().sum::<u32>() == v.iter().sum::<u32>()
        })
        .prop_map(|(u, v, cells)| (u, v, cells.into_iter().map(|c| (c / 3, c % 3)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_positive_off_the_pattern_and_zero_on_it(inst in small_instance()) {
        let k = inst.kernel().unwrap();
        for i in 0..inst.rows() {
            for j in 0..inst.cols() {
                if inst.pattern().is_forbidden(i, j) {
                    prop_assert_eq!(k.get(i, j), 0.0);
                } else {
                    prop_assert!(k.get(i, j) > 0.0);
                }
            }
        }
    }

    #[test]
    fn kernel_decreases_with_cost(inst in small_instance(), bump in 1e-3..1.0f64) {
        let mut raw = inst.to_raw();
        let (i, j) = inst.support().coords(0);
        let before = inst.kernel().unwrap().get(i, j);
        raw.cost[(i, j)] += bump;
        let after = validate_instance(&raw).unwrap().kernel().unwrap().get(i, j);
        prop_assert!(after < before);
    }

    #[test]
    fn feasibility_matches_enumeration((u, v, cells) in balanced_integer_3x3()) {
        let Ok(z) = ZeroPattern::new(3, 3, cells.iter().copied()) else {
            return Ok(());
        };
        let inst = instance(
            u.iter().map(|&x| x as f64).collect(),
            v.iter().map(|&x| x as f64).collect(),
            Array2::zeros((3, 3)),
            cells,
            1.0,
            1.0,
        );
        let expected = integer_plan_exists(&u, &v, &z);
        let got = check_feasibility_exact(&inst).unwrap() == Feasibility::Feasible;
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_only_on_the_diagonal(t in 0.0..50.0f64, r in 1e-9..50.0f64) {
        let k = kl_scalar(t, r).unwrap();
        prop_assert!(k >= 0.0);
        prop_assert_eq!(k == 0.0, t == r);
        prop_assert_eq!(kl_scalar(r, r).unwrap(), 0.0);
    }

    #[test]
    fn identity_holds(c in -2.0..5.0f64, t in 0.0..5.0f64, tt in 0.01..5.0f64, g0 in 0.1..5.0f64) {
        prop_assert!(regularization_identity_residual(c, t, tt, g0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn kl_matrix_is_additive(inst in small_instance(), split in 0.0..1.0f64) {
        let k = inst.kernel().unwrap();
        let t = k.map(|i, j, x| x * (1.0 + 0.3 * ((i * 7 + j * 3) % 5) as f64));
        let cut = (split * k.nnz() as f64) as usize;
        let whole = kl_matrix(&t, &k).unwrap();
        let part = |keep: &dyn Fn(usize) -> bool| {
            let s = k.support().clone();
            let a = t.map(|i, j, x| if keep(s.entry(i, j).unwrap()) { x } else { k.get(i, j) });
            kl_matrix(&a, &k).unwrap()
        };
        let sum = part(&|e| e < cut) + part(&|e| e >= cut);
        prop_assert!((whole - sum).abs() <= 1e-12 * (1.0 + whole));
    }

    #[test]
    fn objective_is_strictly_convex_on_segments(inst in small_instance(), seed in 0.0..1.0f64) {
        // Two plans with row sums u~: the kernel row-normalized, and a product plan.
        let k = inst.kernel().unwrap();
        let rows = k.row_sums();
        let c1: Vec<f64> = inst.u_tilde().iter().zip(&rows).map(|(u, s)| u / s).collect();
        let t0 = TransportPlan::from_matrix(k.scaled(&c1, &vec![1.0; inst.cols()])).unwrap();
        let w: Vec<f64> = (0..inst.cols()).map(|j| 1.0 + seed * j as f64).collect();
        let t1 = TransportPlan::from_matrix(k.map(|_, j, x| x * w[j])).unwrap();
        let rows1 = t1.row_sums();
        let c1b: Vec<f64> = inst.u_tilde().iter().zip(&rows1).map(|(u, s)| u / s).collect();
        let t1 = TransportPlan::from_matrix(t1.scaled(&c1b, &vec![1.0; inst.cols()])).unwrap();
        prop_assume!(t0.sum_abs_diff(&t1) > 1e-6);
        let mid = TransportPlan::from_matrix(t0.map(|i, j, x| 0.5 * (x + t1.get(i, j)))).unwrap();
        let f = |t: &TransportPlan| objective(&inst, t).unwrap().total;
        prop_assert!(f(&mid) < 0.5 * (f(&t0) + f(&t1)));
    }

    #[test]
    fn projections_hit_their_constraint_sets(inst in small_instance()) {
        let x = AugmentedPoint::start(&inst).unwrap();
        let r = project_rows(&x, inst.u_tilde()).unwrap();
        for (s, u) in r.plan().row_sums().iter().zip(inst.u_tilde()) {
            prop_assert!(((s - u) / u).abs() <= 1e-15 * 4.0);
        }
        let c = project_columns(&r, inst.gamma()).unwrap();
        for (s, v) in c.plan().col_sums().iter().zip(c.v()) {
            prop_assert!(((s - v) / v).abs() <= 1e-14);
        }
    }

    #[test]
    fn projections_are_idempotent(inst in small_instance()) {
        let x = AugmentedPoint::start(&inst).unwrap();
        let r = project_rows(&x, inst.u_tilde()).unwrap();
        let rr = project_rows(&r, inst.u_tilde()).unwrap();
        prop_assert!(max_rel_diff(rr.plan(), r.plan()) <= 4.0 * f64::EPSILON);
        let c = project_columns(&x, inst.gamma()).unwrap();
        let cc = project_columns(&c, inst.gamma()).unwrap();
        prop_assert!(max_rel_diff(cc.plan(), c.plan()) <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn projection_is_the_closest_point_in_the_row_set(inst in small_instance(), w in 0.05..0.95f64) {
        // Any other point with the same row sums is at least as far from x.
        let x = AugmentedPoint::start(&inst).unwrap();
        let p = project_rows(&x, inst.u_tilde()).unwrap();
        let rows = x.plan().row_sums();
        let other = TransportPlan::from_matrix(x.plan().map(|_, j, t| {
            let bias = if j % 2 == 0 { 1.0 + w } else { 1.0 - w };
            t * bias
        }))
        .unwrap();
        let ors = other.row_sums();
        let other = TransportPlan::from_matrix(other.map(|i, _, t| t * inst.u_tilde()[i] / ors[i])).unwrap();
        let q = AugmentedPoint::new(other, x.v().to_vec()).unwrap();
        let dp = bregman_divergence(&p, &x, inst.gamma()).unwrap();
        let dq = bregman_divergence(&q, &x, inst.gamma()).unwrap();
        prop_assert!(dp <= dq + 1e-12, "{} > {} (rows {:?})", dp, dq, rows);
    }

    #[test]
    fn alternating_projections_reach_the_same_limit(inst in small_instance()) {
        let r = solve_alg1(&inst, &SolverConfig::default()).unwrap();
        prop_assert!(r.converged());
        let points = alternate(&inst, r.iterations).unwrap();
        let last = points.last().unwrap();
        prop_assert!(max_rel_diff(last.plan(), &r.plan) <= 1e-10);
    }

    #[test]
    fn generated_instances_validate(m in 2usize..40, n in 2usize..12, seed in any::<u64>()) {
        let ev = generate_ev_instance(&EvScenarioConfig { m, n, seed, ..Default::default() }).unwrap();
        prop_assert!(validate_instance(&ev.to_raw()).is_ok());
        prop_assert_eq!(ev.pattern().len(), (m / 2) * (n / 2));
        if let Ok(r) = generate_random_instance(m, n, 0.2, seed) {
            prop_assert!(validate_instance(&r.to_raw()).is_ok());
        }
    }

    #[test]
    fn instance_files_round_trip_bit_exactly(
        inst in small_instance(),
        scale in prop::sample::select(vec![1e-300, 1e-12, 1.0, 3.3e7, 1e300]),
    ) {
        let mut raw = inst.to_raw();
        raw.u_tilde.iter_mut().for_each(|x| *x *= scale);
        raw.v_tilde.iter_mut().for_each(|x| *x *= scale);
        raw.cost.mapv_inplace(|c| c * 0.1 + 1.0 / 3.0);
        let inst = validate_instance(&raw).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        let back = read_instance(&buf[..]).unwrap();
        prop_assert_eq!(&back, &inst);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(back.u_tilde()), bits(inst.u_tilde()));
    }

    #[test]
    fn plan_files_round_trip_bit_exactly(inst in small_instance(), dense in any::<bool>()) {
        let mut it = Alg1Iteration::new(&inst).unwrap();
        for _ in 0..3 {
            it.step().unwrap();
        }
        let plan = &it.state().t;
        let v = &it.state().v;
        let format = if dense { PlanFormat::Dense } else { PlanFormat::Sparse };
        let mut buf = Vec::new();
        write_plan(plan, v, None, format, &mut buf).unwrap();
        let back = read_plan(&buf[..]).unwrap();
        prop_assert_eq!(&back.to_transport_plan(&inst).unwrap(), plan);
        prop_assert_eq!(&back.v_star, v);
    }
}

#[test]
fn kl_equality_cases() {
    for x in [1e-300, 1e-5, 1.0, 7.25, 1e200] {
        assert_eq!(kl_scalar(x, x).unwrap(), 0.0);
    }
    assert_eq!(kl_scalar(0.0, 2.0).unwrap(), 2.0);
}

#[test]
fn objective_at_kernel() {
    // K = 1 on a 2x2: columns sum to 2.
    let matching = instance(
        vec![2.0; 2],
        vec![2.0; 2],
        Array2::zeros((2, 2)),
        vec![],
        1.0,
        1.5,
    );
    let k = TransportPlan::from_matrix(matching.kernel().unwrap().into_inner()).unwrap();
    assert_eq!(objective(&matching, &k).unwrap().total, 0.0);
    let off = instance(
        vec![2.0; 2],
        vec![1.0, 3.0],
        Array2::zeros((2, 2)),
        vec![],
        1.0,
        1.5,
    );
    let value = objective(&off, &k).unwrap();
    assert_eq!(value.kl_plan, 0.0);
    let expected = 1.5 * (kl_scalar(2.0, 1.0).unwrap() + kl_scalar(2.0, 3.0).unwrap());
    assert!((value.total - expected).abs() < 1e-15);
}

#[test]
fn ev_mean_is_one_half() {
    let inst = generate_ev_instance(&EvScenarioConfig {
        m: 100_000,
        n: 2,
        seed: 77,
        ..Default::default()
    })
    .unwrap();
    let mean: f64 = inst.u_tilde().iter().sum::<f64>() / 1e5;
    assert!((mean - 0.5).abs() < 0.01);
}
