//! The relaxed iteration as alternating KL projections onto the row set and
//! the column set, with the divergence from the start at each step.

use constrained_ot::prelude::*;
use constrained_ot::projections::{
    alternate, bregman_divergence, finite_difference_gradient, AugmentedPoint,
};
use constrained_ot::scenarios::generate_random_instance;
use constrained_ot::solvers::{Alg1Iteration, ScalingIteration};

fn main() -> Result<()> {
    let inst = generate_random_instance(4, 5, 0.1, 3)?;
    let start = AugmentedPoint::start(&inst)?;
    let grad = finite_difference_gradient(&inst, &start, 1e-5)?;
    let g = grad.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    println!("|grad| at (K, v~): {g:.2e}");

    let points = alternate(&inst, 8)?;
    let mut alg1 = Alg1Iteration::new(&inst)?;
    for (l, p) in points.iter().enumerate().skip(1) {
        alg1.step().expect("finite iterate");
        let gap = p.plan().sum_abs_diff(&alg1.state().t);
        let d = bregman_divergence(p, &start, inst.gamma())?;
        println!("l = {l}: divergence from start {d:.9}, |projections - alg1| = {gap:.1e}");
    }
    Ok(())
}
