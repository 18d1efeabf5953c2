//! Solve a small instance with a forbidden route and print the plan.

use constrained_ot::prelude::*;
use ndarray::array;

fn main() -> Result<()> {
    // Three warehouses, three shops; warehouse 0 cannot serve shop 2.
    let inst = validate_instance(&RawInstance {
        m: 3,
        n: 3,
        u_tilde: vec![0.5, 1.0, 1.5],
        v_tilde: vec![1.0, 1.2, 0.8],
        cost: array![[0.2, 0.6, 0.0], [0.5, 0.1, 0.4], [0.9, 0.3, 0.2]],
        zero_pattern: vec![(0, 2)],
        ideal_plan: None,
        gamma0: 0.5,
        gamma: 2.0,
    })?;

    let report = solve(&inst, &SolverConfig::default())?;
    println!(
        "{} after {} iterations",
        report.termination, report.iterations
    );
    println!("{:.6}", report.plan.to_dense());
    println!("v* = {:.6?}", report.v_star);

    let value = objective(&inst, &report.plan)?;
    println!(
        "objective = {:.9} (plan part {:.9}, marginal part {:.9})",
        value.total, value.kl_plan, value.kl_marginal
    );
    Ok(())
}
