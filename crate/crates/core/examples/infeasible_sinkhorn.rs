//! Sinkhorn-Knopp cannot match both marginals when the pattern makes that
//! impossible; the relaxed iteration still converges.

use constrained_ot::prelude::*;
use constrained_ot::verify::check_limit_properties;
use ndarray::array;

fn main() -> Result<()> {
    let inst = validate_instance(&RawInstance {
        m: 2,
        n: 2,
        u_tilde: vec![1.0, 2.0],
        v_tilde: vec![1.0, 2.0],
        cost: array![[0.0, 0.0], [0.0, 0.0]],
        zero_pattern: vec![(1, 1)],
        ideal_plan: None,
        gamma0: 1.0,
        gamma: 1.0,
    })?;
    println!("exact feasibility: {:?}", check_feasibility_exact(&inst)?);

    let cfg = SolverConfig {
        max_iter: 5_000,
        ..SolverConfig::default()
    };
    let sk = solve_sk(&inst, &cfg)?;
    println!(
        "sinkhorn-knopp: {} after {} iterations",
        sk.termination, sk.iterations
    );
    for r in sk.trace.iter().rev().take(4).rev() {
        println!(
            "  iter {:>5}: row residual {:.3e}, column residual {:.3e}",
            r.iter, r.row_residual, r.col_residual
        );
    }

    let relaxed = solve_alg1(&inst, &cfg)?;
    println!(
        "relaxed: {} after {} iterations",
        relaxed.termination, relaxed.iterations
    );
    println!("{:.6}", relaxed.plan.to_dense());
    println!(
        "v* = {:.6?} (asked for {:?})",
        relaxed.v_star,
        inst.v_tilde()
    );
    let report = check_limit_properties(&relaxed, &inst)?;
    println!("limit checks at 1e-9: {:?}", report.violations(1e-9));
    Ok(())
}
