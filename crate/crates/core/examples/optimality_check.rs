//! Certify a solve with the fixed-point conditions and compare it with the
//! brute-force minimizer.

use constrained_ot::prelude::*;
use constrained_ot::scenarios::generate_random_instance;
use constrained_ot::verify::{oracle_minimize, recover_scalings};

fn main() -> Result<()> {
    let inst = generate_random_instance(3, 3, 0.3, 8)?;
    println!("forbidden: {:?}", inst.pattern().forbidden());
    let report = solve_alg1(&inst, &SolverConfig::default())?;

    let kkt = check_kkt(&inst, &report.plan, &report.v_star)?;
    println!("{kkt:#?}");
    let fit = recover_scalings(&inst, &inst.kernel()?, &report.plan)?;
    println!("d1 = {:.6?}\nd2 = {:.6?}", fit.d1, fit.d2);

    let mut bumped = report.plan.clone().into_inner();
    bumped.set(0, bumped.value(0) * 1.01);
    let bumped = TransportPlan::from_matrix(bumped)?;
    let off = check_kkt(&inst, &bumped, &report.v_star)?;
    println!(
        "after +1% on one entry: residual {:.2e}",
        off.fixed_point_residual
    );

    let oracle = oracle_minimize(&inst)?;
    let gap = report
        .plan
        .entries()
        .zip(oracle.entries())
        .map(|(a, b)| (a.2 - b.2).abs())
        .fold(0.0, f64::max);
    println!(
        "oracle: objective {:.12} vs solver {:.12}, max entry gap {gap:.1e}",
        objective(&inst, &oracle)?.total,
        objective(&inst, &report.plan)?.total
    );
    Ok(())
}
