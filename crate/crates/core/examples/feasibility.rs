//! Exact feasibility of a zero pattern by max-flow.

use constrained_ot::prelude::*;
use ndarray::Array2;

fn check(u: &[f64], v: &[f64], z: &[(usize, usize)]) -> Result<()> {
    let inst = validate_instance(&RawInstance {
        m: u.len(),
        n: v.len(),
        u_tilde: u.to_vec(),
        v_tilde: v.to_vec(),
        cost: Array2::zeros((u.len(), v.len())),
        zero_pattern: z.to_vec(),
        ideal_plan: None,
        gamma0: 1.0,
        gamma: 1.0,
    })?;
    match check_feasibility_exact(&inst) {
        Ok(f) => println!("u = {u:?}, v = {v:?}, Z = {z:?}: {f:?}"),
        Err(e) => println!("u = {u:?}, v = {v:?}, Z = {z:?}: {e}"),
    }
    Ok(())
}

fn main() -> Result<()> {
    check(&[1.0, 2.0], &[1.0, 2.0], &[(1, 1)])?;
    check(&[2.0, 1.0], &[1.0, 2.0], &[(1, 1)])?;
    check(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[(0, 1), (1, 0)])?;
    check(&[1.0, 1.0], &[1.0, 1.5], &[])?;
    Ok(())
}
