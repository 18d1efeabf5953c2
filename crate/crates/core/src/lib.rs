//! Entropy-regularized optimal transport with prior zero-constraints.
//!
//! Some source/target pairs may be forbidden a priori (the zero pattern).
//! The plan is found by minimizing
//!
//! ```text
//! KL(T | K) + gamma * KL(v_T | v~)    subject to  T 1 = u~,  t_ij = 0 on the pattern
//! ```
//!
//! where `K` is the Gibbs kernel `t~_ij exp(-c_ij / gamma0)` and `v_T` the
//! column sums of `T`. Relaxing the column marginal makes the problem
//! solvable for every pattern that leaves each row and column an allowed
//! entry, and for unbalanced masses.
//!
//! ## Modules
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`problem`] | instance types, validation, kernel construction |
//! | [`feasibility`] | exact feasibility of the hard marginal constraints (max-flow) |
//! | [`divergence`] | scalar/matrix KL and the relaxed objective |
//! | [`solvers`] | the relaxed scaling iteration (two forms), Sinkhorn-Knopp, Chizat |
//! | [`projections`] | the two KL projections and the alternating driver |
//! | [`verify`] | fixed-point certificate, limit checks, brute-force oracle |
//! | [`scenarios`] | seeded EV-charging and random instance generators |
//! | [`io`] | JSON instance/plan files |
//! | [`cli`] | the `cot` command-line front end |
//!
//! ## Quick start
//!
//! ```
//! use constrained_ot::prelude::*;
//! use ndarray::array;
//!
//! let raw = RawInstance {
//!     m: 2,
//!     n: 2,
//!     u_tilde: vec![1.0, 2.0],
//!     v_tilde: vec![1.0, 2.0],
//!     cost: array![[0.3, 0.1], [0.2, 0.0]],
//!     zero_pattern: vec![(1, 1)],
//!     ideal_plan: None,
//!     gamma0: 1.0,
//!     gamma: 1.0,
//! };
//! let inst = validate_instance(&raw).unwrap();
//! let report = solve(&inst, &SolverConfig::default()).unwrap();
//! assert!(report.converged());
//! assert_eq!(report.plan.get(1, 1), 0.0);
//! ```

pub mod cli;
pub mod divergence;
pub mod error;
pub mod feasibility;
pub mod io;
pub mod matrix;
pub mod pattern;
pub mod problem;
pub mod projections;
pub mod scenarios;
pub mod solvers;
pub mod sum;
pub mod verify;

pub use error::{Error, InvalidInstance, Result, ValidationIssue};

pub mod prelude {
    pub use crate::divergence::{kl_matrix, kl_scalar, objective, ObjectiveValue};
    pub use crate::error::{Error, Result};
    pub use crate::feasibility::{check_feasibility_exact, Feasibility};
    pub use crate::matrix::{Layout, MaskedMatrix};
    pub use crate::pattern::ZeroPattern;
    pub use crate::problem::{
        build_kernel, validate_instance, Kernel, ProblemInstance, RawInstance, TransportPlan,
    };
    pub use crate::solvers::{
        solve, solve_alg1, solve_alg2, solve_chizat, solve_sk, Algorithm, SolveReport,
        SolverConfig, Termination,
    };
    pub use crate::verify::{
        check_kkt, check_limit_properties, check_positivity, OptimalityReport,
    };
}
