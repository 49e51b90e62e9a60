//! Second-order unconstrained minimization with cubic regularization.
//!
//! The crate provides a cubic-regularization solver with a known Hessian
//! Lipschitz constant (`cr`), an adaptive variant with a ratio test (`arc`),
//! and a practical adaptive solver with Cauchy-point safeguarding
//! (`arc-practical`). Subproblems on negatively curved Hessians are solved
//! through an unconstrained convex reformulation of the cubic model, using
//! either an accelerated gradient method with backtracking and restart
//! (`nag`) or a Barzilai-Borwein gradient method (`bb`).
//!
//! Solvers, subsolvers and test problems are all looked up by name through
//! registries so that the benchmark harness can select them at runtime.

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod lanczos;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod problems;
pub mod solver;
pub mod subsolver;

pub use error::{Error, Result};
pub use lanczos::{min_eig_estimate, EigenEstimate, LanczosOptions};
pub use model::{ModelMode, RegularizedModel};
pub use operators::{apply_hessian, estimate_norm_bound, EvalCounters, SymmetricOperator};
pub use problems::{make_problem, Problem};
pub use solver::{SolveReport, SolveStatus, Solver, SolverRegistry};
pub use subsolver::{SubproblemResult, SubproblemSolver, SubsolverRegistry, SubsolverStatus};
