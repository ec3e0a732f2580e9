//! Compiles constraint-programming models into mixed-integer linear programs.
//!
//! A [`model::Model`] holds integer and numerical variables plus high-level
//! constraints. [`linearize::linearize_model`] turns it into a
//! [`milp::MilpProgram`], which can be solved by the embedded
//! branch-and-bound in [`solver`] or written as CPLEX LP for another engine.
//! [`oracle`] enumerates CP semantics directly and serves as ground truth.
//!
//! ```
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! use cpmilp::model::{AlldifferentMode, ConstraintSpec, Model, Sense};
//! use cpmilp::{linearize_model, solve, SolveParams, Status};
//!
//! let mut m = Model::new();
//! let x = m.add_int_var_named("x", 1..=3)?;
//! let y = m.add_int_var_named("y", 1..=3)?;
//! m.post(ConstraintSpec::Alldifferent { vars: vec![x, y], mode: AlldifferentMode::AdHocGcc })?;
//! let (_, r) = m.reify(ConstraintSpec::PositiveTable { vars: vec![x, y], tuples: vec![vec![1, 2]] })?;
//! m.set_objective(Sense::Maximize, vec![(1.0, x), (1.0, y), (5.0, r)])?;
//!
//! let lin = linearize_model(&m)?;
//! let sol = solve(&lin.program, &SolveParams::default())?;
//! assert_eq!(sol.status, Status::Optimal);
//! println!("{:?}", lin.project(sol.assignment.as_ref().unwrap()));
//! # Ok(())
//! # }
//! ```

pub mod bench;
pub mod linearize;
pub mod milp;
pub mod model;
pub mod modelfile;
pub mod oracle;
pub mod solver;

pub use linearize::{linearize_model, Linearized, LinearizeError};
pub use milp::{MilpProgram, MilpVarId};
pub use model::{ConstraintSpec, Model, VarId};
pub use solver::{solve, SolveParams, Solution, Status};
