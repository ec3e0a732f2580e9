//! Solving MILP programs: an embedded exact search and an external-process backend.

mod external;
mod search;

pub use external::{parse_solution_file, write_solution_file, ExternalBackend, ParsedSolution};

use std::time::Duration;

use thiserror::Error;
use web_time::Instant;

use crate::milp::MilpProgram;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    FirstFeasible,
    ProveOptimal,
    /// Collect every feasible assignment, stopping after the given number.
    EnumerateAll(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchOrder {
    /// Integer variables by decreasing row count, then index.
    #[default]
    MostConstrainedFirst,
    DeclarationOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueOrder {
    /// Binaries try 1 then 0; general integers take their lowest value first.
    #[default]
    OneFirst,
    ZeroFirst,
    /// Lowest value first for every integer variable.
    LowFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub mode: SearchMode,
    pub branch_order: BranchOrder,
    pub value_order: ValueOrder,
    /// Tighten bounds at internal nodes. When off, nodes are only tested for infeasibility.
    pub propagate: bool,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            time_limit: None,
            mode: SearchMode::ProveOptimal,
            branch_order: BranchOrder::default(),
            value_order: ValueOrder::default(),
            propagate: true,
        }
    }
}

impl SolveParams {
    pub fn with_time_limit(mut self, seconds: f64) -> Self {
        self.time_limit = Some(seconds);
        self
    }

    pub fn with_mode(mut self, mode: SearchMode) -> Self {
        self.mode = mode;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    EnumerationComplete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    /// Values indexed by `MilpVarId`; `None` when no feasible point was found.
    pub assignment: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    pub nodes: u64,
    pub wall_time: Duration,
    /// Some continuous variable was not determined by the integers and had to be chosen.
    pub underdetermined: bool,
}

impl Solution {
    pub fn value(&self, v: crate::milp::MilpVarId) -> Option<f64> {
        self.assignment.as_ref().map(|a| a[v.0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub solutions: Vec<Vec<f64>>,
    /// More than `cap` solutions exist.
    pub cap_exceeded: bool,
    pub timed_out: bool,
    pub nodes: u64,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("variable {0} has an infinite bound")]
    UnboundedVariable(String),
    #[error("solver process failed: {0}")]
    ProcessFailed(String),
    #[error("cannot parse solution file: {0}")]
    UnparseableSolution(String),
    #[error("solver returned an invalid solution: {0}")]
    InvalidSolution(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait Backend {
    fn solve(&self, program: &MilpProgram, params: &SolveParams) -> Result<Solution, SolveError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmbeddedBackend;

impl Backend for EmbeddedBackend {
    fn solve(&self, program: &MilpProgram, params: &SolveParams) -> Result<Solution, SolveError> {
        solve(program, params)
    }
}

fn objective_of(program: &MilpProgram, x: &[f64]) -> Option<f64> {
    program.objective.as_ref().map(|o| o.value(x))
}

pub fn solve(program: &MilpProgram, params: &SolveParams) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let out = search::Search::new(program, params)?.run();
    let assignment = out.best.map(|(_, x)| x);
    let status = match (params.mode, &assignment) {
        _ if out.timed_out => Status::TimeLimit,
        (SearchMode::EnumerateAll(_), _) => Status::EnumerationComplete,
        (_, None) => Status::Infeasible,
        (SearchMode::FirstFeasible, Some(_)) => Status::Feasible,
        (SearchMode::ProveOptimal, Some(_)) => Status::Optimal,
    };
    Ok(Solution {
        status,
        objective_value: assignment.as_deref().and_then(|x| objective_of(program, x)),
        assignment,
        nodes: out.nodes,
        wall_time: start.elapsed(),
        underdetermined: out.underdetermined,
    })
}

/// Every feasible assignment, up to `cap`. The objective is ignored.
pub fn enumerate_all(program: &MilpProgram, cap: usize, params: &SolveParams) -> Result<Enumeration, SolveError> {
    let params = SolveParams { mode: SearchMode::EnumerateAll(cap), ..params.clone() };
    let out = search::Search::new(program, &params)?.run();
    Ok(Enumeration { solutions: out.solutions, cap_exceeded: out.cap_exceeded, timed_out: out.timed_out, nodes: out.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{MilpVarKind, Relation, Sense, VarOrigin};

    fn knapsack() -> MilpProgram {
        let mut p = MilpProgram::new();
        let w = [3.0, 4.0, 5.0, 6.0];
        let v = [4.0, 5.0, 6.0, 8.0];
        let xs: Vec<_> = (0..4).map(|i| p.add_binary(format!("x{i}"), VarOrigin::Free).unwrap()).collect();
        p.add_constraint("cap", xs.iter().zip(w).map(|(&x, w)| (w, x)).collect(), Relation::Le, 10.0, "").unwrap();
        p.set_objective(Sense::Maximize, xs.iter().zip(v).map(|(&x, v)| (v, x)).collect(), 0.0).unwrap();
        p
    }

    #[test]
    fn solves_small_knapsack() {
        let s = solve(&knapsack(), &SolveParams::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.objective_value, Some(13.0));
    }

    #[test]
    fn propagation_does_not_change_the_optimum() {
        let p = knapsack();
        let off = SolveParams { propagate: false, ..SolveParams::default() };
        assert_eq!(solve(&p, &off).unwrap().objective_value, Some(13.0));
        let all_on = enumerate_all(&p, 100, &SolveParams::default()).unwrap();
        let all_off = enumerate_all(&p, 100, &off).unwrap();
        assert_eq!(all_on.solutions.len(), all_off.solutions.len());
        assert!(!all_on.cap_exceeded);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut p = MilpProgram::new();
        let x = p.add_var("x", MilpVarKind::Integer, 0.0, 3.0, VarOrigin::Free).unwrap();
        p.add_constraint("r", vec![(2.0, x)], Relation::Eq, 3.0, "").unwrap();
        assert_eq!(solve(&p, &SolveParams::default()).unwrap().status, Status::Infeasible);

        let mut p = MilpProgram::new();
        p.add_var("y", MilpVarKind::Integer, 0.0, f64::INFINITY, VarOrigin::Free).unwrap();
        assert!(matches!(solve(&p, &SolveParams::default()), Err(SolveError::UnboundedVariable(_))));
    }

    #[test]
    fn continuous_vars_follow_integers() {
        let mut p = MilpProgram::new();
        let x = p.add_var("x", MilpVarKind::Integer, -3.0, 3.0, VarOrigin::Free).unwrap();
        let z = p.add_var("z", MilpVarKind::Continuous, -10.0, 10.0, VarOrigin::Free).unwrap();
        p.add_constraint("r", vec![(3.0, z), (-1.0, x)], Relation::Eq, 0.0, "").unwrap();
        p.set_objective(Sense::Minimize, vec![(1.0, z)], 0.0).unwrap();
        let s = solve(&p, &SolveParams::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective_value.unwrap() + 1.0).abs() < 1e-9);
        assert!(!s.underdetermined);
    }

    #[test]
    fn enumeration_cap() {
        let mut p = MilpProgram::new();
        for i in 0..3 {
            p.add_binary(format!("b{i}"), VarOrigin::Free).unwrap();
        }
        let e = enumerate_all(&p, 5, &SolveParams::default()).unwrap();
        assert_eq!(e.solutions.len(), 5);
        assert!(e.cap_exceeded);
        let e = enumerate_all(&p, 8, &SolveParams::default()).unwrap();
        assert_eq!(e.solutions.len(), 8);
        assert!(!e.cap_exceeded);
    }

    #[test]
    fn zero_time_limit() {
        let p = knapsack();
        let s = solve(&p, &SolveParams::default().with_time_limit(0.0)).unwrap();
        assert!(matches!(s.status, Status::TimeLimit | Status::Optimal));
    }
}
