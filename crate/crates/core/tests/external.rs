use cpmilp::milp::{MilpProgram, MilpVarKind, Relation, Sense, VarOrigin};
use cpmilp::solver::{Backend, ExternalBackend, SolveError, SolveParams, Status};

fn one_var() -> MilpProgram {
    let mut p = MilpProgram::new();
    let x = p.add_var("x", MilpVarKind::Integer, 0.0, 10.0, VarOrigin::Free).unwrap();
    p.add_constraint("c", vec![(1.0, x)], Relation::Le, 7.0, "").unwrap();
    p.set_objective(Sense::Maximize, vec![(1.0, x)], 0.0).unwrap();
    p
}

fn run(script: &str) -> Result<cpmilp::solver::Solution, SolveError> {
    ExternalBackend::new(script).solve(&one_var(), &SolveParams::default())
}

#[test]
fn stub_solution_is_parsed_and_validated() {
    let s = run("test -s '{lp}' && printf 'x 7\\n=obj= 7\\n' > '{sol}'").unwrap();
    assert_eq!(s.status, Status::Optimal);
    assert_eq!(s.assignment, Some(vec![7.0]));
    assert_eq!(s.objective_value, Some(7.0));
}

#[test]
fn near_integral_values_are_rounded() {
    let s = run("echo 'x 6.9999999' > '{sol}'").unwrap();
    assert_eq!(s.assignment, Some(vec![7.0]));
}

#[test]
fn infeasible_point_is_rejected() {
    assert!(matches!(run("echo 'x 9' > '{sol}'"), Err(SolveError::InvalidSolution(_))));
    assert!(matches!(run("echo 'x 2.5' > '{sol}'"), Err(SolveError::InvalidSolution(_))));
}

#[test]
fn garbage_is_unparseable() {
    assert!(matches!(run("echo 'this is not a solution' > '{sol}'"), Err(SolveError::UnparseableSolution(_))));
    assert!(matches!(run("echo 'y 1' > '{sol}'"), Err(SolveError::UnparseableSolution(_))));
}

#[test]
fn empty_file_means_infeasible() {
    let s = run(": > '{sol}'").unwrap();
    assert_eq!(s.status, Status::Infeasible);
    assert!(s.assignment.is_none());
}

#[test]
fn failing_command_is_reported() {
    assert!(matches!(run("exit 3"), Err(SolveError::ProcessFailed(_))));
    assert!(matches!(run("true"), Err(SolveError::ProcessFailed(_))));
}
