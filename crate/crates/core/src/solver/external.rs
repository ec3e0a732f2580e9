//! Running a third-party MILP engine through a shell command.
//!
//! The program is written as CPLEX LP to `{lp}`; the command must leave a
//! solution file at `{sol}` with lines `name value`, an optional
//! `=obj= value` line, and `#` comments. An empty solution file (or one
//! containing `=infeas=`) reports infeasibility. Variables absent from the
//! file take the value 0.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};

use web_time::Instant;

use super::{Backend, SolveError, SolveParams, Solution, Status};
use crate::milp::{write_lp_string, MilpProgram};

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSolution {
    pub values: HashMap<String, f64>,
    pub objective: Option<f64>,
    pub infeasible: bool,
}

pub fn parse_solution_file(text: &str) -> Result<ParsedSolution, SolveError> {
    let mut out = ParsedSolution { values: HashMap::new(), objective: None, infeasible: false };
    let mut any = false;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        any = true;
        if line == "=infeas=" {
            out.infeasible = true;
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(SolveError::UnparseableSolution(format!("line {}: expected `name value`", no + 1)));
        };
        let value: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| SolveError::UnparseableSolution(format!("line {}: bad number {value:?}", no + 1)))?;
        if name == "=obj=" {
            out.objective = Some(value);
        } else if out.values.insert(name.to_string(), value).is_some() {
            return Err(SolveError::UnparseableSolution(format!("line {}: {name} given twice", no + 1)));
        }
    }
    if !any {
        out.infeasible = true;
    }
    Ok(out)
}

/// Renders `solution` in the solution-file format read by [`parse_solution_file`].
pub fn write_solution_file(program: &MilpProgram, solution: &Solution) -> String {
    let Some(x) = &solution.assignment else {
        return "=infeas=\n".to_string();
    };
    let mut out = format!("# {:?}\n", solution.status);
    if let Some(obj) = solution.objective_value {
        out += &format!("=obj= {obj}\n");
    }
    for (var, v) in program.vars.iter().zip(x) {
        out += &format!("{} {v}\n", var.name);
    }
    out
}

/// Shell command template with `{lp}` and `{sol}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalBackend {
    pub command: String,
}

impl ExternalBackend {
    pub fn new(command: impl Into<String>) -> Self {
        ExternalBackend { command: command.into() }
    }
}

static RUN: AtomicU64 = AtomicU64::new(0);

fn scratch_dir() -> Result<PathBuf, SolveError> {
    let dir = std::env::temp_dir().join(format!(
        "cpmilp-{}-{}",
        std::process::id(),
        RUN.fetch_add(1, Ordering::Relaxed)
    ));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

impl Backend for ExternalBackend {
    fn solve(&self, program: &MilpProgram, _params: &SolveParams) -> Result<Solution, SolveError> {
        let start = Instant::now();
        let dir = scratch_dir()?;
        let result = run(&self.command, program, &dir);
        let _ = fs::remove_dir_all(&dir);
        let parsed = result?;
        if parsed.infeasible {
            return Ok(Solution {
                status: Status::Infeasible,
                assignment: None,
                objective_value: None,
                nodes: 0,
                wall_time: start.elapsed(),
                underdetermined: false,
            });
        }
        let mut values = vec![0.0; program.vars.len()];
        for (name, &v) in &parsed.values {
            let id = program
                .find_var(name)
                .ok_or_else(|| SolveError::UnparseableSolution(format!("unknown variable {name}")))?;
            values[id.0] = v;
        }
        program.check(&values, 1e-6).map_err(|v| SolveError::InvalidSolution(format!("{v:?}")))?;
        for (x, var) in values.iter_mut().zip(&program.vars) {
            if var.kind != crate::milp::MilpVarKind::Continuous {
                *x = x.round();
            }
        }
        let objective_value = program.objective.as_ref().map(|o| o.value(&values));
        Ok(Solution {
            status: Status::Optimal,
            assignment: Some(values),
            objective_value,
            nodes: 0,
            wall_time: start.elapsed(),
            underdetermined: false,
        })
    }
}

fn run(template: &str, program: &MilpProgram, dir: &std::path::Path) -> Result<ParsedSolution, SolveError> {
    let lp = dir.join("model.lp");
    let sol = dir.join("model.sol");
    fs::write(&lp, write_lp_string(program))?;
    let cmd = template.replace("{lp}", &lp.to_string_lossy()).replace("{sol}", &sol.to_string_lossy());
    let output = Command::new("sh")
        .arg("-c")
        .arg(&cmd)
        .output()
        .map_err(|e| SolveError::ProcessFailed(format!("{cmd}: {e}")))?;
    if !output.status.success() {
        return Err(SolveError::ProcessFailed(format!(
            "{cmd}: {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = fs::read_to_string(&sol).map_err(|e| SolveError::ProcessFailed(format!("no solution file: {e}")))?;
    parse_solution_file(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_values_objective_and_comments() {
        let s = parse_solution_file("# header\nx 1\ny 2.5 # trailing\n=obj= 3.5\n").unwrap();
        assert_eq!(s.values["x"], 1.0);
        assert_eq!(s.values["y"], 2.5);
        assert_eq!(s.objective, Some(3.5));
        assert!(!s.infeasible);
        assert!(parse_solution_file("").unwrap().infeasible);
        assert!(parse_solution_file("=infeas=\n").unwrap().infeasible);
    }

    #[test]
    fn written_solutions_parse_back() {
        let mut p = MilpProgram::new();
        let x = p.add_var("x", crate::milp::MilpVarKind::Continuous, 0.0, 1.0, crate::milp::VarOrigin::Free).unwrap();
        p.set_objective(crate::milp::Sense::Maximize, vec![(1.0, x)], 0.0).unwrap();
        let sol = crate::solver::solve(&p, &SolveParams::default()).unwrap();
        let back = parse_solution_file(&write_solution_file(&p, &sol)).unwrap();
        assert_eq!(back.values["x"], 1.0);
        assert_eq!(back.objective, Some(1.0));
        let none = Solution { assignment: None, objective_value: None, status: Status::Infeasible, ..sol };
        assert!(parse_solution_file(&write_solution_file(&p, &none)).unwrap().infeasible);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(parse_solution_file("x"), Err(SolveError::UnparseableSolution(_))));
        assert!(matches!(parse_solution_file("x one"), Err(SolveError::UnparseableSolution(_))));
        assert!(matches!(parse_solution_file("x 1\nx 2"), Err(SolveError::UnparseableSolution(_))));
    }
}
