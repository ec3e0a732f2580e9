//! Linear-program intermediate representation.

mod lp;

pub use lp::{format_number, parse_lp, write_lp, write_lp_string, LpParseError};

use std::collections::HashSet;

use thiserror::Error;

pub use crate::model::{Relation, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MilpVarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MilpVarKind {
    Binary,
    Integer,
    Continuous,
}

/// What created a MILP variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarOrigin {
    /// Channelled copy of a model variable (by model index).
    Model(usize),
    /// `b_ij`: model variable `var` takes `value`.
    DomainIndicator { var: usize, value: i64 },
    /// `b_tau`: constraint `constraint` is assigned its tuple number `tuple`.
    TupleIndicator { constraint: usize, tuple: usize },
    /// Per-value occurrence flag of a reified Gcc.
    OccurrenceFlag { constraint: usize, value: i64, upper: bool },
    /// Auxiliary of an absolute-value encoding (`abs`, `dif`, `difp`, `difn`, `b`).
    AbsAux { constraint: usize, role: &'static str },
    /// Added directly through the builder API.
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpVar {
    pub name: String,
    pub kind: MilpVarKind,
    pub lb: f64,
    pub ub: f64,
    pub origin: VarOrigin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(f64, MilpVarId)>,
    pub relation: Relation,
    pub rhs: f64,
    /// Origin label: encoding kind and model constraint.
    pub tag: String,
}

impl LinearConstraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(c, v)| c * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpObjective {
    pub sense: Sense,
    pub terms: Vec<(f64, MilpVarId)>,
    pub constant: f64,
}

impl MilpObjective {
    pub fn value(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(c, v)| c * values[v.0]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IrError {
    #[error("variable {0:?} appears twice in one constraint")]
    DuplicateTermVar(MilpVarId),
    #[error("bad bounds [{lb}, {ub}] for {name}")]
    BadBounds { name: String, lb: f64, ub: f64 },
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("unknown MILP variable {0:?}")]
    UnknownVar(MilpVarId),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpProgram {
    pub vars: Vec<MilpVar>,
    pub constraints: Vec<LinearConstraint>,
    pub objective: Option<MilpObjective>,
    /// Normalization notes, e.g. dropped zero coefficients.
    pub warnings: Vec<String>,
    var_names: HashSet<String>,
    row_names: HashSet<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProgramStats {
    pub binaries: usize,
    pub integers: usize,
    pub continuous: usize,
    pub le: usize,
    pub ge: usize,
    pub eq: usize,
    pub nonzeros: usize,
}

impl ProgramStats {
    pub fn vars(&self) -> usize {
        self.binaries + self.integers + self.continuous
    }

    pub fn rows(&self) -> usize {
        self.le + self.ge + self.eq
    }
}

/// A constraint or bound that an assignment breaks.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Bound { var: String, value: f64 },
    Integrality { var: String, value: f64 },
    Row { name: String, activity: f64, relation: Relation, rhs: f64 },
}

impl MilpProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: MilpVarKind,
        lb: f64,
        ub: f64,
        origin: VarOrigin,
    ) -> Result<MilpVarId, IrError> {
        let name = name.into();
        let bad = lb.is_nan()
            || ub.is_nan()
            || lb > ub
            || lb == f64::INFINITY
            || ub == f64::NEG_INFINITY
            || (kind == MilpVarKind::Binary && (lb < 0.0 || ub > 1.0))
            || (kind != MilpVarKind::Continuous
                && ((lb.is_finite() && lb.fract() != 0.0) || (ub.is_finite() && ub.fract() != 0.0)));
        if bad {
            return Err(IrError::BadBounds { name, lb, ub });
        }
        if !self.var_names.insert(name.clone()) {
            return Err(IrError::DuplicateName(name));
        }
        self.vars.push(MilpVar { name, kind, lb, ub, origin });
        Ok(MilpVarId(self.vars.len() - 1))
    }

    pub fn add_binary(&mut self, name: impl Into<String>, origin: VarOrigin) -> Result<MilpVarId, IrError> {
        self.add_var(name, MilpVarKind::Binary, 0.0, 1.0, origin)
    }

    /// Intersects the bounds of `var` with `[lb, ub]`.
    pub fn tighten_bounds(&mut self, var: MilpVarId, lb: f64, ub: f64) -> Result<(), IrError> {
        let v = self.vars.get_mut(var.0).ok_or(IrError::UnknownVar(var))?;
        let (nlb, nub) = (v.lb.max(lb), v.ub.min(ub));
        if nlb > nub {
            return Err(IrError::BadBounds { name: v.name.clone(), lb: nlb, ub: nub });
        }
        v.lb = nlb;
        v.ub = nub;
        Ok(())
    }

    /// Appends a row. Zero coefficients are dropped with a warning.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(f64, MilpVarId)>,
        relation: Relation,
        rhs: f64,
        tag: impl Into<String>,
    ) -> Result<usize, IrError> {
        let name = name.into();
        if !rhs.is_finite() {
            return Err(IrError::NonFinite(name));
        }
        let mut seen = HashSet::new();
        let mut kept = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            if v.0 >= self.vars.len() {
                return Err(IrError::UnknownVar(v));
            }
            if !seen.insert(v) {
                return Err(IrError::DuplicateTermVar(v));
            }
            if !c.is_finite() {
                return Err(IrError::NonFinite(name));
            }
            if c == 0.0 {
                self.warnings.push(format!("{name}: dropped zero coefficient on {}", self.vars[v.0].name));
                continue;
            }
            kept.push((c, v));
        }
        if !self.row_names.insert(name.clone()) {
            return Err(IrError::DuplicateName(name));
        }
        self.constraints.push(LinearConstraint { name, terms: kept, relation, rhs, tag: tag.into() });
        Ok(self.constraints.len() - 1)
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(f64, MilpVarId)>, constant: f64) -> Result<(), IrError> {
        let mut seen = HashSet::new();
        for &(_, v) in &terms {
            if v.0 >= self.vars.len() {
                return Err(IrError::UnknownVar(v));
            }
            if !seen.insert(v) {
                return Err(IrError::DuplicateTermVar(v));
            }
        }
        let terms = terms.into_iter().filter(|&(c, _)| c != 0.0).collect();
        self.objective = Some(MilpObjective { sense, terms, constant });
        Ok(())
    }

    pub fn var(&self, id: MilpVarId) -> &MilpVar {
        &self.vars[id.0]
    }

    pub fn find_var(&self, name: &str) -> Option<MilpVarId> {
        self.vars.iter().position(|v| v.name == name).map(MilpVarId)
    }

    pub fn stats(&self) -> ProgramStats {
        let mut s = ProgramStats::default();
        for v in &self.vars {
            match v.kind {
                MilpVarKind::Binary => s.binaries += 1,
                MilpVarKind::Integer => s.integers += 1,
                MilpVarKind::Continuous => s.continuous += 1,
            }
        }
        for c in &self.constraints {
            match c.relation {
                Relation::Le => s.le += 1,
                Relation::Ge => s.ge += 1,
                Relation::Eq => s.eq += 1,
            }
            s.nonzeros += c.terms.len();
        }
        s
    }

    /// Evaluates an assignment against bounds, integrality and every row.
    ///
    /// Row tolerance is `tol * max(1, |rhs|, sum |a_j x_j|)`.
    pub fn check(&self, values: &[f64], tol: f64) -> Result<(), Violation> {
        for (v, &x) in self.vars.iter().zip(values) {
            if !x.is_finite() || x < v.lb - tol || x > v.ub + tol {
                return Err(Violation::Bound { var: v.name.clone(), value: x });
            }
            if v.kind != MilpVarKind::Continuous && (x - x.round()).abs() > tol {
                return Err(Violation::Integrality { var: v.name.clone(), value: x });
            }
        }
        for c in &self.constraints {
            let activity = c.activity(values);
            let scale = c.terms.iter().map(|&(a, v)| (a * values[v.0]).abs()).sum::<f64>().max(c.rhs.abs()).max(1.0);
            if !c.relation.holds(activity, c.rhs, tol * scale) {
                return Err(Violation::Row { name: c.name.clone(), activity, relation: c.relation, rhs: c.rhs });
            }
        }
        Ok(())
    }
}
