//! User-level constraint model: variables, the constraint AST, reification
//! handles and the objective.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

static NEXT_MODEL_TAG: AtomicU64 = AtomicU64::new(1);

/// Handle to a model variable.
///
/// Handles compare and hash by index only; the owning model's tag is used to
/// reject handles coming from another model.
#[derive(Debug, Clone, Copy)]
pub struct VarId {
    index: usize,
    model: u64,
}

impl VarId {
    pub fn index(self) -> usize {
        self.index
    }
}

impl PartialEq for VarId {
    fn eq(&self, other: &Self) -> bool {
        self.index == other.index
    }
}
impl Eq for VarId {}
impl Hash for VarId {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.index.hash(state)
    }
}
impl PartialOrd for VarId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for VarId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.index.cmp(&other.index)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VarId#{}", self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId(pub usize);

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Explicit finite integer domain: sorted, deduplicated, non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntDomain(Vec<i64>);

impl IntDomain {
    pub fn new(values: impl IntoIterator<Item = i64>) -> Result<Self, ModelError> {
        let set: BTreeSet<i64> = values.into_iter().collect();
        if set.is_empty() {
            return Err(ModelError::EmptyDomain);
        }
        Ok(IntDomain(set.into_iter().collect()))
    }

    pub fn range(lo: i64, hi: i64) -> Result<Self, ModelError> {
        Self::new(lo..=hi)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: i64) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn position(&self, v: i64) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    pub fn min(&self) -> i64 {
        self.0[0]
    }

    pub fn max(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    /// True when every value is 0 or 1.
    pub fn is_boolean(&self) -> bool {
        self.0.iter().all(|&v| v == 0 || v == 1)
    }

    /// True when the domain is exactly `{0, 1}`.
    pub fn is_binary(&self) -> bool {
        self.0 == [0, 1]
    }

    /// True when the values form a contiguous integer range.
    pub fn is_contiguous(&self) -> bool {
        (self.max() - self.min()) as usize + 1 == self.0.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarKind {
    Int(IntDomain),
    Num { lb: f64, ub: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
}

impl Variable {
    pub fn domain(&self) -> Option<&IntDomain> {
        match &self.kind {
            VarKind::Int(d) => Some(d),
            VarKind::Num { .. } => None,
        }
    }

    pub fn is_int(&self) -> bool {
        matches!(self.kind, VarKind::Int(_))
    }

    pub fn bounds(&self) -> (f64, f64) {
        match &self.kind {
            VarKind::Int(d) => (d.min() as f64, d.max() as f64),
            VarKind::Num { lb, ub } => (*lb, *ub),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Relation::Le => lhs <= rhs + tol,
            Relation::Ge => lhs >= rhs - tol,
            Relation::Eq => (lhs - rhs).abs() <= tol,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlldifferentMode {
    /// Occurrence bounds `[0, 1]` on every value of the domain union.
    #[default]
    AdHocGcc,
    /// One binary negative table `{(v, v)}` per variable pair.
    NegativeBinaryTables,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GccSpec {
    pub vars: Vec<VarId>,
    pub values: Vec<i64>,
    pub lower: Vec<u32>,
    pub upper: Vec<u32>,
}

impl GccSpec {
    /// Occurrence count of `values[k]` in `assignment` must lie in `[lower[k], upper[k]]`.
    pub fn admits(&self, assignment: &[i64]) -> bool {
        self.values.iter().enumerate().all(|(k, &v)| {
            let count = assignment.iter().filter(|&&x| x == v).count() as u32;
            self.lower[k] <= count && count <= self.upper[k]
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSpec {
    PositiveTable { vars: Vec<VarId>, tuples: Vec<Vec<i64>> },
    NegativeTable { vars: Vec<VarId>, tuples: Vec<Vec<i64>> },
    /// `value = array[index - base]`.
    Element { index: VarId, value: VarId, array: Vec<i64>, base: i64 },
    Gcc(GccSpec),
    Alldifferent { vars: Vec<VarId>, mode: AlldifferentMode },
    /// `abs = |x - y|`.
    AbsDistance { x: VarId, y: VarId, abs: VarId },
    /// `n * mean = sum(vars)` and `dev = sum |x_i - mean|`.
    Deviation { vars: Vec<VarId>, mean: VarId, dev: VarId },
    /// `|x_i - x_j| >= gap` for every pair.
    InterDistance { vars: Vec<VarId>, gap: VarId },
    /// `z = x * y`.
    Product { x: VarId, y: VarId, z: VarId },
    /// `z = x ^ exponent`.
    Power { x: VarId, exponent: u32, z: VarId },
    Linear { terms: Vec<(f64, VarId)>, relation: Relation, rhs: f64 },
    /// Positive table restricted to 0/1 variables, used for logical operators.
    LogicalTable { vars: Vec<VarId>, tuples: Vec<Vec<i64>> },
}

impl ConstraintSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ConstraintSpec::PositiveTable { .. } => "table",
            ConstraintSpec::NegativeTable { .. } => "negative_table",
            ConstraintSpec::Element { .. } => "element",
            ConstraintSpec::Gcc(_) => "gcc",
            ConstraintSpec::Alldifferent { .. } => "alldifferent",
            ConstraintSpec::AbsDistance { .. } => "abs",
            ConstraintSpec::Deviation { .. } => "deviation",
            ConstraintSpec::InterDistance { .. } => "interdistance",
            ConstraintSpec::Product { .. } => "product",
            ConstraintSpec::Power { .. } => "power",
            ConstraintSpec::Linear { .. } => "linear",
            ConstraintSpec::LogicalTable { .. } => "logical_table",
        }
    }

    /// Every variable the constraint mentions, in argument order.
    pub fn scope(&self) -> Vec<VarId> {
        match self {
            ConstraintSpec::PositiveTable { vars, .. }
            | ConstraintSpec::NegativeTable { vars, .. }
            | ConstraintSpec::LogicalTable { vars, .. }
            | ConstraintSpec::Alldifferent { vars, .. } => vars.clone(),
            ConstraintSpec::Gcc(g) => g.vars.clone(),
            ConstraintSpec::Element { index, value, .. } => vec![*index, *value],
            ConstraintSpec::AbsDistance { x, y, abs } => vec![*x, *y, *abs],
            ConstraintSpec::Deviation { vars, mean, dev } => {
                let mut s = vars.clone();
                s.push(*mean);
                s.push(*dev);
                s
            }
            ConstraintSpec::InterDistance { vars, gap } => {
                let mut s = vars.clone();
                s.push(*gap);
                s
            }
            ConstraintSpec::Product { x, y, z } => vec![*x, *y, *z],
            ConstraintSpec::Power { x, z, .. } => vec![*x, *z],
            ConstraintSpec::Linear { terms, .. } => terms.iter().map(|&(_, v)| v).collect(),
        }
    }

    pub fn is_reifiable(&self) -> bool {
        !matches!(
            self,
            ConstraintSpec::Deviation { .. }
                | ConstraintSpec::InterDistance { .. }
                | ConstraintSpec::AbsDistance { .. }
                | ConstraintSpec::Linear { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub sense: Sense,
    pub terms: Vec<(f64, VarId)>,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostedConstraint {
    pub spec: ConstraintSpec,
    /// Truth variable when the constraint is reified instead of posted hard.
    pub reif: Option<VarId>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("empty domain")]
    EmptyDomain,
    #[error("invalid bounds [{lb}, {ub}]")]
    InvalidBounds { lb: f64, ub: f64 },
    #[error("unknown variable {0}")]
    UnknownVar(VarId),
    #[error("variable {0} belongs to another model")]
    ForeignVar(VarId),
    #[error("variable {var} has the wrong kind: {expected}")]
    KindMismatch { var: VarId, expected: &'static str },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("duplicate tuple {0:?}")]
    DuplicateTuple(Vec<i64>),
    #[error("occurrence bounds out of order at position {0}")]
    BoundsOrder(usize),
    #[error("gcc arrays have different lengths")]
    LengthMismatch,
    #[error("duplicate value {0}")]
    DuplicateValue(i64),
    #[error("{0} constraints cannot be reified")]
    NotReifiable(&'static str),
    #[error("element array is empty")]
    EmptyArray,
    #[error("element index base must be 0 or 1, got {0}")]
    InvalidIndexBase(i64),
    #[error("constraint needs at least {0} variables")]
    TooFewVariables(usize),
    #[error("exponent must be at least 1")]
    InvalidExponent,
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("constraint {0} does not exist")]
    UnknownConstraint(ConstraintId),
    #[error("non-finite coefficient")]
    NonFinite,
}

/// One invariant violation found by [`Model::validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub constraint: Option<ConstraintId>,
    pub error: ModelError,
}

#[derive(Debug, Clone)]
pub struct Model {
    tag: u64,
    vars: Vec<Variable>,
    names: HashMap<String, VarId>,
    constraints: Vec<PostedConstraint>,
    objective: Option<Objective>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars
            && self.constraints == other.constraints
            && self.objective == other.objective
    }
}

impl Default for Model {
    fn default() -> Self {
        Self::new()
    }
}

impl Model {
    pub fn new() -> Self {
        Model {
            tag: NEXT_MODEL_TAG.fetch_add(1, Ordering::Relaxed),
            vars: Vec::new(),
            names: HashMap::new(),
            constraints: Vec::new(),
            objective: None,
        }
    }

    fn push_var(&mut self, name: Option<String>, kind: VarKind) -> Result<VarId, ModelError> {
        let id = VarId { index: self.vars.len(), model: self.tag };
        let name = name.unwrap_or_else(|| {
            let base = format!("v{}", id.index);
            let mut name = base.clone();
            let mut k = 1;
            while self.names.contains_key(&name) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        });
        if self.names.contains_key(&name) {
            return Err(ModelError::DuplicateName(name));
        }
        self.names.insert(name.clone(), id);
        self.vars.push(Variable { name, kind });
        Ok(id)
    }

    pub fn add_int_var(&mut self, domain: impl IntoIterator<Item = i64>) -> Result<VarId, ModelError> {
        let d = IntDomain::new(domain)?;
        self.push_var(None, VarKind::Int(d))
    }

    pub fn add_int_var_named(
        &mut self,
        name: impl Into<String>,
        domain: impl IntoIterator<Item = i64>,
    ) -> Result<VarId, ModelError> {
        let d = IntDomain::new(domain)?;
        self.push_var(Some(name.into()), VarKind::Int(d))
    }

    pub fn add_bool_var(&mut self) -> VarId {
        self.push_var(None, VarKind::Int(IntDomain(vec![0, 1])))
            .expect("generated names are unique")
    }

    fn check_bounds(lb: f64, ub: f64) -> Result<(), ModelError> {
        if !lb.is_finite() || !ub.is_finite() || lb > ub {
            return Err(ModelError::InvalidBounds { lb, ub });
        }
        Ok(())
    }

    pub fn add_num_var(&mut self, lb: f64, ub: f64) -> Result<VarId, ModelError> {
        Self::check_bounds(lb, ub)?;
        self.push_var(None, VarKind::Num { lb, ub })
    }

    pub fn add_num_var_named(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> Result<VarId, ModelError> {
        Self::check_bounds(lb, ub)?;
        self.push_var(Some(name.into()), VarKind::Num { lb, ub })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.index]
    }

    /// Handle for the variable at `index`, if it exists.
    pub fn var_id(&self, index: usize) -> Option<VarId> {
        (index < self.vars.len()).then_some(VarId { index, model: self.tag })
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len()).map(move |index| VarId { index, model: self.tag })
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn constraints(&self) -> &[PostedConstraint] {
        &self.constraints
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    /// Posts `spec` as a hard constraint.
    pub fn post(&mut self, spec: ConstraintSpec) -> Result<ConstraintId, ModelError> {
        self.check_spec(&spec)?;
        Ok(self.push_constraint(spec, None))
    }

    /// Records `spec` without checking it. [`Model::validate`] reports problems later.
    pub fn post_unchecked(&mut self, spec: ConstraintSpec) -> ConstraintId {
        self.push_constraint(spec, None)
    }

    fn push_constraint(&mut self, spec: ConstraintSpec, reif: Option<VarId>) -> ConstraintId {
        self.constraints.push(PostedConstraint { spec, reif });
        ConstraintId(self.constraints.len() - 1)
    }

    /// Reifies `spec` into a fresh 0/1 variable. The constraint itself is not enforced.
    pub fn reify(&mut self, spec: ConstraintSpec) -> Result<(ConstraintId, VarId), ModelError> {
        if !spec.is_reifiable() {
            return Err(ModelError::NotReifiable(spec.kind_name()));
        }
        self.check_spec(&spec)?;
        let r = self.add_bool_var();
        Ok((self.push_constraint(spec, Some(r)), r))
    }

    /// Reifies `spec` into an existing variable whose domain is a subset of `{0, 1}`.
    pub fn reify_into(&mut self, spec: ConstraintSpec, r: VarId) -> Result<ConstraintId, ModelError> {
        if !spec.is_reifiable() {
            return Err(ModelError::NotReifiable(spec.kind_name()));
        }
        self.check_spec(&spec)?;
        self.check_boolean(r)?;
        Ok(self.push_constraint(spec, Some(r)))
    }

    fn check_boolean(&self, v: VarId) -> Result<(), ModelError> {
        self.check_var(v)?;
        match self.var(v).domain() {
            Some(d) if d.is_boolean() => Ok(()),
            _ => Err(ModelError::KindMismatch { var: v, expected: "0/1 integer variable" }),
        }
    }

    fn logical(&mut self, inputs: &[VarId], table: Vec<Vec<i64>>) -> Result<VarId, ModelError> {
        for &v in inputs {
            self.check_boolean(v)?;
        }
        let r = self.add_bool_var();
        let mut vars = inputs.to_vec();
        vars.push(r);
        self.post(ConstraintSpec::LogicalTable { vars, tuples: table })?;
        Ok(r)
    }

    /// Fresh `r` with `r = r1 OR r2`.
    pub fn logical_or(&mut self, r1: VarId, r2: VarId) -> Result<VarId, ModelError> {
        self.logical(&[r1, r2], truth_table(2, |a| a[0] || a[1]))
    }

    pub fn logical_and(&mut self, r1: VarId, r2: VarId) -> Result<VarId, ModelError> {
        self.logical(&[r1, r2], truth_table(2, |a| a[0] && a[1]))
    }

    pub fn logical_not(&mut self, r1: VarId) -> Result<VarId, ModelError> {
        self.logical(&[r1], truth_table(1, |a| !a[0]))
    }

    pub fn implies(&mut self, r1: VarId, r2: VarId) -> Result<VarId, ModelError> {
        self.logical(&[r1, r2], truth_table(2, |a| !a[0] || a[1]))
    }

    /// Forces a 0/1 variable to 1, e.g. to state the result of [`Model::logical_or`].
    pub fn assert_true(&mut self, r: VarId) -> Result<ConstraintId, ModelError> {
        self.post(ConstraintSpec::PositiveTable { vars: vec![r], tuples: vec![vec![1]] })
    }

    pub fn set_objective(&mut self, sense: Sense, terms: Vec<(f64, VarId)>) -> Result<(), ModelError> {
        self.set_objective_with_constant(sense, terms, 0.0)
    }

    pub fn set_objective_with_constant(
        &mut self,
        sense: Sense,
        terms: Vec<(f64, VarId)>,
        constant: f64,
    ) -> Result<(), ModelError> {
        for &(c, v) in &terms {
            self.check_var(v)?;
            if !c.is_finite() {
                return Err(ModelError::NonFinite);
            }
        }
        if !constant.is_finite() {
            return Err(ModelError::NonFinite);
        }
        self.objective = Some(Objective { sense, terms, constant });
        Ok(())
    }

    /// Lists every invariant violation; an empty list means the model can be linearized.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            let cid = Some(ConstraintId(i));
            if let Err(error) = self.check_spec(&c.spec) {
                out.push(Diagnostic { constraint: cid, error });
            }
            if let Some(r) = c.reif {
                if !c.spec.is_reifiable() {
                    out.push(Diagnostic { constraint: cid, error: ModelError::NotReifiable(c.spec.kind_name()) });
                }
                if let Err(error) = self.check_boolean(r) {
                    out.push(Diagnostic { constraint: cid, error });
                }
            }
        }
        if let Some(obj) = &self.objective {
            for &(_, v) in &obj.terms {
                if let Err(error) = self.check_var(v) {
                    out.push(Diagnostic { constraint: None, error });
                }
            }
        }
        out
    }

    fn check_var(&self, v: VarId) -> Result<(), ModelError> {
        if v.model != self.tag {
            return Err(ModelError::ForeignVar(v));
        }
        if v.index >= self.vars.len() {
            return Err(ModelError::UnknownVar(v));
        }
        Ok(())
    }

    fn check_int(&self, v: VarId) -> Result<(), ModelError> {
        self.check_var(v)?;
        if !self.var(v).is_int() {
            return Err(ModelError::KindMismatch { var: v, expected: "integer variable" });
        }
        Ok(())
    }

    fn check_num(&self, v: VarId) -> Result<(), ModelError> {
        self.check_var(v)?;
        if self.var(v).is_int() {
            return Err(ModelError::KindMismatch { var: v, expected: "numerical variable" });
        }
        Ok(())
    }

    fn check_tuples(&self, vars: &[VarId], tuples: &[Vec<i64>]) -> Result<(), ModelError> {
        for &v in vars {
            self.check_int(v)?;
        }
        let mut seen = BTreeSet::new();
        for t in tuples {
            if t.len() != vars.len() {
                return Err(ModelError::ArityMismatch { expected: vars.len(), found: t.len() });
            }
            if !seen.insert(t) {
                return Err(ModelError::DuplicateTuple(t.clone()));
            }
        }
        Ok(())
    }

    fn check_spec(&self, spec: &ConstraintSpec) -> Result<(), ModelError> {
        match spec {
            ConstraintSpec::PositiveTable { vars, tuples } | ConstraintSpec::NegativeTable { vars, tuples } => {
                self.check_tuples(vars, tuples)
            }
            ConstraintSpec::LogicalTable { vars, tuples } => {
                for &v in vars {
                    self.check_boolean(v)?;
                }
                self.check_tuples(vars, tuples)
            }
            ConstraintSpec::Element { index, value, array, base } => {
                self.check_int(*index)?;
                self.check_int(*value)?;
                if array.is_empty() {
                    return Err(ModelError::EmptyArray);
                }
                if *base != 0 && *base != 1 {
                    return Err(ModelError::InvalidIndexBase(*base));
                }
                Ok(())
            }
            ConstraintSpec::Gcc(g) => {
                for &v in &g.vars {
                    self.check_int(v)?;
                }
                if g.values.len() != g.lower.len() || g.values.len() != g.upper.len() {
                    return Err(ModelError::LengthMismatch);
                }
                for k in 0..g.values.len() {
                    if g.lower[k] > g.upper[k] {
                        return Err(ModelError::BoundsOrder(k));
                    }
                }
                let mut seen = BTreeSet::new();
                for &v in &g.values {
                    if !seen.insert(v) {
                        return Err(ModelError::DuplicateValue(v));
                    }
                }
                Ok(())
            }
            ConstraintSpec::Alldifferent { vars, .. } => {
                if vars.len() < 2 {
                    return Err(ModelError::TooFewVariables(2));
                }
                vars.iter().try_for_each(|&v| self.check_int(v))
            }
            ConstraintSpec::AbsDistance { x, y, abs } => {
                self.check_var(*x)?;
                self.check_var(*y)?;
                self.check_var(*abs)
            }
            ConstraintSpec::Deviation { vars, mean, dev } => {
                if vars.is_empty() {
                    return Err(ModelError::TooFewVariables(1));
                }
                vars.iter().try_for_each(|&v| self.check_var(v))?;
                self.check_num(*mean)?;
                self.check_num(*dev)
            }
            ConstraintSpec::InterDistance { vars, gap } => {
                vars.iter().try_for_each(|&v| self.check_var(v))?;
                self.check_var(*gap)
            }
            ConstraintSpec::Product { x, y, z } => {
                self.check_int(*x)?;
                self.check_int(*y)?;
                self.check_int(*z)
            }
            ConstraintSpec::Power { x, exponent, z } => {
                if *exponent < 1 {
                    return Err(ModelError::InvalidExponent);
                }
                self.check_int(*x)?;
                self.check_int(*z)
            }
            ConstraintSpec::Linear { terms, rhs, .. } => {
                for &(c, v) in terms {
                    self.check_var(v)?;
                    if !c.is_finite() {
                        return Err(ModelError::NonFinite);
                    }
                }
                if !rhs.is_finite() {
                    return Err(ModelError::NonFinite);
                }
                Ok(())
            }
        }
    }
}

/// Full truth table of a Boolean function: one row per input combination,
/// inputs followed by the output.
pub fn truth_table(arity: usize, f: impl Fn(&[bool]) -> bool) -> Vec<Vec<i64>> {
    (0..1usize << arity)
        .map(|mask| {
            let inputs: Vec<bool> = (0..arity).map(|i| mask >> (arity - 1 - i) & 1 == 1).collect();
            let mut row: Vec<i64> = inputs.iter().map(|&b| b as i64).collect();
            row.push(f(&inputs) as i64);
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_var_domain_is_sorted_and_deduplicated() {
        let mut m = Model::new();
        let x = m.add_int_var([3, 1, 2]).unwrap();
        assert_eq!(x.index(), 0);
        assert_eq!(m.var(x).domain().unwrap().values(), &[1, 2, 3]);
        let y = m.add_int_var([5, 5, 5]).unwrap();
        assert_eq!(m.var(y).domain().unwrap().values(), &[5]);
        assert_eq!(m.add_int_var([]), Err(ModelError::EmptyDomain));
    }

    #[test]
    fn num_var_bounds() {
        let mut m = Model::new();
        let a = m.add_num_var(0.0, 10.0).unwrap();
        assert_eq!(m.var(a).bounds(), (0.0, 10.0));
        m.add_num_var(3.5, 3.5).unwrap();
        assert!(matches!(m.add_num_var(5.0, 1.0), Err(ModelError::InvalidBounds { .. })));
        assert!(matches!(m.add_num_var(0.0, f64::INFINITY), Err(ModelError::InvalidBounds { .. })));
    }

    #[test]
    fn post_checks_arity_and_kinds() {
        let mut m = Model::new();
        let xs: Vec<_> = (0..3).map(|_| m.add_int_var([1, 3, 4]).unwrap()).collect();
        m.post(ConstraintSpec::PositiveTable { vars: xs.clone(), tuples: vec![vec![1, 1, 1], vec![3, 3, 3]] })
            .unwrap();
        let err = m.post(ConstraintSpec::NegativeTable { vars: xs.clone(), tuples: vec![vec![1, 1]] });
        assert_eq!(err, Err(ModelError::ArityMismatch { expected: 3, found: 2 }));
        let z = m.add_int_var([0, 1]).unwrap();
        let s = m.add_num_var(0.0, 10.0).unwrap();
        let err = m.post(ConstraintSpec::Deviation { vars: xs.clone(), mean: z, dev: s });
        assert!(matches!(err, Err(ModelError::KindMismatch { .. })));
        let err = m.post(ConstraintSpec::PositiveTable { vars: vec![xs[0]], tuples: vec![vec![1], vec![1]] });
        assert_eq!(err, Err(ModelError::DuplicateTuple(vec![1])));
    }

    #[test]
    fn foreign_handles_are_rejected() {
        let mut a = Model::new();
        let mut b = Model::new();
        let xa = a.add_int_var([1]).unwrap();
        b.add_int_var([1]).unwrap();
        let err = b.post(ConstraintSpec::PositiveTable { vars: vec![xa], tuples: vec![vec![1]] });
        assert_eq!(err, Err(ModelError::ForeignVar(xa)));
    }

    #[test]
    fn reify_creates_fresh_boolean() {
        let mut m = Model::new();
        let x = m.add_int_var([1, 2]).unwrap();
        let y = m.add_int_var([1, 2]).unwrap();
        let (cid, r) = m
            .reify(ConstraintSpec::PositiveTable { vars: vec![x, y], tuples: vec![vec![1, 1]] })
            .unwrap();
        assert_eq!(m.var(r).domain().unwrap().values(), &[0, 1]);
        assert_eq!(m.constraints()[cid.0].reif, Some(r));
        let g = GccSpec { vars: vec![x, y], values: vec![1], lower: vec![1], upper: vec![1] };
        assert!(m.reify(ConstraintSpec::Gcc(g)).is_ok());
        let mean = m.add_num_var(0.0, 2.0).unwrap();
        let dev = m.add_num_var(0.0, 2.0).unwrap();
        let err = m.reify(ConstraintSpec::Deviation { vars: vec![x, y], mean, dev });
        assert_eq!(err, Err(ModelError::NotReifiable("deviation")));
    }

    #[test]
    fn logical_tables() {
        assert_eq!(
            truth_table(2, |a| a[0] || a[1]),
            vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 1]]
        );
        assert_eq!(
            truth_table(2, |a| a[0] && a[1]),
            vec![vec![0, 0, 0], vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 1]]
        );
        assert_eq!(truth_table(1, |a| !a[0]), vec![vec![0, 1], vec![1, 0]]);

        let mut m = Model::new();
        let a = m.add_bool_var();
        let b = m.add_bool_var();
        let r = m.logical_or(a, b).unwrap();
        match &m.constraints()[0].spec {
            ConstraintSpec::LogicalTable { vars, tuples } => {
                assert_eq!(vars, &vec![a, b, r]);
                assert_eq!(tuples.len(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
        let x = m.add_int_var([1, 2]).unwrap();
        assert!(matches!(m.logical_or(a, x), Err(ModelError::KindMismatch { .. })));
    }

    #[test]
    fn validate_reports_dangling_and_bounds() {
        let mut m = Model::new();
        let x = m.add_int_var([1, 2]).unwrap();
        assert!(m.validate().is_empty());
        let dangling = VarId { index: 7, model: m.tag };
        m.post_unchecked(ConstraintSpec::PositiveTable { vars: vec![dangling], tuples: vec![vec![1]] });
        m.post_unchecked(ConstraintSpec::Gcc(GccSpec {
            vars: vec![x],
            values: vec![1],
            lower: vec![2],
            upper: vec![1],
        }));
        let diags = m.validate();
        assert_eq!(diags.len(), 2);
        assert_eq!(diags[0].error, ModelError::UnknownVar(dangling));
        assert_eq!(diags[1].error, ModelError::BoundsOrder(0));
    }

    #[test]
    fn objective_replaces_previous() {
        let mut m = Model::new();
        let x = m.add_int_var(0..=3).unwrap();
        m.set_objective(Sense::Maximize, vec![(1.0, x)]).unwrap();
        m.set_objective(Sense::Minimize, vec![]).unwrap();
        assert_eq!(m.objective().unwrap().sense, Sense::Minimize);
        assert!(m.objective().unwrap().terms.is_empty());
    }
}
