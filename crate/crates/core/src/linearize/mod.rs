//! Compilation of a [`Model`] into a [`MilpProgram`].
//!
//! Every integer variable gets a one-hot value encoding (one indicator per
//! domain value, channelled to the integer variable), and every constraint is
//! expressed over those indicators. Variables with domain exactly `{0, 1}` are
//! their own indicator: `x = 1` is `x` and `x = 0` is `1 - x`.

mod gcc;
mod numeric;
mod table;

pub use gcc::{linearize_alldifferent, linearize_gcc, prune_negative_table_with_gcc, reify_gcc, GccEncoding, GccReifEncoding};
pub use numeric::{abs_range, linearize_abs, linearize_deviation, linearize_interdistance, AbsCase, AbsEncoding};
pub use table::{
    expand_arithmetic, linearize_element, linearize_negative_table, linearize_positive_table, reify_table, Polarity,
    TableEncoding,
};

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::milp::{IrError, MilpProgram, MilpVarId, MilpVarKind, Relation, VarOrigin};
use crate::model::{ConstraintSpec, Diagnostic, GccSpec, Model, VarId, VarKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearizeError {
    #[error("model has {} validation problem(s), first: {}", .0.len(), .0[0].error)]
    Invalid(Vec<Diagnostic>),
    #[error("arithmetic overflow while expanding constraint c{0}")]
    Overflow(usize),
    #[error("variable {0} has non-finite bounds")]
    InvalidBounds(String),
    #[error(transparent)]
    Ir(#[from] IrError),
}

/// Truth literal over a MILP variable: `Pos(v)` is `v`, `Neg(v)` is `1 - v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lit {
    Pos(MilpVarId),
    Neg(MilpVarId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum VarEncoding {
    Int { var: MilpVarId, values: Vec<i64>, indicators: Vec<Lit> },
    Num { var: MilpVarId },
}

/// Indicator map shared by all constraint encodings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainEncoding {
    entries: Vec<VarEncoding>,
}

impl DomainEncoding {
    /// Emits the value encoding of every model variable, in declaration order.
    pub fn encode(model: &Model, program: &mut MilpProgram) -> Result<Self, LinearizeError> {
        let mut entries = Vec::with_capacity(model.num_vars());
        for (i, v) in model.vars().iter().enumerate() {
            let name = format!("x{i}");
            let entry = match &v.kind {
                VarKind::Int(d) if d.is_binary() => {
                    let var = program.add_binary(name, VarOrigin::Model(i))?;
                    VarEncoding::Int { var, values: vec![0, 1], indicators: vec![Lit::Neg(var), Lit::Pos(var)] }
                }
                VarKind::Int(d) => {
                    let var = program.add_var(name, MilpVarKind::Integer, d.min() as f64, d.max() as f64, VarOrigin::Model(i))?;
                    let mut indicators = Vec::with_capacity(d.len());
                    for (j, &value) in d.values().iter().enumerate() {
                        let b = program.add_binary(format!("b_{i}_{j}"), VarOrigin::DomainIndicator { var: i, value })?;
                        indicators.push(Lit::Pos(b));
                    }
                    let mut val: Vec<(f64, MilpVarId)> = d
                        .values()
                        .iter()
                        .zip(&indicators)
                        .filter(|(&v, _)| v != 0)
                        .map(|(&v, l)| (v as f64, l.var()))
                        .collect();
                    val.push((-1.0, var));
                    program.add_constraint(format!("dom{i}_val"), val, Relation::Eq, 0.0, format!("domain:x{i}"))?;
                    let one = indicators.iter().map(|l| (1.0, l.var())).collect();
                    program.add_constraint(format!("dom{i}_one"), one, Relation::Eq, 1.0, format!("domain:x{i}"))?;
                    VarEncoding::Int { var, values: d.values().to_vec(), indicators }
                }
                VarKind::Num { lb, ub } => {
                    let var = program.add_var(name, MilpVarKind::Continuous, *lb, *ub, VarOrigin::Model(i))?;
                    VarEncoding::Num { var }
                }
            };
            entries.push(entry);
        }
        Ok(DomainEncoding { entries })
    }

    pub fn var(&self, v: VarId) -> MilpVarId {
        match &self.entries[v.index()] {
            VarEncoding::Int { var, .. } | VarEncoding::Num { var } => *var,
        }
    }

    pub fn entry(&self, v: VarId) -> &VarEncoding {
        &self.entries[v.index()]
    }

    /// Literal for `v = value`, or `None` when `value` is outside the domain.
    pub fn indicator(&self, v: VarId, value: i64) -> Option<Lit> {
        match &self.entries[v.index()] {
            VarEncoding::Int { values, indicators, .. } => values.binary_search(&value).ok().map(|j| indicators[j]),
            VarEncoding::Num { .. } => None,
        }
    }

    pub fn domain(&self, v: VarId) -> &[i64] {
        match &self.entries[v.index()] {
            VarEncoding::Int { values, .. } => values,
            VarEncoding::Num { .. } => &[],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Lit {
    pub fn var(self) -> MilpVarId {
        match self {
            Lit::Pos(v) | Lit::Neg(v) => v,
        }
    }
}

/// Affine expression accumulator that merges repeated variables.
#[derive(Debug, Default)]
pub(crate) struct Affine {
    terms: Vec<(f64, MilpVarId)>,
    slot: HashMap<MilpVarId, usize>,
    constant: f64,
}

impl Affine {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn var(&mut self, coef: f64, v: MilpVarId) -> &mut Self {
        match self.slot.get(&v) {
            Some(&i) => self.terms[i].0 += coef,
            None => {
                self.slot.insert(v, self.terms.len());
                self.terms.push((coef, v));
            }
        }
        self
    }

    pub(crate) fn lit(&mut self, coef: f64, l: Lit) -> &mut Self {
        match l {
            Lit::Pos(v) => self.var(coef, v),
            Lit::Neg(v) => {
                self.constant += coef;
                self.var(-coef, v)
            }
        }
    }

    /// Emits `expr rel rhs`, moving the accumulated constant to the right.
    pub(crate) fn emit(
        &self,
        program: &mut MilpProgram,
        name: String,
        rel: Relation,
        rhs: f64,
        tag: &str,
    ) -> Result<usize, IrError> {
        let terms: Vec<_> = self.terms.iter().copied().filter(|&(c, _)| c != 0.0).collect();
        program.add_constraint(name, terms, rel, rhs - self.constant, tag)
    }
}

/// Emits the explicit contradiction `0 >= 1`.
pub(crate) fn emit_contradiction(program: &mut MilpProgram, name: String, tag: &str) -> Result<usize, IrError> {
    program.add_constraint(name, Vec::new(), Relation::Ge, 1.0, tag)
}

/// Result of compiling a model.
#[derive(Debug, Clone)]
pub struct Linearized {
    pub program: MilpProgram,
    pub domains: DomainEncoding,
}

impl Linearized {
    /// MILP variable carrying model variable `v`.
    pub fn var(&self, v: VarId) -> MilpVarId {
        self.domains.var(v)
    }

    /// Values of all model variables, in model order.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        (0..self.domains.len())
            .map(|i| match &self.domains.entries[i] {
                VarEncoding::Int { var, .. } | VarEncoding::Num { var } => values[var.0],
            })
            .collect()
    }

    /// Values of the model's integer variables, in model order.
    pub fn project_ints(&self, values: &[f64]) -> Vec<i64> {
        self.domains
            .entries
            .iter()
            .filter_map(|e| match e {
                VarEncoding::Int { var, .. } => Some(values[var.0].round() as i64),
                VarEncoding::Num { .. } => None,
            })
            .collect()
    }
}

/// Compiles `model`. Identical models produce identical programs.
pub fn linearize_model(model: &Model) -> Result<Linearized, LinearizeError> {
    let diags = model.validate();
    if !diags.is_empty() {
        return Err(LinearizeError::Invalid(diags));
    }
    let mut program = MilpProgram::new();
    let enc = DomainEncoding::encode(model, &mut program)?;

    for (cid, posted) in model.constraints().iter().enumerate() {
        let prefix = format!("c{cid}");
        match posted.reif {
            None => post_hard(model, &mut program, &enc, cid, &prefix, &posted.spec)?,
            Some(r) => {
                let r = enc.indicator(r, 1).unwrap_or_else(|| {
                    // Domain {0}: the truth literal is constantly false.
                    enc.indicator(r, 0).map(|l| match l {
                        Lit::Pos(v) => Lit::Neg(v),
                        Lit::Neg(v) => Lit::Pos(v),
                    })
                    .expect("reification variable has a 0/1 domain")
                });
                post_reified(&mut program, &enc, cid, &prefix, &posted.spec, r)?
            }
        }
    }

    if let Some(obj) = model.objective() {
        let mut acc: Vec<(f64, MilpVarId)> = Vec::new();
        for &(c, v) in &obj.terms {
            let mv = enc.var(v);
            match acc.iter_mut().find(|t| t.1 == mv) {
                Some(t) => t.0 += c,
                None => acc.push((c, mv)),
            }
        }
        program.set_objective(obj.sense, acc, obj.constant)?;
    }
    Ok(Linearized { program, domains: enc })
}

fn same_scope(a: &[VarId], b: &[VarId]) -> bool {
    let sa: BTreeSet<_> = a.iter().collect();
    let sb: BTreeSet<_> = b.iter().collect();
    sa.len() == a.len() && sb.len() == b.len() && sa == sb
}

/// `a` has distinct variables, all of which occur in `b`.
fn sub_scope(a: &[VarId], b: &[VarId]) -> bool {
    let sa: BTreeSet<_> = a.iter().collect();
    let sb: BTreeSet<_> = b.iter().collect();
    sa.len() == a.len() && sa.is_subset(&sb)
}

fn post_hard(
    model: &Model,
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    cid: usize,
    prefix: &str,
    spec: &ConstraintSpec,
) -> Result<(), LinearizeError> {
    match spec {
        ConstraintSpec::PositiveTable { vars, tuples } | ConstraintSpec::LogicalTable { vars, tuples } => {
            linearize_positive_table(program, enc, prefix, cid, vars, tuples)?;
        }
        ConstraintSpec::NegativeTable { vars, tuples } => {
            // Hard Gccs already exclude the tuples they violate. On a strict
            // sub-scope only the upper bounds can be judged from the tuple alone.
            let mut tuples = tuples.clone();
            for other in model.constraints() {
                if let (None, ConstraintSpec::Gcc(g)) = (other.reif, &other.spec) {
                    if same_scope(&g.vars, vars) {
                        tuples = prune_negative_table_with_gcc(&tuples, g);
                    } else if sub_scope(vars, &g.vars) {
                        let upper_only = GccSpec { lower: vec![0; g.values.len()], ..g.clone() };
                        tuples = prune_negative_table_with_gcc(&tuples, &upper_only);
                    }
                }
            }
            linearize_negative_table(program, enc, prefix, vars, &tuples)?;
        }
        ConstraintSpec::Element { index, value, array, base } => {
            linearize_element(program, enc, prefix, cid, *index, *value, array, *base)?;
        }
        ConstraintSpec::Gcc(g) => {
            linearize_gcc(program, enc, prefix, g)?;
        }
        ConstraintSpec::Alldifferent { vars, mode } => {
            linearize_alldifferent(program, enc, prefix, vars, *mode)?;
        }
        ConstraintSpec::Product { .. } | ConstraintSpec::Power { .. } => {
            let (vars, tuples) = expand_arithmetic(spec, enc).ok_or(LinearizeError::Overflow(cid))?;
            linearize_positive_table(program, enc, prefix, cid, &vars, &tuples)?;
        }
        ConstraintSpec::AbsDistance { x, y, abs } => {
            linearize_abs(program, prefix, cid, enc.var(*x), enc.var(*y), enc.var(*abs))?;
        }
        ConstraintSpec::Deviation { vars, mean, dev } => {
            let xs: Vec<_> = vars.iter().map(|&v| enc.var(v)).collect();
            linearize_deviation(program, prefix, cid, &xs, enc.var(*mean), enc.var(*dev))?;
        }
        ConstraintSpec::InterDistance { vars, gap } => {
            let xs: Vec<_> = vars.iter().map(|&v| enc.var(v)).collect();
            linearize_interdistance(program, prefix, cid, &xs, enc.var(*gap))?;
        }
        ConstraintSpec::Linear { terms, relation, rhs } => {
            let mut a = Affine::new();
            for &(c, v) in terms {
                a.var(c, enc.var(v));
            }
            a.emit(program, format!("{prefix}_lin"), *relation, *rhs, &format!("{prefix}:linear"))?;
        }
    }
    Ok(())
}

fn post_reified(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    cid: usize,
    prefix: &str,
    spec: &ConstraintSpec,
    r: Lit,
) -> Result<(), LinearizeError> {
    match spec {
        ConstraintSpec::PositiveTable { vars, tuples } | ConstraintSpec::LogicalTable { vars, tuples } => {
            reify_table(program, enc, prefix, cid, vars, tuples, Polarity::Allowed, r)?;
        }
        ConstraintSpec::NegativeTable { vars, tuples } => {
            reify_table(program, enc, prefix, cid, vars, tuples, Polarity::Forbidden, r)?;
        }
        ConstraintSpec::Element { index, value, array, base } => {
            let tuples = table::element_tuples(array, *base);
            reify_table(program, enc, prefix, cid, &[*index, *value], &tuples, Polarity::Allowed, r)?;
        }
        ConstraintSpec::Product { .. } | ConstraintSpec::Power { .. } => {
            let (vars, tuples) = expand_arithmetic(spec, enc).ok_or(LinearizeError::Overflow(cid))?;
            reify_table(program, enc, prefix, cid, &vars, &tuples, Polarity::Allowed, r)?;
        }
        ConstraintSpec::Gcc(g) => {
            reify_gcc(program, enc, prefix, cid, g, r)?;
        }
        ConstraintSpec::Alldifferent { vars, .. } => {
            let g = gcc::alldifferent_gcc(enc, vars);
            reify_gcc(program, enc, prefix, cid, &g, r)?;
        }
        other => unreachable!("validated model reifies {}", other.kind_name()),
    }
    Ok(())
}

/// Gcc with bounds `[0, 1]` over the union of the domains of `vars`.
pub fn implied_alldifferent_gcc(model: &Model, vars: &[VarId]) -> GccSpec {
    let values: BTreeSet<i64> =
        vars.iter().flat_map(|&v| model.var(v).domain().map(|d| d.values().to_vec()).unwrap_or_default()).collect();
    let n = values.len();
    GccSpec { vars: vars.to_vec(), values: values.into_iter().collect(), lower: vec![0; n], upper: vec![1; n] }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_domain_encoding() {
        let mut m = Model::new();
        m.add_int_var([1, 2, 3]).unwrap();
        let lin = linearize_model(&m).unwrap();
        let p = &lin.program;
        let s = p.stats();
        assert_eq!((s.binaries, s.integers, s.rows()), (3, 1, 2));
        assert_eq!(p.constraints[0].terms, vec![(1.0, MilpVarId(1)), (2.0, MilpVarId(2)), (3.0, MilpVarId(3)), (-1.0, MilpVarId(0))]);
        assert_eq!((p.constraints[0].relation, p.constraints[0].rhs), (Relation::Eq, 0.0));
        assert_eq!(p.constraints[1].terms.len(), 3);
        assert_eq!(p.constraints[1].rhs, 1.0);
    }

    #[test]
    fn empty_model_gives_empty_program() {
        let lin = linearize_model(&Model::new()).unwrap();
        assert_eq!(lin.program.stats().vars(), 0);
        assert_eq!(lin.program.stats().rows(), 0);
    }

    #[test]
    fn binary_domain_uses_single_variable() {
        let mut m = Model::new();
        let r = m.add_bool_var();
        let lin = linearize_model(&m).unwrap();
        assert_eq!(lin.program.stats().binaries, 1);
        assert_eq!(lin.program.stats().rows(), 0);
        assert_eq!(lin.domains.indicator(r, 0), Some(Lit::Neg(MilpVarId(0))));
        assert_eq!(lin.domains.indicator(r, 1), Some(Lit::Pos(MilpVarId(0))));
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut m = Model::new();
        let x = m.add_int_var([1]).unwrap();
        m.post_unchecked(ConstraintSpec::Gcc(GccSpec { vars: vec![x], values: vec![1], lower: vec![2], upper: vec![1] }));
        assert!(matches!(linearize_model(&m), Err(LinearizeError::Invalid(_))));
    }

    #[test]
    fn affine_moves_negated_literals_to_rhs() {
        let mut p = MilpProgram::new();
        let x = p.add_binary("x", VarOrigin::Free).unwrap();
        let y = p.add_binary("y", VarOrigin::Free).unwrap();
        let mut a = Affine::new();
        a.lit(1.0, Lit::Neg(x)).lit(1.0, Lit::Pos(y)).lit(2.0, Lit::Pos(y));
        a.emit(&mut p, "r".into(), Relation::Le, 1.0, "t").unwrap();
        assert_eq!(p.constraints[0].terms, vec![(-1.0, x), (3.0, y)]);
        assert_eq!(p.constraints[0].rhs, 0.0);
    }
}
