//! Brute-force CP semantics used as ground truth for the linearization.
//!
//! Every integer assignment is enumerated and each constraint is checked
//! against its definition. Numerical variables are only supported where
//! they are determined by the integers: `mean` and `dev` of a Deviation and
//! the `abs` of an AbsDistance. The `gap` of an InterDistance may also be a
//! free numerical variable; it is then satisfiable iff its lower bound does
//! not exceed the smallest pairwise distance.

use std::collections::{BTreeSet, HashSet};

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::{ConstraintSpec, Diagnostic, Model, PostedConstraint, Sense, VarId};

const BOUND_TOL: f64 = 1e-9;
pub const DEFAULT_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{size} assignments exceed the cap of {cap}")]
    TooLarge { size: u128, cap: u64 },
    #[error("unsupported use of numerical variable {0}")]
    Unsupported(String),
    #[error("invalid model: {0:?}")]
    Invalid(Vec<Diagnostic>),
}

/// Feasible assignments of the model's integer variables, in model order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CpSolutionSet {
    pub vars: Vec<VarId>,
    pub assignments: BTreeSet<Vec<i64>>,
}

impl CpSolutionSet {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        self.assignments.contains(a)
    }
}

fn int(v: Rational64) -> Option<i64> {
    v.is_integer().then(|| v.to_integer())
}

fn ints(values: &[Rational64], vars: &[VarId]) -> Option<Vec<i64>> {
    vars.iter().map(|v| int(values[v.index()])).collect()
}

/// Truth of `spec` under `values` (indexed by model variable index).
pub fn check(spec: &ConstraintSpec, values: &[Rational64]) -> bool {
    let val = |v: &VarId| values[v.index()];
    match spec {
        ConstraintSpec::PositiveTable { vars, tuples } | ConstraintSpec::LogicalTable { vars, tuples } => {
            ints(values, vars).is_some_and(|a| tuples.contains(&a))
        }
        ConstraintSpec::NegativeTable { vars, tuples } => ints(values, vars).is_some_and(|a| !tuples.contains(&a)),
        ConstraintSpec::Element { index, value, array, base } => {
            let (Some(i), Some(v)) = (int(val(index)), int(val(value))) else { return false };
            i.checked_sub(*base)
                .and_then(|k| usize::try_from(k).ok())
                .and_then(|k| array.get(k))
                .is_some_and(|&t| t == v)
        }
        ConstraintSpec::Gcc(g) => ints(values, &g.vars).is_some_and(|a| g.admits(&a)),
        ConstraintSpec::Alldifferent { vars, .. } => {
            let mut seen = HashSet::new();
            vars.iter().all(|v| seen.insert(val(v)))
        }
        ConstraintSpec::AbsDistance { x, y, abs } => (val(x) - val(y)).abs() == val(abs),
        ConstraintSpec::Deviation { vars, mean, dev } => {
            let n = Rational64::from_integer(vars.len() as i64);
            let sum: Rational64 = vars.iter().map(val).sum();
            let z = val(mean);
            sum == n * z && vars.iter().map(|v| (val(v) - z).abs()).sum::<Rational64>() == val(dev)
        }
        ConstraintSpec::InterDistance { vars, gap } => {
            let p = val(gap);
            (0..vars.len()).all(|i| (i + 1..vars.len()).all(|j| (val(&vars[i]) - val(&vars[j])).abs() >= p))
        }
        ConstraintSpec::Product { x, y, z } => {
            let (Some(a), Some(b), Some(c)) = (int(val(x)), int(val(y)), int(val(z))) else { return false };
            a.checked_mul(b) == Some(c)
        }
        ConstraintSpec::Power { x, exponent, z } => {
            let (Some(a), Some(c)) = (int(val(x)), int(val(z))) else { return false };
            a.checked_pow(*exponent) == Some(c)
        }
        ConstraintSpec::Linear { terms, relation, rhs } => {
            let lhs: f64 = terms.iter().map(|(c, v)| c * val(v).to_f64().unwrap_or(f64::NAN)).sum();
            relation.holds(lhs, *rhs, 1e-9 * rhs.abs().max(1.0))
        }
    }
}

/// A posted constraint holds, or for a reified one, its truth matches `r`.
pub fn check_posted(pc: &PostedConstraint, values: &[Rational64]) -> bool {
    let truth = check(&pc.spec, values);
    match pc.reif {
        None => truth,
        Some(r) => Rational64::from_integer(truth as i64) == values[r.index()],
    }
}

/// Numerical variables determined by the integers, in derivation order.
fn derivable(model: &Model) -> Vec<bool> {
    let mut known: Vec<bool> = model.vars().iter().map(|v| v.is_int()).collect();
    loop {
        let mut changed = false;
        for c in model.constraints() {
            let targets: Vec<VarId> = match &c.spec {
                ConstraintSpec::Deviation { vars, mean, dev } if vars.iter().all(|v| known[v.index()]) => {
                    vec![*mean, *dev]
                }
                ConstraintSpec::AbsDistance { x, y, abs } if known[x.index()] && known[y.index()] => vec![*abs],
                _ => continue,
            };
            for t in targets {
                if !known[t.index()] {
                    known[t.index()] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return known;
        }
    }
}

struct Plan<'m> {
    model: &'m Model,
    int_vars: Vec<VarId>,
    /// Free numerical gaps of InterDistance constraints, by constraint index.
    free_gaps: Vec<Option<VarId>>,
}

impl<'m> Plan<'m> {
    fn new(model: &'m Model, cap: u64) -> Result<Self, OracleError> {
        let diags = model.validate();
        if !diags.is_empty() {
            return Err(OracleError::Invalid(diags));
        }
        let known = derivable(model);
        let mut free_gaps = Vec::new();
        for c in model.constraints() {
            let mut gap_slot = None;
            for v in c.spec.scope() {
                if known[v.index()] {
                    continue;
                }
                match &c.spec {
                    ConstraintSpec::InterDistance { gap, vars } if *gap == v && !vars.contains(gap) => {
                        gap_slot = Some(v);
                    }
                    _ => return Err(OracleError::Unsupported(model.var(v).name.clone())),
                }
            }
            free_gaps.push(gap_slot);
        }
        // A free gap must not be shared, otherwise its value would couple constraints.
        let mut seen = HashSet::new();
        for g in free_gaps.iter().flatten() {
            if !seen.insert(*g) {
                return Err(OracleError::Unsupported(model.var(*g).name.clone()));
            }
        }
        let int_vars: Vec<VarId> = model.var_ids().filter(|&v| model.var(v).is_int()).collect();
        let size = int_vars
            .iter()
            .try_fold(1u128, |acc, &v| acc.checked_mul(model.var(v).domain().map_or(1, |d| d.len()) as u128))
            .unwrap_or(u128::MAX);
        if size > cap as u128 {
            return Err(OracleError::TooLarge { size, cap });
        }
        Ok(Plan { model, int_vars, free_gaps })
    }

    /// Fills derived numerical values; false if two derivations disagree or a bound is violated.
    fn derive(&self, values: &mut [Option<Rational64>]) -> bool {
        loop {
            let mut changed = false;
            for c in self.model.constraints() {
                let derived: Vec<(VarId, Rational64)> = match &c.spec {
                    ConstraintSpec::Deviation { vars, mean, dev } => {
                        let Some(xs) = vars.iter().map(|v| values[v.index()]).collect::<Option<Vec<_>>>() else {
                            continue;
                        };
                        let z = xs.iter().sum::<Rational64>() / Rational64::from_integer(xs.len() as i64);
                        let s = xs.iter().map(|&x| (x - z).abs()).sum();
                        vec![(*mean, z), (*dev, s)]
                    }
                    ConstraintSpec::AbsDistance { x, y, abs } => match (values[x.index()], values[y.index()]) {
                        (Some(a), Some(b)) => vec![(*abs, (a - b).abs())],
                        _ => continue,
                    },
                    _ => continue,
                };
                for (v, d) in derived {
                    match values[v.index()] {
                        Some(old) if old != d => return false,
                        Some(_) => {}
                        None => {
                            let (lb, ub) = self.model.var(v).bounds();
                            let f = d.to_f64().unwrap_or(f64::NAN);
                            if !(f >= lb - BOUND_TOL * lb.abs().max(1.0) && f <= ub + BOUND_TOL * ub.abs().max(1.0)) {
                                return false;
                            }
                            values[v.index()] = Some(d);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn feasible(&self, values: &[Rational64]) -> bool {
        self.model.constraints().iter().zip(&self.free_gaps).all(|(c, gap)| match (gap, &c.spec) {
            (Some(g), ConstraintSpec::InterDistance { vars, .. }) => {
                let (lb, _) = self.model.var(*g).bounds();
                let mut min: Option<Rational64> = None;
                for i in 0..vars.len() {
                    for j in i + 1..vars.len() {
                        let d = (values[vars[i].index()] - values[vars[j].index()]).abs();
                        min = Some(min.map_or(d, |m| m.min(d)));
                    }
                }
                min.is_none_or(|m| lb <= m.to_f64().unwrap_or(f64::INFINITY) + BOUND_TOL)
            }
            _ => check_posted(c, values),
        })
    }

    /// Calls `f` on every feasible full assignment.
    fn for_each(&self, mut f: impl FnMut(&[i64], &[Rational64])) {
        let doms: Vec<&[i64]> = self.int_vars.iter().map(|&v| self.model.var(v).domain().unwrap().values()).collect();
        let mut pos = vec![0usize; doms.len()];
        let n = self.model.num_vars();
        loop {
            let mut partial: Vec<Option<Rational64>> = vec![None; n];
            let current: Vec<i64> = pos.iter().zip(&doms).map(|(&p, d)| d[p]).collect();
            for (v, &x) in self.int_vars.iter().zip(&current) {
                partial[v.index()] = Some(Rational64::from_integer(x));
            }
            if self.derive(&mut partial) {
                let values: Vec<Rational64> = partial.into_iter().map(|v| v.unwrap_or_else(Rational64::zero)).collect();
                if self.feasible(&values) {
                    f(&current, &values);
                }
            }
            // Odometer step: the last variable moves fastest.
            let mut k = doms.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                pos[k] += 1;
                if pos[k] < doms[k].len() {
                    break;
                }
                pos[k] = 0;
            }
        }
    }
}

/// All assignments of the integer variables that satisfy every constraint.
pub fn enumerate_cp(model: &Model, cap: u64) -> Result<CpSolutionSet, OracleError> {
    let plan = Plan::new(model, cap)?;
    let mut out = CpSolutionSet { vars: plan.int_vars.clone(), assignments: BTreeSet::new() };
    plan.for_each(|a, _| {
        out.assignments.insert(a.to_vec());
    });
    Ok(out)
}

/// Best objective value over all feasible assignments, or `None` if there are none.
/// Without an objective every feasible model has value 0.
pub fn optimum(model: &Model, cap: u64) -> Result<Option<f64>, OracleError> {
    let plan = Plan::new(model, cap)?;
    if let Some(obj) = model.objective() {
        for &(_, v) in &obj.terms {
            if plan.free_gaps.contains(&Some(v)) {
                return Err(OracleError::Unsupported(model.var(v).name.clone()));
            }
        }
    }
    let mut best: Option<f64> = None;
    plan.for_each(|_, values| {
        let value = model.objective().map_or(0.0, |o| {
            o.constant + o.terms.iter().map(|(c, v)| c * values[v.index()].to_f64().unwrap_or(f64::NAN)).sum::<f64>()
        });
        let better = match (best, model.objective().map(|o| o.sense)) {
            (None, _) => true,
            (Some(b), Some(Sense::Minimize)) => value < b,
            (Some(b), _) => value > b,
        };
        if better {
            best = Some(value);
        }
    });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GccSpec, Model};

    fn r(v: i64) -> Rational64 {
        Rational64::from_integer(v)
    }

    #[test]
    fn definitional_examples() {
        let mut m = Model::new();
        let xs: Vec<_> = (0..3).map(|_| m.add_int_var(1..=3).unwrap()).collect();
        let g = ConstraintSpec::Gcc(GccSpec { vars: xs.clone(), values: vec![1], lower: vec![1], upper: vec![2] });
        assert!(check(&g, &[r(1), r(1), r(3)]));

        let e = ConstraintSpec::Element { index: xs[0], value: xs[1], array: vec![4, 7, 4], base: 0 };
        assert!(check(&e, &[r(2), r(4), r(0)]));
        assert!(!check(&e, &[r(3), r(4), r(0)]));

        let mut m = Model::new();
        let xs: Vec<_> = (0..3).map(|_| m.add_int_var(1..=3).unwrap()).collect();
        let z = m.add_num_var(0.0, 5.0).unwrap();
        let s = m.add_num_var(0.0, 5.0).unwrap();
        let d = ConstraintSpec::Deviation { vars: xs, mean: z, dev: s };
        assert!(check(&d, &[r(1), r(2), r(3), r(2), r(2)]));
        assert!(!check(&d, &[r(1), r(2), r(3), r(2), r(3)]));
    }

    #[test]
    fn enumerates_negative_table() {
        let mut m = Model::new();
        let x = m.add_int_var([1, 2]).unwrap();
        let y = m.add_int_var([1, 2]).unwrap();
        m.post(ConstraintSpec::NegativeTable { vars: vec![x, y], tuples: vec![vec![1, 1], vec![2, 2]] }).unwrap();
        let s = enumerate_cp(&m, DEFAULT_CAP).unwrap();
        assert_eq!(s.assignments, BTreeSet::from([vec![1, 2], vec![2, 1]]));
    }

    #[test]
    fn cap_is_enforced() {
        let mut m = Model::new();
        for _ in 0..3 {
            m.add_int_var(1..=4).unwrap();
        }
        assert!(matches!(enumerate_cp(&m, 10), Err(OracleError::TooLarge { size: 64, cap: 10 })));
    }

    #[test]
    fn derived_numerics_respect_bounds() {
        let mut m = Model::new();
        let x = m.add_int_var(0..=4).unwrap();
        let y = m.add_int_var(0..=4).unwrap();
        let a = m.add_num_var(0.0, 2.0).unwrap();
        m.post(ConstraintSpec::AbsDistance { x, y, abs: a }).unwrap();
        let s = enumerate_cp(&m, DEFAULT_CAP).unwrap();
        assert!(s.assignments.iter().all(|t| (t[0] - t[1]).abs() <= 2));
        assert_eq!(s.len(), 5 + 2 * 4 + 2 * 3);
    }

    #[test]
    fn free_gap_is_existential() {
        let mut m = Model::new();
        let xs: Vec<_> = (0..3).map(|_| m.add_int_var(0..=4).unwrap()).collect();
        let p = m.add_num_var(2.0, 10.0).unwrap();
        m.post(ConstraintSpec::InterDistance { vars: xs, gap: p }).unwrap();
        m.set_objective(Sense::Maximize, vec![(1.0, p)]).unwrap();
        let s = enumerate_cp(&m, DEFAULT_CAP).unwrap();
        assert_eq!(s.len(), 6);
        assert!(matches!(optimum(&m, DEFAULT_CAP), Err(OracleError::Unsupported(_))));
    }

    #[test]
    fn unsupported_numeric_use() {
        let mut m = Model::new();
        let x = m.add_num_var(0.0, 1.0).unwrap();
        m.post(ConstraintSpec::Linear { terms: vec![(1.0, x)], relation: crate::model::Relation::Le, rhs: 1.0 })
            .unwrap();
        assert!(matches!(enumerate_cp(&m, DEFAULT_CAP), Err(OracleError::Unsupported(_))));
    }

    #[test]
    fn reified_truth_matches() {
        let mut m = Model::new();
        let x = m.add_int_var(0..=2).unwrap();
        let (_, rv) = m.reify(ConstraintSpec::PositiveTable { vars: vec![x], tuples: vec![vec![1]] }).unwrap();
        let s = enumerate_cp(&m, DEFAULT_CAP).unwrap();
        assert_eq!(s.assignments, BTreeSet::from([vec![0, 0], vec![1, 1], vec![2, 0]]));
        assert_eq!(rv.index(), 1);
    }
}
