//! Positive, negative and reified table encodings, plus the constraints that
//! compile to tables (`Element`, products, powers).

use std::collections::HashSet;

use super::{emit_contradiction, Affine, DomainEncoding, Lit};
use crate::milp::{IrError, MilpProgram, MilpVarId, Relation, VarOrigin};
use crate::model::{ConstraintSpec, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Allowed,
    Forbidden,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TableEncoding {
    /// Tuples that survived domain filtering, in input order.
    pub tuples: Vec<Vec<i64>>,
    /// One indicator per surviving tuple (empty for hard negative tables).
    pub tuple_vars: Vec<MilpVarId>,
    /// Indices of the emitted rows.
    pub rows: Vec<usize>,
}

/// Indicator literals of `tuple` over `vars`, or `None` if some value is out of domain.
fn tuple_lits(enc: &DomainEncoding, vars: &[VarId], tuple: &[i64]) -> Option<Vec<Lit>> {
    vars.iter().zip(tuple).map(|(&v, &val)| enc.indicator(v, val)).collect()
}

/// Drops duplicate tuples and tuples with out-of-domain values.
fn filter(enc: &DomainEncoding, vars: &[VarId], tuples: &[Vec<i64>]) -> Vec<(Vec<i64>, Vec<Lit>)> {
    let mut seen = HashSet::new();
    tuples
        .iter()
        .filter(|t| seen.insert(t.as_slice()))
        .filter_map(|t| tuple_lits(enc, vars, t).map(|l| (t.clone(), l)))
        .collect()
}

/// `|scope| * b_tau - sum(indicators of tau) <= 0` per tuple, plus `sum b_tau >= 1`.
pub fn linearize_positive_table(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    prefix: &str,
    cid: usize,
    vars: &[VarId],
    tuples: &[Vec<i64>],
) -> Result<TableEncoding, IrError> {
    let tag = format!("{prefix}:table");
    let kept = filter(enc, vars, tuples);
    let mut out = TableEncoding::default();
    if kept.is_empty() {
        out.rows.push(emit_contradiction(program, format!("{prefix}_empty"), &tag)?);
        return Ok(out);
    }
    let n = vars.len() as f64;
    let mut cover = Affine::new();
    for (k, (tuple, lits)) in kept.into_iter().enumerate() {
        let b = program.add_binary(format!("btau_{cid}_{k}"), VarOrigin::TupleIndicator { constraint: cid, tuple: k })?;
        let mut row = Affine::new();
        row.var(n, b);
        for &l in &lits {
            row.lit(-1.0, l);
        }
        out.rows.push(row.emit(program, format!("{prefix}_tab{k}"), Relation::Le, 0.0, &tag)?);
        cover.var(1.0, b);
        out.tuple_vars.push(b);
        out.tuples.push(tuple);
    }
    out.rows.push(cover.emit(program, format!("{prefix}_cover"), Relation::Ge, 1.0, &tag)?);
    Ok(out)
}

/// `sum(indicators of tau) <= |scope| - 1` per forbidden tuple. No new variables.
pub fn linearize_negative_table(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    prefix: &str,
    vars: &[VarId],
    tuples: &[Vec<i64>],
) -> Result<TableEncoding, IrError> {
    let tag = format!("{prefix}:negative_table");
    let n = vars.len() as f64;
    let mut out = TableEncoding::default();
    for (k, (tuple, lits)) in filter(enc, vars, tuples).into_iter().enumerate() {
        let mut row = Affine::new();
        for &l in &lits {
            row.lit(1.0, l);
        }
        out.rows.push(row.emit(program, format!("{prefix}_forbid{k}"), Relation::Le, n - 1.0, &tag)?);
        out.tuples.push(tuple);
    }
    Ok(out)
}

/// Truth of a table channelled to `r`, with one indicator per tuple.
///
/// Each indicator is forced both ways: `b_tau = 1` iff the scope takes `tau`.
/// Then `sum b_tau - r = 0` for allowed tuples or `sum b_tau + r = 1` for
/// forbidden ones.
#[allow(clippy::too_many_arguments)]
pub fn reify_table(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    prefix: &str,
    cid: usize,
    vars: &[VarId],
    tuples: &[Vec<i64>],
    polarity: Polarity,
    r: Lit,
) -> Result<TableEncoding, IrError> {
    let tag = format!("{prefix}:reified_table");
    let n = vars.len() as f64;
    let mut out = TableEncoding::default();
    let mut agg = Affine::new();
    for (k, (tuple, lits)) in filter(enc, vars, tuples).into_iter().enumerate() {
        let b = program.add_binary(format!("btau_{cid}_{k}"), VarOrigin::TupleIndicator { constraint: cid, tuple: k })?;
        let mut only_if = Affine::new();
        only_if.var(n, b);
        let mut only_if_not = Affine::new();
        only_if_not.var(-n, b);
        for &l in &lits {
            only_if.lit(-1.0, l);
            only_if_not.lit(1.0, l);
        }
        out.rows.push(only_if.emit(program, format!("{prefix}_in{k}"), Relation::Le, 0.0, &tag)?);
        out.rows.push(only_if_not.emit(program, format!("{prefix}_out{k}"), Relation::Le, n - 1.0, &tag)?);
        agg.var(1.0, b);
        out.tuple_vars.push(b);
        out.tuples.push(tuple);
    }
    let (coef, rhs) = match polarity {
        Polarity::Allowed => (-1.0, 0.0),
        Polarity::Forbidden => (1.0, 1.0),
    };
    agg.lit(coef, r);
    out.rows.push(agg.emit(program, format!("{prefix}_reif"), Relation::Eq, rhs, &tag)?);
    Ok(out)
}

/// Candidate `(index, array[index - base])` tuples of an `Element` constraint.
pub(crate) fn element_tuples(array: &[i64], base: i64) -> Vec<Vec<i64>> {
    array.iter().enumerate().map(|(k, &v)| vec![k as i64 + base, v]).collect()
}

/// `Element` as the positive table `{(k, t[k])}` restricted to both domains.
#[allow(clippy::too_many_arguments)]
pub fn linearize_element(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    prefix: &str,
    cid: usize,
    index: VarId,
    value: VarId,
    array: &[i64],
    base: i64,
) -> Result<TableEncoding, IrError> {
    linearize_positive_table(program, enc, prefix, cid, &[index, value], &element_tuples(array, base))
}

/// Allowed tuples of `z = x * y` or `z = x ^ k` over the current domains.
/// Returns the scope and the tuples, or `None` on 64-bit overflow.
pub fn expand_arithmetic(spec: &ConstraintSpec, enc: &DomainEncoding) -> Option<(Vec<VarId>, Vec<Vec<i64>>)> {
    match spec {
        ConstraintSpec::Product { x, y, z } => {
            let mut tuples = Vec::new();
            for &u in enc.domain(*x) {
                for &v in enc.domain(*y) {
                    let p = u.checked_mul(v)?;
                    if enc.indicator(*z, p).is_some() {
                        tuples.push(vec![u, v, p]);
                    }
                }
            }
            Some((vec![*x, *y, *z], tuples))
        }
        ConstraintSpec::Power { x, exponent, z } => {
            let mut tuples = Vec::new();
            for &u in enc.domain(*x) {
                let p = u.checked_pow(*exponent)?;
                if enc.indicator(*z, p).is_some() {
                    tuples.push(vec![u, p]);
                }
            }
            Some((vec![*x, *z], tuples))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::linearize_model;
    use crate::model::Model;

    fn encode(m: &Model) -> (MilpProgram, DomainEncoding) {
        let mut p = MilpProgram::new();
        let enc = DomainEncoding::encode(m, &mut p).unwrap();
        (p, enc)
    }

    #[test]
    fn positive_table_counts() {
        let mut m = Model::new();
        let xs: Vec<_> = (0..3).map(|_| m.add_int_var(1..=3).unwrap()).collect();
        let (mut p, enc) = encode(&m);
        let before = p.stats();
        let tuples: Vec<Vec<i64>> = vec![vec![1, 1, 1], vec![1, 2, 3], vec![2, 2, 2], vec![3, 2, 1], vec![3, 3, 3]];
        let te = linearize_positive_table(&mut p, &enc, "c0", 0, &xs, &tuples).unwrap();
        let after = p.stats();
        assert_eq!(after.binaries - before.binaries, 5);
        assert_eq!(after.rows() - before.rows(), 6);
        assert_eq!(te.tuple_vars.len(), 5);
    }

    #[test]
    fn out_of_domain_tuples_are_filtered() {
        let mut m = Model::new();
        let xs: Vec<_> = (0..3).map(|_| m.add_int_var([1, 3, 4]).unwrap()).collect();
        let (mut p, enc) = encode(&m);
        let te = linearize_positive_table(&mut p, &enc, "c0", 0, &xs, &[vec![1, 1, 1], vec![2, 2, 2]]).unwrap();
        assert_eq!(te.tuples, vec![vec![1, 1, 1]]);
        let te = linearize_negative_table(&mut p, &enc, "c1", &xs, &[vec![5, 1, 1]]).unwrap();
        assert!(te.rows.is_empty());
    }

    #[test]
    fn empty_positive_table_emits_contradiction() {
        let mut m = Model::new();
        let x = m.add_int_var([1, 2]).unwrap();
        let (mut p, enc) = encode(&m);
        let te = linearize_positive_table(&mut p, &enc, "c0", 0, &[x], &[vec![7]]).unwrap();
        let row = &p.constraints[te.rows[0]];
        assert!(row.terms.is_empty());
        assert_eq!((row.relation, row.rhs), (Relation::Ge, 1.0));
    }

    #[test]
    fn negative_table_counts() {
        let mut m = Model::new();
        let x = m.add_int_var(1..=3).unwrap();
        let y = m.add_int_var(1..=3).unwrap();
        let (mut p, enc) = encode(&m);
        let before = p.stats();
        let tuples: Vec<Vec<i64>> = (1..=3).map(|v| vec![v, v]).collect();
        linearize_negative_table(&mut p, &enc, "c0", &[x, y], &tuples).unwrap();
        let after = p.stats();
        assert_eq!(after.vars(), before.vars());
        assert_eq!(after.rows() - before.rows(), 3);
    }

    #[test]
    fn element_tuples_are_filtered_by_domains() {
        let mut m = Model::new();
        let i = m.add_int_var([0, 1, 2]).unwrap();
        let v = m.add_int_var([4, 7]).unwrap();
        let (mut p, enc) = encode(&m);
        let te = linearize_element(&mut p, &enc, "c0", 0, i, v, &[4, 7, 4], 0).unwrap();
        assert_eq!(te.tuples, vec![vec![0, 4], vec![1, 7], vec![2, 4]]);

        let mut m = Model::new();
        let i = m.add_int_var([0, 1, 2]).unwrap();
        let v = m.add_int_var([7]).unwrap();
        let (mut p, enc) = encode(&m);
        let te = linearize_element(&mut p, &enc, "c0", 0, i, v, &[4, 7, 4], 0).unwrap();
        assert_eq!(te.tuples, vec![vec![1, 7]]);
    }

    #[test]
    fn arithmetic_expansion() {
        let mut m = Model::new();
        let x = m.add_int_var(-2..=2).unwrap();
        let z = m.add_int_var([0, 1, 4]).unwrap();
        let (_, enc) = encode(&m);
        let (_, t) = expand_arithmetic(&ConstraintSpec::Power { x, exponent: 2, z }, &enc).unwrap();
        assert_eq!(t, vec![vec![-2, 4], vec![-1, 1], vec![0, 0], vec![1, 1], vec![2, 4]]);

        let mut m = Model::new();
        let a = m.add_int_var([-1, 1]).unwrap();
        let b = m.add_int_var([-1, 1]).unwrap();
        let c = m.add_int_var([-1, 1]).unwrap();
        let (_, enc) = encode(&m);
        let (_, t) = expand_arithmetic(&ConstraintSpec::Product { x: a, y: b, z: c }, &enc).unwrap();
        assert_eq!(t, vec![vec![-1, -1, 1], vec![-1, 1, -1], vec![1, -1, -1], vec![1, 1, 1]]);

        let mut m = Model::new();
        let a = m.add_int_var([i64::MAX]).unwrap();
        let b = m.add_int_var([2]).unwrap();
        let c = m.add_int_var([0]).unwrap();
        m.post(ConstraintSpec::Product { x: a, y: b, z: c }).unwrap();
        assert!(matches!(linearize_model(&m), Err(crate::linearize::LinearizeError::Overflow(0))));
    }

    #[test]
    fn reified_table_counts() {
        let mut m = Model::new();
        let x = m.add_int_var(1..=3).unwrap();
        let y = m.add_int_var(1..=3).unwrap();
        let r = m.add_bool_var();
        let (mut p, enc) = encode(&m);
        let before = p.stats();
        let tuples = vec![vec![1, 1], vec![2, 3], vec![3, 1]];
        let rl = enc.indicator(r, 1).unwrap();
        reify_table(&mut p, &enc, "c0", 0, &[x, y], &tuples, Polarity::Allowed, rl).unwrap();
        let after = p.stats();
        // r_c itself is the model's 0/1 variable, already counted in `before`.
        assert_eq!(after.binaries - before.binaries + 1, tuples.len() + 1);
        assert_eq!(after.rows() - before.rows(), 2 * tuples.len() + 1);
    }
}
