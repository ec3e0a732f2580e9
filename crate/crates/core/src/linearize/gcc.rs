//! Occurrence constraints: Gcc, its reification, and Alldifferent.

use std::collections::BTreeSet;

use super::{emit_contradiction, linearize_negative_table, Affine, DomainEncoding, Lit};
use crate::milp::{IrError, MilpProgram, MilpVarId, Relation, VarOrigin};
use crate::model::{AlldifferentMode, GccSpec, VarId};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GccEncoding {
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GccReifEncoding {
    /// `lower_flags[k] = 1` iff value k reaches its minimum occurrence count.
    pub lower_flags: Vec<MilpVarId>,
    /// `upper_flags[k] = 1` iff value k stays within its maximum occurrence count.
    pub upper_flags: Vec<MilpVarId>,
    pub rows: Vec<usize>,
}

/// Indicators `x_i = value` over the scope; out-of-domain positions contribute nothing.
fn occurrence_lits(enc: &DomainEncoding, vars: &[VarId], value: i64) -> Vec<Lit> {
    vars.iter().filter_map(|&v| enc.indicator(v, value)).collect()
}

/// Per value: `sum >= lower` (skipped when lower is 0) and `sum <= upper`.
pub fn linearize_gcc(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    prefix: &str,
    gcc: &GccSpec,
) -> Result<GccEncoding, IrError> {
    let tag = format!("{prefix}:gcc");
    let mut out = GccEncoding::default();
    for (k, &value) in gcc.values.iter().enumerate() {
        let lits = occurrence_lits(enc, &gcc.vars, value);
        let mut sum = Affine::new();
        for &l in &lits {
            sum.lit(1.0, l);
        }
        if gcc.lower[k] > 0 {
            if lits.is_empty() {
                out.rows.push(emit_contradiction(program, format!("{prefix}_lo{k}"), &tag)?);
            } else {
                out.rows.push(sum.emit(program, format!("{prefix}_lo{k}"), Relation::Ge, gcc.lower[k] as f64, &tag)?);
            }
        }
        if !lits.is_empty() {
            out.rows.push(sum.emit(program, format!("{prefix}_up{k}"), Relation::Le, gcc.upper[k] as f64, &tag)?);
        }
    }
    Ok(out)
}

/// Removes forbidden tuples that already violate `gcc`.
pub fn prune_negative_table_with_gcc(tuples: &[Vec<i64>], gcc: &GccSpec) -> Vec<Vec<i64>> {
    tuples.iter().filter(|t| gcc.admits(t)).cloned().collect()
}

pub(crate) fn alldifferent_gcc(enc: &DomainEncoding, vars: &[VarId]) -> GccSpec {
    let values: BTreeSet<i64> = vars.iter().flat_map(|&v| enc.domain(v).iter().copied()).collect();
    let n = values.len();
    GccSpec { vars: vars.to_vec(), values: values.into_iter().collect(), lower: vec![0; n], upper: vec![1; n] }
}

pub fn linearize_alldifferent(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    prefix: &str,
    vars: &[VarId],
    mode: AlldifferentMode,
) -> Result<Vec<usize>, IrError> {
    match mode {
        AlldifferentMode::AdHocGcc => Ok(linearize_gcc(program, enc, prefix, &alldifferent_gcc(enc, vars))?.rows),
        AlldifferentMode::NegativeBinaryTables => {
            let mut rows = Vec::new();
            for i in 0..vars.len() {
                for j in i + 1..vars.len() {
                    let dj = enc.domain(vars[j]);
                    let tuples: Vec<Vec<i64>> = enc
                        .domain(vars[i])
                        .iter()
                        .filter(|v| dj.binary_search(v).is_ok())
                        .map(|&v| vec![v, v])
                        .collect();
                    let te =
                        linearize_negative_table(program, enc, &format!("{prefix}_p{i}_{j}"), &[vars[i], vars[j]], &tuples)?;
                    rows.extend(te.rows);
                }
            }
            Ok(rows)
        }
    }
}

/// Truth of a Gcc channelled to `r` through two flags per value.
///
/// With `s` the occurrence count of `t[k]` and `n` the scope size:
/// `s - lo*f_lo >= 0`, `s - (n+1)*f_lo <= lo - 1`,
/// `s + (up+1)*f_up >= up + 1`, `s + n*f_up <= up + n`,
/// then `sum(flags) - r <= 2|t| - 1` and `sum(flags) - 2|t|*r >= 0`.
/// A zero lower bound fixes its flag to 1 instead of emitting the pair.
pub fn reify_gcc(
    program: &mut MilpProgram,
    enc: &DomainEncoding,
    prefix: &str,
    cid: usize,
    gcc: &GccSpec,
    r: Lit,
) -> Result<GccReifEncoding, IrError> {
    let tag = format!("{prefix}:reified_gcc");
    let n = gcc.vars.len() as f64;
    let mut out = GccReifEncoding::default();
    if gcc.values.is_empty() {
        let mut row = Affine::new();
        row.lit(1.0, r);
        out.rows.push(row.emit(program, format!("{prefix}_true"), Relation::Eq, 1.0, &tag)?);
        return Ok(out);
    }
    for (k, &value) in gcc.values.iter().enumerate() {
        let lits = occurrence_lits(enc, &gcc.vars, value);
        let lo = gcc.lower[k] as f64;
        let up = gcc.upper[k] as f64;

        let f_lo = program.add_binary(
            format!("rlo_{cid}_{k}"),
            VarOrigin::OccurrenceFlag { constraint: cid, value, upper: false },
        )?;
        if gcc.lower[k] == 0 {
            program.tighten_bounds(f_lo, 1.0, 1.0)?;
        } else {
            let mut reach = Affine::new();
            let mut miss = Affine::new();
            for &l in &lits {
                reach.lit(1.0, l);
                miss.lit(1.0, l);
            }
            reach.var(-lo, f_lo);
            miss.var(-(n + 1.0), f_lo);
            out.rows.push(reach.emit(program, format!("{prefix}_lo{k}a"), Relation::Ge, 0.0, &tag)?);
            out.rows.push(miss.emit(program, format!("{prefix}_lo{k}b"), Relation::Le, lo - 1.0, &tag)?);
        }

        let f_up = program.add_binary(
            format!("rup_{cid}_{k}"),
            VarOrigin::OccurrenceFlag { constraint: cid, value, upper: true },
        )?;
        let mut over = Affine::new();
        let mut within = Affine::new();
        for &l in &lits {
            over.lit(1.0, l);
            within.lit(1.0, l);
        }
        over.var(up + 1.0, f_up);
        within.var(n, f_up);
        out.rows.push(over.emit(program, format!("{prefix}_up{k}a"), Relation::Ge, up + 1.0, &tag)?);
        out.rows.push(within.emit(program, format!("{prefix}_up{k}b"), Relation::Le, up + n, &tag)?);

        out.lower_flags.push(f_lo);
        out.upper_flags.push(f_up);
    }
    let size = 2.0 * gcc.values.len() as f64;
    let mut all = Affine::new();
    let mut any = Affine::new();
    for &f in out.lower_flags.iter().chain(&out.upper_flags) {
        all.var(1.0, f);
        any.var(1.0, f);
    }
    all.lit(-1.0, r);
    any.lit(-size, r);
    out.rows.push(all.emit(program, format!("{prefix}_all"), Relation::Le, size - 1.0, &tag)?);
    out.rows.push(any.emit(program, format!("{prefix}_any"), Relation::Ge, 0.0, &tag)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    fn setup(n: usize, dom: &[i64]) -> (Model, Vec<VarId>, MilpProgram, DomainEncoding) {
        let mut m = Model::new();
        let xs: Vec<_> = (0..n).map(|_| m.add_int_var(dom.iter().copied()).unwrap()).collect();
        let mut p = MilpProgram::new();
        let enc = DomainEncoding::encode(&m, &mut p).unwrap();
        (m, xs, p, enc)
    }

    #[test]
    fn alldifferent_modes_row_counts() {
        let (_, xs, mut p, enc) = setup(3, &[1, 2, 3]);
        let before = p.stats().rows();
        let rows = linearize_alldifferent(&mut p, &enc, "c0", &xs, AlldifferentMode::AdHocGcc).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|&r| p.constraints[r].relation == Relation::Le && p.constraints[r].rhs == 1.0));
        assert_eq!(p.stats().rows() - before, 3);

        let (_, xs, mut p, enc) = setup(3, &[1, 2, 3]);
        let rows = linearize_alldifferent(&mut p, &enc, "c0", &xs, AlldifferentMode::NegativeBinaryTables).unwrap();
        assert_eq!(rows.len(), 9);
    }

    #[test]
    fn gcc_adds_no_variables() {
        let (_, xs, mut p, enc) = setup(4, &[1, 2, 3]);
        let before = p.stats();
        let g = GccSpec { vars: xs, values: vec![1, 2, 3], lower: vec![1, 0, 2], upper: vec![2, 1, 3] };
        let e = linearize_gcc(&mut p, &enc, "c0", &g).unwrap();
        assert_eq!(p.stats().vars(), before.vars());
        assert_eq!(e.rows.len(), 5);
        assert!(e.rows.len() <= 2 * g.values.len());
    }

    #[test]
    fn gcc_value_absent_from_domains() {
        let (_, xs, mut p, enc) = setup(2, &[1, 2]);
        let g = GccSpec { vars: xs.clone(), values: vec![9], lower: vec![1], upper: vec![1] };
        let e = linearize_gcc(&mut p, &enc, "c0", &g).unwrap();
        assert_eq!(e.rows.len(), 1);
        assert!(p.constraints[e.rows[0]].terms.is_empty());
        let g = GccSpec { vars: xs, values: vec![9], lower: vec![0], upper: vec![1] };
        assert!(linearize_gcc(&mut p, &enc, "c1", &g).unwrap().rows.is_empty());
    }

    #[test]
    fn pruning_by_occurrence_bounds() {
        let g = GccSpec { vars: vec![], values: vec![1], lower: vec![0], upper: vec![1] };
        let pruned = prune_negative_table_with_gcc(&[vec![1, 1, 2], vec![1, 2, 3]], &g);
        assert_eq!(pruned, vec![vec![1, 2, 3]]);
        let empty = GccSpec { vars: vec![], values: vec![], lower: vec![], upper: vec![] };
        assert_eq!(prune_negative_table_with_gcc(&[vec![1, 1]], &empty), vec![vec![1, 1]]);
    }

    #[test]
    fn reified_gcc_counts_and_fixing() {
        let (mut m, xs, _, _) = setup(3, &[1, 2, 3]);
        let r = m.add_bool_var();
        let mut p = MilpProgram::new();
        let enc = DomainEncoding::encode(&m, &mut p).unwrap();
        let before = p.stats();
        let g = GccSpec { vars: xs, values: vec![1, 2], lower: vec![0, 1], upper: vec![2, 1] };
        let e = reify_gcc(&mut p, &enc, "c0", 0, &g, enc.indicator(r, 1).unwrap()).unwrap();
        let after = p.stats();
        assert_eq!(after.binaries - before.binaries + 1, 2 * g.values.len() + 1);
        assert!(after.rows() - before.rows() <= 4 * g.values.len() + 2);
        assert_eq!(e.rows.len(), 2 + 4 + 2);
        let f = p.var(e.lower_flags[0]);
        assert_eq!((f.lb, f.ub), (1.0, 1.0));
    }
}
