//! `abs = |x - y|` and the constraints built on it (Deviation, InterDistance).
//!
//! Works on MILP variables of any kind; only their bounds matter. With
//! `d = lb(x) - ub(y)` and `D = ub(x) - lb(y)`:
//! - `D <= 0`: `abs = y - x`;
//! - `d >= 0`: `abs = x - y`;
//! - otherwise `x - y` is split into a positive and a negative part whose
//!   complementarity is enforced by one binary with `D` and `|d|` as big-M.

use super::{emit_contradiction, Affine, LinearizeError};
use crate::milp::{MilpProgram, MilpVarId, MilpVarKind, Relation, VarOrigin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsCase {
    NonPositiveDiff,
    NonNegativeDiff,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsEncoding {
    pub case: AbsCase,
    /// Smallest possible value of `x - y`, rounded down.
    pub d: f64,
    /// Largest possible value of `x - y`, rounded up.
    pub big_d: f64,
    /// Bounds `[a, A]` on `|x - y|`.
    pub a: f64,
    pub big_a: f64,
    /// `(dif, difp, difn, b)` in the mixed case.
    pub split: Option<(MilpVarId, MilpVarId, MilpVarId, MilpVarId)>,
    pub rows: Vec<usize>,
}

/// Error-free subtraction: returns `a - b` and the rounding error `(a - b) - fl(a - b)`.
fn two_diff(a: f64, b: f64) -> (f64, f64) {
    let s = a - b;
    let bb = s - a;
    let err = (a - (s - bb)) - (b + bb);
    (s, err)
}

fn sub_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_diff(a, b);
    if e < 0.0 {
        s.next_down()
    } else {
        s
    }
}

fn sub_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_diff(a, b);
    if e > 0.0 {
        s.next_up()
    } else {
        s
    }
}

/// `(d, D)`: outward-rounded range of `x - y`.
fn diff_range(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    (sub_down(x.0, y.1), sub_up(x.1, y.0))
}

/// Range `[a, A]` of `|x - y|` given the bounds of `x` and `y`.
pub fn abs_range(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (d, big_d) = diff_range(x, y);
    if big_d <= 0.0 {
        (-big_d, -d)
    } else if d >= 0.0 {
        (d, big_d)
    } else {
        (0.0, (-d).max(big_d))
    }
}

fn bounds(program: &MilpProgram, v: MilpVarId) -> Result<(f64, f64), LinearizeError> {
    let var = program.var(v);
    if !var.lb.is_finite() || !var.ub.is_finite() {
        return Err(LinearizeError::InvalidBounds(var.name.clone()));
    }
    Ok((var.lb, var.ub))
}

pub fn linearize_abs(
    program: &mut MilpProgram,
    prefix: &str,
    cid: usize,
    x: MilpVarId,
    y: MilpVarId,
    abs: MilpVarId,
) -> Result<AbsEncoding, LinearizeError> {
    let tag = format!("{prefix}:abs");
    let bx = bounds(program, x)?;
    let by = bounds(program, y)?;
    bounds(program, abs)?;
    let (d, big_d) = diff_range(bx, by);
    let (a, big_a) = abs_range(bx, by);
    let mut rows = Vec::new();
    if program.tighten_bounds(abs, a, big_a).is_err() {
        rows.push(emit_contradiction(program, format!("{prefix}_absrange"), &tag)?);
    }
    let case = if big_d <= 0.0 {
        AbsCase::NonPositiveDiff
    } else if d >= 0.0 {
        AbsCase::NonNegativeDiff
    } else {
        AbsCase::Mixed
    };
    let mut split = None;
    match case {
        AbsCase::NonPositiveDiff => {
            let mut row = Affine::new();
            row.var(1.0, abs).var(-1.0, y).var(1.0, x);
            rows.push(row.emit(program, format!("{prefix}_abs"), Relation::Eq, 0.0, &tag)?);
        }
        AbsCase::NonNegativeDiff => {
            let mut row = Affine::new();
            row.var(1.0, abs).var(-1.0, x).var(1.0, y);
            rows.push(row.emit(program, format!("{prefix}_abs"), Relation::Eq, 0.0, &tag)?);
        }
        AbsCase::Mixed => {
            let neg = -d;
            let aux = |role| VarOrigin::AbsAux { constraint: cid, role };
            let dif = program.add_var(format!("{prefix}_dif"), MilpVarKind::Continuous, d, big_d, aux("dif"))?;
            let difp = program.add_var(format!("{prefix}_difp"), MilpVarKind::Continuous, 0.0, big_d, aux("difp"))?;
            let difn = program.add_var(format!("{prefix}_difn"), MilpVarKind::Continuous, 0.0, neg, aux("difn"))?;
            let b = program.add_binary(format!("{prefix}_sgn"), aux("b"))?;

            let mut r1 = Affine::new();
            r1.var(1.0, dif).var(-1.0, x).var(1.0, y);
            rows.push(r1.emit(program, format!("{prefix}_dif"), Relation::Eq, 0.0, &tag)?);
            let mut r5 = Affine::new();
            r5.var(1.0, dif).var(-1.0, difp).var(1.0, difn);
            rows.push(r5.emit(program, format!("{prefix}_split"), Relation::Eq, 0.0, &tag)?);
            let mut r6 = Affine::new();
            r6.var(1.0, difp).var(-big_d, b);
            rows.push(r6.emit(program, format!("{prefix}_pos"), Relation::Le, 0.0, &tag)?);
            let mut r7 = Affine::new();
            r7.var(1.0, difn).var(neg, b);
            rows.push(r7.emit(program, format!("{prefix}_neg"), Relation::Le, neg, &tag)?);
            let mut r8 = Affine::new();
            r8.var(1.0, abs).var(-1.0, difp).var(-1.0, difn);
            rows.push(r8.emit(program, format!("{prefix}_abs"), Relation::Eq, 0.0, &tag)?);
            split = Some((dif, difp, difn, b));
        }
    }
    Ok(AbsEncoding { case, d, big_d, a, big_a, split, rows })
}

/// `n * mean - sum x_i = 0`, `dev - sum abs_i = 0`, with `abs_i = |x_i - mean|`.
pub fn linearize_deviation(
    program: &mut MilpProgram,
    prefix: &str,
    cid: usize,
    xs: &[MilpVarId],
    mean: MilpVarId,
    dev: MilpVarId,
) -> Result<Vec<AbsEncoding>, LinearizeError> {
    let tag = format!("{prefix}:deviation");
    let bz = bounds(program, mean)?;
    let mut encs = Vec::with_capacity(xs.len());
    let mut sum_abs = Affine::new();
    sum_abs.var(1.0, dev);
    for (i, &x) in xs.iter().enumerate() {
        let (a, big_a) = abs_range(bounds(program, x)?, bz);
        let abs = program.add_var(
            format!("{prefix}_abs{i}"),
            MilpVarKind::Continuous,
            a,
            big_a,
            VarOrigin::AbsAux { constraint: cid, role: "abs" },
        )?;
        encs.push(linearize_abs(program, &format!("{prefix}_d{i}"), cid, x, mean, abs)?);
        sum_abs.var(-1.0, abs);
    }
    let mut mean_row = Affine::new();
    mean_row.var(xs.len() as f64, mean);
    for &x in xs {
        mean_row.var(-1.0, x);
    }
    mean_row.emit(program, format!("{prefix}_mean"), Relation::Eq, 0.0, &tag)?;
    sum_abs.emit(program, format!("{prefix}_sum"), Relation::Eq, 0.0, &tag)?;
    Ok(encs)
}

/// `|x_i - x_j| >= gap` for every pair `i < j`.
pub fn linearize_interdistance(
    program: &mut MilpProgram,
    prefix: &str,
    cid: usize,
    xs: &[MilpVarId],
    gap: MilpVarId,
) -> Result<Vec<AbsEncoding>, LinearizeError> {
    let tag = format!("{prefix}:interdistance");
    let mut encs = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let (a, big_a) = abs_range(bounds(program, xs[i])?, bounds(program, xs[j])?);
            let abs = program.add_var(
                format!("{prefix}_abs{i}_{j}"),
                MilpVarKind::Continuous,
                a,
                big_a,
                VarOrigin::AbsAux { constraint: cid, role: "abs" },
            )?;
            encs.push(linearize_abs(program, &format!("{prefix}_p{i}_{j}"), cid, xs[i], xs[j], abs)?);
            let mut row = Affine::new();
            row.var(1.0, abs).var(-1.0, gap);
            row.emit(program, format!("{prefix}_gap{i}_{j}"), Relation::Ge, 0.0, &tag)?;
        }
    }
    Ok(encs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(p: &mut MilpProgram, name: &str, lb: f64, ub: f64) -> MilpVarId {
        p.add_var(name, MilpVarKind::Continuous, lb, ub, VarOrigin::Free).unwrap()
    }

    #[test]
    fn disjoint_intervals_use_a_single_row() {
        let mut p = MilpProgram::new();
        let x = var(&mut p, "x", 0.0, 5.0);
        let y = var(&mut p, "y", 7.0, 10.0);
        let abs = var(&mut p, "abs", 0.0, 100.0);
        let e = linearize_abs(&mut p, "c0", 0, x, y, abs).unwrap();
        assert_eq!(e.case, AbsCase::NonPositiveDiff);
        assert_eq!((e.d, e.big_d), (-10.0, -2.0));
        assert_eq!(e.rows.len(), 1);
        let row = &p.constraints[0];
        assert_eq!(row.terms, vec![(1.0, abs), (-1.0, y), (1.0, x)]);
        assert_eq!((p.var(abs).lb, p.var(abs).ub), (2.0, 10.0));

        let e = linearize_abs(&mut p, "c1", 1, y, x, abs).unwrap();
        assert_eq!(e.case, AbsCase::NonNegativeDiff);
    }

    #[test]
    fn mixed_case_builds_split() {
        let mut p = MilpProgram::new();
        let x = var(&mut p, "x", -3.0, 3.0);
        let y = var(&mut p, "y", -1.0, 2.0);
        let abs = var(&mut p, "abs", 0.0, 100.0);
        let e = linearize_abs(&mut p, "c0", 0, x, y, abs).unwrap();
        assert_eq!(e.case, AbsCase::Mixed);
        assert_eq!((e.d, e.big_d, e.a, e.big_a), (-5.0, 4.0, 0.0, 5.0));
        let (dif, difp, difn, b) = e.split.unwrap();
        assert_eq!((p.var(dif).lb, p.var(dif).ub), (-5.0, 4.0));
        assert_eq!(p.var(difp).ub, 4.0);
        assert_eq!(p.var(difn).ub, 5.0);
        assert_eq!(p.var(b).kind, MilpVarKind::Binary);
        assert_eq!(e.rows.len(), 5);
    }

    #[test]
    fn outward_rounding() {
        assert_eq!(sub_down(3.0, 1.0), 2.0);
        // 1 - 1e-20 rounds to 1; the bounds must straddle the exact value.
        assert!(sub_down(1.0, 1e-20) < 1.0);
        assert_eq!(sub_up(1.0, 1e-20), 1.0);
        assert_eq!(sub_down(1e-20, 1.0), -1.0);
        assert!(sub_up(1e-20, 1.0) > -1.0);
        let (lo, hi) = abs_range((0.1, 0.1), (0.3, 0.3));
        assert!(lo <= 0.3 - 0.1 && hi >= 0.3 - 0.1 && hi - lo < 1e-15);
    }

    #[test]
    fn infinite_bounds_rejected() {
        let mut p = MilpProgram::new();
        let x = var(&mut p, "x", 0.0, f64::INFINITY);
        let y = var(&mut p, "y", 0.0, 1.0);
        let abs = var(&mut p, "abs", 0.0, 1.0);
        assert!(matches!(linearize_abs(&mut p, "c0", 0, x, y, abs), Err(LinearizeError::InvalidBounds(_))));
    }
}
