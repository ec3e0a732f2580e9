#![allow(dead_code)]

use std::collections::BTreeSet;

use cpmilp::linearize::linearize_model;
use cpmilp::model::{ConstraintSpec, GccSpec, Model, VarId};
use cpmilp::oracle::{enumerate_cp, DEFAULT_CAP};
use cpmilp::solver::{enumerate_all, SolveParams};
use rand::seq::SliceRandom;
use rand::Rng;

/// Distinct values drawn from `-2..=6`.
pub fn random_domain(rng: &mut impl Rng, max_len: usize) -> Vec<i64> {
    let mut pool: Vec<i64> = (-2..=6).collect();
    pool.shuffle(rng);
    let len = rng.gen_range(1..=max_len);
    pool.truncate(len);
    pool
}

/// Distinct variables drawn from `vars`.
pub fn random_scope(rng: &mut impl Rng, vars: &[VarId], min: usize) -> Vec<VarId> {
    let k = rng.gen_range(min.min(vars.len())..=vars.len());
    let mut s = vars.to_vec();
    s.shuffle(rng);
    s.truncate(k.max(1));
    s
}

/// Up to `max` distinct tuples, mostly inside the domains with a few outside values.
pub fn random_tuples(rng: &mut impl Rng, model: &Model, scope: &[VarId], max: usize) -> Vec<Vec<i64>> {
    let mut out = BTreeSet::new();
    for _ in 0..rng.gen_range(0..=max) {
        let t: Vec<i64> = scope
            .iter()
            .map(|&v| {
                let d = model.var(v).domain().unwrap().values();
                if rng.gen_ratio(1, 12) {
                    7
                } else {
                    d[rng.gen_range(0..d.len())]
                }
            })
            .collect();
        out.insert(t);
    }
    out.into_iter().collect()
}

pub fn random_gcc(rng: &mut impl Rng, model: &Model, scope: Vec<VarId>) -> GccSpec {
    let union: BTreeSet<i64> =
        scope.iter().flat_map(|&v| model.var(v).domain().unwrap().values().to_vec()).collect();
    let mut values: Vec<i64> = union.into_iter().collect();
    values.shuffle(rng);
    values.truncate(rng.gen_range(1..=values.len().min(3)));
    if rng.gen_ratio(1, 10) {
        values.push(9);
    }
    let n = scope.len() as u32;
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for _ in &values {
        let lo = rng.gen_range(0..=n.min(2));
        lower.push(lo);
        upper.push(rng.gen_range(lo..=n));
    }
    GccSpec { vars: scope, values, lower, upper }
}

/// 2–4 integer variables with domains of at most 5 values, mixing hard
/// positive tables, negative tables and Gccs.
pub fn random_hard_model(rng: &mut impl Rng) -> Model {
    let mut m = Model::new();
    let vars: Vec<VarId> = (0..rng.gen_range(2..=4)).map(|_| m.add_int_var(random_domain(rng, 5)).unwrap()).collect();
    for _ in 0..rng.gen_range(1..=3) {
        let scope = random_scope(rng, &vars, 1);
        let spec = match rng.gen_range(0..3) {
            0 => ConstraintSpec::PositiveTable { tuples: random_tuples(rng, &m, &scope, 8), vars: scope },
            1 => ConstraintSpec::NegativeTable { tuples: random_tuples(rng, &m, &scope, 8), vars: scope },
            _ => ConstraintSpec::Gcc(random_gcc(rng, &m, scope)),
        };
        m.post(spec).unwrap();
    }
    m
}

/// A reified table (either polarity) or reified Gcc with a free truth
/// variable, occasionally alongside a hard constraint.
pub fn random_reified_model(rng: &mut impl Rng) -> Model {
    let mut m = Model::new();
    let vars: Vec<VarId> = (0..rng.gen_range(2..=3)).map(|_| m.add_int_var(random_domain(rng, 4)).unwrap()).collect();
    for _ in 0..rng.gen_range(1..=2) {
        let scope = random_scope(rng, &vars, 1);
        let spec = match rng.gen_range(0..3) {
            0 => ConstraintSpec::PositiveTable { tuples: random_tuples(rng, &m, &scope, 8), vars: scope },
            1 => ConstraintSpec::NegativeTable { tuples: random_tuples(rng, &m, &scope, 8), vars: scope },
            _ => ConstraintSpec::Gcc(random_gcc(rng, &m, scope)),
        };
        m.reify(spec).unwrap();
    }
    if rng.gen_ratio(1, 4) {
        let scope = random_scope(rng, &vars, 2);
        m.post(ConstraintSpec::NegativeTable { tuples: random_tuples(rng, &m, &scope, 4), vars: scope }).unwrap();
    }
    m
}

/// Projection of every MILP solution onto the model's integer variables.
pub fn milp_solutions(model: &Model, params: &SolveParams) -> BTreeSet<Vec<i64>> {
    let lin = linearize_model(model).unwrap();
    let all = enumerate_all(&lin.program, DEFAULT_CAP as usize, params).unwrap();
    assert!(!all.cap_exceeded);
    let set: BTreeSet<Vec<i64>> = all.solutions.iter().map(|x| lin.project_ints(x)).collect();
    assert_eq!(set.len(), all.solutions.len(), "two MILP solutions project to the same assignment");
    set
}

pub fn oracle_solutions(model: &Model) -> BTreeSet<Vec<i64>> {
    enumerate_cp(model, DEFAULT_CAP).unwrap().assignments
}
