//! Depth-first branch-and-bound with linear-activity bound propagation.

use std::collections::VecDeque;

use web_time::Instant;

use super::{BranchOrder, SearchMode, SolveError, SolveParams, ValueOrder};
use crate::milp::{MilpProgram, MilpVarKind, Relation, Sense};

const FEAS_TOL: f64 = 1e-9;
const INT_TOL: f64 = 1e-6;
/// Minimum strict improvement required of a new incumbent.
const IMPROVE: f64 = 1e-6;

struct Row {
    vars: Vec<usize>,
    coefs: Vec<f64>,
    lo: f64,
    hi: f64,
}

#[derive(Clone)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Variable fixed by the branching decision that created this node.
    branched: Option<usize>,
}

pub(crate) struct Outcome {
    pub solutions: Vec<Vec<f64>>,
    pub best: Option<(f64, Vec<f64>)>,
    pub exhausted: bool,
    pub timed_out: bool,
    pub cap_exceeded: bool,
    pub underdetermined: bool,
    pub nodes: u64,
}

pub(crate) struct Search<'a> {
    program: &'a MilpProgram,
    params: &'a SolveParams,
    rows: Vec<Row>,
    occurs: Vec<Vec<usize>>,
    is_int: Vec<bool>,
    order: Vec<usize>,
    /// Objective in maximization form: `sign * objective`.
    obj: Vec<(usize, f64)>,
    obj_const: f64,
    obj_row: Option<usize>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

enum Tighten {
    None,
    All,
}

impl<'a> Search<'a> {
    pub(crate) fn new(program: &'a MilpProgram, params: &'a SolveParams) -> Result<Self, SolveError> {
        for v in &program.vars {
            if !v.lb.is_finite() || !v.ub.is_finite() {
                return Err(SolveError::UnboundedVariable(v.name.clone()));
            }
        }
        let n = program.vars.len();
        let mut rows = Vec::with_capacity(program.constraints.len() + 1);
        let mut occurs = vec![Vec::new(); n];
        for c in &program.constraints {
            let (lo, hi) = match c.relation {
                Relation::Le => (f64::NEG_INFINITY, c.rhs),
                Relation::Ge => (c.rhs, f64::INFINITY),
                Relation::Eq => (c.rhs, c.rhs),
            };
            for &(_, v) in &c.terms {
                occurs[v.0].push(rows.len());
            }
            rows.push(Row {
                vars: c.terms.iter().map(|t| t.1 .0).collect(),
                coefs: c.terms.iter().map(|t| t.0).collect(),
                lo,
                hi,
            });
        }
        let is_int: Vec<bool> = program.vars.iter().map(|v| v.kind != MilpVarKind::Continuous).collect();
        let mut order: Vec<usize> = (0..n).filter(|&i| is_int[i]).collect();
        if params.branch_order == BranchOrder::MostConstrainedFirst {
            order.sort_by(|&a, &b| occurs[b].len().cmp(&occurs[a].len()).then(a.cmp(&b)));
        }

        let mut obj = Vec::new();
        let mut obj_const = 0.0;
        let mut obj_row = None;
        if let Some(o) = &program.objective {
            let sign = match o.sense {
                Sense::Maximize => 1.0,
                Sense::Minimize => -1.0,
            };
            obj = o.terms.iter().map(|&(c, v)| (v.0, sign * c)).collect();
            obj_const = sign * o.constant;
            if params.mode == SearchMode::ProveOptimal {
                obj_row = Some(rows.len());
                for &(v, _) in &obj {
                    occurs[v].push(rows.len());
                }
                rows.push(Row {
                    vars: obj.iter().map(|t| t.0).collect(),
                    coefs: obj.iter().map(|t| t.1).collect(),
                    lo: f64::NEG_INFINITY,
                    hi: f64::INFINITY,
                });
            }
        }
        let queued = vec![false; rows.len()];
        Ok(Search { program, params, rows, occurs, is_int, order, obj, obj_const, obj_row, queue: VecDeque::new(), queued })
    }

    fn enqueue(&mut self, r: usize) {
        if !self.queued[r] {
            self.queued[r] = true;
            self.queue.push_back(r);
        }
    }

    fn clear_queue(&mut self) {
        while let Some(r) = self.queue.pop_front() {
            self.queued[r] = false;
        }
    }

    /// Runs the queue to fixpoint. Returns false on a proven empty box.
    fn propagate(&mut self, lo: &mut [f64], hi: &mut [f64], mode: Tighten) -> bool {
        let mut budget = 200 * (self.rows.len() + 16);
        while let Some(r) = self.queue.pop_front() {
            self.queued[r] = false;
            if budget == 0 {
                self.clear_queue();
                return true;
            }
            budget -= 1;
            let row = &self.rows[r];
            let (mut minact, mut maxact) = (0.0, 0.0);
            for (&v, &c) in row.vars.iter().zip(&row.coefs) {
                if c > 0.0 {
                    minact += c * lo[v];
                    maxact += c * hi[v];
                } else {
                    minact += c * hi[v];
                    maxact += c * lo[v];
                }
            }
            let tol_hi = FEAS_TOL * (1.0 + row.hi.abs());
            let tol_lo = FEAS_TOL * (1.0 + row.lo.abs());
            if minact > row.hi + tol_hi || maxact < row.lo - tol_lo {
                self.clear_queue();
                return false;
            }
            if matches!(mode, Tighten::None) {
                continue;
            }
            let mut changed = Vec::new();
            for (&v, &c) in row.vars.iter().zip(&row.coefs) {
                let (min_c, max_c) = if c > 0.0 { (c * lo[v], c * hi[v]) } else { (c * hi[v], c * lo[v]) };
                let (mut new_lo, mut new_hi) = (f64::NEG_INFINITY, f64::INFINITY);
                if row.hi.is_finite() {
                    let bound = (row.hi - (minact - min_c)) / c;
                    if c > 0.0 {
                        new_hi = bound;
                    } else {
                        new_lo = bound;
                    }
                }
                if row.lo.is_finite() {
                    let bound = (row.lo - (maxact - max_c)) / c;
                    if c > 0.0 {
                        new_lo = new_lo.max(bound);
                    } else {
                        new_hi = new_hi.min(bound);
                    }
                }
                let mut touched = false;
                if self.is_int[v] {
                    let nl = (new_lo - INT_TOL).ceil();
                    let nh = (new_hi + INT_TOL).floor();
                    if nl > lo[v] {
                        lo[v] = nl;
                        touched = true;
                    }
                    if nh < hi[v] {
                        hi[v] = nh;
                        touched = true;
                    }
                    if lo[v] > hi[v] {
                        self.clear_queue();
                        return false;
                    }
                } else {
                    let eps = FEAS_TOL * (1.0 + lo[v].abs().max(hi[v].abs()));
                    if new_lo > lo[v] + eps {
                        lo[v] = new_lo;
                        touched = true;
                    }
                    if new_hi < hi[v] - eps {
                        hi[v] = new_hi;
                        touched = true;
                    }
                    if lo[v] > hi[v] {
                        if lo[v] > hi[v] + eps {
                            self.clear_queue();
                            return false;
                        }
                        let mid = 0.5 * (lo[v] + hi[v]);
                        lo[v] = mid;
                        hi[v] = mid;
                    }
                }
                if touched {
                    changed.push(v);
                }
            }
            for v in changed {
                for i in 0..self.occurs[v].len() {
                    let rr = self.occurs[v][i];
                    self.enqueue(rr);
                }
            }
        }
        true
    }

    fn obj_upper(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.obj_const + self.obj.iter().map(|&(v, c)| if c > 0.0 { c * hi[v] } else { c * lo[v] }).sum::<f64>()
    }

    fn obj_value(&self, x: &[f64]) -> f64 {
        self.obj_const + self.obj.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }

    /// Assigns continuous variables once every integer is fixed.
    /// Returns the assignment and whether some value had to be chosen.
    fn resolve_leaf(&mut self, node: &mut Node) -> Option<(Vec<f64>, bool)> {
        let mut chosen = false;
        for r in 0..self.rows.len() {
            if Some(r) != self.obj_row {
                self.enqueue(r);
            }
        }
        loop {
            if !self.propagate(&mut node.lo, &mut node.hi, Tighten::All) {
                return None;
            }
            let open = (0..node.lo.len()).find(|&v| {
                !self.is_int[v] && node.hi[v] - node.lo[v] > 1e-7 * (1.0 + node.lo[v].abs().max(node.hi[v].abs()))
            });
            let Some(v) = open else { break };
            chosen = true;
            let coef = self.obj.iter().find(|t| t.0 == v).map_or(0.0, |t| t.1);
            let value = if coef > 0.0 {
                node.hi[v]
            } else if coef < 0.0 {
                node.lo[v]
            } else {
                0.5 * (node.lo[v] + node.hi[v])
            };
            node.lo[v] = value;
            node.hi[v] = value;
            for i in 0..self.occurs[v].len() {
                let r = self.occurs[v][i];
                if Some(r) != self.obj_row {
                    self.enqueue(r);
                }
            }
        }
        let x: Vec<f64> = node.lo.iter().zip(&node.hi).map(|(&l, &h)| if l == h { l } else { 0.5 * (l + h) }).collect();
        self.program.check(&x, FEAS_TOL).ok()?;
        Some((x, chosen))
    }

    pub(crate) fn run(mut self) -> Outcome {
        let start = Instant::now();
        let deadline = self.params.time_limit.map(|s| s.max(0.0));
        let mut out = Outcome {
            solutions: Vec::new(),
            best: None,
            exhausted: false,
            timed_out: false,
            cap_exceeded: false,
            underdetermined: false,
            nodes: 0,
        };
        let tighten = self.params.propagate;
        let cap = match self.params.mode {
            SearchMode::EnumerateAll(c) => Some(c),
            _ => None,
        };
        let lo: Vec<f64> = self.program.vars.iter().map(|v| v.lb).collect();
        let hi: Vec<f64> = self.program.vars.iter().map(|v| v.ub).collect();
        let mut stack = vec![Node { lo, hi, branched: None }];
        let mut first = true;

        while let Some(mut node) = stack.pop() {
            out.nodes += 1;
            if let Some(limit) = deadline {
                if out.nodes.is_multiple_of(64) && start.elapsed().as_secs_f64() >= limit {
                    out.timed_out = true;
                    return out;
                }
            }
            if first {
                for r in 0..self.rows.len() {
                    self.enqueue(r);
                }
                first = false;
            } else if let Some(v) = node.branched {
                for i in 0..self.occurs[v].len() {
                    let r = self.occurs[v][i];
                    self.enqueue(r);
                }
            }
            if let Some(r) = self.obj_row {
                self.enqueue(r);
            }
            let mode = if tighten { Tighten::All } else { Tighten::None };
            if !self.propagate(&mut node.lo, &mut node.hi, mode) {
                continue;
            }
            if let (Some((best, _)), SearchMode::ProveOptimal) = (&out.best, self.params.mode) {
                if self.obj_upper(&node.lo, &node.hi) < best + IMPROVE {
                    continue;
                }
            }

            let branch = self.order.iter().copied().find(|&v| node.lo[v] < node.hi[v]);
            let Some(v) = branch else {
                let Some((x, chosen)) = self.resolve_leaf(&mut node) else { continue };
                out.underdetermined |= chosen;
                let value = self.obj_value(&x);
                match self.params.mode {
                    SearchMode::FirstFeasible => {
                        out.best = Some((value, x));
                        return out;
                    }
                    SearchMode::ProveOptimal => {
                        if out.best.as_ref().is_none_or(|(b, _)| value >= b + IMPROVE) {
                            if let Some(r) = self.obj_row {
                                self.rows[r].lo = value - self.obj_const + IMPROVE;
                            }
                            out.best = Some((value, x));
                        }
                    }
                    SearchMode::EnumerateAll(_) => {
                        if out.solutions.len() >= cap.unwrap_or(usize::MAX) {
                            out.cap_exceeded = true;
                            return out;
                        }
                        if out.best.as_ref().is_none_or(|(b, _)| value > *b) {
                            out.best = Some((value, x.clone()));
                        }
                        out.solutions.push(x);
                    }
                }
                continue;
            };

            let (l, h) = (node.lo[v], node.hi[v]);
            let binary = self.program.vars[v].kind == MilpVarKind::Binary || (l == 0.0 && h == 1.0);
            let high_first = binary && self.params.value_order == ValueOrder::OneFirst;
            // ZeroFirst and LowFirst coincide: both take the lower value first.
            let mut low = node.clone();
            low.hi[v] = l;
            low.branched = Some(v);
            let mut rest = node;
            rest.lo[v] = l + 1.0;
            rest.branched = Some(v);
            if high_first {
                // Explore v = 1 first: the popped-last child goes first.
                stack.push(low);
                stack.push(rest);
            } else {
                stack.push(rest);
                stack.push(low);
            }
        }
        out.exhausted = true;
        out
    }
}
