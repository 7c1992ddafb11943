//! Bounds, satisfiability and solution counting for constraints.
//!
//! The constraint is first put in negation normal form and simplified
//! against the attribute domains, then split into conjunctive branches
//! (disjunctive normal form, capped at [`SolverConfig::dnf_cap`] branches).
//! Each branch is narrowed to a hull-consistency fixpoint over its linear
//! atoms. Variables with finitely many values are then searched by
//! bisection, which makes bounds and satisfiability exact on fully
//! enumerable domains. Real-valued variables keep the propagated hull.
//!
//! Every answer is sound: bounds may be wider than the true infimum and
//! supremum, never narrower, and "no" is only answered when no solution
//! exists.

use num_traits::{Signed, Zero};

use super::boxes::{BoxDom, Iv, LinExpr, Truth, VarDom};
use super::{normalize, Atom, Bounds, CmpOp, ConstrainedSchema, Constraint, Term, Type};
use crate::error::{Error, Result};
use crate::value::{Ext, Rational, Value};

const PROPAGATION_ROUNDS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    /// Maximum number of conjunctive branches expanded at once.
    pub dnf_cap: usize,
    /// Default cap on enumerated solutions (and on counting work).
    pub enum_cap: u64,
    /// Search nodes allowed per satisfiability question before giving up
    /// with an "unknown" answer.
    pub search_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { dnf_cap: 64, enum_cap: 1_000_000, search_budget: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Satisfiability {
    Yes,
    No,
    /// Neither a witness nor a refutation was found; callers that need
    /// soundness treat this as "yes".
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolutionCount {
    Count(u128),
    ExceedsCap,
    Infinite,
}

#[derive(Clone, Debug, Default)]
pub struct Solver {
    pub config: SolverConfig,
}

/// A literal of a conjunctive branch, pre-digested for propagation.
#[derive(Clone, Debug)]
struct Lit {
    atom: Atom,
    kind: LitKind,
}

#[derive(Clone, Debug)]
enum LitKind {
    /// `expr op 0`
    Linear(LinExpr, CmpOp),
    Member { var: usize, set: Vec<Value>, negated: bool },
    StrEq { lhs: StrSide, rhs: StrSide, negated: bool },
    /// Only checked, never used to narrow.
    Opaque,
}

#[derive(Clone, Debug)]
enum StrSide {
    Var(usize),
    Const(String),
}

enum Found {
    Sat(Vec<Value>),
    Unsat,
    Unknown,
}

struct Prepared {
    base: BoxDom,
    constraint: Constraint,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        Solver { config }
    }

    fn prepare(&self, c: &Constraint, schema: &ConstrainedSchema) -> Prepared {
        let base = BoxDom::new(schema.scope().map(|a| (a.name.as_str(), &a.domain)));
        let constraint = base.simplify(&normalize(c));
        Prepared { base, constraint }
    }

    /// Sound enclosure of the values attribute `attr` takes in solutions of
    /// `c`; exact when every variable has a finite domain. Returns the
    /// empty marker when `c` has no solution.
    pub fn attribute_bounds(&self, c: &Constraint, schema: &ConstrainedSchema, attr: &str) -> Result<Bounds> {
        let prep = self.prepare(c, schema);
        let idx = prep.base.index(attr).ok_or_else(|| Error::UnknownAttribute(attr.to_string()))?;
        if schema.type_of(attr) != Some(Type::Num) {
            return Err(Error::Type(format!("attribute {attr} is not numeric")));
        }
        let mut acc = Bounds::empty();
        for branch in self.branches(&prep.constraint).0 {
            let lits = compile(&branch, &prep.base);
            let mut b = prep.base.clone();
            if !propagate(&mut b, &lits) {
                continue;
            }
            let found = if b.doms[idx].is_finite() {
                let lo = self.find_extreme(b.clone(), &lits, idx, false);
                let hi = self.find_extreme(b, &lits, idx, true);
                match (lo, hi) {
                    (Some(lo), Some(hi)) => Bounds::closed(Ext::Fin(lo), Ext::Fin(hi)),
                    _ => continue,
                }
            } else {
                let iv = b.doms[idx].range().expect("numeric attribute");
                Bounds { lower: iv.lo.clone(), upper: iv.hi.clone(), lower_open: iv.lo_open, upper_open: iv.hi_open }
            };
            acc = acc.join(&found);
        }
        Ok(acc)
    }

    pub fn satisfiable(&self, c: &Constraint, schema: &ConstrainedSchema) -> Satisfiability {
        let prep = self.prepare(c, schema);
        self.satisfiable_in(&prep.constraint, &prep.base, c, schema)
    }

    fn satisfiable_in(
        &self,
        simplified: &Constraint,
        base: &BoxDom,
        original: &Constraint,
        schema: &ConstrainedSchema,
    ) -> Satisfiability {
        let (branches, exact) = self.branches(simplified);
        let mut unknown = false;
        for branch in branches {
            let lits = compile(&branch, base);
            let mut budget = self.config.search_budget;
            let full = (!exact).then_some(simplified);
            match search(base.clone(), &lits, full, &mut budget) {
                Found::Sat(point) => {
                    if exact || witness_holds(original, schema, &point) {
                        return Satisfiability::Yes;
                    }
                    unknown = true;
                }
                Found::Unsat => {}
                Found::Unknown => unknown = true,
            }
        }
        if unknown {
            Satisfiability::Unknown
        } else {
            Satisfiability::No
        }
    }

    /// Number of distinct tuples over the visible attributes of `schema`
    /// that satisfy `c`, with hidden attributes read existentially.
    pub fn solution_count(&self, c: &Constraint, schema: &ConstrainedSchema, cap: u64) -> SolutionCount {
        let prep = self.prepare(c, schema);
        if prep.constraint == Constraint::False {
            return SolutionCount::Count(0);
        }
        let visible = schema.attributes.len();
        let mut counting = prep.base.clone();
        let (branches, _) = self.branches(&prep.constraint);
        let compiled: Vec<Vec<Lit>> = branches.iter().map(|br| compile(br, &prep.base)).collect();

        let open: Vec<usize> = (0..visible).filter(|&i| !prep.base.doms[i].is_finite()).collect();
        if !open.is_empty() {
            let narrowed: Vec<BoxDom> = compiled
                .iter()
                .filter_map(|lits| {
                    let mut b = prep.base.clone();
                    propagate(&mut b, lits).then_some(b)
                })
                .collect();
            if narrowed.is_empty() {
                return SolutionCount::Count(0);
            }
            for &i in &open {
                let mut values = std::collections::BTreeSet::new();
                for b in &narrowed {
                    match b.doms[i].size() {
                        Some(n) if n <= cap as u128 => values.extend(b.doms[i].values().unwrap()),
                        Some(_) => return SolutionCount::ExceedsCap,
                        None => return SolutionCount::Infinite,
                    }
                }
                let nums: Vec<Rational> = values.into_iter().filter_map(|v| v.as_num().cloned()).collect();
                if nums.is_empty() {
                    return SolutionCount::Count(0);
                }
                counting.doms[i] = VarDom::Num {
                    iv: Iv::closed(Ext::Fin(nums[0].clone()), Ext::Fin(nums[nums.len() - 1].clone())),
                    integral: false,
                    set: Some(nums),
                };
            }
        }

        let mut state = CountState { total: 0, nodes: 0, cap: cap as u128, node_cap: self.config.enum_cap.max(cap) };
        match self.count(&counting, visible, &prep.constraint, &compiled, &mut state) {
            Ok(()) => SolutionCount::Count(state.total),
            Err(()) => SolutionCount::ExceedsCap,
        }
    }

    fn count(
        &self,
        b: &BoxDom,
        visible: usize,
        constraint: &Constraint,
        branches: &[Vec<Lit>],
        state: &mut CountState,
    ) -> std::result::Result<(), ()> {
        state.nodes += 1;
        if state.nodes > state.node_cap as u128 {
            return Err(());
        }
        let add = |state: &mut CountState, n: u128| {
            state.total = state.total.saturating_add(n);
            if state.total > state.cap {
                Err(())
            } else {
                Ok(())
            }
        };
        match b.eval(constraint) {
            Truth::False => Ok(()),
            Truth::True => {
                let n = (0..visible).fold(1u128, |acc, i| acc.saturating_mul(b.doms[i].size().unwrap_or(u128::MAX)));
                add(state, n)
            }
            Truth::Unknown => {
                let split = (0..visible)
                    .filter(|&i| b.doms[i].size().is_some_and(|n| n > 1))
                    .max_by_key(|&i| b.doms[i].size());
                match split {
                    Some(i) => {
                        let (l, r) = b.doms[i].split().expect("finite domain with several values");
                        for half in [l, r] {
                            let mut child = b.clone();
                            child.doms[i] = half;
                            self.count(&child, visible, constraint, branches, state)?;
                        }
                        Ok(())
                    }
                    None => {
                        // visible part fixed: does some completion exist?
                        let mut possible = false;
                        for lits in branches {
                            let mut budget = self.config.search_budget;
                            match search(b.clone(), lits, None, &mut budget) {
                                Found::Unsat => {}
                                _ => {
                                    possible = true;
                                    break;
                                }
                            }
                        }
                        if possible {
                            add(state, 1)
                        } else {
                            Ok(())
                        }
                    }
                }
            }
        }
    }

    /// Largest symmetric difference between two relations built from the
    /// solutions of `c`: the number of solutions, or infinity past `cap`.
    pub fn diameter(&self, c: &Constraint, schema: &ConstrainedSchema, cap: u64) -> Ext {
        match self.solution_count(c, schema, cap) {
            SolutionCount::Count(n) => Ext::Fin(Rational::from_integer(n.into())),
            SolutionCount::ExceedsCap | SolutionCount::Infinite => Ext::PosInf,
        }
    }

    /// Conjunctive branches of an NNF constraint. The flag is false when
    /// some disjunctions had to be dropped to respect the branch cap, in
    /// which case the branches over-approximate the constraint.
    fn branches(&self, c: &Constraint) -> (Vec<Vec<Atom>>, bool) {
        let cap = self.config.dnf_cap.max(1);
        if let Some(b) = dnf(c, cap) {
            return (b, true);
        }
        match c {
            Constraint::Or(cs) => {
                let mut out = Vec::new();
                let mut exact = true;
                for child in cs {
                    let (b, e) = self.branches(child);
                    out.extend(b);
                    exact &= e;
                }
                (out, exact)
            }
            Constraint::And(cs) => {
                let mut parts: Vec<Vec<Vec<Atom>>> = cs.iter().filter_map(|c| dnf(c, cap)).collect();
                parts.sort_by_key(|p| p.len());
                let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
                for p in parts {
                    if acc.len() * p.len() <= cap {
                        acc = product(&acc, &p);
                    }
                }
                (acc, false)
            }
            _ => (vec![Vec::new()], false),
        }
    }

    /// Smallest (or largest) value of variable `idx` over the branch, as a
    /// sound lower (upper) estimate. `None` when the branch is unsatisfiable.
    fn find_extreme(&self, b: BoxDom, lits: &[Lit], idx: usize, largest: bool) -> Option<Rational> {
        let mut budget = self.config.search_budget;
        if let Found::Unsat = search(b.clone(), lits, None, &mut budget) {
            return None;
        }
        let mut b = b;
        if !propagate(&mut b, lits) {
            return None;
        }
        if let Some(v) = b.doms[idx].fixed() {
            return v.as_num().cloned();
        }
        let (low, high) = b.doms[idx].split()?;
        let (first, second) = if largest { (high, low) } else { (low, high) };
        let mut child = b.clone();
        child.doms[idx] = first;
        if let Some(v) = self.find_extreme(child, lits, idx, largest) {
            return Some(v);
        }
        let mut child = b;
        child.doms[idx] = second;
        self.find_extreme(child, lits, idx, largest)
    }
}

struct CountState {
    total: u128,
    nodes: u128,
    cap: u128,
    node_cap: u64,
}

fn witness_holds(c: &Constraint, schema: &ConstrainedSchema, point: &[Value]) -> bool {
    let names: Vec<&str> = schema.scope().map(|a| a.name.as_str()).collect();
    let env = |n: &str| names.iter().position(|x| *x == n).map(|i| point[i].clone());
    c.holds(&env) == Some(true)
}

fn product(a: &[Vec<Atom>], b: &[Vec<Atom>]) -> Vec<Vec<Atom>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut v = x.clone();
            v.extend(y.iter().cloned());
            out.push(v);
        }
    }
    out
}

/// Disjunctive normal form of an NNF constraint, `None` past `cap` branches.
fn dnf(c: &Constraint, cap: usize) -> Option<Vec<Vec<Atom>>> {
    Some(match c {
        Constraint::True => vec![Vec::new()],
        Constraint::False => Vec::new(),
        Constraint::Atom(a) => vec![vec![a.clone()]],
        Constraint::And(cs) => {
            let mut acc = vec![Vec::new()];
            for c in cs {
                let d = dnf(c, cap)?;
                if acc.len() * d.len() > cap {
                    return None;
                }
                acc = product(&acc, &d);
            }
            acc
        }
        Constraint::Or(cs) => {
            let mut acc = Vec::new();
            for c in cs {
                acc.extend(dnf(c, cap)?);
                if acc.len() > cap {
                    return None;
                }
            }
            acc
        }
        Constraint::Not(_) | Constraint::Iff(..) => return dnf(&normalize(c), cap),
    })
}

fn compile(branch: &[Atom], b: &BoxDom) -> Vec<Lit> {
    branch
        .iter()
        .map(|atom| {
            let kind = match atom {
                Atom::Cmp { lhs, op, rhs } => {
                    let side = |t: &Term| match t {
                        Term::Attr(a) => match b.index(a) {
                            Some(i) if matches!(b.doms[i], VarDom::Str(_)) => Some(StrSide::Var(i)),
                            _ => None,
                        },
                        Term::Str(s) => Some(StrSide::Const(s.clone())),
                        _ => None,
                    };
                    match (side(lhs), side(rhs)) {
                        (Some(l), Some(r)) if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                            LitKind::StrEq { lhs: l, rhs: r, negated: *op == CmpOp::Ne }
                        }
                        _ => match LinExpr::of(&Term::sub(lhs.clone(), rhs.clone()), b) {
                            Some(e) => LitKind::Linear(e, *op),
                            None => LitKind::Opaque,
                        },
                    }
                }
                Atom::Member { term: Term::Attr(a), set, negated } => match b.index(a) {
                    Some(var) => LitKind::Member { var, set: set.clone(), negated: *negated },
                    None => LitKind::Opaque,
                },
                Atom::Member { .. } => LitKind::Opaque,
            };
            Lit { atom: atom.clone(), kind }
        })
        .collect()
}

/// Narrows `b` to a hull-consistency fixpoint of `lits`. Returns false when
/// the branch is found to have no solution.
fn propagate(b: &mut BoxDom, lits: &[Lit]) -> bool {
    if b.is_empty() {
        return false;
    }
    for _ in 0..PROPAGATION_ROUNDS {
        let mut changed = false;
        for lit in lits {
            changed |= match &lit.kind {
                LitKind::Linear(e, op) => match op {
                    CmpOp::Le => narrow_le(b, e, false),
                    CmpOp::Lt => narrow_le(b, e, true),
                    CmpOp::Ge => narrow_le(b, &e.clone().negated(), false),
                    CmpOp::Gt => narrow_le(b, &e.clone().negated(), true),
                    CmpOp::Eq => narrow_le(b, e, false) | narrow_le(b, &e.clone().negated(), false),
                    CmpOp::Ne => narrow_ne(b, e),
                },
                LitKind::Member { var, set, negated } => {
                    if *negated {
                        b.doms[*var].remove_values(set)
                    } else {
                        b.doms[*var].retain_values(set)
                    }
                }
                LitKind::StrEq { lhs, rhs, negated } => narrow_str(b, lhs, rhs, *negated),
                LitKind::Opaque => false,
            };
            if b.is_empty() {
                return false;
            }
        }
        if !changed {
            break;
        }
    }
    lits.iter().all(|l| b.eval_atom(&l.atom) != Truth::False)
}

/// `expr <= 0` (or `< 0` when strict): each variable is bounded by the
/// extreme of the remaining terms.
fn narrow_le(b: &mut BoxDom, e: &LinExpr, strict: bool) -> bool {
    let mut changed = false;
    for (&j, c) in &e.coeffs {
        let Some(rest) = e.range_except(b, Some(j)) else { continue };
        let Ext::Fin(rest_lo) = &rest.lo else { continue };
        let bound = -rest_lo / c;
        let open = strict || rest.lo_open;
        changed |= if c.is_positive() { b.doms[j].tighten_hi(&bound, open) } else { b.doms[j].tighten_lo(&bound, open) };
        if b.doms[j].is_empty() {
            return true;
        }
    }
    changed
}

/// `expr != 0` with a single free variable removes the excluded value.
fn narrow_ne(b: &mut BoxDom, e: &LinExpr) -> bool {
    let free: Vec<usize> = e.coeffs.keys().copied().filter(|&i| b.doms[i].fixed().is_none()).collect();
    if free.len() != 1 {
        return false;
    }
    let j = free[0];
    let Some(rest) = e.range_except(b, Some(j)) else { return false };
    let Some(r) = rest.as_point() else { return false };
    let excluded = -r / &e.coeffs[&j];
    debug_assert!(!e.coeffs[&j].is_zero());
    b.doms[j].remove_values(&[Value::Num(excluded)])
}

fn narrow_str(b: &mut BoxDom, lhs: &StrSide, rhs: &StrSide, negated: bool) -> bool {
    let values = |b: &BoxDom, s: &StrSide| -> Vec<Value> {
        match s {
            StrSide::Const(c) => vec![Value::Str(c.clone())],
            StrSide::Var(i) => b.doms[*i].values().unwrap_or_default(),
        }
    };
    let mut changed = false;
    for (target, other) in [(lhs, rhs), (rhs, lhs)] {
        if let StrSide::Var(i) = target {
            let vals = values(b, other);
            if negated {
                if vals.len() == 1 {
                    changed |= b.doms[*i].remove_values(&vals);
                }
            } else {
                changed |= b.doms[*i].retain_values(&vals);
            }
        }
    }
    changed
}

/// Branch-and-prune over finite domains. Real-valued variables are not
/// split; once only they remain, a single witness point is tried. When
/// `full` is given the branch over-approximates it, and a solution must
/// also satisfy `full`.
fn search(mut b: BoxDom, lits: &[Lit], full: Option<&Constraint>, budget: &mut u64) -> Found {
    if *budget == 0 {
        return Found::Unknown;
    }
    *budget -= 1;
    if !propagate(&mut b, lits) {
        return Found::Unsat;
    }
    let full_truth = full.map_or(Truth::True, |c| b.eval(c));
    if full_truth == Truth::False {
        return Found::Unsat;
    }
    if full_truth == Truth::True && lits.iter().all(|l| b.eval_atom(&l.atom) == Truth::True) {
        return match b.doms.iter().map(|d| d.pick()).collect::<Option<Vec<_>>>() {
            Some(p) => Found::Sat(p),
            None => Found::Unsat,
        };
    }
    let split = (0..b.doms.len()).filter(|&i| b.doms[i].size().is_some_and(|n| n > 1)).min_by_key(|&i| b.doms[i].size());
    match split {
        Some(i) => {
            let (l, r) = b.doms[i].split().expect("finite domain with several values");
            let mut unknown = false;
            for half in [l, r] {
                let mut child = b.clone();
                child.doms[i] = half;
                match search(child, lits, full, budget) {
                    Found::Sat(p) => return Found::Sat(p),
                    Found::Unknown => unknown = true,
                    Found::Unsat => {}
                }
            }
            if unknown {
                Found::Unknown
            } else {
                Found::Unsat
            }
        }
        None => {
            let mut w = b;
            for i in 0..w.doms.len() {
                if w.doms[i].fixed().is_none() {
                    let Some(v) = w.doms[i].pick() else { return Found::Unknown };
                    w.doms[i].fix(&v);
                    if !propagate(&mut w, lits) {
                        return Found::Unknown;
                    }
                }
            }
            let full_holds = full.is_none_or(|c| w.eval(c) == Truth::True);
            match w.point() {
                Some(p) if full_holds && lits.iter().all(|l| w.eval_atom(&l.atom) == Truth::True) => Found::Sat(p),
                _ => Found::Unknown,
            }
        }
    }
}
