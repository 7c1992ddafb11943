//! Constraint system over relation attributes.
//!
//! Terms are built from attribute references, constants and `+ - *`. Atoms
//! compare two terms or test membership in a finite set, and constraints
//! combine atoms with `not`, `and`, `or` and `iff`. A [`ConstrainedSchema`]
//! attaches such a constraint to a relation: every relation over the schema
//! is a subset of the constraint's solution set.
//!
//! Deciding satisfiability and computing per-attribute bounds is the job of
//! [`solver`]; this module only holds the syntax tree and its exact
//! evaluation on a single assignment.

mod boxes;
pub mod solver;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::value::{Ext, Rational, Value};

pub use solver::{Satisfiability, SolutionCount, Solver, SolverConfig};

/// Attribute domain. Intervals are closed; their endpoints may be infinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Int { lo: Ext, hi: Ext },
    Real { lo: Ext, hi: Ext },
    /// Sorted, duplicate-free, non-empty.
    NumSet(Vec<Rational>),
    /// Sorted, duplicate-free, non-empty.
    StrSet(Vec<String>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Type {
    Num,
    Str,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Num => write!(f, "number"),
            Type::Str => write!(f, "string"),
        }
    }
}

impl Domain {
    pub fn int(lo: Ext, hi: Ext) -> Result<Domain> {
        for b in [&lo, &hi] {
            if let Ext::Fin(r) = b {
                if !r.is_integer() {
                    return Err(Error::Schema(format!("integer bound {b} is not an integer")));
                }
            }
        }
        if lo > hi || lo == Ext::PosInf || hi == Ext::NegInf {
            return Err(Error::Schema(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Domain::Int { lo, hi })
    }

    pub fn real(lo: Ext, hi: Ext) -> Result<Domain> {
        if lo > hi || lo == Ext::PosInf || hi == Ext::NegInf {
            return Err(Error::Schema(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Domain::Real { lo, hi })
    }

    pub fn num_set(values: Vec<Rational>) -> Result<Domain> {
        let set: BTreeSet<_> = values.iter().cloned().collect();
        if set.is_empty() {
            return Err(Error::Schema("empty enumeration".into()));
        }
        if set.len() != values.len() {
            return Err(Error::Schema("duplicate value in enumeration".into()));
        }
        Ok(Domain::NumSet(set.into_iter().collect()))
    }

    pub fn str_set(values: Vec<String>) -> Result<Domain> {
        let set: BTreeSet<_> = values.iter().cloned().collect();
        if set.is_empty() {
            return Err(Error::Schema("empty enumeration".into()));
        }
        if set.len() != values.len() {
            return Err(Error::Schema("duplicate value in enumeration".into()));
        }
        Ok(Domain::StrSet(set.into_iter().collect()))
    }

    pub fn ty(&self) -> Type {
        match self {
            Domain::StrSet(_) => Type::Str,
            _ => Type::Num,
        }
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Int { lo, hi }, Value::Num(r)) => {
                r.is_integer() && *lo <= Ext::Fin(r.clone()) && Ext::Fin(r.clone()) <= *hi
            }
            (Domain::Real { lo, hi }, Value::Num(r)) => {
                *lo <= Ext::Fin(r.clone()) && Ext::Fin(r.clone()) <= *hi
            }
            (Domain::NumSet(s), Value::Num(r)) => s.binary_search(r).is_ok(),
            (Domain::StrSet(s), Value::Str(x)) => s.binary_search(x).is_ok(),
            _ => false,
        }
    }

    /// Numeric hull of the domain.
    pub fn hull(&self) -> Option<(Ext, Ext)> {
        match self {
            Domain::Int { lo, hi } | Domain::Real { lo, hi } => Some((lo.clone(), hi.clone())),
            Domain::NumSet(s) => Some((Ext::Fin(s[0].clone()), Ext::Fin(s[s.len() - 1].clone()))),
            Domain::StrSet(_) => None,
        }
    }

    /// All values, when the domain is finite.
    pub fn values(&self) -> Option<Vec<Value>> {
        match self {
            Domain::Int { lo: Ext::Fin(lo), hi: Ext::Fin(hi) } => {
                let mut out = Vec::new();
                let mut x = lo.clone();
                while x <= *hi {
                    out.push(Value::Num(x.clone()));
                    x += Rational::from_integer(1.into());
                }
                Some(out)
            }
            Domain::Real { lo: Ext::Fin(lo), hi: Ext::Fin(hi) } if lo == hi => {
                Some(vec![Value::Num(lo.clone())])
            }
            Domain::NumSet(s) => Some(s.iter().cloned().map(Value::Num).collect()),
            Domain::StrSet(s) => Some(s.iter().cloned().map(Value::Str).collect()),
            _ => None,
        }
    }

    /// Number of values, `None` when infinite.
    pub fn size(&self) -> Option<u128> {
        use num_traits::ToPrimitive;
        match self {
            Domain::Int { lo: Ext::Fin(lo), hi: Ext::Fin(hi) } => {
                (hi - lo).to_integer().to_u128().map(|n| n + 1)
            }
            Domain::Real { lo: Ext::Fin(lo), hi: Ext::Fin(hi) } if lo == hi => Some(1),
            Domain::NumSet(s) => Some(s.len() as u128),
            Domain::StrSet(s) => Some(s.len() as u128),
            _ => None,
        }
    }

    /// Membership of `attr` in this domain, as a constraint.
    pub fn to_constraint(&self, attr: &str) -> Constraint {
        let a = || Term::Attr(attr.to_string());
        match self {
            Domain::Int { lo, hi } | Domain::Real { lo, hi } => {
                let mut parts = Vec::new();
                if let Ext::Fin(lo) = lo {
                    parts.push(Constraint::cmp(a(), CmpOp::Ge, Term::Num(lo.clone())));
                }
                if let Ext::Fin(hi) = hi {
                    parts.push(Constraint::cmp(a(), CmpOp::Le, Term::Num(hi.clone())));
                }
                Constraint::and(parts)
            }
            Domain::NumSet(s) => Constraint::Atom(Atom::Member {
                term: a(),
                set: s.iter().cloned().map(Value::Num).collect(),
                negated: false,
            }),
            Domain::StrSet(s) => Constraint::Atom(Atom::Member {
                term: a(),
                set: s.iter().cloned().map(Value::Str).collect(),
                negated: false,
            }),
        }
    }

    /// Smallest domain of this family containing both.
    pub fn join(&self, other: &Domain) -> Result<Domain> {
        use Domain::*;
        Ok(match (self, other) {
            (StrSet(a), StrSet(b)) => {
                StrSet(a.iter().chain(b).cloned().collect::<BTreeSet<_>>().into_iter().collect())
            }
            (StrSet(_), _) | (_, StrSet(_)) => {
                return Err(Error::Type("cannot combine string and numeric domains".into()))
            }
            (NumSet(a), NumSet(b)) => {
                NumSet(a.iter().chain(b).cloned().collect::<BTreeSet<_>>().into_iter().collect())
            }
            (a, b) => {
                let (alo, ahi) = a.hull().unwrap();
                let (blo, bhi) = b.hull().unwrap();
                let lo = alo.min(blo);
                let hi = ahi.max(bhi);
                if a.is_integral() && b.is_integral() {
                    Int { lo, hi }
                } else {
                    Real { lo, hi }
                }
            }
        })
    }

    pub fn is_integral(&self) -> bool {
        match self {
            Domain::Int { .. } => true,
            Domain::NumSet(s) => s.iter().all(|r| r.is_integer()),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Attr(String),
    Num(Rational),
    Str(String),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Neg(Box<Term>),
}

#[allow(clippy::should_implement_trait)]
impl Term {
    pub fn attr(name: &str) -> Term {
        Term::Attr(name.to_string())
    }

    pub fn num(n: i64) -> Term {
        Term::Num(crate::value::rat(n))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    fn collect_attrs(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Attr(a) => {
                out.insert(a.clone());
            }
            Term::Num(_) | Term::Str(_) => {}
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                a.collect_attrs(out);
                b.collect_attrs(out);
            }
            Term::Neg(a) => a.collect_attrs(out),
        }
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Term {
        match self {
            Term::Attr(a) => Term::Attr(map.get(a).cloned().unwrap_or_else(|| a.clone())),
            Term::Num(_) | Term::Str(_) => self.clone(),
            Term::Add(a, b) => Term::add(a.rename(map), b.rename(map)),
            Term::Sub(a, b) => Term::sub(a.rename(map), b.rename(map)),
            Term::Mul(a, b) => Term::mul(a.rename(map), b.rename(map)),
            Term::Neg(a) => Term::Neg(Box::new(a.rename(map))),
        }
    }

    pub fn ty(&self, types: &dyn Fn(&str) -> Option<Type>) -> Result<Type> {
        match self {
            Term::Attr(a) => types(a).ok_or_else(|| Error::UnknownAttribute(a.clone())),
            Term::Num(_) => Ok(Type::Num),
            Term::Str(_) => Ok(Type::Str),
            Term::Add(a, b) | Term::Sub(a, b) | Term::Mul(a, b) => {
                for t in [a, b] {
                    if t.ty(types)? != Type::Num {
                        return Err(Error::Type(format!("arithmetic on string term {t}")));
                    }
                }
                Ok(Type::Num)
            }
            Term::Neg(a) => {
                if a.ty(types)? != Type::Num {
                    return Err(Error::Type(format!("arithmetic on string term {a}")));
                }
                Ok(Type::Num)
            }
        }
    }

    /// Exact value under `env`; `None` on a missing attribute or ill-typed
    /// arithmetic.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<Value>) -> Option<Value> {
        let num = |t: &Term| match t.eval(env)? {
            Value::Num(r) => Some(r),
            Value::Str(_) => None,
        };
        Some(match self {
            Term::Attr(a) => env(a)?,
            Term::Num(r) => Value::Num(r.clone()),
            Term::Str(s) => Value::Str(s.clone()),
            Term::Add(a, b) => Value::Num(num(a)? + num(b)?),
            Term::Sub(a, b) => Value::Num(num(a)? - num(b)?),
            Term::Mul(a, b) => Value::Num(num(a)? * num(b)?),
            Term::Neg(a) => Value::Num(-num(a)?),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
        }
    }

    /// Operator after swapping the two sides.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Gt => CmpOp::Lt,
            op => op,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Eq => ord == Equal,
            CmpOp::Ne => ord != Equal,
            CmpOp::Ge => ord != Less,
            CmpOp::Gt => ord == Greater,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Cmp { lhs: Term, op: CmpOp, rhs: Term },
    Member { term: Term, set: Vec<Value>, negated: bool },
}

impl Atom {
    pub fn negate(&self) -> Atom {
        match self {
            Atom::Cmp { lhs, op, rhs } => Atom::Cmp { lhs: lhs.clone(), op: op.negate(), rhs: rhs.clone() },
            Atom::Member { term, set, negated } => {
                Atom::Member { term: term.clone(), set: set.clone(), negated: !negated }
            }
        }
    }

    fn holds(&self, env: &dyn Fn(&str) -> Option<Value>) -> Option<bool> {
        match self {
            Atom::Cmp { lhs, op, rhs } => {
                let (l, r) = (lhs.eval(env)?, rhs.eval(env)?);
                match (&l, &r) {
                    (Value::Num(a), Value::Num(b)) => Some(op.holds(a.cmp(b))),
                    (Value::Str(a), Value::Str(b)) => match op {
                        CmpOp::Eq => Some(a == b),
                        CmpOp::Ne => Some(a != b),
                        _ => None,
                    },
                    _ => None,
                }
            }
            Atom::Member { term, set, negated } => {
                let v = term.eval(env)?;
                Some(set.contains(&v) != *negated)
            }
        }
    }

    fn rename(&self, map: &BTreeMap<String, String>) -> Atom {
        match self {
            Atom::Cmp { lhs, op, rhs } => Atom::Cmp { lhs: lhs.rename(map), op: *op, rhs: rhs.rename(map) },
            Atom::Member { term, set, negated } => {
                Atom::Member { term: term.rename(map), set: set.clone(), negated: *negated }
            }
        }
    }

    fn check(&self, types: &dyn Fn(&str) -> Option<Type>) -> Result<()> {
        match self {
            Atom::Cmp { lhs, op, rhs } => {
                let (l, r) = (lhs.ty(types)?, rhs.ty(types)?);
                if l != r {
                    return Err(Error::Type(format!("cannot compare {l} with {r} in `{self}`")));
                }
                if l == Type::Str && !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                    return Err(Error::Type(format!("ordering comparison on strings in `{self}`")));
                }
                Ok(())
            }
            Atom::Member { term, set, .. } => {
                let t = term.ty(types)?;
                for v in set {
                    let vt = if v.as_num().is_some() { Type::Num } else { Type::Str };
                    if vt != t {
                        return Err(Error::Type(format!("{t} term tested against {vt} value in `{self}`")));
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    True,
    False,
    Atom(Atom),
    Not(Box<Constraint>),
    And(Vec<Constraint>),
    Or(Vec<Constraint>),
    Iff(Box<Constraint>, Box<Constraint>),
}

#[allow(clippy::should_implement_trait)]
impl Constraint {
    pub fn cmp(lhs: Term, op: CmpOp, rhs: Term) -> Constraint {
        Constraint::Atom(Atom::Cmp { lhs, op, rhs })
    }

    pub fn member(term: Term, set: Vec<Value>) -> Constraint {
        Constraint::Atom(Atom::Member { term, set, negated: false })
    }

    pub fn not(c: Constraint) -> Constraint {
        Constraint::Not(Box::new(c))
    }

    /// Conjunction of `parts`; `true` when empty, the part itself when single.
    pub fn and(parts: Vec<Constraint>) -> Constraint {
        let mut parts: Vec<_> = parts.into_iter().filter(|c| *c != Constraint::True).collect();
        match parts.len() {
            0 => Constraint::True,
            1 => parts.pop().unwrap(),
            _ => Constraint::And(parts),
        }
    }

    /// Disjunction of `parts`; `false` when empty, the part itself when single.
    pub fn or(parts: Vec<Constraint>) -> Constraint {
        let mut parts: Vec<_> = parts.into_iter().filter(|c| *c != Constraint::False).collect();
        match parts.len() {
            0 => Constraint::False,
            1 => parts.pop().unwrap(),
            _ => Constraint::Or(parts),
        }
    }

    pub fn attrs(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_attrs(&mut out);
        out
    }

    fn collect_attrs(&self, out: &mut BTreeSet<String>) {
        match self {
            Constraint::True | Constraint::False => {}
            Constraint::Atom(Atom::Cmp { lhs, rhs, .. }) => {
                lhs.collect_attrs(out);
                rhs.collect_attrs(out);
            }
            Constraint::Atom(Atom::Member { term, .. }) => term.collect_attrs(out),
            Constraint::Not(c) => c.collect_attrs(out),
            Constraint::And(cs) | Constraint::Or(cs) => cs.iter().for_each(|c| c.collect_attrs(out)),
            Constraint::Iff(a, b) => {
                a.collect_attrs(out);
                b.collect_attrs(out);
            }
        }
    }

    /// Renames attribute references according to `map`.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Constraint {
        match self {
            Constraint::True | Constraint::False => self.clone(),
            Constraint::Atom(a) => Constraint::Atom(a.rename(map)),
            Constraint::Not(c) => Constraint::not(c.rename(map)),
            Constraint::And(cs) => Constraint::And(cs.iter().map(|c| c.rename(map)).collect()),
            Constraint::Or(cs) => Constraint::Or(cs.iter().map(|c| c.rename(map)).collect()),
            Constraint::Iff(a, b) => Constraint::Iff(Box::new(a.rename(map)), Box::new(b.rename(map))),
        }
    }

    /// Checks that every atom is well typed under `types`.
    pub fn check(&self, types: &dyn Fn(&str) -> Option<Type>) -> Result<()> {
        match self {
            Constraint::True | Constraint::False => Ok(()),
            Constraint::Atom(a) => a.check(types),
            Constraint::Not(c) => c.check(types),
            Constraint::And(cs) | Constraint::Or(cs) => cs.iter().try_for_each(|c| c.check(types)),
            Constraint::Iff(a, b) => {
                a.check(types)?;
                b.check(types)
            }
        }
    }

    /// Exact truth value under a complete assignment. `None` when an
    /// attribute is missing or an atom is ill typed.
    pub fn holds(&self, env: &dyn Fn(&str) -> Option<Value>) -> Option<bool> {
        Some(match self {
            Constraint::True => true,
            Constraint::False => false,
            Constraint::Atom(a) => a.holds(env)?,
            Constraint::Not(c) => !c.holds(env)?,
            Constraint::And(cs) => {
                for c in cs {
                    if !c.holds(env)? {
                        return Some(false);
                    }
                }
                true
            }
            Constraint::Or(cs) => {
                for c in cs {
                    if c.holds(env)? {
                        return Some(true);
                    }
                }
                false
            }
            Constraint::Iff(a, b) => a.holds(env)? == b.holds(env)?,
        })
    }
}

/// Composition of two constraints: the solution set of the result is the
/// intersection of both solution sets.
pub fn conjoin(c1: &Constraint, c2: &Constraint) -> Constraint {
    let mut parts = Vec::new();
    for c in [c1, c2] {
        match c {
            Constraint::And(cs) => parts.extend(cs.iter().cloned()),
            other => parts.push(other.clone()),
        }
    }
    if parts.contains(&Constraint::False) {
        return Constraint::False;
    }
    Constraint::and(parts)
}

/// Negation normal form: negations pushed into atoms, `iff` expanded,
/// nested `and`/`or` flattened and constant `true`/`false` folded.
pub fn normalize(c: &Constraint) -> Constraint {
    nnf(c, true)
}

fn nnf(c: &Constraint, positive: bool) -> Constraint {
    match c {
        Constraint::True => {
            if positive {
                Constraint::True
            } else {
                Constraint::False
            }
        }
        Constraint::False => {
            if positive {
                Constraint::False
            } else {
                Constraint::True
            }
        }
        Constraint::Atom(a) => {
            if positive {
                Constraint::Atom(a.clone())
            } else {
                Constraint::Atom(a.negate())
            }
        }
        Constraint::Not(inner) => nnf(inner, !positive),
        Constraint::And(cs) => {
            let parts = cs.iter().map(|c| nnf(c, positive)).collect();
            if positive {
                flat_and(parts)
            } else {
                flat_or(parts)
            }
        }
        Constraint::Or(cs) => {
            let parts = cs.iter().map(|c| nnf(c, positive)).collect();
            if positive {
                flat_or(parts)
            } else {
                flat_and(parts)
            }
        }
        Constraint::Iff(a, b) => {
            let (ap, an) = (nnf(a, true), nnf(a, false));
            let (bp, bn) = (nnf(b, true), nnf(b, false));
            if positive {
                flat_or(vec![flat_and(vec![ap, bp]), flat_and(vec![an, bn])])
            } else {
                flat_or(vec![flat_and(vec![ap, bn]), flat_and(vec![an, bp])])
            }
        }
    }
}

fn flat_and(parts: Vec<Constraint>) -> Constraint {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Constraint::True => {}
            Constraint::False => return Constraint::False,
            Constraint::And(cs) => out.extend(cs),
            other => out.push(other),
        }
    }
    Constraint::and(out)
}

fn flat_or(parts: Vec<Constraint>) -> Constraint {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Constraint::False => {}
            Constraint::True => return Constraint::True,
            Constraint::Or(cs) => out.extend(cs),
            other => out.push(other),
        }
    }
    Constraint::or(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub domain: Domain,
}

impl Attribute {
    pub fn new(name: &str, domain: Domain) -> Attribute {
        Attribute { name: name.to_string(), domain }
    }
}

/// A relation name, its attributes, and the constraint every tuple
/// satisfies.
///
/// `hidden` lists attributes that the constraint still mentions but that
/// are no longer part of the tuples (they were projected away). They are
/// read existentially: a tuple belongs to the schema when some values of
/// the hidden attributes complete it into a solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstrainedSchema {
    pub name: String,
    pub attributes: Vec<Attribute>,
    pub hidden: Vec<Attribute>,
    pub constraint: Constraint,
}

impl ConstrainedSchema {
    /// A base relation schema. `check` must only mention declared
    /// attributes and be well typed.
    pub fn new(name: &str, attributes: Vec<Attribute>, check: Constraint) -> Result<ConstrainedSchema> {
        let mut seen = BTreeSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::Schema(format!("duplicate attribute {} in {name}", a.name)));
            }
        }
        let schema = ConstrainedSchema {
            name: name.to_string(),
            attributes,
            hidden: Vec::new(),
            constraint: check,
        };
        schema.check_constraint(&schema.constraint)?;
        Ok(schema)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn names(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.name.clone()).collect()
    }

    /// Every variable the constraint may mention: visible, then hidden.
    pub fn scope(&self) -> impl Iterator<Item = &Attribute> {
        self.attributes.iter().chain(self.hidden.iter())
    }

    pub fn type_of(&self, name: &str) -> Option<Type> {
        self.scope().find(|a| a.name == name).map(|a| a.domain.ty())
    }

    /// Type-checks `c` against the visible attributes of this schema.
    pub fn check_constraint(&self, c: &Constraint) -> Result<()> {
        c.check(&|n| self.attribute(n).map(|a| a.domain.ty()))
    }

    /// `a1 in D1 and ... and an in Dn` over the visible attributes.
    pub fn domain_constraint(&self) -> Constraint {
        Constraint::and(self.attributes.iter().map(|a| a.domain.to_constraint(&a.name)).collect())
    }

    /// The domain constraint composed with the stored constraint.
    pub fn initial_constraint(&self) -> Constraint {
        conjoin(&self.domain_constraint(), &self.constraint)
    }

    /// True when `tuple` (in attribute order) lies in the domains and
    /// satisfies the constraint. Only meaningful without hidden attributes.
    pub fn admits(&self, tuple: &[Value]) -> bool {
        if tuple.len() != self.attributes.len() {
            return false;
        }
        if !self.attributes.iter().zip(tuple).all(|(a, v)| a.domain.contains(v)) {
            return false;
        }
        let env = |n: &str| self.index_of(n).map(|i| tuple[i].clone());
        self.constraint.holds(&env) == Some(true)
    }
}

/// Interval of values an attribute can take under a constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub lower: Ext,
    pub upper: Ext,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Bounds {
    pub fn closed(lower: Ext, upper: Ext) -> Bounds {
        Bounds { lower, upper, lower_open: false, upper_open: false }
    }

    pub fn unbounded() -> Bounds {
        Bounds::closed(Ext::NegInf, Ext::PosInf)
    }

    /// The marker for an unsatisfiable constraint.
    pub fn empty() -> Bounds {
        Bounds::closed(Ext::PosInf, Ext::NegInf)
    }

    pub fn is_empty(&self) -> bool {
        self.lower > self.upper || (self.lower == self.upper && (self.lower_open || self.upper_open))
    }

    /// Smallest bounds containing both.
    pub fn join(&self, other: &Bounds) -> Bounds {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let (lower, lower_open) = match self.lower.cmp(&other.lower) {
            std::cmp::Ordering::Less => (self.lower.clone(), self.lower_open),
            std::cmp::Ordering::Greater => (other.lower.clone(), other.lower_open),
            std::cmp::Ordering::Equal => (self.lower.clone(), self.lower_open && other.lower_open),
        };
        let (upper, upper_open) = match self.upper.cmp(&other.upper) {
            std::cmp::Ordering::Greater => (self.upper.clone(), self.upper_open),
            std::cmp::Ordering::Less => (other.upper.clone(), other.upper_open),
            std::cmp::Ordering::Equal => (self.upper.clone(), self.upper_open && other.upper_open),
        };
        Bounds { lower, upper, lower_open, upper_open }
    }

    /// `self` lies inside `other`, endpoints compared as closures.
    pub fn within(&self, other: &Bounds) -> bool {
        self.is_empty() || (other.lower <= self.lower && self.upper <= other.upper)
    }

    pub fn contains(&self, r: &Rational) -> bool {
        let x = Ext::Fin(r.clone());
        let lo_ok = if self.lower_open { self.lower < x } else { self.lower <= x };
        let hi_ok = if self.upper_open { x < self.upper } else { x <= self.upper };
        lo_ok && hi_ok
    }

    /// `upper - lower` of the closure; infinite when either end is.
    pub fn width(&self) -> Ext {
        if self.is_empty() {
            return Ext::Fin(Rational::zero());
        }
        self.upper.add(&self.lower.neg())
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "empty");
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_open { "(" } else { "[" },
            self.lower,
            self.upper,
            if self.upper_open { ")" } else { "]" }
        )
    }
}
