//! Boxes of variable domains and three-valued evaluation over them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Atom, CmpOp, Constraint, Domain, Term};
use crate::value::{self, Ext, Rational, Value};

/// A numeric range with possibly open, possibly infinite endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Iv {
    pub lo: Ext,
    pub lo_open: bool,
    pub hi: Ext,
    pub hi_open: bool,
}

impl Iv {
    pub fn point(r: Rational) -> Iv {
        Iv { lo: Ext::Fin(r.clone()), lo_open: false, hi: Ext::Fin(r), hi_open: false }
    }

    pub fn closed(lo: Ext, hi: Ext) -> Iv {
        Iv { lo, lo_open: false, hi, hi_open: false }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }

    pub fn as_point(&self) -> Option<&Rational> {
        match (&self.lo, &self.hi) {
            (Ext::Fin(a), Ext::Fin(b)) if a == b && !self.lo_open && !self.hi_open => Some(a),
            _ => None,
        }
    }

    pub fn add(&self, o: &Iv) -> Iv {
        Iv {
            lo: self.lo.add(&o.lo),
            lo_open: self.lo_open || o.lo_open,
            hi: self.hi.add(&o.hi),
            hi_open: self.hi_open || o.hi_open,
        }
    }

    pub fn neg(&self) -> Iv {
        Iv { lo: self.hi.neg(), lo_open: self.hi_open, hi: self.lo.neg(), hi_open: self.lo_open }
    }

    pub fn scale(&self, c: &Rational) -> Iv {
        if c.is_zero() {
            Iv::point(Rational::zero())
        } else if c.is_positive() {
            Iv { lo: self.lo.scale(c), lo_open: self.lo_open, hi: self.hi.scale(c), hi_open: self.hi_open }
        } else {
            Iv { lo: self.hi.scale(c), lo_open: self.hi_open, hi: self.lo.scale(c), hi_open: self.lo_open }
        }
    }

    /// Closed hull of the product.
    pub fn mul(&self, o: &Iv) -> Iv {
        let c = [self.lo.mul(&o.lo), self.lo.mul(&o.hi), self.hi.mul(&o.lo), self.hi.mul(&o.hi)];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Iv::closed(lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    fn from_bool(b: bool) -> Truth {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

/// Domain of one variable inside a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum VarDom {
    /// `set`, when present, lists the remaining values and `iv` is its hull.
    Num { iv: Iv, integral: bool, set: Option<Vec<Rational>> },
    Str(Vec<String>),
}

impl VarDom {
    pub fn from_domain(d: &Domain) -> VarDom {
        match d {
            Domain::Int { lo, hi } => VarDom::Num { iv: Iv::closed(lo.clone(), hi.clone()), integral: true, set: None },
            Domain::Real { lo, hi } => VarDom::Num { iv: Iv::closed(lo.clone(), hi.clone()), integral: false, set: None },
            Domain::NumSet(s) => VarDom::Num {
                iv: Iv::closed(Ext::Fin(s[0].clone()), Ext::Fin(s[s.len() - 1].clone())),
                integral: false,
                set: Some(s.clone()),
            },
            Domain::StrSet(s) => VarDom::Str(s.clone()),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            VarDom::Num { iv, set, .. } => iv.is_empty() || set.as_ref().is_some_and(|s| s.is_empty()),
            VarDom::Str(s) => s.is_empty(),
        }
    }

    pub fn range(&self) -> Option<&Iv> {
        match self {
            VarDom::Num { iv, .. } => Some(iv),
            VarDom::Str(_) => None,
        }
    }

    pub fn fixed(&self) -> Option<Value> {
        match self {
            VarDom::Num { iv, .. } => iv.as_point().map(|r| Value::Num(r.clone())),
            VarDom::Str(s) if s.len() == 1 => Some(Value::Str(s[0].clone())),
            VarDom::Str(_) => None,
        }
    }

    /// Number of values left, `None` when infinitely many.
    pub fn size(&self) -> Option<u128> {
        match self {
            VarDom::Num { set: Some(s), .. } => Some(s.len() as u128),
            VarDom::Num { iv, integral, set: None } => {
                if iv.is_empty() {
                    return Some(0);
                }
                if iv.as_point().is_some() {
                    return Some(1);
                }
                match (integral, &iv.lo, &iv.hi) {
                    (true, Ext::Fin(lo), Ext::Fin(hi)) => {
                        Some((hi - lo).to_integer().to_u128().unwrap_or(u128::MAX / 2) + 1)
                    }
                    _ => None,
                }
            }
            VarDom::Str(s) => Some(s.len() as u128),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.size().is_some()
    }

    /// Every value, when finite.
    pub fn values(&self) -> Option<Vec<Value>> {
        match self {
            VarDom::Num { set: Some(s), .. } => Some(s.iter().cloned().map(Value::Num).collect()),
            VarDom::Num { iv, integral, set: None } => {
                if iv.is_empty() {
                    return Some(Vec::new());
                }
                if let Some(p) = iv.as_point() {
                    return Some(vec![Value::Num(p.clone())]);
                }
                match (integral, &iv.lo, &iv.hi) {
                    (true, Ext::Fin(lo), Ext::Fin(hi)) => {
                        let mut out = Vec::new();
                        let mut x = lo.clone();
                        while x <= *hi {
                            out.push(Value::Num(x.clone()));
                            x += Rational::one();
                        }
                        Some(out)
                    }
                    _ => None,
                }
            }
            VarDom::Str(s) => Some(s.iter().cloned().map(Value::Str).collect()),
        }
    }

    /// Some value of the domain, preferring finite closed endpoints.
    pub fn pick(&self) -> Option<Value> {
        match self {
            VarDom::Str(s) => s.first().cloned().map(Value::Str),
            VarDom::Num { set: Some(s), .. } => s.first().cloned().map(Value::Num),
            VarDom::Num { iv, integral, .. } => {
                if iv.is_empty() {
                    return None;
                }
                let r = match (&iv.lo, &iv.hi) {
                    (Ext::Fin(lo), _) if !iv.lo_open => lo.clone(),
                    (_, Ext::Fin(hi)) if !iv.hi_open => hi.clone(),
                    (Ext::Fin(lo), Ext::Fin(hi)) => value::midpoint(lo, hi),
                    (Ext::Fin(lo), Ext::PosInf) => value::floor(lo) + Rational::one(),
                    (Ext::NegInf, Ext::Fin(hi)) => value::ceil(hi) - Rational::one(),
                    _ => Rational::zero(),
                };
                let r = if *integral { value::ceil(&r) } else { r };
                Some(Value::Num(r))
            }
        }
    }

    pub fn fix(&mut self, v: &Value) {
        match (self, v) {
            (VarDom::Num { iv, set, .. }, Value::Num(r)) => {
                *iv = Iv::point(r.clone());
                if let Some(s) = set {
                    s.retain(|x| x == r);
                }
            }
            (VarDom::Str(s), Value::Str(x)) => s.retain(|y| y == x),
            (d, _) => *d = VarDom::Str(Vec::new()),
        }
    }

    /// Re-establishes integrality rounding and the set/hull agreement.
    /// Returns false when the domain became empty.
    pub fn normalize(&mut self) -> bool {
        match self {
            VarDom::Num { iv, integral, set } => {
                if *integral {
                    if let Ext::Fin(lo) = &iv.lo {
                        let mut l = value::ceil(lo);
                        if iv.lo_open && l == *lo {
                            l += Rational::one();
                        }
                        iv.lo = Ext::Fin(l);
                        iv.lo_open = false;
                    }
                    if let Ext::Fin(hi) = &iv.hi {
                        let mut h = value::floor(hi);
                        if iv.hi_open && h == *hi {
                            h -= Rational::one();
                        }
                        iv.hi = Ext::Fin(h);
                        iv.hi_open = false;
                    }
                }
                if let Some(s) = set {
                    let keep = |r: &Rational| {
                        let x = Ext::Fin(r.clone());
                        let lo_ok = if iv.lo_open { iv.lo < x } else { iv.lo <= x };
                        let hi_ok = if iv.hi_open { x < iv.hi } else { x <= iv.hi };
                        lo_ok && hi_ok && (!*integral || r.is_integer())
                    };
                    s.retain(keep);
                    if s.is_empty() {
                        return false;
                    }
                    *iv = Iv::closed(Ext::Fin(s[0].clone()), Ext::Fin(s[s.len() - 1].clone()));
                }
                !iv.is_empty()
            }
            VarDom::Str(s) => !s.is_empty(),
        }
    }

    /// Tightens the upper end to `b` (strict when `open`). Returns whether
    /// anything changed.
    pub fn tighten_hi(&mut self, b: &Rational, open: bool) -> bool {
        if let VarDom::Num { iv, .. } = self {
            let nb = Ext::Fin(b.clone());
            if nb < iv.hi || (nb == iv.hi && open && !iv.hi_open) {
                iv.hi = nb;
                iv.hi_open = open;
                self.normalize();
                return true;
            }
        }
        false
    }

    pub fn tighten_lo(&mut self, b: &Rational, open: bool) -> bool {
        if let VarDom::Num { iv, .. } = self {
            let nb = Ext::Fin(b.clone());
            if nb > iv.lo || (nb == iv.lo && open && !iv.lo_open) {
                iv.lo = nb;
                iv.lo_open = open;
                self.normalize();
                return true;
            }
        }
        false
    }

    /// Keeps only the listed values. Returns whether anything changed.
    pub fn retain_values(&mut self, values: &[Value]) -> bool {
        match self {
            VarDom::Num { iv, integral, set } => {
                let candidates: BTreeSet<Rational> = match set {
                    Some(s) => s.iter().filter(|r| values.contains(&Value::Num((*r).clone()))).cloned().collect(),
                    None => values
                        .iter()
                        .filter_map(|v| v.as_num())
                        .filter(|r| Self::in_iv(iv, r) && (!*integral || r.is_integer()))
                        .cloned()
                        .collect(),
                };
                let new: Vec<Rational> = candidates.into_iter().collect();
                let changed = set.as_ref() != Some(&new);
                *set = Some(new);
                self.normalize();
                changed
            }
            VarDom::Str(s) => {
                let before = s.len();
                s.retain(|x| values.contains(&Value::Str(x.clone())));
                s.len() != before
            }
        }
    }

    /// Removes the listed values where that is representable.
    pub fn remove_values(&mut self, values: &[Value]) -> bool {
        match self {
            VarDom::Num { set: Some(s), .. } => {
                let before = s.len();
                s.retain(|r| !values.contains(&Value::Num(r.clone())));
                let changed = s.len() != before;
                self.normalize();
                changed
            }
            VarDom::Num { iv, integral: true, set: None } => {
                let mut changed = false;
                while let Ext::Fin(lo) = &iv.lo {
                    if iv.lo <= iv.hi && values.contains(&Value::Num(lo.clone())) {
                        iv.lo = Ext::Fin(lo + Rational::one());
                        changed = true;
                    } else {
                        break;
                    }
                }
                while let Ext::Fin(hi) = &iv.hi {
                    if iv.lo <= iv.hi && values.contains(&Value::Num(hi.clone())) {
                        iv.hi = Ext::Fin(hi - Rational::one());
                        changed = true;
                    } else {
                        break;
                    }
                }
                changed
            }
            VarDom::Num { .. } => false,
            VarDom::Str(s) => {
                let before = s.len();
                s.retain(|x| !values.contains(&Value::Str(x.clone())));
                s.len() != before
            }
        }
    }

    fn in_iv(iv: &Iv, r: &Rational) -> bool {
        let x = Ext::Fin(r.clone());
        (if iv.lo_open { iv.lo < x } else { iv.lo <= x }) && (if iv.hi_open { x < iv.hi } else { x <= iv.hi })
    }

    /// Splits a finite domain with more than one value into two halves,
    /// lower values first.
    pub fn split(&self) -> Option<(VarDom, VarDom)> {
        match self {
            VarDom::Str(s) if s.len() > 1 => {
                let m = s.len() / 2;
                Some((VarDom::Str(s[..m].to_vec()), VarDom::Str(s[m..].to_vec())))
            }
            VarDom::Num { integral, set: Some(s), .. } if s.len() > 1 => {
                let m = s.len() / 2;
                let half = |part: &[Rational]| VarDom::Num {
                    iv: Iv::closed(Ext::Fin(part[0].clone()), Ext::Fin(part[part.len() - 1].clone())),
                    integral: *integral,
                    set: Some(part.to_vec()),
                };
                Some((half(&s[..m]), half(&s[m..])))
            }
            VarDom::Num { iv, integral: true, set: None } => match (&iv.lo, &iv.hi) {
                (Ext::Fin(lo), Ext::Fin(hi)) if lo < hi => {
                    let mid = value::floor(&value::midpoint(lo, hi));
                    let left = VarDom::Num {
                        iv: Iv::closed(Ext::Fin(lo.clone()), Ext::Fin(mid.clone())),
                        integral: true,
                        set: None,
                    };
                    let right = VarDom::Num {
                        iv: Iv::closed(Ext::Fin(mid + Rational::one()), Ext::Fin(hi.clone())),
                        integral: true,
                        set: None,
                    };
                    Some((left, right))
                }
                _ => None,
            },
            _ => None,
        }
    }
}

/// Linear form `constant + sum(coeff * var)` over variable indexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct LinExpr {
    pub coeffs: BTreeMap<usize, Rational>,
    pub constant: Rational,
}

impl LinExpr {
    fn constant(c: Rational) -> LinExpr {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    fn var(i: usize) -> LinExpr {
        LinExpr { coeffs: BTreeMap::from([(i, Rational::one())]), constant: Rational::zero() }
    }

    fn scale(mut self, c: &Rational) -> LinExpr {
        if c.is_zero() {
            return LinExpr::constant(Rational::zero());
        }
        for v in self.coeffs.values_mut() {
            *v *= c;
        }
        self.constant *= c;
        self
    }

    fn plus(mut self, o: LinExpr) -> LinExpr {
        for (k, v) in o.coeffs {
            let e = self.coeffs.entry(k).or_insert_with(Rational::zero);
            *e += v;
            if e.is_zero() {
                self.coeffs.remove(&k);
            }
        }
        self.constant += o.constant;
        self
    }

    pub fn negated(self) -> LinExpr {
        self.scale(&-Rational::one())
    }

    /// Linear form of a numeric term, or `None` when it is not linear.
    pub fn of(t: &Term, b: &BoxDom) -> Option<LinExpr> {
        Some(match t {
            Term::Attr(a) => LinExpr::var(b.index(a)?),
            Term::Num(r) => LinExpr::constant(r.clone()),
            Term::Str(_) => return None,
            Term::Add(x, y) => LinExpr::of(x, b)?.plus(LinExpr::of(y, b)?),
            Term::Sub(x, y) => LinExpr::of(x, b)?.plus(LinExpr::of(y, b)?.negated()),
            Term::Neg(x) => LinExpr::of(x, b)?.negated(),
            Term::Mul(x, y) => {
                let (lx, ly) = (LinExpr::of(x, b)?, LinExpr::of(y, b)?);
                if lx.coeffs.is_empty() {
                    ly.scale(&lx.constant)
                } else if ly.coeffs.is_empty() {
                    lx.scale(&ly.constant)
                } else {
                    return None;
                }
            }
        })
    }

    /// Exact hull of the expression over the box (each variable occurs once).
    pub fn range(&self, b: &BoxDom) -> Option<Iv> {
        self.range_except(b, None)
    }

    pub fn range_except(&self, b: &BoxDom, skip: Option<usize>) -> Option<Iv> {
        let mut acc = Iv::point(self.constant.clone());
        for (i, c) in &self.coeffs {
            if Some(*i) == skip {
                continue;
            }
            acc = acc.add(&b.doms[*i].range()?.scale(c));
        }
        Some(acc)
    }
}

/// A domain per variable, addressed by name or index.
#[derive(Clone, Debug)]
pub(crate) struct BoxDom {
    pub doms: Vec<VarDom>,
    index: HashMap<String, usize>,
}

impl BoxDom {
    pub fn new<'a>(vars: impl Iterator<Item = (&'a str, &'a Domain)>) -> BoxDom {
        let mut names = Vec::new();
        let mut doms = Vec::new();
        for (n, d) in vars {
            names.push(n.to_string());
            doms.push(VarDom::from_domain(d));
        }
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        BoxDom { doms, index }
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.doms.iter().any(|d| d.is_empty())
    }

    /// The single point of the box, if every variable is fixed.
    pub fn point(&self) -> Option<Vec<Value>> {
        self.doms.iter().map(|d| d.fixed()).collect()
    }

    /// Three-valued truth of `c` over every point of the box.
    pub fn eval(&self, c: &Constraint) -> Truth {
        match c {
            Constraint::True => Truth::True,
            Constraint::False => Truth::False,
            Constraint::Atom(a) => self.eval_atom(a),
            Constraint::Not(x) => self.eval(x).not(),
            Constraint::And(cs) => {
                let mut out = Truth::True;
                for c in cs {
                    match self.eval(c) {
                        Truth::False => return Truth::False,
                        Truth::Unknown => out = Truth::Unknown,
                        Truth::True => {}
                    }
                }
                out
            }
            Constraint::Or(cs) => {
                let mut out = Truth::False;
                for c in cs {
                    match self.eval(c) {
                        Truth::True => return Truth::True,
                        Truth::Unknown => out = Truth::Unknown,
                        Truth::False => {}
                    }
                }
                out
            }
            Constraint::Iff(a, b) => match (self.eval(a), self.eval(b)) {
                (Truth::Unknown, _) | (_, Truth::Unknown) => Truth::Unknown,
                (x, y) => Truth::from_bool(x == y),
            },
        }
    }

    pub fn eval_atom(&self, a: &Atom) -> Truth {
        if let Some(point) = self.point_env(a) {
            return point;
        }
        match a {
            Atom::Cmp { lhs, op, rhs } => {
                if let (Some(l), Some(r)) = (self.strings(lhs), self.strings(rhs)) {
                    let eq = if l.len() == 1 && l == r {
                        Truth::True
                    } else if l.is_disjoint(&r) {
                        Truth::False
                    } else {
                        Truth::Unknown
                    };
                    return match op {
                        CmpOp::Eq => eq,
                        CmpOp::Ne => eq.not(),
                        _ => Truth::Unknown,
                    };
                }
                let diff = match LinExpr::of(&Term::sub(lhs.clone(), rhs.clone()), self) {
                    Some(l) => l.range(self),
                    None => self.term_range(lhs).zip(self.term_range(rhs)).map(|(l, r)| l.add(&r.neg())),
                };
                match diff {
                    Some(d) => classify(&d, *op),
                    None => Truth::Unknown,
                }
            }
            Atom::Member { term, set, negated } => {
                let t = self.member_truth(term, set);
                if *negated {
                    t.not()
                } else {
                    t
                }
            }
        }
    }

    /// Exact truth when every attribute the atom mentions is fixed.
    fn point_env(&self, a: &Atom) -> Option<Truth> {
        let env = |n: &str| self.index(n).and_then(|i| self.doms[i].fixed());
        Constraint::Atom(a.clone()).holds(&env).map(Truth::from_bool)
    }

    fn member_truth(&self, term: &Term, set: &[Value]) -> Truth {
        if let Term::Attr(a) = term {
            if let Some(i) = self.index(a) {
                let small = self.doms[i].size().is_some_and(|n| n <= 4096);
                if let Some(vals) = self.doms[i].values().filter(|_| small) {
                    let inside = vals.iter().filter(|v| set.contains(v)).count();
                    return if inside == vals.len() {
                        Truth::True
                    } else if inside == 0 {
                        Truth::False
                    } else {
                        Truth::Unknown
                    };
                }
            }
        }
        if let Some(strings) = self.strings(term) {
            let inside = strings.iter().filter(|s| set.contains(&Value::Str((*s).clone()))).count();
            return if inside == strings.len() {
                Truth::True
            } else if inside == 0 {
                Truth::False
            } else {
                Truth::Unknown
            };
        }
        let range = LinExpr::of(term, self).and_then(|l| l.range(self)).or_else(|| self.term_range(term));
        match range {
            Some(iv) => {
                let any_inside = set.iter().filter_map(|v| v.as_num()).any(|r| VarDom::in_iv(&iv, r));
                if !any_inside {
                    Truth::False
                } else {
                    Truth::Unknown
                }
            }
            None => Truth::Unknown,
        }
    }

    /// Possible values of a string-typed term.
    fn strings(&self, t: &Term) -> Option<BTreeSet<String>> {
        match t {
            Term::Str(s) => Some(BTreeSet::from([s.clone()])),
            Term::Attr(a) => match &self.doms[self.index(a)?] {
                VarDom::Str(s) => Some(s.iter().cloned().collect()),
                VarDom::Num { .. } => None,
            },
            _ => None,
        }
    }

    /// Interval hull of a numeric term by plain interval arithmetic.
    pub fn term_range(&self, t: &Term) -> Option<Iv> {
        Some(match t {
            Term::Attr(a) => self.doms[self.index(a)?].range()?.clone(),
            Term::Num(r) => Iv::point(r.clone()),
            Term::Str(_) => return None,
            Term::Add(x, y) => self.term_range(x)?.add(&self.term_range(y)?),
            Term::Sub(x, y) => self.term_range(x)?.add(&self.term_range(y)?.neg()),
            Term::Mul(x, y) => self.term_range(x)?.mul(&self.term_range(y)?),
            Term::Neg(x) => self.term_range(x)?.neg(),
        })
    }

    /// Replaces atoms decided by the box with `true`/`false` and folds.
    pub fn simplify(&self, c: &Constraint) -> Constraint {
        match c {
            Constraint::True | Constraint::False => c.clone(),
            Constraint::Atom(a) => match self.eval_atom(a) {
                Truth::True => Constraint::True,
                Truth::False => Constraint::False,
                Truth::Unknown => c.clone(),
            },
            Constraint::Not(x) => match self.simplify(x) {
                Constraint::True => Constraint::False,
                Constraint::False => Constraint::True,
                other => Constraint::not(other),
            },
            Constraint::And(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    match self.simplify(c) {
                        Constraint::False => return Constraint::False,
                        Constraint::True => {}
                        Constraint::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                Constraint::and(out)
            }
            Constraint::Or(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    match self.simplify(c) {
                        Constraint::True => return Constraint::True,
                        Constraint::False => {}
                        Constraint::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                Constraint::or(out)
            }
            Constraint::Iff(a, b) => Constraint::Iff(Box::new(self.simplify(a)), Box::new(self.simplify(b))),
        }
    }
}

/// Truth of `d op 0` for every value `d` in the range.
fn classify(d: &Iv, op: CmpOp) -> Truth {
    let zero = Ext::Fin(Rational::zero());
    let le_true = d.hi <= zero;
    let le_false = d.lo > zero || (d.lo == zero && d.lo_open);
    let lt_true = d.hi < zero || (d.hi == zero && d.hi_open);
    let lt_false = d.lo >= zero;
    let ge_true = d.lo >= zero;
    let ge_false = d.hi < zero || (d.hi == zero && d.hi_open);
    let gt_true = d.lo > zero || (d.lo == zero && d.lo_open);
    let gt_false = d.hi <= zero;
    let pick = |t: bool, f: bool| {
        if t {
            Truth::True
        } else if f {
            Truth::False
        } else {
            Truth::Unknown
        }
    };
    match op {
        CmpOp::Le => pick(le_true, le_false),
        CmpOp::Lt => pick(lt_true, lt_false),
        CmpOp::Ge => pick(ge_true, ge_false),
        CmpOp::Gt => pick(gt_true, gt_false),
        CmpOp::Eq => pick(d.as_point().is_some_and(|p| p.is_zero()), le_false || ge_false),
        CmpOp::Ne => pick(le_false || ge_false, d.as_point().is_some_and(|p| p.is_zero())),
    }
}
