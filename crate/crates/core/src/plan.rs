//! Name resolution, type checking and constraint propagation.
//!
//! [`build`] turns a parsed [`TopQuery`] into a [`Plan`]: a tree of
//! [`Node`]s where every node carries its output schema, including the
//! constraint that every tuple it can produce satisfies. Projected-away
//! attributes stay in that constraint under fresh names (`Age#3`) and are
//! listed as hidden attributes of the schema.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::constraints::{
    conjoin, Attribute, Bounds, CmpOp, ConstrainedSchema, Constraint, Domain, SolutionCount, Solver, Term, Type,
};
use crate::error::{Error, Result};
use crate::query::{AggFn, AggKind, QueryPlan, TopQuery};
use crate::value::{self, Ext, Rational, Value};

pub type Catalog = BTreeMap<String, ConstrainedSchema>;

pub fn catalog(schemas: Vec<ConstrainedSchema>) -> Catalog {
    schemas.into_iter().map(|s| (s.name.clone(), s)).collect()
}

/// A resolved aggregation: the function, its output column, the bounds of
/// the aggregated attribute under the input constraint and the value
/// returned on an empty input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggSpec {
    pub f: AggFn,
    pub name: String,
    pub bounds: Bounds,
    pub empty_value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Relation(String),
    Values(Vec<Vec<Value>>),
    Union,
    Intersection,
    Difference,
    Restriction(Constraint),
    Projection(Vec<String>),
    Product,
    ProductOne,
    ProductN(usize),
    ProductAgg(AggSpec),
    GroupAggregate { group_by: Vec<String>, aggs: Vec<AggSpec> },
}

/// Operator families, used to override the sensitivity table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OpKind {
    Relation,
    Values,
    Union,
    Intersection,
    Difference,
    Restriction,
    Projection,
    Product,
    ProductOne,
    ProductN,
    ProductAgg,
    GroupAggregate,
}

impl OpKind {
    pub const ALL: [OpKind; 12] = [
        OpKind::Relation,
        OpKind::Values,
        OpKind::Union,
        OpKind::Intersection,
        OpKind::Difference,
        OpKind::Restriction,
        OpKind::Projection,
        OpKind::Product,
        OpKind::ProductOne,
        OpKind::ProductN,
        OpKind::ProductAgg,
        OpKind::GroupAggregate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Relation => "relation",
            OpKind::Values => "values",
            OpKind::Union => "union",
            OpKind::Intersection => "intersect",
            OpKind::Difference => "minus",
            OpKind::Restriction => "select",
            OpKind::Projection => "project",
            OpKind::Product => "product",
            OpKind::ProductOne => "product1",
            OpKind::ProductN => "productN",
            OpKind::ProductAgg => "productagg",
            OpKind::GroupAggregate => "group",
        }
    }

    pub fn from_name(s: &str) -> Option<OpKind> {
        OpKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl Op {
    pub fn kind(&self) -> OpKind {
        match self {
            Op::Relation(_) => OpKind::Relation,
            Op::Values(_) => OpKind::Values,
            Op::Union => OpKind::Union,
            Op::Intersection => OpKind::Intersection,
            Op::Difference => OpKind::Difference,
            Op::Restriction(_) => OpKind::Restriction,
            Op::Projection(_) => OpKind::Projection,
            Op::Product => OpKind::Product,
            Op::ProductOne => OpKind::ProductOne,
            Op::ProductN(_) => OpKind::ProductN,
            Op::ProductAgg(_) => OpKind::ProductAgg,
            Op::GroupAggregate { .. } => OpKind::GroupAggregate,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Relation(r) => write!(f, "relation {r}"),
            Op::Values(rows) => write!(f, "values ({} rows)", rows.len()),
            Op::Restriction(c) => write!(f, "select {c}"),
            Op::Projection(a) => write!(f, "project {}", a.join(", ")),
            Op::ProductN(n) => write!(f, "productN {n}"),
            Op::ProductAgg(g) => write!(f, "productagg {} as {}", g.f, g.name),
            Op::GroupAggregate { group_by, aggs } => {
                let aggs: Vec<String> = aggs.iter().map(|a| format!("{} as {}", a.f, a.name)).collect();
                write!(f, "group [{}] agg {}", group_by.join(", "), aggs.join(", "))
            }
            other => write!(f, "{}", other.kind().name()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub op: Op,
    pub children: Vec<Node>,
    pub schema: ConstrainedSchema,
}

impl Node {
    /// Nodes in pre-order.
    pub fn walk(&self) -> Vec<&Node> {
        let mut out = vec![self];
        for c in &self.children {
            out.extend(c.walk());
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Plan {
    pub top: AggSpec,
    pub root: Node,
}

/// Resolves and type-checks `tq` against `catalog` and propagates
/// constraints bottom-up.
pub fn build(tq: &TopQuery, catalog: &Catalog, solver: &Solver) -> Result<Plan> {
    let root = build_node(&tq.body, catalog, solver)?;
    let top = agg_spec(&tq.f, tq.f.default_name(), &root.schema, solver)?;
    Ok(Plan { top, root })
}

/// Like [`build`] for an operator tree without a top-level aggregation.
pub fn build_node(q: &QueryPlan, catalog: &Catalog, solver: &Solver) -> Result<Node> {
    let mut b = Builder { catalog, solver, fresh: 0 };
    b.node(q)
}

struct Builder<'a> {
    catalog: &'a Catalog,
    solver: &'a Solver,
    fresh: usize,
}

impl Builder<'_> {
    fn node(&mut self, q: &QueryPlan) -> Result<Node> {
        let children: Vec<Node> = q.children().into_iter().map(|c| self.node(c)).collect::<Result<_>>()?;
        let (op, schema) = match q {
            QueryPlan::Relation(r) => {
                let s = self.catalog.get(r).ok_or_else(|| Error::UnknownRelation(r.clone()))?;
                let mut schema = s.clone();
                schema.constraint = s.initial_constraint();
                (Op::Relation(r.clone()), schema)
            }
            QueryPlan::Values { attrs, rows } => (Op::Values(rows.clone()), values_schema(attrs, rows)?),
            QueryPlan::Union(..) => {
                let (l, r) = (&children[0].schema, &children[1].schema);
                let right_attrs = same_attributes("union", l, r)?;
                let attributes = l
                    .attributes
                    .iter()
                    .zip(&right_attrs)
                    .map(|(a, b)| Ok(Attribute { name: a.name.clone(), domain: a.domain.join(&b.domain)? }))
                    .collect::<Result<_>>()?;
                let constraint = Constraint::or(vec![l.constraint.clone(), r.constraint.clone()]);
                (Op::Union, derived(attributes, hidden_of(&[l, r]), constraint))
            }
            QueryPlan::Intersection(..) => {
                let (l, r) = (&children[0].schema, &children[1].schema);
                same_attributes("intersect", l, r)?;
                let constraint = conjoin(&l.constraint, &r.constraint);
                (Op::Intersection, derived(l.attributes.clone(), hidden_of(&[l, r]), constraint))
            }
            QueryPlan::Difference(a, b) => {
                let (l, r) = (&children[0].schema, &children[1].schema);
                same_attributes("minus", l, r)?;
                let constraint = match (filtered_relation(a), filtered_relation(b)) {
                    (Some(x), Some(y)) if x == y => conjoin(&l.constraint, &Constraint::not(r.constraint.clone())),
                    _ => l.constraint.clone(),
                };
                (Op::Difference, derived(l.attributes.clone(), l.hidden.clone(), constraint))
            }
            QueryPlan::Restriction(phi, _) => {
                let s = &children[0].schema;
                s.check_constraint(phi)?;
                let constraint = conjoin(&s.constraint, phi);
                (Op::Restriction(phi.clone()), derived(s.attributes.clone(), s.hidden.clone(), constraint))
            }
            QueryPlan::Projection(attrs, _) => {
                let s = &children[0].schema;
                unique("project", attrs)?;
                for a in attrs {
                    s.attribute(a).ok_or_else(|| Error::UnknownAttribute(a.clone()))?;
                }
                (Op::Projection(attrs.clone()), self.keep_only(s, attrs))
            }
            QueryPlan::Product(..) | QueryPlan::ProductOne(..) | QueryPlan::ProductN(..) => {
                let (l, r) = (&children[0].schema, &children[1].schema);
                disjoint(l, r)?;
                let op = match q {
                    QueryPlan::Product(..) => Op::Product,
                    QueryPlan::ProductN(n, ..) => Op::ProductN(*n),
                    _ => {
                        if !is_single(q.children()[0]) {
                            return Err(Error::Query(format!(
                                "left operand of product1 must be a one-row literal or a one-row aggregate, found {}",
                                q.children()[0]
                            )));
                        }
                        Op::ProductOne
                    }
                };
                let attributes = l.attributes.iter().chain(&r.attributes).cloned().collect();
                (op, derived(attributes, hidden_of(&[l, r]), conjoin(&l.constraint, &r.constraint)))
            }
            QueryPlan::ProductAgg(g, ..) => {
                let (l, r) = (&children[0].schema, &children[1].schema);
                let spec = agg_spec(&g.f, g.output_name(), r, self.solver)?;
                if l.attribute(&spec.name).is_some() {
                    return Err(Error::Query(format!("attribute {} already exists", spec.name)));
                }
                let domain = result_domain(&spec, r, self.solver);
                let mut attributes = l.attributes.clone();
                attributes.push(Attribute::new(&spec.name, domain.clone()));
                let constraint = conjoin(&l.constraint, &domain.to_constraint(&spec.name));
                (Op::ProductAgg(spec), derived(attributes, l.hidden.clone(), constraint))
            }
            QueryPlan::GroupAggregate { group_by, aggs, .. } => {
                let s = &children[0].schema;
                unique("group", group_by)?;
                for a in group_by {
                    s.attribute(a).ok_or_else(|| Error::UnknownAttribute(a.clone()))?;
                }
                let specs: Vec<AggSpec> =
                    aggs.iter().map(|g| agg_spec(&g.f, g.output_name(), s, self.solver)).collect::<Result<_>>()?;
                let mut names: Vec<String> = group_by.clone();
                names.extend(specs.iter().map(|g| g.name.clone()));
                unique("group", &names)?;
                let base = if group_by.is_empty() {
                    // one row even on an empty input, so nothing of the
                    // input constraint carries over
                    derived(Vec::new(), Vec::new(), Constraint::True)
                } else {
                    self.keep_only(s, group_by)
                };
                let mut attributes = base.attributes;
                let mut constraint = base.constraint;
                for g in &specs {
                    let domain = result_domain(g, s, self.solver);
                    constraint = conjoin(&constraint, &domain.to_constraint(&g.name));
                    attributes.push(Attribute::new(&g.name, domain));
                }
                let op = Op::GroupAggregate { group_by: group_by.clone(), aggs: specs };
                (op, derived(attributes, base.hidden, constraint))
            }
        };
        Ok(Node { op, children, schema })
    }

    /// The schema restricted to `keep`; every other visible attribute is
    /// renamed apart and becomes hidden.
    fn keep_only(&mut self, s: &ConstrainedSchema, keep: &[String]) -> ConstrainedSchema {
        let mut map = BTreeMap::new();
        let mut hidden = s.hidden.clone();
        for a in &s.attributes {
            if !keep.contains(&a.name) {
                self.fresh += 1;
                let base = a.name.split('#').next().unwrap_or(&a.name);
                let fresh = format!("{base}#{}", self.fresh);
                map.insert(a.name.clone(), fresh.clone());
                hidden.push(Attribute::new(&fresh, a.domain.clone()));
            }
        }
        let attributes = keep.iter().map(|k| s.attribute(k).unwrap().clone()).collect();
        derived(attributes, hidden, s.constraint.rename(&map))
    }
}

fn derived(attributes: Vec<Attribute>, hidden: Vec<Attribute>, constraint: Constraint) -> ConstrainedSchema {
    ConstrainedSchema { name: String::new(), attributes, hidden, constraint }
}

fn hidden_of(schemas: &[&ConstrainedSchema]) -> Vec<Attribute> {
    schemas.iter().flat_map(|s| s.hidden.iter().cloned()).collect()
}

fn unique(op: &str, names: &[String]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::Query(format!("attribute {n} listed twice in {op}")));
        }
    }
    Ok(())
}

/// Checks that both sides have the same attribute names and types, and
/// returns the right attributes in the left order.
fn same_attributes(op: &str, l: &ConstrainedSchema, r: &ConstrainedSchema) -> Result<Vec<Attribute>> {
    let ln: BTreeSet<String> = l.names().into_iter().collect();
    let rn: BTreeSet<String> = r.names().into_iter().collect();
    if ln != rn {
        return Err(Error::Query(format!(
            "operands of {op} have different attributes: ({}) and ({})",
            l.names().join(", "),
            r.names().join(", ")
        )));
    }
    l.attributes
        .iter()
        .map(|a| {
            let b = r.attribute(&a.name).unwrap();
            if a.domain.ty() != b.domain.ty() {
                return Err(Error::Type(format!("attribute {} is {} on one side of {op} and {} on the other", a.name, a.domain.ty(), b.domain.ty())));
            }
            Ok(b.clone())
        })
        .collect()
}

fn disjoint(l: &ConstrainedSchema, r: &ConstrainedSchema) -> Result<()> {
    for a in &l.attributes {
        if r.attribute(&a.name).is_some() {
            return Err(Error::Query(format!("product operands share attribute {}", a.name)));
        }
    }
    Ok(())
}

/// The base relation when `q` only filters it (`select`, `union`,
/// `intersect`, `minus` over one relation). Such a query returns exactly
/// the tuples of the relation satisfying some predicate.
fn filtered_relation(q: &QueryPlan) -> Option<&str> {
    match q {
        QueryPlan::Relation(r) => Some(r),
        QueryPlan::Restriction(_, q) => filtered_relation(q),
        QueryPlan::Union(a, b) | QueryPlan::Intersection(a, b) | QueryPlan::Difference(a, b) => {
            let x = filtered_relation(a)?;
            (filtered_relation(b)? == x).then_some(x)
        }
        _ => None,
    }
}

/// Whether `q` yields exactly one tuple on every database.
pub fn is_single(q: &QueryPlan) -> bool {
    match q {
        QueryPlan::Values { rows, .. } => rows.len() == 1,
        QueryPlan::GroupAggregate { group_by, .. } => group_by.is_empty(),
        QueryPlan::ProductAgg(_, l, _) | QueryPlan::Projection(_, l) => is_single(l),
        QueryPlan::ProductOne(_, r) => is_single(r),
        QueryPlan::Product(l, r) | QueryPlan::ProductN(_, l, r) => is_single(l) && is_single(r),
        _ => false,
    }
}

fn values_schema(attrs: &[String], rows: &[Vec<Value>]) -> Result<ConstrainedSchema> {
    unique("values", attrs)?;
    if rows.is_empty() {
        return Err(Error::Query("values needs at least one row".into()));
    }
    let mut attributes = Vec::new();
    for (i, a) in attrs.iter().enumerate() {
        let column: Vec<&Value> = rows.iter().map(|r| &r[i]).collect();
        let domain = if column.iter().all(|v| v.as_num().is_some()) {
            let set: BTreeSet<Rational> = column.iter().map(|v| v.as_num().unwrap().clone()).collect();
            Domain::num_set(set.into_iter().collect())?
        } else if column.iter().all(|v| v.as_str().is_some()) {
            let set: BTreeSet<String> = column.iter().map(|v| v.as_str().unwrap().to_string()).collect();
            Domain::str_set(set.into_iter().collect())?
        } else {
            return Err(Error::Type(format!("column {a} of values mixes numbers and strings")));
        };
        attributes.push(Attribute::new(a, domain));
    }
    let rows_c = Constraint::or(
        rows.iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|row| {
                Constraint::and(
                    attrs
                        .iter()
                        .zip(row)
                        .map(|(a, v)| {
                            let t = match v {
                                Value::Num(r) => Term::Num(r.clone()),
                                Value::Str(s) => Term::Str(s.clone()),
                            };
                            Constraint::cmp(Term::attr(a), CmpOp::Eq, t)
                        })
                        .collect(),
                )
            })
            .collect(),
    );
    let mut s = derived(attributes, Vec::new(), Constraint::True);
    s.constraint = conjoin(&s.domain_constraint(), &rows_c);
    Ok(s)
}

/// Resolves `f` over `input` and computes the bounds of its attribute.
fn agg_spec(f: &AggFn, name: String, input: &ConstrainedSchema, solver: &Solver) -> Result<AggSpec> {
    let bounds = match &f.attr {
        None => Bounds::empty(),
        Some(a) => {
            let attr = input.attribute(a).ok_or_else(|| Error::UnknownAttribute(a.clone()))?;
            if attr.domain.ty() != Type::Num {
                return Err(Error::Type(format!("{} applied to string attribute {a}", f.kind.name())));
            }
            solver.attribute_bounds(&input.constraint, input, a)?
        }
    };
    let empty_value = empty_value(f.kind, &bounds);
    Ok(AggSpec { f: f.clone(), name, bounds, empty_value })
}

/// Aggregate of an empty relation: `count = sum = 0`, `max = inf`,
/// `min = sup`, `avg` the midpoint. An infinite end falls back to the other
/// end, and to 0 when both are infinite or the bounds are empty.
pub fn empty_value(kind: AggKind, b: &Bounds) -> Rational {
    if b.is_empty() {
        return Rational::zero();
    }
    let (lo, hi) = (b.lower.fin(), b.upper.fin());
    let pick = |first: Option<&Rational>, second: Option<&Rational>| first.or(second).cloned().unwrap_or_else(Rational::zero);
    match kind {
        AggKind::Count | AggKind::Sum => Rational::zero(),
        AggKind::Max => pick(lo, hi),
        AggKind::Min => pick(hi, lo),
        AggKind::Avg => match (lo, hi) {
            (Some(l), Some(h)) => value::midpoint(l, h),
            _ => pick(lo, hi),
        },
    }
}

/// Domain of an aggregate column. Its membership constraint is the
/// constraint generated by the aggregation.
fn result_domain(g: &AggSpec, input: &ConstrainedSchema, solver: &Solver) -> Domain {
    let point = |r: Rational| Domain::NumSet(vec![r]);
    let rows = || match solver.solution_count(&input.constraint, input, solver.config.enum_cap) {
        SolutionCount::Count(n) => Ext::Fin(Rational::from_integer(n.into())),
        _ => Ext::PosInf,
    };
    let b = &g.bounds;
    if g.f.kind != AggKind::Count && b.is_empty() {
        return point(Rational::zero());
    }
    let integral = g.f.attr.as_ref().and_then(|a| input.attribute(a)).is_some_and(|a| a.domain.is_integral());
    match g.f.kind {
        AggKind::Count => Domain::Int { lo: Ext::Fin(Rational::zero()), hi: rows() },
        AggKind::Sum => {
            let n = rows();
            let zero = Ext::Fin(Rational::zero());
            let lo = if b.lower >= zero { zero.clone() } else { n.mul(&b.lower) };
            let hi = if b.upper <= zero { zero } else { n.mul(&b.upper) };
            if integral {
                Domain::Int { lo, hi }
            } else {
                Domain::Real { lo, hi }
            }
        }
        AggKind::Max | AggKind::Min => {
            let attr = &input.attribute(g.f.attr.as_ref().unwrap()).unwrap().domain;
            match attr {
                Domain::NumSet(s) => {
                    let inside: Vec<Rational> = s.iter().filter(|r| closure_contains(b, r)).cloned().collect();
                    if inside.is_empty() {
                        point(g.empty_value.clone())
                    } else {
                        Domain::NumSet(inside)
                    }
                }
                Domain::Int { .. } => Domain::Int { lo: b.lower.clone(), hi: b.upper.clone() },
                _ => Domain::Real { lo: b.lower.clone(), hi: b.upper.clone() },
            }
        }
        AggKind::Avg => match (&b.lower, &b.upper) {
            (Ext::Fin(l), Ext::Fin(h)) if l == h => point(l.clone()),
            _ => Domain::Real { lo: b.lower.clone(), hi: b.upper.clone() },
        },
    }
}

fn closure_contains(b: &Bounds, r: &Rational) -> bool {
    let x = Ext::Fin(r.clone());
    b.lower <= x && x <= b.upper
}

/// `max(|inf|, |sup|)` of the closure, the per-tuple effect on a sum.
pub fn magnitude(b: &Bounds) -> Ext {
    if b.is_empty() {
        return Ext::Fin(Rational::zero());
    }
    let lo = b.lower.abs();
    let hi = b.upper.abs();
    match (&lo, &hi) {
        (Ext::Fin(x), Ext::Fin(y)) => Ext::Fin(if x.abs() > y.abs() { x.clone() } else { y.clone() }),
        _ => Ext::PosInf,
    }
}
