//! Relational algebra query trees.
//!
//! A [`TopQuery`] is an aggregation function applied to an operator tree
//! ([`QueryPlan`]). The tree is untyped; [`crate::plan`] resolves names and
//! computes the schema of every node.

use std::fmt;

use crate::constraints::Constraint;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggKind {
    Count,
    Sum,
    Max,
    Min,
    Avg,
}

impl AggKind {
    pub const ALL: [AggKind; 5] = [AggKind::Count, AggKind::Sum, AggKind::Max, AggKind::Min, AggKind::Avg];

    pub fn name(self) -> &'static str {
        match self {
            AggKind::Count => "count",
            AggKind::Sum => "sum",
            AggKind::Max => "max",
            AggKind::Min => "min",
            AggKind::Avg => "avg",
        }
    }

    pub fn from_name(s: &str) -> Option<AggKind> {
        AggKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// An aggregation function; `attr` is `None` exactly for `count`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AggFn {
    pub kind: AggKind,
    pub attr: Option<String>,
}

impl AggFn {
    pub fn count() -> AggFn {
        AggFn { kind: AggKind::Count, attr: None }
    }

    pub fn of(kind: AggKind, attr: &str) -> AggFn {
        if kind == AggKind::Count {
            return AggFn::count();
        }
        AggFn { kind, attr: Some(attr.to_string()) }
    }

    /// Attribute name given to the result column when no alias is set:
    /// `count`, `sum_Price`, `avg_Height`.
    pub fn default_name(&self) -> String {
        match &self.attr {
            None => self.kind.name().to_string(),
            Some(a) => format!("{}_{}", self.kind.name(), a),
        }
    }
}

impl fmt::Display for AggFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.attr {
            None => write!(f, "{}", self.kind.name()),
            Some(a) => write!(f, "{}({})", self.kind.name(), a),
        }
    }
}

/// An aggregation producing a named column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedAgg {
    pub f: AggFn,
    pub alias: Option<String>,
}

impl NamedAgg {
    pub fn new(f: AggFn) -> NamedAgg {
        NamedAgg { f, alias: None }
    }

    pub fn output_name(&self) -> String {
        self.alias.clone().unwrap_or_else(|| self.f.default_name())
    }
}

impl fmt::Display for NamedAgg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.alias {
            None => write!(f, "{}", self.f),
            Some(a) => write!(f, "{} as {}", self.f, a),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryPlan {
    Relation(String),
    /// A constant relation written inline.
    Values { attrs: Vec<String>, rows: Vec<Vec<Value>> },
    Union(Box<QueryPlan>, Box<QueryPlan>),
    Intersection(Box<QueryPlan>, Box<QueryPlan>),
    Difference(Box<QueryPlan>, Box<QueryPlan>),
    Restriction(Constraint, Box<QueryPlan>),
    Projection(Vec<String>, Box<QueryPlan>),
    Product(Box<QueryPlan>, Box<QueryPlan>),
    /// `single ×₁ input`: `single` must hold exactly one tuple.
    ProductOne(Box<QueryPlan>, Box<QueryPlan>),
    /// Product of the left operand with the first `n` tuples of the right.
    ProductN(usize, Box<QueryPlan>, Box<QueryPlan>),
    /// Product of the left operand with the one-tuple aggregate of the right.
    ProductAgg(NamedAgg, Box<QueryPlan>, Box<QueryPlan>),
    GroupAggregate { group_by: Vec<String>, aggs: Vec<NamedAgg>, input: Box<QueryPlan> },
}

impl QueryPlan {
    pub fn relation(name: &str) -> QueryPlan {
        QueryPlan::Relation(name.to_string())
    }

    pub fn children(&self) -> Vec<&QueryPlan> {
        match self {
            QueryPlan::Relation(_) | QueryPlan::Values { .. } => vec![],
            QueryPlan::Union(a, b)
            | QueryPlan::Intersection(a, b)
            | QueryPlan::Difference(a, b)
            | QueryPlan::Product(a, b)
            | QueryPlan::ProductOne(a, b)
            | QueryPlan::ProductN(_, a, b)
            | QueryPlan::ProductAgg(_, a, b) => vec![a, b],
            QueryPlan::Restriction(_, q) | QueryPlan::Projection(_, q) => vec![q],
            QueryPlan::GroupAggregate { input, .. } => vec![input],
        }
    }

    /// Number of operators on the longest root-to-leaf path, leaves excluded.
    pub fn depth(&self) -> usize {
        self.children().iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    /// Base relations referenced anywhere in the tree, without repetition.
    pub fn relations(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_relations(&mut out);
        out
    }

    fn collect_relations(&self, out: &mut Vec<String>) {
        if let QueryPlan::Relation(r) = self {
            if !out.contains(r) {
                out.push(r.clone());
            }
        }
        for c in self.children() {
            c.collect_relations(out);
        }
    }
}

/// `f(body)`: the aggregation at the root of every analyzed query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopQuery {
    pub f: AggFn,
    pub body: QueryPlan,
}

impl fmt::Display for TopQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} of {}", self.f, self.body)
    }
}

impl fmt::Display for QueryPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryPlan::Relation(r) => write!(f, "{r}"),
            QueryPlan::Values { attrs, rows } => {
                write!(f, "values ")?;
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "(")?;
                    for (j, (a, v)) in attrs.iter().zip(row).enumerate() {
                        if j > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a} = {v}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
            QueryPlan::Union(a, b) => write!(f, "({a} union {b})"),
            QueryPlan::Intersection(a, b) => write!(f, "({a} intersect {b})"),
            QueryPlan::Difference(a, b) => write!(f, "({a} minus {b})"),
            QueryPlan::Product(a, b) => write!(f, "({a} product {b})"),
            QueryPlan::ProductOne(a, b) => write!(f, "({a} product1 {b})"),
            QueryPlan::ProductN(n, a, b) => write!(f, "({a} productN {n} {b})"),
            QueryPlan::ProductAgg(g, a, b) => write!(f, "({a} productagg {g} {b})"),
            QueryPlan::Restriction(c, q) => write!(f, "select {c} from {}", Operand(q)),
            QueryPlan::Projection(attrs, q) => write!(f, "project {} from {}", attrs.join(", "), Operand(q)),
            QueryPlan::GroupAggregate { group_by, aggs, input } => {
                write!(f, "group ")?;
                if !group_by.is_empty() {
                    write!(f, "{} ", group_by.join(", "))?;
                }
                let aggs: Vec<String> = aggs.iter().map(|a| a.to_string()).collect();
                write!(f, "agg {} from {}", aggs.join(", "), Operand(input))
            }
        }
    }
}

/// Operand of a prefix operator; `values` needs parentheses there so that a
/// following binary operator is not read as part of it.
struct Operand<'a>(&'a QueryPlan);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            QueryPlan::Values { .. } => write!(f, "({})", self.0),
            q => write!(f, "{q}"),
        }
    }
}
