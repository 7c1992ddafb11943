//! Compositional sensitivity analysis.
//!
//! Every node of a plan gets an intermediate sensitivity `S`, a bound on
//! how many tuples of its result can change when one input tuple is added
//! or removed:
//!
//! ```text
//! S(R)          = min(1, diam(C_R))
//! S(op q)       = min(Δop · S(q), diam(C))
//! S(q1 op q2)   = min(Δop · max(S(q1), S(q2)), diam(C))
//! ```
//!
//! `diam(C)` is the number of tuples satisfying the node's constraint. The
//! restricted products treat their two sides differently: the block side
//! is scaled by Δop, while any change on the representative side can
//! change every output tuple. The top aggregation then contributes
//! `Δf(C)`, computed from the bounds of its attribute.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::constraints::{Bounds, Satisfiability, SolutionCount, Solver, SolverConfig};
use crate::error::Result;
use crate::plan::{self, magnitude, Catalog, Node, Op, OpKind, Plan};
use crate::query::{AggFn, AggKind, TopQuery};
use crate::value::{self, Ext, Rational};

#[derive(Clone, Debug, Default)]
pub struct AnalyzerConfig {
    pub solver: SolverConfig,
    /// Replaces the sensitivity of an operator family. Only meant for
    /// checking that the validation harness catches wrong tables.
    pub delta_overrides: BTreeMap<OpKind, Ext>,
}

/// Outcome of counting a node's solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diam {
    Exact(u128),
    Infinite,
    /// Not counted past the point where it could lower `S`.
    AtLeast(u64),
    Skipped,
}

impl Diam {
    fn as_ext(&self) -> Ext {
        match self {
            Diam::Exact(n) => Ext::Fin(Rational::from_integer((*n).into())),
            _ => Ext::PosInf,
        }
    }
}

impl std::fmt::Display for Diam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diam::Exact(n) => write!(f, "{n}"),
            Diam::Infinite => write!(f, "inf"),
            Diam::AtLeast(n) => write!(f, ">={n}"),
            Diam::Skipped => write!(f, "-"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct NodeReport {
    pub depth: usize,
    pub op: String,
    pub s: Ext,
    pub delta_op: Ext,
    pub diam: Diam,
    pub constraint_text: String,
}

#[derive(Clone, Debug)]
pub struct TopReport {
    pub f: AggFn,
    pub bounds: Option<Bounds>,
    pub delta: Ext,
}

#[derive(Clone, Debug)]
pub struct SensitivityReport {
    pub gs: Ext,
    /// `S` of the plan body.
    pub s: Ext,
    pub top: TopReport,
    /// Pre-order.
    pub nodes: Vec<NodeReport>,
    pub warnings: Vec<String>,
}

pub struct Analyzer {
    pub config: AnalyzerConfig,
    pub solver: Solver,
}

impl Default for Analyzer {
    fn default() -> Self {
        Analyzer::new(AnalyzerConfig::default())
    }
}

/// The intrinsic sensitivity of an operator.
pub fn operator_delta(op: &Op) -> Ext {
    let n = |k: usize| Ext::Fin(Rational::from_integer(k.into()));
    match op {
        Op::Relation(_) | Op::Restriction(_) | Op::Projection(_) | Op::ProductOne | Op::ProductAgg(_) => n(1),
        Op::Values(_) => n(0),
        Op::Union | Op::Intersection | Op::Difference | Op::GroupAggregate { .. } => n(2),
        Op::Product => Ext::PosInf,
        Op::ProductN(k) => n(*k),
    }
}

/// `Δf(C)` from the bounds of the aggregated attribute.
pub fn function_delta(kind: AggKind, bounds: &Bounds) -> Ext {
    let two = Rational::from_integer(2.into());
    match kind {
        AggKind::Count => Ext::Fin(Rational::from_integer(1.into())),
        AggKind::Sum => magnitude(bounds),
        AggKind::Max | AggKind::Min => bounds.width(),
        AggKind::Avg => match bounds.width() {
            Ext::Fin(w) => Ext::Fin(w / two),
            other => other,
        },
    }
}

fn min(a: Ext, b: Ext) -> Ext {
    a.min(b)
}

impl Analyzer {
    pub fn new(config: AnalyzerConfig) -> Analyzer {
        let solver = Solver::new(config.solver.clone());
        Analyzer { config, solver }
    }

    pub fn delta(&self, op: &Op) -> Ext {
        self.config.delta_overrides.get(&op.kind()).cloned().unwrap_or_else(|| operator_delta(op))
    }

    pub fn plan(&self, tq: &TopQuery, catalog: &Catalog) -> Result<Plan> {
        plan::build(tq, catalog, &self.solver)
    }

    pub fn analyze(&self, tq: &TopQuery, catalog: &Catalog) -> Result<SensitivityReport> {
        let plan = self.plan(tq, catalog)?;
        Ok(self.analyze_plan(&plan))
    }

    pub fn analyze_plan(&self, plan: &Plan) -> SensitivityReport {
        let mut nodes = Vec::new();
        let s = self.sensitivity(&plan.root, 0, &mut nodes);
        let mut warnings = Vec::new();
        let f = &plan.top.f;
        let bounds = f.attr.as_ref().map(|_| plan.top.bounds.clone());
        let delta = match &bounds {
            Some(b) => function_delta(f.kind, b),
            None => function_delta(f.kind, &Bounds::empty()),
        };
        if let (Some(a), false) = (&f.attr, delta.is_finite()) {
            warnings.push(format!("attribute {a} is unbounded under the query constraint; sensitivity is infinite"));
        }
        let mut gs = match f.kind {
            AggKind::Count | AggKind::Sum | AggKind::Avg => delta.mul(&s),
            AggKind::Max | AggKind::Min => {
                if s == Ext::Fin(Rational::from_integer(0.into())) && delta != Ext::Fin(Rational::from_integer(0.into())) {
                    warnings.push(format!(
                        "the query body is constant (S = 0) but {} ignores S; the bound is conservative",
                        f.kind.name()
                    ));
                }
                delta.clone()
            }
        };
        let schema = &plan.root.schema;
        if self.solver.satisfiable(&schema.constraint, schema) == Satisfiability::No {
            warnings.push("query is statically empty: its constraint has no solution".into());
            gs = Ext::Fin(Rational::from_integer(0.into()));
        }
        SensitivityReport { gs, s, top: TopReport { f: f.clone(), bounds, delta }, nodes, warnings }
    }

    /// `S` of `node`, appending the node reports in pre-order.
    pub fn sensitivity(&self, node: &Node, depth: usize, out: &mut Vec<NodeReport>) -> Ext {
        let slot = out.len();
        out.push(NodeReport {
            depth,
            op: node.op.to_string(),
            s: Ext::PosInf,
            delta_op: Ext::PosInf,
            diam: Diam::Skipped,
            constraint_text: node.schema.constraint.to_string(),
        });
        let child_s: Vec<Ext> = node.children.iter().map(|c| self.sensitivity(c, depth + 1, out)).collect();
        let delta = self.delta(&node.op);
        let raw = match &node.op {
            Op::Relation(_) => delta.clone(),
            Op::Values(_) => Ext::Fin(Rational::from_integer(0.into())),
            Op::ProductOne => delta.mul(&child_s[1]).max(Ext::PosInf.mul(&child_s[0])),
            Op::ProductN(_) | Op::ProductAgg(_) => delta.mul(&child_s[0]).max(Ext::PosInf.mul(&child_s[1])),
            _ => {
                let m = child_s.iter().cloned().max().unwrap_or(Ext::Fin(Rational::from_integer(0.into())));
                delta.mul(&m)
            }
        };
        let diam = self.diameter(node, &raw);
        let s = min(raw, diam.as_ext());
        out[slot].s = s.clone();
        out[slot].delta_op = delta;
        out[slot].diam = diam;
        s
    }

    /// Counts solutions only as far as can matter for `min(raw, diam)`.
    fn diameter(&self, node: &Node, raw: &Ext) -> Diam {
        let cap = match raw {
            Ext::Fin(r) if r <= &Rational::from_integer(0.into()) => return Diam::Skipped,
            Ext::Fin(r) => value::floor(r).to_integer().try_into().unwrap_or(u64::MAX).min(self.config.solver.enum_cap),
            _ => self.config.solver.enum_cap,
        };
        match self.solver.solution_count(&node.schema.constraint, &node.schema, cap) {
            SolutionCount::Count(n) => Diam::Exact(n),
            SolutionCount::Infinite => Diam::Infinite,
            SolutionCount::ExceedsCap => Diam::AtLeast(cap),
        }
    }
}

#[derive(Serialize)]
struct RatJson {
    value: String,
    #[serde(rename = "f64")]
    float: Option<f64>,
}

fn rat_json(e: &Ext) -> RatJson {
    RatJson { value: e.to_string(), float: e.is_finite().then(|| e.to_f64()) }
}

#[derive(Serialize)]
struct BoundsJson {
    lo: String,
    lo_f64: Option<f64>,
    lo_open: bool,
    hi: String,
    hi_f64: Option<f64>,
    hi_open: bool,
}

#[derive(Serialize)]
struct TopJson {
    #[serde(rename = "fn")]
    f: String,
    attr: Option<String>,
    bounds: Option<BoundsJson>,
    delta: String,
    delta_f64: Option<f64>,
}

#[derive(Serialize)]
struct NodeJson {
    depth: usize,
    op: String,
    s: String,
    s_f64: Option<f64>,
    delta_op: String,
    delta_op_f64: Option<f64>,
    diam: String,
    constraint_text: String,
}

#[derive(Serialize)]
struct ReportJson {
    gs: String,
    gs_f64: Option<f64>,
    s: String,
    top: TopJson,
    nodes: Vec<NodeJson>,
    warnings: Vec<String>,
}

impl Serialize for SensitivityReport {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let r = |e: &Ext| rat_json(e);
        let json = ReportJson {
            gs: r(&self.gs).value,
            gs_f64: r(&self.gs).float,
            s: self.s.to_string(),
            top: TopJson {
                f: self.top.f.kind.name().to_string(),
                attr: self.top.f.attr.clone(),
                bounds: self.top.bounds.as_ref().filter(|b| !b.is_empty()).map(|b| BoundsJson {
                    lo: b.lower.to_string(),
                    lo_f64: b.lower.is_finite().then(|| b.lower.to_f64()),
                    lo_open: b.lower_open,
                    hi: b.upper.to_string(),
                    hi_f64: b.upper.is_finite().then(|| b.upper.to_f64()),
                    hi_open: b.upper_open,
                }),
                delta: r(&self.top.delta).value,
                delta_f64: r(&self.top.delta).float,
            },
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    depth: n.depth,
                    op: n.op.clone(),
                    s: r(&n.s).value,
                    s_f64: r(&n.s).float,
                    delta_op: r(&n.delta_op).value,
                    delta_op_f64: r(&n.delta_op).float,
                    diam: n.diam.to_string(),
                    constraint_text: n.constraint_text.clone(),
                })
                .collect(),
            warnings: self.warnings.clone(),
        };
        json.serialize(ser)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::catalog;
    use crate::syntax::{parse_query, parse_schemas};
    use crate::value::rat;

    fn analyze(schema: &str, query: &str) -> SensitivityReport {
        let cat = catalog(parse_schemas(schema).unwrap());
        Analyzer::default().analyze(&parse_query(query).unwrap(), &cat).unwrap()
    }

    const WH: &str = "relation R { Weight: real [0,150]; Height: real [0,200] }";

    #[test]
    fn weight_height_example() {
        let r = analyze(WH, "avg(Weight) of R");
        assert_eq!((r.top.delta.clone(), r.s.clone(), r.gs.clone()), (Ext::Fin(rat(75)), Ext::Fin(rat(1)), Ext::Fin(rat(75))));
        let r = analyze(WH, "avg(Weight) of select Weight <= Height - 100 from R");
        assert_eq!(r.top.delta, Ext::Fin(rat(50)));
        assert_eq!(r.gs, Ext::Fin(rat(50)));
    }

    #[test]
    fn operator_table() {
        let r = analyze("relation S { a: int [0,1000] } relation T { a: int [0,1000] }", "count of (S union T) minus (S intersect T)");
        let deltas: Vec<Ext> = r.nodes.iter().map(|n| n.delta_op.clone()).collect();
        let two = Ext::Fin(rat(2));
        assert_eq!(deltas[0], two);
        assert_eq!(deltas[1], two);
        assert_eq!(deltas[4], two);
        assert_eq!(r.gs, Ext::Fin(rat(4)));
    }

    #[test]
    fn product_is_capped_by_the_diameter() {
        let r = analyze("relation A { a: int [0,1] } relation B { b: int [0,1] }", "count of A product B");
        assert_eq!(r.nodes[0].delta_op, Ext::PosInf);
        assert_eq!(r.nodes[0].diam, Diam::Exact(4));
        assert_eq!(r.gs, Ext::Fin(rat(4)));
        let r = analyze("relation A { a: int [0,1] } relation C { c: real [0,1] }", "count of A product C");
        assert_eq!(r.nodes[0].diam, Diam::Infinite);
        assert_eq!(r.gs, Ext::PosInf);
    }

    #[test]
    fn unbounded_attribute_warns() {
        let r = analyze("relation U { x: real [0, inf] }", "sum(x) of U");
        assert_eq!(r.gs, Ext::PosInf);
        assert!(r.warnings.iter().any(|w| w.contains("x")));
    }

    #[test]
    fn statically_empty_query() {
        let r = analyze("relation P { Age: int [0,120] }", "sum(Age) of select Age > 200 from P");
        assert_eq!(r.gs, Ext::Fin(rat(0)));
        assert!(r.warnings.iter().any(|w| w.contains("statically empty")));
    }

    #[test]
    fn constant_body_has_zero_sensitivity() {
        let r = analyze("relation P { Age: int [0,120] }", "sum(c) of values (c = 3), (c = 5)");
        assert_eq!(r.s, Ext::Fin(rat(0)));
        assert_eq!(r.gs, Ext::Fin(rat(0)));
        let r = analyze("relation P { Age: int [0,120] }", "max(c) of values (c = 3), (c = 5)");
        assert_eq!(r.gs, Ext::Fin(rat(2)));
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn restriction_and_difference_differ_statically() {
        let s = "relation P { Age: int [0,1000] }";
        let sel = analyze(s, "count of select Age >= 20 from P");
        let diff = analyze(s, "count of P minus select Age < 20 from P");
        assert_eq!(sel.gs, Ext::Fin(rat(1)));
        assert_eq!(diff.gs, Ext::Fin(rat(2)));
    }

    #[test]
    fn overrides_replace_the_table() {
        let cat = catalog(parse_schemas("relation S { a: int [0,9] } relation T { a: int [0,9] }").unwrap());
        let mut config = AnalyzerConfig::default();
        config.delta_overrides.insert(OpKind::Union, Ext::Fin(rat(1)));
        let r = Analyzer::new(config).analyze(&parse_query("count of S union T").unwrap(), &cat).unwrap();
        assert_eq!(r.gs, Ext::Fin(rat(1)));
    }

    #[test]
    fn representative_side_changes_are_unbounded() {
        let s = "relation A { a: int [0,3] } relation B { b: int [0,3] }";
        let one = analyze(s, "count of values (c = 0) product1 A");
        assert_eq!(one.gs, Ext::Fin(rat(1)));
        let agg = analyze(s, "count of A productagg max(b) B");
        assert_eq!(agg.nodes[0].diam, Diam::Exact(16));
        assert_eq!(agg.gs, Ext::Fin(rat(16)));
    }
}
