//! Set-semantics evaluation of plans on in-memory relations.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use num_traits::Zero;

use crate::constraints::{Bounds, ConstrainedSchema, Type};
use crate::error::{Error, Result};
use crate::plan::{empty_value, AggSpec, Node, Op, Plan};
use crate::query::{AggFn, AggKind};
use crate::value::{parse_rational, Rational, Value};

pub type Tuple = Vec<Value>;

/// A finite set of tuples over named attributes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub attrs: Vec<String>,
    pub tuples: BTreeSet<Tuple>,
}

pub type Database = BTreeMap<String, Relation>;

impl Relation {
    pub fn new(attrs: Vec<String>, tuples: impl IntoIterator<Item = Tuple>) -> Relation {
        Relation { attrs, tuples: tuples.into_iter().collect() }
    }

    pub fn empty(attrs: Vec<String>) -> Relation {
        Relation { attrs, tuples: BTreeSet::new() }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn index_of(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr)
    }

    /// The tuples with columns reordered to `attrs`.
    fn aligned(&self, attrs: &[String]) -> Result<BTreeSet<Tuple>> {
        let idx: Vec<usize> = attrs
            .iter()
            .map(|a| self.index_of(a).ok_or_else(|| Error::UnknownAttribute(a.clone())))
            .collect::<Result<_>>()?;
        Ok(self.tuples.iter().map(|t| idx.iter().map(|&i| t[i].clone()).collect()).collect())
    }

    /// Number of tuples in exactly one of the two relations.
    pub fn distance(&self, other: &Relation) -> usize {
        self.tuples.symmetric_difference(&other.tuples).count()
    }

    pub fn column(&self, attr: &str) -> Option<Vec<&Value>> {
        let i = self.index_of(attr)?;
        Some(self.tuples.iter().map(|t| &t[i]).collect())
    }
}

/// One evaluated node, for tracing: depth in the tree, operator and result.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub depth: usize,
    pub op: String,
    pub result: Relation,
}

/// Evaluates the plan body and applies the top-level aggregation.
pub fn run(plan: &Plan, db: &Database) -> Result<Rational> {
    let r = eval(&plan.root, db)?;
    apply_spec(&plan.top, &r)
}

pub fn eval(node: &Node, db: &Database) -> Result<Relation> {
    eval_node(node, db, 0, &mut None)
}

/// Like [`eval`], also returning every intermediate result in pre-order.
pub fn eval_traced(node: &Node, db: &Database) -> Result<(Relation, Vec<TraceRow>)> {
    let mut trace = Some(Vec::new());
    let r = eval_node(node, db, 0, &mut trace)?;
    Ok((r, trace.unwrap()))
}

fn eval_node(node: &Node, db: &Database, depth: usize, trace: &mut Option<Vec<TraceRow>>) -> Result<Relation> {
    let slot = trace.as_mut().map(|t| {
        t.push(TraceRow { depth, op: node.op.to_string(), result: Relation::empty(Vec::new()) });
        t.len() - 1
    });
    let mut inputs = Vec::new();
    for c in &node.children {
        inputs.push(eval_node(c, db, depth + 1, trace)?);
    }
    let attrs = node.schema.names();
    let out = match &node.op {
        Op::Relation(name) => {
            let r = db.get(name).ok_or_else(|| Error::MissingData(name.clone()))?;
            Relation { tuples: r.aligned(&attrs)?, attrs }
        }
        Op::Values(rows) => Relation::new(attrs, rows.iter().cloned()),
        Op::Union => {
            let mut tuples = inputs[0].aligned(&attrs)?;
            tuples.extend(inputs[1].aligned(&attrs)?);
            Relation { attrs, tuples }
        }
        Op::Intersection => {
            let (l, r) = (inputs[0].aligned(&attrs)?, inputs[1].aligned(&attrs)?);
            Relation { attrs, tuples: l.intersection(&r).cloned().collect() }
        }
        Op::Difference => {
            let (l, r) = (inputs[0].aligned(&attrs)?, inputs[1].aligned(&attrs)?);
            Relation { attrs, tuples: l.difference(&r).cloned().collect() }
        }
        Op::Restriction(phi) => {
            let input = &inputs[0];
            let tuples = input
                .tuples
                .iter()
                .filter(|t| {
                    let env = |n: &str| input.index_of(n).map(|i| t[i].clone());
                    phi.holds(&env) == Some(true)
                })
                .cloned()
                .collect();
            Relation { attrs, tuples }
        }
        Op::Projection(keep) => Relation { tuples: inputs[0].aligned(keep)?, attrs },
        Op::Product => Relation { attrs, tuples: product(&inputs[0].tuples, &inputs[1].tuples) },
        Op::ProductOne => {
            if inputs[0].len() != 1 {
                return Err(Error::Cardinality(format!(
                    "the single side of product1 holds {} tuples instead of one",
                    inputs[0].len()
                )));
            }
            Relation { attrs, tuples: product(&inputs[0].tuples, &inputs[1].tuples) }
        }
        Op::ProductN(n) => {
            let reps: BTreeSet<Tuple> = inputs[1].tuples.iter().take(*n).cloned().collect();
            Relation { attrs, tuples: product(&inputs[0].tuples, &reps) }
        }
        Op::ProductAgg(spec) => {
            let v = apply_spec(spec, &inputs[1])?;
            let one = BTreeSet::from([vec![Value::Num(v)]]);
            Relation { attrs, tuples: product(&inputs[0].tuples, &one) }
        }
        Op::GroupAggregate { group_by, aggs } => group(&inputs[0], group_by, aggs, attrs)?,
    };
    if let (Some(t), Some(i)) = (trace.as_mut(), slot) {
        t[i].result = out.clone();
    }
    Ok(out)
}

fn product(l: &BTreeSet<Tuple>, r: &BTreeSet<Tuple>) -> BTreeSet<Tuple> {
    let mut out = BTreeSet::new();
    for a in l {
        for b in r {
            let mut t = a.clone();
            t.extend(b.iter().cloned());
            out.insert(t);
        }
    }
    out
}

fn group(input: &Relation, group_by: &[String], aggs: &[AggSpec], attrs: Vec<String>) -> Result<Relation> {
    let key_idx: Vec<usize> = group_by
        .iter()
        .map(|a| input.index_of(a).ok_or_else(|| Error::UnknownAttribute(a.clone())))
        .collect::<Result<_>>()?;
    let mut groups: BTreeMap<Tuple, Relation> = BTreeMap::new();
    if group_by.is_empty() {
        groups.insert(Vec::new(), input.clone());
    } else {
        for t in &input.tuples {
            let key: Tuple = key_idx.iter().map(|&i| t[i].clone()).collect();
            groups.entry(key).or_insert_with(|| Relation::empty(input.attrs.clone())).tuples.insert(t.clone());
        }
    }
    let mut tuples = BTreeSet::new();
    for (key, members) in groups {
        let mut row = key;
        for spec in aggs {
            row.push(Value::Num(apply_spec(spec, &members)?));
        }
        tuples.insert(row);
    }
    Ok(Relation { attrs, tuples })
}

fn apply_spec(spec: &AggSpec, r: &Relation) -> Result<Rational> {
    aggregate(&spec.f, r, &spec.empty_value)
}

/// Applies `f` to `r`. On an empty relation `max`, `min` and `avg` return
/// the default derived from `bounds`, the bounds of the aggregated
/// attribute under the relation's constraint.
pub fn apply_agg(f: &AggFn, r: &Relation, bounds: &Bounds) -> Result<Rational> {
    aggregate(f, r, &empty_value(f.kind, bounds))
}

fn aggregate(f: &AggFn, r: &Relation, empty: &Rational) -> Result<Rational> {
    if f.kind == AggKind::Count {
        return Ok(Rational::from_integer(r.len().into()));
    }
    let attr = f.attr.as_deref().unwrap_or_default();
    let column = r.column(attr).ok_or_else(|| Error::UnknownAttribute(attr.to_string()))?;
    let nums: Vec<&Rational> = column
        .into_iter()
        .map(|v| v.as_num().ok_or_else(|| Error::Type(format!("{} over string attribute {attr}", f.kind.name()))))
        .collect::<Result<_>>()?;
    if nums.is_empty() {
        return Ok(if f.kind == AggKind::Sum { Rational::zero() } else { empty.clone() });
    }
    let sum = || nums.iter().fold(Rational::zero(), |acc, x| acc + *x);
    Ok(match f.kind {
        AggKind::Count => unreachable!(),
        AggKind::Sum => sum(),
        AggKind::Max => (*nums.iter().max().unwrap()).clone(),
        AggKind::Min => (*nums.iter().min().unwrap()).clone(),
        AggKind::Avg => sum() / Rational::from_integer(nums.len().into()),
    })
}

/// Reads a CSV file whose header lists the schema attributes in order.
/// Every row must lie in the attribute domains and satisfy the schema
/// constraint; all offending rows are reported together. Duplicate rows
/// collapse, relations being sets.
pub fn load_csv<R: Read>(reader: R, schema: &ConstrainedSchema) -> Result<Relation> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let names = schema.names();
    if header != names {
        return Err(Error::Schema(format!(
            "CSV header ({}) does not match the attributes of {} ({})",
            header.join(", "),
            schema.name,
            names.join(", ")
        )));
    }
    let mut tuples = BTreeSet::new();
    let mut bad = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let mut tuple = Vec::with_capacity(names.len());
        let mut problem = None;
        for (field, attr) in record.iter().zip(&schema.attributes) {
            let v = match attr.domain.ty() {
                Type::Num => match parse_rational(field) {
                    Some(r) => Value::Num(r),
                    None => {
                        problem = Some(format!("{}: `{field}` is not a number", attr.name));
                        break;
                    }
                },
                Type::Str => Value::Str(field.to_string()),
            };
            tuple.push(v);
        }
        if problem.is_none() && !schema.admits(&tuple) {
            let shown: Vec<String> = tuple.iter().map(|v| v.to_string()).collect();
            problem = Some(format!("({}) violates the domains or the check constraint", shown.join(", ")));
        }
        match problem {
            Some(p) => bad.push(format!("line {line}: {p}")),
            None => {
                tuples.insert(tuple);
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::ConstraintViolation { relation: schema.name.clone(), rows: bad });
    }
    Ok(Relation { attrs: names, tuples })
}
