//! Random schemas and queries shared by the integration tests.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use relsens::engine::Database;
use relsens::oracle;
use relsens::plan::catalog;
use relsens::syntax::parse_schemas;

pub const STRINGS: [&str; 3] = ["x", "y", "z"];

#[derive(Clone, Debug)]
pub struct Col {
    pub name: String,
    pub numeric: bool,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Clone, Debug)]
pub struct RelSpec {
    pub name: String,
    pub attrs: Vec<(Col, String)>,
    pub checks: Vec<String>,
}

impl RelSpec {
    pub fn cols(&self) -> Vec<Col> {
        self.attrs.iter().map(|(c, _)| c.clone()).collect()
    }
}

pub fn render(rels: &[RelSpec]) -> String {
    let mut out = String::new();
    for r in rels {
        let attrs: Vec<String> = r.attrs.iter().map(|(c, d)| format!("{}: {d}", c.name)).collect();
        out.push_str(&format!("relation {} {{ {} }}", r.name, attrs.join("; ")));
        if !r.checks.is_empty() {
            out.push_str(&format!(" check {{ {} }}", r.checks.join(" and ")));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Size {
    /// Every domain finite, at most `n` solutions over all relations.
    Enumerable(usize),
    /// Larger and possibly continuous domains.
    Wide,
}

fn column<R: Rng>(rng: &mut R, name: &str, size: Size) -> (Col, String) {
    let num = |lo: i64, hi: i64| Col { name: name.into(), numeric: true, lo, hi };
    match (size, rng.gen_range(0..5)) {
        (_, 0) => (
            Col { name: name.into(), numeric: false, lo: 0, hi: 0 },
            format!("string in {{{}}}", STRINGS[..rng.gen_range(1..=3)].iter().map(|s| format!("{s:?}")).collect::<Vec<_>>().join(", ")),
        ),
        (_, 1) => {
            let vals = [-2i64, 0, 1, 3, 5];
            let k = rng.gen_range(1..=3);
            let mut pick: Vec<i64> = vals.choose_multiple(rng, k).cloned().collect();
            pick.sort();
            let text = pick.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
            (num(pick[0], *pick.last().unwrap()), format!("int in {{{text}}}"))
        }
        (Size::Wide, 2) => {
            let lo = rng.gen_range(-10..=5);
            let hi = lo + rng.gen_range(0..=20);
            (num(lo, hi), format!("real [{lo}, {hi}]"))
        }
        (Size::Wide, _) => {
            let lo = rng.gen_range(-10..=5);
            let hi = lo + rng.gen_range(0..=30);
            (num(lo, hi), format!("int [{lo}, {hi}]"))
        }
        (Size::Enumerable(_), _) => {
            let lo = rng.gen_range(-1..=1);
            let hi = lo + rng.gen_range(0..=3);
            (num(lo, hi), format!("int [{lo}, {hi}]"))
        }
    }
}

fn constant<R: Rng>(rng: &mut R, c: &Col) -> String {
    if c.numeric {
        rng.gen_range(c.lo - 1..=c.hi + 1).to_string()
    } else {
        format!("{:?}", STRINGS.choose(rng).unwrap())
    }
}

/// An atom over `cols`, occasionally combined with `not`, `and`, `or`.
pub fn atom<R: Rng>(rng: &mut R, cols: &[Col]) -> String {
    let op = *["<", "<=", "=", "!=", ">=", ">"].choose(rng).unwrap();
    let c = cols.choose(rng).unwrap();
    let base = if !c.numeric {
        match rng.gen_range(0..3) {
            0 => format!("{} = {}", c.name, constant(rng, c)),
            1 => format!("{} in {{{}, {}}}", c.name, constant(rng, c), constant(rng, c)),
            _ => format!("{} not in {{{}}}", c.name, constant(rng, c)),
        }
    } else {
        let others: Vec<&Col> = cols.iter().filter(|o| o.numeric && o.name != c.name).collect();
        match (rng.gen_range(0..4), others.choose(rng)) {
            (0, Some(o)) => format!("{} {op} {}", c.name, o.name),
            (1, Some(o)) => {
                let k = rng.gen_range(c.lo + o.lo - 1..=c.hi + o.hi + 1);
                format!("{} + {} {op} {k}", c.name, o.name)
            }
            _ => format!("{} {op} {}", c.name, constant(rng, c)),
        }
    };
    match rng.gen_range(0..10) {
        0 => format!("not ({base})"),
        1 => format!("({base} and {})", atom(rng, cols)),
        2 => format!("({base} or {})", atom(rng, cols)),
        _ => base,
    }
}

/// One relation `R`, sometimes a second relation `S` over the same
/// attributes.
pub fn schema<R: Rng>(rng: &mut R, size: Size) -> Vec<RelSpec> {
    loop {
        let n = rng.gen_range(1..=3);
        let attrs: Vec<(Col, String)> = ["a", "b", "d"][..n].iter().map(|name| column(rng, name, size)).collect();
        let cols: Vec<Col> = attrs.iter().map(|(c, _)| c.clone()).collect();
        let mut rels = vec![RelSpec { name: "R".into(), attrs: attrs.clone(), checks: vec![] }];
        if rng.gen_bool(0.5) {
            rels.push(RelSpec { name: "S".into(), attrs, checks: vec![] });
        }
        for r in &mut rels {
            if rng.gen_bool(0.5) {
                r.checks.push(atom(rng, &cols));
            }
        }
        match size {
            Size::Wide => return rels,
            Size::Enumerable(cap) => {
                let Ok(schemas) = parse_schemas(&render(&rels)) else { continue };
                let mut total = 0;
                let mut ok = true;
                for s in &schemas {
                    match oracle::solutions(s, cap) {
                        Ok(sol) if !sol.is_empty() => total += sol.len(),
                        _ => ok = false,
                    }
                }
                if ok && total <= cap {
                    return rels;
                }
            }
        }
    }
}

/// Generates query text over a schema from [`schema`], tracking the
/// attributes of every subquery.
pub struct QueryGen<'a, R> {
    pub rng: &'a mut R,
    pub rels: &'a [RelSpec],
    pub ops: &'a [&'a str],
    fresh: usize,
}

pub const SWEEP_OPS: [&str; 7] = ["union", "intersect", "minus", "select", "project", "product1", "group"];

impl<'a, R: Rng> QueryGen<'a, R> {
    pub fn new(rng: &'a mut R, rels: &'a [RelSpec], ops: &'a [&'a str]) -> Self {
        QueryGen { rng, rels, ops, fresh: 0 }
    }

    fn fresh(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn base(&mut self) -> (String, Vec<Col>) {
        let r = self.rels.choose(self.rng).unwrap();
        (r.name.clone(), r.cols())
    }

    /// A query with at most `depth` operators on any path.
    pub fn body(&mut self, depth: usize) -> (String, Vec<Col>) {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.base();
        }
        let op = *self.ops.choose(self.rng).unwrap();
        match op {
            "union" | "intersect" | "minus" => {
                let (q1, cols) = self.body(depth - 1);
                let q2 = self.same_attrs(&cols, depth - 1);
                (format!("({q1}) {op} ({q2})"), cols)
            }
            "select" => {
                let (q, cols) = self.body(depth - 1);
                let phi = atom(self.rng, &cols);
                (format!("select {phi} from ({q})"), cols)
            }
            "project" => {
                let (q, cols) = self.body(depth - 1);
                let k = self.rng.gen_range(1..=cols.len());
                let keep: Vec<Col> = cols.choose_multiple(self.rng, k).cloned().collect();
                let names: Vec<&str> = keep.iter().map(|c| c.name.as_str()).collect();
                (format!("project {} from ({q})", names.join(", ")), keep)
            }
            "product1" => {
                let (q, mut cols) = self.body(depth - 1);
                let c = self.fresh("c");
                let k = self.rng.gen_range(0..=2);
                cols.push(Col { name: c.clone(), numeric: true, lo: k, hi: k });
                (format!("(values ({c} = {k})) product1 ({q})"), cols)
            }
            "group" => {
                let (q, cols) = self.body(depth - 1);
                let nk = self.rng.gen_range(0..=cols.len().min(2));
                let keys: Vec<Col> = cols.choose_multiple(self.rng, nk).cloned().collect();
                let mut out = keys.clone();
                let mut aggs = Vec::new();
                for _ in 0..self.rng.gen_range(1..=2) {
                    let g = self.fresh("g");
                    let numeric: Vec<&Col> = cols.iter().filter(|c| c.numeric).collect();
                    let kind = *["count", "sum", "max", "min", "avg"].choose(self.rng).unwrap();
                    match numeric.choose(self.rng) {
                        Some(c) if kind != "count" => {
                            let (lo, hi) = if kind == "sum" { (c.lo.min(0) * 4, c.hi.max(0) * 4) } else { (c.lo, c.hi) };
                            aggs.push(format!("{kind}({}) as {g}", c.name));
                            out.push(Col { name: g, numeric: true, lo, hi });
                        }
                        _ => {
                            aggs.push(format!("count as {g}"));
                            out.push(Col { name: g, numeric: true, lo: 0, hi: 10 });
                        }
                    }
                }
                let names: Vec<&str> = keys.iter().map(|c| c.name.as_str()).collect();
                let keys_text = if names.is_empty() { String::new() } else { format!("{} ", names.join(", ")) };
                (format!("group {keys_text}agg {} from ({q})", aggs.join(", ")), out)
            }
            other => panic!("unknown operator {other}"),
        }
    }

    /// A second operand for a set operation whose result has `cols`, using
    /// at most `depth` operators.
    fn same_attrs(&mut self, cols: &[Col], depth: usize) -> String {
        let base = self.rels[0].cols();
        let within_base = cols.iter().all(|c| base.iter().any(|b| b.name == c.name));
        let project = usize::from(cols.len() != base.len());
        if within_base && depth >= project && self.rng.gen_bool(0.7) {
            let mut q = self.rels.choose(self.rng).unwrap().name.clone();
            if depth > project && self.rng.gen_bool(0.5) {
                q = format!("select {} from ({q})", atom(self.rng, &base));
            }
            if project == 1 {
                let names: Vec<&str> = cols.iter().map(|c| c.name.as_str()).collect();
                q = format!("project {} from ({q})", names.join(", "));
            }
            return q;
        }
        let literal: Vec<String> = cols.iter().map(|c| format!("{} = {}", c.name, constant(self.rng, c))).collect();
        let values = format!("values ({})", literal.join(", "));
        if depth > 0 && self.rng.gen_bool(0.5) {
            format!("select {} from ({values})", atom(self.rng, cols))
        } else {
            values
        }
    }

    /// `f of body` with `f` fitting the body's attributes.
    pub fn top(&mut self, depth: usize) -> String {
        let (q, cols) = self.body(depth);
        let numeric: Vec<&Col> = cols.iter().filter(|c| c.numeric).collect();
        let kind = *["count", "sum", "max", "min", "avg"].choose(self.rng).unwrap();
        match numeric.choose(self.rng) {
            Some(c) if kind != "count" => format!("{kind}({}) of {q}", c.name),
            _ => format!("count of {q}"),
        }
    }
}

pub fn catalog_of(text: &str) -> relsens::plan::Catalog {
    catalog(parse_schemas(text).expect("generated schema parses"))
}

pub fn format_db(db: &Database) -> String {
    db.iter()
        .map(|(name, r)| {
            let rows: Vec<String> = r
                .tuples
                .iter()
                .map(|t| format!("({})", t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")))
                .collect();
            format!("{name}={{{}}}", rows.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}
