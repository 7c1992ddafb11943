//! Concrete syntax: a lexer, recursive-descent parsers for constraints,
//! schema files and queries, and the matching printers.
//!
//! ```text
//! relation Items { Item: string in {"Oil","Salt"}; Price: int [0,1000]; Cost: int [0,1000] }
//!   check { Cost <= Price and 0 < Cost }
//!
//! avg(Weight) of select Weight <= Height - 100 from R
//! ```
//!
//! Printing is fully parenthesized, so `parse(print(x)) == x`.

use std::fmt;

use crate::constraints::{Atom, Attribute, CmpOp, ConstrainedSchema, Constraint, Domain, Term};
use crate::error::{Error, Result};
use crate::query::{AggFn, AggKind, NamedAgg, QueryPlan, TopQuery};
use crate::value::{format_rational, parse_rational, Ext, Rational, Value};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rational),
    Str(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Num(r) => write!(f, "number {}", format_rational(r)),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 17] = ["<=", ">=", "!=", "<", ">", "=", "(", ")", "{", "}", "[", "]", ",", ";", ":", "+", "-"];

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| Error::Parse { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len()
                && (chars[j].is_ascii_alphanumeric()
                    || chars[j] == '_'
                    || (chars[j] == '#' && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit())))
            {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            advance(j - i, &mut i);
            out.push(Spanned { tok: Tok::Ident(word), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '-' || chars[k] == '+') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    j = k;
                }
            }
            if j + 1 < chars.len() && chars[j] == '/' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let text: String = chars[i..j].iter().collect();
            let r = parse_rational(&text).ok_or_else(|| err(tl, tc, format!("malformed number `{text}`")))?;
            advance(j - i, &mut i);
            out.push(Spanned { tok: Tok::Num(r), line: tl, col: tc });
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    None => return Err(err(tl, tc, "unterminated string".into())),
                    Some('"') => break,
                    Some('\\') => {
                        let e = chars.get(j + 1).ok_or_else(|| err(tl, tc, "unterminated string".into()))?;
                        j += 2;
                        match e {
                            'n' => s.push('\n'),
                            't' => s.push('\t'),
                            'r' => s.push('\r'),
                            '0' => s.push('\0'),
                            '\\' | '"' | '\'' => s.push(*e),
                            'u' => {
                                let close = (j..chars.len()).find(|&k| chars[k] == '}');
                                let (Some('{'), Some(close)) = (chars.get(j), close) else {
                                    return Err(err(tl, tc, "malformed unicode escape".into()));
                                };
                                let hex: String = chars[j + 1..close].iter().collect();
                                let ch = u32::from_str_radix(&hex, 16)
                                    .ok()
                                    .and_then(char::from_u32)
                                    .ok_or_else(|| err(tl, tc, "malformed unicode escape".into()))?;
                                s.push(ch);
                                j = close + 1;
                            }
                            other => return Err(err(tl, tc, format!("unknown escape `\\{other}`"))),
                        }
                    }
                    Some(ch) => {
                        s.push(*ch);
                        j += 1;
                    }
                }
            }
            advance(j + 1 - i, &mut i);
            out.push(Spanned { tok: Tok::Str(s), line: tl, col: tc });
            continue;
        }
        if c == '*' {
            advance(1, &mut i);
            out.push(Spanned { tok: Tok::Sym("*"), line: tl, col: tc });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                advance(s.len(), &mut i);
                out.push(Spanned { tok: Tok::Sym(s), line: tl, col: tc });
            }
            None => return Err(err(tl, tc, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

const CONSTRAINT_WORDS: [&str; 9] = ["and", "or", "not", "iff", "in", "true", "false", "inf", "from"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let s = &self.toks[self.pos];
        Err(Error::Parse { line: s.line, col: s.col, msg: msg.into() })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        self.error(format!("expected {wanted}, found {}", self.peek()))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.unexpected(&format!("`{w}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("a name"),
        }
    }

    fn expect_eof(&self) -> Result<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => self.unexpected("end of input"),
        }
    }

    // ---- constraints ----

    fn constraint(&mut self) -> Result<Constraint> {
        let mut lhs = self.disjunction()?;
        while self.eat_word("iff") {
            let rhs = self.disjunction()?;
            lhs = Constraint::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Constraint> {
        let mut parts = vec![self.conjunction()?];
        while self.eat_word("or") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Constraint::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Constraint> {
        let mut parts = vec![self.negation()?];
        while self.eat_word("and") {
            parts.push(self.negation()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Constraint::And(parts) })
    }

    fn negation(&mut self) -> Result<Constraint> {
        if self.eat_word("not") {
            return Ok(Constraint::not(self.negation()?));
        }
        if self.eat_word("true") {
            return Ok(Constraint::True);
        }
        if self.eat_word("false") {
            return Ok(Constraint::False);
        }
        if self.is_sym("(") {
            let save = self.pos;
            self.bump();
            if let Ok(c) = self.constraint() {
                if self.eat_sym(")") {
                    return Ok(c);
                }
            }
            self.pos = save;
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Constraint> {
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Ident(w) if w == "in" => {
                self.bump();
                let set = self.value_set()?;
                return Ok(Constraint::Atom(Atom::Member { term: lhs, set, negated: false }));
            }
            Tok::Ident(w) if w == "not" && matches!(self.peek_at(1), Tok::Ident(x) if x == "in") => {
                self.bump();
                self.bump();
                let set = self.value_set()?;
                return Ok(Constraint::Atom(Atom::Member { term: lhs, set, negated: true }));
            }
            _ => return self.unexpected("a comparison or `in`"),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Constraint::cmp(lhs, op, rhs))
    }

    fn term(&mut self) -> Result<Term> {
        let mut lhs = self.product_term()?;
        loop {
            if self.eat_sym("+") {
                lhs = Term::add(lhs, self.product_term()?);
            } else if self.eat_sym("-") {
                lhs = Term::sub(lhs, self.product_term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product_term(&mut self) -> Result<Term> {
        let mut lhs = self.unary_term()?;
        while self.eat_sym("*") {
            lhs = Term::mul(lhs, self.unary_term()?);
        }
        Ok(lhs)
    }

    fn unary_term(&mut self) -> Result<Term> {
        if self.eat_sym("-") {
            if let Tok::Num(r) = self.peek().clone() {
                self.bump();
                return Ok(Term::Num(-r));
            }
            return Ok(Term::Neg(Box::new(self.unary_term()?)));
        }
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Term::Num(r))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::Str(s))
            }
            Tok::Ident(w) if !CONSTRAINT_WORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(Term::Attr(w))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => self.unexpected("a term"),
        }
    }

    fn literal(&mut self) -> Result<Value> {
        let negative = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Value::Num(if negative { -r } else { r }))
            }
            Tok::Str(s) if !negative => {
                self.bump();
                Ok(Value::Str(s))
            }
            _ => self.unexpected("a literal"),
        }
    }

    fn value_set(&mut self) -> Result<Vec<Value>> {
        self.expect_sym("{")?;
        let mut out = vec![self.literal()?];
        while self.eat_sym(",") {
            out.push(self.literal()?);
        }
        self.expect_sym("}")?;
        Ok(out)
    }

    // ---- schemas ----

    fn schemas(&mut self) -> Result<Vec<ConstrainedSchema>> {
        let mut out: Vec<ConstrainedSchema> = Vec::new();
        while !matches!(self.peek(), Tok::Eof) {
            let s = self.schema()?;
            if out.iter().any(|o| o.name == s.name) {
                return self.error(format!("relation {} declared twice", s.name));
            }
            out.push(s);
        }
        Ok(out)
    }

    fn schema(&mut self) -> Result<ConstrainedSchema> {
        self.expect_word("relation")?;
        let (line, col) = (self.toks[self.pos].line, self.toks[self.pos].col);
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut attrs = Vec::new();
        while !self.is_sym("}") {
            let a = self.ident()?;
            self.expect_sym(":")?;
            attrs.push(Attribute::new(&a, self.domain()?));
            if !self.eat_sym(";") {
                break;
            }
        }
        self.expect_sym("}")?;
        let check = if self.eat_word("check") {
            self.expect_sym("{")?;
            let c = self.constraint()?;
            self.expect_sym("}")?;
            c
        } else {
            Constraint::True
        };
        ConstrainedSchema::new(&name, attrs, check).map_err(|e| Error::Parse { line, col, msg: e.to_string() })
    }

    fn domain(&mut self) -> Result<Domain> {
        let kind = self.ident()?;
        let wrap = |p: &Parser, r: Result<Domain>| r.or_else(|e| p.error(e.to_string()));
        match kind.as_str() {
            "int" | "real" if self.is_sym("[") => {
                self.bump();
                let lo = self.bound()?;
                self.expect_sym(",")?;
                let hi = self.bound()?;
                self.expect_sym("]")?;
                let d = if kind == "int" { Domain::int(lo, hi) } else { Domain::real(lo, hi) };
                wrap(self, d)
            }
            "int" | "num" | "string" => {
                self.expect_word("in")?;
                let set = self.value_set()?;
                let d = if kind == "string" {
                    let strs: Option<Vec<String>> = set.iter().map(|v| v.as_str().map(str::to_string)).collect();
                    match strs {
                        Some(s) => Domain::str_set(s),
                        None => return self.error("string domain lists a number"),
                    }
                } else {
                    let nums: Option<Vec<Rational>> = set.iter().map(|v| v.as_num().cloned()).collect();
                    match nums {
                        Some(n) if kind == "int" && n.iter().any(|r| !r.is_integer()) => {
                            return self.error("int domain lists a non-integer");
                        }
                        Some(n) => Domain::num_set(n),
                        None => return self.error("numeric domain lists a string"),
                    }
                };
                wrap(self, d)
            }
            _ => self.error(format!("unknown domain `{kind}`")),
        }
    }

    fn bound(&mut self) -> Result<Ext> {
        let negative = self.eat_sym("-");
        if !negative {
            self.eat_sym("+");
        }
        if self.eat_word("inf") {
            return Ok(if negative { Ext::NegInf } else { Ext::PosInf });
        }
        match self.peek().clone() {
            Tok::Num(r) => {
                self.bump();
                Ok(Ext::Fin(if negative { -r } else { r }))
            }
            _ => self.unexpected("a bound"),
        }
    }

    // ---- queries ----

    fn top_query(&mut self) -> Result<TopQuery> {
        let f = self.agg_fn()?;
        self.expect_word("of")?;
        let body = self.query()?;
        Ok(TopQuery { f, body })
    }

    fn agg_fn(&mut self) -> Result<AggFn> {
        let name = self.ident()?;
        let Some(kind) = AggKind::from_name(&name) else {
            self.pos -= 1;
            return self.unexpected("an aggregation function");
        };
        if kind == AggKind::Count {
            return Ok(AggFn::count());
        }
        self.expect_sym("(")?;
        let a = self.ident()?;
        self.expect_sym(")")?;
        Ok(AggFn::of(kind, &a))
    }

    fn named_agg(&mut self) -> Result<NamedAgg> {
        let f = self.agg_fn()?;
        let alias = if self.eat_word("as") { Some(self.ident()?) } else { None };
        Ok(NamedAgg { f, alias })
    }

    fn query(&mut self) -> Result<QueryPlan> {
        let mut lhs = self.query_term()?;
        loop {
            let Tok::Ident(w) = self.peek().clone() else { return Ok(lhs) };
            let op = w.as_str();
            if !["union", "intersect", "minus", "product", "product1", "productN", "productagg"].contains(&op) {
                return Ok(lhs);
            }
            self.bump();
            let b = |q: QueryPlan| Box::new(q);
            lhs = match op {
                "union" => QueryPlan::Union(b(lhs), b(self.query_term()?)),
                "intersect" => QueryPlan::Intersection(b(lhs), b(self.query_term()?)),
                "minus" => QueryPlan::Difference(b(lhs), b(self.query_term()?)),
                "product" => QueryPlan::Product(b(lhs), b(self.query_term()?)),
                "product1" => QueryPlan::ProductOne(b(lhs), b(self.query_term()?)),
                "productN" => {
                    let n = match self.peek().clone() {
                        Tok::Num(r) if r.is_integer() && r > Rational::from_integer(0.into()) => {
                            self.bump();
                            r.to_integer().to_string().parse::<usize>().or_else(|_| self.error("block size too large"))?
                        }
                        _ => return self.unexpected("a positive block size"),
                    };
                    QueryPlan::ProductN(n, b(lhs), b(self.query_term()?))
                }
                _ => {
                    let g = self.named_agg()?;
                    QueryPlan::ProductAgg(g, b(lhs), b(self.query_term()?))
                }
            };
        }
    }

    fn query_term(&mut self) -> Result<QueryPlan> {
        if self.eat_sym("(") {
            let q = self.query()?;
            self.expect_sym(")")?;
            return Ok(q);
        }
        let word = self.ident()?;
        match word.as_str() {
            "select" => {
                let c = self.constraint()?;
                self.expect_word("from")?;
                Ok(QueryPlan::Restriction(c, Box::new(self.query_term()?)))
            }
            "project" => {
                let attrs = self.name_list()?;
                self.expect_word("from")?;
                Ok(QueryPlan::Projection(attrs, Box::new(self.query_term()?)))
            }
            "group" => {
                let group_by = if self.is_word("agg") { Vec::new() } else { self.name_list()? };
                self.expect_word("agg")?;
                let mut aggs = vec![self.named_agg()?];
                while self.eat_sym(",") {
                    aggs.push(self.named_agg()?);
                }
                self.expect_word("from")?;
                Ok(QueryPlan::GroupAggregate { group_by, aggs, input: Box::new(self.query_term()?) })
            }
            "values" => self.values(),
            _ => Ok(QueryPlan::Relation(word)),
        }
    }

    fn name_list(&mut self) -> Result<Vec<String>> {
        let mut out = vec![self.ident()?];
        while self.eat_sym(",") {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn values(&mut self) -> Result<QueryPlan> {
        let mut attrs: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        loop {
            self.expect_sym("(")?;
            let mut names = Vec::new();
            let mut row = Vec::new();
            loop {
                names.push(self.ident()?);
                self.expect_sym("=")?;
                row.push(self.literal()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
            match &attrs {
                None => attrs = Some(names),
                Some(a) if *a == names => {}
                Some(_) => return self.error("every row of `values` must list the same attributes in the same order"),
            }
            rows.push(row);
            if !(self.is_sym(",") && matches!(self.peek_at(1), Tok::Sym("("))) {
                break;
            }
            self.bump();
        }
        Ok(QueryPlan::Values { attrs: attrs.unwrap(), rows })
    }
}

pub fn parse_constraint(text: &str) -> Result<Constraint> {
    let mut p = Parser::new(text)?;
    let c = p.constraint()?;
    p.expect_eof()?;
    Ok(c)
}

/// Parses a schema file: any number of `relation` declarations.
pub fn parse_schemas(text: &str) -> Result<Vec<ConstrainedSchema>> {
    Parser::new(text)?.schemas()
}

/// Parses `<fn> of <query>` without resolving names; see
/// [`crate::plan::build`] for validation.
pub fn parse_query(text: &str) -> Result<TopQuery> {
    let mut p = Parser::new(text)?;
    let q = p.top_query()?;
    p.expect_eof()?;
    Ok(q)
}

/// Parses a bare operator tree, without the top-level aggregation.
pub fn parse_plan(text: &str) -> Result<QueryPlan> {
    let mut p = Parser::new(text)?;
    let q = p.query()?;
    p.expect_eof()?;
    Ok(q)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Attr(a) => write!(f, "{a}"),
            Term::Num(r) => write!(f, "{}", format_rational(r)),
            Term::Str(s) => write!(f, "{s:?}"),
            Term::Add(a, b) => write!(f, "({a} + {b})"),
            Term::Sub(a, b) => write!(f, "({a} - {b})"),
            Term::Mul(a, b) => write!(f, "({a} * {b})"),
            Term::Neg(a) => write!(f, "-({a})"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Cmp { lhs, op, rhs } => write!(f, "{lhs} {} {rhs}", op.symbol()),
            Atom::Member { term, set, negated } => {
                let items: Vec<String> = set.iter().map(|v| v.to_string()).collect();
                let kw = if *negated { "not in" } else { "in" };
                write!(f, "{term} {kw} {{{}}}", items.join(", "))
            }
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, cs: &[Constraint], sep: &str, empty: &str| match cs.len() {
            0 => write!(f, "{empty}"),
            1 => write!(f, "{}", cs[0]),
            _ => {
                let parts: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
                write!(f, "({})", parts.join(sep))
            }
        };
        match self {
            Constraint::True => write!(f, "true"),
            Constraint::False => write!(f, "false"),
            Constraint::Atom(a) => write!(f, "{a}"),
            Constraint::Not(c) => write!(f, "not ({c})"),
            Constraint::And(cs) => join(f, cs, " and ", "true"),
            Constraint::Or(cs) => join(f, cs, " or ", "false"),
            Constraint::Iff(a, b) => write!(f, "({a} iff {b})"),
        }
    }
}

fn fmt_bound(e: &Ext) -> String {
    match e {
        Ext::Fin(r) => format_rational(r),
        Ext::PosInf => "inf".into(),
        Ext::NegInf => "-inf".into(),
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |vs: Vec<String>| vs.join(", ");
        match self {
            Domain::Int { lo, hi } => write!(f, "int [{}, {}]", fmt_bound(lo), fmt_bound(hi)),
            Domain::Real { lo, hi } => write!(f, "real [{}, {}]", fmt_bound(lo), fmt_bound(hi)),
            Domain::NumSet(s) => write!(f, "num in {{{}}}", list(s.iter().map(format_rational).collect())),
            Domain::StrSet(s) => write!(f, "string in {{{}}}", list(s.iter().map(|x| format!("{x:?}")).collect())),
        }
    }
}

impl fmt::Display for ConstrainedSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let attrs: Vec<String> = self.attributes.iter().map(|a| format!("{}: {}", a.name, a.domain)).collect();
        write!(f, "relation {} {{ {} }}", self.name, attrs.join("; "))?;
        if self.constraint != Constraint::True {
            write!(f, " check {{ {} }}", self.constraint)?;
        }
        Ok(())
    }
}
