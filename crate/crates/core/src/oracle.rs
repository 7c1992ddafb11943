//! Brute-force sensitivity by enumerating every instance.
//!
//! The universe is the disjoint union of the solution sets of the base
//! relations a query mentions. Every subset of it is a valid database, and
//! two databases are neighbours when they differ in one tuple. With at most
//! [`DEFAULT_CAP`] tuples in the universe all `2^n` instances are evaluated.

use std::collections::BTreeMap;

use num_traits::Signed;
use rayon::prelude::*;

use crate::constraints::ConstrainedSchema;
use crate::engine::{self, Database, Relation, Tuple};
use crate::error::{Error, Result};
use crate::plan::{Catalog, Node, Op, Plan};
use crate::value::{Rational, Value};

pub const DEFAULT_CAP: usize = 12;

/// Largest domain product enumerated while listing the solutions of one
/// relation.
const DOMAIN_PRODUCT_CAP: u128 = 1 << 22;

#[derive(Clone, Debug)]
pub struct Universe {
    /// `(relation, tuple)` pairs; bit `i` of a mask selects item `i`.
    pub items: Vec<(String, Tuple)>,
    pub schemas: BTreeMap<String, Vec<String>>,
}

/// A neighbouring pair realizing the oracle's maximum.
#[derive(Clone, Debug)]
pub struct Witness {
    pub r: Database,
    pub r_plus: Database,
    pub relation: String,
    pub tuple: Tuple,
    pub f_r: Rational,
    pub f_r_plus: Rational,
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub sensitivity: Rational,
    pub witness: Option<Witness>,
    pub universe_size: usize,
}

/// Every tuple of the domain product satisfying the relation's constraint.
pub fn solutions(schema: &ConstrainedSchema, cap: usize) -> Result<Vec<Tuple>> {
    let too_large = |size: String| Error::UniverseTooLarge { size, cap };
    let mut product: u128 = 1;
    let mut columns = Vec::new();
    for a in &schema.attributes {
        let values = a.domain.values().ok_or_else(|| too_large(format!("infinite ({}.{})", schema.name, a.name)))?;
        product = product.saturating_mul(values.len() as u128);
        if product > DOMAIN_PRODUCT_CAP {
            return Err(too_large(format!("domain product of {} exceeds {DOMAIN_PRODUCT_CAP}", schema.name)));
        }
        columns.push(values);
    }
    let mut out = Vec::new();
    let mut current: Vec<Value> = Vec::with_capacity(columns.len());
    enumerate(&columns, &mut current, &mut |t| {
        if schema.admits(t) {
            out.push(t.to_vec());
        }
    });
    if out.len() > cap {
        return Err(too_large(format!("{} ({} solutions)", schema.name, out.len())));
    }
    Ok(out)
}

fn enumerate(columns: &[Vec<Value>], current: &mut Vec<Value>, visit: &mut dyn FnMut(&[Value])) {
    if current.len() == columns.len() {
        visit(current);
        return;
    }
    for v in &columns[current.len()] {
        current.push(v.clone());
        enumerate(columns, current, visit);
        current.pop();
    }
}

impl Universe {
    /// The universe for the base relations referenced under `node`.
    pub fn for_node(node: &Node, catalog: &Catalog, cap: usize) -> Result<Universe> {
        let mut items = Vec::new();
        let mut schemas = BTreeMap::new();
        for n in node.walk() {
            let Op::Relation(name) = &n.op else { continue };
            if schemas.contains_key(name) {
                continue;
            }
            let schema = catalog.get(name).ok_or_else(|| Error::UnknownRelation(name.clone()))?;
            schemas.insert(name.clone(), schema.names());
            for t in solutions(schema, cap)? {
                items.push((name.clone(), t));
            }
        }
        if items.len() > cap {
            return Err(Error::UniverseTooLarge { size: items.len().to_string(), cap });
        }
        Ok(Universe { items, schemas })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn database(&self, mask: u64) -> Database {
        let mut db: Database =
            self.schemas.iter().map(|(n, attrs)| (n.clone(), Relation::empty(attrs.clone()))).collect();
        for (i, (rel, t)) in self.items.iter().enumerate() {
            if mask >> i & 1 == 1 {
                db.get_mut(rel).expect("relation in universe").tuples.insert(t.clone());
            }
        }
        db
    }

    fn masks(&self) -> u64 {
        1u64 << self.items.len()
    }
}

fn eval_all(node: &Node, u: &Universe) -> Result<Vec<Relation>> {
    (0..u.masks()).into_par_iter().map(|m| engine::eval(node, &u.database(m))).collect()
}

fn run_all(plan: &Plan, u: &Universe) -> Result<Vec<Rational>> {
    (0..u.masks()).into_par_iter().map(|m| engine::run(plan, &u.database(m))).collect()
}

/// `max |f(Q(R)) - f(Q(R'))|` over neighbouring instances, with a pair
/// attaining it.
pub fn brute_sensitivity(plan: &Plan, catalog: &Catalog, cap: usize) -> Result<OracleResult> {
    let u = Universe::for_node(&plan.root, catalog, cap)?;
    let values = run_all(plan, &u)?;
    let mut best = Rational::from_integer(0.into());
    let mut witness = None;
    for m in 0..u.masks() {
        for (i, (rel, t)) in u.items.iter().enumerate() {
            if m >> i & 1 == 1 {
                continue;
            }
            let plus = m | 1 << i;
            let d = (&values[plus as usize] - &values[m as usize]).abs();
            if d > best || (witness.is_none() && d == best) {
                best = d;
                witness = Some(Witness {
                    r: u.database(m),
                    r_plus: u.database(plus),
                    relation: rel.clone(),
                    tuple: t.clone(),
                    f_r: values[m as usize].clone(),
                    f_r_plus: values[plus as usize].clone(),
                });
            }
        }
    }
    Ok(OracleResult { sensitivity: best, witness, universe_size: u.len() })
}

/// `max |f(Q(R)) - f(Q(R'))| / d(R, R')` over all pairs of instances.
pub fn brute_sensitivity_all_pairs(plan: &Plan, catalog: &Catalog, cap: usize) -> Result<Rational> {
    let u = Universe::for_node(&plan.root, catalog, cap)?;
    let values = run_all(plan, &u)?;
    Ok(max_ratio(u.masks(), |a, b| (&values[a as usize] - &values[b as usize]).abs()))
}

/// `max |Q(R) Δ Q(R')|` over neighbouring instances.
pub fn brute_body_sensitivity(node: &Node, catalog: &Catalog, cap: usize) -> Result<usize> {
    let u = Universe::for_node(node, catalog, cap)?;
    let results = eval_all(node, &u)?;
    let mut best = 0;
    for m in 0..u.masks() {
        for i in 0..u.len() {
            if m >> i & 1 == 0 {
                best = best.max(results[m as usize].distance(&results[(m | 1 << i) as usize]));
            }
        }
    }
    Ok(best)
}

/// `max |Q(R) Δ Q(R')| / |R Δ R'|` over all pairs of distinct instances.
pub fn brute_lipschitz(node: &Node, catalog: &Catalog, cap: usize) -> Result<Rational> {
    let u = Universe::for_node(node, catalog, cap)?;
    let results = eval_all(node, &u)?;
    Ok(max_ratio(u.masks(), |a, b| Rational::from_integer(results[a as usize].distance(&results[b as usize]).into())))
}

fn max_ratio(masks: u64, diff: impl Fn(u64, u64) -> Rational + Sync) -> Rational {
    (0..masks)
        .into_par_iter()
        .map(|a| {
            let mut best = Rational::from_integer(0.into());
            for b in a + 1..masks {
                let d = Rational::from_integer((a ^ b).count_ones().into());
                let r = diff(a, b) / d;
                if r > best {
                    best = r;
                }
            }
            best
        })
        .max()
        .unwrap_or_else(|| Rational::from_integer(0.into()))
}
