//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relsens::analyzer::{Analyzer, Diam, SensitivityReport};
use relsens::constraints::Satisfiability;
use relsens::dp;
use relsens::engine::{self, Database, Relation};
use relsens::oracle::{self, DEFAULT_CAP};
use relsens::plan::{Catalog, OpKind, Plan};
use relsens::syntax::{parse_query, parse_schemas};
use relsens::value::{rat, ratio, Ext, Rational, Value};

use common::{catalog_of, format_db, render, schema, QueryGen, RelSpec, Size, SWEEP_OPS};

const EXAMPLE_RUNTIME: Duration = Duration::from_secs(1);
const SWEEP_CASES: usize = 200;
const SWEEP_MAX_SOLUTIONS: usize = 10;
const SWEEP_MAX_DEPTH: usize = 4;
const SWEEP_RUNTIME: Duration = Duration::from_secs(300);
const STRICT_MIN_CASES: usize = 20;
const DP_SAMPLES: usize = 1_000_000;
const DP_BINS: usize = 20;
const DP_SIGMAS: f64 = 3.0;
const DP_RATIO_MIN_COUNT: f64 = 10_000.0;
const DP_RUNTIME: Duration = Duration::from_secs(60);
const LAPLACE_MEAN_TOL: f64 = 0.01;
const LAPLACE_VAR: f64 = 2.0;
const LAPLACE_VAR_TOL: f64 = 0.05;
/// Kolmogorov-Smirnov critical value for α = 0.01, times sqrt(n).
const KS_CRITICAL: f64 = 1.628;
const MONOTONE_SCHEMAS: usize = 100;

fn analyze(schema: &str, query: &str) -> (Catalog, Plan, SensitivityReport) {
    let cat = catalog_of(schema);
    let analyzer = Analyzer::default();
    let plan = analyzer.plan(&parse_query(query).unwrap(), &cat).unwrap_or_else(|e| panic!("{query}: {e}"));
    let report = analyzer.analyze_plan(&plan);
    (cat, plan, report)
}

fn fin(r: Rational) -> Ext {
    Ext::Fin(r)
}

fn verdict(n: usize, name: &str, ok: bool, detail: &str) -> bool {
    println!("{} criterion {n}: {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn weight_height() -> bool {
    let schema = "relation R { Weight: real [0, 150]; Height: real [0, 200] }";
    let start = Instant::now();
    let (_, _, plain) = analyze(schema, "avg(Weight) of R");
    let (_, _, filtered) = analyze(schema, "avg(Weight) of select Weight <= Height - 100 from R");
    let took = start.elapsed();
    let ok = plain.gs == fin(rat(75)) && filtered.gs == fin(rat(50)) && took < EXAMPLE_RUNTIME;
    verdict(1, "weight/height example", ok, &format!("GS {} and {} in {took:?}", plain.gs, filtered.gs))
}

fn delta_table() -> bool {
    let schema = "relation S { a: int [0, 9] } relation T { a: int [0, 9] } relation U { b: int [0, 9] }";
    let cases: [(&str, OpKind, Ext); 9] = [
        ("count of S union T", OpKind::Union, fin(rat(2))),
        ("count of S intersect T", OpKind::Intersection, fin(rat(2))),
        ("count of S minus T", OpKind::Difference, fin(rat(2))),
        ("count of select a > 3 from S", OpKind::Restriction, fin(rat(1))),
        ("count of project a from S", OpKind::Projection, fin(rat(1))),
        ("count of (values (c = 0)) product1 S", OpKind::ProductOne, fin(rat(1))),
        ("count of S productN 3 (values (c = 0), (c = 1), (c = 2))", OpKind::ProductN, fin(rat(3))),
        ("count of S product U", OpKind::Product, Ext::PosInf),
        ("count of S productagg max(b) U", OpKind::ProductAgg, fin(rat(1))),
    ];
    let mut bad = Vec::new();
    for (q, kind, want) in &cases {
        let (_, plan, report) = analyze(schema, q);
        if plan.root.op.kind() != *kind || report.nodes[0].delta_op != *want {
            bad.push(format!("{q}: {} = {}", plan.root.op.kind().name(), report.nodes[0].delta_op));
        }
    }
    for b in &bad {
        println!("  {b}");
    }
    verdict(2, "operator sensitivity table", bad.is_empty(), &format!("{} operators checked", cases.len()))
}

fn rel(attrs: &[&str], rows: &[&[Value]]) -> Relation {
    Relation::new(attrs.iter().map(|a| a.to_string()).collect(), rows.iter().map(|r| r.to_vec()))
}

fn s(x: &str) -> Value {
    Value::str(x)
}

fn n(x: i64) -> Value {
    Value::num(x)
}

fn example_tables() -> bool {
    let people = r#"string in {"John", "Tim", "Alice", "Natalie", "Frank"}"#;
    let cars = r#"string in {"Ford", "Renault", "Fiat"}"#;
    let schema = format!(
        "relation P {{ Name: {people}; Age: int [0, 150]; Height: int [0, 250] }}
         relation Own {{ Name: {people}; Age: int [0, 150]; Car: {cars} }}
         relation Cars {{ Car: {cars}; Owner: {people} }}
         relation G {{ Name: {people}; Age: int [0, 150]; Height: int [0, 250]; Car: {cars} }}"
    );
    let cat = catalog_of(&schema);
    let mut db = Database::new();
    db.insert(
        "P".into(),
        rel(
            &["Name", "Age", "Height"],
            &[
                &[s("John"), n(30), n(180)],
                &[s("Tim"), n(10), n(100)],
                &[s("Alice"), n(45), n(160)],
                &[s("Natalie"), n(20), n(175)],
            ],
        ),
    );
    db.insert(
        "Own".into(),
        rel(&["Name", "Age", "Car"], &[&[s("John"), n(30), s("Ford")], &[s("John"), n(30), s("Renault")], &[s("Alice"), n(45), s("Fiat")]]),
    );
    db.insert("Cars".into(), rel(&["Car", "Owner"], &[&[s("Fiat"), s("Alice")], &[s("Ford"), s("Alice")]]));
    db.insert(
        "G".into(),
        rel(
            &["Name", "Age", "Height", "Car"],
            &[
                &[s("Alice"), n(45), n(160), s("Ford")],
                &[s("John"), n(30), n(180), s("Fiat")],
                &[s("Frank"), n(45), n(165), s("Renault")],
                &[s("Natalie"), n(20), n(170), s("Ford")],
            ],
        ),
    );
    let cases = [
        (
            "select Age >= 20 and Height < 180 from P",
            rel(&["Name", "Age", "Height"], &[&[s("Alice"), n(45), n(160)], &[s("Natalie"), n(20), n(175)]]),
        ),
        ("project Name, Age from Own", rel(&["Name", "Age"], &[&[s("John"), n(30)], &[s("Alice"), n(45)]])),
        (
            "(select Name in {\"John\", \"Alice\"} from P) product Cars",
            rel(
                &["Name", "Age", "Height", "Car", "Owner"],
                &[
                    &[s("John"), n(30), n(180), s("Fiat"), s("Alice")],
                    &[s("John"), n(30), n(180), s("Ford"), s("Alice")],
                    &[s("Alice"), n(45), n(160), s("Fiat"), s("Alice")],
                    &[s("Alice"), n(45), n(160), s("Ford"), s("Alice")],
                ],
            ),
        ),
        (
            "group Car agg count, avg(Height) from G",
            rel(&["Car", "count", "avg_Height"], &[&[s("Ford"), n(2), n(165)], &[s("Fiat"), n(1), n(180)], &[s("Renault"), n(1), n(165)]]),
        ),
    ];
    let analyzer = Analyzer::default();
    let mut bad = Vec::new();
    for (q, want) in &cases {
        let plan = analyzer.plan(&parse_query(&format!("count of {q}")).unwrap(), &cat).unwrap();
        let got = engine::eval(&plan.root, &db).unwrap();
        if got.attrs != want.attrs || got.tuples != want.tuples {
            bad.push(format!("{q}: got {:?} {:?}", got.attrs, got.tuples));
        }
    }
    for b in &bad {
        println!("  {b}");
    }
    verdict(3, "example tables", bad.is_empty(), &format!("{} tables compared as sets", cases.len()))
}

fn soundness_sweep() -> bool {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut done, mut rejected, mut strict, mut finite) = (0, 0, 0, 0);
    let mut bad = Vec::new();
    let mut covered = std::collections::BTreeSet::new();
    while done < SWEEP_CASES {
        let rels = schema(&mut rng, Size::Enumerable(SWEEP_MAX_SOLUTIONS));
        let text = render(&rels);
        let query = QueryGen::new(&mut rng, &rels, &SWEEP_OPS).top(SWEEP_MAX_DEPTH);
        let cat = catalog_of(&text);
        let tq = parse_query(&query).unwrap_or_else(|e| panic!("{query}: {e}"));
        assert!(tq.body.depth() <= SWEEP_MAX_DEPTH);
        let analyzer = Analyzer::default();
        let Ok(plan) = analyzer.plan(&tq, &cat) else {
            rejected += 1;
            continue;
        };
        let report = analyzer.analyze_plan(&plan);
        let brute = oracle::brute_sensitivity(&plan, &cat, DEFAULT_CAP).unwrap();
        let body = oracle::brute_body_sensitivity(&plan.root, &cat, DEFAULT_CAP).unwrap();
        let body_ok = report.s >= fin(Rational::from_integer(body.into()));
        if fin(brute.sensitivity.clone()) > report.gs || !body_ok {
            bad.push(format!("{text}{query}: GS {} S {} oracle {} body {body}", report.gs, report.s, brute.sensitivity));
        }
        if fin(brute.sensitivity.clone()) == report.gs {
            strict += 1;
        }
        if report.gs.is_finite() {
            finite += 1;
        }
        for node in plan.root.walk() {
            covered.insert(node.op.kind().name());
        }
        covered.insert(tq.f.kind.name());
        done += 1;
    }
    let took = start.elapsed();
    for b in bad.iter().take(10) {
        println!("  {b}");
    }
    let ok = bad.is_empty() && took < SWEEP_RUNTIME;
    let detail = format!(
        "{done} cases ({rejected} ill-typed draws skipped), {finite} with finite GS, {strict} tight, covering {:?}, {took:?}",
        covered
    );
    verdict(4, "soundness sweep", ok, &detail)
}

fn strictness_suite() -> bool {
    let r = "relation R { a: int [0, 3] }";
    let t = "relation T { a: int [0, 1]; b: int [0, 2] }";
    let z = "relation Z { a: int [0, 0] }";
    let w2 = "relation W { Weight: int in {0, 150} }";
    let w3 = "relation W { Weight: int in {0, 50, 150} }";
    let tagged = "((values (c = 0)) product1 R) union ((values (c = 1)) product1 R)";
    let inter = "(((values (k = 0)) product1 Z) union (values (k = 1, a = 0))) intersect (((values (k = 1)) product1 Z) union (values (k = 0, a = 0)))";
    let diff = "(((values (k = 0)) product1 Z) union ((values (k = 1)) product1 Z)) minus (values (k = 2, a = 0))";
    let block = "R productN 2 (values (c = 0), (c = 1))";
    let cases: Vec<(&str, String, Rational)> = vec![
        (r, "count of R".into(), rat(1)),
        (r, "sum(a) of R".into(), rat(3)),
        (r, "max(a) of R".into(), rat(3)),
        (r, "min(a) of R".into(), rat(3)),
        (r, "avg(a) of R".into(), ratio(3, 2)),
        (w2, "avg(Weight) of W".into(), rat(75)),
        (w3, "sum(Weight) of select Weight <= 100 from W".into(), rat(50)),
        (w3, "avg(Weight) of select Weight <= 100 from W".into(), rat(25)),
        (r, "count of select a >= 1 from R".into(), rat(1)),
        (r, "max(a) of select a >= 1 from R".into(), rat(2)),
        (r, "min(a) of select a <= 2 from R".into(), rat(2)),
        (r, "avg(a) of select a >= 1 from R".into(), rat(1)),
        (t, "count of project a from T".into(), rat(1)),
        (t, "sum(b) of project b from T".into(), rat(2)),
        (t, "min(b) of project b from T".into(), rat(2)),
        (t, "avg(b) of project b from T".into(), rat(1)),
        (r, format!("count of {tagged}"), rat(2)),
        (r, format!("sum(a) of {tagged}"), rat(6)),
        (r, format!("max(a) of {tagged}"), rat(3)),
        (z, format!("count of {inter}"), rat(2)),
        (z, format!("count of {diff}"), rat(2)),
        (r, "count of (values (c = 0)) product1 R".into(), rat(1)),
        (r, "sum(a) of (values (c = 0)) product1 R".into(), rat(3)),
        (r, "avg(a) of (values (c = 0)) product1 R".into(), ratio(3, 2)),
        (r, format!("count of {block}"), rat(2)),
        (r, format!("sum(a) of {block}"), rat(6)),
        (r, "count of R productagg count (values (c = 0))".into(), rat(1)),
        (r, "sum(a) of R productagg max(c) (values (c = 0), (c = 4))".into(), rat(3)),
        ("relation R { a: int [0, 3] } relation Z { b: int [0, 0] }", "count of R product Z".into(), rat(4)),
        (r, "max(m) of group agg max(a) as m from R".into(), rat(3)),
        (t, "min(m) of group a agg min(b) as m from T".into(), rat(2)),
        (t, "max(m) of group a agg max(b) as m from T".into(), rat(2)),
    ];
    let mut bad = Vec::new();
    let mut covered = std::collections::BTreeSet::new();
    for (schema, query, want) in &cases {
        let (cat, plan, report) = analyze(schema, query);
        let brute = oracle::brute_sensitivity(&plan, &cat, DEFAULT_CAP).unwrap();
        let pairs = oracle::brute_sensitivity_all_pairs(&plan, &cat, DEFAULT_CAP).unwrap();
        let w = brute.witness.as_ref().expect("witness");
        println!(
            "  {query}: GS {} oracle {} witness R: {} R+: {} ({} -> {})",
            report.gs,
            brute.sensitivity,
            format_db(&w.r),
            format_db(&w.r_plus),
            w.f_r,
            w.f_r_plus
        );
        if report.gs != fin(want.clone()) || brute.sensitivity != *want || pairs != brute.sensitivity {
            bad.push(format!("{query}: expected {want}, GS {}, oracle {}, all-pairs {pairs}", report.gs, brute.sensitivity));
        }
        for node in plan.root.walk() {
            covered.insert((node.op.kind().name(), plan.top.f.kind.name()));
        }
    }
    let loose = [
        (t, "count of group a agg count as n from T"),
        (r, "count of R minus select a = 1 from R"),
        (r, "avg(a) of ((values (c = 0)) product1 R) union ((values (c = 1)) product1 R)"),
    ];
    for (schema, query) in loose {
        let (cat, plan, report) = analyze(schema, query);
        let brute = oracle::brute_sensitivity(&plan, &cat, DEFAULT_CAP).unwrap();
        println!("  not tight, outside the suite: {query}: GS {} oracle {}", report.gs, brute.sensitivity);
    }
    for b in &bad {
        println!("  {b}");
    }
    let ok = bad.is_empty() && cases.len() >= STRICT_MIN_CASES;
    verdict(5, "strictness suite", ok, &format!("{} cases, {} (operator, function) pairs, GS = oracle", cases.len(), covered.len()))
}

fn diameter_cap() -> bool {
    let k6 = "relation K { a: int [0, 2]; b: int [0, 1] }";
    let ab = "relation A { a: int [0, 1] } relation B { b: int [0, 2] }";
    let plans = [
        (k6, "count of K"),
        (k6, "count of select a >= 1 from K"),
        (k6, "count of project a from K"),
        (k6, "count of ((values (c = 0)) product1 K) union ((values (c = 1)) product1 K)"),
        (k6, "count of K minus select a = 1 from K"),
        (k6, "count of group a agg count as n from K"),
        (k6, "count of K productN 2 (values (c = 0), (c = 1))"),
        (k6, "count of (project a from K) product (project b from K)"),
        (ab, "count of A product B"),
        (ab, "count of ((values (c = 0)) product1 A) product B"),
    ];
    let mut bad = Vec::new();
    let k = fin(rat(6));
    for (schema, query) in &plans {
        let (cat, plan, report) = analyze(schema, query);
        let nodes = plan.root.walk();
        for (node, nr) in nodes.iter().zip(&report.nodes) {
            let lip = oracle::brute_lipschitz(node, &cat, DEFAULT_CAP).unwrap();
            if fin(lip.clone()) > nr.s {
                bad.push(format!("{query}: node {} has S {} below the Lipschitz constant {lip}", nr.op, nr.s));
            }
        }
        if report.s > k {
            bad.push(format!("{query}: S {} exceeds {k}", report.s));
        }
        if plan.root.op.kind() == OpKind::Product {
            let top = &report.nodes[0];
            if top.delta_op != Ext::PosInf || top.diam != Diam::Exact(6) || top.s != k {
                bad.push(format!("{query}: product reported S {} diam {}", top.s, top.diam));
            }
        }
    }
    for b in &bad {
        println!("  {b}");
    }
    verdict(6, "diameter cap", bad.is_empty(), &format!("{} plans, every node checked against the brute-force Lipschitz constant", plans.len()))
}

fn histogram(xs: &[f64], lo: f64, width: f64) -> Vec<f64> {
    let mut bins = vec![0.0; DP_BINS];
    for &x in xs {
        let i = ((x - lo) / width).floor().clamp(0.0, (DP_BINS - 1) as f64) as usize;
        bins[i] += 1.0;
    }
    bins
}

fn empirical_dp() -> bool {
    let start = Instant::now();
    let schema = "relation R { a: int [0, 3] }";
    let (_, plan, report) = analyze(schema, "count of R");
    let attrs = vec!["a".to_string()];
    let db = |rows: &[i64]| -> Database {
        [("R".to_string(), Relation::new(attrs.clone(), rows.iter().map(|&v| vec![n(v)])))].into_iter().collect()
    };
    let exact = engine::run(&plan, &db(&[0, 1, 2])).unwrap();
    let exact_plus = engine::run(&plan, &db(&[0, 1, 2, 3])).unwrap();
    let epsilon = std::f64::consts::LN_2;
    let xs = dp::dp_samples(&exact, &report.gs, epsilon, 11, DP_SAMPLES).unwrap();
    let ys = dp::dp_samples(&exact_plus, &report.gs, epsilon, 12, DP_SAMPLES).unwrap();
    let center = (value_f64(&exact) + value_f64(&exact_plus)) / 2.0;
    let lo = center - DP_BINS as f64 / 2.0;
    let (hx, hy) = (histogram(&xs, lo, 1.0), histogram(&ys, lo, 1.0));
    let e = epsilon.exp();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, (a, b)) in hx.iter().zip(&hy).enumerate() {
        let slack = DP_SIGMAS * (a + e * e * b).sqrt();
        let slack_rev = DP_SIGMAS * (b + e * e * a).sqrt();
        if *a > e * b + slack || *b > e * a + slack_rev {
            bad.push(format!("bin {i}: {a} vs {b}"));
        }
        if a.min(*b) >= DP_RATIO_MIN_COUNT {
            worst = worst.max((a / b).max(b / a));
        }
    }
    let took = start.elapsed();
    for b in &bad {
        println!("  {b}");
    }
    let ok = report.gs == fin(rat(1)) && bad.is_empty() && took < DP_RUNTIME;
    let detail = format!("{DP_SAMPLES} samples per instance, {DP_BINS} bins, largest ratio over bins with at least {DP_RATIO_MIN_COUNT} samples {worst:.4} vs e^eps {e:.4}, {took:?}");
    verdict(7, "empirical privacy", ok, &detail)
}

fn value_f64(r: &Rational) -> f64 {
    relsens::value::to_f64(r)
}

fn laplace_cdf(z: f64) -> f64 {
    if z < 0.0 {
        0.5 * z.exp()
    } else {
        1.0 - 0.5 * (-z).exp()
    }
}

fn laplace_law() -> bool {
    let mut rng = dp::rng(2024);
    let mut xs: Vec<f64> = (0..DP_SAMPLES).map(|_| dp::laplace_sample(&mut rng, 1.0)).collect();
    let nf = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = laplace_cdf(x);
            ((i + 1) as f64 / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    let critical = KS_CRITICAL / nf.sqrt();
    let ok = mean.abs() < LAPLACE_MEAN_TOL && (var - LAPLACE_VAR).abs() <= LAPLACE_VAR_TOL && d <= critical;
    verdict(8, "Laplace sampler", ok, &format!("mean {mean:.5}, variance {var:.5}, KS {d:.6} (critical {critical:.6})"))
}

fn monotonicity() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x90d);
    let analyzer = Analyzer::default();
    let mut bad = Vec::new();
    let mut done = 0;
    let mut decreased = 0;
    let mut attempts = 0;
    while done < MONOTONE_SCHEMAS {
        attempts += 1;
        assert!(attempts < 100 * MONOTONE_SCHEMAS, "too many rejected draws");
        let rels = schema(&mut rng, Size::Wide);
        let query = QueryGen::new(&mut rng, &rels, &SWEEP_OPS).top(3);
        let tq = parse_query(&query).unwrap();
        let Ok(before) = analyzer.analyze(&tq, &catalog_of(&render(&rels))) else { continue };
        let mut tightened: Vec<RelSpec> = rels.clone();
        let target = rand::Rng::gen_range(&mut rng, 0..tightened.len());
        let extra = common::atom(&mut rng, &tightened[target].cols());
        tightened[target].checks.push(extra.clone());
        let text = render(&tightened);
        let Ok(schemas) = parse_schemas(&text) else { continue };
        let s = &schemas[target];
        if analyzer.solver.satisfiable(&s.initial_constraint(), s) != Satisfiability::Yes {
            continue;
        }
        let after = analyzer.analyze(&tq, &catalog_of(&text)).unwrap_or_else(|e| panic!("{text}{query}: {e}"));
        if after.gs > before.gs {
            bad.push(format!("{text}{query} with {extra}: GS {} -> {}", before.gs, after.gs));
        }
        if after.gs < before.gs {
            decreased += 1;
        }
        done += 1;
    }
    for b in bad.iter().take(10) {
        println!("  {b}");
    }
    verdict(9, "constraint monotonicity", bad.is_empty(), &format!("{done} schemas, GS strictly lower in {decreased}"))
}

fn main() {
    let results = [
        weight_height(),
        delta_table(),
        example_tables(),
        soundness_sweep(),
        strictness_suite(),
        diameter_cap(),
        empirical_dp(),
        laplace_law(),
        monotonicity(),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
