use relsens::analyzer::Analyzer;
use relsens::dp;
use relsens::engine::{self, Database};
use relsens::plan::catalog;
use relsens::syntax::{parse_query, parse_schemas};
use relsens::value::{rat, Ext};
use relsens::Error;

const SCHEMA: &str = r#"
relation People {
    Name: string in {"John", "Tim", "Alice", "Natalie"};
    Age: int [0, 120];
    Height: int [50, 250]
}
"#;

const DATA: &str = "Name,Age,Height\nJohn,30,180\nTim,10,100\nAlice,45,160\nNatalie,20,175\n";

fn load() -> (relsens::plan::Catalog, Database) {
    let schemas = parse_schemas(SCHEMA).unwrap();
    let people = engine::load_csv(DATA.as_bytes(), &schemas[0]).unwrap();
    let mut db = Database::new();
    db.insert("People".into(), people);
    (catalog(schemas), db)
}

#[test]
fn csv_to_exact_answer() {
    let (cat, db) = load();
    let analyzer = Analyzer::default();
    let plan = analyzer.plan(&parse_query("count of select Age >= 20 and Height < 180 from People").unwrap(), &cat).unwrap();
    assert_eq!(engine::run(&plan, &db).unwrap(), rat(2));
    let plan = analyzer.plan(&parse_query("avg(Height) of select Age >= 20 from People").unwrap(), &cat).unwrap();
    assert_eq!(engine::run(&plan, &db).unwrap(), relsens::value::ratio(515, 3));
}

#[test]
fn release_is_calibrated_by_the_analysis() {
    let (cat, db) = load();
    let analyzer = Analyzer::default();
    let plan = analyzer.plan(&parse_query("sum(Age) of select Age <= 50 from People").unwrap(), &cat).unwrap();
    let report = analyzer.analyze_plan(&plan);
    assert_eq!(report.gs, Ext::Fin(rat(50)));
    let exact = engine::run(&plan, &db).unwrap();
    let a = dp::dp_answer(&exact, &report.gs, 0.5, 42).unwrap();
    assert_eq!(a.scale, 100.0);
    assert_eq!(a.noisy, dp::dp_answer(&exact, &report.gs, 0.5, 42).unwrap().noisy);
}

#[test]
fn violating_rows_are_reported() {
    let schemas = parse_schemas(SCHEMA).unwrap();
    let bad = "Name,Age,Height\nJohn,30,180\nBob,10,100\nAlice,145,160\n";
    match engine::load_csv(bad.as_bytes(), &schemas[0]) {
        Err(Error::ConstraintViolation { rows, .. }) => assert_eq!(rows.len(), 2),
        other => panic!("expected a violation, got {other:?}"),
    }
}

#[test]
fn report_serializes_with_exact_and_float_values() {
    let cat = catalog(parse_schemas("relation R { Weight: real [0, 150]; Height: real [0, 200] }").unwrap());
    let report = Analyzer::default()
        .analyze(&parse_query("avg(Weight) of select Weight <= Height - 100 from R").unwrap(), &cat)
        .unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["gs"], "50");
    assert_eq!(json["gs_f64"], 50.0);
    assert_eq!(json["top"]["fn"], "avg");
    assert_eq!(json["top"]["bounds"]["hi"], "100");
    assert_eq!(json["nodes"].as_array().unwrap().len(), 2);

    let cat = catalog(parse_schemas("relation U { x: real [0, inf] }").unwrap());
    let report = Analyzer::default().analyze(&parse_query("sum(x) of U").unwrap(), &cat).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["gs"], "inf");
    assert!(json["gs_f64"].is_null());
}
