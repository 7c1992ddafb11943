//! `relsens`: static sensitivity analysis and Laplace release for
//! relational algebra queries over constrained schemas.
//!
//! Exit codes: 0 success, 1 validation found a violation, 2 input error,
//! 3 unbounded sensitivity, 4 oracle universe too large.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use relsens::analyzer::{Analyzer, AnalyzerConfig, SensitivityReport};
use relsens::constraints::SolverConfig;
use relsens::dp;
use relsens::engine::{self, Database, Relation};
use relsens::oracle::{self, DEFAULT_CAP};
use relsens::plan::{Catalog, OpKind, Plan};
use relsens::query::TopQuery;
use relsens::syntax::{parse_query, parse_schemas};
use relsens::value::{self, format_rational, Ext, Value};

#[derive(Parser)]
#[command(name = "relsens", version, about = "Sensitivity analysis and differentially private release for relational queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the global sensitivity of a query without reading any data.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate a query exactly over CSV data.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: Data,
        /// Print every intermediate relation.
        #[arg(long)]
        trace: bool,
    },
    /// Release the query answer with Laplace noise scaled to GS/epsilon.
    DpRun {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        data: Data,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw this many independent releases instead of one.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Compare the static bound with a brute-force sensitivity computation.
    Validate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Largest universe of tuples the oracle enumerates.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        oracle_cap: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Schema file; may be repeated.
    #[arg(long = "schema", required = true)]
    schemas: Vec<PathBuf>,
    /// Query file.
    query: PathBuf,
    /// Solution count above which diameters are reported as unresolved.
    #[arg(long)]
    enum_cap: Option<u64>,
    /// Largest disjunctive normal form before the solver relaxes.
    #[arg(long)]
    dnf_cap: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct Data {
    /// Data for one relation as NAME=FILE.csv; may be repeated.
    #[arg(long = "data", value_parser = parse_binding)]
    data: Vec<(String, PathBuf)>,
}

#[derive(Args)]
struct Overrides {
    /// Replace an operator's sensitivity, as OP=VALUE (testing only).
    #[arg(long = "delta-override", value_parser = parse_override, hide = true)]
    delta_overrides: Vec<(OpKind, Ext)>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

fn parse_binding(s: &str) -> Result<(String, PathBuf), String> {
    let (name, path) = s.split_once('=').ok_or("expected NAME=FILE")?;
    Ok((name.trim().to_string(), PathBuf::from(path)))
}

fn parse_override(s: &str) -> Result<(OpKind, Ext), String> {
    let (op, v) = s.split_once('=').ok_or("expected OP=VALUE")?;
    let kind = OpKind::from_name(op.trim()).ok_or_else(|| {
        let names: Vec<&str> = OpKind::ALL.iter().map(|k| k.name()).collect();
        format!("unknown operator `{op}`, expected one of {}", names.join(", "))
    })?;
    let v = v.trim();
    let value = if v == "inf" {
        Ext::PosInf
    } else {
        Ext::Fin(value::parse_rational(v).ok_or_else(|| format!("invalid value `{v}`"))?)
    };
    Ok((kind, value))
}

struct Workspace {
    catalog: Catalog,
    query: TopQuery,
    analyzer: Analyzer,
    format: Format,
}

impl Common {
    fn load(&self, overrides: Option<&Overrides>) -> anyhow::Result<Workspace> {
        let mut catalog = Catalog::new();
        for path in &self.schemas {
            let text = read(path)?;
            for s in parse_schemas(&text).with_context(|| path.display().to_string())? {
                if catalog.contains_key(&s.name) {
                    bail!("relation {} is declared twice", s.name);
                }
                catalog.insert(s.name.clone(), s);
            }
        }
        let query = parse_query(&read(&self.query)?).with_context(|| self.query.display().to_string())?;
        let mut solver = SolverConfig::default();
        if let Some(c) = self.enum_cap {
            solver.enum_cap = c;
        }
        if let Some(c) = self.dnf_cap {
            solver.dnf_cap = c;
        }
        let delta_overrides = overrides.map(|o| o.delta_overrides.iter().cloned().collect()).unwrap_or_default();
        let analyzer = Analyzer::new(AnalyzerConfig { solver, delta_overrides });
        Ok(Workspace { catalog, query, analyzer, format: self.format })
    }
}

impl Workspace {
    fn plan(&self) -> anyhow::Result<Plan> {
        Ok(self.analyzer.plan(&self.query, &self.catalog)?)
    }

    fn database(&self, data: &Data) -> anyhow::Result<Database> {
        let mut db = Database::new();
        for (name, path) in &data.data {
            let schema = self.catalog.get(name).ok_or_else(|| relsens::Error::UnknownRelation(name.clone()))?;
            let file = File::open(path).with_context(|| path.display().to_string())?;
            let r = engine::load_csv(file, schema).with_context(|| path.display().to_string())?;
            db.insert(name.clone(), r);
        }
        Ok(db)
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).map_err(relsens::Error::from).with_context(|| path.display().to_string())
}

fn ext_json(e: &Ext) -> (Json, Json) {
    (json!(e.to_string()), if e.is_finite() { json!(e.to_f64()) } else { Json::Null })
}

fn value_json(v: &Value) -> Json {
    match v {
        Value::Str(s) => json!(s),
        Value::Num(r) if r.is_integer() => r.to_integer().to_string().parse::<i64>().map(|i| json!(i)).unwrap_or(json!(format_rational(r))),
        Value::Num(r) => json!(format_rational(r)),
    }
}

fn relation_json(r: &Relation) -> Json {
    let rows: Vec<Json> = r.tuples.iter().map(|t| Json::Array(t.iter().map(value_json).collect())).collect();
    json!({ "attributes": r.attrs, "rows": rows })
}

fn database_json(db: &Database) -> Json {
    Json::Object(db.iter().map(|(n, r)| (n.clone(), relation_json(r))).collect())
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn tuple_text(t: &[Value]) -> String {
    format!("({})", t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
}

fn print_report(r: &SensitivityReport) {
    println!("{:<40} {:>10} {:>8} {:>10}  constraint", "operator", "S", "delta", "diam");
    for n in &r.nodes {
        let op = format!("{}{}", "  ".repeat(n.depth), n.op);
        println!("{op:<40} {:>10} {:>8} {:>10}  {}", n.s.to_string(), n.delta_op.to_string(), n.diam.to_string(), n.constraint_text);
    }
    match &r.top.bounds {
        Some(b) => println!("{}: bounds {b}, delta {}", r.top.f, r.top.delta),
        None => println!("{}: delta {}", r.top.f, r.top.delta),
    }
    println!("GS = {}", r.gs);
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn analyze(ws: &Workspace) -> anyhow::Result<ExitCode> {
    let report = ws.analyzer.analyze_plan(&ws.plan()?);
    warn(&report.warnings);
    match ws.format {
        Format::Json => print_json(&report)?,
        Format::Table => print_report(&report),
    }
    Ok(if report.gs.is_finite() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn run(ws: &Workspace, data: &Data, trace: bool) -> anyhow::Result<ExitCode> {
    let plan = ws.plan()?;
    let db = ws.database(data)?;
    let (result, rows) = engine::eval_traced(&plan.root, &db)?;
    let answer = engine::apply_agg(&plan.top.f, &result, &plan.top.bounds)?;
    match ws.format {
        Format::Json => {
            let mut out = json!({ "result": format_rational(&answer), "result_f64": value::to_f64(&answer) });
            if trace {
                out["trace"] = Json::Array(
                    rows.iter()
                        .map(|t| json!({ "depth": t.depth, "op": t.op, "count": t.result.len(), "relation": relation_json(&t.result) }))
                        .collect(),
                );
            }
            print_json(&out)?;
        }
        Format::Table => {
            if trace {
                for t in &rows {
                    let indent = "  ".repeat(t.depth);
                    println!("{indent}{}  [{} rows]", t.op, t.result.len());
                    println!("{indent}  ({})", t.result.attrs.join(", "));
                    for tuple in &t.result.tuples {
                        println!("{indent}  {}", tuple_text(tuple));
                    }
                }
            }
            println!("{}", format_rational(&answer));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn dp_run(ws: &Workspace, data: &Data, epsilon: f64, seed: u64, samples: Option<usize>) -> anyhow::Result<ExitCode> {
    let plan = ws.plan()?;
    let report = ws.analyzer.analyze_plan(&plan);
    warn(&report.warnings);
    let exact = engine::run(&plan, &ws.database(data)?)?;
    let (gs, gs_f64) = ext_json(&report.gs);
    if let Some(n) = samples {
        let xs = dp::dp_samples(&exact, &report.gs, epsilon, seed, n)?;
        match ws.format {
            Format::Json => print_json(&json!({ "samples": xs, "gs": gs, "gs_f64": gs_f64, "epsilon": epsilon, "seed": seed, "rng": dp::RNG_NAME }))?,
            Format::Table => xs.iter().for_each(|x| println!("{x}")),
        }
        return Ok(ExitCode::SUCCESS);
    }
    let a = dp::dp_answer(&exact, &report.gs, epsilon, seed)?;
    warn(&a.warnings);
    match ws.format {
        Format::Json => print_json(&json!({
            "noisy": a.noisy,
            "gs": gs,
            "gs_f64": gs_f64,
            "epsilon": a.epsilon,
            "scale": a.scale,
            "seed": a.seed,
            "rng": dp::RNG_NAME,
            "mechanism": dp::MECHANISM_NOTE,
        }))?,
        Format::Table => {
            println!("noisy answer  {}", a.noisy);
            println!("GS            {}", report.gs);
            println!("epsilon       {}", a.epsilon);
            println!("scale         {}", a.scale);
            println!("seed          {}", a.seed);
            println!("rng           {}", dp::RNG_NAME);
            println!("mechanism     {}", dp::MECHANISM_NOTE);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(ws: &Workspace, cap: usize) -> anyhow::Result<ExitCode> {
    let plan = ws.plan()?;
    let report = ws.analyzer.analyze_plan(&plan);
    let brute = oracle::brute_sensitivity(&plan, &ws.catalog, cap)?;
    let oracle_value = Ext::Fin(brute.sensitivity.clone());
    let verdict = if oracle_value > report.gs {
        "VIOLATION"
    } else if oracle_value == report.gs {
        "STRICT"
    } else {
        "SOUND"
    };
    let (gs, gs_f64) = ext_json(&report.gs);
    let witness = brute.witness.as_ref().map(|w| {
        json!({
            "R": database_json(&w.r),
            "R_plus": database_json(&w.r_plus),
            "relation": w.relation,
            "tuple": w.tuple.iter().map(value_json).collect::<Vec<_>>(),
            "f_R": format_rational(&w.f_r),
            "f_R_plus": format_rational(&w.f_r_plus),
        })
    });
    match ws.format {
        Format::Json => print_json(&json!({
            "gs": gs,
            "gs_f64": gs_f64,
            "oracle": format_rational(&brute.sensitivity),
            "oracle_f64": value::to_f64(&brute.sensitivity),
            "universe_size": brute.universe_size,
            "witness": witness,
            "verdict": verdict,
        }))?,
        Format::Table => {
            println!("GS        {}", report.gs);
            println!("oracle    {}", format_rational(&brute.sensitivity));
            println!("universe  {} tuples", brute.universe_size);
            if let Some(w) = &brute.witness {
                println!("witness   adding {} to {}", tuple_text(&w.tuple), w.relation);
                for (label, db, f) in [("R", &w.r, &w.f_r), ("R+", &w.r_plus, &w.f_r_plus)] {
                    let rels: Vec<String> = db
                        .iter()
                        .map(|(n, r)| format!("{n} = {{{}}}", r.tuples.iter().map(|t| tuple_text(t)).collect::<Vec<_>>().join(", ")))
                        .collect();
                    println!("  {label:<3} {}  ->  {}", rels.join("; "), format_rational(f));
                }
            }
            println!("{verdict}");
        }
    }
    Ok(if verdict == "VIOLATION" { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<relsens::Error>() {
        Some(relsens::Error::Unbounded(_)) => 3,
        Some(relsens::Error::UniverseTooLarge { .. }) => 4,
        _ => 2,
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Analyze { common, overrides } => analyze(&common.load(Some(&overrides))?),
        Command::Run { common, data, trace } => run(&common.load(None)?, &data, trace),
        Command::DpRun { common, data, epsilon, seed, samples } => {
            if !(epsilon.is_finite() && epsilon > 0.0) {
                return Err(anyhow!(relsens::Error::Param(format!("epsilon must be positive, got {epsilon}"))));
            }
            dp_run(&common.load(None)?, &data, epsilon, seed, samples)
        }
        Command::Validate { common, overrides, oracle_cap } => validate(&common.load(Some(&overrides))?, oracle_cap),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
