//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 usage or input error.

use clap::{Args, Parser, Subcommand};
use lie_realize::{algebra, catalog, liefield, parser, proofcheck, symexpr};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "lie-realize", version, about = "Exact toolkit for vector-field realizations of the unsolvable real Lie algebras of dimension <= 4")]
struct Cli {
    /// Emit a machine-readable JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for all randomized suites (env: LIE_REALIZE_SEED).
    #[arg(long, global = true, env = "LIE_REALIZE_SEED", default_value_t = 42)]
    seed: u64,
    /// Run sampling suites on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lie bracket of two fields from a field-list file.
    Bracket {
        /// File with one vector field per line.
        #[arg(long)]
        fields: std::path::PathBuf,
        /// 1-based pair of field indices.
        #[arg(long, num_args = 2, value_names = ["I", "J"])]
        pair: Vec<usize>,
        /// Override the inferred variable count.
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
    /// Verify catalog entries against their commutation relations.
    Verify(VerifyArgs),
    /// Identify the algebra behind a structure-constant JSON file or a
    /// bracket-closed field list.
    Identify { path: std::path::PathBuf },
    /// Catalog inspection.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Killing form and signature of an algebra given by structure constants
    /// or by a field list.
    Killing { path: std::path::PathBuf },
    /// Push fields forward through a polynomial coordinate change.
    Pushforward {
        #[arg(long)]
        fields: std::path::PathBuf,
        /// Map file: a `forward:` section and an `inverse:` section, one
        /// component expression per line.
        #[arg(long)]
        map: std::path::PathBuf,
        /// Only push the given 1-based field (default: all).
        #[arg(long)]
        index: Option<usize>,
    },
    /// Integrate the flow of one field from a point.
    Flow {
        #[arg(long)]
        fields: std::path::PathBuf,
        /// 1-based field index.
        #[arg(long, default_value_t = 1)]
        index: usize,
        /// Comma-separated start coordinates.
        #[arg(long)]
        point: String,
        #[arg(long)]
        eps: f64,
        /// Fixed RK4 step count (default: max(100, 1000|eps|)).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run the mechanical proof checks.
    Proofcheck {
        /// transform | commutant | lie-ode | rho4 | remark | all
        name: String,
        /// Trial count for the randomized suites.
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Sample count for the coordinate checks.
        #[arg(long, default_value_t = 120)]
        samples: usize,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Verify every entry over every admissible parameter value.
    #[arg(long)]
    all: bool,
    /// Algebra tag (sl2R | so3 | sl2R_plus_A1 | so3_plus_A1).
    #[arg(long)]
    algebra: Option<String>,
    /// Catalog index N in R(algebra, N).
    #[arg(long)]
    realization: Option<u32>,
    /// Variable count (default: the entry's minimum).
    #[arg(long)]
    n: Option<u32>,
    /// Parameter assignment, e.g. `c=-1` (repeatable).
    #[arg(long = "param")]
    params: Vec<String>,
    /// With --all: how far above n_min to test each entry.
    #[arg(long, default_value_t = 1)]
    extra_n: u32,
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Print every entry.
    List,
}

/// Input or usage problem: exit code 2.
struct UsageError(String);

impl<T: std::fmt::Display> From<T> for UsageError {
    fn from(e: T) -> Self {
        UsageError(e.to_string())
    }
}

/// What a command produced: a payload plus pass/fail.
struct Outcome {
    ok: bool,
    payload: Value,
    text: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let parallel = !cli.sequential;
    let result = match &cli.command {
        Command::Bracket { fields, pair, n } => cmd_bracket(fields, pair, *n),
        Command::Verify(args) => cmd_verify(args, parallel),
        Command::Identify { path } => cmd_identify(path),
        Command::Catalog {
            action: CatalogAction::List,
        } => cmd_catalog_list(),
        Command::Killing { path } => cmd_killing(path),
        Command::Pushforward { fields, map, index } => cmd_pushforward(fields, map, *index),
        Command::Flow {
            fields,
            index,
            point,
            eps,
            steps,
        } => cmd_flow(fields, *index, point, *eps, *steps),
        Command::Proofcheck {
            name,
            trials,
            samples,
        } => cmd_proofcheck(name, *trials, *samples, cli.seed, parallel),
    };
    let command_name = match &cli.command {
        Command::Bracket { .. } => "bracket",
        Command::Verify(_) => "verify",
        Command::Identify { .. } => "identify",
        Command::Catalog { .. } => "catalog list",
        Command::Killing { .. } => "killing",
        Command::Pushforward { .. } => "pushforward",
        Command::Flow { .. } => "flow",
        Command::Proofcheck { .. } => "proofcheck",
    };
    match result {
        Ok(outcome) => {
            if cli.json {
                let report = json!({
                    "command": command_name,
                    "status": if outcome.ok { "ok" } else { "fail" },
                    "payload": outcome.payload,
                    "seed": cli.seed,
                });
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!("{}", outcome.text.trim_end());
            }
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_fields(path: &std::path::Path, n: u32) -> Result<Vec<liefield::VectorField>, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    Ok(parser::parse_field_list(&text, n)?)
}

fn cmd_bracket(path: &std::path::Path, pair: &[usize], n: u32) -> Result<Outcome, UsageError> {
    let fields = read_fields(path, n)?;
    let [i, j] = pair else {
        return Err(UsageError("--pair needs exactly two indices".into()));
    };
    let pick = |k: usize| {
        fields
            .get(k.checked_sub(1).ok_or(UsageError("indices are 1-based".into()))?)
            .ok_or(UsageError(format!("no field {k} (the file has {})", fields.len())))
    };
    let bracket = liefield::lie_bracket(pick(*i)?, pick(*j)?)?;
    Ok(Outcome {
        ok: true,
        payload: json!({ "bracket": bracket.to_json(), "printed": bracket.to_string() }),
        text: format!("[e{i}, e{j}] = {bracket}"),
    })
}

fn parse_param_args(args: &[String]) -> Result<BTreeMap<String, symexpr::Rat>, UsageError> {
    let mut out = BTreeMap::new();
    for a in args {
        let (name, value) = a
            .split_once('=')
            .ok_or(UsageError(format!("bad --param `{a}`, expected name=value")))?;
        let value = symexpr::Rat::from_str(value.trim())
            .map_err(|e| UsageError(format!("bad rational `{value}`: {e}")))?;
        out.insert(name.trim().to_string(), value);
    }
    Ok(out)
}

fn discrepancy_json(d: &catalog::Discrepancy) -> Value {
    json!({
        "algebra": d.algebra.to_string(),
        "index": d.index,
        "n": d.n,
        "params": d.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect::<BTreeMap<_, _>>(),
        "failure": d.failure.to_string(),
        "printed": d.printed,
    })
}

fn cmd_verify(args: &VerifyArgs, parallel: bool) -> Result<Outcome, UsageError> {
    let discrepancies: Vec<catalog::Discrepancy> = if args.all {
        catalog::verify_all(args.extra_n, parallel)?
    } else {
        let tag = args
            .algebra
            .as_deref()
            .and_then(algebra::AlgebraTag::parse)
            .ok_or(UsageError("need --all, or --algebra with a valid tag".into()))?;
        let index = args
            .realization
            .ok_or(UsageError("need --realization together with --algebra".into()))?;
        let entry = catalog::find_entry(tag, index)?;
        let n = args.n.unwrap_or(entry.n_min);
        let given = parse_param_args(&args.params)?;
        let assignments = if given.is_empty() {
            entry.param_assignments()
        } else {
            vec![given]
        };
        let mut found = Vec::new();
        for params in &assignments {
            if let Err(d) = catalog::verify_entry(entry, n, params)? {
                found.push(d);
            }
        }
        found
    };
    let ok = discrepancies.is_empty();
    let text = if ok {
        "ok: all checked realizations satisfy their commutation relations and are faithful".into()
    } else {
        discrepancies
            .iter()
            .map(|d| format!("FAIL R({}, {}) at n={}: {}", d.algebra, d.index, d.n, d.failure))
            .collect::<Vec<_>>()
            .join("\n")
    };
    Ok(Outcome {
        ok,
        payload: json!({ "discrepancies": discrepancies.iter().map(discrepancy_json).collect::<Vec<_>>() }),
        text,
    })
}

/// Load either a structure-constant JSON file or a field list, returning the
/// structure constants in both cases.
fn load_constants(path: &std::path::Path) -> Result<algebra::StructureConstants, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text)?;
        return Ok(algebra::StructureConstants::from_json(&v)?);
    }
    let fields = parser::parse_field_list(&text, 0)?;
    match algebra::constants_from_fields(&fields)? {
        Ok(sc) => Ok(sc),
        Err((i, j)) => Err(UsageError(format!(
            "fields do not close under bracket: [e{i}, e{j}] leaves the span"
        ))),
    }
}

fn cmd_identify(path: &std::path::Path) -> Result<Outcome, UsageError> {
    let sc = load_constants(path)?;
    if let Err(v) = sc.validate() {
        return Err(UsageError(format!("not a Lie algebra: {v}")));
    }
    let tag = algebra::identify(&sc);
    let indices: Vec<u32> = catalog::list_catalog()
        .iter()
        .filter(|e| e.algebra == tag)
        .map(|e| e.index)
        .collect();
    let ok = tag != algebra::AlgebraTag::Unknown;
    Ok(Outcome {
        ok,
        payload: json!({ "algebra": tag.to_string(), "catalog_indices": indices }),
        text: if ok {
            format!("{tag} (catalog realizations: {indices:?})")
        } else {
            "unknown: not one of the four unsolvable algebras of dimension <= 4".into()
        },
    })
}

fn cmd_catalog_list() -> Result<Outcome, UsageError> {
    let mut lines = Vec::new();
    let mut entries = Vec::new();
    for e in catalog::list_catalog() {
        let params = e
            .params
            .iter()
            .map(|p| format!("{} in {{{}}}", p.name, p.values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join("; ");
        lines.push(format!(
            "R({}, {})  n_min={}{}",
            e.algebra,
            e.index,
            e.n_min,
            if params.is_empty() { String::new() } else { format!("  [{params}]") }
        ));
        for src in &e.field_sources {
            lines.push(format!("    {src}"));
        }
        entries.push(json!({
            "algebra": e.algebra.to_string(),
            "index": e.index,
            "n_min": e.n_min,
            "params": params,
            "fields": e.field_sources,
        }));
    }
    Ok(Outcome {
        ok: true,
        payload: json!({ "entries": entries }),
        text: lines.join("\n"),
    })
}

fn cmd_killing(path: &std::path::Path) -> Result<Outcome, UsageError> {
    let sc = load_constants(path)?;
    if let Err(v) = sc.validate() {
        return Err(UsageError(format!("not a Lie algebra: {v}")));
    }
    let k = sc.killing_form();
    let (pos, neg, null) = k.signature();
    let rows: Vec<Vec<String>> = (0..k.rows)
        .map(|i| (0..k.cols).map(|j| k[(i, j)].to_string()).collect())
        .collect();
    let text = rows
        .iter()
        .map(|r| r.join("  "))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        ok: true,
        payload: json!({ "killing": rows, "signature": [pos, neg, null] }),
        text: format!("{text}\nsignature: ({pos}, {neg}, {null})"),
    })
}

fn parse_map_file(path: &std::path::Path, n: u32) -> Result<liefield::SymbolicMap, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let mut forward = Vec::new();
    let mut inverse = Vec::new();
    let mut section: Option<bool> = None;
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        match t {
            "forward:" => section = Some(true),
            "inverse:" => section = Some(false),
            expr => {
                let e = parser::parse_expr(expr, n)?;
                let r = symexpr::Ratio::from_expr(e);
                match section {
                    Some(true) => forward.push(r),
                    Some(false) => inverse.push(r),
                    None => {
                        return Err(UsageError(
                            "map file must start with a `forward:` or `inverse:` line".into(),
                        ))
                    }
                }
            }
        }
    }
    if forward.len() != n as usize || inverse.len() != n as usize {
        return Err(UsageError(format!(
            "map needs {n} forward and {n} inverse components, got {} and {}",
            forward.len(),
            inverse.len()
        )));
    }
    let map = liefield::SymbolicMap { n, forward, inverse };
    map.verify_inverse()?;
    Ok(map)
}

fn cmd_pushforward(
    fields_path: &std::path::Path,
    map_path: &std::path::Path,
    index: Option<usize>,
) -> Result<Outcome, UsageError> {
    let fields = read_fields(fields_path, 0)?;
    let n = fields.first().map(|f| f.n()).ok_or(UsageError("no fields in file".into()))?;
    let map = parse_map_file(map_path, n)?;
    let selected: Vec<(usize, &liefield::VectorField)> = match index {
        Some(i) => vec![(
            i,
            fields
                .get(i.checked_sub(1).ok_or(UsageError("indices are 1-based".into()))?)
                .ok_or(UsageError(format!("no field {i}")))?,
        )],
        None => fields.iter().enumerate().map(|(k, f)| (k + 1, f)).collect(),
    };
    let mut lines = Vec::new();
    let mut out = Vec::new();
    for (i, f) in selected {
        let pushed = liefield::pushforward(f, &map)?;
        lines.push(format!("e{i} -> {pushed}"));
        out.push(json!({ "index": i, "pushed": pushed.to_json(), "printed": pushed.to_string() }));
    }
    Ok(Outcome {
        ok: true,
        payload: json!({ "fields": out }),
        text: lines.join("\n"),
    })
}

fn cmd_flow(
    fields_path: &std::path::Path,
    index: usize,
    point: &str,
    eps: f64,
    steps: Option<usize>,
) -> Result<Outcome, UsageError> {
    let fields = read_fields(fields_path, 0)?;
    let field = fields
        .get(index.checked_sub(1).ok_or(UsageError("indices are 1-based".into()))?)
        .ok_or(UsageError(format!("no field {index}")))?;
    let p: Result<Vec<f64>, _> = point.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let p = p.map_err(|e| UsageError(format!("bad --point: {e}")))?;
    if p.len() != field.n() as usize {
        return Err(UsageError(format!(
            "point has {} coordinates, the field lives on {}",
            p.len(),
            field.n()
        )));
    }
    let end = liefield::flow_rk4(field, &p, eps, steps)?;
    Ok(Outcome {
        ok: true,
        payload: json!({ "start": p, "eps": eps, "end": end }),
        text: format!("{end:?}"),
    })
}

fn cmd_proofcheck(
    name: &str,
    trials: usize,
    samples: usize,
    seed: u64,
    parallel: bool,
) -> Result<Outcome, UsageError> {
    let names: Vec<&str> = match name {
        "all" => vec!["transform", "commutant", "lie-ode", "rho4", "remark"],
        single => vec![single],
    };
    let mut checks = Vec::new();
    let mut lines = Vec::new();
    let mut all_ok = true;
    for check in names {
        let (ok, detail): (bool, Value) = match check {
            "transform" => {
                let r = proofcheck::transform_suite(trials.max(20), seed, parallel)?;
                (
                    r.core_ok(),
                    json!({
                        "samples": r.draws,
                        "forms_preserved": r.forms_preserved,
                        "ansatz_preserved": r.ansatz_preserved,
                        "invariant_preserved": r.invariant_preserved,
                        "composition_consistent": r.composition_consistent,
                        "discrepancies": {
                            // printed closed formulas vs the recomputation
                            "printed_tilde_matches": r.printed_matches,
                        },
                    }),
                )
            }
            "commutant" => {
                let mut reports = Vec::new();
                let mut ok = true;
                for alpha in 0..=1u8 {
                    let r = proofcheck::check_commutant_system(alpha)?;
                    ok &= r.ok();
                    reports.push(serde_json::to_value(&r)?);
                }
                (ok, json!({ "samples": 2, "alphas": reports }))
            }
            "lie-ode" => {
                let r = proofcheck::lie_ode_suite(trials, seed, parallel)?;
                (
                    r.max_deviation <= 1e-8 && r.max_norm_drift <= 1e-10,
                    json!({ "samples": r.trials, "residual": r.max_deviation, "norm_drift": r.max_norm_drift }),
                )
            }
            "rho4" => {
                let r = proofcheck::rho4_suite(trials, seed, parallel)?;
                (
                    r.max_final_norm <= 1e-8 && r.min_abs_det > 1e-12,
                    json!({ "samples": r.trials, "residual": r.max_final_norm, "min_abs_det": r.min_abs_det }),
                )
            }
            "remark" => {
                let r = proofcheck::remark_coordinate_checks(samples.max(100), seed)?;
                (
                    r.planar.max_residual <= 1e-9 && r.cartesian.max_residual <= 1e-9,
                    json!({
                        "samples": r.planar.samples,
                        "residual": r.planar.max_residual.max(r.cartesian.max_residual),
                        "planar": serde_json::to_value(&r.planar)?,
                        "cartesian": serde_json::to_value(&r.cartesian)?,
                    }),
                )
            }
            other => {
                return Err(UsageError(format!(
                    "unknown check `{other}` (transform | commutant | lie-ode | rho4 | remark | all)"
                )))
            }
        };
        all_ok &= ok;
        lines.push(format!("{}: {check}", if ok { "PASS" } else { "FAIL" }));
        let mut obj = json!({ "check": check, "status": if ok { "ok" } else { "fail" }, "seed": seed });
        if let (Value::Object(o), Value::Object(d)) = (&mut obj, detail) {
            o.extend(d);
        }
        checks.push(obj);
    }
    Ok(Outcome {
        ok: all_ok,
        payload: json!({ "checks": checks }),
        text: lines.join("\n"),
    })
}
