//! Command-line front end: `check`, `price`, `gen` and `verify`.
//!
//! Exit codes: 0 on success, 1 when the input is invalid or a check fails,
//! 2 on internal or numerical failure.

pub mod io;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::hedge::{self, HedgePlan, Instance};
use crate::lp;
use crate::models::{self, IntervalParams, ModelFamily, MARTINGALE_TOLERANCE};
use crate::oracle;
use crate::tree::NodeId;

pub use io::{CliError, Decimal, InstanceFile, PlanFile};

#[derive(Debug, Parser)]
#[command(name = "superhedge", version, about = "Quasi-sure superhedging on finite event trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate an instance: tree, martingale residuals per model, polar leaves.
    Check { path: PathBuf },
    /// Superhedging price, dual price, best model expectation and optimal strategy as JSON.
    Price(PriceArgs),
    /// Write a generated instance to stdout.
    Gen(GenArgs),
    /// Check that a plan superhedges the claim on every non-polar leaf.
    Verify {
        path: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        /// Allowed shortfall, relative to 1 + max(|S|, |f|).
        #[arg(long, default_value_t = lp::DEFAULT_EPSILON)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
struct PriceArgs {
    path: PathBuf,
    /// Solve in exact rational arithmetic and print fractions.
    #[arg(long)]
    exact: bool,
    /// LP feasibility and optimality tolerance of the float solver.
    #[arg(long, default_value_t = lp::DEFAULT_EPSILON)]
    tol: f64,
    /// Size cap (variables plus constraints) for the exact solver.
    #[arg(long, default_value_t = oracle::DEFAULT_CAP)]
    cap: usize,
    /// Also write the optimal plan, in the format `verify --plan` reads.
    #[arg(long, value_name = "FILE")]
    plan_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Range of the one-step price ratio S_{t+1}/S_t.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    interval: Option<Vec<f64>>,
    /// Comma-separated leaf ids that every generated model must leave uncharged.
    #[arg(long, value_delimiter = ',', value_name = "LEAVES")]
    nullset: Option<Vec<u64>>,
    /// Number of trading periods.
    #[arg(long = "T", default_value_t = 1)]
    horizon: usize,
    #[arg(long, default_value_t = 2)]
    branching: usize,
    /// Number of models in the family.
    #[arg(long, default_value_t = 1)]
    models: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

const DEFAULT_INTERVAL: (f64, f64) = (0.5, 2.0);

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { path } => cmd_check(&path, out),
        Command::Price(args) => cmd_price(&args, out),
        Command::Gen(args) => cmd_gen(&args, out),
        Command::Verify { path, plan, tol } => cmd_verify(&path, &plan, tol, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &Path) -> Result<InstanceFile, CliError> {
    InstanceFile::parse(&io::read_text(path)?, &path.display().to_string())
}

fn emit(out: &mut impl Write, text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    out.write_fmt(text).map_err(|source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        emit($out, format_args!("{}\n", format_args!($($arg)*)))?
    };
}

fn leaf_list(leaves: &BTreeSet<NodeId>) -> String {
    if leaves.is_empty() {
        "∅".into()
    } else {
        leaves.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
    }
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

fn cmd_check(path: &Path, out: &mut impl Write) -> Result<i32, CliError> {
    let file = load(path)?;
    say!(out, "instance: {}", path.display());

    let tree = match file.tree() {
        Ok(t) => t,
        Err(e) => {
            say!(out, "tree: INVALID: {e}");
            return Ok(1);
        }
    };
    say!(
        out,
        "tree: horizon {}, {} ({} interior, {})",
        tree.horizon(),
        plural(tree.len(), "node"),
        tree.interior_count(),
        plural(tree.leaf_count(), "leaf").replace("leafs", "leaves")
    );

    let mut failed = false;
    match file.claim(&tree) {
        Ok(_) => say!(out, "claim: defined on all {}", plural(tree.leaf_count(), "leaf").replace("leafs", "leaves")),
        Err(e) => {
            say!(out, "claim: INVALID: {e}");
            failed = true;
        }
    }

    let built = match file.models(&tree) {
        Ok(m) => m,
        Err(e) => {
            say!(out, "models: INVALID: {e}");
            return Ok(1);
        }
    };
    let family = match ModelFamily::new_unchecked(built) {
        Ok(f) => f,
        Err(e) => {
            say!(out, "models: INVALID: {e}");
            return Ok(1);
        }
    };

    let mut bad_models = 0;
    for model in family.models() {
        let report = models::is_martingale_measure(&tree, model, MARTINGALE_TOLERANCE);
        match report.worst() {
            Some(w) if !report.is_martingale => {
                bad_models += 1;
                say!(
                    out,
                    "model {}: NOT a martingale (worst residual {} at node {})",
                    model.name(),
                    io::format_f64(w.residual),
                    w.node
                );
            }
            _ => say!(
                out,
                "model {}: martingale OK (max residual {})",
                model.name(),
                io::format_f64(report.max_residual())
            ),
        }
        say!(out, "  {:>8}  {:>24}  {:>24}  status", "node", "mass", "residual");
        for r in &report.residuals {
            say!(
                out,
                "  {:>8}  {:>24}  {:>24}  {}",
                r.node.to_string(),
                io::format_f64(r.mass),
                io::format_f64(r.residual),
                if r.passed { "ok" } else { "FAIL" }
            );
        }
    }

    let polar = models::polar_set(&tree, &family);
    say!(out, "polar leaves: {}", leaf_list(&polar.polar_leaves));

    let martingale = if bad_models == 0 {
        "martingale OK".to_string()
    } else {
        format!("martingale FAILED for {} of {}", bad_models, family.len())
    };
    say!(
        out,
        "summary: {}, {martingale}, polar set {}",
        plural(family.len(), "model"),
        leaf_list(&polar.polar_leaves)
    );
    Ok(if failed || bad_models > 0 { 1 } else { 0 })
}

fn id_object<V>(entries: impl IntoIterator<Item = (NodeId, V)>, f: impl Fn(V) -> Value) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), f(v))).collect())
}

fn cmd_price(args: &PriceArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let file = load(&args.path)?;
    let instance = file.instance()?;
    let polar = Value::Array(instance.polar().polar_leaves.iter().map(|l| Value::from(l.to_string())).collect());

    let mut doc = Map::new();
    let plan = if args.exact {
        let exact = file.exact(instance.tree())?;
        let report = oracle::exact_report(&exact, args.cap)?;
        let frac = |v: &num_rational::BigRational| Value::String(v.to_string());
        doc.insert("primal".into(), frac(&report.primal_price));
        doc.insert("dual".into(), frac(&report.dual_price));
        doc.insert("model_sup".into(), frac(&report.model_sup));
        doc.insert("model_sup_model".into(), Value::from(report.model_sup_model.clone()));
        doc.insert("gap".into(), frac(&report.gap));
        doc.insert("strategy".into(), id_object(report.strategy.iter().map(|(&k, v)| (k, v)), frac));
        doc.insert("dual_measure".into(), id_object(report.dual_measure.iter().map(|(&k, v)| (k, v)), frac));
        PlanFile {
            price: Decimal {
                text: report.primal_price.to_string(),
                value: oracle::to_f64(&report.primal_price),
            },
            strategy: report
                .strategy
                .iter()
                .map(|(&k, v)| {
                    (
                        k,
                        Decimal {
                            text: v.to_string(),
                            value: oracle::to_f64(v),
                        },
                    )
                })
                .collect(),
        }
    } else {
        let report = hedge::duality_report_with_tol(&instance, args.tol)?;
        doc.insert("primal".into(), io::json_f64(report.primal_price));
        doc.insert("dual".into(), io::json_f64(report.dual_price));
        doc.insert("model_sup".into(), io::json_f64(report.model_sup));
        doc.insert("model_sup_model".into(), Value::from(report.model_sup_model.clone()));
        doc.insert("gap".into(), io::json_f64(report.gap));
        doc.insert(
            "strategy".into(),
            id_object(report.optimal_strategy.values().iter().map(|(&k, &v)| (k, v)), io::json_f64),
        );
        doc.insert(
            "dual_measure".into(),
            id_object(report.optimal_dual_measure.iter().map(|(&k, &v)| (k, v)), io::json_f64),
        );
        PlanFile::from_plan(&HedgePlan {
            price: report.primal_price,
            strategy: report.optimal_strategy,
        })
    };
    doc.insert("polar_leaves".into(), polar);

    if let Some(path) = &args.plan_out {
        write_json(path, &plan.to_json())?;
    }
    say!(out, "{}", pretty(&Value::Object(doc)));
    Ok(0)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialise")
}

fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    std::fs::write(path, pretty(v) + "\n").map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn generate(args: &GenArgs) -> Result<Instance, CliError> {
    let (lo, hi) = match args.interval.as_deref() {
        Some([lo, hi]) => (*lo, *hi),
        _ => DEFAULT_INTERVAL,
    };
    let instance = match &args.nullset {
        None => models::gen_interval_instance(&IntervalParams {
            horizon: args.horizon,
            lo,
            hi,
            branching: args.branching,
            models: args.models,
            seed: args.seed,
        })?,
        Some(ids) => {
            let tree = models::interval_tree(args.horizon, lo, hi, args.branching)?;
            let forbidden = ids.iter().map(|&i| NodeId(i)).collect();
            models::gen_nullset_instance(tree, &forbidden, args.models, args.seed)?
        }
    };
    Ok(instance)
}

fn cmd_gen(args: &GenArgs, out: &mut impl Write) -> Result<i32, CliError> {
    let instance = generate(args)?;
    say!(out, "{}", pretty(&InstanceFile::from_instance(&instance).to_json()));
    Ok(0)
}

fn cmd_verify(path: &Path, plan_path: &Path, tol: f64, out: &mut impl Write) -> Result<i32, CliError> {
    let instance = load(path)?.instance()?;
    let plan_file = PlanFile::parse(&io::read_text(plan_path)?, &plan_path.display().to_string())?;
    let plan = plan_file.plan(instance.tree())?;
    let v = hedge::verify_superhedge(&instance, &plan, tol)?;
    let price = instance.tree().price(v.worst_leaf)?;
    say!(out, "worst leaf: {} (S = {})", v.worst_leaf, io::format_f64(price));
    say!(out, "shortfall: {}", io::format_f64(v.worst_shortfall));
    say!(out, "allowed: {}", io::format_f64(tol * instance.scale()));
    if v.ok {
        say!(out, "OK: plan superhedges the claim on every non-polar leaf");
        Ok(0)
    } else {
        say!(out, "FAIL: plan falls short of the claim at leaf {}", v.worst_leaf);
        Ok(1)
    }
}
