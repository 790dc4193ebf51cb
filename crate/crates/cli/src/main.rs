use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use depbound_core::harness::{AutocovTailRequest, CompareParams};
use depbound_core::process::{simulate, simulate_matrix_series, ProcessSpec};
use depbound_core::registry::{evaluate, list_bounds};
use depbound_core::scenario::{run_scenario, run_task, MeasureMethod, Scenario, Task, TaskOutput, SCHEMA_VERSION};
use depbound_core::ustat::BuiltinKernel;

const EXIT_INTERNAL: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "depbound", version, about = "Dependence measures and tail bounds for time series")]
struct Cli {
    /// Base seed for every random stream (default 0; scenarios carry their own).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo replications (overrides scenario defaults).
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Output directory (results are printed to stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArg {
    /// Process spec as a JSON file.
    #[arg(long)]
    spec: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Analytic,
    MonteCarlo,
    Tau,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a fragment of length n.
    Simulate {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        n: usize,
    },
    /// Functional dependence or τ-coupling profile.
    Measure {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, value_enum, default_value = "analytic")]
        method: Method,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 20)]
        max_lag: usize,
        /// DAN exponents to report (repeatable).
        #[arg(long = "alpha")]
        alphas: Vec<f64>,
    },
    /// Evaluate a bound calculator.
    Bound {
        /// Calculator id (see list-bounds).
        id: String,
        /// name=value pairs; values are parsed as JSON when possible.
        #[arg(long = "param")]
        params: Vec<String>,
        /// JSON object of parameters (file path or inline).
        #[arg(long)]
        params_json: Option<String>,
        /// JSON array of parameter records; emits CSV.
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Compare a bound with Monte Carlo tail estimates.
    Compare {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        bound_id: String,
        #[arg(long)]
        n: usize,
        /// Comma-separated x values.
        #[arg(long, value_delimiter = ',', required = true)]
        x_grid: Vec<f64>,
        /// JSON object with p, alpha, variant and consts.
        #[arg(long)]
        params_json: Option<String>,
    },
    /// β-separation witness and α bound for diagonal Gaussian VAR(1).
    Counterexample {
        /// Comma-separated dimensions.
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<u64>,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        m: u32,
    },
    /// U- and V-statistics on a simulated fragment.
    Ustat {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        n: usize,
        /// Kernel as JSON, e.g. {"kind":"product","arity":2}.
        #[arg(long)]
        kernel: String,
    },
    /// Sample autocovariance eigenvalue versus periodogram maximum.
    Autocov {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        n: usize,
        /// Optional tail request as JSON (q, alpha, u_grid, consts).
        #[arg(long)]
        tail: Option<String>,
    },
    /// Run a scenario file (or the scenario embedded in a manifest).
    Run {
        path: PathBuf,
        #[arg(long)]
        manifest: bool,
    },
    /// Registered bound calculators.
    ListBounds,
}

fn read_json_arg(arg: &str) -> Result<Value> {
    let text = if Path::new(arg).is_file() {
        fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?
    } else {
        arg.to_string()
    };
    Ok(serde_json::from_str(&text).map_err(depbound_core::Error::from)?)
}

fn load_spec(arg: &SpecArg) -> Result<ProcessSpec> {
    let text = fs::read_to_string(&arg.spec).with_context(|| format!("reading {}", arg.spec.display()))?;
    let spec: ProcessSpec = serde_json::from_str(&text).map_err(depbound_core::Error::from)?;
    spec.validate()?;
    Ok(spec)
}

fn param_object(pairs: &[String], base: Option<&str>) -> Result<Value> {
    let mut map = match base {
        Some(arg) => match read_json_arg(arg)? {
            Value::Object(m) => m,
            _ => bail!("--params-json must be a JSON object"),
        },
        None => Map::new(),
    };
    for pair in pairs {
        let (k, v) = pair.split_once('=').ok_or_else(|| anyhow!("--param expects name=value, got {pair}"))?;
        let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
        map.insert(k.to_string(), value);
    }
    Ok(Value::Object(map))
}

struct Emitter {
    out: Option<PathBuf>,
    json: bool,
}

impl Emitter {
    fn emit(&self, name: &str, output: &TaskOutput) -> Result<()> {
        let text = serde_json::to_string_pretty(&output.json)? + "\n";
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(format!("{name}.json")), &text)?;
                if let Some(csv) = &output.csv {
                    fs::write(dir.join(format!("{name}.csv")), csv)?;
                }
                if !self.json {
                    eprintln!("wrote {}", dir.join(format!("{name}.json")).display());
                }
            }
            None => match (&output.csv, self.json) {
                (Some(csv), false) => print!("{}", String::from_utf8_lossy(csv)),
                _ => print!("{text}"),
            },
        }
        Ok(())
    }
}

fn single_task(cli: &Cli, spec: Option<ProcessSpec>, task: Task) -> Result<TaskOutput> {
    let scenario = Scenario {
        schema_version: SCHEMA_VERSION,
        name: task.name().to_string(),
        spec,
        seed: cli.seed.unwrap_or(0),
        reps: cli.reps,
        output_dir: None,
        tasks: Vec::new(),
    };
    Ok(run_task(&scenario, &task)?)
}

fn run(cli: &Cli) -> Result<usize> {
    let emitter = Emitter { out: cli.out.clone(), json: cli.json };
    let output = match &cli.command {
        Command::Simulate { spec, n } => {
            let spec = load_spec(spec)?;
            let value = match &spec {
                ProcessSpec::MatrixSeries(ms) => serde_json::to_value(simulate_matrix_series(ms, *n, cli.seed.unwrap_or(0))?)?,
                other => serde_json::to_value(simulate(other, *n, cli.seed.unwrap_or(0))?)?,
            };
            ("simulate", TaskOutput { json: value, csv: None, violations: 0 })
        }
        Command::Measure { spec, method, p, max_lag, alphas } => {
            let method = match method {
                Method::Analytic => MeasureMethod::Analytic,
                Method::MonteCarlo => MeasureMethod::MonteCarlo,
                Method::Tau => MeasureMethod::Tau,
            };
            let task = Task::Measure { method, p: *p, max_lag: *max_lag, alphas: alphas.clone(), reps: None };
            ("measure", single_task(cli, Some(load_spec(spec)?), task)?)
        }
        Command::Bound { id, params, params_json, batch } => match batch {
            Some(path) => {
                let records = read_json_arg(&path.to_string_lossy())?;
                let Value::Array(records) = records else { bail!("--batch must hold a JSON array") };
                ("bound", batch_csv(id, &records)?)
            }
            None => {
                let params = param_object(params, params_json.as_deref())?;
                let result = evaluate(id, &params)?;
                ("bound", TaskOutput { json: serde_json::to_value(result)?, csv: None, violations: 0 })
            }
        },
        Command::Compare { spec, bound_id, n, x_grid, params_json } => {
            let params: CompareParams = match params_json {
                Some(arg) => serde_json::from_value(read_json_arg(arg)?).map_err(depbound_core::Error::from)?,
                None => CompareParams::default(),
            };
            let task = Task::Compare { bound_id: bound_id.clone(), n: *n, x_grid: x_grid.clone(), params, reps: None };
            ("compare", single_task(cli, Some(load_spec(spec)?), task)?)
        }
        Command::Counterexample { d, kappa, m } => {
            let task = Task::Counterexample { d: d.clone(), kappa: *kappa, m: *m, reps: None };
            ("counterexample", single_task(cli, None, task)?)
        }
        Command::Ustat { spec, n, kernel } => {
            let kernel: BuiltinKernel = serde_json::from_value(read_json_arg(kernel)?).map_err(depbound_core::Error::from)?;
            ("ustat", single_task(cli, Some(load_spec(spec)?), Task::Ustat { n: *n, kernel })?)
        }
        Command::Autocov { spec, n, tail } => {
            let tail: Option<AutocovTailRequest> = match tail {
                Some(arg) => Some(serde_json::from_value(read_json_arg(arg)?).map_err(depbound_core::Error::from)?),
                None => None,
            };
            ("autocov", single_task(cli, Some(load_spec(spec)?), Task::Autocov { n: *n, tail, reps: None })?)
        }
        Command::Run { path, manifest } => return run_file(cli, path, *manifest),
        Command::ListBounds => {
            let entries = list_bounds();
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&entries)?);
            } else {
                for e in &entries {
                    let user: Vec<&str> = e
                        .constants
                        .iter()
                        .filter(|c| c.default.is_some())
                        .map(|c| c.name.as_str())
                        .collect();
                    let params: Vec<&str> = e.params.iter().map(|p| p.name.as_str()).collect();
                    println!("{:<30} {:<34} params: {}", e.id, e.event, params.join(", "));
                    if !user.is_empty() {
                        println!("{:<30} user-supplied constants (default 1): {}", "", user.join(", "));
                    }
                }
            }
            return Ok(0);
        }
    };
    let (name, output) = output;
    emitter.emit(name, &output)?;
    Ok(output.violations)
}

fn batch_csv(id: &str, records: &[Value]) -> Result<TaskOutput> {
    let mut keys: Vec<String> = Vec::new();
    for r in records {
        let Value::Object(m) = r else { bail!("batch records must be JSON objects") };
        for k in m.keys() {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    let mut results = Vec::new();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = keys.clone();
    header.extend(["raw".to_string(), "clamped".into(), "vacuous".into()]);
    wtr.write_record(&header)?;
    for r in records {
        let b = evaluate(id, r)?;
        let mut row: Vec<String> = keys.iter().map(|k| r.get(k).map(cell).unwrap_or_default()).collect();
        row.extend([b.raw_value.to_string(), b.clamped.to_string(), b.vacuous.to_string()]);
        wtr.write_record(&row)?;
        results.push(b);
    }
    let csv = wtr.into_inner().map_err(|e| anyhow!("flushing CSV: {e}"))?;
    Ok(TaskOutput { json: serde_json::to_value(results)?, csv: Some(csv), violations: 0 })
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

fn run_file(cli: &Cli, path: &Path, from_manifest: bool) -> Result<usize> {
    let mut scenario = if from_manifest { Scenario::from_manifest(path)? } else { Scenario::load(path)? };
    if let Some(reps) = cli.reps {
        scenario.reps = Some(reps);
    }
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| scenario.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("{}-out", scenario.name)));
    let outcome = run_scenario(&scenario, &dir)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&outcome.manifest)?);
    } else {
        println!(
            "{}: {} task(s), {} output file(s), {} violation flag(s); manifest {}",
            scenario.name,
            scenario.tasks.len(),
            outcome.manifest.outputs.len(),
            outcome.violations,
            outcome.manifest_path.display()
        );
    }
    Ok(outcome.violations)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(v) => {
            eprintln!("{v} violation flag(s)");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = err
                .downcast_ref::<depbound_core::Error>()
                .is_some_and(|e| e.is_validation());
            ExitCode::from(if validation { EXIT_VALIDATION } else { EXIT_INTERNAL })
        }
    }
}
