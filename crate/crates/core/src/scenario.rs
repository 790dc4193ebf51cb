//! Scenario files: a process spec plus a list of tasks, run in order with a manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::counterexample::{alpha_upper_bound, separation_witness, write_sweep_csv, SweepRow, MIN_WITNESS_REPS};
use crate::dependence::{fdm_analytic_linear, fdm_monte_carlo, tau_coupling_bound, DanValue, LinearMap, LipschitzFn};
use crate::error::{ensure, Error, Result};
use crate::harness::autocov::MAX_AUTOCOV_N;
use crate::harness::tail::MIN_TAIL_REPS;
use crate::harness::{autocov_eigen_check, compare, AutocovTailRequest, CompareParams, COMPARABLE};
use crate::process::{simulate, ProcessSpec, VarSpec};
use crate::registry::evaluate;
use crate::ustat::{u_statistic, uv_gap_bound, v_statistic, BuiltinKernel, Kernel, DEFAULT_BUDGET};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_REPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMethod {
    Analytic,
    MonteCarlo,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum Task {
    Measure {
        method: MeasureMethod,
        #[serde(default = "default_p")]
        p: f64,
        max_lag: usize,
        #[serde(default)]
        alphas: Vec<f64>,
        #[serde(default)]
        reps: Option<usize>,
    },
    Bound {
        id: String,
        params: Value,
    },
    Compare {
        bound_id: String,
        n: usize,
        x_grid: Vec<f64>,
        #[serde(default)]
        params: CompareParams,
        #[serde(default)]
        reps: Option<usize>,
    },
    Counterexample {
        d: Vec<u64>,
        kappa: f64,
        m: u32,
        #[serde(default)]
        reps: Option<usize>,
    },
    Ustat {
        n: usize,
        kernel: BuiltinKernel,
    },
    Autocov {
        n: usize,
        #[serde(default)]
        tail: Option<AutocovTailRequest>,
        #[serde(default)]
        reps: Option<usize>,
    },
}

fn default_p() -> f64 {
    2.0
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Measure { .. } => "measure",
            Task::Bound { .. } => "bound",
            Task::Compare { .. } => "compare",
            Task::Counterexample { .. } => "counterexample",
            Task::Ustat { .. } => "ustat",
            Task::Autocov { .. } => "autocov",
        }
    }

    fn reps(&self) -> Option<usize> {
        match self {
            Task::Measure { reps, .. } | Task::Compare { reps, .. } | Task::Counterexample { reps, .. } | Task::Autocov { reps, .. } => *reps,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub spec: Option<ProcessSpec>,
    #[serde(default)]
    pub seed: u64,
    /// Default replication count for tasks that do not set their own.
    #[serde(default)]
    pub reps: Option<usize>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tasks: Vec<Task>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        ensure(s.schema_version == SCHEMA_VERSION, "schema_version", || {
            format!("unsupported version {}, expected {SCHEMA_VERSION}", s.schema_version)
        })?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Reads the scenario embedded in a run manifest.
    pub fn from_manifest(path: &Path) -> Result<Self> {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path)?)?;
        Ok(manifest.scenario)
    }

    fn task_reps(&self, task: &Task) -> usize {
        task.reps().or(self.reps).unwrap_or(DEFAULT_REPS)
    }

    fn spec(&self, task: &Task) -> Result<&ProcessSpec> {
        self.spec.as_ref().ok_or_else(|| Error::invalid("spec", format!("task {} needs a process spec", task.name())))
    }

    /// Checks every task's preconditions before anything is computed.
    pub fn validate(&self) -> Result<()> {
        if let Some(spec) = &self.spec {
            spec.validate()?;
        }
        for (i, task) in self.tasks.iter().enumerate() {
            self.validate_task(task).map_err(|e| match e {
                Error::Invalid { field, reason } => Error::Invalid { field: format!("tasks[{i}].{field}"), reason },
                other => other,
            })?;
        }
        Ok(())
    }

    fn validate_task(&self, task: &Task) -> Result<()> {
        let reps = self.task_reps(task);
        match task {
            Task::Measure { method, p, alphas, .. } => {
                let spec = self.spec(task)?;
                ensure(*p >= 1.0 && p.is_finite(), "p", || format!("must be a real ≥ 1, got {p}"))?;
                ensure(alphas.iter().all(|a| *a >= 0.0), "alphas", || "must be nonnegative".into())?;
                if *method != MeasureMethod::Tau {
                    ensure(matches!(spec, ProcessSpec::Linear(_)), "method", || {
                        "functional dependence measures need a linear spec; use tau".into()
                    })?;
                }
                if *method != MeasureMethod::Analytic {
                    ensure(reps >= 100, "reps", || format!("must be at least 100, got {reps}"))?;
                }
                Ok(())
            }
            Task::Bound { id, params } => evaluate(id, params).map(|_| ()),
            Task::Compare { bound_id, n, x_grid, .. } => {
                self.spec(task)?;
                ensure(COMPARABLE.contains(&bound_id.as_str()), "bound_id", || {
                    format!("{bound_id} cannot be compared; choose one of {COMPARABLE:?}")
                })?;
                ensure(*n >= 2, "n", || "must be at least 2".into())?;
                ensure(!x_grid.is_empty() && x_grid.iter().all(|x| *x > 0.0 && x.is_finite()), "x_grid", || {
                    "must be a nonempty list of positive reals".into()
                })?;
                ensure(reps >= MIN_TAIL_REPS, "reps", || format!("must be at least {MIN_TAIL_REPS}, got {reps}"))
            }
            Task::Counterexample { d, kappa, m, .. } => {
                ensure(!d.is_empty() && d.iter().all(|v| *v >= 1), "d", || "must be a nonempty list of positive integers".into())?;
                ensure(*kappa > 0.0 && *kappa < 1.0, "kappa", || {
                    format!("stationarity requires 0 < kappa < 1, got {kappa}")
                })?;
                ensure(*m >= 1, "m", || "must be at least 1".into())?;
                ensure(reps >= MIN_WITNESS_REPS, "reps", || format!("must be at least {MIN_WITNESS_REPS}, got {reps}"))
            }
            Task::Ustat { n, kernel } => {
                self.spec(task)?;
                kernel.validate()?;
                ensure(*n >= kernel.arity(), "n", || format!("must be at least the kernel arity {}", kernel.arity()))?;
                let needed = (*n as u128).saturating_pow(kernel.arity() as u32);
                ensure(needed <= DEFAULT_BUDGET, "n", || format!("n^r = {needed} exceeds the budget {DEFAULT_BUDGET}"))
            }
            Task::Autocov { n, tail, .. } => {
                ensure(matches!(self.spec(task)?, ProcessSpec::Linear(_)), "spec", || "autocov needs a scalar linear spec".into())?;
                ensure((2..=MAX_AUTOCOV_N).contains(n), "n", || format!("must lie in 2..={MAX_AUTOCOV_N}, got {n}"))?;
                if tail.is_some() {
                    ensure(reps >= MIN_TAIL_REPS, "reps", || format!("must be at least {MIN_TAIL_REPS}, got {reps}"))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub schema_version: u32,
    pub seed: u64,
    pub input_sha256: String,
    pub wall_time_seconds: f64,
    pub violations: usize,
    pub outputs: Vec<OutputFile>,
    pub scenario: Scenario,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub violations: usize,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Writer<'a> {
    dir: &'a Path,
    outputs: Vec<OutputFile>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.outputs.push(OutputFile { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Result of one task: a JSON document, an optional CSV table and its violation count.
#[derive(Debug, Clone)]
pub struct TaskOutput {
    pub json: Value,
    pub csv: Option<Vec<u8>>,
    pub violations: usize,
}

impl TaskOutput {
    fn json(value: impl Serialize) -> Result<Self> {
        Ok(Self { json: serde_json::to_value(value)?, csv: None, violations: 0 })
    }

    fn with_csv(mut self, csv: Vec<u8>) -> Self {
        self.csv = Some(csv);
        self
    }
}

/// Runs a single task of `scenario` (which supplies spec, seed and default reps).
pub fn run_task(scenario: &Scenario, task: &Task) -> Result<TaskOutput> {
    if let Some(spec) = &scenario.spec {
        spec.validate()?;
    }
    scenario.validate_task(task)?;
    let seed = scenario.seed;
    let reps = scenario.task_reps(task);
    match task {
        Task::Measure { method, p, max_lag, alphas, .. } => {
            let spec = scenario.spec(task)?;
            if *method == MeasureMethod::Tau {
                let rows = (0..=*max_lag)
                    .map(|m| tau_coupling_bound(spec, m, reps, seed))
                    .collect::<Result<Vec<_>>>()?;
                return TaskOutput::json(rows);
            }
            let ProcessSpec::Linear(lin) = spec else { unreachable!("validated") };
            let profile = match method {
                MeasureMethod::Analytic => fdm_analytic_linear(lin, *p, *max_lag)?,
                _ => {
                    let map = LinearMap::from_spec(lin, LipschitzFn::Identity);
                    let lag = (*max_lag).min(lin.lag());
                    fdm_monte_carlo(&map, lin.innovation, *p, lag, reps, seed)?
                }
            };
            let dans: Vec<Value> = alphas
                .iter()
                .map(|&a| match profile.dan(a) {
                    Ok(d) => serde_json::to_value::<DanValue>(d).unwrap_or(Value::Null),
                    Err(e) => json!({ "alpha": a, "error": e.to_string() }),
                })
                .collect();
            let mut csv = Vec::new();
            profile.write_csv(&mut csv, alphas)?;
            Ok(TaskOutput::json(json!({ "profile": profile, "dan": dans }))?.with_csv(csv))
        }
        Task::Bound { id, params } => TaskOutput::json(evaluate(id, params)?),
        Task::Compare { bound_id, n, x_grid, params, .. } => {
            let report = compare(bound_id, scenario.spec(task)?, params, *n, x_grid, reps, seed)?;
            let mut csv = Vec::new();
            report.write_csv(&mut csv)?;
            let violations = report.violations();
            Ok(TaskOutput { violations, ..TaskOutput::json(report)?.with_csv(csv) })
        }
        Task::Counterexample { d, kappa, m, .. } => {
            let mut witnesses = Vec::new();
            let mut rows = Vec::new();
            for &dim in d {
                let w = separation_witness(dim, *kappa, *m, reps, seed)?;
                let alpha = alpha_upper_bound(&VarSpec::standardized_diagonal(dim as usize, *kappa), *m)?;
                rows.push(SweepRow {
                    d: dim,
                    beta_lower_theoretical: w.beta_lower_theoretical,
                    beta_lower_empirical: w.beta_lower_empirical,
                    se: w.se,
                    alpha_upper: alpha.value,
                });
                witnesses.push(json!({ "witness": w, "alpha": alpha }));
            }
            let mut csv = Vec::new();
            write_sweep_csv(&rows, &mut csv)?;
            Ok(TaskOutput::json(witnesses)?.with_csv(csv))
        }
        Task::Ustat { n, kernel } => {
            let spec = scenario.spec(task)?;
            let fragment = simulate(spec, *n, seed)?;
            let u = u_statistic(&fragment.values, kernel, DEFAULT_BUDGET)?;
            let v = v_statistic(&fragment.values, kernel, DEFAULT_BUDGET)?;
            let observed = fragment.values.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            let sup = kernel.sup_norm_on_box(observed, spec.dimension());
            TaskOutput::json(json!({
                "n": n,
                "kernel": kernel,
                "u": u,
                "v": v,
                "gap": (v - u).abs(),
                "gap_bound": uv_gap_bound(*n, kernel.arity(), sup),
            }))
        }
        Task::Autocov { n, tail, .. } => {
            let ProcessSpec::Linear(lin) = scenario.spec(task)? else { unreachable!("validated") };
            let report = autocov_eigen_check(lin, *n, reps, seed, tail.as_ref())?;
            let violations = report.tail.iter().filter(|r| r.verdict == crate::harness::Verdict::ViolationFlag).count()
                + (report.reps - report.holds);
            Ok(TaskOutput { violations, ..TaskOutput::json(report)? })
        }
    }
}

/// Validates, runs every task in order and writes the manifest into `output_dir`.
pub fn run_scenario(scenario: &Scenario, output_dir: &Path) -> Result<RunOutcome> {
    let started = Instant::now();
    scenario.validate()?;
    fs::create_dir_all(output_dir)?;
    let canonical = serde_json::to_vec(scenario)?;
    let mut writer = Writer { dir: output_dir, outputs: Vec::new() };
    let mut violations = 0;
    for (i, task) in scenario.tasks.iter().enumerate() {
        let output = run_task(scenario, task)?;
        let stem = format!("task_{i:02}_{}", task.name());
        writer.json(&format!("{stem}.json"), &output.json)?;
        if let Some(csv) = &output.csv {
            writer.write(&format!("{stem}.csv"), csv)?;
        }
        violations += output.violations;
    }
    let manifest = Manifest {
        tool: "depbound".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        seed: scenario.seed,
        input_sha256: sha256_hex(&canonical),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        violations,
        outputs: writer.outputs,
        scenario: scenario.clone(),
    };
    let manifest_path = output_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&manifest_path, text)?;
    Ok(RunOutcome { manifest, manifest_path, violations })
}
