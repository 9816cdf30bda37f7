//! Command-line front end: argument parsing, seeding, worker pool, and
//! CSV / JSON-lines output.
//!
//! Exit codes: 0 success, 1 a check failed or a runtime error occurred,
//! 2 usage error (bad flags or parameters outside a documented range).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;

use crate::certificate::{certificate_sample_size, certify, CertificateConfig};
use crate::error::{validation, Error, Result};
use crate::lowdeg::{advantage_bound, advantage_bound_terms, build_lowdeg_instance, Hypothesis};
use crate::model::{mahalanobis_error, random_unit_vector, Covariance, LinearModelSpec};
use crate::reduction::{run_reduction, DirectionEstimator, ReductionConfig};
use crate::regress::{fit_ols, fit_preconditioned, fit_robust, fit_zero, RegressorConfig};
use crate::rng::Seed;
use crate::sampling::{contaminate_tracked, sample_clean, Adversary, AdversaryKind, ContaminationSpec};
use crate::sq::{build_mixture, chi2_mixture, marginal_normalizer, SqInstanceSpec};
use crate::suite::{regression_sweep, run_check, sweep_model, Scale, CHECKS};

/// Environment variable that overrides every other seed source.
pub const SEED_ENV: &str = "ROBREG_SEED";
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Parser)]
#[command(name = "robreg", version, about = "Robust regression experiments and verification suite", args_override_self = true)]
struct Cli {
    /// Root seed (ROBREG_SEED takes precedence).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Optional file of key=value lines mirroring long flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// none, huber, targeted, lowdeg or sq.
    #[arg(long, default_value = "targeted")]
    adversary: String,
    #[arg(long, default_value_t = 1.0)]
    noise_var: f64,
    /// Targeted label shift (default: 10 sigma sqrt(n) / (eps n) clipped to [10, 1000]).
    #[arg(long)]
    scale: Option<f64>,
    /// Constant label used by the huber adversary.
    #[arg(long, default_value_t = 0.0)]
    huber_label: f64,
    /// Signal strength of the lowdeg instance.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Slope constant of the sq instance.
    #[arg(long, default_value_t = 0.01)]
    c1: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit a (possibly contaminated) dataset.
    Generate(ProblemArgs),
    /// Fit estimators on contaminated data and report Mahalanobis errors.
    Regress {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "zero,ols,robust,preconditioned")]
        estimators: Vec<String>,
        #[arg(long)]
        stop_mult: Option<f64>,
        /// The preconditioner is this multiple of the true covariance.
        #[arg(long, default_value_t = 1.0)]
        sigma_hat_scale: f64,
    },
    /// Truncation certificate over random directions.
    Certify {
        #[arg(long, default_value_t = 30)]
        d: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Sample size (default: min(ceil(d ln d / eps^4), 10^6)).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 50.0)]
        c_est: f64,
    },
    /// Build one moment-matched mixture and verify it.
    SqInstance {
        #[arg(long, allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = 0.05)]
        sigma_s2: f64,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Also compute the label-marginal normalizer at this condition number.
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 0.01)]
        c1: f64,
    },
    /// Evaluate the low-degree advantage bound.
    LowdegAdvantage {
        #[arg(long)]
        n: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        degree: usize,
    },
    /// Estimation-to-testing reduction on the low-degree instance.
    ReductionTest {
        #[arg(long, default_value_t = 100)]
        d: usize,
        #[arg(long, default_value_t = 10.0)]
        kappa: f64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_var: f64,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// oracle, ols or robust.
        #[arg(long, default_value = "oracle")]
        estimator: String,
        #[arg(long, default_value_t = crate::reduction::DEFAULT_LARGE_KAPPA_CONST)]
        large_c: f64,
    },
    /// Error sweep over (eps, kappa) under the targeted attack.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "0.02,0.05,0.1")]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        d: usize,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Run the verification suite.
    VerifyAll {
        /// Reduced problem sizes.
        #[arg(long)]
        quick: bool,
        /// Run only these check numbers.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

/// A single output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Null,
}

impl Value {
    fn csv_text(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_float(*v),
            Value::Str(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::Null => String::new(),
        }
    }

    fn json_text(&self) -> String {
        match self {
            Value::Float(v) if !v.is_finite() => "null".into(),
            Value::Str(s) => serde_json::Value::from(s.as_str()).to_string(),
            Value::Null => "null".into(),
            other => other.csv_text(),
        }
    }
}

/// Seventeen significant digits: parsing the text recovers the exact bits.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Homogeneous records with named columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Write `table` as CSV (with header) or JSON lines.
pub fn write_records<W: Write>(table: &Table, format: Format, out: W) -> Result<()> {
    if table.rows.iter().any(|r| r.len() != table.columns.len()) {
        return Err(validation("rows must match the column count"));
    }
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let io_err = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(&table.columns).map_err(io_err)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Value::csv_text)).map_err(io_err)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut w = BufWriter::new(out);
            for row in &table.rows {
                let fields: Vec<String> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| format!("{}:{}", serde_json::Value::from(k.as_str()), v.json_text()))
                    .collect();
                writeln!(w, "{{{}}}", fields.join(","))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Write to `path`, or to `stdout` when no path is given.
pub fn emit_records(table: &Table, format: Format, path: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_records(table, format, File::create(p)?),
        None => write_records(table, format, stdout),
    }
}

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| validation(format!("config line {}: expected key=value", lineno + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

const SUBCOMMANDS: [&str; 8] =
    ["generate", "regress", "certify", "sq-instance", "lowdeg-advantage", "reduction-test", "bench", "verify-all"];

/// Splice config-file entries in as flags right after the subcommand, so
/// that explicit flags (which come later) override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).map_err(|e| validation(format!("cannot read config {path}: {e}")))?;
    let Some(pos) = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let mut extra = Vec::new();
    for (k, v) in parse_config(&text)? {
        match v.as_str() {
            "true" => extra.push(format!("--{k}")),
            "false" => {}
            _ => extra.push(format!("--{k}={v}")),
        }
    }
    let mut out = argv;
    out.splice(pos + 1..pos + 1, extra.into_iter().map(OsString::from));
    Ok(out)
}

/// Seed precedence: environment, then `--seed` (or its config entry), then the default.
pub fn resolve_seed(env: Option<&str>, flag: Option<u64>) -> Result<u64> {
    if let Some(s) = env {
        return s.trim().parse().map_err(|_| validation(format!("{SEED_ENV}={s} is not an unsigned integer")));
    }
    Ok(flag.unwrap_or(DEFAULT_SEED))
}

/// Entry point used by the binary.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env = std::env::var(SEED_ENV).ok();
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    run_cli_with(argv, env.as_deref(), &mut lock)
}

/// Like [`run_cli`] with an explicit seed environment value and output sink.
pub fn run_cli_with<I, T>(argv: I, env_seed: Option<&str>, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("robreg: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let seed = match resolve_seed(env_seed, cli.seed) {
        Ok(s) => Seed(s),
        Err(e) => {
            eprintln!("robreg: {e}");
            return 2;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("robreg: --threads must be >= 1");
            return 2;
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("robreg: cannot start worker pool: {e}");
            return 1;
        }
    };
    let result = pool.install(|| execute(&cli.command, seed));
    match result {
        Ok((table, ok)) => {
            if let Err(e) = emit_records(&table, cli.format, cli.out.as_deref(), stdout) {
                eprintln!("robreg: {e}");
                return 1;
            }
            if ok {
                0
            } else {
                eprintln!("robreg: check failed");
                1
            }
        }
        Err(e) => {
            eprintln!("robreg: {e}");
            match e {
                Error::Validation(_)
                | Error::NotPsd { .. }
                | Error::C1TooLarge { .. }
                | Error::MuOutOfRange(_)
                | Error::InfiniteDivergence => 2,
                _ => 1,
            }
        }
    }
}

fn f(v: f64) -> Value {
    Value::Float(v)
}

fn int(v: usize) -> Value {
    Value::Int(v as i64)
}

fn s(v: impl Into<String>) -> Value {
    Value::Str(v.into())
}

/// Inlier model and contamination for a problem description.
fn build_problem(p: &ProblemArgs, seed: Seed) -> Result<(LinearModelSpec, ContaminationSpec)> {
    let kind: AdversaryKind = p.adversary.parse()?;
    let direction = || random_unit_vector(p.d, &mut seed.stream("direction", 0));
    Ok(match kind {
        AdversaryKind::LowdegGaussian => {
            let inst = build_lowdeg_instance(p.d, p.kappa, p.eps, p.alpha * p.kappa.sqrt(), p.noise_var, direction()?)?;
            (inst.inlier_model()?, ContaminationSpec::new(p.eps, Adversary::LowdegGaussian(Box::new(inst)))?)
        }
        AdversaryKind::SqInstance => {
            let spec = SqInstanceSpec::new(p.kappa, p.eps, p.c1, direction()?)?;
            (spec.inlier_model()?, ContaminationSpec::new(p.eps, Adversary::SqInstance(Box::new(spec)))?)
        }
        other => {
            let base = sweep_model(p.d, p.kappa, seed.derive("model", 0))?;
            let model = LinearModelSpec::new(base.covariance, base.beta, p.noise_var)?;
            let adversary = match other {
                AdversaryKind::None => Adversary::None,
                AdversaryKind::HuberMixture => {
                    Adversary::HuberMixture { covariance: Covariance::identity(p.d), label: p.huber_label }
                }
                _ => Adversary::TargetedLabels { scale: p.scale, noise_sd: p.noise_var.sqrt() },
            };
            (model, ContaminationSpec::new(p.eps, adversary)?)
        }
    })
}

fn execute(cmd: &Command, seed: Seed) -> Result<(Table, bool)> {
    match cmd {
        Command::Generate(p) => {
            let (model, spec) = build_problem(p, seed)?;
            let clean = sample_clean(&model, p.n, seed.derive("clean", 0))?;
            let out = contaminate_tracked(&clean, &spec, seed.derive("adversary", 0))?;
            let mut cols = vec!["row".to_string(), "corrupted".to_string()];
            cols.extend((0..p.d).map(|j| format!("x{j}")));
            cols.push("y".into());
            let mut table = Table::new(cols);
            let mut flagged = vec![false; p.n];
            for &i in &out.corrupted {
                flagged[i] = true;
            }
            for i in 0..p.n {
                let mut row = vec![int(i), Value::Bool(flagged[i])];
                row.extend(out.data.row(i).iter().map(|&v| f(v)));
                table.push(row);
            }
            Ok((table, true))
        }
        Command::Regress { problem, trials, estimators, stop_mult, sigma_hat_scale } => {
            if *trials == 0 {
                return Err(validation("trials must be >= 1"));
            }
            for e in estimators {
                if !["zero", "ols", "robust", "preconditioned"].contains(&e.as_str()) {
                    return Err(validation(format!("unknown estimator '{e}'")));
                }
            }
            let mut table = Table::new([
                "trial",
                "estimator",
                "eps",
                "kappa",
                "n",
                "error",
                "error_over_sqrt_epskappa",
                "rounds_used",
                "weight_removed",
                "converged",
            ]);
            let mut cfg = RegressorConfig::new(problem.eps)?;
            if let Some(m) = stop_mult {
                cfg.stop_mult = *m;
                cfg.validate()?;
            }
            for t in 0..*trials {
                let ts = seed.derive("trial", t as u64);
                let (model, spec) = build_problem(problem, ts)?;
                let clean = sample_clean(&model, problem.n, ts.derive("clean", 0))?;
                let data = contaminate_tracked(&clean, &spec, ts.derive("adversary", 0))?.data;
                for e in estimators {
                    let report = match e.as_str() {
                        "zero" => fit_zero(&data),
                        "ols" => fit_ols(&data)?,
                        "robust" => fit_robust(&data, &cfg)?,
                        _ => fit_preconditioned(&data, &(model.covariance.to_dense() * *sigma_hat_scale), &cfg)?,
                    };
                    let err = mahalanobis_error(&report.beta_hat, &model.beta, &model.covariance)?;
                    table.push(vec![
                        int(t),
                        s(e.as_str()),
                        f(problem.eps),
                        f(problem.kappa),
                        int(problem.n),
                        f(err),
                        f(err / (problem.eps * problem.kappa).sqrt()),
                        int(report.rounds_used),
                        f(report.total_weight_removed),
                        Value::Bool(report.converged),
                    ]);
                }
            }
            Ok((table, true))
        }
        Command::Certify { d, eps, kappa, n, trials, c_est } => {
            let mut cfg = CertificateConfig::new(*eps)?;
            cfg.c_est = *c_est;
            cfg.validate()?;
            let n = n.unwrap_or_else(|| certificate_sample_size(*d, *eps));
            let base = sweep_model(*d, *kappa, seed.derive("model", 0))?;
            let model = LinearModelSpec::new(base.covariance, DVector::zeros(*d), 1.0)?;
            let data = sample_clean(&model, n, seed.derive("data", 0))?;
            let reports = certify(&data, &model, &cfg, *trials, seed.derive("directions", 0))?;
            let mut table = Table::new([
                "trial",
                "n",
                "frac_big_norm",
                "frac_big_proj",
                "g_u_size",
                "spectral_value",
                "bound_value",
                "pass",
            ]);
            let mut passes = 0;
            for (t, r) in reports.iter().enumerate() {
                passes += r.pass as usize;
                table.push(vec![
                    int(t),
                    int(r.n),
                    f(r.frac_big_norm),
                    f(r.frac_big_proj),
                    int(r.g_u_size),
                    f(r.spectral_value),
                    f(r.bound_value),
                    Value::Bool(r.pass),
                ]);
            }
            Ok((table, passes as f64 >= 0.95 * *trials as f64))
        }
        Command::SqInstance { mu, sigma_s2, eps, kappa, c1 } => {
            let mix = build_mixture(*mu, *sigma_s2, *eps)?;
            let chi2 = chi2_mixture(&mix).map(f).unwrap_or(Value::Null);
            let normalizer = match kappa {
                Some(k) => f(marginal_normalizer(*eps, *c1, *k)?),
                None => Value::Null,
            };
            let (m1, m2, m3) = (mix.moment(1), mix.moment(2), mix.moment(3));
            let ok = m1.abs() <= 1e-9 && (m2 - 1.0).abs() <= 1e-9 && m3.abs() <= 1e-9;
            let mut table = Table::new([
                "regime",
                "eps_mu",
                "mu_s",
                "sigma_s2",
                "component",
                "weight",
                "mean",
                "var",
                "m1",
                "m2",
                "m3",
                "chi2",
                "normalizer",
            ]);
            for (i, c) in mix.components.iter().enumerate() {
                table.push(vec![
                    s(mix.regime.as_str()),
                    f(mix.eps_mu),
                    f(mix.mu_s),
                    f(mix.sigma_s2),
                    int(i),
                    f(c.weight),
                    f(c.mean),
                    f(c.var),
                    f(m1),
                    f(m2),
                    f(m3),
                    chi2.clone(),
                    normalizer.clone(),
                ]);
            }
            Ok((table, ok))
        }
        Command::LowdegAdvantage { n, d, eps, kappa, degree } => {
            let mut table = Table::new(["kind", "p", "value"]);
            for (p, term) in advantage_bound_terms(*n, *d, *eps, *kappa, *degree)? {
                table.push(vec![s("term"), int(p), f(term)]);
            }
            table.push(vec![s("total"), int(*degree), f(advantage_bound(*n, *d, *eps, *kappa, *degree)?)]);
            Ok((table, true))
        }
        Command::ReductionTest { d, kappa, eps, alpha, noise_var, n, trials, estimator, large_c } => {
            if *trials == 0 {
                return Err(validation("trials must be >= 1"));
            }
            let est = match estimator.as_str() {
                "oracle" => DirectionEstimator::Oracle,
                "ols" => DirectionEstimator::Ols,
                "robust" => DirectionEstimator::Robust(RegressorConfig::new(*eps)?),
                other => return Err(validation(format!("unknown estimator '{other}'"))),
            };
            let v = random_unit_vector(*d, &mut seed.stream("direction", 0))?;
            let inst = build_lowdeg_instance(*d, *kappa, *eps, alpha * kappa.sqrt(), *noise_var, v)?;
            let cfg = ReductionConfig { large_kappa_const: *large_c };
            let mut table = Table::new([
                "trial",
                "hypothesis",
                "regime",
                "statistic",
                "threshold",
                "decide_alternative",
                "correct",
            ]);
            let mut right = [0usize; 2];
            for t in 0..*trials {
                for (h, which, tag) in [(0, Hypothesis::Null, "null"), (1, Hypothesis::Alternative, "alt")] {
                    let verdict = run_reduction(&inst, *n, which, &est, &cfg, seed.derive(tag, t as u64))?;
                    let correct = verdict.decide_alternative == (h == 1);
                    right[h] += correct as usize;
                    table.push(vec![
                        int(t),
                        s(tag),
                        s(verdict.regime.as_str()),
                        f(verdict.statistic),
                        f(verdict.threshold),
                        Value::Bool(verdict.decide_alternative),
                        Value::Bool(correct),
                    ]);
                }
            }
            let need = 0.9 * *trials as f64;
            Ok((table, right.iter().all(|&r| r as f64 >= need)))
        }
        Command::Bench { eps, kappa, d, n, trials } => {
            let rows = regression_sweep(eps, kappa, *d, *n, *trials, seed.derive("bench", 0))?;
            let mut table =
                Table::new(["eps", "kappa", "n", "estimator", "err_mean", "err_se", "err_over_sqrt_epskappa"]);
            for r in rows {
                table.push(vec![
                    f(r.eps),
                    f(r.kappa),
                    int(r.n),
                    s(r.estimator),
                    f(r.err_mean),
                    f(r.err_se),
                    f(r.err_over_sqrt_epskappa),
                ]);
            }
            Ok((table, true))
        }
        Command::VerifyAll { quick, only } => {
            let scale = if *quick { Scale::Quick } else { Scale::Full };
            let ids: Vec<u32> = if only.is_empty() { CHECKS.iter().map(|c| c.0).collect() } else { only.clone() };
            let mut table = Table::new(["criterion", "name", "pass", "metric", "detail"]);
            let mut all = true;
            for id in ids {
                // Timings go to stderr so the records stay reproducible.
                let start = std::time::Instant::now();
                let o = run_check(id, scale, seed)?;
                let verdict = if o.pass { "pass" } else { "FAIL" };
                eprintln!("check {id} {}: {verdict} in {:.1}s", o.name, start.elapsed().as_secs_f64());
                all &= o.pass;
                table.push(vec![Value::Int(o.criterion as i64), s(o.name), Value::Bool(o.pass), f(o.metric), s(o.detail)]);
            }
            Ok((table, all))
        }
    }
}
