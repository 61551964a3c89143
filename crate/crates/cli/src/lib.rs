//! Library half of the `fqj` command-line tool: configuration, reports,
//! subcommand drivers and the verification suites.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{parse_config_text, RunConfig, SEED_ENV};
use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Func(#[from] fq_junta::funcs::FuncError),
    #[error(transparent)]
    Lbp(#[from] fq_junta::lbp::LbpError),
    #[error(transparent)]
    Ldme(#[from] fq_junta::ldme::LdmeError),
    #[error(transparent)]
    Junta(#[from] fq_junta::junta::JuntaError),
}

#[derive(Parser, Debug)]
#[command(name = "fqj", version, about = "Junta learning over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a junta, LDME or LBP instance file.
    Gen(Common),
    /// Learn the relevant coordinates of junta instances.
    Learn(Common),
    /// Run the LDME solver on planted targets.
    Ldme(Common),
    /// Run light bulb solvers on planted instances.
    Lbp(Common),
    /// Run property suites.
    Verify(VerifyArgs),
    /// Time the LBP backends and one LDME solve.
    Bench(Common),
}

/// Flags shared by the drivers; each overrides the same key in `--config`.
#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// `key = value` file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field: prime power (`4`) or token `p:ell[:c0,..,c_ell]`.
    #[arg(long)]
    pub q: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// `naive`, `grouped`, `grouped:<g>` (and `both` for `lbp`).
    #[arg(long)]
    pub backend: Option<String>,
    /// Scales the constant, relevance and trial counts of the learner.
    #[arg(long)]
    pub multiplier: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    /// Instance kind for `gen`: junta, ldme or lbp.
    #[arg(long)]
    pub kind: Option<String>,
    /// Number of LBP columns.
    #[arg(long = "N")]
    pub count: Option<String>,
    /// Rows of an LBP instance.
    #[arg(long)]
    pub d: Option<String>,
    /// Weight of a generated LDME secret (default k).
    #[arg(long)]
    pub weight: Option<String>,
    /// Instance file to read instead of generating targets.
    #[arg(long)]
    pub instance: Option<String>,
    /// Generate a fresh random instance per trial (the default without `--instance`).
    #[arg(long)]
    pub random: bool,
    /// Report file (appended) or, for `gen`, the instance file.
    #[arg(long)]
    pub out: Option<String>,
    /// `exact` or `desk`.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub reuse: Option<String>,
    #[arg(long)]
    pub row_multiplier: Option<String>,
    #[arg(long)]
    pub cor_multiplier: Option<String>,
    #[arg(long)]
    pub ldme_rho: Option<String>,
    #[arg(long)]
    pub ldme_runs: Option<String>,
    #[arg(long)]
    pub repeats: Option<String>,
    /// Size later detection rounds for `k - |R|` (`true`/`false`).
    #[arg(long)]
    pub residual_k: Option<String>,
    /// Exit nonzero when the success rate falls below this.
    #[arg(long)]
    pub min_success: Option<String>,
    /// Add wall-clock fields to trial lines.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Suite to run (repeatable).
    #[arg(long)]
    pub suite: Vec<String>,
    /// Run every suite.
    #[arg(long)]
    pub all: bool,
    #[arg(long)]
    pub seed: Option<String>,
    /// List the suite names.
    #[arg(long)]
    pub list: bool,
}

impl Common {
    fn flags(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("q", &self.q),
            ("n", &self.n),
            ("k", &self.k),
            ("rho", &self.rho),
            ("delta", &self.delta),
            ("seed", &self.seed),
            ("backend", &self.backend),
            ("multiplier", &self.multiplier),
            ("trials", &self.trials),
            ("kind", &self.kind),
            ("count", &self.count),
            ("d", &self.d),
            ("weight", &self.weight),
            ("instance", &self.instance),
            ("out", &self.out),
            ("profile", &self.profile),
            ("reuse", &self.reuse),
            ("row_multiplier", &self.row_multiplier),
            ("cor_multiplier", &self.cor_multiplier),
            ("ldme_rho", &self.ldme_rho),
            ("ldme_runs", &self.ldme_runs),
            ("repeats", &self.repeats),
            ("residual_k", &self.residual_k),
            ("min_success", &self.min_success),
        ];
        let mut m: BTreeMap<String, String> = pairs
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if self.timing {
            m.insert("timing".into(), "true".into());
        }
        m
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => parse_config_text(&std::fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        Ok(RunConfig::resolve(&self.flags(), &file, std::env::var(SEED_ENV).ok())?)
    }
}

/// Runs the tool; returns the process exit code (0 all thresholds met,
/// 1 some threshold missed, 2 usage or runtime error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cmd: &Command) -> Result<bool, CliError> {
    if let Command::Verify(v) = cmd {
        return run_verify(v);
    }
    let common = match cmd {
        Command::Gen(c) | Command::Learn(c) | Command::Ldme(c) | Command::Lbp(c) | Command::Bench(c) => c,
        Command::Verify(_) => unreachable!(),
    };
    if common.random && common.instance.is_some() {
        return Err(CliError::Usage("--random and --instance are exclusive".into()));
    }
    let cfg = common.resolve()?;
    // `gen` writes its instance to `out`; the others append their report there.
    let report_path = match cmd {
        Command::Gen(_) => None,
        _ => cfg.get_opt::<PathBuf>("out")?,
    };
    let mut report = Report::stdout_and(report_path.as_deref())?;
    let name = match cmd {
        Command::Gen(_) => "gen",
        Command::Learn(_) => "learn",
        Command::Ldme(_) => "ldme",
        Command::Lbp(_) => "lbp",
        Command::Bench(_) => "bench",
        Command::Verify(_) => unreachable!(),
    };
    if !matches!(cmd, Command::Gen(_)) || cfg.get_opt::<String>("out")?.is_some() {
        report.line(format!("command={name}"))?;
        report.lines(cfg.echo())?;
    }
    let ok = match cmd {
        Command::Gen(_) => commands::cmd_gen(&cfg, &mut report)?,
        Command::Learn(_) => commands::cmd_learn(&cfg, &mut report)?,
        Command::Ldme(_) => commands::cmd_ldme(&cfg, &mut report)?,
        Command::Lbp(_) => commands::cmd_lbp(&cfg, &mut report)?,
        Command::Bench(_) => commands::cmd_bench(&cfg, &mut report)?,
        Command::Verify(_) => unreachable!(),
    };
    report.flush()?;
    Ok(ok)
}

fn run_verify(v: &VerifyArgs) -> Result<bool, CliError> {
    let mut report = Report::stdout_and(None)?;
    if v.list {
        report.lines(verify::suite_names().into_iter().map(String::from))?;
        return Ok(true);
    }
    let seed: u64 = match v.seed.clone().or_else(|| std::env::var(SEED_ENV).ok()) {
        Some(s) => s.parse().map_err(|_| CliError::Usage(format!("bad seed {s:?}")))?,
        None => 0,
    };
    let names: Vec<String> = if v.all {
        verify::suite_names().into_iter().map(String::from).collect()
    } else if v.suite.is_empty() {
        return Err(CliError::Usage("give --suite NAME or --all".into()));
    } else {
        v.suite.clone()
    };
    report.line("command=verify")?;
    report.line(format!("config seed={seed}"))?;
    let mut all = true;
    for name in &names {
        let res = verify::run_suite(name, seed).ok_or_else(|| CliError::Usage(format!("unknown suite {name:?}")))?;
        all &= res.passed();
        report.line(res.line())?;
    }
    report.line(format!("summary suites={} status={}", names.len(), if all { "pass" } else { "fail" }))?;
    Ok(all)
}
