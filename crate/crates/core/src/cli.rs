//! Command-line front end: `analyze`, `sweep`, `simulate` and `validate`.
//!
//! Every flag may also come from a config file of `key = value` lines whose
//! keys are the long flag names (`l1 = 2`, `no-sim = true`, ...). Flags given
//! on the command line win.
//!
//! Exit codes: 0 success, 1 validation failure, 2 invalid input or an
//! unstable single-point analysis.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ModelParams, Rate};
use crate::sim::{self, Mode, SimConfig, SimResult};
use crate::validate::{self, Scale};
use crate::{age, analytic};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION_FAILED: u8 = 1;
pub const EXIT_INVALID: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "prioage", version, about = "Age of information in a two-stream priority queue")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form report for one parameter point.
    Analyze(CommonArgs),
    /// One row per grid point of a swept rate, as CSV or JSON.
    Sweep(CommonArgs),
    /// One simulation run, summarized as JSON.
    Simulate(CommonArgs),
    /// Runs the cross-check suite.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    True,
    Fictitious,
}

impl FromStr for ModeArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::True => Mode::TrueSystem,
            ModeArg::Fictitious => Mode::FictitiousSystem,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by all subcommands; each subcommand reads the ones it needs.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub l1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub l2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub m1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub m2: Option<f64>,
    /// Rate to sweep: l1, l2, m1 or m2.
    #[arg(long)]
    pub sweep: Option<Rate>,
    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stream-1 deliveries to observe after warm-up.
    #[arg(long)]
    pub deliveries: Option<u64>,
    /// Stream-1 deliveries discarded before measuring.
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Skip simulation in a sweep.
    #[arg(long)]
    pub no_sim: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reduced-size validation suite.
    #[arg(long)]
    pub quick: bool,
    /// Run only this validation criterion (1-9).
    #[arg(long)]
    pub criterion: Option<u8>,
    /// File of `key = value` lines supplying defaults for the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Parsed `key = value` file. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("config line {}: expected `key = value`", n + 1))
            })?;
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!(
                    "config line {}: unknown key `{key}`",
                    n + 1
                )));
            }
            entries.insert(key, v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::InvalidConfig(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }
}

const KNOWN_KEYS: [&str; 16] = [
    "l1", "l2", "m1", "m2", "sweep", "from", "to", "points", "seed", "deliveries", "warmup",
    "mode", "no-sim", "format", "out", "quick",
];

impl CommonArgs {
    /// Fills unset flags from `file`.
    pub fn merge(mut self, file: &ConfigFile) -> Result<Self> {
        macro_rules! fill {
            ($($field:ident => $key:literal),*) => {
                $(if self.$field.is_none() {
                    self.$field = file.get($key)?;
                })*
            };
        }
        fill!(l1 => "l1", l2 => "l2", m1 => "m1", m2 => "m2", sweep => "sweep",
              from => "from", to => "to", points => "points", seed => "seed",
              deliveries => "deliveries", warmup => "warmup", mode => "mode",
              format => "format", out => "out");
        self.no_sim |= file.get::<bool>("no-sim")?.unwrap_or(false);
        self.quick |= file.get::<bool>("quick")?.unwrap_or(false);
        Ok(self)
    }

    fn resolved(self) -> Result<Self> {
        match &self.config {
            Some(path) => {
                let file = ConfigFile::load(path)?;
                self.merge(&file)
            }
            None => Ok(self),
        }
    }

    fn params(&self) -> Result<ModelParams> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Error::InvalidConfig(format!("missing --{flag}")))
        };
        ModelParams::new(
            need(self.l1, "l1")?,
            need(self.l2, "l2")?,
            need(self.m1, "m1")?,
            need(self.m2, "m2")?,
        )
    }

    fn sim_config(&self) -> SimConfig {
        let mut cfg = SimConfig::default();
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.deliveries {
            cfg.target_deliveries = n;
        }
        if let Some(w) = self.warmup {
            cfg.warmup_deliveries = w;
        }
        if let Some(m) = self.mode {
            cfg.mode = m.into();
        }
        cfg
    }
}

/// Everything `analyze` reports. Quantities that need a stable system are
/// `None` when it is not.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub stable: bool,
    pub margin: f64,
    pub pi0: Option<f64>,
    pub e_n: Option<f64>,
    pub peak_age_1: Option<f64>,
    pub age_lb_1: Option<f64>,
    pub age_u2: Option<f64>,
    pub age_ref: Option<f64>,
    pub mean_z: Option<f64>,
    pub rho: f64,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
}

pub fn analyze(p: &ModelParams) -> AnalysisReport {
    let st = analytic::check_stability(p);
    let lb = age::system_time_lb(p).ok();
    AnalysisReport {
        lambda1: p.lambda1(),
        lambda2: p.lambda2(),
        mu1: p.mu1(),
        mu2: p.mu2(),
        stable: st.is_stable,
        margin: st.margin,
        pi0: st.pi0,
        e_n: analytic::expected_queue_length(p).ok(),
        peak_age_1: analytic::peak_age_ordinary(p).ok(),
        age_lb_1: age::age_lower_bound(p).ok(),
        age_u2: analytic::priority_age(p).ok(),
        age_ref: analytic::reference_mm1_age(p.lambda1(), p.mu1()).ok(),
        mean_z: age::virtual_service_moments(p).ok().map(|l| l.mean_z),
        rho: p.lambda1() * (p.mu2() + p.lambda2()) / (p.mu1() * p.mu2()),
        alpha1: lb.map(|t| t.alpha1),
        alpha2: lb.map(|t| t.alpha2),
    }
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
        let mut s = format!(
            "lambda1 = {}, lambda2 = {}, mu1 = {}, mu2 = {}\n",
            self.lambda1, self.lambda2, self.mu1, self.mu2
        );
        s += &format!(
            "stability margin  {} ({})\n",
            self.margin,
            if self.stable { "stable" } else { "UNSTABLE" }
        );
        for (name, v) in [
            ("pi0", self.pi0),
            ("E[N]", self.e_n),
            ("peak age 1", self.peak_age_1),
            ("age lower bound 1", self.age_lb_1),
            ("age 2", self.age_u2),
            ("M/M/1 age", self.age_ref),
            ("E[Z]", self.mean_z),
            ("rho", Some(self.rho)),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
        ] {
            s += &format!("{name:<18}{}\n", opt(v));
        }
        s
    }
}

/// A grid over one rate with the other three fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub rate: Rate,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    /// `None` skips simulation. The seed here is the base seed; point `k`
    /// uses `mix_seed(seed, k)`.
    pub sim: Option<SimConfig>,
}

impl SweepSpec {
    /// Evenly spaced values from `from` to `to` inclusive.
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.to } else { self.from + step * k as f64 })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::InvalidConfig("--points must be at least 1".into()));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Error::InvalidConfig("--from and --to must be finite".into()));
        }
        if self.points > 1 && !(self.from < self.to) {
            return Err(Error::InvalidConfig(
                "grid must be strictly increasing (--from < --to)".into(),
            ));
        }
        for v in self.grid() {
            self.base.with(self.rate, v)?;
        }
        if let Some(cfg) = &self.sim {
            cfg.validate()?;
        }
        Ok(())
    }
}

/// One CSV row. Column order is the field order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub swept_value: f64,
    pub margin: f64,
    pub pi0: Option<f64>,
    pub e_n: Option<f64>,
    pub peak_age_1: Option<f64>,
    pub age_lb_1: Option<f64>,
    pub age_u2: Option<f64>,
    pub age_ref: Option<f64>,
    pub sim_age_1: Option<f64>,
    pub sim_peak_1: Option<f64>,
    pub sim_age_2: Option<f64>,
    pub sim_e_n: Option<f64>,
    pub seed: Option<u64>,
    pub deliveries: Option<u64>,
    pub stable: bool,
}

pub const SWEEP_COLUMNS: [&str; 15] = [
    "swept_value",
    "margin",
    "pi0",
    "e_n",
    "peak_age_1",
    "age_lb_1",
    "age_u2",
    "age_ref",
    "sim_age_1",
    "sim_peak_1",
    "sim_age_2",
    "sim_e_n",
    "seed",
    "deliveries",
    "stable",
];

fn sweep_row(spec: &SweepSpec, index: usize, value: f64) -> Result<SweepRow> {
    let p = spec.base.with(spec.rate, value)?;
    let a = analyze(&p);
    let sim = match (&spec.sim, a.stable) {
        (Some(cfg), true) => {
            let cfg = SimConfig {
                seed: sim::mix_seed(cfg.seed, index as u64),
                ..*cfg
            };
            Some((cfg, sim::run(&p, &cfg)?))
        }
        _ => None,
    };
    let get = |f: fn(&SimResult) -> f64| sim.as_ref().map(|(_, r)| f(r));
    Ok(SweepRow {
        swept_value: value,
        margin: a.margin,
        pi0: a.pi0,
        e_n: a.e_n,
        peak_age_1: a.peak_age_1,
        age_lb_1: a.age_lb_1,
        age_u2: a.age_u2,
        age_ref: a.age_ref,
        sim_age_1: get(|r| r.avg_age_1),
        sim_peak_1: get(|r| r.avg_peak_1),
        sim_age_2: get(|r| r.avg_age_2),
        sim_e_n: get(|r| r.time_avg_n),
        seed: sim.as_ref().map(|(c, _)| c.seed),
        deliveries: sim.as_ref().map(|(c, _)| c.target_deliveries),
        stable: a.stable,
    })
}

/// Evaluates every grid point, concurrently; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.grid()
        .into_par_iter()
        .enumerate()
        .map(|(k, v)| sweep_row(spec, k, v))
        .collect()
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(SWEEP_COLUMNS)?;
    }
    w.flush()
}

/// `simulate` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub params: ModelParams,
    pub stable: bool,
    pub config: SimConfig,
    pub result: SimResult,
}

pub fn simulate(p: &ModelParams, cfg: &SimConfig) -> Result<SimulationSummary> {
    Ok(SimulationSummary {
        params: *p,
        stable: analytic::check_stability(p).is_stable,
        config: *cfg,
        result: sim::run(p, cfg)?,
    })
}

/// Parses `args` (including the program name) and runs the command,
/// writing to `stdout` / `stderr`. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    let io_err = |e: io::Error| Error::InvalidConfig(format!("writing output: {e}"));
    match out {
        Some(path) => fs::write(path, bytes).map_err(io_err),
        None => stdout.write_all(bytes).map_err(io_err),
    }
}

fn json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serializable");
    s.push(b'\n');
    s
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<u8> {
    match command {
        Command::Analyze(args) => {
            let args = args.resolved()?;
            let report = analyze(&args.params()?);
            let bytes = match args.format.unwrap_or(Format::Text) {
                Format::Json => json(&report),
                Format::Text => report.to_text().into_bytes(),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.serialize(&report)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                    w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?
                }
            };
            emit(&args.out, stdout, &bytes)?;
            Ok(if report.stable { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Sweep(args) => {
            let args = args.resolved()?;
            let rate = args
                .sweep
                .ok_or_else(|| Error::InvalidConfig("missing --sweep".into()))?;
            // the swept rate needs no flag of its own
            let mut fixed = args.clone();
            let placeholder = Some(args.from.unwrap_or(1.0).max(f64::MIN_POSITIVE));
            match rate {
                Rate::Lambda1 => fixed.l1 = fixed.l1.or(placeholder),
                Rate::Lambda2 => fixed.l2 = fixed.l2.or(placeholder),
                Rate::Mu1 => fixed.m1 = fixed.m1.or(placeholder),
                Rate::Mu2 => fixed.m2 = fixed.m2.or(placeholder),
            }
            let spec = SweepSpec {
                base: fixed.params()?,
                rate,
                from: args
                    .from
                    .ok_or_else(|| Error::InvalidConfig("missing --from".into()))?,
                to: args.to.ok_or_else(|| Error::InvalidConfig("missing --to".into()))?,
                points: args
                    .points
                    .ok_or_else(|| Error::InvalidConfig("missing --points".into()))?,
                sim: (!args.no_sim).then(|| args.sim_config()),
            };
            let rows = run_sweep(&spec)?;
            let bytes = match args.format.unwrap_or(Format::Csv) {
                Format::Json => json(&rows),
                Format::Csv | Format::Text => {
                    let mut buf = Vec::new();
                    write_csv(&rows, &mut buf)
                        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
                    buf
                }
            };
            emit(&args.out, stdout, &bytes)?;
            Ok(EXIT_OK)
        }
        Command::Simulate(args) => {
            let args = args.resolved()?;
            let summary = simulate(&args.params()?, &args.sim_config())?;
            emit(&args.out, stdout, &json(&summary))?;
            Ok(EXIT_OK)
        }
        Command::Validate(args) => {
            let args = args.resolved()?;
            let scale = if args.quick { Scale::Quick } else { Scale::Full };
            let seed = args.seed.unwrap_or(validate::DEFAULT_SEED);
            let report = match args.criterion {
                Some(id) => validate::SuiteReport {
                    scale,
                    seed,
                    criteria: vec![validate::run_criterion(id, scale, seed)?],
                },
                None => validate::run_suite(scale, seed)?,
            };
            let bytes = match args.format.unwrap_or(Format::Text) {
                Format::Json => json(&report),
                _ => format!("{report}\n").into_bytes(),
            };
            emit(&args.out, stdout, &bytes)?;
            Ok(if report.passed() {
                EXIT_OK
            } else {
                EXIT_VALIDATION_FAILED
            })
        }
    }
}
