//! Command-line front end. Every command writes one CSV with a fixed header,
//! `.` decimals, 17 significant digits and LF line endings.
//!
//! Exit codes: 0 success, 2 parse or validation failure, 3 numerical
//! failure, 4 when every requested limit is unbounded.

pub mod format;

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::bayes::PriorConfig;
use crate::ds_limits::{combine_channels, CdfRoute, Dataset, DsConfig, GridConfig};
use crate::evalharness::{
    coverage_enumerate, coverage_importance, credibility_curve, reference_upper_limit, simulate_study, BayesMethod,
    CoverageProblem, CredibilityConfig, DsMethod, EnumerationConfig, FnMethod, GammaPrior, LimitMethod, StudyConfig,
};
use crate::sampling::{RngHandle, TaskKind, DEFAULT_SEED};
pub use format::{parse_dataset_file, parse_dataset_str, write_dataset_file, ParseError, FORMAT_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Numeric(#[from] crate::Error),
    #[error("every limit is unbounded")]
    AllUnbounded,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use crate::Error as E;
        match self {
            CliError::Parse(_) | CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Numeric(E::InvalidConfig(_) | E::EnumerationTooLarge { .. }) => 2,
            CliError::Numeric(E::UnboundedLimit { .. }) | CliError::AllUnbounded => 4,
            CliError::Numeric(_) => 3,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "dsplim", version, about = "Dempster-Shafer upper limits for a Poisson signal with background and efficiency")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "DSPLIM_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Dataset file format.
    #[arg(long, global = true, default_value = FORMAT_VERSION)]
    pub format: String,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper limits for every dataset in a file.
    Limits {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Per-channel CDF and commonality curves plus the combined density.
    Curves {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        method: MethodArgs,
    },
    /// Coverage C(s) of a method at fixed nuisance values.
    Coverage {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, value_enum, default_value_t = CoverageMode::Enumerate)]
        mode: CoverageMode,
        /// s grid as lo:hi:step.
        #[arg(long, default_value = "0:25:0.25")]
        s_grid: String,
        /// Monte Carlo sample size for importance sampling.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Reference signal for importance sampling; the grid midpoint by default.
        #[arg(long)]
        s_ref: Option<f64>,
        /// Per-margin tail mass dropped by enumeration.
        #[arg(long, default_value_t = 1e-10)]
        cutoff: f64,
        #[arg(long, default_value_t = 2_000_000)]
        cell_budget: u64,
    },
    /// Credibility of each dataset's limits under gamma priors on b and eps.
    Credibility {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, value_enum, default_value_t = Task::T1a)]
        task: Task,
        /// Background prior as mean:sd (overrides the task preset).
        #[arg(long)]
        b_prior: Option<String>,
        /// Efficiency prior as mean:sd (overrides the task preset).
        #[arg(long)]
        e_prior: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Coverage study on simulated datasets, summarized per method and level.
    Simulate {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        method: MethodArgs,
        #[arg(long, default_value = "0:40:0.25")]
        s_grid: String,
        /// Datasets per s value.
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        /// Methods to compare.
        #[arg(long, value_delimiter = ',', default_value = "ds,bayes:B1,bayes:B2,bayes:upper,bayes:lower")]
        methods: Vec<String>,
        /// s range of the summary as lo:hi.
        #[arg(long, default_value = "20:40")]
        summary_range: String,
        /// Also write per-s coverage (method,level,s,coverage) here.
        #[arg(long)]
        per_s: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset file; stdin when absent or '-'.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// ds, bayes, bayes:<prior>, or reference (credibility only).
    #[arg(long, default_value = "ds")]
    pub method: String,
    /// Prior preset for --method bayes.
    #[arg(long, default_value = "B1")]
    pub prior: String,
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99")]
    pub quantiles: Vec<f64>,
    #[arg(long, default_value_t = 512)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tail_eps: f64,
    /// How channel CDFs are evaluated.
    #[arg(long, value_enum, default_value_t = Route::Auto)]
    pub route: Route,
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// Preset for t, u, eps and b.
    #[arg(long, value_enum, default_value_t = Task::T1a)]
    pub task: Task,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub u: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    #[value(name = "1a")]
    T1a,
    #[value(name = "1b")]
    T1b,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoverageMode {
    Enumerate,
    Importance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Auto,
    Quadrature,
    Exact,
}

impl ProblemArgs {
    fn problem(&self, q: f64) -> CoverageProblem {
        let base = match self.task {
            Task::T1a => CoverageProblem::task1a(q),
            Task::T1b => CoverageProblem::task1b(q),
        };
        CoverageProblem {
            t: self.t.unwrap_or(base.t),
            u: self.u.unwrap_or(base.u),
            eps: self.eps.unwrap_or(base.eps),
            b: self.b.unwrap_or(base.b),
            q,
        }
    }
}

impl MethodArgs {
    fn ds_config(&self) -> CliResult<DsConfig> {
        let grid = GridConfig { points: self.grid_points, tail_eps: self.tail_eps, ..GridConfig::default() };
        grid.validate()?;
        let route = match self.route {
            Route::Auto => CdfRoute::default(),
            Route::Quadrature => CdfRoute::quadrature(),
            Route::Exact => CdfRoute::NegativeBinomialSum,
        };
        Ok(DsConfig { grid, route })
    }

    fn quantiles(&self) -> CliResult<Vec<f64>> {
        let q = &self.quantiles;
        if q.is_empty() || q.iter().any(|v| !(*v > 0.0 && *v < 1.0)) || q.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Usage(format!("quantiles must be strictly increasing in (0, 1), got {q:?}")));
        }
        Ok(q.clone())
    }

    fn build(&self, spec: &str) -> CliResult<Box<dyn LimitMethod>> {
        let ds = self.ds_config()?;
        let route = ds.route;
        let lower = spec.to_ascii_lowercase();
        match lower.as_str() {
            "ds" => Ok(Box::new(DsMethod(ds))),
            "bayes" => Ok(Box::new(BayesMethod { prior: PriorConfig::by_name(&self.prior)?, route })),
            _ => match lower.strip_prefix("bayes:") {
                Some(p) => Ok(Box::new(BayesMethod { prior: PriorConfig::by_name(p)?, route })),
                None => Err(CliError::Usage(format!("unknown method '{spec}'"))),
            },
        }
    }
}

fn parse_range(text: &str, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("{what} '{text}' is not numeric")))?;
    Ok(nums)
}

/// `lo:hi:step`, inclusive of `hi` up to rounding.
pub fn parse_s_grid(text: &str) -> CliResult<Vec<f64>> {
    let v = parse_range(text, "s grid")?;
    let [lo, hi, step] = v.as_slice() else {
        return Err(CliError::Usage(format!("s grid '{text}' must be lo:hi:step")));
    };
    if !(*step > 0.0) || !(hi >= lo) || !(*lo >= 0.0) {
        return Err(CliError::Usage(format!("s grid '{text}' needs 0 <= lo <= hi and step > 0")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

fn parse_prior(text: &str) -> CliResult<GammaPrior> {
    match parse_range(text, "prior")?.as_slice() {
        [mean, sd] => Ok(GammaPrior { mean: *mean, sd: *sd }),
        _ => Err(CliError::Usage(format!("prior '{text}' must be mean:sd"))),
    }
}

/// Fixed-width scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn read_input(input: &InputArgs) -> CliResult<Vec<Dataset>> {
    match &input.input {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::open(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
            Ok(parse_dataset_file(BufReader::new(f))?)
        }
        _ => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text).map_err(|source| CliError::Io { path: "stdin".into(), source })?;
            Ok(parse_dataset_str(&text)?)
        }
    }
}

fn write_output(path: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "stdout".into(), source }),
    }
}

fn quantile_label(q: f64) -> String {
    format!("{q}")
}

/// Returns the CSV and the exit code (4 when no dataset has a finite limit).
fn cmd_limits(input: &InputArgs, margs: &MethodArgs) -> CliResult<(String, i32)> {
    let datasets = read_input(input)?;
    let qs = margs.quantiles()?;
    let method = margs.build(&margs.method)?;
    let rows: Vec<Vec<f64>> =
        datasets.par_iter().map(|ds| method.limits(ds, &qs)).collect::<crate::Result<_>>()?;
    let mut out = String::from("dataset_id");
    for q in &qs {
        out += &format!(",limit_{}", quantile_label(*q));
    }
    out += ",status\n";
    let mut unbounded = 0;
    for (i, limits) in rows.iter().enumerate() {
        out += &i.to_string();
        let bounded = limits.iter().all(|l| l.is_finite());
        for l in limits {
            out.push(',');
            if l.is_finite() {
                out += &fmt_f64(*l);
            }
        }
        out += if bounded { ",ok\n" } else { ",unbounded\n" };
        if !bounded {
            unbounded += 1;
        }
    }
    let code = if !rows.is_empty() && unbounded == rows.len() { 4 } else { 0 };
    Ok((out, code))
}

fn cmd_curves(input: &InputArgs, margs: &MethodArgs) -> CliResult<String> {
    let datasets = read_input(input)?;
    let cfg = margs.ds_config()?;
    let per_dataset: Vec<String> = datasets
        .par_iter()
        .enumerate()
        .map(|(id, ds)| -> crate::Result<String> {
            let curves = cfg.curves(ds)?;
            let mut out = String::new();
            for (ci, c) in curves.iter().enumerate() {
                for i in 0..c.xs.len() {
                    out += &format!(
                        "{id},{ci},{},{},{},{},,\n",
                        fmt_f64(c.xs[i]),
                        fmt_f64(c.f_lower[i]),
                        fmt_f64(c.f_upper[i]),
                        fmt_f64(c.r[i])
                    );
                }
            }
            match combine_channels(&curves, &cfg.grid) {
                Ok(d) => {
                    for i in 0..d.xs.len() {
                        out += &format!("{id},all,{},,,,{},{}\n", fmt_f64(d.xs[i]), fmt_f64(d.pdf[i]), fmt_f64(d.cdf[i]));
                    }
                }
                Err(crate::Error::UnboundedLimit { reason }) => log::warn!("dataset {id}: {reason}"),
                Err(e) => return Err(e),
            }
            Ok(out)
        })
        .collect::<crate::Result<_>>()?;
    Ok(format!("dataset_id,channel,x,f_lower,f_upper,r,pdf,cdf\n{}", per_dataset.concat()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_coverage(
    pargs: &ProblemArgs,
    margs: &MethodArgs,
    mode: CoverageMode,
    s_grid: &str,
    samples: usize,
    s_ref: Option<f64>,
    cutoff: f64,
    cell_budget: u64,
    seed: u64,
) -> CliResult<String> {
    let grid = parse_s_grid(s_grid)?;
    let qs = margs.quantiles()?;
    let method = margs.build(&margs.method)?;
    let s_ref = s_ref.unwrap_or(0.5 * (grid[0] + grid[grid.len() - 1]));
    let mut out = String::from("quantile,s,estimate,std_err,ess\n");
    for q in qs {
        let problem = pargs.problem(q);
        let rep = match mode {
            CoverageMode::Enumerate => {
                coverage_enumerate(method.as_ref(), &problem, &grid, &EnumerationConfig { tail_eps: cutoff, cell_budget })?
            }
            CoverageMode::Importance => coverage_importance(method.as_ref(), &problem, &grid, samples, s_ref, seed)?,
        };
        for i in 0..rep.s_grid.len() {
            out += &format!(
                "{},{},{},{},{}\n",
                fmt_f64(q),
                fmt_f64(rep.s_grid[i]),
                fmt_f64(rep.estimate[i]),
                fmt_f64(rep.std_err[i]),
                fmt_f64(rep.ess[i])
            );
        }
    }
    Ok(out)
}

fn cmd_credibility(
    input: &InputArgs,
    margs: &MethodArgs,
    task: Task,
    b_prior: &Option<String>,
    e_prior: &Option<String>,
    samples: usize,
    seed: u64,
) -> CliResult<String> {
    let datasets = read_input(input)?;
    let qs = margs.quantiles()?;
    let mut cfg = match task {
        Task::T1a => CredibilityConfig::task1a(),
        Task::T1b => CredibilityConfig::task1b(),
    };
    if let Some(p) = b_prior {
        cfg.b_prior = parse_prior(p)?;
    }
    if let Some(p) = e_prior {
        cfg.e_prior = parse_prior(p)?;
    }
    cfg.validate()?;
    let method: Box<dyn LimitMethod> = if margs.method.eq_ignore_ascii_case("reference") {
        Box::new(FnMethod::new("reference", move |ds: &Dataset, qs: &[f64]| match ds.channels.as_slice() {
            [ch] => qs.iter().map(|&q| reference_upper_limit(ch, &cfg, q)).collect(),
            _ => Err(crate::Error::InvalidConfig("the reference posterior handles single-channel datasets only".into())),
        }))
    } else {
        margs.build(&margs.method)?
    };
    let rows: Vec<String> = datasets
        .par_iter()
        .enumerate()
        .map(|(id, ds)| -> crate::Result<String> {
            let [ch] = ds.channels.as_slice() else {
                return Err(crate::Error::InvalidConfig("credibility needs single-channel datasets".into()));
            };
            let limits = method.limits(ds, &qs)?;
            let mut rng = RngHandle::for_task(seed, TaskKind::Credibility, id as u64, 0);
            let cred = credibility_curve(&limits, ch, &cfg, samples, &mut rng)?;
            let mut out = String::new();
            for ((q, l), c) in qs.iter().zip(&limits).zip(&cred) {
                let l = if l.is_finite() { fmt_f64(*l) } else { String::new() };
                out += &format!("{id},{},{l},{},{}\n", fmt_f64(*q), fmt_f64(c.value), fmt_f64(c.std_err));
            }
            Ok(out)
        })
        .collect::<crate::Result<_>>()?;
    Ok(format!("dataset_id,quantile,limit,credibility,std_err\n{}", rows.concat()))
}

fn cmd_simulate(
    pargs: &ProblemArgs,
    margs: &MethodArgs,
    s_grid: &str,
    reps: usize,
    methods: &[String],
    summary_range: &str,
    per_s: &Option<PathBuf>,
    seed: u64,
) -> CliResult<String> {
    let grid = parse_s_grid(s_grid)?;
    let range = match parse_range(summary_range, "summary range")?.as_slice() {
        [lo, hi] => (*lo, *hi),
        _ => return Err(CliError::Usage(format!("summary range '{summary_range}' must be lo:hi"))),
    };
    let qs = margs.quantiles()?;
    let built: Vec<Box<dyn LimitMethod>> = methods.iter().map(|m| margs.build(m)).collect::<CliResult<_>>()?;
    let refs: Vec<&dyn LimitMethod> = built.iter().map(|b| b.as_ref()).collect();
    let p = pargs.problem(0.5);
    let cfg = StudyConfig { t: p.t, u: p.u, eps: p.eps, b: p.b, s_grid: grid, reps, levels: qs, summary_range: range, seed };
    let table = simulate_study(&cfg, &refs)?;
    if let Some(path) = per_s {
        let mut text = String::from("method,level,s,coverage\n");
        for (mi, m) in table.methods.iter().enumerate() {
            for (li, level) in table.levels.iter().enumerate() {
                for (si, s) in table.s_grid.iter().enumerate() {
                    text += &format!("{m},{},{},{}\n", fmt_f64(*level), fmt_f64(*s), fmt_f64(table.coverage[mi][li][si]));
                }
            }
        }
        write_output(&Some(path.clone()), &text)?;
    }
    let mut out = String::from("method,level,mean,stdev\n");
    for r in &table.summary {
        out += &format!("{},{},{},{}\n", r.method, fmt_f64(r.level), fmt_f64(r.mean), fmt_f64(r.stdev));
    }
    Ok(out)
}

fn execute(cli: &Cli) -> CliResult<(String, i32)> {
    if cli.format != FORMAT_VERSION {
        return Err(CliError::Usage(format!("unsupported format '{}' (expected {FORMAT_VERSION})", cli.format)));
    }
    match &cli.command {
        Command::Limits { input, method } => return cmd_limits(input, method),
        Command::Curves { input, method } => cmd_curves(input, method),
        Command::Coverage { problem, method, mode, s_grid, samples, s_ref, cutoff, cell_budget } => {
            cmd_coverage(problem, method, *mode, s_grid, *samples, *s_ref, *cutoff, *cell_budget, cli.seed)
        }
        Command::Credibility { input, method, task, b_prior, e_prior, samples } => {
            cmd_credibility(input, method, *task, b_prior, e_prior, *samples, cli.seed)
        }
        Command::Simulate { problem, method, s_grid, reps, methods, summary_range, per_s } => {
            cmd_simulate(problem, method, s_grid, *reps, methods, summary_range, per_s, cli.seed)
        }
    }
    .map(|text| (text, 0))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok((text, code)) => match write_output(&cli.output, &text) {
            Ok(()) => {
                if code == 4 {
                    eprintln!("error: {}", CliError::AllUnbounded);
                }
                code
            }
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
