//! Command-line surface: argument parsing, orchestration and exit codes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use betachart_core::arl::{
    arl_curve, scenario_characteristics, ArlConfig, ArlMode, ParameterMode, Scenario, ShiftTarget, PRESETS,
};
use betachart_core::charts::{bcc_limits, brcc_limits, rcc_limits, rcc_limits_with_multiplier, AlphaPolicy, ChartKind, ChartResult};
use betachart_core::fit::{fit_betareg, fit_ols, inference, lr_constant_dispersion, Dataset, FittedBetaReg, ModelSpec};
use betachart_core::links::LinkKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::ingest::{parse_cols, read_csv, IngestError, IngestOptions, Ingested};
use crate::report::{self, ArlReport, ChartReport, Metadata, ModelSummary, ScenarioInfo};
use crate::runner::Rayon;
use crate::svg;

pub const SEED_ENV: &str = "BETACHART_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "betachart", version, about = "Beta regression control charts for rates and proportions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the beta regression model and test for constant dispersion.
    Fit(FitArgs),
    /// Build control charts and flag out-of-control observations.
    Chart(ChartArgs),
    /// Estimate average run lengths by Monte Carlo simulation.
    Arl(ArlArgs),
    /// List the built-in simulation scenarios.
    ScenarioList(ScenarioListArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkArg {
    Logit,
    Probit,
    Cloglog,
}

impl From<LinkArg> for LinkKind {
    fn from(l: LinkArg) -> Self {
        match l {
            LinkArg::Logit => LinkKind::Logit,
            LinkArg::Probit => LinkKind::Probit,
            LinkArg::Cloglog => LinkKind::Cloglog,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Response column, values in [0, 1] (or in --range).
    #[arg(long, default_value = "y")]
    pub response: String,
    /// Mean-submodel covariates, comma separated; `a*b` forms a product.
    #[arg(long, default_value = "")]
    pub mean: String,
    /// Dispersion-submodel covariates, same syntax.
    #[arg(long, default_value = "")]
    pub disp: String,
    #[arg(long, value_enum, default_value = "logit")]
    pub mean_link: LinkArg,
    #[arg(long, value_enum, default_value = "logit")]
    pub disp_link: LinkArg,
    /// Compress responses that sit on 0 or 1 into the open interval.
    #[arg(long)]
    pub boundary_adjust: bool,
    /// Recorded interval "a,b" of the response, mapped to [0, 1] first.
    #[arg(long, value_parser = parse_pair)]
    pub range: Option<(f64, f64)>,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// JSON report path (default: OUT_DIR/report.json).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ChartArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Charts to build, comma separated: bcc, rcc, brcc, brcc_c.
    #[arg(long, default_value = "bcc,rcc,brcc")]
    pub chart: String,
    /// In-control ARL target; alpha = 1/ARL0.
    #[arg(long, conflicts_with = "alpha")]
    pub arl0: Option<f64>,
    /// False-alarm probability.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// RCC half-width in residual standard deviations (default: the
    /// normal quantile matching alpha).
    #[arg(long)]
    pub rcc_multiplier: Option<f64>,
    /// Chart rows CSV (default: OUT_DIR/chart.csv).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG plot (default: OUT_DIR/chart.svg).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub no_svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Mean,
    Dispersion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pooled,
    RunLength,
}

#[derive(Debug, Clone, Args)]
pub struct ArlArgs {
    /// Built-in scenario 1 to 6.
    #[arg(long, required_unless_present_all = ["beta", "gamma"])]
    pub scenario: Option<u8>,
    /// Custom mean coefficients "b0,b1,b2" (with --gamma, replaces --scenario).
    #[arg(long, value_parser = parse_triple, conflicts_with = "scenario", requires = "gamma", allow_hyphen_values = true)]
    pub beta: Option<[f64; 3]>,
    #[arg(long, value_parser = parse_triple, conflicts_with = "scenario", requires = "beta", allow_hyphen_values = true)]
    pub gamma: Option<[f64; 3]>,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub reps: u64,
    /// Master seed; the BETACHART_SEED environment variable overrides it.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value = "rcc,brcc,brcc_c")]
    pub chart: String,
    #[arg(long, value_enum, default_value = "mean")]
    pub target: TargetArg,
    /// Shift grid: "start:stop:step" or a comma list (default: the full
    /// grid for the target).
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    #[arg(long, default_value_t = 200.0)]
    pub arl0: f64,
    /// Run every chart at alpha = 1/ARL0 instead of calibrating it to the
    /// ARL0 target first.
    #[arg(long)]
    pub no_calibrate: bool,
    #[arg(long)]
    pub calibration_reps: Option<u64>,
    #[arg(long, value_enum, default_value = "pooled")]
    pub mode: ModeArg,
    /// Run-length cap for --mode run-length.
    #[arg(long, default_value_t = 100_000)]
    pub cap: u64,
    /// Build BRCC from the true parameters instead of estimates.
    #[arg(long)]
    pub known: bool,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// ARL table (default: OUT_DIR/arl.csv).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON report (default: OUT_DIR/report.json).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioListArgs {
    /// Sample size used to evaluate the characteristics.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(s)?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected two numbers \"a,b\", got '{s}'")),
    }
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v = parse_floats(s)?;
    v.try_into().map_err(|_| format!("expected three numbers, got '{s}'"))
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
        .collect()
}

/// "start:stop:step" (inclusive) or "a,b,c". Grid points are rounded to ten
/// decimals so that 0.1 prints as 0.1.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("grid '{s}' must be start:stop:step"))?;
        let [start, stop, step] = parts[..] else {
            return Err(format!("grid '{s}' must be start:stop:step"));
        };
        if !(step > 0.0) || stop < start {
            return Err(format!("grid '{s}' needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| ((start + i as f64 * step) * 1e10).round() / 1e10).collect())
    } else {
        let v = parse_floats(s)?;
        if v.is_empty() {
            return Err("empty grid".into());
        }
        Ok(v)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Core(#[from] betachart_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 1 data or usage, 2 convergence, 3 simulation.
    pub fn exit_code(&self) -> i32 {
        use betachart_core::Error as E;
        match self {
            CliError::Core(e) | CliError::Ingest(IngestError::Core(e)) => match e {
                E::Convergence { .. } | E::FitNonConvergence { .. } | E::SingularInformation => EXIT_CONVERGENCE,
                E::Simulation { .. } => EXIT_SIMULATION,
                _ => EXIT_DATA,
            },
            _ => EXIT_DATA,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    std::fs::write(path, contents).map_err(io_err(path))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    report::write_json(path, value).map_err(io_err(path))
}

fn out_path(explicit: &Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| dir.join(name))
}

/// Seed from BETACHART_SEED when set, otherwise the flag.
pub fn effective_seed(flag: u64) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

fn parse_charts(list: &str) -> CliResult<Vec<ChartKind>> {
    let mut kinds = Vec::new();
    for name in parse_cols(list) {
        let k: ChartKind = name.parse()?;
        if !kinds.contains(&k) {
            kinds.push(k);
        }
    }
    if kinds.is_empty() {
        return Err(CliError::Usage("no chart requested".into()));
    }
    Ok(kinds)
}

/// A fitted model together with its data and the constant-dispersion
/// restriction when the dispersion submodel has covariates.
pub struct ModelRun {
    pub data: Ingested,
    pub dataset: Dataset,
    pub spec: ModelSpec,
    pub fit: FittedBetaReg,
    pub reduced: Option<FittedBetaReg>,
    pub summary: ModelSummary,
    pub lr: Option<betachart_core::fit::LrTestResult>,
}

pub fn fit_model(m: &ModelArgs) -> CliResult<ModelRun> {
    let mean = parse_cols(&m.mean);
    let disp = parse_cols(&m.disp);
    let opts = IngestOptions { interval: m.range, boundary_adjust: m.boundary_adjust };
    let data = read_csv(&m.input, &m.response, &mean, &disp, &opts)?;
    let dataset = data.dataset()?;
    let spec = ModelSpec::new(data.mean_names.clone(), data.disp_names.clone()).with_links(m.mean_link.into(), m.disp_link.into());
    let fit = fit_betareg(&spec, &dataset)?;
    let coefficients = inference(&fit, &spec, &dataset)?;
    let summary = ModelSummary::new(&fit, coefficients, data.adjusted);
    let (reduced, lr) = if spec.s() > 1 {
        let reduced_data = Dataset::new(data.y.clone(), data.x.clone(), nalgebra::DMatrix::from_element(data.y.len(), 1, 1.0))?;
        let reduced = fit_betareg(&spec.constant_dispersion(), &reduced_data)?;
        let lr = lr_constant_dispersion(&fit, &reduced)?;
        (Some(reduced), Some(lr))
    } else {
        (None, None)
    };
    Ok(ModelRun { data, dataset, spec, fit, reduced, summary, lr })
}

fn print_summary(run: &ModelRun) {
    println!("n = {}, log-likelihood = {:.4}, iterations = {}", run.summary.n, run.fit.loglik, run.fit.iterations);
    if run.data.adjusted {
        println!("responses on 0 or 1 were compressed into (0, 1)");
    }
    print!("{}", report::coefficient_table(&run.summary.coefficients));
    if let Some(lr) = &run.lr {
        println!("constant dispersion LR = {:.4}, df = {}, p = {:.4}", lr.stat, lr.df, lr.p_value);
    }
}

pub fn run_fit(a: &FitArgs) -> CliResult<ChartReport> {
    let run = fit_model(&a.model)?;
    print_summary(&run);
    let report = ChartReport::new(Some(run.summary.clone()), run.lr, Vec::new(), Metadata::now("fit", None, Some(&a.model.input)));
    let path = out_path(&a.model.json, &a.model.out_dir, "report.json");
    write_json(&path, &report)?;
    eprintln!("wrote {}", path.display());
    Ok(report)
}

pub fn build_charts(run: &ModelRun, kinds: &[ChartKind], alpha: f64, rcc_multiplier: Option<f64>) -> CliResult<Vec<ChartResult>> {
    let y = &run.data.y;
    kinds
        .iter()
        .map(|&k| {
            let c = match k {
                ChartKind::Bcc => bcc_limits(y, alpha)?,
                ChartKind::Rcc => {
                    let ols = fit_ols(&run.dataset)?;
                    match rcc_multiplier {
                        Some(m) => rcc_limits_with_multiplier(&ols, y, alpha, m)?,
                        None => rcc_limits(&ols, y, alpha)?,
                    }
                }
                ChartKind::Brcc => brcc_limits(&run.fit, y, alpha)?,
                ChartKind::BrccC => match &run.reduced {
                    Some(r) => brcc_limits(r, y, alpha)?,
                    // the model already has constant dispersion
                    None => brcc_limits(&run.fit, y, alpha)?,
                },
            };
            Ok(c)
        })
        .collect()
}

pub fn run_chart(a: &ChartArgs) -> CliResult<ChartReport> {
    let kinds = parse_charts(&a.chart)?;
    let policy = match (a.alpha, a.arl0) {
        (Some(p), None) => AlphaPolicy::Alpha(p),
        (None, Some(t)) => AlphaPolicy::Arl0Target(t),
        (None, None) => AlphaPolicy::default(),
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --alpha or --arl0, not both".into())),
    };
    let alpha = policy.alpha()?;
    let run = fit_model(&a.model)?;
    print_summary(&run);
    let charts = build_charts(&run, &kinds, alpha, a.rcc_multiplier)?;
    let report = ChartReport::new(Some(run.summary.clone()), run.lr, charts, Metadata::now("chart", None, Some(&a.model.input)));
    for s in &report.signals {
        let list = if s.indices.is_empty() {
            "none".to_string()
        } else {
            s.indices.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")
        };
        println!("{} signals: {list}", s.chart);
    }
    let dir = &a.model.out_dir;
    let json = out_path(&a.model.json, dir, "report.json");
    write_json(&json, &report)?;
    let csv = out_path(&a.csv, dir, "chart.csv");
    write_file(&csv, &report::chart_csv(&report.charts))?;
    let mut written = vec![json, csv];
    if !a.no_svg {
        let svg_path = out_path(&a.svg, dir, "chart.svg");
        let title = format!("{} (alpha = {alpha})", a.model.input.display());
        write_file(&svg_path, &svg::render(&report.charts, &title))?;
        written.push(svg_path);
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(report)
}

pub fn run_arl(a: &ArlArgs) -> CliResult<ArlReport> {
    let seed = effective_seed(a.seed)?;
    let kinds = parse_charts(&a.chart)?;
    let (scenario, preset) = match (a.scenario, a.beta, a.gamma) {
        (Some(id), _, _) => (Scenario::preset(id, a.n, seed)?, Some(id)),
        (None, Some(b), Some(g)) => (Scenario::new(b, g, a.n, seed)?, None),
        _ => return Err(CliError::Usage("give --scenario or both --beta and --gamma".into())),
    };
    let target = match a.target {
        TargetArg::Mean => ShiftTarget::Mean,
        TargetArg::Dispersion => ShiftTarget::Dispersion,
    };
    let grid_spec = a.delta.clone().unwrap_or_else(|| match target {
        ShiftTarget::Mean => "-0.15:0.15:0.01".into(),
        ShiftTarget::Dispersion => "0:0.15:0.01".into(),
    });
    let grid = parse_grid(&grid_spec).map_err(CliError::Usage)?;
    let cfg = ArlConfig {
        arl0_target: a.arl0,
        reps: a.reps,
        calibrate: !a.no_calibrate,
        calibration_reps: a.calibration_reps,
        mode: match a.mode {
            ModeArg::Pooled => ArlMode::Pooled,
            ModeArg::RunLength => ArlMode::RunLength { cap: a.cap },
        },
        parameters: if a.known { ParameterMode::Known } else { ParameterMode::Estimated },
    };
    let runner = Rayon::new(a.threads).map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let estimates = arl_curve(&scenario, &kinds, target, &grid, &cfg, &runner)?;
    eprintln!("simulated {} estimates in {:.1} s", estimates.len(), started.elapsed().as_secs_f64());
    let (approx_mean, approx_sigma) = scenario_characteristics(&scenario);
    let report = ArlReport {
        scenario: ScenarioInfo { preset, beta: scenario.beta, gamma: scenario.gamma, n: scenario.n, approx_mean, approx_sigma },
        config: cfg,
        estimates,
        metadata: Metadata::now("arl", Some(seed), None),
    };
    println!("{:<7} {:>7} {:>10} {:>9} {:>6}", "chart", "delta", "arl", "mc_se", "reps");
    for e in &report.estimates {
        println!(
            "{:<7} {:>7.2} {:>10.2} {:>9.2} {:>6}{}",
            e.chart_kind.name(),
            e.delta,
            e.arl,
            e.mc_std_error,
            e.replications,
            if e.capped { "  (lower bound)" } else { "" }
        );
    }
    let csv = out_path(&a.csv, &a.out_dir, "arl.csv");
    write_file(&csv, &report::arl_csv(&report.estimates))?;
    let json = out_path(&a.json, &a.out_dir, "report.json");
    write_json(&json, &report)?;
    eprintln!("wrote {}\nwrote {}", csv.display(), json.display());
    Ok(report)
}

pub fn run_scenario_list(a: &ScenarioListArgs) -> CliResult<()> {
    println!(
        "{:<3} {:>24} {:>24} {:>7} {:>7} {:>9} {:>9}",
        "id", "beta", "gamma", "mu~", "sigma~", "mean(n)", "sigma(n)"
    );
    for p in PRESETS {
        let s = Scenario::preset(p.id, a.n, a.seed)?;
        let (m, sg) = scenario_characteristics(&s);
        let fmt3 = |v: [f64; 3]| format!("({:.2}, {:.2}, {:.2})", v[0], v[1], v[2]);
        println!(
            "{:<3} {:>24} {:>24} {:>7.2} {:>7.3} {:>9.3} {:>9.3}",
            p.id,
            fmt3(p.beta),
            fmt3(p.gamma),
            p.approx_mean,
            p.approx_sigma,
            m,
            sg
        );
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Fit(a) => run_fit(a).map(drop),
        Command::Chart(a) => run_chart(a).map(drop),
        Command::Arl(a) => run_arl(a).map(drop),
        Command::ScenarioList(a) => run_scenario_list(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (program name first) and runs. Usage errors exit 1; help
/// and version exit 0.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_DATA
            } else {
                EXIT_OK
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("-0.15:0.15:0.01").unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!((g[0], g[15], g[30]), (-0.15, 0.0, 0.15));
        assert_eq!(g[25], 0.1);
        assert_eq!(parse_grid("0,0.05, 0.1").unwrap(), vec![0.0, 0.05, 0.1]);
        assert_eq!(parse_grid("0.1:0.1:0.01").unwrap(), vec![0.1]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn exit_codes() {
        use betachart_core::Error as E;
        assert_eq!(CliError::Core(E::Simulation { failed: 9, attempted: 100 }).exit_code(), 3);
        assert_eq!(CliError::Core(E::SingularInformation).exit_code(), 2);
        assert_eq!(
            CliError::Core(E::FitNonConvergence { iterations: 500, max_score: 1.0, last_iterate: vec![] }).exit_code(),
            2
        );
        assert_eq!(CliError::Core(E::Data("x".into())).exit_code(), 1);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
    }

    #[test]
    fn chart_lists() {
        assert_eq!(parse_charts("brcc, BRCC_C,brcc").unwrap(), vec![ChartKind::Brcc, ChartKind::BrccC]);
        assert!(parse_charts("").is_err());
        assert!(parse_charts("ewma").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
