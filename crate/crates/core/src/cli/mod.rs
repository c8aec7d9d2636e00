//! Command-line front end. Every subcommand reads a TOML run configuration,
//! calls the library and writes CSV (and optionally SVG) files.

mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{log_space, BetaSweep, RunConfig};
pub use output::{num, svg_chart, ConfigColumns, SWEEP_HEADER};

use crate::asymptotics::{
    anchored_preamble_constant, check_adasense_sparsity, check_bmac_lower_bound, check_single_phase_slope,
    energies_non_increasing, ratios_non_decreasing, sparse_energy_spread, PreambleRule, Tolerances,
};
use crate::base::{dbm_to_watts, ScenarioParams};
use crate::montecarlo::{estimate, Estimate, McSettings};
use crate::solvers::{sweep, SweepRow};
use config::SchemeBlock;
use output::{dbm_field, opt_num, sweep_record, write_csv, write_text};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Lib(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Lib(crate::Error::Numeric(_)) => EXIT_NUMERIC,
            CliError::Lib(_) => EXIT_INVARIANT,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "adasense", version, about = "Energy-aware channel sensing: evaluate, optimize, simulate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding [output].directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: csv, svg.
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<String>>,
    /// Monte-Carlo seed, overriding [mc].seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact performance of one configured detector.
    Eval(SchemeFlags),
    /// Minimum-energy configurations over the scenario and target grid.
    Solve,
    /// Like solve, with one CSV (and SVG) per (n, P, alpha) panel.
    Sweep,
    /// Monte-Carlo estimates next to the exact values.
    Simulate(SchemeFlags),
    /// Scaling-law checks.
    Asymptote,
}

/// Detector settings; each flag overrides the [scheme] block.
#[derive(Debug, Clone, Default, Args)]
pub struct SchemeFlags {
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub receiver_power: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub l1: Option<usize>,
    #[arg(long)]
    pub l2: Option<usize>,
    #[arg(long)]
    pub p_r1: Option<f64>,
    #[arg(long)]
    pub p_r2: Option<f64>,
    #[arg(long)]
    pub eta1: Option<f64>,
    #[arg(long)]
    pub eta2: Option<f64>,
}

impl SchemeFlags {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        let given = self.scheme.is_some()
            || [self.receiver_power, self.threshold, self.p_r1, self.p_r2, self.eta1, self.eta2].iter().any(Option::is_some)
            || self.l1.is_some()
            || self.l2.is_some();
        if !given {
            return Ok(());
        }
        let block = match (cfg.scheme.take(), &self.scheme) {
            (Some(b), _) => b,
            (None, Some(kind)) => SchemeBlock {
                kind: kind.clone(),
                receiver_power_watts: None,
                threshold: None,
                l1: None,
                l2: None,
                p_r1: None,
                p_r2: None,
                eta1: None,
                eta2: None,
            },
            (None, None) => return Err(CliError::Config("--scheme is required without a [scheme] block".into())),
        };
        cfg.scheme = Some(SchemeBlock {
            kind: self.scheme.clone().unwrap_or(block.kind),
            receiver_power_watts: self.receiver_power.or(block.receiver_power_watts),
            threshold: self.threshold.or(block.threshold),
            l1: self.l1.or(block.l1),
            l2: self.l2.or(block.l2),
            p_r1: self.p_r1.or(block.p_r1),
            p_r2: self.p_r2.or(block.p_r2),
            eta1: self.eta1.or(block.eta1),
            eta2: self.eta2.or(block.eta2),
        });
        Ok(())
    }
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(CliError::Config(format!("cannot start {n} threads: {e}"))),
        },
        None => run(&cli),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("adasense: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    let ctx = Context::new(cli, &cfg)?;
    match &cli.command {
        Command::Eval(flags) => {
            flags.apply(&mut cfg)?;
            cmd_eval(&cfg, &ctx, cli.out.is_some() || cfg.output.is_some())
        }
        Command::Solve => cmd_solve(&cfg, &ctx),
        Command::Sweep => cmd_sweep(&cfg, &ctx),
        Command::Simulate(flags) => {
            flags.apply(&mut cfg)?;
            cmd_simulate(&cfg, &ctx, cli.seed)
        }
        Command::Asymptote => cmd_asymptote(&cfg, &ctx),
    }
}

struct Context {
    out_dir: PathBuf,
    csv: bool,
    svg: bool,
    quiet: bool,
    symbol_duration: f64,
}

impl Context {
    fn new(cli: &Cli, cfg: &RunConfig) -> Result<Self, CliError> {
        let block = cfg.output.clone().unwrap_or_default();
        let formats = cli.format.clone().unwrap_or(block.formats);
        for f in &formats {
            if f != "csv" && f != "svg" {
                return Err(CliError::Config(format!("unknown output format '{f}' (expected csv or svg)")));
            }
        }
        if !(block.symbol_duration_seconds > 0.0) {
            return Err(CliError::Config("[output] symbol_duration_seconds must be positive".into()));
        }
        Ok(Self {
            out_dir: cli.out.clone().unwrap_or_else(|| cfg.resolve(&block.directory)),
            csv: formats.iter().any(|f| f == "csv"),
            svg: formats.iter().any(|f| f == "svg"),
            quiet: cli.quiet,
            symbol_duration: block.symbol_duration_seconds,
        })
    }

    fn file(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Io(format!("{}: {e}", self.out_dir.display())))?;
        Ok(self.out_dir.join(name))
    }

    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

pub const EVAL_HEADER: [&str; 16] = [
    "n",
    "P_dbm",
    "p1",
    "scheme",
    "l1",
    "l2",
    "p_r1_w",
    "p_r2_w",
    "eta1",
    "eta2",
    "p_fa",
    "p_miss",
    "energy_wsamples",
    "p_continue",
    "ln_p_fa",
    "ln_p_miss",
];

fn cmd_eval(cfg: &RunConfig, ctx: &Context, write: bool) -> Result<(), CliError> {
    let scenario = cfg.single_scenario()?;
    let profile = cfg.profile()?;
    let scheme_cfg = cfg.scheme_config(&scenario)?;
    let report = scheme_cfg.evaluate(&scenario, &profile)?;
    let mut lines = vec![
        ("scheme", scheme_cfg.scheme().name().to_string()),
        ("p_fa", num(report.p_fa)),
        ("p_miss", num(report.p_miss)),
        ("ln_p_fa", num(report.ln_p_fa)),
        ("ln_p_miss", num(report.ln_p_miss)),
        ("energy_wsamples", num(report.energy)),
        ("energy_joules", num(report.energy * ctx.symbol_duration)),
    ];
    if let Some(pc) = report.p_continue {
        lines.push(("p_continue", num(pc)));
    }
    for (k, v) in &lines {
        ctx.say(format!("{k:<16} {v}"));
    }
    if write && ctx.csv {
        let mut rec = vec![
            scenario.preamble_len().to_string(),
            dbm_field(scenario.received_power_watts())?,
            num(scenario.prior_p1()),
            scheme_cfg.scheme().name().to_string(),
        ];
        rec.extend(ConfigColumns::of(scheme_cfg.scheme(), &scheme_cfg).record());
        rec.extend([
            num(report.p_fa),
            num(report.p_miss),
            num(report.energy),
            opt_num(report.p_continue),
            num(report.ln_p_fa),
            num(report.ln_p_miss),
        ]);
        write_csv(&ctx.file("eval.csv")?, &EVAL_HEADER, &[rec])?;
    }
    Ok(())
}

fn solve_grid(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let scenarios = cfg.scenarios()?;
    let profile = cfg.profile()?;
    let targets = cfg.targets()?;
    let schemes = cfg.schemes()?;
    Ok(sweep(&scenarios, &profile, &targets, &schemes)?)
}

fn summary_line(row: &SweepRow) -> String {
    let r = &row.result;
    let mut s = format!(
        "n={} P={:.1}dBm p1={:e} alpha={:e} beta={:e} {:<12} feasible={} energy={}",
        row.scenario.preamble_len(),
        crate::base::watts_to_dbm(row.scenario.received_power_watts()).unwrap_or(f64::NAN),
        row.scenario.prior_p1(),
        row.target.alpha(),
        row.target.beta(),
        row.scheme.name(),
        r.feasible,
        num(r.report.energy)
    );
    if let Some(sv) = row.savings_vs_bmac_pct {
        s.push_str(&format!(" savings={sv:.2}%"));
    }
    s
}

fn cmd_solve(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let rows = solve_grid(cfg)?;
    for row in &rows {
        ctx.say(summary_line(row));
    }
    if ctx.csv {
        let records = rows.iter().map(sweep_record).collect::<Result<Vec<_>, _>>()?;
        write_csv(&ctx.file("solve.csv")?, &SWEEP_HEADER, &records)?;
    }
    Ok(())
}

/// File stem of the panel holding `row`.
pub fn panel_stem(row: &SweepRow) -> String {
    let dbm = crate::base::watts_to_dbm(row.scenario.received_power_watts()).unwrap_or(f64::NAN);
    format!("panel_n{}_P{}dBm_alpha{:e}", row.scenario.preamble_len(), (dbm * 1e4).round() / 1e4, row.target.alpha())
}

fn cmd_sweep(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let rows = solve_grid(cfg)?;
    let mut panels: Vec<(String, Vec<&SweepRow>)> = Vec::new();
    for row in &rows {
        let stem = panel_stem(row);
        match panels.iter_mut().find(|(s, _)| *s == stem) {
            Some((_, v)) => v.push(row),
            None => panels.push((stem, vec![row])),
        }
    }
    for (stem, members) in &panels {
        if ctx.csv {
            let records = members.iter().map(|r| sweep_record(r)).collect::<Result<Vec<_>, _>>()?;
            write_csv(&ctx.file(&format!("{stem}.csv"))?, &SWEEP_HEADER, &records)?;
        }
        if ctx.svg {
            write_text(&ctx.file(&format!("{stem}.svg"))?, &svg_chart(stem, members))?;
        }
        let savings: Vec<f64> = members.iter().filter_map(|r| r.savings_vs_bmac_pct).collect();
        let (lo, hi) = savings.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if savings.is_empty() {
            ctx.say(format!("{stem}: {} rows", members.len()));
        } else {
            ctx.say(format!("{stem}: {} rows, savings vs bmac {lo:.2}% to {hi:.2}%", members.len()));
        }
    }
    Ok(())
}

pub const SIMULATE_HEADER: [&str; 8] =
    ["scheme", "quantity", "estimate", "std_error", "closed_form", "within_3se", "trials", "seed"];

fn cmd_simulate(cfg: &RunConfig, ctx: &Context, seed: Option<u64>) -> Result<(), CliError> {
    let scenario = cfg.single_scenario()?;
    let profile = cfg.profile()?;
    let scheme_cfg = cfg.scheme_config(&scenario)?;
    let mc = cfg.mc()?;
    let settings = McSettings::new(mc.trials, seed.unwrap_or(mc.seed))?.with_antithetic(mc.antithetic);
    let exact = scheme_cfg.evaluate(&scenario, &profile)?;
    if (exact.p_fa < 1e-4 || exact.p_miss < 1e-4) && !ctx.quiet {
        eprintln!("adasense: warning: error probabilities below 1e-4 are poorly resolved by {} trials", mc.trials);
    }
    let est = estimate(&scheme_cfg, &scenario, &profile, &settings)?;
    let mut quantities: Vec<(&str, Estimate, f64)> =
        vec![("p_fa", est.p_fa, exact.p_fa), ("p_miss", est.p_miss, exact.p_miss), ("energy_wsamples", est.energy, exact.energy)];
    if let (Some(e), Some(x)) = (est.p_continue, exact.p_continue) {
        quantities.push(("p_continue", e, x));
    }
    let records: Vec<Vec<String>> = quantities
        .iter()
        .map(|(q, e, x)| {
            vec![
                scheme_cfg.scheme().name().to_string(),
                q.to_string(),
                num(e.value),
                num(e.std_error),
                num(*x),
                e.covers(*x, 3.0).to_string(),
                settings.trials_per_hypothesis.to_string(),
                settings.seed.to_string(),
            ]
        })
        .collect();
    for r in &records {
        ctx.say(format!("{:<16} {} +- {}  exact {}  within 3 SE: {}", r[1], r[2], r[3], r[4], r[5]));
    }
    if est.degenerate {
        ctx.say("note: an error rate was estimated as exactly 0 or 1; its standard error is 0");
    }
    if ctx.csv {
        write_csv(&ctx.file("simulate.csv")?, &SIMULATE_HEADER, &records)?;
    }
    Ok(())
}

fn cmd_asymptote(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let profile = cfg.profile()?;
    let a = cfg.asymptote.clone().unwrap_or_default();
    let tol = match &a.tolerances {
        Some(p) => Tolerances::from_file(&cfg.resolve(p))?,
        None => Tolerances::default(),
    };
    let power = dbm_to_watts(a.p_dbm)?;
    let alphas = log_space(a.alpha_start, a.alpha_stop, a.alpha_points);

    let fit = check_single_phase_slope(&profile, power, a.receiver_power_watts, a.beta, &alphas)?;
    let within = fit.within(&tol);
    ctx.say(format!(
        "single-phase slope ratio {:.4} (band {}..{}), r^2 {:.5}, within tolerances: {within}",
        fit.slope_ratio, tol.slope_ratio_min, tol.slope_ratio_max, fit.r_squared
    ));
    let bmac_scenario = ScenarioParams::new(power, a.bmac_p1, a.bmac_n)?;
    let bounds = check_bmac_lower_bound(&profile, &bmac_scenario, a.beta, &alphas)?;
    ctx.say(format!("bmac exact/bound ratios non-decreasing: {}", ratios_non_decreasing(&bounds)));
    let rule = match (a.sparsity_n, a.sparsity_c) {
        (Some(_), Some(_)) => return Err(CliError::Config("[asymptote] give sparsity_n or sparsity_c, not both".into())),
        (Some(n), None) => PreambleRule::Fixed(n),
        (None, Some(c)) => PreambleRule::Scaled(c),
        (None, None) => PreambleRule::Scaled(anchored_preamble_constant(&profile, power, a.sparsity_beta, a.sparsity_alpha)?),
    };
    let sparsity = check_adasense_sparsity(&profile, power, a.sparsity_beta, a.sparsity_alpha, &a.sparsity_p1, rule)?;
    ctx.say(format!(
        "adasense energy non-increasing in p1: {}, spread for p1 <= 1e-4: {:.3e}",
        energies_non_increasing(&sparsity, 0.0),
        sparse_energy_spread(&sparsity, 1e-4)
    ));

    if !ctx.csv {
        return Ok(());
    }
    let slope_rows: Vec<Vec<String>> = fit
        .alphas
        .iter()
        .zip(&fit.preamble_lens)
        .zip(&fit.energies)
        .map(|((al, n), e)| vec![num(*al), num(-al.ln()), n.to_string(), num(*e)])
        .collect();
    write_csv(&ctx.file("asymptote_slope.csv")?, &["alpha", "ln_inv_alpha", "n", "energy_wsamples"], &slope_rows)?;
    write_csv(
        &ctx.file("asymptote_slope_fit.csv")?,
        &[
            "fitted_slope",
            "fitted_intercept",
            "r_squared",
            "reference_slope",
            "slope_ratio",
            "band_min",
            "band_max",
            "min_r_squared",
            "within_tolerances",
            "excluded_alphas",
        ],
        &[vec![
            num(fit.fitted_slope),
            num(fit.fitted_intercept),
            num(fit.r_squared),
            num(fit.reference_slope),
            num(fit.slope_ratio),
            num(tol.slope_ratio_min),
            num(tol.slope_ratio_max),
            num(tol.slope_min_r_squared),
            within.to_string(),
            fit.excluded.len().to_string(),
        ]],
    )?;
    let bound_rows: Vec<Vec<String>> = bounds
        .iter()
        .map(|b| vec![num(b.alpha), num(b.exact_energy), num(b.bound), num(b.ratio), b.feasible.to_string()])
        .collect();
    write_csv(&ctx.file("asymptote_bmac.csv")?, &["alpha", "exact_energy", "bound", "ratio", "feasible"], &bound_rows)?;
    let sparsity_rows: Vec<Vec<String>> = sparsity
        .iter()
        .map(|s| {
            vec![
                num(s.p1),
                s.preamble_len.to_string(),
                num(s.optimal_energy),
                opt_num(s.p_continue),
                s.feasible.to_string(),
                num(s.single_phase_energy),
                num(s.bmac_energy),
                num(s.order_ratio),
            ]
        })
        .collect();
    write_csv(
        &ctx.file("asymptote_sparsity.csv")?,
        &["p1", "n", "energy_wsamples", "p_continue", "feasible", "single_phase_energy", "bmac_energy", "order_ratio"],
        &sparsity_rows,
    )
}
