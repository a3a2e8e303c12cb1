//! The `annuitize` command-line driver.
//!
//! ```text
//! annuitize <solve|simulate|sweep|verify> --config <path> [--override k=v]... [--out <path>] [--seed N]
//! ```
//!
//! Every command writes CSV (with `#`-prefixed metadata lines) to `--out`
//! or standard output, and a short human summary to standard error.
//! Exit codes: 0 success, 1 verification failure, 2 configuration or
//! validation error, 3 runtime or solver error.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::constant_solver::solve_constant;
use crate::core_model::{HealthState, ModelParams};
use crate::error::Error;
use crate::monte_carlo::{life_expectancy, simulate_policy, Policy, SimStats};
use crate::sensitivity::{find_crossing, run_sweep, Crossing, RowStatus, SweepSpec};
use crate::shock_solver::solve_shock;
use crate::verify_oracles::{log_grid, run_suite, SuiteOptions};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "annuitize", version, about = "Optimal annuitization under a mortality shock")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the regime, thresholds and coefficients.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        constant: ConstantArgs,
    },
    /// Simulate the threshold policy and report annuitization statistics.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        constant: ConstantArgs,
    },
    /// Sweep the shock size or intensity and locate crossings.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Run every numerical oracle against the closed forms.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path override, e.g. `market.sigma=0.2` (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write CSV output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides `sim.seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ConstantArgs {
    /// Use a constant mortality force (no shock).
    #[arg(long)]
    constant: bool,
    /// The constant force; defaults to `mortality.mu_l`.
    #[arg(long, requires = "constant")]
    mu: Option<f64>,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::AssumptionViolation(_) | Error::NearDegenerateShock { .. } => exit::CONFIG,
            _ => exit::RUNTIME,
        };
        Self { code, message: e.to_string() }
    }
}

fn runtime(message: impl Into<String>) -> Failure {
    Failure { code: exit::RUNTIME, message: message.into() }
}

/// Formats an optional number; absent values are empty CSV fields.
fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Collected output of one command.
struct Output {
    csv: Vec<u8>,
    summary: String,
    code: i32,
}

impl Output {
    fn new(command: &str, cfg: &RunConfig, seed: Option<u64>) -> Self {
        let mut csv = Vec::new();
        writeln!(csv, "# annuitize {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(csv, "# command {command}").unwrap();
        if let Some(s) = seed {
            writeln!(csv, "# seed {s}").unwrap();
        }
        writeln!(csv, "# config {}", cfg.to_json()).unwrap();
        Self { csv, summary: String::new(), code: exit::SUCCESS }
    }

    fn row<I: IntoIterator<Item = S>, S: Display>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().map(|f| csv_field(&f.to_string())).collect();
        writeln!(self.csv, "{}", line.join(",")).unwrap();
    }

    fn comment(&mut self, text: impl Display) {
        writeln!(self.csv, "# {text}").unwrap();
    }

    fn say(&mut self, text: impl Display) {
        self.summary.push_str(&text.to_string());
        self.summary.push('\n');
    }
}

/// Quotes a CSV field when needed.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses arguments, runs the command and writes its output; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    let (common, result) = match &cli.command {
        Command::Solve { common, constant } => (common, load(common).and_then(|c| cmd_solve(&c, common, constant))),
        Command::Simulate { common, constant } => (common, load(common).and_then(|c| cmd_simulate(&c, constant))),
        Command::Sweep { common } => (common, load(common).and_then(|c| cmd_sweep(&c))),
        Command::Verify { common } => (common, load(common).and_then(|c| cmd_verify(&c, common))),
    };
    match result {
        Ok(out) => {
            let written = match &common.out {
                Some(path) => std::fs::write(path, &out.csv).map_err(|e| format!("--out {}: {e}", path.display())),
                None => stdout.write_all(&out.csv).map_err(|e| e.to_string()),
            };
            let _ = stderr.write_all(out.summary.as_bytes());
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return exit::RUNTIME;
            }
            out.code
        }
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn load(common: &Common) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Failure { code: exit::CONFIG, message: format!("{}: {e}", common.config.display()) })?;
    let mut cfg = RunConfig::parse(&text, &common.overrides)?;
    if let (Some(seed), Some(sim)) = (common.seed, cfg.sim.as_mut()) {
        sim.seed = seed;
    }
    cfg.params().validate()?;
    Ok(cfg)
}

fn cmd_solve(cfg: &RunConfig, common: &Common, constant: &ConstantArgs) -> Result<Output, Failure> {
    let p = cfg.params();
    let mut out = Output::new("solve", cfg, common.seed);
    out.row(["quantity", "value"]);
    if constant.constant {
        let mu = constant.mu.unwrap_or(p.mortality.mu_l);
        let sol = solve_constant(&p, mu)?;
        let c = &sol.coeffs;
        out.row(["regime".to_string(), sol.regime.name().to_string()]);
        out.row(["mu".to_string(), mu.to_string()]);
        out.row(["threshold".to_string(), opt(sol.threshold())]);
        for (k, v) in [
            ("delta", c.delta),
            ("beta", c.beta),
            ("gamma_plus", c.gamma_plus),
            ("gamma_minus", c.gamma_minus),
            ("r", c.r),
        ] {
            out.row([k.to_string(), v.to_string()]);
        }
        out.say(format!("constant force {mu}: {} threshold {}", sol.regime.name(), opt(sol.threshold())));
        if let Some(g) = cfg.grid {
            out.comment("value function");
            out.row(["x", "V", "payoff", "stop"]);
            for x in grid_points(&g)? {
                out.row([
                    x.to_string(),
                    sol.eval(x).to_string(),
                    sol.payoff(x).to_string(),
                    sol.value.is_stopping(x).to_string(),
                ]);
            }
        }
        return Ok(out);
    }
    let sol = solve_shock(&p)?;
    let c = &sol.coeffs;
    let d = &sol.details;
    out.row(["regime".to_string(), sol.regime.tag().to_string()]);
    let rows: [(&str, Option<f64>); 18] = [
        ("x_l", d.x_l),
        ("x_h", d.x_h),
        ("delta_l", Some(c.low.delta)),
        ("delta_h", Some(c.high.delta)),
        ("beta_l", Some(c.low.beta)),
        ("beta_h", Some(c.high.beta)),
        ("M_l", Some(c.low.m)),
        ("M_h", Some(c.high.m)),
        ("gamma_plus_l", Some(c.low.gamma_plus)),
        ("gamma_minus_l", Some(c.low.gamma_minus)),
        ("gamma_plus_h", Some(c.high.gamma_plus)),
        ("gamma_minus_h", Some(c.high.gamma_minus)),
        ("r_l", Some(c.low.r)),
        ("r_h", Some(c.high.r)),
        ("zeta_l", d.zeta),
        ("zeta_hat_l", d.zeta_hat),
        ("varpi_l", d.varpi),
        ("pi_l", d.pi),
    ];
    for (k, v) in rows {
        out.row([k.to_string(), opt(v)]);
    }
    out.say(format!("regime {}: x_l = {}, x_h = {}", sol.regime, opt(d.x_l), opt(d.x_h)));
    if let Some(g) = cfg.grid {
        out.comment("value function");
        out.row(["x", "V_l", "V_h", "payoff_l", "payoff_h", "stop_l", "stop_h"]);
        for x in grid_points(&g)? {
            out.row([
                x.to_string(),
                sol.eval(x, HealthState::Low).to_string(),
                sol.eval(x, HealthState::High).to_string(),
                sol.pre_shock.payoff(x).to_string(),
                sol.post_shock.payoff(x).to_string(),
                sol.stopping_region_l.contains(x).to_string(),
                sol.stopping_region_h.contains(x).to_string(),
            ]);
        }
    }
    Ok(out)
}

fn grid_points(g: &crate::config::GridBlock) -> Result<Vec<f64>, Failure> {
    if !(g.x_lo > 0.0 && g.x_hi > g.x_lo && g.n >= 2) {
        return Err(Failure { code: exit::CONFIG, message: "grid: need 0 < x_lo < x_hi and n >= 2".into() });
    }
    Ok(log_grid(g.x_lo, g.x_hi, g.n))
}

fn cmd_simulate(cfg: &RunConfig, constant: &ConstantArgs) -> Result<Output, Failure> {
    let p = cfg.params();
    let sim = cfg.sim.ok_or_else(|| Failure { code: exit::CONFIG, message: "sim: required".into() })?;
    sim.validate()?;
    let (policy, mortality) = if constant.constant {
        let mu = constant.mu.unwrap_or(p.mortality.mu_l);
        let sol = solve_constant(&p, mu)?;
        let mut m = p.mortality;
        m.mu_l = mu;
        m.delta = 0.0;
        (Policy::constant(&sol), m)
    } else {
        (Policy::shock(&solve_shock(&p)?), p.mortality)
    };
    let stats: SimStats = simulate_policy(&p.market, &p.mortality, &policy, &sim)?;
    let (le, le_se) = life_expectancy(&mortality, sim.n_paths, sim.seed)?;
    let mut out = Output::new("simulate", cfg, Some(sim.seed));
    out.row(["n_paths", "dt", "frac_total", "frac_pre", "frac_post", "mean_time", "se_frac", "se_time", "seed"]);
    out.row([
        stats.n_paths.to_string(),
        sim.dt.to_string(),
        stats.frac_annuitized_total.to_string(),
        stats.frac_pre_shock.to_string(),
        stats.frac_post_shock.to_string(),
        stats.mean_time_to_annuitize.to_string(),
        stats.se_frac_total.to_string(),
        stats.se_time.to_string(),
        sim.seed.to_string(),
    ]);
    out.comment(format!("life_expectancy = {le}"));
    out.comment(format!("life_expectancy_se = {le_se}"));
    out.say(format!(
        "{} paths: {:.2}% annuitize ({:.2}% before the shock, {:.2}% after), mean time {:.3} yr; life expectancy {:.3} +- {:.3} yr",
        stats.n_paths,
        100.0 * stats.frac_annuitized_total,
        100.0 * stats.frac_pre_shock,
        100.0 * stats.frac_post_shock,
        stats.mean_time_to_annuitize,
        le,
        le_se
    ));
    Ok(out)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<Output, Failure> {
    let block = cfg.sweep.ok_or_else(|| Failure { code: exit::CONFIG, message: "sweep: required".into() })?;
    let spec = SweepSpec {
        parameter: block.parameter,
        lo: block.lo,
        hi: block.hi,
        n_points: block.n_points,
        base: cfg.params(),
    };
    let rows = run_sweep(&spec)?;
    if rows.iter().all(|r| r.status != RowStatus::Ok) {
        return Err(runtime("sweep: every row failed or was skipped"));
    }
    let mut out = Output::new("sweep", cfg, None);
    out.row(["param", "value", "delta_l", "delta_h", "M_l", "M_h", "x_l", "x_h", "regime", "status"]);
    for r in &rows {
        out.row([
            r.parameter.name().to_string(),
            r.value.to_string(),
            opt(r.delta_l),
            opt(r.delta_h),
            opt(r.m_l),
            opt(r.m_h),
            opt(r.x_l),
            opt(r.x_h),
            r.regime.clone().unwrap_or_default(),
            r.status.label(),
        ]);
    }
    let ok = rows.iter().filter(|r| r.status == RowStatus::Ok).count();
    out.say(format!("{} rows ({ok} solved)", rows.len()));
    for crossing in [Crossing::M, Crossing::Threshold] {
        match find_crossing(&spec, |r| crossing.eval(r)) {
            Ok(v) => {
                out.comment(format!("crossing {} = {v}", crossing.name()));
                out.say(format!("crossing {} = {v}", crossing.name()));
            }
            Err(Error::NoSignChange(why)) => {
                out.comment(format!("crossing {} = none", crossing.name()));
                out.say(format!("crossing {}: none ({why})", crossing.name()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

fn cmd_verify(cfg: &RunConfig, common: &Common) -> Result<Output, Failure> {
    let p: ModelParams = cfg.params();
    let v = cfg.verify.clone().unwrap_or_default();
    let defaults = SuiteOptions::default();
    let seed = common.seed.or(cfg.sim.map(|s| s.seed)).unwrap_or(defaults.seed);
    let opts = SuiteOptions {
        mc_points: v.mc_points.unwrap_or(cfg.sim.map(|s| vec![s.x0]).unwrap_or(defaults.mc_points)),
        mc_paths: v.mc_paths.unwrap_or(defaults.mc_paths),
        seed,
        forced_threshold: v.x_l,
        grid_points: defaults.grid_points,
    };
    let checks = run_suite(&p, &opts)?;
    let mut out = Output::new("verify", cfg, Some(seed));
    out.row(["check", "passed", "magnitude", "tolerance", "detail"]);
    for c in &checks {
        out.row([
            c.name.clone(),
            c.passed.to_string(),
            c.magnitude.to_string(),
            c.tolerance.to_string(),
            c.detail.clone(),
        ]);
        out.say(format!(
            "{} {} ({:.3e} vs {:.1e}) {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.magnitude,
            c.tolerance,
            c.detail
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.say(format!("{} checks, {failed} failed", checks.len()));
    if failed > 0 {
        out.code = exit::VERIFY_FAILED;
    }
    Ok(out)
}
