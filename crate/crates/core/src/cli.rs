//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::mollifier::{Mollifier, MollifierParams};
use crate::netspec::NetSpec;
use crate::verify::{self, render_csv, suite_json, write_atomic, Env, SuiteReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const CONFIG_ENV: &str = "COLOMBEAU_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "colombeau", version, about = "Numerical checks for generalized functions and their duals")]
pub struct Cli {
    /// JSON config file; falls back to $COLOMBEAU_CONFIG, then defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override the smallest eps exponent of the grid.
    #[arg(long, global = true)]
    pub eps_kmax: Option<u32>,
    /// Override the negligibility order.
    #[arg(long, global = true)]
    pub qmax: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run checks and write the JSON report.
    Verify(VerifyArgs),
    /// List the registered checks.
    List,
    /// Estimate the valuation of a scalar net, e.g. "eps^2*sin(1/eps)".
    Valuation { spec: String },
    /// Build or inspect a mollifier.
    Mollifier {
        #[command(subcommand)]
        action: MollifierAction,
    },
    /// Work with written reports.
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `all`, or comma-separated ids; a trailing `*` matches a prefix.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Report path; defaults to the config output or `report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Record wall times in the report (breaks byte-identical replays).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct MollifierFlags {
    #[arg(long)]
    pub r_in: Option<f64>,
    #[arg(long)]
    pub r_out: Option<f64>,
    #[arg(long)]
    pub fft_size: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub skew: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum MollifierAction {
    /// Build and certify; print the certificate.
    Build {
        #[command(flatten)]
        flags: MollifierFlags,
        /// Also export the sample table here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        orders: usize,
        #[arg(long, default_value_t = 16)]
        stride: usize,
    },
    /// Print the moment table up to `alpha_max`.
    Check {
        #[command(flatten)]
        flags: MollifierFlags,
        #[arg(long, default_value_t = 6)]
        alpha_max: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportAction {
    /// Plot-ready CSV of every recorded series.
    Render {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Resolve the config from the flag, the environment, or defaults, then
/// apply command-line overrides.
pub fn load_config(cli: &Cli) -> Result<Config, String> {
    let path = cli.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut c = match &path {
        Some(p) => Config::load(p).map_err(|e| e.to_string())?,
        None => Config::default(),
    };
    if let Some(k) = cli.eps_kmax {
        c.eps_grid.k_max = k;
    }
    if let Some(q) = cli.qmax {
        c.asymptotics.q_max = q;
    }
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

fn mollifier_params(base: &MollifierParams, f: &MollifierFlags) -> MollifierParams {
    let mut p = base.clone();
    if let Some(v) = f.r_in {
        p.r_in = v;
    }
    if let Some(v) = f.r_out {
        p.r_out = v;
    }
    if let Some(v) = f.fft_size {
        p.fft_size = v;
    }
    if let Some(v) = f.radius {
        p.radius = v;
    }
    if let Some(v) = f.skew {
        p.skew = v;
    }
    if let Some(v) = f.dim {
        p.dim = v;
    }
    p
}

fn write_out(path: Option<&Path>, data: &str, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => write_atomic(p, data.as_bytes()),
        None => out.write_all(data.as_bytes()),
    }
}

fn cmd_verify(cfg: Config, a: &VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let path = a.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("report.json"));
    let env = match Env::new(cfg) {
        Ok(e) => e.with_timings(a.timings),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let reports = match verify::run_suite(&a.suite, &env, a.jobs) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let suite = SuiteReport::new(&a.suite, reports);
    if let Err(e) = write_atomic(&path, suite_json(&suite).as_bytes()) {
        let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
        return EXIT_CONFIG;
    }
    for r in &suite.reports {
        let n = r.assertions.iter().filter(|a| a.pass).count();
        let tail = r.error.as_deref().map(|e| format!("  error: {e}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{} {:<22} {n}/{} assertions{tail}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check_id,
            r.assertions.len()
        );
    }
    let _ = writeln!(out, "{}/{} checks passed; report written to {}", suite.passed, suite.total, path.display());
    if suite.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn cmd_valuation(cfg: &Config, spec: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let phi = if NetSpec::needs_corpus(spec) {
        match Mollifier::build(cfg.mollifier.clone()) {
            Ok(p) => Some(p),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_CONFIG;
            }
        }
    } else {
        None
    };
    let net = NetSpec::parse(spec, phi.as_ref()).and_then(|n| n.sample(&cfg.eps_grid, &cfg.genfun()));
    let net = match net {
        Ok(n) => n,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    match net.estimate(&cfg.asymptotics) {
        Ok(est) => {
            let slope = est.slope.map_or("none".into(), |s| format!("{s:.4}"));
            let _ = writeln!(out, "{}  slope {slope}", est.class.label());
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&est).expect("estimates serialize"));
            EXIT_PASS
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAIL
        }
    }
}

fn cmd_mollifier(cfg: &Config, action: &MollifierAction, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match action {
        MollifierAction::Build { flags, out: path, orders, stride } => {
            let p = mollifier_params(&cfg.mollifier, flags);
            match Mollifier::build(p) {
                Ok(m) => {
                    let rep = m.report().expect("certified builds carry a report");
                    let _ = writeln!(out, "{}", serde_json::to_string_pretty(rep).expect("reports serialize"));
                    if let Some(path) = path {
                        if let Err(e) = write_atomic(path, m.export_text(*orders, *stride).as_bytes()) {
                            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                            return EXIT_CONFIG;
                        }
                    }
                    EXIT_PASS
                }
                Err(e) => {
                    let _ = writeln!(err, "certification failed: {e}");
                    EXIT_FAIL
                }
            }
        }
        MollifierAction::Check { flags, alpha_max } => {
            let p = mollifier_params(&cfg.mollifier, flags);
            let tol = p.moment_tol;
            let m = match Mollifier::build_uncertified(p) {
                Ok(m) => m,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return EXIT_CONFIG;
                }
            };
            let _ = writeln!(out, "alpha      value             tail bound        ok");
            let _ = writeln!(out, "{:<10} {:<+17.6e} {:<17} mass", "0", m.factor_moment(0).powi(m.dim() as i32), "-");
            let mut ok = true;
            for e in m.check_moments(*alpha_max) {
                let good = e.value.abs() + e.tail_bound <= tol;
                ok &= good;
                let a = e.alpha.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
                let _ = writeln!(out, "{a:<10} {:<+17.6e} {:<17.6e} {}", e.value, e.tail_bound, if good { "yes" } else { "NO" });
            }
            if ok {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
    }
}

fn cmd_report(action: &ReportAction, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match action {
        ReportAction::Render { input, out: path } => {
            let suite = match verify::read_reports(input) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot read {}: {e}", input.display());
                    return EXIT_CONFIG;
                }
            };
            match write_out(path.as_deref(), &render_csv(&suite), out) {
                Ok(()) => EXIT_PASS,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    EXIT_CONFIG
                }
            }
        }
    }
}

/// Run a parsed command line, writing to the given streams.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Command::Report { action } = &cli.command {
        return cmd_report(action, out, err);
    }
    if let Command::List = &cli.command {
        for c in verify::registry() {
            let _ = writeln!(out, "{:<22} {}", c.id, c.claim);
        }
        return EXIT_PASS;
    }
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    match &cli.command {
        Command::Verify(a) => cmd_verify(cfg, a, out, err),
        Command::Valuation { spec } => cmd_valuation(&cfg, spec, out, err),
        Command::Mollifier { action } => cmd_mollifier(&cfg, action, out, err),
        Command::List | Command::Report { .. } => unreachable!("handled above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let cli = Cli::try_parse_from(args).unwrap();
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(cli, &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn valuation_command() {
        let (code, out, _) = run_args(&["colombeau", "valuation", "eps^2"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("Order(2.000)"), "{out}");
        let (code, _, err) = run_args(&["colombeau", "valuation", "eps^"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("error"));
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        let (code, _, err) = run_args(&["colombeau", "--eps-kmax", "7", "valuation", "eps"]);
        assert_eq!(code, EXIT_CONFIG, "{err}");
        let (code, _, _) = run_args(&["colombeau", "--config", "/nonexistent/c.json", "verify"]);
        assert_eq!(code, EXIT_CONFIG);
    }
}
