//! Command-line front end: `h1cutoff <suite|all> [--config FILE] [overrides]`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{parse_list, parse_number, Config, Suite};
use super::report::Relation;
use super::suites::{run_suite, SuiteOutput};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "h1cutoff", version, about = "Verification suites for the H1 partition-of-unity cut-off")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dense certification of the partition pair.
    Certify,
    /// Properties of the cut-off operator.
    Lemma,
    /// Scaling of the sampled H2 constants in ε.
    H2,
    /// Pointwise cut-off versus F^ε on sawtooth pairs.
    Sawtooth,
    /// Derivative candidate: L(0), Gateaux remainders, continuity.
    Derivative,
    /// Every suite listed in the config.
    All,
}

/// Each flag overrides the config key of the same name.
#[derive(Debug, Args)]
struct Overrides {
    /// JSON config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (`out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Half length of the domain.
    #[arg(long = "L", global = true)]
    half_length: Option<usize>,
    /// Grid spacing, e.g. `1/256`.
    #[arg(long, global = true)]
    h: Option<String>,
    #[arg(long, global = true)]
    eta: Option<String>,
    #[arg(long, global = true)]
    zeta: Option<String>,
    /// Comma-separated scales for the H2 fit.
    #[arg(long, global = true)]
    epsilon_list: Option<String>,
    #[arg(long, global = true)]
    lemma_epsilon_list: Option<String>,
    /// Comma-separated sawtooth slopes, e.g. `1/16,1/64`.
    #[arg(long, global = true)]
    eps_saw: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    delta_prime: Option<String>,
}

impl Overrides {
    fn apply(&self, cfg: &mut Config) -> Result<()> {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out_dir = v.clone();
        }
        if let Some(v) = self.half_length {
            cfg.half_length = v;
        }
        let num = |s: &Option<String>, slot: &mut f64| -> Result<()> {
            if let Some(s) = s {
                *slot = parse_number(s)?;
            }
            Ok(())
        };
        num(&self.h, &mut cfg.h)?;
        num(&self.eta, &mut cfg.eta)?;
        num(&self.zeta, &mut cfg.zeta)?;
        num(&self.delta, &mut cfg.delta)?;
        num(&self.delta_prime, &mut cfg.delta_prime)?;
        let list = |s: &Option<String>, slot: &mut Vec<f64>| -> Result<()> {
            if let Some(s) = s {
                *slot = parse_list(s)?;
            }
            Ok(())
        };
        list(&self.epsilon_list, &mut cfg.epsilon_list)?;
        list(&self.lemma_epsilon_list, &mut cfg.lemma_epsilon_list)?;
        list(&self.eps_saw, &mut cfg.eps_saw)?;
        Ok(())
    }
}

/// Exit codes.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_BAD_CONFIG: i32 = 2;

fn write_outputs(dir: &Path, out: &SuiteOutput) -> Result<()> {
    let name = &out.report.suite_name;
    out.report.write_json(&dir.join(format!("{name}.json")))?;
    std::fs::write(dir.join(format!("{name}.csv")), out.table.to_csv())?;
    if let Some((file, plot)) = &out.plot {
        std::fs::write(dir.join(file), plot.render())?;
    }
    Ok(())
}

fn describe_failures(out: &SuiteOutput, err: &mut impl Write) {
    for c in out.report.failures() {
        let detail = match (&c.check, c.check.as_ref().and_then(|k| c.measured.get(&k.quantity))) {
            (Some(k), Some(v)) => {
                let rel = match k.relation {
                    Relation::AtMost => "<=",
                    Relation::AtLeast => ">=",
                    Relation::Near => "~",
                };
                format!("{} = {v:e}, expected {rel} {:e} (tol {:e})", k.quantity, k.target, k.tolerance)
            }
            _ => c.note.clone(),
        };
        let _ = writeln!(
            err,
            "FAIL [{}] {} (digest {}): {detail}",
            out.report.suite_name, c.name, c.inputs_digest
        );
    }
}

/// Parse `argv`, run the selected suites and write reports; returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_BAD_CONFIG } else { EXIT_PASS };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();

    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_BAD_CONFIG;
        }
    };
    let suites: Vec<Suite> = match cli.command {
        Command::Certify => vec![Suite::Certify],
        Command::Lemma => vec![Suite::Lemma],
        Command::H2 => vec![Suite::H2],
        Command::Sawtooth => vec![Suite::Sawtooth],
        Command::Derivative => vec![Suite::Derivative],
        Command::All => cfg.suites.clone(),
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out_dir) {
        let _ = writeln!(err, "error: cannot create {}: {e}", cfg.out_dir.display());
        return EXIT_BAD_CONFIG;
    }

    let mut all_pass = true;
    for suite in suites {
        let result = run_suite(suite, &cfg).and_then(|o| write_outputs(&cfg.out_dir, &o).map(|_| o));
        match result {
            Ok(o) => {
                let asserted = o.report.cases.iter().filter(|c| c.asserted()).count();
                let _ = writeln!(
                    out,
                    "{:<10} {}  ({} cases, {} asserted, {:.1}s)",
                    suite.name(),
                    if o.report.pass { "PASS" } else { "FAIL" },
                    o.report.cases.len(),
                    asserted,
                    o.report.runtime_seconds
                );
                describe_failures(&o, &mut err);
                all_pass &= o.report.pass;
            }
            Err(e @ Error::Config(_)) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_BAD_CONFIG;
            }
            Err(e) => {
                let _ = writeln!(err, "FAIL [{}] error: {e}", suite.name());
                all_pass = false;
            }
        }
    }
    if all_pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn load(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.overrides.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cli.overrides.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_config_keys() {
        let cli = Cli::try_parse_from([
            "h1cutoff",
            "sawtooth",
            "--eps-saw",
            "1/16,1/64",
            "--seed",
            "9",
            "--h",
            "1/128",
            "--L",
            "10",
        ])
        .unwrap();
        let cfg = load(&cli).unwrap();
        assert_eq!(cfg.eps_saw, vec![0.0625, 1.0 / 64.0]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.h, 1.0 / 128.0);
        assert_eq!(cfg.half_length, 10);
    }

    #[test]
    fn bad_values_exit_2() {
        assert_eq!(run_cli(["h1cutoff", "certify", "--eta", "abc"]), EXIT_BAD_CONFIG);
        assert_eq!(run_cli(["h1cutoff", "certify", "--zeta", "0.9"]), EXIT_BAD_CONFIG);
        assert_eq!(run_cli(["h1cutoff", "nonsense"]), EXIT_BAD_CONFIG);
    }

    #[test]
    fn missing_config_exits_2() {
        assert_eq!(
            run_cli(["h1cutoff", "certify", "--config", "/nonexistent/cfg.json"]),
            EXIT_BAD_CONFIG
        );
    }
}
