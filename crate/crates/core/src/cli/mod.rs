//! Command-line front end: `keyrate`, `sweep`, `discriminate`, `figure`,
//! `maxdist`.
//!
//! Exit codes: 0 success, 2 usage error, 3 configuration error, 4 numerical
//! failure. A manifest is written for every run that gets past configuration,
//! including failed ones.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::keyrate::{FormulaModes, Regime};
use crate::sweep::{self, SchemeKind, Settings, Table};
use config::Config;
use output::{OutputFile, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "cvqkd", version, about = "Key rates and receiver simulation for four-state CVQKD with photon subtraction")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Overrides `regime` from the configuration.
    #[arg(long, global = true, value_parser = ["asymptotic", "finite", "composable"])]
    regime: Option<String>,

    /// Formula preset for mode keys not set in the configuration.
    #[arg(long, global = true, value_parser = ["paper-literal", "corrected"])]
    mode: Option<String>,

    #[arg(long, global = true, default_value = "csv", value_parser = ["csv"])]
    format: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Key rate at one operating point.
    Keyrate,
    /// One-variable sweep described by the `sweep_*` keys.
    Sweep,
    /// Monte Carlo run of the adaptive receiver.
    Discriminate,
    /// Dataset behind one figure (fig3 .. fig9).
    Figure { id: String },
    /// Largest distance whose rate meets `rate_threshold`.
    Maxdist,
}

impl Command {
    fn stem(&self) -> String {
        match self {
            Command::Keyrate => "keyrate".into(),
            Command::Sweep => "sweep".into(),
            Command::Discriminate => "discriminate".into(),
            Command::Figure { id } => id.clone(),
            Command::Maxdist => "maxdist".into(),
        }
    }

    fn label(&self) -> String {
        match self {
            Command::Figure { id } => format!("figure {id}"),
            other => other.stem(),
        }
    }
}

/// What a command produced before anything is written.
struct Run {
    table: Table,
    results: BTreeMap<String, f64>,
    flags: Vec<String>,
}

impl Run {
    fn table(table: Table) -> Self {
        Run {
            table,
            results: BTreeMap::new(),
            flags: Vec::new(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = Config::parse(&text)?;
    match cli.mode.as_deref() {
        Some("paper-literal") => cfg.apply_mode_preset(FormulaModes::paper_literal()),
        Some(_) => cfg.apply_mode_preset(FormulaModes::default()),
        None => {}
    }
    if let Some(r) = &cli.regime {
        cfg.settings.regime = r.parse::<Regime>().map_err(Error::Usage)?;
    }
    if matches!(cli.command, Command::Sweep) {
        cfg.check_sweep()?;
    }
    Ok(cfg)
}

fn keyrate(s: &Settings) -> Result<Run> {
    let p = sweep::optimal_key_rate(s, s.scheme, s.distance_km, s.regime)?;
    let c = s.scheme.column();
    let r = &p.result;
    let mut curves = vec![
        (format!("{c}:key_rate"), r.rate),
        (format!("{c}:raw_rate"), r.rate),
        (format!("{c}:i_ab"), r.i_ab),
        (format!("{c}:s_eb"), r.s_eb),
        (format!("{c}:v_mod"), p.v_mod),
    ];
    if let Some(mu) = p.mu {
        curves.push((format!("{c}:mu"), mu));
    }
    let mut columns = vec!["distance_km".to_string()];
    let mut row = vec![p.distance_km];
    for (name, v) in curves {
        columns.push(name);
        row.push(v);
    }
    let mut flags = r.flags.clone();
    if !r.feasible {
        flags.push("infeasible".into());
    }
    Ok(Run {
        table: Table { columns, rows: vec![row] },
        results: r.diagnostics.clone(),
        flags,
    })
}

fn maxdist(s: &Settings) -> Result<Run> {
    let mut schemes = vec![s.scheme];
    if s.scheme != SchemeKind::FourState {
        schemes.push(SchemeKind::FourState);
    }
    let mut columns = vec!["rate_threshold".to_string()];
    let mut row = vec![s.rate_threshold];
    let mut results = BTreeMap::new();
    let mut flags = Vec::new();
    for scheme in schemes {
        let c = scheme.column();
        let m = sweep::scheme_max_distance(s, scheme, s.regime)?;
        columns.push(format!("{c}:max_distance_km"));
        row.push(m.km);
        results.insert(format!("{c}:max_distance_km"), m.km);
        if m.below_threshold_at_origin {
            flags.push(format!("{c}:below_threshold_at_origin"));
        }
        if m.reached_range_end {
            flags.push(format!("{c}:reached_range_end"));
        }
    }
    Ok(Run {
        table: Table { columns, rows: vec![row] },
        results,
        flags,
    })
}

fn execute(command: &Command, cfg: &Config, seed: u64) -> Result<Run> {
    let s = cfg.effective_settings();
    match command {
        Command::Keyrate => keyrate(&s),
        Command::Sweep => sweep::run_sweep(&cfg.sweep, &s, seed).map(Run::table),
        Command::Discriminate => sweep::discrimination_table(&s, &[s.mean_photon], seed).map(Run::table),
        Command::Figure { id } => sweep::figure_dataset(id, &s, seed).map(Run::table),
        Command::Maxdist => maxdist(&s),
    }
}

fn manifest(command: &Command, cfg: &Config, seed: u64) -> RunManifest {
    let mut full_config: BTreeMap<String, String> =
        cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let s = cfg.effective_settings();
    full_config.insert("v_mod_policy".into(), s.v_mod_policy.to_string());
    full_config.insert("mu_policy".into(), s.mu_policy.to_string());
    full_config.insert("seed".into(), seed.to_string());
    RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        command: command.label(),
        status: "ok".into(),
        error: None,
        exit_code: 0,
        seed,
        full_config,
        formula_modes: s.modes.tags(),
        results: BTreeMap::new(),
        flags: Vec::new(),
        outputs: Vec::new(),
    }
}

fn fail(dir: &Path, stem: &str, mut m: RunManifest, e: &Error) -> i32 {
    eprintln!("error: {e}");
    let code = e.exit_code();
    m.status = "failed".into();
    m.error = Some(e.to_string());
    m.exit_code = code;
    if let Err(w) = output::write_manifest(dir, stem, &m) {
        eprintln!("error: could not write manifest: {w}");
    }
    code
}

/// Runs the tool on `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return 3;
    }
    let stem = cli.command.stem();
    let mut m = manifest(&cli.command, &cfg, cli.seed);
    let mut run = match execute(&cli.command, &cfg, cli.seed) {
        Ok(r) => r,
        Err(e @ (Error::Usage(_) | Error::Config { .. })) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
        Err(e) => return fail(&cli.out, &stem, m, &e),
    };
    output::clamp_key_rates(&mut run.table);
    let bytes = match output::render_csv(&run.table) {
        Ok(b) => b,
        Err(e) => return fail(&cli.out, &stem, m, &e),
    };
    m.results = run.results;
    m.flags = run.flags;
    let written: Result<OutputFile> = output::write_output(&cli.out, &format!("{stem}.csv"), &bytes);
    match written {
        Ok(f) => m.outputs.push(f),
        Err(e) => return fail(&cli.out, &stem, m, &e),
    }
    match output::write_manifest(&cli.out, &stem, &m) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
