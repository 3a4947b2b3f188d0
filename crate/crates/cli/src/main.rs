use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fsge_cli::{annotate, cmd_run, cmd_sweep, cmd_verify, parse_config, RunConfig, DEFAULT_GAINS};
use fsge_core::simulation::Mode;
use fsge_core::verify::SuiteOptions;

#[derive(Parser)]
#[command(name = "fsge", version, about = "Aneurysm growth in a coupled vessel wall and blood flow model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config; missing keys take the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads, 0 = all cores (overrides the config).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = ["gr", "fsge"])]
        mode: Option<String>,
        /// Shear-to-intramural gain ratio.
        #[arg(long)]
        gain: Option<f64>,
    },
    /// Run a list of gains in both modes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated gains.
        #[arg(long, value_delimiter = ',')]
        gains: Option<Vec<f64>>,
    },
    /// Run the oracle suite.
    Verify {
        /// Algebraic oracles only, no flow solves.
        #[arg(long)]
        quick: bool,
        /// Also write verify.json here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true, default_value_t = 1.0)]
        perturb_stress: f64,
    },
    /// Print the resolved configuration.
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
        /// One annotated line per setting instead of JSON.
        #[arg(long)]
        annotate: bool,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => parse_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn real_main() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common, mode, gain } => {
            let mut cfg = load(&common)?;
            if let Some(m) = mode {
                cfg.scenario.mode = m.parse::<Mode>()?;
            }
            if let Some(g) = gain {
                cfg.scenario.gain_ratio = g;
            }
            cfg.validate()?;
            cmd_run(&cfg)
        }
        Command::Sweep { common, gains } => {
            let cfg = load(&common)?;
            cmd_sweep(&cfg, &gains.unwrap_or_else(|| DEFAULT_GAINS.to_vec()))
        }
        Command::Verify {
            quick,
            out,
            perturb_stress,
        } => cmd_verify(
            &SuiteOptions {
                quick,
                stress_scale: perturb_stress,
                ..SuiteOptions::default()
            },
            out.as_deref(),
        ),
        Command::PrintConfig { config, annotate: ann } => {
            let (cfg, user) = match &config {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    let user = if text.trim().is_empty() { None } else { Some(serde_json::from_str(&text)?) };
                    (parse_config(p)?, user)
                }
                None => (RunConfig::default(), None),
            };
            if ann {
                print!("{}", annotate(&cfg, user.as_ref())?);
            } else {
                println!("{}", serde_json::to_string_pretty(&cfg)?);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
