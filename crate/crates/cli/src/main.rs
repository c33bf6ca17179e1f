use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use selfsplit_cli::{
    parse_config, run_scenario, with_thread_pool, CliError, ScenarioConfig, ScenarioKind,
};

/// Self-splitting beam and photon-pair correlation simulator.
///
/// Exit codes: 0 success, 1 config error, 2 numerical/resolution error,
/// 3 I/O error. The environment variable SIM_THREADS caps worker
/// parallelism; outputs are byte-identical for any thread count.
#[derive(Parser)]
#[command(name = "selfsplit", version, about)]
struct Cli {
    /// List the available scenarios and exit.
    #[arg(long)]
    list: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a config file.
    Simulate {
        /// Path to the INI-style config file.
        config: PathBuf,
    },
    /// Run a named scenario with default parameters.
    Scenario {
        /// Scenario name (see --list).
        name: String,
        /// Control phase override in radians.
        #[arg(long = "theta-c")]
        theta_c: Option<f64>,
        /// Detection distance override in metres (sets both arms).
        #[arg(long = "z-det")]
        z_det: Option<f64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn list_scenarios() {
    println!("available scenarios:");
    for kind in ScenarioKind::ALL {
        println!("  {:<14} {}", kind.name(), kind.describe());
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    if cli.list {
        list_scenarios();
        return Ok(());
    }

    let cfg: ScenarioConfig = match cli.command {
        None => {
            list_scenarios();
            return Ok(());
        }
        Some(Command::Simulate { config }) => {
            let text = std::fs::read_to_string(&config).map_err(|source| CliError::Io {
                path: config.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        Some(Command::Scenario {
            name,
            theta_c,
            z_det,
            out,
        }) => {
            let kind = ScenarioKind::ALL
                .iter()
                .copied()
                .find(|k| k.name() == name)
                .ok_or_else(|| {
                    selfsplit_cli::ConfigError::general(format!(
                        "unknown scenario '{name}'; run with --list to see the choices"
                    ))
                })?;
            let mut cfg = ScenarioConfig::defaults(kind);
            cfg.theta_c = theta_c;
            if let Some(z) = z_det {
                if z <= 0.0 {
                    return Err(selfsplit_cli::ConfigError::general(
                        "--z-det must be positive",
                    )
                    .into());
                }
                cfg.z_s = Some(z);
                cfg.z_i = Some(z);
            }
            cfg.out_dir = out;
            cfg
        }
    };

    let paths = with_thread_pool(None, || run_scenario(&cfg))?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
