//! Scenario runner and I/O around `selfsplit-core`: strict INI-style
//! configuration, named scenario reproductions, and deterministic
//! plot-ready CSV output.

pub mod config;
pub mod error;
pub mod output;
pub mod scenario;

pub use config::{parse_config, PlateArms, PumpKind, ScenarioConfig, ScenarioKind};
pub use error::{CliError, ConfigError};
pub use output::{read_grid, write_grid, GridOutput};
pub use scenario::{run_glass_plate_step, run_obstacle, run_scenario, split_at_detector_phase};

/// Builds a rayon thread pool honouring the `SIM_THREADS` cap and runs `f`
/// inside it. Outputs are deterministic regardless of the thread count.
pub fn with_thread_pool<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> R {
    let threads = threads
        .or_else(|| {
            std::env::var("SIM_THREADS")
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .filter(|&n| n > 0)
        })
        .unwrap_or(0); //0 lets rayon pick
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool");
    pool.install(f)
}
