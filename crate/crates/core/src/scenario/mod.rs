//! Configuration, seeded Monte-Carlo orchestration and result emission.

pub mod config;
pub mod leo;
pub mod report;
pub mod sweep;
pub mod uav;

use rayon::prelude::*;

use crate::error::{NtnError, Result};
use crate::seed;

pub use config::{load_config, load_config_with, ChannelMode, Experiment, ScenarioConfig, Scheme};
pub use report::{emit_results, records_to_csv, summarize, Summary, RESULT_CSV_HEADER};
pub use sweep::{execute, sweep, sweep_summary_csv, uav_table, Outcome, SweepEntry};
pub use uav::run_noma;

/// One row of the LEO experiment output: a scheme evaluated on a drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub drop_id: usize,
    pub scheme: Scheme,
    pub channel_mode: ChannelMode,
    pub system_capacity_bps: f64,
    pub mean_sinr_db: f64,
    pub mean_spectral_efficiency: f64,
    pub seed: u64,
    /// Set when the drop failed; numeric fields are then NaN.
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn is_flagged(&self) -> bool {
        self.error.is_some()
    }

    fn flagged(drop_id: usize, scheme: Scheme, mode: ChannelMode, seed: u64, err: &NtnError) -> Self {
        Self {
            drop_id,
            scheme,
            channel_mode: mode,
            system_capacity_bps: f64::NAN,
            mean_sinr_db: f64::NAN,
            mean_spectral_efficiency: f64::NAN,
            seed,
            error: Some(err.to_string()),
        }
    }
}

/// Runs `f` over `0..n` on `workers` threads (0 = all cores), returning the
/// results in index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| NtnError::Contract(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(&f).collect()))
}

fn run_drop(cfg: &ScenarioConfig, setup: &leo::LeoSetup, drop_id: usize) -> Vec<ResultRecord> {
    let mode = cfg.leo.channel_mode;
    let seed = seed::drop_seed(cfg.master_seed, drop_id as u64);
    let channels = match leo::draw_channels(cfg, setup, seed) {
        Ok(ch) => ch,
        Err(e) => {
            return cfg
                .leo
                .schemes
                .iter()
                .map(|&s| ResultRecord::flagged(drop_id, s, mode, seed, &e))
                .collect()
        }
    };
    cfg.leo
        .schemes
        .iter()
        .map(|&scheme| match leo::evaluate_scheme(cfg, setup, &channels, scheme, seed) {
            Ok(o) => ResultRecord {
                drop_id,
                scheme,
                channel_mode: mode,
                system_capacity_bps: o.system_capacity_bps,
                mean_sinr_db: o.mean_sinr_db,
                mean_spectral_efficiency: o.mean_spectral_efficiency,
                seed,
                error: None,
            },
            Err(e) => ResultRecord::flagged(drop_id, scheme, mode, seed, &e),
        })
        .collect()
}

/// Runs every drop of the LEO experiment. A failing drop yields flagged
/// records instead of aborting the run. Records are ordered by drop id and
/// then by the configured scheme order, whatever the worker count.
pub fn run(cfg: &ScenarioConfig) -> Result<Vec<ResultRecord>> {
    if cfg.experiment != Experiment::LeoBeamforming {
        return Err(NtnError::Contract(
            "run() drives the LEO beamforming experiment; use run_noma for the UAV experiment".into(),
        ));
    }
    cfg.validate()?;
    let setup = leo::LeoSetup::new(cfg)?;
    let per_drop = parallel_map(cfg.n_drops, cfg.workers, |d| run_drop(cfg, &setup, d))?;
    Ok(per_drop.into_iter().flatten().collect())
}
