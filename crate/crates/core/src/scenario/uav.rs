//! Drives the NOMA energy-efficiency sweep from a configuration, averaging
//! every sweep point over independently seeded drops.

use std::collections::BTreeMap;

use crate::error::{NtnError, Result};
use crate::noma::{draw_scenario, ee_sweep, KSearch, Method, SweepPoint, UavLinkModel, UplinkSettings};
use crate::seed;

use super::config::{Experiment, NomaConfig, ScenarioConfig};
use super::parallel_map;

pub fn uplink_settings(n: &NomaConfig) -> UplinkSettings {
    UplinkSettings {
        n_ues: n.n_ues,
        n_subcarriers: n.n_subcarriers,
        bandwidth_hz: n.bandwidth_hz,
        max_ue_power_w: n.max_ue_power_w,
        circuit_power_w: n.circuit_power_w,
        frame_s: n.frame_s,
        noise_psd_dbm_hz: n.noise_psd_dbm_hz,
        noise_figure_db: n.noise_figure_db,
    }
}

pub fn link_model(n: &NomaConfig) -> UavLinkModel {
    UavLinkModel {
        altitude_m: n.uav_altitude_m,
        area_radius_m: n.area_radius_m,
        carrier_hz: n.carrier_hz,
        path_loss_exponent: n.path_loss_exponent,
        fading: n.fading,
    }
}

pub fn k_search(n: &NomaConfig) -> KSearch {
    KSearch {
        k_min: n.k_min,
        k_max: n.k_max,
        elbow_threshold: n.elbow_threshold,
        f_test_alpha: n.f_test_alpha,
    }
}

fn drop_rows(cfg: &ScenarioConfig, drop_id: usize) -> Result<Vec<SweepPoint>> {
    let n = &cfg.noma;
    let seed = seed::drop_seed(cfg.master_seed, drop_id as u64);
    let scenario = draw_scenario(&uplink_settings(n), &link_model(n), n.data_bits[0], seed)?;
    ee_sweep(&scenario, &n.data_bits, k_search(n), seed)
}

/// Mean energy efficiency per `(data size, method)` over `n_drops` drops.
/// A point is feasible only if it was feasible in every drop; its EE is the
/// mean over the drops where it was. `k_selected` is the most frequent
/// group count.
pub fn run_noma(cfg: &ScenarioConfig) -> Result<Vec<SweepPoint>> {
    if cfg.experiment != Experiment::UavNomaEe {
        return Err(NtnError::Contract("run_noma() drives the UAV NOMA experiment".into()));
    }
    cfg.validate()?;
    let per_drop = parallel_map(cfg.n_drops, cfg.workers, |d| drop_rows(cfg, d))?;
    let n = &cfg.noma;
    let mut out = Vec::with_capacity(2 * n.data_bits.len());
    for (i, &bits) in n.data_bits.iter().enumerate() {
        for (j, method) in [Method::UavAi, Method::Greedy].into_iter().enumerate() {
            let idx = 2 * i + j;
            let mut ee_sum = 0.0;
            let mut ee_count = 0usize;
            let mut error = None;
            let mut k_votes: BTreeMap<usize, usize> = BTreeMap::new();
            for drop in &per_drop {
                match drop {
                    Ok(rows) => {
                        let row = &rows[idx];
                        *k_votes.entry(row.k_selected).or_default() += 1;
                        if row.feasible {
                            ee_sum += row.ee_bits_per_joule;
                            ee_count += 1;
                        } else if error.is_none() {
                            error = row.error.clone();
                        }
                    }
                    Err(e) => {
                        if error.is_none() {
                            error = Some(e.to_string());
                        }
                    }
                }
            }
            let k_selected = k_votes
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map_or(0, |(&k, _)| k);
            out.push(SweepPoint {
                data_size_bits: bits,
                method,
                ee_bits_per_joule: if ee_count > 0 { ee_sum / ee_count as f64 } else { f64::NAN },
                k_selected,
                feasible: error.is_none(),
                error,
            });
        }
    }
    Ok(out)
}
