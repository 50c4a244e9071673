//! UAV-assisted NOMA uplink: UE grouping by clustering, subcarrier
//! allocation, energy-efficient power allocation and a greedy OMA baseline.

pub mod cluster;
pub mod greedy;
pub mod grouping;
pub mod power;

use std::fmt;

use rand_distr::{Distribution, Exp1, Uniform};

use crate::error::{NtnError, Result};
use crate::geometry::SPEED_OF_LIGHT_M_S;
use crate::seed;

pub use cluster::{kmeans_cluster, select_k, zscore, KSearch, KSelection, Partition};
pub use greedy::greedy_baseline;
pub use grouping::{allocate_subcarriers, proportional_split, NomaGrouping};
pub use power::{iterative_power_allocation, sic_rates};

const STREAM_PLACEMENT: u64 = 1;
const STREAM_FADING: u64 = 2;
const STREAM_CLUSTER: u64 = 3;

/// Log-distance path loss with free-space loss at the 1 m reference,
/// evaluated between a hovering UAV and UEs spread over a disc below it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavLinkModel {
    pub altitude_m: f64,
    pub area_radius_m: f64,
    pub carrier_hz: f64,
    pub path_loss_exponent: f64,
    /// Unit-mean Rayleigh power fading per UE and subcarrier. Off by
    /// default: gains then follow path loss alone.
    pub fading: bool,
}

impl Default for UavLinkModel {
    fn default() -> Self {
        Self {
            altitude_m: 100.0,
            area_radius_m: 500.0,
            carrier_hz: 2e9,
            path_loss_exponent: 2.7,
            fading: false,
        }
    }
}

impl UavLinkModel {
    pub fn path_loss_db(&self, distance_m: f64) -> f64 {
        let reference = 20.0 * (4.0 * std::f64::consts::PI * self.carrier_hz / SPEED_OF_LIGHT_M_S).log10();
        reference + 10.0 * self.path_loss_exponent * distance_m.log10()
    }
}

/// Every constant of one uplink energy-efficiency problem.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkScenario {
    pub bandwidth_hz: f64,
    pub max_ue_power_w: f64,
    pub circuit_power_w: f64,
    pub frame_s: f64,
    pub data_bits_per_ue: f64,
    /// Receiver noise power spectral density, W/Hz (noise figure included).
    pub noise_psd_w_hz: f64,
    /// UE-to-UAV distance, m.
    pub distances_m: Vec<f64>,
    /// `gains[u][s]`: linear power gain of UE `u` on subcarrier `s`.
    pub gains: Vec<Vec<f64>>,
}

impl UplinkScenario {
    pub fn n_ues(&self) -> usize {
        self.gains.len()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.gains.first().map_or(0, Vec::len)
    }

    pub fn subcarrier_bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz / self.n_subcarriers() as f64
    }

    /// Rate every UE must sustain to deliver its payload within the frame.
    pub fn required_rate_bps(&self) -> f64 {
        self.data_bits_per_ue / self.frame_s
    }

    pub fn with_data_bits(&self, bits: f64) -> Self {
        Self {
            data_bits_per_ue: bits,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("bandwidth_hz", self.bandwidth_hz),
            ("max_ue_power_w", self.max_ue_power_w),
            ("frame_s", self.frame_s),
            ("data_bits_per_ue", self.data_bits_per_ue),
            ("noise_psd_w_hz", self.noise_psd_w_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NtnError::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.circuit_power_w >= 0.0 && self.circuit_power_w.is_finite()) {
            return Err(NtnError::Domain("circuit power must be non-negative".into()));
        }
        let n_sc = self.n_subcarriers();
        if self.gains.is_empty() || n_sc == 0 {
            return Err(NtnError::Domain("scenario has no UEs or no subcarriers".into()));
        }
        if self.distances_m.len() != self.gains.len() {
            return Err(NtnError::Domain("one distance per UE is required".into()));
        }
        for (u, row) in self.gains.iter().enumerate() {
            if row.len() != n_sc || row.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
                return Err(NtnError::Domain(format!("UE {u} gains must be positive on all {n_sc} subcarriers")));
            }
        }
        Ok(())
    }

    /// Per-UE clustering features: mean gain in dB and distance to the UAV.
    pub fn features(&self) -> Vec<Vec<f64>> {
        self.gains
            .iter()
            .zip(&self.distances_m)
            .map(|(row, &d)| {
                let mean = row.iter().sum::<f64>() / row.len() as f64;
                vec![10.0 * mean.log10(), d]
            })
            .collect()
    }
}

/// Scalar settings that, together with a link model, define a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSettings {
    pub n_ues: usize,
    pub n_subcarriers: usize,
    pub bandwidth_hz: f64,
    pub max_ue_power_w: f64,
    pub circuit_power_w: f64,
    pub frame_s: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
}

impl Default for UplinkSettings {
    fn default() -> Self {
        Self {
            n_ues: 70,
            n_subcarriers: 128,
            bandwidth_hz: 10e6,
            max_ue_power_w: 0.2,
            circuit_power_w: 1.4002,
            frame_s: 1.0,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 7.0,
        }
    }
}

/// Drops UEs uniformly over the disc and draws their gains.
pub fn draw_scenario(settings: &UplinkSettings, link: &UavLinkModel, data_bits_per_ue: f64, rng_seed: u64) -> Result<UplinkScenario> {
    if settings.n_ues == 0 || settings.n_subcarriers == 0 {
        return Err(NtnError::Domain("need at least one UE and one subcarrier".into()));
    }
    if !(link.altitude_m > 0.0 && link.area_radius_m > 0.0 && link.carrier_hz > 0.0 && link.path_loss_exponent > 0.0) {
        return Err(NtnError::Domain("link model parameters must be positive".into()));
    }
    let mut place = seed::rng(seed::stream_seed(rng_seed, STREAM_PLACEMENT));
    let unit = Uniform::new(0.0f64, 1.0);
    let distances_m: Vec<f64> = (0..settings.n_ues)
        .map(|_| {
            let rho = link.area_radius_m * unit.sample(&mut place).sqrt();
            (rho * rho + link.altitude_m * link.altitude_m).sqrt()
        })
        .collect();
    let mut fade = seed::rng(seed::stream_seed(rng_seed, STREAM_FADING));
    let gains = distances_m
        .iter()
        .map(|&d| {
            let mean = 10f64.powf(-link.path_loss_db(d) / 10.0);
            (0..settings.n_subcarriers)
                .map(|_| {
                    let f: f64 = if link.fading { Exp1.sample(&mut fade) } else { 1.0 };
                    // Guard against an exact zero draw.
                    mean * f.max(1e-12)
                })
                .collect()
        })
        .collect();
    let scenario = UplinkScenario {
        bandwidth_hz: settings.bandwidth_hz,
        max_ue_power_w: settings.max_ue_power_w,
        circuit_power_w: settings.circuit_power_w,
        frame_s: settings.frame_s,
        data_bits_per_ue,
        noise_psd_w_hz: 10f64.powf((settings.noise_psd_dbm_hz + settings.noise_figure_db) / 10.0) * 1e-3,
        distances_m,
        gains,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    UavAi,
    Greedy,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::UavAi => "uav_ai",
            Method::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Power, rate and energy efficiency of one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct EEResult {
    pub method: Method,
    pub power_w: Vec<f64>,
    pub rate_bps: Vec<f64>,
    pub total_bits: f64,
    pub total_energy_j: f64,
    pub ee_bits_per_joule: f64,
    /// Dinkelbach objective after every outer iteration (empty for greedy).
    pub objective_trace: Vec<f64>,
}

impl EEResult {
    pub(crate) fn new(method: Method, power_w: Vec<f64>, rate_bps: Vec<f64>, circuit_power_w: f64, frame_s: f64, trace: Vec<f64>) -> Self {
        let total_bits = rate_bps.iter().sum::<f64>() * frame_s;
        let total_energy_j = (power_w.iter().sum::<f64>() + circuit_power_w) * frame_s;
        Self {
            method,
            power_w,
            rate_bps,
            total_bits,
            total_energy_j,
            ee_bits_per_joule: total_bits / total_energy_j,
            objective_trace: trace,
        }
    }
}

/// Clustering, subcarrier allocation and SIC ordering for a scenario. It
/// depends only on the channel, not on the payload.
pub fn plan_groups(scenario: &UplinkScenario, search: KSearch, rng_seed: u64) -> Result<(NomaGrouping, KSelection)> {
    scenario.validate()?;
    let features = zscore(&scenario.features());
    let cluster_seed = seed::stream_seed(rng_seed, STREAM_CLUSTER);
    let selection = select_k(&features, search, cluster_seed)?;
    let partition = kmeans_cluster(&features, selection.k, seed::stream_seed(cluster_seed, selection.k as u64))?;
    let grouping = allocate_subcarriers(&partition.groups(), scenario.n_subcarriers(), &scenario.gains)?;
    Ok((grouping, selection))
}

/// One `(data size, method)` point of the energy-efficiency sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub data_size_bits: f64,
    pub method: Method,
    /// NaN when infeasible.
    pub ee_bits_per_joule: f64,
    /// Selected group count; 0 for the greedy baseline, which does not cluster.
    pub k_selected: usize,
    pub feasible: bool,
    pub error: Option<String>,
}

/// Runs both methods at every payload on the same channel realization.
/// Infeasible points are flagged rather than aborting the sweep.
pub fn ee_sweep(template: &UplinkScenario, data_sizes: &[f64], search: KSearch, rng_seed: u64) -> Result<Vec<SweepPoint>> {
    if data_sizes.is_empty() {
        return Err(NtnError::Contract("the sweep needs at least one data size".into()));
    }
    let (grouping, selection) = plan_groups(template, search, rng_seed)?;
    let mut rows = Vec::with_capacity(2 * data_sizes.len());
    for &bits in data_sizes {
        let scenario = template.with_data_bits(bits);
        for method in [Method::UavAi, Method::Greedy] {
            let outcome = match method {
                Method::UavAi => iterative_power_allocation(&grouping, &scenario),
                Method::Greedy => greedy_baseline(&scenario),
            };
            let k_selected = if method == Method::UavAi { selection.k } else { 0 };
            rows.push(match outcome {
                Ok(r) => SweepPoint {
                    data_size_bits: bits,
                    method,
                    ee_bits_per_joule: r.ee_bits_per_joule,
                    k_selected,
                    feasible: true,
                    error: None,
                },
                Err(e) => SweepPoint {
                    data_size_bits: bits,
                    method,
                    ee_bits_per_joule: f64::NAN,
                    k_selected,
                    feasible: false,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(rows)
}

pub const EE_CSV_HEADER: &str = "data_size_bits,method,ee_bits_per_joule,k_selected,feasible_flag";

pub fn sweep_to_csv(rows: &[SweepPoint]) -> String {
    let mut out = String::from(EE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.data_size_bits,
            r.method,
            r.ee_bits_per_joule,
            r.k_selected,
            u8::from(r.feasible)
        ));
    }
    out
}
