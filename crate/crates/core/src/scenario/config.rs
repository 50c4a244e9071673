//! Scenario configuration: a TOML document with one section per subsystem.
//!
//! Every key is optional; missing keys take the documented defaults, which
//! reproduce the reference LEO and UAV set-ups. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::channel::{ImpairmentProfile, ReceiverProfile};
use crate::error::{NtnError, Result};
use crate::geometry::GeometryContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    LeoBeamforming,
    UavNomaEe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelMode {
    ClearSky,
    Tgpp,
}

impl ChannelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelMode::ClearSky => "clear_sky",
            ChannelMode::Tgpp => "tgpp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "FR3")]
    Fr3,
    #[serde(rename = "FR4")]
    Fr4,
    #[serde(rename = "MMSE")]
    Mmse,
    #[serde(rename = "LB_MMSE")]
    LbMmse,
    #[serde(rename = "ZF")]
    Zf,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Fr3, Scheme::Fr4, Scheme::Mmse, Scheme::LbMmse, Scheme::Zf];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Fr3 => "FR3",
            Scheme::Fr4 => "FR4",
            Scheme::Mmse => "MMSE",
            Scheme::LbMmse => "LB_MMSE",
            Scheme::Zf => "ZF",
        }
    }

    pub fn is_user_centric(self) -> bool {
        matches!(self, Scheme::Mmse | Scheme::LbMmse | Scheme::Zf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
    pub user_min_elevation_deg: f64,
    pub gateway_min_elevation_deg: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let g = GeometryContext::default();
        Self {
            earth_radius_km: g.earth_radius_km,
            altitude_km: g.altitude_km,
            user_min_elevation_deg: g.user_min_elevation_deg,
            gateway_min_elevation_deg: g.gateway_min_elevation_deg,
        }
    }
}

impl GeometryConfig {
    pub fn context(&self) -> GeometryContext {
        GeometryContext {
            earth_radius_km: self.earth_radius_km,
            altitude_km: self.altitude_km,
            user_min_elevation_deg: self.user_min_elevation_deg,
            gateway_min_elevation_deg: self.gateway_min_elevation_deg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_elements: usize,
    pub element_spacing_wavelengths: f64,
    pub max_element_gain_dbi: f64,
    pub element_pattern_exponent: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        let a = ArrayGeometry::default();
        Self {
            n_elements: a.n_elements(),
            element_spacing_wavelengths: a.element_spacing_wavelengths,
            max_element_gain_dbi: a.max_element_gain_dbi,
            element_pattern_exponent: a.element_pattern_exponent,
        }
    }
}

impl ArrayConfig {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        let mut a = ArrayGeometry::with_elements(self.n_elements)?;
        a.element_spacing_wavelengths = self.element_spacing_wavelengths;
        a.max_element_gain_dbi = self.max_element_gain_dbi;
        a.element_pattern_exponent = self.element_pattern_exponent;
        a.validate()?;
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeoConfig {
    pub power_dbw: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub n_users: usize,
    pub channel_mode: ChannelMode,
    pub schemes: Vec<Scheme>,
    /// Beams of the fixed FR3/FR4 lattice.
    pub n_beams: usize,
    pub coverage_half_angle_deg: f64,
    /// Age of the ancillary information; derived from the geometry when absent.
    pub misalignment_ms: Option<f64>,
    pub location_error_m: f64,
    /// Per-entry CSI estimation noise relative to the mean entry power; off when absent.
    pub estimation_noise_db: Option<f64>,
    pub g_over_t_db_k: f64,
    pub rx_gain_dbi: f64,
    /// Optional spectral-efficiency ceiling in bit/s/Hz.
    pub se_cap: Option<f64>,
}

impl Default for LeoConfig {
    fn default() -> Self {
        Self {
            power_dbw: 38.0,
            carrier_hz: 20e9,
            bandwidth_hz: 400e6,
            n_users: 50,
            channel_mode: ChannelMode::Tgpp,
            schemes: vec![Scheme::Fr3, Scheme::Fr4, Scheme::Mmse, Scheme::LbMmse],
            n_beams: 19,
            coverage_half_angle_deg: 33.0,
            misalignment_ms: None,
            location_error_m: 0.0,
            estimation_noise_db: None,
            g_over_t_db_k: ReceiverProfile::VSAT.g_over_t_db_k,
            rx_gain_dbi: ReceiverProfile::VSAT.rx_gain_dbi,
            se_cap: None,
        }
    }
}

impl LeoConfig {
    pub fn total_power_w(&self) -> f64 {
        10f64.powf(self.power_dbw / 10.0)
    }

    pub fn receiver(&self) -> ReceiverProfile {
        ReceiverProfile {
            g_over_t_db_k: self.g_over_t_db_k,
            rx_gain_dbi: self.rx_gain_dbi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpairmentConfig {
    pub atmospheric_loss_db: f64,
    pub atmospheric_sigma_db: f64,
    pub scintillation_sigma_db: f64,
    pub shadow_sigma_db: f64,
    pub atmospheric: bool,
    pub scintillation: bool,
    pub shadowing: bool,
    /// Correlation of the stochastic loss terms between the estimation and
    /// transmission epochs. 1 keeps them frozen (users are static); 0
    /// redraws them independently.
    pub loss_correlation: f64,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        let p = ImpairmentProfile::default();
        Self {
            atmospheric_loss_db: p.atmospheric_loss_db,
            atmospheric_sigma_db: p.atmospheric_sigma_db,
            scintillation_sigma_db: p.scintillation_sigma_db,
            shadow_sigma_db: p.shadow_sigma_db,
            atmospheric: p.atmospheric_enabled,
            scintillation: p.scintillation_enabled,
            shadowing: p.shadowing_enabled,
            loss_correlation: 1.0,
        }
    }
}

impl ImpairmentConfig {
    pub fn profile(&self) -> ImpairmentProfile {
        ImpairmentProfile {
            atmospheric_loss_db: self.atmospheric_loss_db,
            atmospheric_sigma_db: self.atmospheric_sigma_db,
            scintillation_sigma_db: self.scintillation_sigma_db,
            shadow_sigma_db: self.shadow_sigma_db,
            atmospheric_enabled: self.atmospheric,
            scintillation_enabled: self.scintillation,
            shadowing_enabled: self.shadowing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NomaConfig {
    pub n_ues: usize,
    pub n_subcarriers: usize,
    pub bandwidth_hz: f64,
    pub max_ue_power_w: f64,
    pub circuit_power_w: f64,
    pub frame_s: f64,
    /// Payload per UE for each point of the sweep, bits.
    pub data_bits: Vec<f64>,
    pub uav_altitude_m: f64,
    pub area_radius_m: f64,
    pub carrier_hz: f64,
    pub path_loss_exponent: f64,
    pub noise_psd_dbm_hz: f64,
    pub noise_figure_db: f64,
    /// Frequency-selective Rayleigh fading on top of path loss.
    pub fading: bool,
    pub k_min: usize,
    pub k_max: usize,
    pub elbow_threshold: f64,
    pub f_test_alpha: f64,
}

impl Default for NomaConfig {
    fn default() -> Self {
        Self {
            n_ues: 70,
            n_subcarriers: 128,
            bandwidth_hz: 10e6,
            max_ue_power_w: 0.2,
            circuit_power_w: 1.4002,
            frame_s: 1.0,
            data_bits: vec![1e5, 2e5, 3e5, 4e5, 5e5, 6e5, 7e5, 8e5],
            uav_altitude_m: 100.0,
            area_radius_m: 500.0,
            carrier_hz: 2e9,
            path_loss_exponent: 2.7,
            noise_psd_dbm_hz: -174.0,
            noise_figure_db: 7.0,
            fading: false,
            k_min: 1,
            k_max: 10,
            elbow_threshold: 0.10,
            f_test_alpha: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_drops")]
    pub n_drops: usize,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub leo: LeoConfig,
    #[serde(default)]
    pub impairments: ImpairmentConfig,
    #[serde(default)]
    pub noma: NomaConfig,
}

fn default_seed() -> u64 {
    1
}

fn default_drops() -> usize {
    200
}

impl ScenarioConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            master_seed: default_seed(),
            n_drops: default_drops(),
            workers: 0,
            output: None,
            geometry: GeometryConfig::default(),
            array: ArrayConfig::default(),
            leo: LeoConfig::default(),
            impairments: ImpairmentConfig::default(),
            noma: NomaConfig::default(),
        }
    }

    /// Parses and validates a configuration document.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| parse_error(text, origin, &e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same as [`from_toml_str`](Self::from_toml_str) after replacing the
    /// dotted keys in `overrides`.
    pub fn from_toml_str_with(text: &str, origin: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, origin, &e))?;
        for (key, value) in overrides {
            set_dotted(&mut doc, key, parse_scalar(value))?;
        }
        let cfg: ScenarioConfig = doc.try_into().map_err(|e: toml::de::Error| NtnError::Parse {
            path: origin.to_path_buf(),
            line: None,
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(field: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(NtnError::config(field, format!("must be finite, got {v}")))
            }
        }
        fn positive(field: &str, v: f64) -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(NtnError::config(field, format!("must be positive, got {v}")))
            }
        }
        if self.n_drops == 0 {
            return Err(NtnError::config("n_drops", "must be at least 1"));
        }
        self.geometry.context().validate().map_err(|e| NtnError::config("geometry", e.to_string()))?;
        self.array.geometry()?;

        let leo = &self.leo;
        finite("leo.power_dbw", leo.power_dbw)?;
        positive("leo.carrier_hz", leo.carrier_hz)?;
        positive("leo.bandwidth_hz", leo.bandwidth_hz)?;
        if leo.n_users == 0 {
            return Err(NtnError::config("leo.n_users", "must be at least 1"));
        }
        if leo.n_users > self.array.n_elements {
            return Err(NtnError::config(
                "leo.n_users",
                format!("{} users exceed {} radiating elements", leo.n_users, self.array.n_elements),
            ));
        }
        if leo.schemes.is_empty() {
            return Err(NtnError::config("leo.schemes", "at least one scheme is required"));
        }
        if leo.n_beams == 0 {
            return Err(NtnError::config("leo.n_beams", "must be at least 1"));
        }
        if !(leo.coverage_half_angle_deg > 0.0 && leo.coverage_half_angle_deg < 90.0) {
            return Err(NtnError::config("leo.coverage_half_angle_deg", "must lie in (0, 90)"));
        }
        if let Some(dt) = leo.misalignment_ms {
            if !(dt >= 0.0) || !dt.is_finite() {
                return Err(NtnError::config("leo.misalignment_ms", "must be non-negative"));
            }
        }
        if !(leo.location_error_m >= 0.0) || !leo.location_error_m.is_finite() {
            return Err(NtnError::config("leo.location_error_m", "must be non-negative"));
        }
        if let Some(db) = leo.estimation_noise_db {
            finite("leo.estimation_noise_db", db)?;
        }
        finite("leo.g_over_t_db_k", leo.g_over_t_db_k)?;
        finite("leo.rx_gain_dbi", leo.rx_gain_dbi)?;
        if let Some(cap) = leo.se_cap {
            positive("leo.se_cap", cap)?;
        }
        self.impairments
            .profile()
            .validate()
            .map_err(|e| match e {
                NtnError::Config { field, message } => NtnError::Config {
                    field: format!("impairments.{field}"),
                    message,
                },
                other => other,
            })?;
        if !(-1.0..=1.0).contains(&self.impairments.loss_correlation) {
            return Err(NtnError::config("impairments.loss_correlation", "must lie in [-1, 1]"));
        }

        let n = &self.noma;
        if n.n_ues == 0 {
            return Err(NtnError::config("noma.n_ues", "must be at least 1"));
        }
        if n.n_subcarriers == 0 {
            return Err(NtnError::config("noma.n_subcarriers", "must be at least 1"));
        }
        positive("noma.bandwidth_hz", n.bandwidth_hz)?;
        positive("noma.max_ue_power_w", n.max_ue_power_w)?;
        if !(n.circuit_power_w >= 0.0) || !n.circuit_power_w.is_finite() {
            return Err(NtnError::config("noma.circuit_power_w", "must be non-negative"));
        }
        positive("noma.frame_s", n.frame_s)?;
        if n.data_bits.is_empty() {
            return Err(NtnError::config("noma.data_bits", "the sweep needs at least one payload"));
        }
        for &d in &n.data_bits {
            if !(d > 0.0) || !d.is_finite() {
                return Err(NtnError::config("noma.data_bits", format!("payload {d} must be positive")));
            }
        }
        positive("noma.uav_altitude_m", n.uav_altitude_m)?;
        positive("noma.area_radius_m", n.area_radius_m)?;
        positive("noma.carrier_hz", n.carrier_hz)?;
        positive("noma.path_loss_exponent", n.path_loss_exponent)?;
        finite("noma.noise_psd_dbm_hz", n.noise_psd_dbm_hz)?;
        finite("noma.noise_figure_db", n.noise_figure_db)?;
        if n.k_min == 0 || n.k_min > n.k_max {
            return Err(NtnError::config("noma.k_min", "need 1 <= k_min <= k_max"));
        }
        if n.k_max > n.n_ues || n.k_max > n.n_subcarriers {
            return Err(NtnError::config("noma.k_max", "cannot exceed the UE or subcarrier count"));
        }
        if !(n.elbow_threshold > 0.0 && n.elbow_threshold < 1.0) {
            return Err(NtnError::config("noma.elbow_threshold", "must lie in (0, 1)"));
        }
        if !(n.f_test_alpha > 0.0 && n.f_test_alpha < 1.0) {
            return Err(NtnError::config("noma.f_test_alpha", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    load_config_with(path, &[])
}

pub fn load_config_with(path: &Path, overrides: &[(String, String)]) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| NtnError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if overrides.is_empty() {
        ScenarioConfig::from_toml_str(&text, path)
    } else {
        ScenarioConfig::from_toml_str_with(&text, path, overrides)
    }
}

fn parse_error(text: &str, origin: &Path, e: &toml::de::Error) -> NtnError {
    let line = e.span().map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1);
    NtnError::Parse {
        path: origin.to_path_buf(),
        line,
        message: e.message().to_string(),
    }
}

/// Interprets a command-line value as the most specific TOML scalar, or a
/// list when it is written in brackets.
fn parse_scalar(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&wrapped) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_dotted(doc: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| NtnError::config(key, "empty parameter name"))?;
    let mut table = doc;
    for p in parts {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| NtnError::config(key, format!("`{p}` is not a section")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        ScenarioConfig::from_toml_str(text, Path::new("test.cfg"))
    }

    #[test]
    fn minimal_leo_file_takes_reference_defaults() {
        let cfg = parse("experiment = \"leo_beamforming\"\n").unwrap();
        assert_eq!(cfg.leo.power_dbw, 38.0);
        assert_eq!(cfg.leo.carrier_hz, 20e9);
        assert_eq!(cfg.leo.bandwidth_hz, 400e6);
        assert_eq!(cfg.geometry.altitude_km, 600.0);
        assert_eq!(cfg.geometry.user_min_elevation_deg, 30.0);
        assert_eq!(cfg.geometry.gateway_min_elevation_deg, 10.0);
        assert_eq!(cfg.array.n_elements, 256);
        assert!((cfg.leo.total_power_w() - 6309.573).abs() < 1e-3);
    }

    #[test]
    fn minimal_uav_file_takes_reference_defaults() {
        let cfg = parse("experiment = \"uav_noma_ee\"").unwrap();
        assert_eq!(cfg.noma.n_ues, 70);
        assert_eq!(cfg.noma.n_subcarriers, 128);
        assert_eq!(cfg.noma.bandwidth_hz, 10e6);
        assert_eq!(cfg.noma.max_ue_power_w, 0.2);
        assert_eq!(cfg.noma.circuit_power_w, 1.4002);
    }

    #[test]
    fn non_finite_power_rejected() {
        let err = parse("experiment = \"leo_beamforming\"\n[leo]\npower_dbw = -inf\n").unwrap_err();
        match err {
            NtnError::Config { field, .. } => assert_eq!(field, "leo.power_dbw"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_key_named() {
        let err = parse("experiment = \"leo_beamforming\"\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
        let err = parse("experiment = \"leo_beamforming\"\n[leo]\nfoo = 1\n").unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
    }

    #[test]
    fn parse_error_reports_line() {
        let err = parse("experiment = \"leo_beamforming\"\n\n[leo]\npower_dbw = = 3\n").unwrap_err();
        match err {
            NtnError::Parse { line, .. } => assert_eq!(line, Some(4)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn schemes_and_modes_parse() {
        let cfg = parse(
            "experiment = \"leo_beamforming\"\n[leo]\nschemes = [\"FR3\", \"LB_MMSE\", \"ZF\"]\nchannel_mode = \"clear_sky\"\n",
        )
        .unwrap();
        assert_eq!(cfg.leo.schemes, vec![Scheme::Fr3, Scheme::LbMmse, Scheme::Zf]);
        assert_eq!(cfg.leo.channel_mode, ChannelMode::ClearSky);
        assert!(parse("experiment = \"leo_beamforming\"\n[leo]\nschemes = [\"FR5\"]\n").is_err());
    }

    #[test]
    fn overrides_replace_dotted_keys() {
        let cfg = ScenarioConfig::from_toml_str_with(
            "experiment = \"leo_beamforming\"\n",
            Path::new("x"),
            &[
                ("leo.n_users".into(), "12".into()),
                ("leo.channel_mode".into(), "clear_sky".into()),
                ("n_drops".into(), "3".into()),
                ("leo.schemes".into(), "[\"MMSE\"]".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.leo.n_users, 12);
        assert_eq!(cfg.leo.channel_mode, ChannelMode::ClearSky);
        assert_eq!(cfg.n_drops, 3);
        assert_eq!(cfg.leo.schemes, vec![Scheme::Mmse]);
    }

    #[test]
    fn invariant_violations_name_the_field() {
        for (doc, field) in [
            ("[leo]\nn_users = 0", "leo.n_users"),
            ("[leo]\nn_users = 300", "leo.n_users"),
            ("[noma]\ndata_bits = []", "noma.data_bits"),
            ("[noma]\nk_max = 200", "noma.k_max"),
            ("n_drops = 0", "n_drops"),
        ] {
            let err = parse(&format!("experiment = \"leo_beamforming\"\n{doc}\n")).unwrap_err();
            assert!(err.to_string().contains(field), "{doc}: {err}");
        }
    }
}
