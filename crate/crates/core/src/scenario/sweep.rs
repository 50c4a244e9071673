use std::fmt::Write as _;
use std::path::Path;

use crate::error::{NtnError, Result};
use crate::noma::{sweep_to_csv, SweepPoint};

use super::config::{load_config_with, Experiment, ScenarioConfig};
use super::report::{summarize, Summary};
use super::{run, uav::run_noma, ResultRecord};

/// Result of running either experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Leo { records: Vec<ResultRecord>, summary: Summary },
    Uav(Vec<SweepPoint>),
}

impl Outcome {
    /// The experiment's per-row CSV.
    pub fn to_csv(&self) -> String {
        match self {
            Outcome::Leo { records, .. } => super::records_to_csv(records),
            Outcome::Uav(rows) => sweep_to_csv(rows),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| NtnError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn execute(cfg: &ScenarioConfig) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::LeoBeamforming => {
            let records = run(cfg)?;
            let summary = summarize(&records)?;
            Ok(Outcome::Leo { records, summary })
        }
        Experiment::UavNomaEe => Ok(Outcome::Uav(run_noma(cfg)?)),
    }
}

pub fn uav_table(rows: &[SweepPoint]) -> String {
    let mut s = format!("{:>14} {:<8} {:>16} {:>4} {:>9}\n", "data [bit]", "method", "EE [bit/J]", "k", "feasible");
    for r in rows {
        let _ = writeln!(
            s,
            "{:>14} {:<8} {:>16.6e} {:>4} {:>9}",
            r.data_size_bits, r.method, r.ee_bits_per_joule, r.k_selected, r.feasible
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub value: String,
    pub outcome: Outcome,
}

/// Re-runs the configuration at `path` once per value of the dotted
/// parameter `param`.
pub fn sweep(path: &Path, base_overrides: &[(String, String)], param: &str, values: &[String]) -> Result<Vec<SweepEntry>> {
    if param == "experiment" {
        return Err(NtnError::config(param, "the experiment itself cannot be swept"));
    }
    if values.is_empty() {
        return Err(NtnError::config(param, "no sweep values given"));
    }
    values
        .iter()
        .map(|v| {
            let mut ov = base_overrides.to_vec();
            ov.push((param.to_string(), v.clone()));
            let cfg = load_config_with(path, &ov)?;
            Ok(SweepEntry {
                value: v.clone(),
                outcome: execute(&cfg)?,
            })
        })
        .collect()
}

pub const LEO_SWEEP_CSV_HEADER: &str =
    "param,value,scheme,channel_mode,mean_capacity_bps,std_capacity_bps,mean_spectral_efficiency,mean_sinr_db";
pub const UAV_SWEEP_CSV_HEADER: &str = "param,value,data_size_bits,method,ee_bits_per_joule,k_selected,feasible_flag";

/// One summary line per scheme (LEO) or sweep point (UAV) for every value.
pub fn sweep_summary_csv(param: &str, entries: &[SweepEntry]) -> String {
    let mut s = String::new();
    let header = match entries.first().map(|e| &e.outcome) {
        Some(Outcome::Uav(_)) => UAV_SWEEP_CSV_HEADER,
        _ => LEO_SWEEP_CSV_HEADER,
    };
    s.push_str(header);
    s.push('\n');
    for e in entries {
        match &e.outcome {
            Outcome::Leo { summary, .. } => {
                for st in &summary.stats {
                    let _ = writeln!(
                        s,
                        "{param},{},{},{},{},{},{},{}",
                        e.value,
                        st.scheme.as_str(),
                        st.channel_mode.as_str(),
                        st.mean_capacity_bps,
                        st.std_capacity_bps,
                        st.mean_spectral_efficiency,
                        st.mean_sinr_db
                    );
                }
            }
            Outcome::Uav(rows) => {
                for r in rows {
                    let _ = writeln!(
                        s,
                        "{param},{},{},{},{},{},{}",
                        e.value,
                        r.data_size_bits,
                        r.method,
                        r.ee_bits_per_joule,
                        r.k_selected,
                        u8::from(r.feasible)
                    );
                }
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps_a_dotted_parameter() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.cfg");
        std::fs::write(&path, "experiment = \"leo_beamforming\"\nn_drops = 2\n[leo]\nn_users = 6\nschemes = [\"FR3\", \"MMSE\"]\n").unwrap();
        let values = vec!["4".to_string(), "8".to_string()];
        let entries = sweep(&path, &[], "leo.n_users", &values).unwrap();
        assert_eq!(entries.len(), 2);
        let csv = sweep_summary_csv("leo.n_users", &entries);
        assert!(csv.starts_with(LEO_SWEEP_CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + 2 * 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("leo.n_users,4,FR3,tgpp,"));
    }

    #[test]
    fn bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.cfg");
        std::fs::write(&path, "experiment = \"leo_beamforming\"\n").unwrap();
        let err = sweep(&path, &[], "leo.n_users", &["0".to_string()]).unwrap_err();
        assert!(matches!(err, NtnError::Config { .. }), "{err:?}");
        assert!(sweep(&path, &[], "experiment", &["x".to_string()]).is_err());
        assert!(matches!(
            sweep(&path, &[], "leo.nonexistent", &["1".to_string()]).unwrap_err(),
            NtnError::Parse { .. }
        ));
    }
}
