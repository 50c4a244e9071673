use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{NtnError, Result};

use super::{ChannelMode, ResultRecord, Scheme};

pub const RESULT_CSV_HEADER: &str =
    "drop_id,scheme,channel_mode,system_capacity_bps,mean_sinr_db,mean_spectral_efficiency,seed";

pub fn records_to_csv(records: &[ResultRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(RESULT_CSV_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.drop_id,
            r.scheme.as_str(),
            r.channel_mode.as_str(),
            r.system_capacity_bps,
            r.mean_sinr_db,
            r.mean_spectral_efficiency,
            r.seed
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeStats {
    pub scheme: Scheme,
    pub channel_mode: ChannelMode,
    pub n: usize,
    pub flagged: usize,
    pub mean_capacity_bps: f64,
    pub std_capacity_bps: f64,
    pub mean_spectral_efficiency: f64,
    pub mean_sinr_db: f64,
}

/// `(C_a − C_b) / C_b` between scheme means within one channel mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeGain {
    pub channel_mode: ChannelMode,
    pub scheme: Scheme,
    pub baseline: Scheme,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub stats: Vec<SchemeStats>,
    pub gains: Vec<RelativeGain>,
}

impl Summary {
    pub fn stats_for(&self, scheme: Scheme, mode: ChannelMode) -> Option<&SchemeStats> {
        self.stats.iter().find(|s| s.scheme == scheme && s.channel_mode == mode)
    }

    pub fn gain(&self, scheme: Scheme, baseline: Scheme, mode: ChannelMode) -> Option<f64> {
        self.gains
            .iter()
            .find(|g| g.scheme == scheme && g.baseline == baseline && g.channel_mode == mode)
            .map(|g| g.gain)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Per-scheme statistics over unflagged records, plus every ordered pair of
/// relative gains.
pub fn summarize(records: &[ResultRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(NtnError::Contract("no records to summarise".into()));
    }
    let mut groups: BTreeMap<(ChannelMode, Scheme), Vec<&ResultRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.channel_mode, r.scheme)).or_default().push(r);
    }
    let mut stats = Vec::new();
    for ((mode, scheme), rs) in &groups {
        let ok: Vec<&&ResultRecord> = rs.iter().filter(|r| !r.is_flagged()).collect();
        let caps: Vec<f64> = ok.iter().map(|r| r.system_capacity_bps).collect();
        let (mean, std) = mean_std(&caps);
        let se: Vec<f64> = ok.iter().map(|r| r.mean_spectral_efficiency).collect();
        let sinr: Vec<f64> = ok.iter().map(|r| r.mean_sinr_db).collect();
        stats.push(SchemeStats {
            scheme: *scheme,
            channel_mode: *mode,
            n: ok.len(),
            flagged: rs.len() - ok.len(),
            mean_capacity_bps: mean,
            std_capacity_bps: std,
            mean_spectral_efficiency: mean_std(&se).0,
            mean_sinr_db: mean_std(&sinr).0,
        });
    }
    let mut gains = Vec::new();
    for a in &stats {
        for b in &stats {
            if a.channel_mode == b.channel_mode && a.scheme != b.scheme {
                gains.push(RelativeGain {
                    channel_mode: a.channel_mode,
                    scheme: a.scheme,
                    baseline: b.scheme,
                    gain: (a.mean_capacity_bps - b.mean_capacity_bps) / b.mean_capacity_bps,
                });
            }
        }
    }
    Ok(Summary { stats, gains })
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:<8} {:>6} {:>14} {:>14} {:>10} {:>10}",
            "mode", "scheme", "drops", "mean [Gbps]", "std [Gbps]", "SE [b/Hz]", "SINR [dB]"
        )?;
        for s in &self.stats {
            writeln!(
                f,
                "{:<10} {:<8} {:>6} {:>14.3} {:>14.3} {:>10.3} {:>10.2}{}",
                s.channel_mode.as_str(),
                s.scheme.as_str(),
                s.n,
                s.mean_capacity_bps / 1e9,
                s.std_capacity_bps / 1e9,
                s.mean_spectral_efficiency,
                s.mean_sinr_db,
                if s.flagged > 0 { format!("  ({} flagged)", s.flagged) } else { String::new() }
            )?;
        }
        writeln!(f, "relative gains (C_a - C_b) / C_b:")?;
        for g in &self.gains {
            if g.scheme.is_user_centric() && !g.baseline.is_user_centric() || g.scheme == Scheme::LbMmse {
                writeln!(
                    f,
                    "  {:<10} {:>8} vs {:<8} {:>+9.1}%",
                    g.channel_mode.as_str(),
                    g.scheme.as_str(),
                    g.baseline.as_str(),
                    100.0 * g.gain
                )?;
            }
        }
        Ok(())
    }
}

/// Writes the CSV to `path` and returns the summary of `records`.
pub fn emit_results(records: &[ResultRecord], path: &Path) -> Result<Summary> {
    let summary = summarize(records)?;
    std::fs::write(path, records_to_csv(records)).map_err(|source| NtnError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(drop_id: usize, scheme: Scheme, cap: f64) -> ResultRecord {
        ResultRecord {
            drop_id,
            scheme,
            channel_mode: ChannelMode::Tgpp,
            system_capacity_bps: cap,
            mean_sinr_db: 3.0,
            mean_spectral_efficiency: 2.0,
            seed: 99,
            error: None,
        }
    }

    #[test]
    fn empty_records_rejected() {
        assert!(matches!(summarize(&[]), Err(NtnError::Contract(_))));
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_results(&[], &dir.path().join("x.csv")).is_err());
    }

    #[test]
    fn header_and_column_order() {
        let csv = records_to_csv(&[rec(0, Scheme::Fr3, 1.5e9)]);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "drop_id,scheme,channel_mode,system_capacity_bps,mean_sinr_db,mean_spectral_efficiency,seed"
        );
        assert_eq!(lines.next().unwrap(), "0,FR3,tgpp,1500000000,3,2,99");
    }

    #[test]
    fn gains_recomputed_from_rows() {
        let records = vec![
            rec(0, Scheme::Mmse, 3.0e9),
            rec(1, Scheme::Mmse, 5.0e9),
            rec(0, Scheme::Fr3, 1.0e9),
            rec(1, Scheme::Fr3, 2.0e9),
        ];
        let s = summarize(&records).unwrap();
        let g = s.gain(Scheme::Mmse, Scheme::Fr3, ChannelMode::Tgpp).unwrap();
        assert!((g - (4.0e9 - 1.5e9) / 1.5e9).abs() < 1e-9);
        let st = s.stats_for(Scheme::Mmse, ChannelMode::Tgpp).unwrap();
        assert!((st.std_capacity_bps - 2f64.sqrt() * 1e9).abs() < 1e-3);
    }

    #[test]
    fn flagged_records_excluded_from_stats() {
        let mut bad = rec(2, Scheme::Fr3, f64::NAN);
        bad.error = Some("boom".into());
        let s = summarize(&[rec(0, Scheme::Fr3, 1.0), bad]).unwrap();
        let st = s.stats_for(Scheme::Fr3, ChannelMode::Tgpp).unwrap();
        assert_eq!((st.n, st.flagged), (1, 1));
        assert_eq!(st.mean_capacity_bps, 1.0);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_results(&[rec(0, Scheme::Fr3, 1.0)], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(matches!(err, NtnError::Io { .. }));
    }
}
