use std::path::Path;

use ntnsim_core::scenario::{load_config, ChannelMode, Experiment, Scheme};

fn shipped(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn leo_config_parses_to_the_defaults() {
    let cfg = load_config(&shipped("leo_fig4.cfg")).unwrap();
    assert_eq!(cfg.experiment, Experiment::LeoBeamforming);
    assert_eq!(cfg.n_drops, 200);
    assert_eq!(cfg.array.n_elements, 256);
    assert_eq!(cfg.leo.n_users, 50);
    assert_eq!(cfg.leo.channel_mode, ChannelMode::Tgpp);
    assert_eq!(cfg.leo.schemes, vec![Scheme::Fr3, Scheme::Fr4, Scheme::Mmse, Scheme::LbMmse]);
    assert_eq!(cfg.leo.power_dbw, 38.0);
}

#[test]
fn uav_config_parses() {
    let cfg = load_config(&shipped("uav_fig3.cfg")).unwrap();
    assert_eq!(cfg.experiment, Experiment::UavNomaEe);
    assert_eq!(cfg.noma.n_ues, 70);
    assert_eq!(cfg.noma.n_subcarriers, 128);
    assert_eq!(cfg.noma.data_bits.len(), 8);
    assert!(!cfg.noma.fading);
}
