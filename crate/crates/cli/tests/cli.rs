use std::path::PathBuf;
use std::process::{Command, Output};

fn ntnsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntnsim"))
        .args(args)
        .output()
        .expect("failed to spawn ntnsim")
}

fn shipped(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn small_leo(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("leo.cfg");
    std::fs::write(
        &path,
        "experiment = \"leo_beamforming\"\nn_drops = 3\n[leo]\nn_users = 8\n[array]\nn_elements = 64\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn geometry_prints_the_link_budget_timings() {
    let o = ntnsim(&["geometry", "--altitude", "600", "--user-elev", "30", "--gw-elev", "10"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("1075.09 km"), "{text}");
    assert!(text.contains("1931.64 km"), "{text}");
    assert!(text.contains("16.473 ms"), "{text}");
    assert!(text.contains("Doppler"), "{text}");
}

#[test]
fn geometry_rejects_bad_elevation() {
    let o = ntnsim(&["geometry", "--user-elev", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_or_broken_config_exits_with_two() {
    assert_eq!(ntnsim(&["run", "--config", "/no/such/file.cfg"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "experiment = \"leo_beamforming\"\n[leo]\nn_users = -3\n").unwrap();
    let o = ntnsim(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let o = ntnsim(&["run", "--config", &small_leo(&dir), "--set", "leo.n_users=0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_writes_the_result_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = ntnsim(&["run", "--config", &small_leo(&dir), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "drop_id,scheme,channel_mode,system_capacity_bps,mean_sinr_db,mean_spectral_efficiency,seed"
    );
    // 3 drops x 4 schemes
    assert_eq!(lines.count(), 12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("MMSE"));
}

#[test]
fn worker_count_does_not_change_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_leo(&dir);
    let a = ntnsim(&["run", "--config", &cfg, "--workers", "1", "--seed", "5"]);
    let b = ntnsim(&["run", "--config", &cfg, "--workers", "4", "--seed", "5"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = ntnsim(&["run", "--config", &cfg, "--workers", "4", "--seed", "6"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sweep_emits_one_block_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = ntnsim(&[
        "sweep",
        "--config",
        &small_leo(&dir),
        "--param",
        "leo.n_users",
        "--values",
        "4,6",
        "--set",
        "n_drops=1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("param,value,scheme"));
    assert_eq!(text.lines().count(), 1 + 2 * 4);
}

#[test]
fn uav_run_writes_the_ee_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ee.csv");
    let o = ntnsim(&[
        "run",
        "--config",
        &shipped("uav_fig3.cfg"),
        "--drops",
        "1",
        "--set",
        "noma.n_ues=10",
        "--set",
        "noma.n_subcarriers=20",
        "--set",
        "noma.k_max=4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("data_size_bits,method,ee_bits_per_joule,k_selected,feasible_flag\n"));
    assert!(csv.contains(",uav_ai,") && csv.contains(",greedy,"));
}

#[test]
fn lattice_and_channel_dump() {
    let o = ntnsim(&["lattice", "--reuse", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("beam_id,u,v,colour\n"));
    assert_eq!(text.lines().count(), 1 + 19);

    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("h.csv");
    let o = ntnsim(&[
        "run",
        "--config",
        &small_leo(&dir),
        "--drops",
        "1",
        "--channel-dump",
        dump.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&dump).unwrap();
    assert!(csv.starts_with("user,element,re,im\n"));
    assert_eq!(csv.lines().count(), 1 + 8 * 64);
}
