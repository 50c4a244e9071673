//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ntnsim_core::array::{generate_beam_lattice, ArrayGeometry, Direction, ReuseScheme};
use ntnsim_core::channel::{ChannelKind, ChannelMatrix};
use ntnsim_core::geometry::{misalignment_interval, slant_range, GeometryContext};
use ntnsim_core::noma::{allocate_subcarriers, iterative_power_allocation, kmeans_cluster, sic_rates, Method, UplinkScenario};
use ntnsim_core::precoding::{normalize_max_power, zf_precoder};
use ntnsim_core::scenario::leo::{draw_channels, evaluate_scheme, LeoSetup};
use ntnsim_core::scenario::{load_config, records_to_csv, run, run_noma, summarize, ChannelMode, ScenarioConfig, Scheme};
use ntnsim_core::seed::drop_seed;

const C_KM_S: f64 = 299_792.458;

type Verdict = Result<String, String>;

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn leo(overrides: &[(&str, &str)]) -> ScenarioConfig {
    let ov: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ScenarioConfig::from_toml_str_with("experiment = \"leo_beamforming\"", Path::new("acceptance"), &ov)
        .expect("acceptance config must be valid")
}

fn check(cond: bool, detail: String) -> Verdict {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// Positive root of d² + 2Rd·sin(e) − ((R+h)² − R²) = 0.
fn slant_oracle(r: f64, h: f64, elev_deg: f64) -> f64 {
    let s = elev_deg.to_radians().sin();
    -r * s + ((r * s).powi(2) + h * h + 2.0 * r * h).sqrt()
}

fn geometry_golden() -> Verdict {
    let ctx = GeometryContext::default();
    let user = slant_range(&ctx, 30.0).map_err(|e| e.to_string())?;
    let feeder = slant_range(&ctx, 10.0).map_err(|e| e.to_string())?;
    let dt = misalignment_interval(&ctx).map_err(|e| e.to_string())?;
    let (ou, of) = (slant_oracle(6371.0, 600.0, 30.0), slant_oracle(6371.0, 600.0, 10.0));
    let dt_oracle = 1e3 * (ou + 2.0 * of) / C_KM_S;
    let ok = (16.2..=17.2).contains(&dt)
        && (user - 1075.1).abs() <= 0.5
        && (feeder - 1931.7).abs() <= 0.5
        && (user - ou).abs() < 1e-6
        && (feeder - of).abs() < 1e-6
        && (dt - dt_oracle).abs() < 1e-9;
    check(
        ok,
        format!("dt = {dt:.3} ms (oracle {dt_oracle:.3}), user {user:.2} km, feeder {feeder:.2} km"),
    )
}

fn capacity_ordering() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    for mode in ["clear_sky", "tgpp"] {
        let cfg = leo(&[("leo.channel_mode", mode), ("n_drops", "200")]);
        let recs = run(&cfg).map_err(|e| e.to_string())?;
        let s = summarize(&recs).map_err(|e| e.to_string())?;
        let m = if mode == "tgpp" { ChannelMode::Tgpp } else { ChannelMode::ClearSky };
        let cap = |sch| s.stats_for(sch, m).map(|x| x.mean_capacity_bps).unwrap_or(f64::NAN);
        let (fr3, fr4, mmse, lb) = (cap(Scheme::Fr3), cap(Scheme::Fr4), cap(Scheme::Mmse), cap(Scheme::LbMmse));
        let best = mmse.max(lb);
        let (g3, g4) = (best / fr3 - 1.0, best / fr4 - 1.0);
        ok &= mmse.min(lb) > fr3 && fr3 > fr4 && g3 >= 1.0 && g4 >= 1.5;
        lines.push(format!(
            "{mode}: MMSE {:.1} LB {:.1} FR3 {:.1} FR4 {:.1} Gbps, gain +{:.0}%/+{:.0}%",
            mmse / 1e9,
            lb / 1e9,
            fr3 / 1e9,
            fr4 / 1e9,
            100.0 * g3,
            100.0 * g4
        ));
    }
    check(ok, lines.join("; "))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn per_drop(cfg: &ScenarioConfig, scheme: Scheme) -> Result<Vec<f64>, String> {
    let recs = run(cfg).map_err(|e| e.to_string())?;
    if let Some(r) = recs.iter().find(|r| r.is_flagged()) {
        return Err(format!("drop {} flagged: {:?}", r.drop_id, r.error));
    }
    Ok(recs.iter().filter(|r| r.scheme == scheme).map(|r| r.system_capacity_bps).collect())
}

fn lb_versus_csi() -> Verdict {
    let schemes = "[\"MMSE\", \"LB_MMSE\"]";
    let tgpp = leo(&[("n_drops", "200"), ("leo.misalignment_ms", "16.7"), ("leo.schemes", schemes)]);
    let (mmse, lb) = (per_drop(&tgpp, Scheme::Mmse)?, per_drop(&tgpp, Scheme::LbMmse)?);
    let (m_mmse, m_lb) = (mean(&mmse), mean(&lb));

    let clear = leo(&[
        ("n_drops", "200"),
        ("leo.channel_mode", "clear_sky"),
        ("leo.misalignment_ms", "0"),
        ("leo.location_error_m", "0"),
        ("leo.schemes", schemes),
    ]);
    let (cm, cl) = (per_drop(&clear, Scheme::Mmse)?, per_drop(&clear, Scheme::LbMmse)?);
    let worst = cm.iter().zip(&cl).map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max);
    check(
        m_lb > m_mmse && worst <= 1e-6,
        format!(
            "tgpp dt=16.7 ms: LB {:.3} > MMSE {:.3} Gbps; clear-sky dt=0 worst relative gap {worst:.1e}",
            m_lb / 1e9,
            m_mmse / 1e9
        ),
    )
}

fn se_ordering() -> Verdict {
    let cfg = leo(&[("n_drops", "200"), ("leo.schemes", "[\"FR3\", \"MMSE\"]")]);
    let recs = run(&cfg).map_err(|e| e.to_string())?;
    let s = summarize(&recs).map_err(|e| e.to_string())?;
    let fr3 = s.stats_for(Scheme::Fr3, ChannelMode::Tgpp).ok_or("missing FR3")?;
    let mmse = s.stats_for(Scheme::Mmse, ChannelMode::Tgpp).ok_or("missing MMSE")?;
    check(
        fr3.mean_spectral_efficiency > mmse.mean_spectral_efficiency && mmse.mean_capacity_bps > fr3.mean_capacity_bps,
        format!(
            "SE FR3 {:.3} > MMSE {:.3} b/s/Hz; capacity MMSE {:.1} > FR3 {:.1} Gbps",
            fr3.mean_spectral_efficiency,
            mmse.mean_spectral_efficiency,
            mmse.mean_capacity_bps / 1e9,
            fr3.mean_capacity_bps / 1e9
        ),
    )
}

// Same drops evaluated twice: CSI gathered Δt before the burst, and CSI
// gathered at the burst epoch itself (Δt = 0).
fn misalignment_degradation() -> Verdict {
    let cfg = leo(&[("n_drops", "200"), ("leo.misalignment_ms", "16.7")]);
    let setup = LeoSetup::new(&cfg).map_err(|e| e.to_string())?;
    let (mut stale, mut fresh) = (Vec::new(), Vec::new());
    for d in 0..cfg.n_drops as u64 {
        let s = drop_seed(cfg.master_seed, d);
        let ch = draw_channels(&cfg, &setup, s).map_err(|e| e.to_string())?;
        stale.push(evaluate_scheme(&cfg, &setup, &ch, Scheme::Mmse, s).map_err(|e| e.to_string())?.system_capacity_bps);
        let mut now = ch.clone();
        now.at_estimation = ch.at_transmission.clone();
        fresh.push(evaluate_scheme(&cfg, &setup, &now, Scheme::Mmse, s).map_err(|e| e.to_string())?.system_capacity_bps);
    }
    let wins = fresh.iter().zip(&stale).filter(|(f, s)| f > s).count();
    let (ms, mf) = (mean(&stale), mean(&fresh));
    check(
        ms < mf,
        format!(
            "MMSE dt=16.7 ms {:.3} < dt=0 {:.3} Gbps over {} drops (dt=0 better in {wins})",
            ms / 1e9,
            mf / 1e9,
            stale.len()
        ),
    )
}

fn noma_trends() -> Verdict {
    let cfg = load_config(&config_dir().join("uav_fig3.cfg")).map_err(|e| e.to_string())?;
    let rows = run_noma(&cfg).map_err(|e| e.to_string())?;
    let ai: Vec<_> = rows.iter().filter(|r| r.method == Method::UavAi).collect();
    let gr: Vec<_> = rows.iter().filter(|r| r.method == Method::Greedy).collect();
    let dominates = ai.iter().zip(&gr).all(|(a, g)| a.feasible && (!g.feasible || a.ee_bits_per_joule >= g.ee_bits_per_joule));
    let monotone = ai.windows(2).all(|w| w[1].ee_bits_per_joule <= w[0].ee_bits_per_joule);
    let first = (ai[0].ee_bits_per_joule, gr[0].ee_bits_per_joule);
    let last = (ai[ai.len() - 1].ee_bits_per_joule, gr[gr.len() - 1].ee_bits_per_joule);
    check(
        dominates && monotone,
        format!(
            "{} sizes, {} drops: uav_ai {:.3e} -> {:.3e}, greedy {:.3e} -> {:.3e} bit/J",
            ai.len(),
            cfg.n_drops,
            first.0,
            last.0,
            first.1,
            last.1
        ),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn prop_mpc() -> Result<(), String> {
    runner(64)
        .run(&(1usize..=64, 1usize..=256, 1e-3f64..1e4, any::<u64>()), |(k, n, p, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw = random_matrix(&mut rng, n, k);
            let w = normalize_max_power(raw.clone(), p).unwrap();
            prop_assert!(w.scale > 0.0);
            for (a, b) in w.entries.iter().zip(raw.iter()) {
                prop_assert!((a - b * w.scale).norm() <= 1e-12 * (1.0 + a.norm()));
            }
            let cap = p / n as f64;
            let feeds: Vec<f64> = w.entries.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect();
            let hottest = feeds.iter().copied().fold(0.0, f64::max);
            prop_assert!(((hottest - cap) / cap).abs() <= 1e-9);
            prop_assert!(feeds.iter().all(|&f| f <= cap * (1.0 + 1e-9)));
            Ok(())
        })
        .map_err(|e| format!("MPC: {e}"))
}

fn prop_zf() -> Result<(), String> {
    runner(24)
        .run(&(1usize..=64, 0usize..=192, any::<u64>()), |(k, extra, seed)| {
            let n = (k + extra).min(256);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = ChannelMatrix {
                entries: random_matrix(&mut rng, k, n),
                kind: ChannelKind::CsiEstimate,
                carrier_hz: 20e9,
                bandwidth_hz: 400e6,
                noise_power_w: vec![1e-3; k],
            };
            let w = zf_precoder(&h, 1.0).unwrap();
            let g = &h.entries * &w.entries;
            let diag = (0..k).map(|i| g[(i, i)].norm()).fold(0.0, f64::max);
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        prop_assert!(g[(i, j)].norm() < 1e-8 * diag, "({i},{j}) = {}", g[(i, j)].norm());
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| format!("ZF: {e}"))?;
    // The largest size once more, explicitly.
    let mut rng = ChaCha8Rng::seed_from_u64(64256);
    let h = ChannelMatrix {
        entries: random_matrix(&mut rng, 64, 256),
        kind: ChannelKind::CsiEstimate,
        carrier_hz: 20e9,
        bandwidth_hz: 400e6,
        noise_power_w: vec![1e-3; 64],
    };
    let w = zf_precoder(&h, 1.0).map_err(|e| e.to_string())?;
    let g = &h.entries * &w.entries;
    let diag = (0..64).map(|i| g[(i, i)].norm()).fold(0.0, f64::max);
    let off = (0..64)
        .flat_map(|i| (0..64).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| g[(i, j)].norm())
        .fold(0.0, f64::max);
    if off < 1e-8 * diag {
        Ok(())
    } else {
        Err(format!("ZF 64x256: off-diagonal {off:e} vs diagonal {diag:e}"))
    }
}

fn prop_steering() -> Result<(), String> {
    runner(128)
        .run(&(1usize..=32, 1usize..=32, -0.7f64..0.7, -0.7f64..0.7), |(rows, cols, u, v)| {
            let a = ArrayGeometry::new(rows, cols).unwrap();
            let sv = a.steering_vector(Direction::new(u, v).unwrap()).unwrap();
            prop_assert_eq!(sv.len(), rows * cols);
            prop_assert!(sv.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
            let norm = sv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((norm - ((rows * cols) as f64).sqrt()).abs() < 1e-9);
            Ok(())
        })
        .map_err(|e| format!("steering: {e}"))
}

fn prop_colouring() -> Result<(), String> {
    for scheme in [ReuseScheme::Fr3, ReuseScheme::Fr4] {
        for n in 1..=64 {
            let l = generate_beam_lattice(25.0, n, scheme, 20e9).map_err(|e| e.to_string())?;
            // Adjacency recomputed from the centres.
            for a in &l.beams {
                if a.colour >= scheme.n_colours() {
                    return Err(format!("{scheme:?} n={n}: colour {} out of range", a.colour));
                }
                for b in &l.beams {
                    let d = (a.center.u - b.center.u).hypot(a.center.v - b.center.v);
                    if a.id != b.id && d < 1.01 * l.spacing && a.colour == b.colour {
                        return Err(format!("{scheme:?} n={n}: beams {} and {} share colour", a.id, b.id));
                    }
                }
            }
        }
    }
    Ok(())
}

fn prop_sic() -> Result<(), String> {
    runner(256)
        .run(
            &(proptest::collection::vec(1e-15f64..1e-9, 1..10), 1e-16f64..1e-12, 1e3f64..1e7),
            |(received, noise, bw)| {
                let total: f64 = sic_rates(bw, noise, &received).iter().sum();
                let shared = bw * (1.0 + received.iter().sum::<f64>() / noise).log2();
                prop_assert!(((total - shared) / shared).abs() < 1e-9);
                Ok(())
            },
        )
        .map_err(|e| format!("SIC: {e}"))
}

fn prop_dinkelbach() -> Result<(), String> {
    runner(24)
        .run(&(-12.0f64..-10.0, 0.0f64..2.0, 0.05f64..0.9), |(log_gain, circuit, frac)| {
            let gain = 10f64.powf(log_gain);
            let (bw, noise, pmax) = (1e6, 1e-20 * 1e6, 0.2);
            let max_rate = bw * (1.0 + pmax * gain / noise).log2();
            let bits = frac * max_rate;
            let scenario = UplinkScenario {
                bandwidth_hz: bw,
                max_ue_power_w: pmax,
                circuit_power_w: circuit,
                frame_s: 1.0,
                data_bits_per_ue: bits,
                noise_psd_w_hz: 1e-20,
                distances_m: vec![100.0],
                gains: vec![vec![gain; 4]],
            };
            let grouping = allocate_subcarriers(&[vec![0]], 4, &scenario.gains).unwrap();
            let got = iterative_power_allocation(&grouping, &scenario).unwrap().ee_bits_per_joule;
            let steps = 100_000;
            let oracle = (1..=steps)
                .map(|i| pmax * i as f64 / steps as f64)
                .filter_map(|p| {
                    let r = bw * (1.0 + p * gain / noise).log2();
                    (r >= bits).then(|| r / (p + circuit))
                })
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((got - oracle).abs() <= 0.01 * oracle, "{got} vs {oracle}");
            Ok(())
        })
        .map_err(|e| format!("Dinkelbach: {e}"))
}

fn prop_blobs() -> Result<(), String> {
    runner(32)
        .run(&(2usize..=5, 5usize..30, any::<u64>()), |(k, per, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pts = Vec::new();
            let mut truth = Vec::new();
            for c in 0..k {
                let centre = [20.0 * c as f64, -15.0 * c as f64];
                for _ in 0..per {
                    pts.push(vec![centre[0] + rng.gen::<f64>() - 0.5, centre[1] + rng.gen::<f64>() - 0.5]);
                    truth.push(c);
                }
            }
            let part = kmeans_cluster(&pts, k, seed).unwrap();
            // Points share a cluster exactly when they share a blob.
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    prop_assert_eq!(part.assignment[i] == part.assignment[j], truth[i] == truth[j]);
                }
            }
            Ok(())
        })
        .map_err(|e| format!("blobs: {e}"))
}

fn prop_determinism() -> Result<(), String> {
    let mut cfg = leo(&[("n_drops", "8"), ("leo.n_users", "12"), ("array.n_elements", "64")]);
    cfg.workers = 1;
    let a = records_to_csv(&run(&cfg).map_err(|e| e.to_string())?);
    cfg.workers = 4;
    let b = records_to_csv(&run(&cfg).map_err(|e| e.to_string())?);
    if a != b {
        return Err("LEO CSV differs between 1 and 4 workers".into());
    }
    let mut noma = load_config(&config_dir().join("uav_fig3.cfg")).map_err(|e| e.to_string())?;
    noma.n_drops = 3;
    noma.workers = 1;
    let a = ntnsim_core::noma::sweep_to_csv(&run_noma(&noma).map_err(|e| e.to_string())?);
    noma.workers = 3;
    let b = ntnsim_core::noma::sweep_to_csv(&run_noma(&noma).map_err(|e| e.to_string())?);
    if a != b {
        return Err("NOMA CSV differs between 1 and 3 workers".into());
    }
    Ok(())
}

fn property_suites() -> Verdict {
    let suites: [(&str, fn() -> Result<(), String>); 8] = [
        ("MPC", prop_mpc),
        ("ZF", prop_zf),
        ("steering", prop_steering),
        ("colouring", prop_colouring),
        ("SIC", prop_sic),
        ("Dinkelbach", prop_dinkelbach),
        ("k-means", prop_blobs),
        ("determinism", prop_determinism),
    ];
    let mut failed = Vec::new();
    for (name, f) in suites {
        if let Err(e) = f() {
            failed.push(format!("{name}: {e}"));
        }
    }
    if failed.is_empty() {
        Ok(format!("{} suites green", suites.len()))
    } else {
        Err(failed.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 7] = [
        ("geometry golden values", geometry_golden),
        ("capacity ordering and gains", capacity_ordering),
        ("LB-MMSE vs CSI-MMSE", lb_versus_csi),
        ("spectral-efficiency ordering", se_ordering),
        ("misalignment degradation", misalignment_degradation),
        ("NOMA energy-efficiency trends", noma_trends),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let verdict = f();
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name}: {detail} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
