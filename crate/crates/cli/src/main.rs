use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ntnsim_core::array::{generate_beam_lattice, ReuseScheme};
use ntnsim_core::geometry::{report, GeometryContext};
use ntnsim_core::scenario::leo::{draw_channels, LeoSetup};
use ntnsim_core::scenario::{execute, load_config_with, sweep, sweep_summary_csv, uav_table, Experiment, Outcome};
use ntnsim_core::{seed, NtnError};

#[derive(Parser)]
#[command(name = "ntnsim", version, about = "LEO multibeam and UAV NOMA simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a configuration file.
    Run(RunArgs),
    /// Re-run a configuration once per value of one parameter.
    Sweep(SweepArgs),
    /// Print slant ranges, delays, the misalignment interval and Doppler.
    Geometry(GeometryArgs),
    /// Write the beam lattice and its reuse colouring as CSV.
    Lattice(LatticeArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    /// Result CSV; defaults to the config's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override any config key, e.g. `--set leo.n_users=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Also write the drop-0 channel matrix (LEO only).
    #[arg(long)]
    channel_dump: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dotted config key, e.g. `leo.n_users` or `noma.circuit_power_w`.
    #[arg(long)]
    param: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<String>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GeometryArgs {
    /// Orbit altitude [km].
    #[arg(long, default_value_t = 600.0)]
    altitude: f64,
    /// Minimum user elevation [deg].
    #[arg(long, default_value_t = 30.0)]
    user_elev: f64,
    /// Minimum gateway elevation [deg].
    #[arg(long, default_value_t = 10.0)]
    gw_elev: f64,
    #[arg(long, default_value_t = 20e9)]
    carrier_hz: f64,
    #[arg(long, default_value_t = 6371.0)]
    earth_radius: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reuse {
    #[value(name = "1")]
    Full,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
}

#[derive(Args)]
struct LatticeArgs {
    /// Take coverage, beam count and carrier from this config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "3")]
    reuse: Reuse,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status 2 for bad input, 3 for failures while simulating.
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn classify(e: NtnError) -> Self {
        match e {
            NtnError::Config { .. } | NtnError::Parse { .. } | NtnError::Io { .. } => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn runtime(e: NtnError) -> Failure {
    Failure::Runtime(e.to_string())
}

fn parse_sets(set: &[String]) -> Result<Vec<(String, String)>, Failure> {
    set.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Failure::Config(format!("--set expects KEY=VALUE, got `{kv}`")))
        })
        .collect()
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Runtime(format!("cannot write to stdout: {e}"))),
    }
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let mut ov = parse_sets(&a.set)?;
    if let Some(s) = a.seed {
        ov.push(("master_seed".into(), s.to_string()));
    }
    if let Some(d) = a.drops {
        ov.push(("n_drops".into(), d.to_string()));
    }
    if let Some(w) = a.workers {
        ov.push(("workers".into(), w.to_string()));
    }
    let cfg = load_config_with(&a.config, &ov).map_err(Failure::classify)?;

    if let Some(dump) = &a.channel_dump {
        if cfg.experiment != Experiment::LeoBeamforming {
            return Err(Failure::Config("--channel-dump needs a leo_beamforming config".into()));
        }
        let setup = LeoSetup::new(&cfg).map_err(Failure::classify)?;
        let ch = draw_channels(&cfg, &setup, seed::drop_seed(cfg.master_seed, 0)).map_err(runtime)?;
        write_out(Some(dump), &ch.at_transmission.to_csv())?;
    }

    let outcome = execute(&cfg).map_err(Failure::classify)?;
    let out = a.out.or_else(|| cfg.output.as_ref().map(PathBuf::from));
    write_out(out.as_deref(), &outcome.to_csv())?;
    match &outcome {
        Outcome::Leo { summary, .. } => eprint!("{summary}"),
        Outcome::Uav(rows) => eprint!("{}", uav_table(rows)),
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let ov = parse_sets(&a.set)?;
    let entries = sweep(&a.config, &ov, &a.param, &a.values).map_err(Failure::classify)?;
    write_out(a.out.as_deref(), &sweep_summary_csv(&a.param, &entries))
}

fn cmd_geometry(a: GeometryArgs) -> Result<(), Failure> {
    let ctx = GeometryContext {
        earth_radius_km: a.earth_radius,
        altitude_km: a.altitude,
        user_min_elevation_deg: a.user_elev,
        gateway_min_elevation_deg: a.gw_elev,
    };
    let r = report(&ctx, a.carrier_hz).map_err(|e| Failure::Config(e.to_string()))?;
    println!("altitude                {:.1} km", a.altitude);
    println!(
        "user link    (el {:>4.1}) slant range {:>9.2} km   one-way delay {:.3} ms",
        r.user_link.elevation_deg, r.user_link.slant_range_km, r.user_link.one_way_delay_ms
    );
    println!(
        "feeder link  (el {:>4.1}) slant range {:>9.2} km   one-way delay {:.3} ms",
        r.feeder_link.elevation_deg, r.feeder_link.slant_range_km, r.feeder_link.one_way_delay_ms
    );
    println!("misalignment dt         {:.3} ms", r.misalignment_ms);
    println!("orbital speed           {:.3} km/s", r.orbital_speed_km_s);
    println!("along-track shift       {:.1} m", r.along_track_shift_m);
    println!("max Doppler @ {:.2} GHz {:.1} kHz", a.carrier_hz / 1e9, r.max_doppler_hz / 1e3);
    Ok(())
}

fn cmd_lattice(a: LatticeArgs) -> Result<(), Failure> {
    let cfg = match &a.config {
        Some(p) => load_config_with(p, &[]).map_err(Failure::classify)?,
        None => ntnsim_core::scenario::ScenarioConfig::new(Experiment::LeoBeamforming),
    };
    let scheme = match a.reuse {
        Reuse::Full => ReuseScheme::Full,
        Reuse::Three => ReuseScheme::Fr3,
        Reuse::Four => ReuseScheme::Fr4,
    };
    let lattice = generate_beam_lattice(cfg.leo.coverage_half_angle_deg, cfg.leo.n_beams, scheme, cfg.leo.carrier_hz)
        .map_err(Failure::classify)?;
    write_out(a.out.as_deref(), &lattice.to_csv())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Geometry(a) => cmd_geometry(a),
        Command::Lattice(a) => cmd_lattice(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("ntnsim: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("ntnsim: {msg}");
            ExitCode::from(3)
        }
    }
}
