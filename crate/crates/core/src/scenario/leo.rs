//! One Monte-Carlo drop of the LEO user-centric beamforming experiment:
//! ancillary information is gathered at `t0`, the precoded burst leaves the
//! satellite at `t0 + Δt` and is evaluated against the channel at that epoch.

use crate::array::{generate_beam_lattice, ArrayGeometry, BeamLattice, ReuseScheme};
use crate::channel::{
    apply_losses, build_clear_sky, draw_losses, draw_losses_after, drop_terminals, estimate_csi, infer_from_location, ChannelMatrix,
    SatelliteState, TerminalPopulation,
};
use crate::error::Result;
use crate::geometry::{misalignment_interval, GeometryContext};
use crate::precoding::{capacity, compute_sinr, fr_transmit, lb_mmse_precoder, mmse_precoder, zf_precoder, LinkResult};
use crate::seed;

use super::config::{ChannelMode, Scheme, ScenarioConfig};

// Sub-streams of a drop seed.
const STREAM_USERS: u64 = 10;
const STREAM_LOSSES: u64 = 11;
const STREAM_CSI_NOISE: u64 = 12;

/// Per-scheme outcome of a drop.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub system_capacity_bps: f64,
    pub mean_sinr_db: f64,
    pub mean_spectral_efficiency: f64,
}

/// Everything a drop needs that does not depend on the drop seed.
#[derive(Debug, Clone)]
pub struct LeoSetup {
    pub ctx: GeometryContext,
    pub array: ArrayGeometry,
    pub fr3: BeamLattice,
    pub fr4: BeamLattice,
    pub misalignment_ms: f64,
    pub total_power_w: f64,
}

impl LeoSetup {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let ctx = cfg.geometry.context();
        ctx.validate()?;
        let leo = &cfg.leo;
        let misalignment_ms = match leo.misalignment_ms {
            Some(dt) => dt,
            None => misalignment_interval(&ctx)?,
        };
        Ok(Self {
            ctx,
            array: cfg.array.geometry()?,
            fr3: generate_beam_lattice(leo.coverage_half_angle_deg, leo.n_beams, ReuseScheme::Fr3, leo.carrier_hz)?,
            fr4: generate_beam_lattice(leo.coverage_half_angle_deg, leo.n_beams, ReuseScheme::Fr4, leo.carrier_hz)?,
            misalignment_ms,
            total_power_w: leo.total_power_w(),
        })
    }
}

/// True channels at the estimation and transmission epochs for one drop.
#[derive(Debug, Clone)]
pub struct DropChannels {
    pub users: TerminalPopulation,
    pub at_estimation: ChannelMatrix,
    pub at_transmission: ChannelMatrix,
    pub sat_at_transmission: SatelliteState,
}

pub fn draw_channels(cfg: &ScenarioConfig, setup: &LeoSetup, drop_seed: u64) -> Result<DropChannels> {
    let leo = &cfg.leo;
    let sat0 = SatelliteState::at(&setup.ctx, 0.0);
    let sat1 = SatelliteState::at(&setup.ctx, setup.misalignment_ms * 1e-3);
    let mut rng = seed::rng(seed::stream_seed(drop_seed, STREAM_USERS));
    let users = drop_terminals(
        &setup.ctx,
        &sat0,
        setup.fr3.footprint_radius(),
        leo.n_users,
        leo.receiver(),
        leo.location_error_m,
        &mut rng,
    )?;
    let mut h0 = build_clear_sky(&users, &setup.array, leo.carrier_hz, leo.bandwidth_hz, &setup.ctx, &sat0)?;
    let mut h1 = build_clear_sky(&users, &setup.array, leo.carrier_hz, leo.bandwidth_hz, &setup.ctx, &sat1)?;
    if leo.channel_mode == ChannelMode::Tgpp {
        let profile = cfg.impairments.profile();
        profile.validate()?;
        let loss_seed = seed::stream_seed(drop_seed, STREAM_LOSSES);
        let rho = cfg.impairments.loss_correlation;
        h0 = apply_losses(&h0, &draw_losses(&profile, users.len(), loss_seed))?;
        // No time elapses at Δt = 0, so the loss state is shared.
        let steps = u64::from(setup.misalignment_ms > 0.0);
        h1 = apply_losses(&h1, &draw_losses_after(&profile, users.len(), loss_seed, rho, steps))?;
    }
    Ok(DropChannels {
        users,
        at_estimation: h0,
        at_transmission: h1,
        sat_at_transmission: sat1,
    })
}

fn user_centric(cfg: &ScenarioConfig, setup: &LeoSetup, ch: &DropChannels, scheme: Scheme, drop_seed: u64) -> Result<LinkResult> {
    let leo = &cfg.leo;
    let truth = &ch.at_transmission;
    let noise = truth.mean_noise_power();
    let w = match scheme {
        Scheme::LbMmse => {
            let inferred = infer_from_location(
                &ch.users,
                &setup.array,
                leo.carrier_hz,
                leo.bandwidth_hz,
                &ch.sat_at_transmission,
            )?;
            lb_mmse_precoder(&inferred, noise, setup.total_power_w)?
        }
        Scheme::Mmse | Scheme::Zf => {
            let csi = estimate_csi(
                &ch.at_estimation,
                truth,
                leo.estimation_noise_db,
                seed::stream_seed(drop_seed, STREAM_CSI_NOISE),
            )?;
            if scheme == Scheme::Zf {
                zf_precoder(&csi, setup.total_power_w)?
            } else {
                mmse_precoder(&csi, noise, setup.total_power_w)?
            }
        }
        Scheme::Fr3 | Scheme::Fr4 => unreachable!("fixed-beam schemes are handled by fr_transmit"),
    };
    let sinr = compute_sinr(truth, &w, &truth.noise_power_w)?;
    capacity(&sinr, &vec![leo.bandwidth_hz; sinr.len()], leo.se_cap)
}

pub fn evaluate_scheme(
    cfg: &ScenarioConfig,
    setup: &LeoSetup,
    ch: &DropChannels,
    scheme: Scheme,
    drop_seed: u64,
) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::Fr3 | Scheme::Fr4 => {
            let lattice = if scheme == Scheme::Fr3 { &setup.fr3 } else { &setup.fr4 };
            let out = fr_transmit(&ch.at_transmission, lattice, &setup.array, setup.total_power_w, cfg.leo.se_cap)?;
            Ok(SchemeOutcome {
                scheme,
                system_capacity_bps: out.system_capacity_bps,
                mean_sinr_db: out.link.mean_sinr_db(),
                mean_spectral_efficiency: out.link.mean_spectral_efficiency,
            })
        }
        _ => {
            let link = user_centric(cfg, setup, ch, scheme, drop_seed)?;
            Ok(SchemeOutcome {
                scheme,
                system_capacity_bps: link.system_capacity_bps,
                mean_sinr_db: link.mean_sinr_db(),
                mean_spectral_efficiency: link.mean_spectral_efficiency,
            })
        }
    }
}
