//! User × element channel synthesis: clear-sky line-of-sight links,
//! per-user stochastic losses, stale CSI and location-based reconstruction.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{ArrayGeometry, Direction};
use crate::error::{NtnError, Result};
use crate::geometry::{orbital_speed, GeometryContext, SPEED_OF_LIGHT_M_S};
use crate::seed;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn wavelength_m(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT_M_S / carrier_hz
}

/// Free-space path loss in dB.
pub fn fspl_db(distance_m: f64, carrier_hz: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m / wavelength_m(carrier_hz)).log10()
}

/// Satellite position and nadir-pointing array attitude, Earth-centred frame.
///
/// The orbit lies in the x–z plane; at `t = 0` the satellite is above the
/// z axis and moves towards +x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    pub position_km: Vec3,
    pub along_track: Vec3,
    pub cross_track: Vec3,
    pub boresight: Vec3,
}

impl SatelliteState {
    pub fn at(ctx: &GeometryContext, elapsed_s: f64) -> Self {
        let radius = ctx.orbit_radius_km();
        let phi = orbital_speed(ctx) * elapsed_s / radius;
        let (s, c) = phi.sin_cos();
        Self {
            position_km: [radius * s, 0.0, radius * c],
            along_track: [c, 0.0, -s],
            cross_track: [0.0, 1.0, 0.0],
            boresight: [-s, 0.0, -c],
        }
    }

    /// How a ground point looks from this satellite.
    pub fn view(&self, ground_km: Vec3) -> Result<UserView> {
        let los = sub(ground_km, self.position_km);
        let range = norm(los);
        if !(range > 0.0) {
            return Err(NtnError::Domain("terminal coincides with satellite".into()));
        }
        let d = scale(los, 1.0 / range);
        let direction = Direction::from_vector(
            dot(d, self.along_track),
            dot(d, self.cross_track),
            dot(d, self.boresight),
        )?;
        let up = scale(ground_km, 1.0 / norm(ground_km));
        let elevation_deg = (-dot(d, up)).clamp(-1.0, 1.0).asin().to_degrees();
        Ok(UserView {
            slant_range_km: range,
            elevation_deg,
            direction,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserView {
    pub slant_range_km: f64,
    pub elevation_deg: f64,
    pub direction: Direction,
}

/// Receiver class of a ground terminal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverProfile {
    pub g_over_t_db_k: f64,
    pub rx_gain_dbi: f64,
}

impl ReceiverProfile {
    /// Ka-band VSAT.
    pub const VSAT: ReceiverProfile = ReceiverProfile {
        g_over_t_db_k: 15.9,
        rx_gain_dbi: 39.7,
    };

    pub fn system_temperature_k(&self) -> f64 {
        db_to_linear(self.rx_gain_dbi - self.g_over_t_db_k)
    }

    pub fn noise_power_w(&self, bandwidth_hz: f64) -> f64 {
        BOLTZMANN * self.system_temperature_k() * bandwidth_hz
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Terminal {
    pub position_km: Vec3,
    /// Position the terminal reports; equals `position_km` without location error.
    pub reported_position_km: Vec3,
    pub receiver: ReceiverProfile,
    pub location_error_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TerminalPopulation {
    pub terminals: Vec<Terminal>,
}

impl TerminalPopulation {
    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    /// Checks the population against the minimum elevation seen from `sat`.
    pub fn validate(&self, ctx: &GeometryContext, sat: &SatelliteState) -> Result<()> {
        if self.terminals.is_empty() {
            return Err(NtnError::Contract("terminal population is empty".into()));
        }
        for (i, t) in self.terminals.iter().enumerate() {
            let view = sat.view(t.position_km)?;
            if view.elevation_deg < ctx.user_min_elevation_deg - 1e-9 {
                return Err(NtnError::Domain(format!(
                    "user {i} at elevation {:.2}° is below the {:.1}° minimum",
                    view.elevation_deg, ctx.user_min_elevation_deg
                )));
            }
        }
        Ok(())
    }
}

/// Ground point hit by the ray leaving the satellite in `direction`.
pub fn ground_point(ctx: &GeometryContext, sat: &SatelliteState, direction: Direction) -> Option<Vec3> {
    let w = (1.0 - direction.u * direction.u - direction.v * direction.v).max(0.0).sqrt();
    let d = add(
        add(scale(sat.along_track, direction.u), scale(sat.cross_track, direction.v)),
        scale(sat.boresight, w),
    );
    let sd = dot(sat.position_km, d);
    let c = dot(sat.position_km, sat.position_km) - ctx.earth_radius_km * ctx.earth_radius_km;
    let disc = sd * sd - c;
    if disc < 0.0 {
        return None;
    }
    let t = -sd - disc.sqrt();
    (t > 0.0).then(|| add(sat.position_km, scale(d, t)))
}

fn perturb_on_sphere<R: Rng + ?Sized>(radius_km: f64, p: Vec3, sigma_m: f64, rng: &mut R) -> Vec3 {
    if sigma_m <= 0.0 {
        return p;
    }
    let up = scale(p, 1.0 / norm(p));
    // Any vector not parallel to `up` seeds the tangent basis.
    let seed_axis = if up[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let t = sub(seed_axis, scale(up, dot(seed_axis, up)));
        scale(t, 1.0 / norm(t))
    };
    let e2 = [
        up[1] * e1[2] - up[2] * e1[1],
        up[2] * e1[0] - up[0] * e1[2],
        up[0] * e1[1] - up[1] * e1[0],
    ];
    let sigma_km = sigma_m / 1e3;
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    let q = add(p, add(scale(e1, sigma_km * n1), scale(e2, sigma_km * n2)));
    scale(q, radius_km / norm(q))
}

/// Drops `n_users` terminals uniformly over the disc of radius
/// `footprint_radius_uv` (direction-cosine units) seen from `sat`.
pub fn drop_terminals<R: Rng + ?Sized>(
    ctx: &GeometryContext,
    sat: &SatelliteState,
    footprint_radius_uv: f64,
    n_users: usize,
    receiver: ReceiverProfile,
    location_error_m: f64,
    rng: &mut R,
) -> Result<TerminalPopulation> {
    if n_users == 0 {
        return Err(NtnError::Contract("at least one user is required".into()));
    }
    if !(footprint_radius_uv > 0.0 && footprint_radius_uv <= 1.0) {
        return Err(NtnError::Domain(format!(
            "footprint radius {footprint_radius_uv} outside (0, 1]"
        )));
    }
    let mut terminals = Vec::with_capacity(n_users);
    let mut attempts = 0usize;
    while terminals.len() < n_users {
        attempts += 1;
        if attempts > 1000 * n_users {
            return Err(NtnError::Domain(
                "footprint lies below the minimum user elevation".into(),
            ));
        }
        let r = footprint_radius_uv * rng.gen::<f64>().sqrt();
        let theta = 2.0 * PI * rng.gen::<f64>();
        let dir = Direction {
            u: r * theta.cos(),
            v: r * theta.sin(),
        };
        let Some(p) = ground_point(ctx, sat, dir) else { continue };
        if sat.view(p)?.elevation_deg < ctx.user_min_elevation_deg {
            continue;
        }
        let reported = perturb_on_sphere(ctx.earth_radius_km, p, location_error_m, rng);
        terminals.push(Terminal {
            position_km: p,
            reported_position_km: reported,
            receiver,
            location_error_m,
        });
    }
    Ok(TerminalPopulation { terminals })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    TrueAtTransmission,
    CsiEstimate,
    LocationInferred,
}

/// Complex channel coefficients, one row per user and one column per element.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
    pub kind: ChannelKind,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_power_w: Vec<f64>,
}

impl ChannelMatrix {
    pub fn n_users(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_elements(&self) -> usize {
        self.entries.ncols()
    }

    pub fn mean_noise_power(&self) -> f64 {
        self.noise_power_w.iter().sum::<f64>() / self.noise_power_w.len() as f64
    }

    fn same_shape(&self, other: &ChannelMatrix) -> Result<()> {
        if self.entries.shape() != other.entries.shape() {
            return Err(NtnError::Contract(format!(
                "channel dimensions differ: {:?} vs {:?}",
                self.entries.shape(),
                other.entries.shape()
            )));
        }
        Ok(())
    }

    /// Debug dump with header `user,element,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("user,element,re,im\n");
        for u in 0..self.n_users() {
            for n in 0..self.n_elements() {
                let z = self.entries[(u, n)];
                let _ = writeln!(s, "{u},{n},{},{}", z.re, z.im);
            }
        }
        s
    }
}

/// Line-of-sight row for one terminal position: received amplitude times
/// carrier phase times the conjugate steering vector.
fn los_row(
    array: &ArrayGeometry,
    sat: &SatelliteState,
    position_km: Vec3,
    receiver: &ReceiverProfile,
    carrier_hz: f64,
) -> Result<Vec<Complex64>> {
    let view = sat.view(position_km)?;
    let lambda = wavelength_m(carrier_hz);
    let d_m = view.slant_range_km * 1e3;
    let fspl = (4.0 * PI * d_m / lambda).powi(2);
    let element = db_to_linear(array.element_gain_db(view.direction.off_boresight_deg())?);
    let amplitude = (db_to_linear(receiver.rx_gain_dbi) * element / fspl).sqrt();
    // Reduce the path length modulo λ before forming the phase.
    let carrier_phase = -2.0 * PI * (d_m / lambda).fract();
    let common = Complex64::from_polar(amplitude, carrier_phase);
    Ok(array
        .steering_vector(view.direction)?
        .into_iter()
        .map(|a| common * a.conj())
        .collect())
}

fn assemble(rows: Vec<Vec<Complex64>>, n_elements: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), n_elements, |u, n| rows[u][n])
}

/// Clear-sky channel seen from `sat` (the satellite state at the epoch of
/// interest). Deterministic: no random component.
pub fn build_clear_sky(
    users: &TerminalPopulation,
    array: &ArrayGeometry,
    carrier_hz: f64,
    bandwidth_hz: f64,
    ctx: &GeometryContext,
    sat: &SatelliteState,
) -> Result<ChannelMatrix> {
    if !(carrier_hz > 0.0) || !(bandwidth_hz > 0.0) {
        return Err(NtnError::Domain("carrier and bandwidth must be positive".into()));
    }
    users.validate(ctx, sat)?;
    let rows = users
        .terminals
        .iter()
        .map(|t| los_row(array, sat, t.position_km, &t.receiver, carrier_hz))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelMatrix {
        entries: assemble(rows, array.n_elements()),
        kind: ChannelKind::TrueAtTransmission,
        carrier_hz,
        bandwidth_hz,
        noise_power_w: users
            .terminals
            .iter()
            .map(|t| t.receiver.noise_power_w(bandwidth_hz))
            .collect(),
    })
}

/// Per-user loss terms of the impaired channel mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpairmentProfile {
    pub atmospheric_loss_db: f64,
    pub atmospheric_sigma_db: f64,
    pub scintillation_sigma_db: f64,
    pub shadow_sigma_db: f64,
    pub atmospheric_enabled: bool,
    pub scintillation_enabled: bool,
    pub shadowing_enabled: bool,
}

impl Default for ImpairmentProfile {
    fn default() -> Self {
        Self {
            atmospheric_loss_db: 0.5,
            atmospheric_sigma_db: 0.0,
            scintillation_sigma_db: 0.3,
            shadow_sigma_db: 2.0,
            atmospheric_enabled: true,
            scintillation_enabled: true,
            shadowing_enabled: true,
        }
    }
}

impl ImpairmentProfile {
    pub fn disabled() -> Self {
        Self {
            atmospheric_enabled: false,
            scintillation_enabled: false,
            shadowing_enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("atmospheric_sigma_db", self.atmospheric_sigma_db),
            ("scintillation_sigma_db", self.scintillation_sigma_db),
            ("shadow_sigma_db", self.shadow_sigma_db),
            ("atmospheric_loss_db", self.atmospheric_loss_db),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(NtnError::config(name, "must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// Loss draw of one user, in dB. Every component is non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UserLoss {
    pub atmospheric_db: f64,
    pub scintillation_db: f64,
    pub shadow_db: f64,
}

impl UserLoss {
    pub fn total_db(&self) -> f64 {
        self.atmospheric_db + self.scintillation_db + self.shadow_db
    }
}

// Stream identifiers inside one impairment seed.
const STREAM_ATMOSPHERE: u64 = 1;
const STREAM_SCINTILLATION: u64 = 2;
const STREAM_SHADOW: u64 = 3;

fn gaussians(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

// Offset separating the innovation streams from the initial-draw streams.
const STREAM_INNOVATION: u64 = 100;

/// Underlying standard normals of one loss component, evolved over
/// `steps` intervals of an AR(1) process with lag-one correlation `rho`.
fn component_normals(n: usize, seed: u64, stream: u64, rho: f64, steps: u64) -> Vec<f64> {
    let mut z = gaussians(n, seed::stream_seed(seed, stream));
    let innovation = (1.0 - rho * rho).max(0.0).sqrt();
    for step in 0..steps {
        let fresh = gaussians(n, seed::stream_seed(seed, STREAM_INNOVATION + 10 * stream + step));
        for (a, b) in z.iter_mut().zip(fresh) {
            *a = rho * *a + innovation * b;
        }
    }
    z
}

fn losses_from_normals(profile: &ImpairmentProfile, atm: &[f64], sci: &[f64], sha: &[f64]) -> Vec<UserLoss> {
    (0..atm.len())
        .map(|u| UserLoss {
            atmospheric_db: if profile.atmospheric_enabled {
                profile.atmospheric_loss_db + profile.atmospheric_sigma_db * atm[u].abs()
            } else {
                0.0
            },
            scintillation_db: if profile.scintillation_enabled {
                profile.scintillation_sigma_db * sci[u]
            } else {
                0.0
            },
            shadow_db: if profile.shadowing_enabled {
                profile.shadow_sigma_db * sha[u]
            } else {
                0.0
            },
        })
        .collect()
}

/// Draws per-user losses. Each component uses its own sub-stream so that
/// disabling one never perturbs the draws of another. Scintillation and
/// shadowing are zero-mean normal in dB (a negative value is a gain); the
/// atmospheric spread is half-normal on top of its mean.
pub fn draw_losses(profile: &ImpairmentProfile, n_users: usize, rng_seed: u64) -> Vec<UserLoss> {
    draw_losses_after(profile, n_users, rng_seed, 1.0, 0)
}

/// Loss draw of the same users `steps` intervals later, the underlying
/// Gaussians following an AR(1) process with lag-one correlation `rho`.
/// `steps = 0` reproduces [`draw_losses`]; `rho = 0` gives an independent draw.
pub fn draw_losses_after(profile: &ImpairmentProfile, n_users: usize, rng_seed: u64, rho: f64, steps: u64) -> Vec<UserLoss> {
    let atm = component_normals(n_users, rng_seed, STREAM_ATMOSPHERE, rho, steps);
    let sci = component_normals(n_users, rng_seed, STREAM_SCINTILLATION, rho, steps);
    let sha = component_normals(n_users, rng_seed, STREAM_SHADOW, rho, steps);
    losses_from_normals(profile, &atm, &sci, &sha)
}

/// Scales each user row by `10^(-L_u/20)`.
pub fn apply_losses(h: &ChannelMatrix, losses: &[UserLoss]) -> Result<ChannelMatrix> {
    if losses.len() != h.n_users() {
        return Err(NtnError::Contract(format!(
            "{} loss draws for {} users",
            losses.len(),
            h.n_users()
        )));
    }
    let mut out = h.clone();
    for (u, loss) in losses.iter().enumerate() {
        let total = loss.total_db();
        if total != 0.0 {
            let a = 10f64.powf(-total / 20.0);
            out.entries.row_mut(u).scale_mut(a);
        }
    }
    Ok(out)
}

/// Applies one fresh draw of the impaired-channel losses.
pub fn apply_3gpp_impairments(h: &ChannelMatrix, profile: &ImpairmentProfile, rng_seed: u64) -> Result<ChannelMatrix> {
    profile.validate()?;
    apply_losses(h, &draw_losses(profile, h.n_users(), rng_seed))
}

/// CSI reported at the estimation epoch. The precoder built from it is later
/// applied against `h_at_transmission`; that matrix is only checked for shape.
/// `estimation_noise_db` is the per-entry noise power relative to the mean
/// entry power; `None` disables estimation noise.
pub fn estimate_csi(
    h_at_estimation: &ChannelMatrix,
    h_at_transmission: &ChannelMatrix,
    estimation_noise_db: Option<f64>,
    rng_seed: u64,
) -> Result<ChannelMatrix> {
    h_at_estimation.same_shape(h_at_transmission)?;
    let mut out = h_at_estimation.clone();
    out.kind = ChannelKind::CsiEstimate;
    if let Some(level_db) = estimation_noise_db {
        let mean_power = h_at_estimation.entries.iter().map(|z| z.norm_sqr()).sum::<f64>()
            / h_at_estimation.entries.len() as f64;
        let sigma = (mean_power * db_to_linear(level_db) / 2.0).sqrt();
        let mut rng = seed::rng(rng_seed);
        for z in out.entries.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z += Complex64::new(sigma * re, sigma * im);
        }
    }
    Ok(out)
}

/// Geometric reconstruction from reported positions and the predicted
/// satellite state at transmission; carries no stochastic loss terms.
pub fn infer_from_location(
    users: &TerminalPopulation,
    array: &ArrayGeometry,
    carrier_hz: f64,
    bandwidth_hz: f64,
    predicted_sat: &SatelliteState,
) -> Result<ChannelMatrix> {
    if users.is_empty() {
        return Err(NtnError::Contract("terminal population is empty".into()));
    }
    let rows = users
        .terminals
        .iter()
        .map(|t| los_row(array, predicted_sat, t.reported_position_km, &t.receiver, carrier_hz))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelMatrix {
        entries: assemble(rows, array.n_elements()),
        kind: ChannelKind::LocationInferred,
        carrier_hz,
        bandwidth_hz,
        noise_power_w: users
            .terminals
            .iter()
            .map(|t| t.receiver.noise_power_w(bandwidth_hz))
            .collect(),
    })
}
