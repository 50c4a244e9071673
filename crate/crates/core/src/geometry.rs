//! Spherical-Earth satellite/terminal geometry.
//!
//! Everything here is a pure function of its inputs. Distances are in km,
//! angles in degrees at the API surface, delays in milliseconds.

use crate::error::{NtnError, Result};

/// Speed of light in km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Standard gravitational parameter of the Earth, km^3/s^2.
pub const EARTH_MU_KM3_S2: f64 = 398_600.4418;

/// Orbit and minimum-elevation parameters of a single-satellite scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryContext {
    pub earth_radius_km: f64,
    pub altitude_km: f64,
    pub user_min_elevation_deg: f64,
    pub gateway_min_elevation_deg: f64,
}

impl Default for GeometryContext {
    fn default() -> Self {
        Self {
            earth_radius_km: EARTH_RADIUS_KM,
            altitude_km: 600.0,
            user_min_elevation_deg: 30.0,
            gateway_min_elevation_deg: 10.0,
        }
    }
}

/// Range, elevation and one-way delay of a single link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub slant_range_km: f64,
    pub elevation_deg: f64,
    pub one_way_delay_ms: f64,
}

fn check_elevation(name: &str, elevation_deg: f64) -> Result<()> {
    if !(elevation_deg > 0.0 && elevation_deg <= 90.0) {
        return Err(NtnError::Domain(format!(
            "{name} must lie in (0, 90] degrees, got {elevation_deg}"
        )));
    }
    Ok(())
}

impl GeometryContext {
    pub fn new(altitude_km: f64, user_min_elevation_deg: f64, gateway_min_elevation_deg: f64) -> Result<Self> {
        let ctx = Self {
            altitude_km,
            user_min_elevation_deg,
            gateway_min_elevation_deg,
            ..Self::default()
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.earth_radius_km > 0.0 && self.earth_radius_km.is_finite()) {
            return Err(NtnError::Domain(format!(
                "earth radius must be positive, got {}",
                self.earth_radius_km
            )));
        }
        if !(self.altitude_km > 0.0 && self.altitude_km.is_finite()) {
            return Err(NtnError::Domain(format!(
                "altitude must be positive, got {}",
                self.altitude_km
            )));
        }
        check_elevation("user minimum elevation", self.user_min_elevation_deg)?;
        check_elevation("gateway minimum elevation", self.gateway_min_elevation_deg)
    }

    /// Distance from Earth centre to the satellite.
    pub fn orbit_radius_km(&self) -> f64 {
        self.earth_radius_km + self.altitude_km
    }

    /// Full link description at a given elevation.
    pub fn link(&self, elevation_deg: f64) -> Result<LinkGeometry> {
        let slant_range_km = slant_range(self, elevation_deg)?;
        Ok(LinkGeometry {
            slant_range_km,
            elevation_deg,
            one_way_delay_ms: propagation_delay(slant_range_km)?,
        })
    }

    /// Off-nadir angle (degrees) under which the satellite sees a ground
    /// point at the given elevation.
    pub fn nadir_angle_deg(&self, elevation_deg: f64) -> Result<f64> {
        check_elevation("elevation", elevation_deg)?;
        let s = self.earth_radius_km * elevation_deg.to_radians().cos() / self.orbit_radius_km();
        Ok(s.asin().to_degrees())
    }
}

/// Slant range d(ε) = sqrt(R² sin²ε + 2Rh + h²) − R sin ε.
pub fn slant_range(ctx: &GeometryContext, elevation_deg: f64) -> Result<f64> {
    check_elevation("elevation", elevation_deg)?;
    let r = ctx.earth_radius_km;
    let h = ctx.altitude_km;
    if elevation_deg == 90.0 {
        return Ok(h);
    }
    let rs = r * elevation_deg.to_radians().sin();
    Ok((rs * rs + 2.0 * r * h + h * h).sqrt() - rs)
}

/// One-way free-space propagation delay in milliseconds.
pub fn propagation_delay(range_km: f64) -> Result<f64> {
    if !(range_km >= 0.0) || !range_km.is_finite() {
        return Err(NtnError::Domain(format!(
            "range must be a finite non-negative length, got {range_km}"
        )));
    }
    Ok(range_km / SPEED_OF_LIGHT_KM_S * 1e3)
}

/// Age of the ancillary information when the precoded signal leaves the
/// satellite: user report up to the satellite, forwarded down the feeder
/// link to the ground gNB, precoded burst back up the feeder link.
pub fn misalignment_interval(ctx: &GeometryContext) -> Result<f64> {
    ctx.validate()?;
    let user = ctx.link(ctx.user_min_elevation_deg)?;
    let feeder = ctx.link(ctx.gateway_min_elevation_deg)?;
    Ok(user.one_way_delay_ms + 2.0 * feeder.one_way_delay_ms)
}

/// Circular-orbit speed sqrt(μ / (R + h)) in km/s.
pub fn orbital_speed(ctx: &GeometryContext) -> f64 {
    (EARTH_MU_KM3_S2 / ctx.orbit_radius_km()).sqrt()
}

/// Worst-case Doppler shift (full orbital speed along the line of sight).
/// Reported only; the channel model never applies it.
pub fn max_doppler(ctx: &GeometryContext, carrier_hz: f64) -> Result<f64> {
    if !(carrier_hz >= 0.0) || !carrier_hz.is_finite() {
        return Err(NtnError::Domain(format!(
            "carrier frequency must be non-negative, got {carrier_hz}"
        )));
    }
    Ok(orbital_speed(ctx) / SPEED_OF_LIGHT_KM_S * carrier_hz)
}

/// Summary printed by the `geometry` subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryReport {
    pub user_link: LinkGeometry,
    pub feeder_link: LinkGeometry,
    pub misalignment_ms: f64,
    pub orbital_speed_km_s: f64,
    pub along_track_shift_m: f64,
    pub max_doppler_hz: f64,
}

pub fn report(ctx: &GeometryContext, carrier_hz: f64) -> Result<GeometryReport> {
    ctx.validate()?;
    let misalignment_ms = misalignment_interval(ctx)?;
    let speed = orbital_speed(ctx);
    Ok(GeometryReport {
        user_link: ctx.link(ctx.user_min_elevation_deg)?,
        feeder_link: ctx.link(ctx.gateway_min_elevation_deg)?,
        misalignment_ms,
        orbital_speed_km_s: speed,
        along_track_shift_m: speed * misalignment_ms,
        max_doppler_hz: max_doppler(ctx, carrier_hz)?,
    })
}
