//! Browser bindings. Each export returns a JSON string so the page can stay
//! plain JavaScript; the `*_json` functions hold the logic and are what the
//! native tests call.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use ntnsim_core::array::{generate_beam_lattice, ReuseScheme};
use ntnsim_core::geometry::{report, GeometryContext, EARTH_RADIUS_KM};
use ntnsim_core::noma::{draw_scenario, ee_sweep, KSearch, UavLinkModel, UplinkSettings};

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn geometry_json(altitude_km: f64, user_elev_deg: f64, gw_elev_deg: f64, carrier_hz: f64) -> Result<String, String> {
    let ctx = GeometryContext {
        earth_radius_km: EARTH_RADIUS_KM,
        altitude_km,
        user_min_elevation_deg: user_elev_deg,
        gateway_min_elevation_deg: gw_elev_deg,
    };
    let r = report(&ctx, carrier_hz).map_err(|e| e.to_string())?;
    Ok(json!({
        "user_slant_range_km": r.user_link.slant_range_km,
        "user_delay_ms": r.user_link.one_way_delay_ms,
        "feeder_slant_range_km": r.feeder_link.slant_range_km,
        "feeder_delay_ms": r.feeder_link.one_way_delay_ms,
        "misalignment_ms": r.misalignment_ms,
        "orbital_speed_km_s": r.orbital_speed_km_s,
        "along_track_shift_m": r.along_track_shift_m,
        "max_doppler_hz": r.max_doppler_hz,
    })
    .to_string())
}

pub fn lattice_json(coverage_deg: f64, n_beams: usize, reuse: u32, carrier_hz: f64) -> Result<String, String> {
    let scheme = match reuse {
        1 => ReuseScheme::Full,
        3 => ReuseScheme::Fr3,
        4 => ReuseScheme::Fr4,
        other => return Err(format!("reuse factor must be 1, 3 or 4, got {other}")),
    };
    let lattice = generate_beam_lattice(coverage_deg, n_beams, scheme, carrier_hz).map_err(|e| e.to_string())?;
    let beams: Vec<Value> = lattice
        .beams
        .iter()
        .map(|b| json!({"id": b.id, "u": b.center.u, "v": b.center.v, "colour": b.colour}))
        .collect();
    Ok(json!({
        "spacing": lattice.spacing,
        "n_colours": lattice.n_colours(),
        "beams": beams,
    })
    .to_string())
}

pub fn noma_json(n_ues: usize, n_subcarriers: usize, circuit_power_w: f64, seed: u64) -> Result<String, String> {
    let settings = UplinkSettings {
        n_ues,
        n_subcarriers,
        circuit_power_w,
        ..UplinkSettings::default()
    };
    let sizes: Vec<f64> = (1..=8).map(|i| f64::from(i) * 1e5).collect();
    let scenario = draw_scenario(&settings, &UavLinkModel::default(), sizes[0], seed).map_err(|e| e.to_string())?;
    let search = KSearch {
        k_max: 10.min(n_ues),
        ..KSearch::default()
    };
    let rows = ee_sweep(&scenario, &sizes, search, seed).map_err(|e| e.to_string())?;
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "data_size_bits": r.data_size_bits,
                "method": r.method.to_string(),
                "ee_bits_per_joule": finite_or_null(r.ee_bits_per_joule),
                "k_selected": r.k_selected,
                "feasible": r.feasible,
            })
        })
        .collect();
    Ok(Value::Array(rows).to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Slant ranges, delays, misalignment interval and Doppler for one orbit.
#[wasm_bindgen]
pub fn geometry(altitude_km: f64, user_elev_deg: f64, gw_elev_deg: f64, carrier_hz: f64) -> Result<String, JsError> {
    to_js(geometry_json(altitude_km, user_elev_deg, gw_elev_deg, carrier_hz))
}

/// Beam centres in (u, v) with their reuse colour.
#[wasm_bindgen]
pub fn beam_lattice(coverage_deg: f64, n_beams: usize, reuse: u32, carrier_hz: f64) -> Result<String, JsError> {
    to_js(lattice_json(coverage_deg, n_beams, reuse, carrier_hz))
}

/// Energy efficiency of the clustered NOMA scheme and the greedy baseline
/// for payloads of 1e5..8e5 bits on one random drop.
#[wasm_bindgen]
pub fn noma_sweep(n_ues: usize, n_subcarriers: usize, circuit_power_w: f64, seed: u32) -> Result<String, JsError> {
    to_js(noma_json(n_ues, n_subcarriers, circuit_power_w, u64::from(seed)))
}
