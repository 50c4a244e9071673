//! Planar radiating array on board the satellite and the fixed beam lattice
//! used by the frequency-reuse baselines.
//!
//! Directions are expressed as direction cosines `(u, v)` relative to the
//! array plane, with the boresight pointing at nadir.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{NtnError, Result};

/// Relative floor of the element pattern, dB below the peak.
pub const ELEMENT_GAIN_FLOOR_DB: f64 = -30.0;

/// Carrier above which the larger SSB beam budget applies.
pub const SSB_CARRIER_THRESHOLD_HZ: f64 = 6e9;

/// Maximum number of simultaneously identifiable beams for a carrier.
pub fn ssb_beam_cap(carrier_hz: f64) -> usize {
    if carrier_hz < SSB_CARRIER_THRESHOLD_HZ {
        8
    } else {
        64
    }
}

/// Pointing direction as direction cosines relative to the array axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub u: f64,
    pub v: f64,
}

impl Direction {
    pub const BORESIGHT: Direction = Direction { u: 0.0, v: 0.0 };

    pub fn new(u: f64, v: f64) -> Result<Self> {
        let d = Direction { u, v };
        d.validate()?;
        Ok(d)
    }

    /// Builds a direction from a vector in array coordinates, `w` being the
    /// component along boresight.
    pub fn from_vector(x: f64, y: f64, w: f64) -> Result<Self> {
        let norm = (x * x + y * y + w * w).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(NtnError::Domain("direction vector must be non-zero".into()));
        }
        if w < 0.0 {
            return Err(NtnError::Domain(
                "direction points behind the array plane".into(),
            ));
        }
        Ok(Direction {
            u: x / norm,
            v: y / norm,
        })
    }

    fn validate(&self) -> Result<()> {
        let s = self.u * self.u + self.v * self.v;
        if !s.is_finite() || s > 1.0 + 1e-12 {
            return Err(NtnError::Domain(format!(
                "direction ({}, {}) lies outside the visible hemisphere",
                self.u, self.v
            )));
        }
        Ok(())
    }

    /// Angle off boresight in degrees.
    pub fn off_boresight_deg(&self) -> f64 {
        (self.u * self.u + self.v * self.v).sqrt().min(1.0).asin().to_degrees()
    }
}

/// Uniform planar array of `n_rows × n_cols` radiating elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub n_rows: usize,
    pub n_cols: usize,
    pub element_spacing_wavelengths: f64,
    pub max_element_gain_dbi: f64,
    pub element_pattern_exponent: f64,
}

impl Default for ArrayGeometry {
    fn default() -> Self {
        Self {
            n_rows: 16,
            n_cols: 16,
            element_spacing_wavelengths: 0.5,
            max_element_gain_dbi: 8.0,
            element_pattern_exponent: 2.0,
        }
    }
}

impl ArrayGeometry {
    pub fn new(n_rows: usize, n_cols: usize) -> Result<Self> {
        let a = Self {
            n_rows,
            n_cols,
            ..Self::default()
        };
        a.validate()?;
        Ok(a)
    }

    /// Square-ish factorisation of an element count: 256 → 16×16,
    /// 512 → 16×32, 1024 → 32×32.
    pub fn with_elements(n_elements: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(NtnError::config("n_elements", "must be at least 1"));
        }
        let mut rows = (n_elements as f64).sqrt().floor() as usize;
        while n_elements % rows != 0 {
            rows -= 1;
        }
        Self::new(rows, n_elements / rows)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(NtnError::config("n_elements", "array needs at least one row and column"));
        }
        if !(self.element_spacing_wavelengths > 0.0) {
            return Err(NtnError::config(
                "element_spacing_wavelengths",
                "must be positive",
            ));
        }
        if !(self.element_pattern_exponent >= 0.0) {
            return Err(NtnError::config("element_pattern_exponent", "must be non-negative"));
        }
        if !self.max_element_gain_dbi.is_finite() {
            return Err(NtnError::config("max_element_gain_dbi", "must be finite"));
        }
        Ok(())
    }

    pub fn n_elements(&self) -> usize {
        self.n_rows * self.n_cols
    }

    /// Element `(r, c)` is stored at index `r * n_cols + c`.
    pub fn steering_vector(&self, direction: Direction) -> Result<Vec<Complex64>> {
        direction.validate()?;
        let k = 2.0 * PI * self.element_spacing_wavelengths;
        let mut out = Vec::with_capacity(self.n_elements());
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                let phase = k * (r as f64 * direction.u + c as f64 * direction.v);
                out.push(Complex64::from_polar(1.0, phase));
            }
        }
        Ok(out)
    }

    /// Element gain in dBi: cosine-power roll-off from the peak, clamped
    /// at [`ELEMENT_GAIN_FLOOR_DB`] below it.
    pub fn element_gain_db(&self, off_boresight_deg: f64) -> Result<f64> {
        if !(0.0..=90.0).contains(&off_boresight_deg) {
            return Err(NtnError::Domain(format!(
                "off-boresight angle must lie in [0, 90] degrees, got {off_boresight_deg}"
            )));
        }
        let c = off_boresight_deg.to_radians().cos();
        let rel = if c <= 0.0 {
            ELEMENT_GAIN_FLOOR_DB
        } else {
            (10.0 * self.element_pattern_exponent * c.log10()).max(ELEMENT_GAIN_FLOOR_DB)
        };
        Ok(self.max_element_gain_dbi + rel)
    }

    /// Approximate half-power beamwidth in direction-cosine units along the
    /// wider array dimension.
    pub fn beamwidth_uv(&self) -> f64 {
        let aperture = self.n_rows.max(self.n_cols) as f64 * self.element_spacing_wavelengths;
        0.886 / aperture
    }
}

/// Frequency-reuse scheme of a beam lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReuseScheme {
    /// Full reuse: every beam uses the whole band.
    Full,
    Fr3,
    Fr4,
}

impl ReuseScheme {
    pub fn n_colours(self) -> usize {
        match self {
            ReuseScheme::Full => 1,
            ReuseScheme::Fr3 => 3,
            ReuseScheme::Fr4 => 4,
        }
    }

    /// Colour of the hexagon at axial coordinates `(q, r)`. Both rules give
    /// different colours to every pair of adjacent cells.
    fn colour(self, q: i64, r: i64) -> usize {
        match self {
            ReuseScheme::Full => 0,
            ReuseScheme::Fr3 => (q - r).rem_euclid(3) as usize,
            ReuseScheme::Fr4 => (q.rem_euclid(2) + 2 * r.rem_euclid(2)) as usize,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub id: usize,
    /// Axial hex coordinates.
    pub axial: (i64, i64),
    pub center: Direction,
    pub colour: usize,
}

/// Hexagonal lattice of fixed beams with a reuse colouring.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamLattice {
    pub beams: Vec<Beam>,
    pub scheme: ReuseScheme,
    /// Centre-to-centre distance of adjacent beams in `(u, v)`.
    pub spacing: f64,
}

// Axial neighbour offsets in ring-walk order.
const HEX_DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

/// Axial coordinates of the first `n` hexagons, centre first, ring by ring.
fn hex_spiral(n: usize) -> Vec<(i64, i64)> {
    let mut cells = vec![(0, 0)];
    let mut ring = 1i64;
    while cells.len() < n {
        // Start at the "south-west" corner of the ring and walk its six sides.
        let (mut q, mut r) = (-ring, ring);
        for &(dq, dr) in &HEX_DIRS {
            for _ in 0..ring {
                cells.push((q, r));
                q += dq;
                r += dr;
            }
        }
        ring += 1;
    }
    cells.truncate(n);
    cells
}

fn hex_ring(q: i64, r: i64) -> i64 {
    (q.abs() + r.abs() + (q + r).abs()) / 2
}

impl BeamLattice {
    pub fn n_colours(&self) -> usize {
        self.scheme.n_colours()
    }

    pub fn bandwidth_share(&self) -> f64 {
        1.0 / self.n_colours() as f64
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    /// Largest distance from boresight to the edge of any beam cell.
    pub fn footprint_radius(&self) -> f64 {
        let max_center = self
            .beams
            .iter()
            .map(|b| b.center.u.hypot(b.center.v))
            .fold(0.0, f64::max);
        max_center + 0.5 * self.spacing
    }

    /// Pairs of beams whose centres are nearest neighbours on the lattice.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (i, a) in self.beams.iter().enumerate() {
            for b in &self.beams[i + 1..] {
                let d = (a.center.u - b.center.u).hypot(a.center.v - b.center.v);
                if (d - self.spacing).abs() < 1e-9 * self.spacing.max(1.0) {
                    pairs.push((a.id, b.id));
                }
            }
        }
        pairs
    }

    /// CSV with header `beam_id,u,v,colour`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("beam_id,u,v,colour\n");
        for b in &self.beams {
            let _ = writeln!(s, "{},{},{},{}", b.id, b.center.u, b.center.v, b.colour);
        }
        s
    }
}

/// Hexagonal beam lattice inside a cone of `coverage_half_angle_deg` around
/// boresight. The outermost ring of beam centres sits half a spacing inside
/// the coverage edge.
pub fn generate_beam_lattice(
    coverage_half_angle_deg: f64,
    n_beams: usize,
    scheme: ReuseScheme,
    carrier_hz: f64,
) -> Result<BeamLattice> {
    if n_beams == 0 {
        return Err(NtnError::config("n_beams", "at least one beam is required"));
    }
    let cap = ssb_beam_cap(carrier_hz);
    if n_beams > cap {
        return Err(NtnError::config(
            "n_beams",
            format!(
                "{n_beams} beams exceed the SSB cap of {cap} beams at {:.1} GHz",
                carrier_hz / 1e9
            ),
        ));
    }
    if !(coverage_half_angle_deg > 0.0 && coverage_half_angle_deg < 90.0) {
        return Err(NtnError::config(
            "coverage_half_angle_deg",
            "must lie in (0, 90) degrees",
        ));
    }
    let cells = hex_spiral(n_beams);
    let rings = cells.iter().map(|&(q, r)| hex_ring(q, r)).max().unwrap_or(0);
    let spacing = coverage_half_angle_deg.to_radians().sin() / (rings as f64 + 0.5);
    let beams = cells
        .into_iter()
        .enumerate()
        .map(|(id, (q, r))| Beam {
            id,
            axial: (q, r),
            center: Direction {
                u: spacing * (q as f64 + 0.5 * r as f64),
                v: spacing * (r as f64 * 3f64.sqrt() / 2.0),
            },
            colour: scheme.colour(q, r),
        })
        .collect();
    Ok(BeamLattice {
        beams,
        scheme,
        spacing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn boresight_steering_is_all_ones() {
        let a = ArrayGeometry::default();
        for z in a.steering_vector(Direction::BORESIGHT).unwrap() {
            assert_eq!(z, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn steering_vector_is_unit_modulus() {
        let a = ArrayGeometry::with_elements(512).unwrap();
        let sv = a.steering_vector(Direction::new(0.3, -0.2).unwrap()).unwrap();
        assert_eq!(sv.len(), 512);
        assert!(sv.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!((norm(&sv) - 512f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn two_element_endfire_phases() {
        let a = ArrayGeometry::new(2, 1).unwrap();
        let sv = a.steering_vector(Direction::new(1.0, 0.0).unwrap()).unwrap();
        assert!((sv[0].arg()).abs() < 1e-12);
        assert!((sv[1].arg().abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn direction_behind_array_rejected() {
        assert!(Direction::from_vector(0.1, 0.0, -1.0).is_err());
        assert!(Direction::new(0.9, 0.9).is_err());
        let a = ArrayGeometry::default();
        assert!(a.steering_vector(Direction { u: 1.0, v: 0.5 }).is_err());
    }

    #[test]
    fn supported_sizes() {
        for (n, rows, cols) in [(256, 16, 16), (512, 16, 32), (1024, 32, 32)] {
            let a = ArrayGeometry::with_elements(n).unwrap();
            assert_eq!((a.n_rows, a.n_cols), (rows, cols));
        }
    }

    #[test]
    fn element_gain_examples() {
        let a = ArrayGeometry::default();
        assert_eq!(a.element_gain_db(0.0).unwrap(), a.max_element_gain_dbi);
        assert_eq!(a.element_gain_db(90.0).unwrap(), a.max_element_gain_dbi - 30.0);
        // 10 log10(cos^2 60°)
        let g = a.element_gain_db(60.0).unwrap();
        assert!((g - (a.max_element_gain_dbi - 6.0206)).abs() < 1e-4);
        assert!(a.element_gain_db(91.0).is_err());
        let mut prev = f64::INFINITY;
        for d in 0..=90 {
            let g = a.element_gain_db(d as f64).unwrap();
            assert!(g <= prev);
            prev = g;
        }
    }

    #[test]
    fn orthogonal_beams_on_half_wave_lattice() {
        let a = ArrayGeometry::default();
        let s0 = a.steering_vector(Direction::new(0.1, 0.0).unwrap()).unwrap();
        let s1 = a
            .steering_vector(Direction::new(0.1 + 2.0 / a.n_cols as f64, 0.0).unwrap())
            .unwrap();
        let ip: Complex64 = s0.iter().zip(&s1).map(|(x, y)| x.conj() * y).sum();
        assert!(ip.norm() < 1e-9, "{}", ip.norm());
    }

    #[test]
    fn single_beam_lattice() {
        let l = generate_beam_lattice(10.0, 1, ReuseScheme::Fr3, 20e9).unwrap();
        assert_eq!(l.len(), 1);
        assert!((l.bandwidth_share() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn seven_beam_fr3_centre_differs_from_ring() {
        let l = generate_beam_lattice(20.0, 7, ReuseScheme::Fr3, 20e9).unwrap();
        assert_eq!(l.len(), 7);
        let centre = &l.beams[0];
        assert_eq!(centre.center, Direction::BORESIGHT);
        for b in &l.beams[1..] {
            let d = b.center.u.hypot(b.center.v);
            assert!((d - l.spacing).abs() < 1e-12);
            assert_ne!(b.colour, centre.colour);
        }
        // Brute force: all 6 ring beams are adjacent to the centre and each
        // ring beam touches its two ring neighbours, 12 edges total.
        assert_eq!(l.adjacent_pairs().len(), 12);
    }

    #[test]
    fn ssb_cap_enforced() {
        let err = generate_beam_lattice(20.0, 65, ReuseScheme::Fr4, 20e9).unwrap_err();
        assert!(err.to_string().contains("64"), "{err}");
        assert!(generate_beam_lattice(20.0, 64, ReuseScheme::Fr4, 20e9).is_ok());
        let err = generate_beam_lattice(20.0, 9, ReuseScheme::Fr3, 2e9).unwrap_err();
        assert!(err.to_string().contains('8'), "{err}");
    }

    #[test]
    fn colourings_valid_up_to_cap() {
        for scheme in [ReuseScheme::Fr3, ReuseScheme::Fr4] {
            for n in 1..=64 {
                let l = generate_beam_lattice(25.0, n, scheme, 20e9).unwrap();
                for (a, b) in l.adjacent_pairs() {
                    assert_ne!(l.beams[a].colour, l.beams[b].colour, "{scheme:?} n={n}");
                }
                assert!(l.beams.iter().all(|b| b.colour < scheme.n_colours()));
                assert_eq!(l.bandwidth_share() * l.n_colours() as f64, 1.0);
            }
        }
    }

    #[test]
    fn full_reuse_single_colour() {
        let l = generate_beam_lattice(15.0, 19, ReuseScheme::Full, 20e9).unwrap();
        assert!(l.beams.iter().all(|b| b.colour == 0));
        assert_eq!(l.bandwidth_share(), 1.0);
    }

    #[test]
    fn csv_export() {
        let l = generate_beam_lattice(15.0, 3, ReuseScheme::Fr3, 20e9).unwrap();
        let csv = l.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("beam_id,u,v,colour"));
        assert_eq!(lines.count(), 3);
    }
}
