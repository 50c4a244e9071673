//! Full-reuse precoders (MMSE, ZF, location-based MMSE) with the
//! maximum-per-feed power normalisation, the fixed-beam frequency-reuse
//! baseline, and SINR/capacity evaluation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array::{ArrayGeometry, BeamLattice};
use crate::channel::{ChannelKind, ChannelMatrix};
use crate::error::{NtnError, Result};

/// Precoding weights, one row per radiating element and one column per served user.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodingMatrix {
    pub entries: DMatrix<Complex64>,
    pub total_power_w: f64,
    pub per_feed_power_cap_w: f64,
    /// Positive scalar applied to the unnormalised matrix.
    pub scale: f64,
}

impl PrecodingMatrix {
    /// `Σ_u |w_{n,u}|²` for every element `n`.
    pub fn feed_powers(&self) -> Vec<f64> {
        feed_powers(&self.entries)
    }

    pub fn radiated_power(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn feed_powers(w: &DMatrix<Complex64>) -> Vec<f64> {
    w.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
}

/// Maximum power constraint: one positive scalar so that the hottest feed
/// radiates exactly `total_power / N`.
pub fn normalize_max_power(unnormalized: DMatrix<Complex64>, total_power_w: f64) -> Result<PrecodingMatrix> {
    if !(total_power_w > 0.0) || !total_power_w.is_finite() {
        return Err(NtnError::Domain(format!("total power must be positive, got {total_power_w}")));
    }
    let n = unnormalized.nrows() as f64;
    let hottest = feed_powers(&unnormalized).into_iter().fold(0.0, f64::max);
    if !(hottest > 0.0) || !hottest.is_finite() {
        return Err(NtnError::Numerical("precoder has no finite non-zero feed".into()));
    }
    let cap = total_power_w / n;
    let scale = (cap / hottest).sqrt();
    Ok(PrecodingMatrix {
        entries: unnormalized * Complex64::new(scale, 0.0),
        total_power_w,
        per_feed_power_cap_w: cap,
        scale,
    })
}

/// `Hᴴ (H Hᴴ + αI)⁻¹`, solved through a Cholesky factorisation of the
/// users × users Gram matrix.
pub fn regularized_inverse(h: &DMatrix<Complex64>, alpha: f64) -> Result<DMatrix<Complex64>> {
    let (k, n) = h.shape();
    if k == 0 || n == 0 {
        return Err(NtnError::Contract("empty channel matrix".into()));
    }
    if k > n {
        return Err(NtnError::Contract(format!(
            "{k} users exceed {n} radiating elements"
        )));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NtnError::Numerical("channel contains non-finite entries".into()));
    }
    // Work on a unit-scale copy; the scale is restored on the way out.
    let s = h.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt();
    if s == 0.0 {
        return Err(NtnError::Numerical("channel matrix is identically zero".into()));
    }
    let hs = h.map(|z| z / s);
    let hh = hs.adjoint();
    let mut gram = &hs * &hh;
    let alpha_s = alpha / (s * s);
    for i in 0..k {
        gram[(i, i)] += Complex64::new(alpha_s, 0.0);
    }
    let max_diag = (0..k).map(|i| gram[(i, i)].re).fold(0.0, f64::max);
    let chol = gram.cholesky().ok_or_else(|| {
        NtnError::Numerical(if alpha == 0.0 {
            "H Hᴴ is singular; use a regularised (MMSE) precoder".into()
        } else {
            "regularised Gram matrix is not positive definite".into()
        })
    })?;
    // Squared Cholesky pivots are the Schur complements; a vanishing one
    // means the Gram matrix is singular to working precision.
    let l = chol.l_dirty();
    let min_pivot = (0..k).map(|i| l[(i, i)].norm_sqr()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-12 * max_diag {
        return Err(NtnError::Numerical(if alpha == 0.0 {
            "H Hᴴ is singular; use a regularised (MMSE) precoder".into()
        } else {
            "regularised Gram matrix is numerically singular".into()
        }));
    }
    let inv = chol.inverse();
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NtnError::Numerical("Gram matrix inverse is not finite".into()));
    }
    Ok((hh * inv).map(|z| z / s))
}

/// MMSE precoder with `α = K σ² / P_t`, normalised by the maximum power constraint.
pub fn mmse_precoder(h_est: &ChannelMatrix, noise_power_w: f64, total_power_w: f64) -> Result<PrecodingMatrix> {
    if !(noise_power_w >= 0.0) {
        return Err(NtnError::Domain("noise power must be non-negative".into()));
    }
    let alpha = h_est.n_users() as f64 * noise_power_w / total_power_w;
    normalize_max_power(regularized_inverse(&h_est.entries, alpha)?, total_power_w)
}

/// Zero-forcing precoder `Hᴴ (H Hᴴ)⁻¹`.
pub fn zf_precoder(h_est: &ChannelMatrix, total_power_w: f64) -> Result<PrecodingMatrix> {
    normalize_max_power(regularized_inverse(&h_est.entries, 0.0)?, total_power_w)
}

/// MMSE applied to a channel reconstructed from user locations.
pub fn lb_mmse_precoder(h_inferred: &ChannelMatrix, noise_power_w: f64, total_power_w: f64) -> Result<PrecodingMatrix> {
    if h_inferred.kind != ChannelKind::LocationInferred {
        return Err(NtnError::Contract(format!(
            "location-based MMSE needs a location-inferred channel, got {:?}",
            h_inferred.kind
        )));
    }
    mmse_precoder(h_inferred, noise_power_w, total_power_w)
}

/// `|h_u w_u|² / (Σ_{v≠u} |h_u w_v|² + σ_u²)` for every user.
pub fn compute_sinr(h_true: &ChannelMatrix, w: &PrecodingMatrix, noise_power_w: &[f64]) -> Result<Vec<f64>> {
    let (k, n) = h_true.entries.shape();
    if w.entries.nrows() != n || w.entries.ncols() != k || noise_power_w.len() != k {
        return Err(NtnError::Contract(format!(
            "cannot evaluate a {}x{} precoder on a {k}x{n} channel with {} noise terms",
            w.entries.nrows(),
            w.entries.ncols(),
            noise_power_w.len()
        )));
    }
    let g = &h_true.entries * &w.entries;
    Ok((0..k)
        .map(|u| {
            let signal = g[(u, u)].norm_sqr();
            let interference: f64 = (0..k).filter(|&v| v != u).map(|v| g[(u, v)].norm_sqr()).sum();
            signal / (interference + noise_power_w[u])
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserLink {
    pub sinr_linear: f64,
    pub allocated_bandwidth_hz: f64,
    pub spectral_efficiency_bps_hz: f64,
    pub rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkResult {
    pub users: Vec<UserLink>,
    pub system_capacity_bps: f64,
    pub mean_spectral_efficiency: f64,
}

impl LinkResult {
    pub fn mean_sinr_db(&self) -> f64 {
        if self.users.is_empty() {
            return f64::NEG_INFINITY;
        }
        let mean = self.users.iter().map(|u| u.sinr_linear).sum::<f64>() / self.users.len() as f64;
        10.0 * mean.log10()
    }
}

/// Shannon mapping of per-user SINR and bandwidth. `se_cap` optionally
/// clips the spectral efficiency (bit/s/Hz).
pub fn capacity(sinr: &[f64], bandwidth_hz: &[f64], se_cap: Option<f64>) -> Result<LinkResult> {
    if sinr.len() != bandwidth_hz.len() {
        return Err(NtnError::Contract("one bandwidth per user required".into()));
    }
    let mut users = Vec::with_capacity(sinr.len());
    for (&s, &b) in sinr.iter().zip(bandwidth_hz) {
        if !(s >= 0.0) || !(b > 0.0) {
            return Err(NtnError::Domain(format!("invalid link: sinr {s}, bandwidth {b}")));
        }
        let mut se = (1.0 + s).log2();
        if let Some(cap) = se_cap {
            se = se.min(cap);
        }
        users.push(UserLink {
            sinr_linear: s,
            allocated_bandwidth_hz: b,
            spectral_efficiency_bps_hz: se,
            rate_bps: b * se,
        });
    }
    let system_capacity_bps = users.iter().map(|u| u.rate_bps).sum();
    let mean_spectral_efficiency = if users.is_empty() {
        0.0
    } else {
        users.iter().map(|u| u.spectral_efficiency_bps_hz).sum::<f64>() / users.len() as f64
    };
    Ok(LinkResult {
        users,
        system_capacity_bps,
        mean_spectral_efficiency,
    })
}

/// Outcome of the fixed-beam frequency-reuse baseline for one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct FrOutcome {
    /// Every user's link when it is the scheduled user of its beam.
    pub link: LinkResult,
    pub beam_of_user: Vec<usize>,
    /// Round-robin throughput of each user: its rate divided by the
    /// number of users sharing its beam.
    pub served_rate_bps: Vec<f64>,
    /// Sum of round-robin throughputs.
    pub system_capacity_bps: f64,
}

/// Fixed beams on the lattice, each a steering vector towards its centre
/// with `P_t / n_beams`; every user is attached to its best-gain beam and
/// the users of a beam share it in round robin. Interference comes only from
/// occupied co-colour beams; each user occupies `B / n_colours`.
pub fn fr_transmit(
    h_true: &ChannelMatrix,
    lattice: &BeamLattice,
    array: &ArrayGeometry,
    total_power_w: f64,
    se_cap: Option<f64>,
) -> Result<FrOutcome> {
    let (k, n) = h_true.entries.shape();
    if k == 0 {
        return Err(NtnError::Contract("no users to serve".into()));
    }
    if lattice.is_empty() {
        return Err(NtnError::Contract("beam lattice is empty".into()));
    }
    if array.n_elements() != n {
        return Err(NtnError::Contract(format!(
            "array has {} elements but the channel has {n}",
            array.n_elements()
        )));
    }
    let per_beam = total_power_w / lattice.len() as f64;
    let amp = (per_beam / n as f64).sqrt();
    let mut beams = DMatrix::<Complex64>::zeros(n, lattice.len());
    for (b, beam) in lattice.beams.iter().enumerate() {
        for (e, a) in array.steering_vector(beam.center)?.into_iter().enumerate() {
            beams[(e, b)] = a * amp;
        }
    }
    // Received amplitude of every beam at every user.
    let g = &h_true.entries * &beams;
    let beam_of_user: Vec<usize> = (0..k)
        .map(|u| {
            let mut best = 0;
            for b in 1..lattice.len() {
                if g[(u, b)].norm_sqr() > g[(u, best)].norm_sqr() {
                    best = b;
                }
            }
            best
        })
        .collect();
    let mut load = vec![0usize; lattice.len()];
    for &b in &beam_of_user {
        load[b] += 1;
    }
    let share = lattice.bandwidth_share();
    let bandwidth = h_true.bandwidth_hz * share;
    let sinr: Vec<f64> = (0..k)
        .map(|u| {
            let own = beam_of_user[u];
            let colour = lattice.beams[own].colour;
            let interference: f64 = lattice
                .beams
                .iter()
                .enumerate()
                .filter(|&(b, beam)| b != own && load[b] > 0 && beam.colour == colour)
                .map(|(b, _)| g[(u, b)].norm_sqr())
                .sum();
            g[(u, own)].norm_sqr() / (interference + h_true.noise_power_w[u] * share)
        })
        .collect();
    let link = capacity(&sinr, &vec![bandwidth; k], se_cap)?;
    let served_rate_bps: Vec<f64> = link
        .users
        .iter()
        .zip(&beam_of_user)
        .map(|(l, &b)| l.rate_bps / load[b] as f64)
        .collect();
    let system_capacity_bps = served_rate_bps.iter().sum();
    Ok(FrOutcome {
        link,
        beam_of_user,
        served_rate_bps,
        system_capacity_bps,
    })
}
