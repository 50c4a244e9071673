//! Greedy OMA baseline without fairness.
//!
//! UEs are served in order of their best subcarrier gain. Each one grabs its
//! strongest remaining subcarriers one at a time for as long as that raises
//! its own energy efficiency, picks the transmit power that is best for
//! itself, and leaves the rest to later UEs. The only thing it leaves
//! untouched is the smallest set of subcarriers that later UEs need to carry
//! their payload at full power.

use std::f64::consts::LN_2;

use crate::error::{NtnError, Result};

use super::{EEResult, Method, UplinkScenario};

const BISECTION_STEPS: usize = 200;

/// A UE transmitting on a fixed set of subcarriers with its power split evenly.
struct Link {
    gains: Vec<f64>,
    sub_bw: f64,
    noise: f64,
}

impl Link {
    fn snr_per_watt(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.gains.len() as f64;
        self.gains.iter().map(move |g| g / (n * self.noise))
    }

    fn rate(&self, p: f64) -> f64 {
        self.snr_per_watt().map(|k| self.sub_bw * (1.0 + p * k).log2()).sum()
    }

    fn rate_slope(&self, p: f64) -> f64 {
        self.snr_per_watt().map(|k| self.sub_bw * k / ((1.0 + p * k) * LN_2)).sum()
    }

    /// Least power reaching `target`, if `p_max` suffices.
    fn min_power(&self, target: f64, p_max: f64) -> Option<f64> {
        if self.rate(p_max) < target {
            return None;
        }
        let (mut lo, mut hi) = (0.0, p_max);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if self.rate(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    /// Power in `[p_lo, p_hi]` maximizing `rate(p) / (p + overhead)`. The
    /// ratio is quasi-concave, so its derivative sign changes once.
    fn selfish_power(&self, p_lo: f64, p_hi: f64, overhead: f64) -> f64 {
        let sign = |p: f64| self.rate_slope(p) * (p + overhead) - self.rate(p);
        if sign(p_lo) <= 0.0 {
            return p_lo;
        }
        if sign(p_hi) >= 0.0 {
            return p_hi;
        }
        let (mut lo, mut hi) = (p_lo, p_hi);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if sign(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn link(scenario: &UplinkScenario, ue: usize, subcarriers: &[usize]) -> Link {
    let sub_bw = scenario.subcarrier_bandwidth_hz();
    Link {
        gains: subcarriers.iter().map(|&s| scenario.gains[ue][s]).collect(),
        sub_bw,
        noise: scenario.noise_psd_w_hz * sub_bw,
    }
}

fn by_gain(scenario: &UplinkScenario, ue: usize, pool: &[usize]) -> Vec<usize> {
    let mut sorted = pool.to_vec();
    sorted.sort_by(|&a, &b| scenario.gains[ue][b].total_cmp(&scenario.gains[ue][a]).then(a.cmp(&b)));
    sorted
}

/// Fewest of `ue`'s best subcarriers in `pool` that carry the payload at
/// full power.
fn minimal_share(scenario: &UplinkScenario, ue: usize, pool: &[usize]) -> Option<Vec<usize>> {
    let target = scenario.required_rate_bps();
    let sorted = by_gain(scenario, ue, pool);
    (1..=sorted.len()).find_map(|n| {
        let take = &sorted[..n];
        (link(scenario, ue, take).rate(scenario.max_ue_power_w) >= target).then(|| take.to_vec())
    })
}

pub fn greedy_baseline(scenario: &UplinkScenario) -> Result<EEResult> {
    scenario.validate()?;
    let n = scenario.n_ues();
    let target = scenario.required_rate_bps();
    let p_max = scenario.max_ue_power_w;
    let overhead = scenario.circuit_power_w / n as f64;

    let best_gain = |u: usize| scenario.gains[u].iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| best_gain(b).total_cmp(&best_gain(a)).then(a.cmp(&b)));

    let mut pool: Vec<usize> = (0..scenario.n_subcarriers()).collect();
    let mut power = vec![0.0; n];
    let mut rate = vec![0.0; n];
    for (pos, &ue) in order.iter().enumerate() {
        // Hold back what the later UEs need, simulating them in turn.
        let mut reserved = Vec::new();
        let mut rest: Vec<usize> = pool.clone();
        for &later in &order[pos + 1..] {
            if let Some(share) = minimal_share(scenario, later, &rest) {
                rest.retain(|s| !share.contains(s));
                reserved.extend(share);
            }
        }
        let open: Vec<usize> = pool.iter().copied().filter(|s| !reserved.contains(s)).collect();
        let candidates = by_gain(scenario, ue, &open);

        let mut best: Option<(f64, usize, f64)> = None;
        for take in 1..=candidates.len() {
            let l = link(scenario, ue, &candidates[..take]);
            let Some(p_lo) = l.min_power(target, p_max) else {
                continue;
            };
            let p = l.selfish_power(p_lo, p_max, overhead);
            let ee = l.rate(p) / (p + overhead);
            match best {
                Some((best_ee, _, _)) if ee <= best_ee => break,
                _ => best = Some((ee, take, p)),
            }
        }
        let Some((_, take, p)) = best else {
            let all = link(scenario, ue, &candidates);
            return Err(NtnError::Infeasible {
                ue,
                required_bps: target,
                max_rate_bps: all.rate(p_max),
            });
        };
        let chosen = &candidates[..take];
        power[ue] = p;
        rate[ue] = link(scenario, ue, chosen).rate(p);
        pool.retain(|s| !chosen.contains(s));
    }
    Ok(EEResult::new(Method::Greedy, power, rate, scenario.circuit_power_w, scenario.frame_s, Vec::new()))
}
