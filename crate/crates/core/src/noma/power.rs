//! Energy-efficient uplink power allocation for NOMA groups.
//!
//! Within a group every UE spreads its power evenly over the group's
//! subcarriers and sees the group-mean gain. The UAV decodes the group with
//! SIC in `sic_order`, so UE `i` is interfered only by UEs decoded after it.
//! Writing `q_i` for received powers, the minimum-rate constraints are
//! linear in `q`, the group sum rate depends only on `Q = Σ q_i`, and the
//! cheapest way to reach a given `Q` is a piecewise-linear convex cost. The
//! outer problem is solved with Dinkelbach's method.

use std::f64::consts::LN_2;

use crate::error::{NtnError, Result};

use super::{EEResult, Method, NomaGrouping, UplinkScenario};

const MAX_OUTER_ITERATIONS: usize = 50;
const OBJECTIVE_TOLERANCE: f64 = 1e-6;

/// Uplink SIC rates for received powers listed in decoding order.
pub fn sic_rates(bandwidth_hz: f64, noise_w: f64, received_w: &[f64]) -> Vec<f64> {
    let mut rates = vec![0.0; received_w.len()];
    let mut later = 0.0;
    for i in (0..received_w.len()).rev() {
        rates[i] = bandwidth_hz * (1.0 + received_w[i] / (noise_w + later)).log2();
        later += received_w[i];
    }
    rates
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    start: f64,
    end: f64,
    /// Transmit watts per received watt on this stretch.
    slope: f64,
    member: usize,
}

/// One NOMA group reduced to its SIC-ordered members.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupProblem {
    /// UE indices in decoding order.
    pub ues: Vec<usize>,
    /// Effective gain of each member, same order.
    pub gains: Vec<f64>,
    pub bandwidth_hz: f64,
    pub noise_w: f64,
    pub min_rate_bps: f64,
    pub max_power_w: f64,
}

/// Minimum-cost received powers of a group as a function of their total.
#[derive(Debug, Clone, PartialEq)]
pub struct CostCurve {
    base: Vec<f64>,
    base_total: f64,
    base_cost: f64,
    segments: Vec<Segment>,
}

impl CostCurve {
    pub fn min_total(&self) -> f64 {
        self.base_total
    }

    pub fn max_total(&self) -> f64 {
        self.segments.last().map_or(self.base_total, |s| s.end)
    }

    /// Received powers reaching `total` at minimum transmit power.
    pub fn received_at(&self, total: f64) -> Vec<f64> {
        let mut q = self.base.clone();
        for s in &self.segments {
            if total <= s.start {
                break;
            }
            q[s.member] += total.min(s.end) - s.start;
        }
        q
    }

    pub fn cost_at(&self, total: f64) -> f64 {
        let mut c = self.base_cost;
        for s in &self.segments {
            if total <= s.start {
                break;
            }
            c += (total.min(s.end) - s.start) * s.slope;
        }
        c
    }
}

impl GroupProblem {
    pub fn from_grouping(grouping: &NomaGrouping, g: usize, scenario: &UplinkScenario) -> Self {
        let sc = &grouping.subcarriers_of_group[g];
        let bandwidth_hz = sc.len() as f64 * scenario.subcarrier_bandwidth_hz();
        let gains = grouping.sic_order[g]
            .iter()
            .map(|&u| sc.iter().map(|&s| scenario.gains[u][s]).sum::<f64>() / sc.len() as f64)
            .collect();
        Self {
            ues: grouping.sic_order[g].clone(),
            gains,
            bandwidth_hz,
            noise_w: scenario.noise_psd_w_hz * bandwidth_hz,
            min_rate_bps: scenario.required_rate_bps(),
            max_power_w: scenario.max_ue_power_w,
        }
    }

    fn growth(&self) -> f64 {
        (self.min_rate_bps / self.bandwidth_hz).exp2()
    }

    /// Smallest received powers meeting every member's minimum rate.
    pub fn minimal_received(&self) -> Result<Vec<f64>> {
        let a = self.growth();
        let mut q = vec![0.0; self.ues.len()];
        let mut later = 0.0;
        for i in (0..self.ues.len()).rev() {
            let interference = self.noise_w + later;
            q[i] = (a - 1.0) * interference;
            let cap = self.max_power_w * self.gains[i];
            if !q[i].is_finite() || q[i] > cap * (1.0 + 1e-12) {
                return Err(NtnError::Infeasible {
                    ue: self.ues[i],
                    required_bps: self.min_rate_bps,
                    max_rate_bps: self.bandwidth_hz * (1.0 + cap / interference).log2(),
                });
            }
            later += q[i];
        }
        Ok(q)
    }

    pub fn cost_curve(&self) -> Result<CostCurve> {
        let base = self.minimal_received()?;
        let k = base.len();
        let a = self.growth();
        let cap: Vec<f64> = self.gains.iter().map(|g| self.max_power_w * g).collect();
        let mut q = base.clone();
        let mut total: f64 = base.iter().sum();
        let mut segments = Vec::new();
        for m in 0..k {
            let mut room = (cap[m] - q[m]).max(0.0);
            let own_room = room;
            // Raising q_m adds interference to every member decoded before it,
            // all of which already transmit at their cap.
            let mut suffix: f64 = q[m..].iter().sum();
            for i in (0..m).rev() {
                let allowed = cap[i] / (a - 1.0) - self.noise_w - suffix;
                room = room.min(allowed.max(0.0));
                suffix += q[i];
            }
            if room > 0.0 {
                segments.push(Segment {
                    start: total,
                    end: total + room,
                    slope: 1.0 / self.gains[m],
                    member: m,
                });
                q[m] += room;
                total += room;
            }
            if room < own_room {
                break;
            }
        }
        let base_total = base.iter().sum();
        let base_cost = base.iter().zip(&self.gains).map(|(q, g)| q / g).sum();
        Ok(CostCurve {
            base,
            base_total,
            base_cost,
            segments,
        })
    }

    /// Maximizer of `B·log2(1 + Q/σ²) − λ·cost(Q)` over the feasible totals.
    pub fn best_total(&self, curve: &CostCurve, lambda: f64) -> f64 {
        if lambda <= 0.0 {
            return curve.max_total();
        }
        for s in &curve.segments {
            let stationary = self.bandwidth_hz / (lambda * s.slope * LN_2) - self.noise_w;
            if stationary <= s.start {
                return s.start;
            }
            if stationary < s.end {
                return stationary;
            }
        }
        curve.max_total()
    }

    pub fn sum_rate(&self, total: f64) -> f64 {
        self.bandwidth_hz * (1.0 + total / self.noise_w).log2()
    }
}

/// Dinkelbach maximization of `Σ rates / (Σ powers + P_c)` subject to every
/// UE meeting its payload within the frame at no more than its power cap.
/// The stopping test is on the objective measured in bit/s/Hz of the whole
/// band.
pub fn iterative_power_allocation(grouping: &NomaGrouping, scenario: &UplinkScenario) -> Result<EEResult> {
    scenario.validate()?;
    grouping.validate(scenario.n_ues(), scenario.n_subcarriers())?;
    let problems: Vec<GroupProblem> = (0..grouping.k()).map(|g| GroupProblem::from_grouping(grouping, g, scenario)).collect();
    let curves = problems.iter().map(GroupProblem::cost_curve).collect::<Result<Vec<_>>>()?;
    let n = scenario.n_ues();
    let mut lambda = 0.0;
    let mut trace = Vec::new();
    let mut power = vec![0.0; n];
    let mut rate = vec![0.0; n];
    for _ in 0..MAX_OUTER_ITERATIONS {
        for (p, c) in problems.iter().zip(&curves) {
            let q = c.received_at(p.best_total(c, lambda));
            let r = sic_rates(p.bandwidth_hz, p.noise_w, &q);
            for (i, &u) in p.ues.iter().enumerate() {
                power[u] = q[i] / p.gains[i];
                rate[u] = r[i];
            }
        }
        let sum_rate: f64 = rate.iter().sum();
        let spend = power.iter().sum::<f64>() + scenario.circuit_power_w;
        let objective = (sum_rate - lambda * spend) / scenario.bandwidth_hz;
        trace.push(objective);
        if objective.abs() < OBJECTIVE_TOLERANCE {
            break;
        }
        lambda = sum_rate / spend;
    }
    Ok(EEResult::new(Method::UavAi, power, rate, scenario.circuit_power_w, scenario.frame_s, trace))
}
