//! Closed-form cost envelope and capacity bracket.

use serde::Serialize;

use crate::feasibility::k_threshold;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsReport {
    /// Cost with no battery, $.
    pub j_max: f64,
    /// Floor on the optimal cost at any capacity, $.
    pub j_lower: f64,
    /// Capacity below which the peak limit cannot be honored, Wh.
    pub c_lb: f64,
    /// Capacity above which extra storage cannot be used, Wh.
    pub c_ub: f64,
    /// `max C_g − K·Z/η_B`, $/Wh.
    pub a1: f64,
    /// `min C_g`, $/Wh.
    pub a2: f64,
    /// `max_k (P_load − η_pv·P_pv)`, W.
    pub max_net_load: f64,
    /// `max_k (η_pv·P_pv − P_load)`, W.
    pub max_net_surplus: f64,
}

/// `Σ_k C_g(k)·(P_load(k) − η_pv·P_pv(k))·δt`.
pub fn j_max(scenario: &Scenario) -> f64 {
    let dt = scenario.dt();
    (0..scenario.len()).map(|k| scenario.price(k) * scenario.net_load(k) * dt).sum()
}

pub fn max_net_load(scenario: &Scenario) -> f64 {
    (0..scenario.len()).map(|k| scenario.net_load(k)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn max_net_surplus(scenario: &Scenario) -> f64 {
    (0..scenario.len()).map(|k| -scenario.net_load(k)).fold(f64::NEG_INFINITY, f64::max)
}

/// `j_max − (spread − kz_over_eta)·T·(D + surplus)`.
///
/// Returns `j_max` when the spread does not beat the aging cost, and when
/// `D + surplus ≤ 0` (the battery can never charge).
pub fn j_lower_from(j_max: f64, spread: f64, kz_over_eta: f64, horizon: f64, d_plus_surplus: f64) -> f64 {
    let gain = spread - kz_over_eta;
    if gain <= 0.0 || d_plus_surplus <= 0.0 {
        return j_max;
    }
    j_max - gain * horizon * d_plus_surplus
}

pub fn j_lower_bound(scenario: &Scenario) -> f64 {
    let p = scenario.params();
    let jm = j_max(scenario);
    if p.k >= k_threshold(scenario) {
        return jm;
    }
    j_lower_from(
        jm,
        scenario.max_price() - scenario.min_price(),
        p.k * p.z / p.eta_b,
        scenario.horizon(),
        p.d + max_net_surplus(scenario),
    )
}

/// `(c_lb, c_ub)` in Wh.
pub fn capacity_bounds(scenario: &Scenario) -> (f64, f64) {
    let p = scenario.params();
    let c_lb = libm::fmax(p.t_c / p.eta_b * (max_net_load(scenario) - p.d), 0.0);
    let t = scenario.horizon();
    let factor = libm::fmax(p.eta_b * p.t_c + p.z * t / p.eta_b, p.eta_b * t);
    let c_ub = libm::fmax(factor * (p.d + max_net_surplus(scenario)), 0.0);
    (c_lb, c_ub)
}

pub fn bounds_report(scenario: &Scenario) -> BoundsReport {
    let p = scenario.params();
    let (c_lb, c_ub) = capacity_bounds(scenario);
    BoundsReport {
        j_max: j_max(scenario),
        j_lower: j_lower_bound(scenario),
        c_lb,
        c_ub,
        a1: scenario.max_price() - p.k * p.z / p.eta_b,
        a2: scenario.min_price(),
        max_net_load: max_net_load(scenario),
        max_net_surplus: max_net_surplus(scenario),
    }
}
