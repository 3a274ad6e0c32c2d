//! Critical capacity: the smallest capacity whose optimal cost is within
//! `τ_cost` of the cost at the upper capacity bound.
//!
//! Two searches share one cost oracle `J(C)`: a linear sweep down from
//! `c_ub` in steps of `τ_cap`, and a bisection on `[c_lb, c_ub]` that always
//! compares against the pinned value `J(c_ub)`. Infeasible capacities cost
//! `+∞`.

use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, capacity_bounds};
use crate::dispatch::{self, DispatchError};
use crate::feasibility::{check_assumptions, partition, Reason};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sweep,
    Bisect,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SizingConfig {
    /// Capacity step and precision, Wh.
    pub tau_cap: f64,
    /// Costs closer than this are equal, $.
    pub tau_cost: f64,
    /// Sampling interval the scenario must use, hours.
    pub dt: f64,
    pub algorithm: Algorithm,
}

impl Default for SizingConfig {
    fn default() -> Self {
        Self { tau_cap: 10.0, tau_cost: 1e-4, dt: 1.0, algorithm: Algorithm::Bisect }
    }
}

impl SizingConfig {
    pub fn validate(&self) -> Result<(), SizingError> {
        for (name, value) in [("tau_cap", self.tau_cap), ("tau_cost", self.tau_cost), ("dt", self.dt)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SizingError::Config { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SizingError {
    #[error("sizing: {name} must be finite and > 0, got {value}")]
    Config { name: &'static str, value: f64 },
    #[error("sizing: sampling interval {config} h does not match the scenario's {scenario} h")]
    DtMismatch { config: f64, scenario: f64 },
    #[error("sizing: no feasible control exists: {}", .0.describe())]
    NotOperable(Reason),
    #[error(
        "sizing: battery is not economic (K = {k} >= threshold {k_threshold} $/Wh) but some samples force a discharge, so no capacity is both feasible and worth buying"
    )]
    NotEconomic { k: f64, k_threshold: f64 },
    #[error("sizing: dispatch is infeasible even at the upper capacity bound {c_ub} Wh")]
    InfeasibleAtUpperBound { c_ub: f64 },
    #[error("sizing: {0}")]
    Dispatch(DispatchError),
}

/// Outcome of a search over an abstract cost function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub c_critical: f64,
    pub j_at_critical: f64,
    pub solves: usize,
    /// Every `(C, J(C))` evaluated, in order.
    pub trace: Vec<(f64, f64)>,
    /// The sweep never saw the cost rise by `τ_cost`.
    pub flat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizingResult {
    pub c_critical: f64,
    pub j_at_critical: f64,
    pub c_lb: f64,
    pub c_ub: f64,
    pub lp_solves: usize,
    pub trace: Vec<(f64, f64)>,
    pub algorithm_used: Algorithm,
    /// The sweep reached the bottom of the bracket without a cost rise.
    pub flat_cost: bool,
    /// The battery is not economic; the result is `C = 0` without solving.
    pub short_circuit: bool,
}

/// `⌈(c_ub − c_lb)/τ⌉`, zero for an empty bracket.
pub fn sweep_length(c_lb: f64, c_ub: f64, tau_cap: f64) -> usize {
    let span = c_ub - c_lb;
    if span <= 0.0 {
        0
    } else {
        libm::ceil(span / tau_cap) as usize
    }
}

/// Worst-case bisection solve count, `⌈log2((c_ub − c_lb)/τ)⌉ + 1`.
pub fn bisection_max_solves(c_lb: f64, c_ub: f64, tau_cap: f64) -> usize {
    let span = c_ub - c_lb;
    if span <= tau_cap {
        1
    } else {
        libm::ceil(libm::log2(span / tau_cap)) as usize + 1
    }
}

/// Linear sweep `C_i = c_ub − i·τ_cap`, `i = 0..=L`, clamped at zero.
///
/// Stops at the first `i ≥ 1` with `J(C_i) − J(C_0) ≥ τ_cost` and returns
/// `C_{i−1}`; otherwise returns `C_L` and sets `flat`.
pub fn sweep_search<E>(
    c_lb: f64,
    c_ub: f64,
    tau_cap: f64,
    tau_cost: f64,
    mut cost: impl FnMut(f64) -> Result<f64, E>,
) -> Result<SearchOutcome, E> {
    let l = sweep_length(c_lb, c_ub, tau_cap);
    let j0 = cost(c_ub)?;
    let mut trace = Vec::with_capacity(l + 1);
    trace.push((c_ub, j0));
    for i in 1..=l {
        let c = libm::fmax(c_ub - i as f64 * tau_cap, 0.0);
        let j = cost(c)?;
        trace.push((c, j));
        if j - j0 >= tau_cost {
            let (c_prev, j_prev) = trace[i - 1];
            return Ok(SearchOutcome { c_critical: c_prev, j_at_critical: j_prev, solves: trace.len(), trace, flat: false });
        }
    }
    let (c, j) = trace[trace.len() - 1];
    Ok(SearchOutcome { c_critical: c, j_at_critical: j, solves: trace.len(), trace, flat: true })
}

/// Bisection on `[c_lb, c_ub]` against the pinned `J(c_ub)`.
///
/// The midpoint replaces the upper end when its cost is within `τ_cost`
/// of `J(c_ub)` and the lower end otherwise; the search stops once the
/// bracket is no wider than `τ_cap` and returns the upper end.
pub fn bisection_search<E>(
    c_lb: f64,
    c_ub: f64,
    tau_cap: f64,
    tau_cost: f64,
    mut cost: impl FnMut(f64) -> Result<f64, E>,
) -> Result<SearchOutcome, E> {
    let j_ub = cost(c_ub)?;
    let mut trace = alloc::vec![(c_ub, j_ub)];
    let (mut c1, mut c2, mut j2) = (c_lb, c_ub, j_ub);
    while c2 - c1 > tau_cap {
        let c3 = 0.5 * (c1 + c2);
        let j3 = cost(c3)?;
        trace.push((c3, j3));
        if j3 - j_ub < tau_cost {
            c2 = c3;
            j2 = j3;
        } else {
            c1 = c3;
        }
    }
    Ok(SearchOutcome { c_critical: c2, j_at_critical: j2, solves: trace.len(), trace, flat: false })
}

/// `J(C)` for sizing: the optimal dispatch cost, `+∞` when infeasible.
pub fn cost_at(scenario: &Scenario, c_ref: f64) -> Result<f64, DispatchError> {
    match dispatch::optimal_cost(scenario, c_ref) {
        Ok(sol) => Ok(sol.j),
        Err(DispatchError::Infeasible(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

enum Gate {
    Search { c_lb: f64, c_ub: f64 },
    Done(SizingResult),
}

fn gate(scenario: &Scenario, config: &SizingConfig, algorithm: Algorithm) -> Result<Gate, SizingError> {
    config.validate()?;
    if (scenario.dt() - config.dt).abs() > 1e-12 * config.dt {
        return Err(SizingError::DtMismatch { config: config.dt, scenario: scenario.dt() });
    }
    let check = check_assumptions(scenario);
    if !check.assumption1 {
        return Err(SizingError::NotOperable(check.reason));
    }
    let (c_lb, c_ub) = capacity_bounds(scenario);
    if !check.assumption2 {
        if !partition(scenario).s1.is_empty() {
            return Err(SizingError::NotEconomic { k: check.k, k_threshold: check.k_threshold });
        }
        return Ok(Gate::Done(SizingResult {
            c_critical: 0.0,
            j_at_critical: bounds::j_max(scenario),
            c_lb,
            c_ub,
            lp_solves: 0,
            trace: Vec::new(),
            algorithm_used: algorithm,
            flat_cost: false,
            short_circuit: true,
        }));
    }
    Ok(Gate::Search { c_lb, c_ub })
}

fn finish(
    outcome: Result<SearchOutcome, DispatchError>,
    c_lb: f64,
    c_ub: f64,
    algorithm: Algorithm,
) -> Result<SizingResult, SizingError> {
    let outcome = outcome.map_err(SizingError::Dispatch)?;
    if !outcome.trace[0].1.is_finite() {
        return Err(SizingError::InfeasibleAtUpperBound { c_ub });
    }
    Ok(SizingResult {
        c_critical: outcome.c_critical,
        j_at_critical: outcome.j_at_critical,
        c_lb,
        c_ub,
        lp_solves: outcome.solves,
        trace: outcome.trace,
        algorithm_used: algorithm,
        flat_cost: outcome.flat,
        short_circuit: false,
    })
}

pub fn algorithm1_sweep(scenario: &Scenario, config: &SizingConfig) -> Result<SizingResult, SizingError> {
    match gate(scenario, config, Algorithm::Sweep)? {
        Gate::Done(r) => Ok(r),
        Gate::Search { c_lb, c_ub } => {
            let out = sweep_search(c_lb, c_ub, config.tau_cap, config.tau_cost, |c| cost_at(scenario, c));
            finish(out, c_lb, c_ub, Algorithm::Sweep)
        }
    }
}

pub fn algorithm2_bisection(scenario: &Scenario, config: &SizingConfig) -> Result<SizingResult, SizingError> {
    match gate(scenario, config, Algorithm::Bisect)? {
        Gate::Done(r) => Ok(r),
        Gate::Search { c_lb, c_ub } => {
            let out = bisection_search(c_lb, c_ub, config.tau_cap, config.tau_cost, |c| cost_at(scenario, c));
            finish(out, c_lb, c_ub, Algorithm::Bisect)
        }
    }
}

/// Runs the algorithm named in `config`.
pub fn size(scenario: &Scenario, config: &SizingConfig) -> Result<SizingResult, SizingError> {
    match config.algorithm {
        Algorithm::Sweep => algorithm1_sweep(scenario, config),
        Algorithm::Bisect => algorithm2_bisection(scenario, config),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SavingsReport {
    pub j_max: f64,
    pub j_critical: f64,
    pub savings: f64,
    /// `100·savings/j_max`, only when `j_max > 0`.
    pub percentage: Option<f64>,
}

pub fn savings(j_max: f64, j_critical: f64) -> SavingsReport {
    let savings = j_max - j_critical;
    SavingsReport { j_max, j_critical, savings, percentage: (j_max > 0.0).then(|| 100.0 * savings / j_max) }
}

pub fn savings_report(scenario: &Scenario, result: &SizingResult) -> SavingsReport {
    savings(bounds::j_max(scenario), result.j_at_critical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{synth_scenario, LoadKind, PvVariation, SystemParams, Tariff, TimeSeries};
    use approx::assert_abs_diff_eq;
    use core::convert::Infallible;
    use proptest::prelude::*;

    /// Piecewise-linear cost with a knee at `knee`.
    fn knee_cost(knee: f64) -> impl FnMut(f64) -> Result<f64, Infallible> {
        move |c| Ok(if c >= knee { 1.0 } else { 1.0 + 1e-3 * (knee - c) })
    }

    #[test]
    fn bisection_solve_count_on_reported_interval() {
        let mut calls = 0;
        let out = bisection_search(0.0, 39269.0, 10.0, 1e-4, |c| {
            calls += 1;
            knee_cost(16089.0)(c)
        })
        .unwrap();
        assert!(out.solves <= 13);
        assert_eq!(out.solves, calls);
        assert_eq!(bisection_max_solves(0.0, 39269.0, 10.0), 13);
        assert!((out.c_critical - 16089.0).abs() <= 10.0);
    }

    #[test]
    fn bisection_flat_collapses_to_lower_end() {
        let out = bisection_search(100.0, 1700.0, 10.0, 1e-4, |_| Ok::<_, Infallible>(2.0)).unwrap();
        assert!(out.c_critical - 100.0 <= 10.0);
        assert_eq!(out.solves, bisection_max_solves(100.0, 1700.0, 10.0));
    }

    #[test]
    fn sweep_flat_runs_to_bottom() {
        let out = sweep_search(95.0, 1000.0, 10.0, 1e-4, |_| Ok::<_, Infallible>(2.0)).unwrap();
        assert!(out.flat);
        assert_eq!(out.solves, sweep_length(95.0, 1000.0, 10.0) + 1);
        assert_abs_diff_eq!(out.c_critical, 90.0, epsilon = 1e-9);
    }

    #[test]
    fn sweep_stops_after_knee() {
        let out = sweep_search(0.0, 1000.0, 10.0, 1e-4, knee_cost(503.0)).unwrap();
        assert!(!out.flat);
        assert_abs_diff_eq!(out.c_critical, 510.0, epsilon = 1e-9);
        assert_eq!(out.solves, 51);
    }

    #[test]
    fn savings_examples() {
        let t1 = savings(0.9212, 0.8390);
        assert_abs_diff_eq!(t1.savings, 0.0822, epsilon = 1e-12);
        assert_abs_diff_eq!(t1.percentage.unwrap(), 8.92, epsilon = 5e-3);
        let t2 = savings(-0.1921, -0.3222);
        assert_abs_diff_eq!(t2.savings, 0.1301, epsilon = 1e-12);
        assert_eq!(t2.percentage, None);
        assert_eq!(savings(0.5, 0.5).savings, 0.0);
    }

    #[test]
    fn config_validation() {
        let bad = SizingConfig { tau_cap: 0.0, ..SizingConfig::default() };
        assert!(matches!(bad.validate(), Err(SizingError::Config { name: "tau_cap", .. })));
        let bad = SizingConfig { tau_cost: -1.0, ..SizingConfig::default() };
        assert!(matches!(bad.validate(), Err(SizingError::Config { name: "tau_cost", .. })));
    }

    #[test]
    fn gates_before_solving() {
        let flat = Scenario::new(
            TimeSeries::new(0.0, 1.0, alloc::vec![0.0; 4]).unwrap(),
            TimeSeries::new(0.0, 1.0, alloc::vec![900.0; 4]).unwrap(),
            Tariff::summer_tou(),
            SystemParams::default(),
        )
        .unwrap();
        assert!(matches!(
            algorithm2_bisection(&flat, &SizingConfig::default()),
            Err(SizingError::NotOperable(Reason::InitialSampleMustDischarge { .. }))
        ));

        let res = synth_scenario(LoadKind::Residential, 1, 1.0, PvVariation::Low).unwrap();
        let costly = res.with_params(SystemParams { k: 0.35, ..*res.params() }).unwrap();
        assert!(matches!(algorithm1_sweep(&costly, &SizingConfig::default()), Err(SizingError::NotEconomic { .. })));

        let com = synth_scenario(LoadKind::Commercial, 1, 1.0, PvVariation::Low).unwrap();
        let costly = com.with_params(SystemParams { k: 0.35, ..*com.params() }).unwrap();
        let r = algorithm1_sweep(&costly, &SizingConfig::default()).unwrap();
        assert!(r.short_circuit);
        assert_eq!((r.c_critical, r.lp_solves), (0.0, 0));
        assert_eq!(r.j_at_critical, bounds::j_max(&costly));

        let cfg = SizingConfig { dt: 0.5, ..SizingConfig::default() };
        assert!(matches!(size(&com, &cfg), Err(SizingError::DtMismatch { .. })));
    }

    #[test]
    fn forced_flat_cost_sweep() {
        // K above the threshold on a scenario with no forced discharge: J ≡ J_max
        let com = synth_scenario(LoadKind::Commercial, 1, 1.0, PvVariation::Low).unwrap();
        let sc = com.with_params(SystemParams { k: 0.35, ..*com.params() }).unwrap();
        let (c_lb, c_ub) = capacity_bounds(&sc);
        let jm = bounds::j_max(&sc);
        let out = sweep_search(c_lb, c_ub, 2000.0, 1e-4, |c| cost_at(&sc, c)).unwrap();
        assert!(out.flat);
        assert!(out.trace.iter().all(|&(_, j)| (j - jm).abs() <= 1e-9));
        assert!(out.c_critical <= c_lb);
    }

    #[test]
    fn residential_algorithms_agree() {
        let sc = synth_scenario(LoadKind::Residential, 1, 1.0, PvVariation::Low).unwrap();
        let cfg = SizingConfig { tau_cap: 100.0, ..SizingConfig::default() };
        let a = algorithm1_sweep(&sc, &cfg).unwrap();
        let b = algorithm2_bisection(&sc, &cfg).unwrap();
        assert!((a.c_critical - b.c_critical).abs() <= cfg.tau_cap, "{} vs {}", a.c_critical, b.c_critical);
        for r in [&a, &b] {
            assert!(r.c_critical >= r.c_lb - cfg.tau_cap && r.c_critical <= r.c_ub);
            assert!(r.j_at_critical - r.trace[0].1 < cfg.tau_cost);
        }
        assert!(a.lp_solves <= sweep_length(a.c_lb, a.c_ub, cfg.tau_cap) + 1);
        assert!(b.lp_solves <= bisection_max_solves(b.c_lb, b.c_ub, cfg.tau_cap));
        for w in a.trace.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-9);
        }
    }

    proptest! {
        #[test]
        fn searches_agree_on_monotone_knees(frac in 0.0f64..1.0, lb in 0.0f64..1000.0, tau in 1.0f64..200.0) {
            let ub = lb + 5000.0;
            let knee = lb + frac * 5000.0;
            let a = sweep_search(lb, ub, tau, 1e-4, knee_cost(knee)).unwrap();
            let b = bisection_search(lb, ub, tau, 1e-4, knee_cost(knee)).unwrap();
            prop_assert!((a.c_critical - b.c_critical).abs() <= tau + 1e-9);
            prop_assert!(a.c_critical >= lb - tau && a.c_critical <= ub);
            prop_assert!(b.solves <= bisection_max_solves(lb, ub, tau));
            prop_assert!(a.solves <= sweep_length(lb, ub, tau) + 1);
        }
    }
}
