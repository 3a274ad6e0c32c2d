//! Optimal battery operation at a fixed capacity.
//!
//! The AC-side battery power is split as `u = u⁺ − u⁻` with both parts
//! non-negative, so the charge/discharge-dependent constraints become
//! linear. Per step `k` the decision vector holds `u⁺(k)` at column `k`
//! and `u⁻(k)` at column `n + k`. Stored energy and lost capacity are
//! prefix sums of those columns:
//!
//! - `ΔC(k) = (Z·δt/η_B)·Σ_{j<k} u⁻(j)`
//! - `E_B(k) = δt·Σ_{j<k} (η_B·u⁺(j) − u⁻(j)/η_B)`
//!
//! and both start at zero. The terminal energy is free.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::bounds;
use crate::lp::{self, LinearProgram, LpError, Relation, SimplexOptions};
use crate::scenario::Scenario;

/// Complementarity tolerance on `u⁺·u⁻`, W².
pub const EPS_COMP: f64 = 1e-6;

/// Per-W penalty on `u⁺ + u⁻` that picks the least-cycling optimum.
pub const TIE_BREAK: f64 = 1e-12;

/// Longest horizon the brute-force oracle accepts.
pub const ORACLE_MAX_STEPS: usize = 8;

pub const ROWS_PER_STEP: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// Grid purchase stays under the peak limit.
    PeakLimit,
    ChargeRate,
    DischargeRate,
    /// Stored energy stays non-negative.
    EnergyLower,
    /// Stored energy fits in the remaining capacity.
    EnergyUpper,
}

impl ConstraintKind {
    const ORDER: [ConstraintKind; ROWS_PER_STEP] = [
        ConstraintKind::PeakLimit,
        ConstraintKind::ChargeRate,
        ConstraintKind::DischargeRate,
        ConstraintKind::EnergyLower,
        ConstraintKind::EnergyUpper,
    ];

    /// Kind of LP row `row`.
    pub fn of_row(row: usize) -> Self {
        Self::ORDER[row % ROWS_PER_STEP]
    }

    pub fn describe(&self) -> &'static str {
        match self {
            ConstraintKind::PeakLimit => "grid purchase must stay at or below the peak limit D",
            ConstraintKind::ChargeRate => "charging power is limited by the remaining capacity over T_c",
            ConstraintKind::DischargeRate => "discharging power is limited by the remaining capacity over T_c",
            ConstraintKind::EnergyLower => "stored energy cannot go negative",
            ConstraintKind::EnergyUpper => "stored energy cannot exceed the remaining capacity",
        }
    }
}

/// First sample at which no control satisfies the constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfeasibilityReport {
    pub step: usize,
    pub time_hours: f64,
    /// The constraint that cannot be met together with the peak limit.
    pub kind: ConstraintKind,
    /// Discharge the peak limit demands at `step`, W.
    pub required_discharge: f64,
    pub c_ref: f64,
}

impl fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no feasible control at step {} (t = {} h): the peak limit needs {} W of discharge but {} (C_ref = {} Wh)",
            self.step,
            self.time_hours,
            self.required_discharge,
            self.kind.describe(),
            self.c_ref
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DispatchError {
    #[error("dispatch: capacity must be finite and >= 0, got {0} Wh")]
    InvalidCapacity(f64),
    #[error("dispatch: {0}")]
    Infeasible(InfeasibilityReport),
    #[error("dispatch: solver failure: {0}")]
    Solver(LpError),
    #[error("dispatch: oracle refuses {n} steps (limit {max})")]
    OracleHorizon { n: usize, max: usize },
    #[error("dispatch: oracle grids need at least 11 points, got u={u_points}, state={state_points}")]
    OracleGrid { u_points: usize, state_points: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchProblem {
    pub scenario: Scenario,
    pub c_ref: f64,
    pub n: usize,
    pub lp: LinearProgram,
    /// `(u⁺(k), u⁻(k))` column pairs.
    pub pairs: Vec<(usize, usize)>,
}

impl DispatchProblem {
    pub fn n_vars(&self) -> usize {
        self.lp.n_vars()
    }

    pub fn n_rows(&self) -> usize {
        self.lp.constraints.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub fallback_used: bool,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSolution {
    pub c_ref: f64,
    /// AC-side battery power, W (positive charges).
    pub u: Vec<f64>,
    pub u_plus: Vec<f64>,
    pub u_minus: Vec<f64>,
    /// DC-side battery power, W.
    pub p_b: Vec<f64>,
    /// Stored energy at the start of each step plus the terminal value, Wh.
    pub e_b: Vec<f64>,
    /// Lost capacity, same layout as `e_b`, Wh.
    pub delta_c: Vec<f64>,
    /// Grid purchase, W.
    pub p_g: Vec<f64>,
    /// Total cost, $.
    pub j: f64,
    pub j_max: f64,
    /// Charging cost, $.
    pub j_plus: f64,
    /// Discharging credit net of aging, $.
    pub j_minus: f64,
    pub complementarity_max: f64,
    pub solver_stats: SolverStats,
}

/// Builds the LP for the first `steps` samples of `scenario`.
fn assemble(scenario: &Scenario, c_ref: f64, steps: usize) -> LinearProgram {
    let p = scenario.params();
    let dt = scenario.dt();
    let eta = p.eta_b;
    let aging = p.z * dt / eta;
    let nv = 2 * steps;
    let mut objective = vec![0.0; nv];
    for k in 0..steps {
        let price = scenario.price(k);
        objective[k] = price * dt + TIE_BREAK * dt;
        objective[steps + k] = -price * dt + p.k * aging + TIE_BREAK * dt;
    }
    let mut lp = LinearProgram::new(objective);
    for k in 0..steps {
        let (up, um) = (k, steps + k);

        let mut row = vec![0.0; nv];
        row[up] = 1.0;
        row[um] = -1.0;
        lp.add(row, Relation::Le, scenario.margin(k));

        let mut lost = vec![0.0; nv];
        for j in 0..k {
            lost[steps + j] = aging;
        }
        let mut row = lost.clone();
        row[up] = eta * p.t_c;
        lp.add(row, Relation::Le, c_ref);

        let mut row = lost;
        row[um] = p.t_c / eta;
        lp.add(row, Relation::Le, c_ref);

        let mut row = vec![0.0; nv];
        for j in 0..=k {
            row[j] = -eta * dt;
            row[steps + j] = dt / eta;
        }
        lp.add(row, Relation::Le, 0.0);

        let mut row = vec![0.0; nv];
        for j in 0..=k {
            row[j] = eta * dt;
            row[steps + j] = -dt / eta + aging;
        }
        lp.add(row, Relation::Le, c_ref);
    }
    lp
}

pub fn build(scenario: &Scenario, c_ref: f64) -> Result<DispatchProblem, DispatchError> {
    if !(c_ref >= 0.0 && c_ref.is_finite()) {
        return Err(DispatchError::InvalidCapacity(c_ref));
    }
    let n = scenario.len();
    Ok(DispatchProblem {
        scenario: scenario.clone(),
        c_ref,
        n,
        lp: assemble(scenario, c_ref, n),
        pairs: (0..n).map(|k| (k, n + k)).collect(),
    })
}

pub fn solve(problem: &DispatchProblem) -> Result<DispatchSolution, DispatchError> {
    solve_with(problem, &SimplexOptions::default())
}

pub fn solve_with(problem: &DispatchProblem, opts: &SimplexOptions) -> Result<DispatchSolution, DispatchError> {
    match lp::solve_complementary(&problem.lp, &problem.pairs, EPS_COMP, opts) {
        Ok((sol, stats)) => Ok(assemble_solution(
            problem,
            &sol.x,
            SolverStats { iterations: stats.iterations, fallback_used: stats.branched, nodes: stats.nodes },
        )),
        Err(LpError::Infeasible { .. }) => Err(DispatchError::Infeasible(diagnose(problem, opts))),
        Err(e) => Err(DispatchError::Solver(e)),
    }
}

/// Builds and solves in one call.
pub fn optimal_cost(scenario: &Scenario, c_ref: f64) -> Result<DispatchSolution, DispatchError> {
    solve(&build(scenario, c_ref)?)
}

fn assemble_solution(problem: &DispatchProblem, x: &[f64], solver_stats: SolverStats) -> DispatchSolution {
    let sc = &problem.scenario;
    let n = problem.n;
    let p = sc.params();
    let dt = sc.dt();
    let u_plus: Vec<f64> = x[..n].iter().map(|v| v.max(0.0)).collect();
    let u_minus: Vec<f64> = x[n..].iter().map(|v| v.max(0.0)).collect();
    let u: Vec<f64> = u_plus.iter().zip(&u_minus).map(|(a, b)| a - b).collect();
    let p_b: Vec<f64> = u_plus.iter().zip(&u_minus).map(|(a, b)| p.eta_b * a - b / p.eta_b).collect();
    let mut e_b = vec![0.0; n + 1];
    let mut delta_c = vec![0.0; n + 1];
    for k in 0..n {
        e_b[k + 1] = e_b[k] + p_b[k] * dt;
        delta_c[k + 1] = delta_c[k] + p.z * dt / p.eta_b * u_minus[k];
    }
    let p_g: Vec<f64> = (0..n).map(|k| sc.net_load(k) + u[k]).collect();
    let mut j_plus = 0.0;
    let mut j_minus = 0.0;
    for k in 0..n {
        let price = sc.price(k);
        j_plus += price * dt * u_plus[k];
        j_minus += (-price * dt + p.k * p.z * dt / p.eta_b) * u_minus[k];
    }
    let j_max = bounds::j_max(sc);
    DispatchSolution {
        c_ref: problem.c_ref,
        complementarity_max: u_plus.iter().zip(&u_minus).map(|(a, b)| a * b).fold(0.0, f64::max),
        u,
        u_plus,
        u_minus,
        p_b,
        e_b,
        delta_c,
        p_g,
        j: j_max + j_plus + j_minus,
        j_max,
        j_plus,
        j_minus,
        solver_stats,
    }
}

fn prefix_feasible(sc: &Scenario, c_ref: f64, steps: usize, opts: &SimplexOptions) -> bool {
    !matches!(lp::solve(&assemble(sc, c_ref, steps), opts), Err(LpError::Infeasible { .. }))
}

/// Locates the shortest infeasible prefix and names the blocking rule.
fn diagnose(problem: &DispatchProblem, opts: &SimplexOptions) -> InfeasibilityReport {
    let sc = &problem.scenario;
    let (mut lo, mut hi) = (0, problem.n);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if prefix_feasible(sc, problem.c_ref, mid, opts) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let step = hi - 1;
    let p = sc.params();
    let required = -sc.margin(step);
    let kind = if required <= 0.0 {
        ConstraintKind::PeakLimit
    } else if required > p.eta_b * problem.c_ref / p.t_c {
        ConstraintKind::DischargeRate
    } else {
        ConstraintKind::EnergyLower
    };
    InfeasibilityReport {
        step,
        time_hours: sc.time_at(step),
        kind,
        required_discharge: required.max(0.0),
        c_ref: problem.c_ref,
    }
}

/// Worst-case deviations of a solution from the model, all of which
/// should be at most ~1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantReport {
    /// `max |η_pv·P_pv + P_g − u − P_load|`, W.
    pub balance_residual: f64,
    /// `max (P_g − D)`, W.
    pub peak_excess: f64,
    pub complementarity_max: f64,
    /// `max (−E_B)`, Wh.
    pub energy_below_zero: f64,
    /// `max (E_B + ΔC − C_ref)`, Wh.
    pub energy_over_capacity: f64,
    /// `max (ΔC(k) − ΔC(k+1))`, Wh.
    pub delta_c_decrease: f64,
    /// `max (η_B·T_c·u⁺ + ΔC − C_ref)` and the discharge analogue, Wh.
    pub rate_excess: f64,
    /// `−Σ u·δt`, Wh.
    pub net_energy_deficit: f64,
}

impl InvariantReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.balance_residual <= tol
            && self.peak_excess <= tol
            && self.complementarity_max <= EPS_COMP
            && self.energy_below_zero <= tol
            && self.energy_over_capacity <= tol
            && self.delta_c_decrease <= tol
            && self.rate_excess <= tol
            && self.net_energy_deficit <= tol
    }
}

pub fn check_invariants(scenario: &Scenario, sol: &DispatchSolution) -> InvariantReport {
    let p = scenario.params();
    let n = sol.u.len();
    let mut r = InvariantReport {
        balance_residual: 0.0,
        peak_excess: f64::NEG_INFINITY,
        complementarity_max: sol.complementarity_max,
        energy_below_zero: f64::NEG_INFINITY,
        energy_over_capacity: f64::NEG_INFINITY,
        delta_c_decrease: f64::NEG_INFINITY,
        rate_excess: f64::NEG_INFINITY,
        net_energy_deficit: -sol.u.iter().sum::<f64>() * scenario.dt(),
    };
    for k in 0..n {
        let pv = scenario.pv().values()[k];
        let load = scenario.load().values()[k];
        r.balance_residual = r.balance_residual.max((p.eta_pv * pv + sol.p_g[k] - sol.u[k] - load).abs());
        r.peak_excess = r.peak_excess.max(sol.p_g[k] - p.d);
        r.delta_c_decrease = r.delta_c_decrease.max(sol.delta_c[k] - sol.delta_c[k + 1]);
        r.rate_excess = r
            .rate_excess
            .max(p.eta_b * p.t_c * sol.u_plus[k] + sol.delta_c[k] - sol.c_ref)
            .max(p.t_c / p.eta_b * sol.u_minus[k] + sol.delta_c[k] - sol.c_ref);
    }
    for k in 0..=n {
        r.energy_below_zero = r.energy_below_zero.max(-sol.e_b[k]);
        r.energy_over_capacity = r.energy_over_capacity.max(sol.e_b[k] + sol.delta_c[k] - sol.c_ref);
    }
    r
}

/// Result of the brute-force search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub j: f64,
    pub u: Vec<f64>,
    /// DC energy quantum the search moved in, Wh.
    pub h_eff: f64,
}

#[derive(Debug, Clone, Copy)]
struct Label {
    /// Units of discharged energy so far.
    m: u32,
    cost: f64,
    prev_e: u32,
    prev_b: u32,
    de: i32,
}

/// Buckets for accumulated lost capacity. The quantum depends only on the
/// horizon and `c_ref`, so refining the energy grid never removes a plan.
const LOSS_BUCKETS: usize = 64;

/// Exhaustive dynamic program over a quantized stored-energy grid.
///
/// Stored energy moves in multiples of `h_eff`, the coarser of
/// `c_ref/(state_grid_points − 1)` and `c_ref/(u_grid_points − 1)`
/// (rounded to a whole number of state steps). A step that changes the
/// stored energy by `Δe·h_eff` uses `u = Δe·h_eff/(η_B·δt)` when charging
/// and `u = Δe·h_eff·η_B/δt` when discharging. Lost capacity is tracked
/// in buckets of `Z·n·c_ref/64` and constraints are checked against the
/// bucket's upper edge, so every plan found is feasible for the LP. Per
/// (stored energy, bucket) only the cheapest plan is kept.
pub fn dp_oracle(
    scenario: &Scenario,
    c_ref: f64,
    u_grid_points: usize,
    state_grid_points: usize,
) -> Result<OracleResult, DispatchError> {
    let n = scenario.len();
    if n > ORACLE_MAX_STEPS {
        return Err(DispatchError::OracleHorizon { n, max: ORACLE_MAX_STEPS });
    }
    if u_grid_points < 11 || state_grid_points < 11 {
        return Err(DispatchError::OracleGrid { u_points: u_grid_points, state_points: state_grid_points });
    }
    if !(c_ref >= 0.0 && c_ref.is_finite()) {
        return Err(DispatchError::InvalidCapacity(c_ref));
    }
    let p = *scenario.params();
    let dt = scenario.dt();
    let j_max = bounds::j_max(scenario);
    let tol = 1e-9;
    let infeasible = |step: usize, kind| {
        DispatchError::Infeasible(InfeasibilityReport {
            step,
            time_hours: scenario.time_at(step),
            kind,
            required_discharge: (-scenario.margin(step)).max(0.0),
            c_ref,
        })
    };

    if c_ref == 0.0 {
        if let Some(k) = (0..n).find(|&k| scenario.margin(k) < -tol) {
            return Err(infeasible(k, ConstraintKind::DischargeRate));
        }
        return Ok(OracleResult { j: j_max, u: vec![0.0; n], h_eff: 0.0 });
    }

    let s_steps = state_grid_points - 1;
    let stride = s_steps.div_ceil(u_grid_points - 1).max(1);
    let levels = s_steps / stride;
    let h = c_ref / s_steps as f64 * stride as f64;
    let zh = p.z * h;
    let q = p.z * n as f64 * c_ref / LOSS_BUCKETS as f64;
    let bucket = |m: u32| -> usize {
        if q > 0.0 {
            (libm::fmax(libm::ceil(m as f64 * zh / q - 1e-9), 0.0) as usize).min(LOSS_BUCKETS)
        } else {
            0
        }
    };
    let width = LOSS_BUCKETS + 1;
    let u_of = |de: i64| if de > 0 { de as f64 * h / (p.eta_b * dt) } else { de as f64 * h * p.eta_b / dt };

    let mut layers: Vec<Vec<Option<Label>>> = Vec::with_capacity(n + 1);
    let mut start = vec![None; (levels + 1) * width];
    start[0] = Some(Label { m: 0, cost: 0.0, prev_e: 0, prev_b: 0, de: 0 });
    layers.push(start);

    for k in 0..n {
        let price = scenario.price(k);
        let margin = scenario.margin(k);
        let mut next: Vec<Option<Label>> = vec![None; (levels + 1) * width];
        let cur = &layers[k];
        for e in 0..=levels {
            for b in 0..width {
                let Some(lab) = cur[e * width + b] else { continue };
                let lost = b as f64 * q;
                for e2 in 0..=levels {
                    let de = e2 as i64 - e as i64;
                    let u = u_of(de);
                    if u > margin + tol {
                        continue;
                    }
                    if de > 0 && p.eta_b * p.t_c * u + lost > c_ref + tol {
                        continue;
                    }
                    if de < 0 && p.t_c / p.eta_b * (-u) + lost > c_ref + tol {
                        continue;
                    }
                    let out = if de < 0 { (-de) as u32 } else { 0 };
                    let m2 = lab.m + out;
                    let b2 = bucket(m2);
                    if e2 as f64 * h + b2 as f64 * q > c_ref + tol {
                        continue;
                    }
                    let cost = lab.cost + price * u * dt + p.k * out as f64 * zh;
                    let slot = &mut next[e2 * width + b2];
                    if slot.is_none_or(|s| cost < s.cost) {
                        *slot = Some(Label { m: m2, cost, prev_e: e as u32, prev_b: b as u32, de: de as i32 });
                    }
                }
            }
        }
        if next.iter().all(Option::is_none) {
            let kind = if -margin > p.eta_b * c_ref / p.t_c {
                ConstraintKind::DischargeRate
            } else {
                ConstraintKind::EnergyLower
            };
            return Err(infeasible(k, kind));
        }
        layers.push(next);
    }

    let (mut slot, mut best) = (0usize, f64::INFINITY);
    for (i, l) in layers[n].iter().enumerate() {
        if let Some(l) = l {
            if l.cost < best {
                (slot, best) = (i, l.cost);
            }
        }
    }
    let mut u = vec![0.0; n];
    for k in (0..n).rev() {
        let l = layers[k + 1][slot].expect("back-pointer to a stored label");
        u[k] = u_of(l.de as i64);
        slot = l.prev_e as usize * width + l.prev_b as usize;
    }
    Ok(OracleResult { j: j_max + best, u, h_eff: h })
}

/// Upper bound on `j_oracle − j_lp` for a grid of quantum `h_eff`.
///
/// Valid when no sample forces a discharge and the peak limit never
/// caps charging. The LP optimum is shrunk by
/// `λ = 1 − h_eff·max(1, T_c/δt)/C_ref` to make room for rounding, then
/// the stored-energy path is rounded down onto the grid.
pub fn oracle_gap_bound(scenario: &Scenario, c_ref: f64, j_lp: f64, h_eff: f64) -> f64 {
    if c_ref == 0.0 {
        return 0.0;
    }
    let p = scenario.params();
    let lambda = 1.0 - h_eff * libm::fmax(1.0, p.t_c / scenario.dt()) / c_ref;
    let j_max = bounds::j_max(scenario);
    let cmax = scenario.max_price();
    let n = scenario.len() as f64;
    (1.0 - lambda) * (j_lp - j_max).abs() + n * h_eff * (cmax / p.eta_b + p.eta_b * cmax + p.k * p.z)
}

/// Human-readable one-liner for logs.
pub fn summary(sol: &DispatchSolution) -> String {
    format!(
        "C_ref = {} Wh: J = {} $ (J_max {} + charge {} + discharge {})",
        sol.c_ref, sol.j, sol.j_max, sol.j_plus, sol.j_minus
    )
}
