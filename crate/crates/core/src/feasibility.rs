//! Which samples force a discharge, which allow charging, and whether a
//! battery can be operated at all.
//!
//! The margin `D + η_pv·P_pv − P_load` is the largest AC-side battery power
//! allowed by the peak limit. Negative margin forces a discharge (`s1`),
//! zero margin forbids charging (`s2`), positive margin allows it (`s3`).

use alloc::vec::Vec;

use serde::Serialize;

use crate::scenario::{Scenario, TimeSeries};

/// Samples with `|margin| ≤ EPS_FEAS` W are treated as exactly zero.
pub const EPS_FEAS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NoFeasibleControl,
    OnlyZeroControl,
    Feasible,
}

/// The rule that pinned the classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum Reason {
    /// The first sample must discharge but the battery starts empty.
    InitialSampleMustDischarge { margin: f64 },
    /// No sample allows charging, yet some sample forces a discharge.
    NoChargeOpportunity { first_forced: usize },
    /// No sample allows charging and none forces a discharge: u ≡ 0.
    NothingToDo,
    /// A forced discharge occurs before the first sample that allows charging.
    DischargeBeforeCharge { forced: usize, first_charge: usize },
    Satisfied,
}

impl Reason {
    pub fn describe(&self) -> alloc::string::String {
        use alloc::format;
        match *self {
            Reason::InitialSampleMustDischarge { margin } => format!(
                "first sample must discharge an empty battery (peak-limit margin {margin} W < 0)"
            ),
            Reason::NoChargeOpportunity { first_forced } => format!(
                "no sample allows charging but sample {first_forced} must discharge"
            ),
            Reason::NothingToDo => "no sample allows charging; the only feasible control is zero".into(),
            Reason::DischargeBeforeCharge { forced, first_charge } => format!(
                "sample {forced} must discharge before the first charging opportunity at sample {first_charge}"
            ),
            Reason::Satisfied => "at least one feasible control exists".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub s3: Vec<usize>,
    pub classification: Classification,
    pub reason: Reason,
    pub assumption1_holds: bool,
    pub margin: TimeSeries,
}

pub fn partition(scenario: &Scenario) -> FeasibilityReport {
    let n = scenario.len();
    let margins: Vec<f64> = (0..n).map(|k| scenario.margin(k)).collect();
    let (mut s1, mut s2, mut s3) = (Vec::new(), Vec::new(), Vec::new());
    for (k, &m) in margins.iter().enumerate() {
        if m < -EPS_FEAS {
            s1.push(k);
        } else if m > EPS_FEAS {
            s3.push(k);
        } else {
            s2.push(k);
        }
    }

    let (classification, reason) = if margins[0] < -EPS_FEAS {
        (Classification::NoFeasibleControl, Reason::InitialSampleMustDischarge { margin: margins[0] })
    } else if s3.is_empty() {
        match s1.first() {
            Some(&first_forced) => (Classification::NoFeasibleControl, Reason::NoChargeOpportunity { first_forced }),
            None => (Classification::OnlyZeroControl, Reason::NothingToDo),
        }
    } else {
        match (s1.first(), s3.first()) {
            (Some(&forced), Some(&first_charge)) if forced < first_charge => {
                (Classification::NoFeasibleControl, Reason::DischargeBeforeCharge { forced, first_charge })
            }
            _ => (Classification::Feasible, Reason::Satisfied),
        }
    };

    let margin = TimeSeries::new(scenario.t0(), scenario.dt(), margins).expect("margins share the scenario grid");
    FeasibilityReport {
        s1,
        s2,
        s3,
        assumption1_holds: classification == Classification::Feasible,
        classification,
        reason,
        margin,
    }
}

/// Largest capacity-loss price at which a battery still pays off:
/// `(max C_g − min C_g)·η_B / Z`, over the sampled horizon.
pub fn k_threshold(scenario: &Scenario) -> f64 {
    let p = scenario.params();
    (scenario.max_price() - scenario.min_price()) * p.eta_b / p.z
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub assumption1: bool,
    pub assumption2: bool,
    pub classification: Classification,
    /// Why the first assumption holds or fails.
    pub reason: Reason,
    pub k: f64,
    pub k_threshold: f64,
}

impl AssumptionCheck {
    pub fn all_hold(&self) -> bool {
        self.assumption1 && self.assumption2
    }
}

/// Operability (a feasible control exists) and economy
/// (`K < k_threshold`).
pub fn check_assumptions(scenario: &Scenario) -> AssumptionCheck {
    let report = partition(scenario);
    let threshold = k_threshold(scenario);
    let k = scenario.params().k;
    AssumptionCheck {
        assumption1: report.assumption1_holds,
        assumption2: k < threshold,
        classification: report.classification,
        reason: report.reason,
        k,
        k_threshold: threshold,
    }
}
