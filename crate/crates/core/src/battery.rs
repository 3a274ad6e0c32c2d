//! Battery state, converter maps, aging and rate limits.
//!
//! Sign convention: positive power charges the battery. `p_bc` is measured on
//! the AC bus (what the dispatch controls), `p_b` on the DC side.

use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

/// Default RK4 substeps per sample for [`step_nonlinear`].
pub const DEFAULT_SUBSTEPS: usize = 100;

/// Integration stops once usable capacity falls to this fraction of `C_ref`.
pub const SINGULARITY_FRACTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BatteryError {
    #[error("usable capacity reached {usable} Wh (C_ref = {c_ref} Wh); aging model is singular")]
    Singular { usable: f64, c_ref: f64 },
    #[error("at least one substep is required")]
    NoSubsteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatteryState {
    /// Stored energy, Wh.
    pub e_b: f64,
    /// Cumulative capacity loss, Wh.
    pub delta_c: f64,
    /// Initial usable capacity, Wh.
    pub c_ref: f64,
}

impl BatteryState {
    /// Empty, unaged battery.
    pub fn new(c_ref: f64) -> Self {
        Self { e_b: 0.0, delta_c: 0.0, c_ref }
    }

    /// `C(t) = C_ref − ΔC(t)`.
    pub fn usable_capacity(&self) -> f64 {
        self.c_ref - self.delta_c
    }

    /// Bound violations of this state, each with its magnitude.
    pub fn violations(&self) -> Vec<BoundViolation> {
        let mut out = Vec::new();
        if self.e_b < 0.0 {
            out.push(BoundViolation::NegativeCharge { by: -self.e_b });
        }
        if self.e_b > self.usable_capacity() {
            out.push(BoundViolation::OverCapacity { by: self.e_b - self.usable_capacity() });
        }
        if self.delta_c < 0.0 {
            out.push(BoundViolation::NegativeLoss { by: -self.delta_c });
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum BoundViolation {
    NegativeCharge { by: f64 },
    OverCapacity { by: f64 },
    NegativeLoss { by: f64 },
}

/// Power pair across the battery converter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConverterPower {
    pub p_bc: f64,
    pub p_b: f64,
}

impl ConverterPower {
    pub fn from_ac(p_bc: f64, eta_b: f64) -> Self {
        Self { p_bc, p_b: bc_to_b(p_bc, eta_b) }
    }
}

/// AC bus power to DC battery power: charging loses `η_B`, discharging
/// needs `1/η_B` more from the cells.
pub fn bc_to_b(p_bc: f64, eta_b: f64) -> f64 {
    if p_bc >= 0.0 {
        eta_b * p_bc
    } else {
        p_bc / eta_b
    }
}

/// Inverse of [`bc_to_b`].
pub fn b_to_bc(p_b: f64, eta_b: f64) -> f64 {
    if p_b >= 0.0 {
        p_b / eta_b
    } else {
        eta_b * p_b
    }
}

/// One sample of the linear model: `E += p_b·dt`, and discharging adds
/// `−Z·p_b·dt` to the capacity loss. Bounds are not enforced here; see
/// [`BatteryState::violations`].
pub fn step_linear(state: BatteryState, p_b: f64, dt: f64, z: f64) -> BatteryState {
    let delta_c = if p_b < 0.0 { state.delta_c - z * p_b * dt } else { state.delta_c };
    BatteryState { e_b: state.e_b + p_b * dt, delta_c, c_ref: state.c_ref }
}

/// One sample of the nonlinear model `dΔC/dt = −Z·p_b / (1 − ΔC/C_ref)`,
/// integrated with classical RK4 over `substeps` equal sub-intervals.
/// Charging leaves `ΔC` untouched.
pub fn step_nonlinear(state: BatteryState, p_b: f64, dt: f64, z: f64, substeps: usize) -> Result<BatteryState, BatteryError> {
    if substeps == 0 {
        return Err(BatteryError::NoSubsteps);
    }
    let c_ref = state.c_ref;
    let guard = SINGULARITY_FRACTION * c_ref;
    let check = |delta_c: f64| {
        let usable = c_ref - delta_c;
        if usable <= guard {
            Err(BatteryError::Singular { usable, c_ref })
        } else {
            Ok(())
        }
    };
    check(state.delta_c)?;
    let e_b = state.e_b + p_b * dt;
    if p_b >= 0.0 {
        return Ok(BatteryState { e_b, ..state });
    }

    let rate = |delta_c: f64| -z * p_b / (1.0 - delta_c / c_ref);
    let h = dt / substeps as f64;
    let mut x = state.delta_c;
    for _ in 0..substeps {
        let k1 = rate(x);
        check(x + 0.5 * h * k1)?;
        let k2 = rate(x + 0.5 * h * k1);
        check(x + 0.5 * h * k2)?;
        let k3 = rate(x + 0.5 * h * k2);
        check(x + h * k3)?;
        let k4 = rate(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check(x)?;
    }
    Ok(BatteryState { e_b, delta_c: x, c_ref })
}

/// Symmetric DC power limits `(p_b_min, p_b_max)` with
/// `p_b_max = (C_ref − ΔC)/T_c`.
pub fn rate_limits(state: &BatteryState, t_c: f64) -> (f64, f64) {
    let max = (state.usable_capacity() / t_c).max(0.0);
    (-max, max)
}
