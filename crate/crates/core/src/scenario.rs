//! Input data for one sizing run: sampled PV and load, tariff, parameters.
//!
//! Every series is piecewise constant: sample `k` holds on
//! `[t0 + k·dt, t0 + (k+1)·dt)`. Powers are in W, irradiance in W/m²,
//! prices in $/Wh, times in hours.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hours in one tariff / load period.
pub const DAY_HOURS: f64 = 24.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("time step must be positive and finite, got {0}")]
    NonPositiveDt(f64),
    #[error("series must contain at least one sample")]
    EmptySeries,
    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },
    #[error("{what} must be non-negative, sample {index} is {value}")]
    NegativeValue { what: &'static str, index: usize, value: f64 },
    #[error("pv has {pv} samples but load has {load}")]
    LengthMismatch { pv: usize, load: usize },
    #[error("pv and load disagree on {field}: {pv} vs {load}")]
    GridMismatch { field: &'static str, pv: f64, load: f64 },
    #[error("tariff has no segments")]
    EmptyTariff,
    #[error("tariff segment {index} is outside [0, 24) or empty: [{start}, {end})")]
    BadSegment { index: usize, start: f64, end: f64 },
    #[error("tariff does not cover [{from}, {to})")]
    TariffGap { from: f64, to: f64 },
    #[error("tariff segments overlap on [{from}, {to})")]
    TariffOverlap { from: f64, to: f64 },
    #[error("tariff price of segment {index} must be finite and non-negative, got {price}")]
    BadPrice { index: usize, price: f64 },
    #[error("parameter {name} = {value} violates {rule}")]
    Param { name: &'static str, value: f64, rule: &'static str },
    #[error("at least one day is required")]
    NoDays,
    #[error("time step {0} h does not divide 24 h")]
    DtNotDivisor(f64),
}

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    t0: f64,
    dt: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self, ScenarioError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(ScenarioError::NonPositiveDt(dt));
        }
        if !t0.is_finite() {
            return Err(ScenarioError::NonFinite { index: 0 });
        }
        if values.is_empty() {
            return Err(ScenarioError::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(ScenarioError::NonFinite { index });
        }
        Ok(Self { t0, dt, values })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Covered duration, `len × dt`.
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 * self.dt
    }

    /// Start time of sample `k`.
    pub fn time_at(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same grid, values mapped pointwise.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { t0: self.t0, dt: self.dt, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    fn check_non_negative(&self, what: &'static str) -> Result<(), ScenarioError> {
        match self.values.iter().position(|&v| v < 0.0) {
            Some(index) => Err(ScenarioError::NegativeValue { what, index, value: self.values[index] }),
            None => Ok(()),
        }
    }
}

/// One tariff block, `[start_hour, end_hour)` within a day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TariffSegment {
    pub start_hour: f64,
    pub end_hour: f64,
    /// $/Wh
    pub price: f64,
}

/// Time-of-use price, piecewise constant and 24 h periodic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tariff {
    segments: Vec<TariffSegment>,
}

impl Tariff {
    /// Validates that the segments tile `[0, 24)` in order.
    pub fn new(mut segments: Vec<TariffSegment>) -> Result<Self, ScenarioError> {
        if segments.is_empty() {
            return Err(ScenarioError::EmptyTariff);
        }
        for (index, s) in segments.iter().enumerate() {
            if !(s.start_hour >= 0.0 && s.end_hour <= DAY_HOURS && s.start_hour < s.end_hour) {
                return Err(ScenarioError::BadSegment { index, start: s.start_hour, end: s.end_hour });
            }
            if !(s.price >= 0.0) || !s.price.is_finite() {
                return Err(ScenarioError::BadPrice { index, price: s.price });
            }
        }
        segments.sort_by(|a, b| a.start_hour.total_cmp(&b.start_hour));
        let mut covered = 0.0;
        for s in &segments {
            if s.start_hour > covered {
                return Err(ScenarioError::TariffGap { from: covered, to: s.start_hour });
            }
            if s.start_hour < covered {
                return Err(ScenarioError::TariffOverlap { from: s.start_hour, to: covered.min(s.end_hour) });
            }
            covered = s.end_hour;
        }
        if covered < DAY_HOURS {
            return Err(ScenarioError::TariffGap { from: covered, to: DAY_HOURS });
        }
        Ok(Self { segments })
    }

    /// Builds from `(start_hour, price)` pairs; each block runs to the next
    /// start, the last one to midnight.
    pub fn from_starts(blocks: &[(f64, f64)]) -> Result<Self, ScenarioError> {
        let mut sorted: Vec<(f64, f64)> = blocks.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let segments = sorted
            .iter()
            .enumerate()
            .map(|(i, &(start, price))| TariffSegment {
                start_hour: start,
                end_hour: sorted.get(i + 1).map_or(DAY_HOURS, |next| next.0),
                price,
            })
            .collect();
        Self::new(segments)
    }

    /// Single price all day.
    pub fn flat(price: f64) -> Result<Self, ScenarioError> {
        Self::from_starts(&[(0.0, price)])
    }

    /// Summer residential time-of-use schedule: 16.5 ¢/kWh on-peak
    /// (11:00–18:00), 7.8 ¢/kWh semi-peak (06:00–11:00, 18:00–22:00),
    /// 6.1 ¢/kWh off-peak otherwise.
    pub fn summer_tou() -> Self {
        let cents_per_kwh = |c: f64| c * 1e-5;
        Self::from_starts(&[
            (0.0, cents_per_kwh(6.1)),
            (6.0, cents_per_kwh(7.8)),
            (11.0, cents_per_kwh(16.5)),
            (18.0, cents_per_kwh(7.8)),
            (22.0, cents_per_kwh(6.1)),
        ])
        .expect("static schedule is valid")
    }

    pub fn segments(&self) -> &[TariffSegment] {
        &self.segments
    }

    /// Price in $/Wh at absolute time `t` hours.
    pub fn price_at(&self, t: f64) -> f64 {
        let mut h = t - DAY_HOURS * libm::floor(t / DAY_HOURS);
        if h >= DAY_HOURS {
            h = 0.0;
        }
        let idx = self.segments.partition_point(|s| s.start_hour <= h);
        self.segments[idx.saturating_sub(1)].price
    }

    /// New tariff with every price shifted by `delta` (must stay ≥ 0).
    pub fn shifted(&self, delta: f64) -> Result<Self, ScenarioError> {
        Self::new(
            self.segments
                .iter()
                .map(|s| TariffSegment { price: s.price + delta, ..*s })
                .collect(),
        )
    }
}

/// Price of `tariff` at time `t`.
pub fn tariff_at(tariff: &Tariff, t: f64) -> f64 {
    tariff.price_at(t)
}

/// Panel area and cell efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvParams {
    pub area_m2: f64,
    pub efficiency: f64,
}

impl PvParams {
    pub fn new(area_m2: f64, efficiency: f64) -> Result<Self, ScenarioError> {
        if !(area_m2 > 0.0) || !area_m2.is_finite() {
            return Err(ScenarioError::Param { name: "area_S", value: area_m2, rule: "area > 0" });
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(ScenarioError::Param { name: "efficiency_eta", value: efficiency, rule: "0 < eta <= 1" });
        }
        Ok(Self { area_m2, efficiency })
    }
}

/// PV output in W from irradiance in W/m²: `GHI · S · η`.
pub fn pv_power(ghi: &TimeSeries, params: &PvParams) -> Result<TimeSeries, ScenarioError> {
    ghi.check_non_negative("GHI")?;
    let gain = params.area_m2 * params.efficiency;
    Ok(ghi.map(|g| g * gain))
}

/// Converter efficiencies, aging, battery economics and the peak limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// PV DC-to-AC converter efficiency.
    pub eta_pv: f64,
    /// Battery converter efficiency, each direction.
    pub eta_b: f64,
    /// Aging coefficient: Wh of capacity lost per Wh discharged (DC side).
    pub z: f64,
    /// Cost of lost capacity, $/Wh.
    pub k: f64,
    /// Minimum full charge/discharge time, hours.
    pub t_c: f64,
    /// Peak grid purchase limit, W.
    pub d: f64,
}

impl Default for SystemParams {
    /// Lead-acid residential setting: η_pv = η_B = 0.9, Z = 3e-4,
    /// K = 0.15 $/Wh, T_c = 12 h, D = 800 W.
    fn default() -> Self {
        Self { eta_pv: 0.9, eta_b: 0.9, z: 3e-4, k: 0.15, t_c: 12.0, d: 800.0 }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let unit = |name, value: f64| {
            if value > 0.0 && value <= 1.0 {
                Ok(())
            } else {
                Err(ScenarioError::Param { name, value, rule: "0 < value <= 1" })
            }
        };
        let positive = |name, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ScenarioError::Param { name, value, rule: "value > 0" })
            }
        };
        unit("eta_pv", self.eta_pv)?;
        unit("eta_b", self.eta_b)?;
        positive("z", self.z)?;
        positive("k", self.k)?;
        positive("t_c_hours", self.t_c)?;
        if !self.d.is_finite() {
            return Err(ScenarioError::Param { name: "d_watts", value: self.d, rule: "finite" });
        }
        Ok(())
    }
}

/// Everything one sizing run needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pv: TimeSeries,
    load: TimeSeries,
    tariff: Tariff,
    params: SystemParams,
}

impl Scenario {
    pub fn new(pv: TimeSeries, load: TimeSeries, tariff: Tariff, params: SystemParams) -> Result<Self, ScenarioError> {
        if pv.len() != load.len() {
            return Err(ScenarioError::LengthMismatch { pv: pv.len(), load: load.len() });
        }
        if pv.t0 != load.t0 {
            return Err(ScenarioError::GridMismatch { field: "t0", pv: pv.t0, load: load.t0 });
        }
        if pv.dt != load.dt {
            return Err(ScenarioError::GridMismatch { field: "dt", pv: pv.dt, load: load.dt });
        }
        pv.check_non_negative("pv")?;
        load.check_non_negative("load")?;
        params.validate()?;
        Ok(Self { pv, load, tariff, params })
    }

    pub fn pv(&self) -> &TimeSeries {
        &self.pv
    }

    pub fn load(&self) -> &TimeSeries {
        &self.load
    }

    pub fn tariff(&self) -> &Tariff {
        &self.tariff
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn with_params(&self, params: SystemParams) -> Result<Self, ScenarioError> {
        params.validate()?;
        Ok(Self { params, ..self.clone() })
    }

    pub fn with_tariff(&self, tariff: Tariff) -> Self {
        Self { tariff, ..self.clone() }
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.pv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pv.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.pv.t0
    }

    pub fn dt(&self) -> f64 {
        self.pv.dt
    }

    /// Horizon length `T` in hours.
    pub fn horizon(&self) -> f64 {
        self.pv.duration()
    }

    pub fn time_at(&self, k: usize) -> f64 {
        self.pv.time_at(k)
    }

    /// Grid price at sample `k`, taken at the interval start.
    pub fn price(&self, k: usize) -> f64 {
        self.tariff.price_at(self.time_at(k))
    }

    pub fn prices(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.price(k)).collect()
    }

    /// `P_load − η_pv·P_pv` at sample `k`.
    pub fn net_load(&self, k: usize) -> f64 {
        self.load.values[k] - self.params.eta_pv * self.pv.values[k]
    }

    /// Headroom below the peak limit, `D + η_pv·P_pv − P_load`: the largest
    /// admissible AC-side battery power at sample `k`.
    pub fn margin(&self, k: usize) -> f64 {
        self.params.d - self.net_load(k)
    }

    pub fn max_price(&self) -> f64 {
        (0..self.len()).map(|k| self.price(k)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_price(&self) -> f64 {
        (0..self.len()).map(|k| self.price(k)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadKind {
    Residential,
    Commercial,
}

impl fmt::Display for LoadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoadKind::Residential => "residential",
            LoadKind::Commercial => "commercial",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PvVariation {
    Low,
    High,
}

/// Hourly residential profile (W): morning peak at 07:00, late-evening peak
/// of 1000 W at 21:00, 24 h mean 536.8 W.
pub const RESIDENTIAL_HOURLY: [f64; 24] = [
    400.0, 360.0, 330.0, 320.0, 330.0, 380.0, 560.0, 900.0, 760.0, 500.0, 400.0, 360.0, //
    332.0, 340.0, 360.0, 380.0, 440.0, 540.0, 720.0, 820.0, 920.0, 1000.0, 850.0, 581.2,
];

/// Hourly commercial profile (W): daytime peaks at 11:00 and 14:00,
/// 24 h mean 485.6 W.
pub const COMMERCIAL_HOURLY: [f64; 24] = [
    210.0, 200.0, 195.0, 195.0, 200.0, 220.0, 280.0, 380.0, 550.0, 730.0, 900.0, 950.0, //
    820.0, 920.0, 1000.0, 940.0, 720.0, 550.0, 400.0, 320.0, 280.0, 250.0, 230.0, 214.4,
];

/// Per-day multipliers applied to clear-sky PV in the high-variation
/// generator, cycled when there are more than four days.
pub const CLOUD_FACTORS: [f64; 4] = [1.0, 0.55, 0.8, 0.45];

/// Clear-sky PV peak at solar noon, W.
pub const PV_PEAK_WATTS: f64 = 1500.0;

/// Clear-sky PV (W) at absolute time `t`: half-sine from 06:00 to 18:00.
fn clear_sky_pv(t: f64) -> f64 {
    let h = t - DAY_HOURS * libm::floor(t / DAY_HOURS);
    if h > 6.0 && h < 18.0 {
        (PV_PEAK_WATTS * libm::sin(core::f64::consts::PI * (h - 6.0) / 12.0)).max(0.0)
    } else {
        0.0
    }
}

/// Mean of a periodic hourly step profile over `[a, b)`.
fn hourly_average(profile: &[f64; 24], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    let mut t = a;
    while t < b - 1e-12 {
        let hour = libm::floor(t + 1e-12);
        let end = (hour + 1.0).min(b);
        let idx = (hour as i64).rem_euclid(24) as usize;
        acc += profile[idx] * (end - t);
        t = end;
    }
    acc / (b - a)
}

/// Synthetic multi-day scenario starting at midnight with default
/// parameters and the summer time-of-use tariff.
///
/// PV is the clear-sky half-sine sampled at each interval start; in the
/// high-variation case day `d` is scaled by `CLOUD_FACTORS[d % 4]`. Loads
/// repeat daily and each sample is the interval average of the hourly
/// profile, so the daily mean is exact for any `dt` dividing 24 h.
pub fn synth_scenario(kind: LoadKind, days: usize, dt: f64, variation: PvVariation) -> Result<Scenario, ScenarioError> {
    if days == 0 {
        return Err(ScenarioError::NoDays);
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ScenarioError::NonPositiveDt(dt));
    }
    let per_day = DAY_HOURS / dt;
    let per_day_n = libm::round(per_day);
    if (per_day - per_day_n).abs() > 1e-9 * per_day || per_day_n < 1.0 {
        return Err(ScenarioError::DtNotDivisor(dt));
    }
    let n = per_day_n as usize * days;
    let profile = match kind {
        LoadKind::Residential => &RESIDENTIAL_HOURLY,
        LoadKind::Commercial => &COMMERCIAL_HOURLY,
    };
    let mut pv = Vec::with_capacity(n);
    let mut load = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * dt;
        let day = libm::floor(t / DAY_HOURS + 1e-12) as usize;
        let cloud = match variation {
            PvVariation::Low => 1.0,
            PvVariation::High => CLOUD_FACTORS[day % CLOUD_FACTORS.len()],
        };
        pv.push(cloud * clear_sky_pv(t));
        load.push(hourly_average(profile, t, t + dt));
    }
    Scenario::new(
        TimeSeries::new(0.0, dt, pv)?,
        TimeSeries::new(0.0, dt, load)?,
        Tariff::summer_tou(),
        SystemParams::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pv_power_examples() {
        let params = PvParams::new(10.0, 0.15).unwrap();
        let ghi = TimeSeries::new(0.0, 1.0, vec![1000.0, 0.0, 600.0]).unwrap();
        let pv = pv_power(&ghi, &params).unwrap();
        assert_abs_diff_eq!(pv.values()[0], 1500.0, epsilon = 1e-9);
        assert_eq!(pv.values()[1], 0.0);
        assert_abs_diff_eq!(pv.values()[2], 900.0, epsilon = 1e-9);
        assert_eq!((pv.t0(), pv.dt(), pv.len()), (0.0, 1.0, 3));
    }

    #[test]
    fn negative_ghi_names_index() {
        let params = PvParams::new(10.0, 0.15).unwrap();
        let ghi = TimeSeries::new(0.0, 1.0, vec![1.0, 2.0, -3.0]).unwrap();
        assert_eq!(
            pv_power(&ghi, &params),
            Err(ScenarioError::NegativeValue { what: "GHI", index: 2, value: -3.0 })
        );
    }

    #[test]
    fn summer_tariff_examples() {
        let tariff = Tariff::summer_tou();
        assert_abs_diff_eq!(tariff_at(&tariff, 12.0), 16.5e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(tariff_at(&tariff, 3.0), 6.1e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(tariff_at(&tariff, 27.0), 6.1e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(tariff_at(&tariff, 6.0), 7.8e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(tariff_at(&tariff, 10.999), 7.8e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(tariff_at(&tariff, 18.0), 7.8e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(tariff_at(&tariff, 22.0), 6.1e-5, epsilon = 1e-15);
        assert_abs_diff_eq!(tariff_at(&tariff, -1.0), 6.1e-5, epsilon = 1e-15);
    }

    #[test]
    fn tariff_gap_names_interval() {
        let segs = vec![
            TariffSegment { start_hour: 0.0, end_hour: 11.0, price: 1e-5 },
            TariffSegment { start_hour: 11.0, end_hour: 22.0, price: 2e-5 },
        ];
        assert_eq!(Tariff::new(segs), Err(ScenarioError::TariffGap { from: 22.0, to: 24.0 }));
        let segs = vec![TariffSegment { start_hour: 1.0, end_hour: 24.0, price: 1e-5 }];
        assert_eq!(Tariff::new(segs), Err(ScenarioError::TariffGap { from: 0.0, to: 1.0 }));
    }

    #[test]
    fn tariff_overlap_and_bad_price() {
        let segs = vec![
            TariffSegment { start_hour: 0.0, end_hour: 12.0, price: 1e-5 },
            TariffSegment { start_hour: 10.0, end_hour: 24.0, price: 2e-5 },
        ];
        assert_eq!(Tariff::new(segs), Err(ScenarioError::TariffOverlap { from: 10.0, to: 12.0 }));
        assert!(matches!(Tariff::flat(-1.0), Err(ScenarioError::BadPrice { .. })));
        assert!(matches!(Tariff::from_starts(&[(0.0, 1.0), (24.0, 1.0)]), Err(ScenarioError::BadSegment { .. })));
    }

    #[test]
    fn scenario_shape_checks() {
        let a = TimeSeries::new(0.0, 1.0, vec![0.0; 25]).unwrap();
        let b = TimeSeries::new(0.0, 1.0, vec![0.0; 24]).unwrap();
        let err = Scenario::new(a, b, Tariff::summer_tou(), SystemParams::default()).unwrap_err();
        assert_eq!(err, ScenarioError::LengthMismatch { pv: 25, load: 24 });
        assert_eq!(TimeSeries::new(0.0, 0.0, vec![1.0]), Err(ScenarioError::NonPositiveDt(0.0)));
        assert_eq!(TimeSeries::new(0.0, 1.0, vec![]), Err(ScenarioError::EmptySeries));
    }

    #[test]
    fn params_validation() {
        let bad = SystemParams { eta_b: 1.2, ..SystemParams::default() };
        assert!(matches!(bad.validate(), Err(ScenarioError::Param { name: "eta_b", .. })));
        let bad = SystemParams { t_c: 0.0, ..SystemParams::default() };
        assert!(matches!(bad.validate(), Err(ScenarioError::Param { name: "t_c_hours", .. })));
        let negative_d = SystemParams { d: -5.0, ..SystemParams::default() };
        assert!(negative_d.validate().is_ok());
    }

    #[test]
    fn synthetic_load_statistics() {
        let res = synth_scenario(LoadKind::Residential, 1, 1.0, PvVariation::Low).unwrap();
        let com = synth_scenario(LoadKind::Commercial, 1, 1.0, PvVariation::Low).unwrap();
        assert_abs_diff_eq!(res.load().mean(), 536.8, epsilon = 0.5);
        assert_abs_diff_eq!(com.load().mean(), 485.6, epsilon = 0.5);
        assert!((950.0..=1050.0).contains(&res.load().max()));
        assert_eq!(res.len(), 24);
        assert_eq!(res.pv().max(), PV_PEAK_WATTS);
        assert_eq!(res.pv().values()[12], PV_PEAK_WATTS);
        assert_eq!(res.pv().values()[5], 0.0);
        assert_eq!(res.pv().values()[18], 0.0);
    }

    #[test]
    fn synthetic_mean_survives_other_steps() {
        for dt in [0.25, 0.5, 0.75, 2.0, 3.0, 8.0] {
            let res = synth_scenario(LoadKind::Residential, 2, dt, PvVariation::Low).unwrap();
            assert_abs_diff_eq!(res.load().mean(), 536.8, epsilon = 1e-9);
            assert_abs_diff_eq!(res.horizon(), 48.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn synthetic_load_is_daily_periodic_and_clouds_apply() {
        let sc = synth_scenario(LoadKind::Commercial, 4, 1.0, PvVariation::High).unwrap();
        for k in 0..72 {
            assert_eq!(sc.load().values()[k], sc.load().values()[k + 24]);
        }
        for (day, factor) in CLOUD_FACTORS.iter().enumerate() {
            assert_abs_diff_eq!(sc.pv().values()[day * 24 + 12], factor * PV_PEAK_WATTS, epsilon = 1e-9);
        }
    }

    #[test]
    fn synthetic_rejects_bad_grid() {
        assert_eq!(
            synth_scenario(LoadKind::Residential, 1, 0.7, PvVariation::Low).unwrap_err(),
            ScenarioError::DtNotDivisor(0.7)
        );
        assert_eq!(synth_scenario(LoadKind::Residential, 0, 1.0, PvVariation::Low).unwrap_err(), ScenarioError::NoDays);
    }

    proptest! {
        #[test]
        fn tariff_is_periodic(t in -200.0f64..200.0) {
            let tariff = Tariff::summer_tou();
            prop_assert_eq!(tariff.price_at(t), tariff.price_at(t + 24.0));
        }

        #[test]
        fn pv_power_is_linear(g in proptest::collection::vec(0.0f64..1200.0, 1..30), a in 0.0f64..5.0) {
            let params = PvParams::new(10.0, 0.15).unwrap();
            let base = pv_power(&TimeSeries::new(0.0, 1.0, g.clone()).unwrap(), &params).unwrap();
            let scaled_in = TimeSeries::new(0.0, 1.0, g.iter().map(|v| a * v).collect()).unwrap();
            let scaled = pv_power(&scaled_in, &params).unwrap();
            for (x, y) in base.values().iter().zip(scaled.values()) {
                prop_assert!((a * x - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
        }
    }
}
