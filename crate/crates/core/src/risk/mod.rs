//! Operational risk of a falling aircraft to ground personnel, road vehicles
//! and small UAVs, aggregated per cell and thresholded into a safe/unsafe map.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

mod kernels;
mod map;

pub use kernels::*;
pub use map::{aggregate_risk, build_risk_map, default_bands, AltitudeBand, RiskComponents, RiskMap, RiskModel};

use crate::grid::GridSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RiskError {
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("invalid risk parameter: {0}")]
    InvalidParam(String),
    #[error("numerical failure: {0}")]
    Numerical(&'static str),
    #[error("risk map arrays do not match grid ({expected} cells, got {got})")]
    ShapeMismatch { expected: usize, got: usize },
}

fn invalid(msg: &str) -> RiskError {
    RiskError::InvalidParam(String::from(msg))
}

/// Aircraft and atmosphere parameters of the fall model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct FallParams {
    /// Failures per flight hour.
    pub failure_rate: f64,
    pub empty_mass: f64,
    pub passenger_mass: f64,
    /// Aircraft length; also the diameter of the crash footprint (m).
    pub diameter: f64,
    pub gravity: f64,
    /// Air resistance coefficient.
    pub drag_coefficient: f64,
    pub air_density: f64,
    /// Impact energy giving 50% fatality at shelter factor 0.5 (J).
    pub alpha: f64,
    /// Fatality threshold energy as shelter vanishes (J).
    pub beta: f64,
}

impl Default for FallParams {
    fn default() -> Self {
        Self {
            failure_rate: 6.04e-5,
            empty_mass: 400.0,
            passenger_mass: 220.0,
            diameter: 6.0,
            gravity: 9.8,
            drag_coefficient: 0.3,
            air_density: 1.225,
            alpha: 1e6,
            beta: 232.0,
        }
    }
}

impl FallParams {
    pub fn total_mass(&self) -> f64 {
        self.empty_mass + self.passenger_mass
    }

    pub fn validate(&self) -> Result<(), RiskError> {
        let positive = [
            self.empty_mass,
            self.diameter,
            self.gravity,
            self.drag_coefficient,
            self.air_density,
            self.alpha,
            self.beta,
        ];
        // failure rate may be zero (no failures, no risk)
        if !(self.failure_rate >= 0.0 && self.failure_rate.is_finite()) {
            return Err(invalid("failure rate must be >= 0"));
        }
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("fall parameters must be strictly positive"));
        }
        if !(self.passenger_mass >= 0.0 && self.passenger_mass.is_finite()) {
            return Err(invalid("passenger mass must be >= 0"));
        }
        if self.beta >= self.alpha {
            return Err(invalid("beta must be smaller than alpha"));
        }
        Ok(())
    }
}

/// How UAV heading geometry enters the mean relative speed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(tag = "mode", rename_all = "snake_case"))]
pub enum AngleMode {
    Fixed { theta: f64, gamma: f64, epsilon: f64 },
    /// Average over UAV elevation, heading and aircraft speed; `theta` is kept fixed.
    Integrated { theta: f64, nodes: u32 },
}

impl Default for AngleMode {
    fn default() -> Self {
        AngleMode::Fixed { theta: PI / 6.0, gamma: PI / 2.0, epsilon: PI / 2.0 }
    }
}

/// Exposure time used in the swept collision volume.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum ExposureTime {
    Seconds(f64),
    /// Time to cross one cell along x at the given speed (m/s).
    CellTransit { speed: f64 },
}

impl ExposureTime {
    pub fn resolve(&self, grid: &GridSpec) -> f64 {
        match *self {
            ExposureTime::Seconds(t) => t,
            ExposureTime::CellTransit { speed } => grid.dx() / speed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct UavCollisionParams {
    pub box_length: f64,
    pub box_width: f64,
    pub box_height: f64,
    pub uav_speed: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub exposure: ExposureTime,
    pub angles: AngleMode,
}

impl Default for UavCollisionParams {
    fn default() -> Self {
        Self {
            box_length: 5.63,
            box_width: 5.63,
            box_height: 1.855,
            uav_speed: 6.0,
            speed_min: 10.0,
            speed_max: 130.0 / 3.6,
            exposure: ExposureTime::CellTransit { speed: 25.0 },
            angles: AngleMode::default(),
        }
    }
}

impl UavCollisionParams {
    pub fn validate(&self) -> Result<(), RiskError> {
        if [self.box_length, self.box_width, self.box_height].iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("collision box dimensions must be > 0"));
        }
        if !(self.uav_speed >= 0.0) {
            return Err(invalid("UAV speed must be >= 0"));
        }
        if !(self.speed_min < self.speed_max) {
            return Err(invalid("aircraft speed range must satisfy min < max"));
        }
        let t_ok = match self.exposure {
            ExposureTime::Seconds(t) => t > 0.0 && t.is_finite(),
            ExposureTime::CellTransit { speed } => speed > 0.0 && speed.is_finite(),
        };
        if !t_ok {
            return Err(invalid("exposure time must be > 0"));
        }
        Ok(())
    }
}

/// Weights of the personnel, vehicle and UAV risk groups.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RiskWeights {
    pub personnel: f64,
    pub vehicle: f64,
    pub uav: f64,
}

impl Default for RiskWeights {
    fn default() -> Self {
        Self { personnel: 0.5, vehicle: 0.3, uav: 0.2 }
    }
}

/// Shelter factor chosen from the building height under a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct ShieldingRule {
    /// Buildings at or below this height (m) use `low`.
    pub height_threshold: f64,
    pub low: f64,
    pub high: f64,
}

impl Default for ShieldingRule {
    fn default() -> Self {
        Self { height_threshold: 15.0, low: 0.5, high: 0.75 }
    }
}

impl ShieldingRule {
    pub fn coefficient(&self, building_height: f64) -> f64 {
        if building_height <= self.height_threshold {
            self.low
        } else {
            self.high
        }
    }
}

/// Everything needed to turn a scene into a risk map.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct RiskParams {
    pub fall: FallParams,
    pub uav: UavCollisionParams,
    /// Projected area of one road vehicle (m²).
    pub vehicle_area: f64,
    pub weights: RiskWeights,
    pub shielding: ShieldingRule,
    /// Cells with risk above this are unsafe.
    pub threshold: f64,
    /// Altitude bands; empty means the three default bands over `band_span`.
    pub bands: Vec<AltitudeBand>,
    /// Designated airspace `[floor, ceiling]` (m) used for default bands.
    pub band_span: (f64, f64),
}

impl Default for RiskParams {
    fn default() -> Self {
        Self {
            fall: FallParams::default(),
            uav: UavCollisionParams::default(),
            vehicle_area: 9.68,
            weights: RiskWeights::default(),
            shielding: ShieldingRule::default(),
            threshold: 1e-7,
            bands: Vec::new(),
            band_span: (30.0, 300.0),
        }
    }
}

impl RiskParams {
    pub fn validate(&self) -> Result<(), RiskError> {
        self.fall.validate()?;
        self.uav.validate()?;
        let w = self.weights;
        if [w.personnel, w.vehicle, w.uav].iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("risk weights must be >= 0"));
        }
        if !(self.vehicle_area.is_finite() && self.vehicle_area > 0.0) {
            return Err(invalid("vehicle area must be > 0"));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(invalid("risk threshold must be > 0"));
        }
        for b in &self.bands {
            if !(b.floor < b.ceiling) {
                return Err(invalid("altitude band floor must be below its ceiling"));
            }
        }
        Ok(())
    }
}
