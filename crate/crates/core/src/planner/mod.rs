//! Single-aircraft track planning over a risk map.
//!
//! The search produces a cell-center path (the initial track). Cells along it
//! are then merged into safe boxes to straighten the path (equivalent track)
//! and a chord-length cubic spline rounds the remaining corners (smoothed
//! track).

use alloc::vec::Vec;

mod cost;
mod merge;
mod search;
mod smooth;
mod validate;

pub use cost::{buffer_penalty, buffer_size, load_factor, segment_risk_cost, segment_transport_cost, track_cost, TrackCost};
pub use merge::merge_to_equivalent;
pub use search::{plan_initial_track, plan_shortest_track, search, SearchResult};
pub use smooth::{natural_cubic_spline, point_is_safe, smooth_track, SmoothOptions, Spline};
pub use validate::{validate_track, ValidationReport, Violation};

use crate::grid::{CellIndex, GridError, GridSpec, Point3};
use crate::risk::RiskMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlannerError {
    #[error("no feasible path after exploring {explored} cells")]
    Infeasible { explored: usize },
    #[error("altitude window is empty: [{floor}, {ceiling}] m")]
    EmptyAltitudeWindow { floor: f64, ceiling: f64 },
    #[error("track length {length:.1} m exceeds range {range:.1} m")]
    RangeExceeded { length: f64, range: f64 },
    #[error("payload {payload} kg exceeds maximum {max} kg")]
    Overload { payload: f64, max: f64 },
    #[error("{0} is unsafe or outside the altitude window")]
    BlockedEndpoint(CellIndex),
    #[error("invalid query: {0}")]
    InvalidQuery(&'static str),
    #[error("invalid aircraft performance: {0}")]
    InvalidPerformance(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Aircraft limits and energy model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct AircraftPerformance {
    pub h_min: f64,
    pub h_max: f64,
    /// Maximum range L_e (m).
    pub range: f64,
    pub max_takeoff_mass: f64,
    pub empty_mass: f64,
    pub max_payload: f64,
    /// Maximum tolerable wind (m/s).
    pub max_wind: f64,
    /// Cruise ground speed (m/s).
    pub cruise_speed: f64,
    /// Energy per horizontal metre (J/m).
    pub energy_horizontal: f64,
    /// Energy per vertical metre (J/m).
    pub energy_vertical: f64,
    /// Cost of one joule (currency/J).
    pub energy_cost: f64,
    /// Extra cost factor at full payload.
    pub full_load_factor: f64,
}

impl Default for AircraftPerformance {
    fn default() -> Self {
        Self {
            h_min: 90.0,
            h_max: 3000.0,
            range: 30_000.0,
            max_takeoff_mass: 650.0,
            empty_mass: 400.0,
            max_payload: 220.0,
            max_wind: 26.45,
            cruise_speed: 25.0,
            energy_horizontal: 5.135e3,
            energy_vertical: 4.65e5,
            energy_cost: 5.96e-7,
            full_load_factor: 1.56,
        }
    }
}

impl AircraftPerformance {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let positive = [
            self.h_max,
            self.range,
            self.max_takeoff_mass,
            self.empty_mass,
            self.max_payload,
            self.cruise_speed,
            self.energy_horizontal,
            self.energy_vertical,
            self.energy_cost,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(PlannerError::InvalidPerformance("masses, speeds, range and energy rates must be > 0"));
        }
        if !(self.h_min >= 0.0 && self.h_min < self.h_max) {
            return Err(PlannerError::InvalidPerformance("need 0 <= h_min < h_max"));
        }
        if !(self.full_load_factor >= 0.0 && self.max_wind >= 0.0) {
            return Err(PlannerError::InvalidPerformance("load factor and wind limit must be >= 0"));
        }
        Ok(())
    }
}

/// One planning request.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrackQuery {
    pub origin: CellIndex,
    pub destination: CellIndex,
    /// Weight of the risk cost.
    #[cfg_attr(feature = "serde", serde(default = "defaults::half"))]
    pub w_risk: f64,
    /// Weight of the transportation cost.
    #[cfg_attr(feature = "serde", serde(default = "defaults::half"))]
    pub w_transport: f64,
    /// Designated airspace floor h'_min (m).
    #[cfg_attr(feature = "serde", serde(default = "defaults::floor"))]
    pub airspace_floor: f64,
    /// Designated airspace ceiling h'_max (m).
    #[cfg_attr(feature = "serde", serde(default = "defaults::ceiling"))]
    pub airspace_ceiling: f64,
    /// Safety clearance s_min (m).
    #[cfg_attr(feature = "serde", serde(default = "defaults::clearance"))]
    pub clearance: f64,
    /// Buffer penalty coefficient mu.
    #[cfg_attr(feature = "serde", serde(default = "defaults::penalty"))]
    pub penalty: f64,
    /// Actual payload m_p (kg).
    #[cfg_attr(feature = "serde", serde(default = "defaults::payload"))]
    pub payload: f64,
    /// Actual wind v_wr (m/s).
    #[cfg_attr(feature = "serde", serde(default))]
    pub wind: f64,
    /// Small weight added to both objectives so that ties between equally
    /// weighted paths go to the one that is better in the other objective.
    /// Not included in reported costs.
    #[cfg_attr(feature = "serde", serde(default = "defaults::tie_break"))]
    pub tie_break: f64,
}

#[cfg(feature = "serde")]
mod defaults {
    pub fn half() -> f64 {
        0.5
    }
    pub fn floor() -> f64 {
        30.0
    }
    pub fn ceiling() -> f64 {
        300.0
    }
    pub fn clearance() -> f64 {
        50.0
    }
    pub fn penalty() -> f64 {
        100.0
    }
    pub fn payload() -> f64 {
        150.0
    }
    pub fn tie_break() -> f64 {
        1e-6
    }
}

impl TrackQuery {
    pub fn new(origin: CellIndex, destination: CellIndex) -> Self {
        Self {
            origin,
            destination,
            w_risk: 0.5,
            w_transport: 0.5,
            airspace_floor: 30.0,
            airspace_ceiling: 300.0,
            clearance: 50.0,
            penalty: 100.0,
            payload: 150.0,
            wind: 0.0,
            tie_break: 1e-6,
        }
    }

    /// Query between the cells holding two points.
    pub fn between_points(grid: &GridSpec, origin: &Point3, destination: &Point3) -> Result<Self, PlannerError> {
        Ok(Self::new(grid.point_to_cell(origin)?, grid.point_to_cell(destination)?))
    }

    pub fn with_weights(mut self, w_risk: f64, w_transport: f64) -> Self {
        self.w_risk = w_risk;
        self.w_transport = w_transport;
        self
    }

    /// Pure transport-cost search without safety buffer.
    pub fn shortest(mut self) -> Self {
        self.w_risk = 0.0;
        self.w_transport = 1.0;
        self.penalty = 0.0;
        self
    }

    pub fn validate(&self) -> Result<(), PlannerError> {
        let w = [self.w_risk, self.w_transport];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || self.w_risk + self.w_transport == 0.0 {
            return Err(PlannerError::InvalidQuery("weights must be >= 0 and not both zero"));
        }
        if !(self.clearance >= 0.0 && self.clearance.is_finite()) {
            return Err(PlannerError::InvalidQuery("clearance must be >= 0"));
        }
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return Err(PlannerError::InvalidQuery("penalty must be >= 0"));
        }
        if !(self.tie_break >= 0.0 && self.tie_break.is_finite()) {
            return Err(PlannerError::InvalidQuery("tie break must be >= 0"));
        }
        if !(self.payload >= 0.0 && self.wind >= 0.0) {
            return Err(PlannerError::InvalidQuery("payload and wind must be >= 0"));
        }
        Ok(())
    }

    /// Allowed waypoint altitudes `[max(h_min, h'_min), min(h_max, h'_max)]`.
    pub fn altitude_window(&self, perf: &AircraftPerformance) -> (f64, f64) {
        (perf.h_min.max(self.airspace_floor), perf.h_max.min(self.airspace_ceiling))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Stage {
    Shortest,
    Initial,
    Equivalent,
    Smoothed,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Shortest => "shortest",
            Stage::Initial => "initial",
            Stage::Equivalent => "equivalent",
            Stage::Smoothed => "smoothed",
        }
    }
}

impl core::fmt::Display for Stage {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrackMetrics {
    /// Weighted objective `w_risk C_R + w_transport C_T`.
    pub cost: f64,
    /// Risk cost, with risk measured in multiples of the threshold.
    pub risk_cost: f64,
    pub transport_cost: f64,
    pub length: f64,
    pub waypoints: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Track {
    pub stage: Stage,
    pub waypoints: Vec<Point3>,
    /// Pass time at each waypoint from departure at cruise speed (s).
    pub times: Vec<f64>,
    /// Grid cells behind the waypoints; empty for continuous stages.
    pub cells: Vec<CellIndex>,
    pub metrics: TrackMetrics,
}

impl Track {
    /// Builds a track and fills times and metrics.
    pub fn new(
        stage: Stage,
        waypoints: Vec<Point3>,
        cells: Vec<CellIndex>,
        map: &RiskMap,
        perf: &AircraftPerformance,
        query: &TrackQuery,
    ) -> Result<Self, PlannerError> {
        let c = track_cost(&waypoints, map, perf, query)?;
        let times = pass_times(&waypoints, perf.cruise_speed);
        Ok(Self {
            stage,
            metrics: TrackMetrics {
                cost: c.cost,
                risk_cost: c.risk_cost,
                transport_cost: c.transport_cost,
                length: polyline_length(&waypoints),
                waypoints: waypoints.len(),
            },
            waypoints,
            times,
            cells,
        })
    }

    pub fn length(&self) -> f64 {
        self.metrics.length
    }

    /// Largest heading change between consecutive segments (rad).
    pub fn max_turn_angle(&self) -> f64 {
        max_turn_angle(&self.waypoints)
    }
}

pub fn polyline_length(points: &[Point3]) -> f64 {
    points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Cumulative time at each point flying the polyline at `speed`.
pub fn pass_times(points: &[Point3], speed: f64) -> Vec<f64> {
    let mut t = 0.0;
    let mut out = Vec::with_capacity(points.len());
    for (n, p) in points.iter().enumerate() {
        if n > 0 {
            t += points[n - 1].distance(p) / speed;
        }
        out.push(t);
    }
    out
}

pub fn max_turn_angle(points: &[Point3]) -> f64 {
    points
        .windows(3)
        .filter_map(|w| {
            let (u, v) = (w[1] - w[0], w[2] - w[1]);
            let (nu, nv) = (u.norm(), v.norm());
            (nu > 0.0 && nv > 0.0).then(|| crate::math::acos((u.dot(&v) / (nu * nv)).clamp(-1.0, 1.0)))
        })
        .fold(0.0, f64::max)
}
