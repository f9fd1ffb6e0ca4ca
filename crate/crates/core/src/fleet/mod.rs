//! Fleet scheduling over a fixed route network.
//!
//! Every flight follows a pre-planned route track at constant speed. Two
//! flights conflict when one of them sits in a cell of the other's 3x3x3
//! detection zone at the same time. Conflicts are resolved one flight at a
//! time in a given order by delaying the later flight; the order and extra
//! delays form the genome searched by the annealing-enhanced GA.

use alloc::string::String;
use alloc::vec::Vec;

mod genome;
mod occupancy;
mod resolve;
mod scenario;
mod soa;

pub use genome::{crossover, mutate, CrossoverKind, MutationKind, ScheduleGenome};
pub use occupancy::{audit_conflicts, cell_occupancy, cell_traversal, detect_conflict, Conflict, FlightOccupancy, OccupancyEntry, OccupancyTable};
pub use resolve::{build_initial_schedule, check_regulations, objective, objective_in, resolve_pairwise, ConflictIndex, Objective, RegulationViolation, Schedule};
pub use scenario::{bundled_network, generate_scenario, ScenarioConfig};
pub use soa::{
    normalize_fitness, optimize_schedule, run_baseline_ga, sa_accept, sa_select, Evaluated, OptimizationResult, SoaConfig, TracePoint,
};

use crate::grid::{GridSpec, Point3};
use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FleetError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("flight {aircraft}/{flight} violates the base plan: {reason}")]
    Plan { aircraft: usize, flight: u32, reason: String },
    #[error("no feasible schedule found")]
    NoFeasible,
    #[error("route {0} references a missing vertiport")]
    BadRoute(usize),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

pub(crate) fn config_err(msg: impl Into<String>) -> FleetError {
    FleetError::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vertiport {
    pub name: String,
    pub position: Point3,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Route {
    pub from: usize,
    pub to: usize,
    /// Nominal length L_g (m).
    pub length: f64,
    /// Track from `from` to `to`.
    pub track: Vec<Point3>,
}

impl Route {
    pub fn track_length(&self) -> f64 {
        crate::planner::polyline_length(&self.track)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RouteNetwork {
    pub vertiports: Vec<Vertiport>,
    pub routes: Vec<Route>,
}

impl RouteNetwork {
    /// Every route must join existing vertiports, and its track must be within
    /// 1% of the nominal length.
    pub fn validate(&self) -> Result<(), FleetError> {
        for (n, r) in self.routes.iter().enumerate() {
            if r.from >= self.vertiports.len() || r.to >= self.vertiports.len() || r.track.is_empty() {
                return Err(FleetError::BadRoute(n));
            }
            let l = r.track_length();
            if (l - r.length).abs() > 0.01 * r.length.max(1.0) {
                return Err(config_err(alloc::format!("route {n}: track is {l:.1} m but nominal length is {:.1} m", r.length)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Direction {
    Outbound,
    Inbound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Aircraft {
    /// Cruise speed v_g (m/s).
    pub speed: f64,
}

/// One planned flight and its scheduling outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FlightPlan {
    pub aircraft: usize,
    /// 1-based flight number within the aircraft's day.
    pub number: u32,
    pub route: usize,
    pub direction: Direction,
    /// Planned departure D (s).
    pub departure: f64,
    /// Assigned delay d (s).
    #[cfg_attr(feature = "serde", serde(default))]
    pub delay: f64,
    #[cfg_attr(feature = "serde", serde(default = "yes"))]
    pub operating: bool,
    /// Delay cap (s).
    pub cap: f64,
    /// Block time `round(L / v)` (s).
    pub travel_time: f64,
}

#[cfg(feature = "serde")]
fn yes() -> bool {
    true
}

impl FlightPlan {
    /// Arrival including the assigned delay.
    pub fn arrival(&self) -> f64 {
        self.departure + self.delay + self.travel_time
    }

    pub fn actual_departure(&self) -> f64 {
        self.departure + self.delay
    }
}

/// Time-slot regulations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct Regulations {
    pub service_start: f64,
    pub service_end: f64,
    /// Gap after odd-numbered flights T_D (s).
    pub turnaround_out: f64,
    /// Gap after even-numbered flights T_R (s).
    pub turnaround_in: f64,
    /// Interference term of the daily flight count (s).
    pub chi: f64,
    /// Delay step (s).
    pub delay_quantum: f64,
}

impl Default for Regulations {
    fn default() -> Self {
        Self {
            service_start: 0.0,
            service_end: 8.0 * 3600.0,
            turnaround_out: 240.0,
            turnaround_in: 360.0,
            chi: 0.3,
            delay_quantum: 10.0,
        }
    }
}

impl Regulations {
    pub fn validate(&self) -> Result<(), FleetError> {
        if !(self.turnaround_out < self.turnaround_in) {
            return Err(config_err("outbound turnaround must be shorter than inbound turnaround"));
        }
        if !(self.service_end > self.service_start) {
            return Err(config_err("service window must be non-empty"));
        }
        if !(self.delay_quantum > 0.0 && self.turnaround_out >= 0.0) {
            return Err(config_err("delay quantum must be > 0 and turnarounds >= 0"));
        }
        Ok(())
    }

    /// Minimum gap after flight number `f`.
    pub fn turnaround_after(&self, f: u32) -> f64 {
        if f % 2 == 1 {
            self.turnaround_out
        } else {
            self.turnaround_in
        }
    }
}

/// Everything the scheduler needs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FleetScenario {
    pub network: RouteNetwork,
    pub aircraft: Vec<Aircraft>,
    pub flights: Vec<FlightPlan>,
    pub regulations: Regulations,
    /// Cell sizes `(dx, dy, dz)` and extent `(x, y, z)` of the occupancy grid.
    pub cell_size: (f64, f64, f64),
    pub extent: (f64, f64, f64),
}

impl FleetScenario {
    pub fn grid(&self) -> Result<GridSpec, FleetError> {
        let (dx, dy, dz) = self.cell_size;
        let (x, y, z) = self.extent;
        Ok(GridSpec::new(dx, dy, dz, x, y, z)?)
    }

    /// Track flown by a flight, in flight direction.
    pub fn track_of(&self, f: &FlightPlan) -> Vec<Point3> {
        let mut t = self.network.routes[f.route].track.clone();
        if f.direction == Direction::Inbound {
            t.reverse();
        }
        t
    }

    /// Checks references, caps and the planned turnaround gaps.
    pub fn validate(&self) -> Result<(), FleetError> {
        self.regulations.validate()?;
        self.network.validate()?;
        for f in &self.flights {
            let plan_err = |reason: &str| FleetError::Plan { aircraft: f.aircraft, flight: f.number, reason: reason.into() };
            if f.aircraft >= self.aircraft.len() || f.route >= self.network.routes.len() || f.number == 0 {
                return Err(plan_err("unknown aircraft or route"));
            }
            let v = self.aircraft[f.aircraft].speed;
            if !(v > 0.0) {
                return Err(plan_err("speed must be > 0"));
            }
            let block = math::round(self.network.routes[f.route].length / v);
            if (f.travel_time - block).abs() > 1e-9 {
                return Err(plan_err("travel time must equal round(L / v)"));
            }
            if !(f.cap >= 0.0) || f.cap > block + self.regulations.turnaround_after(f.number) + 1e-9 {
                return Err(plan_err("delay cap must lie in [0, round(L / v) + turnaround]"));
            }
        }
        for g in 0..self.aircraft.len() {
            let mut mine: Vec<&FlightPlan> = self.flights.iter().filter(|f| f.aircraft == g).collect();
            mine.sort_by_key(|f| f.number);
            for w in mine.windows(2) {
                if w[1].number != w[0].number + 1 {
                    return Err(FleetError::Plan { aircraft: g, flight: w[1].number, reason: "flight numbers must be consecutive".into() });
                }
                let gap = w[1].departure - (w[0].departure + w[0].travel_time);
                if gap + 1e-9 < self.regulations.turnaround_after(w[0].number) {
                    return Err(FleetError::Plan { aircraft: g, flight: w[1].number, reason: "planned turnaround gap too short".into() });
                }
            }
        }
        Ok(())
    }
}

/// Flights per aircraft that fit a service window (always even).
pub fn daily_flight_count(
    service_start: f64,
    service_end: f64,
    length: f64,
    speed: f64,
    turnaround_out: f64,
    turnaround_in: f64,
    chi: f64,
) -> Result<u32, FleetError> {
    if !(service_end > service_start) || !(speed > 0.0) {
        return Err(config_err("need service_end > service_start and speed > 0"));
    }
    let denom = 2.0 * math::round(length / speed) + turnaround_out + turnaround_in + chi;
    if !(denom > 0.0) {
        return Err(config_err("round-trip time must be > 0"));
    }
    Ok(math::floor((service_end - service_start) / denom) as u32 * 2)
}

/// Pass time at each waypoint flying at `speed` from `departure`.
pub fn waypoint_times(track: &[Point3], departure: f64, speed: f64) -> Vec<f64> {
    crate::planner::pass_times(track, speed).into_iter().map(|t| t + departure).collect()
}
