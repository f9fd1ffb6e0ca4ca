use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{config_err, Aircraft, Direction, FleetError, FleetScenario, FlightPlan, Regulations, Route, RouteNetwork, Vertiport};
use crate::grid::Point3;
use crate::math;

/// Vertiport ground positions (m).
const VERTIPORTS: [(&str, f64, f64); 5] =
    [("V1", 300.0, 300.0), ("V2", 300.0, 4220.0), ("V3", 2220.0, 300.0), ("V4", 2220.0, 4220.0), ("V5", 1260.0, 2260.0)];

/// Nominal route lengths (m) for every vertiport pair.
const ROUTES: [(usize, usize, f64); 10] = [
    (0, 1, 3920.0),
    (0, 2, 1920.0),
    (0, 3, 4365.0),
    (0, 4, 2183.0),
    (1, 2, 4365.0),
    (1, 3, 1920.0),
    (1, 4, 2183.0),
    (2, 3, 3920.0),
    (2, 4, 2183.0),
    (3, 4, 2183.0),
];

/// Five vertiports joined pairwise by straight tracks at one cruise altitude.
pub fn bundled_network(altitude: f64) -> RouteNetwork {
    let vertiports: Vec<Vertiport> =
        VERTIPORTS.iter().map(|&(name, x, y)| Vertiport { name: name.into(), position: Point3::new(x, y, 0.0) }).collect();
    let at = |v: usize| Point3::new(VERTIPORTS[v].1, VERTIPORTS[v].2, altitude);
    let routes = ROUTES.iter().map(|&(from, to, length)| Route { from, to, length, track: alloc::vec![at(from), at(to)] }).collect();
    RouteNetwork { vertiports, routes }
}

/// Synthetic day of flights over the bundled network.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct ScenarioConfig {
    /// Aircraft per route, based alternately at either end.
    pub aircraft_per_route: usize,
    pub flights_per_aircraft: u32,
    pub speed: f64,
    pub altitude: f64,
    pub cell_size: (f64, f64, f64),
    pub extent: (f64, f64, f64),
    /// Delay caps are drawn on the quantum grid in this range, then limited
    /// to block time plus turnaround (s).
    pub cap_range: (f64, f64),
    /// First departures are drawn uniformly on the quantum grid in this window (s).
    pub first_departure: (f64, f64),
    pub regulations: Regulations,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            aircraft_per_route: 2,
            flights_per_aircraft: 6,
            speed: 25.0,
            altitude: 135.0,
            cell_size: (50.0, 50.0, 30.0),
            extent: (2500.0, 4500.0, 300.0),
            cap_range: (30.0, 240.0),
            first_departure: (0.0, 7200.0),
            regulations: Regulations::default(),
            seed: 0,
        }
    }
}

/// Every aircraft shuttles back and forth on one route with exact turnaround
/// gaps; odd-numbered flights leave the aircraft's home vertiport.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<FleetScenario, FleetError> {
    cfg.regulations.validate()?;
    let (lo, hi) = cfg.first_departure;
    if !(cfg.speed > 0.0) || !(hi >= lo) || lo < cfg.regulations.service_start {
        return Err(config_err("need speed > 0 and a valid first-departure window inside service"));
    }
    let (cap_lo, cap_hi) = cfg.cap_range;
    if !(cap_lo >= 0.0 && cap_hi >= cap_lo) {
        return Err(config_err("need 0 <= cap_range.0 <= cap_range.1"));
    }
    let network = bundled_network(cfg.altitude);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let q = cfg.regulations.delay_quantum;
    let slots = math::floor((hi - lo) / q) as u64;
    let cap_slots = math::floor((cap_hi - cap_lo) / q) as u64;
    let mut aircraft = Vec::new();
    let mut flights = Vec::new();
    for (r, route) in network.routes.iter().enumerate() {
        let travel = math::round(route.length / cfg.speed);
        for n in 0..cfg.aircraft_per_route {
            let g = aircraft.len();
            aircraft.push(Aircraft { speed: cfg.speed });
            let (out, back) = if n % 2 == 0 { (Direction::Outbound, Direction::Inbound) } else { (Direction::Inbound, Direction::Outbound) };
            let mut t = lo + rng.gen_range(0..=slots) as f64 * q;
            for number in 1..=cfg.flights_per_aircraft {
                let gap = cfg.regulations.turnaround_after(number);
                let cap = cap_lo + rng.gen_range(0..=cap_slots) as f64 * q;
                flights.push(FlightPlan {
                    aircraft: g,
                    number,
                    route: r,
                    direction: if number % 2 == 1 { out } else { back },
                    departure: t,
                    delay: 0.0,
                    operating: true,
                    cap: cap.min(travel + gap),
                    travel_time: travel,
                });
                t += travel + gap;
            }
        }
    }
    let last = flights.iter().map(|f| f.departure + f.travel_time).fold(0.0, f64::max);
    if last > cfg.regulations.service_end {
        return Err(config_err(format!("planned flights end at {last} s, after the service window")));
    }
    let scenario = FleetScenario {
        network,
        aircraft,
        flights,
        regulations: cfg.regulations,
        cell_size: cfg.cell_size,
        extent: cfg.extent,
    };
    scenario.validate()?;
    Ok(scenario)
}
