use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::genome::ScheduleGenome;
use super::occupancy::{audit_conflicts, cell_occupancy, FlightOccupancy, OccupancyEntry};
use super::{FleetError, FleetScenario, FlightPlan, Regulations};
use crate::grid::CellIndex;

/// Widening applied to every forbidden delay window so that decoded schedules
/// stay conflict-free after the delays are added back in floating point.
const GUARD: f64 = 1e-6;

/// Forbidden relative delays between every ordered pair of flights.
///
/// For flights `x` and `p` with delays `d_x` and `d_p`, the pair conflicts
/// exactly when `d_x - d_p` falls in one of `forbidden(x, p)`.
#[derive(Debug, Clone)]
pub struct ConflictIndex {
    n: usize,
    windows: Vec<Vec<(f64, f64)>>,
    occupancy: Vec<FlightOccupancy>,
}

impl ConflictIndex {
    pub fn build(scenario: &FleetScenario) -> Result<Self, FleetError> {
        let grid = scenario.grid()?;
        let flights = &scenario.flights;
        let n = flights.len();
        let occupancy: Vec<FlightOccupancy> = flights
            .iter()
            .map(|f| cell_occupancy(&grid, &scenario.track_of(f), f.departure, scenario.aircraft[f.aircraft].speed))
            .collect();

        let mut zone_at: BTreeMap<CellIndex, Vec<(usize, f64, f64)>> = BTreeMap::new();
        for (x, occ) in occupancy.iter().enumerate() {
            for e in &occ.zone {
                zone_at.entry(e.cell).or_default().push((x, e.t_in, e.t_out));
            }
        }
        let mut windows = vec![Vec::new(); n * n];
        for (p, occ) in occupancy.iter().enumerate() {
            for b in &occ.raw {
                let Some(zs) = zone_at.get(&b.cell) else { continue };
                for &(x, a_in, a_out) in zs {
                    if flights[x].aircraft == flights[p].aircraft {
                        continue;
                    }
                    let (lo, hi) = (b.t_in - a_out - GUARD, b.t_out - a_in + GUARD);
                    if hi < -flights[p].cap || lo > flights[x].cap {
                        continue;
                    }
                    windows[x * n + p].push((lo, hi));
                }
            }
        }
        for w in &mut windows {
            merge_intervals(w);
        }
        Ok(Self { n, windows, occupancy })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Windows of `d_x - d_p` in which `x` and `p` conflict.
    pub fn forbidden(&self, x: usize, p: usize) -> &[(f64, f64)] {
        &self.windows[x * self.n + p]
    }

    /// Undelayed occupancy of a flight.
    pub fn occupancy(&self, x: usize) -> &FlightOccupancy {
        &self.occupancy[x]
    }

    /// Number of ordered pairs that can conflict at all.
    pub fn conflicting_pairs(&self) -> usize {
        self.windows.iter().filter(|w| !w.is_empty()).count()
    }
}

fn merge_intervals(v: &mut Vec<(f64, f64)>) {
    if v.len() < 2 {
        return;
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for &(lo, hi) in v.iter() {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    *v = out;
}

/// Delays flight `x` until it is clear of every operating flight in
/// `predecessors`, in steps of the delay quantum starting from `earliest`.
/// The flight is cancelled (delay 0, not operating) when the needed delay
/// passes its cap or its arrival passes the end of service.
pub fn resolve_pairwise(
    index: &ConflictIndex,
    flights: &[FlightPlan],
    x: usize,
    predecessors: &[usize],
    earliest: f64,
    regs: &Regulations,
) -> FlightPlan {
    let mut blocked: Vec<(f64, f64)> = predecessors
        .iter()
        .filter(|&&p| flights[p].operating)
        .flat_map(|&p| index.forbidden(x, p).iter().map(move |&(lo, hi)| (lo + flights[p].delay, hi + flights[p].delay)))
        .collect();
    blocked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let q = regs.delay_quantum;
    let lb = earliest.max(0.0);
    let mut d = lb;
    for &(lo, hi) in &blocked {
        if lo > d {
            break;
        }
        if hi >= d {
            d = lb + (crate::math::floor((hi - lb) / q) + 1.0) * q;
        }
    }
    let mut f = flights[x];
    if d > f.cap + 1e-9 || f.departure + d + f.travel_time > regs.service_end + 1e-9 {
        f.delay = 0.0;
        f.operating = false;
    } else {
        f.delay = d;
        f.operating = true;
    }
    f
}

/// A decoded schedule: every flight with its delay and operate flag, and the
/// order in which conflicts were resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub flights: Vec<FlightPlan>,
    pub order: Vec<usize>,
}

impl Schedule {
    /// Resolves flights one at a time in genome order. Each gene's delay is a
    /// lower bound; the turnaround after the aircraft's previous operating
    /// flight is another.
    pub fn decode(scenario: &FleetScenario, index: &ConflictIndex, genome: &ScheduleGenome) -> Self {
        let regs = &scenario.regulations;
        let mut flights = scenario.flights.clone();
        for f in &mut flights {
            f.delay = 0.0;
            f.operating = false;
        }
        let mut last_of: Vec<Option<usize>> = vec![None; scenario.aircraft.len()];
        let mut done: Vec<usize> = Vec::with_capacity(flights.len());
        for gene in &genome.genes {
            let x = gene.flight;
            let mut lb = gene.delay as f64;
            if let Some(prev) = last_of[flights[x].aircraft] {
                let p = &flights[prev];
                lb = lb.max(p.arrival() + regs.turnaround_after(p.number) - flights[x].departure);
            }
            flights[x] = resolve_pairwise(index, &flights, x, &done, lb, regs);
            if flights[x].operating {
                last_of[flights[x].aircraft] = Some(x);
            }
            done.push(x);
        }
        Self { flights, order: genome.genes.iter().map(|g| g.flight).collect() }
    }

    pub fn operating(&self) -> usize {
        self.flights.iter().filter(|f| f.operating).count()
    }

    pub fn cancelled(&self) -> usize {
        self.flights.len() - self.operating()
    }

    pub fn delayed(&self) -> usize {
        self.flights.iter().filter(|f| f.operating && f.delay > 0.0).count()
    }

    pub fn total_delay(&self) -> f64 {
        self.flights.iter().filter(|f| f.operating).map(|f| f.delay).sum()
    }

    /// Occupancy of operating flights with their delays applied.
    pub fn occupancy(&self, index: &ConflictIndex) -> Vec<(usize, Vec<OccupancyEntry>)> {
        self.flights
            .iter()
            .enumerate()
            .filter(|(_, f)| f.operating)
            .map(|(x, f)| (x, index.occupancy(x).shifted(f.delay).raw))
            .collect()
    }

    /// Pairs of operating flights of different aircraft that come within one
    /// cell of each other at the same time, by brute force.
    pub fn audit(&self, index: &ConflictIndex) -> Vec<(usize, usize)> {
        let groups: Vec<usize> = self.flights.iter().map(|f| f.aircraft).collect();
        audit_conflicts(&self.occupancy(index), &groups)
    }
}

/// Decodes the base genome: flights in departure order, no extra delay.
pub fn build_initial_schedule(scenario: &FleetScenario, index: &ConflictIndex) -> Result<Schedule, FleetError> {
    scenario.validate()?;
    Ok(Schedule::decode(scenario, index, &ScheduleGenome::base(scenario)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Objective {
    pub w: f64,
    /// Mean delay per aircraft T_d (s).
    pub t_d: f64,
    /// Operating flights S.
    pub s: usize,
    pub total_delay: f64,
}

/// `W = omega6 * T_d - omega7 * S` with `T_d` in seconds.
pub fn objective(schedule: &Schedule, omega6: f64, omega7: f64, aircraft: usize) -> Objective {
    objective_in(schedule, omega6, omega7, aircraft, 1.0)
}

/// Same as [`objective`] but `T_d` enters `W` in units of `delay_unit`
/// seconds. The reported `t_d` stays in seconds.
pub fn objective_in(schedule: &Schedule, omega6: f64, omega7: f64, aircraft: usize, delay_unit: f64) -> Objective {
    let total_delay = schedule.total_delay();
    let t_d = if aircraft == 0 { 0.0 } else { total_delay / aircraft as f64 };
    let s = schedule.operating();
    Objective { w: omega6 * t_d / delay_unit - omega7 * s as f64, t_d, s, total_delay }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegulationViolation {
    NegativeDelay { flight: usize },
    CapExceeded { flight: usize, delay: f64, cap: f64 },
    BeforeService { flight: usize },
    AfterService { flight: usize, arrival: f64 },
    Turnaround { flight: usize, gap: f64, required: f64 },
    TurnaroundOrder,
}

/// Service window, turnaround gaps and delay caps for every operating flight.
pub fn check_regulations(scenario: &FleetScenario, schedule: &Schedule) -> Vec<RegulationViolation> {
    let regs = &scenario.regulations;
    let mut v = Vec::new();
    if !(regs.turnaround_out < regs.turnaround_in) {
        v.push(RegulationViolation::TurnaroundOrder);
    }
    for (x, f) in schedule.flights.iter().enumerate().filter(|(_, f)| f.operating) {
        if f.delay < 0.0 {
            v.push(RegulationViolation::NegativeDelay { flight: x });
        }
        if f.delay > f.cap + 1e-9 {
            v.push(RegulationViolation::CapExceeded { flight: x, delay: f.delay, cap: f.cap });
        }
        if f.actual_departure() < regs.service_start - 1e-9 {
            v.push(RegulationViolation::BeforeService { flight: x });
        }
        if f.arrival() > regs.service_end + 1e-9 {
            v.push(RegulationViolation::AfterService { flight: x, arrival: f.arrival() });
        }
    }
    for g in 0..scenario.aircraft.len() {
        let mut mine: Vec<(usize, &FlightPlan)> =
            schedule.flights.iter().enumerate().filter(|(_, f)| f.aircraft == g && f.operating).collect();
        mine.sort_by_key(|(_, f)| f.number);
        for w in mine.windows(2) {
            let (prev, next) = (w[0].1, w[1].1);
            let gap = next.actual_departure() - prev.arrival();
            let required = regs.turnaround_after(prev.number);
            if gap + 1e-9 < required {
                v.push(RegulationViolation::Turnaround { flight: w[1].0, gap, required });
            }
        }
    }
    v
}
