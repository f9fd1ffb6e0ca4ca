use super::{AircraftPerformance, PlannerError, TrackQuery};
use crate::grid::{CellIndex, GridSpec, Point3};
use crate::math;
use crate::risk::RiskMap;

/// Buffer box size in cells per axis: `ceil(s_min / s) * 2 + 1`.
pub fn buffer_size(clearance: f64, grid: &GridSpec) -> (u32, u32, u32) {
    let n = |s: f64| math::ceil(clearance.max(0.0) / s) as u32 * 2 + 1;
    (n(grid.dx()), n(grid.dy()), n(grid.dz()))
}

/// Number of unsafe cells on the outer shell of the buffer box centered on
/// `center`. Shell cells outside the grid count as unsafe.
pub fn buffer_penalty(center: &CellIndex, map: &RiskMap, size: (u32, u32, u32)) -> f64 {
    let (hx, hy, hz) = ((size.0 / 2) as i64, (size.1 / 2) as i64, (size.2 / 2) as i64);
    let mut count = 0u32;
    for dk in -hz..=hz {
        let k_face = dk.abs() == hz;
        for di in -hx..=hx {
            let i_face = di.abs() == hx;
            for dj in -hy..=hy {
                if !(k_face || i_face || dj.abs() == hy) {
                    continue;
                }
                if map.is_unsafe_or_outside(center.offset(di, dj, dk)) {
                    count += 1;
                }
            }
        }
    }
    count as f64
}

/// Trapezoidal risk cost of one segment.
pub fn segment_risk_cost(p: &Point3, q: &Point3, r_p: f64, r_q: f64) -> f64 {
    0.5 * (r_p + r_q) * p.distance(q)
}

/// `1 + (m_p / m_p_max) tau_max`.
pub fn load_factor(perf: &AircraftPerformance, payload: f64) -> Result<f64, PlannerError> {
    if payload > perf.max_payload {
        return Err(PlannerError::Overload { payload, max: perf.max_payload });
    }
    Ok(1.0 + payload / perf.max_payload * perf.full_load_factor)
}

/// Energy cost of one segment.
pub fn segment_transport_cost(p: &Point3, q: &Point3, perf: &AircraftPerformance, payload: f64) -> Result<f64, PlannerError> {
    Ok(unit_transport(p, q, perf) * load_factor(perf, payload)?)
}

/// Transport cost at unit load factor.
pub(super) fn unit_transport(p: &Point3, q: &Point3, perf: &AircraftPerformance) -> f64 {
    (perf.energy_horizontal * p.horizontal_distance(q) + perf.energy_vertical * math::abs(q.z - p.z)) * perf.energy_cost
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackCost {
    pub cost: f64,
    pub risk_cost: f64,
    pub transport_cost: f64,
}

/// Risk, transport and weighted cost of a polyline. Risk at a point is the
/// relative risk of the cell holding it.
pub fn track_cost(points: &[Point3], map: &RiskMap, perf: &AircraftPerformance, query: &TrackQuery) -> Result<TrackCost, PlannerError> {
    let tau = load_factor(perf, query.payload)?;
    let grid = map.grid();
    let mut risk_cost = 0.0;
    let mut transport = 0.0;
    let mut prev: Option<(Point3, f64)> = None;
    for p in points {
        let r = map.relative_risk(&grid.point_to_cell(p)?);
        if let Some((q, rq)) = prev {
            risk_cost += segment_risk_cost(&q, p, rq, r);
            transport += unit_transport(&q, p, perf);
        }
        prev = Some((*p, r));
    }
    let transport_cost = transport * tau;
    Ok(TrackCost {
        cost: query.w_risk * risk_cost + query.w_transport * transport_cost,
        risk_cost,
        transport_cost,
    })
}
