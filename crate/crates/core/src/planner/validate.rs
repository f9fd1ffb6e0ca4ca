use alloc::vec::Vec;

use super::{polyline_length, AircraftPerformance, Track, TrackQuery};
use crate::grid::CellIndex;
use crate::math;
use crate::risk::RiskMap;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Altitude { index: usize, z: f64 },
    Clearance { index: usize, distance: f64 },
    Repeated { index: usize },
    Range { length: f64 },
    Mass { total: f64 },
    Wind { actual: f64 },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a track against the altitude window, clearance to blocked cells,
/// waypoint uniqueness, range, mass and wind limits.
pub fn validate_track(track: &Track, map: &RiskMap, perf: &AircraftPerformance, query: &TrackQuery) -> ValidationReport {
    let mut v = Vec::new();
    let (lo, hi) = query.altitude_window(perf);
    let g = map.grid();
    let reach = |d: f64| math::ceil(query.clearance / d) as i64 + 1;
    let (ri, rj, rk) = (reach(g.dx()), reach(g.dy()), reach(g.dz()));

    for (n, p) in track.waypoints.iter().enumerate() {
        if p.z < lo - 1e-9 || p.z > hi + 1e-9 {
            v.push(Violation::Altitude { index: n, z: p.z });
        }
        let Ok(home) = g.point_to_cell(p) else {
            v.push(Violation::Clearance { index: n, distance: 0.0 });
            continue;
        };
        let mut nearest = f64::INFINITY;
        for dk in -rk..=rk {
            for di in -ri..=ri {
                for dj in -rj..=rj {
                    let Some(c) = home.offset(di, dj, dk).filter(|c: &CellIndex| g.contains(c)) else {
                        continue;
                    };
                    if map.is_blocked(&c) {
                        nearest = nearest.min(p.distance(&g.center_unchecked(&c)));
                    }
                }
            }
        }
        if nearest < query.clearance {
            v.push(Violation::Clearance { index: n, distance: nearest });
        }
    }

    let mut order: Vec<usize> = (0..track.waypoints.len()).collect();
    let w = &track.waypoints;
    order.sort_by(|&a, &b| w[a].x.total_cmp(&w[b].x).then(w[a].y.total_cmp(&w[b].y)).then(w[a].z.total_cmp(&w[b].z)));
    for pair in order.windows(2) {
        if w[pair[0]].distance(&w[pair[1]]) <= 1e-9 {
            v.push(Violation::Repeated { index: pair[0].max(pair[1]) });
        }
    }

    let length = polyline_length(w);
    if length > perf.range {
        v.push(Violation::Range { length });
    }
    let total = perf.empty_mass + perf.max_payload;
    if total > perf.max_takeoff_mass {
        v.push(Violation::Mass { total });
    }
    if query.wind > perf.max_wind {
        v.push(Violation::Wind { actual: query.wind });
    }
    ValidationReport { violations: v }
}
