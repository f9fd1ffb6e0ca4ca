use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::grid::{CellIndex, GridSpec, Point3, STENCIL_26};

/// Time a flight spends in one cell (s, absolute or relative to departure).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OccupancyEntry {
    pub cell: CellIndex,
    pub t_in: f64,
    pub t_out: f64,
}

/// Cells crossed by a polyline flown at `speed` from time 0, in flight order.
///
/// Each segment is split where it crosses cell faces and every piece is
/// assigned to the cell holding its midpoint. A track of zero length holds
/// its cell for the time needed to cross one cell along x.
pub fn cell_traversal(grid: &GridSpec, track: &[Point3], speed: f64) -> Vec<OccupancyEntry> {
    let mut out: Vec<OccupancyEntry> = Vec::new();
    let mut t0 = 0.0;
    let push = |cell: CellIndex, a: f64, b: f64, out: &mut Vec<OccupancyEntry>| match out.last_mut() {
        Some(last) if last.cell == cell => last.t_out = b,
        _ => out.push(OccupancyEntry { cell, t_in: a, t_out: b }),
    };
    for w in track.windows(2) {
        let (p, q) = (w[0], w[1]);
        let len = p.distance(&q);
        if len == 0.0 {
            continue;
        }
        let mut cuts: Vec<f64> = alloc::vec![0.0, 1.0];
        for (a, b, s) in [(p.x, q.x, grid.dx()), (p.y, q.y, grid.dy()), (p.z, q.z, grid.dz())] {
            if a == b {
                continue;
            }
            let (lo, hi) = (a.min(b), a.max(b));
            let mut m = crate::math::ceil(lo / s);
            while m * s <= hi {
                let t = (m * s - a) / (b - a);
                if t > 0.0 && t < 1.0 {
                    cuts.push(t);
                }
                m += 1.0;
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        for c in cuts.windows(2) {
            let mid = p.lerp(&q, 0.5 * (c[0] + c[1]));
            if let Ok(cell) = grid.point_to_cell(&mid) {
                push(cell, t0 + c[0] * len / speed, t0 + c[1] * len / speed, &mut out);
            }
        }
        t0 += len / speed;
    }
    if out.is_empty() {
        if let Some(cell) = track.first().and_then(|p| grid.point_to_cell(p).ok()) {
            out.push(OccupancyEntry { cell, t_in: 0.0, t_out: grid.dx() / speed });
        }
    }
    out
}

/// Raw cell occupancy of one flight plus its detection zone (every raw
/// interval copied to the 26 surrounding cells, overlapping copies merged).
#[derive(Debug, Clone, PartialEq)]
pub struct FlightOccupancy {
    pub raw: Vec<OccupancyEntry>,
    pub zone: Vec<OccupancyEntry>,
}

impl FlightOccupancy {
    /// Shifts every interval by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        let sh = |v: &[OccupancyEntry]| v.iter().map(|e| OccupancyEntry { t_in: e.t_in + dt, t_out: e.t_out + dt, ..*e }).collect();
        Self { raw: sh(&self.raw), zone: sh(&self.zone) }
    }
}

/// Occupancy of a flight departing at `departure`.
pub fn cell_occupancy(grid: &GridSpec, track: &[Point3], departure: f64, speed: f64) -> FlightOccupancy {
    let raw: Vec<OccupancyEntry> = cell_traversal(grid, track, speed)
        .into_iter()
        .map(|e| OccupancyEntry { t_in: e.t_in + departure, t_out: e.t_out + departure, ..e })
        .collect();
    let mut per_cell: BTreeMap<CellIndex, Vec<(f64, f64)>> = BTreeMap::new();
    for e in &raw {
        let cells = core::iter::once(e.cell).chain(STENCIL_26.iter().filter_map(|&(di, dj, dk)| e.cell.offset(di, dj, dk)));
        for c in cells.filter(|c| grid.contains(c)) {
            per_cell.entry(c).or_default().push((e.t_in, e.t_out));
        }
    }
    let mut zone = Vec::new();
    for (cell, mut iv) in per_cell {
        iv.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cur = iv[0];
        for &(a, b) in &iv[1..] {
            if a <= cur.1 {
                cur.1 = cur.1.max(b);
            } else {
                zone.push(OccupancyEntry { cell, t_in: cur.0, t_out: cur.1 });
                cur = (a, b);
            }
        }
        zone.push(OccupancyEntry { cell, t_in: cur.0, t_out: cur.1 });
    }
    FlightOccupancy { raw, zone }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conflict {
    pub cell: CellIndex,
    /// Overlap of the two intervals.
    pub start: f64,
    pub end: f64,
}

/// Earliest cell where `b` is present while the cell is in `a`'s detection
/// zone. Touching intervals count as overlapping.
pub fn detect_conflict(a: &FlightOccupancy, b: &FlightOccupancy) -> Option<Conflict> {
    let mut zone: BTreeMap<CellIndex, Vec<(f64, f64)>> = BTreeMap::new();
    for e in &a.zone {
        zone.entry(e.cell).or_default().push((e.t_in, e.t_out));
    }
    let mut best: Option<Conflict> = None;
    for e in &b.raw {
        if let Some(iv) = zone.get(&e.cell) {
            for &(t_in, t_out) in iv {
                if t_in <= e.t_out && e.t_in <= t_out {
                    let c = Conflict { cell: e.cell, start: t_in.max(e.t_in), end: t_out.min(e.t_out) };
                    if best.is_none_or(|x| (c.start, c.cell) < (x.start, x.cell)) {
                        best = Some(c);
                    }
                }
            }
        }
    }
    best
}

/// Cell to flight intervals for a set of flights.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OccupancyTable {
    pub cells: BTreeMap<CellIndex, Vec<(usize, f64, f64)>>,
}

impl OccupancyTable {
    pub fn insert(&mut self, flight: usize, entries: &[OccupancyEntry]) {
        for e in entries {
            let v = self.cells.entry(e.cell).or_default();
            let pos = v.partition_point(|x| x.1 <= e.t_in);
            v.insert(pos, (flight, e.t_in, e.t_out));
        }
    }
}

/// Brute-force check of a set of raw occupancies: every pair of flights from
/// different `groups` (aircraft) whose cells are within one cell of each
/// other at overlapping times. Returns the offending flight pairs.
pub fn audit_conflicts(raw: &[(usize, Vec<OccupancyEntry>)], groups: &[usize]) -> Vec<(usize, usize)> {
    let mut bad = Vec::new();
    for (x, (fa, ea)) in raw.iter().enumerate() {
        for (fb, eb) in &raw[x + 1..] {
            if groups[*fa] == groups[*fb] {
                continue;
            }
            let hit = ea.iter().any(|a| eb.iter().any(|b| a.cell.chebyshev(&b.cell) <= 1 && a.t_in <= b.t_out && b.t_in <= a.t_out));
            if hit {
                bad.push((*fa, *fb));
            }
        }
    }
    bad
}
