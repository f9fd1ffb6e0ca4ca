use alloc::vec;
use alloc::vec::Vec;

use super::search::allowed_layers;
use super::{polyline_length, AircraftPerformance, PlannerError, Stage, Track, TrackQuery};
use crate::grid::{CellBox, CellIndex, GridSpec, Point3, STENCIL_26};
use crate::risk::RiskMap;

/// Lazily evaluated "clear" flag: the cell lies in the altitude window, and it
/// and all 26 neighbours are in the grid and safe.
struct Clearance<'a> {
    map: &'a RiskMap,
    layers: Vec<bool>,
    memo: Vec<u8>,
}

impl<'a> Clearance<'a> {
    fn new(map: &'a RiskMap, layers: Vec<bool>) -> Self {
        Self { map, layers, memo: vec![0; map.grid().cell_count()] }
    }

    fn is_clear(&mut self, c: &CellIndex) -> bool {
        let idx = self.map.grid().linear(c);
        if self.memo[idx] == 0 {
            let ok = self.layers[c.k as usize - 1]
                && !self.map.is_unsafe(c)
                && STENCIL_26.iter().all(|&(di, dj, dk)| !self.map.is_unsafe_or_outside(c.offset(di, dj, dk)));
            self.memo[idx] = if ok { 1 } else { 2 };
        }
        self.memo[idx] == 1
    }
}

/// Groups consecutive path cells into axis-aligned boxes made only of clear
/// cells. A path cell that is not clear forms its own box (flag `false`).
fn merge_boxes(cells: &[CellIndex], clear: &mut Clearance<'_>) -> Vec<(CellBox, bool)> {
    let mut boxes = Vec::new();
    let Some(first) = cells.first() else {
        return boxes;
    };
    let mut cur = CellBox::single(*first);
    let mut cur_clear = clear.is_clear(first);
    for c in &cells[1..] {
        let c_clear = clear.is_clear(c);
        if cur_clear && c_clear {
            let grown = cur.expanded_to(c);
            if grown.cells().all(|x| cur.contains(&x) || clear.is_clear(&x)) {
                cur = grown;
                continue;
            }
        }
        boxes.push((cur, cur_clear));
        cur = CellBox::single(*c);
        cur_clear = c_clear;
    }
    boxes.push((cur, cur_clear));
    boxes
}

/// Crossing point between two touching boxes: the midpoint of their centers,
/// moved into the shared face, edge or corner and into the altitude window.
fn crossing(a: &CellBox, b: &CellBox, grid: &GridSpec, window: (f64, f64)) -> Point3 {
    let (alo, ahi) = a.bounds(grid);
    let (blo, bhi) = b.bounds(grid);
    let lo = Point3::new(alo.x.max(blo.x), alo.y.max(blo.y), alo.z.max(blo.z));
    let hi = Point3::new(ahi.x.min(bhi.x), ahi.y.min(bhi.y), ahi.z.min(bhi.z));
    let mid = (a.center(grid) + b.center(grid)) * 0.5;
    let (zlo, zhi) = (lo.z.max(window.0), hi.z.min(window.1));
    let (zlo, zhi) = if zlo <= zhi { (zlo, zhi) } else { (lo.z, hi.z) };
    Point3::new(mid.x.clamp(lo.x, hi.x), mid.y.clamp(lo.y, hi.y), mid.z.clamp(zlo, zhi))
}

/// Drops consecutive duplicates and interior points lying on the segment
/// between their neighbours.
pub(super) fn simplify(points: &[Point3]) -> Vec<Point3> {
    let mut out: Vec<Point3> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().is_some_and(|q| q.distance(p) <= 1e-9) {
            continue;
        }
        while out.len() >= 2 {
            let (a, b) = (out[out.len() - 2], out[out.len() - 1]);
            let (u, v) = (b - a, *p - b);
            let cross = Point3::new(u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x);
            if cross.norm() <= 1e-9 * u.norm() * v.norm() && u.dot(&v) > 0.0 {
                out.pop();
            } else {
                break;
            }
        }
        out.push(*p);
    }
    out
}

/// Straightens a cell path by flying directly between crossing points of
/// merged safe boxes.
pub fn merge_to_equivalent(
    track: &Track,
    map: &RiskMap,
    perf: &AircraftPerformance,
    query: &TrackQuery,
) -> Result<Track, PlannerError> {
    let grid = map.grid();
    let window = query.altitude_window(perf);
    let mut clear = Clearance::new(map, allowed_layers(grid, window)?);
    let points = if track.cells.len() < 2 {
        track.waypoints.clone()
    } else {
        // Consecutive points always share the closure of one box, or are the
        // centers of two adjacent non-clear cells.
        let boxes = merge_boxes(&track.cells, &mut clear);
        let mut pts = Vec::with_capacity(boxes.len() + 1);
        pts.push(grid.center_unchecked(&track.cells[0]));
        for (n, (b, is_clear)) in boxes.iter().enumerate() {
            if n > 0 {
                let (prev, prev_clear) = &boxes[n - 1];
                if *prev_clear || *is_clear {
                    pts.push(crossing(prev, b, grid, window));
                }
                if !is_clear {
                    pts.push(grid.center_unchecked(&b.lo));
                }
            }
        }
        pts.push(grid.center_unchecked(track.cells.last().unwrap()));
        pts
    };
    let mut points = simplify(&points);
    let fallback = simplify(&track.waypoints);
    if points.len() > fallback.len() || polyline_length(&points) > polyline_length(&fallback) {
        points = fallback;
    }
    Track::new(Stage::Equivalent, points, Vec::new(), map, perf, query)
}
