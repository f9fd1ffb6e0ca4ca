use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::cost::{buffer_penalty, buffer_size, load_factor, unit_transport};
use super::{polyline_length, AircraftPerformance, PlannerError, Stage, Track, TrackQuery};
use crate::grid::{CellIndex, GridSpec};
use crate::risk::RiskMap;

/// Raw search output.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub cells: Vec<CellIndex>,
    /// Minimized objective including buffer penalties and the tie-break terms.
    pub objective: f64,
    pub explored: usize,
}

#[derive(Debug, Clone, Copy)]
struct Open {
    f: f64,
    h: f64,
    idx: usize,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then(other.h.total_cmp(&self.h)).then(other.idx.cmp(&self.idx))
    }
}

/// Per-cell admissibility under the altitude window.
pub(super) fn allowed_layers(grid: &GridSpec, window: (f64, f64)) -> Result<Vec<bool>, PlannerError> {
    let (_, _, c) = grid.dims();
    let layers: Vec<bool> = (1..=c)
        .map(|k| {
            let z = grid.layer_altitude(k);
            z >= window.0 && z <= window.1
        })
        .collect();
    if window.0 > window.1 || !layers.iter().any(|l| *l) {
        return Err(PlannerError::EmptyAltitudeWindow { floor: window.0, ceiling: window.1 });
    }
    Ok(layers)
}

/// Best-first search from origin to destination.
///
/// Edge cost is `(w_risk + e) risk + (w_transport + e) transport` with `e` the
/// query tie-break, and entering a cell adds `penalty * buffer_penalty`. The
/// estimate is the straight-line transport cost to the destination, which
/// never overestimates any remaining path cost.
pub fn search(query: &TrackQuery, map: &RiskMap, perf: &AircraftPerformance) -> Result<SearchResult, PlannerError> {
    query.validate()?;
    perf.validate()?;
    let grid = *map.grid();
    let tau = load_factor(perf, query.payload)?;
    let layers = allowed_layers(&grid, query.altitude_window(perf))?;
    let open_cell = |c: &CellIndex| layers[c.k as usize - 1] && !map.is_unsafe(c);
    for end in [&query.origin, &query.destination] {
        grid.cell_center(end)?;
        if !open_cell(end) {
            return Err(PlannerError::BlockedEndpoint(*end));
        }
    }

    let w_r = query.w_risk + query.tie_break;
    let w_t = (query.w_transport + query.tie_break) * tau;
    let size = buffer_size(query.clearance, &grid);
    let goal = grid.linear(&query.destination);
    let goal_center = grid.center_unchecked(&query.destination);
    let heuristic = |c: &CellIndex| w_t * unit_transport(&grid.center_unchecked(c), &goal_center, perf);

    let n = grid.cell_count();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut penalty = vec![f64::NAN; n];
    let mut node_penalty = |idx: usize, c: &CellIndex| {
        if penalty[idx].is_nan() {
            penalty[idx] = if query.penalty == 0.0 { 0.0 } else { query.penalty * buffer_penalty(c, map, size) };
        }
        penalty[idx]
    };

    let start = grid.linear(&query.origin);
    g[start] = node_penalty(start, &query.origin);
    let mut heap = BinaryHeap::new();
    let h0 = heuristic(&query.origin);
    heap.push(Open { f: g[start] + h0, h: h0, idx: start });
    let mut explored = 0usize;

    while let Some(Open { idx, .. }) = heap.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        explored += 1;
        if idx == goal {
            let mut cells = Vec::new();
            let mut cur = idx;
            while cur != usize::MAX {
                cells.push(grid.from_linear(cur));
                cur = parent[cur];
            }
            cells.reverse();
            return Ok(SearchResult { cells, objective: g[goal], explored });
        }
        let cell = grid.from_linear(idx);
        let p = grid.center_unchecked(&cell);
        let r = map.relative_risk(&cell);
        for nb in grid.neighbors_iter(cell) {
            let ni = grid.linear(&nb);
            if closed[ni] || !open_cell(&nb) {
                continue;
            }
            let q = grid.center_unchecked(&nb);
            let edge = w_r * 0.5 * (r + map.relative_risk(&nb)) * p.distance(&q) + w_t * unit_transport(&p, &q, perf);
            let ng = g[idx] + edge + node_penalty(ni, &nb);
            if ng < g[ni] {
                g[ni] = ng;
                parent[ni] = idx;
                let h = heuristic(&nb);
                heap.push(Open { f: ng + h, h, idx: ni });
            }
        }
    }
    Err(PlannerError::Infeasible { explored })
}

fn cells_to_track(
    stage: Stage,
    cells: Vec<CellIndex>,
    map: &RiskMap,
    perf: &AircraftPerformance,
    query: &TrackQuery,
) -> Result<Track, PlannerError> {
    let pts: Vec<_> = cells.iter().map(|c| map.grid().center_unchecked(c)).collect();
    let length = polyline_length(&pts);
    if length > perf.range {
        return Err(PlannerError::RangeExceeded { length, range: perf.range });
    }
    Track::new(stage, pts, cells, map, perf, query)
}

/// Risk-aware track through cell centers with the safety buffer priced in.
pub fn plan_initial_track(query: &TrackQuery, map: &RiskMap, perf: &AircraftPerformance) -> Result<Track, PlannerError> {
    let res = search(query, map, perf)?;
    cells_to_track(Stage::Initial, res.cells, map, perf, query)
}

/// Cheapest-transport track ignoring risk and the buffer; costs are still
/// reported with the query's weights.
pub fn plan_shortest_track(query: &TrackQuery, map: &RiskMap, perf: &AircraftPerformance) -> Result<Track, PlannerError> {
    let res = search(&query.shortest(), map, perf)?;
    cells_to_track(Stage::Shortest, res.cells, map, perf, query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellBox;
    use crate::planner::segment_transport_cost;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn perf() -> AircraftPerformance {
        AircraftPerformance { h_min: 0.0, ..AircraftPerformance::default() }
    }

    fn query(o: CellIndex, d: CellIndex) -> TrackQuery {
        TrackQuery { airspace_floor: 0.0, clearance: 0.0, ..TrackQuery::new(o, d) }
    }

    fn open_map(g: GridSpec) -> RiskMap {
        RiskMap::from_parts(g, vec![0.0; g.cell_count()], vec![false; g.cell_count()], 1e-7).unwrap()
    }

    /// Plain Dijkstra over the same graph with a linear scan for the minimum.
    fn dijkstra(q: &TrackQuery, map: &RiskMap, perf: &AircraftPerformance) -> Option<f64> {
        let g = *map.grid();
        let tau = 1.0 + q.payload / perf.max_payload * perf.full_load_factor;
        let (lo, hi) = (perf.h_min.max(q.airspace_floor), perf.h_max.min(q.airspace_ceiling));
        let ok = |c: &CellIndex| {
            let z = (c.k as f64 - 0.5) * g.dz();
            z >= lo && z <= hi && !map.is_unsafe(c)
        };
        let ns = |s: f64| ((q.clearance / s).ceil() as i64) * 2 + 1;
        let (hx, hy, hz) = (ns(g.dx()) / 2, ns(g.dy()) / 2, ns(g.dz()) / 2);
        let pen = |c: &CellIndex| {
            let mut n = 0.0;
            for di in -hx..=hx {
                for dj in -hy..=hy {
                    for dk in -hz..=hz {
                        if di.abs() < hx && dj.abs() < hy && dk.abs() < hz {
                            continue;
                        }
                        let cell = c.offset(di, dj, dk).filter(|x| g.contains(x));
                        if cell.is_none_or(|x| map.is_unsafe(&x)) {
                            n += 1.0;
                        }
                    }
                }
            }
            q.penalty * n
        };
        let center = |c: &CellIndex| g.cell_center(c).unwrap();
        let n = g.cell_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut done = vec![false; n];
        dist[g.linear(&q.origin)] = pen(&q.origin);
        loop {
            let mut best = None;
            for i in 0..n {
                if !done[i] && dist[i].is_finite() && best.is_none_or(|b: usize| dist[i] < dist[b]) {
                    best = Some(i);
                }
            }
            let u = best?;
            done[u] = true;
            let cu = g.from_linear(u);
            if cu == q.destination {
                return Some(dist[u]);
            }
            for v in g.neighbors(&cu) {
                if !ok(&v) {
                    continue;
                }
                let (a, b) = (center(&cu), center(&v));
                let d = a.distance(&b);
                let risk = 0.5 * (map.relative_risk(&cu) + map.relative_risk(&v)) * d;
                let tr = (perf.energy_horizontal * a.horizontal_distance(&b) + perf.energy_vertical * (a.z - b.z).abs())
                    * perf.energy_cost
                    * tau;
                let w = dist[u] + (q.w_risk + q.tie_break) * risk + (q.w_transport + q.tie_break) * tr + pen(&v);
                let vi = g.linear(&v);
                if w < dist[vi] {
                    dist[vi] = w;
                }
            }
        }
    }

    #[test]
    fn same_cell() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 4, 4, 3).unwrap();
        let map = open_map(g);
        let c = CellIndex::new(2, 2, 2);
        let t = plan_initial_track(&query(c, c), &map, &perf()).unwrap();
        assert_eq!(t.waypoints.len(), 1);
        assert_eq!(t.metrics.cost, 0.0);
    }

    #[test]
    fn enclosed_destination_is_infeasible() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 7, 7, 5).unwrap();
        let d = CellIndex::new(5, 5, 3);
        let mut blocked = vec![false; g.cell_count()];
        for c in CellBox::spanning(CellIndex::new(4, 4, 2), CellIndex::new(6, 6, 4)).cells() {
            if c != d {
                blocked[g.linear(&c)] = true;
            }
        }
        let map = RiskMap::from_parts(g, vec![0.0; g.cell_count()], blocked, 1e-7).unwrap();
        match plan_initial_track(&query(CellIndex::new(1, 1, 1), d), &map, &perf()) {
            Err(PlannerError::Infeasible { explored }) => assert!(explored > 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_window_and_blocked_endpoints() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 4, 4, 3).unwrap();
        let map = open_map(g);
        let q = TrackQuery { airspace_floor: 200.0, airspace_ceiling: 100.0, ..query(CellIndex::new(1, 1, 1), CellIndex::new(2, 2, 2)) };
        assert!(matches!(search(&q, &map, &perf()), Err(PlannerError::EmptyAltitudeWindow { .. })));
        let q = TrackQuery { airspace_floor: 50.0, ..query(CellIndex::new(1, 1, 1), CellIndex::new(2, 2, 2)) };
        assert!(matches!(search(&q, &map, &perf()), Err(PlannerError::BlockedEndpoint(_))));
    }

    #[test]
    fn range_limit() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 20, 1, 1).unwrap();
        let map = open_map(g);
        let p = AircraftPerformance { range: 500.0, ..perf() };
        let r = plan_initial_track(&query(CellIndex::new(1, 1, 1), CellIndex::new(20, 1, 1)), &map, &p);
        assert!(matches!(r, Err(PlannerError::RangeExceeded { .. })));
    }

    #[test]
    fn empty_grid_transport_optimum() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 10, 10, 3).unwrap();
        let map = open_map(g);
        let p = perf();
        let o = CellIndex::new(1, 2, 1);
        let d = CellIndex::new(9, 5, 3);
        let q = query(o, d).with_weights(0.0, 1.0);
        let t = plan_initial_track(&q, &map, &p).unwrap();
        // 3 diagonal + 5 straight horizontal moves, 60 m climb
        let horizontal = 3.0 * 50.0 * 2f64.sqrt() + 5.0 * 50.0;
        let tau = load_factor(&p, q.payload).unwrap();
        let expected = (5.135e3 * horizontal + 4.65e5 * 60.0) * 5.96e-7 * tau;
        assert!((t.metrics.transport_cost - expected).abs() < 1e-9);
        let flat: f64 = t.waypoints.windows(2).map(|w| w[0].horizontal_distance(&w[1])).sum();
        assert!((flat - horizontal).abs() < 1e-9);
    }

    #[test]
    fn avoids_risky_wall_when_risk_weighted() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 9, 9, 1).unwrap();
        let mut risk = vec![0.0; g.cell_count()];
        for j in 1..=7 {
            risk[g.linear(&CellIndex::new(5, j, 1))] = 0.9e-7;
        }
        let map = RiskMap::from_parts(g, risk, vec![false; g.cell_count()], 1e-7).unwrap();
        let q = query(CellIndex::new(1, 4, 1), CellIndex::new(9, 4, 1));
        let risky = plan_shortest_track(&q, &map, &perf()).unwrap();
        let safe = plan_initial_track(&q.with_weights(1.0, 0.0), &map, &perf()).unwrap();
        assert!(safe.metrics.risk_cost < risky.metrics.risk_cost);
        assert!(safe.metrics.transport_cost > risky.metrics.transport_cost);
        assert_eq!(safe.metrics.risk_cost, 0.0);
    }

    fn random_map(g: GridSpec, seed: &[(u8, u8)]) -> RiskMap {
        let risk: Vec<f64> = (0..g.cell_count()).map(|n| seed[n % seed.len()].0 as f64 / 255.0 * 1e-7).collect();
        let blocked: Vec<bool> = (0..g.cell_count()).map(|n| seed[(n * 7 + 3) % seed.len()].1 < 60).collect();
        RiskMap::from_parts(g, risk, blocked, 1e-7).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn matches_dijkstra(
            seed in prop::collection::vec((any::<u8>(), any::<u8>()), 37..97),
            o in (1u32..=8, 1u32..=8, 1u32..=4),
            d in (1u32..=8, 1u32..=8, 1u32..=4),
            w in 0.0..1.0f64,
            clearance in prop::sample::select(vec![0.0, 50.0]),
        ) {
            let g = GridSpec::from_counts(50.0, 50.0, 30.0, 8, 8, 4).unwrap();
            let map = random_map(g, &seed);
            let q = TrackQuery {
                w_risk: w,
                w_transport: 1.0 - w,
                clearance,
                ..query(CellIndex::new(o.0, o.1, o.2), CellIndex::new(d.0, d.1, d.2))
            };
            let p = perf();
            let got = search(&q, &map, &p);
            let want = if map.is_unsafe(&q.origin) || map.is_unsafe(&q.destination) { None } else { dijkstra(&q, &map, &p) };
            match (got, want) {
                (Ok(r), Some(v)) => {
                    prop_assert!((r.objective - v).abs() <= 1e-9 * v.max(1.0), "{} vs {}", r.objective, v);
                    let set: BTreeSet<_> = r.cells.iter().collect();
                    prop_assert_eq!(set.len(), r.cells.len());
                    for w in r.cells.windows(2) {
                        prop_assert_eq!(w[0].chebyshev(&w[1]), 1);
                    }
                    // estimate never exceeds the realised cost-to-go
                    let tau = load_factor(&p, q.payload).unwrap();
                    let dest = g.cell_center(&q.destination).unwrap();
                    let mut to_go = 0.0;
                    for n in (0..r.cells.len()).rev() {
                        let here = g.cell_center(&r.cells[n]).unwrap();
                        let est = (q.w_transport + q.tie_break) * segment_transport_cost(&here, &dest, &p, q.payload).unwrap();
                        prop_assert!(est <= to_go + 1e-9);
                        if n > 0 {
                            let prev = g.cell_center(&r.cells[n - 1]).unwrap();
                            to_go += (q.w_transport + q.tie_break) * unit_transport(&prev, &here, &p) * tau;
                        }
                    }
                }
                (Err(PlannerError::BlockedEndpoint(_)), None) | (Err(PlannerError::Infeasible { .. }), None) => {}
                (a, b) => prop_assert!(false, "planner {:?} oracle {:?}", a, b),
            }
        }
    }
}
