use alloc::vec;
use alloc::vec::Vec;

use super::merge::simplify;
use super::{AircraftPerformance, PlannerError, Stage, Track, TrackQuery};
use crate::grid::Point3;
use crate::math;
use crate::risk::RiskMap;

/// One-dimensional natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    t: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

/// Fits a natural spline (zero second derivative at both ends) through
/// strictly increasing knots `t`.
pub fn natural_cubic_spline(t: &[f64], y: &[f64]) -> Spline {
    let n = t.len();
    assert!(n == y.len() && n >= 2, "spline needs matching knots and at least two points");
    let mut m = vec![0.0; n];
    if n > 2 {
        // Thomas algorithm on the interior equations
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        let mut sub = vec![0.0; k];
        let mut sup = vec![0.0; k];
        for r in 0..k {
            let (h0, h1) = (t[r + 1] - t[r], t[r + 2] - t[r + 1]);
            sub[r] = h0;
            diag[r] = 2.0 * (h0 + h1);
            sup[r] = h1;
            rhs[r] = 6.0 * ((y[r + 2] - y[r + 1]) / h1 - (y[r + 1] - y[r]) / h0);
        }
        for r in 1..k {
            let w = sub[r] / diag[r - 1];
            diag[r] -= w * sup[r - 1];
            rhs[r] -= w * rhs[r - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for r in (0..k - 1).rev() {
            m[r + 1] = (rhs[r] - sup[r] * m[r + 2]) / diag[r];
        }
    }
    Spline { t: t.to_vec(), y: y.to_vec(), m }
}

impl Spline {
    pub fn eval(&self, s: f64) -> f64 {
        let n = self.t.len();
        let seg = match self.t.iter().position(|&k| k > s) {
            Some(0) => 0,
            Some(p) => p - 1,
            None => n - 2,
        };
        self.eval_in(seg, s)
    }

    /// Evaluates the cubic of knot interval `seg`.
    pub fn eval_in(&self, seg: usize, s: f64) -> f64 {
        let (t0, t1) = (self.t[seg], self.t[seg + 1]);
        let h = t1 - t0;
        let (a, b) = ((t1 - s) / h, (s - t0) / h);
        a * self.y[seg]
            + b * self.y[seg + 1]
            + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h / 6.0
    }

    pub fn second_derivative_at_knot(&self, n: usize) -> f64 {
        self.m[n]
    }
}

/// True when every cell whose center lies within one cell size of `p` on each
/// axis is inside the grid and safe.
pub fn point_is_safe(map: &RiskMap, p: &Point3) -> bool {
    let g = map.grid();
    let (a, b, c) = g.dims();
    let range = |v: f64, d: f64, n: u32| -> Option<(i64, i64)> {
        // centers (i - 1/2) d within [v - d, v + d], with a little slack
        let lo = math::ceil(v / d - 0.5 - 1e-9) as i64;
        let hi = math::floor(v / d + 1.5 + 1e-9) as i64;
        (lo >= 1 && hi <= n as i64).then_some((lo, hi))
    };
    let (Some(ri), Some(rj), Some(rk)) = (range(p.x, g.dx(), a), range(p.y, g.dy(), b), range(p.z, g.dz(), c)) else {
        return false;
    };
    for k in rk.0..=rk.1 {
        for i in ri.0..=ri.1 {
            for j in rj.0..=rj.1 {
                if map.is_unsafe(&crate::grid::CellIndex::new(i as u32, j as u32, k as u32)) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SmoothOptions {
    /// Sampling step along the track (m); `None` means half the x cell size.
    pub step: Option<f64>,
}

/// Replaces the polyline by samples of a chord-length natural cubic spline
/// through its vertices. Knot intervals where any sample fails the safety or
/// altitude check keep the straight segment instead.
pub fn smooth_track(
    track: &Track,
    map: &RiskMap,
    perf: &AircraftPerformance,
    query: &TrackQuery,
    opts: SmoothOptions,
) -> Result<Track, PlannerError> {
    let pts = simplify(&track.waypoints);
    if pts.len() < 2 {
        return Track::new(Stage::Smoothed, pts, Vec::new(), map, perf, query);
    }
    let step = opts.step.unwrap_or(0.5 * map.grid().dx());
    if !(step.is_finite() && step > 0.0) {
        return Err(PlannerError::InvalidQuery("smoothing step must be > 0"));
    }
    let (zlo, zhi) = query.altitude_window(perf);
    let in_window = |p: &Point3| p.z >= zlo - 1e-9 && p.z <= zhi + 1e-9;

    let mut s = Vec::with_capacity(pts.len());
    let mut acc = 0.0;
    for (n, p) in pts.iter().enumerate() {
        if n > 0 {
            acc += pts[n - 1].distance(p);
        }
        s.push(acc);
    }
    let coord = |f: fn(&Point3) -> f64| natural_cubic_spline(&s, &pts.iter().map(f).collect::<Vec<_>>());
    let (sx, sy, sz) = (coord(|p| p.x), coord(|p| p.y), coord(|p| p.z));

    let mut out = Vec::new();
    for seg in 0..pts.len() - 1 {
        let len = s[seg + 1] - s[seg];
        let pieces = (math::ceil(len / step) as usize).max(1);
        let curve: Vec<Point3> = (0..pieces)
            .map(|q| {
                let u = s[seg] + len * q as f64 / pieces as f64;
                Point3::new(sx.eval_in(seg, u), sy.eval_in(seg, u), sz.eval_in(seg, u))
            })
            .collect();
        let ok = curve.iter().all(|p| in_window(p) && point_is_safe(map, p));
        if ok {
            out.extend(curve);
        } else {
            out.extend((0..pieces).map(|q| pts[seg].lerp(&pts[seg + 1], q as f64 / pieces as f64)));
        }
    }
    out.push(*pts.last().unwrap());
    out.dedup_by(|a, b| a.distance(b) <= 1e-9);
    Track::new(Stage::Smoothed, out, Vec::new(), map, perf, query)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CellIndex, GridSpec};
    use crate::planner::{merge_to_equivalent, plan_initial_track};
    use proptest::prelude::*;

    fn perf() -> AircraftPerformance {
        AircraftPerformance { h_min: 0.0, ..AircraftPerformance::default() }
    }

    fn open_map(g: GridSpec) -> RiskMap {
        RiskMap::from_parts(g, vec![0.0; g.cell_count()], vec![false; g.cell_count()], 1e-7).unwrap()
    }

    fn polyline(map: &RiskMap, pts: Vec<Point3>) -> Track {
        let q = TrackQuery { airspace_floor: 0.0, ..TrackQuery::new(CellIndex::new(1, 1, 1), CellIndex::new(1, 1, 1)) };
        Track::new(Stage::Equivalent, pts, Vec::new(), map, &perf(), &q).unwrap()
    }

    fn q0() -> TrackQuery {
        TrackQuery { airspace_floor: 0.0, ..TrackQuery::new(CellIndex::new(1, 1, 1), CellIndex::new(1, 1, 1)) }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn spline_interpolates_and_is_natural() {
        let t = [0.0, 1.0, 2.5, 4.0, 4.5];
        let y = [1.0, -2.0, 0.5, 3.0, 2.0];
        let sp = natural_cubic_spline(&t, &y);
        for (a, b) in t.iter().zip(&y) {
            assert!((sp.eval(*a) - b).abs() < 1e-12);
        }
        assert_eq!(sp.second_derivative_at_knot(0), 0.0);
        assert_eq!(sp.second_derivative_at_knot(4), 0.0);
        // C1 and C2 at interior knots via one-sided finite differences
        let h = 1e-5;
        for n in 1..4 {
            let k = t[n];
            let left = (sp.eval_in(n - 1, k) - sp.eval_in(n - 1, k - h)) / h;
            let right = (sp.eval_in(n, k + h) - sp.eval_in(n, k)) / h;
            assert!((left - right).abs() < 1e-3);
            let l2 = (sp.eval_in(n - 1, k) - 2.0 * sp.eval_in(n - 1, k - h) + sp.eval_in(n - 1, k - 2.0 * h)) / (h * h);
            let r2 = (sp.eval_in(n, k + 2.0 * h) - 2.0 * sp.eval_in(n, k + h) + sp.eval_in(n, k)) / (h * h);
            assert!((l2 - sp.second_derivative_at_knot(n)).abs() < 1e-2);
            assert!((r2 - sp.second_derivative_at_knot(n)).abs() < 1e-2);
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn spline_matches_dense_solve() {
        // Oracle: second derivatives from Gaussian elimination on the full system
        let t = [0.0, 0.7, 1.9, 2.4, 3.8, 5.0];
        let y = [0.3, 1.1, -0.4, 0.9, 2.2, -1.0];
        let n = t.len();
        let mut a = vec![vec![0.0f64; n + 1]; n];
        a[0][0] = 1.0;
        a[n - 1][n - 1] = 1.0;
        for r in 1..n - 1 {
            let (h0, h1) = (t[r] - t[r - 1], t[r + 1] - t[r]);
            a[r][r - 1] = h0;
            a[r][r] = 2.0 * (h0 + h1);
            a[r][r + 1] = h1;
            a[r][n] = 6.0 * ((y[r + 1] - y[r]) / h1 - (y[r] - y[r - 1]) / h0);
        }
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, p);
            for r in 0..n {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=n {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        let sp = natural_cubic_spline(&t, &y);
        for r in 0..n {
            assert!((sp.second_derivative_at_knot(r) - a[r][n] / a[r][r]).abs() < 1e-10);
        }
    }

    #[test]
    fn two_points_stay_straight() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 10, 10, 5).unwrap();
        let map = open_map(g);
        let t = polyline(&map, vec![Point3::new(75.0, 75.0, 45.0), Point3::new(375.0, 275.0, 105.0)]);
        let sm = smooth_track(&t, &map, &perf(), &q0(), SmoothOptions::default()).unwrap();
        assert!((sm.length() - t.length()).abs() < 1e-9);
        assert_eq!(sm.waypoints[0], t.waypoints[0]);
        assert!(sm.waypoints.last().unwrap().distance(t.waypoints.last().unwrap()) < 1e-9);
    }

    #[test]
    fn collinear_points_stay_on_the_line() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 10, 10, 5).unwrap();
        let map = open_map(g);
        let a = Point3::new(75.0, 75.0, 45.0);
        let b = Point3::new(375.0, 275.0, 105.0);
        // unevenly spaced, so a uniform parameter would bend the line
        let pts = vec![a, a.lerp(&b, 0.1), a.lerp(&b, 0.7), b];
        let t = Track { waypoints: pts, ..polyline(&map, vec![a, b]) };
        let sm = smooth_track(&t, &map, &perf(), &q0(), SmoothOptions::default()).unwrap();
        let dir = (b - a) * (1.0 / a.distance(&b));
        for p in &sm.waypoints {
            let v = *p - a;
            let along = v.dot(&dir);
            assert!((v - dir * along).norm() < 1e-9);
        }
    }

    #[test]
    fn corner_gets_rounded() {
        let g = GridSpec::from_counts(50.0, 50.0, 30.0, 12, 12, 5).unwrap();
        let map = open_map(g);
        let t = polyline(&map, vec![Point3::new(125.0, 125.0, 75.0), Point3::new(425.0, 125.0, 75.0), Point3::new(425.0, 425.0, 75.0)]);
        let sm = smooth_track(&t, &map, &perf(), &q0(), SmoothOptions::default()).unwrap();
        assert!(sm.max_turn_angle() < t.max_turn_angle());
        assert!(sm.waypoints.len() > t.waypoints.len());
        assert!(sm.waypoints.iter().all(|p| point_is_safe(&map, p)));
    }

    #[test]
    fn unsafe_bulge_falls_back_to_polyline() {
        let g = GridSpec::from_counts(10.0, 10.0, 10.0, 60, 60, 5).unwrap();
        let map = open_map(g);
        let t = polyline(&map, vec![Point3::new(105.0, 105.0, 25.0), Point3::new(455.0, 105.0, 25.0), Point3::new(455.0, 455.0, 25.0)]);
        let free = smooth_track(&t, &map, &perf(), &q0(), SmoothOptions::default()).unwrap();
        let dip = free.waypoints.iter().filter(|p| p.x < 454.0).min_by(|a, b| a.y.total_cmp(&b.y)).unwrap();
        assert!(dip.y < 95.0);

        // a cell next to the dip but far from the straight leg
        let mut blocked = vec![false; g.cell_count()];
        blocked[g.linear(&g.point_to_cell(&Point3::new(dip.x, dip.y - 5.0, 25.0)).unwrap())] = true;
        let map = RiskMap::from_parts(g, vec![0.0; g.cell_count()], blocked, 1e-7).unwrap();
        let sm = smooth_track(&t, &map, &perf(), &q0(), SmoothOptions::default()).unwrap();
        assert!(sm.waypoints.iter().filter(|p| p.x < 454.0).all(|p| (p.y - 105.0).abs() < 1e-9));
        assert!(sm.waypoints.iter().all(|p| point_is_safe(&map, p)));
        // the second leg is still curved
        assert!(sm.waypoints.iter().any(|p| p.x > 456.0));
    }

    #[test]
    fn safety_check_neighbourhood() {
        let g = GridSpec::from_counts(10.0, 10.0, 10.0, 5, 5, 5).unwrap();
        let mut blocked = vec![false; g.cell_count()];
        blocked[g.linear(&CellIndex::new(4, 3, 3))] = true;
        let map = RiskMap::from_parts(g, vec![0.0; g.cell_count()], blocked, 1e-7).unwrap();
        // blocked center is at x = 35
        assert!(!point_is_safe(&map, &Point3::new(30.0, 25.0, 25.0)));
        assert!(!point_is_safe(&map, &Point3::new(25.0, 25.0, 25.0)));
        assert!(point_is_safe(&map, &Point3::new(24.9, 25.0, 25.0)));
        // near the grid edge the neighbourhood reaches outside
        assert!(!point_is_safe(&map, &Point3::new(5.0, 25.0, 25.0)));
        assert!(point_is_safe(&map, &Point3::new(15.0, 15.0, 15.0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn smoothed_samples_pass_recheck(
            obstacles in prop::collection::vec((3u32..=14, 3u32..=14), 0..12),
            o in (3u32..=5, 3u32..=5),
            d in (12u32..=14, 12u32..=14),
        ) {
            let g = GridSpec::from_counts(50.0, 50.0, 30.0, 16, 16, 6).unwrap();
            let mut blocked = vec![false; g.cell_count()];
            for &(i, j) in &obstacles {
                for k in 1..=4 {
                    blocked[g.linear(&CellIndex::new(i, j, k))] = true;
                }
            }
            let map = RiskMap::from_parts(g, vec![0.0; g.cell_count()], blocked, 1e-7).unwrap();
            let q = TrackQuery { airspace_floor: 0.0, ..TrackQuery::new(CellIndex::new(o.0, o.1, 3), CellIndex::new(d.0, d.1, 3)) };
            let p = perf();
            let init = match plan_initial_track(&q, &map, &p) { Ok(t) => t, Err(_) => return Ok(()) };
            // only tracks that kept the buffer are expected to be fully safe
            let size = crate::planner::buffer_size(q.clearance, &g);
            prop_assume!(init.cells.iter().all(|c| crate::planner::buffer_penalty(c, &map, size) == 0.0));
            let eq = merge_to_equivalent(&init, &map, &p, &q).unwrap();
            let sm = smooth_track(&eq, &map, &p, &q, SmoothOptions::default()).unwrap();
            for w in &sm.waypoints {
                prop_assert!(point_is_safe(&map, w), "{:?}", w);
            }
        }
    }
}
