use uam_core::fleet::{build_initial_schedule, check_regulations, generate_scenario, optimize_schedule, ConflictIndex, ScenarioConfig, SoaConfig};
use uam_core::planner::{merge_to_equivalent, plan_initial_track, point_is_safe, smooth_track, AircraftPerformance, SmoothOptions, TrackQuery};
use uam_core::risk::{build_risk_map, RiskParams};
use uam_core::scene::{ColumnRange, UrbanScene};
use uam_core::{CellIndex, GridSpec};

#[test]
fn tower_is_avoided_end_to_end() {
    let grid = GridSpec::from_counts(20.0, 20.0, 20.0, 30, 30, 10).unwrap();
    let mut heights = vec![0.0; 900];
    for i in 12..18 {
        for j in 12..18 {
            heights[i * 30 + j] = 180.0;
        }
    }
    let scene = UrbanScene::from_heights(grid, heights)
        .unwrap()
        .with_population_density(1e-4)
        .unwrap()
        .with_population_zone(ColumnRange::new(1, 30, 1, 30), 1e-4)
        .unwrap();
    let map = build_risk_map(&scene, &RiskParams::default()).unwrap();
    let perf = AircraftPerformance::default();
    let q = TrackQuery::new(CellIndex::new(3, 3, 6), CellIndex::new(28, 28, 6));
    let initial = plan_initial_track(&q, &map, &perf).unwrap();
    assert!(initial.cells.iter().all(|c| !map.is_unsafe(c)));
    let eq = merge_to_equivalent(&initial, &map, &perf, &q).unwrap();
    assert!(eq.metrics.waypoints <= initial.metrics.waypoints);
    let smooth = smooth_track(&eq, &map, &perf, &q, SmoothOptions::default()).unwrap();
    assert!(smooth.waypoints.iter().all(|p| point_is_safe(&map, p)));
    assert_eq!(smooth.waypoints.first(), initial.waypoints.first());
    assert_eq!(smooth.waypoints.last(), initial.waypoints.last());
}

#[test]
fn small_day_schedules_within_regulations() {
    let sc = generate_scenario(&ScenarioConfig { flights_per_aircraft: 2, seed: 4, ..ScenarioConfig::default() }).unwrap();
    let index = ConflictIndex::build(&sc).unwrap();
    let base = build_initial_schedule(&sc, &index).unwrap();
    assert!(base.audit(&index).is_empty());
    let r = optimize_schedule(&sc, &index, &SoaConfig { generations: 20, population: 16, ..SoaConfig::default() }).unwrap();
    assert!(check_regulations(&sc, &r.best.schedule).is_empty());
    assert!(r.best.schedule.audit(&index).is_empty());
    assert!(r.best.objective.w <= r.trace[0].best_w);
}
