//! Bundled fixtures: a synthetic city district and the five-vertiport fleet.

use uam_core::fleet::{generate_scenario, FleetError, FleetScenario, ScenarioConfig};
use uam_core::grid::{CellBox, CellIndex, GridSpec};
use uam_core::planner::TrackQuery;
use uam_core::scene::{ColumnRange, RoadCell, SceneError, UrbanScene};

use crate::io::{NoFlyBox, PopulationZone, RoadSegment, SceneConfig};

pub const CELL: f64 = 20.0;
pub const COLUMNS: u32 = 60;
pub const LAYERS: u32 = 16;

/// Block pitch in columns; the last two columns of each block are street.
const PITCH: u32 = 8;
const LOT: u32 = 6;

fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Towers as (block row, block column, roof, half width in lots round the
/// lot center).
const TOWERS: [(u32, u32, f64, u32); 5] =
    [(2, 3, 250.0, 1), (4, 2, 190.0, 1), (1, 5, 130.0, 2), (5, 4, 190.0, 1), (3, 6, 250.0, 1)];

/// Roof height of a lot: low-rise everywhere except the listed towers.
fn lot_height(bi: u32, bj: u32, li: u32, lj: u32) -> f64 {
    for &(ti, tj, roof, half) in &TOWERS {
        let core = |l: u32| l + half >= 3 && l < 3 + half;
        if (ti, tj) == (bi, bj) && core(li) && core(lj) {
            return roof;
        }
    }
    let h = mix(((bi as u64) << 32) ^ bj as u64 ^ 0x5eed);
    [0.0, 5.0, 8.0, 10.0, 12.0, 15.0, 15.0, 10.0][(h % 8) as usize]
}

/// Row-major building heights of the demo district.
pub fn heights() -> Vec<f64> {
    let mut h = Vec::with_capacity((COLUMNS * COLUMNS) as usize);
    for i in 0..COLUMNS {
        for j in 0..COLUMNS {
            let (li, lj) = (i % PITCH, j % PITCH);
            let street = li >= LOT || lj >= LOT;
            // keep a low margin round the edge of the district
            let edge = i < 2 || j < 2 || i >= COLUMNS - 2 || j >= COLUMNS - 2;
            // open plazas round the two vertiports
            let plaza = (i < 10 && j < 10) || (i >= 50 && j >= 50);
            h.push(if street || edge || plaza { 0.0 } else { lot_height(i / PITCH, j / PITCH, li, lj) });
        }
    }
    h
}

pub fn grid() -> GridSpec {
    GridSpec::from_counts(CELL, CELL, CELL, COLUMNS, COLUMNS, LAYERS).expect("demo grid")
}

pub fn scene_config() -> SceneConfig {
    SceneConfig {
        dz: CELL,
        z_max: CELL * LAYERS as f64,
        population_density: 2.5e-4,
        population_zones: vec![
            PopulationZone { i: (16, 44), j: (16, 44), density: 3.0e-4 },
            PopulationZone { i: (3, 57), j: (3, 10), density: 0.8e-4 },
            PopulationZone { i: (50, 57), j: (3, 57), density: 0.8e-4 },
        ],
        roads: vec![
            RoadSegment { i: (30, 31), j: (3, 14), traffic_density: 0.006, width: 15.0, length: CELL },
            RoadSegment { i: (40, 56), j: (46, 47), traffic_density: 0.006, width: 15.0, length: CELL },
        ],
        uav_density: 1.0e-9,
        no_fly: vec![NoFlyBox { lo: (26, 26, 1), hi: (32, 32, LAYERS) }],
    }
}

pub fn scene() -> Result<UrbanScene, SceneError> {
    scene_config().apply(UrbanScene::from_heights(grid(), heights())?)
}

/// The bundled origin-destination pair at 110 m.
pub fn query() -> TrackQuery {
    TrackQuery::new(CellIndex::new(4, 5, 6), CellIndex::new(57, 55, 6))
}

pub fn fleet(seed: u64) -> Result<FleetScenario, FleetError> {
    generate_scenario(&ScenarioConfig { seed, ..ScenarioConfig::default() })
}

impl SceneConfig {
    /// Applies densities, roads and no-fly boxes to a scene.
    pub fn apply(&self, mut scene: UrbanScene) -> Result<UrbanScene, SceneError> {
        scene = scene.with_population_density(self.population_density)?;
        for z in &self.population_zones {
            scene = scene.with_population_zone(ColumnRange::new(z.i.0, z.i.1, z.j.0, z.j.1), z.density)?;
        }
        for r in &self.roads {
            let road = RoadCell { traffic_density: r.traffic_density, width: r.width, length: r.length };
            scene = scene.with_road(ColumnRange::new(r.i.0, r.i.1, r.j.0, r.j.1), road)?;
        }
        scene = scene.with_uav_density(self.uav_density)?;
        for b in &self.no_fly {
            let lo = CellIndex::new(b.lo.0, b.lo.1, b.lo.2);
            let hi = CellIndex::new(b.hi.0, b.hi.1, b.hi.2);
            scene = scene.with_no_fly(CellBox::spanning(lo, hi))?;
        }
        Ok(scene)
    }
}
