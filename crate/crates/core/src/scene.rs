//! Urban scene: building heights, ground and air densities, no-fly volumes.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{CellBox, CellIndex, GridError, GridSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("height raster has {got} values, grid needs {expected} ({a} x {b})")]
    DimensionMismatch { expected: usize, got: usize, a: u32, b: u32 },
    #[error("building height at column ({i}, {j}) is {value}; heights must be finite and >= 0")]
    BadHeight { i: u32, j: u32, value: f64 },
    #[error("{what} must be finite and >= 0 (got {value})")]
    NegativeDensity { what: &'static str, value: f64 },
    #[error("road width must be > 0 (got {0})")]
    BadRoadWidth(f64),
    #[error("road length per cell must be > 0 (got {0})")]
    BadRoadLength(f64),
    #[error("column range i={i_lo}..={i_hi}, j={j_lo}..={j_hi} is empty or outside the grid")]
    BadColumnRange { i_lo: u32, i_hi: u32, j_lo: u32, j_hi: u32 },
    #[error("no-fly box {lo}..{hi} is empty or outside the grid")]
    BadNoFly { lo: CellIndex, hi: CellIndex },
    #[error("coarsening factor ({fx}, {fy}, {fz}) does not divide grid dims ({a}, {b}, {c})")]
    BadCoarsening { fx: u32, fy: u32, fz: u32, a: u32, b: u32, c: u32 },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Inclusive block of ground columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ColumnRange {
    pub i: (u32, u32),
    pub j: (u32, u32),
}

impl ColumnRange {
    pub fn new(i_lo: u32, i_hi: u32, j_lo: u32, j_hi: u32) -> Self {
        Self { i: (i_lo, i_hi), j: (j_lo, j_hi) }
    }

    fn validate(&self, grid: &GridSpec) -> Result<(), SceneError> {
        let (a, b, _) = grid.dims();
        let ok = self.i.0 >= 1 && self.i.0 <= self.i.1 && self.i.1 <= a && self.j.0 >= 1 && self.j.0 <= self.j.1 && self.j.1 <= b;
        if ok {
            Ok(())
        } else {
            Err(SceneError::BadColumnRange { i_lo: self.i.0, i_hi: self.i.1, j_lo: self.j.0, j_hi: self.j.1 })
        }
    }

    fn columns(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (self.i.0..=self.i.1).flat_map(move |i| (self.j.0..=self.j.1).map(move |j| (i, j)))
    }
}

/// Road data attached to a ground column.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoadCell {
    /// Vehicles per metre of road.
    pub traffic_density: f64,
    /// Road width (m).
    pub width: f64,
    /// Road length inside the column (m).
    pub length: f64,
}

impl RoadCell {
    fn validate(&self) -> Result<(), SceneError> {
        if !(self.traffic_density.is_finite() && self.traffic_density >= 0.0) {
            return Err(SceneError::NegativeDensity { what: "traffic density", value: self.traffic_density });
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(SceneError::BadRoadWidth(self.width));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(SceneError::BadRoadLength(self.length));
        }
        Ok(())
    }
}

fn check_density(what: &'static str, value: f64) -> Result<(), SceneError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(SceneError::NegativeDensity { what, value })
    }
}

/// Per-cell environment of the urban volume. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct UrbanScene {
    grid: GridSpec,
    building_height: Vec<f64>,
    population_density: Vec<f64>,
    roads: Vec<Option<RoadCell>>,
    uav_density: f64,
    no_fly: Vec<bool>,
}

impl UrbanScene {
    /// Scene with the given column heights (row-major, `a` rows of `b` values)
    /// and zero densities.
    pub fn from_heights(grid: GridSpec, heights: Vec<f64>) -> Result<Self, SceneError> {
        let (a, b, _) = grid.dims();
        if heights.len() != grid.column_count() {
            return Err(SceneError::DimensionMismatch { expected: grid.column_count(), got: heights.len(), a, b });
        }
        for (n, &h) in heights.iter().enumerate() {
            if !(h.is_finite() && h >= 0.0) {
                return Err(SceneError::BadHeight { i: (n / b as usize) as u32 + 1, j: (n % b as usize) as u32 + 1, value: h });
            }
        }
        Ok(Self {
            grid,
            population_density: vec![0.0; heights.len()],
            roads: vec![None; heights.len()],
            building_height: heights,
            uav_density: 0.0,
            no_fly: vec![false; grid.cell_count()],
        })
    }

    /// Open ground: no buildings, no densities.
    pub fn flat(grid: GridSpec) -> Self {
        Self::from_heights(grid, vec![0.0; grid.column_count()]).expect("flat raster matches grid")
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Sets the same population density (persons/m²) on every column.
    pub fn with_population_density(mut self, rho: f64) -> Result<Self, SceneError> {
        check_density("population density", rho)?;
        self.population_density.iter_mut().for_each(|p| *p = rho);
        Ok(self)
    }

    /// Overrides the population density on a block of columns.
    pub fn with_population_zone(mut self, range: ColumnRange, rho: f64) -> Result<Self, SceneError> {
        check_density("population density", rho)?;
        range.validate(&self.grid)?;
        for (i, j) in range.columns() {
            let n = self.grid.column(i, j);
            self.population_density[n] = rho;
        }
        Ok(self)
    }

    pub fn with_road(mut self, range: ColumnRange, road: RoadCell) -> Result<Self, SceneError> {
        road.validate()?;
        range.validate(&self.grid)?;
        for (i, j) in range.columns() {
            let n = self.grid.column(i, j);
            self.roads[n] = Some(road);
        }
        Ok(self)
    }

    /// Small-UAV density (UAVs/m³), uniform over the volume.
    pub fn with_uav_density(mut self, rho: f64) -> Result<Self, SceneError> {
        check_density("UAV density", rho)?;
        self.uav_density = rho;
        Ok(self)
    }

    pub fn with_no_fly(mut self, zone: CellBox) -> Result<Self, SceneError> {
        let g = self.grid;
        if !(g.contains(&zone.lo) && g.contains(&zone.hi) && zone.lo.i <= zone.hi.i && zone.lo.j <= zone.hi.j && zone.lo.k <= zone.hi.k) {
            return Err(SceneError::BadNoFly { lo: zone.lo, hi: zone.hi });
        }
        for c in zone.cells() {
            self.no_fly[g.linear(&c)] = true;
        }
        Ok(self)
    }

    pub fn building_height(&self, i: u32, j: u32) -> f64 {
        self.building_height[self.grid.column(i, j)]
    }

    pub fn building_heights(&self) -> &[f64] {
        &self.building_height
    }

    pub fn population_density(&self, i: u32, j: u32) -> f64 {
        self.population_density[self.grid.column(i, j)]
    }

    pub fn road(&self, i: u32, j: u32) -> Option<&RoadCell> {
        self.roads[self.grid.column(i, j)].as_ref()
    }

    pub fn uav_density(&self) -> f64 {
        self.uav_density
    }

    pub fn is_no_fly(&self, c: &CellIndex) -> bool {
        self.no_fly[self.grid.linear(c)]
    }

    /// A cell is an obstacle when its center altitude is at or below the
    /// building height of its column.
    pub fn is_obstacle(&self, c: &CellIndex) -> bool {
        self.grid.layer_altitude(c.k) <= self.building_height(c.i, c.j)
    }

    pub fn obstacle_count(&self) -> usize {
        self.grid.cells().filter(|c| self.is_obstacle(c)).count()
    }

    /// Fall height from a cell center to the roof below it (0 inside a building).
    pub fn drop_height(&self, c: &CellIndex) -> f64 {
        (self.grid.layer_altitude(c.k) - self.building_height(c.i, c.j)).max(0.0)
    }

    /// Merges blocks of `fx x fy x fz` cells into single cells.
    ///
    /// Aggregation is conservative: heights and densities take the block
    /// maximum, a coarse column is a road if any fine column is, and a coarse
    /// cell is no-fly if any fine cell is.
    pub fn coarsen(&self, fx: u32, fy: u32, fz: u32) -> Result<UrbanScene, SceneError> {
        let (a, b, c) = self.grid.dims();
        if fx == 0 || fy == 0 || fz == 0 || a % fx != 0 || b % fy != 0 || c % fz != 0 {
            return Err(SceneError::BadCoarsening { fx, fy, fz, a, b, c });
        }
        let g = GridSpec::from_counts(
            self.grid.dx() * fx as f64,
            self.grid.dy() * fy as f64,
            self.grid.dz() * fz as f64,
            a / fx,
            b / fy,
            c / fz,
        )?;
        let (ca, cb, cc) = g.dims();
        let mut heights = vec![0.0f64; g.column_count()];
        let mut pop = vec![0.0f64; g.column_count()];
        let mut roads: Vec<Option<RoadCell>> = vec![None; g.column_count()];
        for ci in 1..=ca {
            for cj in 1..=cb {
                let n = g.column(ci, cj);
                for i in (ci - 1) * fx + 1..=ci * fx {
                    for j in (cj - 1) * fy + 1..=cj * fy {
                        heights[n] = heights[n].max(self.building_height(i, j));
                        pop[n] = pop[n].max(self.population_density(i, j));
                        if let Some(r) = self.road(i, j) {
                            let merged = match roads[n] {
                                None => RoadCell { length: r.length * fx.max(fy) as f64, ..*r },
                                Some(prev) => RoadCell {
                                    traffic_density: prev.traffic_density.max(r.traffic_density),
                                    width: prev.width.max(r.width),
                                    length: prev.length.max(r.length * fx.max(fy) as f64),
                                },
                            };
                            roads[n] = Some(merged);
                        }
                    }
                }
            }
        }
        let mut no_fly = vec![false; g.cell_count()];
        for cell in self.grid.cells() {
            if self.is_no_fly(&cell) {
                let coarse = CellIndex::new((cell.i - 1) / fx + 1, (cell.j - 1) / fy + 1, (cell.k - 1) / fz + 1);
                no_fly[g.linear(&coarse)] = true;
            }
        }
        debug_assert_eq!(no_fly.len(), (ca * cb * cc) as usize);
        Ok(UrbanScene { grid: g, building_height: heights, population_density: pop, roads, uav_density: self.uav_density, no_fly })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> GridSpec {
        GridSpec::new(50.0, 50.0, 30.0, 250.0, 250.0, 300.0).unwrap()
    }

    #[test]
    fn flat_scene_has_no_obstacles() {
        assert_eq!(UrbanScene::flat(grid()).obstacle_count(), 0);
    }

    #[test]
    fn single_tower_marks_cells_below_roof() {
        let g = grid();
        let mut h = vec![0.0; g.column_count()];
        h[g.column(2, 3)] = 100.0;
        let s = UrbanScene::from_heights(g, h).unwrap();
        // centers 15, 45, 75 <= 100; 105 > 100
        for k in 1..=3 {
            assert!(s.is_obstacle(&CellIndex::new(2, 3, k)));
        }
        assert!(!s.is_obstacle(&CellIndex::new(2, 3, 4)));
        assert_eq!(s.obstacle_count(), 3);
    }

    #[test]
    fn mismatched_raster_is_rejected() {
        let err = UrbanScene::from_heights(grid(), vec![0.0; 24]).unwrap_err();
        assert!(matches!(err, SceneError::DimensionMismatch { expected: 25, got: 24, .. }));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let g = grid();
        let mut h = vec![0.0; g.column_count()];
        h[7] = -1.0;
        assert!(matches!(UrbanScene::from_heights(g, h), Err(SceneError::BadHeight { i: 2, j: 3, .. })));
        let s = UrbanScene::flat(g);
        assert!(s.clone().with_population_density(-1.0).is_err());
        let road = RoadCell { traffic_density: 0.07, width: 0.0, length: 50.0 };
        assert!(matches!(s.clone().with_road(ColumnRange::new(1, 1, 1, 5), road), Err(SceneError::BadRoadWidth(_))));
        assert!(s.clone().with_population_zone(ColumnRange::new(1, 6, 1, 1), 1.0).is_err());
        assert!(s.with_no_fly(CellBox::spanning(CellIndex::new(1, 1, 1), CellIndex::new(1, 1, 11))).is_err());
    }

    #[test]
    fn coarsening_takes_block_maximum() {
        let g = GridSpec::from_counts(25.0, 25.0, 15.0, 4, 4, 4).unwrap();
        let mut h = vec![0.0; 16];
        h[g.column(1, 2)] = 40.0;
        let s = UrbanScene::from_heights(g, h)
            .unwrap()
            .with_population_zone(ColumnRange::new(4, 4, 4, 4), 1e-3)
            .unwrap()
            .with_no_fly(CellBox::single(CellIndex::new(3, 3, 3)))
            .unwrap();
        let c = s.coarsen(2, 2, 2).unwrap();
        assert_eq!(c.grid().dims(), (2, 2, 2));
        assert_eq!(c.building_height(1, 1), 40.0);
        assert_eq!(c.population_density(2, 2), 1e-3);
        assert_eq!(c.population_density(1, 1), 0.0);
        assert!(c.is_no_fly(&CellIndex::new(2, 2, 2)));
        assert!(s.coarsen(3, 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn raising_a_building_never_clears_obstacles(col in 0usize..25, h0 in 0.0f64..300.0, dh in 0.0f64..200.0) {
            let g = grid();
            let mut h = vec![0.0; g.column_count()];
            h[col] = h0;
            let low = UrbanScene::from_heights(g, h.clone()).unwrap();
            h[col] = h0 + dh;
            let high = UrbanScene::from_heights(g, h).unwrap();
            for c in g.cells() {
                if low.is_obstacle(&c) {
                    prop_assert!(high.is_obstacle(&c));
                }
            }
        }
    }
}
