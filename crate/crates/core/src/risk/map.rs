use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::kernels::{mean_relative_velocity, personnel_risk, swept_volume, vehicle_risk};
use super::{RiskError, RiskParams};
use crate::grid::{CellIndex, GridSpec};
use crate::math;
use crate::scene::UrbanScene;

/// Named altitude band `[floor, ceiling)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AltitudeBand {
    pub name: String,
    pub floor: f64,
    pub ceiling: f64,
}

/// `n` bands of equal height, each a whole number of layers, starting at
/// `span.0` and covering at least up to `span.1`.
pub fn default_bands(grid: &GridSpec, span: (f64, f64), n: usize) -> Vec<AltitudeBand> {
    let n = n.max(1);
    let layers = math::ceil((span.1 - span.0) / (n as f64 * grid.dz())).max(1.0);
    let width = layers * grid.dz();
    (0..n)
        .map(|b| AltitudeBand {
            name: format!("band{}", b + 1),
            floor: span.0 + b as f64 * width,
            ceiling: span.0 + (b + 1) as f64 * width,
        })
        .collect()
}

/// Per-cell breakdown of the weighted risk.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RiskComponents {
    pub personnel: f64,
    pub vehicle: f64,
    pub uav: f64,
    pub total: f64,
}

/// Risk evaluator with the grid-dependent constants precomputed.
#[derive(Debug, Clone)]
pub struct RiskModel {
    params: RiskParams,
    uav_component: f64,
}

impl RiskModel {
    pub fn new(params: &RiskParams, grid: &GridSpec, uav_density: f64) -> Result<Self, RiskError> {
        params.validate()?;
        let exposure = params.uav.exposure.resolve(grid);
        let uav_component = if uav_density == 0.0 {
            0.0
        } else {
            let v_rel = mean_relative_velocity(&params.uav)?;
            params.fall.failure_rate * uav_density * swept_volume(&params.uav, v_rel, exposure)
        };
        Ok(Self { params: params.clone(), uav_component })
    }

    pub fn params(&self) -> &RiskParams {
        &self.params
    }

    /// Weighted risk of one cell, using the height above the local roof as
    /// the fall height.
    pub fn cell(&self, scene: &UrbanScene, cell: &CellIndex) -> Result<RiskComponents, RiskError> {
        let p = &self.params;
        let roof = scene.building_height(cell.i, cell.j);
        let shielding = p.shielding.coefficient(roof);
        let personnel = personnel_risk(scene.drop_height(cell), scene.population_density(cell.i, cell.j), shielding, &p.fall)?;
        let vehicle = vehicle_risk(scene.road(cell.i, cell.j), p.vehicle_area, p.fall.failure_rate);
        let uav = self.uav_component;
        let w = p.weights;
        Ok(RiskComponents {
            personnel,
            vehicle,
            uav,
            total: w.personnel * personnel + w.vehicle * vehicle + w.uav * uav,
        })
    }
}

/// Weighted risk of a single cell.
pub fn aggregate_risk(scene: &UrbanScene, cell: &CellIndex, params: &RiskParams) -> Result<f64, RiskError> {
    Ok(RiskModel::new(params, scene.grid(), scene.uav_density())?.cell(scene, cell)?.total)
}

/// Continuous and binary risk over the whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskMap {
    grid: GridSpec,
    risk: Vec<f64>,
    blocked: Vec<bool>,
    unsafe_: Vec<bool>,
    threshold: f64,
    bands: Vec<AltitudeBand>,
    layer_of: Vec<Option<usize>>,
}

impl RiskMap {
    /// Assembles a map from flat layer-major arrays (see [`GridSpec::linear`]).
    /// `blocked` marks obstacle and no-fly cells.
    pub fn from_parts(grid: GridSpec, risk: Vec<f64>, blocked: Vec<bool>, threshold: f64) -> Result<Self, RiskError> {
        let n = grid.cell_count();
        if risk.len() != n {
            return Err(RiskError::ShapeMismatch { expected: n, got: risk.len() });
        }
        if blocked.len() != n {
            return Err(RiskError::ShapeMismatch { expected: n, got: blocked.len() });
        }
        if let Some(bad) = risk.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(RiskError::Domain { what: "cell risk", value: *bad });
        }
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(RiskError::Domain { what: "risk threshold", value: threshold });
        }
        let unsafe_ = binarize(&risk, &blocked, threshold);
        let (_, _, c) = grid.dims();
        Ok(Self { grid, risk, blocked, unsafe_, threshold, bands: Vec::new(), layer_of: alloc::vec![None; c as usize] })
    }

    /// Attaches altitude bands and labels every layer by the band holding its
    /// center altitude.
    pub fn with_bands(mut self, bands: Vec<AltitudeBand>) -> Self {
        let (_, _, c) = self.grid.dims();
        let last = bands.len().saturating_sub(1);
        self.layer_of = (1..=c)
            .map(|k| {
                let z = self.grid.layer_altitude(k);
                // the topmost band also owns its ceiling
                bands
                    .iter()
                    .enumerate()
                    .position(|(n, b)| z >= b.floor && (z < b.ceiling || (n == last && z <= b.ceiling)))
            })
            .collect();
        self.bands = bands;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn risk(&self, c: &CellIndex) -> f64 {
        self.risk[self.grid.linear(c)]
    }

    /// Risk in multiples of the safety threshold.
    pub fn relative_risk(&self, c: &CellIndex) -> f64 {
        self.risk(c) / self.threshold
    }

    pub fn is_unsafe(&self, c: &CellIndex) -> bool {
        self.unsafe_[self.grid.linear(c)]
    }

    /// Unsafe, treating cells outside the grid as unsafe.
    pub fn is_unsafe_or_outside(&self, c: Option<CellIndex>) -> bool {
        match c {
            Some(c) if self.grid.contains(&c) => self.is_unsafe(&c),
            _ => true,
        }
    }

    pub fn is_blocked(&self, c: &CellIndex) -> bool {
        self.blocked[self.grid.linear(c)]
    }

    pub fn risk_values(&self) -> &[f64] {
        &self.risk
    }

    pub fn unsafe_flags(&self) -> &[bool] {
        &self.unsafe_
    }

    pub fn blocked_flags(&self) -> &[bool] {
        &self.blocked
    }

    pub fn bands(&self) -> &[AltitudeBand] {
        &self.bands
    }

    /// Band index of layer `k`, if any band covers its center altitude.
    pub fn layer_band(&self, k: u32) -> Option<usize> {
        self.layer_of.get(k as usize - 1).copied().flatten()
    }

    pub fn unsafe_count(&self) -> usize {
        self.unsafe_.iter().filter(|u| **u).count()
    }

    pub fn unsafe_count_in_layer(&self, k: u32) -> usize {
        let (a, b, _) = self.grid.dims();
        let per = a as usize * b as usize;
        let start = (k as usize - 1) * per;
        self.unsafe_[start..start + per].iter().filter(|u| **u).count()
    }

    /// Binary flags recomputed from the stored risk values.
    pub fn rebinarize(&self) -> Vec<bool> {
        binarize(&self.risk, &self.blocked, self.threshold)
    }
}

fn binarize(risk: &[f64], blocked: &[bool], threshold: f64) -> Vec<bool> {
    risk.iter().zip(blocked).map(|(r, b)| *b || *r > threshold).collect()
}

/// Evaluates every cell of the scene.
pub fn build_risk_map(scene: &UrbanScene, params: &RiskParams) -> Result<RiskMap, RiskError> {
    let grid = *scene.grid();
    let model = RiskModel::new(params, &grid, scene.uav_density())?;
    let mut risk = Vec::with_capacity(grid.cell_count());
    let mut blocked = Vec::with_capacity(grid.cell_count());
    for c in grid.cells() {
        risk.push(model.cell(scene, &c)?.total);
        blocked.push(scene.is_obstacle(&c) || scene.is_no_fly(&c));
    }
    let bands = if params.bands.is_empty() { default_bands(&grid, params.band_span, 3) } else { params.bands.clone() };
    Ok(RiskMap::from_parts(grid, risk, blocked, params.threshold)?.with_bands(bands))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellBox;
    use crate::risk::{FallParams, RiskWeights};
    use crate::scene::{ColumnRange, RoadCell};
    use alloc::vec;

    fn grid() -> GridSpec {
        GridSpec::new(50.0, 50.0, 30.0, 250.0, 250.0, 600.0).unwrap()
    }

    #[test]
    fn empty_scene_only_flags_obstacles_and_no_fly() {
        let g = grid();
        let mut h = vec![0.0; g.column_count()];
        h[g.column(3, 3)] = 50.0;
        let scene = UrbanScene::from_heights(g, h)
            .unwrap()
            .with_no_fly(CellBox::single(CellIndex::new(1, 1, 10)))
            .unwrap();
        let map = build_risk_map(&scene, &RiskParams::default()).unwrap();
        assert!(map.risk_values().iter().all(|r| *r == 0.0));
        // 15 and 45 are below the 50 m roof
        assert_eq!(map.unsafe_count(), 3);
        assert!(map.is_unsafe(&CellIndex::new(3, 3, 2)));
        assert!(map.is_unsafe(&CellIndex::new(1, 1, 10)));
    }

    #[test]
    fn threshold_rule() {
        let g = GridSpec::from_counts(1.0, 1.0, 1.0, 2, 1, 1).unwrap();
        let map = RiskMap::from_parts(g, vec![2e-7, 1e-7], vec![false, false], 1e-7).unwrap();
        assert!(map.is_unsafe(&CellIndex::new(1, 1, 1)));
        // equal to the threshold is still safe
        assert!(!map.is_unsafe(&CellIndex::new(2, 1, 1)));
        assert!(RiskMap::from_parts(g, vec![-1.0, 0.0], vec![false, false], 1e-7).is_err());
        assert!(RiskMap::from_parts(g, vec![0.0], vec![false, false], 1e-7).is_err());
    }

    fn busy_scene() -> UrbanScene {
        let g = grid();
        let mut h = vec![0.0; g.column_count()];
        h[g.column(2, 2)] = 40.0;
        h[g.column(4, 4)] = 10.0;
        UrbanScene::from_heights(g, h)
            .unwrap()
            .with_population_density(2.5e-4)
            .unwrap()
            .with_population_zone(ColumnRange::new(5, 5, 1, 5), 1.5e-3)
            .unwrap()
            .with_road(ColumnRange::new(1, 1, 3, 5), RoadCell { traffic_density: 0.07, width: 3.5, length: 50.0 })
            .unwrap()
            .with_uav_density(3.48e-8)
            .unwrap()
    }

    #[test]
    fn risk_is_linear_in_failure_rate() {
        let scene = busy_scene();
        let p1 = RiskParams::default();
        let mut p2 = p1.clone();
        p2.fall.failure_rate *= 2.0;
        let m1 = build_risk_map(&scene, &p1).unwrap();
        let m2 = build_risk_map(&scene, &p2).unwrap();
        for (a, b) in m1.risk_values().iter().zip(m2.risk_values()) {
            assert!(*a >= 0.0);
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
        let zero = RiskParams { fall: FallParams { failure_rate: 0.0, ..p1.fall }, ..p1 };
        assert!(build_risk_map(&scene, &zero).unwrap().risk_values().iter().all(|r| *r == 0.0));
    }

    #[test]
    fn binarization_is_reproducible() {
        let map = build_risk_map(&busy_scene(), &RiskParams::default()).unwrap();
        assert_eq!(map.rebinarize(), map.unsafe_flags());
        let again = RiskMap::from_parts(*map.grid(), map.risk_values().to_vec(), map.blocked_flags().to_vec(), map.threshold()).unwrap();
        assert_eq!(again.unsafe_flags(), map.unsafe_flags());
    }

    #[test]
    fn personnel_projection_and_weighted_sum() {
        let scene = busy_scene();
        let only_people = RiskParams { weights: RiskWeights { personnel: 1.0, vehicle: 0.0, uav: 0.0 }, ..RiskParams::default() };
        let c = CellIndex::new(3, 3, 5);
        let r = aggregate_risk(&scene, &c, &only_people).unwrap();
        let expected = personnel_risk(scene.drop_height(&c), 2.5e-4, 0.5, &only_people.fall).unwrap();
        assert_eq!(r, expected);

        // road column: weighted sum recomputed from component formulas
        let params = RiskParams::default();
        let c = CellIndex::new(1, 4, 5);
        let z = 4.5 * 30.0;
        let area = core::f64::consts::PI * 36.0 / 4.0;
        let m = 620.0;
        let k = 0.3 * 1.225 * area;
        let v2 = 2.0 * m * 9.8 / k * (1.0 - libm::exp(-z * k / m));
        let e = 0.5 * m * v2;
        let pf = 1.0 / (1.0 + libm::sqrt(1e6 / 232.0) * libm::pow(232.0 / e, 0.5));
        let rp = 6.04e-5 * 2.5e-4 * area * pf;
        let rv = 6.04e-5 * (0.07 * 50.0) * (9.68 * 0.07 / 3.5);
        let vmid = 0.5 * (10.0 + 130.0 / 3.6);
        let vr = libm::sqrt(vmid * vmid + 36.0 - 2.0 * vmid * 6.0 * 0.5);
        let ru = 6.04e-5 * 3.48e-8 * 5.63 * 1.855 * (vr * 2.0 + 5.63);
        let want = 0.5 * rp + 0.3 * rv + 0.2 * ru;
        let got = aggregate_risk(&scene, &c, &params).unwrap();
        assert!((got - want).abs() / want < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn column_risk_rises_then_plateaus() {
        let g = GridSpec::new(50.0, 50.0, 30.0, 50.0, 50.0, 3000.0).unwrap();
        let scene = UrbanScene::flat(g).with_population_density(2.5e-4).unwrap();
        let map = build_risk_map(&scene, &RiskParams::default()).unwrap();
        let col: Vec<f64> = (1..=100).map(|k| map.risk(&CellIndex::new(1, 1, k))).collect();
        assert!(col.windows(2).all(|w| w[1] >= w[0]));
        let top = col[99];
        assert!((col[60] - top) / top < 1e-6, "plateau reached by ~1.8 km");
        assert!(col[0] < 0.8 * top);
    }

    #[test]
    fn default_bands_cover_span_in_whole_layers() {
        let g = grid();
        let bands = default_bands(&g, (30.0, 300.0), 3);
        assert_eq!(bands.len(), 3);
        assert_eq!(bands[0].floor, 30.0);
        assert_eq!(bands[0].ceiling, 120.0);
        assert_eq!(bands[2].ceiling, 300.0);
        let map = build_risk_map(&busy_scene(), &RiskParams::default()).unwrap();
        assert_eq!(map.layer_band(1), None); // 15 m
        assert_eq!(map.layer_band(2), Some(0)); // 45 m
        assert_eq!(map.layer_band(5), Some(1)); // 135 m
        assert_eq!(map.layer_band(10), Some(2)); // 285 m
        assert_eq!(map.layer_band(11), None); // 315 m
    }
}
