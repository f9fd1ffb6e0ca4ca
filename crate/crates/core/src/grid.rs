//! Uniform 3D cell grid over the airspace.
//!
//! Cells are addressed with 1-based `(i, j, k)` indices along `x`, `y` and
//! `z`. Cell `(i, j, k)` spans `[(i-1)dx, i*dx] x [(j-1)dy, j*dy] x [(k-1)dz, k*dz]`
//! and its reference point is the center.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Sub};

use crate::math;

/// Relative slack allowed when checking that an extent is a whole number of cells.
const DIVISIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("cell size and extent must be positive and finite (got {0})")]
    NonPositive(&'static str),
    #[error("extent {extent} is not a whole multiple of cell size {size} along {axis}")]
    NotDivisible {
        axis: char,
        extent: f64,
        size: f64,
    },
    #[error("cell {0} is outside the grid")]
    InvalidIndex(CellIndex),
    #[error("point ({x}, {y}, {z}) lies outside the grid extents")]
    OutOfBounds { x: f64, y: f64, z: f64 },
}

/// 1-based cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellIndex {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl CellIndex {
    pub const fn new(i: u32, j: u32, k: u32) -> Self {
        Self { i, j, k }
    }

    /// Chebyshev distance in cells.
    pub fn chebyshev(&self, other: &CellIndex) -> u32 {
        self.i
            .abs_diff(other.i)
            .max(self.j.abs_diff(other.j))
            .max(self.k.abs_diff(other.k))
    }

    /// Cell displaced by `(di, dj, dk)`, or `None` when an index would drop below 1.
    pub fn offset(&self, di: i64, dj: i64, dk: i64) -> Option<CellIndex> {
        let i = self.i as i64 + di;
        let j = self.j as i64 + dj;
        let k = self.k as i64 + dk;
        if i < 1 || j < 1 || k < 1 || i > u32::MAX as i64 || j > u32::MAX as i64 || k > u32::MAX as i64
        {
            return None;
        }
        Some(CellIndex::new(i as u32, j as u32, k as u32))
    }
}

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.i, self.j, self.k)
    }
}

/// A point in metres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        self.sub(*other).norm()
    }

    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn lerp(&self, other: &Point3, t: f64) -> Point3 {
        *self + (*other - *self) * t
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, rhs: Point3) -> Point3 {
        Point3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, rhs: Point3) -> Point3 {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, rhs: f64) -> Point3 {
        Point3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Grid discretization: cell sizes and cell counts per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dx: f64,
    dy: f64,
    dz: f64,
    a: u32,
    b: u32,
    c: u32,
}

fn whole_cells(axis: char, extent: f64, size: f64) -> Result<u32, GridError> {
    let ratio = extent / size;
    let rounded = math::round(ratio);
    if rounded < 1.0 || (ratio - rounded).abs() > DIVISIBILITY_TOL * rounded.max(1.0) || rounded > u32::MAX as f64 {
        return Err(GridError::NotDivisible { axis, extent, size });
    }
    Ok(rounded as u32)
}

impl GridSpec {
    /// Builds a grid from cell sizes and extents; every extent must hold a whole
    /// number of cells.
    pub fn new(dx: f64, dy: f64, dz: f64, x_max: f64, y_max: f64, z_max: f64) -> Result<Self, GridError> {
        for (name, v) in [("dx", dx), ("dy", dy), ("dz", dz), ("x_max", x_max), ("y_max", y_max), ("z_max", z_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GridError::NonPositive(name));
            }
        }
        Ok(Self {
            dx,
            dy,
            dz,
            a: whole_cells('x', x_max, dx)?,
            b: whole_cells('y', y_max, dy)?,
            c: whole_cells('z', z_max, dz)?,
        })
    }

    /// Builds a grid from cell sizes and cell counts.
    pub fn from_counts(dx: f64, dy: f64, dz: f64, a: u32, b: u32, c: u32) -> Result<Self, GridError> {
        for (name, v) in [("dx", dx), ("dy", dy), ("dz", dz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GridError::NonPositive(name));
            }
        }
        if a == 0 {
            return Err(GridError::NonPositive("a"));
        }
        if b == 0 {
            return Err(GridError::NonPositive("b"));
        }
        if c == 0 {
            return Err(GridError::NonPositive("c"));
        }
        Ok(Self { dx, dy, dz, a, b, c })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    pub fn dz(&self) -> f64 {
        self.dz
    }
    /// Cell counts `(a, b, c)` along x, y, z.
    pub fn dims(&self) -> (u32, u32, u32) {
        (self.a, self.b, self.c)
    }
    pub fn x_max(&self) -> f64 {
        self.a as f64 * self.dx
    }
    pub fn y_max(&self) -> f64 {
        self.b as f64 * self.dy
    }
    pub fn z_max(&self) -> f64 {
        self.c as f64 * self.dz
    }
    pub fn cell_size(&self) -> Point3 {
        Point3::new(self.dx, self.dy, self.dz)
    }

    pub fn cell_count(&self) -> usize {
        self.a as usize * self.b as usize * self.c as usize
    }

    pub fn column_count(&self) -> usize {
        self.a as usize * self.b as usize
    }

    pub fn contains(&self, idx: &CellIndex) -> bool {
        (1..=self.a).contains(&idx.i) && (1..=self.b).contains(&idx.j) && (1..=self.c).contains(&idx.k)
    }

    fn check(&self, idx: &CellIndex) -> Result<(), GridError> {
        if self.contains(idx) {
            Ok(())
        } else {
            Err(GridError::InvalidIndex(*idx))
        }
    }

    /// Flat layer-major offset: `((k-1)*a + (i-1))*b + (j-1)`.
    ///
    /// Each layer is an `a x b` row-major slab, rows along `i`.
    pub fn linear(&self, idx: &CellIndex) -> usize {
        debug_assert!(self.contains(idx));
        ((idx.k as usize - 1) * self.a as usize + (idx.i as usize - 1)) * self.b as usize + (idx.j as usize - 1)
    }

    /// Inverse of [`GridSpec::linear`].
    pub fn from_linear(&self, n: usize) -> CellIndex {
        let b = self.b as usize;
        let a = self.a as usize;
        let j = n % b;
        let i = (n / b) % a;
        let k = n / (a * b);
        CellIndex::new(i as u32 + 1, j as u32 + 1, k as u32 + 1)
    }

    /// Row-major offset of column `(i, j)`.
    pub fn column(&self, i: u32, j: u32) -> usize {
        (i as usize - 1) * self.b as usize + (j as usize - 1)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.cell_count()).map(move |n| self.from_linear(n))
    }

    /// Center of a cell: `((i - 1/2)dx, (j - 1/2)dy, (k - 1/2)dz)`.
    pub fn cell_center(&self, idx: &CellIndex) -> Result<Point3, GridError> {
        self.check(idx)?;
        Ok(self.center_unchecked(idx))
    }

    pub(crate) fn center_unchecked(&self, idx: &CellIndex) -> Point3 {
        Point3::new(
            (idx.i as f64 - 0.5) * self.dx,
            (idx.j as f64 - 0.5) * self.dy,
            (idx.k as f64 - 0.5) * self.dz,
        )
    }

    /// Altitude of the center of layer `k`.
    pub fn layer_altitude(&self, k: u32) -> f64 {
        (k as f64 - 0.5) * self.dz
    }

    /// Cell containing a point. Points on an interior cell face belong to the
    /// higher-index cell; points on the outer extent belong to the last cell.
    pub fn point_to_cell(&self, p: &Point3) -> Result<CellIndex, GridError> {
        let axis = |v: f64, size: f64, n: u32| -> Option<u32> {
            let max = n as f64 * size;
            if !(v.is_finite()) || v < 0.0 || v > max {
                return None;
            }
            let idx = math::floor(v / size) as i64 + 1;
            Some(idx.clamp(1, n as i64) as u32)
        };
        match (axis(p.x, self.dx, self.a), axis(p.y, self.dy, self.b), axis(p.z, self.dz, self.c)) {
            (Some(i), Some(j), Some(k)) => Ok(CellIndex::new(i, j, k)),
            _ => Err(GridError::OutOfBounds { x: p.x, y: p.y, z: p.z }),
        }
    }

    /// Layer containing altitude `z` (same tie rule as [`GridSpec::point_to_cell`]).
    pub fn layer_of_altitude(&self, z: f64) -> Option<u32> {
        if !(0.0..=self.z_max()).contains(&z) {
            return None;
        }
        Some(((math::floor(z / self.dz) as i64) + 1).clamp(1, self.c as i64) as u32)
    }

    /// In-bounds cells within Chebyshev distance 1, excluding `idx` (26-connectivity).
    pub fn neighbors(&self, idx: &CellIndex) -> Vec<CellIndex> {
        self.neighbors_iter(*idx).collect()
    }

    pub fn neighbors_iter(&self, idx: CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        STENCIL_26.iter().filter_map(move |&(di, dj, dk)| {
            let n = idx.offset(di, dj, dk)?;
            self.contains(&n).then_some(n)
        })
    }
}

/// Offsets of the 26-neighbourhood.
pub(crate) const STENCIL_26: [(i64, i64, i64); 26] = {
    let mut out = [(0i64, 0i64, 0i64); 26];
    let mut n = 0;
    let mut dk = -1;
    while dk <= 1 {
        let mut di = -1;
        while di <= 1 {
            let mut dj = -1;
            while dj <= 1 {
                if !(di == 0 && dj == 0 && dk == 0) {
                    out[n] = (di, dj, dk);
                    n += 1;
                }
                dj += 1;
            }
            di += 1;
        }
        dk += 1;
    }
    out
};

/// Inclusive axis-aligned block of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellBox {
    pub lo: CellIndex,
    pub hi: CellIndex,
}

impl CellBox {
    pub fn single(c: CellIndex) -> Self {
        Self { lo: c, hi: c }
    }

    /// Box spanning two corners given in any order.
    pub fn spanning(a: CellIndex, b: CellIndex) -> Self {
        Self {
            lo: CellIndex::new(a.i.min(b.i), a.j.min(b.j), a.k.min(b.k)),
            hi: CellIndex::new(a.i.max(b.i), a.j.max(b.j), a.k.max(b.k)),
        }
    }

    pub fn contains(&self, c: &CellIndex) -> bool {
        (self.lo.i..=self.hi.i).contains(&c.i)
            && (self.lo.j..=self.hi.j).contains(&c.j)
            && (self.lo.k..=self.hi.k).contains(&c.k)
    }

    pub fn expanded_to(&self, c: &CellIndex) -> Self {
        Self {
            lo: CellIndex::new(self.lo.i.min(c.i), self.lo.j.min(c.j), self.lo.k.min(c.k)),
            hi: CellIndex::new(self.hi.i.max(c.i), self.hi.j.max(c.j), self.hi.k.max(c.k)),
        }
    }

    pub fn len(&self) -> usize {
        (self.hi.i - self.lo.i + 1) as usize * (self.hi.j - self.lo.j + 1) as usize * (self.hi.k - self.lo.k + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        let (lo, hi) = (self.lo, self.hi);
        (lo.k..=hi.k).flat_map(move |k| (lo.i..=hi.i).flat_map(move |i| (lo.j..=hi.j).map(move |j| CellIndex::new(i, j, k))))
    }

    /// Lower and upper corners of the box in metres.
    pub fn bounds(&self, grid: &GridSpec) -> (Point3, Point3) {
        (
            Point3::new(
                (self.lo.i - 1) as f64 * grid.dx(),
                (self.lo.j - 1) as f64 * grid.dy(),
                (self.lo.k - 1) as f64 * grid.dz(),
            ),
            Point3::new(self.hi.i as f64 * grid.dx(), self.hi.j as f64 * grid.dy(), self.hi.k as f64 * grid.dz()),
        )
    }

    pub fn center(&self, grid: &GridSpec) -> Point3 {
        let (lo, hi) = self.bounds(grid);
        (lo + hi) * 0.5
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> GridSpec {
        GridSpec::from_counts(1.0, 1.0, 1.0, 10, 10, 10).unwrap()
    }

    #[test]
    fn center_examples() {
        let g = unit();
        assert_eq!(g.cell_center(&CellIndex::new(2, 3, 4)).unwrap(), Point3::new(1.5, 2.5, 3.5));
        let g50 = GridSpec::new(50.0, 50.0, 50.0, 500.0, 500.0, 500.0).unwrap();
        assert_eq!(g50.cell_center(&CellIndex::new(1, 1, 1)).unwrap(), Point3::new(25.0, 25.0, 25.0));
        let g = GridSpec::new(50.0, 40.0, 30.0, 500.0, 400.0, 300.0).unwrap();
        let (a, b, c) = g.dims();
        assert_eq!(
            g.cell_center(&CellIndex::new(a, b, c)).unwrap(),
            Point3::new(500.0 - 25.0, 400.0 - 20.0, 300.0 - 15.0)
        );
    }

    #[test]
    fn center_rejects_bad_index() {
        let g = unit();
        assert!(matches!(g.cell_center(&CellIndex::new(0, 1, 1)), Err(GridError::InvalidIndex(_))));
        assert!(matches!(g.cell_center(&CellIndex::new(1, 11, 1)), Err(GridError::InvalidIndex(_))));
    }

    #[test]
    fn rejects_non_divisible_extent() {
        assert!(matches!(
            GridSpec::new(30.0, 50.0, 50.0, 100.0, 500.0, 500.0),
            Err(GridError::NotDivisible { axis: 'x', .. })
        ));
        assert!(GridSpec::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(GridSpec::new(1.0, 1.0, 1.0, -1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn point_to_cell_examples() {
        let g = GridSpec::new(50.0, 50.0, 50.0, 500.0, 500.0, 500.0).unwrap();
        assert_eq!(g.point_to_cell(&Point3::new(25.0, 25.0, 25.0)).unwrap(), CellIndex::new(1, 1, 1));
        let g = GridSpec::new(50.0, 50.0, 30.0, 500.0, 500.0, 300.0).unwrap();
        assert_eq!(g.point_to_cell(&Point3::new(50.0, 50.0, 30.0)).unwrap(), CellIndex::new(2, 2, 2));
        // outer extent stays in the last cell
        assert_eq!(g.point_to_cell(&Point3::new(500.0, 0.0, 300.0)).unwrap(), CellIndex::new(10, 1, 10));
        assert!(matches!(
            g.point_to_cell(&Point3::new(500.1, 0.0, 0.0)),
            Err(GridError::OutOfBounds { .. })
        ));
        assert!(g.point_to_cell(&Point3::new(-0.1, 0.0, 0.0)).is_err());
    }

    #[test]
    fn neighbor_counts() {
        let g = unit();
        assert_eq!(g.neighbors(&CellIndex::new(5, 5, 5)).len(), 26);
        assert_eq!(g.neighbors(&CellIndex::new(1, 1, 1)).len(), 7);
        // face-center on the i = 1 face: 3x3x3 stencil minus the 9 cells at i = 0, minus self
        assert_eq!(g.neighbors(&CellIndex::new(1, 5, 5)).len(), 17);
        // edge
        assert_eq!(g.neighbors(&CellIndex::new(1, 1, 5)).len(), 11);
    }

    #[test]
    fn linear_round_trip() {
        let g = GridSpec::from_counts(1.0, 2.0, 3.0, 4, 5, 6).unwrap();
        for (n, c) in g.cells().enumerate() {
            assert_eq!(g.linear(&c), n);
        }
    }

    #[test]
    fn random_points_land_within_half_cell() {
        use rand::{Rng, SeedableRng};
        let g = GridSpec::new(50.0, 40.0, 30.0, 1000.0, 800.0, 300.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p = Point3::new(rng.gen_range(0.0..=1000.0), rng.gen_range(0.0..=800.0), rng.gen_range(0.0..=300.0));
            let c = g.point_to_cell(&p).unwrap();
            let ctr = g.cell_center(&c).unwrap();
            assert!((ctr.x - p.x).abs() <= 25.0 + 1e-9);
            assert!((ctr.y - p.y).abs() <= 20.0 + 1e-9);
            assert!((ctr.z - p.z).abs() <= 15.0 + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn center_and_point_are_inverse(i in 1u32..=12, j in 1u32..=9, k in 1u32..=7) {
            let g = GridSpec::from_counts(50.0, 40.0, 30.0, 12, 9, 7).unwrap();
            let c = CellIndex::new(i, j, k);
            prop_assert_eq!(g.point_to_cell(&g.cell_center(&c).unwrap()).unwrap(), c);
        }

        #[test]
        fn neighbors_are_symmetric(i in 1u32..=5, j in 1u32..=5, k in 1u32..=4) {
            let g = GridSpec::from_counts(1.0, 1.0, 1.0, 5, 5, 4).unwrap();
            let c = CellIndex::new(i, j, k);
            for n in g.neighbors(&c) {
                prop_assert!(g.neighbors(&n).contains(&c));
                prop_assert_eq!(n.chebyshev(&c), 1);
            }
        }
    }
}
