//! Scene raster and JSON inputs.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use uam_core::grid::GridSpec;
use uam_core::scene::UrbanScene;

use crate::error::{Result, ToolError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RasterError {
    #[error("empty raster: expected header `a b dx dy`")]
    MissingHeader,
    #[error("line {line}: header needs 4 fields `a b dx dy`, got {got}")]
    HeaderFields { line: usize, got: usize },
    #[error("line {line}: header field {field} `{text}` is not a valid {what}")]
    HeaderValue { line: usize, field: usize, text: String, what: &'static str },
    #[error("line {line} (row {row}), column {column}: `{text}` is not a number")]
    BadNumber { line: usize, row: usize, column: usize, text: String },
    #[error("line {line} (row {row}): expected {expected} columns, got {got}")]
    RowLength { line: usize, row: usize, expected: usize, got: usize },
    #[error("expected {expected} rows, got {got}")]
    RowCount { expected: usize, got: usize },
}

/// Column heights with their horizontal cell size.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub a: u32,
    pub b: u32,
    pub dx: f64,
    pub dy: f64,
    /// Row-major, `a` rows of `b` values.
    pub heights: Vec<f64>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses `a b dx dy` followed by `a` lines of `b` heights. Blank lines and
/// `#` comments are ignored.
pub fn parse_raster(text: &str) -> std::result::Result<Raster, RasterError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(RasterError::MissingHeader)?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(RasterError::HeaderFields { line: hline, got: fields.len() });
    }
    let count = |f: usize| {
        fields[f].parse::<u32>().ok().filter(|v| *v > 0).ok_or_else(|| RasterError::HeaderValue {
            line: hline,
            field: f + 1,
            text: fields[f].into(),
            what: "positive integer",
        })
    };
    let size = |f: usize| {
        fields[f].parse::<f64>().ok().filter(|v| v.is_finite() && *v > 0.0).ok_or_else(|| RasterError::HeaderValue {
            line: hline,
            field: f + 1,
            text: fields[f].into(),
            what: "positive cell size",
        })
    };
    let (a, b, dx, dy) = (count(0)?, count(1)?, size(2)?, size(3)?);
    let mut heights = Vec::with_capacity(a as usize * b as usize);
    let mut rows = 0usize;
    for (line, l) in lines {
        rows += 1;
        if rows > a as usize {
            continue;
        }
        let mut got = 0;
        for (c, tok) in l.split_whitespace().enumerate() {
            got += 1;
            let v = tok.parse::<f64>().map_err(|_| RasterError::BadNumber { line, row: rows, column: c + 1, text: tok.into() })?;
            heights.push(v);
        }
        if got != b as usize {
            return Err(RasterError::RowLength { line, row: rows, expected: b as usize, got });
        }
    }
    if rows != a as usize {
        return Err(RasterError::RowCount { expected: a as usize, got: rows });
    }
    Ok(Raster { a, b, dx, dy, heights })
}

pub fn write_raster(r: &Raster) -> String {
    let mut s = format!("{} {} {} {}\n", r.a, r.b, r.dx, r.dy);
    for row in r.heights.chunks(r.b as usize) {
        let line: Vec<String> = row.iter().map(|h| h.to_string()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// Block of ground columns with its own population density (inclusive, 1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationZone {
    pub i: (u32, u32),
    pub j: (u32, u32),
    pub density: f64,
}

/// Road columns sharing one traffic density, width and per-cell length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadSegment {
    pub i: (u32, u32),
    pub j: (u32, u32),
    pub traffic_density: f64,
    pub width: f64,
    pub length: f64,
}

/// Inclusive cell box `lo..=hi` as `(i, j, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoFlyBox {
    pub lo: (u32, u32, u32),
    pub hi: (u32, u32, u32),
}

/// Vertical discretization and densities to go with a height raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub dz: f64,
    pub z_max: f64,
    #[serde(default)]
    pub population_density: f64,
    #[serde(default)]
    pub population_zones: Vec<PopulationZone>,
    #[serde(default)]
    pub roads: Vec<RoadSegment>,
    #[serde(default)]
    pub uav_density: f64,
    #[serde(default)]
    pub no_fly: Vec<NoFlyBox>,
}

impl SceneConfig {
    pub fn grid(&self, raster: &Raster) -> Result<GridSpec> {
        let c = self.z_max / self.dz;
        if !(c.is_finite() && c >= 1.0 && c.fract() == 0.0) {
            return Err(ToolError::validation(format!("z_max {} is not a whole number of dz = {} layers", self.z_max, self.dz)));
        }
        Ok(GridSpec::from_counts(raster.dx, raster.dy, self.dz, raster.a, raster.b, c as u32)?)
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| ToolError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| ToolError::Json { path: path.to_path_buf(), source })
}

pub fn read_raster(path: &Path) -> Result<Raster> {
    parse_raster(&read_text(path)?).map_err(|source| ToolError::Raster { path: path.to_path_buf(), source })
}

pub fn build_scene(raster: &Raster, config: &SceneConfig) -> Result<UrbanScene> {
    let grid = config.grid(raster)?;
    Ok(config.apply(UrbanScene::from_heights(grid, raster.heights.clone())?)?)
}

/// Reads a height raster and its scene config.
pub fn load_scene(raster_path: &Path, config: &SceneConfig) -> Result<UrbanScene> {
    build_scene(&read_raster(raster_path)?, config)
}
