//! CSV tables with fixed column sets, risk-map JSON and track export.

use std::fs;
use std::path::Path;

use serde::Serialize;
use uam_core::planner::Track;
use uam_core::risk::RiskMap;

use crate::error::{Result, ToolError};

/// Named column set of an emitted CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub columns: &'static [&'static str],
}

pub const TRACK: Schema = Schema { name: "track", columns: &["stage", "n", "x", "y", "z", "T_n"] };

pub const SUMMARY_LABELS: [&str; 4] = ["Operational risk", "Transportation cost", "Number of waypoints", "Computational time (s)"];

pub const SUMMARY: Schema = Schema {
    name: "summary",
    columns: &["query", "track", "status", "Operational risk", "Transportation cost", "Number of waypoints", "Computational time (s)"],
};

pub const LAYER: Schema = Schema { name: "layer", columns: &["i", "j", "x", "y", "risk", "relative_risk", "unsafe"] };

pub const LAYERS: Schema = Schema { name: "layers", columns: &["altitude", "k", "unsafe_cells", "mean_relative_risk"] };

pub const SCHEDULE: Schema = Schema {
    name: "schedule",
    columns: &["flight", "aircraft", "number", "route", "delay_before", "delay_soa", "delay_ga", "rate_of_change"],
};

pub const CONVERGENCE: Schema = Schema { name: "convergence", columns: &["generation", "best_w", "t_d", "s"] };

pub const REPORT: Schema = Schema {
    name: "report",
    columns: &["seed", "plan", "operated", "cancelled", "delayed", "total_delay", "average_delay", "w"],
};

pub const ALTITUDE_SWEEP: Schema =
    Schema { name: "altitude sweep", columns: &["altitude", "status", "k", "unsafe_cells", "mean_relative_risk"] };

pub const CELL_SWEEP: Schema = Schema {
    name: "cell size sweep",
    columns: &["cell_size", "status", "risk_cost", "transport_cost", "waypoints", "length"],
};

pub const FLEET_SWEEP: Schema = Schema {
    name: "fleet sweep",
    columns: &["axis", "value", "status", "seeds", "base_average_delay", "soa_average_delay", "soa_operated"],
};

pub const PARETO: Schema = Schema {
    name: "pareto",
    columns: &["w_risk", "w_transport", "status", "risk_cost", "transport_cost", "waypoints", "non_dominated"],
};

/// Rows checked against a schema as they are added.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: Schema) -> Self {
        Self { schema, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.schema.columns.len() {
            return Err(ToolError::Internal(format!(
                "{} row has {} fields, schema has {}",
                self.schema.name,
                row.len(),
                self.schema.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let internal = |e: csv::Error| ToolError::Internal(e.to_string());
        w.write_record(self.schema.columns).map_err(internal)?;
        for r in &self.rows {
            w.write_record(r).map_err(internal)?;
        }
        w.into_inner().map_err(|e| ToolError::Internal(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_bytes(path, &self.to_csv()?)
    }
}

/// Reads a CSV and checks its header against the schema.
pub fn read_table(path: &Path, schema: Schema) -> Result<Vec<Vec<String>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| ToolError::validation(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| ToolError::validation(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    if header != schema.columns {
        return Err(ToolError::validation(format!("{}: columns {header:?} do not match the {} schema", path.display(), schema.name)));
    }
    r.records()
        .map(|rec| {
            rec.map(|rec| rec.iter().map(String::from).collect())
                .map_err(|e| ToolError::validation(format!("{}: {e}", path.display())))
        })
        .collect()
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| ToolError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| ToolError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ToolError::Internal(e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Plain number formatting shared by every table.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct GridHeader {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub a: u32,
    pub b: u32,
    pub c: u32,
}

/// Risk-map export: grid header and row-major `R` and binary `R̄` arrays,
/// index `((k - 1) a + (i - 1)) b + (j - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RiskMapFile {
    pub grid: GridHeader,
    pub threshold: f64,
    pub risk: Vec<f64>,
    #[serde(rename = "unsafe")]
    pub unsafe_: Vec<u8>,
}

impl RiskMapFile {
    pub fn from_map(map: &RiskMap) -> Self {
        let g = map.grid();
        let (a, b, c) = g.dims();
        Self {
            grid: GridHeader { dx: g.dx(), dy: g.dy(), dz: g.dz(), a, b, c },
            threshold: map.threshold(),
            risk: map.risk_values().to_vec(),
            unsafe_: map.unsafe_flags().iter().map(|u| *u as u8).collect(),
        }
    }
}

/// One layer of the map as `i, j, x, y, risk, relative_risk, unsafe`.
pub fn layer_table(map: &RiskMap, k: u32) -> Result<Table> {
    let g = map.grid();
    let (a, b, _) = g.dims();
    let mut t = Table::new(LAYER);
    for i in 1..=a {
        for j in 1..=b {
            let c = uam_core::CellIndex::new(i, j, k);
            let p = g.cell_center(&c)?;
            t.push(vec![
                i.to_string(),
                j.to_string(),
                num(p.x),
                num(p.y),
                num(map.risk(&c)),
                num(map.relative_risk(&c)),
                (map.is_unsafe(&c) as u8).to_string(),
            ])?;
        }
    }
    Ok(t)
}

pub fn push_track(t: &mut Table, track: &Track) -> Result<()> {
    for (n, (p, time)) in track.waypoints.iter().zip(&track.times).enumerate() {
        t.push(vec![track.stage.name().into(), (n + 1).to_string(), num(p.x), num(p.y), num(p.z), num(*time)])?;
    }
    Ok(())
}
