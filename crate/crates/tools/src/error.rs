use std::path::{Path, PathBuf};

use uam_core::fleet::FleetError;
use uam_core::planner::PlannerError;
use uam_core::risk::RiskError;
use uam_core::scene::SceneError;
use uam_core::GridError;

use crate::io::RasterError;

#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {source}")]
    Raster { path: PathBuf, source: RasterError },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl ToolError {
    /// 1 for bad input, 2 when the problem has no solution, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Io { .. } | ToolError::Json { .. } | ToolError::Raster { .. } | ToolError::Validation(_) => 1,
            ToolError::Infeasible(_) => 2,
            ToolError::Internal(_) => 3,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ToolError::Io { path: path.to_path_buf(), source }
    }

    pub fn validation(msg: impl std::fmt::Display) -> Self {
        ToolError::Validation(msg.to_string())
    }
}

impl From<SceneError> for ToolError {
    fn from(e: SceneError) -> Self {
        ToolError::Validation(e.to_string())
    }
}

impl From<GridError> for ToolError {
    fn from(e: GridError) -> Self {
        ToolError::Validation(e.to_string())
    }
}

impl From<RiskError> for ToolError {
    fn from(e: RiskError) -> Self {
        match e {
            RiskError::Numerical(_) => ToolError::Internal(e.to_string()),
            _ => ToolError::Validation(e.to_string()),
        }
    }
}

impl From<PlannerError> for ToolError {
    fn from(e: PlannerError) -> Self {
        match e {
            PlannerError::Infeasible { .. } | PlannerError::RangeExceeded { .. } | PlannerError::BlockedEndpoint(_) => {
                ToolError::Infeasible(e.to_string())
            }
            _ => ToolError::Validation(e.to_string()),
        }
    }
}

impl From<FleetError> for ToolError {
    fn from(e: FleetError) -> Self {
        match e {
            FleetError::Plan { .. } | FleetError::NoFeasible => ToolError::Infeasible(e.to_string()),
            _ => ToolError::Validation(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;
