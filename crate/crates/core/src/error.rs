use thiserror::Error;

use crate::csvfmt::CsvError;
use crate::eskf::EskfError;
use crate::geometry::GeometryError;
use crate::harness::HarnessError;
use crate::hybrid_tracker::HybridError;
use crate::marker_tracker::TrackerError;
use crate::simworld::SimError;

/// Any failure surfaced by the crate's top-level pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eskf(#[from] EskfError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Marker(#[from] TrackerError),
    #[error(transparent)]
    Hybrid(#[from] HybridError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Geometry(_) => "geometry",
            Error::Eskf(_) => "filter",
            Error::Sim(_) => "scenario",
            Error::Marker(_) => "marker-tracker",
            Error::Hybrid(_) => "hybrid-tracker",
            Error::Harness(_) => "evaluation",
            Error::Csv(_) => "csv",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
