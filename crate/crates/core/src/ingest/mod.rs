//! Parsing of the open-data CSV family into a validated [`GridDataset`].

mod csv_io;
mod dataset;
pub mod fetch;
pub mod geometry;
mod regions;
mod validate;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use csv_io::Table;
pub use csv_io::{
    parse_buses, parse_buses_from, parse_city_polygons, parse_city_polygons_from, parse_generators,
    parse_generators_from, parse_hourly_loads, parse_hourly_loads_from, parse_lines,
    parse_lines_from, parse_planning_area_polygons, parse_planning_area_polygons_from,
    parse_population_points, parse_population_points_from, write_buses, write_city_polygons,
    write_generators, write_hourly_loads, write_lines, write_planning_area_polygons,
    write_population_points,
};
pub use dataset::{load_dataset, DatasetFiles, DatasetParts, GridDataset, Provenance};
pub use fetch::{fetch_dataset, FetchError, FetchManifest, HttpTransport, Transport};
pub use geometry::{point_in_polygon, PlanarPoint, PlanarPolygon, PointLocation};
pub use regions::{aggregate_population, assign_regions, RegionAssignment};
pub use validate::{validate_dataset, ValidationReport};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: malformed CSV: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: String },
    #[error("{file}: duplicate id `{id}` at row {row}")]
    DuplicateId {
        file: String,
        id: String,
        row: usize,
    },
    #[error("{file}: row {row}: column `{column}` is not numeric: `{value}`")]
    NonNumeric {
        file: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{file}: row {row}: column `{column}` {reason}")]
    InvalidValue {
        file: String,
        row: usize,
        column: String,
        reason: String,
    },
    #[error("{file}: row {row}: line `{id}` connects a bus to itself")]
    SelfLoop {
        file: String,
        row: usize,
        id: String,
    },
    #[error("{kind} `{id}` references unknown {target} `{reference}`")]
    DanglingReference {
        kind: &'static str,
        id: String,
        target: &'static str,
        reference: String,
    },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("bus `{bus}` lies inside several planning areas: {}", areas.join(", "))]
    OverlappingAreas { bus: String, areas: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusRecord {
    pub id: String,
    pub name: String,
    pub location: PlanarPoint,
    pub voltage_kv: f64,
    /// Filled in by [`assign_regions`], never parsed.
    pub planning_area_id: Option<String>,
    pub is_urban: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineRecord {
    pub id: String,
    pub endpoint_a: String,
    pub endpoint_b: String,
    pub voltage_kv: f64,
    pub geometry: Option<Vec<PlanarPoint>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRecord {
    pub id: String,
    pub bus_id: String,
    pub max_capacity_mw: f64,
    pub fuel_type: String,
}

/// A named polygon as read from one of the border files.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedPolygon {
    pub id: String,
    pub name: String,
    pub polygon: PlanarPolygon,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanningArea {
    pub id: String,
    pub name: String,
    pub boundary: PlanarPolygon,
    pub avg_hourly_load_mw: f64,
    /// Sum of population points falling inside the boundary.
    pub population: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationPoint {
    pub city_id: String,
    pub location: PlanarPoint,
    pub population: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HourlyLoadRecord {
    pub area_id: String,
    pub name: String,
    pub avg_hourly_load_mw: f64,
}
