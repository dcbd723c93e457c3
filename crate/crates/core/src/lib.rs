//! Reconstruction of a directed transmission-network model from open grid
//! data: dataset ingest, line-direction recovery, demand disaggregation to
//! buses, and a flow-conservation linear program for line loadings.

pub mod analysis;
pub mod demand;
pub mod direction;
pub mod dispatch;
pub mod grid;
pub mod ingest;

pub use grid::{build_grid, voltage_class, Grid, VoltageClass};
pub use ingest::{load_dataset, GridDataset, IngestError, ValidationReport};
