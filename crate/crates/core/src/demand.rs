//! Population/load similarity checks and disaggregation of planning-area
//! load to per-bus Relative Demand Index (RDI) values.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ingest::{parse_hourly_loads, GridDataset, HourlyLoadRecord, IngestError};

/// Share of demand assigned to urban buses when not overridden.
pub const DEFAULT_URBAN_SHARE: f64 = 0.848;

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("vector is all zero")]
    ZeroVector,
    #[error("vector is constant")]
    ConstantVector,
    #[error("ratio vector entries must be finite and nonnegative, got {0}")]
    InvalidEntry(f64),
    #[error("urban share must lie in [0, 1], got {0}")]
    InvalidShare(f64),
    #[error("load series `{year}` has no value for planning area `{area}`")]
    MissingArea { year: String, area: String },
    #[error("load series `{year}` names unknown planning area `{area}`")]
    UnknownArea { year: String, area: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Values over planning areas in a fixed area order.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioVector(Vec<f64>);

impl RatioVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DemandError> {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(DemandError::InvalidEntry(bad));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn same_len(a: &RatioVector, b: &RatioVector, needed: usize) -> Result<(), DemandError> {
    if a.len() != b.len() {
        return Err(DemandError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < needed {
        return Err(DemandError::TooShort {
            needed,
            got: a.len(),
        });
    }
    Ok(())
}

pub fn cosine_similarity(a: &RatioVector, b: &RatioVector) -> Result<f64, DemandError> {
    same_len(a, b, 1)?;
    let dot: f64 = a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum();
    let na = a.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(DemandError::ZeroVector);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Sample Pearson correlation of paired values.
pub fn pearson(a: &RatioVector, b: &RatioVector) -> Result<f64, DemandError> {
    same_len(a, b, 2)?;
    let n = a.len() as f64;
    let ma = a.0.iter().sum::<f64>() / n;
    let mb = b.0.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.0.iter().zip(&b.0) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Err(DemandError::ConstantVector);
    }
    Ok((cov / (va.sqrt() * vb.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityRow {
    pub year: String,
    pub cosine: f64,
    pub pearson: f64,
}

/// Population per planning area, in dataset area order.
pub fn population_vector(dataset: &GridDataset) -> Result<RatioVector, DemandError> {
    RatioVector::new(
        dataset
            .planning_areas()
            .iter()
            .map(|a| a.population as f64)
            .collect(),
    )
}

fn load_vector(
    dataset: &GridDataset,
    year: &str,
    loads: &[HourlyLoadRecord],
) -> Result<RatioVector, DemandError> {
    let by_area: BTreeMap<&str, f64> = loads
        .iter()
        .map(|r| (r.area_id.as_str(), r.avg_hourly_load_mw))
        .collect();
    for r in loads {
        if !dataset.planning_areas().iter().any(|a| a.id == r.area_id) {
            return Err(DemandError::UnknownArea {
                year: year.to_string(),
                area: r.area_id.clone(),
            });
        }
    }
    let values = dataset
        .planning_areas()
        .iter()
        .map(|a| {
            by_area
                .get(a.id.as_str())
                .copied()
                .ok_or_else(|| DemandError::MissingArea {
                    year: year.to_string(),
                    area: a.id.clone(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    RatioVector::new(values)
}

/// Compares each year's area load vector against the (fixed) population
/// vector. One row per supplied year, in input order.
pub fn similarity_report(
    dataset: &GridDataset,
    years: &[(String, Vec<HourlyLoadRecord>)],
) -> Result<Vec<SimilarityRow>, DemandError> {
    let population = population_vector(dataset)?;
    years
        .iter()
        .map(|(year, loads)| {
            let load = load_vector(dataset, year, loads)?;
            Ok(SimilarityRow {
                year: year.clone(),
                cosine: cosine_similarity(&population, &load)?,
                pearson: pearson(&population, &load)?,
            })
        })
        .collect()
}

pub fn write_similarity_csv<W: Write>(rows: &[SimilarityRow], w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["year", "cosine", "pearson"])?;
    for r in rows {
        wtr.write_record([r.year.clone(), r.cosine.to_string(), r.pearson.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Finds `HourlyLoad_<year>.csv` files in `dir`, sorted by year label.
pub fn discover_year_loads(dir: &Path) -> Result<Vec<(String, PathBuf)>, DemandError> {
    let entries = std::fs::read_dir(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(year) = name
            .strip_prefix("HourlyLoad_")
            .and_then(|s| s.strip_suffix(".csv"))
        {
            if !year.is_empty() {
                out.push((year.to_string(), entry.path()));
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn read_year_loads(
    files: &[(String, PathBuf)],
) -> Result<Vec<(String, Vec<HourlyLoadRecord>)>, DemandError> {
    files
        .iter()
        .map(|(year, path)| Ok((year.clone(), parse_hourly_loads(path)?)))
        .collect()
}

/// Per-bus RDI, covering every bus of the dataset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DemandIndex {
    values: BTreeMap<String, f64>,
}

impl DemandIndex {
    pub fn from_values(values: BTreeMap<String, f64>) -> Self {
        Self { values }
    }

    pub fn get(&self, bus_id: &str) -> f64 {
        self.values.get(bus_id).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    /// `bus_id,rdi` in bus id order.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["bus_id", "rdi"])?;
        for (id, v) in &self.values {
            wtr.write_record([id.clone(), v.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AllocationOutcome {
    pub index: DemandIndex,
    /// Areas holding load but no buses; their load goes nowhere.
    pub areas_without_buses: Vec<String>,
    /// Buses outside every planning area; they receive 0.
    pub unassigned_buses: Vec<String>,
}

/// Per-bus RDI for one area: `(each urban bus, each non-urban bus)`.
///
/// The urban share of `area_load` is split evenly over urban buses and the
/// remainder over non-urban buses. When one category is empty the other
/// takes the whole area load. With no buses at all both values are 0.
pub fn split_area_load(
    area_load: f64,
    urban: usize,
    non_urban: usize,
    urban_share: f64,
) -> (f64, f64) {
    match (urban, non_urban) {
        (0, 0) => (0.0, 0.0),
        (u, 0) => (area_load / u as f64, 0.0),
        (0, n) => (0.0, area_load / n as f64),
        (u, n) => (
            urban_share * area_load / u as f64,
            (1.0 - urban_share) * area_load / n as f64,
        ),
    }
}

pub fn allocate_demand_index(
    dataset: &GridDataset,
    urban_share: f64,
) -> Result<AllocationOutcome, DemandError> {
    if !(0.0..=1.0).contains(&urban_share) {
        return Err(DemandError::InvalidShare(urban_share));
    }
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for bus in dataset.buses() {
        if let Some(area) = &bus.planning_area_id {
            let c = counts.entry(area.as_str()).or_default();
            if bus.is_urban {
                c.0 += 1;
            } else {
                c.1 += 1;
            }
        }
    }
    let mut per_bus: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut areas_without_buses = Vec::new();
    for area in dataset.planning_areas() {
        let (u, n) = counts.get(area.id.as_str()).copied().unwrap_or((0, 0));
        if u + n == 0 {
            areas_without_buses.push(area.id.clone());
        }
        per_bus.insert(
            area.id.as_str(),
            split_area_load(area.avg_hourly_load_mw, u, n, urban_share),
        );
    }

    let values = dataset
        .buses()
        .iter()
        .map(|bus| {
            let v = bus
                .planning_area_id
                .as_deref()
                .and_then(|a| per_bus.get(a))
                .map(|&(urban, rural)| if bus.is_urban { urban } else { rural })
                .unwrap_or(0.0);
            (bus.id.clone(), v)
        })
        .collect();
    Ok(AllocationOutcome {
        index: DemandIndex { values },
        areas_without_buses,
        unassigned_buses: dataset.unassigned_buses().to_vec(),
    })
}
