use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::csv_io::*;
use super::regions::{aggregate_population, assign_regions};
use super::{
    BusRecord, GeneratorRecord, HourlyLoadRecord, IngestError, LineRecord, NamedPolygon,
    PlanningArea, PopulationPoint,
};

/// File names making up a dataset directory.
pub struct DatasetFiles;

impl DatasetFiles {
    pub const SUBSTATIONS: &'static str = "Substation.csv";
    pub const LINES: &'static str = "Line.csv";
    pub const GENERATORS: &'static str = "Generator.csv";
    pub const PLANNING_AREAS: &'static str = "PlanningAreaBorder.csv";
    pub const CITIES: &'static str = "CityBorder.csv";
    pub const POPULATION: &'static str = "CityPopulationPoint.csv";
    pub const HOURLY_LOAD: &'static str = "HourlyLoad.csv";
    pub const SNAPSHOT: &'static str = "Snapshot.csv";
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub source_files: Vec<PathBuf>,
    pub ingested_at_unix: u64,
}

/// Raw parsed records before linking.
#[derive(Clone, Debug, Default)]
pub struct DatasetParts {
    pub buses: Vec<BusRecord>,
    pub lines: Vec<LineRecord>,
    pub generators: Vec<GeneratorRecord>,
    pub planning_area_polygons: Vec<NamedPolygon>,
    pub city_polygons: Vec<NamedPolygon>,
    pub population_points: Vec<PopulationPoint>,
    pub hourly_loads: Vec<HourlyLoadRecord>,
}

/// Linked, region-annotated dataset. Records are held sorted by id and
/// the value is never mutated after [`GridDataset::assemble`].
#[derive(Clone, Debug)]
pub struct GridDataset {
    buses: Vec<BusRecord>,
    lines: Vec<LineRecord>,
    generators: Vec<GeneratorRecord>,
    planning_areas: Vec<PlanningArea>,
    city_polygons: Vec<NamedPolygon>,
    population_points: Vec<PopulationPoint>,
    bus_index: BTreeMap<String, usize>,
    unassigned_buses: Vec<String>,
    areas_without_load: Vec<String>,
    provenance: Provenance,
}

impl GridDataset {
    pub fn assemble(parts: DatasetParts, provenance: Provenance) -> Result<Self, IngestError> {
        let DatasetParts {
            mut buses,
            mut lines,
            mut generators,
            mut planning_area_polygons,
            mut city_polygons,
            population_points,
            hourly_loads,
        } = parts;
        buses.sort_by(|a, b| a.id.cmp(&b.id));
        lines.sort_by(|a, b| a.id.cmp(&b.id));
        generators.sort_by(|a, b| a.id.cmp(&b.id));
        planning_area_polygons.sort_by(|a, b| a.id.cmp(&b.id));
        city_polygons.sort_by(|a, b| a.id.cmp(&b.id));

        ensure_unique(
            buses.iter().map(|b| b.id.as_str()),
            DatasetFiles::SUBSTATIONS,
        )?;
        ensure_unique(lines.iter().map(|l| l.id.as_str()), DatasetFiles::LINES)?;
        ensure_unique(
            generators.iter().map(|g| g.id.as_str()),
            DatasetFiles::GENERATORS,
        )?;
        ensure_unique(
            planning_area_polygons.iter().map(|p| p.id.as_str()),
            DatasetFiles::PLANNING_AREAS,
        )?;

        let bus_ids: HashSet<&str> = buses.iter().map(|b| b.id.as_str()).collect();
        for line in &lines {
            for end in [&line.endpoint_a, &line.endpoint_b] {
                if !bus_ids.contains(end.as_str()) {
                    return Err(IngestError::DanglingReference {
                        kind: "line",
                        id: line.id.clone(),
                        target: "bus",
                        reference: end.clone(),
                    });
                }
            }
            if line.endpoint_a == line.endpoint_b {
                return Err(IngestError::SelfLoop {
                    file: DatasetFiles::LINES.into(),
                    row: 0,
                    id: line.id.clone(),
                });
            }
        }
        for gen in &generators {
            if !bus_ids.contains(gen.bus_id.as_str()) {
                return Err(IngestError::DanglingReference {
                    kind: "generator",
                    id: gen.id.clone(),
                    target: "bus",
                    reference: gen.bus_id.clone(),
                });
            }
        }

        let area_ids: HashSet<&str> = planning_area_polygons
            .iter()
            .map(|p| p.id.as_str())
            .collect();
        let mut loads: BTreeMap<&str, f64> = BTreeMap::new();
        for rec in &hourly_loads {
            if !area_ids.contains(rec.area_id.as_str()) {
                return Err(IngestError::DanglingReference {
                    kind: "hourly load",
                    id: rec.area_id.clone(),
                    target: "planning area",
                    reference: rec.area_id.clone(),
                });
            }
            loads.insert(rec.area_id.as_str(), rec.avg_hourly_load_mw);
        }

        let mut areas_without_load = Vec::new();
        let mut planning_areas: Vec<PlanningArea> = planning_area_polygons
            .into_iter()
            .map(|p| {
                let load = loads.get(p.id.as_str()).copied();
                if load.is_none() {
                    areas_without_load.push(p.id.clone());
                }
                PlanningArea {
                    id: p.id,
                    name: p.name,
                    boundary: p.polygon,
                    avg_hourly_load_mw: load.unwrap_or(0.0),
                    population: 0,
                }
            })
            .collect();

        let populations = aggregate_population(&planning_areas, &population_points)?;
        for (area, pop) in planning_areas.iter_mut().zip(populations) {
            area.population = pop;
        }

        let assignment = assign_regions(&buses, &planning_areas, &city_polygons)?;
        let buses = assignment.buses;
        let bus_index = buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.clone(), i))
            .collect();

        Ok(Self {
            buses,
            lines,
            generators,
            planning_areas,
            city_polygons,
            population_points,
            bus_index,
            unassigned_buses: assignment.unassigned,
            areas_without_load,
            provenance,
        })
    }

    pub fn buses(&self) -> &[BusRecord] {
        &self.buses
    }

    pub fn lines(&self) -> &[LineRecord] {
        &self.lines
    }

    pub fn generators(&self) -> &[GeneratorRecord] {
        &self.generators
    }

    pub fn planning_areas(&self) -> &[PlanningArea] {
        &self.planning_areas
    }

    pub fn city_polygons(&self) -> &[NamedPolygon] {
        &self.city_polygons
    }

    pub fn population_points(&self) -> &[PopulationPoint] {
        &self.population_points
    }

    pub fn bus(&self, id: &str) -> Option<&BusRecord> {
        self.bus_index.get(id).map(|&i| &self.buses[i])
    }

    pub fn unassigned_buses(&self) -> &[String] {
        &self.unassigned_buses
    }

    pub fn areas_without_load(&self) -> &[String] {
        &self.areas_without_load
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

fn ensure_unique<'a>(ids: impl Iterator<Item = &'a str>, file: &str) -> Result<(), IngestError> {
    let mut prev: Option<&str> = None;
    // ids arrive sorted, so duplicates are adjacent
    for (i, id) in ids.enumerate() {
        if prev == Some(id) {
            return Err(IngestError::DuplicateId {
                file: file.to_string(),
                id: id.to_string(),
                row: i + 2,
            });
        }
        prev = Some(id);
    }
    Ok(())
}

/// Reads a dataset directory. `Substation.csv` and `Line.csv` are
/// required; the remaining files are optional and default to empty.
pub fn load_dataset(dir: &Path) -> Result<GridDataset, IngestError> {
    let mut sources = Vec::new();
    let mut required = |name: &str| {
        let p = dir.join(name);
        sources.push(p.clone());
        p
    };
    let buses = parse_buses(&required(DatasetFiles::SUBSTATIONS))?;
    let lines = parse_lines(&required(DatasetFiles::LINES))?;

    let optional = |name: &str| {
        let p = dir.join(name);
        p.is_file().then_some(p)
    };
    let mut parts = DatasetParts {
        buses,
        lines,
        ..Default::default()
    };
    if let Some(p) = optional(DatasetFiles::GENERATORS) {
        parts.generators = parse_generators(&p)?;
        sources.push(p);
    }
    if let Some(p) = optional(DatasetFiles::PLANNING_AREAS) {
        parts.planning_area_polygons = parse_planning_area_polygons(&p)?;
        sources.push(p);
    }
    if let Some(p) = optional(DatasetFiles::CITIES) {
        parts.city_polygons = parse_city_polygons(&p)?;
        sources.push(p);
    }
    if let Some(p) = optional(DatasetFiles::POPULATION) {
        parts.population_points = parse_population_points(&p)?;
        sources.push(p);
    }
    if let Some(p) = optional(DatasetFiles::HOURLY_LOAD) {
        parts.hourly_loads = parse_hourly_loads(&p)?;
        sources.push(p);
    }
    let ingested_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    GridDataset::assemble(
        parts,
        Provenance {
            source_files: sources,
            ingested_at_unix,
        },
    )
}
