use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::GridDataset;

/// Non-fatal findings about a dataset. Everything here is a warning; hard
/// errors are raised while assembling the dataset.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub unassigned_buses: Vec<String>,
    pub isolated_buses: Vec<String>,
    /// Lines rated above the nominal voltage of both endpoints (raw kV).
    pub line_voltage_anomalies: Vec<String>,
    /// Lines rated below the nominal voltage of both endpoints (raw kV).
    pub lines_below_endpoints: Vec<String>,
    pub duplicate_bus_locations: Vec<(String, String)>,
    pub duplicate_line_geometries: Vec<(String, String)>,
    pub areas_without_load: Vec<String>,
    pub areas_without_buses: Vec<String>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.entry_count() == 0
    }

    pub fn entry_count(&self) -> usize {
        self.unassigned_buses.len()
            + self.isolated_buses.len()
            + self.line_voltage_anomalies.len()
            + self.lines_below_endpoints.len()
            + self.duplicate_bus_locations.len()
            + self.duplicate_line_geometries.len()
            + self.areas_without_load.len()
            + self.areas_without_buses.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for id in &self.unassigned_buses {
            writeln!(f, "unassigned_bus {id}")?;
        }
        for id in &self.isolated_buses {
            writeln!(f, "isolated_bus {id}")?;
        }
        for id in &self.line_voltage_anomalies {
            writeln!(f, "line_voltage_above_endpoints {id}")?;
        }
        for id in &self.lines_below_endpoints {
            writeln!(f, "line_voltage_below_endpoints {id}")?;
        }
        for (a, b) in &self.duplicate_bus_locations {
            writeln!(f, "duplicate_bus_location {a} {b}")?;
        }
        for (a, b) in &self.duplicate_line_geometries {
            writeln!(f, "duplicate_line_geometry {a} {b}")?;
        }
        for id in &self.areas_without_load {
            writeln!(f, "area_without_load {id}")?;
        }
        for id in &self.areas_without_buses {
            writeln!(f, "area_without_buses {id}")?;
        }
        Ok(())
    }
}

fn point_key(x: f64, y: f64) -> (u64, u64) {
    // +0.0 so that -0.0 and 0.0 compare equal
    ((x + 0.0).to_bits(), (y + 0.0).to_bits())
}

pub fn validate_dataset(dataset: &GridDataset) -> ValidationReport {
    let mut report = ValidationReport {
        unassigned_buses: dataset.unassigned_buses().to_vec(),
        areas_without_load: dataset.areas_without_load().to_vec(),
        ..Default::default()
    };

    let mut degree: BTreeMap<&str, usize> =
        dataset.buses().iter().map(|b| (b.id.as_str(), 0)).collect();
    for line in dataset.lines() {
        *degree.entry(line.endpoint_a.as_str()).or_default() += 1;
        *degree.entry(line.endpoint_b.as_str()).or_default() += 1;

        let (Some(a), Some(b)) = (dataset.bus(&line.endpoint_a), dataset.bus(&line.endpoint_b))
        else {
            continue;
        };
        if line.voltage_kv > a.voltage_kv && line.voltage_kv > b.voltage_kv {
            report.line_voltage_anomalies.push(line.id.clone());
        } else if line.voltage_kv < a.voltage_kv && line.voltage_kv < b.voltage_kv {
            report.lines_below_endpoints.push(line.id.clone());
        }
    }
    report.isolated_buses = degree
        .into_iter()
        .filter(|&(_, d)| d == 0)
        .map(|(id, _)| id.to_string())
        .collect();

    let mut seen_points: BTreeMap<(u64, u64), &str> = BTreeMap::new();
    for bus in dataset.buses() {
        let key = point_key(bus.location.x, bus.location.y);
        if let Some(first) = seen_points.get(&key) {
            report
                .duplicate_bus_locations
                .push((first.to_string(), bus.id.clone()));
        } else {
            seen_points.insert(key, &bus.id);
        }
    }

    let mut seen_geoms: BTreeMap<Vec<(u64, u64)>, &str> = BTreeMap::new();
    for line in dataset.lines() {
        let Some(geom) = &line.geometry else { continue };
        let mut fwd: Vec<(u64, u64)> = geom.iter().map(|p| point_key(p.x, p.y)).collect();
        let mut rev = fwd.clone();
        rev.reverse();
        // direction-agnostic key
        if rev < fwd {
            std::mem::swap(&mut fwd, &mut rev);
        }
        if let Some(first) = seen_geoms.get(&fwd) {
            report
                .duplicate_line_geometries
                .push((first.to_string(), line.id.clone()));
        } else {
            seen_geoms.insert(fwd, &line.id);
        }
    }

    let populated: BTreeSet<&str> = dataset
        .buses()
        .iter()
        .filter_map(|b| b.planning_area_id.as_deref())
        .collect();
    report.areas_without_buses = dataset
        .planning_areas()
        .iter()
        .filter(|a| !populated.contains(a.id.as_str()))
        .map(|a| a.id.clone())
        .collect();

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{
        BusRecord, DatasetParts, HourlyLoadRecord, LineRecord, NamedPolygon, PlanarPoint,
        PlanarPolygon, Provenance,
    };

    fn bus(id: &str, x: f64, kv: f64) -> BusRecord {
        BusRecord {
            id: id.into(),
            name: id.into(),
            location: PlanarPoint::new(x, 1.0),
            voltage_kv: kv,
            planning_area_id: None,
            is_urban: false,
        }
    }

    fn line(id: &str, a: &str, b: &str, kv: f64) -> LineRecord {
        LineRecord {
            id: id.into(),
            endpoint_a: a.into(),
            endpoint_b: b.into(),
            voltage_kv: kv,
            geometry: None,
        }
    }

    fn area() -> NamedPolygon {
        NamedPolygon {
            id: "1".into(),
            name: "one".into(),
            polygon: PlanarPolygon::new(vec![vec![
                PlanarPoint::new(0.0, 0.0),
                PlanarPoint::new(100.0, 0.0),
                PlanarPoint::new(100.0, 100.0),
                PlanarPoint::new(0.0, 100.0),
            ]])
            .unwrap(),
        }
    }

    fn consistent_parts() -> DatasetParts {
        DatasetParts {
            buses: vec![bus("S1", 1.0, 240.0), bus("S2", 2.0, 138.0)],
            lines: vec![line("L1", "S1", "S2", 240.0)],
            planning_area_polygons: vec![area()],
            hourly_loads: vec![HourlyLoadRecord {
                area_id: "1".into(),
                name: "one".into(),
                avg_hourly_load_mw: 10.0,
            }],
            ..Default::default()
        }
    }

    #[test]
    fn consistent_fixture_is_clean() {
        let ds = GridDataset::assemble(consistent_parts(), Provenance::default()).unwrap();
        let report = validate_dataset(&ds);
        assert!(report.is_empty(), "{report}");
    }

    #[test]
    fn isolated_bus_reported() {
        let mut parts = consistent_parts();
        parts.buses.push(bus("S3", 3.0, 138.0));
        let ds = GridDataset::assemble(parts, Provenance::default()).unwrap();
        let report = validate_dataset(&ds);
        assert_eq!(report.isolated_buses, vec!["S3".to_string()]);
        assert_eq!(report.entry_count(), 1);
    }

    #[test]
    fn line_above_both_endpoints_is_an_anomaly() {
        let mut parts = consistent_parts();
        parts.buses = vec![bus("S1", 1.0, 240.0), bus("S2", 2.0, 240.0)];
        parts.lines = vec![line("L1", "S1", "S2", 500.0)];
        let ds = GridDataset::assemble(parts, Provenance::default()).unwrap();
        let report = validate_dataset(&ds);
        assert_eq!(report.line_voltage_anomalies, vec!["L1".to_string()]);
    }

    #[test]
    fn duplicates_and_missing_load() {
        let mut parts = consistent_parts();
        parts.buses.push(bus("S3", 2.0, 138.0));
        let g = vec![PlanarPoint::new(0.0, 0.0), PlanarPoint::new(1.0, 1.0)];
        let mut rg = g.clone();
        rg.reverse();
        parts.lines = vec![
            LineRecord {
                geometry: Some(g),
                ..line("L1", "S1", "S2", 240.0)
            },
            LineRecord {
                geometry: Some(rg),
                ..line("L2", "S1", "S3", 240.0)
            },
        ];
        parts.hourly_loads.clear();
        let ds = GridDataset::assemble(parts, Provenance::default()).unwrap();
        let report = validate_dataset(&ds);
        assert_eq!(
            report.duplicate_bus_locations,
            vec![("S2".into(), "S3".into())]
        );
        assert_eq!(
            report.duplicate_line_geometries,
            vec![("L1".into(), "L2".into())]
        );
        assert_eq!(report.areas_without_load, vec!["1".to_string()]);
    }
}
